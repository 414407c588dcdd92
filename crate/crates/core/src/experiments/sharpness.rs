use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{csv_text, markdown_table, num, svg_plot, Report, Series};
use crate::error::{Error, Result};
use crate::fem::{generate_mesh, solve_neumann_fem, solve_steklov_fem, DomainFamily, FemOptions};
use crate::special::find_zeta;

/// Neumann eigenvalues kept for the passage family, counting `mu_0`.
pub const PASSAGE_NEUMANN_COUNT: usize = 6;

/// Relative change below which a step against the expected trend counts as
/// noise.
pub const MONOTONE_NOISE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessRow {
    pub eps: f64,
    pub passage_vertices: usize,
    pub passage_area: f64,
    /// `mu_0 .. mu_5` of the passage domain.
    pub passage_mu: Vec<f64>,
    pub mu2_area: f64,
    pub passage_sigma1: f64,
    pub overlap_vertices: usize,
    pub overlap_perimeter: f64,
    pub sigma2_perimeter: f64,
}

enum Job {
    Passage(f64),
    Overlap(f64),
}

enum Outcome {
    Passage { vertices: usize, area: f64, mu: Vec<f64>, sigma1: f64 },
    Overlap { vertices: usize, perimeter: f64, sigma2: f64 },
}

fn run_job(job: &Job, cfg: &ExperimentConfig) -> Result<Outcome> {
    match *job {
        Job::Passage(eps) => {
            let family = DomainFamily::TwoDisksPassage { length: cfg.passage_length, width: eps };
            let mesh = generate_mesh::<f64>(&family, cfg.fem_h)?;
            let mu = solve_neumann_fem(&mesh, &FemOptions::with_count(PASSAGE_NEUMANN_COUNT))?.values().to_vec();
            let sigma = solve_steklov_fem(&mesh, &FemOptions::with_count(2))?;
            Ok(Outcome::Passage { vertices: mesh.vertex_count(), area: mesh.area(), mu, sigma1: sigma.values()[1] })
        }
        Job::Overlap(eps) => {
            let mesh = generate_mesh::<f64>(&DomainFamily::TwoDisksOverlap { eps }, cfg.fem_h)?;
            let sigma = solve_steklov_fem(&mesh, &FemOptions::with_count(3))?;
            Ok(Outcome::Overlap {
                vertices: mesh.vertex_count(),
                perimeter: mesh.perimeter(),
                sigma2: sigma.values()[2],
            })
        }
    }
}

/// Flags steps that go against `increasing` by more than the noise level.
fn trend_warnings(name: &str, eps: &[f64], values: &[f64], increasing: bool) -> Vec<String> {
    let mut out = Vec::new();
    for k in 1..values.len() {
        let step = values[k] - values[k - 1];
        let against = if increasing { -step } else { step };
        if against > MONOTONE_NOISE * values[k - 1].abs() {
            out.push(format!(
                "{name} is not monotone between eps = {} and eps = {} ({} -> {})",
                eps[k - 1],
                eps[k],
                num(values[k - 1]),
                num(values[k])
            ));
        }
    }
    out
}

/// Sweeps the two degenerating families over the configured eps list
/// (descending): the passage family for Neumann and the collapse of
/// Steklov, the overlapping disks for Steklov.
pub fn run_sharpness(cfg: &ExperimentConfig) -> Result<(Vec<SharpnessRow>, Report)> {
    if cfg.eps.is_empty() || cfg.eps.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidInput(format!("eps list {:?} must be strictly descending", cfg.eps)));
    }
    cfg.validate()?;
    let jobs: Vec<Job> = cfg.eps.iter().flat_map(|&e| [Job::Passage(e), Job::Overlap(e)]).collect();
    let outcomes: Vec<Result<Outcome>> = jobs.par_iter().map(|j| run_job(j, cfg)).collect();
    let mut rows = Vec::new();
    let mut it = outcomes.into_iter();
    for &eps in &cfg.eps {
        let (p, o) = (it.next().expect("passage job")?, it.next().expect("overlap job")?);
        let (Outcome::Passage { vertices, area, mu, sigma1 }, Outcome::Overlap { vertices: ov, perimeter, sigma2 }) = (p, o)
        else {
            unreachable!("jobs alternate");
        };
        rows.push(SharpnessRow {
            eps,
            passage_vertices: vertices,
            passage_area: area,
            mu2_area: mu[2] * area,
            passage_mu: mu,
            passage_sigma1: sigma1,
            overlap_vertices: ov,
            overlap_perimeter: perimeter,
            sigma2_perimeter: sigma2 * perimeter,
        });
    }

    let mu1d = find_zeta::<f64>().powi(2);
    let (nbound, sbound) = (2.0 * mu1d * PI, 4.0 * PI);
    let mut report = Report::default();
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let mu2: Vec<f64> = rows.iter().map(|r| r.mu2_area).collect();
    let s2: Vec<f64> = rows.iter().map(|r| r.sigma2_perimeter).collect();
    let s1: Vec<f64> = rows.iter().map(|r| r.passage_sigma1).collect();
    report.warnings.extend(trend_warnings("mu_2 Area (passage)", &eps, &mu2, true));
    report.warnings.extend(trend_warnings("sigma_2 Perimeter (overlap)", &eps, &s2, true));
    report.warnings.extend(trend_warnings("sigma_1 (passage)", &eps, &s1, false));
    for r in &rows {
        if !(r.mu2_area < nbound) {
            report.failures.push(format!(
                "eps {}: mu_2 Area = {} is not below 2 mu_1(D) pi = {} ({} vertices); solver defect, not a counterexample",
                r.eps,
                num(r.mu2_area),
                num(nbound),
                r.passage_vertices
            ));
        }
        if !(r.sigma2_perimeter < sbound) {
            report.failures.push(format!(
                "eps {}: sigma_2 Perimeter = {} is not below 4 pi ({} vertices); solver defect, not a counterexample",
                r.eps,
                num(r.sigma2_perimeter),
                r.overlap_vertices
            ));
        }
    }

    let header = [
        "eps",
        "passage_vertices",
        "passage_area",
        "mu1",
        "mu2",
        "mu2_area",
        "mu2_area_over_bound",
        "passage_sigma1",
        "overlap_vertices",
        "overlap_perimeter",
        "sigma2_perimeter",
        "sigma2_perimeter_over_bound",
    ];
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.eps.to_string(),
                r.passage_vertices.to_string(),
                num(r.passage_area),
                num(r.passage_mu[1]),
                num(r.passage_mu[2]),
                num(r.mu2_area),
                num(r.mu2_area / nbound),
                num(r.passage_sigma1),
                r.overlap_vertices.to_string(),
                num(r.overlap_perimeter),
                num(r.sigma2_perimeter),
                num(r.sigma2_perimeter / sbound),
            ]
        })
        .collect();
    report.files.push(("sharpness.csv".into(), csv_text(&header, &csv_rows)?));
    let spec_rows: Vec<Vec<String>> = rows
        .iter()
        .flat_map(|r| {
            r.passage_mu.iter().enumerate().map(move |(k, &v)| vec![r.eps.to_string(), k.to_string(), num(v)])
        })
        .collect();
    report.files.push(("passage_spectrum.csv".into(), csv_text(&["eps", "k", "mu_k"], &spec_rows)?));

    let pts = |v: &[f64]| eps.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
    let level = |y: f64| vec![(eps[eps.len() - 1], y), (eps[0], y)];
    report.files.push((
        "sharpness_neumann.svg".into(),
        svg_plot(
            "Passage domains: mu_2 Area / (2 mu_1(D) pi)",
            "eps",
            "ratio",
            &[
                Series { label: "mu_2 Area ratio".into(), points: pts(&mu2.iter().map(|v| v / nbound).collect::<Vec<_>>()), color: "#1f4e9c", dashed: false },
                Series { label: "supremum".into(), points: level(1.0), color: "#888888", dashed: true },
            ],
        ),
    ));
    report.files.push((
        "sharpness_steklov.svg".into(),
        svg_plot(
            "Overlapping disks: sigma_2 Perimeter / 4 pi",
            "eps",
            "ratio",
            &[
                Series { label: "sigma_2 L ratio".into(), points: pts(&s2.iter().map(|v| v / sbound).collect::<Vec<_>>()), color: "#9c2f1f", dashed: false },
                Series { label: "supremum".into(), points: level(1.0), color: "#888888", dashed: true },
            ],
        ),
    ));
    report.files.push((
        "passage_sigma1.svg".into(),
        svg_plot(
            "Passage domains: sigma_1",
            "eps",
            "sigma_1",
            &[Series { label: "sigma_1".into(), points: pts(&s1), color: "#2f7d32", dashed: false }],
        ),
    ));

    let mut md = String::from("# Sharpness sweeps\n\n");
    let _ = writeln!(
        md,
        "Passage length L = {}, mesh size h = {}. Suprema: 2 mu_1(D) pi = {:.8}, 4 pi = {:.8}.\n",
        cfg.passage_length,
        cfg.fem_h,
        nbound,
        sbound
    );
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.eps.to_string(),
                format!("{:.6}", r.mu2_area),
                format!("{:.4}", r.mu2_area / nbound),
                format!("{:.6}", r.passage_sigma1),
                format!("{:.6}", r.sigma2_perimeter),
                format!("{:.4}", r.sigma2_perimeter / sbound),
            ]
        })
        .collect();
    md.push_str(&markdown_table(
        &["eps", "mu2 Area", "ratio", "sigma1 (passage)", "sigma2 L (overlap)", "ratio"],
        &table,
    ));
    md.push_str("\nPlots: sharpness_neumann.svg, sharpness_steklov.svg, passage_sigma1.svg.\n");
    if !report.warnings.is_empty() {
        md.push_str("\n## Warnings\n\n");
        for w in &report.warnings {
            let _ = writeln!(md, "- {w} (beyond relative noise {MONOTONE_NOISE:e})");
        }
    }
    if !report.failures.is_empty() {
        md.push_str("\n## Failures\n\n");
        for f in &report.failures {
            let _ = writeln!(md, "- {f}");
        }
    }
    report.files.push(("sharpness.md".into(), md.clone()));
    report.summary = md;
    Ok((rows, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trends() {
        let eps = [0.2, 0.1, 0.05];
        assert!(trend_warnings("x", &eps, &[1.0, 2.0, 3.0], true).is_empty());
        assert!(trend_warnings("x", &eps, &[1.0, 0.99995, 3.0], true).is_empty());
        assert_eq!(trend_warnings("x", &eps, &[1.0, 0.9, 3.0], true).len(), 1);
        assert!(trend_warnings("x", &eps, &[3.0, 2.0, 1.0], false).is_empty());
    }

    #[test]
    fn rejects_unsorted_eps() {
        let cfg = ExperimentConfig { eps: vec![0.1, 0.2], ..Default::default() };
        assert!(run_sharpness(&cfg).is_err());
    }
}
