use std::fmt::Write as _;

use super::config::{DomainSpec, ExperimentConfig};
use super::report::{csv_text, markdown_table, num, Report};
use crate::error::{Error, Result};
use crate::folding::{rayleigh_bound, Rearranger};
use crate::geometry::{pullback_area_measure, pullback_boundary_measure, ConformalMap, DiscreteMeasure, MeasurePart};
use crate::hersch::{renormalize, RenormalizationWeight};
use crate::inertia::{find_multiple_cap, inertia_form, CapSearchOptions};
use crate::moebius::HyperbolicCap;

/// The measures a problem selection asks for, with the weight each one is
/// paired with: boundary with `Psi = id`, area with the Bessel profile.
fn problem_measures(
    cfg: &ExperimentConfig,
    spec: &DomainSpec,
    map: &ConformalMap<f64>,
) -> Result<Vec<(DiscreteMeasure<f64>, RenormalizationWeight<f64>)>> {
    let quad = cfg.quadrature()?;
    let rho = match spec {
        DomainSpec::PolyMap { density, .. } => density.field(map, &quad)?,
        DomainSpec::Fem { .. } => unreachable!("only polymaps have measures"),
    };
    let mut out = Vec::new();
    if cfg.problem.steklov() {
        out.push((pullback_boundary_measure(map, &quad, &rho)?, RenormalizationWeight::Identity));
    }
    if cfg.problem.neumann() {
        out.push((pullback_area_measure(map, &quad, &rho)?, RenormalizationWeight::bessel()));
    }
    Ok(out)
}

fn first_polymap(cfg: &ExperimentConfig) -> Result<(&DomainSpec, ConformalMap<f64>)> {
    let spec = cfg
        .corpus
        .iter()
        .find(|d| matches!(d, DomainSpec::PolyMap { .. }))
        .ok_or_else(|| Error::InvalidInput("no polymap domain in the configuration".into()))?;
    Ok((spec, spec.map().expect("polymap")?))
}

/// Renormalization points of every polymap measure for every configured
/// weight.
pub fn run_hersch(cfg: &ExperimentConfig) -> Result<Report> {
    let quad = cfg.quadrature()?;
    let mut rows = Vec::new();
    let mut report = Report::default();
    for spec in &cfg.corpus {
        let DomainSpec::PolyMap { id, density, .. } = spec else { continue };
        let map = spec.map().expect("polymap")?;
        let rho = density.field(&map, &quad)?;
        for part in [MeasurePart::Boundary, MeasurePart::Interior] {
            let nu = match part {
                MeasurePart::Boundary => pullback_boundary_measure(&map, &quad, &rho)?,
                MeasurePart::Interior => pullback_area_measure(&map, &quad, &rho)?,
            };
            for psi in cfg.weights() {
                match renormalize(&nu, &psi) {
                    Ok(r) => rows.push(vec![
                        id.clone(),
                        part.as_str().into(),
                        psi.name().into(),
                        num(r.xi.re),
                        num(r.xi.im),
                        num(r.residual),
                        r.iterations.to_string(),
                    ]),
                    Err(e) => report.failures.push(format!("{id} {} psi={}: {e}", part.as_str(), psi.name())),
                }
            }
        }
    }
    let header = ["id", "measure", "psi", "xi_re", "xi_im", "residual", "iterations"];
    report.files.push(("hersch.csv".into(), csv_text(&header, &rows)?));
    let mut md = String::from("# Renormalization points\n\n");
    md.push_str(&markdown_table(&header, &rows));
    for f in &report.failures {
        let _ = writeln!(md, "\n- FAIL: {f}");
    }
    report.files.push(("hersch.md".into(), md.clone()));
    report.summary = md;
    Ok(report)
}

/// Folds the first polymap measure along the configured cap and reports the
/// rearranged measure, its inertia form and the eigenvalue bound it yields.
pub fn run_fold_demo(cfg: &ExperimentConfig) -> Result<Report> {
    let (spec, map) = first_polymap(cfg)?;
    let cap = HyperbolicCap::from_angle(cfg.cap.0, cfg.cap.1)?;
    let mut report = Report::default();
    let mut md = format!("# Folding along the cap l = {}, p angle = {}\n\nDomain {}.\n\n", cfg.cap.0, cfg.cap.1, spec.id());
    let mut rows = Vec::new();
    for (nu, psi) in problem_measures(cfg, spec, &map)? {
        let part = nu.part().as_str();
        let rm = Rearranger::new(&nu, psi)?.rearrange(&cap)?;
        let q = inertia_form(&rm.zeta, &psi)?;
        let b = rayleigh_bound(&rm, &psi)?;
        rows.push(vec![
            part.to_string(),
            psi.name().into(),
            num(nu.mass()),
            num(rm.folded.mass()),
            num(rm.lost_mass),
            num(q.anisotropy() / q.trace()),
            num(b.bound),
            num(b.bound * nu.mass()),
        ]);
        report.files.push((format!("folded_{part}.csv"), rm.folded.to_csv()));
        report.files.push((format!("zeta_{part}.csv"), rm.zeta.to_csv()));
    }
    let header = ["measure", "psi", "mass", "folded_mass", "lost_mass", "relative_anisotropy", "bound", "bound_times_mass"];
    report.files.push(("fold.csv".into(), csv_text(&header, &rows)?));
    md.push_str(&markdown_table(&header, &rows));
    md.push_str("\nThe bound is 2 sup_t E(X_t) / int X_t^2 dzeta_a; it caps the second nonzero eigenvalue when zeta_a is multiple.\n");
    report.files.push(("fold.md".into(), md.clone()));
    report.summary = md;
    Ok(report)
}

/// Searches for a cap with a multiple rearranged measure on the first
/// polymap and writes the anisotropy landscape.
pub fn run_cap_search(cfg: &ExperimentConfig) -> Result<Report> {
    let (spec, map) = first_polymap(cfg)?;
    let mut report = Report::default();
    let mut md = format!("# Cap search on {}\n\n", spec.id());
    for (nu, psi) in problem_measures(cfg, spec, &map)? {
        let part = nu.part().as_str();
        match find_multiple_cap(&nu, psi, &CapSearchOptions::default()) {
            Ok(r) => {
                let _ = writeln!(
                    md,
                    "- {part} measure, psi={}: l = {}, p angle = {}, anisotropy = {} (relative {}), {}{} evaluations",
                    psi.name(),
                    num(r.cap.l()),
                    num(r.cap.p_angle()),
                    num(r.anisotropy),
                    num(r.anisotropy / r.trace),
                    if r.trivial { "already multiple, " } else { "" },
                    r.evaluations
                );
                let rows: Vec<Vec<String>> = r
                    .landscape
                    .iter()
                    .map(|s| vec![num(s.l), num(s.p_angle), num(s.relative_anisotropy)])
                    .collect();
                report.files.push((format!("landscape_{part}.csv"), csv_text(&["l", "p_angle", "relative_anisotropy"], &rows)?));
            }
            Err(e) => {
                report.failures.push(format!(
                    "{part} measure, psi={}: {e}; a multiple cap always exists, so this is a numerical breakdown",
                    psi.name()
                ));
            }
        }
    }
    for f in &report.failures {
        let _ = writeln!(md, "- FAIL: {f}");
    }
    report.files.push(("cap_search.md".into(), md.clone()));
    report.summary = md;
    Ok(report)
}
