use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{DomainSpec, ExperimentConfig};
use super::report::{csv_text, markdown_table, num, Report};
use crate::error::{Error, Result};
use crate::folding::{
    fold, folded_boundary_values, harmonic_extension, lifted_energy, test_function_energy, Rearranger,
};
use crate::geometry::{
    check_subharmonic_growth, cis, pullback_area_measure, pullback_boundary_measure, radial_comparison, ConformalMap,
    DensityField, DiscreteMeasure, DiskQuadrature, MeasurePart, PullbackDensity,
};
use crate::hersch::{renormalize, renormalize_with, RenormalizationWeight, RenormalizeOptions};
use crate::inertia::{find_multiple_cap, inertia_form, rp1_distance, CapSearchOptions};
use crate::moebius::{DiskAutomorphism, HyperbolicCap};
use crate::special::BesselProfile;

/// Quadrature used for the cap-based suites, where every cap evaluation
/// renormalizes the whole measure.
pub const CAP_SUITE_QUADRATURE: (usize, usize, usize) = (16, 64, 1024);
pub const GRID_STEPS: usize = 10;
pub const GROWTH_RADII: usize = 200;
pub const DEGENERATE_L: f64 = 1e-3;

/// One property evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCase {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Inputs that reproduce the case.
    pub replay: String,
}

fn case(suite: &'static str, name: String, value: f64, threshold: f64, passed: bool, replay: String) -> SuiteCase {
    SuiteCase { suite, name, value, threshold, passed, replay }
}

struct MapCase {
    id: String,
    coeffs: String,
    map: ConformalMap<f64>,
}

fn corpus_maps(cfg: &ExperimentConfig) -> Result<Vec<MapCase>> {
    let mut out = Vec::new();
    for spec in &cfg.corpus {
        if let DomainSpec::PolyMap { id, coeffs, .. } = spec {
            let c: Vec<String> = coeffs.iter().map(|(a, b)| format!("{a},{b}")).collect();
            out.push(MapCase { id: id.clone(), coeffs: c.join(";"), map: spec.map().expect("polymap")? });
        }
    }
    Ok(out)
}

fn measure_of(map: &ConformalMap<f64>, quad: &DiskQuadrature<f64>, part: MeasurePart) -> Result<DiscreteMeasure<f64>> {
    let rho = DensityField::uniform(quad);
    match part {
        MeasurePart::Interior => pullback_area_measure(map, quad, &rho),
        MeasurePart::Boundary => pullback_boundary_measure(map, quad, &rho),
    }
}

fn hersch_cases(m: &MapCase, quad: &DiskQuadrature<f64>, psis: &[RenormalizationWeight<f64>], seed: u64) -> Vec<SuiteCase> {
    let mut out = Vec::new();
    for part in [MeasurePart::Boundary, MeasurePart::Interior] {
        let nu = match measure_of(&m.map, quad, part) {
            Ok(nu) => nu,
            Err(e) => {
                out.push(case("hersch", format!("{} {} measure", m.id, part.as_str()), f64::NAN, 0.0, false, e.to_string()));
                continue;
            }
        };
        for psi in psis {
            let tag = format!("{} {} psi={}", m.id, part.as_str(), psi.name());
            let replay = format!("map={} measure={} psi={} seed={seed}", m.coeffs, part.as_str(), psi.name());
            let base = match renormalize(&nu, psi) {
                Ok(r) => r,
                Err(e) => {
                    out.push(case("hersch", format!("{tag} residual"), f64::NAN, 1e-10, false, format!("{replay} error={e}")));
                    continue;
                }
            };
            out.push(case("hersch", format!("{tag} residual"), base.residual, 1e-10, base.residual <= 1e-10, replay.clone()));
            // Independent starts from a seeded generator.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut spread: f64 = 0.0;
            let mut starts = Vec::new();
            for _ in 0..8 {
                let start = cis(rng.random::<f64>() * 2.0 * PI) * (0.9 * rng.random::<f64>());
                starts.push(format!("{:.17e},{:.17e}", start.re, start.im));
                match renormalize_with(&nu, psi, start, &RenormalizeOptions::default()) {
                    Ok(r) => spread = spread.max((r.xi - base.xi).norm()),
                    Err(_) => spread = f64::INFINITY,
                }
            }
            out.push(case(
                "hersch",
                format!("{tag} uniqueness over 8 starts"),
                spread,
                1e-9,
                spread <= 1e-9,
                format!("{replay} starts={}", starts.join(";")),
            ));
            // Seeded weight perturbation of relative size 1e-6 moves xi by O(1e-6).
            let perturbed = DiscreteMeasure::new(
                nu.nodes().to_vec(),
                nu.weights().iter().map(|&w| w * (1.0 + 2e-6 * (rng.random::<f64>() - 0.5))).collect(),
                nu.part(),
            );
            let moved = perturbed.and_then(|p| renormalize(&p, psi)).map(|r| (r.xi - base.xi).norm()).unwrap_or(f64::INFINITY);
            out.push(case("hersch", format!("{tag} perturbation stability"), moved, 1e-5, moved <= 1e-5, replay));
        }
    }
    out
}

fn hersch_oracle(psis: &[RenormalizationWeight<f64>]) -> Vec<SuiteCase> {
    let nu = DiscreteMeasure::<f64>::uniform_boundary(1024);
    let pushed = DiskAutomorphism::translation(Complex::new(0.3, 0.0)).expect("0.3 is inside").pushforward(&nu);
    psis.iter()
        .map(|psi| {
            let err = renormalize(&pushed, psi).map(|r| (r.xi - Complex::new(-0.3, 0.0)).norm()).unwrap_or(f64::INFINITY);
            case(
                "hersch",
                format!("(d_0.3)_* uniform boundary recovers xi = -0.3, psi={}", psi.name()),
                err,
                1e-9,
                err <= 1e-9,
                format!("measure=uniform_boundary:1024 push=0.3 psi={}", psi.name()),
            )
        })
        .collect()
}

fn growth_cases(m: &MapCase, quad: &DiskQuadrature<f64>) -> Vec<SuiteCase> {
    let mut out = Vec::new();
    let delta = PullbackDensity::jacobian(m.map.clone());
    let replay = format!("map={} radii={GROWTH_RADII}", m.coeffs);
    // Measured with no tolerance so the report carries the real defect.
    match check_subharmonic_growth(&delta, quad, GROWTH_RADII, f64::INFINITY) {
        Ok(g) => {
            out.push(case(
                "growth",
                format!("{} max G(r) - pi r^2", m.id),
                g.max_defect,
                1e-8,
                g.max_defect <= 1e-8,
                replay.clone(),
            ));
            let linear = m.map.degree() <= 1;
            let flagged = check_subharmonic_growth(&delta, quad, GROWTH_RADII, 1e-8).map(|g| g.harmonic_candidate).unwrap_or(false);
            out.push(case(
                "growth",
                format!("{} equality profile flagged = {flagged} (constant density: {linear})", m.id),
                f64::from(u8::from(flagged)),
                f64::from(u8::from(linear)),
                flagged == linear,
                replay.clone(),
            ));
        }
        Err(e) => out.push(case("growth", format!("{} growth", m.id), f64::NAN, 1e-8, false, format!("{replay} error={e}"))),
    }
    let f = BesselProfile::<f64>::new();
    match radial_comparison(|r| f.value(r).powi(2), &delta, quad) {
        Ok(c) => {
            let defect = c.lhs - c.rhs;
            out.push(case(
                "growth",
                format!("{} radial comparison with h = f^2", m.id),
                defect,
                -1e-8,
                defect >= -1e-8,
                replay,
            ));
        }
        Err(e) => out.push(case("growth", format!("{} radial comparison", m.id), f64::NAN, -1e-8, false, format!("{replay} error={e}"))),
    }
    out
}

fn grid_caps() -> Vec<(f64, f64)> {
    let step = 2.0 * PI / GRID_STEPS as f64;
    (0..GRID_STEPS)
        .flat_map(|i| (0..GRID_STEPS).map(move |j| ((i as f64 + 0.5) * step, j as f64 * step)))
        .collect()
}

/// Mass error, doubling error, energy gap, lost mass and any error text.
type CapOutcome = (f64, f64, f64, f64, String);

fn folding_cases(m: &MapCase, nu: &DiscreteMeasure<f64>) -> Vec<SuiteCase> {
    let psi = RenormalizationWeight::Identity;
    let replay = format!("map={} measure=boundary:{}", m.coeffs, nu.len());
    let rearranger = match Rearranger::new(nu, psi) {
        Ok(r) => r,
        Err(e) => return vec![case("folding", format!("{} rearranger", m.id), f64::NAN, 0.0, false, format!("{replay} error={e}"))],
    };
    let target = 2.0 * test_function_energy(&psi);
    let per_cap: Vec<CapOutcome> = grid_caps()
        .par_iter()
        .map(|&(l, p)| {
            let cap = HyperbolicCap::from_angle(l, p).expect("grid cap");
            let base = rearranger.base();
            let mass_err = (fold(base, &cap).mass() - base.mass()).abs();
            let rm = match rearranger.rearrange(&cap) {
                Ok(rm) => rm,
                Err(e) => return (mass_err, f64::INFINITY, f64::NEG_INFINITY, f64::NAN, e.to_string()),
            };
            let (mut doubling, mut margin) = (0.0f64, f64::INFINITY);
            for t in [Complex::new(1.0, 0.0), Complex::new(0.0, 1.0)] {
                let e = lifted_energy(&rm.map, t);
                doubling = doubling.max((e - target).abs());
                let w = harmonic_extension(&folded_boundary_values(&rm, &psi, t, 2048));
                margin = margin.min(e - w.energy());
            }
            (mass_err, doubling, margin, rm.lost_mass, String::new())
        })
        .collect();
    let mut out = Vec::new();
    let caps = grid_caps();
    let worst = |f: &dyn Fn(&CapOutcome) -> f64, max: bool| {
        let mut best = (0usize, if max { f64::NEG_INFINITY } else { f64::INFINITY });
        for (k, r) in per_cap.iter().enumerate() {
            let v = f(r);
            if (max && !(v <= best.1)) || (!max && !(v >= best.1)) {
                best = (k, v);
            }
        }
        best
    };
    let at = |k: usize| format!("{replay} cap_l={:.17e} cap_p={:.17e}", caps[k].0, caps[k].1);
    let (k, v) = worst(&|r| r.0, true);
    out.push(case("folding", format!("{} fold mass conservation over {} caps", m.id, caps.len()), v, 0.0, v == 0.0, at(k)));
    let (k, v) = worst(&|r| r.3, true);
    out.push(case("folding", format!("{} mass dropped at cap vertices (relative)", m.id), v, 1e-8, v <= 1e-8, at(k)));
    let (k, v) = worst(&|r| r.1, true);
    out.push(case("folding", format!("{} energy doubling |E - 2 pi|", m.id), v, 1e-8, v <= 1e-8, at(k)));
    let (k, v) = worst(&|r| r.2, false);
    out.push(case(
        "folding",
        format!("{} min harmonic-extension energy gap over {} caps", m.id, caps.len()),
        v,
        0.0,
        v > 0.0,
        at(k),
    ));
    for (k, r) in per_cap.iter().enumerate() {
        if !r.4.is_empty() {
            out.push(case("folding", format!("{} rearrangement", m.id), f64::NAN, 0.0, false, format!("{} error={}", at(k), r.4)));
        }
    }
    out
}

fn degenerate_cases(m: &MapCase, nu: &DiscreteMeasure<f64>) -> Vec<SuiteCase> {
    let psi = RenormalizationWeight::Identity;
    let replay = format!("map={} measure=boundary:{}", m.coeffs, nu.len());
    let mut out = Vec::new();
    let r = match Rearranger::new(nu, psi) {
        Ok(r) => r,
        Err(e) => return vec![case("inertia", format!("{} rearranger", m.id), f64::NAN, 0.0, false, e.to_string())],
    };
    let m_nu = match inertia_form(r.base(), &psi) {
        Ok(q) => q.direction(),
        Err(e) => return vec![case("inertia", format!("{} inertia", m.id), f64::NAN, 0.0, false, e.to_string())],
    };
    let mut worst_point: f64 = 0.0;
    let mut worst_disk: f64 = 0.0;
    for j in 0..6 {
        let theta = j as f64 * PI / 3.0 + 0.1;
        let p = cis(theta);
        // The limit at a point reflects the base direction in the line of p.
        let expected = p * p * m_nu.conj();
        let dir = |l: f64| -> Result<Complex<f64>> {
            let rm = r.rearrange(&HyperbolicCap::from_angle(l, theta)?)?;
            Ok(inertia_form(&rm.zeta, &psi)?.direction())
        };
        worst_point = worst_point.max(dir(DEGENERATE_L).map(|d| rp1_distance(d, expected)).unwrap_or(f64::INFINITY));
        worst_disk = worst_disk.max(dir(2.0 * PI - DEGENERATE_L).map(|d| rp1_distance(d, m_nu)).unwrap_or(f64::INFINITY));
    }
    out.push(case(
        "inertia",
        format!("{} point limit of m(zeta_a) at l = {DEGENERATE_L:e}", m.id),
        worst_point,
        1e-2,
        worst_point <= 1e-2,
        replay.clone(),
    ));
    out.push(case(
        "inertia",
        format!("{} full-disk limit of m(zeta_a) at l = 2 pi - {DEGENERATE_L:e}", m.id),
        worst_disk,
        1e-2,
        worst_disk <= 1e-2,
        replay,
    ));
    out
}

fn cap_search_case(m: &MapCase, nu: &DiscreteMeasure<f64>, psi: RenormalizationWeight<f64>) -> Option<SuiteCase> {
    let replay = format!("map={} measure={}:{} psi={}", m.coeffs, nu.part().as_str(), nu.len(), psi.name());
    let name = format!("{} cap search {} psi={}: anisotropy / trace", m.id, nu.part().as_str(), psi.name());
    match find_multiple_cap(nu, psi, &CapSearchOptions::default()) {
        Ok(r) if r.trivial => None,
        Ok(r) => {
            let rel = r.anisotropy / r.trace;
            Some(case(
                "inertia",
                name,
                rel,
                1e-6,
                r.multiple && rel <= 1e-6,
                format!("{replay} cap_l={:.17e} cap_p={:.17e}", r.cap.l(), r.cap.p_angle()),
            ))
        }
        Err(e) => Some(case("inertia", name, f64::NAN, 1e-6, false, format!("{replay} error={e}"))),
    }
}

fn bad_input_cases() -> Vec<SuiteCase> {
    let z = Complex::new(0.1, 0.0);
    let measure = DiscreteMeasure::new(vec![z, -z], vec![1.0, -0.5], MeasurePart::Interior);
    let density = DensityField::<f64>::from_samples(vec![1.0, 0.0], vec![1.0]);
    vec![
        case(
            "inputs",
            "negative measure weight is rejected".into(),
            f64::from(u8::from(matches!(measure, Err(Error::InvalidMeasure { .. })))),
            1.0,
            matches!(measure, Err(Error::InvalidMeasure { .. })),
            "measure nodes=0.1,-0.1 weights=1,-0.5".into(),
        ),
        case(
            "inputs",
            "zero density sample is rejected".into(),
            f64::from(u8::from(density.is_err())),
            1.0,
            density.is_err(),
            "density interior=1,0 boundary=1".into(),
        ),
    ]
}

/// Runs the Hersch, folding, inertia and growth property suites over the
/// polynomial maps of the corpus.
pub fn run_machinery_suite(cfg: &ExperimentConfig) -> Result<(Vec<SuiteCase>, Report)> {
    let maps = corpus_maps(cfg)?;
    if maps.is_empty() {
        return Err(Error::InvalidInput("the suite needs at least one polymap domain".into()));
    }
    let quad = cfg.quadrature()?;
    let (a, b, c) = CAP_SUITE_QUADRATURE;
    let small = DiskQuadrature::<f64>::new(a, b, c)?;
    let psis = cfg.weights();

    let per_map: Vec<Vec<SuiteCase>> = maps
        .par_iter()
        .map(|m| {
            let mut v = hersch_cases(m, &quad, &psis, cfg.seed);
            v.extend(growth_cases(m, &quad));
            if let Ok(nu) = measure_of(&m.map, &small, MeasurePart::Boundary) {
                v.extend(cap_search_case(m, &nu, RenormalizationWeight::Identity));
            }
            if let Ok(nu) = measure_of(&m.map, &small, MeasurePart::Interior) {
                v.extend(cap_search_case(m, &nu, RenormalizationWeight::bessel()));
            }
            v
        })
        .collect();
    let mut cases = hersch_oracle(&psis);
    cases.extend(per_map.into_iter().flatten());
    // Cap-grid properties on the first map whose boundary measure is simple.
    let chosen = maps.iter().find_map(|m| {
        let nu = measure_of(&m.map, &small, MeasurePart::Boundary).ok()?;
        let base = Rearranger::new(&nu, RenormalizationWeight::Identity).ok()?;
        let q = inertia_form(base.base(), &RenormalizationWeight::Identity).ok()?;
        (!q.is_multiple(CapSearchOptions::<f64>::default().tolerance)).then_some((m, nu))
    });
    match chosen {
        Some((m, nu)) => {
            cases.extend(folding_cases(m, &nu));
            cases.extend(degenerate_cases(m, &nu));
        }
        None => cases.push(case("folding", "no simple corpus measure".into(), f64::NAN, 0.0, false, String::new())),
    }
    cases.extend(bad_input_cases());
    cases.sort_by_key(|c| ["hersch", "folding", "inertia", "growth", "inputs"].iter().position(|s| *s == c.suite));

    let mut report = Report::default();
    for c in cases.iter().filter(|c| !c.passed) {
        report.failures.push(format!("[{}] {}: value {} vs threshold {}; replay: {}", c.suite, c.name, num(c.value), num(c.threshold), c.replay));
    }
    let rows: Vec<Vec<String>> = cases
        .iter()
        .map(|c| {
            vec![
                c.suite.into(),
                c.name.clone(),
                num(c.value),
                num(c.threshold),
                if c.passed { "pass".into() } else { "FAIL".into() },
                c.replay.clone(),
            ]
        })
        .collect();
    report.files.push(("suite.csv".into(), csv_text(&["suite", "case", "value", "threshold", "status", "replay"], &rows)?));
    let mut md = format!("# Property suites\n\nseed = {}, {} cases, {} failed.\n\n", cfg.seed, cases.len(), report.failures.len());
    for suite in ["hersch", "folding", "inertia", "growth", "inputs"] {
        let table: Vec<Vec<String>> = cases
            .iter()
            .filter(|c| c.suite == suite)
            .map(|c| {
                vec![c.name.clone(), format!("{:.3e}", c.value), format!("{:.1e}", c.threshold), if c.passed { "pass".into() } else { "FAIL".into() }]
            })
            .collect();
        let _ = writeln!(md, "## {suite}\n");
        md.push_str(&markdown_table(&["case", "value", "threshold", "status"], &table));
        md.push('\n');
    }
    if !report.failures.is_empty() {
        md.push_str("## Failures (with replay inputs)\n\n");
        for f in &report.failures {
            let _ = writeln!(md, "- {f}");
        }
    }
    report.files.push(("suite.md".into(), md.clone()));
    report.summary = md;
    Ok((cases, report))
}
