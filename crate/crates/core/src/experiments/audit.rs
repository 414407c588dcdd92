use std::f64::consts::PI;
use std::fmt::Write as _;

use super::config::{DomainSpec, ExperimentConfig};
use super::report::{csv_text, markdown_table, num, Report};
use super::{solve_corpus, DomainSpectra};
use crate::error::Result;
use crate::special::find_zeta;

pub const MAX_STEKLOV_INDEX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// No theorem applies; the margin is informational.
    Observed,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "FAIL",
            Self::Observed => "observed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub statement: String,
    pub bound: f64,
    pub value: f64,
    /// `bound - value`.
    pub margin: f64,
    pub strict: bool,
    pub status: CheckStatus,
}

/// One audited domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundAuditRow {
    pub id: String,
    pub method: &'static str,
    pub density: String,
    pub area_mass: Option<f64>,
    pub boundary_mass: Option<f64>,
    pub mu1_m: Option<f64>,
    pub mu2_m: Option<f64>,
    pub mu2_area: Option<f64>,
    /// `sigma_k M` for `k = 1..=8`.
    pub sigma_m: Vec<f64>,
    pub checks: Vec<BoundCheck>,
    pub diagnostics: String,
    pub warnings: Vec<String>,
}

impl BoundAuditRow {
    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

/// Column order of the checks.
fn check_names() -> Vec<String> {
    let mut v: Vec<String> = ["szego", "neumann2", "polya", "weinstock", "steklov2"].map(String::from).to_vec();
    v.extend((3..=MAX_STEKLOV_INDEX).map(|k| format!("hps{k}")));
    v
}

fn make_check(name: &str, statement: String, bound: f64, value: f64, strict: bool, backed: bool, tol: f64) -> BoundCheck {
    let margin = bound - value;
    let ok = if strict { margin > 0.0 } else { margin >= -tol };
    let status = if !backed {
        CheckStatus::Observed
    } else if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    BoundCheck { name: name.into(), statement, bound, value, margin, strict, status }
}

pub(crate) fn audit_row(spec: &DomainSpec, d: &DomainSpectra, tol: f64) -> BoundAuditRow {
    let mu1d = find_zeta::<f64>().powi(2);
    let (log_sub, uniform) = match spec {
        DomainSpec::PolyMap { density, .. } => (density.log_subharmonic(), density.is_uniform()),
        DomainSpec::Fem { .. } => (true, true),
    };
    let mut row = BoundAuditRow {
        id: d.id.clone(),
        method: d.method,
        density: d.density.clone(),
        area_mass: d.area_mass,
        boundary_mass: d.boundary_mass,
        mu1_m: None,
        mu2_m: None,
        mu2_area: None,
        sigma_m: Vec::new(),
        checks: Vec::new(),
        diagnostics: d.diagnostics.clone(),
        warnings: d.warnings.clone(),
    };
    if let Some(m) = d.area_mass {
        let mu1 = d.neumann.get(1).map(|v| v * m);
        let mu2 = d.neumann.get(2).map(|v| v * m);
        row.mu1_m = mu1;
        row.mu2_m = mu2;
        if let Some(v) = mu1 {
            row.checks.push(make_check("szego", "mu_1 M <= mu_1(D) pi".into(), mu1d * PI, v, false, log_sub, tol));
        }
        if let Some(v) = mu2 {
            // The density version is only known to hold with equality allowed.
            let statement = if uniform { "mu_2 M < 2 mu_1(D) pi" } else { "mu_2 M <= 2 mu_1(D) pi" };
            row.checks.push(make_check("neumann2", statement.into(), 2.0 * mu1d * PI, v, uniform, log_sub, tol));
            if uniform {
                let area = d.area.unwrap_or(m);
                let pa = d.neumann[2] * area;
                row.mu2_area = Some(pa);
                row.checks.push(make_check("polya", "mu_2 Area <= 8 pi".into(), 8.0 * PI, pa, false, true, tol));
            }
        }
    }
    if let Some(m) = d.boundary_mass {
        row.sigma_m = d.steklov.iter().skip(1).take(MAX_STEKLOV_INDEX).map(|v| v * m).collect();
        if let Some(&v) = row.sigma_m.first() {
            row.checks.push(make_check("weinstock", "sigma_1 M <= 2 pi".into(), 2.0 * PI, v, false, true, tol));
        }
        if let Some(&v) = row.sigma_m.get(1) {
            row.checks.push(make_check("steklov2", "sigma_2 M < 4 pi".into(), 4.0 * PI, v, true, true, tol));
        }
        for k in 3..=MAX_STEKLOV_INDEX {
            if let Some(&v) = row.sigma_m.get(k - 1) {
                let bound = 2.0 * PI * k as f64;
                row.checks.push(make_check(&format!("hps{k}"), format!("sigma_{k} M <= 2 pi {k}"), bound, v, false, true, tol));
            }
        }
    }
    row
}

/// Audits every corpus domain against the eigenvalue bounds. Rows are solved
/// in parallel and assembled in corpus order.
pub fn run_bounds_sweep(cfg: &ExperimentConfig) -> Result<(Vec<BoundAuditRow>, Report)> {
    let results = solve_corpus(cfg, (3, MAX_STEKLOV_INDEX + 1))?;
    let mut rows = Vec::new();
    let mut report = Report::default();
    for (spec, res) in cfg.corpus.iter().zip(results) {
        match res {
            Ok(d) => rows.push(audit_row(spec, &d, cfg.tolerance)),
            Err(e) => report.failures.push(format!("{}: solver error: {e}", spec.id())),
        }
    }
    for r in &rows {
        report.warnings.extend(r.warnings.iter().cloned());
        for c in r.checks.iter().filter(|c| c.status == CheckStatus::Fail) {
            report.failures.push(format!(
                "{}: {} violated, value {} vs bound {} (margin {:e}); {}",
                r.id,
                c.statement,
                num(c.value),
                num(c.bound),
                c.margin,
                r.diagnostics
            ));
        }
    }

    let names = check_names();
    let mut header: Vec<String> = ["id", "method", "density", "area_mass", "boundary_mass", "mu1_m", "mu2_m", "mu2_area"]
        .map(String::from)
        .to_vec();
    header.extend((1..=MAX_STEKLOV_INDEX).map(|k| format!("sigma{k}_m")));
    for n in &names {
        header.push(format!("margin_{n}"));
        header.push(format!("status_{n}"));
    }
    let opt = |x: Option<f64>| x.map(num).unwrap_or_else(|| "n/a".into());
    let mut csv_rows = Vec::new();
    for r in &rows {
        let mut line = vec![
            r.id.clone(),
            r.method.into(),
            r.density.clone(),
            opt(r.area_mass),
            opt(r.boundary_mass),
            opt(r.mu1_m),
            opt(r.mu2_m),
            opt(r.mu2_area),
        ];
        line.extend((0..MAX_STEKLOV_INDEX).map(|k| opt(r.sigma_m.get(k).copied())));
        for n in &names {
            match r.check(n) {
                Some(c) => {
                    line.push(num(c.margin));
                    line.push(c.status.as_str().into());
                }
                None => line.extend(["n/a".to_string(), "n/a".to_string()]),
            }
        }
        csv_rows.push(line);
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    report.files.push(("audit.csv".into(), csv_text(&header_refs, &csv_rows)?));
    let md = markdown(cfg, &rows, &report);
    report.files.push(("audit.md".into(), md.clone()));
    report.summary = md;
    Ok((rows, report))
}

fn markdown(cfg: &ExperimentConfig, rows: &[BoundAuditRow], report: &Report) -> String {
    let mu1d = find_zeta::<f64>().powi(2);
    let mut s = String::from("# Eigenvalue bound audit\n\n");
    let _ = writeln!(
        s,
        "Bounds: mu_1(D) pi = {:.8}, 2 mu_1(D) pi = {:.8}, 2 pi = {:.8}, 4 pi = {:.8}, 8 pi = {:.8}. \
         Non-strict bounds allow a slack of {:e}; strict ones require a positive margin.\n",
        mu1d * PI,
        2.0 * mu1d * PI,
        2.0 * PI,
        4.0 * PI,
        8.0 * PI,
        cfg.tolerance
    );
    let f = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.id.clone(),
                r.method.into(),
                r.density.clone(),
                f(r.mu1_m),
                f(r.mu2_m),
                f(r.mu2_area),
                f(r.sigma_m.first().copied()),
                f(r.sigma_m.get(1).copied()),
                if r.passed() { "pass".into() } else { "FAIL".into() },
            ]
        })
        .collect();
    s.push_str(&markdown_table(
        &["domain", "method", "density", "mu1 M", "mu2 M", "mu2 Area", "sigma1 M", "sigma2 M", "status"],
        &table,
    ));
    s.push_str("\n## Margins (bound - value)\n\n");
    let names = check_names();
    let mut header = vec!["domain".to_string()];
    header.extend(names.iter().cloned());
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut line = vec![r.id.clone()];
            for n in &names {
                line.push(match r.check(n) {
                    Some(c) if c.status == CheckStatus::Observed => format!("({:.3e})", c.margin),
                    Some(c) => format!("{:.3e}", c.margin),
                    None => "-".into(),
                });
            }
            line
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    s.push_str(&markdown_table(&header_refs, &table));
    s.push_str(
        "\nParenthesized margins are observations only: no theorem covers that density.\n\
         The hps columns test sigma_k M <= 2 pi k. Whether this is strict for k >= 3 is an open question, \
         so only the observed margins are reported.\n",
    );
    s.push_str("\n## Failures\n\n");
    if report.failures.is_empty() {
        s.push_str("None.\n");
    } else {
        s.push_str(
            "Every bound below is a theorem, so each violation is a solver or discretization defect, \
             not a counterexample.\n\n",
        );
        for f in &report.failures {
            let _ = writeln!(s, "- {f}");
        }
    }
    if !report.warnings.is_empty() {
        s.push_str("\n## Warnings\n\n");
        for w in &report.warnings {
            let _ = writeln!(s, "- {w}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{polymap_corpus, DensitySpec};

    #[test]
    fn check_semantics() {
        let c = make_check("x", "s".into(), 1.0, 1.0 + 1e-9, false, true, 1e-6);
        assert_eq!(c.status, CheckStatus::Pass);
        let c = make_check("x", "s".into(), 1.0, 1.0, true, true, 1e-6);
        assert_eq!(c.status, CheckStatus::Fail);
        let c = make_check("x", "s".into(), 1.0, 2.0, false, false, 1e-6);
        assert_eq!(c.status, CheckStatus::Observed);
    }

    #[test]
    fn small_sweep() {
        let mut cfg = ExperimentConfig {
            corpus: polymap_corpus().into_iter().take(3).collect(),
            neumann_degree: 10,
            steklov_degree: 24,
            quadrature: (24, 64, 256),
            ..Default::default()
        };
        cfg.corpus.push(cfg.corpus[2].with_density(DensitySpec::ExpR2));
        let (rows, report) = run_bounds_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(report.passed(), "{:?}", report.failures);
        let disk = &rows[0];
        assert!(disk.check("weinstock").unwrap().margin.abs() < 1e-8);
        assert!(disk.check("szego").unwrap().margin.abs() < 1e-4);
        assert!(rows[3].check("polya").is_none());
        assert!(!rows[3].check("neumann2").unwrap().strict);
        let csv = report.file("audit.csv").unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(!csv.contains(",,"));
        let (_, again) = run_bounds_sweep(&cfg).unwrap();
        assert_eq!(again, report);
    }
}
