//! Batch runs over a domain corpus: spectra, bound audits, sharpness sweeps
//! and the property suites. Every runner returns a [`Report`] whose files are
//! byte-identical for a fixed configuration and seed.

mod audit;
mod config;
mod demos;
mod report;
mod sharpness;
mod suite;

pub use audit::{run_bounds_sweep, BoundAuditRow, BoundCheck, CheckStatus};
pub use config::{density_samples_text, fem_corpus, polymap_corpus, DensitySpec, DomainSpec, ExperimentConfig, Problem};
pub use demos::{run_cap_search, run_fold_demo, run_hersch};
pub use report::{csv_text, markdown_table, num, svg_plot, Report, Series};
pub use sharpness::{run_sharpness, SharpnessRow};
pub use suite::{run_machinery_suite, SuiteCase};

use rayon::prelude::*;

use crate::error::Result;
use crate::fem::{generate_mesh, solve_neumann_fem, solve_steklov_fem, FemOptions};
use crate::geometry::DiskQuadrature;
use crate::spectral_disk::{neumann_weight, steklov_weight, NeumannAssembler, SteklovAssembler};

/// Boundary samples used for the self-intersection warning.
pub const SIMPLE_BOUNDARY_SAMPLES: usize = 4096;

/// Spectra of one corpus domain with the masses they are normalized by.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpectra {
    pub id: String,
    pub method: &'static str,
    pub density: String,
    /// Area (density) mass; `None` when the Neumann problem was skipped.
    pub area_mass: Option<f64>,
    pub boundary_mass: Option<f64>,
    /// Geometric area, for the homogeneous case.
    pub area: Option<f64>,
    /// `mu_0, mu_1, ...`
    pub neumann: Vec<f64>,
    /// `sigma_0, sigma_1, ...`
    pub steklov: Vec<f64>,
    pub diagnostics: String,
    pub warnings: Vec<String>,
}

/// Shared per-run solver state.
pub(crate) struct Solvers {
    pub quad: DiskQuadrature<f64>,
    pub neumann: Option<NeumannAssembler<f64>>,
    pub steklov: Option<SteklovAssembler<f64>>,
}

impl Solvers {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let quad = cfg.quadrature()?;
        let has_maps = cfg.corpus.iter().any(|d| matches!(d, DomainSpec::PolyMap { .. }));
        let neumann =
            if has_maps && cfg.problem.neumann() { Some(NeumannAssembler::new(cfg.neumann_degree, &quad)?) } else { None };
        let steklov =
            if has_maps && cfg.problem.steklov() { Some(SteklovAssembler::new(cfg.steklov_degree, &quad)?) } else { None };
        Ok(Self { quad, neumann, steklov })
    }
}

pub(crate) fn solve_domain(
    spec: &DomainSpec,
    cfg: &ExperimentConfig,
    solvers: &Solvers,
    counts: (usize, usize),
) -> Result<DomainSpectra> {
    match spec {
        DomainSpec::PolyMap { id, density, .. } => {
            let map = spec.map().expect("polymap")?;
            let quad = &solvers.quad;
            let rho = density.field(&map, quad)?;
            let mut warnings = Vec::new();
            if !map.boundary_is_simple(SIMPLE_BOUNDARY_SAMPLES) {
                warnings.push(format!(
                    "{id}: boundary image self-intersects at {SIMPLE_BOUNDARY_SAMPLES} samples; the map is not univalent"
                ));
            }
            let mut out = DomainSpectra {
                id: id.clone(),
                method: "spectral",
                density: density.to_string(),
                area_mass: None,
                boundary_mass: None,
                area: Some(map.area()),
                neumann: Vec::new(),
                steklov: Vec::new(),
                diagnostics: String::new(),
                warnings,
            };
            let mut diag = Vec::new();
            if let Some(asm) = &solvers.neumann {
                let delta = neumann_weight(&map, quad, &rho);
                out.area_mass = Some(delta.iter().zip(quad.interior_weights()).map(|(d, q)| d * q).sum());
                let s = asm.solve(&delta)?;
                out.neumann = s.values().iter().take(counts.0).copied().collect();
                diag.push(format!("neumann zernike degree {} ({} functions)", cfg.neumann_degree, asm.basis().len()));
            }
            if let Some(asm) = &solvers.steklov {
                let w = steklov_weight(&map, quad, &rho);
                out.boundary_mass = Some(w.iter().zip(quad.boundary_weights()).map(|(d, q)| d * q).sum());
                let s = asm.solve(&w)?;
                out.steklov = s.values().iter().take(counts.1).copied().collect();
                diag.push(format!("steklov harmonic degree {}", cfg.steklov_degree));
            }
            let (a, b, c) = quad.sizes();
            diag.push(format!("quadrature {a}x{b}x{c}"));
            out.diagnostics = diag.join("; ");
            Ok(out)
        }
        DomainSpec::Fem { id, family, h } => {
            let h = h.unwrap_or(cfg.fem_h);
            let mesh = generate_mesh::<f64>(family, h)?;
            let mut out = DomainSpectra {
                id: id.clone(),
                method: "fem",
                density: "const:1".into(),
                area_mass: None,
                boundary_mass: None,
                area: Some(mesh.area()),
                neumann: Vec::new(),
                steklov: Vec::new(),
                diagnostics: format!(
                    "P1 {family}, h {h}, {} vertices, {} triangles, min angle {:.1} deg",
                    mesh.vertex_count(),
                    mesh.triangle_count(),
                    mesh.min_angle_deg()
                ),
                warnings: Vec::new(),
            };
            if cfg.problem.neumann() {
                out.area_mass = Some(mesh.area());
                out.neumann = solve_neumann_fem(&mesh, &FemOptions::with_count(counts.0))?.values().to_vec();
            }
            if cfg.problem.steklov() {
                out.boundary_mass = Some(mesh.perimeter());
                out.steklov = solve_steklov_fem(&mesh, &FemOptions::with_count(counts.1))?.values().to_vec();
            }
            Ok(out)
        }
    }
}

/// Corpus spectra computed in parallel, returned in corpus order.
pub(crate) fn solve_corpus(cfg: &ExperimentConfig, counts: (usize, usize)) -> Result<Vec<Result<DomainSpectra>>> {
    let solvers = Solvers::new(cfg)?;
    Ok(cfg.corpus.par_iter().map(|d| solve_domain(d, cfg, &solvers, counts)).collect())
}

/// Lowest `count` eigenvalues of every corpus domain, raw and times mass.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<Report> {
    let results = solve_corpus(cfg, (cfg.count, cfg.count))?;
    let header = ["id", "method", "density", "problem", "k", "value", "value_times_mass"];
    let mut rows = Vec::new();
    let mut report = Report::default();
    let mut summary = String::from("# Spectra\n\n");
    for (spec, res) in cfg.corpus.iter().zip(results) {
        let d = match res {
            Ok(d) => d,
            Err(e) => {
                report.failures.push(format!("{}: {e}", spec.id()));
                continue;
            }
        };
        report.warnings.extend(d.warnings.iter().cloned());
        for (problem, values, mass) in
            [("neumann", &d.neumann, d.area_mass), ("steklov", &d.steklov, d.boundary_mass)]
        {
            let Some(mass) = mass else { continue };
            let line: Vec<String> = values.iter().map(|v| format!("{:.8}", v * mass)).collect();
            summary.push_str(&format!("- {} {problem} (mass {:.8}): {}\n", d.id, mass, line.join(", ")));
            for (k, &v) in values.iter().enumerate() {
                rows.push(vec![
                    d.id.clone(),
                    d.method.into(),
                    d.density.clone(),
                    problem.into(),
                    k.to_string(),
                    num(v),
                    num(v * mass),
                ]);
            }
        }
    }
    for w in &report.warnings {
        summary.push_str(&format!("\nWarning: {w}\n"));
    }
    report.files.push(("spectra.csv".into(), csv_text(&header, &rows)?));
    report.files.push(("spectra.md".into(), summary.clone()));
    report.summary = summary;
    Ok(report)
}
