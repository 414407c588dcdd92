use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fem::DomainFamily;
use crate::geometry::{AnalyticDensity, ConformalMap, DensityField, DiskQuadrature};
use crate::hersch::RenormalizationWeight;

/// Density on the physical domain.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Const(f64),
    ExpR2,
    /// Samples at the quadrature nodes: `i <value>` lines for the interior
    /// nodes, then `b <value>` lines for the boundary nodes, in node order.
    File(PathBuf),
}

impl DensitySpec {
    pub fn parse(s: &str, base: &Path) -> Result<Self> {
        let s = s.trim();
        if s == "exp_r2" {
            return Ok(Self::ExpR2);
        }
        if let Some(c) = s.strip_prefix("const:") {
            let c: f64 = c.trim().parse().map_err(|_| Error::InvalidInput(format!("bad constant in `{s}`")))?;
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::NonPositiveDensity { index: 0, value: c });
            }
            return Ok(Self::Const(c));
        }
        if let Some(p) = s.strip_prefix("file:") {
            let path = base.join(p.trim());
            if !path.is_file() {
                return Err(Error::InvalidInput(format!("density file {} does not exist", path.display())));
            }
            return Ok(Self::File(path));
        }
        Err(Error::InvalidInput(format!("unknown density `{s}`")))
    }

    /// Whether `Delta log rho >= 0` is known to hold.
    pub fn log_subharmonic(&self) -> bool {
        matches!(self, Self::Const(_) | Self::ExpR2)
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Self::Const(_))
    }

    pub fn field(&self, map: &ConformalMap<f64>, quad: &DiskQuadrature<f64>) -> Result<DensityField<f64>> {
        match self {
            Self::Const(c) => DensityField::from_analytic(AnalyticDensity::Constant(*c), map, quad),
            Self::ExpR2 => DensityField::from_analytic(AnalyticDensity::ExpR2, map, quad),
            Self::File(path) => read_density_samples(path, quad),
        }
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(c) => write!(f, "const:{c}"),
            Self::ExpR2 => write!(f, "exp_r2"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn read_density_samples(path: &Path, quad: &DiskQuadrature<f64>) -> Result<DensityField<f64>> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    let (mut interior, mut boundary) = (Vec::new(), Vec::new());
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (tag, value) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::parse(&origin, ln + 1, "expected `i <value>` or `b <value>`"))?;
        let v: f64 = value.trim().parse().map_err(|_| Error::parse(&origin, ln + 1, "bad density value"))?;
        match tag {
            "i" if boundary.is_empty() => interior.push(v),
            "b" => boundary.push(v),
            _ => return Err(Error::parse(&origin, ln + 1, format!("unexpected `{tag}` line"))),
        }
    }
    let (ni, nb) = (quad.interior_nodes().len(), quad.boundary_nodes().len());
    if interior.len() != ni || boundary.len() != nb {
        return Err(Error::InvalidInput(format!(
            "{origin}: {} interior and {} boundary samples, quadrature has {ni} and {nb}",
            interior.len(),
            boundary.len()
        )));
    }
    DensityField::from_samples(interior, boundary)
}

/// Writes samples in the format read by `file:` densities.
pub fn density_samples_text(field: &DensityField<f64>) -> String {
    let mut s = String::new();
    for v in field.interior() {
        s.push_str(&format!("i {v:e}\n"));
    }
    for v in field.boundary() {
        s.push_str(&format!("b {v:e}\n"));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    PolyMap { id: String, coeffs: Vec<(f64, f64)>, density: DensitySpec },
    Fem { id: String, family: DomainFamily, h: Option<f64> },
}

impl DomainSpec {
    pub fn polymap(id: &str, coeffs: &[(f64, f64)]) -> Self {
        Self::PolyMap { id: id.into(), coeffs: coeffs.to_vec(), density: DensitySpec::Const(1.0) }
    }

    pub fn fem(id: &str, family: DomainFamily) -> Self {
        Self::Fem { id: id.into(), family, h: None }
    }

    pub fn id(&self) -> &str {
        match self {
            Self::PolyMap { id, .. } | Self::Fem { id, .. } => id,
        }
    }

    pub fn map(&self) -> Option<Result<ConformalMap<f64>>> {
        match self {
            Self::PolyMap { coeffs, .. } => Some(ConformalMap::from_real_pairs(coeffs)),
            Self::Fem { .. } => None,
        }
    }

    pub fn with_density(&self, density: DensitySpec) -> Self {
        match self {
            Self::PolyMap { id, coeffs, .. } => Self::PolyMap { id: id.clone(), coeffs: coeffs.clone(), density },
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Neumann,
    Steklov,
    Both,
}

impl Problem {
    pub fn neumann(self) -> bool {
        matches!(self, Self::Neumann | Self::Both)
    }

    pub fn steklov(self) -> bool {
        matches!(self, Self::Steklov | Self::Both)
    }

    fn name(self) -> &'static str {
        match self {
            Self::Neumann => "neumann",
            Self::Steklov => "steklov",
            Self::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub corpus: Vec<DomainSpec>,
    pub problem: Problem,
    /// Sharpness sweep, descending.
    pub eps: Vec<f64>,
    pub passage_length: f64,
    pub neumann_degree: usize,
    pub steklov_degree: usize,
    /// `(n_r, n_theta, n_b)`.
    pub quadrature: (usize, usize, usize),
    pub fem_h: f64,
    /// Slack allowed on non-strict bounds.
    pub tolerance: f64,
    pub psi: Vec<String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Eigenvalues reported by `solve`, counting the zero one.
    pub count: usize,
    /// Cap `(l, p angle)` for the folding demo.
    pub cap: (f64, f64),
}

/// The polynomial-map corpus as `(id, coefficients)`.
pub fn polymap_corpus() -> Vec<DomainSpec> {
    let z = |extra: &[(f64, f64)]| {
        let mut c = vec![(0.0, 0.0), (1.0, 0.0)];
        c.extend_from_slice(extra);
        c
    };
    let pad = |k: usize, c: (f64, f64)| {
        let mut v = vec![(0.0, 0.0); k - 2];
        v.push(c);
        z(&v)
    };
    vec![
        DomainSpec::polymap("disk", &z(&[])),
        DomainSpec::polymap("quad_0.10", &pad(2, (0.1, 0.0))),
        DomainSpec::polymap("quad_0.25", &pad(2, (0.25, 0.0))),
        DomainSpec::polymap("quad_0.30", &pad(2, (0.3, 0.0))),
        DomainSpec::polymap("cubic_0.20", &pad(3, (0.2, 0.0))),
        DomainSpec::polymap("quartic_0.15", &pad(4, (0.15, 0.0))),
        DomainSpec::polymap("quintic_0.10", &pad(5, (0.1, 0.0))),
        DomainSpec::polymap("mixed_23", &z(&[(0.2, 0.0), (0.1, 0.0)])),
        DomainSpec::polymap("scaled_quad", &[(0.0, 0.0), (2.0, 0.0), (0.3, 0.0)]),
        DomainSpec::polymap("complex_23", &z(&[(0.0, 0.1), (0.05, 0.0)])),
        DomainSpec::polymap("ellipse_like", &pad(3, (0.1, 0.0))),
        DomainSpec::polymap("sextic_0.12", &pad(6, (0.12, 0.0))),
    ]
}

/// The polygon corpus.
pub fn fem_corpus() -> Vec<DomainSpec> {
    vec![
        DomainSpec::fem("square", DomainFamily::Square),
        DomainSpec::fem("ellipse_1.5", DomainFamily::Ellipse { a: 1.5, b: 1.0, n: 256 }),
        DomainSpec::fem("ellipse_2", DomainFamily::Ellipse { a: 2.0, b: 1.0, n: 256 }),
        DomainSpec::fem("overlap_0.3", DomainFamily::TwoDisksOverlap { eps: 0.3 }),
        DomainSpec::fem("passage_0.2", DomainFamily::TwoDisksPassage { length: 0.5, width: 0.2 }),
    ]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut corpus = polymap_corpus();
        corpus.extend(fem_corpus());
        Self {
            corpus,
            problem: Problem::Both,
            eps: vec![0.2, 0.1, 0.05],
            passage_length: 0.5,
            neumann_degree: crate::spectral_disk::DEFAULT_NEUMANN_DEGREE,
            steklov_degree: crate::spectral_disk::DEFAULT_STEKLOV_DEGREE,
            quadrature: (64, 256, 1024),
            fem_h: 0.05,
            tolerance: 1e-6,
            psi: vec!["id".into(), "bessel".into()],
            seed: 7,
            out: None,
            count: 9,
            cap: (std::f64::consts::PI, 0.0),
        }
    }
}

fn parse_list<T: std::str::FromStr>(v: &str, sep: char) -> Option<Vec<T>> {
    v.split(sep).filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse().ok()).collect()
}

fn parse_coeffs(v: &str) -> Option<Vec<(f64, f64)>> {
    v.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (re, im) = pair.split_once(',')?;
            Some((re.trim().parse().ok()?, im.trim().parse().ok()?))
        })
        .collect()
}

struct Block {
    line: usize,
    kind: String,
    id: Option<String>,
    coeffs: Option<Vec<(f64, f64)>>,
    density: Option<DensitySpec>,
    domain: Option<DomainFamily>,
    h: Option<f64>,
}

impl ExperimentConfig {
    /// Parses `key=value` lines. Global keys may appear anywhere; each
    /// `kind=` line opens a domain block that collects `id`, `coeffs`,
    /// `density`, `domain` and `h`. A file with no `kind=` lines keeps the
    /// default corpus. Relative density paths resolve against `base`.
    pub fn parse(text: &str, origin: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut blocks: Vec<Block> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let ln = ln + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::parse(origin, ln, m);
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            let block = blocks.last_mut();
            let orphan = || bad(&format!("`{key}` before any `kind=` line"));
            match key {
                "kind" => {
                    if value != "polymap" && value != "fem" {
                        return Err(bad(&format!("unknown kind `{value}`")));
                    }
                    blocks.push(Block {
                        line: ln,
                        kind: value.into(),
                        id: None,
                        coeffs: None,
                        density: None,
                        domain: None,
                        h: None,
                    });
                }
                "id" => block.ok_or_else(orphan)?.id = Some(value.into()),
                "coeffs" => block.ok_or_else(orphan)?.coeffs = Some(parse_coeffs(value).ok_or_else(|| bad("bad coefficients"))?),
                "density" => {
                    block.ok_or_else(orphan)?.density = Some(DensitySpec::parse(value, base).map_err(|e| bad(&e.to_string()))?)
                }
                "domain" => {
                    block.ok_or_else(orphan)?.domain = Some(DomainFamily::parse(value).map_err(|e| bad(&e.to_string()))?)
                }
                "h" => block.ok_or_else(orphan)?.h = Some(value.parse().map_err(|_| bad("bad mesh size"))?),
                "problem" => {
                    cfg.problem = match value {
                        "neumann" => Problem::Neumann,
                        "steklov" => Problem::Steklov,
                        "both" => Problem::Both,
                        _ => return Err(bad("problem must be neumann, steklov or both")),
                    }
                }
                "eps" => cfg.eps = parse_list(value, ',').ok_or_else(|| bad("bad eps list"))?,
                "length" => cfg.passage_length = value.parse().map_err(|_| bad("bad length"))?,
                "neumann_degree" => cfg.neumann_degree = value.parse().map_err(|_| bad("bad degree"))?,
                "steklov_degree" => cfg.steklov_degree = value.parse().map_err(|_| bad("bad degree"))?,
                "quadrature" => {
                    let q: Vec<usize> = parse_list(value, ',').ok_or_else(|| bad("bad quadrature sizes"))?;
                    match q.as_slice() {
                        [a, b, c] => cfg.quadrature = (*a, *b, *c),
                        _ => return Err(bad("quadrature needs n_r,n_theta,n_b")),
                    }
                }
                "fem_h" => cfg.fem_h = value.parse().map_err(|_| bad("bad mesh size"))?,
                "tolerance" => cfg.tolerance = value.parse().map_err(|_| bad("bad tolerance"))?,
                "psi" => {
                    let names: Vec<String> = value.split(',').map(|s| s.trim().to_string()).collect();
                    if names.iter().any(|n| RenormalizationWeight::<f64>::parse(n).is_none()) {
                        return Err(bad("psi must list id and/or bessel"));
                    }
                    cfg.psi = names;
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("bad seed"))?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "count" => cfg.count = value.parse().map_err(|_| bad("bad count"))?,
                "cap" => {
                    let c: Vec<f64> = parse_list(value, ',').ok_or_else(|| bad("bad cap"))?;
                    match c.as_slice() {
                        [l, p] => cfg.cap = (*l, *p),
                        _ => return Err(bad("cap needs l,p_angle")),
                    }
                }
                _ => return Err(bad(&format!("unknown key `{key}`"))),
            }
        }
        if !blocks.is_empty() {
            cfg.corpus = blocks
                .into_iter()
                .enumerate()
                .map(|(k, b)| b.into_spec(k, origin))
                .collect::<Result<_>>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e <= 0.5)) {
            return Err(Error::OutOfRange { value: *e, min: 0.0, max: 0.5 });
        }
        if !(self.passage_length > 0.0) || !(self.fem_h > 0.0) || !(self.tolerance >= 0.0) {
            return Err(Error::InvalidInput("length, fem_h and tolerance must be positive".into()));
        }
        if self.count < 2 {
            return Err(Error::InvalidInput("count must be at least 2".into()));
        }
        for spec in &self.corpus {
            if let DomainSpec::PolyMap { density: DensitySpec::File(p), .. } = spec {
                if !p.is_file() {
                    return Err(Error::InvalidInput(format!("density file {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    pub fn quadrature(&self) -> Result<DiskQuadrature<f64>> {
        let (a, b, c) = self.quadrature;
        DiskQuadrature::new(a, b, c)
    }

    pub fn weights(&self) -> Vec<RenormalizationWeight<f64>> {
        self.psi.iter().filter_map(|n| RenormalizationWeight::parse(n)).collect()
    }

    /// The configuration in the form accepted by [`Self::parse`].
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        s.push_str(&format!("problem={}\n", self.problem.name()));
        s.push_str(&format!("eps={}\n", join(&self.eps)));
        s.push_str(&format!("length={}\n", self.passage_length));
        s.push_str(&format!("neumann_degree={}\nsteklov_degree={}\n", self.neumann_degree, self.steklov_degree));
        let (a, b, c) = self.quadrature;
        s.push_str(&format!("quadrature={a},{b},{c}\n"));
        s.push_str(&format!("fem_h={}\ntolerance={}\n", self.fem_h, self.tolerance));
        s.push_str(&format!("psi={}\nseed={}\ncount={}\n", self.psi.join(","), self.seed, self.count));
        s.push_str(&format!("cap={},{}\n", self.cap.0, self.cap.1));
        if let Some(out) = &self.out {
            s.push_str(&format!("out={}\n", out.display()));
        }
        for spec in &self.corpus {
            s.push('\n');
            match spec {
                DomainSpec::PolyMap { id, coeffs, density } => {
                    let c: Vec<String> = coeffs.iter().map(|(re, im)| format!("{re},{im}")).collect();
                    s.push_str(&format!("kind=polymap\nid={id}\ncoeffs={}\ndensity={density}\n", c.join(";")));
                }
                DomainSpec::Fem { id, family, h } => {
                    s.push_str(&format!("kind=fem\nid={id}\ndomain={family}\n"));
                    if let Some(h) = h {
                        s.push_str(&format!("h={h}\n"));
                    }
                }
            }
        }
        s
    }
}

impl Block {
    fn into_spec(self, index: usize, origin: &str) -> Result<DomainSpec> {
        let id = self.id.unwrap_or_else(|| format!("domain_{index}"));
        let bad = |m: &str| Error::parse(origin, self.line, m);
        match self.kind.as_str() {
            "polymap" => {
                if self.domain.is_some() || self.h.is_some() {
                    return Err(bad("`domain` and `h` belong to kind=fem"));
                }
                let coeffs = self.coeffs.ok_or_else(|| bad("polymap without coeffs"))?;
                let c: Vec<Complex<f64>> = coeffs.iter().map(|&(re, im)| Complex::new(re, im)).collect();
                ConformalMap::new(c).map_err(|e| bad(&e.to_string()))?;
                Ok(DomainSpec::PolyMap { id, coeffs, density: self.density.unwrap_or(DensitySpec::Const(1.0)) })
            }
            _ => {
                if self.coeffs.is_some() || self.density.is_some() {
                    return Err(bad("`coeffs` and `density` belong to kind=polymap"));
                }
                let family = self.domain.ok_or_else(|| bad("fem domain without `domain`"))?;
                Ok(DomainSpec::Fem { id, family, h: self.h })
            }
        }
    }
}
