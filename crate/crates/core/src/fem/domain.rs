use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt;

use spade::handles::FixedVertexHandle;
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::mesh::TriMesh;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest angle the refinement aims for.
pub const ANGLE_LIMIT_DEG: f64 = 25.0;
/// Passages are meshed with boundary spacing at most `width / 3`.
pub const PASSAGE_RESOLUTION: f64 = 3.0;
const MAX_VERTICES: usize = 400_000;

/// Polygonal domains, including the two degenerating families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainFamily {
    /// Regular `n`-gon inscribed in the unit circle.
    DiskPolygon { n: usize },
    /// `n`-gon inscribed in the ellipse with semi-axes `a`, `b`.
    Ellipse { a: f64, b: f64, n: usize },
    /// The unit square `[0, 1]^2`.
    Square,
    /// Unit disks centred at `-(1 + L/2)` and `1 + L/2` joined by the strip
    /// `|y| <= width / 2`.
    TwoDisksPassage { length: f64, width: f64 },
    /// Union of two unit disks with centres `2 - eps` apart.
    TwoDisksOverlap { eps: f64 },
}

impl fmt::Display for DomainFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::DiskPolygon { n } => write!(f, "disk_polygon:{n}"),
            Self::Ellipse { a, b, n } => write!(f, "ellipse:{a},{b},{n}"),
            Self::Square => write!(f, "square"),
            Self::TwoDisksPassage { length, width } => write!(f, "two_disks_passage:{length},{width}"),
            Self::TwoDisksOverlap { eps } => write!(f, "two_disks_overlap:{eps}"),
        }
    }
}

impl DomainFamily {
    /// Parses the [`Display`](fmt::Display) form, e.g. `ellipse:1.5,1,256`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidInput(format!("bad numbers in domain `{s}`")))?
        };
        let count = |n: f64| -> Result<usize> {
            if n >= 3.0 && n.fract() == 0.0 {
                Ok(n as usize)
            } else {
                Err(Error::InvalidInput(format!("polygon size {n} in `{s}`")))
            }
        };
        let family = match (name.trim(), nums.as_slice()) {
            ("disk_polygon", [n]) => Self::DiskPolygon { n: count(*n)? },
            ("ellipse", [a, b, n]) => Self::Ellipse { a: *a, b: *b, n: count(*n)? },
            ("ellipse", [a, b]) => Self::Ellipse { a: *a, b: *b, n: 256 },
            ("square", []) => Self::Square,
            ("two_disks_passage", [l, e]) => Self::TwoDisksPassage { length: *l, width: *e },
            ("two_disks_overlap", [e]) => Self::TwoDisksOverlap { eps: *e },
            _ => return Err(Error::InvalidInput(format!("unknown domain `{s}`"))),
        };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::DiskPolygon { n } => n >= 3,
            Self::Ellipse { a, b, n } => a > 0.0 && b > 0.0 && n >= 3,
            Self::Square => true,
            Self::TwoDisksPassage { length, width } => length > 0.0 && width > 0.0 && width < 1.0,
            Self::TwoDisksOverlap { eps } => eps > 0.0 && eps < 2.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid domain parameters {self}")))
        }
    }

    /// Width of the thinnest feature, if the family has one.
    pub fn feature_width(&self) -> Option<f64> {
        match *self {
            Self::TwoDisksPassage { width, .. } => Some(width),
            Self::TwoDisksOverlap { eps } => Some(2.0 * overlap_half_angle(eps).sin()),
            _ => None,
        }
    }

    /// Boundary polygon, counter-clockwise, with spacing about `h` and
    /// `passage_h` along the passage.
    pub fn boundary_polygon(&self, h: f64, passage_h: f64) -> Vec<[f64; 2]> {
        match *self {
            Self::DiskPolygon { n } => (0..n).map(|k| on_circle(0.0, 2.0 * PI * k as f64 / n as f64)).collect(),
            Self::Ellipse { a, b, n } => (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    [a * t.cos(), b * t.sin()]
                })
                .collect(),
            Self::Square => vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            Self::TwoDisksPassage { length, width } => {
                let c = 1.0 + length / 2.0;
                let alpha = (width / 2.0).asin();
                let (xl, xr) = (-c + alpha.cos(), c - alpha.cos());
                let mut pts = Vec::new();
                // Bottom edge, left to right.
                segment(&mut pts, [xl, -width / 2.0], [xr, -width / 2.0], passage_h);
                arc(&mut pts, c, PI + alpha, 3.0 * PI - alpha, h);
                segment(&mut pts, [xr, width / 2.0], [xl, width / 2.0], passage_h);
                arc(&mut pts, -c, alpha, 2.0 * PI - alpha, h);
                pts
            }
            Self::TwoDisksOverlap { eps } => {
                let c = 1.0 - eps / 2.0;
                let g = overlap_half_angle(eps);
                let mut pts = Vec::new();
                arc(&mut pts, c, PI + g, 3.0 * PI - g, h);
                arc(&mut pts, -c, g, 2.0 * PI - g, h);
                pts
            }
        }
    }

    /// Area of the domain bounded by [`Self::boundary_polygon`], from
    /// circular-segment formulas.
    pub fn polygon_area_closed_form(&self, h: f64) -> f64 {
        match *self {
            Self::DiskPolygon { n } => 0.5 * n as f64 * (2.0 * PI / n as f64).sin(),
            Self::Ellipse { a, b, n } => 0.5 * a * b * n as f64 * (2.0 * PI / n as f64).sin(),
            Self::Square => 1.0,
            Self::TwoDisksPassage { length, width } => {
                let alpha = (width / 2.0).asin();
                // Strip between the chords x = x_l, x_r minus the disk parts it covers.
                let strip = width * (length + 2.0 - 2.0 * alpha.cos());
                let covered = 2.0 * (alpha - 0.5 * width * alpha.cos());
                let exact = 2.0 * PI + strip - covered;
                let span = 2.0 * PI - 2.0 * alpha;
                exact - 2.0 * segment_loss(span, arc_pieces(span, h))
            }
            Self::TwoDisksOverlap { eps } => {
                let g = overlap_half_angle(eps);
                let exact = 2.0 * PI - 2.0 * (g - g.sin() * g.cos());
                let span = 2.0 * PI - 2.0 * g;
                exact - 2.0 * segment_loss(span, arc_pieces(span, h))
            }
        }
    }

    /// Area of the curved domain the polygon approximates.
    pub fn exact_area(&self) -> f64 {
        match *self {
            Self::DiskPolygon { .. } => PI,
            Self::Ellipse { a, b, .. } => PI * a * b,
            Self::Square => 1.0,
            Self::TwoDisksPassage { length, width } => {
                let alpha = (width / 2.0).asin();
                2.0 * PI + width * (length + 2.0 - 2.0 * alpha.cos()) - 2.0 * (alpha - 0.5 * width * alpha.cos())
            }
            Self::TwoDisksOverlap { eps } => {
                let g = overlap_half_angle(eps);
                2.0 * PI - 2.0 * (g - g.sin() * g.cos())
            }
        }
    }
}

/// Half the central angle of the common chord of the two disks.
fn overlap_half_angle(eps: f64) -> f64 {
    (1.0 - eps / 2.0).acos()
}

fn on_circle(cx: f64, t: f64) -> [f64; 2] {
    [cx + t.cos(), t.sin()]
}

fn arc_pieces(span: f64, h: f64) -> usize {
    // Chord 2 sin(d/2) <= h.
    let d = 2.0 * (h / 2.0).min(1.0).asin();
    ((span / d).ceil() as usize).max(2)
}

/// Area between an arc of the unit circle and its inscribed chords.
fn segment_loss(span: f64, pieces: usize) -> f64 {
    let d = span / pieces as f64;
    pieces as f64 * 0.5 * (d - d.sin())
}

/// Appends points of the arc from `t0` to `t1`, excluding the end point.
fn arc(pts: &mut Vec<[f64; 2]>, cx: f64, t0: f64, t1: f64, h: f64) {
    let n = arc_pieces(t1 - t0, h);
    for k in 0..n {
        pts.push(on_circle(cx, t0 + (t1 - t0) * k as f64 / n as f64));
    }
}

/// Appends points of the segment from `a` to `b`, excluding `b`.
fn segment(pts: &mut Vec<[f64; 2]>, a: [f64; 2], b: [f64; 2], h: f64) {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    let n = ((len / h).ceil() as usize).max(1);
    for k in 0..n {
        let s = k as f64 / n as f64;
        pts.push([a[0] + (b[0] - a[0]) * s, a[1] + (b[1] - a[1]) * s]);
    }
}

/// Meshes `family` with target size `h`; passages get `min(h, width / 3)`.
pub fn generate_mesh<T: Real>(family: &DomainFamily, h: f64) -> Result<TriMesh<T>> {
    let passage_h = match *family {
        DomainFamily::TwoDisksPassage { width, .. } => h.min(width / PASSAGE_RESOLUTION),
        _ => h,
    };
    generate_mesh_with(family, h, passage_h)
}

/// As [`generate_mesh`] with an explicit passage spacing, which must resolve
/// the passage width.
pub fn generate_mesh_with<T: Real>(family: &DomainFamily, h: f64, passage_h: f64) -> Result<TriMesh<T>> {
    family.validate()?;
    if !(h > 0.0) || !(passage_h > 0.0) {
        return Err(Error::InvalidInput(format!("mesh size h = {h}, passage h = {passage_h}")));
    }
    if let DomainFamily::TwoDisksPassage { width, .. } = *family {
        let required = width / PASSAGE_RESOLUTION;
        if passage_h > required * (1.0 + 1e-12) {
            return Err(Error::UnresolvedFeature { feature: width, h: passage_h, required });
        }
    }
    let scale = match *family {
        DomainFamily::Ellipse { a, b, .. } => a.min(b),
        DomainFamily::Square => 1.0,
        _ => 1.0,
    };
    if h > scale / 2.0 {
        return Err(Error::UnresolvedFeature { feature: scale, h, required: scale / 2.0 });
    }
    if let DomainFamily::Square = family {
        return Ok(structured_square(h));
    }
    let polygon = family.boundary_polygon(h, passage_h);
    let expected = family.exact_area() / (3f64.sqrt() / 4.0 * passage_h.min(h).powi(2));
    if expected > 4.0 * MAX_VERTICES as f64 && passage_h >= h {
        return Err(Error::Mesh(format!("h = {h} would need more than {MAX_VERTICES} vertices")));
    }
    triangulate(&polygon, h)
}

/// `n x n` squares split along the same diagonal, `n = ceil(1 / h)`.
fn structured_square<T: Real>(h: f64) -> TriMesh<T> {
    let n = (1.0 / h).ceil() as usize;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([T::lit(i as f64 / n as f64), T::lit(j as f64 / n as f64)]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, triangles).expect("structured mesh is valid")
}

/// Constrained Delaunay triangulation of a simple polygon with quality
/// refinement.
pub fn triangulate<T: Real>(polygon: &[[f64; 2]], h: f64) -> Result<TriMesh<T>> {
    let n = polygon.len();
    let vertices: Vec<Point2<f64>> = polygon.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(vertices, edges)
        .map_err(|e| Error::Mesh(format!("boundary insertion failed: {e:?}")))?;
    if cdt.num_vertices() != n {
        return Err(Error::Mesh("boundary polygon has repeated vertices".into()));
    }
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(ANGLE_LIMIT_DEG))
        .with_max_allowed_area(3f64.sqrt() / 4.0 * h * h)
        .with_max_additional_vertices(MAX_VERTICES)
        .exclude_outer_faces(true);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(Error::Mesh(format!("refinement stopped at {MAX_VERTICES} added vertices")));
    }
    let excluded: HashSet<_> = result.excluded_faces.into_iter().collect();
    let mut index: HashMap<FixedVertexHandle, usize> = HashMap::new();
    let mut points = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let mut t = [0; 3];
        for (k, v) in face.vertices().iter().enumerate() {
            t[k] = *index.entry(v.fix()).or_insert_with(|| {
                let p = v.position();
                points.push([T::lit(p.x), T::lit(p.y)]);
                points.len() - 1
            });
        }
        triangles.push(t);
    }
    TriMesh::new(points, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shoelace(p: &[[f64; 2]]) -> f64 {
        let n = p.len();
        (0..n).map(|i| p[i][0] * p[(i + 1) % n][1] - p[(i + 1) % n][0] * p[i][1]).sum::<f64>() / 2.0
    }

    #[test]
    fn parse_round_trip() {
        for s in ["disk_polygon:256", "ellipse:1.5,1,128", "square", "two_disks_passage:0.5,0.05", "two_disks_overlap:0.1"] {
            let f = DomainFamily::parse(s).unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!(DomainFamily::parse("two_disks_overlap:3").is_err());
        assert!(DomainFamily::parse("blob").is_err());
    }

    #[test]
    fn square_mesh() {
        let m: TriMesh<f64> = generate_mesh(&DomainFamily::Square, 0.1).unwrap();
        assert_eq!(m.triangle_count(), 200);
        assert!((m.area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disk_polygon_mesh() {
        let m: TriMesh<f64> = generate_mesh(&DomainFamily::DiskPolygon { n: 256 }, 0.05).unwrap();
        assert!((m.area() - PI).abs() < 1e-3);
        assert!(m.min_angle_deg() >= 20.0, "{}", m.min_angle_deg());
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn passage_area_matches_closed_form() {
        let f = DomainFamily::TwoDisksPassage { length: 0.5, width: 0.05 };
        let (h, ph) = (0.1, 0.05 / 3.0);
        let poly = f.boundary_polygon(h, ph);
        let closed = f.polygon_area_closed_form(h);
        assert!((shoelace(&poly) - closed).abs() < 1e-12, "{} vs {closed}", shoelace(&poly));
        let m: TriMesh<f64> = generate_mesh(&f, h).unwrap();
        assert!((m.area() - closed).abs() < 1e-6);
        assert!(m.min_angle_deg() >= 20.0, "{}", m.min_angle_deg());
        // The polygon converges to the curved domain.
        let fine = f.polygon_area_closed_form(0.01);
        // Chord losses total about 4 pi h^2 / 12.
        assert!((fine - f.exact_area()).abs() < 4.0 * PI * 0.01f64.powi(2) / 12.0 * 1.1);
        assert!(matches!(
            generate_mesh_with::<f64>(&f, 0.1, 0.05),
            Err(Error::UnresolvedFeature { .. })
        ));
    }

    #[test]
    fn overlap_area_matches_closed_form() {
        let f = DomainFamily::TwoDisksOverlap { eps: 0.05 };
        let poly = f.boundary_polygon(0.08, 0.08);
        assert!((shoelace(&poly) - f.polygon_area_closed_form(0.08)).abs() < 1e-12);
        let m: TriMesh<f64> = generate_mesh(&f, 0.08).unwrap();
        assert!((m.area() - shoelace(&poly)).abs() < 1e-10);
        assert!(m.min_angle_deg() >= 20.0);
        assert_eq!(m.boundary_loop().unwrap().len(), m.boundary_edges().len());
    }

    #[test]
    fn ellipse_area() {
        let f = DomainFamily::Ellipse { a: 2.0, b: 1.0, n: 200 };
        let m: TriMesh<f64> = generate_mesh(&f, 0.1).unwrap();
        assert!((m.area() - f.polygon_area_closed_form(0.1)).abs() < 1e-10);
        assert!((m.area() - 2.0 * PI).abs() < 2e-3);
    }
}
