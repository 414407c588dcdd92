use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A conforming triangulation of a simply connected polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh<T> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    /// Boundary edges, oriented so the domain lies to the left.
    boundary: Vec<[usize; 2]>,
    /// Longest edge.
    h: T,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl<T: Real> TriMesh<T> {
    /// Builds a mesh, turning clockwise triangles counter-clockwise and
    /// extracting the boundary.
    pub fn new(vertices: Vec<[T; 2]>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        for (k, t) in triangles.iter_mut().enumerate() {
            if t.iter().any(|&i| i >= nv) {
                return Err(Error::Mesh(format!("triangle {k} references a missing vertex")));
            }
            let a = signed_area(&vertices, *t);
            if !(Float::abs(a) > T::zero()) {
                return Err(Error::Mesh(format!("triangle {k} is degenerate")));
            }
            if a < T::zero() {
                t.swap(1, 2);
            }
        }
        let mut count: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::new();
        for t in &triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let entry = count.entry(edge_key(a, b)).or_insert((0, [a, b]));
                entry.0 += 1;
            }
        }
        let mut boundary = Vec::new();
        for (&key, &(c, dir)) in &count {
            match c {
                1 => boundary.push(dir),
                2 => {}
                _ => return Err(Error::Mesh(format!("edge {key:?} is shared by {c} triangles"))),
            }
        }
        boundary.sort_unstable();
        let mut h = T::zero();
        for &(a, b) in count.keys() {
            h = Float::max(h, dist(&vertices, a, b));
        }
        let mesh = Self { vertices, triangles, boundary, h };
        let euler = mesh.euler_characteristic();
        if euler != 1 {
            return Err(Error::Mesh(format!("V - E + F = {euler}, the mesh is not simply connected")));
        }
        if mesh.boundary_loop().is_none() {
            return Err(Error::Mesh("boundary is not a single closed loop".into()));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Number of distinct edges.
    pub fn edge_count(&self) -> usize {
        // Each interior edge is seen twice, each boundary edge once.
        (3 * self.triangles.len() + self.boundary.len()) / 2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    pub fn triangle_area(&self, k: usize) -> T {
        signed_area(&self.vertices, self.triangles[k])
    }

    pub fn area(&self) -> T {
        (0..self.triangles.len()).map(|k| self.triangle_area(k)).sum()
    }

    pub fn perimeter(&self) -> T {
        self.boundary.iter().map(|e| dist(&self.vertices, e[0], e[1])).sum()
    }

    /// `sqrt(area / triangles)`, a size measure that varies smoothly with
    /// refinement.
    pub fn mean_size(&self) -> T {
        Float::sqrt(self.area() / T::from_usize_lossy(self.triangles.len()))
    }

    /// Smallest interior angle in degrees.
    pub fn min_angle_deg(&self) -> T {
        let mut best = T::lit(180.0);
        for t in &self.triangles {
            for e in 0..3 {
                let p = self.vertices[t[e]];
                let q = self.vertices[t[(e + 1) % 3]];
                let r = self.vertices[t[(e + 2) % 3]];
                let (ux, uy) = (q[0] - p[0], q[1] - p[1]);
                let (vx, vy) = (r[0] - p[0], r[1] - p[1]);
                let ang = Float::atan2(Float::abs(ux * vy - uy * vx), ux * vx + uy * vy);
                best = Float::min(best, ang.to_degrees());
            }
        }
        best
    }

    /// Sorted indices of the vertices on the boundary.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary.iter().flat_map(|e| [e[0], e[1]]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The boundary as one counter-clockwise cycle of vertex indices.
    pub fn boundary_loop(&self) -> Option<Vec<usize>> {
        let mut next = HashMap::with_capacity(self.boundary.len());
        for e in &self.boundary {
            if next.insert(e[0], e[1]).is_some() {
                return None;
            }
        }
        let start = self.boundary.first()?[0];
        let mut out = vec![start];
        let mut v = next[&start];
        while v != start {
            if out.len() > self.boundary.len() {
                return None;
            }
            out.push(v);
            v = *next.get(&v)?;
        }
        (out.len() == self.boundary.len()).then_some(out)
    }

    /// Copy with every coordinate multiplied by `c > 0`.
    pub fn scaled(&self, c: T) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| [p[0] * c, p[1] * c]).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            h: self.h * c,
        }
    }

    /// Plain-text form: `v x y`, `t i j k` and `b i j` lines, 0-based.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.vertices {
            let _ = writeln!(s, "v {:e} {:e}", p[0].as_f64(), p[1].as_f64());
        }
        for t in &self.triangles {
            let _ = writeln!(s, "t {} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary {
            let _ = writeln!(s, "b {} {}", e[0], e[1]);
        }
        s
    }

    /// Parses [`Self::to_text`] output. `b` lines are checked against the
    /// boundary derived from the triangles. Blank lines and `#` comments are
    /// skipped.
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut boundary = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap_or_default();
            let fields: Vec<&str> = parts.collect();
            let bad = |m: &str| Error::parse(origin, ln + 1, m);
            match (tag, fields.len()) {
                ("v", 2) => {
                    let x: f64 = fields[0].parse().map_err(|_| bad("bad x coordinate"))?;
                    let y: f64 = fields[1].parse().map_err(|_| bad("bad y coordinate"))?;
                    vertices.push([T::lit(x), T::lit(y)]);
                }
                ("t", 3) => {
                    let mut t = [0; 3];
                    for (k, f) in fields.iter().enumerate() {
                        t[k] = f.parse().map_err(|_| bad("bad vertex index"))?;
                    }
                    triangles.push(t);
                }
                ("b", 2) => {
                    let i: usize = fields[0].parse().map_err(|_| bad("bad vertex index"))?;
                    let j: usize = fields[1].parse().map_err(|_| bad("bad vertex index"))?;
                    boundary.push(edge_key(i, j));
                }
                _ => return Err(bad(&format!("unrecognized line `{line}`"))),
            }
        }
        let mesh = Self::new(vertices, triangles)?;
        if !boundary.is_empty() {
            boundary.sort_unstable();
            let mut derived: Vec<_> = mesh.boundary.iter().map(|e| edge_key(e[0], e[1])).collect();
            derived.sort_unstable();
            if boundary != derived {
                return Err(Error::Mesh(format!("{origin}: boundary lines disagree with the triangles")));
            }
        }
        Ok(mesh)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, &path.display().to_string())
    }
}

fn signed_area<T: Real>(v: &[[T; 2]], t: [usize; 3]) -> T {
    let [a, b, c] = t.map(|i| v[i]);
    ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) / T::lit(2.0)
}

fn dist<T: Real>(v: &[[T; 2]], a: usize, b: usize) -> T {
    Float::hypot(v[a][0] - v[b][0], v[a][1] - v[b][1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> TriMesh<f64> {
        TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 3, 2]]).unwrap()
    }

    #[test]
    fn basic_invariants() {
        let m = two_triangles();
        assert_eq!(m.triangles()[1], [0, 2, 3]);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.euler_characteristic(), 1);
        assert!((m.area() - 1.0).abs() < 1e-15);
        assert!((m.perimeter() - 4.0).abs() < 1e-15);
        assert!((m.h() - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.min_angle_deg() - 45.0).abs() < 1e-12);
        assert_eq!(m.boundary_loop().unwrap().len(), 4);
    }

    #[test]
    fn text_round_trip() {
        let m = two_triangles();
        let back = TriMesh::<f64>::from_text(&m.to_text(), "mem").unwrap();
        assert_eq!(back, m);
        assert!(matches!(TriMesh::<f64>::from_text("v 0 0\nq 1\n", "mem"), Err(Error::Parse { line: 2, .. })));
        let wrong = m.to_text().replace("b 0 1", "b 0 2");
        assert!(TriMesh::<f64>::from_text(&wrong, "mem").is_err());
    }

    #[test]
    fn rejects_invalid_meshes() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(TriMesh::new(v, vec![[0, 1, 2]]).is_err());
        // An annulus-like strip around a hole has V - E + F = 0.
        let mut v = Vec::new();
        let mut t = Vec::new();
        for k in 0..6 {
            let a = k as f64 * std::f64::consts::PI / 3.0;
            v.push([a.cos(), a.sin()]);
            v.push([2.0 * a.cos(), 2.0 * a.sin()]);
        }
        for k in 0..6 {
            let (i0, o0, i1, o1) = (2 * k, 2 * k + 1, (2 * k + 2) % 12, (2 * k + 3) % 12);
            t.push([i0, o0, o1]);
            t.push([i0, o1, i1]);
        }
        assert!(matches!(TriMesh::new(v, t), Err(Error::Mesh(_))));
    }
}
