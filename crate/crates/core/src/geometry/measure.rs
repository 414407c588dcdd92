use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurePart {
    Interior,
    Boundary,
}

impl MeasurePart {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasurePart::Interior => "interior",
            MeasurePart::Boundary => "boundary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "interior" => Some(MeasurePart::Interior),
            "boundary" => Some(MeasurePart::Boundary),
            _ => None,
        }
    }
}

/// Weighted point masses in the closed unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    nodes: Vec<Complex<T>>,
    weights: Vec<T>,
    part: MeasurePart,
}

impl<T: Real> DiscreteMeasure<T> {
    pub fn new(nodes: Vec<Complex<T>>, weights: Vec<T>, part: MeasurePart) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        let radius = T::one() + T::tol(1e-12);
        for (index, (z, &w)) in nodes.iter().zip(&weights).enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > radius {
                return Err(Error::InvalidMeasure { index, reason: format!("node {z} outside the closed disk") });
            }
            if !(w >= T::zero()) || !w.is_finite() {
                return Err(Error::InvalidMeasure { index, reason: format!("weight {w} is not a finite nonnegative number") });
            }
        }
        Ok(Self { nodes, weights, part })
    }

    /// Uniform arc-length measure sampled at `n` equispaced points of the circle.
    pub fn uniform_boundary(n: usize) -> Self {
        let h = T::lit(2.0) * T::PI() / T::from_usize_lossy(n);
        let nodes = (0..n).map(|j| super::cis(h * T::from_usize_lossy(j))).collect();
        Self { nodes, weights: vec![h; n], part: MeasurePart::Boundary }
    }

    /// Lebesgue measure on the disk, discretized by the interior rule.
    pub fn lebesgue(quad: &super::DiskQuadrature<T>) -> Self {
        Self {
            nodes: quad.interior_nodes().to_vec(),
            weights: quad.interior_weights().to_vec(),
            part: MeasurePart::Interior,
        }
    }

    pub fn nodes(&self) -> &[Complex<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn part(&self) -> MeasurePart {
        self.part
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Complex<T>, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, mut f: impl FnMut(Complex<T>) -> T) -> T {
        self.iter().map(|(z, w)| w * f(z)).sum()
    }

    /// Same weights, nodes moved by `f`. Images are not re-validated; callers
    /// map the disk into itself.
    pub fn map_nodes(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { nodes: self.nodes.iter().map(|&z| f(z)).collect(), weights: self.weights.clone(), part: self.part }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { nodes: self.nodes.clone(), weights: self.weights.iter().map(|&w| w * factor).collect(), part: self.part }
    }

    /// Rescales so that the total mass equals `target`.
    pub fn normalized_to(&self, target: T) -> Result<Self> {
        let m = self.mass();
        if m <= T::zero() {
            return Err(Error::ZeroMass);
        }
        Ok(self.scaled(target / m))
    }

    pub(crate) fn from_parts_unchecked(nodes: Vec<Complex<T>>, weights: Vec<T>, part: MeasurePart) -> Self {
        Self { nodes, weights, part }
    }

    /// CSV with header `re,im,weight,part`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,weight,part\n");
        for (z, w) in self.iter() {
            let _ = writeln!(out, "{:e},{:e},{:e},{}", z.re.as_f64(), z.im.as_f64(), w.as_f64(), self.part.as_str());
        }
        out
    }

    /// Parses the CSV written by [`DiscreteMeasure::to_csv`]; all rows must
    /// share one part tag.
    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut part = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("re")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::parse(origin, i + 1, "expected re,im,weight,part"));
            }
            let num = |s: &str| -> Result<T> {
                s.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::parse(origin, i + 1, format!("bad number {s:?}: {e}")))
            };
            let p = MeasurePart::parse(fields[3])
                .ok_or_else(|| Error::parse(origin, i + 1, format!("unknown part {:?}", fields[3])))?;
            if *part.get_or_insert(p) != p {
                return Err(Error::parse(origin, i + 1, "mixed interior and boundary rows"));
            }
            nodes.push(Complex::new(num(fields[0])?, num(fields[1])?));
            weights.push(num(fields[2])?);
        }
        Self::new(nodes, weights, part.unwrap_or(MeasurePart::Interior))
    }
}
