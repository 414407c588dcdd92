use num_complex::Complex;

use super::cis;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Polynomial map `phi(z) = c_0 + sum_{k>=1} c_k z^k` from the unit disk.
///
/// Construction rejects maps whose derivative vanishes (to working
/// precision) on a sample of the closed disk. That is a local injectivity
/// proxy only; [`ConformalMap::boundary_is_simple`] is the cheap global
/// check surfaced as a warning by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMap<T> {
    coeffs: Vec<Complex<T>>,
    min_derivative: T,
}

impl<T: Real> ConformalMap<T> {
    pub const MAX_DEGREE: usize = 12;
    pub const DEFAULT_SAMPLES: usize = 4096;

    pub fn new(coeffs: Vec<Complex<T>>) -> Result<Self> {
        Self::with_sample_density(coeffs, Self::DEFAULT_SAMPLES)
    }

    /// Like [`ConformalMap::new`] with roughly `samples` derivative checks,
    /// spread over concentric rings that include the unit circle.
    pub fn with_sample_density(mut coeffs: Vec<Complex<T>>, samples: usize) -> Result<Self> {
        while coeffs.len() > 2 && coeffs.last().is_some_and(|c| c.norm_sqr() == T::zero()) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::InvalidInput("a conformal map needs at least c_0 and c_1".into()));
        }
        if coeffs.len() - 1 > Self::MAX_DEGREE {
            return Err(Error::InvalidInput(format!(
                "degree {} exceeds the supported maximum {}",
                coeffs.len() - 1,
                Self::MAX_DEGREE
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        let mut map = Self { coeffs, min_derivative: T::zero() };
        let rings = ((samples as f64).sqrt().round() as usize).max(2);
        let per_ring = samples.div_ceil(rings).max(4);
        let mut min = T::infinity();
        let mut count = 0;
        let dtheta = T::lit(2.0) * T::PI() / T::from_usize_lossy(per_ring);
        for i in 0..=rings {
            let r = T::from_usize_lossy(i) / T::from_usize_lossy(rings);
            for j in 0..per_ring {
                let z = cis(dtheta * T::from_usize_lossy(j)) * r;
                min = min.min(map.derivative(z).norm());
                count += 1;
                if i == 0 {
                    break;
                }
            }
        }
        let scale = map.coeffs.iter().skip(1).map(|c| c.norm()).fold(T::zero(), T::max);
        if !(min > T::epsilon() * T::lit(1e3) * scale) {
            return Err(Error::DegenerateMap { min_derivative: min.as_f64(), samples: count });
        }
        // Argument principle: phi' has no zeros in the disk iff its boundary
        // image does not wind around the origin.
        let nb = per_ring.max(1024);
        let db = T::lit(2.0) * T::PI() / T::from_usize_lossy(nb);
        let mut winding = T::zero();
        let mut prev = map.derivative(Complex::new(T::one(), T::zero()));
        for j in 1..=nb {
            let next = map.derivative(cis(db * T::from_usize_lossy(j)));
            winding += (next / prev).arg();
            prev = next;
        }
        if (winding / (T::lit(2.0) * T::PI())).abs() > T::lit(0.5) {
            return Err(Error::DegenerateMap { min_derivative: T::zero().as_f64(), samples: count });
        }
        map.min_derivative = min;
        Ok(map)
    }

    pub fn from_real_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(re, im)| Complex::new(T::lit(re), T::lit(im))).collect())
    }

    pub fn identity() -> Self {
        Self::new(vec![Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero())]).unwrap()
    }

    /// `z -> c z`.
    pub fn dilation(c: T) -> Result<Self> {
        Self::new(vec![Complex::new(T::zero(), T::zero()), Complex::new(c, T::zero())])
    }

    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Smallest `|phi'|` seen on the construction sample.
    pub fn min_derivative(&self) -> T {
        self.min_derivative
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * T::from_usize_lossy(k);
        }
        acc
    }

    pub fn derivative_abs(&self, z: Complex<T>) -> T {
        self.derivative(z).norm()
    }

    /// `phi -> c phi`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Closed-form area of the image, `pi sum k |c_k|^2`.
    pub fn area(&self) -> T {
        T::PI()
            * self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| T::from_usize_lossy(k) * c.norm_sqr())
                .sum::<T>()
    }

    /// Perimeter of the image by the trapezoid rule on `n` boundary points.
    pub fn perimeter(&self, n: usize) -> T {
        let h = T::lit(2.0) * T::PI() / T::from_usize_lossy(n);
        (0..n).map(|j| self.derivative_abs(cis(h * T::from_usize_lossy(j)))).sum::<T>() * h
    }

    /// Checks that the image of `n` boundary samples is a simple polygon.
    pub fn boundary_is_simple(&self, n: usize) -> bool {
        let h = T::lit(2.0) * T::PI() / T::from_usize_lossy(n);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|j| {
                let w = self.eval(cis(h * T::from_usize_lossy(j)));
                (w.re.as_f64(), w.im.as_f64())
            })
            .collect();
        polygon_is_simple(&pts)
    }
}

pub(crate) fn polygon_is_simple(pts: &[(f64, f64)]) -> bool {
    let n = pts.len();
    let orient = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            let d1 = orient(a, b, c);
            let d2 = orient(a, b, d);
            let d3 = orient(c, d, a);
            let d4 = orient(c, d, b);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return false;
            }
        }
    }
    true
}
