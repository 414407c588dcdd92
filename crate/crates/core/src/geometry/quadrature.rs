use num_complex::Complex;

use super::cis;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on `[0, 1]`, ascending.
pub fn gauss_legendre_unit<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Newton on P_n in f64, seeded with Tricomi's approximation.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[n - 1 - i] = T::lit(0.5 * (1.0 + x));
        nodes[i] = T::lit(0.5 * (1.0 - x));
        weights[i] = T::lit(0.5 * w);
        weights[n - 1 - i] = T::lit(0.5 * w);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule on the disk (Gauss-Legendre in `r` with the `r dr` Jacobian
/// folded in, trapezoid in `theta`) plus a trapezoid rule on the circle.
#[derive(Debug, Clone)]
pub struct DiskQuadrature<T> {
    n_r: usize,
    n_theta: usize,
    n_b: usize,
    radii: Vec<T>,
    interior_nodes: Vec<Complex<T>>,
    interior_weights: Vec<T>,
    boundary_nodes: Vec<Complex<T>>,
    boundary_weights: Vec<T>,
}

impl<T: Real> Default for DiskQuadrature<T> {
    fn default() -> Self {
        Self::new(Self::DEFAULT_N_R, Self::DEFAULT_N_THETA, Self::DEFAULT_N_B).expect("default quadrature")
    }
}

impl<T: Real> DiskQuadrature<T> {
    pub const DEFAULT_N_R: usize = 64;
    pub const DEFAULT_N_THETA: usize = 256;
    pub const DEFAULT_N_B: usize = 1024;

    /// Builds the rule and runs its exactness self-test.
    pub fn new(n_r: usize, n_theta: usize, n_b: usize) -> Result<Self> {
        if n_r == 0 || n_theta < 3 || n_b < 3 {
            return Err(Error::Quadrature(format!("sizes ({n_r}, {n_theta}, {n_b}) too small")));
        }
        let (radii, rw) = gauss_legendre_unit::<T>(n_r);
        let dtheta = T::lit(2.0) * T::PI() / T::from_usize_lossy(n_theta);
        let mut interior_nodes = Vec::with_capacity(n_r * n_theta);
        let mut interior_weights = Vec::with_capacity(n_r * n_theta);
        for (&r, &w) in radii.iter().zip(&rw) {
            for j in 0..n_theta {
                let theta = dtheta * T::from_usize_lossy(j);
                interior_nodes.push(cis(theta) * r);
                interior_weights.push(w * r * dtheta);
            }
        }
        let db = T::lit(2.0) * T::PI() / T::from_usize_lossy(n_b);
        let boundary_nodes = (0..n_b).map(|j| cis(db * T::from_usize_lossy(j))).collect();
        let quad = Self {
            n_r,
            n_theta,
            n_b,
            radii,
            interior_nodes,
            interior_weights,
            boundary_nodes,
            boundary_weights: vec![db; n_b],
        };
        quad.self_test()?;
        Ok(quad)
    }

    /// Total degree of bivariate polynomials integrated exactly over the disk.
    pub fn degree(&self) -> usize {
        (2 * self.n_r - 2).min(self.n_theta - 1)
    }

    /// Highest trigonometric degree integrated exactly on the circle.
    pub fn boundary_degree(&self) -> usize {
        self.n_b - 1
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.n_r, self.n_theta, self.n_b)
    }

    /// Gauss-Legendre radii, ascending; interior nodes are stored ring by ring.
    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn interior_nodes(&self) -> &[Complex<T>] {
        &self.interior_nodes
    }

    pub fn interior_weights(&self) -> &[T] {
        &self.interior_weights
    }

    pub fn boundary_nodes(&self) -> &[Complex<T>] {
        &self.boundary_nodes
    }

    pub fn boundary_weights(&self) -> &[T] {
        &self.boundary_weights
    }

    pub fn integrate_interior(&self, mut f: impl FnMut(Complex<T>) -> T) -> T {
        self.interior_nodes.iter().zip(&self.interior_weights).map(|(&z, &w)| w * f(z)).sum()
    }

    pub fn integrate_boundary(&self, mut f: impl FnMut(Complex<T>) -> T) -> T {
        self.boundary_nodes.iter().zip(&self.boundary_weights).map(|(&z, &w)| w * f(z)).sum()
    }

    fn self_test(&self) -> Result<()> {
        let tol = T::tol(1e-12);
        let area: T = self.interior_weights.iter().copied().sum();
        if (area - T::PI()).abs() > tol {
            return Err(Error::Quadrature(format!("interior weights sum to {area}, not pi")));
        }
        let length: T = self.boundary_weights.iter().copied().sum();
        if (length - T::lit(2.0) * T::PI()).abs() > tol {
            return Err(Error::Quadrature(format!("boundary weights sum to {length}, not 2 pi")));
        }
        // Monomial moments up to the advertised degree (capped to keep the
        // test cheap; the top degree itself is always checked).
        let top = self.degree();
        let degrees: Vec<usize> = (0..=top.min(12)).chain(std::iter::once(top)).collect();
        let mtol = (1024.0 * T::epsilon().as_f64()).max(1e-10);
        for &d in &degrees {
            for a in 0..=d {
                let b = d - a;
                let got = self.integrate_interior(|z| z.re.powi(a as i32) * z.im.powi(b as i32)).as_f64();
                let want = monomial_moment(a, b);
                let scale = want.abs().max(1e-3 * monomial_moment(2 * (d / 2), 0));
                if (got - want).abs() > mtol * scale.max(1e-300) + 1e-300 {
                    return Err(Error::Quadrature(format!(
                        "x^{a} y^{b}: quadrature {got:e} vs exact {want:e}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `int_D x^a y^b dA`, zero unless both exponents are even.
pub(crate) fn monomial_moment(a: usize, b: usize) -> f64 {
    if a % 2 == 1 || b % 2 == 1 {
        return 0.0;
    }
    // 2 Gamma((a+1)/2) Gamma((b+1)/2) / ((a+b+2) Gamma((a+b)/2 + 1))
    // with Gamma(k + 1/2) / sqrt(pi) = (2k-1)!! / 2^k.
    let half_gamma_ratio = |k: usize| -> f64 { (1..=k).map(|j| (2 * j - 1) as f64 / 2.0).product() };
    let (ka, kb) = (a / 2, b / 2);
    let m = ka + kb;
    let fact: f64 = (1..=m).map(|j| j as f64).product();
    2.0 * std::f64::consts::PI * half_gamma_ratio(ka) * half_gamma_ratio(kb) / ((a + b + 2) as f64 * fact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre_unit::<f64>(10);
        for k in 0..20 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn default_rule_sums() {
        let q = DiskQuadrature::<f64>::default();
        let a: f64 = q.interior_weights().iter().sum();
        let b: f64 = q.boundary_weights().iter().sum();
        assert!((a - std::f64::consts::PI).abs() < 1e-12);
        assert!((b - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(q.degree(), 126);
    }

    #[test]
    fn moments_known_values() {
        use std::f64::consts::PI;
        assert!((monomial_moment(0, 0) - PI).abs() < 1e-15);
        assert!((monomial_moment(2, 0) - PI / 4.0).abs() < 1e-15);
        assert!((monomial_moment(2, 2) - PI / 24.0).abs() < 1e-15);
        assert!((monomial_moment(4, 0) - PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn small_rule_reports_its_degree() {
        let q = DiskQuadrature::<f64>::new(4, 9, 16).unwrap();
        assert_eq!(q.degree(), 6);
        // degree 8 is beyond the rule: x^8 is no longer exact
        let got = q.integrate_interior(|z| z.re.powi(8));
        assert!((got - monomial_moment(8, 0)).abs() > 1e-8);
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(DiskQuadrature::<f64>::new(0, 8, 8).is_err());
    }

    #[test]
    fn single_precision_rule() {
        let q = DiskQuadrature::<f32>::new(16, 64, 128).unwrap();
        let a: f32 = q.interior_weights().iter().sum();
        assert!((a - std::f32::consts::PI).abs() < 1e-4);
    }
}
