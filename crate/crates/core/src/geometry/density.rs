use num_complex::Complex;

use super::{ConformalMap, DiscreteMeasure, DiskQuadrature, MeasurePart};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Grid spacing of the 5-point stencil used for `Delta log rho`.
pub const CURVATURE_SPACING: f64 = 1.0 / 128.0;

/// A positive density that can be evaluated anywhere it is defined.
pub trait PointDensity<T> {
    fn value(&self, z: Complex<T>) -> T;
}

impl<T, F: Fn(Complex<T>) -> T> PointDensity<T> for F {
    fn value(&self, z: Complex<T>) -> T {
        self(z)
    }
}

/// Closed-form densities on the physical domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticDensity<T> {
    Constant(T),
    /// `e^{|w|^2}`, log-subharmonic with `Delta log rho = 4`.
    ExpR2,
    /// `|w - center|^{-power}`, log-harmonic away from the pole.
    InversePower { center: Complex<T>, power: T },
}

impl<T: Real> PointDensity<T> for AnalyticDensity<T> {
    fn value(&self, w: Complex<T>) -> T {
        match *self {
            AnalyticDensity::Constant(c) => c,
            AnalyticDensity::ExpR2 => w.norm_sqr().exp(),
            AnalyticDensity::InversePower { center, power } => (w - center).norm().powf(-power),
        }
    }
}

/// `delta(z) = rho(phi(z)) |phi'(z)|^2`, the area density pulled back to the disk.
#[derive(Debug, Clone)]
pub struct PullbackDensity<T> {
    pub map: ConformalMap<T>,
    pub density: AnalyticDensity<T>,
}

impl<T: Real> PullbackDensity<T> {
    pub fn new(map: ConformalMap<T>, density: AnalyticDensity<T>) -> Self {
        Self { map, density }
    }

    /// `|phi'|^2`, the homogeneous case.
    pub fn jacobian(map: ConformalMap<T>) -> Self {
        Self { map, density: AnalyticDensity::Constant(T::one()) }
    }
}

impl<T: Real> PointDensity<T> for PullbackDensity<T> {
    fn value(&self, z: Complex<T>) -> T {
        self.density.value(self.map.eval(z)) * self.map.derivative(z).norm_sqr()
    }
}

/// Density samples at the quadrature nodes, in physical coordinates
/// (`rho(phi(z_j))`), with an optional closed-form tag.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField<T> {
    interior: Vec<T>,
    boundary: Vec<T>,
    analytic: Option<AnalyticDensity<T>>,
}

impl<T: Real> DensityField<T> {
    pub fn from_samples(interior: Vec<T>, boundary: Vec<T>) -> Result<Self> {
        for (index, &value) in interior.iter().chain(&boundary).enumerate() {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::NonPositiveDensity { index, value: value.as_f64() });
            }
        }
        Ok(Self { interior, boundary, analytic: None })
    }

    /// Samples `density` at the images `phi(z_j)` of the quadrature nodes.
    pub fn from_analytic(density: AnalyticDensity<T>, map: &ConformalMap<T>, quad: &DiskQuadrature<T>) -> Result<Self> {
        let interior = quad.interior_nodes().iter().map(|&z| density.value(map.eval(z))).collect();
        let boundary = quad.boundary_nodes().iter().map(|&z| density.value(map.eval(z))).collect();
        let mut field = Self::from_samples(interior, boundary)?;
        field.analytic = Some(density);
        Ok(field)
    }

    pub fn uniform(quad: &DiskQuadrature<T>) -> Self {
        Self {
            interior: vec![T::one(); quad.interior_nodes().len()],
            boundary: vec![T::one(); quad.boundary_nodes().len()],
            analytic: Some(AnalyticDensity::Constant(T::one())),
        }
    }

    pub fn interior(&self) -> &[T] {
        &self.interior
    }

    pub fn boundary(&self) -> &[T] {
        &self.boundary
    }

    pub fn analytic(&self) -> Option<&AnalyticDensity<T>> {
        self.analytic.as_ref()
    }
}

/// `nu = phi^*(rho dz)`: weights `rho(phi(z_j)) |phi'(z_j)|^2 q_j`.
pub fn pullback_area_measure<T: Real>(
    map: &ConformalMap<T>,
    quad: &DiskQuadrature<T>,
    rho: &DensityField<T>,
) -> Result<DiscreteMeasure<T>> {
    if rho.interior().len() != quad.interior_nodes().len() {
        return Err(Error::InvalidInput(format!(
            "density has {} interior samples, quadrature has {} nodes",
            rho.interior().len(),
            quad.interior_nodes().len()
        )));
    }
    let weights = quad
        .interior_nodes()
        .iter()
        .zip(quad.interior_weights())
        .zip(rho.interior())
        .map(|((&z, &q), &r)| r * map.derivative(z).norm_sqr() * q)
        .collect();
    DiscreteMeasure::new(quad.interior_nodes().to_vec(), weights, MeasurePart::Interior)
}

/// `nu = phi^*(rho ds)`: weights `rho(phi(e^{i theta_j})) |phi'(e^{i theta_j})| q_j`.
pub fn pullback_boundary_measure<T: Real>(
    map: &ConformalMap<T>,
    quad: &DiskQuadrature<T>,
    rho: &DensityField<T>,
) -> Result<DiscreteMeasure<T>> {
    if rho.boundary().len() != quad.boundary_nodes().len() {
        return Err(Error::InvalidInput(format!(
            "density has {} boundary samples, quadrature has {} nodes",
            rho.boundary().len(),
            quad.boundary_nodes().len()
        )));
    }
    let weights = quad
        .boundary_nodes()
        .iter()
        .zip(quad.boundary_weights())
        .zip(rho.boundary())
        .map(|((&z, &q), &r)| r * map.derivative(z).norm() * q)
        .collect();
    DiscreteMeasure::new(quad.boundary_nodes().to_vec(), weights, MeasurePart::Boundary)
}

/// Gaussian curvature `K = -(1 / 2 rho) Delta log rho` of `rho |dz|^2`.
#[derive(Debug, Clone)]
pub struct CurvatureField<T> {
    pub points: Vec<Complex<T>>,
    pub curvature: Vec<T>,
    pub laplacian_log: Vec<T>,
    /// Largest estimated error in `curvature`.
    pub error_estimate: T,
}

impl<T: Real> CurvatureField<T> {
    /// `K <= tol` everywhere, i.e. the density is log-subharmonic.
    pub fn is_nonpositive(&self, tol: T) -> bool {
        self.curvature.iter().all(|&k| k <= tol)
    }

    pub fn max_abs(&self) -> T {
        self.curvature.iter().fold(T::zero(), |m, k| m.max(k.abs()))
    }
}

/// Curvature at `points` from Richardson-extrapolated 5-point Laplacians of
/// `log rho` at spacings `h` and `2h`; a third level `4h` estimates the error
/// and triggers [`Error::CurvatureResolution`] above `tolerance`.
pub fn gaussian_curvature<T: Real, D: PointDensity<T> + ?Sized>(
    rho: &D,
    points: &[Complex<T>],
    spacing: T,
    tolerance: T,
) -> Result<CurvatureField<T>> {
    let log_rho = |z: Complex<T>| rho.value(z).ln();
    let stencil = |z: Complex<T>, h: T| {
        let c = log_rho(z);
        let s = log_rho(z + Complex::new(h, T::zero()))
            + log_rho(z - Complex::new(h, T::zero()))
            + log_rho(z + Complex::new(T::zero(), h))
            + log_rho(z - Complex::new(T::zero(), h));
        (s - T::lit(4.0) * c) / (h * h)
    };
    let mut curvature = Vec::with_capacity(points.len());
    let mut laplacian_log = Vec::with_capacity(points.len());
    let mut worst = T::zero();
    for (index, &z) in points.iter().enumerate() {
        let value = rho.value(z);
        if !(value > T::zero()) || !value.is_finite() {
            return Err(Error::NonPositiveDensity { index, value: value.as_f64() });
        }
        let l1 = stencil(z, spacing);
        let l2 = stencil(z, spacing * T::lit(2.0));
        let l4 = stencil(z, spacing * T::lit(4.0));
        let fine = (T::lit(4.0) * l1 - l2) / T::lit(3.0);
        let coarse = (T::lit(4.0) * l2 - l4) / T::lit(3.0);
        let lap = fine;
        let k = -lap / (T::lit(2.0) * value);
        let estimate = ((fine - coarse) / T::lit(15.0)).abs() / (T::lit(2.0) * value);
        if !(estimate <= tolerance) {
            return Err(Error::CurvatureResolution { index, estimate: estimate.as_f64(), tolerance: tolerance.as_f64() });
        }
        worst = worst.max(estimate);
        curvature.push(k);
        laplacian_log.push(lap);
    }
    Ok(CurvatureField { points: points.to_vec(), curvature, laplacian_log, error_estimate: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn quad() -> DiskQuadrature<f64> {
        DiskQuadrature::default()
    }

    fn map(pairs: &[(f64, f64)]) -> ConformalMap<f64> {
        ConformalMap::from_real_pairs(pairs).unwrap()
    }

    #[test]
    fn area_masses() {
        let q = quad();
        let id = ConformalMap::identity();
        let uni = DensityField::uniform(&q);
        assert!((pullback_area_measure(&id, &q, &uni).unwrap().mass() - PI).abs() < 1e-12);
        let dil = ConformalMap::dilation(2.0).unwrap();
        assert!((pullback_area_measure(&dil, &q, &uni).unwrap().mass() - 4.0 * PI).abs() < 1e-10);
        let m = map(&[(0.0, 0.0), (1.0, 0.0), (0.2, 0.0)]);
        let mass = pullback_area_measure(&m, &q, &uni).unwrap().mass();
        assert!((mass - 1.08 * PI).abs() < 1e-12);
    }

    #[test]
    fn boundary_masses() {
        let q = quad();
        let uni = DensityField::uniform(&q);
        let id = ConformalMap::identity();
        assert!((pullback_boundary_measure(&id, &q, &uni).unwrap().mass() - 2.0 * PI).abs() < 1e-12);
        let dil = ConformalMap::dilation(2.0).unwrap();
        assert!((pullback_boundary_measure(&dil, &q, &uni).unwrap().mass() - 4.0 * PI).abs() < 1e-10);
        // Dense trapezoid oracle on |1 + 0.4 e^{i theta}|.
        let n = 100_000;
        let oracle: f64 =
            (0..n).map(|j| (num_complex::Complex::new(1.0, 0.0) + super::super::cis(2.0 * PI * j as f64 / n as f64) * 0.4).norm()).sum::<f64>()
                * 2.0
                * PI
                / n as f64;
        let m = map(&[(0.0, 0.0), (1.0, 0.0), (0.2, 0.0)]);
        let mass = pullback_boundary_measure(&m, &q, &uni).unwrap().mass();
        assert!((mass - oracle).abs() < 1e-12, "{mass} vs {oracle}");
    }

    #[test]
    fn dilation_scaling_of_masses() {
        let q = quad();
        let uni = DensityField::uniform(&q);
        let m = map(&[(0.1, 0.0), (1.0, 0.0), (0.1, 0.2), (0.05, 0.0)]);
        let c = 2.7;
        let mc = m.scaled(c).unwrap();
        let a = pullback_area_measure(&m, &q, &uni).unwrap().mass();
        let ac = pullback_area_measure(&mc, &q, &uni).unwrap().mass();
        assert!((ac - c * c * a).abs() < 1e-10 * ac);
        let b = pullback_boundary_measure(&m, &q, &uni).unwrap().mass();
        let bc = pullback_boundary_measure(&mc, &q, &uni).unwrap().mass();
        assert!((bc - c * b).abs() < 1e-10 * bc);
    }

    #[test]
    fn non_positive_density_rejected() {
        assert!(matches!(
            DensityField::<f64>::from_samples(vec![1.0, 0.0], vec![]),
            Err(Error::NonPositiveDensity { index: 1, .. })
        ));
        let q = DiskQuadrature::<f64>::new(4, 8, 8).unwrap();
        let id = ConformalMap::identity();
        let bad = DensityField::from_analytic(AnalyticDensity::Constant(-1.0), &id, &q);
        assert!(bad.is_err());
    }

    #[test]
    fn curvature_of_flat_and_exponential_densities() {
        let q = DiskQuadrature::<f64>::new(8, 16, 16).unwrap();
        let h = CURVATURE_SPACING;
        let flat = gaussian_curvature(&AnalyticDensity::Constant(1.0), q.interior_nodes(), h, 1e-6).unwrap();
        assert!(flat.max_abs() == 0.0);
        let e = gaussian_curvature(&AnalyticDensity::ExpR2, q.interior_nodes(), h, 1e-6).unwrap();
        for (z, (&k, &lap)) in e.points.iter().zip(e.curvature.iter().zip(&e.laplacian_log)) {
            assert!((lap - 4.0).abs() < 1e-7);
            assert!((k + 2.0 * (-z.norm_sqr()).exp()).abs() < 1e-7);
        }
        assert!(e.is_nonpositive(0.0));
    }

    #[test]
    fn log_harmonic_densities_are_flat() {
        let q = DiskQuadrature::<f64>::new(8, 16, 16).unwrap();
        let pole = AnalyticDensity::InversePower { center: Complex::new(2.0, 0.0), power: 4.0 };
        let k = gaussian_curvature(&pole, q.interior_nodes(), CURVATURE_SPACING, 1e-6).unwrap();
        assert!(k.max_abs() < 1e-6, "{}", k.max_abs());
        let jac = PullbackDensity::jacobian(map(&[(0.0, 0.0), (1.0, 0.0), (0.3, 0.0)]));
        let k = gaussian_curvature(&jac, q.interior_nodes(), CURVATURE_SPACING, 1e-6).unwrap();
        assert!(k.max_abs() < 1e-6);
    }

    #[test]
    fn coarse_stencil_is_diagnosed() {
        let pole = AnalyticDensity::InversePower { center: Complex::new(1.05, 0.0), power: 4.0 };
        let pts = [Complex::new(0.95, 0.0)];
        assert!(matches!(
            gaussian_curvature(&pole, &pts, 1.0 / 64.0, 1e-6),
            Err(Error::CurvatureResolution { .. })
        ));
    }
}
