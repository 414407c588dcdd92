use super::{DiscreteMeasure, DiskQuadrature, MeasurePart, PointDensity};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `G(r)`: total weight of the nodes with `|z_j| <= r`.
///
/// This is the step function of the discrete measure. For a smooth density
/// prefer [`growth_profile`], which has no quadrature jumps.
pub fn growth_function<T: Real>(nu: &DiscreteMeasure<T>, r: T) -> Result<T> {
    if nu.part() != MeasurePart::Interior {
        return Err(Error::InvalidInput("growth function needs an interior measure".into()));
    }
    if !(r >= T::zero()) {
        return Err(Error::OutOfRange { value: r.as_f64(), min: 0.0, max: 1.0 });
    }
    if r >= T::one() {
        return Ok(nu.mass());
    }
    Ok(nu.iter().filter(|(z, _)| z.norm() <= r).map(|(_, w)| w).sum())
}

/// `G(r) = r^2 \int_D delta(r w) dw`, integrated with the full quadrature on
/// the shrunken disk.
pub fn growth_profile<T: Real, D: PointDensity<T> + ?Sized>(delta: &D, quad: &DiskQuadrature<T>, r: T) -> T {
    if r <= T::zero() {
        return T::zero();
    }
    r * r * quad.integrate_interior(|w| delta.value(w * r))
}

#[derive(Debug, Clone)]
pub struct GrowthReport<T> {
    pub radii: Vec<T>,
    /// Normalized `G(r)`, with `G(1) = pi`.
    pub values: Vec<T>,
    /// `max_r G(r) - pi r^2`.
    pub max_defect: T,
    pub argmax: T,
    /// `G(r) = pi r^2` at every radius, within tolerance.
    pub harmonic_candidate: bool,
}

fn normalization<T: Real, D: PointDensity<T> + ?Sized>(delta: &D, quad: &DiskQuadrature<T>) -> Result<T> {
    let mass = quad.integrate_interior(|z| delta.value(z));
    if !(mass > T::zero()) || !mass.is_finite() {
        return Err(Error::ZeroMass);
    }
    Ok(T::PI() / mass)
}

/// Checks `G(r) <= pi r^2` on `n_radii` equispaced radii after rescaling
/// `delta` so that `G(1) = pi`.
pub fn check_subharmonic_growth<T: Real, D: PointDensity<T> + ?Sized>(
    delta: &D,
    quad: &DiskQuadrature<T>,
    n_radii: usize,
    tolerance: T,
) -> Result<GrowthReport<T>> {
    if n_radii == 0 {
        return Err(Error::InvalidInput("need at least one radius".into()));
    }
    let scale = normalization(delta, quad)?;
    let mut report = GrowthReport {
        radii: Vec::with_capacity(n_radii),
        values: Vec::with_capacity(n_radii),
        max_defect: T::neg_infinity(),
        argmax: T::zero(),
        harmonic_candidate: true,
    };
    for k in 1..=n_radii {
        let r = T::from_usize_lossy(k) / T::from_usize_lossy(n_radii);
        let g = scale * growth_profile(delta, quad, r);
        let defect = g - T::PI() * r * r;
        if defect > report.max_defect {
            report.max_defect = defect;
            report.argmax = r;
        }
        if defect.abs() > tolerance {
            report.harmonic_candidate = false;
        }
        report.radii.push(r);
        report.values.push(g);
    }
    if report.max_defect > tolerance {
        return Err(Error::GrowthViolation { radius: report.argmax.as_f64(), defect: report.max_defect.as_f64() });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport<T> {
    /// `\int h(|z|) dnu`
    pub lhs: T,
    /// `\int h(|z|) dz`
    pub rhs: T,
    pub defect: T,
}

impl<T: Real> ComparisonReport<T> {
    pub fn holds(&self, tolerance: T) -> bool {
        self.lhs >= self.rhs - tolerance
    }
}

/// Compares `\int h(|z|) dnu` against `\int h(|z|) dz` with `nu = delta dz`
/// normalized to mass `pi`. `h` must be strictly increasing with `h(0) = 0`.
pub fn radial_comparison<T: Real, D: PointDensity<T> + ?Sized>(
    h: impl Fn(T) -> T,
    delta: &D,
    quad: &DiskQuadrature<T>,
) -> Result<ComparisonReport<T>> {
    let samples = 512;
    let h0 = h(T::zero());
    if h0.abs() > T::tol(1e-12) {
        return Err(Error::InadmissibleProfile(format!("h(0) = {h0}, expected 0")));
    }
    let mut prev = h0;
    for k in 1..=samples {
        let r = T::from_usize_lossy(k) / T::from_usize_lossy(samples);
        let v = h(r);
        if !(v > prev) {
            return Err(Error::InadmissibleProfile(format!("h is not strictly increasing near r = {r}")));
        }
        prev = v;
    }
    let scale = normalization(delta, quad)?;
    let (mut lhs, mut rhs) = (T::zero(), T::zero());
    for (&z, &q) in quad.interior_nodes().iter().zip(quad.interior_weights()) {
        let hz = h(z.norm());
        lhs += q * hz * scale * delta.value(z);
        rhs += q * hz;
    }
    Ok(ComparisonReport { lhs, rhs, defect: lhs - rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use crate::geometry::{
        pullback_area_measure, AnalyticDensity, ConformalMap, DensityField, PullbackDensity,
    };
    use crate::special::BesselProfile;
    use std::f64::consts::PI;

    fn radial_square<T: Real>(z: Complex<T>) -> T {
        z.norm_sqr()
    }

    fn quad() -> DiskQuadrature<f64> {
        DiskQuadrature::default()
    }

    fn map03() -> ConformalMap<f64> {
        ConformalMap::from_real_pairs(&[(0.0, 0.0), (1.0, 0.0), (0.3, 0.0)]).unwrap()
    }

    #[test]
    fn lebesgue_growth() {
        let q = quad();
        let nu = DiscreteMeasure::lebesgue(&q);
        assert!((growth_function(&nu, 1.0).unwrap() - PI).abs() < 1e-12);
        // Step function, so only within the radial spacing.
        assert!((growth_function(&nu, 0.5).unwrap() - PI / 4.0).abs() < 0.05);
        let flat = AnalyticDensity::Constant(1.0);
        assert!((growth_profile(&flat, &q, 0.5) - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn growth_is_monotone_and_bounded() {
        let q = quad();
        let m = map03();
        let nu = pullback_area_measure(&m, &q, &DensityField::uniform(&q)).unwrap();
        let mut prev = 0.0;
        for k in 0..=100 {
            let g = growth_function(&nu, k as f64 / 100.0).unwrap();
            assert!(g >= prev);
            prev = g;
        }
        assert_eq!(prev, nu.mass());
        let g = growth_function(&nu, 0.5).unwrap();
        assert!(g <= PI * 0.25 * nu.mass() / PI);
    }

    #[test]
    fn constant_density_is_harmonic_candidate() {
        let r = check_subharmonic_growth(&AnalyticDensity::Constant(1.0), &quad(), 200, 1e-8).unwrap();
        assert!(r.max_defect.abs() < 1e-12);
        assert!(r.harmonic_candidate);
    }

    #[test]
    fn jacobian_density_grows_subharmonically() {
        let q = quad();
        let d = PullbackDensity::jacobian(map03());
        let r = check_subharmonic_growth(&d, &q, 200, 1e-8).unwrap();
        assert!(r.max_defect <= 1e-8);
        assert!(!r.harmonic_candidate);
        // Closed form: delta = |1 + 0.6 z|^2, G(r) = pi r^2 (1 + 0.18 r^2) / 1.18.
        for (&rad, &g) in r.radii.iter().zip(&r.values) {
            let exact = PI * rad * rad * (1.0 + 0.18 * rad * rad) / 1.18;
            assert!((g - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_square_is_strict() {
        let q = quad();
        let r = check_subharmonic_growth(&radial_square::<f64>, &q, 200, 1e-8).unwrap();
        for (&rad, &g) in r.radii.iter().zip(&r.values) {
            assert!((g - PI * rad.powi(4)).abs() < 1e-12);
        }
        assert!(r.max_defect.abs() < 1e-12); // attained at r = 1
        let interior_max = r.radii.iter().zip(&r.values).filter(|(&x, _)| x < 1.0).map(|(&x, &g)| g - PI * x * x).fold(f64::MIN, f64::max);
        assert!(interior_max < 0.0);
    }

    #[test]
    fn growth_violation_is_reported() {
        let q = quad();
        let peaked = |z: Complex<f64>| 2.0 - z.norm_sqr();
        assert!(matches!(check_subharmonic_growth(&peaked, &q, 50, 1e-8), Err(Error::GrowthViolation { .. })));
    }

    #[test]
    fn comparisons() {
        let q = quad();
        let flat = radial_comparison(|r: f64| r.powi(3) + r, &AnalyticDensity::Constant(3.0), &q).unwrap();
        assert!(flat.defect.abs() < 1e-12);

        let bessel = BesselProfile::<f64>::new();
        let h = |r: f64| bessel.value(r).powi(2);
        let c = radial_comparison(h, &PullbackDensity::jacobian(map03()), &q).unwrap();
        assert!(c.holds(0.0) && c.defect > 0.0);

        let c = radial_comparison(|r: f64| r, &radial_square::<f64>, &q).unwrap();
        assert!((c.lhs - 4.0 * PI / 5.0).abs() < 1e-12);
        assert!((c.rhs - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!(c.defect > 0.0);
    }

    #[test]
    fn inadmissible_profiles() {
        let q = DiskQuadrature::<f64>::new(8, 16, 16).unwrap();
        let flat = AnalyticDensity::Constant(1.0);
        assert!(radial_comparison(|r: f64| 1.0 + r, &flat, &q).is_err());
        assert!(radial_comparison(|r: f64| (r - 0.5).powi(2) - 0.25, &flat, &q).is_err());
    }
}
