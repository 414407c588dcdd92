use num_complex::Complex;

use super::fold::{rearranged, FoldingMap, RearrangedMeasure};
use crate::error::{Error, Result};
use crate::geometry::{cis, gauss_legendre_unit, DiscreteMeasure};
use crate::hersch::RenormalizationWeight;
use crate::inertia::inertia_form;
use crate::moebius::HyperbolicCap;
use crate::scalar::Real;

const PANELS: usize = 64;
const PANEL_NODES: usize = 20;

/// `int_D |grad X_t|^2 dz`, independent of `t`.
pub fn test_function_energy<T: Real>(psi: &RenormalizationWeight<T>) -> T {
    match psi {
        RenormalizationWeight::Identity => T::PI(),
        RenormalizationWeight::BesselRadial(f) => f.mu1_disk() * f.disk_l2_norm_squared() / T::lit(2.0),
    }
}

/// `int_a |grad (X_t o G)|^2` for `Psi = id`, as the boundary integral
/// `oint u du/dn` over the two arcs of the cap.
pub fn cap_energy<T: Real>(map: &FoldingMap<T>, t: Complex<T>) -> T {
    let cap = *map.cap();
    let (gx, gw) = gauss_legendre_unit::<T>(PANEL_NODES);
    let tc = t.conj();
    // u = Re(conj(t) G), du/dn = Re(conj(t) G' n).
    let flux = |z: Complex<T>, n: Complex<T>| {
        let u = (tc * map.apply(z)).re;
        u * (tc * map.derivative(z) * n).re
    };
    let panels = T::from_usize_lossy(PANELS);
    let composite = |f: &dyn Fn(T) -> T| {
        let mut s = T::zero();
        for k in 0..PANELS {
            let a = T::from_usize_lossy(k) / panels;
            for (&x, &w) in gx.iter().zip(&gw) {
                s += w * f(a + x / panels);
            }
        }
        s / panels
    };
    let half = cap.l() / T::lit(2.0);
    let arc = composite(&|s: T| {
        let theta = -half + cap.l() * s;
        let z = cap.p() * cis(theta);
        flux(z, z) * cap.l()
    });
    let (vm, vp) = cap.vertices();
    let geodesic = match cap.geodesic_circle() {
        None => composite(&|s: T| flux(vm + (vp - vm) * s, -cap.p()) * (vp - vm).norm()),
        Some((c, r)) => {
            let a0 = (vm - c).arg();
            let mut a1 = (vp - c).arg();
            let two_pi = T::lit(2.0) * T::PI();
            while a1 - a0 > T::PI() {
                a1 -= two_pi;
            }
            while a1 - a0 < -T::PI() {
                a1 += two_pi;
            }
            let sign = if cap.l() < T::PI() { T::one() } else { -T::one() };
            composite(&|s: T| {
                let e = cis(a0 + (a1 - a0) * s);
                flux(c + e * r, e * sign) * r * (a1 - a0).abs()
            })
        }
    };
    arc + geodesic
}

/// Energy of the lifted test function, `2 int_a |grad (X_t o G)|^2`.
pub fn lifted_energy<T: Real>(map: &FoldingMap<T>, t: Complex<T>) -> T {
    T::lit(2.0) * cap_energy(map, t)
}

/// Harmonic function on the disk given by a trigonometric series.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicExtension<T> {
    /// Mean value `a_0 / 2`.
    pub mean: T,
    /// `a_n` and `b_n` for `n = 1..`.
    pub cos: Vec<T>,
    pub sin: Vec<T>,
}

impl<T: Real> HarmonicExtension<T> {
    /// `pi sum n (a_n^2 + b_n^2)`.
    pub fn energy(&self) -> T {
        let mut e = T::zero();
        for (n, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            e += T::from_usize_lossy(n + 1) * (*a * *a + *b * *b);
        }
        T::PI() * e
    }

    pub fn eval(&self, z: Complex<T>) -> T {
        let mut s = self.mean;
        let mut zn = z;
        for (a, b) in self.cos.iter().zip(&self.sin) {
            s += *a * zn.re + *b * zn.im;
            zn = zn * z;
        }
        s
    }
}

/// Fourier coefficients of samples at `theta_j = 2 pi j / n`.
pub fn harmonic_extension<T: Real>(values: &[T]) -> HarmonicExtension<T> {
    let n = values.len();
    let nn = T::from_usize_lossy(n);
    let top = if n == 0 { 0 } else { (n - 1) / 2 };
    let mean = if n == 0 { T::zero() } else { values.iter().copied().sum::<T>() / nn };
    let step = T::lit(2.0) * T::PI() / nn;
    let mut cos = Vec::with_capacity(top);
    let mut sin = Vec::with_capacity(top);
    for k in 1..=top {
        let (mut a, mut b) = (T::zero(), T::zero());
        for (j, &v) in values.iter().enumerate() {
            // Reduce k j mod n before scaling to keep the angle small.
            let angle = step * T::from_usize_lossy((k * j) % n);
            a += v * angle.cos();
            b += v * angle.sin();
        }
        cos.push(a * T::lit(2.0) / nn);
        sin.push(b * T::lit(2.0) / nn);
    }
    HarmonicExtension { mean, cos, sin }
}

/// Samples of `u~_a^t` on `n` equispaced boundary points.
pub fn folded_boundary_values<T: Real>(
    rm: &RearrangedMeasure<T>,
    psi: &RenormalizationWeight<T>,
    t: Complex<T>,
    n: usize,
) -> Vec<T> {
    let step = T::lit(2.0) * T::PI() / T::from_usize_lossy(n);
    (0..n).map(|j| rm.lifted_test_function(psi, t, cis(step * T::from_usize_lossy(j)))).collect()
}

/// The bound `2 sup_t int|grad X_t|^2 / int X_t^2 dzeta_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighBound<T> {
    pub bound: T,
    pub numerator: T,
    /// `min_t int X_t^2 dzeta_a`, the smaller inertia eigenvalue.
    pub denominator: T,
    /// Direction attaining the supremum.
    pub direction: Complex<T>,
}

pub fn rayleigh_bound<T: Real>(rm: &RearrangedMeasure<T>, psi: &RenormalizationWeight<T>) -> Result<RayleighBound<T>> {
    rayleigh_bound_of(&rm.zeta, psi)
}

pub(crate) fn rayleigh_bound_of<T: Real>(
    zeta: &DiscreteMeasure<T>,
    psi: &RenormalizationWeight<T>,
) -> Result<RayleighBound<T>> {
    let q = inertia_form(zeta, psi)?;
    let (_, lo) = q.eigenvalues();
    if !(lo > T::epsilon() * q.trace()) {
        return Err(Error::DegenerateMeasure(format!("inertia form has a null direction ({:e})", lo.as_f64())));
    }
    let numerator = test_function_energy(psi);
    Ok(RayleighBound {
        bound: T::lit(2.0) * numerator / lo,
        numerator,
        denominator: lo,
        direction: q.minor_direction(),
    })
}

/// Folds, rearranges and evaluates the bound in one go.
pub fn folded_rayleigh_bound<T: Real>(
    nu: &DiscreteMeasure<T>,
    cap: &HyperbolicCap<T>,
    psi: RenormalizationWeight<T>,
) -> Result<RayleighBound<T>> {
    let rm = rearranged(nu, cap, psi)?;
    rayleigh_bound(&rm, &psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folding::Rearranger;
    use crate::geometry::{pullback_boundary_measure, ConformalMap, DensityField, DiskQuadrature};
    use std::f64::consts::PI;

    type C = Complex<f64>;

    #[test]
    fn fourier_energies() {
        let n = 256;
        let h = 2.0 * PI / n as f64;
        let c1: Vec<f64> = (0..n).map(|j| (h * j as f64).cos()).collect();
        let w = harmonic_extension(&c1);
        assert!((w.energy() - PI).abs() < 1e-12);
        let z = C::new(0.3, 0.4);
        assert!((w.eval(z) - 0.3).abs() < 1e-12);
        let c2: Vec<f64> = (0..n).map(|j| (2.0 * h * j as f64).cos() + 5.0).collect();
        let w = harmonic_extension(&c2);
        assert!((w.energy() - 2.0 * PI).abs() < 1e-12);
        assert!((w.mean - 5.0).abs() < 1e-12);
    }

    #[test]
    fn energy_doubling_on_caps() {
        let q = DiskQuadrature::new(8, 16, 512).unwrap();
        let m = ConformalMap::from_real_pairs(&[(0.0, 0.0), (1.0, 0.0), (0.2, 0.0), (0.0, 0.05)]).unwrap();
        let nu = pullback_boundary_measure(&m, &q, &DensityField::uniform(&q)).unwrap();
        let r = Rearranger::new(&nu, RenormalizationWeight::Identity).unwrap();
        for &(l, th) in &[(1.0, 0.0), (2.0, 1.0), (PI, -0.5), (4.0, 2.0), (5.5, 3.0)] {
            let rm = r.rearrange(&HyperbolicCap::from_angle(l, th).unwrap()).unwrap();
            for t in [C::new(1.0, 0.0), cis(0.7)] {
                let e = lifted_energy(&rm.map, t);
                assert!((e - 2.0 * PI).abs() < 1e-8, "l={l} th={th}: {e}");
            }
        }
    }

    #[test]
    fn harmonic_extension_lowers_energy() {
        let nu = DiscreteMeasure::<f64>::uniform_boundary(1024);
        let psi = RenormalizationWeight::Identity;
        let rm = rearranged(&nu, &HyperbolicCap::half_disk(), psi).unwrap();
        for t in [C::new(1.0, 0.0), C::new(0.0, 1.0)] {
            let values = folded_boundary_values(&rm, &psi, t, 2048);
            let w = harmonic_extension(&values);
            assert!(w.energy() < 2.0 * PI - 1e-3, "{}", w.energy());
        }
    }

    #[test]
    fn rayleigh_bounds() {
        let nu = DiscreteMeasure::<f64>::uniform_boundary(2048);
        let psi = RenormalizationWeight::Identity;
        let rm = rearranged(&nu, &HyperbolicCap::from_angle(2.0, 0.5).unwrap(), psi).unwrap();
        let b = rayleigh_bound(&rm, &psi).unwrap();
        // Oracle: the smaller eigenvalue from sums of cos^2, sin^2, cos sin.
        let (mut a, mut c, mut s) = (0.0, 0.0, 0.0);
        for (z, w) in rm.zeta.iter() {
            a += w * z.re * z.re;
            c += w * z.im * z.im;
            s += w * z.re * z.im;
        }
        let lo = 0.5 * (a + c) - (0.25 * (a - c).powi(2) + s * s).sqrt();
        assert!((b.bound - 2.0 * PI / lo).abs() < 1e-9);
        assert!(b.bound >= 4.0 * PI / nu.mass() - 1e-12);
        let bessel = RenormalizationWeight::<f64>::bessel();
        let f = match bessel {
            RenormalizationWeight::BesselRadial(f) => f,
            _ => unreachable!(),
        };
        assert!((test_function_energy(&bessel) - f.mu1_disk() * f.disk_l2_norm_squared() / 2.0).abs() < 1e-14);
    }
}
