//! Centre of mass relative to a radial weight and the renormalization
//! `xi` that centres `(d_xi)_* nu`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{dot, DiscreteMeasure};
use crate::moebius::DiskAutomorphism;
use crate::scalar::Real;
use crate::special::BesselProfile;

/// The map `Psi` of the closed disk used to build test functions. Both
/// variants restrict to the identity on the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenormalizationWeight<T> {
    Identity,
    /// `Psi(r e^{i theta}) = f(r) e^{i theta}`.
    BesselRadial(BesselProfile<T>),
}

impl<T: Real> RenormalizationWeight<T> {
    pub fn bessel() -> Self {
        Self::BesselRadial(BesselProfile::new())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "id",
            Self::BesselRadial(_) => "bessel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "id" | "identity" => Some(Self::Identity),
            "bessel" | "bessel_radial" => Some(Self::bessel()),
            _ => None,
        }
    }

    #[inline]
    pub fn apply(&self, z: Complex<T>) -> Complex<T> {
        match self {
            Self::Identity => z,
            Self::BesselRadial(f) => z * f.value_over_radius(z.norm().min(T::one())),
        }
    }

    /// `X_t(z) = <Psi(z), t>`.
    #[inline]
    pub fn test_function(&self, t: Complex<T>, z: Complex<T>) -> T {
        dot(self.apply(z), t)
    }
}

/// `C(nu) = (1/M) int Psi dnu`.
pub fn center_of_mass<T: Real>(nu: &DiscreteMeasure<T>, psi: &RenormalizationWeight<T>) -> Result<Complex<T>> {
    let mass = nu.mass();
    if !(mass > T::zero()) {
        return Err(Error::ZeroMass);
    }
    let mut s = Complex::new(T::zero(), T::zero());
    for (z, w) in nu.iter() {
        s = s + psi.apply(z) * w;
    }
    Ok(s / mass)
}

/// `C((d_xi)_* nu)` without materializing the pushforward.
pub fn renormalized_center<T: Real>(
    nu: &DiscreteMeasure<T>,
    psi: &RenormalizationWeight<T>,
    xi: Complex<T>,
) -> Result<Complex<T>> {
    let d = DiskAutomorphism::translation(xi)?;
    let mass = nu.mass();
    if !(mass > T::zero()) {
        return Err(Error::ZeroMass);
    }
    let mut s = Complex::new(T::zero(), T::zero());
    for (z, w) in nu.iter() {
        s = s + psi.apply(d.apply(z)) * w;
    }
    Ok(s / mass)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Renormalization<T> {
    pub xi: Complex<T>,
    /// `|C((d_xi)_* nu)|`.
    pub residual: T,
    pub iterations: usize,
    /// Whether the grid scan supplied the starting point.
    pub grid_seeded: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct RenormalizeOptions<T> {
    pub tolerance: T,
    pub max_iterations: usize,
    pub fd_step: T,
    pub grid: usize,
}

impl<T: Real> Default for RenormalizeOptions<T> {
    fn default() -> Self {
        Self { tolerance: T::tol(1e-10), max_iterations: 200, fd_step: T::lit(1e-6), grid: 32 }
    }
}

/// Finds `xi` with `C((d_xi)_* nu) = 0`.
///
/// The start is `-C(nu)` with `Psi = id`, which is exact for pushforwards of
/// rotation-invariant measures by the mean value property.
pub fn renormalize<T: Real>(nu: &DiscreteMeasure<T>, psi: &RenormalizationWeight<T>) -> Result<Renormalization<T>> {
    let c = center_of_mass(nu, &RenormalizationWeight::Identity)?;
    let limit = T::one() - T::tol(1e-9);
    let start = if c.norm() < limit { -c } else { -c * (limit / c.norm()) };
    renormalize_with(nu, psi, start, &RenormalizeOptions::default())
}

pub fn renormalize_with<T: Real>(
    nu: &DiscreteMeasure<T>,
    psi: &RenormalizationWeight<T>,
    start: Complex<T>,
    opts: &RenormalizeOptions<T>,
) -> Result<Renormalization<T>> {
    check_not_atomic(nu)?;
    if !(start.norm() < T::one()) {
        return Err(Error::OutOfRange { value: start.norm().as_f64(), min: 0.0, max: 1.0 });
    }
    let first = newton(nu, psi, start, opts)?;
    if first.residual <= opts.tolerance {
        return Ok(first);
    }
    let seed = grid_seed(nu, psi, opts.grid)?;
    let mut second = newton(nu, psi, seed, opts)?;
    second.grid_seeded = true;
    second.iterations += first.iterations;
    if second.residual <= opts.tolerance {
        return Ok(second);
    }
    let best = if second.residual < first.residual { second } else { first };
    Err(Error::RenormalizationFailed { residual: best.residual.as_f64(), iterations: best.iterations })
}

/// A single atom on the circle (or all mass at one boundary point) has no
/// renormalization.
fn check_not_atomic<T: Real>(nu: &DiscreteMeasure<T>) -> Result<()> {
    let mass = nu.mass();
    if !(mass > T::zero()) {
        return Err(Error::ZeroMass);
    }
    let mut heaviest: Option<(Complex<T>, T)> = None;
    for (z, w) in nu.iter() {
        if w > T::zero() && heaviest.is_none_or(|(_, hw)| w > hw) {
            heaviest = Some((z, w));
        }
    }
    let (z0, _) = heaviest.ok_or(Error::ZeroMass)?;
    if (z0.norm() - T::one()).abs() > T::tol(1e-12) {
        return Ok(());
    }
    let at_atom: T = nu.iter().filter(|(z, _)| (*z - z0).norm() <= T::tol(1e-12)).map(|(_, w)| w).sum();
    if at_atom >= mass * (T::one() - T::tol(1e-12)) {
        return Err(Error::DegenerateMeasure(format!(
            "all mass sits at the boundary point ({}, {})",
            z0.re, z0.im
        )));
    }
    Ok(())
}

fn residual_vec<T: Real>(nu: &DiscreteMeasure<T>, psi: &RenormalizationWeight<T>, xi: Complex<T>) -> Result<Complex<T>> {
    renormalized_center(nu, psi, xi)
}

fn newton<T: Real>(
    nu: &DiscreteMeasure<T>,
    psi: &RenormalizationWeight<T>,
    start: Complex<T>,
    opts: &RenormalizeOptions<T>,
) -> Result<Renormalization<T>> {
    let mut xi = start;
    let mut f = residual_vec(nu, psi, xi)?;
    let mut res = f.norm();
    let mut iterations = 0;
    // Keep iterating below tolerance until progress stalls, so independent
    // starts agree to well below the tolerance.
    let floor = opts.tolerance * T::lit(1e-3);
    while iterations < opts.max_iterations && res > floor {
        iterations += 1;
        let h = opts.fd_step;
        let hx = Complex::new(h, T::zero());
        let hy = Complex::new(T::zero(), h);
        let limit = T::one() - h * T::lit(2.0);
        let base = if xi.norm() < limit { xi } else { xi * (limit / xi.norm()) };
        let dx = (residual_vec(nu, psi, base + hx)? - residual_vec(nu, psi, base - hx)?) / (h + h);
        let dy = (residual_vec(nu, psi, base + hy)? - residual_vec(nu, psi, base - hy)?) / (h + h);
        // Solve [dx dy] s = -f as a real 2x2 system.
        let det = dx.re * dy.im - dy.re * dx.im;
        if !(det.abs() > T::zero()) || !det.is_finite() {
            break;
        }
        let sx = -(dy.im * f.re - dy.re * f.im) / det;
        let sy = -(-dx.im * f.re + dx.re * f.im) / det;
        let step = Complex::new(sx, sy);
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let trial = xi + step * lambda;
            if trial.norm() < T::one() {
                let ft = residual_vec(nu, psi, trial)?;
                if ft.norm() < res {
                    xi = trial;
                    f = ft;
                    res = ft.norm();
                    accepted = true;
                    break;
                }
            }
            lambda /= T::lit(2.0);
        }
        if !accepted {
            break;
        }
    }
    Ok(Renormalization { xi, residual: res, iterations, grid_seeded: false })
}

fn grid_seed<T: Real>(nu: &DiscreteMeasure<T>, psi: &RenormalizationWeight<T>, n: usize) -> Result<Complex<T>> {
    let mut best = (Complex::new(T::zero(), T::zero()), T::infinity());
    let n = n.max(2);
    for i in 0..n {
        for j in 0..n {
            let x = T::lit(2.0) * (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(n) - T::one();
            let y = T::lit(2.0) * (T::from_usize_lossy(j) + T::lit(0.5)) / T::from_usize_lossy(n) - T::one();
            let xi = Complex::new(x, y);
            if xi.norm() >= T::lit(0.99) {
                continue;
            }
            let r = residual_vec(nu, psi, xi)?.norm();
            if r < best.1 {
                best = (xi, r);
            }
        }
    }
    Ok(best.0)
}
