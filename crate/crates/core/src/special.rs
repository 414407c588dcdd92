//! Bessel functions of the first kind of orders 0 and 1, the first critical
//! point `zeta` of `J1`, and the radial profile `f(r) = J1(zeta r) / J1(zeta)`
//! whose angular extensions `f(r) cos(theta)`, `f(r) sin(theta)` span the
//! first Neumann eigenspace of the unit disk.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest argument accepted by the Bessel evaluators.
pub const MAX_ARGUMENT: f64 = 20.0;

/// Below this the power series is summed directly; above it Miller's
/// backward recurrence is used (the series loses digits to cancellation).
const SERIES_CUTOFF: f64 = 8.0;

fn check_argument<T: Real>(x: T) -> Result<()> {
    if !(x >= T::zero() && x <= T::lit(MAX_ARGUMENT)) {
        return Err(Error::OutOfRange { value: x.to_f64().unwrap_or(f64::NAN), min: 0.0, max: MAX_ARGUMENT });
    }
    Ok(())
}

/// `sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)`, summed to machine convergence.
pub(crate) fn power_series<T: Real>(x: T, order: u32) -> T {
    let half = x / T::lit(2.0);
    let mut term = T::one();
    for k in 1..=order {
        term = term * half / T::from_u32(k).unwrap();
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term = -term * q / (T::from_u32(k).unwrap() * T::from_u32(k + order).unwrap());
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs().max(T::min_positive_value()) && k > 2 {
            break;
        }
        if k > 200 {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalized by `J0 + 2 sum J_2k = 1`.
fn backward_recurrence<T: Real>(x: T) -> (T, T) {
    let start = 2 * ((x.to_f64().unwrap().ceil() as usize + 40) / 2);
    let rescale = T::lit(1e10);
    let (mut next, mut current) = (T::zero(), T::lit(1e-20));
    let (mut j0, mut j1) = (T::zero(), T::zero());
    let mut norm = T::zero();
    for k in (1..=start).rev() {
        let previous = T::from_usize_lossy(2 * k) / x * current - next;
        next = current;
        current = previous;
        // `current` now holds the unnormalized J_{k-1}.
        if (k - 1) % 2 == 0 && k > 1 {
            norm += T::lit(2.0) * current;
        }
        if k - 1 == 1 {
            j1 = current;
        }
        if current.abs() > rescale {
            let s = T::one() / rescale;
            current *= s;
            next *= s;
            norm *= s;
            j1 *= s;
        }
    }
    j0 += current;
    norm += j0;
    (j0 / norm, j1 / norm)
}

fn j0_unchecked<T: Real>(x: T) -> T {
    if x <= T::lit(SERIES_CUTOFF) {
        power_series(x, 0)
    } else {
        backward_recurrence(x).0
    }
}

fn j1_unchecked<T: Real>(x: T) -> T {
    if x <= T::lit(SERIES_CUTOFF) {
        power_series(x, 1)
    } else {
        backward_recurrence(x).1
    }
}

fn j1_prime_unchecked<T: Real>(x: T) -> T {
    if x == T::zero() {
        return T::lit(0.5);
    }
    j0_unchecked(x) - j1_unchecked(x) / x
}

/// `J0(x)` for `0 <= x <= 20`.
pub fn bessel_j0<T: Real>(x: T) -> Result<T> {
    check_argument(x)?;
    Ok(j0_unchecked(x))
}

/// `J1(x)` for `0 <= x <= 20`.
pub fn bessel_j1<T: Real>(x: T) -> Result<T> {
    check_argument(x)?;
    Ok(j1_unchecked(x))
}

/// `J1'(x) = J0(x) - J1(x)/x`.
pub fn bessel_j1_prime<T: Real>(x: T) -> Result<T> {
    check_argument(x)?;
    Ok(j1_prime_unchecked(x))
}

/// Smallest positive zero of `J1'`, by bisection on `[1.5, 2.5]`.
pub fn find_zeta<T: Real>() -> T {
    let (mut lo, mut hi) = (T::lit(1.5), T::lit(2.5));
    debug_assert!(j1_prime_unchecked(lo) > T::zero() && j1_prime_unchecked(hi) < T::zero());
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = j1_prime_unchecked(mid);
        if d == T::zero() {
            return mid;
        }
        if d > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if j1_prime_unchecked(lo).abs() <= j1_prime_unchecked(hi).abs() {
        lo
    } else {
        hi
    }
}

/// The radial profile `f(r) = J1(zeta r) / J1(zeta)` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselProfile<T> {
    zeta: T,
    j1_at_zeta: T,
}

impl<T: Real> Default for BesselProfile<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> BesselProfile<T> {
    pub fn new() -> Self {
        let zeta = find_zeta::<T>();
        let profile = Self { zeta, j1_at_zeta: j1_unchecked(zeta) };
        profile.self_check().expect("bessel profile self-check");
        profile
    }

    fn self_check(&self) -> Result<()> {
        let residual = j1_prime_unchecked(self.zeta).abs();
        if residual > T::tol(1e-13) || self.zeta < T::lit(1.84) || self.zeta > T::lit(1.85) {
            return Err(Error::InvalidInput(format!(
                "zeta = {} fails the critical point check (|J1'| = {:e})",
                self.zeta,
                residual.as_f64()
            )));
        }
        Ok(())
    }

    pub fn zeta(&self) -> T {
        self.zeta
    }

    pub fn j1_at_zeta(&self) -> T {
        self.j1_at_zeta
    }

    /// First nonzero Neumann eigenvalue of the unit disk, `zeta^2`.
    pub fn mu1_disk(&self) -> T {
        self.zeta * self.zeta
    }

    pub fn value(&self, r: T) -> T {
        j1_unchecked(self.zeta * r) / self.j1_at_zeta
    }

    pub fn derivative(&self, r: T) -> T {
        self.zeta * j1_prime_unchecked(self.zeta * r) / self.j1_at_zeta
    }

    /// `(f(r), f'(r))`, rejecting radii outside `[0, 1]`.
    pub fn neumann_profile(&self, r: T) -> Result<(T, T)> {
        let slack = T::tol(1e-12);
        if !(r >= -slack && r <= T::one() + slack) {
            return Err(Error::OutOfRange { value: r.as_f64(), min: 0.0, max: 1.0 });
        }
        Ok((self.value(r), self.derivative(r)))
    }

    /// `f(r) / r`, continuous at the origin where it equals `f'(0)`.
    pub fn value_over_radius(&self, r: T) -> T {
        if r <= T::lit(1e-8) {
            // J1(x)/x = 1/2 - x^2/16 + ...
            let x = self.zeta * r;
            self.zeta * (T::lit(0.5) - x * x / T::lit(16.0)) / self.j1_at_zeta
        } else {
            self.value(r) / r
        }
    }

    /// `int_D f(|z|)^2 dz = 2 pi int_0^1 f(r)^2 r dr`, by Gauss-Legendre.
    pub fn disk_l2_norm_squared(&self) -> T {
        let (nodes, weights) = crate::geometry::gauss_legendre_unit::<T>(48);
        let s: T = nodes.iter().zip(&weights).map(|(&r, &w)| w * r * self.value(r).powi(2)).sum();
        T::lit(2.0) * T::PI() * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bessel's integral `J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt`; the
    /// trapezoid rule is spectrally accurate for this periodic integrand.
    fn integral_oracle(order: f64, x: f64) -> f64 {
        let n = 4096;
        let h = std::f64::consts::PI / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let t = k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            s += w * (order * t - x * t.sin()).cos();
        }
        s * h / std::f64::consts::PI
    }

    #[test]
    fn j1_matches_integral_representation() {
        for i in 0..=400 {
            let x = 20.0 * i as f64 / 400.0;
            let got = bessel_j1(x).unwrap();
            let want = integral_oracle(1.0, x);
            assert!((got - want).abs() <= 1e-13, "x = {x}: {got} vs {want}");
            let got0 = bessel_j0(x).unwrap();
            assert!((got0 - integral_oracle(0.0, x)).abs() <= 1e-13, "J0 at x = {x}");
        }
    }

    #[test]
    fn j1_matches_series_in_series_range() {
        for i in 0..=100 {
            let x = 8.0 * i as f64 / 100.0;
            assert!((bessel_j1(x).unwrap() - power_series(x, 1)).abs() <= 1e-13);
        }
    }

    #[test]
    fn j1_special_values() {
        assert_eq!(bessel_j1(0.0_f64).unwrap(), 0.0);
        // First positive zero of J1 located by bisection on the integral oracle.
        let (mut lo, mut hi) = (3.0_f64, 4.5_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if integral_oracle(1.0, lo) * integral_oracle(1.0, mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((lo - 3.831_705_970_207_512).abs() < 1e-12);
        assert!(bessel_j1(lo).unwrap().abs() < 1e-10);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(bessel_j1(-0.1_f64), Err(Error::OutOfRange { .. })));
        assert!(matches!(bessel_j1(20.5_f64), Err(Error::OutOfRange { .. })));
        assert!(bessel_j1(f64::NAN).is_err());
    }

    #[test]
    fn zeta_golden_value() {
        let zeta = find_zeta::<f64>();
        // Bisection on the integral oracle's derivative J1' = (J0 - J2) / 2.
        let d = |x: f64| 0.5 * (integral_oracle(0.0, x) - integral_oracle(2.0, x));
        let (mut lo, mut hi) = (1.5_f64, 2.5_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if d(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((zeta - lo).abs() < 1e-12, "{zeta} vs oracle {lo}");
        assert!((zeta - 1.841_183_781_340_659_3).abs() < 1e-14);
        assert!(bessel_j1_prime(zeta).unwrap().abs() <= 1e-13);
        assert!(bessel_j1(zeta).unwrap() > 0.0);
        let mu1 = zeta * zeta;
        assert!((mu1 / 1.0 - 3.39).abs() < 5e-3, "mu1(D) pi ~ 3.39 pi");
    }

    #[test]
    fn zeta_in_single_precision() {
        let zeta = find_zeta::<f32>();
        assert!((zeta - 1.841_183_8).abs() < 1e-5);
        let p = BesselProfile::<f32>::new();
        assert!((p.value(1.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn profile_endpoints_and_monotonicity() {
        let p = BesselProfile::<f64>::new();
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(p.value(1.0), 1.0);
        let mut prev = -1.0;
        for i in 0..=1000 {
            let v = p.value(i as f64 / 1000.0);
            assert!(v > prev);
            prev = v;
        }
        assert!(p.neumann_profile(1.5).is_err());
    }

    #[test]
    fn profile_derivative_matches_finite_differences() {
        let p = BesselProfile::<f64>::new();
        let h = 1e-4;
        for i in 1..100 {
            let r = i as f64 / 100.0;
            let fd = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
            let fd2 = (p.value(r + 2.0 * h) - p.value(r - 2.0 * h)) / (4.0 * h);
            let richardson = (4.0 * fd - fd2) / 3.0;
            assert!((richardson - p.derivative(r)).abs() < 1e-8);
        }
        assert!(p.derivative(1.0).abs() < 1e-12);
    }

    #[test]
    fn cos_mode_is_a_neumann_eigenfunction() {
        // u = f(r) cos(theta): -Lap u = zeta^2 u reduces to the radial residual
        // f'' + f'/r - f/r^2 + zeta^2 f = 0, with f'' by Richardson-extrapolated
        // central differences.
        let p = BesselProfile::<f64>::new();
        let mu = p.mu1_disk();
        let second = |r: f64, h: f64| (p.value(r + h) - 2.0 * p.value(r) + p.value(r - h)) / (h * h);
        for i in 1..1000 {
            let r = 0.02 + 0.96 * i as f64 / 1000.0;
            let h = 2e-3;
            let f2 = (4.0 * second(r, h / 2.0) - second(r, h)) / 3.0;
            let residual = f2 + p.derivative(r) / r - p.value(r) / (r * r) + mu * p.value(r);
            assert!(residual.abs() < 1e-8, "r = {r}: residual {residual:e}");
        }
    }

    #[test]
    fn value_over_radius_is_continuous() {
        let p = BesselProfile::<f64>::new();
        let a = p.value_over_radius(1e-9);
        let b = p.value_over_radius(2e-8);
        assert!((a - p.derivative(0.0)).abs() < 1e-12);
        assert!((a - b).abs() < 1e-12);
    }
}
