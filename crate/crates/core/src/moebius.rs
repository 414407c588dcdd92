//! Disk automorphisms, hyperbolic caps and their reflections.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{cis, DiscreteMeasure};
use crate::scalar::Real;

/// `z -> omega (z + xi) / (conj(xi) z + 1)` with `|xi| < 1`, `|omega| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskAutomorphism<T> {
    omega: Complex<T>,
    xi: Complex<T>,
}

impl<T: Real> DiskAutomorphism<T> {
    pub fn new(omega: Complex<T>, xi: Complex<T>) -> Result<Self> {
        if !(xi.norm() < T::one()) {
            return Err(Error::OutOfRange { value: xi.norm().as_f64(), min: 0.0, max: 1.0 });
        }
        let n = omega.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidInput("automorphism prefactor must be nonzero".into()));
        }
        Ok(Self { omega: omega / n, xi })
    }

    /// `d_xi`.
    pub fn translation(xi: Complex<T>) -> Result<Self> {
        Self::new(Complex::new(T::one(), T::zero()), xi)
    }

    pub fn rotation(theta: T) -> Self {
        Self { omega: cis(theta), xi: Complex::new(T::zero(), T::zero()) }
    }

    pub fn identity() -> Self {
        Self::rotation(T::zero())
    }

    pub fn omega(&self) -> Complex<T> {
        self.omega
    }

    pub fn xi(&self) -> Complex<T> {
        self.xi
    }

    #[inline]
    pub fn apply(&self, z: Complex<T>) -> Complex<T> {
        self.omega * (z + self.xi) / (self.xi.conj() * z + T::one())
    }

    /// `m'(z) = omega (1 - |xi|^2) / (conj(xi) z + 1)^2`.
    pub fn derivative(&self, z: Complex<T>) -> Complex<T> {
        let d = self.xi.conj() * z + T::one();
        self.omega * (T::one() - self.xi.norm_sqr()) / (d * d)
    }

    pub fn inverse(&self) -> Self {
        Self { omega: self.omega.conj(), xi: -self.omega * self.xi }
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Self {
        // Matrices [[omega, omega xi], [conj xi, 1]].
        let one = Complex::new(T::one(), T::zero());
        let (a1, b1, c1, d1) = (other.omega, other.omega * other.xi, other.xi.conj(), one);
        let (a2, b2, c2, d2) = (self.omega, self.omega * self.xi, self.xi.conj(), one);
        let a = a2 * a1 + b2 * c1;
        let b = a2 * b1 + b2 * d1;
        let d = c2 * b1 + d2 * d1;
        let omega = a / d;
        Self { omega: omega / omega.norm(), xi: b / a }
    }

    /// Pushforward: nodes mapped, weights untouched. The part tag is kept
    /// since automorphisms preserve the circle.
    pub fn pushforward(&self, nu: &DiscreteMeasure<T>) -> DiscreteMeasure<T> {
        nu.map_nodes(|z| self.apply(z))
    }
}

/// `|z - w| / |1 - conj(w) z|`.
pub fn pseudo_hyperbolic_distance<T: Real>(z: Complex<T>, w: Complex<T>) -> T {
    (z - w).norm() / (Complex::new(T::one(), T::zero()) - w.conj() * z).norm()
}

/// The cap `a_{l,p}`: the part of the disk cut off by the geodesic joining
/// `p e^{-il/2}` and `p e^{il/2}`, on the side of the arc centred at `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicCap<T> {
    l: T,
    p: Complex<T>,
}

impl<T: Real> HyperbolicCap<T> {
    pub fn new(l: T, p: Complex<T>) -> Result<Self> {
        let two_pi = T::lit(2.0) * T::PI();
        if !(l > T::zero() && l < two_pi) {
            return Err(Error::OutOfRange { value: l.as_f64(), min: 0.0, max: two_pi.as_f64() });
        }
        let n = p.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidInput("cap centre must be a nonzero direction".into()));
        }
        Ok(Self { l, p: p / n })
    }

    pub fn from_angle(l: T, p_angle: T) -> Result<Self> {
        Self::new(l, cis(p_angle))
    }

    /// The half-disk with `p = 1`.
    pub fn half_disk() -> Self {
        Self { l: T::PI(), p: Complex::new(T::one(), T::zero()) }
    }

    pub fn l(&self) -> T {
        self.l
    }

    pub fn p(&self) -> Complex<T> {
        self.p
    }

    pub fn p_angle(&self) -> T {
        self.p.arg()
    }

    /// `cos(l/2)`, positive for caps smaller than a half-disk.
    pub fn kappa(&self) -> T {
        (self.l / T::lit(2.0)).cos()
    }

    /// `(v_-, v_+) = (p e^{-il/2}, p e^{il/2})`.
    pub fn vertices(&self) -> (Complex<T>, Complex<T>) {
        let h = self.l / T::lit(2.0);
        (self.p * cis(-h), self.p * cis(h))
    }

    /// Centre and radius of the bounding geodesic circle, `None` for a diameter.
    pub fn geodesic_circle(&self) -> Option<(Complex<T>, T)> {
        let k = self.kappa();
        if k.abs() <= T::epsilon() {
            return None;
        }
        let h = self.l / T::lit(2.0);
        Some((self.p / k, (h.sin() / k).abs()))
    }

    /// `2 Re(z conj p) - kappa (1 + |z|^2)`: positive inside the cap, zero on
    /// the geodesic. Valid for every `l`, including the diameter.
    pub fn side(&self, z: Complex<T>) -> T {
        T::lit(2.0) * (z * self.p.conj()).re - self.kappa() * (T::one() + z.norm_sqr())
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        self.side(z) > T::zero()
    }

    /// The adjacent cap `a* = tau_a(a)`.
    pub fn adjacent(&self) -> Self {
        Self { l: T::lit(2.0) * T::PI() - self.l, p: -self.p }
    }

    pub fn reflection(&self) -> CapReflection<T> {
        CapReflection { p: self.p, kappa: self.kappa() }
    }

    /// Point of the geodesic at parameter `s` in `[0, 1]` from `v_-` to `v_+`.
    pub fn geodesic_point(&self, s: T) -> Complex<T> {
        let (vm, vp) = self.vertices();
        match self.geodesic_circle() {
            None => vm + (vp - vm) * s,
            Some((c, _)) => {
                let a0 = (vm - c).arg();
                let mut a1 = (vp - c).arg();
                // Go the short way round, which is the arc inside the disk.
                let two_pi = T::lit(2.0) * T::PI();
                while a1 - a0 > T::PI() {
                    a1 -= two_pi;
                }
                while a1 - a0 < -T::PI() {
                    a1 += two_pi;
                }
                let r = (vm - c).norm();
                c + cis(a0 + (a1 - a0) * s) * r
            }
        }
    }
}

/// Anticonformal reflection in the geodesic bounding a cap,
/// `z -> (p conj z - kappa) / (kappa conj z - conj p)`.
///
/// For `kappa != 0` this is the inversion `c + R^2 / conj(z - c)`; for
/// `kappa = 0` it is the reflection `-p^2 conj z` in a diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapReflection<T> {
    p: Complex<T>,
    kappa: T,
}

impl<T: Real> CapReflection<T> {
    #[inline]
    pub fn apply(&self, z: Complex<T>) -> Complex<T> {
        let zc = z.conj();
        let k = Complex::new(self.kappa, T::zero());
        (self.p * zc - k) / (k * zc - self.p.conj())
    }

    /// `|tau'(z)| = (1 - kappa^2) / |kappa conj z - conj p|^2`.
    pub fn derivative_abs(&self, z: Complex<T>) -> T {
        (T::one() - self.kappa * self.kappa) / (z.conj() * self.kappa - self.p.conj()).norm_sqr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn random_disk_point(rng: &mut ChaCha8Rng, rmax: f64) -> C {
        let r = rmax * rng.random::<f64>().sqrt();
        cis(2.0 * PI * rng.random::<f64>()) * r
    }

    #[test]
    fn basic_identities() {
        let id = DiskAutomorphism::<f64>::translation(C::new(0.0, 0.0)).unwrap();
        let z = C::new(0.3, -0.4);
        assert!((id.apply(z) - z).norm() < 1e-15);
        let xi = C::new(0.2, 0.5);
        let d = DiskAutomorphism::translation(xi).unwrap();
        assert!((d.apply(C::new(0.0, 0.0)) - xi).norm() < 1e-15);
        assert!(DiskAutomorphism::translation(C::new(1.0, 0.0)).is_err());
        assert!(DiskAutomorphism::translation(C::new(0.8, 0.7)).is_err());
    }

    #[test]
    fn circle_preserved_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = DiskAutomorphism::new(cis(rng.random::<f64>() * 6.0), random_disk_point(&mut rng, 0.95)).unwrap();
            let inv = m.inverse();
            for _ in 0..20 {
                let t = rng.random::<f64>() * 2.0 * PI;
                assert!((m.apply(cis(t)).norm() - 1.0).abs() < 1e-12);
                let z = random_disk_point(&mut rng, 1.0);
                assert!((inv.apply(m.apply(z)) - z).norm() < 1e-12);
                assert!((inv.compose(&m).apply(z) - z).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn composition_identity_with_unimodular_factor() {
        let eta = C::new(0.5, 0.0);
        let xi = C::new(0.0, 0.3);
        let d_eta = DiskAutomorphism::translation(eta).unwrap();
        let d_mxi = DiskAutomorphism::translation(-xi).unwrap();
        let alpha = d_mxi.apply(eta);
        let factor = (C::new(1.0, 0.0) - eta * xi.conj()) / (C::new(1.0, 0.0) - eta.conj() * xi);
        let d_alpha = DiskAutomorphism::translation(alpha).unwrap();
        let comp = d_eta.compose(&d_mxi);
        assert!((comp.xi() - alpha).norm() < 1e-14);
        assert!((comp.omega() - factor).norm() < 1e-14);
        for k in 0..16 {
            let z = cis(k as f64) * 0.7;
            let direct = d_eta.apply(d_mxi.apply(z));
            assert!((direct - factor * d_alpha.apply(z)).norm() < 1e-14);
            assert!((direct - comp.apply(z)).norm() < 1e-14);
        }
    }

    #[test]
    fn pushforward_concentrates() {
        let nu = DiscreteMeasure::<f64>::uniform_boundary(4096);
        let id = DiskAutomorphism::identity();
        assert_eq!(id.pushforward(&nu), nu);
        let p = cis(0.7);
        let m = DiskAutomorphism::translation(p * 0.99).unwrap();
        let pushed = m.pushforward(&nu);
        assert_eq!(pushed.mass(), nu.mass());
        assert_eq!(pushed.part(), nu.part());
        let near: f64 = pushed.iter().filter(|(z, _)| (z - p).norm() < 0.2).map(|(_, w)| w).sum();
        assert!(near >= 0.95 * nu.mass());
    }

    proptest! {
        #[test]
        fn pseudo_hyperbolic_distance_is_invariant(
            a in 0.0..0.95f64, ta in 0.0..6.3f64,
            b in 0.0..0.99f64, tb in 0.0..6.3f64,
            c in 0.0..0.99f64, tc in 0.0..6.3f64,
            w in 0.0..6.3f64,
        ) {
            let m = DiskAutomorphism::new(cis(w), cis(ta) * a).unwrap();
            let z = cis(tb) * b;
            let u = cis(tc) * c;
            let before = pseudo_hyperbolic_distance(z, u);
            let after = pseudo_hyperbolic_distance(m.apply(z), m.apply(u));
            prop_assert!((before - after).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_circle_geometry() {
        for &l in &[0.1, 1.0, PI / 2.0, 2.5, 3.0, 3.5, 5.0, 6.2] {
            for &t in &[0.0, 1.3, -2.0] {
                let cap = HyperbolicCap::from_angle(l, t).unwrap();
                let (c, r) = cap.geodesic_circle().unwrap();
                assert!((c.norm_sqr() - 1.0 - r * r).abs() < 1e-12 * c.norm_sqr().max(1.0));
                let (vm, vp) = cap.vertices();
                for v in [vm, vp] {
                    assert!((v.norm() - 1.0).abs() < 1e-14);
                    assert!(((v - c).norm() - r).abs() < 1e-12 * r.max(1.0));
                    assert!(cap.side(v).abs() < 1e-12);
                }
                // The arc centre is in the cap's closure side, the antipode is not
                // (unless the cap is nearly everything).
                assert!(cap.contains(cap.p() * 0.999));
                assert!(!cap.contains(-cap.p() * 0.999));
            }
        }
        assert!(HyperbolicCap::from_angle(0.0, 0.0).is_err());
        assert!(HyperbolicCap::from_angle(2.0 * PI, 0.0).is_err());
        assert!(HyperbolicCap::<f64>::half_disk().geodesic_circle().is_none());
    }

    #[test]
    fn cap_continuity() {
        let h = 1e-7;
        for &(l, t) in &[(1.0, 0.3), (3.0, 2.0), (4.5, -1.0)] {
            let a = HyperbolicCap::from_angle(l, t).unwrap();
            let b = HyperbolicCap::from_angle(l + h, t + h).unwrap();
            let (av, bv) = (a.vertices(), b.vertices());
            assert!((av.0 - bv.0).norm() < 10.0 * h && (av.1 - bv.1).norm() < 10.0 * h);
            let (ac, ar): (C, f64) = a.geodesic_circle().unwrap();
            let (bc, br) = b.geodesic_circle().unwrap();
            assert!((ac - bc).norm() < 1e4 * h && (ar - br).abs() < 1e4 * h);
        }
    }

    #[test]
    fn reflection_half_disk() {
        let tau = HyperbolicCap::<f64>::half_disk().reflection();
        assert!((tau.apply(C::new(0.5, 0.0)) - C::new(-0.5, 0.0)).norm() < 1e-15);
        let z = C::new(0.3, 0.4);
        assert!((tau.apply(z) - C::new(-0.3, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn reflection_matches_inversion_formula() {
        let cap = HyperbolicCap::from_angle(PI / 2.0, 0.0).unwrap();
        let (c, r) = cap.geodesic_circle().unwrap();
        let tau = cap.reflection();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let z = random_disk_point(&mut rng, 1.0);
            let inv = c + r * r / (z - c).conj();
            assert!((tau.apply(z) - inv).norm() < 1e-12);
        }
        let zero = tau.apply(C::new(0.0, 0.0));
        let expected = c * (1.0 - r * r / c.norm_sqr());
        assert!((zero - expected).norm() < 1e-14);
    }

    #[test]
    fn reflection_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &l in &[0.3, 1.5, PI, 4.0, 6.0] {
            let cap = HyperbolicCap::from_angle(l, 0.8).unwrap();
            let tau = cap.reflection();
            let star = cap.adjacent();
            for k in 0..=50 {
                let g = cap.geodesic_point(k as f64 / 50.0);
                assert!(cap.side(g).abs() < 1e-12);
                assert!((tau.apply(g) - g).norm() < 1e-12);
            }
            for _ in 0..500 {
                let z = random_disk_point(&mut rng, 0.999);
                let w = tau.apply(z);
                assert!((tau.apply(w) - z).norm() < 1e-12);
                assert!(w.norm() <= 1.0 + 1e-12);
                if cap.side(z).abs() > 1e-9 {
                    assert_eq!(cap.contains(z), star.contains(w));
                    assert_eq!(cap.contains(z), !cap.contains(w));
                }
            }
            // Finite-difference check of the modulus of the derivative.
            let z = C::new(0.1, -0.2);
            let h = 1e-6;
            let fd = (tau.apply(z + h) - tau.apply(z - h)).norm() / (2.0 * h);
            assert!((fd - tau.derivative_abs(z)).abs() < 1e-7);
        }
    }
}
