use num_complex::Complex;

use crate::moebius::HyperbolicCap;
use crate::scalar::Real;

/// Uniformization `psi_a: D -> a` of a hyperbolic cap and its inverse.
///
/// The inverse is the chain
/// 1. `m(z) = (z - v_-) / (z - v_+)`, sending the cap to a quarter sector;
/// 2. rotation by `e^{-i beta}` onto `0 < arg < pi/2`;
/// 3. squaring onto the upper half-plane;
/// 4. the Cayley map `(w - i) / (w + i)` back to the disk.
///
/// The forward map undoes each stage, taking the principal square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapConformalMap<T> {
    cap: HyperbolicCap<T>,
    vm: Complex<T>,
    vp: Complex<T>,
    /// `e^{-i beta}`.
    rot: Complex<T>,
}

impl<T: Real> CapConformalMap<T> {
    pub fn new(cap: HyperbolicCap<T>) -> Self {
        let (vm, vp) = cap.vertices();
        let p = cap.p();
        // Geodesic midpoint on the ray through p.
        let g = p * ((T::PI() - cap.l()) / T::lit(4.0)).tan();
        let m = |z: Complex<T>| (z - vm) / (z - vp);
        let arc = m(p).arg();
        let geo = m(g).arg();
        let mut delta = geo - arc;
        let two_pi = T::lit(2.0) * T::PI();
        while delta > T::PI() {
            delta -= two_pi;
        }
        while delta <= -T::PI() {
            delta += two_pi;
        }
        let beta = if delta > T::zero() { arc } else { geo };
        let rot = Complex::new(beta.cos(), -beta.sin());
        Self { cap, vm, vp, rot }
    }

    pub fn cap(&self) -> &HyperbolicCap<T> {
        &self.cap
    }

    /// The sector coordinate `e^{-i beta} m(z)`.
    #[inline]
    fn sector(&self, z: Complex<T>) -> Complex<T> {
        self.rot * (z - self.vm) / (z - self.vp)
    }

    /// `psi_a^{-1}: a -> D`.
    ///
    /// Past `|s| = 1` the Cayley stage is evaluated in `r = 1/s`, which keeps
    /// the vertex `v_+` (where `s` is infinite) regular.
    #[inline]
    pub fn to_disk(&self, z: Complex<T>) -> Complex<T> {
        let i = Complex::new(T::zero(), T::one());
        let one = Complex::new(T::one(), T::zero());
        let s = self.sector(z);
        if s.norm_sqr() <= T::one() {
            let w = s * s;
            (w - i) / (w + i)
        } else {
            let r = (z - self.vp) / (self.rot * (z - self.vm));
            let q = r * r;
            (one - i * q) / (one + i * q)
        }
    }

    /// Complex derivative of [`Self::to_disk`].
    pub fn to_disk_derivative(&self, z: Complex<T>) -> Complex<T> {
        let i = Complex::new(T::zero(), T::one());
        let one = Complex::new(T::one(), T::zero());
        let two = T::lit(2.0);
        let s = self.sector(z);
        if s.norm_sqr() <= T::one() {
            let w = s * s;
            let dm = (self.vm - self.vp) / ((z - self.vp) * (z - self.vp));
            let dw = s * self.rot * dm * two;
            let dc = i * two / ((w + i) * (w + i));
            dc * dw
        } else {
            let r = (z - self.vp) / (self.rot * (z - self.vm));
            let q = r * r;
            let dr = (self.vp - self.vm) / (self.rot * (z - self.vm) * (z - self.vm));
            let dc = -i * two / ((one + i * q) * (one + i * q));
            dc * r * dr * two
        }
    }

    /// `psi_a: D -> a`.
    pub fn from_disk(&self, u: Complex<T>) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        let mut w = i * (one + u) / (one - u);
        if w.im < T::zero() {
            w.im = T::zero();
        }
        let s = w.sqrt();
        let y = s / self.rot;
        (self.vm - y * self.vp) / (one - y)
    }
}
