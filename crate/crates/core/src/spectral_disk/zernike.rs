use num_complex::Complex;
use num_traits::Float;

use crate::scalar::Real;

/// One basis function `c R_n^m(r) cos(m theta)` or `c R_n^m(r) sin(m theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZernikeIndex {
    pub n: usize,
    pub m: usize,
    pub sine: bool,
}

/// Zernike polynomials of total degree `<= degree`, normalized in `L^2(D)`.
///
/// They span the same space as the monomials `x^a y^b` with `a + b <= degree`
/// but stay well conditioned at high degree.
#[derive(Debug, Clone)]
pub struct ZernikeBasis {
    degree: usize,
    indices: Vec<ZernikeIndex>,
}

/// Value and Cartesian gradient of every basis function at one point.
pub struct ZernikeSample<T> {
    pub value: Vec<T>,
    pub dx: Vec<T>,
    pub dy: Vec<T>,
}

impl ZernikeBasis {
    pub fn new(degree: usize) -> Self {
        // Same ordering as the evaluation loop in `sample`.
        let mut indices = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
        for m in 0..=degree {
            for n in (m..=degree).step_by(2) {
                indices.push(ZernikeIndex { n, m, sine: false });
                if m > 0 {
                    indices.push(ZernikeIndex { n, m, sine: true });
                }
            }
        }
        Self { degree, indices }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[ZernikeIndex] {
        &self.indices
    }

    /// Evaluates all functions and their gradients at `z` with `0 < |z| <= 1`.
    pub fn sample<T: Real>(&self, z: Complex<T>) -> ZernikeSample<T> {
        let r = z.norm();
        let (c, s) = if r > T::zero() { (z.re / r, z.im / r) } else { (T::one(), T::zero()) };
        let x = T::lit(2.0) * r * r - T::one();
        let len = self.len();
        let mut out = ZernikeSample { value: vec![T::zero(); len], dx: vec![T::zero(); len], dy: vec![T::zero(); len] };
        // cos(m theta), sin(m theta) by recurrence.
        let mut cm = T::one();
        let mut sm = T::zero();
        // r^{m-1} and r^m.
        let mut rm1 = if r > T::zero() { T::one() / r } else { T::zero() };
        let mut rm = T::one();
        let mut idx = 0;
        for m in 0..=self.degree {
            let kmax = (self.degree - m) / 2;
            let (p, dp) = jacobi_0m(m, kmax, x);
            let mf = T::from_usize_lossy(m);
            for k in 0..=kmax {
                let n = m + 2 * k;
                let nf = T::from_usize_lossy(n);
                let norm = if m == 0 {
                    Float::sqrt((nf + T::one()) / T::PI())
                } else {
                    Float::sqrt(T::lit(2.0) * (nf + T::one()) / T::PI())
                };
                // R = r^m P(x), R' = m r^{m-1} P + 4 r^{m+1} P'(x); R / r = r^{m-1} P.
                let radial = rm * p[k];
                let dradial = mf * rm1 * p[k] + T::lit(4.0) * rm * r * dp[k];
                let over_r = rm1 * p[k];
                for sine in [false, true] {
                    if sine && m == 0 {
                        continue;
                    }
                    let (ang, dang) = if sine { (sm, mf * cm) } else { (cm, -mf * sm) };
                    debug_assert_eq!(self.indices[idx], ZernikeIndex { n, m, sine });
                    let dr = norm * dradial * ang;
                    let dt = norm * over_r * dang;
                    out.value[idx] = norm * radial * ang;
                    out.dx[idx] = c * dr - s * dt;
                    out.dy[idx] = s * dr + c * dt;
                    idx += 1;
                }
            }
            let (cn, sn) = (cm * c - sm * s, sm * c + cm * s);
            cm = cn;
            sm = sn;
            rm1 = rm;
            rm *= r;
        }
        out
    }
}

/// `P_k^{(0,m)}(x)` and derivatives for `k = 0..=kmax`.
fn jacobi_0m<T: Real>(m: usize, kmax: usize, x: T) -> (Vec<T>, Vec<T>) {
    let mut p = vec![T::zero(); kmax + 1];
    let mut dp = vec![T::zero(); kmax + 1];
    p[0] = T::one();
    if kmax == 0 {
        return (p, dp);
    }
    let b = T::from_usize_lossy(m);
    let two = T::lit(2.0);
    // alpha = 0, beta = m.
    p[1] = T::one() + (b + two) * (x - T::one()) / two;
    dp[1] = (b + two) / two;
    for k in 2..=kmax {
        let kf = T::from_usize_lossy(k);
        let s = two * kf + b;
        let a1 = two * kf * (kf + b) * (s - two);
        let a2 = (s - T::one()) * (s * (s - two) * x - b * b);
        let a2d = (s - T::one()) * s * (s - two);
        let a3 = two * (kf - T::one()) * (kf + b - T::one()) * s;
        p[k] = (a2 * p[k - 1] - a3 * p[k - 2]) / a1;
        dp[k] = (a2 * dp[k - 1] + a2d * p[k - 1] - a3 * dp[k - 2]) / a1;
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DiskQuadrature;

    #[test]
    fn jacobi_matches_closed_forms() {
        // Explicit sum formula for P_k^{(0,m)}.
        let explicit = |k: usize, m: usize, x: f64| {
            let binom = |n: f64, j: usize| {
                let mut c = 1.0;
                for i in 0..j {
                    c *= (n - i as f64) / (i as f64 + 1.0);
                }
                c
            };
            let mut s = 0.0;
            for j in 0..=k {
                s += binom(k as f64, j) * binom((k + m) as f64, k - j) * ((x - 1.0) / 2.0).powi((k - j) as i32)
                    * ((x + 1.0) / 2.0).powi(j as i32);
            }
            s
        };
        for m in 0..5 {
            for &x in &[-0.9, -0.3, 0.0, 0.4, 1.0] {
                let (p, dp) = jacobi_0m(m, 6, x);
                for k in 0..=6 {
                    assert!((p[k] - explicit(k, m, x)).abs() < 1e-12);
                    let h = 1e-6;
                    let fd = (explicit(k, m, x + h) - explicit(k, m, x - h)) / (2.0 * h);
                    assert!((dp[k] - fd).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let basis = ZernikeBasis::new(20);
        assert_eq!(basis.len(), 231);
        let q = DiskQuadrature::<f64>::new(32, 64, 64).unwrap();
        let n = basis.len();
        let mut gram = vec![0.0; n * n];
        for (&z, &w) in q.interior_nodes().iter().zip(q.interior_weights()) {
            let s = basis.sample(z);
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] += w * s.value[i] * s.value[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * n + j] - e).abs() < 1e-10, "{i} {j} {}", gram[i * n + j]);
            }
        }
    }

    #[test]
    fn gradients_match_differences() {
        let basis = ZernikeBasis::new(7);
        let z = Complex::new(0.31, -0.52);
        let h = 1e-6;
        let s = basis.sample(z);
        let px = basis.sample(z + h);
        let mx = basis.sample(z - h);
        let py = basis.sample(z + Complex::new(0.0, h));
        let my = basis.sample(z - Complex::new(0.0, h));
        for i in 0..basis.len() {
            assert!((s.dx[i] - (px.value[i] - mx.value[i]) / (2.0 * h)).abs() < 1e-6);
            assert!((s.dy[i] - (py.value[i] - my.value[i]) / (2.0 * h)).abs() < 1e-6);
        }
    }
}
