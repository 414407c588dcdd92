use num_complex::Complex;

use super::CapConformalMap;
use crate::error::{Error, Result};
use crate::geometry::DiscreteMeasure;
use crate::hersch::{renormalize, RenormalizationWeight};
use crate::moebius::{DiskAutomorphism, HyperbolicCap};
use crate::scalar::Real;

/// Relative mass that may be dropped near the cap vertices.
pub const MASS_LOSS_BUDGET: f64 = 1e-8;

const VERTEX_RADIUS: f64 = 1e-10;
const VERTEX_NUDGE: f64 = 1e-8;

fn clamp_unit<T: Real>(z: Complex<T>) -> Complex<T> {
    let n = z.norm();
    if n > T::one() {
        z / n
    } else {
        z
    }
}

/// `nu_a = nu|_a + tau_a* nu|_{a*}`: nodes outside the closed cap are
/// replaced by their reflections, weights unchanged.
pub fn fold<T: Real>(nu: &DiscreteMeasure<T>, cap: &HyperbolicCap<T>) -> DiscreteMeasure<T> {
    let tau = cap.reflection();
    let nodes =
        nu.nodes().iter().map(|&z| if cap.side(z) >= T::zero() { z } else { clamp_unit(tau.apply(z)) }).collect();
    DiscreteMeasure::from_parts_unchecked(nodes, nu.weights().to_vec(), nu.part())
}

/// `u~(z) = u(z)` on the closed cap and `u(tau_a z)` on the adjacent cap.
pub fn lift<T: Real>(cap: &HyperbolicCap<T>, u: impl Fn(Complex<T>) -> T) -> impl Fn(Complex<T>) -> T {
    let cap = *cap;
    let tau = cap.reflection();
    move |z| if cap.side(z) >= T::zero() { u(z) } else { u(tau.apply(z)) }
}

/// `G = phi_a^{-1}: a -> D`, written `R o d_xi o psi_a^{-1}` with the
/// rotation fixed by `G(p) = p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldingMap<T> {
    psi: CapConformalMap<T>,
    outer: DiskAutomorphism<T>,
}

impl<T: Real> FoldingMap<T> {
    pub fn cap(&self) -> &HyperbolicCap<T> {
        self.psi.cap()
    }

    pub fn outer(&self) -> &DiskAutomorphism<T> {
        &self.outer
    }

    #[inline]
    pub fn apply(&self, z: Complex<T>) -> Complex<T> {
        self.outer.apply(self.psi.to_disk(z))
    }

    pub fn derivative(&self, z: Complex<T>) -> Complex<T> {
        self.outer.derivative(self.psi.to_disk(z)) * self.psi.to_disk_derivative(z)
    }

    /// `phi_a: D -> a`.
    pub fn inverse(&self, u: Complex<T>) -> Complex<T> {
        self.psi.from_disk(self.outer.inverse().apply(u))
    }
}

/// The rearranged measure `zeta_a = G_* nu_a` with the data that produced it.
#[derive(Debug, Clone)]
pub struct RearrangedMeasure<T> {
    pub zeta: DiscreteMeasure<T>,
    pub folded: DiscreteMeasure<T>,
    pub map: FoldingMap<T>,
    /// Mass of nodes that could not be mapped (relative to the total).
    pub lost_mass: T,
}

impl<T: Real> RearrangedMeasure<T> {
    pub fn cap(&self) -> &HyperbolicCap<T> {
        self.map.cap()
    }

    /// `u~_a^t = lift(X_t o G)`.
    pub fn lifted_test_function(&self, psi: &RenormalizationWeight<T>, t: Complex<T>, z: Complex<T>) -> T {
        let cap = *self.cap();
        let inside = if cap.side(z) >= T::zero() { z } else { cap.reflection().apply(z) };
        psi.test_function(t, clamp_unit(self.map.apply(inside)))
    }
}

/// Rearranges a fixed measure over many caps.
///
/// The measure is renormalized once up front, so the full-disk limit of
/// `zeta_a` is the base measure itself.
#[derive(Debug, Clone)]
pub struct Rearranger<T> {
    base: DiscreteMeasure<T>,
    psi: RenormalizationWeight<T>,
}

impl<T: Real> Rearranger<T> {
    pub fn new(nu: &DiscreteMeasure<T>, psi: RenormalizationWeight<T>) -> Result<Self> {
        let r = renormalize(nu, &psi)?;
        let d = DiskAutomorphism::translation(r.xi)?;
        let base = DiscreteMeasure::from_parts_unchecked(
            nu.nodes().iter().map(|&z| clamp_unit(d.apply(z))).collect(),
            nu.weights().to_vec(),
            nu.part(),
        );
        Ok(Self { base, psi })
    }

    pub fn base(&self) -> &DiscreteMeasure<T> {
        &self.base
    }

    pub fn weight(&self) -> &RenormalizationWeight<T> {
        &self.psi
    }

    pub fn rearrange(&self, cap: &HyperbolicCap<T>) -> Result<RearrangedMeasure<T>> {
        let folded = fold(&self.base, cap);
        let psi_map = CapConformalMap::new(*cap);
        let (vm, vp) = cap.vertices();
        let i = Complex::new(T::zero(), T::one());
        let total = folded.mass();
        let mut lost = T::zero();
        let mut nodes = Vec::with_capacity(folded.len());
        let mut weights = Vec::with_capacity(folded.len());
        for (z, w) in folded.iter() {
            let mut z = z;
            for (v, tangent) in [(vm, i * vm), (vp, -i * vp)] {
                if (z - v).norm() < T::lit(VERTEX_RADIUS) {
                    let dir = tangent - v;
                    z = v + dir * (T::lit(VERTEX_NUDGE) / dir.norm());
                }
            }
            let y = psi_map.to_disk(z);
            if !y.re.is_finite() || !y.im.is_finite() || cap.side(z) < -T::tol(1e-12) {
                lost += w;
                continue;
            }
            nodes.push(clamp_unit(y));
            weights.push(w);
        }
        let lost_mass = if total > T::zero() { lost / total } else { T::zero() };
        if lost_mass > T::lit(MASS_LOSS_BUDGET) {
            return Err(Error::MassLoss { lost: lost_mass.as_f64(), tolerance: MASS_LOSS_BUDGET });
        }
        let pulled = DiscreteMeasure::from_parts_unchecked(nodes, weights, folded.part());
        let r = renormalize(&pulled, &self.psi)?;
        let d = DiskAutomorphism::translation(r.xi)?;
        let image_of_p = d.apply(psi_map.to_disk(cap.p()));
        let outer = DiskAutomorphism::new(cap.p() / image_of_p, r.xi)?;
        let zeta = pulled.map_nodes(|y| clamp_unit(outer.apply(y)));
        Ok(RearrangedMeasure { zeta, folded, map: FoldingMap { psi: psi_map, outer }, lost_mass })
    }
}

/// One-shot [`Rearranger::rearrange`].
pub fn rearranged<T: Real>(
    nu: &DiscreteMeasure<T>,
    cap: &HyperbolicCap<T>,
    psi: RenormalizationWeight<T>,
) -> Result<RearrangedMeasure<T>> {
    Rearranger::new(nu, psi)?.rearrange(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cis, pullback_area_measure, ConformalMap, DensityField, DiskQuadrature, MeasurePart};
    use crate::hersch::center_of_mass;
    use crate::inertia::{inertia_form, rp1_distance};
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn ellipse_boundary(n: usize) -> DiscreteMeasure<f64> {
        let q = DiskQuadrature::new(8, 16, n).unwrap();
        let m = ConformalMap::from_real_pairs(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0 / 11.0, 0.0)]).unwrap();
        crate::geometry::pullback_boundary_measure(&m, &q, &DensityField::uniform(&q)).unwrap()
    }

    #[test]
    fn folding_symmetric_measure_doubles() {
        // Uniform boundary measure is symmetric under every cap reflection.
        let nu = DiscreteMeasure::<f64>::uniform_boundary(1000);
        let cap = HyperbolicCap::half_disk();
        let folded = fold(&nu, &cap);
        assert_eq!(folded.mass(), nu.mass());
        for (z, _) in folded.iter() {
            assert!(z.re >= -1e-12);
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        // Each node of the right half receives its mirror image.
        for (z, _) in nu.iter().filter(|(z, _)| z.re > 1e-9) {
            let count = folded.iter().filter(|(y, _)| (y - z).norm() < 1e-12).count();
            assert_eq!(count, 2);
        }
    }

    #[test]
    fn fold_duality() {
        let q = DiskQuadrature::new(12, 32, 64).unwrap();
        let nu = DiscreteMeasure::lebesgue(&q);
        for cap in [HyperbolicCap::from_angle(1.2, 0.3).unwrap(), HyperbolicCap::from_angle(4.4, -2.0).unwrap()] {
            let folded = fold(&nu, &cap);
            let u = |z: C| z.re * z.re + 0.3 * z.im + (z.re * z.im).sin();
            let ut = lift(&cap, u);
            let lhs = nu.integrate(&ut);
            let rhs = folded.integrate(u);
            assert!((lhs - rhs).abs() < 1e-13);
            for (z, _) in folded.iter() {
                assert!(cap.side(z) >= -1e-12);
            }
        }
    }

    #[test]
    fn lift_examples() {
        let cap = HyperbolicCap::<f64>::half_disk();
        let one = lift(&cap, |_| 1.0);
        let re = lift(&cap, |z: C| z.re);
        for k in 0..50 {
            let z = cis(k as f64 * 0.7) * (k as f64 / 50.0);
            assert_eq!(one(z), 1.0);
            assert!((re(z) - z.re.abs()).abs() < 1e-15);
        }
        // Continuity across the geodesic and tau-invariance.
        let cap = HyperbolicCap::from_angle(2.2, 1.0).unwrap();
        let tau = cap.reflection();
        let u = lift(&cap, |z: C| (z * z).re + z.im);
        for k in 1..40 {
            let g = cap.geodesic_point(k as f64 / 40.0);
            let n = g - cap.p();
            let step = n / n.norm() * 1e-11;
            assert!((u(g + step) - u(g - step)).abs() < 1e-9);
            let z = g * 0.5;
            assert!((u(tau.apply(z)) - u(z)).abs() < 1e-12);
        }
    }

    #[test]
    fn rearranged_is_renormalized_and_mass_preserving() {
        let q = DiskQuadrature::new(16, 48, 256).unwrap();
        let m = ConformalMap::from_real_pairs(&[(0.0, 0.0), (1.0, 0.0), (0.2, 0.1), (0.05, 0.0)]).unwrap();
        let interior = pullback_area_measure(&m, &q, &DensityField::uniform(&q)).unwrap();
        let boundary = crate::geometry::pullback_boundary_measure(&m, &q, &DensityField::uniform(&q)).unwrap();
        for (nu, psi) in [
            (&boundary, RenormalizationWeight::Identity),
            (&interior, RenormalizationWeight::bessel()),
            (&interior, RenormalizationWeight::Identity),
        ] {
            let r = Rearranger::new(nu, psi).unwrap();
            for cap in [
                HyperbolicCap::from_angle(0.8, 0.0).unwrap(),
                HyperbolicCap::from_angle(PI, 2.0).unwrap(),
                HyperbolicCap::from_angle(5.0, -1.0).unwrap(),
            ] {
                let ra = r.rearrange(&cap).unwrap();
                assert_eq!(ra.zeta.mass(), nu.mass());
                assert_eq!(ra.folded.mass(), nu.mass());
                assert_eq!(ra.lost_mass, 0.0);
                let c = center_of_mass(&ra.zeta, &psi).unwrap();
                assert!(c.norm() < 1e-9, "{c}");
                assert!((ra.map.apply(cap.p()) - cap.p()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn vertex_nodes_are_kept() {
        // Nodes sit exactly on the vertices +-i of the half-disk.
        let nu = DiscreteMeasure::<f64>::uniform_boundary(64);
        let ra = rearranged(&nu, &HyperbolicCap::half_disk(), RenormalizationWeight::Identity).unwrap();
        assert_eq!(ra.lost_mass, 0.0);
        assert_eq!(ra.zeta.mass(), nu.mass());
        assert_eq!(ra.zeta.part(), MeasurePart::Boundary);
    }

    #[test]
    fn full_disk_limit_recovers_the_measure() {
        let nu = ellipse_boundary(1024);
        let r = Rearranger::new(&nu, RenormalizationWeight::Identity).unwrap();
        let q0 = inertia_form(r.base(), &RenormalizationWeight::Identity).unwrap();
        let cap = HyperbolicCap::from_angle(2.0 * PI - 1e-3, 0.7).unwrap();
        let ra = r.rearrange(&cap).unwrap();
        let q1 = inertia_form(&ra.zeta, &RenormalizationWeight::Identity).unwrap();
        assert!(rp1_distance(q0.direction(), q1.direction()) < 1e-2);
        assert!((q0.anisotropy() - q1.anisotropy()).abs() < 1e-2 * q0.trace());
    }

    #[test]
    fn point_limit_is_a_reflection() {
        let nu = ellipse_boundary(1024);
        let r = Rearranger::new(&nu, RenormalizationWeight::Identity).unwrap();
        for &theta in &[0.3, 1.0, 2.5] {
            let p = cis(theta);
            let ra = r.rearrange(&HyperbolicCap::new(1e-3, p).unwrap()).unwrap();
            let q = inertia_form(&ra.zeta, &RenormalizationWeight::Identity).unwrap();
            let reflected = r.base().map_nodes(|z| p * p * z.conj());
            let qr = inertia_form(&reflected, &RenormalizationWeight::Identity).unwrap();
            assert!(rp1_distance(q.direction(), qr.direction()) < 1e-2);
            // Major axis of the base is e1, so the limit is [p^2].
            assert!(rp1_distance(q.direction(), p * p) < 1e-2);
        }
    }

    #[test]
    fn symmetric_measure_caps_agree_up_to_rotation() {
        let nu = ellipse_boundary(512);
        let r = Rearranger::new(&nu, RenormalizationWeight::Identity).unwrap();
        let a = r.rearrange(&HyperbolicCap::from_angle(2.0, 0.0).unwrap()).unwrap();
        let b = r.rearrange(&HyperbolicCap::from_angle(2.0, PI).unwrap()).unwrap();
        let qa = inertia_form(&a.zeta, &RenormalizationWeight::Identity).unwrap();
        let qb = inertia_form(&b.zeta, &RenormalizationWeight::Identity).unwrap();
        // nu is invariant under z -> -z, which carries one cap onto the other.
        assert!((qa.eigenvalues().0 - qb.eigenvalues().0).abs() < 1e-9);
        assert!((qa.eigenvalues().1 - qb.eigenvalues().1).abs() < 1e-9);
    }
}
