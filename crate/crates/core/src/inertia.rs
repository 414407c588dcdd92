//! Moment of inertia forms and the search for a cap whose rearranged measure
//! is multiple.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::folding::Rearranger;
use crate::geometry::{cis, DiscreteMeasure};
use crate::hersch::RenormalizationWeight;
use crate::moebius::HyperbolicCap;
use crate::scalar::Real;

/// `V(t) = t^T Q t` with `Q_ij = int Psi_i Psi_j dnu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaForm<T> {
    q11: T,
    q12: T,
    q22: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification<T> {
    Simple { direction: Complex<T> },
    Multiple,
}

impl<T: Real> InertiaForm<T> {
    pub fn new(q11: T, q12: T, q22: T) -> Self {
        Self { q11, q12, q22 }
    }

    pub fn matrix(&self) -> [[T; 2]; 2] {
        [[self.q11, self.q12], [self.q12, self.q22]]
    }

    pub fn eval(&self, t: Complex<T>) -> T {
        self.q11 * t.re * t.re + T::lit(2.0) * self.q12 * t.re * t.im + self.q22 * t.im * t.im
    }

    pub fn trace(&self) -> T {
        self.q11 + self.q22
    }

    /// `(Q11 - Q22, 2 Q12)`; vanishes exactly when the form is isotropic.
    pub fn deviator(&self) -> (T, T) {
        (self.q11 - self.q22, T::lit(2.0) * self.q12)
    }

    /// `lambda_1 - lambda_2`.
    pub fn anisotropy(&self) -> T {
        let (a, b) = self.deviator();
        a.hypot(b)
    }

    /// `(lambda_1, lambda_2)` with `lambda_1 >= lambda_2`.
    pub fn eigenvalues(&self) -> (T, T) {
        let mean = self.trace() / T::lit(2.0);
        let half = self.anisotropy() / T::lit(2.0);
        (mean + half, mean - half)
    }

    /// Unit vector spanning the maximizing class in RP^1.
    pub fn direction(&self) -> Complex<T> {
        let (a, b) = self.deviator();
        cis(b.atan2(a) / T::lit(2.0))
    }

    pub fn minor_direction(&self) -> Complex<T> {
        self.direction() * Complex::new(T::zero(), T::one())
    }

    /// Multiple iff `lambda_1 - lambda_2 <= tol * trace`.
    pub fn classify(&self, tol: T) -> Classification<T> {
        if self.anisotropy() <= tol * self.trace() {
            Classification::Multiple
        } else {
            Classification::Simple { direction: self.direction() }
        }
    }

    pub fn is_multiple(&self, tol: T) -> bool {
        matches!(self.classify(tol), Classification::Multiple)
    }
}

pub fn inertia_form<T: Real>(nu: &DiscreteMeasure<T>, psi: &RenormalizationWeight<T>) -> Result<InertiaForm<T>> {
    if !(nu.mass() > T::zero()) {
        return Err(Error::ZeroMass);
    }
    let (mut a, mut b, mut c) = (T::zero(), T::zero(), T::zero());
    for (z, w) in nu.iter() {
        let p = psi.apply(z);
        a += w * p.re * p.re;
        b += w * p.re * p.im;
        c += w * p.im * p.im;
    }
    Ok(InertiaForm::new(a, b, c))
}

/// Angle between the lines spanned by `a` and `b`, in `[0, pi/2]`.
pub fn rp1_distance<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    let z = a * b.conj();
    z.im.abs().atan2(z.re.abs())
}

#[derive(Debug, Clone, Copy)]
pub struct CapSearchOptions<T> {
    /// Relative multiplicity tolerance.
    pub tolerance: T,
    pub l_steps: usize,
    pub p_steps: usize,
    pub refine_steps: usize,
    /// Keeps `l` inside `[margin, 2 pi - margin]`.
    pub l_margin: T,
}

impl<T: Real> Default for CapSearchOptions<T> {
    fn default() -> Self {
        Self { tolerance: T::tol(1e-6), l_steps: 24, p_steps: 48, refine_steps: 200, l_margin: T::lit(1e-6) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapSample<T> {
    pub l: T,
    pub p_angle: T,
    /// `(lambda_1 - lambda_2) / trace`, infinite where the cap failed.
    pub relative_anisotropy: T,
}

#[derive(Debug, Clone)]
pub struct CapSearchResult<T> {
    pub cap: HyperbolicCap<T>,
    pub anisotropy: T,
    pub trace: T,
    pub multiple: bool,
    /// The base measure was already multiple; `cap` is the full-disk limit.
    pub trivial: bool,
    pub evaluations: usize,
    /// The coarse grid, row-major in `l`.
    pub landscape: Vec<CapSample<T>>,
    /// Best relative anisotropy after each refinement stage.
    pub history: Vec<T>,
}

struct Objective<'a, T> {
    rearranger: &'a Rearranger<T>,
    margin: T,
}

impl<T: Real> Objective<'_, T> {
    fn clamp_l(&self, l: T) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        l.max(self.margin).min(two_pi - self.margin)
    }

    fn form(&self, l: T, theta: T) -> Option<InertiaForm<T>> {
        let cap = HyperbolicCap::from_angle(self.clamp_l(l), theta).ok()?;
        let rm = self.rearranger.rearrange(&cap).ok()?;
        inertia_form(&rm.zeta, self.rearranger.weight()).ok()
    }

    /// Relative deviator `(Q11 - Q22, 2 Q12) / trace`.
    fn residual(&self, x: [T; 2]) -> Option<(T, T)> {
        let q = self.form(x[0], x[1])?;
        let (a, b) = q.deviator();
        Some((a / q.trace(), b / q.trace()))
    }

    fn relative(&self, x: [T; 2]) -> T {
        match self.residual(x) {
            Some((a, b)) => a.hypot(b),
            None => T::infinity(),
        }
    }
}

/// Searches the cylinder of caps for one whose rearranged measure is
/// multiple: a coarse grid, then Nelder-Mead on the squared anisotropy, then
/// Newton on the deviator.
pub fn find_multiple_cap<T: Real>(
    nu: &DiscreteMeasure<T>,
    psi: RenormalizationWeight<T>,
    opts: &CapSearchOptions<T>,
) -> Result<CapSearchResult<T>> {
    let rearranger = Rearranger::new(nu, psi)?;
    let base = inertia_form(rearranger.base(), &psi)?;
    let two_pi = T::lit(2.0) * T::PI();
    if base.is_multiple(opts.tolerance) {
        return Ok(CapSearchResult {
            cap: HyperbolicCap::from_angle(two_pi - opts.l_margin, T::zero())?,
            anisotropy: base.anisotropy(),
            trace: base.trace(),
            multiple: true,
            trivial: true,
            evaluations: 0,
            landscape: Vec::new(),
            history: Vec::new(),
        });
    }
    let objective = Objective { rearranger: &rearranger, margin: opts.l_margin };
    let dl = two_pi / T::from_usize_lossy(opts.l_steps);
    let dp = two_pi / T::from_usize_lossy(opts.p_steps);
    let points: Vec<[T; 2]> = (0..opts.l_steps)
        .flat_map(|i| {
            (0..opts.p_steps)
                .map(move |j| [dl * (T::from_usize_lossy(i) + T::lit(0.5)), dp * T::from_usize_lossy(j)])
        })
        .collect();
    let landscape: Vec<CapSample<T>> = points
        .par_iter()
        .map(|&x| CapSample { l: x[0], p_angle: x[1], relative_anisotropy: objective.relative(x) })
        .collect();
    let mut evaluations = landscape.len();
    let mut order: Vec<usize> = (0..landscape.len()).collect();
    order.sort_by(|&a, &b| {
        landscape[a].relative_anisotropy.partial_cmp(&landscape[b].relative_anisotropy).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut history = Vec::new();
    let mut best = ([landscape[order[0]].l, landscape[order[0]].p_angle], landscape[order[0]].relative_anisotropy);
    for &start in order.iter().take(6) {
        let x0 = [landscape[start].l, landscape[start].p_angle];
        let (x, f, n) = nelder_mead(&objective, x0, [dl / T::lit(2.0), dp / T::lit(2.0)], opts);
        evaluations += n;
        let (x, f, n) = newton_polish(&objective, x, f, opts);
        evaluations += n;
        history.push(f);
        if f < best.1 {
            best = (x, f);
        }
        if best.1 <= opts.tolerance {
            break;
        }
    }
    let cap = HyperbolicCap::from_angle(objective.clamp_l(best.0[0]), best.0[1])?;
    let q = objective.form(best.0[0], best.0[1]).ok_or_else(|| Error::CapSearchFailed {
        anisotropy: f64::INFINITY,
        l: best.0[0].as_f64(),
        p_angle: best.0[1].as_f64(),
    })?;
    let multiple = q.is_multiple(opts.tolerance);
    if !multiple {
        return Err(Error::CapSearchFailed {
            anisotropy: (q.anisotropy() / q.trace()).as_f64(),
            l: cap.l().as_f64(),
            p_angle: best.0[1].as_f64(),
        });
    }
    Ok(CapSearchResult {
        cap,
        anisotropy: q.anisotropy(),
        trace: q.trace(),
        multiple,
        trivial: false,
        evaluations,
        landscape,
        history,
    })
}

fn nelder_mead<T: Real>(
    obj: &Objective<'_, T>,
    x0: [T; 2],
    step: [T; 2],
    opts: &CapSearchOptions<T>,
) -> ([T; 2], T, usize) {
    let f = |x: [T; 2]| {
        let r = obj.relative(x);
        r * r
    };
    let mut simplex = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut values = simplex.map(f);
    let mut evals = 3;
    let target = (opts.tolerance / T::lit(10.0)).powi(2);
    let half = T::lit(0.5);
    for _ in 0..opts.refine_steps {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = idx.map(|i| simplex[i]);
        values = idx.map(|i| values[i]);
        if values[0] <= target {
            break;
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) * half, (simplex[0][1] + simplex[1][1]) * half];
        let along = |s: T| {
            [centroid[0] + (simplex[2][0] - centroid[0]) * s, centroid[1] + (simplex[2][1] - centroid[1]) * s]
        };
        let xr = along(-T::one());
        let fr = f(xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(-T::lit(2.0));
            let fe = f(xe);
            evals += 1;
            if fe < fr {
                simplex[2] = xe;
                values[2] = fe;
            } else {
                simplex[2] = xr;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = xr;
            values[2] = fr;
        } else {
            let xc = if fr < values[2] { along(-half) } else { along(half) };
            let fc = f(xc);
            evals += 1;
            if fc < values[2].min(fr) {
                simplex[2] = xc;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + (simplex[k][0] - simplex[0][0]) * half,
                        simplex[0][1] + (simplex[k][1] - simplex[0][1]) * half,
                    ];
                    values[k] = f(simplex[k]);
                    evals += 1;
                }
            }
        }
        let size = (simplex[1][0] - simplex[0][0]).abs().max((simplex[1][1] - simplex[0][1]).abs())
            + (simplex[2][0] - simplex[0][0]).abs().max((simplex[2][1] - simplex[0][1]).abs());
        if size < T::lit(1e-12) {
            break;
        }
    }
    let mut best = 0;
    for k in 1..3 {
        if values[k] < values[best] {
            best = k;
        }
    }
    (simplex[best], values[best].sqrt(), evals)
}

fn newton_polish<T: Real>(obj: &Objective<'_, T>, x0: [T; 2], f0: T, opts: &CapSearchOptions<T>) -> ([T; 2], T, usize) {
    let mut x = x0;
    let mut fx = f0;
    let mut evals = 0;
    let h = T::lit(1e-6);
    let target = opts.tolerance / T::lit(10.0);
    for _ in 0..20 {
        if fx <= target {
            break;
        }
        let Some(r) = obj.residual(x) else { break };
        let mut jac = [[T::zero(); 2]; 2];
        let mut ok = true;
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            match (obj.residual(xp), obj.residual(xm)) {
                (Some(p), Some(m)) => {
                    jac[0][k] = (p.0 - m.0) / (h + h);
                    jac[1][k] = (p.1 - m.1) / (h + h);
                }
                _ => ok = false,
            }
        }
        evals += 5;
        if !ok {
            break;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det.abs() > T::zero()) || !det.is_finite() {
            break;
        }
        let s0 = -(jac[1][1] * r.0 - jac[0][1] * r.1) / det;
        let s1 = -(-jac[1][0] * r.0 + jac[0][0] * r.1) / det;
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let trial = [obj.clamp_l(x[0] + s0 * lambda), x[1] + s1 * lambda];
            let ft = obj.relative(trial);
            evals += 1;
            if ft < fx {
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            lambda /= T::lit(2.0);
        }
        if !accepted {
            break;
        }
    }
    (x, fx, evals)
}
