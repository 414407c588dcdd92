//! Galerkin eigenvalue solvers on the unit disk for the pulled-back Neumann
//! problem (interior weight `delta = rho(phi) |phi'|^2`) and Steklov problem
//! (boundary weight `w = rho(phi) |phi'|`).

mod zernike;

pub use zernike::{ZernikeBasis, ZernikeIndex, ZernikeSample};

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ConformalMap, DensityField, DiskQuadrature};
use crate::linalg::{GeneralizedEigProblem, Spectrum};
use crate::scalar::LinalgReal;

pub const DEFAULT_NEUMANN_DEGREE: usize = 20;
pub const DEFAULT_STEKLOV_DEGREE: usize = 64;

/// Rows per parallel block when forming `Phi^T W Phi`.
const BLOCK: usize = 512;

/// Which basis a problem was assembled in.
#[derive(Debug, Clone)]
pub enum GalerkinBasis {
    /// Zernike polynomials to total degree `N`.
    Neumann(ZernikeBasis),
    /// `{1} u {r^n cos n theta, r^n sin n theta : 1 <= n <= N}`.
    Steklov { degree: usize },
}

impl GalerkinBasis {
    pub fn degree(&self) -> usize {
        match self {
            Self::Neumann(b) => b.degree(),
            Self::Steklov { degree } => *degree,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Neumann(b) => b.len(),
            Self::Steklov { degree } => 2 * degree + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `sum_q c_q u_q u_q^T` over the rows of `rows`, in fixed block order.
fn weighted_gram<T: LinalgReal>(rows: &DMatrix<T>, weights: &[T]) -> DMatrix<T> {
    let (n, m) = rows.shape();
    let blocks: Vec<DMatrix<T>> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let len = BLOCK.min(n - start);
            let mut scaled = rows.rows(start, len).into_owned();
            for i in 0..len {
                let s = Float::sqrt(weights[start + i]);
                scaled.row_mut(i).scale_mut(s);
            }
            scaled.tr_mul(&scaled)
        })
        .collect();
    let mut out = DMatrix::zeros(m, m);
    for b in blocks {
        out += b;
    }
    (&out + out.transpose()) * T::lit(0.5)
}

/// Basis values and gradients at the interior nodes of a quadrature, with the
/// stiffness matrix, which does not depend on the weight.
#[derive(Debug, Clone)]
pub struct NeumannAssembler<T: LinalgReal> {
    basis: ZernikeBasis,
    quad_weights: Vec<T>,
    sizes: (usize, usize, usize),
    values: DMatrix<T>,
    stiffness: DMatrix<T>,
}

impl<T: LinalgReal> NeumannAssembler<T> {
    pub fn new(degree: usize, quad: &DiskQuadrature<T>) -> Result<Self> {
        if quad.degree() < 2 * degree {
            return Err(Error::Quadrature(format!(
                "rule of degree {} cannot integrate products of degree-{degree} polynomials",
                quad.degree()
            )));
        }
        let basis = ZernikeBasis::new(degree);
        let nodes = quad.interior_nodes();
        let m = basis.len();
        let samples: Vec<_> = nodes.par_iter().map(|&z| basis.sample(z)).collect();
        let values = DMatrix::from_fn(nodes.len(), m, |q, i| samples[q].value[i]);
        let gx = DMatrix::from_fn(nodes.len(), m, |q, i| samples[q].dx[i]);
        let gy = DMatrix::from_fn(nodes.len(), m, |q, i| samples[q].dy[i]);
        let w = quad.interior_weights();
        let stiffness = weighted_gram(&gx, w) + weighted_gram(&gy, w);
        Ok(Self { basis, quad_weights: w.to_vec(), sizes: quad.sizes(), values, stiffness })
    }

    pub fn basis(&self) -> &ZernikeBasis {
        &self.basis
    }

    pub fn stiffness(&self) -> &DMatrix<T> {
        &self.stiffness
    }

    /// `B_ij = int delta b_i b_j`.
    pub fn assemble(&self, delta: &[T]) -> Result<GeneralizedEigProblem<T>> {
        if delta.len() != self.quad_weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} weight samples for {} interior nodes",
                delta.len(),
                self.quad_weights.len()
            )));
        }
        let mut w = Vec::with_capacity(delta.len());
        for (index, (&d, &q)) in delta.iter().zip(&self.quad_weights).enumerate() {
            if !(d > T::zero()) || !Float::is_finite(d) {
                return Err(Error::NonPositiveDensity { index, value: d.as_f64() });
            }
            w.push(d * q);
        }
        let mass = weighted_gram(&self.values, &w);
        GeneralizedEigProblem::new(self.stiffness.clone(), mass)
    }

    pub fn solve(&self, delta: &[T]) -> Result<Spectrum<T>> {
        self.assemble(delta)?.solve(self.basis.degree())
    }

    pub fn quadrature_sizes(&self) -> (usize, usize, usize) {
        self.sizes
    }
}

/// The harmonic basis sampled on the boundary nodes of a quadrature.
#[derive(Debug, Clone)]
pub struct SteklovAssembler<T: LinalgReal> {
    degree: usize,
    quad_weights: Vec<T>,
    sizes: (usize, usize, usize),
    values: DMatrix<T>,
    stiffness: DMatrix<T>,
}

impl<T: LinalgReal> SteklovAssembler<T> {
    pub fn new(degree: usize, quad: &DiskQuadrature<T>) -> Result<Self> {
        if quad.boundary_degree() < 2 * degree {
            return Err(Error::Quadrature(format!(
                "boundary rule of degree {} cannot integrate products of degree-{degree} harmonics",
                quad.boundary_degree()
            )));
        }
        let nodes = quad.boundary_nodes();
        let m = 2 * degree + 1;
        let mut values = DMatrix::zeros(nodes.len(), m);
        for (q, &z) in nodes.iter().enumerate() {
            values[(q, 0)] = T::one();
            let mut zn = Complex::new(T::one(), T::zero());
            for n in 1..=degree {
                zn *= z;
                values[(q, 2 * n - 1)] = zn.re;
                values[(q, 2 * n)] = zn.im;
            }
        }
        let mut stiffness = DMatrix::zeros(m, m);
        for n in 1..=degree {
            let e = T::PI() * T::from_usize_lossy(n);
            stiffness[(2 * n - 1, 2 * n - 1)] = e;
            stiffness[(2 * n, 2 * n)] = e;
        }
        Ok(Self { degree, quad_weights: quad.boundary_weights().to_vec(), sizes: quad.sizes(), values, stiffness })
    }

    pub fn stiffness(&self) -> &DMatrix<T> {
        &self.stiffness
    }

    /// `B_ij = oint w b_i b_j dtheta`.
    pub fn assemble(&self, weight: &[T]) -> Result<GeneralizedEigProblem<T>> {
        if weight.len() != self.quad_weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} weight samples for {} boundary nodes",
                weight.len(),
                self.quad_weights.len()
            )));
        }
        let mut w = Vec::with_capacity(weight.len());
        for (index, (&d, &q)) in weight.iter().zip(&self.quad_weights).enumerate() {
            if !(d > T::zero()) || !Float::is_finite(d) {
                return Err(Error::NonPositiveDensity { index, value: d.as_f64() });
            }
            w.push(d * q);
        }
        let mass = weighted_gram(&self.values, &w);
        GeneralizedEigProblem::new(self.stiffness.clone(), mass)
    }

    pub fn solve(&self, weight: &[T]) -> Result<Spectrum<T>> {
        self.assemble(weight)?.solve(self.degree)
    }

    pub fn quadrature_sizes(&self) -> (usize, usize, usize) {
        self.sizes
    }
}

pub fn assemble_neumann<T: LinalgReal>(
    delta: &[T],
    quad: &DiskQuadrature<T>,
    degree: usize,
) -> Result<GeneralizedEigProblem<T>> {
    NeumannAssembler::new(degree, quad)?.assemble(delta)
}

pub fn assemble_steklov<T: LinalgReal>(
    weight: &[T],
    quad: &DiskQuadrature<T>,
    degree: usize,
) -> Result<GeneralizedEigProblem<T>> {
    SteklovAssembler::new(degree, quad)?.assemble(weight)
}

/// `delta = rho(phi) |phi'|^2` at the interior nodes.
pub fn neumann_weight<T: LinalgReal>(map: &ConformalMap<T>, quad: &DiskQuadrature<T>, rho: &DensityField<T>) -> Vec<T> {
    quad.interior_nodes().iter().zip(rho.interior()).map(|(&z, &r)| r * map.derivative(z).norm_sqr()).collect()
}

/// `w = rho(phi) |phi'|` at the boundary nodes.
pub fn steklov_weight<T: LinalgReal>(map: &ConformalMap<T>, quad: &DiskQuadrature<T>, rho: &DensityField<T>) -> Vec<T> {
    quad.boundary_nodes().iter().zip(rho.boundary()).map(|(&z, &r)| r * map.derivative(z).norm()).collect()
}

/// A spectrum with the mass of the weight it was computed for.
#[derive(Debug, Clone)]
pub struct WeightedSpectrum<T: LinalgReal> {
    pub spectrum: Spectrum<T>,
    /// `int delta dz` or `oint w dtheta`.
    pub mass: T,
    pub quadrature_sizes: (usize, usize, usize),
}

impl<T: LinalgReal> WeightedSpectrum<T> {
    /// `lambda_k * M`.
    pub fn normalized(&self, k: usize) -> Option<T> {
        self.spectrum.get(k).map(|v| v * self.mass)
    }
}

/// Neumann spectrum of `(phi(D), rho)`.
pub fn neumann_spectrum<T: LinalgReal>(
    map: &ConformalMap<T>,
    rho: &DensityField<T>,
    quad: &DiskQuadrature<T>,
    degree: usize,
) -> Result<WeightedSpectrum<T>> {
    let delta = neumann_weight(map, quad, rho);
    let mass = delta.iter().zip(quad.interior_weights()).map(|(&d, &q)| d * q).sum();
    let spectrum = NeumannAssembler::new(degree, quad)?.solve(&delta)?;
    Ok(WeightedSpectrum { spectrum, mass, quadrature_sizes: quad.sizes() })
}

/// Steklov spectrum of `(phi(D), rho)` with `rho` on the boundary.
pub fn steklov_spectrum<T: LinalgReal>(
    map: &ConformalMap<T>,
    rho: &DensityField<T>,
    quad: &DiskQuadrature<T>,
    degree: usize,
) -> Result<WeightedSpectrum<T>> {
    let w = steklov_weight(map, quad, rho);
    let mass = w.iter().zip(quad.boundary_weights()).map(|(&d, &q)| d * q).sum();
    let spectrum = SteklovAssembler::new(degree, quad)?.solve(&w)?;
    Ok(WeightedSpectrum { spectrum, mass, quadrature_sizes: quad.sizes() })
}
