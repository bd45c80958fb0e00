//! Langevin diffusion coefficients from the generalized Einstein relation.
//!
//! With the drift `D(sigma_ij) = sum_kl A_{ij,kl} sigma_kl + gamma sigma0_ij`
//! and stationarity of the mean state,
//!
//! ```text
//! 2 D_{ij,kl} = - sum_m A_{ij,km} <sigma_lm> - gamma sigma0_ij <sigma_lk>
//!               - sum_m A_{lk,mi} <sigma_mj> - gamma sigma0_lk <sigma_ij>
//! ```

use crate::error::{Error, Result};
use crate::liouville::{bloch_residual, LiouvilleSystem, SteadyState};
use crate::scalar::{max_abs, re, CMatrix, Real};

/// Largest Bloch residual accepted as a stationary state.
pub const STATIONARITY_TOL: f64 = 1e-8;

/// Diffusion matrix `D` under the shared flat indexing, normalized so that
/// `<f_ij f_kl^H> = (L/N) 2 D_{ij,kl}`.
#[derive(Debug, Clone)]
pub struct DiffusionMatrix<T: Real> {
    pub d: CMatrix<T>,
    /// Largest entry of `D - D^H` before symmetrization.
    pub asymmetry: T,
}

impl<T: Real> DiffusionMatrix<T> {
    /// `2 D`, the Langevin correlation matrix up to the `L/N` factor.
    pub fn two_d(&self) -> CMatrix<T> {
        &self.d * re(T::lit(2.0))
    }
}

/// Builds `D` for a stationary mean state of `sys`.
pub fn diffusion_matrix<T: Real>(sys: &LiouvilleSystem<T>, steady: &SteadyState<T>) -> Result<DiffusionMatrix<T>> {
    let residual = bloch_residual(sys, steady);
    if residual > T::lit(STATIONARITY_TOL) {
        return Err(Error::NotStationary(residual.as_f64()));
    }
    Ok(diffusion_from_mean(sys, steady))
}

/// Evaluates the Einstein-relation contraction without the stationarity
/// check; linear in the mean values at fixed drift.
pub fn diffusion_from_mean<T: Real>(sys: &LiouvilleSystem<T>, steady: &SteadyState<T>) -> DiffusionMatrix<T> {
    let idx = sys.index;
    let dim = idx.dim();
    let n = idx.len();
    let a = &sys.drift;
    let pump = &sys.pump;
    let rho = steady.density_matrix();
    let half = re(T::lit(0.5));

    let mut d = CMatrix::<T>::zeros(n, n);
    for i in 0..dim {
        for j in 0..dim {
            let row = idx.flat(i, j);
            for k in 0..dim {
                for l in 0..dim {
                    let col = idx.flat(k, l);
                    let lk = idx.flat(l, k);
                    let mut acc = -(pump[row] * rho[(l, k)] + pump[lk] * rho[(i, j)]);
                    for m in 0..dim {
                        acc -= a[(row, idx.flat(k, m))] * rho[(l, m)];
                        acc -= a[(lk, idx.flat(m, i))] * rho[(m, j)];
                    }
                    d[(row, col)] = acc * half;
                }
            }
        }
    }
    let asymmetry = max_abs(&(&d - d.adjoint()));
    if asymmetry > T::lit(1e-10) {
        log::debug!("diffusion matrix asymmetry before symmetrization: {:e}", asymmetry.as_f64());
    }
    let d = (&d + d.adjoint()) * half;
    DiffusionMatrix { d, asymmetry }
}
