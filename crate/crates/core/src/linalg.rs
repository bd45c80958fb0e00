//! Dense complex linear algebra kernels: LU with transposed solves, a 1-norm
//! condition estimator, the matrix exponential, the Lyapunov-type Sylvester
//! solve and Hermitian helpers.

use nalgebra::{ComplexField, SymmetricEigen, LU};

use crate::error::{Error, Result};
use crate::scalar::{max_abs, re, CMatrix, CVector, Real, C};

/// LU factorization that can also solve with the transposed matrix.
pub struct Factorized<T: Real> {
    lu: LU<C<T>, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl<T: Real> Factorized<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        let n = m.nrows();
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular("LU factorization"));
        }
        Ok(Self { lu, n })
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.lu.solve(b).ok_or(Error::Singular("LU solve"))
    }

    /// Solves `M^T x = b`.
    pub fn solve_transpose(&self, b: &CMatrix<T>) -> Result<CMatrix<T>> {
        // P M = L U  =>  M^T = U^T L^T P
        let l = self.lu.l();
        let u = self.lu.u();
        let y = u
            .tr_solve_upper_triangular(b)
            .ok_or(Error::Singular("transposed triangular solve"))?;
        let mut z = l
            .tr_solve_lower_triangular(&y)
            .ok_or(Error::Singular("transposed triangular solve"))?;
        self.lu.p().inv_permute_rows(&mut z);
        Ok(z)
    }

    /// Hager-Higham estimate of `||M^{-1}||_1`.
    pub fn inverse_norm1_estimate(&self) -> Result<T> {
        let n = self.n;
        let mut x = CMatrix::from_element(n, 1, re(T::one() / T::from_usize(n).unwrap()));
        let mut estimate = T::zero();
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let y = self.solve(&x)?;
            estimate = y.iter().fold(T::zero(), |acc, v| acc + v.modulus());
            let xi = y.map(|v| {
                let a = v.modulus();
                if a > T::zero() {
                    v / re(a)
                } else {
                    re(T::one())
                }
            });
            // z = M^{-H} xi = conj(M^{-T} conj(xi))
            let z = self.solve_transpose(&xi.map(|v| v.conj()))?.map(|v| v.conj());
            let (j, zmax) = z
                .iter()
                .enumerate()
                .fold((0, T::zero()), |(bj, bm), (k, v)| {
                    if v.modulus() > bm {
                        (k, v.modulus())
                    } else {
                        (bj, bm)
                    }
                });
            let ztx = z.iter().zip(x.iter()).fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re);
            if iter > 0 && (zmax <= ztx || j == last_j) {
                break;
            }
            last_j = j;
            x = CMatrix::zeros(n, 1);
            x[(j, 0)] = re(T::one());
        }
        Ok(estimate)
    }
}

/// Matrix 1-norm (maximum absolute column sum).
pub fn norm1<T: Real>(m: &CMatrix<T>) -> T {
    m.column_iter()
        .map(|col| col.iter().fold(T::zero(), |acc, v| acc + v.modulus()))
        .fold(T::zero(), |a, b| a.max(b))
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with the degree-13 diagonal
/// Pade approximant.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return a.clone();
    }
    let theta13 = T::lit(5.371_920_351_148_152);
    let norm = norm1(a);
    let mut s = 0i32;
    if norm > theta13 {
        s = (norm / theta13).log2().ceil().to_i32().unwrap_or(0).max(0);
    }
    let scale = re(T::lit(0.5f64.powi(s)));
    let a = a * scale;
    let b = |k: usize| re::<T>(T::lit(PADE13[k]));
    let ident = CMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = &a * (&a6 * u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1));
    let v_inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * v_inner + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Pade denominator is nonsingular after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Eigenvalues of a general complex matrix (diagonal of its complex Schur form).
pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> CVector<T> {
    let (_, t) = m.clone().schur().unpack();
    t.diagonal()
}

/// Smallest separation `min_{i,j} |l_i + conj(l_j)|` of the operator
/// `X -> K X + X K^H`.
pub fn lyapunov_separation<T: Real>(eigs: &CVector<T>) -> T {
    let mut sep = T::max_value().unwrap();
    for a in eigs.iter() {
        for b in eigs.iter() {
            sep = sep.min((a + b.conj()).modulus());
        }
    }
    sep
}

/// Solves `-(K X + X K^H) = J` for `X` by vectorization.
///
/// Fails with [`Error::NearSingularSylvester`] when some eigenvalue pair of
/// `K` nearly satisfies `l_i + conj(l_j) = 0`, or when the residual check
/// `||K X + X K^H + J|| <= 1e-10 ||J||` does not hold.
pub fn sylvester_solve<T: Real>(k: &CMatrix<T>, j: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = k.nrows();
    let sep = lyapunov_separation(&eigenvalues(k));
    let scale = max_abs(k).max(T::one());
    if sep <= T::lit(1e-7) * scale {
        return Err(Error::NearSingularSylvester(sep.as_f64()));
    }
    // column-major vec: vec(K X) = (I (x) K) vec X, vec(X K^H) = (conj(K) (x) I) vec X
    let ident = CMatrix::<T>::identity(n, n);
    let op = ident.kronecker(k) + k.map(|v| v.conj()).kronecker(&ident);
    let rhs = CMatrix::from_iterator(n * n, 1, j.iter().map(|v| -v));
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or(Error::NearSingularSylvester(sep.as_f64()))?;
    let x = CMatrix::from_iterator(n, n, sol.iter().copied());
    let residual = max_abs(&(k * &x + &x * k.adjoint() + j));
    let jn = max_abs(j);
    let tol = T::lit(1e-10).max(T::default_epsilon() * T::lit(1e3));
    if residual > tol * jn && residual > tol * T::lit(1e-3) {
        return Err(Error::NearSingularSylvester(sep.as_f64()));
    }
    Ok(x)
}

/// `(M + M^H) / 2`.
pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()) * re(T::lit(0.5))
}

/// Largest entry of `M - M^H`.
pub fn hermiticity_residual<T: Real>(m: &CMatrix<T>) -> T {
    max_abs(&(m - m.adjoint()))
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

pub fn min_hermitian_eigenvalue<T: Real>(m: &CMatrix<T>) -> T {
    hermitian_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or_else(T::zero)
}

/// Row-major flattening helper shared by the Liouville-space code:
/// `vec(A X B) = (A (x) B^T) vec(X)`.
pub(crate) fn superop<T: Real>(left: &CMatrix<T>, right: &CMatrix<T>) -> CMatrix<T> {
    left.kronecker(&right.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c_lit;

    fn cm(n: usize, vals: &[(f64, f64)]) -> CMatrix<f64> {
        CMatrix::from_row_iterator(n, n, vals.iter().map(|&(a, b)| c_lit(a, b)))
    }

    fn taylor_expm(a: &CMatrix<f64>) -> CMatrix<f64> {
        let n = a.nrows();
        let mut term = CMatrix::<f64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * a / re(k as f64);
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_diagonal_and_nilpotent() {
        let d = cm(2, &[(1.0, 0.5), (0.0, 0.0), (0.0, 0.0), (-2.0, 0.0)]);
        let e = expm(&d);
        assert!((e[(0, 0)] - c_lit::<f64>(1.0, 0.5).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - c_lit((-2.0f64).exp(), 0.0)).norm() < 1e-15);
        let n = cm(2, &[(0.0, 0.0), (3.0, -1.0), (0.0, 0.0), (0.0, 0.0)]);
        let e = expm(&n);
        assert!((e[(0, 1)] - c_lit(3.0, -1.0)).norm() < 1e-14);
        assert!((e[(0, 0)] - c_lit(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_matches_taylor_with_scaling() {
        let a = cm(
            3,
            &[
                (0.3, 1.0),
                (-2.0, 0.1),
                (0.5, 0.0),
                (1.1, -0.4),
                (-1.5, 0.0),
                (0.2, 0.7),
                (0.0, 2.0),
                (0.4, 0.4),
                (-0.8, -0.3),
            ],
        );
        for scale in [0.1, 1.0, 4.0] {
            let s = &a * re(scale);
            let got = expm(&s);
            let want = taylor_expm(&s);
            let err = max_abs(&(got - &want)) / max_abs(&want);
            assert!(err < 1e-12, "scale {scale}: {err}");
        }
    }

    #[test]
    fn sylvester_scalar_case() {
        let k = CMatrix::<f64>::identity(4, 4) * re(-0.5);
        let j = CMatrix::<f64>::identity(4, 4);
        let x = sylvester_solve(&k, &j).unwrap();
        assert!(max_abs(&(x - CMatrix::identity(4, 4))) < 1e-14);
    }

    #[test]
    fn sylvester_diagonal_closed_form() {
        let diag = [-1.0, -2.0, -3.0, -4.0];
        let k = CMatrix::<f64>::from_fn(4, 4, |r, c| if r == c { re(diag[r]) } else { re(0.0) });
        let j = CMatrix::<f64>::from_element(4, 4, re(1.0));
        let x = sylvester_solve(&k, &j).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = -1.0 / (diag[r] + diag[c]);
                assert!((x[(r, c)].re - want).abs() < 1e-14);
                assert!(x[(r, c)].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sylvester_rejects_marginal_operator() {
        let k = CMatrix::<f64>::from_fn(2, 2, |r, c| if r == c { c_lit(0.0, 1.0 + r as f64) } else { re(0.0) });
        let j = CMatrix::<f64>::identity(2, 2);
        assert!(matches!(sylvester_solve(&k, &j), Err(Error::NearSingularSylvester(_))));
    }

    #[test]
    fn transpose_solve_and_condition() {
        let m = cm(3, &[(4.0, 1.0), (1.0, 0.0), (0.0, 2.0), (0.5, 0.0), (3.0, -1.0), (1.0, 1.0), (0.0, 0.0), (2.0, 0.0), (5.0, 0.0)]);
        let f = Factorized::new(m.clone()).unwrap();
        let b = CMatrix::from_fn(3, 2, |r, c| c_lit(r as f64 + 1.0, c as f64 - 0.5));
        let x = f.solve_transpose(&b).unwrap();
        assert!(max_abs(&(m.transpose() * &x - &b)) < 1e-13);
        let inv = m.clone().try_inverse().unwrap();
        let exact = norm1(&inv);
        let est = f.inverse_norm1_estimate().unwrap();
        assert!(est <= exact * (1.0 + 1e-12) && est >= exact / 3.0, "{est} vs {exact}");
    }
}
