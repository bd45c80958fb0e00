//! Liouville-space form of the single-atom Heisenberg-Langevin equations.
//!
//! Atomic operators `sigma_ij` are flattened row-major, `k = i * dim + j`, with
//! the sublevel ordering of [`AtomSpec::sublevels`]. The mean value of
//! `sigma_ij` is the density matrix element `rho_ij`, so the drift acting on the
//! flattened operator vector has the same form as the optical Bloch equations.
//!
//! Field fluctuations are ordered `(a1, a1^H, a2, a2^H)`; mode 1 carries the
//! mean drive, mode 2 is the orthogonal polarization.

use nalgebra::ComplexField;

use crate::atomic::{build_dipole_operators, build_zeeman_hamiltonian, AtomSpec, DipoleSet, Manifold};
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_residual, min_hermitian_eigenvalue, superop};
use crate::scalar::{im, max_abs, re, CMatrix, CVector, Real, C};

/// Bijection between operator pairs `(i, j)` and flat indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiouvilleIndex {
    dim: usize,
}

impl LiouvilleIndex {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    /// Number of single-atom states.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Liouville-space dimension `n = dim^2 = 4 (Fg + Fe + 1)^2`.
    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize) -> usize {
        i * self.dim + j
    }

    #[inline]
    pub fn pair(&self, k: usize) -> (usize, usize) {
        (k / self.dim, k % self.dim)
    }
}

/// Jones vector of the drive polarization in the transverse `(x, y)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization<T> {
    pub x: C<T>,
    pub y: C<T>,
}

impl<T: Real> Polarization<T> {
    pub fn linear_x() -> Self {
        Self {
            x: re(T::one()),
            y: re(T::zero()),
        }
    }

    /// Normalized copy; fails for the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let norm = (self.x.modulus_squared() + self.y.modulus_squared()).sqrt();
        if !(norm > T::zero()) {
            return Err(Error::Parameter {
                name: "polarization",
                reason: "zero Jones vector".into(),
            });
        }
        Ok(Self {
            x: self.x / re(norm),
            y: self.y / re(norm),
        })
    }

    /// The orthogonal polarization `(-conj(y), conj(x))`.
    pub fn orthogonal(&self) -> Self {
        Self {
            x: -self.y.conj(),
            y: self.x.conj(),
        }
    }
}

impl<T: Real> Default for Polarization<T> {
    fn default() -> Self {
        Self::linear_x()
    }
}

/// Mean driving field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec<T> {
    /// Optical detuning `omega_0 - omega_L`.
    pub detuning: T,
    /// Reduced Rabi frequency `2 alpha eta`, real and non-negative.
    pub rabi: T,
    pub polarization: Polarization<T>,
}

impl<T: Real> DriveSpec<T> {
    pub fn new(detuning: T, rabi: T) -> Self {
        Self {
            detuning,
            rabi,
            polarization: Polarization::linear_x(),
        }
    }
}

/// Drift matrix, pump and field couplings of the linearized atom.
#[derive(Debug, Clone)]
pub struct LiouvilleSystem<T: Real> {
    pub spec: AtomSpec<T>,
    pub drive: DriveSpec<T>,
    pub index: LiouvilleIndex,
    pub dipoles: DipoleSet<T>,
    /// `n x n` drift matrix, including the `-gamma` transit loss.
    pub drift: CMatrix<T>,
    /// `gamma * vec(sigma0)`.
    pub pump: CVector<T>,
    /// `4 x n` atom-to-field coupling.
    pub w: CMatrix<T>,
    /// Lowering operators `e_lambda . Q_ge` for the two field modes.
    lowering: [CMatrix<T>; 2],
}

fn cartesian_components<T: Real>(dipoles: &DipoleSet<T>) -> (CMatrix<T>, CMatrix<T>) {
    let inv_sqrt2 = re(T::lit(std::f64::consts::FRAC_1_SQRT_2));
    let minus = dipoles.full_ge(-1);
    let plus = dipoles.full_ge(1);
    let qx = (&minus - &plus) * inv_sqrt2;
    let qy = (&minus + &plus) * (im(T::one()) * inv_sqrt2);
    (qx, qy)
}

/// Assembles the drift matrix, pump vector and field couplings.
pub fn build_system<T: Real>(spec: &AtomSpec<T>, drive: &DriveSpec<T>) -> Result<LiouvilleSystem<T>> {
    spec.validate()?;
    build_system_unchecked(spec, drive)
}

/// Same as [`build_system`] but accepts `gamma = 0` (used to test trace
/// preservation of the closed-system drift).
pub fn build_system_unchecked<T: Real>(
    spec: &AtomSpec<T>,
    drive: &DriveSpec<T>,
) -> Result<LiouvilleSystem<T>> {
    spec.validate_structure()?;
    if !(drive.rabi >= T::zero()) {
        return Err(Error::Parameter {
            name: "rabi",
            reason: format!("reduced Rabi frequency must be >= 0 (got {})", drive.rabi.as_f64()),
        });
    }
    let pol = drive.polarization.normalized()?;
    let dipoles = build_dipole_operators(spec)?;
    let dim = spec.dim();
    let index = LiouvilleIndex::new(dim);
    let n = index.len();
    let levels = spec.sublevels();

    let (qx, qy) = cartesian_components(&dipoles);
    let modes = [pol, pol.orthogonal()];
    let lowering = modes.map(|e| &qx * e.x + &qy * e.y);

    let mut p_e = CMatrix::<T>::zeros(dim, dim);
    for (k, level) in levels.iter().enumerate() {
        if level.manifold == Manifold::Excited {
            p_e[(k, k)] = re(T::one());
        }
    }
    let ident = CMatrix::<T>::identity(dim, dim);
    let half_rabi = re(drive.rabi * T::lit(0.5));
    let hamiltonian = &p_e * re(drive.detuning) + build_zeeman_hamiltonian(spec)
        - (&lowering[0] + lowering[0].adjoint()) * half_rabi;

    let minus_i = im(-T::one());
    let mut drift = (superop(&hamiltonian, &ident) - superop(&ident, &hamiltonian)) * minus_i;
    let feed = re(spec.branching_ratio * T::from_usize(spec.excited_dim()).unwrap());
    for q in -1..=1 {
        let qq = dipoles.full_ge(q);
        drift += superop(&qq, &qq.adjoint()) * feed;
    }
    drift -= (superop(&p_e, &ident) + superop(&ident, &p_e)) * re(T::lit(0.5));
    for k in 0..n {
        drift[(k, k)] -= re(spec.transit_rate);
    }

    let ground_weight = T::one() / T::from_usize(spec.ground_dim()).unwrap();
    let mut pump = CVector::<T>::zeros(n);
    for (k, level) in levels.iter().enumerate() {
        if level.manifold == Manifold::Ground {
            pump[index.flat(k, k)] = re(spec.transit_rate * ground_weight);
        }
    }

    let mut w = CMatrix::<T>::zeros(4, n);
    for (mode, op) in lowering.iter().enumerate() {
        for r in 0..dim {
            for c in 0..dim {
                let v = op[(r, c)];
                if v == re(T::zero()) {
                    continue;
                }
                // d(a)/dz picks up i * O_{rc} sigma_{cr}; d(a^H)/dz picks up -i * conj(O_{rc}) sigma_{rc}
                w[(2 * mode, index.flat(c, r))] += im(T::one()) * v;
                w[(2 * mode + 1, index.flat(r, c))] += minus_i * v.conj();
            }
        }
    }

    Ok(LiouvilleSystem {
        spec: *spec,
        drive: DriveSpec {
            polarization: pol,
            ..*drive
        },
        index,
        dipoles,
        drift,
        pump,
        w,
        lowering,
    })
}

impl<T: Real> LiouvilleSystem<T> {
    pub fn n(&self) -> usize {
        self.index.len()
    }

    /// Lowering operator `e_lambda . Q_ge` of field mode `mode` (0 or 1).
    pub fn lowering(&self, mode: usize) -> &CMatrix<T> {
        &self.lowering[mode]
    }

    /// The same atom and drive with a different optical detuning.
    pub fn with_detuning(&self, detuning: T) -> Result<Self> {
        build_system_unchecked(
            &self.spec,
            &DriveSpec {
                detuning,
                ..self.drive
            },
        )
    }

    /// Mean-value drift `A <x> + pump`.
    pub fn bloch_rhs(&self, mean: &CVector<T>) -> CVector<T> {
        &self.drift * mean + &self.pump
    }

    /// Solves `A <x> + pump = 0`.
    pub fn steady_state(&self) -> Result<SteadyState<T>> {
        steady_state(self)
    }

    /// Field-fluctuation coupling `V` at the given mean state.
    pub fn coupling_v(&self, steady: &SteadyState<T>) -> CMatrix<T> {
        build_v(self, steady)
    }
}

/// Mean atomic state `<sigma_ij> = rho_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState<T: Real> {
    pub mean: CVector<T>,
    index: LiouvilleIndex,
}

impl<T: Real> SteadyState<T> {
    pub fn from_vector(mean: CVector<T>, index: LiouvilleIndex) -> Self {
        assert_eq!(mean.len(), index.len());
        Self { mean, index }
    }

    pub fn index(&self) -> LiouvilleIndex {
        self.index
    }

    /// Density matrix `rho` with `rho[(i, j)] = <sigma_ij>`.
    pub fn density_matrix(&self) -> CMatrix<T> {
        let dim = self.index.dim();
        CMatrix::from_fn(dim, dim, |i, j| self.mean[self.index.flat(i, j)])
    }

    pub fn trace(&self) -> C<T> {
        (0..self.index.dim()).fold(re(T::zero()), |acc, i| acc + self.mean[self.index.flat(i, i)])
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            mean: &self.mean * re(factor),
            index: self.index,
        }
    }

    /// Checks unit trace, Hermiticity, populations in `[0, 1]` and positivity.
    pub fn check_physical(&self, tol: T) -> Result<()> {
        let rho = self.density_matrix();
        let tr = self.trace();
        if (tr - re(T::one())).modulus() > tol {
            return Err(Error::Unphysical(format!("trace {:?}", tr)));
        }
        let herm = hermiticity_residual(&rho);
        if herm > tol {
            return Err(Error::Unphysical(format!("hermiticity residual {}", herm.as_f64())));
        }
        for i in 0..rho.nrows() {
            let p = rho[(i, i)].re;
            if p < -tol || p > T::one() + tol {
                return Err(Error::Unphysical(format!("population {} = {}", i, p.as_f64())));
            }
        }
        let min = min_hermitian_eigenvalue(&rho);
        if min < -T::lit(1e-10).max(tol) {
            return Err(Error::Unphysical(format!("negative eigenvalue {}", min.as_f64())));
        }
        Ok(())
    }
}

/// Steady state of the Bloch equations, `A <x> + gamma x0 = 0`.
pub fn steady_state<T: Real>(sys: &LiouvilleSystem<T>) -> Result<SteadyState<T>> {
    if !(sys.spec.transit_rate > T::zero()) {
        return Err(Error::Parameter {
            name: "transit_rate",
            reason: "steady state requires gamma > 0".into(),
        });
    }
    let rhs = -&sys.pump;
    let x = sys
        .drift
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("steady-state Bloch equations"))?;
    let mut steady = SteadyState::from_vector(x, sys.index);
    // the exact solution is Hermitian; remove round-off asymmetry
    let rho = steady.density_matrix();
    let sym = (&rho + rho.adjoint()) * re(T::lit(0.5));
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            steady.mean[sys.index.flat(i, j)] = sym[(i, j)];
        }
    }
    Ok(steady)
}

/// Coupling of `(da1, da1^H, da2, da2^H)` to the atomic drift at the mean
/// state: columns `i [O^H, rho]` and `i [O, rho]` for each mode.
pub fn build_v<T: Real>(sys: &LiouvilleSystem<T>, steady: &SteadyState<T>) -> CMatrix<T> {
    let rho = steady.density_matrix();
    let n = sys.n();
    let i_unit = im(T::one());
    let mut v = CMatrix::<T>::zeros(n, 4);
    for mode in 0..2 {
        let op = &sys.lowering[mode];
        let op_h = op.adjoint();
        let col_a = (&op_h * &rho - &rho * &op_h) * i_unit;
        let col_ad = (op * &rho - &rho * op) * i_unit;
        for k in 0..n {
            let (i, j) = sys.index.pair(k);
            v[(k, 2 * mode)] = col_a[(i, j)];
            v[(k, 2 * mode + 1)] = col_ad[(i, j)];
        }
    }
    v
}

/// Largest entry of the Bloch residual `A <x> + pump`.
pub fn bloch_residual<T: Real>(sys: &LiouvilleSystem<T>, steady: &SteadyState<T>) -> T {
    let r = sys.bloch_rhs(&steady.mean);
    max_abs(&CMatrix::from_column_slice(r.len(), 1, r.as_slice()))
}
