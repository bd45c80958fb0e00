//! Homodyne noise powers, cross-polarization correlations and the Duan
//! entanglement witness from an output spectral-density matrix.

use crate::error::{Error, Result};
use crate::propagation::SpectralDensity4;
use crate::scalar::{max_abs, re, CMatrix, Real, C};

/// Entanglement is flagged when the Duan sum falls below `2 - DUAN_MARGIN`.
pub const DUAN_MARGIN: f64 = 1e-9;

/// Noise powers below `-NEGATIVE_TOL` are reported as unphysical.
pub const NEGATIVE_TOL: f64 = 1e-8;

/// Quadrature angle and polarization basis for the homodyne analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisBasis<T: Real> {
    pub theta: T,
    /// 4x4 basis change acting as `U` on `(a1, a2)` and `conj(U)` on
    /// `(a1^H, a2^H)`.
    pub r: CMatrix<T>,
}

impl<T: Real> AnalysisBasis<T> {
    /// Analysis in the drive (x) and orthogonal (y) polarizations.
    pub fn xy(theta: T) -> Self {
        Self {
            theta,
            r: CMatrix::identity(4, 4),
        }
    }

    /// Analysis in the linear polarizations at +-45 degrees to x.
    pub fn pm45(theta: T) -> Self {
        let h = re(T::lit(std::f64::consts::FRAC_1_SQRT_2));
        let u = CMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
        Self {
            theta,
            r: polarization_change(&u),
        }
    }

    /// Analysis in the modes `b = U a` for a 2x2 unitary `U`.
    pub fn custom(u: &CMatrix<T>, theta: T) -> Result<Self> {
        if u.shape() != (2, 2) {
            return Err(Error::Parameter {
                name: "analysis.basis",
                reason: format!("expected a 2x2 matrix, got {:?}", u.shape()),
            });
        }
        let defect = max_abs(&(u * u.adjoint() - CMatrix::identity(2, 2)));
        if defect > T::lit(1e-12).max(T::default_epsilon() * T::lit(16.0)) {
            return Err(Error::Parameter {
                name: "analysis.basis",
                reason: format!("matrix is not unitary (|U U^H - I| = {:e})", defect.as_f64()),
            });
        }
        Ok(Self {
            theta,
            r: polarization_change(u),
        })
    }

    /// The same polarization basis at another quadrature angle.
    pub fn with_theta(&self, theta: T) -> Self {
        Self {
            theta,
            r: self.r.clone(),
        }
    }

    /// Quadrature phase `diag(e^{-i theta}, e^{i theta}, e^{-i theta}, e^{i theta})`.
    pub fn t_matrix(&self) -> CMatrix<T> {
        let minus = C::new(self.theta.cos(), -self.theta.sin());
        let plus = minus.conj();
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![minus, plus, minus, plus]))
    }
}

/// Lifts a 2x2 mode transformation to the `(a1, a1^H, a2, a2^H)` ordering.
pub fn polarization_change<T: Real>(u: &CMatrix<T>) -> CMatrix<T> {
    let mut r = CMatrix::zeros(4, 4);
    for l in 0..2 {
        for m in 0..2 {
            r[(2 * l, 2 * m)] = u[(l, m)];
            r[(2 * l + 1, 2 * m + 1)] = u[(l, m)].conj();
        }
    }
    r
}

/// `S' = T R S R^H T^H`.
pub fn rotate<T: Real>(s: &SpectralDensity4<T>, basis: &AnalysisBasis<T>) -> SpectralDensity4<T> {
    let tr = basis.t_matrix() * &basis.r;
    SpectralDensity4 {
        matrix: &tr * &s.matrix * tr.adjoint(),
    }
}

fn block_sum<T: Real>(s: &CMatrix<T>, rows: usize, cols: usize) -> C<T> {
    s[(rows, cols)] + s[(rows, cols + 1)] + s[(rows + 1, cols)] + s[(rows + 1, cols + 1)]
}

fn real_power<T: Real>(z: C<T>, label: &str) -> Result<T> {
    let tol = T::lit(1e-10).max(T::default_epsilon() * T::lit(1e3)) * z.re.abs().max(T::one());
    if z.im.abs() > tol {
        return Err(Error::Unphysical(format!("{label} has imaginary part {:e}", z.im.as_f64())));
    }
    if z.re < -T::lit(NEGATIVE_TOL) {
        return Err(Error::Unphysical(format!("{label} = {:e} is negative", z.re.as_f64())));
    }
    Ok(z.re)
}

/// Homodyne noise powers `(s1, s2)` of a rotated spectral density.
pub fn noise_powers<T: Real>(s_rot: &SpectralDensity4<T>) -> Result<(T, T)> {
    let s = &s_rot.matrix;
    Ok((real_power(block_sum(s, 0, 0), "s1")?, real_power(block_sum(s, 2, 2), "s2")?))
}

/// Cross-polarization correlation: the mode-1/mode-2 block combination of a
/// rotated spectral density.
pub fn cross_correlation<T: Real>(s_rot: &SpectralDensity4<T>) -> C<T> {
    block_sum(&s_rot.matrix, 0, 2)
}

/// Measurable quantities at one noise frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRecord<T> {
    pub omega: T,
    pub s1_amp: T,
    pub s1_phase: T,
    pub s2_amp: T,
    pub s2_phase: T,
    pub cross_corr: C<T>,
    pub duan_sum: T,
}

impl<T: Real> NoiseRecord<T> {
    /// Record filled with NaN, used for failed grid points.
    pub fn nan(omega: T) -> Self {
        let nan = T::lit(f64::NAN);
        Self {
            omega,
            s1_amp: nan,
            s1_phase: nan,
            s2_amp: nan,
            s2_phase: nan,
            cross_corr: C::new(nan, nan),
            duan_sum: nan,
        }
    }
}

/// Analysis settings: polarization basis plus amplitude and phase angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis<T: Real> {
    pub basis: AnalysisBasis<T>,
    pub theta_amp: T,
    pub theta_phase: T,
}

impl<T: Real> Analysis<T> {
    pub fn xy() -> Self {
        Self {
            basis: AnalysisBasis::xy(T::zero()),
            theta_amp: T::zero(),
            theta_phase: T::frac_pi_2(),
        }
    }

    pub fn pm45() -> Self {
        Self {
            basis: AnalysisBasis::pm45(T::zero()),
            ..Self::xy()
        }
    }
}

/// Noise powers at the amplitude and phase angles and the cross correlation
/// at the amplitude angle.
pub fn noise_record<T: Real>(s: &SpectralDensity4<T>, analysis: &Analysis<T>, omega: T) -> Result<NoiseRecord<T>> {
    let amp = rotate(s, &analysis.basis.with_theta(analysis.theta_amp));
    let phase = rotate(s, &analysis.basis.with_theta(analysis.theta_phase));
    let (s1_amp, s2_amp) = noise_powers(&amp)?;
    let (s1_phase, s2_phase) = noise_powers(&phase)?;
    Ok(NoiseRecord {
        omega,
        s1_amp,
        s1_phase,
        s2_amp,
        s2_phase,
        cross_corr: cross_correlation(&amp),
        duan_sum: s1_phase + s2_amp,
    })
}

/// Result of the Duan inequality test at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuanWitness<T> {
    pub entangled: bool,
    /// `2 - duan_sum`; positive when the inequality is violated.
    pub margin: T,
}

pub fn duan_witness<T: Real>(record: &NoiseRecord<T>) -> DuanWitness<T> {
    let two = T::lit(2.0);
    DuanWitness {
        entangled: record.duan_sum < two - T::lit(DUAN_MARGIN),
        margin: two - record.duan_sum,
    }
}
