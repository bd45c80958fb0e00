//! Propagation of the field spectral-density matrix through the medium.
//!
//! At noise frequency `omega` the atoms respond through `G = W M^-1` with
//! `M = -(i omega + A)`. Over the unit-length sample the 4x4 field
//! correlation matrix obeys `dS/dz = K S + S K^H + C J` with the gain
//! `K = C G V` and the Langevin source `J = G (2D) G^H`, so
//!
//! ```text
//! S(1) = e^K S(0) e^{K^H} + C (X - e^K X e^{K^H}),   -(K X + X K^H) = J.
//! ```
//!
//! The first term is the semiclassical (driven-response) part, the second the
//! added quantum noise of the atomic Langevin forces.

use std::sync::OnceLock;

use crate::diffusion::DiffusionMatrix;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, expm, hermiticity_residual, lyapunov_separation, min_hermitian_eigenvalue, norm1, sylvester_solve, Factorized};
use crate::liouville::{build_v, LiouvilleSystem, SteadyState};
use crate::quadrature::{gaussian_rule, QuadratureKind, VelocityRule};
use crate::scalar::{frobenius, max_abs, re, CMatrix, Real, C};

/// Largest accepted condition-number estimate of `M`.
pub const MAX_CONDITION: f64 = 1e12;

/// 4x4 correlation matrix of `(a1, a1^H, a2, a2^H)` in shot-noise units.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity4<T: Real> {
    pub matrix: CMatrix<T>,
}

impl<T: Real> SpectralDensity4<T> {
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        if matrix.shape() != (4, 4) {
            return Err(Error::Parameter {
                name: "S0",
                reason: format!("expected a 4x4 matrix, got {:?}", matrix.shape()),
            });
        }
        Ok(Self { matrix })
    }

    /// Coherent (or vacuum) input: `<a a^H> = 1`, `<a^H a> = 0` for both modes.
    pub fn coherent() -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = re(T::one());
        m[(2, 2)] = re(T::one());
        Self { matrix: m }
    }

    pub fn hermiticity_residual(&self) -> T {
        hermiticity_residual(&self.matrix)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> T {
        min_hermitian_eigenvalue(&self.matrix)
    }

    /// Checks Hermiticity and positivity to `tol`.
    pub fn check_physical(&self, tol: T) -> Result<()> {
        let herm = self.hermiticity_residual();
        if herm > tol {
            return Err(Error::Unphysical(format!("spectral density hermiticity residual {:e}", herm.as_f64())));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::Unphysical(format!("spectral density eigenvalue {:e}", min.as_f64())));
        }
        Ok(())
    }
}

/// Doppler broadening of the medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerSpec {
    /// Full width at half maximum of the Doppler shift distribution.
    pub width_fwhm: f64,
    /// Nodes of the first quadrature level.
    pub nodes: usize,
    pub kind: QuadratureKind,
    /// Accepted relative change between successive refinements.
    pub tolerance: f64,
    /// Maximum number of node refinements.
    pub max_refinements: usize,
}

impl DopplerSpec {
    pub fn new(width_fwhm: f64) -> Self {
        Self {
            width_fwhm,
            nodes: 97,
            kind: QuadratureKind::default(),
            tolerance: 1e-4,
            max_refinements: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec<T> {
    pub cooperativity: T,
    pub doppler: Option<DopplerSpec>,
}

impl<T: Real> MediumSpec<T> {
    pub fn new(cooperativity: T) -> Self {
        Self {
            cooperativity,
            doppler: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cooperativity >= T::zero()) || !self.cooperativity.is_finite() {
            return Err(Error::Parameter {
                name: "C",
                reason: format!("cooperativity must be finite and >= 0, got {}", self.cooperativity.as_f64()),
            });
        }
        if let Some(d) = &self.doppler {
            if !(d.width_fwhm > 0.0 && d.width_fwhm.is_finite()) {
                return Err(Error::Parameter {
                    name: "doppler.width_fwhm",
                    reason: format!("must be > 0, got {}", d.width_fwhm),
                });
            }
            if d.nodes == 0 {
                return Err(Error::Parameter {
                    name: "doppler.nodes",
                    reason: "need at least one node".into(),
                });
            }
            if !(d.tolerance > 0.0) {
                return Err(Error::Parameter {
                    name: "doppler.tolerance",
                    reason: format!("must be > 0, got {}", d.tolerance),
                });
            }
        }
        Ok(())
    }
}

/// Notable numerical events met while evaluating one frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// The Sylvester solve was skipped in favor of direct quadrature.
    SylvesterFallback { separation: f64 },
    /// `K` has eigenvalues with positive real part.
    Gain { max_real: f64 },
    /// Doppler quadrature accepted at `nodes` with the given relative change.
    Quadrature { nodes: usize, change: f64 },
    /// Doppler quadrature stopped at the refinement limit.
    QuadratureNotConverged { nodes: usize, change: f64, suggested: usize },
}

impl std::fmt::Display for Event {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Event::SylvesterFallback { separation } => {
                write!(f, "sylvester fallback to quadrature (separation {separation:.3e})")
            }
            Event::Gain { max_real } => write!(f, "gain: max Re eig(K) = {max_real:.3e}"),
            Event::Quadrature { nodes, change } => {
                write!(f, "doppler quadrature converged with {nodes} nodes (change {change:.3e})")
            }
            Event::QuadratureNotConverged { nodes, change, suggested } => write!(
                f,
                "{}",
                Error::QuadratureNotConverged {
                    nodes: *nodes,
                    change: *change,
                    suggested: *suggested
                }
            ),
        }
    }
}

/// Output spectrum together with its two contributions.
#[derive(Debug, Clone)]
pub struct Propagated<T: Real> {
    pub total: SpectralDensity4<T>,
    pub semiclassical: SpectralDensity4<T>,
    pub quantum: SpectralDensity4<T>,
    pub events: Vec<Event>,
}

/// Per-unit-cooperativity response of the atoms at one frequency:
/// `gv = G V` and `j = G (2D) G^H`.
#[derive(Debug, Clone)]
pub struct FieldResponse<T: Real> {
    pub gv: CMatrix<T>,
    pub j: CMatrix<T>,
}

impl<T: Real> FieldResponse<T> {
    fn zero() -> Self {
        Self {
            gv: CMatrix::zeros(4, 4),
            j: CMatrix::zeros(4, 4),
        }
    }

    fn add_scaled(&mut self, other: &Self, weight: T) {
        self.gv += &other.gv * re(weight);
        self.j += &other.j * re(weight);
    }
}

/// `G = W M^-1`, `M = -(i omega + A)`, with a condition check on `M`.
pub fn response_g<T: Real>(sys: &LiouvilleSystem<T>, omega: T) -> Result<CMatrix<T>> {
    let n = sys.n();
    let mut m = -&sys.drift;
    for k in 0..n {
        m[(k, k)] -= C::new(T::zero(), omega);
    }
    let m_norm = norm1(&m);
    let lu = Factorized::new(m).map_err(|_| Error::IllConditioned {
        omega: omega.as_f64(),
        cond: f64::INFINITY,
    })?;
    let cond = m_norm * lu.inverse_norm1_estimate()?;
    if !(cond.as_f64() <= MAX_CONDITION) {
        return Err(Error::IllConditioned {
            omega: omega.as_f64(),
            cond: cond.as_f64(),
        });
    }
    // G M = W  <=>  M^T G^T = W^T
    Ok(lu.solve_transpose(&sys.w.transpose())?.transpose())
}

/// `G V` and `G (2D) G^H` from an explicit diffusion matrix.
pub fn field_response<T: Real>(
    sys: &LiouvilleSystem<T>,
    v: &CMatrix<T>,
    diffusion: &DiffusionMatrix<T>,
    omega: T,
) -> Result<FieldResponse<T>> {
    let g = response_g(sys, omega)?;
    Ok(FieldResponse {
        gv: &g * v,
        j: &g * diffusion.two_d() * g.adjoint(),
    })
}

/// `G V` and `G (2D) G^H` without forming `D`: the Einstein-relation
/// contraction is carried out against `G` and `G A` directly.
pub fn field_response_contracted<T: Real>(
    sys: &LiouvilleSystem<T>,
    steady: &SteadyState<T>,
    v: &CMatrix<T>,
    omega: T,
) -> Result<FieldResponse<T>> {
    let g = response_g(sys, omega)?;
    let h = &g * &sys.drift;
    let idx = sys.index;
    let dim = idx.dim();
    let rho = steady.density_matrix();
    let as_square = |row: &CMatrix<T>, r: usize| CMatrix::from_fn(dim, dim, |i, j| row[(r, idx.flat(i, j))]);
    let gs: Vec<CMatrix<T>> = (0..4).map(|r| as_square(&g, r)).collect();
    let hs: Vec<CMatrix<T>> = (0..4).map(|r| as_square(&h, r)).collect();
    let pump = CMatrix::from_fn(dim, dim, |i, j| sys.pump[idx.flat(i, j)]);

    let dot = |a: &CMatrix<T>, b: &CMatrix<T>| a.iter().zip(b.iter()).fold(re(T::zero()), |acc, (x, y)| acc + x * y);
    let g_pump: Vec<C<T>> = gs.iter().map(|g| dot(g, &pump)).collect();
    let g_rho: Vec<C<T>> = gs.iter().map(|g| dot(g, &rho)).collect();
    // conj(Gb)[k,l] paired with rho[l,k] and pump[l,k]
    let gc_rho: Vec<C<T>> = gs.iter().map(|g| dot(&g.map(|v| v.conj()), &rho.transpose())).collect();
    let gc_pump: Vec<C<T>> = gs.iter().map(|g| dot(&g.map(|v| v.conj()), &pump.transpose())).collect();
    let gc_rho_mat: Vec<CMatrix<T>> = gs.iter().map(|g| g.map(|v| v.conj()) * &rho).collect();
    let hc_rho_mat: Vec<CMatrix<T>> = hs.iter().map(|h| h.map(|v| v.conj()) * &rho).collect();

    let mut j = CMatrix::<T>::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            let t1 = dot(&hs[a], &gc_rho_mat[b]);
            let t2 = dot(&gs[a], &hc_rho_mat[b]);
            let t3 = g_pump[a] * gc_rho[b];
            let t4 = g_rho[a] * gc_pump[b];
            j[(a, b)] = -(t1 + t2 + t3 + t4);
        }
    }
    let j = (&j + j.adjoint()) * re(T::lit(0.5));
    Ok(FieldResponse { gv: &g * v, j })
}

/// Propagates `s0` through a medium of cooperativity `c` whose atoms respond
/// with `response`.
pub fn propagate<T: Real>(c: T, response: &FieldResponse<T>, s0: &SpectralDensity4<T>) -> Result<Propagated<T>> {
    if !(c >= T::zero()) || !c.is_finite() {
        return Err(Error::Parameter {
            name: "C",
            reason: format!("cooperativity must be finite and >= 0, got {}", c.as_f64()),
        });
    }
    let zero = SpectralDensity4 {
        matrix: CMatrix::zeros(4, 4),
    };
    if c == T::zero() {
        return Ok(Propagated {
            total: s0.clone(),
            semiclassical: s0.clone(),
            quantum: zero,
            events: Vec::new(),
        });
    }
    let mut events = Vec::new();
    let k = &response.gv * re(c);
    let eigs = eigenvalues(&k);
    let max_real = eigs.iter().fold(T::lit(f64::NEG_INFINITY), |acc, v| acc.max(v.re));
    if max_real > T::zero() {
        log::warn!("gain: K has an eigenvalue with real part {:e}", max_real.as_f64());
        events.push(Event::Gain {
            max_real: max_real.as_f64(),
        });
    }
    let ek = expm(&k);
    let ek_h = ek.adjoint();
    let semiclassical = &ek * &s0.matrix * &ek_h;
    let quantum = match sylvester_solve(&k, &response.j) {
        Ok(x) => (&x - &ek * &x * &ek_h) * re(c),
        Err(Error::NearSingularSylvester(sep)) => {
            log::info!("near-singular Sylvester operator (separation {sep:e}); integrating directly");
            events.push(Event::SylvesterFallback { separation: sep });
            noise_integral(&k, &response.j) * re(c)
        }
        Err(e) => return Err(e),
    };
    let total = &semiclassical + &quantum;
    Ok(Propagated {
        total: SpectralDensity4 { matrix: total },
        semiclassical: SpectralDensity4 { matrix: semiclassical },
        quantum: SpectralDensity4 { matrix: quantum },
        events,
    })
}

/// `integral_0^1 e^{K s} J e^{K^H s} ds` by composite Simpson with a step
/// fine enough that `h ||K|| <= 0.02`.
pub fn noise_integral<T: Real>(k: &CMatrix<T>, j: &CMatrix<T>) -> CMatrix<T> {
    let scale = norm1(k).as_f64();
    let mut panels = ((scale / 0.02).ceil() as usize).clamp(64, 200_000);
    panels += panels % 2;
    let h = T::one() / T::from_usize(panels).unwrap();
    let step = expm(&(k * re(h)));
    let step_h = step.adjoint();
    let mut acc = j.clone();
    let mut term = j.clone();
    for i in 1..=panels {
        term = &step * &term * &step_h;
        let w = if i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += &term * re(T::lit(w));
    }
    acc * re(h / T::lit(3.0))
}

/// Output spectrum for atoms at rest.
pub fn output_spectrum<T: Real>(
    sys: &LiouvilleSystem<T>,
    steady: &SteadyState<T>,
    diffusion: &DiffusionMatrix<T>,
    medium: &MediumSpec<T>,
    s0: &SpectralDensity4<T>,
    omega: T,
) -> Result<Propagated<T>> {
    medium.validate()?;
    if medium.cooperativity == T::zero() {
        return propagate(T::zero(), &FieldResponse::zero(), s0);
    }
    let v = build_v(sys, steady);
    let response = field_response(sys, &v, diffusion, omega)?;
    propagate(medium.cooperativity, &response, s0)
}

/// One Doppler velocity class with its cached steady state.
#[derive(Debug, Clone)]
pub struct VelocityClass<T: Real> {
    /// Doppler shift of the class; the class sees detuning `delta - shift`.
    pub shift: T,
    pub weight: T,
    pub sys: LiouvilleSystem<T>,
    pub steady: SteadyState<T>,
    pub v: CMatrix<T>,
}

/// Velocity classes sampled by one quadrature rule.
#[derive(Debug, Clone)]
pub struct VelocityFamily<T: Real> {
    pub classes: Vec<VelocityClass<T>>,
}

impl<T: Real> VelocityClass<T> {
    pub fn new(base: &LiouvilleSystem<T>, shift: T, weight: T) -> Result<Self> {
        let sys = base.with_detuning(base.drive.detuning - shift)?;
        let steady = sys.steady_state()?;
        let v = build_v(&sys, &steady);
        Ok(Self {
            shift,
            weight,
            sys,
            steady,
            v,
        })
    }

    /// Unweighted response of this class at `omega`.
    pub fn response(&self, omega: T) -> Result<FieldResponse<T>> {
        field_response_contracted(&self.sys, &self.steady, &self.v, omega)
    }
}

impl<T: Real> VelocityFamily<T> {
    pub fn new(base: &LiouvilleSystem<T>, rule: &VelocityRule) -> Result<Self> {
        let classes = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&shift, &weight)| VelocityClass::new(base, T::lit(shift), T::lit(weight)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { classes })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Weighted sums `sum w G V` and `sum w G (2D) G^H`.
    pub fn response(&self, omega: T) -> Result<FieldResponse<T>> {
        let mut acc = FieldResponse::zero();
        for class in &self.classes {
            acc.add_scaled(&class.response(omega)?, class.weight);
        }
        Ok(acc)
    }
}

/// Doppler-averaged propagation with automatic node refinement. Velocity
/// families are built lazily per refinement level and shared across
/// frequencies and threads.
pub struct DopplerAverager<T: Real> {
    base: LiouvilleSystem<T>,
    spec: DopplerSpec,
    levels: Vec<OnceLock<Result<VelocityFamily<T>>>>,
}

impl<T: Real> DopplerAverager<T> {
    pub fn new(base: LiouvilleSystem<T>, spec: DopplerSpec) -> Result<Self> {
        MediumSpec {
            cooperativity: T::zero(),
            doppler: Some(spec),
        }
        .validate()?;
        let levels = (0..=spec.max_refinements).map(|_| OnceLock::new()).collect();
        Ok(Self { base, spec, levels })
    }

    pub fn spec(&self) -> &DopplerSpec {
        &self.spec
    }

    pub fn nodes_at(&self, level: usize) -> usize {
        let mut n = self.spec.nodes;
        for _ in 0..level {
            n = self.spec.kind.refine(n);
        }
        n
    }

    fn nested(&self) -> bool {
        matches!(self.spec.kind, QuadratureKind::Uniform { .. })
    }

    /// Velocity family of refinement `level`. For nested rules the classes of
    /// the previous level are reused at the even indices.
    pub fn family(&self, level: usize) -> Result<&VelocityFamily<T>> {
        self.levels[level]
            .get_or_init(|| {
                let rule = gaussian_rule(self.spec.kind, self.nodes_at(level), self.spec.width_fwhm)?;
                if level == 0 || !self.nested() {
                    return VelocityFamily::new(&self.base, &rule);
                }
                let coarse = self.family(level - 1)?;
                let mut classes = Vec::with_capacity(rule.len());
                for (k, (&shift, &weight)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                    if k % 2 == 0 {
                        let mut class = coarse.classes[k / 2].clone();
                        debug_assert!((class.shift.as_f64() - shift).abs() <= 1e-9 * shift.abs().max(1.0));
                        class.weight = T::lit(weight);
                        classes.push(class);
                    } else {
                        classes.push(VelocityClass::new(&self.base, T::lit(shift), T::lit(weight))?);
                    }
                }
                Ok(VelocityFamily { classes })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Per-class responses at `omega` for `level`, reusing `previous` (the
    /// responses of the level below) where the rule is nested.
    fn class_responses(&self, level: usize, omega: T, previous: &[FieldResponse<T>]) -> Result<Vec<FieldResponse<T>>> {
        let family = self.family(level)?;
        family
            .classes
            .iter()
            .enumerate()
            .map(|(k, class)| {
                if level > 0 && self.nested() && k % 2 == 0 {
                    Ok(previous[k / 2].clone())
                } else {
                    class.response(omega)
                }
            })
            .collect()
    }

    /// Doppler-averaged output at `omega`; refines the rule until two
    /// successive levels agree to the configured tolerance.
    pub fn spectrum(&self, cooperativity: T, s0: &SpectralDensity4<T>, omega: T) -> Result<Propagated<T>> {
        let mut responses = self.class_responses(0, omega, &[])?;
        let combine = |level: usize, responses: &[FieldResponse<T>]| -> Result<Propagated<T>> {
            let family = self.family(level)?;
            let mut acc = FieldResponse::zero();
            for (class, r) in family.classes.iter().zip(responses) {
                acc.add_scaled(r, class.weight);
            }
            propagate(cooperativity, &acc, s0)
        };
        let mut prev = combine(0, &responses)?;
        let mut change = f64::INFINITY;
        for level in 1..self.levels.len() {
            responses = self.class_responses(level, omega, &responses)?;
            let next = combine(level, &responses)?;
            let scale = frobenius(&next.total.matrix).max(T::default_epsilon());
            change = (frobenius(&(&next.total.matrix - &prev.total.matrix)) / scale).as_f64();
            prev = next;
            if change <= self.spec.tolerance {
                prev.events.push(Event::Quadrature {
                    nodes: self.nodes_at(level),
                    change,
                });
                return Ok(prev);
            }
        }
        let last = self.levels.len() - 1;
        let nodes = self.nodes_at(last);
        let suggested = self.spec.kind.refine(nodes);
        if self.levels.len() > 1 {
            log::warn!("doppler quadrature not converged at omega = {}: {nodes} nodes, change {change:e}", omega.as_f64());
            prev.events.push(Event::QuadratureNotConverged { nodes, change, suggested });
        }
        Ok(prev)
    }
}

/// Doppler-averaged output spectrum for a pre-built velocity family (fixed
/// quadrature, no refinement).
pub fn doppler_spectrum<T: Real>(
    family: &VelocityFamily<T>,
    medium: &MediumSpec<T>,
    s0: &SpectralDensity4<T>,
    omega: T,
) -> Result<Propagated<T>> {
    medium.validate()?;
    let response = family.response(omega)?;
    propagate(medium.cooperativity, &response, s0)
}

/// Largest entry of the propagated total, handy for scale-aware checks.
pub fn spectral_scale<T: Real>(p: &Propagated<T>) -> T {
    max_abs(&p.total.matrix)
}

/// `min |l_i + conj(l_j)|` over the eigenvalues of `K`.
pub fn sylvester_separation<T: Real>(k: &CMatrix<T>) -> T {
    lyapunov_separation(&eigenvalues(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::{AngularMomentum, AtomSpec};
    use crate::diffusion::diffusion_matrix;
    use crate::liouville::{build_system, DriveSpec};

    fn system(fg: f64, fe: f64, delta: f64, rabi: f64) -> LiouvilleSystem<f64> {
        let spec = AtomSpec::new(
            AngularMomentum::from_f64(fg).unwrap(),
            AngularMomentum::from_f64(fe).unwrap(),
            0.01,
        );
        build_system(&spec, &DriveSpec::new(delta, rabi)).unwrap()
    }

    fn at_rest(sys: &LiouvilleSystem<f64>, c: f64, omega: f64) -> Propagated<f64> {
        let steady = sys.steady_state().unwrap();
        let d = diffusion_matrix(sys, &steady).unwrap();
        output_spectrum(sys, &steady, &d, &MediumSpec::new(c), &SpectralDensity4::coherent(), omega).unwrap()
    }

    #[test]
    fn g_solves_defining_relation() {
        let sys = system(1.0, 2.0, 3.0, 5.0);
        let omega = 2.5;
        let g = response_g(&sys, omega).unwrap();
        let mut m = -&sys.drift;
        for k in 0..sys.n() {
            m[(k, k)] -= C::new(0.0, omega);
        }
        let residual = max_abs(&(&g * &m - &sys.w));
        assert!(residual <= 1e-10 * max_abs(&sys.w));
    }

    #[test]
    fn g_decays_as_inverse_frequency() {
        let sys = system(0.5, 0.5, 1.0, 2.0);
        let g1 = frobenius(&response_g(&sys, 1e4).unwrap());
        let g2 = frobenius(&response_g(&sys, 2e4).unwrap());
        assert!((g1 / g2 - 2.0).abs() < 1e-3);
        assert!(g1 * 1e4 < 10.0 * frobenius(&sys.w));
    }

    #[test]
    fn undriven_ill_conditioning_is_reported() {
        let spec = AtomSpec::new(AngularMomentum::from_twice(0), AngularMomentum::from_twice(2), 1e-15);
        let sys = build_system(&spec, &DriveSpec::new(0.0, 0.0)).unwrap();
        assert!(matches!(response_g(&sys, 0.0), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn zero_cooperativity_is_identity() {
        let sys = system(1.0, 2.0, 10.0, 40.0);
        let out = at_rest(&sys, 0.0, 3.0);
        assert_eq!(out.total, SpectralDensity4::coherent());
    }

    #[test]
    fn contracted_noise_matches_explicit_diffusion() {
        for (fg, fe, delta, rabi) in [(0.0, 1.0, 10.0, 10.0), (1.0, 2.0, 3.0, 7.0), (1.5, 0.5, -2.0, 4.0)] {
            let sys = system(fg, fe, delta, rabi);
            let steady = sys.steady_state().unwrap();
            let d = diffusion_matrix(&sys, &steady).unwrap();
            let v = build_v(&sys, &steady);
            for omega in [0.0, 0.7, 12.0] {
                let a = field_response(&sys, &v, &d, omega).unwrap();
                let b = field_response_contracted(&sys, &steady, &v, omega).unwrap();
                assert!(max_abs(&(&a.j - &b.j)) < 1e-11 * max_abs(&a.j).max(1.0));
                assert_eq!(a.gv, b.gv);
            }
        }
    }

    #[test]
    fn passive_medium_passes_shot_noise() {
        let sys = system(1.0, 2.0, 2.0, 0.0);
        for omega in [0.0, 0.5, 3.0, 20.0] {
            let out = at_rest(&sys, 100.0, omega);
            let s = &out.total.matrix;
            let s1 = s[(0, 0)] + s[(0, 1)] + s[(1, 0)] + s[(1, 1)];
            let s2 = s[(2, 2)] + s[(2, 3)] + s[(3, 2)] + s[(3, 3)];
            assert!((s1.re - 1.0).abs() < 1e-6 && (s2.re - 1.0).abs() < 1e-6, "{omega}: {s1} {s2}");
        }
    }

    #[test]
    fn sylvester_and_quadrature_agree() {
        let sys = system(0.5, 1.5, 4.0, 6.0);
        let steady = sys.steady_state().unwrap();
        let d = diffusion_matrix(&sys, &steady).unwrap();
        let v = build_v(&sys, &steady);
        let r = field_response(&sys, &v, &d, 4.0).unwrap();
        let c = 3.0;
        let k = &r.gv * re(c);
        let x = sylvester_solve(&k, &r.j).unwrap();
        let ek = expm(&k);
        let via_x = &x - &ek * &x * ek.adjoint();
        let direct = noise_integral(&k, &r.j);
        assert!(max_abs(&(&via_x - &direct)) < 1e-9 * max_abs(&direct));
    }

    #[test]
    fn single_node_doppler_is_at_rest() {
        let sys = system(1.0, 2.0, 10.0, 40.0);
        let family = VelocityFamily::new(&sys, &VelocityRule::at_rest()).unwrap();
        let medium = MediumSpec::new(100.0);
        for omega in [0.3, 11.0] {
            let a = at_rest(&sys, 100.0, omega);
            let b = doppler_spectrum(&family, &medium, &SpectralDensity4::coherent(), omega).unwrap();
            assert!(max_abs(&(&a.total.matrix - &b.total.matrix)) < 1e-10);
        }
    }
}
