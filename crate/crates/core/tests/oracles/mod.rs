//! Independent reference computations shared by the integration tests.
//!
//! Nothing here goes through the library's Liouville-space machinery: the
//! dipole elements come from an exact rational Racah sum, the atomic
//! dynamics from explicit operator products, matrix exponentials from a
//! Taylor series and noise integrals from composite Simpson quadrature.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type M = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn factorial(n: i64) -> BigInt {
    assert!(n >= 0);
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Wigner 3j symbol with arguments given as twice their values, by the
/// Racah formula in exact rational arithmetic.
pub fn wigner_3j(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm3.abs() > tj3 {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj3 + tm3) % 2 != 0 {
        return 0.0;
    }
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() || (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i64| {
        assert!(x % 2 == 0);
        x / 2
    };
    let delta = BigRational::new(
        factorial(h(tj1 + tj2 - tj3)) * factorial(h(tj1 - tj2 + tj3)) * factorial(h(-tj1 + tj2 + tj3)),
        factorial(h(tj1 + tj2 + tj3) + 1),
    );
    let prod = factorial(h(tj1 + tm1))
        * factorial(h(tj1 - tm1))
        * factorial(h(tj2 + tm2))
        * factorial(h(tj2 - tm2))
        * factorial(h(tj3 + tm3))
        * factorial(h(tj3 - tm3));
    let radicand = delta * BigRational::from_integer(prod);

    let mut sum = BigRational::zero();
    for k in 0..=200i64 {
        let args = [
            k,
            h(tj3 - tj2 + tm1) + k,
            h(tj3 - tj1 - tm2) + k,
            h(tj1 + tj2 - tj3) - k,
            h(tj1 - tm1) - k,
            h(tj2 + tm2) - k,
        ];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let den = args.iter().fold(BigInt::one(), |acc, &a| acc * factorial(a));
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let phase_exp = h(tj1 - tj2 - tm3);
    let mut sign = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    if sum.is_negative() {
        sign = -sign;
    }
    let square = radicand * &sum * &sum;
    sign * square.to_f64().unwrap().sqrt()
}

/// `<g mg| Q^q |e me>` for the transition with twice-values `tg`, `te`.
pub fn dipole_element(tg: i64, te: i64, tmg: i64, tme: i64, q: i64) -> f64 {
    let phase_exp = (te - 2 + tmg) / 2;
    let sign = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * wigner_3j(te, 2, tg, tme, 2 * q, -tmg)
}

/// Independent description of one atom and its drive.
#[derive(Debug, Clone, Copy)]
pub struct Atom {
    pub tg: i64,
    pub te: i64,
    pub gamma: f64,
    pub b: f64,
    pub zeeman_g: f64,
    pub zeeman_e: f64,
    pub delta: f64,
    pub rabi: f64,
}

impl Atom {
    pub fn new(tg: i64, te: i64, gamma: f64, delta: f64, rabi: f64) -> Self {
        Self { tg, te, gamma, b: 1.0, zeeman_g: 0.0, zeeman_e: 0.0, delta, rabi }
    }

    pub fn dg(&self) -> usize {
        (self.tg + 1) as usize
    }

    pub fn de(&self) -> usize {
        (self.te + 1) as usize
    }

    pub fn dim(&self) -> usize {
        self.dg() + self.de()
    }

    /// `Q^q` in the full space, ground states first.
    pub fn q_full(&self, q: i64) -> M {
        let (dg, de) = (self.dg(), self.de());
        let mut m = M::zeros(dg + de, dg + de);
        for r in 0..dg {
            for col in 0..de {
                let tmg = -self.tg + 2 * r as i64;
                let tme = -self.te + 2 * col as i64;
                m[(r, dg + col)] = c(dipole_element(self.tg, self.te, tmg, tme, q), 0.0);
            }
        }
        m
    }

    /// Lowering operators of the x (drive) and y modes.
    pub fn lowering(&self) -> [M; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let qm = self.q_full(-1);
        let qp = self.q_full(1);
        let qx = (&qm - &qp) * c(s, 0.0);
        let qy = (&qm + &qp) * c(0.0, s);
        // mode 2 polarization is (-conj(y), conj(x)) of the drive (1, 0) = (0, 1)
        [qx, qy]
    }

    pub fn projector_e(&self) -> M {
        let mut p = M::zeros(self.dim(), self.dim());
        for k in self.dg()..self.dim() {
            p[(k, k)] = c(1.0, 0.0);
        }
        p
    }

    pub fn sigma0(&self) -> M {
        let mut p = M::zeros(self.dim(), self.dim());
        for k in 0..self.dg() {
            p[(k, k)] = c(1.0 / self.dg() as f64, 0.0);
        }
        p
    }

    /// Hamiltonian with mode amplitudes `alpha` and independent conjugates
    /// `alpha_bar`: `-(alpha O^H + alpha_bar O)` summed over modes.
    pub fn hamiltonian_with(&self, alpha: [Complex64; 2], alpha_bar: [Complex64; 2]) -> M {
        let mut h = self.projector_e() * c(self.delta, 0.0);
        for k in 0..self.dim() {
            let (beta, tm, tj) = if k < self.dg() {
                (self.zeeman_g, -self.tg + 2 * k as i64, self.tg)
            } else {
                (self.zeeman_e, -self.te + 2 * (k - self.dg()) as i64, self.te)
            };
            let _ = tj;
            h[(k, k)] += c(beta * tm as f64 / 2.0, 0.0);
        }
        let ops = self.lowering();
        for mode in 0..2 {
            h -= ops[mode].adjoint() * alpha[mode] + &ops[mode] * alpha_bar[mode];
        }
        h
    }

    pub fn hamiltonian(&self) -> M {
        let a = c(self.rabi / 2.0, 0.0);
        self.hamiltonian_with([a, c(0.0, 0.0)], [a, c(0.0, 0.0)])
    }

    fn feed(&self) -> f64 {
        self.b * self.de() as f64
    }

    /// Schrodinger-picture right-hand side `d rho / dt` for a given Hamiltonian.
    pub fn rhs_with(&self, h: &M, rho: &M) -> M {
        let i = c(0.0, 1.0);
        let pe = self.projector_e();
        let mut out = (h * rho - rho * h) * (-i);
        for q in -1..=1 {
            let qq = self.q_full(q);
            out += &qq * rho * qq.adjoint() * c(self.feed(), 0.0);
        }
        out -= (&pe * rho + rho * &pe) * c(0.5, 0.0);
        out -= rho * c(self.gamma, 0.0);
        out += self.sigma0() * c(self.gamma, 0.0);
        out
    }

    pub fn rhs(&self, rho: &M) -> M {
        self.rhs_with(&self.hamiltonian(), rho)
    }

    /// Heisenberg-picture generator of the homogeneous part (no pump).
    pub fn adjoint_lin(&self, x: &M) -> M {
        let i = c(0.0, 1.0);
        let h = self.hamiltonian();
        let pe = self.projector_e();
        let mut out = (&h * x - x * &h) * i;
        for q in -1..=1 {
            let qq = self.q_full(q);
            out += qq.adjoint() * x * &qq * c(self.feed(), 0.0);
        }
        out -= (&pe * x + x * &pe) * c(0.5, 0.0);
        out -= x * c(self.gamma, 0.0);
        out
    }

    /// c-number pump contribution `gamma Tr(sigma0 X)` to `d<X>/dt`.
    pub fn pump_of(&self, x: &M) -> Complex64 {
        (self.sigma0() * x).trace() * c(self.gamma, 0.0)
    }

    /// Steady state of `d rho/dt = L rho + gamma sigma0`, with `L` assembled
    /// by probing the right-hand side with matrix units.
    pub fn steady_state(&self) -> M {
        let d = self.dim();
        let n = d * d;
        let zero = M::zeros(d, d);
        let offset = self.rhs(&zero);
        let mut l = M::zeros(n, n);
        for k in 0..n {
            let mut e = M::zeros(d, d);
            e[(k % d, k / d)] = c(1.0, 0.0);
            let col = self.rhs(&e) - &offset;
            for r in 0..n {
                l[(r, k)] = col[(r % d, r / d)];
            }
        }
        let rhs = nalgebra::DVector::from_fn(n, |r, _| -offset[(r % d, r / d)]);
        let x = l.lu().solve(&rhs).unwrap();
        M::from_fn(d, d, |i, j| x[i + j * d])
    }
}

/// `sigma_ij = |j><i|`.
pub fn sigma(dim: usize, i: usize, j: usize) -> M {
    let mut m = M::zeros(dim, dim);
    m[(j, i)] = c(1.0, 0.0);
    m
}

pub fn expect(rho: &M, x: &M) -> Complex64 {
    (rho * x).trace()
}

/// Matrix exponential by scaled Taylor series with repeated squaring.
pub fn expm_taylor(a: &M) -> M {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.05 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * c(scale, 0.0);
    let mut term = M::identity(n, n);
    let mut sum = M::identity(n, n);
    for k in 1..30 {
        term = &term * &x * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `integral_0^1 e^{K s} J e^{K^H s} ds` by composite Simpson with `panels`
/// (even) subintervals, each node exponentiated independently.
pub fn simpson_noise_integral(k: &M, j: &M, panels: usize) -> M {
    assert!(panels % 2 == 0);
    let h = 1.0 / panels as f64;
    let step = expm_taylor(&(k * c(h, 0.0)));
    let step_h = step.adjoint();
    let mut node = j.clone();
    let mut acc = j.clone();
    for i in 1..=panels {
        node = &step * &node * &step_h;
        let w = if i == panels { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += &node * c(w, 0.0);
    }
    acc * c(h / 3.0, 0.0)
}

/// Noise powers `(s1, s2)` at quadrature angle `theta` in the x/y basis.
pub fn quadrature_powers(s: &M, theta: f64) -> (f64, f64) {
    let e = c(theta.cos(), -theta.sin());
    let t = [e, e.conj(), e, e.conj()];
    let r = M::from_fn(4, 4, |i, j| t[i] * s[(i, j)] * t[j].conj());
    let s1 = r[(0, 0)] + r[(0, 1)] + r[(1, 0)] + r[(1, 1)];
    let s2 = r[(2, 2)] + r[(2, 3)] + r[(3, 2)] + r[(3, 3)];
    (s1.re, s2.re)
}

/// Normally and time ordered fluorescence quadrature spectrum of a driven
/// two-level atom by the quantum regression theorem:
/// `:S_theta:(omega) = integral e^{i omega tau} <:dX_theta(tau) dX_theta(0):> d tau`
/// with `X_theta = s e^{-i theta} + s^H e^{i theta}` and `s = |g><e|`.
pub fn two_level_squeezing_spectrum(delta: f64, rabi0: f64, gamma: f64, theta: f64, omega: f64) -> f64 {
    let s = M::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let sd = s.adjoint();
    let pe = &sd * &s;
    let h = &pe * c(delta, 0.0) - (&s + &sd) * c(rabi0 / 2.0, 0.0);
    let i = c(0.0, 1.0);
    let ground = M::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let lind = |rho: &M| -> M {
        (&h * rho - rho * &h) * (-i) + &s * rho * &sd - (&pe * rho + rho * &pe) * c(0.5, 0.0) - rho * c(gamma, 0.0)
            + &ground * rho.trace() * c(gamma, 0.0)
    };
    // superoperator on column-stacked 2x2 matrices
    let mut l = M::zeros(4, 4);
    for k in 0..4 {
        let mut e = M::zeros(2, 2);
        e[(k % 2, k / 2)] = c(1.0, 0.0);
        let col = lind(&e);
        for r in 0..4 {
            l[(r, k)] = col[(r % 2, r / 2)];
        }
    }
    let vec = |m: &M| nalgebra::DVector::from_fn(4, |r, _| m[(r % 2, r / 2)]);
    let unvec = |v: &nalgebra::DVector<Complex64>| M::from_fn(2, 2, |a, b| v[a + 2 * b]);
    // steady state: null vector with unit trace
    let mut aug = l.clone();
    let mut rhs = nalgebra::DVector::zeros(4);
    aug[(0, 0)] = c(1.0, 0.0);
    aug[(0, 1)] = c(0.0, 0.0);
    aug[(0, 2)] = c(0.0, 0.0);
    aug[(0, 3)] = c(1.0, 0.0);
    rhs[0] = c(1.0, 0.0);
    let rho = unvec(&aug.lu().solve(&rhs).unwrap());
    let proj = vec(&rho) * nalgebra::DVector::from_fn(4, |r, _| if r % 2 == r / 2 { c(1.0, 0.0) } else { c(0.0, 0.0) }).transpose();
    // integral_0^inf e^{i w tau} <A(tau) B> = Tr[A (-(L + i w)^-1) (X - rho Tr X)]
    let half_transform = |a: &M, x: &M, w: f64| -> Complex64 {
        let xv = vec(x) - vec(&rho) * x.trace();
        let op = &l + M::identity(4, 4) * c(0.0, w) - &proj;
        let y = op.lu().solve(&xv).unwrap();
        -(a * unvec(&y)).trace()
    };
    let ph = c(0.0, -2.0 * theta).exp();
    let mut total = c(0.0, 0.0);
    for w in [omega, -omega] {
        total += ph * half_transform(&s, &(&s * &rho), w)
            + ph.conj() * half_transform(&sd, &(&rho * &sd), w)
            + half_transform(&sd, &(&s * &rho), w)
            + half_transform(&s, &(&rho * &sd), w);
    }
    total.re
}

/// Deterministic random configuration for sweeps.
#[derive(Debug, Clone, Copy)]
pub struct RandomConfig {
    pub tg: u32,
    pub te: u32,
    pub gamma: f64,
    pub delta: f64,
    pub rabi: f64,
    pub b: f64,
    pub zeeman_g: f64,
    pub zeeman_e: f64,
    pub cooperativity: f64,
    pub omega: f64,
}

pub fn random_configs(seed: u64, count: usize, max_twice: u32) -> Vec<RandomConfig> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let tg = rng.gen_range(0..=max_twice);
        let te = rng.gen_range(0..=max_twice);
        if (tg + te) % 2 != 0 || tg.abs_diff(te) > 2 || (tg == 0 && te == 0) {
            continue;
        }
        out.push(RandomConfig {
            tg,
            te,
            gamma: 10f64.powf(rng.gen_range(-2.0..-0.5)),
            delta: rng.gen_range(-15.0..15.0),
            rabi: rng.gen_range(0.0..20.0),
            b: rng.gen_range(0.5..1.0),
            zeeman_g: rng.gen_range(-1.0..1.0),
            zeeman_e: rng.gen_range(-1.0..1.0),
            cooperativity: 10f64.powf(rng.gen_range(-1.0..2.0)),
            omega: rng.gen_range(0.0..25.0),
        });
    }
    out
}

/// Library-side objects for a random configuration.
pub fn library_system(cfg: &RandomConfig) -> atomnoise_core::liouville::LiouvilleSystem<f64> {
    use atomnoise_core::atomic::{AngularMomentum, AtomSpec};
    use atomnoise_core::liouville::{build_system, DriveSpec};
    let mut spec = AtomSpec::new(AngularMomentum::from_twice(cfg.tg), AngularMomentum::from_twice(cfg.te), cfg.gamma);
    spec.branching_ratio = cfg.b;
    spec.zeeman_ground = cfg.zeeman_g;
    spec.zeeman_excited = cfg.zeeman_e;
    build_system(&spec, &DriveSpec::new(cfg.delta, cfg.rabi)).unwrap()
}

pub fn oracle_atom(cfg: &RandomConfig) -> Atom {
    Atom {
        tg: cfg.tg as i64,
        te: cfg.te as i64,
        gamma: cfg.gamma,
        b: cfg.b,
        zeeman_g: cfg.zeeman_g,
        zeeman_e: cfg.zeeman_e,
        delta: cfg.delta,
        rabi: cfg.rabi,
    }
}

/// Row-major flattening used by the library: `v[i * dim + j] = m[(i, j)]`.
pub fn flatten(m: &M) -> nalgebra::DVector<Complex64> {
    let d = m.nrows();
    nalgebra::DVector::from_fn(d * d, |k, _| m[(k / d, k % d)])
}

pub fn unflatten(v: &nalgebra::DVector<Complex64>, d: usize) -> M {
    M::from_fn(d, d, |i, j| v[i * d + j])
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
