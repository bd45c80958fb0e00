//! Zeeman sublevel structure of a single `Fg -> Fe` dipole transition.
//!
//! Conventions used throughout the crate:
//!
//! * States are ordered ground `m = -Fg..=Fg` followed by excited `m = -Fe..=Fe`.
//! * Spherical basis `e_{+1} = -(x + i y)/sqrt2`, `e_0 = z`, `e_{-1} = (x - i y)/sqrt2`,
//!   so `x = (e_{-1} - e_{+1})/sqrt2` and `y = i (e_{-1} + e_{+1})/sqrt2`.
//! * Clebsch-Gordan phases follow Condon-Shortley; every dipole element is real.
//! * Rates and frequencies are in units of the excited-state radiative width.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{re, CMatrix, Real};

/// Angular momentum quantum number stored as twice its value, so that
/// half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngularMomentum(u32);

impl AngularMomentum {
    pub const fn from_twice(twice: u32) -> Self {
        Self(twice)
    }

    pub fn from_f64(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !value.is_finite() || value < 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::AngularMomentum(format!(
                "{value} is not a non-negative multiple of 1/2"
            )));
        }
        Ok(Self(twice.round() as u32))
    }

    pub const fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Number of Zeeman sublevels, `2F + 1`.
    pub const fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    /// Projections `m` (as twice their value) from `-F` to `F`.
    pub fn twice_projections(self) -> impl Iterator<Item = i32> + Clone {
        let f = self.0 as i32;
        (0..=self.0 as i32).map(move |k| -f + 2 * k)
    }
}

impl fmt::Display for AngularMomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for AngularMomentum {
    type Err = Error;

    /// Accepts `"1"`, `"1.5"` or `"3/2"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let bad = || Error::AngularMomentum(format!("cannot parse `{s}`"));
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "2" => Ok(Self(num)),
                "1" => Ok(Self(2 * num)),
                _ => Err(bad()),
            }
        } else {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::AngularMomentum(format!("cannot parse `{s}`")))?;
            Self::from_f64(v)
        }
    }
}

/// Which manifold a sublevel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manifold {
    Ground,
    Excited,
}

/// One Zeeman sublevel `|F, m>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sublevel {
    pub manifold: Manifold,
    pub twice_m: i32,
}

impl Sublevel {
    pub fn m(&self) -> f64 {
        f64::from(self.twice_m) / 2.0
    }
}

/// Two-level (ground/excited) atom with full Zeeman degeneracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpec<T> {
    pub fg: AngularMomentum,
    pub fe: AngularMomentum,
    /// Fraction of excited-state decay that returns to the ground manifold.
    pub branching_ratio: T,
    /// Transit relaxation rate (the phenomenological `gamma`).
    pub transit_rate: T,
    /// Ground-state Zeeman shift per unit of `m`.
    pub zeeman_ground: T,
    /// Excited-state Zeeman shift per unit of `m`.
    pub zeeman_excited: T,
}

impl<T: Real> AtomSpec<T> {
    /// Closed transition (`b = 1`), zero magnetic field.
    pub fn new(fg: AngularMomentum, fe: AngularMomentum, transit_rate: T) -> Self {
        Self {
            fg,
            fe,
            branching_ratio: T::one(),
            transit_rate,
            zeeman_ground: T::zero(),
            zeeman_excited: T::zero(),
        }
    }

    /// Checks the angular momentum pair only (used where `gamma = 0` is allowed).
    pub fn validate_structure(&self) -> Result<()> {
        let (tg, te) = (self.fg.twice() as i64, self.fe.twice() as i64);
        if (tg - te) % 2 != 0 {
            return Err(Error::AngularMomentum(format!(
                "Fg = {} and Fe = {} must both be integer or both half-integer",
                self.fg, self.fe
            )));
        }
        if (tg - te).abs() > 2 {
            return Err(Error::SelectionRule(((tg - te).abs() as f64) / 2.0));
        }
        if tg == 0 && te == 0 {
            return Err(Error::AngularMomentum(
                "Fg = 0 -> Fe = 0 has no dipole coupling".into(),
            ));
        }
        let b = self.branching_ratio;
        if !(b >= T::zero() && b <= T::one()) {
            return Err(Error::Parameter {
                name: "branching_ratio",
                reason: format!("{} is outside [0, 1]", b.as_f64()),
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if !(self.transit_rate > T::zero()) {
            return Err(Error::Parameter {
                name: "transit_rate",
                reason: format!(
                    "gamma must be > 0 (got {}); the drift is singular otherwise",
                    self.transit_rate.as_f64()
                ),
            });
        }
        Ok(())
    }

    pub fn ground_dim(&self) -> usize {
        self.fg.multiplicity()
    }

    pub fn excited_dim(&self) -> usize {
        self.fe.multiplicity()
    }

    /// Total number of single-atom states.
    pub fn dim(&self) -> usize {
        self.ground_dim() + self.excited_dim()
    }

    pub fn sublevels(&self) -> Vec<Sublevel> {
        let ground = self.fg.twice_projections().map(|twice_m| Sublevel {
            manifold: Manifold::Ground,
            twice_m,
        });
        let excited = self.fe.twice_projections().map(|twice_m| Sublevel {
            manifold: Manifold::Excited,
            twice_m,
        });
        ground.chain(excited).collect()
    }
}

/// Clebsch-Gordan coefficient `<j1 m1; 1 q | J M>` for coupling to a rank-1
/// tensor, from the closed-form table (Condon-Shortley phases).
///
/// Arguments are twice the physical values except `q`.
pub fn clebsch_gordan_rank1<T: Real>(
    twice_j1: u32,
    twice_m1: i32,
    q: i32,
    twice_j: u32,
    twice_m: i32,
) -> T {
    if twice_m != twice_m1 + 2 * q || twice_m1.unsigned_abs() > twice_j1 || twice_m.unsigned_abs() > twice_j {
        return T::zero();
    }
    if twice_j1 == 0 && twice_j == 0 {
        // 0 x 1 cannot couple to 0
        return T::zero();
    }
    let half = T::lit(0.5);
    let j1 = T::from_u32(twice_j1).unwrap() * half;
    let m = T::from_i32(twice_m).unwrap() * half;
    let one = T::one();
    let two = T::lit(2.0);
    let (a, b) = (j1 + m, j1 - m);
    let d = i64::from(twice_j) - i64::from(twice_j1);
    let value = match (d, q) {
        (2, 1) => (a * (a + one) / ((two * j1 + one) * (two * j1 + two))).sqrt(),
        (2, 0) => ((b + one) * (a + one) / ((two * j1 + one) * (j1 + one))).sqrt(),
        (2, -1) => (b * (b + one) / ((two * j1 + one) * (two * j1 + two))).sqrt(),
        (0, 1) => -(a * (b + one) / (two * j1 * (j1 + one))).sqrt(),
        (0, 0) => m / (j1 * (j1 + one)).sqrt(),
        (0, -1) => (b * (a + one) / (two * j1 * (j1 + one))).sqrt(),
        (-2, 1) => (b * (b + one) / (two * j1 * (two * j1 + one))).sqrt(),
        (-2, 0) => -(b * a / (j1 * (two * j1 + one))).sqrt(),
        (-2, -1) => ((a + one) * a / (two * j1 * (two * j1 + one))).sqrt(),
        _ => T::zero(),
    };
    value
}

/// Spherical components of the dimensionless dipole operator restricted to
/// the ground-excited block.
///
/// `q[k]` holds the `(2Fg+1) x (2Fe+1)` matrix of `Q^{k-1}` with elements
/// `<g, mg| Q^q |e, me>`, nonzero only for `mg = me + q`. The reduced element
/// is scaled so that `sum_{q,mg} |Q^q_{mg,me}|^2 = 1/(2Fe+1)` for every `me`.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSet<T: Real> {
    q: [DMatrix<T>; 3],
}

impl<T: Real> DipoleSet<T> {
    /// Ground-excited block of `Q^q`, `q` in `-1..=1`.
    pub fn ge(&self, q: i32) -> &DMatrix<T> {
        &self.q[(q + 1) as usize]
    }

    /// Excited-ground block, the adjoint of [`DipoleSet::ge`] (entries are real).
    pub fn eg(&self, q: i32) -> DMatrix<T> {
        self.ge(q).transpose()
    }

    /// `Q^q_{ge}` embedded in the full `dim x dim` single-atom space.
    pub fn full_ge(&self, q: i32) -> CMatrix<T> {
        let block = self.ge(q);
        let (dg, de) = block.shape();
        let mut out = CMatrix::zeros(dg + de, dg + de);
        for r in 0..dg {
            for c in 0..de {
                out[(r, dg + c)] = re(block[(r, c)]);
            }
        }
        out
    }
}

/// Builds `Q^q_{ge}` for the transition described by `spec`.
pub fn build_dipole_operators<T: Real>(spec: &AtomSpec<T>) -> Result<DipoleSet<T>> {
    spec.validate_structure()?;
    let (tg, te) = (spec.fg.twice(), spec.fe.twice());
    let (dg, de) = (spec.ground_dim(), spec.excited_dim());
    // Wigner-Eckart: <g mg|Q^q|e me> = <Fe me; 1 q|Fg mg> / sqrt(2Fg+1)
    let norm = T::from_usize(dg).unwrap().sqrt();
    let build = |q: i32| {
        DMatrix::from_fn(dg, de, |r, c| {
            let twice_mg = -(tg as i32) + 2 * r as i32;
            let twice_me = -(te as i32) + 2 * c as i32;
            clebsch_gordan_rank1::<T>(te, twice_me, q, tg, twice_mg) / norm
        })
    };
    Ok(DipoleSet {
        q: [build(-1), build(0), build(1)],
    })
}

/// Diagonal Zeeman Hamiltonian `(beta_g P_g + beta_e P_e) F_z B` over all sublevels.
pub fn build_zeeman_hamiltonian<T: Real>(spec: &AtomSpec<T>) -> CMatrix<T> {
    let levels = spec.sublevels();
    let mut h = CMatrix::zeros(levels.len(), levels.len());
    for (k, level) in levels.iter().enumerate() {
        let per_m = match level.manifold {
            Manifold::Ground => spec.zeeman_ground,
            Manifold::Excited => spec.zeeman_excited,
        };
        h[(k, k)] = re(per_m * T::lit(level.m()));
    }
    h
}
