//! Quadrature rules for averaging over a Gaussian distribution of Doppler
//! shifts.

use crate::error::{Error, Result};

/// Nodes and normalized weights for `integral W(delta) f(delta) d delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl VelocityRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Single class at rest; reproduces the stationary-atom result exactly.
    pub fn at_rest() -> Self {
        Self {
            nodes: vec![0.0],
            weights: vec![1.0],
        }
    }
}

/// How the Doppler distribution is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureKind {
    /// Gauss-Hermite rule with `n` nodes.
    GaussHermite,
    /// Uniform grid on `[-span sigma, span sigma]` with Gaussian weights.
    /// Successive refinements are nested (`n -> 2n - 1`).
    Uniform { span: f64 },
}

impl Default for QuadratureKind {
    fn default() -> Self {
        QuadratureKind::Uniform { span: 6.0 }
    }
}

impl QuadratureKind {
    /// Node count after one refinement.
    pub fn refine(&self, n: usize) -> usize {
        match self {
            QuadratureKind::GaussHermite => 2 * n,
            QuadratureKind::Uniform { .. } => 2 * n - 1,
        }
    }
}

/// Standard deviation of a Gaussian with the given full width at half maximum.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// Rule for a zero-mean Gaussian with FWHM `fwhm`.
pub fn gaussian_rule(kind: QuadratureKind, n: usize, fwhm: f64) -> Result<VelocityRule> {
    if !(fwhm.is_finite() && fwhm >= 0.0) {
        return Err(Error::Parameter {
            name: "doppler.fwhm",
            reason: format!("must be finite and non-negative, got {fwhm}"),
        });
    }
    if n == 0 {
        return Err(Error::Parameter {
            name: "doppler.nodes",
            reason: "need at least one node".into(),
        });
    }
    if fwhm == 0.0 || n == 1 {
        return Ok(VelocityRule::at_rest());
    }
    let sigma = fwhm_to_sigma(fwhm);
    let rule = match kind {
        QuadratureKind::GaussHermite => {
            let (x, w) = gauss_hermite(n);
            let scale = std::f64::consts::PI.sqrt();
            VelocityRule {
                nodes: x.iter().map(|v| std::f64::consts::SQRT_2 * sigma * v).collect(),
                weights: w.iter().map(|v| v / scale).collect(),
            }
        }
        QuadratureKind::Uniform { span } => {
            if !(span.is_finite() && span > 0.0) {
                return Err(Error::Parameter {
                    name: "doppler.span",
                    reason: format!("must be positive, got {span}"),
                });
            }
            let n = if n % 2 == 0 { n + 1 } else { n };
            let h = 2.0 * span / (n - 1) as f64;
            let nodes: Vec<f64> = (0..n).map(|i| (-span + h * i as f64) * sigma).collect();
            let raw: Vec<f64> = (0..n)
                .map(|i| {
                    let x = -span + h * i as f64;
                    let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                    end * (-0.5 * x * x).exp()
                })
                .collect();
            let total: f64 = raw.iter().sum();
            VelocityRule {
                nodes,
                weights: raw.iter().map(|w| w / total).collect(),
            }
        }
    };
    Ok(rule)
}

/// Orthonormal Hermite recurrence at `z`: returns `(h_n, h_{n-1}, log_scale)`
/// with both values divided by `exp(log_scale)` to avoid overflow.
fn hermite_pair(n: usize, z: f64) -> (f64, f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    let mut log_scale = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        if p1.abs() > 1e150 {
            p1 *= 1e-150;
            p2 *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (p1, p2, log_scale)
}

/// Gauss-Hermite nodes and weights for `integral exp(-x^2) f(x) dx`.
///
/// Positive roots are bracketed by a sign scan finer than the smallest root
/// spacing, then polished by safeguarded Newton steps.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let zmax = (2.0 * nf + 1.0).sqrt() + 1.0;
    let steps = 8 * n + 16;
    let dz = zmax / steps as f64;
    let mut roots = Vec::with_capacity(n.div_ceil(2));
    if n % 2 == 1 {
        roots.push(0.0);
    }
    let mut lo = 0.5 * dz;
    let mut f_lo = hermite_pair(n, lo).0;
    for s in 1..=steps {
        let hi = 0.5 * dz + s as f64 * dz;
        let f_hi = hermite_pair(n, hi).0;
        if f_lo.signum() != f_hi.signum() {
            roots.push(polish_root(n, lo, hi));
        }
        lo = hi;
        f_lo = f_hi;
    }
    assert_eq!(roots.len(), n.div_ceil(2), "Gauss-Hermite root scan");

    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for (k, &z) in roots.iter().enumerate() {
        let (_, p2, log_scale) = hermite_pair(n, z);
        let pp = (2.0 * nf).sqrt() * p2;
        let weight = 2.0 / (pp * pp) * (-2.0 * log_scale).exp();
        let (left, right) = if n % 2 == 1 { (n / 2 - k, n / 2 + k) } else { (n / 2 - 1 - k, n / 2 + k) };
        x[right] = z;
        x[left] = -z;
        w[right] = weight;
        w[left] = weight;
    }
    (x, w)
}

fn polish_root(n: usize, mut lo: f64, mut hi: f64) -> f64 {
    let sign_lo = hermite_pair(n, lo).0.signum();
    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (p1, p2, _) = hermite_pair(n, z);
        if p1 == 0.0 {
            return z;
        }
        if p1.signum() == sign_lo {
            lo = z;
        } else {
            hi = z;
        }
        let pp = (2.0 * n as f64).sqrt() * p2;
        let newton = z - p1 / pp;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - z).abs() <= 1e-15 * z.abs().max(1.0) {
            return next;
        }
        z = next;
    }
    z
}
