use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid angular momentum: {0}")]
    AngularMomentum(String),

    #[error("dipole selection rule violated: |Fe - Fg| = {0} > 1")]
    SelectionRule(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("ill-conditioned response matrix at omega = {omega}: estimated condition number {cond:.3e}")]
    IllConditioned { omega: f64, cond: f64 },

    #[error("steady state is not stationary: Bloch residual {0:.3e}")]
    NotStationary(f64),

    #[error("Sylvester operator is near singular: min |l_i + conj(l_j)| = {0:.3e}")]
    NearSingularSylvester(f64),

    #[error("velocity quadrature did not converge with {nodes} nodes (relative change {change:.3e}); try {suggested} nodes")]
    QuadratureNotConverged { nodes: usize, change: f64, suggested: usize },

    #[error("physicality violation: {0}")]
    Unphysical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
