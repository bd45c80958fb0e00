pub mod atomic;
pub mod diffusion;
pub mod error;
pub mod linalg;
pub mod liouville;
pub mod propagation;
pub mod quadrature;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases.
pub type AtomSpec = atomic::AtomSpec<f64>;
pub type DriveSpec = liouville::DriveSpec<f64>;
pub type LiouvilleSystem = liouville::LiouvilleSystem<f64>;
pub type SteadyState = liouville::SteadyState<f64>;
pub type DiffusionMatrix = diffusion::DiffusionMatrix<f64>;
pub type MediumSpec = propagation::MediumSpec<f64>;
pub type SpectralDensity4 = propagation::SpectralDensity4<f64>;
pub type Propagated = propagation::Propagated<f64>;
pub type NoiseRecord = spectra::NoiseRecord<f64>;
pub type Analysis = spectra::Analysis<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type AtomSpec = crate::atomic::AtomSpec<f32>;
    pub type DriveSpec = crate::liouville::DriveSpec<f32>;
    pub type LiouvilleSystem = crate::liouville::LiouvilleSystem<f32>;
    pub type SteadyState = crate::liouville::SteadyState<f32>;
    pub type DiffusionMatrix = crate::diffusion::DiffusionMatrix<f32>;
    pub type MediumSpec = crate::propagation::MediumSpec<f32>;
    pub type SpectralDensity4 = crate::propagation::SpectralDensity4<f32>;
    pub type Propagated = crate::propagation::Propagated<f32>;
    pub type NoiseRecord = crate::spectra::NoiseRecord<f32>;
    pub type Analysis = crate::spectra::Analysis<f32>;
}
