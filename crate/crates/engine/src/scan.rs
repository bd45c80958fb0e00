//! Frequency sweeps.

use std::time::{Duration, Instant};

use atomnoise_core::diffusion::diffusion_matrix;
use atomnoise_core::liouville::build_system;
use atomnoise_core::propagation::{field_response, propagate, DopplerAverager, Event, Propagated};
use atomnoise_core::scalar::CMatrix;
use atomnoise_core::spectra::{noise_powers, noise_record, rotate};
use atomnoise_core::{Analysis, DiffusionMatrix, LiouvilleSystem, NoiseRecord, Result, SpectralDensity4};
use rayon::prelude::*;

use crate::config::ScanConfig;

/// Amplitude and phase noise of both modes for one contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePowers {
    pub s1_amp: f64,
    pub s1_phase: f64,
    pub s2_amp: f64,
    pub s2_phase: f64,
}

impl QuadraturePowers {
    fn nan() -> Self {
        Self {
            s1_amp: f64::NAN,
            s1_phase: f64::NAN,
            s2_amp: f64::NAN,
            s2_phase: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub record: NoiseRecord,
    pub semiclassical: Option<QuadraturePowers>,
    pub quantum: Option<QuadraturePowers>,
}

/// Diagnostics for one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub omega: f64,
    pub events: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub rows: Vec<Row>,
    pub points: Vec<PointReport>,
    /// Failure to set up the atomic system; every row is NaN when present.
    pub setup_error: Option<String>,
    pub wall_time: Duration,
}

impl ScanOutput {
    pub fn failed_points(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.setup_error.is_none() && self.failed_points() == 0
    }
}

enum Medium {
    AtRest {
        sys: LiouvilleSystem,
        v: CMatrix<f64>,
        diffusion: DiffusionMatrix,
    },
    Doppler(DopplerAverager<f64>),
}

impl Medium {
    fn new(config: &ScanConfig) -> Result<Self> {
        config.atom.validate()?;
        config.medium.validate()?;
        let sys = build_system(&config.atom, &config.drive)?;
        match config.medium.doppler {
            Some(spec) => Ok(Medium::Doppler(DopplerAverager::new(sys, spec)?)),
            None => {
                let steady = sys.steady_state()?;
                let diffusion = diffusion_matrix(&sys, &steady)?;
                let v = sys.coupling_v(&steady);
                Ok(Medium::AtRest { sys, v, diffusion })
            }
        }
    }

    fn spectrum(&self, c: f64, omega: f64) -> Result<Propagated<f64>> {
        let s0 = SpectralDensity4::coherent();
        match self {
            Medium::AtRest { sys, v, diffusion } => propagate(c, &field_response(sys, v, diffusion, omega)?, &s0),
            Medium::Doppler(avg) => avg.spectrum(c, &s0, omega),
        }
    }
}

fn powers(s: &SpectralDensity4, analysis: &Analysis) -> Result<QuadraturePowers> {
    let (s1_amp, s2_amp) = noise_powers(&rotate(s, &analysis.basis.with_theta(analysis.theta_amp)))?;
    let (s1_phase, s2_phase) = noise_powers(&rotate(s, &analysis.basis.with_theta(analysis.theta_phase)))?;
    Ok(QuadraturePowers {
        s1_amp,
        s1_phase,
        s2_amp,
        s2_phase,
    })
}

fn evaluate(medium: &Medium, config: &ScanConfig, analysis: &Analysis, omega: f64) -> Result<(Row, Vec<Event>)> {
    let out = medium.spectrum(config.medium.cooperativity, omega)?;
    let record = noise_record(&out.total, analysis, omega)?;
    let (semiclassical, quantum) = if config.decompose {
        (Some(powers(&out.semiclassical, analysis)?), Some(powers(&out.quantum, analysis)?))
    } else {
        (None, None)
    };
    Ok((
        Row {
            record,
            semiclassical,
            quantum,
        },
        out.events,
    ))
}

fn nan_row(config: &ScanConfig, omega: f64) -> Row {
    let decomposed = config.decompose.then(QuadraturePowers::nan);
    Row {
        record: NoiseRecord::nan(omega),
        semiclassical: decomposed,
        quantum: decomposed,
    }
}

/// Evaluates the output noise on every grid frequency. Points are computed
/// in parallel on the current rayon pool; results are in grid order and do
/// not depend on the number of workers.
pub fn run_scan(config: &ScanConfig) -> ScanOutput {
    let start = Instant::now();
    let grid = config.grid.points();
    let analysis = config.analysis.analysis();
    let medium = match Medium::new(config) {
        Ok(m) => m,
        Err(e) => {
            log::error!("setup failed: {e}");
            return ScanOutput {
                rows: grid.iter().map(|&w| nan_row(config, w)).collect(),
                points: grid
                    .iter()
                    .map(|&omega| PointReport {
                        omega,
                        events: Vec::new(),
                        error: Some(format!("setup failed: {e}")),
                    })
                    .collect(),
                setup_error: Some(e.to_string()),
                wall_time: start.elapsed(),
            };
        }
    };
    let results: Vec<(Row, PointReport)> = grid
        .par_iter()
        .map(|&omega| match evaluate(&medium, config, &analysis, omega) {
            Ok((row, events)) => (
                row,
                PointReport {
                    omega,
                    events: events.iter().map(ToString::to_string).collect(),
                    error: None,
                },
            ),
            Err(e) => {
                log::warn!("omega = {omega}: {e}");
                (
                    nan_row(config, omega),
                    PointReport {
                        omega,
                        events: Vec::new(),
                        error: Some(e.to_string()),
                    },
                )
            }
        })
        .collect();
    let (rows, points) = results.into_iter().unzip();
    ScanOutput {
        rows,
        points,
        setup_error: None,
        wall_time: start.elapsed(),
    }
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> std::result::Result<R, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}
