//! Parallel noise-spectrum scans driven by JSON configuration files.
//!
//! ```no_run
//! let file = atomnoise::config::validate_config(
//!     r#"{"Fg": 0, "Fe": 1, "delta": 0, "omega_r": 0.3, "C": 1}"#,
//! ).unwrap();
//! let out = atomnoise::scan::run_scan(&file.runs[0]);
//! println!("{}", atomnoise::output::csv_text(&out, false));
//! ```

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;
pub mod scan;

pub use config::{validate_config, ConfigError, ScanConfig};
pub use scan::{run_scan, ScanOutput};
