//! Experiment harness for reconfigurable-observation Kalman filtering:
//! seeded system generation, steady-state sweeps over the power budget,
//! oracle cross-checks, and CSV/SVG output.

pub mod config;
pub mod error;
pub mod oracles;
pub mod output;
pub mod sweep;
pub mod system;

pub use config::{ExperimentConfig, PolicyName};
pub use error::{HarnessError, Result};
pub use sweep::{run_sweep, SweepRow};
pub use system::{generate_system, generate_systems, Systems};
