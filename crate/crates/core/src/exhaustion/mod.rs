//! ε-sweeps over coordinate exhaustions: configuration, limit fits, causal
//! reports and output files.

pub mod config;
pub mod cone;
pub mod output;
pub mod sweep;
pub mod verify;

pub use config::{AlphaConfig, AlphaRule, BranchConfig, GridConfig, OutputConfig, Schedule, SweepConfig, Tolerances};
pub use cone::{cone_pairing_report, cone_pairing_report_with, cone_samples, fibonacci_sphere, ConeReport};
pub use output::{read_summary, render_report, write_outputs, write_summary, write_sweep_csv};
pub use sweep::{fit_window, limit_tolerance, run_stage, run_sweep, Diagnostics, EpsilonRecord, LimitVector, MassSweepRecord, Stage};
pub use verify::{verify_identities, IdentityCheck, VerifyReport};
