//! Scenario files, sweeps, CSV output and figure presets.

pub mod config;
pub mod extrema;
pub mod figures;
pub mod output;
pub mod sweep;

pub use config::{ConfigError, Engine, Precoder, ScenarioConfig};
pub use extrema::{find_extrema, ExtremumKind};
pub use figures::{report_figure, Figure, FigureReport, LandmarkCheck, ReportError, ReportOptions};
pub use output::{emit_csv, read_extrema, read_rows, OutputError};
pub use sweep::{resolve_workers, run_sweep, Extremum, SweepError, SweepResult, SweepRow, WORKERS_ENV};
