//! Configuration files, figure presets and CSV output used by the `smmc`
//! binary.

pub mod config;
pub mod output;
pub mod preset;

pub use config::{parse_config, parse_config_file, Overrides};
pub use output::{read_csv, write_curve_csv, CsvRow};
pub use preset::{figure_preset, run_figure, CurveSpec, FigurePreset, FIGURES};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SMMC_OUT_DIR";
