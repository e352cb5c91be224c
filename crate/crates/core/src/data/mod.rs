//! Long-format CSV and draw-store I/O, the synthetic generator and JSON run configuration.

pub mod config;
pub mod csv;
pub mod synthetic;

pub use self::config::{parse_config, parse_config_str, PriorConfig, RunConfig};
pub use self::csv::{
    read_draws_csv, read_long_csv, read_long_table, write_draws_csv, write_long_table, DrawStore,
};
pub use self::synthetic::{generate_synthetic, generate_synthetic_table, NoiseMode, SyntheticSpec};
