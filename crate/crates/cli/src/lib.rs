//! Config-driven sweeps, error-cumulant root finding and waveform export
//! on top of `zzcm-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::{CliError, Result};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "ZZCM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "out";

/// `--out`, then `$ZZCM_OUT_DIR`, then the config value, then `out`.
pub fn resolve_out_dir(flag: Option<std::path::PathBuf>, config: Option<&std::path::Path>) -> std::path::PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(Into::into))
        .or_else(|| config.map(|p| p.to_path_buf()))
        .unwrap_or_else(|| DEFAULT_OUT_DIR.into())
}
