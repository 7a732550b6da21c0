//! Monte Carlo sweeps, config files, CSV/JSON artifacts and the command
//! line front end for `ofdm-bitload-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config_file;
pub mod error;
pub mod experiments;
pub mod output;

pub use error::{Result, SimError};
