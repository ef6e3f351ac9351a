//! Configuration, orchestration and serialisation for the `sdns` binary.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod manifest;
pub mod validate;

pub use commands::{run, Command, Outcome};
pub use config::{parse_config, Form, RunConfig};
