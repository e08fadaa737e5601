//! IO companion for the quasi-periodic walk toolkit: JSON/CSV file formats,
//! reproducible experiment manifests, and the `evp-lab` command line front
//! end over the solvers and simulators of `evp-core`.

pub mod alpha_spec;
pub mod cli;
pub mod formats;
pub mod manifest;

pub use cli::run_cli;
