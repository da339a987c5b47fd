//! Command-line front end and on-disk formats for the `progtrans-core`
//! algorithms.

pub mod cli;
pub mod config;
pub mod formats;
pub mod manifest;
pub mod pipeline;
pub mod stages;
