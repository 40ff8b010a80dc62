//! Command-line front end for the DSTM link simulation toolkit:
//! configuration loading, figure-style sweep presets, CSV and manifest
//! emission, and gnuplot script generation.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod presets;
