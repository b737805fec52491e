//! Command-line front end for coupled uncertainty studies: JSON configs in,
//! JSON reports and CSV tables out.

pub mod commands;
pub mod config;
pub mod report;
