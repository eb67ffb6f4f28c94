//! Batch experiment runner for optimal-potential problems: config parsing,
//! solver dispatch, and machine-readable results.

pub mod config;
pub mod profile;
pub mod recipes;
pub mod record;
pub mod runner;
pub mod sweep;
