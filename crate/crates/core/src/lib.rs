//! Gathering of anonymous mobile agents with different wake-up times.
//!
//! Agents appear at their start points at individual times, move at unit
//! speed and can exchange everything they know when they come within the
//! visibility radius of each other. This crate classifies initial
//! configurations, simulates agent programs on them exactly (event by
//! event, no time stepping) and provides the dedicated and universal
//! gathering algorithms.

pub mod algorithms;
pub mod assumption;
pub mod config;
pub mod engine;
pub mod geometry;
pub mod sweep;
