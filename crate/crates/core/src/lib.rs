//! Iterative localization of dense in-body nanonode swarms, with the
//! supporting channel, MAC, energy and routing models.

pub mod channel;
pub mod config;
pub mod energy;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod localization;
pub mod mac;
pub mod report;
pub mod routing;
