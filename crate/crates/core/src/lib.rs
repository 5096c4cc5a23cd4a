//! Kinodynamic motion planning with precomputed edge bundles.

pub mod baselines;
pub mod bench;
pub mod bundle;
pub mod dynamics;
pub mod error;
pub mod planner;
pub mod spatial;
pub mod strategy;
pub mod world;
