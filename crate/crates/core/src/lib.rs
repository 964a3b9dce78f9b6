//! Distributed link scheduling for tree-topology mmWave backhaul networks,
//! simulated one subframe at a time.

pub mod capacity;
pub mod engine;
pub mod metrics;
pub mod node;
pub mod optimizer;
pub mod scenario;
pub mod topology;
pub mod traffic;
