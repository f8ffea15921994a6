pub mod grid;
pub mod gridworld;
pub mod mapping;
pub mod alignment;
pub mod coordination;
pub mod agent;
pub mod metrics;
pub mod harness;
