//! Sequentialization toolkit for finite automata networks.
//!
//! A network `h` is a transformation of `[0,q)^n` updated either in
//! parallel (apply `h`) or sequentially along a permutation of the
//! coordinates. This crate computes the cost of sequentialization — the
//! number of extra automata needed to simulate the parallel behaviour
//! sequentially — through confusion-graph coloring, synthesizes explicit
//! sequentializing networks with machine-checked certificates, generates
//! the extremal families realizing the known lower bounds, relates the
//! cost to procedural complexity and to the pathwidth of the interaction
//! graph, and includes brute-force engines for exhaustive ground truth.

pub mod coloring;
pub mod confusion;
pub mod error;
pub mod json;
pub mod network;
pub mod oracle;
pub mod pathwidth;
pub mod procedural;
pub mod schedule;
pub mod space;
pub mod synthesis;
pub mod witnesses;

pub use error::{Error, Result};
pub use network::{AutomataNetwork, InteractionGraph};
pub use schedule::{Schedule, UpdateWord};
pub use space::Space;
