//! Multi-agent path planning without a shared clock.
//!
//! Agents are given fixed vertex paths and then move asynchronously: an
//! external scheduler repeatedly activates one agent, which advances along
//! its path when the next vertex is free and otherwise stays put. A set of
//! paths is feasible when every fair activation sequence brings every agent
//! to its goal, no matter how activations interleave. Planning happens once,
//! offline; execution needs no communication and tolerates arbitrary delays.
//!
//! The crate provides:
//!
//! - [`graph`]: sparse graphs, grid-map and edge-list formats, and the
//!   constrained breadth-first searches the planners are built on.
//! - [`instance`]: start/goal assignments, random instance generation, and
//!   a reduction from 3-SAT that makes feasible path sets exist exactly for
//!   satisfiable formulas.
//! - [`fragment`]: the incremental deadlock detector. It maintains chains
//!   of agent moves ("fragments") whose concatenations witness every
//!   potential cyclic deadlock, optionally bounded to cycles of at most `m`
//!   agents.
//! - [`solver`]: two planners built on the detector. Prioritized planning
//!   commits paths greedily and restarts with new priority orders;
//!   conflict-based planning branches on detected cycles and is complete
//!   for the unbounded detector.
//! - [`verify`]: ground truth. An exhaustive search over reachable
//!   configurations decides feasibility exactly, counts optimal activations,
//!   and classifies deadlocks; a seeded random executor samples runs.
//! - [`mapfdp`]: execution under per-agent delay probabilities, plus a
//!   time-stamped baseline planner and the minimal-communication policy
//!   that keeps its visit orders sound under delays.
//! - [`fixtures`]: small scenarios with known behavior, shared by tests
//!   and benchmarks.

pub mod fixtures;
pub mod fragment;
pub mod graph;
pub mod instance;
pub mod mapfdp;
pub mod solver;
pub mod verify;

pub use fragment::{detect, Fragment, FragmentTables};
pub use graph::{EdgeConstraintSet, Graph, Path, Vertex};
pub use instance::{Formula3Sat, Instance};
pub use solver::Solution;
