//! Simulation toolkit for multi-agent consensus under state-dependent
//! information transmission.
//!
//! Agents exchange information over an undirected graph whose interaction
//! weights shrink as the squared distance between agent states grows. With
//! bounded-confidence weights the links themselves appear and disappear as
//! the agents move, so whether a run reaches consensus depends on the initial
//! configuration. This crate provides:
//!
//! - the weight families and their integrals, plus the staircase
//!   under-approximation of the integral used by the discrete-time energy
//!   functions ([`weight`]),
//! - state-dependent Laplacian assembly with spectral and connectivity
//!   queries ([`graph`]),
//! - first- and second-order control laws in continuous time (fixed-step RK4)
//!   and discrete time (exact map iteration) ([`dynamics`]),
//! - energy monitors, disagreement projections, and consensus detection
//!   along trajectories ([`monitors`]),
//! - gain constraints and initial-state criteria that certify consensus in
//!   advance, together with closed-form consensus values ([`conditions`]),
//! - reproducible scenario fixtures for flocking-style weights,
//!   bounded-confidence opinion dynamics, and planar rendezvous
//!   ([`scenario`]).
//!
//! Everything is deterministic: fixed integration steps, seeded generators,
//! and stable text formats for scenarios and trajectories.
//!
//! # Example
//!
//! Two opinions a confidence-radius apart contract to their average under
//! the sharp-step discrete update:
//!
//! ```
//! use consensus_core::dynamics::{simulate, Horizon, ProtocolSpec, SystemState};
//! use consensus_core::graph::WeightedGraph;
//! use consensus_core::monitors::{detect_consensus, Verdict};
//! use consensus_core::weight::WeightFunction;
//!
//! let weight = WeightFunction::step_confidence(1.0)?;
//! let graph = WeightedGraph::state_dependent(2);
//! let law = ProtocolSpec::dt1_state_dep(0.5)?;
//! let start = SystemState::first_order(2, 1, vec![0.0, 0.9])?;
//! let record = simulate(&law, &graph, &weight, &start, Horizon::Steps(60), 1, &[], 0.0)?;
//! let verdict = detect_consensus(&record, 1e-3, 1e-3);
//! assert_eq!(verdict, Verdict::Consensus { average: true, value: vec![0.45] });
//! # Ok::<(), consensus_core::Error>(())
//! ```

// Index loops over square matrices and adjacency are the house style here;
// negated comparisons double as NaN rejection in parameter guards.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod monitors;
pub mod rng;
pub mod scenario;
pub mod weight;

pub use error::{Error, Result};
