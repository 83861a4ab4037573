//! Deterministic railway collision handling core.
//!
//! Models a railway network as a multigraph of stations, junctions, and
//! tracks, detects imminent head-on and rear-end collisions from kinematic
//! predicates, and resolves them with decentralized max-sum message passing
//! over factor graphs (with a priority rule at junctions).
//!
//! The crate is `no_std` + `alloc` compatible: everything here is pure
//! computation over owned collections, so the same core can run embedded on
//! train-side hardware. IO, scenario files, and the CLI live in the
//! companion `railguard-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod coordination;
pub mod detection;
pub mod kinematics;
pub mod maxsum;
pub mod net;
pub mod sim;

pub use coordination::{AgentId, DecisionSet, PriorityClass, ResolutionMode};
pub use detection::{CollisionIncident, IncidentKind};
pub use kinematics::KinematicConstants;
pub use maxsum::{Action, Assignment, FactorGraph};
pub use net::{Direction, RailNetwork, TrainState};
pub use sim::{Mode, Scenario, SimConfig, SimReport};
