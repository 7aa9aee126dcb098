//! Core library for GEST (Graphs of Events in Space and Time).
//!
//! A [`GestGraph`](model::GestGraph) represents a story as events (nodes)
//! connected by temporal and causal relations (edges). This crate provides:
//!
//! - the graph data model with validation and hierarchical
//!   collapse/expand ([`model`], [`hierarchy`]),
//! - a plain-text canonical serialization ([`canonical`]),
//! - rule-based extraction of graphs from controlled English ([`text`]),
//! - word-embedding phrase similarity ([`embed`]),
//! - spectral matching between graphs ([`matching`]),
//! - evaluation metrics for scored pair tables ([`metrics`]) and
//!   text-overlap baselines ([`textsim`]).
//!
//! The crate is `no_std` (it requires `alloc`) so the model and the
//! algorithms can be embedded anywhere; file formats, IO and the CLI live
//! in the companion `gest` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod canonical;
pub mod embed;
pub mod hierarchy;
pub mod matching;
pub mod metrics;
pub mod model;
pub mod text;
pub mod textsim;

#[cfg(feature = "testgen")]
pub mod testgen;

pub use model::{Event, EventId, EventRef, GestGraph, RefKind, Relation, RelationKind, Timeframe};
