//! Exact-rational toolkit for studying sparse cutting-plane closures of
//! small mixed-integer linear programs.
//!
//! The crate provides:
//! - an instance model with a line-oriented text format (`instance`),
//! - an exact rational LP/MILP kernel with a sparse-closure oracle (`kernel`),
//! - interaction graphs and mixed stable sets over block partitions (`graph`),
//! - fractional/integer mixed chromatic numbers and related bounds (`bounds`),
//! - an iterative cut-closure estimator driven by a separation LP (`estimator`),
//! - instance families with known exact closure/IP value pairs and random
//!   block-structured generators (`constructions`),
//! - an experiment harness producing per-instance ratio reports (`experiment`).
//!
//! All arithmetic is exact rational; results like 13/9 are equalities, not
//! approximations.

pub mod instance;
pub mod simplex;
pub mod kernel;
pub mod graph;
pub mod bounds;
pub mod estimator;
pub mod constructions;
pub mod experiment;

pub use instance::{Axis, BlockPartition, Cut, Instance, Kind, Relation, Row, Sense, VarKind, Q};
