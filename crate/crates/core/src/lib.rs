//! Mapped temporal task planning over a two-level logic knowledge base.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`parser`] reads the KB text format into a [`Problem`].
//! 2. [`planner`] finds a high-level total-order plan by depth-first search and
//!    expands every mapped high-level action into its low-level snap actions.
//! 3. [`enablers`] lifts the total order to a partial order (the enabler
//!    matrix) and extracts the resource catalog.
//! 4. [`schedule`] allocates resource instances, minimises the makespan
//!    exactly, validates the result and derives a simple temporal network.
//! 5. [`bt`] turns the network into a behaviour tree.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bt;
pub mod diagnostic;
pub mod enablers;
pub mod model;
pub mod parser;
pub mod planner;
pub mod schedule;
pub mod term;
pub mod unify;

pub use diagnostic::{Diagnostic, DiagnosticCode, Severity};
pub use model::{
    canonical_state, pair_snap_actions, DurationBounds, DurativeAction, Effect, EffectOp,
    GroundingItem, KnowledgeBase, Level, Mapping, Origin, PlanStep, Problem, ResourcePattern,
    SnapAction, SnapKind, State, TOPlan,
};
pub use term::{Literal, Symbol, Term};
pub use unify::Bindings;
