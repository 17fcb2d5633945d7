//! Finite-lattice algebra and a multi-valued cognitive map (MVCM) engine.
//!
//! The crate provides:
//!
//! - validated finite bounded lattices with joins, meets, internal
//!   implication, monoid multiplication with residuals, and a ring-of-sets
//!   reading of elements as atom sets ([`lattice`]);
//! - multi-valued sets (values in one lattice, confidence degrees in
//!   another) and the extension principle that propagates confidences
//!   through lattice terms ([`mvset`], [`term`]);
//! - pessimistic/optimistic set means and a difference measure for
//!   aggregating partially ordered assessments ([`aggregation`]);
//! - the multi-valued cognitive map iteration engine with convergence
//!   coefficients, cycle correction, branch enumeration over several expert
//!   weight matrices, and trace tables ([`mvcm`]);
//! - a text DSL for lattices, sets, terms, and maps, with canonical
//!   serialization and built-in fixtures ([`textio`]).

pub mod aggregation;
pub mod lattice;
pub mod mvcm;
pub mod mvset;
pub mod term;
pub mod textio;
