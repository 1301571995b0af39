//! Evolutionary design of elastic flapping wings.
//!
//! A wing is a chain of flat blades joined by torsion-wire hinges. Genotypes
//! (a compositional pattern-producing network plus a list of expression
//! entries) express into wings, a quasi-static blade-element model simulates
//! them, NSGA-II searches for lift/efficiency trade-offs and the `transfer`
//! module relates predicted and measured lift to wing complexity.

pub mod aero;
pub mod evolve;
pub mod genotype;
pub mod transfer;
pub mod wing;
