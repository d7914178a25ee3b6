//! Simulator for a three-user quantum summation protocol built from
//! single-particle states.
//!
//! Two preparers mail random computational- and diagonal-basis particles to
//! a measurer, who fuses position-matched pairs in the entangled basis and
//! announces coarse labels; surviving pairs give all three users key bits
//! that cancel, so publicly XORing their masked secrets reveals exactly the
//! three-way XOR and nothing else. The crate provides the exact
//! measurement statistics ([`quantum`]), the protocol state machine
//! ([`protocol`]), a gallery of adversaries with their closed-form detection
//! probabilities ([`attack`]) and the deterministic random streams that make
//! every run replayable ([`rng`]).

pub mod attack;
pub mod protocol;
pub mod quantum;
pub mod rng;
