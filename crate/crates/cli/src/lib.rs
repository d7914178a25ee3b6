//! Batch driver and reporting for the three-user summation simulator.
//!
//! [`runner`] executes seeded Monte Carlo batches of protocol runs,
//! [`report`] aggregates them into stable machine-readable documents, and
//! [`efficiency`] evaluates the exact qubit-efficiency comparison. The
//! `qsum3` binary wraps these behind a command line.

pub mod efficiency;
pub mod report;
pub mod runner;
