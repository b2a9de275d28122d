//! Monitored random circuits on qubit chains.
//!
//! A brickwork of two-qubit gates interleaved with projective Z measurements
//! is simulated exactly on a dense statevector ([`state`], [`circuit`]).
//! Reduced states of small spin tuples ([`density`]) are scored by
//! multipartite entanglement criteria found by multistart simplex search
//! ([`measures`], [`optimize`]). The event log of each realization defines a
//! spacetime graph whose minimal subgraphs explain where entanglement can
//! live ([`graph`]). Ensembles are streamed to disk ([`ensemble`],
//! [`dataset`]) and their decay with separation is fitted to power laws
//! ([`scaling`]).

pub mod circuit;
pub mod dataset;
pub mod density;
pub mod ensemble;
pub mod error;
pub mod graph;
pub mod measures;
pub mod optimize;
pub mod positions;
pub mod scaling;
pub mod state;

pub use error::{Error, Result};
