//! Equilibrium structure of translation-invariant mean-field particle
//! systems: centered Gibbs measures and their MCMC samplers, free-energy and
//! rate-function calculus on grid densities, metrics on translation orbits of
//! empirical measures, and desk-scale estimation of large-deviation slopes,
//! with an application to ranked market-weight (capital distribution) curves.
//!
//! The crate is organized around the pipeline
//! `models -> sampler -> measures / densities -> ldp -> spt`, with the
//! `cli` module tying the pieces to files and subcommands.

pub mod cli;
pub mod config;
pub mod confining;
pub mod densities;
pub mod error;
pub mod ldp;
pub mod measures;
pub mod models;
pub mod numerics;
pub mod sampler;
pub mod spt;

pub use error::{Error, Result};
