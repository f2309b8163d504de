//! Finite-volume simulation of isentropic gas dynamics on networks of 1-D
//! arcs. Junctions couple the arcs through a permeable transmission
//! condition `q* = kappa (rho*_l - rho*_r)` that conserves mass while
//! allowing density jumps; interior cells are advanced by a two-speed
//! relaxation (HLL) scheme.
//!
//! The crate provides the pointwise gas algebra ([`model`]), the network
//! data model and configuration format ([`network`], [`config`]), the
//! per-arc scheme ([`grid`]), two interchangeable junction solvers
//! ([`junction_relax`], [`junction_riemann`]), the time loop with its
//! mass/entropy monitors ([`sim`]), and convergence/decay study drivers
//! ([`studies`], [`output`]).

pub mod config;
pub mod error;
pub mod grid;
pub mod junction_relax;
pub mod junction_riemann;
pub mod model;
pub mod network;
pub mod output;
pub mod sim;
pub mod studies;

pub use error::{Diagnostic, Error, Result};
pub use model::{PressureLaw, Regime, State};
