//! Spectral analysis of second-order elliptic operators on products of unit
//! intervals under the nonlocal boundary condition u|∂D = ∫_D u dν, where ν is
//! a probability measure on the open domain ("jump measure").
//!
//! The operator generates a diffusion that restarts from a ν-distributed point
//! each time it hits the boundary. This crate computes the nonzero eigenvalue
//! spectrum and the spectral gap γ₁(ν) — the exponential rate of convergence
//! of that process to its invariant measure — by three independent routes:
//!
//! * a secular-series method built on the Dirichlet eigenbasis ([`basis`],
//!   [`measure`], [`secular`], [`spectrum`]),
//! * a finite-difference discretization with a dense eigensolver ([`oracle`]),
//! * Monte Carlo simulation of the jump diffusion ([`sim`]).
//!
//! The [`series`] and [`cube`] modules evaluate the lattice sums that decide
//! whether the gap on the unit cube with uniform jump measure sticks at the
//! second Dirichlet eigenvalue or detaches from it as the dimension grows.

pub mod basis;
pub mod contour;
pub mod cube;
pub mod domain;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod roots;
pub mod secular;
pub mod series;
pub mod sim;
pub mod spectrum;

pub use basis::{EigenBasis, EigenEntry, ReversibleMeasure};
pub use domain::{DomainSpec, IntervalFactor};
pub use error::{Error, Result};
pub use measure::JumpMeasure;
pub use secular::SecularFunction;
pub use spectrum::{SpectrumReport, spectrum_report};
