//! Equilibrium thermodynamics of a damped quantum harmonic oscillator and of
//! a free quantum Brownian particle at finite coupling to a heat bath.
//!
//! Every closed form is paired with an independent numerical route:
//! Matsubara sums ([`matsubara`]) and direct spectral quadrature
//! ([`quadrature`]). All quantities are in reduced units with
//! ħ = k_B = M = 1 (see [`units`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod free_particle;
pub mod matsubara;
pub mod oscillator;
pub mod quadrature;
pub mod report;
pub mod specfun;
pub mod units;

pub use error::{Error, Result};
pub use specfun::ComplexValue;
pub use units::{make_reduced, ReducedParams, Tolerances};

/// Which prescription produced an energy or specific heat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrescriptionTag {
    /// ⟨H_S⟩, the system energy evaluated with the full canonical state.
    EnergyRoute,
    /// −∂ ln Z/∂β with Z the reduced partition function.
    PartitionRoute,
}

impl PrescriptionTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PrescriptionTag::EnergyRoute => "energy",
            PrescriptionTag::PartitionRoute => "partition",
        }
    }
}
