//! Field-free and laser-driven rotational wavepackets of linear molecules.
//!
//! A nonresonant pulse couples rotor levels `J ↔ J±2` through the
//! polarizability anisotropy. After the pulse, each thermally populated
//! `|J M⟩` state evolves as a superposition whose phases rephase at
//! fractions of the revival period `1/(2Bc)`. This crate propagates a
//! thermal ensemble through the pulse and reduces it to the alignment
//! trace `⟨cos²θ⟩(t)`, the angular density carpet, a detector-cone
//! signal, and the beat spectrum of the trace.
//!
//! ```
//! use rotwave::config::MoleculeSpec;
//! let d2 = MoleculeSpec::deuterium();
//! assert!((d2.revival_period() - 547.8).abs() < 0.1);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod angular;
pub mod config;
pub mod constants;
pub mod error;
pub mod observables;
pub mod quadrature;
pub mod rotor;
pub mod thermal;

pub use config::{load_config, load_config_with_overrides, Config, MoleculeSpec, PulseSpec, RunConfig};
pub use error::{Error, Result};
pub use observables::{AlignmentTrace, QuantumCarpet, ThetaGrid, TimeSeries};
pub use rotor::{PulseKernel, RotorState};
pub use thermal::{build_ensemble, PopulationTable, ThermalEnsemble};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/rotor-states.md")]
    mod rotor_states {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/thermal.md")]
    mod thermal {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
