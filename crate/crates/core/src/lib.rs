//! Projective-simulation agents, classical and Hamiltonian-evolution, that
//! learn the invasion game alone or in interacting pairs.
//!
//! * [`classical`]: weighted clip graph, random-walk deliberation, damped
//!   reward update.
//! * [`excitation`]: clips as excitation modes, quantum-walk deliberation in
//!   the single-excitation sector, optional Lindblad noise.
//! * [`compressed`]: percepts stored in one `d`-level register driving one
//!   qubit per action.
//! * [`environment`]: the game, trial records, interaction protocols and
//!   learning curves.
//! * [`harness`]: configuration files, seeded ensembles, CSV and SVG output.
//!
//! The guide under `book/` walks through each model; its code listings are
//! compiled and run as doc-tests of this crate.

// `!(x >= 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod classical;
pub mod clip;
pub mod compressed;
pub mod dynamics;
pub mod environment;
pub mod error;
pub mod excitation;
pub mod harness;
pub mod numerics;

pub use agent::{Agent, Deliberation};
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/classical.md")]
    mod classical {}
    #[doc = include_str!("../../../book/src/excitation.md")]
    mod excitation {}
    #[doc = include_str!("../../../book/src/compressed.md")]
    mod compressed {}
    #[doc = include_str!("../../../book/src/environment.md")]
    mod environment {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
