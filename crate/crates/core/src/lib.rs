//! Pulse design and open-system simulation for a cavity-assisted Raman
//! spin/photon interface.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`], [`envelope`], [`params`], [`state`], [`metrics`], [`units`]:
//!   shared numeric foundation (time grids, sampled complex envelopes,
//!   Hilbert-space bookkeeping, fidelity and entropy).
//! * [`designer`]: closed-form inversion of a target single-photon
//!   wavepacket into the controlling Rabi-frequency envelope.
//! * [`reduced`]: the resonant three-amplitude model with channel
//!   input/output, used as the loss-free oracle for the designer.
//! * [`node`]: one node beyond the resonant approximation (four levels,
//!   truncated cavity Fock space, off-resonant couplings, losses).
//! * [`network`]: cascaded two-node protocols with a master-equation solver
//!   and a Monte Carlo trajectory engine.

pub mod designer;
pub mod envelope;
pub mod error;
pub mod grid;
pub mod metrics;
pub mod network;
pub mod node;
pub mod ode;
pub mod open;
pub mod operator;
pub mod params;
pub mod reduced;
pub mod state;
pub mod units;

pub use num_complex::Complex64 as C64;

pub use crate::envelope::{wavepacket_inner, ComplexEnvelope, Wavepacket};
pub use crate::error::{Error, Result};
pub use crate::grid::TimeGrid;
pub use crate::params::SystemParams;
pub use crate::state::{DensityMatrix, Level, NodeSpace, PureState, QubitAmplitudes};
