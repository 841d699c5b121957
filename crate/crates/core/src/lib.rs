//! Numerical toolkit for the quantum random energy model (QREM): a random
//! energy model on `n` Ising spins placed in a transverse field `Γ`.
//!
//! The crate covers disorder sampling and classical thermodynamics
//! ([`rem`], [`thermo`]), matrix-free application of the Hamiltonian
//! ([`hamiltonian`]), a thick-restart Lanczos eigensolver ([`eigensolver`]),
//! closed-form perturbative predictions ([`perturbation`]), minimal-gap
//! searches and ensemble scaling ([`gap`]), real-time annealing ([`anneal`])
//! and the large-p instanton estimates ([`instanton`]).

pub mod anneal;
pub mod eigensolver;
pub mod error;
pub mod gap;
pub mod hamiltonian;
pub mod instanton;
pub mod output;
pub mod perturbation;
pub mod rem;
pub mod rng;
pub mod stats;
pub mod thermo;

mod golden;
mod linalg;

pub use error::{QremError, Result};
pub use hamiltonian::{FieldedHamiltonian, QuantumState};
pub use rem::RemInstance;
