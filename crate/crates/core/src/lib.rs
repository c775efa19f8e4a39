//! Simulation laboratory for CSS-code quantum key distribution.
//!
//! The crate builds up from bit-packed GF(2) linear algebra to three
//! complete key-distribution state machines and the quantitative security
//! bounds that relate them:
//!
//! - [`gf2`]: dense GF(2) vectors and matrices (the substrate for every
//!   code, syndrome, and error pattern).
//! - [`css`]: nested binary code pairs (C2 ⊂ C1), codeword descriptions,
//!   syndrome-table decoding, and the binary-entropy rate formulas.
//! - [`statevector`]: a dense complex-amplitude simulator for small qubit
//!   counts, used as ground truth for operator identities and
//!   small-instance protocol equivalence.
//! - [`bell_frame`]: exact, scalable simulation of EPR pairs under Pauli
//!   noise in the Bell-basis error frame, including the purification step.
//! - [`adversary`]: pluggable eavesdropper models acting on qubits in
//!   transit, with mutual-information accounting where it is classically
//!   well defined.
//! - [`protocols`]: the purification, CSS-code, and BB84 protocol state
//!   machines plus the equivalence-testing harness.
//! - [`bounds`]: closed-form security-bound calculators and the
//!   check/code sampling experiment.
//! - [`crosscheck`]: random-circuit agreement checks between the frame
//!   simulator and the statevector oracle.
//!
//! All randomness flows through [`streams`], a seedable, versioned stream
//! scheme, so every run is replayable from a single master seed.

pub mod adversary;
pub mod bell_frame;
pub mod bounds;
pub mod crosscheck;
pub mod css;
pub mod gf2;
pub mod protocols;
pub mod statevector;
pub mod streams;

mod error;

pub use error::{Error, Result};

/// Measurement/preparation basis for single qubits: computational (Z) or
/// conjugate (X).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

/// Pauli axis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// The four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellState {
    PhiPlus,
    PsiPlus,
    PhiMinus,
    PsiMinus,
}

impl std::fmt::Display for BellState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BellState::PhiPlus => "Phi+",
            BellState::PsiPlus => "Psi+",
            BellState::PhiMinus => "Phi-",
            BellState::PsiMinus => "Psi-",
        };
        f.write_str(s)
    }
}
