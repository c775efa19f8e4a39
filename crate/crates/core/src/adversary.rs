//! Eavesdropper models acting on qubits in transit.
//!
//! All models are position-oblivious: when Eve touches the qubits she
//! does not yet know which positions will become check bits, so an attack
//! can never condition on that designation. Pauli-class models act on
//! either representation (Bell frame or prepared-qubit stream) with
//! identical induced error statistics; intercept-resend is defined only
//! on the qubit stream, where Eve's classical record is well defined.
//!
//! Samplers draw a fixed number of values per position regardless of the
//! outcome, so runs with common random numbers stay aligned across
//! parameter grids.

use rand::{Rng, RngExt};

use crate::bell_frame::BellFrameState;
use crate::gf2::BitVector;
use crate::{Basis, Error, Result};

/// Attack selection.
#[derive(Clone, Debug, PartialEq)]
pub enum AttackModel {
    /// Identity channel.
    None,
    /// Independent Pauli noise per position: X with probability px, Y
    /// with py, Z with pz.
    IidPauli { px: f64, py: f64, pz: f64 },
    /// Eve measures each position (independently, with the given
    /// probability) in a uniformly random basis and resends her outcome.
    InterceptResend { fraction: f64 },
    /// A fixed Pauli pattern: positions in `bit_err` get a bit flip,
    /// positions in `phase_err` a phase flip (both = Y).
    FixedPattern {
        bit_err: BitVector,
        phase_err: BitVector,
    },
}

impl AttackModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            AttackModel::None => Ok(()),
            AttackModel::IidPauli { px, py, pz } => {
                let sum = px + py + pz;
                if [px, py, pz].iter().any(|&&p| !(0.0..=1.0).contains(&p)) || sum > 1.0 + 1e-12 {
                    Err(Error::Domain {
                        what: "px + py + pz",
                        value: sum,
                        domain: "nonnegative with sum <= 1",
                    })
                } else {
                    Ok(())
                }
            }
            AttackModel::InterceptResend { fraction } => {
                if !(0.0..=1.0).contains(fraction) {
                    Err(Error::Domain {
                        what: "fraction",
                        value: *fraction,
                        domain: "[0, 1]",
                    })
                } else {
                    Ok(())
                }
            }
            AttackModel::FixedPattern { bit_err, phase_err } => {
                if bit_err.len() != phase_err.len() {
                    Err(Error::Dimension {
                        context: "FixedPattern",
                        expected: bit_err.len(),
                        got: phase_err.len(),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Whether the model is a Pauli channel, i.e. representable in the
    /// Bell error frame.
    pub fn frame_compatible(&self) -> bool {
        !matches!(self, AttackModel::InterceptResend { .. })
    }
}

/// One intercepted position: the basis Eve measured in and what she saw.
#[derive(Clone, Debug)]
pub struct Intercept {
    pub position: usize,
    pub basis: Basis,
    pub observed: bool,
}

/// What Eve ends up holding after one transmission.
#[derive(Clone, Debug, Default)]
pub struct EveRecord {
    /// Applied Pauli pattern, for Pauli-class attacks.
    pub pauli_bit: Option<BitVector>,
    pub pauli_phase: Option<BitVector>,
    /// Per-position measurement records, for intercept-resend.
    pub intercepts: Vec<Intercept>,
}

impl EveRecord {
    pub fn intercept_at(&self, position: usize) -> Option<&Intercept> {
        self.intercepts.iter().find(|i| i.position == position)
    }
}

/// Samples the (bit, phase) flip pattern a Pauli-class model induces on
/// `positions` slots. Errors on intercept-resend, which has no Pauli
/// pattern.
pub fn sample_pauli_pattern<R: Rng>(
    model: &AttackModel,
    positions: usize,
    rng: &mut R,
) -> Result<(BitVector, BitVector)> {
    model.validate()?;
    match model {
        AttackModel::None => Ok((BitVector::zeros(positions), BitVector::zeros(positions))),
        AttackModel::FixedPattern { bit_err, phase_err } => {
            if bit_err.len() != positions {
                return Err(Error::Dimension {
                    context: "sample_pauli_pattern",
                    expected: positions,
                    got: bit_err.len(),
                });
            }
            Ok((bit_err.clone(), phase_err.clone()))
        }
        AttackModel::IidPauli { px, py, pz } => {
            let mut bit = BitVector::zeros(positions);
            let mut phase = BitVector::zeros(positions);
            for i in 0..positions {
                let u: f64 = rng.random();
                if u < *px {
                    bit.set(i, true);
                } else if u < px + py {
                    bit.set(i, true);
                    phase.set(i, true);
                } else if u < px + py + pz {
                    phase.set(i, true);
                }
            }
            Ok((bit, phase))
        }
        AttackModel::InterceptResend { .. } => Err(Error::Unsupported(
            "intercept-resend has no Pauli-pattern representation".to_string(),
        )),
    }
}

/// Applies a Pauli-class attack to the travelling halves of an EPR-pair
/// frame state. Position-oblivious by construction.
pub fn attack_bell_frame<R: Rng>(
    model: &AttackModel,
    state: &mut BellFrameState,
    rng: &mut R,
) -> Result<EveRecord> {
    if !model.frame_compatible() {
        return Err(Error::Unsupported(
            "intercept-resend is not defined on EPR halves in the frame representation"
                .to_string(),
        ));
    }
    let (bit, phase) = sample_pauli_pattern(model, state.n(), rng)?;
    state.apply_pattern(&bit, &phase)?;
    Ok(EveRecord {
        pauli_bit: Some(bit),
        pauli_phase: Some(phase),
        intercepts: Vec::new(),
    })
}

/// A qubit prepared in one of the four BB84 states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PreparedQubit {
    pub basis: Basis,
    pub bit: bool,
}

/// Measures a BB84-state qubit in the given basis: matching bases read
/// the prepared bit; conjugate bases give a fair coin.
pub fn measure_in_basis<R: Rng>(qubit: PreparedQubit, basis: Basis, rng: &mut R) -> bool {
    let coin: bool = rng.random();
    if qubit.basis == basis {
        qubit.bit
    } else {
        coin
    }
}

/// Applies an attack to a stream of prepared qubits, returning what Bob
/// receives and Eve's record.
///
/// Pauli channels act exactly on BB84 states: a bit flip toggles
/// Z-basis-encoded bits, a phase flip toggles X-basis-encoded bits, and Y
/// toggles both encodings. Intercept-resend measures in a random basis
/// and forwards the outcome state.
pub fn attack_qubit_stream<R: Rng>(
    model: &AttackModel,
    qubits: &[PreparedQubit],
    rng: &mut R,
) -> Result<(Vec<PreparedQubit>, EveRecord)> {
    model.validate()?;
    match model {
        AttackModel::None => Ok((qubits.to_vec(), EveRecord::default())),
        AttackModel::IidPauli { .. } | AttackModel::FixedPattern { .. } => {
            let (bit, phase) = sample_pauli_pattern(model, qubits.len(), rng)?;
            let received = qubits
                .iter()
                .enumerate()
                .map(|(i, q)| {
                    let flip = match q.basis {
                        Basis::Z => bit.get(i),
                        Basis::X => phase.get(i),
                    };
                    PreparedQubit {
                        basis: q.basis,
                        bit: q.bit ^ flip,
                    }
                })
                .collect();
            Ok((
                received,
                EveRecord {
                    pauli_bit: Some(bit),
                    pauli_phase: Some(phase),
                    intercepts: Vec::new(),
                },
            ))
        }
        AttackModel::InterceptResend { fraction } => {
            let mut received = Vec::with_capacity(qubits.len());
            let mut intercepts = Vec::new();
            for (i, q) in qubits.iter().enumerate() {
                // Fixed draw count per position.
                let u: f64 = rng.random();
                let basis_coin: bool = rng.random();
                let outcome_coin: bool = rng.random();
                if u < *fraction {
                    let basis = if basis_coin { Basis::X } else { Basis::Z };
                    let observed = if q.basis == basis { q.bit } else { outcome_coin };
                    received.push(PreparedQubit {
                        basis,
                        bit: observed,
                    });
                    intercepts.push(Intercept {
                        position: i,
                        basis,
                        observed,
                    });
                } else {
                    received.push(*q);
                }
            }
            Ok((
                received,
                EveRecord {
                    pauli_bit: None,
                    pauli_phase: None,
                    intercepts,
                },
            ))
        }
    }
}

/// Eve's post-processed knowledge about one sifted position, after the
/// public basis announcement: whether her measurement basis matched
/// Alice's, and what she observed. Pauli attacks leave no record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EveSymbol {
    NoRecord,
    Matched { bit: bool },
    Mismatched { bit: bool },
}

/// Plug-in mutual-information estimate, bits per sifted position.
#[derive(Clone, Copy, Debug)]
pub struct InfoEstimate {
    pub bits_per_bit: f64,
    pub samples: usize,
    /// Set when fewer than 1000 sifted bits back the estimate.
    pub low_confidence: bool,
}

/// Empirical mutual information between Eve's records and Alice's sifted
/// bits: I(symbol; bit) from the joint plug-in distribution.
pub fn eve_information_estimate(observations: &[(EveSymbol, bool)]) -> InfoEstimate {
    let total = observations.len();
    let mut joint: std::collections::HashMap<(EveSymbol, bool), f64> = Default::default();
    let mut marg_e: std::collections::HashMap<EveSymbol, f64> = Default::default();
    let mut marg_a = [0.0f64; 2];
    for &(e, a) in observations {
        *joint.entry((e, a)).or_default() += 1.0;
        *marg_e.entry(e).or_default() += 1.0;
        marg_a[a as usize] += 1.0;
    }
    let n = total as f64;
    let mut mi = 0.0;
    for (&(e, a), &count) in &joint {
        let p = count / n;
        let pe = marg_e[&e] / n;
        let pa = marg_a[a as usize] / n;
        if p > 0.0 {
            mi += p * (p / (pe * pa)).log2();
        }
    }
    InfoEstimate {
        bits_per_bit: mi,
        samples: total,
        low_confidence: total < 1000,
    }
}
