//! Exact simulation of EPR pairs under Pauli noise in the Bell-basis
//! error frame.
//!
//! A joint state of n pairs is two n-bit vectors: a bit-flip indicator
//! and a phase-flip indicator per pair, with
//! (0,0) = Phi+, (1,0) = Psi+, (0,1) = Phi-, (1,1) = Psi-.
//! Pauli operators on the travelling half, check-basis rotations, and
//! check measurements all act classically on the frame, so n can be large
//! and every trial is exact. Global phases (Psi- picks one up under the
//! check-basis rotation) are unobservable in every measurement the
//! protocols perform and are not tracked.

use rand::Rng;

use crate::css::{CssCodePair, SyndromePair};
use crate::gf2::BitVector;
use crate::{BellState, Error, PauliAxis, Result};

/// Joint state of n EPR pairs as per-pair bit/phase flip indicators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellFrameState {
    n: usize,
    eb: BitVector,
    ep: BitVector,
}

/// A single-pair Pauli applied to the travelling (Bob-side) qubit.
#[derive(Clone, Copy, Debug)]
pub struct PauliOp {
    pub axis: PauliAxis,
    pub index: usize,
}

/// Outcome of comparing Z-basis measurements on both halves of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Agree,
    Disagree,
}

impl BellFrameState {
    /// n perfect Phi+ pairs.
    pub fn perfect(n: usize) -> Self {
        BellFrameState {
            n,
            eb: BitVector::zeros(n),
            ep: BitVector::zeros(n),
        }
    }

    pub fn from_pattern(eb: BitVector, ep: BitVector) -> Result<Self> {
        if eb.len() != ep.len() {
            return Err(Error::Dimension {
                context: "BellFrameState::from_pattern",
                expected: eb.len(),
                got: ep.len(),
            });
        }
        Ok(BellFrameState {
            n: eb.len(),
            eb,
            ep,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bit_flips(&self) -> &BitVector {
        &self.eb
    }

    pub fn phase_flips(&self) -> &BitVector {
        &self.ep
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            });
        }
        Ok(())
    }

    /// The Bell state of pair i.
    pub fn bell_state(&self, i: usize) -> Result<BellState> {
        self.check_index(i)?;
        Ok(match (self.eb.get(i), self.ep.get(i)) {
            (false, false) => BellState::PhiPlus,
            (true, false) => BellState::PsiPlus,
            (false, true) => BellState::PhiMinus,
            (true, true) => BellState::PsiMinus,
        })
    }

    /// sigma_x flips the bit indicator, sigma_z the phase indicator,
    /// sigma_y both.
    pub fn apply_pauli(&mut self, op: PauliOp) -> Result<()> {
        self.check_index(op.index)?;
        match op.axis {
            PauliAxis::X => self.eb.flip(op.index),
            PauliAxis::Z => self.ep.flip(op.index),
            PauliAxis::Y => {
                self.eb.flip(op.index);
                self.ep.flip(op.index);
            }
        }
        Ok(())
    }

    /// XORs whole flip patterns into the frame.
    pub fn apply_pattern(&mut self, bit_err: &BitVector, phase_err: &BitVector) -> Result<()> {
        if bit_err.len() != self.n || phase_err.len() != self.n {
            return Err(Error::Dimension {
                context: "BellFrameState::apply_pattern",
                expected: self.n,
                got: if bit_err.len() != self.n {
                    bit_err.len()
                } else {
                    phase_err.len()
                },
            });
        }
        self.eb.xor_assign(bit_err);
        self.ep.xor_assign(phase_err);
        Ok(())
    }

    /// The check-basis rotation of pair i, swapping the roles of bit and
    /// phase flips: Phi+ and Psi- are preserved (up to phase), Psi+ and
    /// Phi- are exchanged.
    ///
    /// The protocols apply a physical Hadamard to the travelling qubit
    /// before transmission and again after reception; because
    /// (M (x) I) Phi+ = (I (x) M^T) Phi+, sandwiching a channel Pauli
    /// between the two is the same as conjugating it, which is exactly
    /// this frame swap.
    pub fn apply_hadamard_bob(&mut self, i: usize) -> Result<()> {
        self.check_index(i)?;
        let b = self.eb.get(i);
        let p = self.ep.get(i);
        self.eb.set(i, p);
        self.ep.set(i, b);
        Ok(())
    }

    /// Both parties measure pair i in the Z basis and compare: the
    /// outcomes disagree exactly on Psi+/Psi- pairs, i.e. when the bit
    /// indicator is set; the phase indicator is invisible here.
    pub fn measure_check_pair(&self, i: usize) -> Result<CheckOutcome> {
        self.check_index(i)?;
        Ok(if self.eb.get(i) {
            CheckOutcome::Disagree
        } else {
            CheckOutcome::Agree
        })
    }
}

/// The relative syndromes Alice and Bob obtain by comparing stabilizer
/// eigenvalues on the selected code pairs: H1 against the bit flips and
/// H2 against the phase flips, independently.
pub fn syndrome_compare(
    state: &BellFrameState,
    pair: &CssCodePair,
    code_indices: &[usize],
) -> Result<SyndromePair> {
    if code_indices.len() != pair.n() {
        return Err(Error::Dimension {
            context: "syndrome_compare",
            expected: pair.n(),
            got: code_indices.len(),
        });
    }
    for &i in code_indices {
        if i >= state.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: state.n(),
            });
        }
    }
    let eb = state.bit_flips().select(code_indices);
    let ep = state.phase_flips().select(code_indices);
    pair.syndromes_of_error(&eb, &ep)
}

/// Which decoder gave up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PurifySide {
    Bit,
    Phase,
}

/// Result of one purification round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PurifyOutcome {
    /// All residual errors act trivially: the decoded pairs are perfect
    /// Phi+ pairs.
    Success,
    /// Syndrome decoding finished but the residual error acts as a
    /// logical operation; the classes label the key flip (bit) and the
    /// conjugate-basis flip (phase).
    LogicalFailure {
        bit_class: BitVector,
        phase_class: BitVector,
    },
    /// A syndrome fell outside the decoding table: a detected,
    /// uncorrectable error.
    DecodeFailure { side: PurifySide },
}

/// Runs syndrome comparison and correction on the selected pairs.
///
/// Succeeds exactly when the corrected bit error lands in C2 and the
/// corrected phase error lands in C1⊥ (residuals that act trivially on
/// the code space), which is guaranteed whenever both error weights on
/// the code pairs are at most t.
pub fn purify(
    state: &BellFrameState,
    pair: &CssCodePair,
    code_indices: &[usize],
) -> Result<PurifyOutcome> {
    let syndromes = syndrome_compare(state, pair, code_indices)?;
    let eb = state.bit_flips().select(code_indices);
    let ep = state.phase_flips().select(code_indices);

    let Some(bit_correction) = pair.bit_decoder().decode(&syndromes.bit) else {
        return Ok(PurifyOutcome::DecodeFailure {
            side: PurifySide::Bit,
        });
    };
    let Some(phase_correction) = pair.phase_decoder().decode(&syndromes.phase) else {
        return Ok(PurifyOutcome::DecodeFailure {
            side: PurifySide::Phase,
        });
    };

    let residual_bit = eb.add(&bit_correction)?;
    let residual_phase = ep.add(&phase_correction)?;
    let bit_class = pair.labeler().label(&residual_bit)?;
    let phase_class = pair.phase_labeler().label(&residual_phase)?;
    if bit_class.is_zero() && phase_class.is_zero() {
        Ok(PurifyOutcome::Success)
    } else {
        Ok(PurifyOutcome::LogicalFailure {
            bit_class,
            phase_class,
        })
    }
}

/// Independent per-pair Pauli noise: pair i suffers X with its px, Y
/// with its py, Z with its pz.
#[derive(Clone, Debug)]
pub struct PairwisePauliNoise {
    probs: Vec<[f64; 3]>,
}

impl PairwisePauliNoise {
    pub fn new(probs: Vec<[f64; 3]>) -> Result<Self> {
        for p in &probs {
            let sum: f64 = p.iter().sum();
            if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) || sum > 1.0 + 1e-12 {
                return Err(Error::Domain {
                    what: "pauli probabilities",
                    value: sum,
                    domain: "px, py, pz >= 0 with px + py + pz <= 1",
                });
            }
        }
        Ok(PairwisePauliNoise { probs })
    }

    /// The same (px, py, pz) on every one of n pairs.
    pub fn iid(n: usize, px: f64, py: f64, pz: f64) -> Result<Self> {
        Self::new(vec![[px, py, pz]; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Samples one error pattern; exactly one uniform draw per pair.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (BitVector, BitVector) {
        let n = self.probs.len();
        let mut eb = BitVector::zeros(n);
        let mut ep = BitVector::zeros(n);
        for (i, p) in self.probs.iter().enumerate() {
            let u = rand::RngExt::random::<f64>(rng);
            if u < p[0] {
                eb.set(i, true);
            } else if u < p[0] + p[1] {
                eb.set(i, true);
                ep.set(i, true);
            } else if u < p[0] + p[1] + p[2] {
                ep.set(i, true);
            }
        }
        (eb, ep)
    }

    /// Exact joint distribution of (bit-flip weight, phase-flip weight)
    /// by dynamic programming over pairs.
    pub fn weight_distribution(&self) -> Vec<Vec<f64>> {
        let n = self.probs.len();
        let mut table = vec![vec![0.0f64; n + 1]; n + 1];
        table[0][0] = 1.0;
        for (step, p) in self.probs.iter().enumerate() {
            let p_id = (1.0 - p[0] - p[1] - p[2]).max(0.0);
            let mut next = vec![vec![0.0f64; n + 1]; n + 1];
            for b in 0..=step {
                for f in 0..=step {
                    let mass = table[b][f];
                    if mass == 0.0 {
                        continue;
                    }
                    next[b][f] += mass * p_id;
                    next[b + 1][f] += mass * p[0];
                    next[b + 1][f + 1] += mass * p[1];
                    next[b][f + 1] += mass * p[2];
                }
            }
            table = next;
        }
        table
    }
}

/// The purification fidelity lower bound: the probability that a Bell
/// measurement on all pairs would have found at most t bit flips and at
/// most t phase flips. The empirical success rate of [`purify`] under the
/// same noise is at least this value.
pub fn fidelity_lower_bound(noise: &PairwisePauliNoise, pair: &CssCodePair) -> Result<f64> {
    if noise.len() != pair.n() {
        return Err(Error::Dimension {
            context: "fidelity_lower_bound",
            expected: pair.n(),
            got: noise.len(),
        });
    }
    let t = pair.t();
    let table = noise.weight_distribution();
    let mut total = 0.0;
    for row in table.iter().take(t + 1) {
        for &mass in row.iter().take(t + 1) {
            total += mass;
        }
    }
    Ok(total)
}

/// Fidelity lower bound for an explicitly weighted error distribution.
pub fn fidelity_lower_bound_explicit(
    atoms: &[(BitVector, BitVector, f64)],
    pair: &CssCodePair,
) -> Result<f64> {
    let t = pair.t();
    let mut total = 0.0;
    for (eb, ep, w) in atoms {
        if eb.len() != pair.n() || ep.len() != pair.n() {
            return Err(Error::Dimension {
                context: "fidelity_lower_bound_explicit",
                expected: pair.n(),
                got: eb.len(),
            });
        }
        if eb.weight() <= t && ep.weight() <= t {
            total += w;
        }
    }
    Ok(total)
}
