//! Dense-oracle twins of the purification and CSS-code protocols.
//!
//! These execute the full quantum state machines on the statevector
//! simulator, so the attack can be an arbitrary small unitary rather than
//! a Pauli channel. A purification run on block size n needs 4n qubits
//! (2n EPR pairs), a CSS-code run 2n, which keeps everything inside the
//! dense cap for toy codes.

use std::collections::HashMap;

use num_complex::Complex64;

use super::{
    empty_transcript, sample_subset, AbortReason, Announcements, ProtocolConfig, ProtocolKind,
    Statistic, Transcript,
};
use crate::gf2::BitVector;
use crate::statevector::{build_css_codeword, DenseState};
use crate::streams::TrialStreams;
use crate::{Error, PauliAxis, Result};

/// A coherent attack: a fixed unitary circuit applied to the transmitted
/// qubits, indexed by transit slot (0..2n).
#[derive(Clone, Debug)]
pub struct CoherentAttack {
    ops: Vec<CoherentOp>,
}

#[derive(Clone, Debug)]
enum CoherentOp {
    Single {
        slot: usize,
        matrix: [[Complex64; 2]; 2],
    },
    Two {
        slots: (usize, usize),
        matrix: [[Complex64; 4]; 4],
    },
}

impl CoherentAttack {
    pub fn identity() -> Self {
        CoherentAttack { ops: Vec::new() }
    }

    /// Appends a Y-rotation by `theta` on one transit slot.
    pub fn rotate_y(mut self, slot: usize, theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        self.ops.push(CoherentOp::Single {
            slot,
            matrix: [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
        });
        self
    }

    /// Appends a controlled-Z between two transit slots.
    pub fn controlled_z(mut self, a: usize, b: usize) -> Self {
        let mut matrix = [[Complex64::ZERO; 4]; 4];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = if i == 3 { -Complex64::ONE } else { Complex64::ONE };
        }
        self.ops.push(CoherentOp::Two {
            slots: (a, b),
            matrix,
        });
        self
    }

    fn max_slot(&self) -> Option<usize> {
        self.ops
            .iter()
            .map(|op| match op {
                CoherentOp::Single { slot, .. } => *slot,
                CoherentOp::Two { slots, .. } => slots.0.max(slots.1),
            })
            .max()
    }

    fn apply(&self, state: &mut DenseState, slot_to_qubit: &dyn Fn(usize) -> usize) -> Result<()> {
        for op in &self.ops {
            match op {
                CoherentOp::Single { slot, matrix } => {
                    state.apply_single(slot_to_qubit(*slot), matrix)?;
                }
                CoherentOp::Two { slots, matrix } => {
                    state.apply_two(slot_to_qubit(slots.0), slot_to_qubit(slots.1), matrix)?;
                }
            }
        }
        Ok(())
    }
}

fn embed_support(row: &BitVector, positions: &[usize], qubits: usize) -> BitVector {
    let mut support = BitVector::zeros(qubits);
    for i in row.ones() {
        support.set(positions[i], true);
    }
    support
}

/// Full dense execution of the purification protocol on 2n EPR pairs
/// (4n qubits) under an arbitrary coherent attack on the transmitted
/// halves.
pub fn run_purification_dense(
    cfg: &ProtocolConfig,
    attack: &CoherentAttack,
    master: u64,
    trial: u64,
    cap: usize,
) -> Result<Transcript> {
    let n = cfg.n();
    let pair = cfg.pair.as_ref();
    if let Some(slot) = attack.max_slot() {
        if slot >= 2 * n {
            return Err(Error::IndexOutOfRange {
                index: slot,
                len: 2 * n,
            });
        }
    }
    let mut streams = TrialStreams::new(master, trial);
    let mut transcript = empty_transcript(ProtocolKind::Purification, trial, n, n);

    let pairs = 2 * n;
    let alice = |j: usize| j;
    let bob = |j: usize| pairs + j;
    let mut state = DenseState::epr_pairs(pairs, cap)?;

    let b = BitVector::random(pairs, &mut streams.prep);
    for j in b.ones().collect::<Vec<_>>() {
        state.apply_h(bob(j))?;
    }
    attack.apply(&mut state, &|slot| bob(slot))?;
    for j in b.ones().collect::<Vec<_>>() {
        state.apply_h(bob(j))?;
    }

    let check_set = sample_subset(pairs, n, &mut streams.select);
    let code_set: Vec<usize> = super::complement(pairs, &check_set);

    let mut check_errors = 0usize;
    let mut alice_check = BitVector::zeros(n);
    for (k, &j) in check_set.iter().enumerate() {
        let a = state.measure_qubit_z(alice(j), &mut streams.measure)?;
        let bq = state.measure_qubit_z(bob(j), &mut streams.measure)?;
        alice_check.set(k, a);
        if a != bq {
            check_errors += 1;
        }
    }
    transcript.check_errors = Some(check_errors);
    transcript.announcements = Announcements {
        basis_flags: b,
        check_positions: check_set.clone(),
        selected_positions: None,
        check_values: alice_check,
        correction: None,
        phase_correction: None,
        bit_syndrome: None,
        phase_syndrome: None,
        permutation: None,
    };
    if check_errors > cfg.tau() {
        transcript.abort = Some(AbortReason::CheckFailure);
        return Ok(transcript);
    }

    let alice_positions: Vec<usize> = code_set.iter().map(|&j| alice(j)).collect();
    let bob_positions: Vec<usize> = code_set.iter().map(|&j| bob(j)).collect();
    let qubits = 2 * pairs;

    // Both parties measure the commuting stabilizer set; the relative
    // syndrome drives Bob's correction.
    let measure_syndromes =
        |positions: &[usize], state: &mut DenseState, streams: &mut TrialStreams| -> Result<(BitVector, BitVector)> {
            let mut bit = BitVector::zeros(pair.h1().rows());
            for r in 0..pair.h1().rows() {
                let support = embed_support(pair.h1().row(r), positions, qubits);
                let outcome = state.measure_pauli(PauliAxis::Z, &support, &mut streams.measure)?;
                bit.set(r, outcome < 0);
            }
            let mut phase = BitVector::zeros(pair.h2().rows());
            for r in 0..pair.h2().rows() {
                let support = embed_support(pair.h2().row(r), positions, qubits);
                let outcome = state.measure_pauli(PauliAxis::X, &support, &mut streams.measure)?;
                phase.set(r, outcome < 0);
            }
            Ok((bit, phase))
        };
    let (alice_bit, alice_phase) = measure_syndromes(&alice_positions, &mut state, &mut streams)?;
    let (bob_bit, bob_phase) = measure_syndromes(&bob_positions, &mut state, &mut streams)?;

    let rel_bit = alice_bit.add(&bob_bit)?;
    let rel_phase = alice_phase.add(&bob_phase)?;
    transcript.announcements.bit_syndrome = Some(alice_bit.clone());
    transcript.announcements.phase_syndrome = Some(alice_phase.clone());
    transcript.relative_bit_syndrome = Some(rel_bit.clone());
    transcript.relative_phase_syndrome = Some(rel_phase.clone());

    let Some(bit_correction) = pair.bit_decoder().decode(&rel_bit) else {
        transcript.abort = Some(AbortReason::DecodeFailure);
        return Ok(transcript);
    };
    for i in bit_correction.ones() {
        state.apply_x(bob_positions[i])?;
    }
    // Best-effort phase correction; a table miss degrades the purified
    // pairs but cannot touch Z-basis keys, so it is recorded, not fatal.
    match pair.phase_decoder().decode(&rel_phase) {
        Some(phase_correction) => {
            for i in phase_correction.ones() {
                state.apply_z(bob_positions[i])?;
            }
        }
        None => transcript.phase_decode_failed = true,
    }

    // Keys: both sides measure the code block in the Z basis; the key is
    // the coset label relative to any word with Alice's announced bit
    // syndrome.
    let mut a_word = BitVector::zeros(n);
    let mut b_word = BitVector::zeros(n);
    for i in 0..n {
        a_word.set(i, state.measure_qubit_z(alice_positions[i], &mut streams.measure)?);
        b_word.set(i, state.measure_qubit_z(bob_positions[i], &mut streams.measure)?);
    }
    let x_hat = pair
        .h1()
        .solve(&alice_bit)?
        .expect("parity-check rows are independent");
    transcript.alice_key = Some(pair.labeler().label(&a_word.add(&x_hat)?)?);
    transcript.bob_key = Some(pair.labeler().label(&b_word.add(&x_hat)?)?);
    Ok(transcript)
}

/// Full dense execution of the CSS-code protocol on 2n qubits under an
/// arbitrary coherent attack.
pub fn run_css_dense(
    cfg: &ProtocolConfig,
    attack: &CoherentAttack,
    master: u64,
    trial: u64,
    cap: usize,
) -> Result<Transcript> {
    let n = cfg.n();
    let pair = cfg.pair.as_ref();
    if let Some(slot) = attack.max_slot() {
        if slot >= 2 * n {
            return Err(Error::IndexOutOfRange {
                index: slot,
                len: 2 * n,
            });
        }
    }
    let mut streams = TrialStreams::new(master, trial);
    let mut transcript = empty_transcript(ProtocolKind::CssCode, trial, n, n);

    let check_values = BitVector::random(n, &mut streams.prep);
    let key = BitVector::random(pair.key_bits(), &mut streams.prep);
    let b = BitVector::random(2 * n, &mut streams.prep);
    let x = BitVector::random(n, &mut streams.prep);
    let z = BitVector::random(n, &mut streams.prep);
    let check_slots = sample_subset(2 * n, n, &mut streams.prep);
    let code_slots: Vec<usize> = super::complement(2 * n, &check_slots);

    let v = pair.labeler().representative(&key)?;
    let code_state = build_css_codeword(pair, &v, &x, &z, cap)?;
    let fixed: Vec<(usize, bool)> = check_slots
        .iter()
        .enumerate()
        .map(|(k, &slot)| (slot, check_values.get(k)))
        .collect();
    let mut state = DenseState::embed(&code_state, &code_slots, &fixed, 2 * n, cap)?;

    for j in b.ones().collect::<Vec<_>>() {
        state.apply_h(j)?;
    }
    attack.apply(&mut state, &|slot| slot)?;
    for j in b.ones().collect::<Vec<_>>() {
        state.apply_h(j)?;
    }

    transcript.announcements = Announcements {
        basis_flags: b,
        check_positions: check_slots.clone(),
        selected_positions: None,
        check_values: check_values.clone(),
        correction: Some(x.clone()),
        phase_correction: cfg.announce_z.then(|| z.clone()),
        bit_syndrome: None,
        phase_syndrome: None,
        permutation: None,
    };

    let mut check_errors = 0usize;
    for (k, &slot) in check_slots.iter().enumerate() {
        let bit = state.measure_qubit_z(slot, &mut streams.measure)?;
        if bit != check_values.get(k) {
            check_errors += 1;
        }
    }
    transcript.check_errors = Some(check_errors);
    if check_errors > cfg.tau() {
        transcript.abort = Some(AbortReason::CheckFailure);
        return Ok(transcript);
    }

    let mut received = BitVector::zeros(n);
    for (i, &slot) in code_slots.iter().enumerate() {
        received.set(i, state.measure_qubit_z(slot, &mut streams.measure)?);
    }
    let shifted = received.add(&x)?;
    transcript.relative_bit_syndrome = Some(pair.h1().mul_vec(&shifted)?);
    let corrected = match pair.correct_to_codeword(&shifted) {
        Ok(word) => word,
        Err(Error::DecodeFailure { .. }) => {
            transcript.abort = Some(AbortReason::DecodeFailure);
            return Ok(transcript);
        }
        Err(e) => return Err(e),
    };
    transcript.alice_key = Some(key);
    transcript.bob_key = Some(pair.labeler().label(&corrected)?);
    Ok(transcript)
}

/// Per-cell comparison of the two dense protocols' outcome statistics.
#[derive(Clone, Debug)]
pub struct DenseEquivalence {
    pub trials: u64,
    pub counts: [HashMap<Statistic, u64>; 2],
    pub tvd: f64,
    /// Largest per-cell deviation in pooled-sigma units.
    pub max_sigma: f64,
    pub within_three_sigma: bool,
}

/// Runs the dense purification and CSS-code protocols under the same
/// coherent attack and compares outcome distributions cell by cell
/// against pooled three-sigma multinomial bounds.
pub fn equivalence_dense(
    cfg: &ProtocolConfig,
    attack: &CoherentAttack,
    trials: u64,
    master: u64,
    cap: usize,
) -> Result<DenseEquivalence> {
    let run_side = |purification: bool| -> Result<HashMap<Statistic, u64>> {
        let one = |t: u64| -> Result<Statistic> {
            let transcript = if purification {
                run_purification_dense(cfg, attack, master, t, cap)?
            } else {
                run_css_dense(cfg, attack, master, t, cap)?
            };
            Ok(transcript.statistic())
        };
        #[cfg(feature = "parallel")]
        let stats: Result<Vec<Statistic>> = {
            use rayon::prelude::*;
            (0..trials).into_par_iter().map(one).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let stats: Result<Vec<Statistic>> = (0..trials).map(one).collect();
        let mut counts = HashMap::new();
        for s in stats? {
            *counts.entry(s).or_default() += 1u64;
        }
        Ok(counts)
    };
    let counts_a = run_side(true)?;
    let counts_b = run_side(false)?;

    let keys: std::collections::HashSet<Statistic> = counts_a
        .keys()
        .chain(counts_b.keys())
        .copied()
        .collect();
    let mut max_sigma = 0.0f64;
    let nt = trials as f64;
    for k in &keys {
        let ca = *counts_a.get(k).unwrap_or(&0) as f64;
        let cb = *counts_b.get(k).unwrap_or(&0) as f64;
        let pooled = (ca + cb) / (2.0 * nt);
        let sigma = (pooled * (1.0 - pooled) * 2.0 / nt).sqrt();
        if sigma > 0.0 {
            max_sigma = max_sigma.max((ca / nt - cb / nt).abs() / sigma);
        }
    }
    let tvd = super::stats::total_variation(&counts_a, &counts_b);
    Ok(DenseEquivalence {
        trials,
        counts: [counts_a, counts_b],
        tvd,
        max_sigma,
        within_three_sigma: max_sigma <= 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::css::CssCodePair;

    fn toy_config() -> ProtocolConfig {
        ProtocolConfig::new(CssCodePair::toy3())
    }

    #[test]
    fn dense_runs_complete_without_attack() {
        let cfg = toy_config();
        for trial in 0..20 {
            let t =
                run_purification_dense(&cfg, &CoherentAttack::identity(), 3, trial, 12).unwrap();
            assert!(t.abort.is_none(), "trial {trial}");
            assert_eq!(t.keys_agree(), Some(true), "trial {trial}");
            let t = run_css_dense(&cfg, &CoherentAttack::identity(), 3, trial, 12).unwrap();
            assert!(t.abort.is_none());
            assert_eq!(t.keys_agree(), Some(true));
        }
    }

    #[test]
    fn dense_matches_frame_for_pauli_attacks() {
        // An X on one transmitted slot is both a coherent op and a Pauli
        // pattern; outcome distributions must agree between the dense and
        // frame purification runners.
        let mut cfg = toy_config();
        let trials = 400u64;
        let attack = CoherentAttack::identity().rotate_y(1, std::f64::consts::PI); // -iY ~ X.Z up to phase
        let mut dense_aborts = 0u64;
        let mut dense_disagree = 0u64;
        for t in 0..trials {
            let tr = run_purification_dense(&cfg, &attack, 29, t, 12).unwrap();
            if tr.abort.is_some() {
                dense_aborts += 1;
            } else if tr.keys_agree() == Some(false) {
                dense_disagree += 1;
            }
        }
        cfg.attack = crate::adversary::AttackModel::FixedPattern {
            bit_err: {
                let mut v = BitVector::zeros(6);
                v.set(1, true);
                v
            },
            phase_err: {
                let mut v = BitVector::zeros(6);
                v.set(1, true);
                v
            },
        };
        let mut frame_aborts = 0u64;
        let mut frame_disagree = 0u64;
        for t in 0..trials {
            let tr = super::super::run_protocol1(&cfg, 31, t).unwrap();
            if tr.abort.is_some() {
                frame_aborts += 1;
            } else if tr.keys_agree() == Some(false) {
                frame_disagree += 1;
            }
        }
        // Y = iXZ: the frame twin is the fixed pattern with both flips.
        let da = dense_aborts as f64 / trials as f64;
        let fa = frame_aborts as f64 / trials as f64;
        assert!(
            (da - fa).abs() < 0.1,
            "abort rates dense {da} vs frame {fa}"
        );
        let dd = dense_disagree as f64 / trials as f64;
        let fd = frame_disagree as f64 / trials as f64;
        assert!(
            (dd - fd).abs() < 0.1,
            "disagree rates dense {dd} vs frame {fd}"
        );
    }

    #[test]
    fn dense_equivalence_small() {
        let cfg = toy_config();
        let attack = CoherentAttack::identity()
            .rotate_y(0, 0.4)
            .rotate_y(2, 0.7)
            .controlled_z(0, 1);
        let eq = equivalence_dense(&cfg, &attack, 800, 37, 12).unwrap();
        assert!(
            eq.within_three_sigma,
            "max sigma {} tvd {}",
            eq.max_sigma, eq.tvd
        );
    }
}
