//! The three key-distribution protocol state machines and the
//! equivalence-testing harness.
//!
//! All three produce a [`Transcript`] with the same observable statistic
//! vector (abort reason, check-error count, key agreement), which is what
//! the harness compares:
//!
//! - **Purification**: 2n EPR pairs, a random check-basis pattern, n
//!   check pairs compared publicly, syndrome comparison and purification
//!   on the remaining n, keys from measuring the purified pairs. Runs in
//!   the Bell error frame, so it is exact for Pauli-class attacks at any
//!   n (a dense-oracle twin for arbitrary small attacks lives in
//!   [`dense`]).
//! - **CSS code**: Alice sends check bits interleaved with a key encoded
//!   in a randomly offset CSS code; Bob checks and decodes. Under Pauli
//!   noise the quantum content reduces to classical tracking of the
//!   transmitted word and phase pattern.
//! - **BB84**: prepare-and-measure with sifting; the key is the coset
//!   label of a random codeword announced as a one-time-pad correction.
//!
//! Per-trial randomness is split into named phase streams
//! ([`crate::streams`]), which is what lets the harness couple two
//! protocols to the same channel (matched channel seeds) or, in the
//! exhaustive mode, to fully shared draws.

pub mod dense;
pub mod record;
pub mod stats;

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::adversary::{
    attack_qubit_stream, measure_in_basis, sample_pauli_pattern, AttackModel, EveSymbol,
    InfoEstimate, PreparedQubit,
};
use crate::bell_frame::{syndrome_compare, BellFrameState, CheckOutcome};
use crate::css::CssCodePair;
use crate::gf2::BitVector;
use crate::statevector::build_css_codeword;
use crate::streams::TrialStreams;
use crate::{Basis, Error, Result};

/// Which protocol state machine to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    Purification,
    CssCode,
    Bb84,
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProtocolKind::Purification => "purification",
            ProtocolKind::CssCode => "css",
            ProtocolKind::Bb84 => "bb84",
        })
    }
}

/// Abort-threshold policy: tolerate up to ceil((rate + margin) * n)
/// check disagreements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Threshold {
    pub rate: f64,
    pub margin: f64,
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold {
            rate: 0.11,
            margin: 0.02,
        }
    }
}

impl Threshold {
    /// Maximum tolerated number of check disagreements.
    pub fn max_disagreements(&self, n: usize) -> usize {
        ((self.rate + self.margin) * n as f64).ceil() as usize
    }
}

/// Everything a protocol run needs besides the master seed and trial
/// index. The block size n is the code pair's length; BB84 transmits
/// ceil((4 + delta) n) qubits.
#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub pair: Arc<CssCodePair>,
    pub delta: f64,
    pub threshold: Threshold,
    pub scramble: bool,
    pub announce_z: bool,
    pub attack: AttackModel,
}

impl ProtocolConfig {
    pub fn new(pair: CssCodePair) -> Self {
        ProtocolConfig {
            pair: Arc::new(pair),
            delta: 2.0,
            threshold: Threshold::default(),
            scramble: false,
            announce_z: true,
            attack: AttackModel::None,
        }
    }

    pub fn n(&self) -> usize {
        self.pair.n()
    }

    fn tau(&self) -> usize {
        self.threshold.max_disagreements(self.n())
    }

    fn bb84_length(&self) -> usize {
        ((4.0 + self.delta) * self.n() as f64).ceil() as usize
    }
}

/// Why a run stopped early.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AbortReason {
    /// Too many check-bit disagreements.
    CheckFailure,
    /// Fewer than 2n positions survived sifting.
    InsufficientSifted,
    /// A syndrome fell outside the decoding table.
    DecodeFailure,
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AbortReason::CheckFailure => "check",
            AbortReason::InsufficientSifted => "sift",
            AbortReason::DecodeFailure => "decode",
        })
    }
}

/// Everything announced over the public channel during one run.
#[derive(Clone, Debug, Default)]
pub struct Announcements {
    /// Basis flags: check-basis pattern b (purification / CSS code) or
    /// Alice's preparation bases (BB84).
    pub basis_flags: BitVector,
    pub check_positions: Vec<usize>,
    /// For BB84: the 2n positions kept for the protocol.
    pub selected_positions: Option<Vec<usize>>,
    pub check_values: BitVector,
    /// Correction string: x (CSS code) or u + v (BB84).
    pub correction: Option<BitVector>,
    /// The phase pattern z, when the variant announces it.
    pub phase_correction: Option<BitVector>,
    /// Alice's announced syndromes (purification protocol).
    pub bit_syndrome: Option<BitVector>,
    pub phase_syndrome: Option<BitVector>,
    /// Scrambling permutation, when enabled: entry j is the transit slot
    /// that carried logical position j.
    pub permutation: Option<Vec<usize>>,
}

/// Full record of one protocol run.
#[derive(Clone, Debug)]
pub struct Transcript {
    pub protocol: ProtocolKind,
    pub trial: u64,
    pub n: usize,
    pub abort: Option<AbortReason>,
    pub sifted_count: Option<usize>,
    pub check_count: usize,
    /// Check disagreements; `None` when the run aborted before the check
    /// comparison.
    pub check_errors: Option<usize>,
    pub announcements: Announcements,
    /// Keys are present exactly when the run did not abort.
    pub alice_key: Option<BitVector>,
    pub bob_key: Option<BitVector>,
    /// Relative syndromes observed on the code block.
    pub relative_bit_syndrome: Option<BitVector>,
    pub relative_phase_syndrome: Option<BitVector>,
    /// Purification only: the phase syndrome fell outside the decoding
    /// table. The key channel is untouched (phase errors cannot flip
    /// Z-basis outcomes) but the purified pairs are not all Phi+, so this
    /// is a secrecy diagnostic, not an abort.
    pub phase_decode_failed: bool,
    pub eve_intercepts: usize,
    /// Eve's post-announcement symbols paired with Alice's sifted bits.
    pub eve_observations: Vec<(EveSymbol, bool)>,
}

impl Transcript {
    pub fn keys_agree(&self) -> Option<bool> {
        match (&self.alice_key, &self.bob_key) {
            (Some(a), Some(b)) => Some(a == b),
            _ => None,
        }
    }

    /// The observable statistic vector compared by the harness.
    pub fn statistic(&self) -> Statistic {
        Statistic {
            abort: self.abort,
            check_errors: self.check_errors,
            keys_agree: self.keys_agree(),
        }
    }
}

/// Joint observable outcome of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Statistic {
    pub abort: Option<AbortReason>,
    pub check_errors: Option<usize>,
    pub keys_agree: Option<bool>,
}

pub(crate) fn empty_transcript(
    protocol: ProtocolKind,
    trial: u64,
    n: usize,
    check_count: usize,
) -> Transcript {
    Transcript {
        protocol,
        trial,
        n,
        abort: None,
        sifted_count: None,
        check_count,
        check_errors: None,
        announcements: Announcements::default(),
        alice_key: None,
        bob_key: None,
        relative_bit_syndrome: None,
        relative_phase_syndrome: None,
        phase_decode_failed: false,
        eve_intercepts: 0,
        eve_observations: Vec::new(),
    }
}

fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// A uniformly random size-k subset of 0..n, sorted ascending.
pub(crate) fn sample_subset<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let mut subset: Vec<usize> = all.into_iter().take(k).collect();
    subset.sort_unstable();
    subset
}

pub(crate) fn complement(n: usize, sorted_subset: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - sorted_subset.len());
    let mut it = sorted_subset.iter().peekable();
    for i in 0..n {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

/// Effective per-position flips after routing a slot-indexed Pauli
/// pattern through the scramble permutation and the per-position
/// conjugate-basis flags: a flagged position swaps the roles of bit and
/// phase errors.
fn effective_flips(
    slot_bit: &BitVector,
    slot_phase: &BitVector,
    flags: &BitVector,
    permutation: Option<&[usize]>,
) -> (BitVector, BitVector) {
    let n = flags.len();
    let mut bit = BitVector::zeros(n);
    let mut phase = BitVector::zeros(n);
    for j in 0..n {
        let slot = permutation.map_or(j, |p| p[j]);
        let (rb, rp) = (slot_bit.get(slot), slot_phase.get(slot));
        let (eb, ep) = if flags.get(j) { (rp, rb) } else { (rb, rp) };
        bit.set(j, eb);
        phase.set(j, ep);
    }
    (bit, phase)
}

// ---------------------------------------------------------------------
// Purification protocol (Bell-frame representation)
// ---------------------------------------------------------------------

/// Runs the purification protocol in the Bell error frame. Requires a
/// Pauli-class attack; arbitrary small attacks go through
/// [`dense::run_purification_dense`].
///
/// Steps: create 2n pairs; pick the check-basis pattern b and rotate;
/// transmit under attack (scrambled if enabled); announce b and the check
/// set; un-rotate; compare the n check pairs against the threshold;
/// compare syndromes on the n code pairs; purify; measure keys.
pub fn run_protocol1(cfg: &ProtocolConfig, master: u64, trial: u64) -> Result<Transcript> {
    if !cfg.attack.frame_compatible() {
        return Err(Error::Unsupported(
            "the frame-based purification runner needs a Pauli-class attack".to_string(),
        ));
    }
    let n = cfg.n();
    let pair = cfg.pair.as_ref();
    let mut streams = TrialStreams::new(master, trial);
    let mut transcript = empty_transcript(ProtocolKind::Purification, trial, n, n);

    let mut state = BellFrameState::perfect(2 * n);
    let b = BitVector::random(2 * n, &mut streams.prep);
    for j in b.ones().collect::<Vec<_>>() {
        state.apply_hadamard_bob(j)?;
    }

    let permutation = cfg.scramble.then(|| random_permutation(2 * n, &mut streams.prep));

    // The attack acts on transit slots; logical pair j rides slot perm[j].
    let (slot_bit, slot_phase) = sample_pauli_pattern(&cfg.attack, 2 * n, &mut streams.channel)?;
    let (pair_bit, pair_phase) = match &permutation {
        Some(p) => {
            let bit = BitVector::from_bits((0..2 * n).map(|j| slot_bit.get(p[j])));
            let phase = BitVector::from_bits((0..2 * n).map(|j| slot_phase.get(p[j])));
            (bit, phase)
        }
        None => (slot_bit, slot_phase),
    };
    state.apply_pattern(&pair_bit, &pair_phase)?;

    let check_set = sample_subset(2 * n, n, &mut streams.select);
    for j in b.ones().collect::<Vec<_>>() {
        state.apply_hadamard_bob(j)?;
    }

    let alice_check = BitVector::random(n, &mut streams.measure);
    let mut check_errors = 0usize;
    for &i in &check_set {
        if state.measure_check_pair(i)? == CheckOutcome::Disagree {
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
        permutation,
    };

    if check_errors > cfg.tau() {
        transcript.abort = Some(AbortReason::CheckFailure);
        return Ok(transcript);
    }

    let code_set = complement(2 * n, &check_set);
    let syndromes = syndrome_compare(&state, pair, &code_set)?;
    // Alice's announced syndrome values are uniform on perfect halves;
    // only the relative syndrome is physical.
    transcript.announcements.bit_syndrome =
        Some(BitVector::random(pair.h1().rows(), &mut streams.measure));
    transcript.announcements.phase_syndrome =
        Some(BitVector::random(pair.h2().rows(), &mut streams.measure));
    transcript.relative_bit_syndrome = Some(syndromes.bit.clone());
    transcript.relative_phase_syndrome = Some(syndromes.phase.clone());

    // Bit-side decode failure kills the key channel; phase-side failure
    // only degrades the purified pairs and is recorded, matching the
    // other protocols where phase information is never consumed.
    let Some(bit_correction) = pair.bit_decoder().decode(&syndromes.bit) else {
        transcript.abort = Some(AbortReason::DecodeFailure);
        return Ok(transcript);
    };
    let residual_bit = state.bit_flips().select(&code_set).add(&bit_correction)?;
    let bit_class = pair.labeler().label(&residual_bit)?;
    transcript.phase_decode_failed = pair.phase_decoder().decode(&syndromes.phase).is_none();

    let alice_key = BitVector::random(pair.key_bits(), &mut streams.measure);
    let bob_key = alice_key.add(&bit_class)?;
    transcript.alice_key = Some(alice_key);
    transcript.bob_key = Some(bob_key);
    Ok(transcript)
}

// ---------------------------------------------------------------------
// CSS-code protocol (classical tracking under Pauli noise)
// ---------------------------------------------------------------------

/// Alice's random draws for one CSS-code run, injectable so the harness
/// can couple protocols.
#[derive(Clone, Debug)]
pub struct Protocol2Draws {
    pub check_values: BitVector,
    pub key: BitVector,
    pub b: BitVector,
    pub x: BitVector,
    pub z: BitVector,
    /// Which n of the 2n positions carry check bits (sorted).
    pub check_slots: Vec<usize>,
    /// The C2 word Bob's measurement collapses onto.
    pub c2_word: BitVector,
    pub permutation: Option<Vec<usize>>,
}

impl Protocol2Draws {
    pub fn sample(cfg: &ProtocolConfig, streams: &mut TrialStreams) -> Protocol2Draws {
        let n = cfg.n();
        Protocol2Draws {
            check_values: BitVector::random(n, &mut streams.prep),
            key: BitVector::random(cfg.pair.key_bits(), &mut streams.prep),
            b: BitVector::random(2 * n, &mut streams.prep),
            x: BitVector::random(n, &mut streams.prep),
            z: BitVector::random(n, &mut streams.prep),
            check_slots: sample_subset(2 * n, n, &mut streams.prep),
            c2_word: cfg.pair.c2_gen().random_codeword(&mut streams.measure),
            permutation: cfg.scramble.then(|| random_permutation(2 * n, &mut streams.prep)),
        }
    }
}

/// Deterministic core of the CSS-code protocol given all draws and the
/// slot-indexed channel pattern. Since the transmitted states are CSS
/// codewords under Pauli noise, the run tracks the classical word
/// x + v + w and the phase pattern; Bob decodes by subtracting x,
/// correcting to a C1 codeword, and taking the coset label.
pub fn run_protocol2_with(
    cfg: &ProtocolConfig,
    draws: &Protocol2Draws,
    slot_bit: &BitVector,
    slot_phase: &BitVector,
    trial: u64,
) -> Result<Transcript> {
    let n = cfg.n();
    let pair = cfg.pair.as_ref();
    let mut transcript = empty_transcript(ProtocolKind::CssCode, trial, n, n);

    let (eff_bit, eff_phase) = effective_flips(
        slot_bit,
        slot_phase,
        &draws.b,
        draws.permutation.as_deref(),
    );

    transcript.announcements = Announcements {
        basis_flags: draws.b.clone(),
        check_positions: draws.check_slots.clone(),
        selected_positions: None,
        check_values: draws.check_values.clone(),
        correction: Some(draws.x.clone()),
        phase_correction: cfg.announce_z.then(|| draws.z.clone()),
        bit_syndrome: None,
        phase_syndrome: None,
        permutation: draws.permutation.clone(),
    };

    let mut check_errors = 0usize;
    for (j, &slot) in draws.check_slots.iter().enumerate() {
        let bob_bit = draws.check_values.get(j) ^ eff_bit.get(slot);
        if bob_bit != draws.check_values.get(j) {
            check_errors += 1;
        }
    }
    transcript.check_errors = Some(check_errors);
    if check_errors > cfg.tau() {
        transcript.abort = Some(AbortReason::CheckFailure);
        return Ok(transcript);
    }

    let code_slots = complement(2 * n, &draws.check_slots);
    let v = pair.labeler().representative(&draws.key)?;
    let transmitted = draws.x.add(&v)?.add(&draws.c2_word)?;
    let code_errors = eff_bit.select(&code_slots);
    let received = transmitted.add(&code_errors)?;

    transcript.relative_bit_syndrome = Some(pair.h1().mul_vec(&code_errors)?);
    transcript.relative_phase_syndrome =
        Some(pair.h2().mul_vec(&eff_phase.select(&code_slots))?);

    let shifted = received.add(&draws.x)?;
    let corrected = match pair.correct_to_codeword(&shifted) {
        Ok(word) => word,
        Err(Error::DecodeFailure { .. }) => {
            transcript.abort = Some(AbortReason::DecodeFailure);
            return Ok(transcript);
        }
        Err(e) => return Err(e),
    };
    transcript.alice_key = Some(draws.key.clone());
    transcript.bob_key = Some(pair.labeler().label(&corrected)?);
    Ok(transcript)
}

/// Runs the CSS-code protocol with freshly sampled draws and an attack
/// pattern from the configured Pauli-class model.
pub fn run_protocol2(cfg: &ProtocolConfig, master: u64, trial: u64) -> Result<Transcript> {
    if !cfg.attack.frame_compatible() {
        return Err(Error::Unsupported(
            "the CSS-code runner tracks codewords classically and needs a Pauli-class attack"
                .to_string(),
        ));
    }
    let mut streams = TrialStreams::new(master, trial);
    let draws = Protocol2Draws::sample(cfg, &mut streams);
    let (slot_bit, slot_phase) =
        sample_pauli_pattern(&cfg.attack, 2 * cfg.n(), &mut streams.channel)?;
    run_protocol2_with(cfg, &draws, &slot_bit, &slot_phase, trial)
}

// ---------------------------------------------------------------------
// BB84
// ---------------------------------------------------------------------

/// One sifted position as seen after the basis announcement.
#[derive(Clone, Copy, Debug)]
pub struct SiftedSlot {
    /// Logical position in Alice's original string.
    pub position: usize,
    pub basis: Basis,
    pub alice_bit: bool,
    pub bob_bit: bool,
}

/// Post-sifting core of BB84: check comparison on the chosen n slots,
/// announcement of u + v, correction to a C1 codeword, coset-label keys.
/// `selected` indexes into `sifted` (2n entries) and `check_idx` into
/// `selected` (n entries, sorted).
pub fn run_protocol3_postsift(
    cfg: &ProtocolConfig,
    sifted: &[SiftedSlot],
    selected: &[usize],
    check_idx: &[usize],
    u: &BitVector,
    mut transcript: Transcript,
) -> Result<Transcript> {
    let n = cfg.n();
    let pair = cfg.pair.as_ref();
    debug_assert_eq!(selected.len(), 2 * n);
    debug_assert_eq!(check_idx.len(), n);

    let check_positions: Vec<usize> = check_idx
        .iter()
        .map(|&i| sifted[selected[i]].position)
        .collect();
    let check_values =
        BitVector::from_bits(check_idx.iter().map(|&i| sifted[selected[i]].alice_bit));
    transcript.announcements.check_positions = check_positions;
    transcript.announcements.check_values = check_values;
    transcript.announcements.selected_positions =
        Some(selected.iter().map(|&i| sifted[i].position).collect());

    let mut check_errors = 0usize;
    for &i in check_idx {
        let slot = &sifted[selected[i]];
        if slot.alice_bit != slot.bob_bit {
            check_errors += 1;
        }
    }
    transcript.check_errors = Some(check_errors);
    if check_errors > cfg.tau() {
        transcript.abort = Some(AbortReason::CheckFailure);
        return Ok(transcript);
    }

    let check_set: std::collections::HashSet<usize> = check_idx.iter().copied().collect();
    let code_slots: Vec<&SiftedSlot> = (0..selected.len())
        .filter(|i| !check_set.contains(i))
        .map(|i| &sifted[selected[i]])
        .collect();
    let v = BitVector::from_bits(code_slots.iter().map(|s| s.alice_bit));
    let bob_v = BitVector::from_bits(code_slots.iter().map(|s| s.bob_bit));

    let correction = u.add(&v)?;
    transcript.announcements.correction = Some(correction.clone());

    let shifted = bob_v.add(&correction)?; // u + epsilon
    transcript.relative_bit_syndrome = Some(pair.h1().mul_vec(&shifted)?);

    let corrected = match pair.correct_to_codeword(&shifted) {
        Ok(word) => word,
        Err(Error::DecodeFailure { .. }) => {
            transcript.abort = Some(AbortReason::DecodeFailure);
            return Ok(transcript);
        }
        Err(e) => return Err(e),
    };
    transcript.alice_key = Some(pair.labeler().label(u)?);
    transcript.bob_key = Some(pair.labeler().label(&corrected)?);
    Ok(transcript)
}

/// Runs BB84: prepare ceil((4 + delta) n) qubits in random bases,
/// transmit under any supported attack, measure in random bases, sift,
/// select 2n positions and n checks, compare against the threshold,
/// announce u + v for a random C1 codeword u, and take coset keys.
pub fn run_protocol3(cfg: &ProtocolConfig, master: u64, trial: u64) -> Result<Transcript> {
    let n = cfg.n();
    let total = cfg.bb84_length();
    let mut streams = TrialStreams::new(master, trial);
    let mut transcript = empty_transcript(ProtocolKind::Bb84, trial, n, n);

    let bits = BitVector::random(total, &mut streams.prep);
    let alice_bases = BitVector::random(total, &mut streams.prep);
    let prepared: Vec<PreparedQubit> = (0..total)
        .map(|j| PreparedQubit {
            basis: if alice_bases.get(j) { Basis::X } else { Basis::Z },
            bit: bits.get(j),
        })
        .collect();

    let permutation = cfg.scramble.then(|| random_permutation(total, &mut streams.prep));
    let transmitted: Vec<PreparedQubit> = match &permutation {
        Some(p) => {
            let mut slots = vec![prepared[0]; total];
            for (j, &slot) in p.iter().enumerate() {
                slots[slot] = prepared[j];
            }
            slots
        }
        None => prepared.clone(),
    };

    let (received, eve_record) =
        attack_qubit_stream(&cfg.attack, &transmitted, &mut streams.channel)?;

    let bob_bases = BitVector::random(total, &mut streams.bob);
    let bob_raw: Vec<bool> = (0..total)
        .map(|s| {
            let basis = if bob_bases.get(s) { Basis::X } else { Basis::Z };
            measure_in_basis(received[s], basis, &mut streams.measure)
        })
        .collect();

    // Unscramble: logical position j was measured at slot perm[j].
    let slot_of = |j: usize| permutation.as_ref().map_or(j, |p| p[j]);

    transcript.announcements.basis_flags = alice_bases.clone();
    transcript.announcements.permutation = permutation.clone();

    let sifted: Vec<SiftedSlot> = (0..total)
        .filter(|&j| bob_bases.get(slot_of(j)) == alice_bases.get(j))
        .map(|j| SiftedSlot {
            position: j,
            basis: if alice_bases.get(j) { Basis::X } else { Basis::Z },
            alice_bit: bits.get(j),
            bob_bit: bob_raw[slot_of(j)],
        })
        .collect();
    transcript.sifted_count = Some(sifted.len());

    // Eve's post-announcement symbols over all sifted positions.
    transcript.eve_intercepts = eve_record.intercepts.len();
    transcript.eve_observations = sifted
        .iter()
        .map(|slot| {
            let symbol = match eve_record.intercept_at(slot_of(slot.position)) {
                Some(i) if i.basis == slot.basis => EveSymbol::Matched { bit: i.observed },
                Some(i) => EveSymbol::Mismatched { bit: i.observed },
                None => EveSymbol::NoRecord,
            };
            (symbol, slot.alice_bit)
        })
        .collect();

    if sifted.len() < 2 * n {
        transcript.abort = Some(AbortReason::InsufficientSifted);
        return Ok(transcript);
    }

    let selected = sample_subset(sifted.len(), 2 * n, &mut streams.select);
    let check_idx = sample_subset(2 * n, n, &mut streams.select);
    let u = cfg.pair.c1_gen().random_codeword(&mut streams.select);

    run_protocol3_postsift(cfg, &sifted, &selected, &check_idx, &u, transcript)
}

// ---------------------------------------------------------------------
// Dispatch, batching, summaries
// ---------------------------------------------------------------------

pub fn run_protocol(
    kind: ProtocolKind,
    cfg: &ProtocolConfig,
    master: u64,
    trial: u64,
) -> Result<Transcript> {
    match kind {
        ProtocolKind::Purification => run_protocol1(cfg, master, trial),
        ProtocolKind::CssCode => run_protocol2(cfg, master, trial),
        ProtocolKind::Bb84 => run_protocol3(cfg, master, trial),
    }
}

/// Runs independent trials (in parallel when the `parallel` feature is
/// on); transcripts come back ordered by trial index either way.
pub fn run_trials(
    kind: ProtocolKind,
    cfg: &ProtocolConfig,
    master: u64,
    trials: u64,
) -> Result<Vec<Transcript>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials)
            .into_par_iter()
            .map(|t| run_protocol(kind, cfg, master, t))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(|t| run_protocol(kind, cfg, master, t)).collect()
    }
}

/// Aggregate statistics over a batch of transcripts.
#[derive(Clone, Debug)]
pub struct Summary {
    pub trials: u64,
    pub aborts: u64,
    pub check_failures: u64,
    pub sift_failures: u64,
    pub decode_failures: u64,
    pub abort_rate: f64,
    /// Agreement rate among completed runs; `None` if every run aborted.
    pub key_agreement_rate: Option<f64>,
    /// Mean check disagreement fraction among runs that reached checks.
    pub mean_check_error_rate: Option<f64>,
    /// Pooled mutual-information estimate, when any run held records.
    pub eve_info: Option<InfoEstimate>,
}

pub fn summarize(transcripts: &[Transcript]) -> Summary {
    let trials = transcripts.len() as u64;
    let mut aborts = 0u64;
    let mut check_failures = 0u64;
    let mut sift_failures = 0u64;
    let mut decode_failures = 0u64;
    let mut agreements = 0u64;
    let mut completed = 0u64;
    let mut check_rate_sum = 0.0f64;
    let mut check_rate_count = 0u64;
    let mut observations = Vec::new();
    let mut have_eve = false;
    for t in transcripts {
        match t.abort {
            Some(AbortReason::CheckFailure) => {
                aborts += 1;
                check_failures += 1;
            }
            Some(AbortReason::InsufficientSifted) => {
                aborts += 1;
                sift_failures += 1;
            }
            Some(AbortReason::DecodeFailure) => {
                aborts += 1;
                decode_failures += 1;
            }
            None => {
                completed += 1;
                if t.keys_agree() == Some(true) {
                    agreements += 1;
                }
            }
        }
        if let Some(errors) = t.check_errors {
            check_rate_sum += errors as f64 / t.check_count as f64;
            check_rate_count += 1;
        }
        if t.eve_intercepts > 0 {
            have_eve = true;
        }
        observations.extend(t.eve_observations.iter().copied());
    }
    Summary {
        trials,
        aborts,
        check_failures,
        sift_failures,
        decode_failures,
        abort_rate: if trials == 0 {
            0.0
        } else {
            aborts as f64 / trials as f64
        },
        key_agreement_rate: (completed > 0).then(|| agreements as f64 / completed as f64),
        mean_check_error_rate: (check_rate_count > 0)
            .then(|| check_rate_sum / check_rate_count as f64),
        eve_info: (have_eve && !observations.is_empty())
            .then(|| crate::adversary::eve_information_estimate(&observations)),
    }
}

// ---------------------------------------------------------------------
// Equivalence harness
// ---------------------------------------------------------------------

/// Uniformity check of the announced correction strings.
#[derive(Clone, Copy, Debug)]
pub struct UniformityCheck {
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Monte Carlo comparison of two protocols' observable statistics.
#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub trials: u64,
    pub cells: usize,
    pub tvd: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    pub correction_uniformity: [Option<UniformityCheck>; 2],
}

impl std::fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "trials={} cells={} tvd={:.6} chi2={:.3} dof={} p={:.4}",
            self.trials, self.cells, self.tvd, self.chi_square, self.dof, self.p_value
        )?;
        for (i, u) in self.correction_uniformity.iter().enumerate() {
            if let Some(u) = u {
                writeln!(
                    f,
                    "correction_uniformity[{i}]: chi2={:.3} dof={} p={:.4}",
                    u.chi_square, u.dof, u.p_value
                )?;
            }
        }
        Ok(())
    }
}

fn correction_uniformity(transcripts: &[Transcript], n: usize) -> Option<UniformityCheck> {
    if n > 12 {
        return None;
    }
    let mut counts = vec![0u64; 1 << n];
    let mut total = 0u64;
    for t in transcripts {
        if let Some(c) = &t.announcements.correction {
            let mut idx = 0usize;
            for i in c.ones() {
                idx |= 1 << i;
            }
            counts[idx] += 1;
            total += 1;
        }
    }
    if total < (1u64 << n) * 5 {
        return None;
    }
    let (chi_square, dof) = stats::chi_square_uniform(&counts);
    Some(UniformityCheck {
        chi_square,
        dof,
        p_value: stats::chi_square_p_value(chi_square, dof),
    })
}

/// Runs both protocols `trials` times with matched channel seeds and
/// compares the joint empirical distribution of the statistic vector
/// (abort, check errors, key agreement) by total-variation distance and a
/// chi-square homogeneity test; also reports the uniformity of each
/// protocol's announced correction string where applicable.
pub fn equivalence_harness(
    kind_a: ProtocolKind,
    cfg_a: &ProtocolConfig,
    kind_b: ProtocolKind,
    cfg_b: &ProtocolConfig,
    trials: u64,
    master: u64,
) -> Result<EquivalenceReport> {
    if cfg_a.n() != cfg_b.n() {
        return Err(Error::Unsupported(format!(
            "configuration mismatch: block sizes {} vs {}",
            cfg_a.n(),
            cfg_b.n()
        )));
    }
    if cfg_a.attack != cfg_b.attack {
        return Err(Error::Unsupported(
            "configuration mismatch: attack models differ".to_string(),
        ));
    }
    if !matches!(cfg_a.attack, AttackModel::None | AttackModel::IidPauli { .. }) {
        return Err(Error::Unsupported(
            "cross-protocol Monte Carlo comparison supports none/iid_pauli attacks".to_string(),
        ));
    }
    let a = run_trials(kind_a, cfg_a, master, trials)?;
    let b = run_trials(kind_b, cfg_b, master, trials)?;

    let mut counts_a: HashMap<Statistic, u64> = HashMap::new();
    for t in &a {
        *counts_a.entry(t.statistic()).or_default() += 1;
    }
    let mut counts_b: HashMap<Statistic, u64> = HashMap::new();
    for t in &b {
        *counts_b.entry(t.statistic()).or_default() += 1;
    }
    let tvd = stats::total_variation(&counts_a, &counts_b);
    let (chi_square, dof) = stats::chi_square_homogeneity(&counts_a, &counts_b);
    let p_value = stats::chi_square_p_value(chi_square, dof);
    let cells: std::collections::HashSet<&Statistic> =
        counts_a.keys().chain(counts_b.keys()).collect();

    Ok(EquivalenceReport {
        trials,
        cells: cells.len(),
        tvd,
        chi_square,
        dof,
        p_value,
        correction_uniformity: [
            correction_uniformity(&a, cfg_a.n()),
            correction_uniformity(&b, cfg_b.n()),
        ],
    })
}

/// Result of the exhaustive fixed-pattern comparison.
#[derive(Clone, Debug)]
pub struct ExhaustiveReport {
    pub patterns: usize,
    pub draws_per_pattern: usize,
    pub comparisons: u64,
    pub mismatches: u64,
    /// Description of the first mismatching comparison, for diagnostics.
    pub first_mismatch: Option<String>,
}

fn for_each_pattern(slots: usize, max_weight: usize, f: &mut impl FnMut(&BitVector, &BitVector)) {
    fn rec(
        slots: usize,
        start: usize,
        remaining: usize,
        support: &mut Vec<usize>,
        f: &mut impl FnMut(&BitVector, &BitVector),
    ) {
        if remaining == 0 {
            // Assign one of X, Y, Z to each chosen slot.
            let w = support.len();
            for assignment in 0..3usize.pow(w as u32) {
                let mut bit = BitVector::zeros(slots);
                let mut phase = BitVector::zeros(slots);
                let mut a = assignment;
                for &s in support.iter() {
                    match a % 3 {
                        0 => bit.set(s, true),
                        1 => {
                            bit.set(s, true);
                            phase.set(s, true);
                        }
                        _ => phase.set(s, true),
                    }
                    a /= 3;
                }
                f(&bit, &phase);
            }
            return;
        }
        for s in start..slots {
            support.push(s);
            rec(slots, s + 1, remaining - 1, support, f);
            support.pop();
        }
    }
    for w in 0..=max_weight {
        rec(slots, 0, w, &mut Vec::new(), f);
    }
}

/// Exhaustively enumerates every fixed Pauli pattern of weight at most
/// `max_weight` on the 2n transmitted positions and, for each, runs the
/// CSS-code and BB84 state machines on coupled draws: shared basis flags,
/// transmitted values, check set, and codeword. Under the coupling every
/// compared component (statistic vector, announced correction, both
/// keys) is a deterministic function of the draw, so the two runs must
/// match exactly; any difference counts as a mismatch.
pub fn equivalence_exhaustive_fixed_patterns(
    cfg: &ProtocolConfig,
    max_weight: usize,
    draws_per_pattern: usize,
    master: u64,
) -> Result<ExhaustiveReport> {
    let n = cfg.n();
    let pair = cfg.pair.as_ref();
    let mut patterns = 0usize;
    let mut comparisons = 0u64;
    let mut mismatches = 0u64;
    let mut first_mismatch: Option<String> = None;
    let mut failure: Option<Error> = None;

    for_each_pattern(2 * n, max_weight, &mut |slot_bit, slot_phase| {
        patterns += 1;
        if failure.is_some() {
            return;
        }
        for rep in 0..draws_per_pattern {
            let trial = (patterns * draws_per_pattern + rep) as u64;
            let mut streams = TrialStreams::new(master, trial);
            let b = BitVector::random(2 * n, &mut streams.prep);
            let s = BitVector::random(2 * n, &mut streams.prep);
            let check_slots = sample_subset(2 * n, n, &mut streams.prep);
            let codeword = pair.c1_gen().random_codeword(&mut streams.prep);
            let z = BitVector::random(n, &mut streams.prep);

            let run = || -> Result<(Transcript, Transcript)> {
                let code_slots = complement(2 * n, &check_slots);
                let key = pair.labeler().label(&codeword)?;
                let v_rep = pair.labeler().representative(&key)?;
                let draws = Protocol2Draws {
                    check_values: s.select(&check_slots),
                    key,
                    b: b.clone(),
                    x: s.select(&code_slots).add(&codeword)?,
                    z,
                    check_slots: check_slots.clone(),
                    c2_word: codeword.add(&v_rep)?,
                    permutation: None,
                };
                let css = run_protocol2_with(cfg, &draws, slot_bit, slot_phase, trial)?;

                let (eff_bit, _) = effective_flips(slot_bit, slot_phase, &b, None);
                let sifted: Vec<SiftedSlot> = (0..2 * n)
                    .map(|j| SiftedSlot {
                        position: j,
                        basis: if b.get(j) { Basis::X } else { Basis::Z },
                        alice_bit: s.get(j),
                        bob_bit: s.get(j) ^ eff_bit.get(j),
                    })
                    .collect();
                let selected: Vec<usize> = (0..2 * n).collect();
                let mut base = empty_transcript(ProtocolKind::Bb84, trial, n, n);
                base.sifted_count = Some(2 * n);
                base.announcements.basis_flags = b.clone();
                let bb84 = run_protocol3_postsift(
                    cfg,
                    &sifted,
                    &selected,
                    &check_slots,
                    &codeword,
                    base,
                )?;
                Ok((css, bb84))
            };
            match run() {
                Ok((css, bb84)) => {
                    comparisons += 1;
                    // The CSS protocol announces x before the check test;
                    // BB84 announces u + v only after the checks pass, so
                    // corrections are compared where both exist.
                    let corrections_match = match (
                        &css.announcements.correction,
                        &bb84.announcements.correction,
                    ) {
                        (Some(a), Some(b)) => a == b,
                        (Some(_), None) => bb84.abort.is_some(),
                        (None, _) => false,
                    };
                    let equal = css.statistic() == bb84.statistic()
                        && corrections_match
                        && css.alice_key == bb84.alice_key
                        && css.bob_key == bb84.bob_key;
                    if !equal {
                        mismatches += 1;
                        if first_mismatch.is_none() {
                            first_mismatch = Some(format!(
                                "pattern bit={slot_bit} phase={slot_phase} rep={rep}: \
                                 css {:?} keys {:?}/{:?} corr {:?} vs bb84 {:?} keys {:?}/{:?} corr {:?}",
                                css.statistic(),
                                css.alice_key,
                                css.bob_key,
                                css.announcements.correction,
                                bb84.statistic(),
                                bb84.alice_key,
                                bb84.bob_key,
                                bb84.announcements.correction,
                            ));
                        }
                    }
                }
                Err(e) => failure = Some(e),
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ExhaustiveReport {
        patterns,
        draws_per_pattern,
        comparisons,
        mismatches,
        first_mismatch,
    })
}

// ---------------------------------------------------------------------
// Phase-averaging identity
// ---------------------------------------------------------------------

/// Outcome of the phase-averaging check.
#[derive(Clone, Copy, Debug)]
pub struct ZAverageOutcome {
    pub max_deviation: f64,
}

impl ZAverageOutcome {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn ok(&self) -> bool {
        self.max_deviation <= Self::TOLERANCE
    }
}

/// Verifies, by exhaustive dense-oracle summation over all 2^n phase
/// patterns z, that averaging the codeword projectors |psi_{x,z}><...|
/// over z equals the uniform classical mixture over the basis states
/// |k' + x + w>, w in C2: the off-diagonal terms cancel and each support
/// state carries weight 1/|C2|.
pub fn z_average_check(
    pair: &CssCodePair,
    k_prime: &BitVector,
    x: &BitVector,
    cap: usize,
) -> Result<ZAverageOutcome> {
    let n = pair.n();
    if n > 16 {
        return Err(Error::Unsupported(format!(
            "phase averaging enumerates 2^n patterns; n = {n} is too large"
        )));
    }
    if !pair.c1_gen().row_space_contains(k_prime)? {
        return Err(Error::Membership { space: "C1" });
    }

    // Support is the same for every z; amplitudes are real.
    let zero = BitVector::zeros(n);
    let first = build_css_codeword(pair, k_prime, x, &zero, cap)?;
    let support: Vec<usize> = (0..1usize << n)
        .filter(|&i| first.amplitude(i).norm() > 0.0)
        .collect();
    let dim = support.len();

    let mut rho = vec![vec![0.0f64; dim]; dim];
    let z_count = 1usize << n;
    for z_bits in 0..z_count {
        let z = BitVector::from_bits((0..n).map(|i| (z_bits >> i) & 1 == 1));
        let state = build_css_codeword(pair, k_prime, x, &z, cap)?;
        for (a, &ia) in support.iter().enumerate() {
            let amp_a = state.amplitude(ia).re;
            for (b, &ib) in support.iter().enumerate() {
                rho[a][b] += amp_a * state.amplitude(ib).re / z_count as f64;
            }
        }
    }

    let target = 1.0 / dim as f64;
    let mut max_deviation = 0.0f64;
    for (a, row) in rho.iter().enumerate() {
        for (b, &entry) in row.iter().enumerate() {
            let expected = if a == b { target } else { 0.0 };
            max_deviation = max_deviation.max((entry - expected).abs());
        }
    }
    Ok(ZAverageOutcome { max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AttackModel;

    fn steane_config() -> ProtocolConfig {
        ProtocolConfig::new(CssCodePair::steane())
    }

    #[test]
    fn completeness_no_attack() {
        for pair in [
            CssCodePair::steane(),
            CssCodePair::toy3(),
            CssCodePair::three_qubit_repetition(),
        ] {
            for kind in [
                ProtocolKind::Purification,
                ProtocolKind::CssCode,
                ProtocolKind::Bb84,
            ] {
                let mut cfg = ProtocolConfig::new(pair.clone());
                // Generous sifting headroom so no-attack runs never abort.
                cfg.delta = 6.0;
                let transcripts = run_trials(kind, &cfg, 99, 100).unwrap();
                let summary = summarize(&transcripts);
                assert_eq!(summary.aborts, 0, "{kind} aborted at n={}", cfg.n());
                assert_eq!(summary.key_agreement_rate, Some(1.0), "{kind} keys differ");
                assert_eq!(summary.mean_check_error_rate, Some(0.0));
            }
        }
    }

    #[test]
    fn purification_tolerates_correctable_code_errors() {
        // A fixed pattern with one error on a code pair and none on the
        // checks is corrected: place a single flip on every slot in turn
        // and accept every non-check placement; check placements show up
        // as exactly one disagreement (below the threshold), so nothing
        // aborts and keys agree either way.
        let n = 7;
        for slot in 0..2 * n {
            for axis in 0..3 {
                let mut bit = BitVector::zeros(2 * n);
                let mut phase = BitVector::zeros(2 * n);
                match axis {
                    0 => bit.set(slot, true),
                    1 => {
                        bit.set(slot, true);
                        phase.set(slot, true);
                    }
                    _ => phase.set(slot, true),
                }
                let mut cfg = steane_config();
                cfg.attack = AttackModel::FixedPattern {
                    bit_err: bit,
                    phase_err: phase,
                };
                let t = run_protocol1(&cfg, 7, slot as u64).unwrap();
                assert!(t.abort.is_none(), "slot {slot} axis {axis}");
                assert_eq!(t.keys_agree(), Some(true), "slot {slot} axis {axis}");
            }
        }
    }

    #[test]
    fn heavy_noise_aborts() {
        // Bit-flip rate far above the threshold rate: essentially every
        // run aborts at the check stage.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let pair = CssCodePair::random_nested(100, 50, 25, 1, &mut rng).unwrap();
        let mut cfg = ProtocolConfig::new(pair);
        cfg.attack = AttackModel::IidPauli {
            px: 0.3,
            py: 0.0,
            pz: 0.0,
        };
        let transcripts = run_trials(ProtocolKind::Purification, &cfg, 11, 1000).unwrap();
        let summary = summarize(&transcripts);
        assert!(
            summary.abort_rate >= 0.99,
            "abort rate {}",
            summary.abort_rate
        );
    }

    #[test]
    fn css_protocol_corrects_single_errors() {
        let n = 7;
        for slot in 0..2 * n {
            let mut bit = BitVector::zeros(2 * n);
            bit.set(slot, true);
            let mut cfg = steane_config();
            cfg.attack = AttackModel::FixedPattern {
                bit_err: bit,
                phase_err: BitVector::zeros(2 * n),
            };
            let t = run_protocol2(&cfg, 3, slot as u64).unwrap();
            assert!(t.abort.is_none());
            assert_eq!(t.keys_agree(), Some(true), "slot {slot}");
        }
    }

    #[test]
    fn announce_z_flag_does_not_change_outcomes() {
        for trial in 0..50 {
            let mut with = steane_config();
            with.announce_z = true;
            with.attack = AttackModel::IidPauli {
                px: 0.05,
                py: 0.0,
                pz: 0.05,
            };
            let mut without = with.clone();
            without.announce_z = false;
            let a = run_protocol2(&with, 41, trial).unwrap();
            let b = run_protocol2(&without, 41, trial).unwrap();
            assert_eq!(a.statistic(), b.statistic());
            assert_eq!(a.alice_key, b.alice_key);
            assert_eq!(a.bob_key, b.bob_key);
            assert!(a.announcements.phase_correction.is_some());
            assert!(b.announcements.phase_correction.is_none());
        }
    }

    #[test]
    fn bb84_sift_abort_rate_matches_binomial() {
        // With delta = 0, sifting keeps each of the 4n positions with
        // probability 1/2 and the run aborts when fewer than 2n survive.
        let mut cfg = steane_config();
        cfg.delta = 0.0;
        let trials = 10_000u64;
        let transcripts = run_trials(ProtocolKind::Bb84, &cfg, 23, trials).unwrap();
        let aborted = transcripts
            .iter()
            .filter(|t| t.abort == Some(AbortReason::InsufficientSifted))
            .count() as f64;
        let rate = aborted / trials as f64;

        // Exact binomial tail: P(Bin(4n, 1/2) < 2n).
        let n = cfg.n();
        let total = 4 * n;
        let mut ln_fact = vec![0.0f64; total + 1];
        for i in 1..=total {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        let exact: f64 = (0..2 * n)
            .map(|k| {
                (ln_fact[total] - ln_fact[k] - ln_fact[total - k]
                    - total as f64 * std::f64::consts::LN_2)
                    .exp()
            })
            .sum();
        assert!(exact > 0.4 && exact < 0.5, "exact tail {exact}");
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!(
            (rate - exact).abs() < 3.0 * sigma,
            "abort rate {rate} vs exact {exact}"
        );
    }

    #[test]
    fn announced_correction_is_uniform() {
        // Announced u + v over many runs is uniform on F2^n.
        let cfg = ProtocolConfig::new(CssCodePair::toy3());
        let transcripts = run_trials(ProtocolKind::Bb84, &cfg, 31, 4000).unwrap();
        let check = correction_uniformity(&transcripts, 3).expect("enough samples");
        assert!(
            check.p_value > 1e-4,
            "uniformity rejected: chi2 {} p {}",
            check.chi_square,
            check.p_value
        );
    }

    #[test]
    fn abort_rate_monotone_in_error_rate() {
        // Common random numbers across a pure bit-flip rate grid.
        let mut last = -1.0f64;
        for &rate in &[0.0, 0.05, 0.1, 0.2, 0.3] {
            let mut cfg = steane_config();
            cfg.attack = AttackModel::IidPauli {
                px: rate,
                py: 0.0,
                pz: 0.0,
            };
            let transcripts = run_trials(ProtocolKind::CssCode, &cfg, 57, 2000).unwrap();
            let aborts = transcripts.iter().filter(|t| t.abort.is_some()).count() as f64;
            assert!(
                aborts >= last,
                "aborts decreased from {last} to {aborts} at rate {rate}"
            );
            last = aborts;
        }
    }

    #[test]
    fn scramble_spreads_fixed_patterns() {
        // With scrambling, a fixed single bit flip lands on a uniformly
        // random logical position, so the relative bit syndrome (when the
        // error hits the code block visibly) covers all seven H1 columns
        // uniformly; without scrambling the column is pinned by the slot.
        let n = 7;
        let mut bit = BitVector::zeros(2 * n);
        bit.set(0, true);
        let mut cfg = steane_config();
        cfg.scramble = true;
        cfg.attack = AttackModel::FixedPattern {
            bit_err: bit,
            phase_err: BitVector::zeros(2 * n),
        };
        let mut column_counts: HashMap<String, u64> = HashMap::new();
        let transcripts = run_trials(ProtocolKind::CssCode, &cfg, 71, 6000).unwrap();
        for t in &transcripts {
            if let Some(s) = &t.relative_bit_syndrome {
                if !s.is_zero() {
                    *column_counts.entry(s.to_string()).or_default() += 1;
                }
            }
        }
        assert_eq!(column_counts.len(), 7, "saw columns {column_counts:?}");
        let counts: Vec<u64> = column_counts.values().copied().collect();
        let (chi2, dof) = stats::chi_square_uniform(&counts);
        let p = stats::chi_square_p_value(chi2, dof);
        assert!(p > 1e-4, "syndrome columns not uniform: chi2 {chi2} p {p}");

        // No scrambling: single syndrome value only.
        cfg.scramble = false;
        let transcripts = run_trials(ProtocolKind::CssCode, &cfg, 71, 500).unwrap();
        let mut seen: std::collections::HashSet<String> = Default::default();
        for t in &transcripts {
            if let Some(s) = &t.relative_bit_syndrome {
                if !s.is_zero() {
                    seen.insert(s.to_string());
                }
            }
        }
        assert_eq!(seen.len(), 1, "unscrambled error wandered: {seen:?}");
    }

    #[test]
    fn multi_bit_keys_complete() {
        // A random nested pair with a 6-bit key: agreement must hold per
        // key bit through the coset labeling, not just for k = 1.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(25);
        let pair = CssCodePair::random_nested(24, 12, 6, 1, &mut rng).unwrap();
        assert_eq!(pair.key_bits(), 6);
        for kind in [
            ProtocolKind::Purification,
            ProtocolKind::CssCode,
            ProtocolKind::Bb84,
        ] {
            let mut cfg = ProtocolConfig::new(pair.clone());
            cfg.delta = 4.0;
            let transcripts = run_trials(kind, &cfg, 101, 50).unwrap();
            for t in &transcripts {
                assert!(t.abort.is_none(), "{kind} aborted");
                let key = t.alice_key.as_ref().unwrap();
                assert_eq!(key.len(), 6);
                assert_eq!(t.keys_agree(), Some(true), "{kind}");
            }
        }
    }

    #[test]
    fn scramble_invariant_for_iid_noise() {
        // A permutation cannot change the statistics of an exchangeable
        // channel: scrambled and unscrambled runs have the same law.
        let mut plain = steane_config();
        plain.attack = AttackModel::IidPauli {
            px: 0.05,
            py: 0.0,
            pz: 0.05,
        };
        let mut scrambled = plain.clone();
        scrambled.scramble = true;
        let a = run_trials(ProtocolKind::CssCode, &plain, 131, 10_000).unwrap();
        let b = run_trials(ProtocolKind::CssCode, &scrambled, 132, 10_000).unwrap();
        let mut counts_a: HashMap<Statistic, u64> = HashMap::new();
        for t in &a {
            *counts_a.entry(t.statistic()).or_default() += 1;
        }
        let mut counts_b: HashMap<Statistic, u64> = HashMap::new();
        for t in &b {
            *counts_b.entry(t.statistic()).or_default() += 1;
        }
        let (chi2, dof) = stats::chi_square_homogeneity(&counts_a, &counts_b);
        let p = stats::chi_square_p_value(chi2, dof);
        assert!(p > 1e-4, "scramble changed iid statistics: chi2 {chi2} p {p}");
    }

    #[test]
    fn scramble_is_transparent_without_attack() {
        let mut cfg = steane_config();
        cfg.scramble = true;
        cfg.delta = 6.0;
        for kind in [
            ProtocolKind::Purification,
            ProtocolKind::CssCode,
            ProtocolKind::Bb84,
        ] {
            let transcripts = run_trials(kind, &cfg, 83, 50).unwrap();
            let summary = summarize(&transcripts);
            assert_eq!(summary.aborts, 0);
            assert_eq!(summary.key_agreement_rate, Some(1.0));
        }
    }

    #[test]
    fn exhaustive_weight_one_patterns_match() {
        let cfg = steane_config();
        let report = equivalence_exhaustive_fixed_patterns(&cfg, 1, 5, 5).unwrap();
        assert_eq!(report.patterns, 1 + 14 * 3);
        assert_eq!(report.mismatches, 0);
    }

    #[test]
    fn mc_equivalence_css_vs_bb84() {
        let mut cfg = steane_config();
        cfg.delta = 4.0;
        cfg.attack = AttackModel::IidPauli {
            px: 0.03,
            py: 0.0,
            pz: 0.03,
        };
        let report = equivalence_harness(
            ProtocolKind::CssCode,
            &cfg,
            ProtocolKind::Bb84,
            &cfg,
            20_000,
            17,
        )
        .unwrap();
        assert!(report.tvd < 0.04, "tvd = {}", report.tvd);
        assert!(report.p_value > 1e-4, "p = {}", report.p_value);
    }

    #[test]
    fn mc_equivalence_purification_vs_css() {
        // Frame-level half of the chain: the purification and CSS-code
        // machines agree distributionally under iid Pauli noise.
        let mut cfg = steane_config();
        cfg.attack = AttackModel::IidPauli {
            px: 0.04,
            py: 0.01,
            pz: 0.03,
        };
        let report = equivalence_harness(
            ProtocolKind::Purification,
            &cfg,
            ProtocolKind::CssCode,
            &cfg,
            20_000,
            19,
        )
        .unwrap();
        assert!(report.tvd < 0.04, "tvd = {}", report.tvd);
        assert!(report.p_value > 1e-4, "p = {}", report.p_value);
    }

    #[test]
    fn harness_rejects_mismatched_configs() {
        let a = steane_config();
        let b = ProtocolConfig::new(CssCodePair::toy3());
        assert!(matches!(
            equivalence_harness(ProtocolKind::CssCode, &a, ProtocolKind::Bb84, &b, 10, 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn z_average_identity() {
        let pair = CssCodePair::steane();
        let zero = BitVector::zeros(7);
        let out = z_average_check(&pair, &zero, &zero, 12).unwrap();
        assert!(out.ok(), "deviation {}", out.max_deviation);

        // Nonzero key word and offset.
        let k = pair
            .labeler()
            .representative(&BitVector::from_bits([true]))
            .unwrap();
        let x: BitVector = "1100101".parse().unwrap();
        let out = z_average_check(&pair, &k, &x, 12).unwrap();
        assert!(out.ok(), "deviation {}", out.max_deviation);

        // Toy pair at n = 3.
        let toy = CssCodePair::toy3();
        let zero3 = BitVector::zeros(3);
        let out = z_average_check(&toy, &zero3, &zero3, 12).unwrap();
        assert!(out.ok());

        // Membership precondition.
        let mut bad = BitVector::zeros(7);
        bad.set(1, true);
        if !pair.c1_gen().row_space_contains(&bad).unwrap() {
            assert!(z_average_check(&pair, &bad, &zero, 12).is_err());
        }
    }
}
