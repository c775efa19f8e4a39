//! Dense brute-force state simulator for small qubit counts.
//!
//! Ground truth for codeword construction, operator identities, and
//! small-instance protocol equivalence. Amplitudes are stored as a full
//! complex vector, so the qubit count is capped (12 by default,
//! configurable up to the point where memory and patience run out).
//!
//! Qubit q corresponds to bit q of the basis-state index.

use num_complex::Complex64;
use rand::{Rng, RngExt};

use crate::css::CssCodePair;
use crate::gf2::BitVector;
use crate::{BellState, Error, PauliAxis, Result};

/// Default cap on the qubit count for dense states.
pub const DEFAULT_QUBIT_CAP: usize = 12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A pure state of `qubits` qubits as 2^qubits complex amplitudes.
#[derive(Clone, Debug)]
pub struct DenseState {
    qubits: usize,
    amps: Vec<Complex64>,
}

/// Named gates for [`DenseState::apply_gate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    Cnot,
}

impl DenseState {
    fn check_cap(qubits: usize, cap: usize) -> Result<()> {
        if qubits > cap {
            return Err(Error::QubitCap { qubits, cap });
        }
        Ok(())
    }

    /// The computational basis state with the given index.
    pub fn computational(qubits: usize, index: usize, cap: usize) -> Result<DenseState> {
        Self::check_cap(qubits, cap)?;
        let mut amps = vec![Complex64::ZERO; 1 << qubits];
        amps[index] = Complex64::ONE;
        Ok(DenseState { qubits, amps })
    }

    /// |0...0>.
    pub fn zero(qubits: usize, cap: usize) -> Result<DenseState> {
        Self::computational(qubits, 0, cap)
    }

    /// Builds a state from raw amplitudes; the norm must be 1 within
    /// 1e-10.
    pub fn from_amplitudes(qubits: usize, amps: Vec<Complex64>, cap: usize) -> Result<DenseState> {
        Self::check_cap(qubits, cap)?;
        if amps.len() != 1 << qubits {
            return Err(Error::Dimension {
                context: "DenseState::from_amplitudes",
                expected: 1 << qubits,
                got: amps.len(),
            });
        }
        let state = DenseState { qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain {
                what: "state norm",
                value: norm,
                domain: "1 +- 1e-10",
            });
        }
        Ok(state)
    }

    /// n perfect EPR pairs: pair i spans qubits (i, n + i), with all
    /// Alice halves below all Bob halves.
    pub fn epr_pairs(pairs: usize, cap: usize) -> Result<DenseState> {
        Self::check_cap(2 * pairs, cap)?;
        let mut amps = vec![Complex64::ZERO; 1 << (2 * pairs)];
        let amp = Complex64::new(((1 << pairs) as f64).recip().sqrt(), 0.0);
        for a in 0usize..(1 << pairs) {
            amps[a | (a << pairs)] = amp;
        }
        Ok(DenseState {
            qubits: 2 * pairs,
            amps,
        })
    }

    /// Places `inner` on the listed positions and fixes every other qubit
    /// to the given classical bit.
    pub fn embed(
        inner: &DenseState,
        positions: &[usize],
        fixed: &[(usize, bool)],
        qubits: usize,
        cap: usize,
    ) -> Result<DenseState> {
        Self::check_cap(qubits, cap)?;
        if positions.len() != inner.qubits || positions.len() + fixed.len() != qubits {
            return Err(Error::Dimension {
                context: "DenseState::embed",
                expected: qubits,
                got: positions.len() + fixed.len(),
            });
        }
        let mut base = 0usize;
        for &(q, b) in fixed {
            if b {
                base |= 1 << q;
            }
        }
        let mut amps = vec![Complex64::ZERO; 1 << qubits];
        for (local, &amp) in inner.amps.iter().enumerate() {
            if amp == Complex64::ZERO {
                continue;
            }
            let mut idx = base;
            for (j, &q) in positions.iter().enumerate() {
                if (local >> j) & 1 == 1 {
                    idx |= 1 << q;
                }
            }
            amps[idx] = amp;
        }
        Ok(DenseState { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Max-norm distance between amplitude vectors.
    pub fn distance(&self, other: &DenseState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubits {
            return Err(Error::IndexOutOfRange {
                index: q,
                len: self.qubits,
            });
        }
        Ok(())
    }

    /// Applies a 2x2 unitary to one qubit.
    pub fn apply_single(&mut self, q: usize, m: &[[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | mask];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Applies a 4x4 unitary to the ordered qubit pair (a, b); the local
    /// index is bit(a) + 2 bit(b).
    pub fn apply_two(&mut self, a: usize, b: usize, m: &[[Complex64; 4]; 4]) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::IndexOutOfRange {
                index: b,
                len: self.qubits,
            });
        }
        let ma = 1usize << a;
        let mb = 1usize << b;
        for i in 0..self.amps.len() {
            if i & ma == 0 && i & mb == 0 {
                let idx = [i, i | ma, i | mb, i | ma | mb];
                let old = idx.map(|j| self.amps[j]);
                for (r, &j) in idx.iter().enumerate() {
                    self.amps[j] = (0..4).map(|c| m[r][c] * old[c]).sum();
                }
            }
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        self.apply_single(q, &[[h, h], [h, -h]])
    }

    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                self.amps.swap(i, i | mask);
            }
        }
        Ok(())
    }

    pub fn apply_y(&mut self, q: usize) -> Result<()> {
        let i = Complex64::I;
        self.apply_single(q, &[[Complex64::ZERO, -i], [i, Complex64::ZERO]])
    }

    pub fn apply_z(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                self.amps[i] = -self.amps[i];
            }
        }
        Ok(())
    }

    /// S = diag(1, i).
    pub fn apply_s(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                self.amps[i] *= Complex64::I;
            }
        }
        Ok(())
    }

    pub fn apply_sdg(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                self.amps[i] *= -Complex64::I;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        let mc = 1usize << control;
        let mt = 1usize << target;
        for i in 0..self.amps.len() {
            if i & mc != 0 && i & mt == 0 {
                self.amps.swap(i, i | mt);
            }
        }
        Ok(())
    }

    /// Applies a named gate; H/X/Y/Z take one target, CNOT takes
    /// (control, target).
    pub fn apply_gate(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        match (gate, targets) {
            (Gate::H, [q]) => self.apply_h(*q),
            (Gate::X, [q]) => self.apply_x(*q),
            (Gate::Y, [q]) => self.apply_y(*q),
            (Gate::Z, [q]) => self.apply_z(*q),
            (Gate::Cnot, [c, t]) => self.apply_cnot(*c, *t),
            _ => Err(Error::Unsupported(format!(
                "gate {gate:?} does not take {} targets",
                targets.len()
            ))),
        }
    }

    pub fn hadamard_all(&mut self) {
        for q in 0..self.qubits {
            self.apply_h(q).expect("qubit in range");
        }
    }

    fn z_parity_plus_probability(&self, mask: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & mask).count_ones().is_multiple_of(2))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn collapse_z_parity(&mut self, mask: usize, even: bool, prob: f64) {
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            let is_even = (i & mask).count_ones().is_multiple_of(2);
            if is_even == even {
                *a *= scale;
            } else {
                *a = Complex64::ZERO;
            }
        }
    }

    fn support_mask(&self, support: &BitVector) -> Result<usize> {
        if support.len() != self.qubits {
            return Err(Error::Dimension {
                context: "pauli support",
                expected: self.qubits,
                got: support.len(),
            });
        }
        let mut mask = 0usize;
        for i in support.ones() {
            mask |= 1 << i;
        }
        Ok(mask)
    }

    fn conjugate_to_z(&mut self, axis: PauliAxis, support: &BitVector, forward: bool) {
        match axis {
            PauliAxis::Z => {}
            PauliAxis::X => {
                for q in support.ones().collect::<Vec<_>>() {
                    self.apply_h(q).expect("qubit in range");
                }
            }
            PauliAxis::Y => {
                // sigma_y = (H S!)! sigma_z (H S!), so rotate by S! then H
                // going in, and H then S coming back.
                for q in support.ones().collect::<Vec<_>>() {
                    if forward {
                        self.apply_sdg(q).expect("qubit in range");
                        self.apply_h(q).expect("qubit in range");
                    } else {
                        self.apply_h(q).expect("qubit in range");
                        self.apply_s(q).expect("qubit in range");
                    }
                }
            }
        }
    }

    /// Probability that measuring the Pauli string sigma_axis^\[support\]
    /// yields +1.
    pub fn pauli_plus_probability(&self, axis: PauliAxis, support: &BitVector) -> Result<f64> {
        let mask = self.support_mask(support)?;
        match axis {
            PauliAxis::Z => Ok(self.z_parity_plus_probability(mask)),
            _ => {
                let mut rotated = self.clone();
                rotated.conjugate_to_z(axis, support, true);
                Ok(rotated.z_parity_plus_probability(mask))
            }
        }
    }

    /// Projective measurement of the Pauli string sigma_axis^\[support\];
    /// returns the +-1 eigenvalue and leaves the renormalized eigenstate.
    pub fn measure_pauli<R: Rng>(
        &mut self,
        axis: PauliAxis,
        support: &BitVector,
        rng: &mut R,
    ) -> Result<i8> {
        let mask = self.support_mask(support)?;
        self.conjugate_to_z(axis, support, true);
        let p_plus = self.z_parity_plus_probability(mask);
        let plus = rng.random::<f64>() < p_plus;
        let prob = if plus { p_plus } else { 1.0 - p_plus };
        self.collapse_z_parity(mask, plus, prob);
        self.conjugate_to_z(axis, support, false);
        Ok(if plus { 1 } else { -1 })
    }

    /// Z-basis measurement of one qubit.
    pub fn measure_qubit_z<R: Rng>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        let p_zero = self.z_parity_plus_probability(mask);
        let zero = rng.random::<f64>() < p_zero;
        let prob = if zero { p_zero } else { 1.0 - p_zero };
        self.collapse_z_parity(mask, zero, prob);
        Ok(!zero)
    }

    /// Joint Z-basis outcome distribution over the listed qubits; entry b
    /// is the probability that qubit `qubits[j]` reads bit j of b.
    pub fn z_distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut bucket = 0usize;
            for (j, &q) in qubits.iter().enumerate() {
                if (i >> q) & 1 == 1 {
                    bucket |= 1 << j;
                }
            }
            out[bucket] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Projective measurement of the qubit pair (a, b) in the Bell basis;
    /// returns the label and leaves the projected state.
    pub fn bell_measure<R: Rng>(&mut self, a: usize, b: usize, rng: &mut R) -> Result<BellState> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::IndexOutOfRange {
                index: b,
                len: self.qubits,
            });
        }
        // CNOT then H maps the Bell basis to the computational basis:
        // bit(a) carries the phase bit, bit(b) the flip bit.
        self.apply_cnot(a, b)?;
        self.apply_h(a)?;
        let phase_bit = self.measure_qubit_z(a, rng)?;
        let flip_bit = self.measure_qubit_z(b, rng)?;
        self.apply_h(a)?;
        self.apply_cnot(a, b)?;
        Ok(match (flip_bit, phase_bit) {
            (false, false) => BellState::PhiPlus,
            (true, false) => BellState::PsiPlus,
            (false, true) => BellState::PhiMinus,
            (true, true) => BellState::PsiMinus,
        })
    }
}

/// One of the four Bell states as a dense 2-qubit state.
pub fn bell_state(which: BellState) -> DenseState {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut amps = vec![Complex64::ZERO; 4];
    match which {
        BellState::PhiPlus => {
            amps[0b00] = h;
            amps[0b11] = h;
        }
        BellState::PhiMinus => {
            amps[0b00] = h;
            amps[0b11] = -h;
        }
        BellState::PsiPlus => {
            amps[0b01] = h;
            amps[0b10] = h;
        }
        BellState::PsiMinus => {
            amps[0b01] = h;
            amps[0b10] = -h;
        }
    }
    DenseState { qubits: 2, amps }
}

fn bits_to_index(v: &BitVector) -> usize {
    let mut idx = 0usize;
    for i in v.ones() {
        idx |= 1 << i;
    }
    idx
}

/// Builds the CSS codeword with coset representative `v`, offset `x`, and
/// phase pattern `z`: amplitude (-1)^(z.w) / |C2|^(1/2) on |x + v + w>
/// for each w in C2.
pub fn build_css_codeword(
    pair: &CssCodePair,
    v: &BitVector,
    x: &BitVector,
    z: &BitVector,
    cap: usize,
) -> Result<DenseState> {
    DenseState::check_cap(pair.n(), cap)?;
    let description = pair.codeword_description(v, x, z)?;
    let amp = description.amplitude();
    let mut amps = vec![Complex64::ZERO; 1 << pair.n()];
    for (support, &sign) in description.support.iter().zip(&description.signs) {
        amps[bits_to_index(support)] = Complex64::new(f64::from(sign) * amp, 0.0);
    }
    Ok(DenseState {
        qubits: pair.n(),
        amps,
    })
}

/// Outcome of the transversal-Hadamard duality check.
#[derive(Clone, Debug)]
pub struct DualityOutcome {
    pub projector_distance: f64,
}

impl DualityOutcome {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn ok(&self) -> bool {
        self.projector_distance <= Self::TOLERANCE
    }
}

fn code_subspace_vectors(pair: &CssCodePair, cap: usize) -> Result<Vec<DenseState>> {
    let k = pair.key_bits();
    let zero = BitVector::zeros(pair.n());
    let mut out = Vec::with_capacity(1 << k);
    for bits in 0u32..(1 << k) {
        let label = BitVector::from_bits((0..k).map(|j| (bits >> j) & 1 == 1));
        let rep = pair.labeler().representative(&label)?;
        out.push(build_css_codeword(pair, &rep, &zero, &zero, cap)?);
    }
    Ok(out)
}

/// Max entrywise distance between the transversal-Hadamard image of the
/// code subspace projector of `pair` and the code subspace projector of
/// `candidate_dual`.
pub fn hadamard_image_distance(
    pair: &CssCodePair,
    candidate_dual: &CssCodePair,
    cap: usize,
) -> Result<f64> {
    if candidate_dual.n() != pair.n() {
        return Err(Error::Dimension {
            context: "hadamard_image_distance",
            expected: pair.n(),
            got: candidate_dual.n(),
        });
    }
    let mut rotated = code_subspace_vectors(pair, cap)?;
    for state in &mut rotated {
        state.hadamard_all();
    }
    let duals = code_subspace_vectors(candidate_dual, cap)?;
    let dim = 1usize << pair.n();
    let mut max_dev = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            let mut entry = Complex64::ZERO;
            for s in &rotated {
                entry += s.amplitude(r) * s.amplitude(c).conj();
            }
            for s in &duals {
                entry -= s.amplitude(r) * s.amplitude(c).conj();
            }
            max_dev = max_dev.max(entry.norm());
        }
    }
    Ok(max_dev)
}

/// Checks that the transversal Hadamard maps the code subspace onto the
/// subspace of the dual pair (C2⊥, C1⊥). The subspaces are interchanged
/// even though individual codewords are not.
pub fn verify_hadamard_duality(pair: &CssCodePair, cap: usize) -> Result<DualityOutcome> {
    let dual = pair.dual()?;
    let projector_distance = hadamard_image_distance(pair, &dual, cap)?;
    Ok(DualityOutcome { projector_distance })
}

/// Max entrywise deviations of the two Bell-projector identities used in
/// check-bit analysis:
///
/// |Psi+><Psi+| + |Psi-><Psi-| = |01><01| + |10><10|
/// |Phi-><Phi-| + |Psi-><Psi-| = |+-><+-| + |-+><-+|
pub fn bell_projector_identity_deviations() -> (f64, f64) {
    let outer_sum = |states: &[DenseState]| -> Vec<Vec<Complex64>> {
        let mut m = vec![vec![Complex64::ZERO; 4]; 4];
        for s in states {
            for (r, row) in m.iter_mut().enumerate() {
                for (c, entry) in row.iter_mut().enumerate() {
                    *entry += s.amplitude(r) * s.amplitude(c).conj();
                }
            }
        }
        m
    };
    let max_dev = |a: &[Vec<Complex64>], b: &[Vec<Complex64>]| -> f64 {
        let mut d = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                d = d.max((a[r][c] - b[r][c]).norm());
            }
        }
        d
    };

    let psi_sum = outer_sum(&[bell_state(BellState::PsiPlus), bell_state(BellState::PsiMinus)]);
    let anti = outer_sum(&[
        DenseState::computational(2, 0b01, 2).expect("static"),
        DenseState::computational(2, 0b10, 2).expect("static"),
    ]);
    let first = max_dev(&psi_sum, &anti);

    let phase_sum = outer_sum(&[bell_state(BellState::PhiMinus), bell_state(BellState::PsiMinus)]);
    let mut plus_minus = DenseState::computational(2, 0b10, 2).expect("static");
    plus_minus.apply_h(0).expect("in range");
    plus_minus.apply_h(1).expect("in range");
    let mut minus_plus = DenseState::computational(2, 0b01, 2).expect("static");
    minus_plus.apply_h(0).expect("in range");
    minus_plus.apply_h(1).expect("in range");
    let conjugate = outer_sum(&[plus_minus, minus_plus]);
    let second = max_dev(&phase_sum, &conjugate);

    (first, second)
}
