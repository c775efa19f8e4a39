//! CSS code pairs, codeword descriptions, syndrome decoding, and the
//! binary-entropy rate formulas.
//!
//! A CSS code on n qubits is built from two nested binary codes
//! `{0} ⊂ C2 ⊂ C1 ⊂ F2^n`. Bit-flip errors are checked against H1, a
//! parity check matrix of C1; phase-flip errors against H2, a parity
//! check matrix of C2⊥ (equivalently, a generator of C2). The two checks
//! are decoupled, and the code space has dimension 2^(dim C1 - dim C2)
//! with basis states indexed by the cosets of C2 in C1.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;

use crate::gf2::{BitMatrix, BitVector, CosetLabeler};
use crate::{Error, Result};

/// Bit and phase syndromes measured against H1 and H2. Eigenvalue -1 of a
/// stabilizer corresponds to syndrome bit 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromePair {
    pub bit: BitVector,
    pub phase: BitVector,
}

/// First violated invariant of a candidate code pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeViolation {
    DimensionMismatch { c1_cols: usize, c2_cols: usize },
    NotNested,
    TrivialQuotient,
    CheckNotOrthogonal { check: &'static str },
}

impl fmt::Display for CodeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeViolation::DimensionMismatch { c1_cols, c2_cols } => {
                write!(f, "generators disagree on n: C1 has {c1_cols} columns, C2 has {c2_cols}")
            }
            CodeViolation::NotNested => write!(f, "C2 is not contained in C1"),
            CodeViolation::TrivialQuotient => {
                write!(f, "dim C1 - dim C2 = 0: the code protects nothing")
            }
            CodeViolation::CheckNotOrthogonal { check } => {
                write!(f, "orthogonality violated: {check}")
            }
        }
    }
}

/// Checks the nesting invariants on raw generators, reporting the first
/// violation.
pub fn validate_nested(c1_gen: &BitMatrix, c2_gen: &BitMatrix) -> std::result::Result<(), CodeViolation> {
    if c1_gen.cols() != c2_gen.cols() {
        return Err(CodeViolation::DimensionMismatch {
            c1_cols: c1_gen.cols(),
            c2_cols: c2_gen.cols(),
        });
    }
    if !c2_gen
        .is_subspace_of(c1_gen)
        .expect("dimensions checked above")
    {
        return Err(CodeViolation::NotNested);
    }
    if c1_gen.rank() == c2_gen.rank() {
        return Err(CodeViolation::TrivialQuotient);
    }
    Ok(())
}

/// Minimum-weight syndrome decoding table for errors of weight at most t.
///
/// Construction fails if two distinct weight-<=t errors share a syndrome,
/// i.e. if the code does not actually correct t errors.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    t: usize,
    map: HashMap<BitVector, BitVector>,
}

impl SyndromeTable {
    pub fn build(h: &BitMatrix, t: usize) -> Result<Self> {
        let n = h.cols();
        let mut map = HashMap::new();
        map.insert(BitVector::zeros(h.rows()), BitVector::zeros(n));
        let mut indices = vec![0usize; t];
        for w in 1..=t {
            let mut ok = Ok(());
            for_each_combination(n, w, &mut indices[..w], &mut |support| {
                let e = BitVector::from_indices(n, support);
                let s = h.mul_vec(&e).expect("error length matches h");
                if map.insert(s, e).is_some() && ok.is_ok() {
                    ok = Err(Error::InvalidCode(format!(
                        "two errors of weight <= {t} share a syndrome; the code does not correct {t} errors"
                    )));
                }
            });
            ok?;
        }
        Ok(SyndromeTable { t, map })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// The minimum-weight error with this syndrome, or `None` when the
    /// syndrome is outside the table (a detected, uncorrectable error).
    pub fn decode(&self, syndrome: &BitVector) -> Option<BitVector> {
        self.map.get(syndrome).cloned()
    }
}

fn for_each_combination(n: usize, w: usize, scratch: &mut [usize], f: &mut impl FnMut(&[usize])) {
    fn rec(n: usize, w: usize, start: usize, depth: usize, scratch: &mut [usize], f: &mut impl FnMut(&[usize])) {
        if depth == w {
            f(scratch);
            return;
        }
        for i in start..n {
            scratch[depth] = i;
            rec(n, w, i + 1, depth + 1, scratch, f);
        }
    }
    rec(n, w, 0, 0, scratch, f);
}

/// Decodes one syndrome against H with correction radius t; builds a
/// throwaway table, so prefer [`SyndromeTable`] in hot paths.
pub fn decode_syndrome(h: &BitMatrix, syndrome: &BitVector, t: usize) -> Result<Option<BitVector>> {
    if syndrome.len() != h.rows() {
        return Err(Error::Dimension {
            context: "decode_syndrome",
            expected: h.rows(),
            got: syndrome.len(),
        });
    }
    Ok(SyndromeTable::build(h, t)?.decode(syndrome))
}

/// A nested binary code pair and its derived machinery.
#[derive(Clone, Debug)]
pub struct CssCodePair {
    n: usize,
    t: usize,
    c1_gen: BitMatrix,
    c2_gen: BitMatrix,
    h1: BitMatrix,
    h2: BitMatrix,
    labeler: CosetLabeler,
    phase_labeler: CosetLabeler,
    bit_decoder: SyndromeTable,
    phase_decoder: SyndromeTable,
}

impl CssCodePair {
    /// Builds a pair from generators of C1 and C2, storing RREF bases.
    /// H1 is a parity check matrix of C1 (a basis of C1⊥) and H2 is a
    /// parity check matrix of C2⊥ (a basis of C2). Fails if the codes are
    /// not nested, the quotient is trivial, or either syndrome table
    /// cannot correct t errors.
    pub fn new(c1_gen: BitMatrix, c2_gen: BitMatrix, t: usize) -> Result<Self> {
        validate_nested(&c1_gen, &c2_gen).map_err(|v| Error::InvalidCode(v.to_string()))?;
        let c1_gen = reduced_basis(&c1_gen);
        let c2_gen = reduced_basis(&c2_gen);
        let h1 = c1_gen.nullspace();
        let h2 = c2_gen.clone();
        let labeler = CosetLabeler::new(&c1_gen, &c2_gen)?;
        let phase_labeler = CosetLabeler::new(&c2_gen.nullspace(), &c1_gen.nullspace())?;
        let bit_decoder = SyndromeTable::build(&h1, t)?;
        let phase_decoder = SyndromeTable::build(&h2, t)?;
        Ok(CssCodePair {
            n: c1_gen.cols(),
            t,
            c1_gen,
            c2_gen,
            h1,
            h2,
            labeler,
            phase_labeler,
            bit_decoder,
            phase_decoder,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Encoded bits: dim C1 - dim C2.
    pub fn key_bits(&self) -> usize {
        self.labeler.key_bits()
    }

    pub fn dim_c1(&self) -> usize {
        self.c1_gen.rows()
    }

    pub fn dim_c2(&self) -> usize {
        self.c2_gen.rows()
    }

    pub fn c1_gen(&self) -> &BitMatrix {
        &self.c1_gen
    }

    pub fn c2_gen(&self) -> &BitMatrix {
        &self.c2_gen
    }

    pub fn h1(&self) -> &BitMatrix {
        &self.h1
    }

    pub fn h2(&self) -> &BitMatrix {
        &self.h2
    }

    pub fn labeler(&self) -> &CosetLabeler {
        &self.labeler
    }

    /// Labeler for phase-error classes: cosets of C1⊥ inside C2⊥.
    pub fn phase_labeler(&self) -> &CosetLabeler {
        &self.phase_labeler
    }

    pub fn bit_decoder(&self) -> &SyndromeTable {
        &self.bit_decoder
    }

    pub fn phase_decoder(&self) -> &SyndromeTable {
        &self.phase_decoder
    }

    /// Re-checks every structural invariant, reporting the first failure.
    pub fn validate(&self) -> std::result::Result<(), CodeViolation> {
        validate_nested(&self.c1_gen, &self.c2_gen)?;
        for h_row in self.h1.iter_rows() {
            for g_row in self.c1_gen.iter_rows() {
                if h_row.dot(g_row).expect("equal lengths") {
                    return Err(CodeViolation::CheckNotOrthogonal {
                        check: "an H1 row is not orthogonal to C1",
                    });
                }
            }
            for g_row in self.c2_gen.iter_rows() {
                if h_row.dot(g_row).expect("equal lengths") {
                    return Err(CodeViolation::CheckNotOrthogonal {
                        check: "an H1 row is not orthogonal to C2 (C1⊥ and C2 must be orthogonal)",
                    });
                }
            }
        }
        let c2_perp = self.c2_gen.nullspace();
        for h_row in self.h2.iter_rows() {
            for p_row in c2_perp.iter_rows() {
                if h_row.dot(p_row).expect("equal lengths") {
                    return Err(CodeViolation::CheckNotOrthogonal {
                        check: "an H2 row is not orthogonal to C2⊥",
                    });
                }
            }
        }
        Ok(())
    }

    /// The dual pair (C1', C2') = (C2⊥, C1⊥). The dual of a valid pair is
    /// valid; its correction radius is the largest t' <= t that yields
    /// unambiguous syndrome tables.
    pub fn dual(&self) -> Result<CssCodePair> {
        let c1 = self.c2_gen.nullspace();
        let c2 = self.c1_gen.nullspace();
        let mut t = self.t;
        loop {
            match CssCodePair::new(c1.clone(), c2.clone(), t) {
                Ok(pair) => return Ok(pair),
                Err(_) if t > 0 => t -= 1,
                Err(e) => return Err(e),
            }
        }
    }

    /// Full description of the codeword indexed by coset representative
    /// `v` with offset `x` and phase pattern `z`: equal-magnitude
    /// amplitudes with sign (-1)^(z.w) on the basis states |x + v + w>
    /// for w in C2.
    pub fn codeword_description(
        &self,
        v: &BitVector,
        x: &BitVector,
        z: &BitVector,
    ) -> Result<CodewordDescription> {
        if x.len() != self.n || z.len() != self.n {
            return Err(Error::Dimension {
                context: "codeword_description",
                expected: self.n,
                got: if x.len() != self.n { x.len() } else { z.len() },
            });
        }
        if !self.c1_gen.row_space_contains(v)? {
            return Err(Error::Membership { space: "C1" });
        }
        let c2_words = self.c2_gen.enumerate_row_space()?;
        let base = x.add(v)?;
        let mut support = Vec::with_capacity(c2_words.len());
        let mut signs = Vec::with_capacity(c2_words.len());
        for w in &c2_words {
            support.push(base.add(w)?);
            signs.push(if z.dot(w)? { -1i8 } else { 1i8 });
        }
        Ok(CodewordDescription {
            offset: x.clone(),
            phase: z.clone(),
            representative: v.clone(),
            support,
            signs,
        })
    }

    /// Syndromes of a joint (bit, phase) error pattern: H1 acts on the
    /// bit errors and H2 on the phase errors, independently.
    pub fn syndromes_of_error(&self, bit_err: &BitVector, phase_err: &BitVector) -> Result<SyndromePair> {
        if bit_err.len() != self.n || phase_err.len() != self.n {
            return Err(Error::Dimension {
                context: "syndromes_of_error",
                expected: self.n,
                got: if bit_err.len() != self.n {
                    bit_err.len()
                } else {
                    phase_err.len()
                },
            });
        }
        Ok(SyndromePair {
            bit: self.h1.mul_vec(bit_err)?,
            phase: self.h2.mul_vec(phase_err)?,
        })
    }

    /// Corrects `noisy` to the nearest C1 codeword within radius t.
    pub fn correct_to_codeword(&self, noisy: &BitVector) -> Result<BitVector> {
        if noisy.len() != self.n {
            return Err(Error::Dimension {
                context: "correct_to_codeword",
                expected: self.n,
                got: noisy.len(),
            });
        }
        let syndrome = self.h1.mul_vec(noisy)?;
        let correction = self
            .bit_decoder
            .decode(&syndrome)
            .ok_or(Error::DecodeFailure { t: self.t })?;
        noisy.add(&correction)
    }

    /// Serializes to the plain-text exchange format: a header line with
    /// the parameters, then the C1 and C2 generator rows as 0/1 strings.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "css n={} dim1={} dim2={} t={}\n",
            self.n,
            self.dim_c1(),
            self.dim_c2(),
            self.t
        );
        out.push_str("C1\n");
        for row in self.c1_gen.iter_rows() {
            out.push_str(&row.to_string());
            out.push('\n');
        }
        out.push_str("C2\n");
        for row in self.c2_gen.iter_rows() {
            out.push_str(&row.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<CssCodePair> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty code file".into()))?;
        let mut n = None;
        let mut dim1 = None;
        let mut dim2 = None;
        let mut t = None;
        for field in header.split_whitespace().skip(1) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field {field:?}")))?;
            let value: usize = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad value in header field {field:?}")))?;
            match key {
                "n" => n = Some(value),
                "dim1" => dim1 = Some(value),
                "dim2" => dim2 = Some(value),
                "t" => t = Some(value),
                other => return Err(Error::Parse(format!("unknown header key {other:?}"))),
            }
        }
        let (n, dim1, dim2, t) = match (n, dim1, dim2, t) {
            (Some(n), Some(d1), Some(d2), Some(t)) => (n, d1, d2, t),
            _ => return Err(Error::Parse("header must set n, dim1, dim2, t".into())),
        };
        let mut read_block = |label: &str, count: usize| -> Result<BitMatrix> {
            match lines.next() {
                Some(l) if l.trim() == label => {}
                other => return Err(Error::Parse(format!("expected {label:?} marker, got {other:?}"))),
            }
            let mut rows = Vec::with_capacity(count);
            for _ in 0..count {
                let line = lines
                    .next()
                    .ok_or_else(|| Error::Parse(format!("truncated {label} block")))?;
                let row: BitVector = line.trim().parse()?;
                if row.len() != n {
                    return Err(Error::Parse(format!(
                        "{label} row has {} bits, header says n={n}",
                        row.len()
                    )));
                }
                rows.push(row);
            }
            BitMatrix::from_rows(rows, n)
        };
        let c1 = read_block("C1", dim1)?;
        let c2 = read_block("C2", dim2)?;
        CssCodePair::new(c1, c2, t)
    }

    /// The Steane pair: C1 = Hamming \[7,4,3\], C2 = its dual \[7,3,4\],
    /// t = 1, one encoded bit. The smallest nontrivial nested pair.
    pub fn steane() -> CssCodePair {
        let check = BitMatrix::from_strs(&["0001111", "0110011", "1010101"]).expect("static");
        let c1 = check.nullspace();
        CssCodePair::new(c1, check, 1).expect("Steane pair is valid")
    }

    /// Three-qubit repetition pair: C1 = {000, 111}, C2 = {000}. Corrects
    /// no phase errors, so t = 0.
    pub fn three_qubit_repetition() -> CssCodePair {
        let c1 = BitMatrix::from_strs(&["111"]).expect("static");
        let c2 = BitMatrix::empty(3);
        CssCodePair::new(c1, c2, 0).expect("repetition pair is valid")
    }

    /// Nested three-qubit toy pair: C1 = span{111, 110}, C2 = span{111},
    /// one encoded bit, t = 0. Small enough for dense-oracle protocol
    /// runs (a full purification round fits in 12 qubits).
    pub fn toy3() -> CssCodePair {
        let c1 = BitMatrix::from_strs(&["111", "110"]).expect("static");
        let c2 = BitMatrix::from_strs(&["111"]).expect("static");
        CssCodePair::new(c1, c2, 0).expect("toy pair is valid")
    }

    /// A random nested pair for larger-n Monte Carlo: dim2 < dim1 < n,
    /// C2 a random subcode of a random C1. The correction radius is the
    /// largest t <= t_cap with unambiguous syndrome tables.
    pub fn random_nested<R: Rng>(
        n: usize,
        dim1: usize,
        dim2: usize,
        t_cap: usize,
        rng: &mut R,
    ) -> Result<CssCodePair> {
        if !(dim2 < dim1 && dim1 < n) {
            return Err(Error::InvalidCode(format!(
                "need dim2 < dim1 < n, got n={n} dim1={dim1} dim2={dim2}"
            )));
        }
        let c1 = random_full_rank(dim1, n, rng);
        // Random dim2-dimensional subcode: full-rank coefficient rows.
        let coeff = random_full_rank(dim2, dim1, rng);
        let mut c2_rows = Vec::with_capacity(dim2);
        for cr in coeff.iter_rows() {
            let mut row = BitVector::zeros(n);
            for j in cr.ones() {
                row.xor_assign(c1.row(j));
            }
            c2_rows.push(row);
        }
        let c2 = BitMatrix::from_rows(c2_rows, n)?;
        let mut t = t_cap;
        loop {
            match CssCodePair::new(c1.clone(), c2.clone(), t) {
                Ok(pair) => return Ok(pair),
                Err(_) if t > 0 => t -= 1,
                Err(e) => return Err(e),
            }
        }
    }
}

fn reduced_basis(m: &BitMatrix) -> BitMatrix {
    let rref = m.rref();
    let rows: Vec<BitVector> = rref
        .matrix
        .iter_rows()
        .take(rref.rank)
        .cloned()
        .collect();
    BitMatrix::from_rows(rows, m.cols()).expect("rref rows have matching length")
}

fn random_full_rank<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> BitMatrix {
    loop {
        let m = BitMatrix::from_rows(
            (0..rows).map(|_| BitVector::random(cols, rng)).collect(),
            cols,
        )
        .expect("generated rows have matching length");
        if m.rank() == rows {
            return m;
        }
    }
}

/// One CSS codeword spelled out: support vectors and signs.
#[derive(Clone, Debug)]
pub struct CodewordDescription {
    pub offset: BitVector,
    pub phase: BitVector,
    pub representative: BitVector,
    pub support: Vec<BitVector>,
    pub signs: Vec<i8>,
}

impl CodewordDescription {
    /// Common amplitude magnitude, |C2|^(-1/2).
    pub fn amplitude(&self) -> f64 {
        1.0 / (self.support.len() as f64).sqrt()
    }
}

/// Binary Shannon entropy H(p) = -p log2 p - (1-p) log2 (1-p), with the
/// endpoint convention H(0) = H(1) = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Domain {
            what: "p",
            value: p,
            domain: "[0, 1]",
        });
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Worst-case (Gilbert–Varshamov) asymptotic key rate 1 - 2 H(2 delta).
/// May be negative; clamping is the caller's policy.
pub fn gv_rate(delta: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&delta) || delta.is_nan() {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
            domain: "[0, 1/2]",
        });
    }
    Ok(1.0 - 2.0 * binary_entropy(2.0 * delta)?)
}

/// Random-error (Shannon) asymptotic key rate 1 - 2 H(delta). May be
/// negative; clamping is the caller's policy.
pub fn shannon_rate(delta: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&delta) || delta.is_nan() {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
            domain: "[0, 1/2]",
        });
    }
    Ok(1.0 - 2.0 * binary_entropy(delta)?)
}

/// The error rate at which the Shannon rate hits zero, computed by
/// bisection to absolute tolerance 1e-9. Just above 11%.
pub fn shannon_threshold() -> f64 {
    let mut lo = 1e-12;
    let mut hi = 0.5;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if shannon_rate(mid).expect("mid in domain") > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steane_pair_validates() {
        let pair = CssCodePair::steane();
        assert_eq!(pair.n(), 7);
        assert_eq!(pair.key_bits(), 1);
        assert_eq!(pair.dim_c1(), 4);
        assert_eq!(pair.dim_c2(), 3);
        assert!(pair.validate().is_ok());

        // Brute-force containment: every C2 word has zero H1 syndrome.
        for w in pair.c2_gen().enumerate_row_space().unwrap() {
            assert!(pair.h1().mul_vec(&w).unwrap().is_zero());
        }
    }

    #[test]
    fn equal_codes_rejected() {
        let g = CssCodePair::steane().c1_gen().clone();
        assert_eq!(
            validate_nested(&g, &g),
            Err(CodeViolation::TrivialQuotient)
        );
        assert!(CssCodePair::new(g.clone(), g, 1).is_err());
    }

    #[test]
    fn swapped_roles_rejected() {
        let steane = CssCodePair::steane();
        let c1 = steane.c2_gen().clone(); // [7,3]
        let c2 = steane.c1_gen().clone(); // [7,4]
        assert_eq!(validate_nested(&c1, &c2), Err(CodeViolation::NotNested));
        // Exhibit a witness: some C2 word with nonzero syndrome against
        // the would-be C1.
        let h = c1.nullspace();
        let witness = c2
            .enumerate_row_space()
            .unwrap()
            .into_iter()
            .find(|w| !h.mul_vec(w).unwrap().is_zero());
        assert!(witness.is_some());
    }

    #[test]
    fn codeword_description_examples() {
        let pair = CssCodePair::steane();
        let zero = BitVector::zeros(7);

        let d = pair.codeword_description(&zero, &zero, &zero).unwrap();
        assert_eq!(d.support.len(), 8);
        assert!(d.signs.iter().all(|&s| s == 1));
        assert!((d.amplitude() - 1.0 / 8f64.sqrt()).abs() < 1e-15);
        let c2_words: std::collections::HashSet<String> = pair
            .c2_gen()
            .enumerate_row_space()
            .unwrap()
            .iter()
            .map(|w| w.to_string())
            .collect();
        for s in &d.support {
            assert!(c2_words.contains(&s.to_string()));
        }

        // z = 0 keeps all signs +1 regardless of x.
        let x: BitVector = "1010011".parse().unwrap();
        let d = pair.codeword_description(&zero, &x, &zero).unwrap();
        assert!(d.signs.iter().all(|&s| s == 1));
        for s in &d.support {
            assert!(c2_words.contains(&s.add(&x).unwrap().to_string()));
        }

        // Representatives of the same coset give the same support set.
        let v1 = pair.labeler().representative(&BitVector::from_bits([true])).unwrap();
        let w = pair.c2_gen().row(0).clone();
        let v2 = v1.add(&w).unwrap();
        let d1 = pair.codeword_description(&v1, &zero, &zero).unwrap();
        let d2 = pair.codeword_description(&v2, &zero, &zero).unwrap();
        let set1: std::collections::HashSet<String> =
            d1.support.iter().map(|s| s.to_string()).collect();
        let set2: std::collections::HashSet<String> =
            d2.support.iter().map(|s| s.to_string()).collect();
        assert_eq!(set1, set2);

        // Membership error.
        let mut not_in_c1 = BitVector::zeros(7);
        not_in_c1.set(0, true);
        if !pair.c1_gen().row_space_contains(&not_in_c1).unwrap() {
            assert!(matches!(
                pair.codeword_description(&not_in_c1, &zero, &zero),
                Err(Error::Membership { .. })
            ));
        }
    }

    #[test]
    fn syndromes_decouple() {
        let pair = CssCodePair::steane();
        let zero = BitVector::zeros(7);
        let s = pair.syndromes_of_error(&zero, &zero).unwrap();
        assert!(s.bit.is_zero() && s.phase.is_zero());

        for k in 0..7 {
            let e = BitVector::from_indices(7, &[k]);
            let s = pair.syndromes_of_error(&e, &zero).unwrap();
            let col = BitVector::from_bits((0..pair.h1().rows()).map(|r| pair.h1().get(r, k)));
            assert_eq!(s.bit, col);
            assert!(s.phase.is_zero());

            // Bit syndrome ignores the phase error and vice versa.
            for j in 0..7 {
                let pe = BitVector::from_indices(7, &[j]);
                let joint = pair.syndromes_of_error(&e, &pe).unwrap();
                assert_eq!(joint.bit, s.bit);
                assert_eq!(joint.phase, pair.syndromes_of_error(&zero, &pe).unwrap().phase);
            }
        }
    }

    #[test]
    fn decode_table_exhaustive_weight_one() {
        let pair = CssCodePair::steane();
        // Bijection between weight-<=1 errors and syndromes.
        assert!(pair
            .bit_decoder()
            .decode(&BitVector::zeros(3))
            .unwrap()
            .is_zero());
        for k in 0..7 {
            let e = BitVector::from_indices(7, &[k]);
            let s = pair.h1().mul_vec(&e).unwrap();
            assert_eq!(pair.bit_decoder().decode(&s).unwrap(), e);
        }

        // A weight-2 error decodes to some weight-<=1 pattern; only
        // weight-<=t correction is guaranteed.
        let e2 = BitVector::from_indices(7, &[0, 3]);
        let s2 = pair.h1().mul_vec(&e2).unwrap();
        let decoded = pair.bit_decoder().decode(&s2).unwrap();
        assert!(decoded.weight() <= 1);
        assert_ne!(decoded, e2);
    }

    #[test]
    fn ambiguous_table_rejected() {
        // The Hamming check matrix cannot correct 2 errors.
        let h = CssCodePair::steane().h1().clone();
        assert!(SyndromeTable::build(&h, 2).is_err());
        assert!(SyndromeTable::build(&h, 1).is_ok());
    }

    #[test]
    fn correct_to_codeword_exhaustive() {
        let pair = CssCodePair::steane();
        let words = pair.c1_gen().enumerate_row_space().unwrap();
        assert_eq!(words.len(), 16);
        for v in &words {
            assert_eq!(&pair.correct_to_codeword(v).unwrap(), v);
            for k in 0..7 {
                let mut noisy = v.clone();
                noisy.flip(k);
                assert_eq!(&pair.correct_to_codeword(&noisy).unwrap(), v);
            }
        }
    }

    #[test]
    fn decode_failure_on_undecodable_syndrome() {
        // toy3 has t = 0: any nonzero syndrome is a detected failure.
        let pair = CssCodePair::toy3();
        let mut noisy = pair.c1_gen().row(0).clone();
        noisy.flip(0);
        if !pair.h1().mul_vec(&noisy).unwrap().is_zero() {
            assert!(matches!(
                pair.correct_to_codeword(&noisy),
                Err(Error::DecodeFailure { .. })
            ));
        }
    }

    #[test]
    fn entropy_and_rates() {
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());

        // H(0.11) is within a whisker of 1/2, so the Shannon rate is
        // within a whisker of zero.
        let h011 = binary_entropy(0.11).unwrap();
        assert!((h011 - 0.5).abs() < 1e-3, "H(0.11) = {h011}");
        let r = shannon_rate(0.11).unwrap();
        assert!(r > 0.0 && r < 1e-3, "rate(0.11) = {r}");

        assert!((shannon_rate(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((gv_rate(0.25).unwrap() + 1.0).abs() < 1e-12);
        assert!(gv_rate(0.6).is_err());
    }

    #[test]
    fn threshold_near_eleven_percent() {
        let thr = shannon_threshold();
        assert!(thr > 0.109 && thr < 0.111, "threshold = {thr}");
        assert!(shannon_rate(thr).unwrap().abs() < 1e-8);
        assert!(shannon_rate(thr - 0.01).unwrap() > 0.0);
        assert!(shannon_rate(thr + 0.01).unwrap() < 0.0);
    }

    #[test]
    fn text_round_trip() {
        let pair = CssCodePair::steane();
        let text = pair.to_text();
        let back = CssCodePair::from_text(&text).unwrap();
        assert_eq!(back.n(), pair.n());
        assert_eq!(back.c1_gen(), pair.c1_gen());
        assert_eq!(back.c2_gen(), pair.c2_gen());
        assert_eq!(back.t(), pair.t());
    }

    #[test]
    fn text_parser_rejects_malformed_input() {
        let good = CssCodePair::steane().to_text();
        assert!(CssCodePair::from_text("nonsense").is_err());
        // Truncated block.
        let truncated: String = good.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(CssCodePair::from_text(&truncated).is_err());
        // Row length disagrees with the header.
        assert!(CssCodePair::from_text(&good.replace("0001111", "00011")).is_err());
        // Non-bit characters.
        assert!(CssCodePair::from_text(&good.replace('1', "x")).is_err());
        // Unknown header key.
        assert!(CssCodePair::from_text(&good.replace("t=1", "q=1")).is_err());
        // A t the code cannot honor.
        assert!(CssCodePair::from_text(&good.replace("t=1", "t=3")).is_err());
    }

    #[test]
    fn random_nested_builds_valid_pairs() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pair = CssCodePair::random_nested(24, 12, 6, 1, &mut rng).unwrap();
        assert_eq!(pair.n(), 24);
        assert_eq!(pair.key_bits(), 6);
        assert!(pair.validate().is_ok());
    }
}
