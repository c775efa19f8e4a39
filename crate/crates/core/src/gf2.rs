//! Bit-packed GF(2) vectors and matrices.
//!
//! Every code, syndrome, and error pattern in the crate is built on these
//! two types. Vectors pack bits into `u64` words with the tail kept
//! zeroed, so equality and hashing are plain word comparisons and the hot
//! operations (XOR, dot products, matrix-vector products) run word-wise.
//! All values are immutable once constructed by callers that share them
//! across Monte Carlo workers.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngExt};

use crate::{Error, Result};

const WORD_BITS: usize = 64;

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A dense GF(2) vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    /// The all-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; word_count(len)],
        }
    }

    /// Builds a vector from booleans.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = BitVector::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            if *b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector of the given length with ones at `indices`.
    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = BitVector::zeros(len);
        for &i in indices {
            v.set(i, true);
        }
        v
    }

    /// A uniformly random vector.
    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        let mut words = Vec::with_capacity(word_count(len));
        for _ in 0..word_count(len) {
            words.push(rng.random::<u64>());
        }
        let mut v = BitVector { len, words };
        v.mask_tail();
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Bitwise XOR; GF(2) addition is self-inverse and `v + 0 = v`.
    pub fn add(&self, rhs: &BitVector) -> Result<BitVector> {
        if self.len != rhs.len {
            return Err(Error::Dimension {
                context: "BitVector::add",
                expected: self.len,
                got: rhs.len,
            });
        }
        let mut out = self.clone();
        for (w, r) in out.words.iter_mut().zip(&rhs.words) {
            *w ^= r;
        }
        Ok(out)
    }

    /// In-place XOR. Panics on length mismatch; use [`BitVector::add`]
    /// for a checked version.
    pub fn xor_assign(&mut self, rhs: &BitVector) {
        assert_eq!(self.len, rhs.len, "xor_assign length mismatch");
        for (w, r) in self.words.iter_mut().zip(&rhs.words) {
            *w ^= r;
        }
    }

    /// Inner product mod 2.
    pub fn dot(&self, rhs: &BitVector) -> Result<bool> {
        if self.len != rhs.len {
            return Err(Error::Dimension {
                context: "BitVector::dot",
                expected: self.len,
                got: rhs.len,
            });
        }
        let parity: u32 = self
            .words
            .iter()
            .zip(&rhs.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(parity % 2 == 1)
    }

    /// Iterates bits from index 0.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Index of the first set bit.
    pub fn leading_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Gathers the bits at `indices` into a new vector (in index order).
    pub fn select(&self, indices: &[usize]) -> BitVector {
        BitVector::from_bits(indices.iter().map(|&i| self.get(i)))
    }

    /// Concatenates two vectors.
    pub fn concat(&self, rhs: &BitVector) -> BitVector {
        BitVector::from_bits(self.iter().chain(rhs.iter()))
    }

    fn mask_tail(&mut self) {
        let used = self.len % WORD_BITS;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = BitVector::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => {
                    return Err(Error::Parse(format!(
                        "invalid bit character {other:?} at position {i}"
                    )))
                }
            }
        }
        Ok(v)
    }
}

impl std::ops::BitXor for &BitVector {
    type Output = BitVector;

    fn bitxor(self, rhs: &BitVector) -> BitVector {
        self.add(rhs).expect("BitXor length mismatch")
    }
}

/// A dense GF(2) matrix stored as rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVector>,
}

/// Result of row reduction: the reduced matrix, its rank, and the pivot
/// columns in ascending order.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: BitMatrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: vec![BitVector::zeros(cols); rows],
        }
    }

    /// The 0-row matrix over `cols` columns (generator of the zero code).
    pub fn empty(cols: usize) -> Self {
        BitMatrix {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i].set(i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitVector>, cols: usize) -> Result<Self> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Dimension {
                    context: "BitMatrix::from_rows",
                    expected: cols,
                    got: r.len(),
                });
            }
        }
        Ok(BitMatrix {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed: Result<Vec<BitVector>> = rows.iter().map(|s| s.parse()).collect();
        let parsed = parsed?;
        let cols = parsed.first().map_or(0, BitVector::len);
        BitMatrix::from_rows(parsed, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.data[i]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &BitVector> {
        self.data.iter()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r].set(c, value);
    }

    /// Matrix-vector product `Mw`; result bit k is `row_k . w` mod 2.
    pub fn mul_vec(&self, w: &BitVector) -> Result<BitVector> {
        if w.len() != self.cols {
            return Err(Error::Dimension {
                context: "BitMatrix::mul_vec",
                expected: self.cols,
                got: w.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for (k, row) in self.data.iter().enumerate() {
            if row.dot(w)? {
                out.set(k, true);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.data[r].ones() {
                t.data[c].set(r, true);
            }
        }
        t
    }

    pub fn stack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension {
                context: "BitMatrix::stack",
                expected: self.cols,
                got: other.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        BitMatrix::from_rows(data, self.cols)
    }

    /// Reduced row echelon form. Pivot tie-breaking is leftmost column
    /// first, so the result is deterministic; the row space is preserved
    /// and the operation is idempotent.
    pub fn rref(&self) -> Rref {
        let mut data = self.data.clone();
        let mut pivot_cols = Vec::new();
        let mut r = 0usize;
        for col in 0..self.cols {
            let Some(pivot) = (r..self.rows).find(|&i| data[i].get(col)) else {
                continue;
            };
            data.swap(r, pivot);
            let pivot_row = data[r].clone();
            for (i, row) in data.iter_mut().enumerate() {
                if i != r && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivot_cols.push(col);
            r += 1;
            if r == self.rows {
                break;
            }
        }
        Rref {
            matrix: BitMatrix {
                rows: self.rows,
                cols: self.cols,
                data,
            },
            rank: r,
            pivot_cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// A basis (as rows) of `{v : Mv = 0}`; the row count is
    /// `cols - rank(M)`.
    pub fn nullspace(&self) -> BitMatrix {
        let Rref {
            matrix,
            rank,
            pivot_cols,
        } = self.rref();
        let pivot_set: std::collections::HashSet<usize> = pivot_cols.iter().copied().collect();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivot_set.contains(c)) {
            let mut v = BitVector::zeros(self.cols);
            v.set(free, true);
            for (row, &pc) in pivot_cols.iter().enumerate().take(rank) {
                if matrix.data[row].get(free) {
                    v.set(pc, true);
                }
            }
            basis.push(v);
        }
        BitMatrix {
            rows: basis.len(),
            cols: self.cols,
            data: basis,
        }
    }

    /// Whether `v` lies in the row space.
    pub fn row_space_contains(&self, v: &BitVector) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                context: "BitMatrix::row_space_contains",
                expected: self.cols,
                got: v.len(),
            });
        }
        let rref = self.rref();
        let mut rem = v.clone();
        for (row, &pc) in rref.pivot_cols.iter().enumerate() {
            if rem.get(pc) {
                rem.xor_assign(&rref.matrix.data[row]);
            }
        }
        Ok(rem.is_zero())
    }

    /// Whether the row space of `self` is contained in the row space of
    /// `other`.
    pub fn is_subspace_of(&self, other: &BitMatrix) -> Result<bool> {
        if self.cols != other.cols {
            return Err(Error::Dimension {
                context: "BitMatrix::is_subspace_of",
                expected: other.cols,
                got: self.cols,
            });
        }
        for row in &self.data {
            if !other.row_space_contains(row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Solves `Mx = rhs`, returning a particular solution (free variables
    /// zero) or `None` if the system is inconsistent.
    pub fn solve(&self, rhs: &BitVector) -> Result<Option<BitVector>> {
        if rhs.len() != self.rows {
            return Err(Error::Dimension {
                context: "BitMatrix::solve",
                expected: self.rows,
                got: rhs.len(),
            });
        }
        let mut data = self.data.clone();
        let mut aug: Vec<bool> = rhs.iter().collect();
        let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
        let mut r = 0usize;
        for col in 0..self.cols {
            let Some(pivot) = (r..self.rows).find(|&i| data[i].get(col)) else {
                continue;
            };
            data.swap(r, pivot);
            aug.swap(r, pivot);
            let pivot_row = data[r].clone();
            let pivot_aug = aug[r];
            for i in 0..self.rows {
                if i != r && data[i].get(col) {
                    let row = &mut data[i];
                    row.xor_assign(&pivot_row);
                    aug[i] ^= pivot_aug;
                }
            }
            pivots.push((r, col));
            r += 1;
            if r == self.rows {
                break;
            }
        }
        // Inconsistent when a zero row has a 1 on the augmented side.
        for i in r..self.rows {
            if aug[i] && data[i].is_zero() {
                return Ok(None);
            }
        }
        let mut x = BitVector::zeros(self.cols);
        for &(row, col) in &pivots {
            if aug[row] {
                x.set(col, true);
            }
        }
        Ok(Some(x))
    }

    /// A uniform sample from the row space. Sampling is over an RREF
    /// basis, so the result is uniform even if the stored rows are
    /// dependent.
    pub fn random_codeword<R: Rng>(&self, rng: &mut R) -> BitVector {
        let rref = self.rref();
        let mut v = BitVector::zeros(self.cols);
        for row in rref.matrix.data.iter().take(rref.rank) {
            if rng.random::<bool>() {
                v.xor_assign(row);
            }
        }
        v
    }

    /// Enumerates the full row space (2^rank vectors) in coefficient-lex
    /// order. Guarded against blowup; intended for small codes.
    pub fn enumerate_row_space(&self) -> Result<Vec<BitVector>> {
        let rref = self.rref();
        if rref.rank > 20 {
            return Err(Error::Unsupported(format!(
                "row space of dimension {} is too large to enumerate",
                rref.rank
            )));
        }
        let basis: Vec<&BitVector> = rref.matrix.data.iter().take(rref.rank).collect();
        let mut out = Vec::with_capacity(1 << basis.len());
        for coeffs in 0u32..(1 << basis.len()) {
            let mut v = BitVector::zeros(self.cols);
            for (j, row) in basis.iter().enumerate() {
                if (coeffs >> j) & 1 == 1 {
                    v.xor_assign(row);
                }
            }
            out.push(v);
        }
        Ok(out)
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.data {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({}x{})\n{}", self.rows, self.cols, self)
    }
}

/// Deterministic labeling of the cosets of C2 inside C1.
///
/// The label of `v` is the coefficient vector of `v` on a fixed extension
/// basis: an RREF basis of C2 extended to C1, fully reduced so each pivot
/// column appears in exactly one stored row. Labels are linear in `v`,
/// constant on cosets of C2, and injective across cosets, giving a
/// bijection between C1/C2 and k-bit strings with k = dim C1 - dim C2.
#[derive(Clone, Debug)]
pub struct CosetLabeler {
    n: usize,
    k: usize,
    /// Reduction rows sorted by pivot column; `ext` is the label index
    /// for extension rows, `None` for C2 basis rows.
    rows: Vec<ReduceRow>,
}

#[derive(Clone, Debug)]
struct ReduceRow {
    pivot: usize,
    vector: BitVector,
    ext: Option<usize>,
}

impl CosetLabeler {
    pub fn new(c1_gen: &BitMatrix, c2_gen: &BitMatrix) -> Result<Self> {
        if c1_gen.cols() != c2_gen.cols() {
            return Err(Error::Dimension {
                context: "CosetLabeler::new",
                expected: c1_gen.cols(),
                got: c2_gen.cols(),
            });
        }
        if !c2_gen.is_subspace_of(c1_gen)? {
            return Err(Error::InvalidCode(
                "C2 is not contained in C1".to_string(),
            ));
        }
        let n = c1_gen.cols();
        let mut rows: Vec<ReduceRow> = Vec::new();
        let c2 = c2_gen.rref();
        for row in c2.matrix.data.iter().take(c2.rank) {
            rows.push(ReduceRow {
                pivot: row.leading_one().expect("rref row nonzero"),
                vector: row.clone(),
                ext: None,
            });
        }
        let mut next_ext = 0usize;
        let c1 = c1_gen.rref();
        for row in c1.matrix.data.iter().take(c1.rank) {
            let mut rem = row.clone();
            for stored in &rows {
                if rem.get(stored.pivot) {
                    rem.xor_assign(&stored.vector);
                }
            }
            if rem.is_zero() {
                continue;
            }
            // The remainder's leading one sits at a fresh pivot column
            // and it is zero at every stored pivot, so the rows stay in
            // echelon form and one-pass reduction recovers the unique
            // triangular decomposition. The C2 rows are never modified,
            // which is what keeps labels constant on cosets.
            let pivot = rem.leading_one().expect("nonzero remainder");
            rows.push(ReduceRow {
                pivot,
                vector: rem,
                ext: Some(next_ext),
            });
            next_ext += 1;
            rows.sort_by_key(|r| r.pivot);
        }
        Ok(CosetLabeler {
            n,
            k: next_ext,
            rows,
        })
    }

    /// Label length: dim C1 - dim C2.
    pub fn key_bits(&self) -> usize {
        self.k
    }

    pub fn word_length(&self) -> usize {
        self.n
    }

    /// The canonical label of the coset `v + C2`. Errors if `v` is not in
    /// C1.
    pub fn label(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.n {
            return Err(Error::Dimension {
                context: "CosetLabeler::label",
                expected: self.n,
                got: v.len(),
            });
        }
        let mut rem = v.clone();
        let mut coeffs = BitVector::zeros(self.k);
        for row in &self.rows {
            if rem.get(row.pivot) {
                rem.xor_assign(&row.vector);
                if let Some(j) = row.ext {
                    coeffs.flip(j);
                }
            }
        }
        if !rem.is_zero() {
            return Err(Error::Membership { space: "C1" });
        }
        Ok(coeffs)
    }

    /// The canonical coset representative with the given label;
    /// `label(representative(l)) == l`.
    pub fn representative(&self, label: &BitVector) -> Result<BitVector> {
        if label.len() != self.k {
            return Err(Error::Dimension {
                context: "CosetLabeler::representative",
                expected: self.k,
                got: label.len(),
            });
        }
        let mut v = BitVector::zeros(self.n);
        for row in &self.rows {
            if let Some(j) = row.ext {
                if label.get(j) {
                    v.xor_assign(&row.vector);
                }
            }
        }
        Ok(v)
    }
}

/// Standalone coset label for one-off use; builds the labeler internally.
pub fn coset_label(v: &BitVector, c1_gen: &BitMatrix, c2_gen: &BitMatrix) -> Result<BitVector> {
    CosetLabeler::new(c1_gen, c2_gen)?.label(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hamming_check() -> BitMatrix {
        BitMatrix::from_strs(&["0001111", "0110011", "1010101"]).unwrap()
    }

    fn hamming_gen() -> BitMatrix {
        // Nullspace of the check matrix; dimension 4.
        hamming_check().nullspace()
    }

    #[test]
    fn add_examples() {
        let a: BitVector = "1011".parse().unwrap();
        let b: BitVector = "0110".parse().unwrap();
        assert_eq!(a.add(&b).unwrap().to_string(), "1101");
        assert!(a.add(&a).unwrap().is_zero());
        let zero = BitVector::zeros(4);
        assert_eq!(a.add(&zero).unwrap(), a);
        let short = BitVector::zeros(3);
        assert!(matches!(a.add(&short), Err(Error::Dimension { .. })));
    }

    #[test]
    fn mat_vec_examples() {
        let id = BitMatrix::identity(3);
        let w: BitVector = "101".parse().unwrap();
        assert_eq!(id.mul_vec(&w).unwrap(), w);

        let h = hamming_check();
        assert!(h.mul_vec(&BitVector::zeros(7)).unwrap().is_zero());
        for k in 0..7 {
            let e = BitVector::from_indices(7, &[k]);
            let syndrome = h.mul_vec(&e).unwrap();
            let column = BitVector::from_bits((0..3).map(|r| h.get(r, k)));
            assert_eq!(syndrome, column);
        }
    }

    #[test]
    fn rref_examples() {
        let id = BitMatrix::identity(4);
        let r = id.rref();
        assert_eq!(r.matrix, id);
        assert_eq!(r.rank, 4);

        let dup = BitMatrix::from_strs(&["1100", "1100", "0011"]).unwrap();
        assert_eq!(dup.rank(), 2);

        // Rank of the Hamming check matrix: enumerate its row space and
        // count distinct elements as an independent oracle.
        let h = hamming_check();
        let space = h.enumerate_row_space().unwrap();
        let distinct: std::collections::HashSet<String> =
            space.iter().map(|v| v.to_string()).collect();
        assert_eq!(distinct.len(), 8);
        assert_eq!(h.rank(), 3);
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(BitMatrix::identity(5).nullspace().rows(), 0);
        assert_eq!(BitMatrix::zeros(1, 6).nullspace().rows(), 6);

        // Brute force over all 2^7 vectors.
        let g = hamming_gen();
        let ns = g.nullspace();
        assert_eq!(ns.rows(), 3);
        let mut count = 0;
        for idx in 0u32..128 {
            let v = BitVector::from_bits((0..7).map(|b| (idx >> b) & 1 == 1));
            let in_null = g.mul_vec(&v).unwrap().is_zero();
            if in_null {
                count += 1;
                assert!(ns.row_space_contains(&v).unwrap());
            }
        }
        assert_eq!(count, 8);
    }

    #[test]
    fn subspace_examples() {
        let g = hamming_gen();
        assert!(g.is_subspace_of(&g).unwrap());
        let zero_row = BitMatrix::zeros(1, 7);
        assert!(zero_row.is_subspace_of(&g).unwrap());

        // Simplex [7,3] = row space of the Hamming check matrix; every one
        // of its 8 codewords has zero syndrome against the Hamming code.
        let simplex = hamming_check();
        let h = hamming_check();
        for w in simplex.enumerate_row_space().unwrap() {
            assert!(h.mul_vec(&w).unwrap().is_zero());
        }
        assert!(simplex.is_subspace_of(&g).unwrap());
        assert!(!g.is_subspace_of(&simplex).unwrap());
    }

    #[test]
    fn solve_finds_particular_solutions() {
        let h = hamming_check();
        for idx in 0u32..8 {
            let s = BitVector::from_bits((0..3).map(|b| (idx >> b) & 1 == 1));
            let x = h.solve(&s).unwrap().expect("full-rank check matrix");
            assert_eq!(h.mul_vec(&x).unwrap(), s);
        }
        // Inconsistent system.
        let m = BitMatrix::from_strs(&["1100", "1100"]).unwrap();
        let rhs: BitVector = "10".parse().unwrap();
        assert_eq!(m.solve(&rhs).unwrap(), None);
    }

    #[test]
    fn coset_label_steane_partition() {
        let c1 = hamming_gen();
        let c2 = hamming_check();
        let labeler = CosetLabeler::new(&c1, &c2).unwrap();
        assert_eq!(labeler.key_bits(), 1);

        // Exhaustive: partition the 16 C1 codewords by difference in C2.
        let words = c1.enumerate_row_space().unwrap();
        let mut labels = std::collections::HashSet::new();
        for v in &words {
            let lv = labeler.label(v).unwrap();
            labels.insert(lv.to_string());
            for w in c2.enumerate_row_space().unwrap() {
                let shifted = v.add(&w).unwrap();
                assert_eq!(labeler.label(&shifted).unwrap(), lv);
            }
        }
        assert_eq!(labels.len(), 2);

        // Identity coset labels to zero.
        for w in c2.enumerate_row_space().unwrap() {
            assert!(labeler.label(&w).unwrap().is_zero());
        }

        // Representative round-trips.
        for bit in [false, true] {
            let l = BitVector::from_bits([bit]);
            let rep = labeler.representative(&l).unwrap();
            assert_eq!(labeler.label(&rep).unwrap(), l);
        }

        // Membership error for vectors outside C1.
        let mut outside = None;
        for idx in 0u32..128 {
            let v = BitVector::from_bits((0..7).map(|b| (idx >> b) & 1 == 1));
            if !c1.row_space_contains(&v).unwrap() {
                outside = Some(v);
                break;
            }
        }
        assert!(matches!(
            labeler.label(&outside.unwrap()),
            Err(Error::Membership { .. })
        ));
    }

    #[test]
    fn random_codeword_uniform() {
        let gen = hamming_gen();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 100_000usize;
        let mut counts: std::collections::HashMap<String, usize> = Default::default();
        for _ in 0..trials {
            let w = gen.random_codeword(&mut rng);
            *counts.entry(w.to_string()).or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        // Chi-square against uniform over 16 cells, 15 dof; 99.99%
        // quantile is ~44.3.
        let expected = trials as f64 / 16.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 44.3, "chi2 = {chi2}");

        // Degenerate generators.
        let empty = BitMatrix::empty(5);
        assert!(empty.random_codeword(&mut rng).is_zero());
    }

    proptest! {
        #[test]
        fn mat_vec_distributes_over_add(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = 1 + (seed as usize % 6);
            let cols = 2 + (seed as usize % 9);
            let m = BitMatrix::from_rows(
                (0..rows).map(|_| BitVector::random(cols, &mut rng)).collect(),
                cols,
            ).unwrap();
            let a = BitVector::random(cols, &mut rng);
            let b = BitVector::random(cols, &mut rng);
            let lhs = m.mul_vec(&a.add(&b).unwrap()).unwrap();
            let rhs = m.mul_vec(&a).unwrap().add(&m.mul_vec(&b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn rank_nullity(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = 1 + (seed as usize % 7);
            let cols = 1 + (seed as usize % 10);
            let m = BitMatrix::from_rows(
                (0..rows).map(|_| BitVector::random(cols, &mut rng)).collect(),
                cols,
            ).unwrap();
            prop_assert_eq!(m.rank() + m.nullspace().rows(), cols);
        }

        #[test]
        fn rref_idempotent(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = 1 + (seed as usize % 7);
            let cols = 1 + (seed as usize % 10);
            let m = BitMatrix::from_rows(
                (0..rows).map(|_| BitVector::random(cols, &mut rng)).collect(),
                cols,
            ).unwrap();
            let once = m.rref().matrix;
            let twice = once.rref().matrix;
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn dual_of_dual_recovers_row_space(seed in 0u64..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = 1 + (seed as usize % 5);
            let cols = 2 + (seed as usize % 8);
            let m = BitMatrix::from_rows(
                (0..rows).map(|_| BitVector::random(cols, &mut rng)).collect(),
                cols,
            ).unwrap();
            let dd = m.nullspace().nullspace();
            prop_assert!(m.is_subspace_of(&dd).unwrap());
            prop_assert!(dd.is_subspace_of(&m).unwrap());
        }
    }
}
