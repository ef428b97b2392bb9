//! Dense linear algebra over GF(2).
//!
//! Everything else in this crate reduces to rank, kernel, solve and product
//! computations on binary matrices, so rows are bit-packed into `u64` words
//! and all row operations are word-parallel XORs. Matrices are immutable in
//! shape after construction; every public operation keeps entries in {0,1}
//! with arithmetic mod 2.

use rand::Rng;
use std::fmt;
use thiserror::Error;

const WORD_BITS: usize = 64;

/// Enumeration guard for [`enumerate_subspaces`]: beyond this the Gaussian
/// binomial counts are astronomically large and enumeration would hang.
pub const SUBSPACE_ENUM_LIMIT: usize = 14;

/// Guard for [`sample_symplectic`].
pub const SYMPLECTIC_SAMPLE_LIMIT: usize = 64;

/// Guard for [`enumerate_symplectic`]; |Sp(6,2)| = 1451520 is the largest
/// group we are willing to materialize.
pub const SYMPLECTIC_ENUM_LIMIT: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("size {size} exceeds guard {limit}")]
    TooLarge { size: usize, limit: usize },
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A vector over GF(2) with immutable length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; words_for(len)] }
    }

    /// Build from a slice of 0/1 entries.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            debug_assert!(b <= 1);
            if b == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// Standard basis vector e_i (0-based).
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = BitVector::zeros(len);
        v.set(i, true);
        v
    }

    /// Interpret the low `len` bits of `x`; bit 0 of `x` becomes entry 0.
    pub fn from_u64(len: usize, x: u64) -> Self {
        assert!(len <= 64);
        let mut v = BitVector::zeros(len);
        if len > 0 {
            let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
            v.words[0] = x & mask;
        }
        v
    }

    /// Inverse of [`BitVector::from_u64`]; requires `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64);
        if self.len == 0 {
            0
        } else {
            self.words[0]
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        let w = i / WORD_BITS;
        let b = i % WORD_BITS;
        if value {
            self.words[w] |= 1u64 << b;
        } else {
            self.words[w] &= !(1u64 << b);
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Elementwise product (the ⊙ of two columns).
    pub fn and(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len);
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        out
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in 0..self.len {
            if self.get(i) {
                out.set(i, true);
            }
        }
        for i in 0..other.len {
            if other.get(i) {
                out.set(self.len + i, true);
            }
        }
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        assert!(start + len <= self.len);
        let mut out = BitVector::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter_bits() {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A dense matrix over GF(2), bit-packed by row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    wpr: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let wpr = words_for(cols);
        BitMatrix { rows, cols, wpr, words: vec![0; rows * wpr] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// All-ones matrix.
    pub fn ones(rows: usize, cols: usize) -> Self {
        BitMatrix::from_fn(rows, cols, |_, _| true)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Test convenience: rows given as 0/1 slices.
    pub fn from_bit_rows(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        BitMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c] == 1)
    }

    pub fn from_rows(rows: &[BitVector]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            m.set_row(i, r);
        }
        m
    }

    pub fn from_cols(cols: &[BitVector]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        let mut m = BitMatrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            m.set_col(j, c);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.words[r * self.wpr + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        let idx = r * self.wpr + c / WORD_BITS;
        let b = c % WORD_BITS;
        if value {
            self.words[idx] |= 1u64 << b;
        } else {
            self.words[idx] &= !(1u64 << b);
        }
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.words[r * self.wpr..(r + 1) * self.wpr]
    }

    /// dst ^= src, as whole rows.
    fn xor_row_into(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        let (s, d) = (src * self.wpr, dst * self.wpr);
        for k in 0..self.wpr {
            self.words[d + k] ^= self.words[s + k];
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.wpr {
            self.words.swap(a * self.wpr + k, b * self.wpr + k);
        }
    }

    pub fn row(&self, r: usize) -> BitVector {
        let mut v = BitVector::zeros(self.cols);
        v.words.copy_from_slice(self.row_words(r));
        v
    }

    pub fn col(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn set_row(&mut self, r: usize, v: &BitVector) {
        assert_eq!(v.len, self.cols);
        self.words[r * self.wpr..(r + 1) * self.wpr].copy_from_slice(&v.words);
    }

    pub fn set_col(&mut self, c: usize, v: &BitVector) {
        assert_eq!(v.len, self.rows);
        for r in 0..self.rows {
            self.set(r, c, v.get(r));
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.set(c, r, true);
                }
            }
        }
        out
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in mul");
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    let (dst, src) = (i * out.wpr, j * rhs.wpr);
                    for k in 0..out.wpr {
                        out.words[dst + k] ^= rhs.words[src + k];
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.cols, v.len);
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let mut acc = 0u64;
            for (a, b) in self.row_words(r).iter().zip(&v.words) {
                acc ^= a & b;
            }
            if acc.count_ones() % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// Entrywise sum (XOR).
    pub fn add(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
        out
    }

    /// Kronecker product.
    pub fn kron(&self, rhs: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    for u in 0..rhs.rows {
                        for v in 0..rhs.cols {
                            if rhs.get(u, v) {
                                out.set(i * rhs.rows + u, j * rhs.cols + v, true);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn hstack(parts: &[&BitMatrix]) -> BitMatrix {
        assert!(!parts.is_empty());
        let rows = parts[0].rows;
        assert!(parts.iter().all(|p| p.rows == rows));
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = BitMatrix::zeros(rows, cols);
        let mut off = 0;
        for p in parts {
            for r in 0..rows {
                for c in 0..p.cols {
                    if p.get(r, c) {
                        out.set(r, off + c, true);
                    }
                }
            }
            off += p.cols;
        }
        out
    }

    pub fn vstack(parts: &[&BitMatrix]) -> BitMatrix {
        assert!(!parts.is_empty());
        let cols = parts[0].cols;
        assert!(parts.iter().all(|p| p.cols == cols));
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut out = BitMatrix::zeros(rows, cols);
        let mut off = 0;
        for p in parts {
            for r in 0..p.rows {
                out.words[(off + r) * out.wpr..(off + r + 1) * out.wpr]
                    .copy_from_slice(p.row_words(r));
            }
            off += p.rows;
        }
        out
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> BitMatrix {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        BitMatrix::from_fn(nr, nc, |r, c| self.get(r0 + r, c0 + c))
    }

    /// Rows picked in the given order.
    pub fn rows_selected(&self, idx: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(idx.len(), self.cols);
        for (r, &i) in idx.iter().enumerate() {
            out.words[r * out.wpr..(r + 1) * out.wpr].copy_from_slice(self.row_words(i));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for r in 0..self.rows {
            for c in r + 1..self.cols {
                if self.get(r, c) != self.get(c, r) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == BitMatrix::identity(self.rows)
    }

    /// Row echelon reduction in place; returns pivot columns. With
    /// `full_reduce` the result is the reduced row echelon form.
    fn row_reduce(&mut self, full_reduce: bool) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            let elim: Vec<usize> = if full_reduce {
                (0..self.rows).filter(|&i| i != r && self.get(i, c)).collect()
            } else {
                (r + 1..self.rows).filter(|&i| self.get(i, c)).collect()
            };
            for i in elim {
                self.xor_row_into(r, i);
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.row_reduce(false).len()
    }

    /// Inverse of a square matrix.
    pub fn inverse(&self) -> Result<BitMatrix, Gf2Error> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut work = BitMatrix::hstack(&[self, &BitMatrix::identity(n)]);
        let pivots = work.row_reduce(true);
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return Err(Gf2Error::SingularMatrix);
        }
        Ok(work.submatrix(0, n, n, n))
    }

    /// Columns form a canonical (reduced column echelon) basis of
    /// {v : M v = 0}. The column count is `cols - rank`.
    pub fn kernel_basis(&self) -> BitMatrix {
        let mut work = self.clone();
        let pivots = work.row_reduce(true);
        let pivot_set: Vec<usize> = pivots.clone();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = BitVector::zeros(self.cols);
            v.set(f, true);
            for (i, &p) in pivot_set.iter().enumerate() {
                if work.get(i, f) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        if basis.is_empty() {
            return BitMatrix::zeros(self.cols, 0);
        }
        BitMatrix::from_cols(&basis).reduced_column_echelon()
    }

    /// Deterministic solution of `M x = y` (free variables set to zero), or
    /// `None` when the system is inconsistent.
    pub fn solve(&self, y: &BitVector) -> Option<BitVector> {
        assert_eq!(y.len, self.rows);
        let mut work = BitMatrix::hstack(&[self, &BitMatrix::from_cols(&[y.clone()])]);
        let pivots = work.row_reduce(true);
        if pivots.contains(&self.cols) {
            return None; // pivot in the augmented column
        }
        let mut x = BitVector::zeros(self.cols);
        for (i, &p) in pivots.iter().enumerate() {
            if work.get(i, self.cols) {
                x.set(p, true);
            }
        }
        Some(x)
    }

    /// Canonical basis of the column space: unique reduced column echelon
    /// form, dependent columns dropped. Two matrices have equal column
    /// spaces iff their canonical forms are equal.
    pub fn reduced_column_echelon(&self) -> BitMatrix {
        let mut work = self.transpose();
        let pivots = work.row_reduce(true);
        let kept = work.submatrix(0, 0, pivots.len(), self.rows);
        kept.transpose()
    }

    /// Hashable fingerprint of the column space.
    pub fn column_space_key(&self) -> Vec<u64> {
        let c = self.reduced_column_echelon();
        let mut key = vec![c.rows as u64, c.cols as u64];
        key.extend_from_slice(&c.words);
        key
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            if r > 0 {
                writeln!(f)?;
            }
            for c in 0..self.cols {
                write!(f, "{}", if self.get(r, c) { '1' } else { '0' })?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// P = [[0, I_n], [I_n, 0]], the matrix of the binary symplectic form.
pub fn symplectic_form(n: usize) -> BitMatrix {
    let mut p = BitMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        p.set(i, n + i, true);
        p.set(n + i, i, true);
    }
    p
}

/// Number of d-dimensional subspaces of Z_2^n (the Gaussian binomial).
pub fn gaussian_binomial(n: usize, d: usize) -> u128 {
    if d > n {
        return 0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..d {
        num *= (1u128 << (n - i)) - 1;
        den *= (1u128 << (d - i)) - 1;
    }
    num / den
}

/// Lazily enumerates one canonical basis matrix (n×d, columns in reduced
/// column echelon form) per d-dimensional subspace of Z_2^n.
pub struct SubspaceIter {
    n: usize,
    d: usize,
    pivots: Vec<usize>,
    free_positions: Vec<(usize, usize)>, // (row, col) of free entries for current pivots
    fill: u64,
    done: bool,
}

impl SubspaceIter {
    fn free_positions(n: usize, pivots: &[usize]) -> Vec<(usize, usize)> {
        // Column j has free entries in non-pivot rows below its pivot row.
        let mut pos = Vec::new();
        for r in 0..n {
            if pivots.contains(&r) {
                continue;
            }
            for (j, &p) in pivots.iter().enumerate() {
                if r > p {
                    pos.push((r, j));
                }
            }
        }
        pos
    }

    fn emit(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.n, self.d);
        for (j, &p) in self.pivots.iter().enumerate() {
            m.set(p, j, true);
        }
        for (t, &(r, j)) in self.free_positions.iter().enumerate() {
            if (self.fill >> t) & 1 == 1 {
                m.set(r, j, true);
            }
        }
        m
    }

    fn advance_pivots(&mut self) -> bool {
        // next combination of d pivot rows out of n, lexicographic
        if self.d == 0 {
            return false;
        }
        let mut i = self.d;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if self.pivots[i] < self.n - (self.d - i) {
                self.pivots[i] += 1;
                for j in i + 1..self.d {
                    self.pivots[j] = self.pivots[j - 1] + 1;
                }
                return true;
            }
        }
    }
}

impl Iterator for SubspaceIter {
    type Item = BitMatrix;

    fn next(&mut self) -> Option<BitMatrix> {
        if self.done {
            return None;
        }
        let out = self.emit();
        self.fill += 1;
        if self.fill >> self.free_positions.len() != 0 {
            self.fill = 0;
            if self.advance_pivots() {
                self.free_positions = Self::free_positions(self.n, &self.pivots);
            } else {
                self.done = true;
            }
        }
        Some(out)
    }
}

/// All d-dimensional subspaces of Z_2^n, one canonical basis each, in a
/// fixed deterministic order. Refuses n beyond [`SUBSPACE_ENUM_LIMIT`].
pub fn enumerate_subspaces(n: usize, d: usize) -> Result<SubspaceIter, Gf2Error> {
    assert!(d <= n, "subspace dimension exceeds ambient dimension");
    if n > SUBSPACE_ENUM_LIMIT {
        return Err(Gf2Error::TooLarge { size: n, limit: SUBSPACE_ENUM_LIMIT });
    }
    let pivots: Vec<usize> = (0..d).collect();
    let free_positions = SubspaceIter::free_positions(n, &pivots);
    Ok(SubspaceIter { n, d, pivots, free_positions, fill: 0, done: false })
}

/// Uniformly random vector.
pub fn random_vector(len: usize, rng: &mut impl Rng) -> BitVector {
    let mut v = BitVector::zeros(len);
    for w in v.words.iter_mut() {
        *w = rng.random();
    }
    if len % WORD_BITS != 0 {
        if let Some(last) = v.words.last_mut() {
            *last &= (1u64 << (len % WORD_BITS)) - 1;
        }
    }
    v
}

/// Uniformly random matrix (no rank constraint).
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows, cols);
    for r in 0..rows {
        let v = random_vector(cols, rng);
        m.set_row(r, &v);
    }
    m
}

/// Uniform over GL(n,2) by rejection; the acceptance probability
/// ∏_{i≥1}(1−2^{−i}) ≈ 0.2887 is bounded below uniformly in n.
pub fn sample_invertible(n: usize, rng: &mut impl Rng) -> BitMatrix {
    assert!(n >= 1);
    loop {
        let m = random_matrix(n, n, rng);
        if m.rank() == n {
            return m;
        }
    }
}

/// Uniform random element of the span of the columns of `basis`.
pub fn random_in_column_space(basis: &BitMatrix, rng: &mut impl Rng) -> BitVector {
    let coeffs = random_vector(basis.cols(), rng);
    basis.mul_vec(&coeffs)
}

/// Uniform over the binary symplectic group Sp(2k,2): the columns are built
/// as a chain of hyperbolic pairs, each drawn uniformly inside the symplectic
/// complement of the pairs fixed so far.
pub fn sample_symplectic(k: usize, rng: &mut impl Rng) -> Result<BitMatrix, Gf2Error> {
    assert!(k >= 1);
    if k > SYMPLECTIC_SAMPLE_LIMIT {
        return Err(Gf2Error::TooLarge { size: k, limit: SYMPLECTIC_SAMPLE_LIMIT });
    }
    let p = symplectic_form(k);
    let mut constraints: Vec<BitVector> = Vec::new(); // rows (P v)^T for fixed pair members
    let mut vs = Vec::with_capacity(k);
    let mut ws = Vec::with_capacity(k);
    for _ in 0..k {
        let comp = if constraints.is_empty() {
            BitMatrix::identity(2 * k)
        } else {
            BitMatrix::from_rows(&constraints).kernel_basis()
        };
        let v = loop {
            let cand = random_in_column_space(&comp, rng);
            if !cand.is_zero() {
                break cand;
            }
        };
        // ⟨v, w⟩ = 1 within the complement: solve on coefficients
        let t = comp.transpose().mul_vec(&p.mul_vec(&v)); // t_j = ⟨v, comp_j⟩
        let t_mat = BitMatrix::from_rows(&[t.clone()]);
        let particular = t_mat
            .solve(&BitVector::from_bits(&[1]))
            .expect("symplectic complement always contains a partner");
        let homog = random_in_column_space(&t_mat.kernel_basis(), rng);
        let w = comp.mul_vec(&particular.xor(&homog));
        constraints.push(p.mul_vec(&v));
        constraints.push(p.mul_vec(&w));
        vs.push(v);
        ws.push(w);
    }
    vs.extend(ws);
    Ok(BitMatrix::from_cols(&vs))
}

/// Every element of Sp(2k,2), in a fixed order. Only desk-scale k.
pub fn enumerate_symplectic(k: usize) -> Result<Vec<BitMatrix>, Gf2Error> {
    assert!(k >= 1);
    if k > SYMPLECTIC_ENUM_LIMIT {
        return Err(Gf2Error::TooLarge { size: k, limit: SYMPLECTIC_ENUM_LIMIT });
    }
    let p = symplectic_form(k);
    let mut out = Vec::new();
    let mut pairs: Vec<(BitVector, BitVector)> = Vec::new();

    fn rec(
        k: usize,
        p: &BitMatrix,
        pairs: &mut Vec<(BitVector, BitVector)>,
        out: &mut Vec<BitMatrix>,
    ) {
        if pairs.len() == k {
            let mut cols: Vec<BitVector> = pairs.iter().map(|(v, _)| v.clone()).collect();
            cols.extend(pairs.iter().map(|(_, w)| w.clone()));
            out.push(BitMatrix::from_cols(&cols));
            return;
        }
        let constraints: Vec<BitVector> = pairs
            .iter()
            .flat_map(|(v, w)| [p.mul_vec(v), p.mul_vec(w)])
            .collect();
        let comp = if constraints.is_empty() {
            BitMatrix::identity(2 * k)
        } else {
            BitMatrix::from_rows(&constraints).kernel_basis()
        };
        let dim = comp.cols();
        for vc in 1..(1u64 << dim) {
            let v = comp.mul_vec(&BitVector::from_u64(dim, vc));
            let t = comp.transpose().mul_vec(&p.mul_vec(&v));
            let t_mat = BitMatrix::from_rows(&[t]);
            let Some(particular) = t_mat.solve(&BitVector::from_bits(&[1])) else {
                continue;
            };
            let hom = t_mat.kernel_basis();
            for hc in 0..(1u64 << hom.cols()) {
                let coeff = particular.xor(&hom.mul_vec(&BitVector::from_u64(hom.cols(), hc)));
                let w = comp.mul_vec(&coeff);
                pairs.push((v.clone(), w));
                rec(k, p, pairs, out);
                pairs.pop();
            }
        }
    }

    rec(k, &p, &mut pairs, &mut out);
    Ok(out)
}

/// Every element of GL(n,2); test-scale only.
pub fn enumerate_invertible(n: usize) -> Result<Vec<BitMatrix>, Gf2Error> {
    const LIMIT: usize = 4;
    if n > LIMIT {
        return Err(Gf2Error::TooLarge { size: n, limit: LIMIT });
    }
    let bits = n * n;
    let mut out = Vec::new();
    for pattern in 0..(1u64 << bits) {
        let m = BitMatrix::from_fn(n, n, |r, c| (pattern >> (r * n + c)) & 1 == 1);
        if m.rank() == n {
            out.push(m);
        }
    }
    Ok(out)
}
