//! Stabilizer and CSS states in the binary symplectic picture.
//!
//! An n-qubit stabilizer state is the joint +1 eigenstate of n commuting
//! Hermitian Pauli operators (-1)^{b_i} σ_{s_i}. The s_i are assembled as the
//! columns of S ∈ Z_2^{2n×n} (top half: σ_z exponents, bottom half: σ_x
//! exponents) and the phases as b ∈ Z_2^n. Commutation is S^T P S = 0 for
//! the form P = [[0, I], [I, 0]].
//!
//! A change of generating set is a right multiplication S ↦ SR with R
//! invertible; a Clifford operation acts as S ↦ CS with C symplectic. The
//! phase corrections that would appear in both actions can always be removed
//! by a trailing Pauli, so this module fixes b ↦ R^T b and b ↦ b
//! respectively and never tracks the corrections themselves.

use crate::gf2::{symplectic_form, BitMatrix, BitVector, Gf2Error};
use thiserror::Error;

/// Exhaustive-bipartition guard for separability checks.
pub const SEPARABILITY_LIMIT: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StabilizerError {
    #[error("generator matrix does not have full rank")]
    NotFullRank,
    #[error("generators do not commute (S^T P S != 0)")]
    NotCommuting,
    #[error("not a CSS state (S_z^T S_x != 0)")]
    NotCss,
    #[error("matrix C is not symplectic (C^T P C != P)")]
    NotSymplectic,
    #[error("generator change matrix is singular")]
    SingularMatrix,
    #[error("{context} needs {expected}, got {got}")]
    BadDimensions { context: &'static str, expected: usize, got: usize },
    #[error("measurement sets must partition the qubits: {0}")]
    BadPartition(String),
    #[error("state is not canonicalized")]
    NotCanonical,
    #[error("size {size} exceeds guard {limit}")]
    TooLarge { size: usize, limit: usize },
}

impl From<Gf2Error> for StabilizerError {
    fn from(e: Gf2Error) -> Self {
        match e {
            Gf2Error::SingularMatrix => StabilizerError::SingularMatrix,
            Gf2Error::TooLarge { size, limit } => StabilizerError::TooLarge { size, limit },
        }
    }
}

/// Checks rank and commutation of a 2n×n generator matrix.
pub fn validate_stabilizer(s: &BitMatrix) -> Result<(), StabilizerError> {
    assert_eq!(s.rows() % 2, 0, "generator matrix must have 2n rows");
    let n = s.rows() / 2;
    if s.cols() != n {
        return Err(StabilizerError::BadDimensions {
            context: "stabilizer",
            expected: n,
            got: s.cols(),
        });
    }
    if s.rank() != n {
        return Err(StabilizerError::NotFullRank);
    }
    let p = symplectic_form(n);
    if !s.transpose().mul(&p).mul(s).is_zero() {
        return Err(StabilizerError::NotCommuting);
    }
    Ok(())
}

/// A stabilizer state (S, b).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    s: BitMatrix,
    b: BitVector,
}

impl StabilizerState {
    pub fn new(s: BitMatrix, b: BitVector) -> Result<Self, StabilizerError> {
        validate_stabilizer(&s)?;
        let n = s.rows() / 2;
        assert_eq!(b.len(), n, "phase vector length");
        Ok(StabilizerState { n, s, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> &BitMatrix {
        &self.s
    }

    pub fn b(&self) -> &BitVector {
        &self.b
    }

    /// Tensor product of two stabilizer states.
    pub fn tensor(&self, other: &StabilizerState) -> StabilizerState {
        let (n1, n2) = (self.n, other.n);
        let blk =
            |m: &BitMatrix, half: usize, n: usize| m.submatrix(half * n, 0, n, m.cols());
        let z1 = blk(&self.s, 0, n1);
        let x1 = blk(&self.s, 1, n1);
        let z2 = blk(&other.s, 0, n2);
        let x2 = blk(&other.s, 1, n2);
        let pad = |top: &BitMatrix, right_cols: usize| {
            BitMatrix::hstack(&[top, &BitMatrix::zeros(top.rows(), right_cols)])
        };
        let pad_left = |bot: &BitMatrix, left_cols: usize| {
            BitMatrix::hstack(&[&BitMatrix::zeros(bot.rows(), left_cols), bot])
        };
        let s = BitMatrix::vstack(&[
            &pad(&z1, n2),
            &pad_left(&z2, n1),
            &pad(&x1, n2),
            &pad_left(&x2, n1),
        ]);
        StabilizerState { n: n1 + n2, s, b: self.b.concat(&other.b) }
    }

    /// S ↦ CS, b unchanged (phase corrections absorbed as a trailing Pauli).
    pub fn apply_clifford(&self, q: &CliffordOp) -> StabilizerState {
        assert_eq!(q.n, self.n, "clifford acts on the wrong number of qubits");
        StabilizerState { n: self.n, s: q.c.mul(&self.s), b: self.b.clone() }
    }

    /// S ↦ SR, b ↦ R^T b: same physical state, another generating set.
    pub fn change_generators(&self, r: &BitMatrix) -> Result<StabilizerState, StabilizerError> {
        assert_eq!(r.rows(), self.n);
        assert_eq!(r.cols(), self.n);
        if r.rank() != self.n {
            return Err(StabilizerError::SingularMatrix);
        }
        Ok(StabilizerState {
            n: self.n,
            s: self.s.mul(r),
            b: r.transpose().mul_vec(&self.b),
        })
    }
}

/// A Clifford operation, reduced to its symplectic binary matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordOp {
    n: usize,
    c: BitMatrix,
}

impl CliffordOp {
    pub fn new(c: BitMatrix) -> Result<Self, StabilizerError> {
        assert_eq!(c.rows(), c.cols());
        assert_eq!(c.rows() % 2, 0);
        let n = c.rows() / 2;
        let p = symplectic_form(n);
        if c.transpose().mul(&p).mul(&c) != p {
            return Err(StabilizerError::NotSymplectic);
        }
        Ok(CliffordOp { n, c })
    }

    pub fn identity(n: usize) -> Self {
        CliffordOp { n, c: BitMatrix::identity(2 * n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> &BitMatrix {
        &self.c
    }
}

/// Canonical data attached to a CSS state once it has been canonicalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalInfo {
    /// θ with S_z = [I; θ] and S_x = [θ^T; I].
    pub theta: BitMatrix,
    /// `qubit_perm[i]` is the original index of the qubit now at position i.
    pub qubit_perm: Vec<usize>,
    /// θ^T θ = θ θ^T = I (requires n_z = n_x).
    pub orthogonal: bool,
    /// The generator change R applied during canonicalization (b ↦ R^T b).
    pub gen_change: BitMatrix,
}

/// A CSS state: generators split into pure-Z and pure-X sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssState {
    n: usize,
    nz: usize,
    nx: usize,
    sz: BitMatrix,
    sx: BitMatrix,
    b: BitVector,
    canonical: Option<CanonicalInfo>,
}

/// Outcome of a separability check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separability {
    pub separable: bool,
    /// A witness bipartition (qubit indices of both sides) when separable.
    pub bipartition: Option<(Vec<usize>, Vec<usize>)>,
}

impl CssState {
    /// Builds and validates a CSS state from its S_z (n×n_z) and S_x (n×n_x)
    /// blocks. Phases default to zero via [`CssState::with_zero_phases`].
    pub fn new(sz: BitMatrix, sx: BitMatrix, b: BitVector) -> Result<Self, StabilizerError> {
        let n = sz.rows();
        assert_eq!(sx.rows(), n, "S_z and S_x must have the same number of rows");
        let (nz, nx) = (sz.cols(), sx.cols());
        if nz + nx != n {
            return Err(StabilizerError::BadDimensions {
                context: "css state",
                expected: n,
                got: nz + nx,
            });
        }
        assert_eq!(b.len(), n, "phase vector length");
        if !sz.transpose().mul(&sx).is_zero() {
            return Err(StabilizerError::NotCss);
        }
        if sz.rank() != nz || sx.rank() != nx {
            return Err(StabilizerError::NotFullRank);
        }
        Ok(CssState { n, nz, nx, sz, sx, b, canonical: None })
    }

    pub fn with_zero_phases(sz: BitMatrix, sx: BitMatrix) -> Result<Self, StabilizerError> {
        let n = sz.rows();
        CssState::new(sz, sx, BitVector::zeros(n))
    }

    /// Directly from a canonical θ: S_z = [I; θ], S_x = [θ^T; I].
    pub fn from_theta(theta: &BitMatrix) -> Self {
        let (nx, nz) = (theta.rows(), theta.cols());
        let sz = BitMatrix::vstack(&[&BitMatrix::identity(nz), theta]);
        let sx = BitMatrix::vstack(&[&theta.transpose(), &BitMatrix::identity(nx)]);
        let mut state = CssState::with_zero_phases(sz, sx).expect("theta form is always CSS");
        state.canonical = Some(CanonicalInfo {
            theta: theta.clone(),
            qubit_perm: (0..nz + nx).collect(),
            orthogonal: is_orthogonal_theta(theta),
            gen_change: BitMatrix::identity(nz + nx),
        });
        state
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn sz(&self) -> &BitMatrix {
        &self.sz
    }

    pub fn sx(&self) -> &BitMatrix {
        &self.sx
    }

    pub fn b(&self) -> &BitVector {
        &self.b
    }

    pub fn canonical(&self) -> Option<&CanonicalInfo> {
        self.canonical.as_ref()
    }

    pub fn theta(&self) -> Option<&BitMatrix> {
        self.canonical.as_ref().map(|c| &c.theta)
    }

    pub fn is_orthogonal(&self) -> Option<bool> {
        self.canonical.as_ref().map(|c| c.orthogonal)
    }

    /// The stacked 2n×n generator matrix [[S_z, 0], [0, S_x]].
    pub fn stacked(&self) -> BitMatrix {
        let top = BitMatrix::hstack(&[&self.sz, &BitMatrix::zeros(self.n, self.nx)]);
        let bot = BitMatrix::hstack(&[&BitMatrix::zeros(self.n, self.nz), &self.sx]);
        BitMatrix::vstack(&[&top, &bot])
    }

    pub fn to_stabilizer(&self) -> StabilizerState {
        StabilizerState::new(self.stacked(), self.b.clone()).expect("valid by construction")
    }

    /// Canonicalizes to S_z = [I; θ], S_x = [θ^T; I], permuting qubits when
    /// the leading n_z×n_z block of S_z is singular. Among admissible row
    /// choices the lexicographically smallest one is taken (greedy scan), so
    /// the result is deterministic. The generator change R and the qubit
    /// permutation are recorded; phases transform as b ↦ R^T b.
    pub fn canonicalized(&self) -> Result<CssState, StabilizerError> {
        let rows = admissible_rows_greedy(&self.sz)
            .ok_or(StabilizerError::NotFullRank)?;
        self.canonicalized_with_rows(&rows)
    }

    /// Canonicalization with an explicit choice of the n_z rows of S_z that
    /// become the identity block. Exposed so that invariance of downstream
    /// results under this choice can be tested.
    pub fn canonicalized_with_rows(&self, top_rows: &[usize]) -> Result<CssState, StabilizerError> {
        assert_eq!(top_rows.len(), self.nz, "need exactly n_z rows");
        let rest: Vec<usize> =
            (0..self.n).filter(|i| !top_rows.contains(i)).collect();
        let mut perm: Vec<usize> = top_rows.to_vec();
        perm.extend_from_slice(&rest);

        let sz_p = self.sz.rows_selected(&perm);
        let sx_p = self.sx.rows_selected(&perm);
        let z_top = sz_p.submatrix(0, 0, self.nz, self.nz);
        let rz = z_top.inverse().map_err(|_| StabilizerError::NotFullRank)?;
        let theta = sz_p.submatrix(self.nz, 0, self.nx, self.nz).mul(&rz);
        let x_bot = sx_p.submatrix(self.nz, 0, self.nx, self.nx);
        // S_z^T S_x = 0 forces the bottom n_x×n_x block of the permuted S_x
        // to be invertible once the top block of S_z is.
        let rx = x_bot.inverse().map_err(|_| StabilizerError::NotFullRank)?;

        let sz_new = BitMatrix::vstack(&[&BitMatrix::identity(self.nz), &theta]);
        let sx_new = BitMatrix::vstack(&[&theta.transpose(), &BitMatrix::identity(self.nx)]);
        debug_assert_eq!(sz_p.mul(&rz), sz_new);
        debug_assert_eq!(sx_p.mul(&rx), sx_new);

        let zero_zx = BitMatrix::zeros(self.nz, self.nx);
        let zero_xz = BitMatrix::zeros(self.nx, self.nz);
        let gen_change = BitMatrix::vstack(&[
            &BitMatrix::hstack(&[&rz, &zero_zx]),
            &BitMatrix::hstack(&[&zero_xz, &rx]),
        ]);
        let b_new = gen_change.transpose().mul_vec(&self.b);
        let orthogonal = is_orthogonal_theta(&theta);
        Ok(CssState {
            n: self.n,
            nz: self.nz,
            nx: self.nx,
            sz: sz_new,
            sx: sx_new,
            b: b_new,
            canonical: Some(CanonicalInfo { theta, qubit_perm: perm, orthogonal, gen_change }),
        })
    }

    /// All admissible top-row choices for canonicalization (test support).
    pub fn admissible_canonical_rows(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let n = self.n;
        let nz = self.nz;
        let mut pick = vec![0usize; nz];
        fn rec(
            sz: &BitMatrix,
            nz: usize,
            n: usize,
            start: usize,
            depth: usize,
            pick: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if depth == nz {
                if sz.rows_selected(pick).rank() == nz {
                    out.push(pick.clone());
                }
                return;
            }
            for i in start..n {
                pick[depth] = i;
                rec(sz, nz, n, i + 1, depth + 1, pick, out);
            }
        }
        rec(&self.sz, nz, n, 0, 0, &mut pick, &mut out);
        out
    }

    /// Phase flips induced by the Pauli error σ_e: Δb = S^T P e.
    pub fn syndrome_flip(&self, e: &BitVector) -> BitVector {
        assert_eq!(e.len(), 2 * self.n, "error vector has 2n entries");
        let ez = e.slice(0, self.n);
        let ex = e.slice(self.n, self.n);
        // S^T P e = [S_z^T e_x; S_x^T e_z]
        self.sz
            .transpose()
            .mul_vec(&ex)
            .concat(&self.sx.transpose().mul_vec(&ez))
    }

    /// Basis (as rows) of the phase functionals r^T b revealed by measuring
    /// σ_z on the qubits in `mz` and σ_x on the qubits in `mx`. A functional
    /// is revealed iff S r has zeros on the σ_x rows of measured-z qubits and
    /// on the σ_z rows of measured-x qubits.
    pub fn measure_reveal(&self, mz: &[usize], mx: &[usize]) -> Result<BitMatrix, StabilizerError> {
        let mut seen = vec![false; self.n];
        for &q in mz.iter().chain(mx) {
            if q >= self.n {
                return Err(StabilizerError::BadPartition(format!("qubit {q} out of range")));
            }
            if seen[q] {
                return Err(StabilizerError::BadPartition(format!("qubit {q} listed twice")));
            }
            seen[q] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(StabilizerError::BadPartition(
                "every qubit must be measured in one basis".into(),
            ));
        }
        // Constraints on r = (r_z, r_x): rows of S_z indexed by mx kill r_z,
        // rows of S_x indexed by mz kill r_x.
        let mut constraint_rows: Vec<BitVector> = Vec::new();
        for &q in mx {
            constraint_rows.push(self.sz.row(q).concat(&BitVector::zeros(self.nx)));
        }
        for &q in mz {
            constraint_rows.push(BitVector::zeros(self.nz).concat(&self.sx.row(q)));
        }
        let revealed = if constraint_rows.is_empty() {
            BitMatrix::identity(self.n)
        } else {
            BitMatrix::from_rows(&constraint_rows).kernel_basis()
        };
        Ok(revealed.transpose())
    }

    /// Separability of a canonicalized state: the state splits across a qubit
    /// bipartition iff that bipartition separates the connected components of
    /// the column-support graph of S_z (exhaustive bipartitions pruned to
    /// component unions).
    pub fn is_separable(&self) -> Result<Separability, StabilizerError> {
        if self.canonical.is_none() {
            return Err(StabilizerError::NotCanonical);
        }
        if self.n > SEPARABILITY_LIMIT {
            return Err(StabilizerError::TooLarge { size: self.n, limit: SEPARABILITY_LIMIT });
        }
        if self.n < 2 {
            return Ok(Separability { separable: false, bipartition: None });
        }
        let comps = support_components(&self.sz.reduced_column_echelon(), self.n);
        if comps.len() < 2 {
            return Ok(Separability { separable: false, bipartition: None });
        }
        let side: Vec<usize> = comps[0].clone();
        let other: Vec<usize> =
            (0..self.n).filter(|q| !side.contains(q)).collect();
        debug_assert_eq!(
            self.sz.rows_selected(&side).rank() + self.sz.rows_selected(&other).rank(),
            self.nz
        );
        Ok(Separability { separable: true, bipartition: Some((side, other)) })
    }
}

/// θ^T θ = θ θ^T = I (and square).
pub fn is_orthogonal_theta(theta: &BitMatrix) -> bool {
    theta.rows() == theta.cols()
        && theta.transpose().mul(theta).is_identity()
        && theta.mul(&theta.transpose()).is_identity()
}

/// Greedy (lexicographically smallest) choice of n_z independent rows.
fn admissible_rows_greedy(sz: &BitMatrix) -> Option<Vec<usize>> {
    let nz = sz.cols();
    let mut rows = Vec::with_capacity(nz);
    for i in 0..sz.rows() {
        if rows.len() == nz {
            break;
        }
        rows.push(i);
        if sz.rows_selected(&rows).rank() != rows.len() {
            rows.pop();
        }
    }
    (rows.len() == nz).then_some(rows)
}

/// Connected components of qubits under shared column support; isolated
/// qubits (zero rows) form their own singleton components.
fn support_components(m: &BitMatrix, n: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for c in 0..m.cols() {
        let support: Vec<usize> = (0..n).filter(|&r| m.get(r, c)).collect();
        for w in support.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for q in 0..n {
        let r = find(&mut parent, q);
        match root_of[r] {
            Some(g) => groups[g].push(q),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![q]);
            }
        }
    }
    groups
}
