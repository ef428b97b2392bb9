//! Coset-entropy tables and the yield linear program.
//!
//! The protocol's asymptotic yield is γ = 1 − m where m = m_z + m_x solves
//!
//! ```text
//! minimize    m_z + m_x
//! subject to  d_z m_z + d_x m_x ≥ H − H_[d_z,d_x]   for all (d_z,d_x) ≠ (0,0)
//! ```
//!
//! H is the entropy of the diagonal input mixture and H_[d_z,d_x] is the
//! minimum, over subspaces 𝒢_z ⊆ Z_2^{n_z} of dimension n_z−d_z and
//! 𝒢_x ⊆ Z_2^{n_x} of dimension n_x−d_x, of the entropy of the partition of
//! Z_2^n into cosets of 𝒥^⊥ = {w : J^T w = 0}, with J assembled from the
//! subspace bases as below. The LP always has two variables, so it is solved
//! exactly by vertex enumeration.

use crate::gf2::{enumerate_subspaces, BitMatrix, BitVector, Gf2Error};
use crate::permcliff::ThetaStructure;
use crate::stabilizer::{CssState, StabilizerError};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Dense-probability-table guard: 2^n doubles.
pub const MIXTURE_LIMIT: usize = 20;

/// Feasibility tolerance of the LP.
pub const LP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum YieldError {
    #[error("bad mixture: {0}")]
    BadMixture(String),
    #[error("no feasible vertex found")]
    Infeasible,
    #[error("mixture has {got} bits but the state has {expected} generators")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is separable; run the protocol on each factor instead")]
    Separable,
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// A probability function over the phase vectors b ∈ Z_2^n: the diagonal
/// ensemble of CSS states sharing one generator matrix.
///
/// Index convention: bit i of b (0-based, the phase of generator i+1)
/// contributes 2^{n-1-i}, so b_1 is the most significant bit and the dense
/// table reads in the order b = 00...0, 00...1, ...
#[derive(Clone, Debug)]
pub struct DiagonalMixture {
    n: usize,
    p: Vec<f64>,
}

pub fn index_of_bits(b: &BitVector) -> usize {
    let mut idx = 0usize;
    for i in 0..b.len() {
        idx = (idx << 1) | b.get(i) as usize;
    }
    idx
}

pub fn bits_of_index(n: usize, idx: usize) -> BitVector {
    let mut v = BitVector::zeros(n);
    for i in 0..n {
        if (idx >> (n - 1 - i)) & 1 == 1 {
            v.set(i, true);
        }
    }
    v
}

impl DiagonalMixture {
    pub fn new(n: usize, p: Vec<f64>) -> Result<Self, YieldError> {
        if n > MIXTURE_LIMIT {
            return Err(YieldError::Gf2(Gf2Error::TooLarge { size: n, limit: MIXTURE_LIMIT }));
        }
        if p.len() != 1 << n {
            return Err(YieldError::BadMixture(format!(
                "need 2^{n} probabilities, got {}",
                p.len()
            )));
        }
        if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(YieldError::BadMixture("negative or non-finite probability".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(YieldError::BadMixture(format!("probabilities sum to {total}")));
        }
        Ok(DiagonalMixture { n, p })
    }

    pub fn point_mass(n: usize, at: &BitVector) -> Self {
        assert_eq!(at.len(), n);
        let mut p = vec![0.0; 1 << n];
        p[index_of_bits(at)] = 1.0;
        DiagonalMixture { n, p }
    }

    pub fn uniform(n: usize) -> Self {
        let size = 1usize << n;
        DiagonalMixture { n, p: vec![1.0 / size as f64; size] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn prob(&self, b: &BitVector) -> f64 {
        self.p[index_of_bits(b)]
    }

    /// Shannon entropy in bits, with 0·log 0 = 0.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.p)
    }

    /// Entropy of the marginal over the given bit positions.
    pub fn marginal_entropy(&self, keep: &[usize]) -> f64 {
        let mut table = vec![0.0; 1 << keep.len()];
        for (idx, &prob) in self.p.iter().enumerate() {
            let mut key = 0usize;
            for &bit in keep {
                assert!(bit < self.n);
                key = (key << 1) | ((idx >> (self.n - 1 - bit)) & 1);
            }
            table[key] += prob;
        }
        entropy_of(&table)
    }

    /// H(target | given) = H(target ∪ given) − H(given).
    pub fn conditional_entropy(&self, target: &[usize], given: &[usize]) -> f64 {
        let mut joint: Vec<usize> = target.iter().chain(given).copied().collect();
        joint.sort_unstable();
        joint.dedup();
        self.marginal_entropy(&joint) - self.marginal_entropy(given)
    }

    /// Pushforward under an invertible relabeling b ↦ M b.
    pub fn relabeled(&self, m: &BitMatrix) -> DiagonalMixture {
        assert_eq!(m.rows(), self.n);
        assert_eq!(m.cols(), self.n);
        debug_assert_eq!(m.rank(), self.n, "relabeling must be invertible");
        let mut p = vec![0.0; self.p.len()];
        for (idx, &prob) in self.p.iter().enumerate() {
            let b = bits_of_index(self.n, idx);
            p[index_of_bits(&m.mul_vec(&b))] = prob;
        }
        DiagonalMixture { n: self.n, p }
    }
}

fn entropy_of(table: &[f64]) -> f64 {
    let mut h = 0.0;
    for &x in table {
        if x > 0.0 {
            h -= x * x.log2();
        }
    }
    // float noise can push an exact 0 slightly negative
    h.max(0.0)
}

/// Row-wise Kronecker product: row r of the result is kron(row r of a,
/// row r of b).
fn row_kron(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    assert_eq!(a.rows(), b.rows());
    let bc = b.cols();
    BitMatrix::from_fn(a.rows(), a.cols() * bc, |r, c| {
        a.get(r, c / bc) && b.get(r, c % bc)
    })
}

/// Assembles the n-row matrix J from the subspace bases G_z (n_z×(n_z−d_z))
/// and G_x (n_x×(n_x−d_x)).
///
/// Orthogonal θ (state represented with S_x = S_z):
/// `J = [G_z 0 0 G_x; 0 G_z G_x 0]`. Otherwise `J = [G_z 0 0 V; 0 U G_x 0]`
/// where row r of U is kron(row r of θG_z, row r of M_θ) and row r of V is
/// kron(row r of θ^T G_x, row r of M_{θ^T}).
pub fn build_j(
    ts: &ThetaStructure,
    orthogonal: bool,
    gz: &BitMatrix,
    gx: &BitMatrix,
) -> BitMatrix {
    let (nz, nx) = (ts.nz(), ts.nx());
    assert_eq!(gz.rows(), nz, "G_z must have n_z rows");
    assert_eq!(gx.rows(), nx, "G_x must have n_x rows");
    if orthogonal {
        let half = nz;
        let zero_z = |cols: usize| BitMatrix::zeros(half, cols);
        return BitMatrix::hstack(&[
            &BitMatrix::vstack(&[gz, &zero_z(gz.cols())]),
            &BitMatrix::vstack(&[&zero_z(gz.cols()), gz]),
            &BitMatrix::vstack(&[&zero_z(gx.cols()), gx]),
            &BitMatrix::vstack(&[gx, &zero_z(gx.cols())]),
        ]);
    }
    let u = row_kron(&ts.theta.mul(gz), &ts.m_theta);
    let v = row_kron(&ts.theta.transpose().mul(gx), &ts.m_theta_t);
    BitMatrix::hstack(&[
        &BitMatrix::vstack(&[gz, &BitMatrix::zeros(nx, gz.cols())]),
        &BitMatrix::vstack(&[&BitMatrix::zeros(nz, u.cols()), &u]),
        &BitMatrix::vstack(&[&BitMatrix::zeros(nz, gx.cols()), gx]),
        &BitMatrix::vstack(&[&v, &BitMatrix::zeros(nx, v.cols())]),
    ])
}

/// Entropy of the partition of Z_2^n into cosets of 𝒥^⊥ = {w : J^T w = 0}.
/// Depends on J only through its column space.
pub fn coset_entropy(mix: &DiagonalMixture, j: &BitMatrix) -> f64 {
    assert_eq!(j.rows(), mix.n(), "J must have n rows");
    let basis = j.reduced_column_echelon();
    let jt = basis.transpose();
    // BTreeMap: the accumulation order must be deterministic so results are
    // bit-reproducible
    let mut masses: BTreeMap<u64, f64> = BTreeMap::new();
    for (idx, &prob) in mix.probs().iter().enumerate() {
        let label = jt.mul_vec(&bits_of_index(mix.n(), idx)).to_u64();
        *masses.entry(label).or_insert(0.0) += prob;
    }
    let table: Vec<f64> = masses.into_values().collect();
    entropy_of(&table)
}

/// The coset partition itself (label → members), used by reports.
pub fn coset_partition(n: usize, j: &BitMatrix) -> Vec<Vec<BitVector>> {
    let basis = j.reduced_column_echelon();
    let jt = basis.transpose();
    let mut cosets: HashMap<u64, Vec<BitVector>> = HashMap::new();
    let mut order: Vec<u64> = Vec::new();
    for idx in 0..(1usize << n) {
        let b = bits_of_index(n, idx);
        let label = jt.mul_vec(&b).to_u64();
        let entry = cosets.entry(label).or_default();
        if entry.is_empty() {
            order.push(label);
        }
        entry.push(b);
    }
    order.into_iter().map(|l| cosets.remove(&l).unwrap()).collect()
}

/// H_[d_z,d_x]: the minimum coset entropy over all admissible subspace
/// pairs, with one minimizing witness pair. Evaluations are memoized on the
/// column space of J and run in parallel; ties break by enumeration order.
pub fn h_dd(
    mix: &DiagonalMixture,
    ts: &ThetaStructure,
    orthogonal: bool,
    dz: usize,
    dx: usize,
) -> Result<(f64, BitMatrix, BitMatrix), YieldError> {
    let (nz, nx) = (ts.nz(), ts.nx());
    assert!(dz <= nz && dx <= nx);
    let gzs: Vec<BitMatrix> = enumerate_subspaces(nz, nz - dz)?.collect();
    let gxs: Vec<BitMatrix> = enumerate_subspaces(nx, nx - dx)?.collect();

    // group the pairs by the column space of J; each distinct space is
    // evaluated once
    let mut first_pair: HashMap<Vec<u64>, (usize, BitMatrix)> = HashMap::new();
    for (i, gz) in gzs.iter().enumerate() {
        for (l, gx) in gxs.iter().enumerate() {
            let j = build_j(ts, orthogonal, gz, gx);
            let key = j.column_space_key();
            let idx = i * gxs.len() + l;
            match first_pair.get(&key) {
                Some((prev, _)) if *prev <= idx => {}
                _ => {
                    first_pair.insert(key, (idx, j));
                }
            }
        }
    }
    let jobs: Vec<(usize, BitMatrix)> = first_pair.into_values().collect();
    let best = jobs
        .into_par_iter()
        .map(|(idx, j)| (coset_entropy(mix, &j), idx))
        .reduce_with(|a, b| if (a.0, a.1) <= (b.0, b.1) { a } else { b })
        .expect("at least one subspace pair");
    let (value, idx) = best;
    let gz = gzs[idx / gxs.len()].clone();
    let gx = gxs[idx % gxs.len()].clone();
    Ok((value, gz, gx))
}

/// One row of the yield LP table.
#[derive(Clone, Debug)]
pub struct GridEntry {
    pub dz: usize,
    pub dx: usize,
    pub h_dd: f64,
    pub witness_gz: BitMatrix,
    pub witness_gx: BitMatrix,
}

/// Solution of the yield computation.
#[derive(Clone, Debug)]
pub struct YieldResult {
    pub h: f64,
    pub grid: Vec<GridEntry>,
    pub mz: f64,
    pub mx: f64,
    /// 1 − m_z − m_x, clamped to [0, 1].
    pub gamma: f64,
    /// Grid points whose constraint is tight at the optimum.
    pub active: Vec<(usize, usize)>,
}

/// Exact solution of the two-variable LP by vertex enumeration.
///
/// `rows` are (d_z, d_x, rhs) constraints d_z m_z + d_x m_x ≥ rhs. The
/// implied m_z ≥ 0 and m_x ≥ 0 are always added. Among optimal vertices the
/// lexicographically smallest (m_z, m_x) wins.
pub fn lp_solve(rows: &[(usize, usize, f64)]) -> Result<(f64, f64), YieldError> {
    let mut cons: Vec<(f64, f64, f64)> =
        rows.iter().map(|&(dz, dx, rhs)| (dz as f64, dx as f64, rhs)).collect();
    cons.push((1.0, 0.0, 0.0));
    cons.push((0.0, 1.0, 0.0));

    let feasible = |mz: f64, mx: f64| {
        cons.iter().all(|&(a, b, rhs)| a * mz + b * mx >= rhs - LP_TOL)
    };
    let mut best: Option<(f64, f64, f64)> = None; // (m, mz, mx)
    for i in 0..cons.len() {
        for l in i + 1..cons.len() {
            let (a1, b1, r1) = cons[i];
            let (a2, b2, r2) = cons[l];
            let det = a1 * b2 - a2 * b1;
            if det == 0.0 {
                continue;
            }
            let mz = (r1 * b2 - r2 * b1) / det;
            let mx = (a1 * r2 - a2 * r1) / det;
            if !feasible(mz, mx) {
                continue;
            }
            let m = mz + mx;
            let better = match best {
                None => true,
                Some((bm, bz, bx)) => {
                    m < bm - LP_TOL
                        || ((m - bm).abs() <= LP_TOL
                            && (mz < bz - LP_TOL
                                || ((mz - bz).abs() <= LP_TOL && mx < bx - LP_TOL)))
                }
            };
            if better {
                best = Some((m, mz, mx));
            }
        }
    }
    best.map(|(_, mz, mx)| (mz, mx)).ok_or(YieldError::Infeasible)
}

/// Full pipeline: canonicalize the state, re-express the mixture in the
/// canonical generators (and in the S_x = S_z representation when θ is
/// orthogonal), minimize the coset entropies over the whole (d_z, d_x) grid
/// and solve the LP. γ is clamped to [0, 1]; a reported 0 means the protocol
/// yields nothing on this input.
pub fn protocol_yield(css: &CssState, mix: &DiagonalMixture) -> Result<YieldResult, YieldError> {
    if mix.n() != css.n() {
        return Err(YieldError::DimensionMismatch { expected: css.n(), got: mix.n() });
    }
    let canon = css.canonicalized()?;
    let info = canon.canonical().expect("canonicalized");
    if canon.is_separable()?.separable {
        return Err(YieldError::Separable);
    }
    let mut work = mix.relabeled(&info.gen_change.transpose());
    let orthogonal = info.orthogonal;
    if orthogonal {
        // switch to S_x = S_z generators: b_x ↦ θ^T b_x
        let nz = canon.nz();
        let nx = canon.nx();
        let rel = BitMatrix::vstack(&[
            &BitMatrix::hstack(&[&BitMatrix::identity(nz), &BitMatrix::zeros(nz, nx)]),
            &BitMatrix::hstack(&[&BitMatrix::zeros(nx, nz), &info.theta.transpose()]),
        ]);
        work = work.relabeled(&rel);
    }
    let ts = ThetaStructure::new(&info.theta);
    let h = work.entropy();

    let points: Vec<(usize, usize)> = (0..=canon.nz())
        .flat_map(|dz| (0..=canon.nx()).map(move |dx| (dz, dx)))
        .filter(|&(dz, dx)| (dz, dx) != (0, 0))
        .collect();
    let grid: Vec<GridEntry> = points
        .par_iter()
        .map(|&(dz, dx)| {
            let (value, gz, gx) = h_dd(&work, &ts, orthogonal, dz, dx)?;
            Ok(GridEntry { dz, dx, h_dd: value, witness_gz: gz, witness_gx: gx })
        })
        .collect::<Result<_, YieldError>>()?;

    let rows: Vec<(usize, usize, f64)> =
        grid.iter().map(|g| (g.dz, g.dx, h - g.h_dd)).collect();
    let (mz, mx) = lp_solve(&rows)?;
    let gamma = (1.0 - mz - mx).clamp(0.0, 1.0);
    let active = grid
        .iter()
        .filter(|g| {
            let lhs = g.dz as f64 * mz + g.dx as f64 * mx;
            (lhs - (h - g.h_dd)).abs() <= LP_TOL
        })
        .map(|g| (g.dz, g.dx))
        .collect();
    Ok(YieldResult { h, grid, mz, mx, gamma, active })
}

/// Yields of the two reference protocols on the 4-party cat-state mixture
/// (b_1..b_3 are the z-phases, b_4 the x-phase). Returned unclamped.
///
/// The first only balances each party's marginal entropy against the x-phase
/// entropy; the second improves it with conditional entropies.
pub fn baseline_yields_cat4(mix: &DiagonalMixture) -> (f64, f64) {
    assert_eq!(mix.n(), 4, "baseline formulas are stated for the 4-party cat state");
    let max_hj = (0..3)
        .map(|j| mix.marginal_entropy(&[j]))
        .fold(f64::NEG_INFINITY, f64::max);
    let h4 = mix.marginal_entropy(&[3]);
    let yield_man = 1.0 - max_hj - h4;

    let h4_given = mix.conditional_entropy(&[3], &[0, 1, 2]);
    let max_hj_given = (0..3)
        .map(|j| mix.conditional_entropy(&[j], &[3]))
        .fold(f64::NEG_INFINITY, f64::max);
    let yield_lo = (1.0 - max_hj - h4_given).max(1.0 - max_hj_given - h4);
    (yield_man, yield_lo)
}

/// Yield of the CNOT-only protocol on the 8-party example mixture:
/// 1 − H(b_5..b_8)/4 − (H − H(b_5..b_8))/3.
pub fn cnot_only_yield_8q(mix: &DiagonalMixture) -> f64 {
    assert_eq!(mix.n(), 8);
    let h = mix.entropy();
    let hx = mix.marginal_entropy(&[4, 5, 6, 7]);
    1.0 - hx / 4.0 - (h - hx) / 3.0
}
