//! Desk-scale executable model of the protocol.
//!
//! A run works on k copies of a diagonal mixture: a hidden truth b̃ is drawn
//! from the product distribution, one uniformly random permutation operation
//! is sampled, the scheduled copies are measured (⌈m_z k⌉ σ_z copies then
//! ⌈m_x k⌉ σ_x copies, in copy order) and every candidate disagreeing with
//! the revealed coordinates of R^T b̃ is eliminated. Candidates are tracked
//! as deviations δ from the truth, so elimination of δ only depends on R^T δ
//! vanishing on the revealed coordinates; the truth (δ = 0) can never be
//! eliminated, which the code asserts on every run.
//!
//! The module also carries the strongly typical set (exhaustive at desk
//! scale, sampled beyond), the exact typical-sequence counting identity used
//! to cross-check the coset machinery, and per-step survival-rate reports
//! for drift checks.

use crate::gf2::{BitMatrix, BitVector, Gf2Error};
use crate::permcliff::{
    apply_perm, candidate_degrees, sample_perm_clifford, PermClifford, PermCliffError,
    ThetaStructure,
};
use crate::stabilizer::{CssState, StabilizerError};
use crate::yieldlp::{bits_of_index, index_of_bits, DiagonalMixture, YieldError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Exhaustive typical-set guard: 2^{nk} members.
pub const TYPICAL_ENUM_LIMIT: usize = 24;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("schedule measures {zk}+{xk} copies but only {copies} exist")]
    BadSchedule { zk: usize, xk: usize, copies: usize },
    #[error("size {size} exceeds guard {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("state is separable; simulate each factor separately")]
    Separable,
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Yield(#[from] YieldError),
    #[error(transparent)]
    PermCliff(#[from] PermCliffError),
}

/// Shared, immutable context of a simulation: the canonicalized state, its
/// constraint structure and the mixture re-expressed in the working
/// representation.
#[derive(Clone, Debug)]
pub struct ProtocolContext {
    css: CssState,
    ts: ThetaStructure,
    orthogonal: bool,
    mix: DiagonalMixture,
    cdf: Vec<f64>,
}

impl ProtocolContext {
    pub fn new(css: &CssState, mix: &DiagonalMixture) -> Result<Self, SimError> {
        if mix.n() != css.n() {
            return Err(SimError::Yield(YieldError::DimensionMismatch {
                expected: css.n(),
                got: mix.n(),
            }));
        }
        let canon = css.canonicalized()?;
        if canon.is_separable()?.separable {
            return Err(SimError::Separable);
        }
        let info = canon.canonical().expect("canonicalized");
        let mut work = mix.relabeled(&info.gen_change.transpose());
        if info.orthogonal {
            let (nz, nx) = (canon.nz(), canon.nx());
            let rel = BitMatrix::vstack(&[
                &BitMatrix::hstack(&[&BitMatrix::identity(nz), &BitMatrix::zeros(nz, nx)]),
                &BitMatrix::hstack(&[&BitMatrix::zeros(nx, nz), &info.theta.transpose()]),
            ]);
            work = work.relabeled(&rel);
        }
        let ts = ThetaStructure::new(&info.theta);
        let mut cdf = Vec::with_capacity(work.probs().len());
        let mut acc = 0.0;
        for &p in work.probs() {
            acc += p;
            cdf.push(acc);
        }
        let orthogonal = info.orthogonal;
        Ok(ProtocolContext { css: canon, ts, orthogonal, mix: work, cdf })
    }

    pub fn n(&self) -> usize {
        self.css.n()
    }

    pub fn nz(&self) -> usize {
        self.css.nz()
    }

    pub fn state(&self) -> &CssState {
        &self.css
    }

    pub fn theta_structure(&self) -> &ThetaStructure {
        &self.ts
    }

    pub fn orthogonal(&self) -> bool {
        self.orthogonal
    }

    /// The mixture in the working representation.
    pub fn mixture(&self) -> &DiagonalMixture {
        &self.mix
    }

    pub fn degrees(&self, k: usize, delta: &BitVector) -> (usize, usize) {
        candidate_degrees(&self.ts, self.orthogonal, k, delta)
    }

    pub fn sample_operation(&self, k: usize, rng: &mut impl Rng) -> PermClifford {
        sample_perm_clifford(&self.ts, self.orthogonal, k, rng)
    }

    fn sample_phase_index(&self, rng: &mut impl Rng) -> usize {
        let x: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= x).min(self.cdf.len() - 1)
    }

    /// Draws b̃ from the k-fold product mixture, arranged per party.
    pub fn sample_btilde(&self, k: usize, rng: &mut impl Rng) -> BitVector {
        let n = self.n();
        let mut out = BitVector::zeros(n * k);
        for copy in 0..k {
            let b = bits_of_index(n, self.sample_phase_index(rng));
            for j in 0..n {
                if b.get(j) {
                    out.set(j * k + copy, true);
                }
            }
        }
        out
    }
}

/// Which of the two equivalent protocol views a run uses: one overall
/// operation, or a fresh operation on the remaining copies before each
/// measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandMode {
    Overall,
    Stepwise,
}

/// Measurement schedule of one run.
#[derive(Clone, Copy, Debug)]
pub struct RunSpec {
    pub copies: usize,
    pub mz: f64,
    pub mx: f64,
    pub mode: RandMode,
}

fn fraction_to_count(frac: f64, k: usize) -> usize {
    let raw = frac * k as f64;
    if (raw - raw.round()).abs() < 1e-9 {
        raw.round() as usize
    } else {
        raw.ceil() as usize
    }
}

impl RunSpec {
    pub fn new(copies: usize, mz: f64, mx: f64) -> Self {
        RunSpec { copies, mz, mx, mode: RandMode::Overall }
    }

    /// (⌈m_z k⌉, ⌈m_x k⌉), rejecting over-full schedules.
    pub fn measured_counts(&self) -> Result<(usize, usize), SimError> {
        let zk = fraction_to_count(self.mz, self.copies);
        let xk = fraction_to_count(self.mx, self.copies);
        if zk + xk > self.copies {
            return Err(SimError::BadSchedule { zk, xk, copies: self.copies });
        }
        Ok((zk, xk))
    }
}

/// Candidate pool of a run, as deviations from the truth. δ = 0 (the truth)
/// is always implicitly included as the first entry.
#[derive(Clone, Debug)]
pub enum Pool {
    /// Every deviation in Z_2^{nk}; guarded.
    Exhaustive,
    /// The given deviations (0 is prepended if missing).
    Deltas(Vec<BitVector>),
}

/// Outcome of one protocol run.
#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub truth: BitVector,
    /// Deviations of the pool, 0 first.
    pub pool: Vec<BitVector>,
    /// For each pool entry, the measurement step (0-based, schedule order)
    /// that eliminated it, or None if it survived.
    pub eliminated_at: Vec<Option<usize>>,
    /// True iff the truth is the only survivor.
    pub success: bool,
}

impl ProtocolRun {
    pub fn survivors(&self) -> impl Iterator<Item = &BitVector> {
        self.pool
            .iter()
            .zip(&self.eliminated_at)
            .filter(|(_, e)| e.is_none())
            .map(|(d, _)| d)
    }
}

fn build_pool(n: usize, k: usize, pool: &Pool) -> Result<Vec<BitVector>, SimError> {
    match pool {
        Pool::Exhaustive => {
            let bits = n * k;
            if bits > TYPICAL_ENUM_LIMIT {
                return Err(SimError::TooLarge { size: bits, limit: TYPICAL_ENUM_LIMIT });
            }
            Ok((0..(1u64 << bits)).map(|x| BitVector::from_u64(bits, x)).collect())
        }
        Pool::Deltas(ds) => {
            let mut out = Vec::with_capacity(ds.len() + 1);
            out.push(BitVector::zeros(n * k));
            for d in ds {
                assert_eq!(d.len(), n * k, "deviation length must be nk");
                if !d.is_zero() {
                    out.push(d.clone());
                }
            }
            Ok(out)
        }
    }
}

/// Measured-copy kinds in schedule order.
fn schedule_kinds(zk: usize, xk: usize) -> Vec<bool> {
    // true = σ_z copy
    let mut kinds = vec![true; zk];
    kinds.extend(std::iter::repeat_n(false, xk));
    kinds
}

/// Coordinates of one measured copy that the reveal exposes, for the current
/// per-party arrangement with `k` copies.
fn revealed_coords(n: usize, nz: usize, k: usize, copy: usize, z_kind: bool) -> Vec<usize> {
    if z_kind {
        (0..nz).map(|j| j * k + copy).collect()
    } else {
        (nz..n).map(|j| j * k + copy).collect()
    }
}

/// Executes one protocol run.
pub fn run_protocol(
    ctx: &ProtocolContext,
    spec: &RunSpec,
    pool: &Pool,
    rng: &mut impl Rng,
) -> Result<ProtocolRun, SimError> {
    let (zk, xk) = spec.measured_counts()?;
    let (n, nz, k) = (ctx.n(), ctx.nz(), spec.copies);
    let kinds = schedule_kinds(zk, xk);
    let truth = ctx.sample_btilde(k, rng);
    let deltas = build_pool(n, k, pool)?;
    let mut eliminated_at: Vec<Option<usize>> = vec![None; deltas.len()];

    match spec.mode {
        RandMode::Overall => {
            let pc = ctx.sample_operation(k, rng);
            for (idx, delta) in deltas.iter().enumerate() {
                let image = apply_perm(&pc, delta);
                for (step, &z_kind) in kinds.iter().enumerate() {
                    let coords = revealed_coords(n, nz, k, step, z_kind);
                    if coords.iter().any(|&c| image.get(c)) {
                        eliminated_at[idx] = Some(step);
                        break;
                    }
                }
            }
        }
        RandMode::Stepwise => {
            let mut current: Vec<BitVector> = deltas.clone();
            let mut alive: Vec<bool> = vec![true; deltas.len()];
            for (step, &z_kind) in kinds.iter().enumerate() {
                let k_t = k - step;
                let pc = ctx.sample_operation(k_t, rng);
                let coords = revealed_coords(n, nz, k_t, 0, z_kind);
                for idx in 0..current.len() {
                    if !alive[idx] {
                        continue;
                    }
                    let image = apply_perm(&pc, &current[idx]);
                    if coords.iter().any(|&c| image.get(c)) {
                        alive[idx] = false;
                        eliminated_at[idx] = Some(step);
                        continue;
                    }
                    // drop the measured copy from every party's block
                    let mut next = BitVector::zeros(n * (k_t - 1));
                    for j in 0..n {
                        for c in 1..k_t {
                            if image.get(j * k_t + c) {
                                next.set(j * (k_t - 1) + (c - 1), true);
                            }
                        }
                    }
                    current[idx] = next;
                }
            }
        }
    }

    assert!(eliminated_at[0].is_none(), "the truth can never be eliminated");
    let survivors = eliminated_at.iter().filter(|e| e.is_none()).count();
    Ok(ProtocolRun { truth, pool: deltas, eliminated_at, success: survivors == 1 })
}

/// One aggregated row of a survival experiment.
#[derive(Clone, Debug)]
pub struct SurvivalRow {
    pub dz: usize,
    pub dx: usize,
    pub trials: usize,
    pub survivals: usize,
    pub predicted: f64,
    pub z_score: f64,
}

/// Plants the given deviations over many independent runs and bins their
/// survival counts by candidate degrees, comparing against the elimination
/// law 2^{−(d_z ⌈m_z k⌉ + d_x ⌈m_x k⌉)}.
pub fn survival_experiment(
    ctx: &ProtocolContext,
    spec: &RunSpec,
    deltas: &[BitVector],
    trials: usize,
    seed: u64,
) -> Result<Vec<SurvivalRow>, SimError> {
    let (zk, xk) = spec.measured_counts()?;
    let pool = Pool::Deltas(deltas.to_vec());
    let pool_len = build_pool(ctx.n(), spec.copies, &pool)?.len();

    let counts: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let run = run_protocol(ctx, spec, &pool, &mut rng).expect("validated spec");
            run.eliminated_at.iter().map(|e| e.is_none() as usize).collect::<Vec<_>>()
        })
        .reduce(
            || vec![0usize; pool_len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );

    // bin by degrees (skip the implicit truth at index 0)
    let canonical_pool = build_pool(ctx.n(), spec.copies, &pool)?;
    let mut rows: Vec<SurvivalRow> = Vec::new();
    for (idx, delta) in canonical_pool.iter().enumerate().skip(1) {
        let (dz, dx) = ctx.degrees(spec.copies, delta);
        let predicted = 2.0f64.powi(-((dz * zk + dx * xk) as i32));
        match rows.iter_mut().find(|r| (r.dz, r.dx) == (dz, dx)) {
            Some(row) => {
                row.trials += trials;
                row.survivals += counts[idx];
            }
            None => rows.push(SurvivalRow {
                dz,
                dx,
                trials,
                survivals: counts[idx],
                predicted,
                z_score: 0.0,
            }),
        }
    }
    for row in rows.iter_mut() {
        let mean = row.trials as f64 * row.predicted;
        let sigma = (row.trials as f64 * row.predicted * (1.0 - row.predicted)).sqrt();
        row.z_score = if sigma > 0.0 { (row.survivals as f64 - mean) / sigma } else { 0.0 };
    }
    rows.sort_by_key(|r| (r.dz, r.dx));
    Ok(rows)
}

/// Per-step conditional survival of one planted deviation.
#[derive(Clone, Debug)]
pub struct StepRate {
    pub step: usize,
    pub z_kind: bool,
    pub alive_before: usize,
    pub alive_after: usize,
    /// Conditional survival rate at this step.
    pub rate: f64,
    /// 2^{−d_z} or 2^{−d_x} of the planted deviation.
    pub expected: f64,
}

/// Estimates the conditional per-measurement survival rate of a planted
/// deviation at every step of the schedule.
pub fn drift_check(
    ctx: &ProtocolContext,
    spec: &RunSpec,
    delta: &BitVector,
    trials: usize,
    seed: u64,
) -> Result<Vec<StepRate>, SimError> {
    let (zk, xk) = spec.measured_counts()?;
    let kinds = schedule_kinds(zk, xk);
    let (dz, dx) = ctx.degrees(spec.copies, delta);
    let pool = Pool::Deltas(vec![delta.clone()]);
    let slot = if delta.is_zero() { 0 } else { 1 };

    let elim_steps: Vec<Option<usize>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let run = run_protocol(ctx, spec, &pool, &mut rng).expect("validated spec");
            run.eliminated_at[slot]
        })
        .collect();

    let mut rates = Vec::with_capacity(kinds.len());
    for (step, &z_kind) in kinds.iter().enumerate() {
        let alive_before =
            elim_steps.iter().filter(|e| e.is_none_or(|s| s >= step)).count();
        let alive_after =
            elim_steps.iter().filter(|e| e.is_none_or(|s| s > step)).count();
        let rate = if alive_before > 0 {
            alive_after as f64 / alive_before as f64
        } else {
            f64::NAN
        };
        let expected = if z_kind {
            2.0f64.powi(-(dz as i32))
        } else {
            2.0f64.powi(-(dx as i32))
        };
        rates.push(StepRate { step, z_kind, alive_before, alive_after, rate, expected });
    }
    Ok(rates)
}

/// Homogeneity chi-square over a set of (successes, trials) binomial rows
/// with a pooled rate; returns (statistic, degrees of freedom).
pub fn proportions_chi_square(rows: &[(usize, usize)]) -> (f64, usize) {
    let total_s: usize = rows.iter().map(|r| r.0).sum();
    let total_n: usize = rows.iter().map(|r| r.1).sum();
    if total_n == 0 {
        return (0.0, 0);
    }
    let pooled = total_s as f64 / total_n as f64;
    if pooled <= 0.0 || pooled >= 1.0 {
        return (0.0, rows.len().saturating_sub(1));
    }
    let mut stat = 0.0;
    for &(s, n) in rows {
        let expect = n as f64 * pooled;
        let var = n as f64 * pooled * (1.0 - pooled);
        if var > 0.0 {
            stat += (s as f64 - expect).powi(2) / var;
        }
    }
    (stat, rows.len().saturating_sub(1))
}

/// Survival function of the chi-square distribution (regularized upper
/// incomplete gamma Q(df/2, x/2)).
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if df == 0 || x <= 0.0 {
        return 1.0;
    }
    let a = df as f64 / 2.0;
    let xs = x / 2.0;
    if xs < a + 1.0 {
        1.0 - lower_gamma_series(a, xs)
    } else {
        upper_gamma_cf(a, xs)
    }
}

fn ln_gamma(z: f64) -> f64 {
    // Lanczos approximation, g = 7
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if z < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

fn lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-15 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// The strongly typical set of k-fold sequences, materialized exhaustively.
/// Members are packed per party: bit j·k+i is phase j of copy i.
#[derive(Clone, Debug)]
pub struct TypicalSet {
    mix: DiagonalMixture,
    k: usize,
    epsilon: f64,
    members: Vec<u64>,
}

fn copy_index(n: usize, k: usize, seq: u64, copy: usize) -> usize {
    let mut idx = 0usize;
    for j in 0..n {
        idx = (idx << 1) | (((seq >> (j * k + copy)) & 1) as usize);
    }
    idx
}

fn typical_from_counts(mix: &DiagonalMixture, k: usize, epsilon: f64, counts: &[usize]) -> bool {
    counts
        .iter()
        .zip(mix.probs())
        .all(|(&c, &p)| (c as f64 / k as f64 - p).abs() < epsilon)
}

impl TypicalSet {
    /// Exhaustive enumeration of all b̃ ∈ Z_2^{nk} passing the frequency
    /// test; refuses nk beyond [`TYPICAL_ENUM_LIMIT`].
    pub fn enumerate(mix: &DiagonalMixture, k: usize, epsilon: f64) -> Result<Self, SimError> {
        let n = mix.n();
        let bits = n * k;
        if bits > TYPICAL_ENUM_LIMIT {
            return Err(SimError::TooLarge { size: bits, limit: TYPICAL_ENUM_LIMIT });
        }
        let mut members = Vec::new();
        let mut counts = vec![0usize; 1 << n];
        for seq in 0..(1u64 << bits) {
            counts.iter_mut().for_each(|c| *c = 0);
            for copy in 0..k {
                counts[copy_index(n, k, seq, copy)] += 1;
            }
            if typical_from_counts(mix, k, epsilon, &counts) {
                members.push(seq);
            }
        }
        Ok(TypicalSet { mix: mix.clone(), k, epsilon, members })
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mixture(&self) -> &DiagonalMixture {
        &self.mix
    }

    /// Membership test for an arbitrary per-party sequence.
    pub fn is_typical(mix: &DiagonalMixture, k: usize, epsilon: f64, seq: &BitVector) -> bool {
        let n = mix.n();
        assert_eq!(seq.len(), n * k);
        let mut counts = vec![0usize; 1 << n];
        for copy in 0..k {
            let mut idx = 0usize;
            for j in 0..n {
                idx = (idx << 1) | seq.get(j * k + copy) as usize;
            }
            counts[idx] += 1;
        }
        typical_from_counts(mix, k, epsilon, &counts)
    }
}

/// The summed Chebyshev bound: p(members) ≥ 1 − Σ_a p(a)(1−p(a))/(kε²).
pub fn chebyshev_mass_bound(mix: &DiagonalMixture, k: usize, epsilon: f64) -> f64 {
    let slack: f64 =
        mix.probs().iter().map(|&p| p * (1.0 - p)).sum::<f64>() / (k as f64 * epsilon * epsilon);
    1.0 - slack
}

/// Monte Carlo estimate of the typical-set mass under the product measure.
pub fn empirical_typical_mass(
    mix: &DiagonalMixture,
    k: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> f64 {
    let n = mix.n();
    let mut cdf = Vec::with_capacity(mix.probs().len());
    let mut acc = 0.0;
    for &p in mix.probs() {
        acc += p;
        cdf.push(acc);
    }
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let mut counts = vec![0usize; 1 << n];
            for _ in 0..k {
                let x: f64 = rng.random();
                let idx = cdf.partition_point(|&c| c <= x).min(cdf.len() - 1);
                counts[idx] += 1;
            }
            typical_from_counts(mix, k, epsilon, &counts) as usize
        })
        .sum();
    hits as f64 / trials as f64
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Counts the typical sequences whose per-copy cosets of 𝒥^⊥ = ker J^T all
/// match those of `u`, twice: by direct enumeration and by the multinomial
/// identity Σ_profiles ∏_j c_j!/∏_a m_a!. The two must agree exactly.
pub fn count_matching(ts: &TypicalSet, j: &BitMatrix, u: u64) -> (u128, u128) {
    let n = ts.mix.n();
    let k = ts.k;
    assert_eq!(j.rows(), n, "J must have n rows");
    assert!(ts.members.contains(&u), "u must be a typical member");
    let jt = j.reduced_column_echelon().transpose();
    let label_of = |idx: usize| index_of_bits(&jt.mul_vec(&bits_of_index(n, idx)));

    // enumeration path
    let u_labels: Vec<usize> = (0..k).map(|c| label_of(copy_index(n, k, u, c))).collect();
    let enumerated = ts
        .members
        .iter()
        .filter(|&&v| (0..k).all(|c| label_of(copy_index(n, k, v, c)) == u_labels[c]))
        .count() as u128;

    // multinomial path: per-coset composition sums multiply
    let mut cosets: Vec<Vec<usize>> = Vec::new();
    let mut coset_label: Vec<usize> = Vec::new();
    for idx in 0..(1usize << n) {
        let label = label_of(idx);
        match coset_label.iter().position(|&l| l == label) {
            Some(pos) => cosets[pos].push(idx),
            None => {
                coset_label.push(label);
                cosets.push(vec![idx]);
            }
        }
    }
    let mut combinatorial: u128 = 1;
    for (coset, &label) in cosets.iter().zip(&coset_label) {
        let c_j = u_labels.iter().filter(|&&l| l == label).count();
        combinatorial *= coset_composition_sum(ts, coset, c_j);
    }
    (enumerated, combinatorial)
}

/// Σ over compositions (m_a)_{a ∈ coset} of c_j with every m_a/k within ε of
/// p(a), of c_j!/∏ m_a!.
fn coset_composition_sum(ts: &TypicalSet, coset: &[usize], c_j: usize) -> u128 {
    let mut total: u128 = 0;
    let mut stack: Vec<(usize, usize, u128)> = vec![(0, c_j, 1)];
    while let Some((pos, remaining, denom)) = stack.pop() {
        if pos == coset.len() {
            if remaining == 0 {
                total += factorial(c_j) / denom;
            }
            continue;
        }
        let p = ts.mix.probs()[coset[pos]];
        for m in 0..=remaining {
            if ((m as f64) / ts.k as f64 - p).abs() < ts.epsilon {
                stack.push((pos + 1, remaining - m, denom * factorial(m)));
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{cat_state, depolarizing_cat4_mixture};
    use crate::permcliff::enumerate_perm_cliffords;
    use crate::yieldlp::DiagonalMixture;

    fn coin_mixture() -> DiagonalMixture {
        DiagonalMixture::new(1, vec![0.5, 0.5]).unwrap()
    }

    fn toy2_mixture() -> DiagonalMixture {
        DiagonalMixture::new(2, vec![0.55, 0.25, 0.15, 0.05]).unwrap()
    }

    fn cat4_ctx(f: f64) -> ProtocolContext {
        ProtocolContext::new(&cat_state(4), &depolarizing_cat4_mixture(f)).unwrap()
    }

    #[test]
    fn typical_point_mass() {
        let mix = DiagonalMixture::point_mass(2, &BitVector::zeros(2));
        let ts = TypicalSet::enumerate(&mix, 3, 0.1).unwrap();
        assert_eq!(ts.members(), &[0]);
    }

    #[test]
    fn typical_coin_counts() {
        // fair coin, k = 4, ε = 0.3: frequencies 1/4, 2/4, 3/4 pass
        let ts = TypicalSet::enumerate(&coin_mixture(), 4, 0.3).unwrap();
        assert_eq!(ts.len(), 14);
    }

    #[test]
    fn chebyshev_bound_respected() {
        for (k, eps) in [(8, 0.1), (16, 0.1), (32, 0.05)] {
            let mix = toy2_mixture();
            let mass = empirical_typical_mass(&mix, k, eps, 10_000, 7 + k as u64);
            let bound = chebyshev_mass_bound(&mix, k, eps);
            // allow 3σ of sampling noise below the bound
            let sigma = (0.25f64 / 10_000.0).sqrt();
            assert!(
                mass >= bound - 3.0 * sigma,
                "mass {mass} below Chebyshev bound {bound} at (k,ε)=({k},{eps})"
            );
        }
    }

    #[test]
    fn counting_identity_examples() {
        let mix = toy2_mixture();
        let ts = TypicalSet::enumerate(&mix, 6, 0.4).unwrap();
        let u = ts.members()[0];

        // J = I: only u itself matches
        let (e, c) = count_matching(&ts, &BitMatrix::identity(2), u);
        assert_eq!(e, 1);
        assert_eq!(c, 1);

        // zero columns: everything matches
        let (e, c) = count_matching(&ts, &BitMatrix::zeros(2, 0), u);
        assert_eq!(e, ts.len() as u128);
        assert_eq!(c, e);

        // a proper subspace
        let j = BitMatrix::from_bit_rows(&[&[1], &[1]]);
        let (e, c) = count_matching(&ts, &j, u);
        assert_eq!(e, c);
        assert!(e >= 1);
    }

    #[test]
    fn counting_identity_grid() {
        for k in 2..=8usize {
            let mix = toy2_mixture();
            let ts = TypicalSet::enumerate(&mix, k, 0.35).unwrap();
            if ts.is_empty() {
                continue;
            }
            let u = ts.members()[ts.len() / 2];
            for j in [
                BitMatrix::identity(2),
                BitMatrix::zeros(2, 0),
                BitMatrix::from_bit_rows(&[&[1], &[0]]),
                BitMatrix::from_bit_rows(&[&[0], &[1]]),
                BitMatrix::from_bit_rows(&[&[1], &[1]]),
            ] {
                let (e, c) = count_matching(&ts, &j, u);
                assert_eq!(e, c, "enumeration vs multinomial at k={k}");
            }
        }
        // one-bit mixtures too
        for k in 2..=8usize {
            let mix = coin_mixture();
            let ts = TypicalSet::enumerate(&mix, k, 0.3).unwrap();
            if ts.is_empty() {
                continue;
            }
            let u = ts.members()[0];
            for j in [BitMatrix::identity(1), BitMatrix::zeros(1, 0)] {
                let (e, c) = count_matching(&ts, &j, u);
                assert_eq!(e, c);
            }
        }
    }

    #[test]
    fn pure_input_always_succeeds() {
        let mix = DiagonalMixture::point_mass(4, &BitVector::zeros(4));
        let ctx = ProtocolContext::new(&cat_state(4), &mix).unwrap();
        let spec = RunSpec::new(4, 0.25, 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..50 {
            let run = run_protocol(&ctx, &spec, &Pool::Exhaustive, &mut rng).unwrap();
            assert!(run.truth.is_zero());
            assert!(run.eliminated_at[0].is_none());
        }
    }

    #[test]
    fn truth_never_eliminated() {
        let ctx = cat4_ctx(0.9);
        let spec = RunSpec::new(6, 1.0 / 3.0, 1.0 / 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..200 {
            let deltas: Vec<BitVector> =
                (0..3).map(|_| crate::gf2::random_vector(24, &mut rng)).collect();
            let run = run_protocol(&ctx, &spec, &Pool::Deltas(deltas), &mut rng).unwrap();
            assert!(run.eliminated_at[0].is_none());
        }
    }

    #[test]
    fn bad_schedule_rejected() {
        let ctx = cat4_ctx(0.9);
        let spec = RunSpec::new(3, 0.5, 0.5); // 2 + 2 > 3
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        assert!(matches!(
            run_protocol(&ctx, &spec, &Pool::Exhaustive, &mut rng),
            Err(SimError::BadSchedule { .. })
        ));
    }

    #[test]
    fn bell_exhaustive_average_matches_monte_carlo() {
        // average survivor count over the whole valid operation set at k = 2
        let bell = cat_state(2);
        let mix = DiagonalMixture::new(2, vec![0.6, 0.2, 0.15, 0.05]).unwrap();
        let ctx = ProtocolContext::new(&bell, &mix).unwrap();
        let k = 2usize;
        let spec = RunSpec::new(k, 0.5, 0.5);
        let (zk, xk) = spec.measured_counts().unwrap();
        let kinds = schedule_kinds(zk, xk);

        let all = enumerate_perm_cliffords(ctx.theta_structure(), true, k).unwrap();
        assert_eq!(all.len(), 720, "|Sp(4,2)|");
        let mut exact_total = 0usize;
        for pc in &all {
            for delta_bits in 0..(1u64 << (2 * k)) {
                let delta = BitVector::from_u64(2 * k, delta_bits);
                let image = apply_perm(pc, &delta);
                let alive = kinds.iter().enumerate().all(|(step, &z_kind)| {
                    revealed_coords(2, 1, k, step, z_kind)
                        .iter()
                        .all(|&c| !image.get(c))
                });
                exact_total += alive as usize;
            }
        }
        let exact_avg = exact_total as f64 / all.len() as f64;

        let trials = 4000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let mut mc_total = 0usize;
        let mut mc_sq = 0.0f64;
        for _ in 0..trials {
            let run = run_protocol(&ctx, &spec, &Pool::Exhaustive, &mut rng).unwrap();
            let s = run.eliminated_at.iter().filter(|e| e.is_none()).count();
            mc_total += s;
            mc_sq += (s * s) as f64;
        }
        let mc_avg = mc_total as f64 / trials as f64;
        let var = mc_sq / trials as f64 - mc_avg * mc_avg;
        let sigma = (var / trials as f64).sqrt();
        assert!(
            (mc_avg - exact_avg).abs() < 3.0 * sigma + 1e-9,
            "exact {exact_avg} vs monte carlo {mc_avg} (sigma {sigma})"
        );
    }

    #[test]
    #[ignore = "minutes-long exhaustive sweep of Sp(6,2)"]
    fn bell_exhaustive_average_matches_monte_carlo_k3() {
        let bell = cat_state(2);
        let mix = DiagonalMixture::new(2, vec![0.6, 0.2, 0.15, 0.05]).unwrap();
        let ctx = ProtocolContext::new(&bell, &mix).unwrap();
        let k = 3usize;
        let spec = RunSpec::new(k, 1.0 / 3.0, 1.0 / 3.0);
        let (zk, xk) = spec.measured_counts().unwrap();
        let kinds = schedule_kinds(zk, xk);
        let all = enumerate_perm_cliffords(ctx.theta_structure(), true, k).unwrap();
        assert_eq!(all.len(), 1_451_520, "|Sp(6,2)|");
        let exact_total: usize = all
            .par_iter()
            .map(|pc| {
                let mut count = 0usize;
                for delta_bits in 0..(1u64 << (2 * k)) {
                    let delta = BitVector::from_u64(2 * k, delta_bits);
                    let image = apply_perm(pc, &delta);
                    let alive = kinds.iter().enumerate().all(|(step, &z_kind)| {
                        revealed_coords(2, 1, k, step, z_kind)
                            .iter()
                            .all(|&c| !image.get(c))
                    });
                    count += alive as usize;
                }
                count
            })
            .sum();
        let exact_avg = exact_total as f64 / all.len() as f64;
        let trials = 20_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let mut mc_total = 0usize;
        let mut mc_sq = 0.0f64;
        for _ in 0..trials {
            let run = run_protocol(&ctx, &spec, &Pool::Exhaustive, &mut rng).unwrap();
            let s = run.eliminated_at.iter().filter(|e| e.is_none()).count();
            mc_total += s;
            mc_sq += (s * s) as f64;
        }
        let mc_avg = mc_total as f64 / trials as f64;
        let var = mc_sq / trials as f64 - mc_avg * mc_avg;
        let sigma = (var / trials as f64).sqrt();
        assert!((mc_avg - exact_avg).abs() < 3.0 * sigma + 1e-9);
    }

    #[test]
    fn survival_law_small() {
        // quick version of the acceptance experiment: k = 8, 2000 trials
        let ctx = cat4_ctx(0.9);
        let k = 8usize;
        let spec = RunSpec::new(k, 0.25, 0.25);
        let mut delta = BitVector::zeros(4 * k);
        delta.set(0, true); // z-party deviation: degrees (1,1)
        let rows = survival_experiment(&ctx, &spec, &[delta], 2000, 71).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].dz, rows[0].dx), (1, 1));
        assert!((rows[0].predicted - 2.0f64.powi(-4)).abs() < 1e-12);
        assert!(rows[0].z_score.abs() < 3.0, "z = {}", rows[0].z_score);
    }

    #[test]
    fn drift_rates_flat() {
        let ctx = cat4_ctx(0.9);
        let k = 8usize;
        let spec = RunSpec::new(k, 0.5, 0.0);
        let mut delta = BitVector::zeros(4 * k);
        delta.set(0, true);
        let rates = drift_check(&ctx, &spec, &delta, 4000, 72).unwrap();
        assert_eq!(rates.len(), 4);
        // step-1 conditional rate near 1/2
        assert!((rates[0].rate - 0.5).abs() < 0.05, "rate {}", rates[0].rate);
        let rows: Vec<(usize, usize)> =
            rates.iter().map(|r| (r.alive_after, r.alive_before)).collect();
        let (stat, df) = proportions_chi_square(&rows);
        let p = chi_square_sf(stat, df);
        assert!(p > 0.01, "drift detected: chi2 = {stat}, p = {p}");

        // the truth itself never gets eliminated at any step
        let zero = BitVector::zeros(4 * k);
        let rates = drift_check(&ctx, &spec, &zero, 200, 73).unwrap();
        for r in rates {
            assert_eq!(r.rate, 1.0);
        }
    }

    #[test]
    fn stepwise_matches_overall() {
        let ctx = cat4_ctx(0.9);
        let k = 6usize;
        let mut delta = BitVector::zeros(4 * k);
        delta.set(0, true);
        delta.set(3 * k + 1, true);
        let trials = 3000usize;
        let mut survive = [0usize; 2];
        for (m, mode) in [RandMode::Overall, RandMode::Stepwise].into_iter().enumerate() {
            let spec = RunSpec { copies: k, mz: 1.0 / 3.0, mx: 1.0 / 3.0, mode };
            let pool = Pool::Deltas(vec![delta.clone()]);
            let mut rng = ChaCha8Rng::seed_from_u64(74 + m as u64);
            for _ in 0..trials {
                let run = run_protocol(&ctx, &spec, &pool, &mut rng).unwrap();
                survive[m] += run.eliminated_at[1].is_none() as usize;
            }
        }
        // both estimate the same survival probability
        let p = (survive[0] + survive[1]) as f64 / (2 * trials) as f64;
        let sigma = (2.0 * trials as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (survive[0] as f64 - survive[1] as f64).abs() < 3.0 * sigma + 1e-9,
            "views disagree: {survive:?}"
        );
    }

    #[test]
    fn failure_rate_decreases_with_copies() {
        // ε = k^{-1/4} typicality filter on decoys; fixed schedule; the
        // failure frequency must fall as k grows
        let ctx = cat4_ctx(0.9);
        let mut rates = Vec::new();
        for &k in &[8usize, 12, 16, 20] {
            let spec = RunSpec::new(k, 0.25, 0.25);
            let eps = (k as f64).powf(-0.25);
            let trials = 600usize;
            let failures: usize = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = ChaCha8Rng::seed_from_u64(75 + k as u64);
                    rng.set_stream(trial as u64);
                    // planted near-candidate plus typical iid decoys
                    let mut deltas = Vec::with_capacity(9);
                    let mut planted = BitVector::zeros(4 * k);
                    planted.set(0, true);
                    deltas.push(planted);
                    let truth = ctx.sample_btilde(k, &mut rng);
                    let mut attempts = 0;
                    while deltas.len() < 9 && attempts < 200 {
                        attempts += 1;
                        let decoy = ctx.sample_btilde(k, &mut rng);
                        if TypicalSet::is_typical(ctx.mixture(), k, eps, &decoy) {
                            deltas.push(decoy.xor(&truth));
                        }
                    }
                    let run =
                        run_protocol(&ctx, &spec, &Pool::Deltas(deltas), &mut rng).unwrap();
                    (!run.success) as usize
                })
                .sum();
            rates.push(failures as f64 / 600.0);
        }
        for w in rates.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "failure rates not decreasing: {rates:?}");
        }
        assert!(rates[3] < rates[0], "no overall decrease: {rates:?}");
    }

    #[test]
    fn chi_square_sf_sanity() {
        assert!((chi_square_sf(0.0, 3) - 1.0).abs() < 1e-12);
        // textbook 5% critical values
        assert!((chi_square_sf(3.841, 1) - 0.05).abs() < 0.001);
        assert!((chi_square_sf(7.815, 3) - 0.05).abs() < 0.001);
        assert!((chi_square_sf(16.919, 9) - 0.05).abs() < 0.001);
    }
}
