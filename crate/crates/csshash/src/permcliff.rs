//! Local Clifford operations that permute k-fold tensor products of a fixed
//! CSS state.
//!
//! Fix a canonical CSS state with S_z = [I; θ]. Each of the n parties holds
//! the matching qubit of every one of k copies, and acts with its own
//! Clifford [[A_i, B_i], [C_i, D_i]] on those k qubits. The operations whose
//! combined action merely permutes the 2^{nk} basis products (via an
//! invertible R with C (S ⊗ I_k) R = S ⊗ I_k) form a subgroup with a rigid
//! structure: all A_i coincide, all D_i coincide, and the B/C blocks satisfy
//! linear constraint systems derived from the pairwise column products of θ.
//!
//! Two regimes:
//! - θ orthogonal (θ^T θ = θ θ^T = I): representing the state with S_x = S_z,
//!   every party applies one and the same symplectic [[A, B], [C, D]] and
//!   R = [[I ⊗ D^T, I ⊗ B^T], [I ⊗ C^T, I ⊗ A^T]].
//! - θ not orthogonal: D = A^{-T}, the blocks factor as B_i = A X_i,
//!   C_i = A^{-T} Y_i with X_i, Y_i symmetric, and for every entry position
//!   the vector of X-values (resp. Y) across parties lies in the kernel of
//!   the B-constraint (resp. C-constraint) matrix. Sampling each position
//!   independently and uniformly from those kernels is uniform over the
//!   whole subgroup at fixed A.

use crate::gf2::{
    enumerate_invertible, enumerate_symplectic, random_in_column_space, sample_invertible,
    sample_symplectic, symplectic_form, BitMatrix, BitVector, Gf2Error,
};
use crate::stabilizer::CssState;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermCliffError {
    #[error("operation does not permute the tensor products (no valid R)")]
    NotPermutation,
    #[error("party {0} block is not symplectic")]
    NotSymplectic(usize),
    #[error("state must be canonicalized first")]
    NotCanonical,
    #[error("state is separable; the permutation subgroup is only defined for fully entangled states")]
    Separable,
    #[error("representation mismatch: operation built for orthogonal={0}")]
    RepresentationMismatch(bool),
    #[error("size {size} exceeds guard {limit}")]
    TooLarge { size: usize, limit: usize },
}

impl From<Gf2Error> for PermCliffError {
    fn from(e: Gf2Error) -> Self {
        match e {
            Gf2Error::TooLarge { size, limit } => PermCliffError::TooLarge { size, limit },
            Gf2Error::SingularMatrix => PermCliffError::NotPermutation,
        }
    }
}

/// Constraint matrices attached to a canonical θ.
///
/// `l_theta` has n_x rows and one column θ_j ⊙ θ_l per pair j < l of columns
/// of θ, reduced to a canonical column basis; `l_theta_t` likewise for θ^T
/// (n_z rows). Empty pair sets give zero-column matrices. `m_theta` /
/// `m_theta_t` span the orthogonal complements of the column spaces of
/// `l_theta` / `l_theta_t`.
#[derive(Clone, Debug)]
pub struct ThetaStructure {
    pub theta: BitMatrix,
    pub l_theta: BitMatrix,
    pub l_theta_t: BitMatrix,
    pub m_theta: BitMatrix,
    pub m_theta_t: BitMatrix,
    /// [[θ, I_{n_x}], [L_{θ^T}^T, 0]]: the B-block constraint system.
    pub constraint_b: BitMatrix,
    /// [[I_{n_z}, θ^T], [0, L_θ^T]]: the C-block constraint system.
    pub constraint_c: BitMatrix,
    kernel_b: BitMatrix,
    kernel_c: BitMatrix,
}

/// Pairwise elementwise column products M_j ⊙ M_l for j < l, reduced to a
/// canonical column basis (kernels only depend on the column space).
fn pair_products(m: &BitMatrix) -> BitMatrix {
    let mut cols = Vec::new();
    for j in 0..m.cols() {
        for l in j + 1..m.cols() {
            cols.push(m.col(j).and(&m.col(l)));
        }
    }
    if cols.is_empty() {
        return BitMatrix::zeros(m.rows(), 0);
    }
    BitMatrix::from_cols(&cols).reduced_column_echelon()
}

impl ThetaStructure {
    pub fn new(theta: &BitMatrix) -> Self {
        let (nx, nz) = (theta.rows(), theta.cols());
        let l_theta = pair_products(theta);
        let l_theta_t = pair_products(&theta.transpose());
        let m_theta = l_theta.transpose().kernel_basis();
        let m_theta_t = l_theta_t.transpose().kernel_basis();
        let constraint_b = BitMatrix::vstack(&[
            &BitMatrix::hstack(&[theta, &BitMatrix::identity(nx)]),
            &BitMatrix::hstack(&[&l_theta_t.transpose(), &BitMatrix::zeros(l_theta_t.cols(), nx)]),
        ]);
        let constraint_c = BitMatrix::vstack(&[
            &BitMatrix::hstack(&[&BitMatrix::identity(nz), &theta.transpose()]),
            &BitMatrix::hstack(&[&BitMatrix::zeros(l_theta.cols(), nz), &l_theta.transpose()]),
        ]);
        let kernel_b = constraint_b.kernel_basis();
        let kernel_c = constraint_c.kernel_basis();
        ThetaStructure {
            theta: theta.clone(),
            l_theta,
            l_theta_t,
            m_theta,
            m_theta_t,
            constraint_b,
            constraint_c,
            kernel_b,
            kernel_c,
        }
    }

    pub fn nz(&self) -> usize {
        self.theta.cols()
    }

    pub fn nx(&self) -> usize {
        self.theta.rows()
    }

    pub fn n(&self) -> usize {
        self.nz() + self.nx()
    }

    /// Kernel of the B-constraint system (one coordinate per party).
    pub fn kernel_b(&self) -> &BitMatrix {
        &self.kernel_b
    }

    /// Kernel of the C-constraint system.
    pub fn kernel_c(&self) -> &BitMatrix {
        &self.kernel_c
    }

    /// Connectivity of the support graph of [I; θ]: disconnected support is
    /// exactly a separable state, which the subgroup derivation excludes.
    pub fn is_fully_entangled(&self) -> bool {
        let n = self.n();
        if n <= 1 {
            return true;
        }
        let mut reach = vec![false; n];
        reach[0] = true;
        let mut frontier = vec![0usize];
        while let Some(v) = frontier.pop() {
            let visit = |w: usize, reach: &mut Vec<bool>, frontier: &mut Vec<usize>| {
                if !reach[w] {
                    reach[w] = true;
                    frontier.push(w);
                }
            };
            if v < self.nz() {
                for u in 0..self.nx() {
                    if self.theta.get(u, v) {
                        visit(self.nz() + u, &mut reach, &mut frontier);
                    }
                }
            } else {
                let u = v - self.nz();
                for z in 0..self.nz() {
                    if self.theta.get(u, z) {
                        visit(z, &mut reach, &mut frontier);
                    }
                }
            }
        }
        reach.into_iter().all(|r| r)
    }
}

/// A sampled local Clifford that permutes the tensor-product basis, together
/// with the induced permutation matrix R (b̃ ↦ R^T b̃).
#[derive(Clone, Debug)]
pub struct PermClifford {
    pub k: usize,
    pub orthogonal: bool,
    /// Shared A-block of every party.
    pub a: BitMatrix,
    /// Per-party B-blocks (length n).
    pub b_blocks: Vec<BitMatrix>,
    /// Per-party C-blocks (length n).
    pub c_blocks: Vec<BitMatrix>,
    /// Shared D-block (A^{-T} in the non-orthogonal case).
    pub d: BitMatrix,
    pub r: BitMatrix,
}

impl PermClifford {
    pub fn n(&self) -> usize {
        self.b_blocks.len()
    }

    /// The do-nothing element (any n, any k).
    pub fn identity(n: usize, k: usize, orthogonal: bool) -> Self {
        let i = BitMatrix::identity(k);
        let z = BitMatrix::zeros(k, k);
        PermClifford {
            k,
            orthogonal,
            a: i.clone(),
            b_blocks: vec![z.clone(); n],
            c_blocks: vec![z; n],
            d: i,
            r: BitMatrix::identity(n * k),
        }
    }
}

fn block_diag(blocks: &[&BitMatrix]) -> BitMatrix {
    let rows = blocks.iter().map(|b| b.rows()).sum();
    let cols = blocks.iter().map(|b| b.cols()).sum();
    let mut out = BitMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for r in 0..b.rows() {
            for c in 0..b.cols() {
                if b.get(r, c) {
                    out.set(r0 + r, c0 + c, true);
                }
            }
        }
        r0 += b.rows();
        c0 += b.cols();
    }
    out
}

/// R per the non-orthogonal formula: [[I_{n_z} ⊗ A^{-1}, B̃_z^T (θ^T ⊗ I_k)],
/// [C̃_x^T (θ ⊗ I_k), I_{n_x} ⊗ A^T]].
fn assemble_r_nonorth(
    ts: &ThetaStructure,
    k: usize,
    a_inv: &BitMatrix,
    a_t: &BitMatrix,
    b_blocks: &[BitMatrix],
    c_blocks: &[BitMatrix],
) -> BitMatrix {
    let (nz, nx) = (ts.nz(), ts.nx());
    let ik = BitMatrix::identity(k);
    let bz_refs: Vec<&BitMatrix> = b_blocks[..nz].iter().collect();
    let cx_refs: Vec<&BitMatrix> = c_blocks[nz..].iter().collect();
    let top_left = BitMatrix::identity(nz).kron(a_inv);
    let top_right = block_diag(&bz_refs).transpose().mul(&ts.theta.transpose().kron(&ik));
    let bottom_left = block_diag(&cx_refs).transpose().mul(&ts.theta.kron(&ik));
    let bottom_right = BitMatrix::identity(nx).kron(a_t);
    BitMatrix::vstack(&[
        &BitMatrix::hstack(&[&top_left, &top_right]),
        &BitMatrix::hstack(&[&bottom_left, &bottom_right]),
    ])
}

/// R per the orthogonal formula: [[I ⊗ D^T, I ⊗ B^T], [I ⊗ C^T, I ⊗ A^T]].
fn assemble_r_orth(
    half: usize,
    a: &BitMatrix,
    b: &BitMatrix,
    c: &BitMatrix,
    d: &BitMatrix,
) -> BitMatrix {
    let i = BitMatrix::identity(half);
    BitMatrix::vstack(&[
        &BitMatrix::hstack(&[&i.kron(&d.transpose()), &i.kron(&b.transpose())]),
        &BitMatrix::hstack(&[&i.kron(&c.transpose()), &i.kron(&a.transpose())]),
    ])
}

/// Uniformly samples an element of the permutation subgroup.
///
/// Panics when θ describes a separable state (precondition).
pub fn sample_perm_clifford(
    ts: &ThetaStructure,
    orthogonal: bool,
    k: usize,
    rng: &mut impl Rng,
) -> PermClifford {
    assert!(k >= 1);
    assert!(
        ts.is_fully_entangled(),
        "permutation subgroup is only defined for fully entangled states"
    );
    let n = ts.n();
    if orthogonal {
        let half = n / 2;
        assert_eq!(n % 2, 0, "orthogonal θ needs n_z = n_x");
        let c = sample_symplectic(k, rng).expect("k within guard");
        let a = c.submatrix(0, 0, k, k);
        let b = c.submatrix(0, k, k, k);
        let cc = c.submatrix(k, 0, k, k);
        let d = c.submatrix(k, k, k, k);
        let r = assemble_r_orth(half, &a, &b, &cc, &d);
        PermClifford {
            k,
            orthogonal,
            a,
            b_blocks: vec![b; n],
            c_blocks: vec![cc; n],
            d,
            r,
        }
    } else {
        let a = sample_invertible(k, rng);
        let a_inv = a.inverse().expect("sampled invertible");
        let a_t = a.transpose();
        let d = a_inv.transpose();
        let xs = sample_symmetric_family(ts.kernel_b(), n, k, rng);
        let ys = sample_symmetric_family(ts.kernel_c(), n, k, rng);
        let b_blocks: Vec<BitMatrix> = xs.iter().map(|x| a.mul(x)).collect();
        let c_blocks: Vec<BitMatrix> = ys.iter().map(|y| d.mul(y)).collect();
        let r = assemble_r_nonorth(ts, k, &a_inv, &a_t, &b_blocks, &c_blocks);
        PermClifford { k, orthogonal, a, b_blocks, c_blocks, d, r }
    }
}

/// One symmetric k×k matrix per party; for every entry position (s,t) with
/// s ≤ t the across-parties bit vector is uniform in the given kernel.
fn sample_symmetric_family(
    kernel: &BitMatrix,
    n: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Vec<BitMatrix> {
    let mut mats = vec![BitMatrix::zeros(k, k); n];
    for s in 0..k {
        for t in s..k {
            let v = random_in_column_space(kernel, rng);
            for (i, m) in mats.iter_mut().enumerate() {
                if v.get(i) {
                    m.set(s, t, true);
                    m.set(t, s, true);
                }
            }
        }
    }
    mats
}

/// [[S_z ⊗ I_k, 0], [0, S_x ⊗ I_k]] in the representation matching
/// `orthogonal` (S_x replaced by S_z when set).
pub fn state_copies_matrix(theta: &BitMatrix, orthogonal: bool, k: usize) -> BitMatrix {
    let (nx, nz) = (theta.rows(), theta.cols());
    let n = nz + nx;
    let sz = BitMatrix::vstack(&[&BitMatrix::identity(nz), theta]);
    let sx = if orthogonal {
        sz.clone()
    } else {
        BitMatrix::vstack(&[&theta.transpose(), &BitMatrix::identity(nx)])
    };
    let ik = BitMatrix::identity(k);
    let top = sz.kron(&ik);
    let bot = sx.kron(&ik);
    BitMatrix::vstack(&[
        &BitMatrix::hstack(&[&top, &BitMatrix::zeros(n * k, bot.cols())]),
        &BitMatrix::hstack(&[&BitMatrix::zeros(n * k, top.cols()), &bot]),
    ])
}

/// Low-level check on explicit per-party blocks: symplecticity of every
/// party and C_full (S ⊗ I_k) R = S ⊗ I_k.
pub fn verify_blocks(
    theta: &BitMatrix,
    orthogonal: bool,
    k: usize,
    a_blocks: &[BitMatrix],
    b_blocks: &[BitMatrix],
    c_blocks: &[BitMatrix],
    d_blocks: &[BitMatrix],
    r: &BitMatrix,
) -> Result<(), PermCliffError> {
    let n = theta.rows() + theta.cols();
    assert!(
        a_blocks.len() == n && b_blocks.len() == n && c_blocks.len() == n && d_blocks.len() == n
    );
    let p = symplectic_form(k);
    for i in 0..n {
        let block = BitMatrix::vstack(&[
            &BitMatrix::hstack(&[&a_blocks[i], &b_blocks[i]]),
            &BitMatrix::hstack(&[&c_blocks[i], &d_blocks[i]]),
        ]);
        if block.transpose().mul(&p).mul(&block) != p {
            return Err(PermCliffError::NotSymplectic(i));
        }
    }
    if r.rank() != n * k {
        return Err(PermCliffError::NotPermutation);
    }
    let a_refs: Vec<&BitMatrix> = a_blocks.iter().collect();
    let b_refs: Vec<&BitMatrix> = b_blocks.iter().collect();
    let c_refs: Vec<&BitMatrix> = c_blocks.iter().collect();
    let d_refs: Vec<&BitMatrix> = d_blocks.iter().collect();
    let c_full = BitMatrix::vstack(&[
        &BitMatrix::hstack(&[&block_diag(&a_refs), &block_diag(&b_refs)]),
        &BitMatrix::hstack(&[&block_diag(&c_refs), &block_diag(&d_refs)]),
    ]);
    let s_copies = state_copies_matrix(theta, orthogonal, k);
    if c_full.mul(&s_copies).mul(r) != s_copies {
        return Err(PermCliffError::NotPermutation);
    }
    Ok(())
}

/// Checks that `pc` really permutes the tensor products of `css`.
pub fn verify_permutation(pc: &PermClifford, css: &CssState) -> Result<(), PermCliffError> {
    let theta = css.theta().ok_or(PermCliffError::NotCanonical)?;
    let orthogonal = css.is_orthogonal().expect("canonical state has the flag");
    if pc.orthogonal != orthogonal {
        return Err(PermCliffError::RepresentationMismatch(pc.orthogonal));
    }
    let n = theta.rows() + theta.cols();
    let a_blocks = vec![pc.a.clone(); n];
    let d_blocks = vec![pc.d.clone(); n];
    verify_blocks(
        theta,
        pc.orthogonal,
        pc.k,
        &a_blocks,
        &pc.b_blocks,
        &pc.c_blocks,
        &d_blocks,
        &pc.r,
    )
}

/// The permutation action b̃ ↦ R^T b̃ on per-party phase vectors.
pub fn apply_perm(pc: &PermClifford, btilde: &BitVector) -> BitVector {
    pc.r.transpose().mul_vec(btilde)
}

/// Group product: apply `first`, then `second`.
pub fn compose(second: &PermClifford, first: &PermClifford) -> PermClifford {
    assert_eq!(second.k, first.k);
    assert_eq!(second.orthogonal, first.orthogonal);
    assert_eq!(second.n(), first.n());
    let n = first.n();
    let a = second.a.mul(&first.a).add(&second.b_blocks[0].mul(&first.c_blocks[0]));
    let d = second.c_blocks[0].mul(&first.b_blocks[0]).add(&second.d.mul(&first.d));
    let mut b_blocks = Vec::with_capacity(n);
    let mut c_blocks = Vec::with_capacity(n);
    for i in 0..n {
        let ai = second.a.mul(&first.a).add(&second.b_blocks[i].mul(&first.c_blocks[i]));
        let di = second.c_blocks[i].mul(&first.b_blocks[i]).add(&second.d.mul(&first.d));
        assert_eq!(ai, a, "composed A-blocks must coincide");
        assert_eq!(di, d, "composed D-blocks must coincide");
        b_blocks.push(second.a.mul(&first.b_blocks[i]).add(&second.b_blocks[i].mul(&first.d)));
        c_blocks.push(second.c_blocks[i].mul(&first.a).add(&second.d.mul(&first.c_blocks[i])));
    }
    PermClifford {
        k: first.k,
        orthogonal: first.orthogonal,
        a,
        b_blocks,
        c_blocks,
        d,
        r: first.r.mul(&second.r),
    }
}

/// Candidate elimination degrees (d_z, d_x) of a deviation Δb̃.
///
/// A direction g is blind to Δb̃ for σ_z measurements when every revealed
/// combination of coordinates vanishes on Δb̃ no matter which valid operation
/// was sampled; d_z is the codimension of the blind space, and a candidate
/// survives one σ_z-measured copy with probability 2^{-d_z} (d_x likewise).
pub fn candidate_degrees(
    ts: &ThetaStructure,
    orthogonal: bool,
    k: usize,
    delta: &BitVector,
) -> (usize, usize) {
    let (nz, nx) = (ts.nz(), ts.nx());
    let n = nz + nx;
    assert_eq!(delta.len(), n * k, "deviation must have nk entries");
    let party = |j: usize| delta.slice(j * k, k);

    if orthogonal {
        let half = n / 2;
        let mut cols = Vec::with_capacity(half);
        for t in 0..half {
            cols.push(party(t).concat(&party(half + t)));
        }
        let d = BitMatrix::from_cols(&cols).rank();
        return (d, d);
    }

    // d_z: images of the basis directions e_t under all revealed functionals
    let q = ts.m_theta.cols();
    let mut z_cols = Vec::with_capacity(nz);
    for t in 0..nz {
        let mut img = party(t);
        for m in 0..q {
            let mut acc = BitVector::zeros(k);
            for u in 0..nx {
                if ts.theta.get(u, t) && ts.m_theta.get(u, m) {
                    acc.xor_assign(&party(nz + u));
                }
            }
            img = img.concat(&acc);
        }
        z_cols.push(img);
    }
    let dz = BitMatrix::from_cols(&z_cols).rank();

    let qt = ts.m_theta_t.cols();
    let mut x_cols = Vec::with_capacity(nx);
    for t in 0..nx {
        let mut img = party(nz + t);
        for m in 0..qt {
            let mut acc = BitVector::zeros(k);
            for v in 0..nz {
                if ts.theta.get(t, v) && ts.m_theta_t.get(v, m) {
                    acc.xor_assign(&party(v));
                }
            }
            img = img.concat(&acc);
        }
        x_cols.push(img);
    }
    let dx = BitMatrix::from_cols(&x_cols).rank();
    (dz, dx)
}

/// Exhaustively enumerates the subgroup at tiny sizes (support tests).
pub fn enumerate_perm_cliffords(
    ts: &ThetaStructure,
    orthogonal: bool,
    k: usize,
) -> Result<Vec<PermClifford>, PermCliffError> {
    assert!(ts.is_fully_entangled());
    let n = ts.n();
    if orthogonal {
        let half = n / 2;
        let out = enumerate_symplectic(k)?
            .into_iter()
            .map(|c| {
                let a = c.submatrix(0, 0, k, k);
                let b = c.submatrix(0, k, k, k);
                let cc = c.submatrix(k, 0, k, k);
                let d = c.submatrix(k, k, k, k);
                let r = assemble_r_orth(half, &a, &b, &cc, &d);
                PermClifford {
                    k,
                    orthogonal,
                    a,
                    b_blocks: vec![b; n],
                    c_blocks: vec![cc; n],
                    d,
                    r,
                }
            })
            .collect();
        return Ok(out);
    }

    let positions = k * (k + 1) / 2;
    let (db, dc) = (ts.kernel_b().cols(), ts.kernel_c().cols());
    let log_total = positions * (db + dc);
    if log_total > 20 || k > 4 {
        return Err(PermCliffError::TooLarge { size: log_total.max(k), limit: 20 });
    }
    let mut out = Vec::new();
    for a in enumerate_invertible(k)? {
        let a_inv = a.inverse().expect("invertible");
        let a_t = a.transpose();
        let d = a_inv.transpose();
        let mut assignment = vec![0u64; positions]; // packed (x coeffs | y coeffs)
        loop {
            let mut xs = vec![BitMatrix::zeros(k, k); n];
            let mut ys = vec![BitMatrix::zeros(k, k); n];
            let mut pos = 0;
            for s in 0..k {
                for t in s..k {
                    let code = assignment[pos];
                    let xv = ts
                        .kernel_b()
                        .mul_vec(&BitVector::from_u64(db, code & ((1 << db) - 1)));
                    let yv = ts.kernel_c().mul_vec(&BitVector::from_u64(dc, code >> db));
                    for i in 0..n {
                        if xv.get(i) {
                            xs[i].set(s, t, true);
                            xs[i].set(t, s, true);
                        }
                        if yv.get(i) {
                            ys[i].set(s, t, true);
                            ys[i].set(t, s, true);
                        }
                    }
                    pos += 1;
                }
            }
            let b_blocks: Vec<BitMatrix> = xs.iter().map(|x| a.mul(x)).collect();
            let c_blocks: Vec<BitMatrix> = ys.iter().map(|y| d.mul(y)).collect();
            let r = assemble_r_nonorth(ts, k, &a_inv, &a_t, &b_blocks, &c_blocks);
            out.push(PermClifford {
                k,
                orthogonal,
                a: a.clone(),
                b_blocks,
                c_blocks,
                d: d.clone(),
                r,
            });

            // odometer over per-position codes
            let mut carry = true;
            for slot in assignment.iter_mut() {
                if !carry {
                    break;
                }
                *slot += 1;
                if *slot >> (db + dc) != 0 {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
            if carry {
                break;
            }
        }
    }
    Ok(out)
}
