//! Diagonal mixtures from single-qubit Pauli channels, plus the built-in
//! example states.
//!
//! A Pauli error pattern σ_e flips the phase of generator i exactly when it
//! anticommutes with it, so a product channel on a pure (b = 0) CSS state
//! produces the mixture p(b) = Σ_{e : Δb(e) = b} ∏_i q_i(e_i). The default
//! path convolves the per-qubit syndrome distributions (O(n·2^n)); the 4^n
//! pattern enumeration is kept in the tests as the oracle.

use crate::gf2::{BitMatrix, BitVector};
use crate::stabilizer::CssState;
use crate::yieldlp::{index_of_bits, DiagonalMixture, YieldError};
use thiserror::Error;

/// Pattern-enumeration oracle guard.
pub const CHANNEL_LIMIT: usize = 16;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel probabilities must be non-negative and sum to 1 (got sum {0})")]
    BadProbabilities(f64),
    #[error("channels act on a pure state: phase vector must be zero")]
    PhasesNotZero,
    #[error("need one channel per qubit: {expected} qubits, {got} channels")]
    WrongChannelCount { expected: usize, got: usize },
    #[error("{size} qubits exceeds the channel guard {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error(transparent)]
    Mixture(#[from] YieldError),
}

/// A single-qubit Pauli channel with probabilities (q_I, q_X, q_Y, q_Z).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliChannel {
    pub q_i: f64,
    pub q_x: f64,
    pub q_y: f64,
    pub q_z: f64,
}

impl PauliChannel {
    pub fn new(q_i: f64, q_x: f64, q_y: f64, q_z: f64) -> Result<Self, ChannelError> {
        let sum = q_i + q_x + q_y + q_z;
        if [q_i, q_x, q_y, q_z].iter().any(|&q| q < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(ChannelError::BadProbabilities(sum));
        }
        Ok(PauliChannel { q_i, q_x, q_y, q_z })
    }

    pub fn identity() -> Self {
        PauliChannel { q_i: 1.0, q_x: 0.0, q_y: 0.0, q_z: 0.0 }
    }

    /// ρ ↦ F ρ + (1−F)/3 (XρX + YρY + ZρZ).
    pub fn depolarizing(f: f64) -> Self {
        let e = (1.0 - f) / 3.0;
        PauliChannel { q_i: f, q_x: e, q_y: e, q_z: e }
    }

    fn probs(&self) -> [f64; 4] {
        [self.q_i, self.q_x, self.q_y, self.q_z]
    }
}

/// Error vector of a single-qubit Pauli on qubit `q` of `n`: index 0..4 maps
/// to I, X, Y, Z with the (z-part, x-part) encoding σ_Y = both bits set.
fn error_vector(n: usize, q: usize, op: usize) -> BitVector {
    let mut e = BitVector::zeros(2 * n);
    match op {
        0 => {}
        1 => e.set(n + q, true),             // X
        2 => {
            e.set(q, true);                  // Y = Z·X up to phase
            e.set(n + q, true);
        }
        3 => e.set(q, true),                 // Z
        _ => unreachable!(),
    }
    e
}

/// The diagonal mixture produced by independent Pauli channels on a pure
/// CSS state with b = 0, via per-qubit syndrome convolution.
pub fn pauli_channel_mixture(
    css: &CssState,
    channels: &[PauliChannel],
) -> Result<DiagonalMixture, ChannelError> {
    let n = css.n();
    if !css.b().is_zero() {
        return Err(ChannelError::PhasesNotZero);
    }
    if channels.len() != n {
        return Err(ChannelError::WrongChannelCount { expected: n, got: channels.len() });
    }
    if n > CHANNEL_LIMIT {
        return Err(ChannelError::TooLarge { size: n, limit: CHANNEL_LIMIT });
    }
    let mut p = vec![0.0f64; 1 << n];
    p[0] = 1.0;
    for (q, ch) in channels.iter().enumerate() {
        let shifts: Vec<(usize, f64)> = ch
            .probs()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(op, &w)| {
                let flip = css.syndrome_flip(&error_vector(n, q, op));
                (index_of_bits(&flip), w)
            })
            .collect();
        let mut next = vec![0.0f64; p.len()];
        for (idx, &mass) in p.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(shift, w) in &shifts {
                next[idx ^ shift] += mass * w;
            }
        }
        p = next;
    }
    Ok(DiagonalMixture::new(n, p)?)
}

/// The n-party cat (GHZ) state: S_z = [I_{n−1}; 1…1], S_x the all-ones
/// column, b = 0.
pub fn cat_state(n: usize) -> CssState {
    assert!(n >= 2);
    let sz = BitMatrix::vstack(&[&BitMatrix::identity(n - 1), &BitMatrix::ones(1, n - 1)]);
    let sx = BitMatrix::ones(n, 1);
    CssState::with_zero_phases(sz, sx).expect("cat state is CSS")
}

/// The 4-party cat state through one noiseless channel (first qubit) and
/// three identical depolarizing channels of fidelity `f`.
pub fn depolarizing_cat4_mixture(f: f64) -> DiagonalMixture {
    let dep = PauliChannel::depolarizing(f);
    pauli_channel_mixture(
        &cat_state(4),
        &[PauliChannel::identity(), dep, dep, dep],
    )
    .expect("valid channel set")
}

/// The 8-qubit orthogonal example: θ is the complement of the identity, the
/// mixture puts mass 3/4 on b = 0 and spreads 1/4 uniformly over the 127
/// remaining vectors with b_1 = 0.
pub fn example_8q() -> (CssState, DiagonalMixture) {
    let theta = BitMatrix::ones(4, 4).add(&BitMatrix::identity(4));
    let css = CssState::from_theta(&theta);
    let mut p = vec![0.0f64; 256];
    p[0] = 0.75;
    for idx in 1..128 {
        // b_1 = 0 keeps the index below 2^7
        p[idx] = 1.0 / 508.0;
    }
    let mix = DiagonalMixture::new(8, p).expect("sums to 3/4 + 127/508 = 1");
    (css, mix)
}

/// A Bell-diagonal mixture over the 2-party cat state, probabilities in the
/// order (b_z, b_x) = 00, 01, 10, 11.
pub fn bell_diagonal_mixture(p: [f64; 4]) -> Result<DiagonalMixture, YieldError> {
    DiagonalMixture::new(2, p.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 4^n pattern-enumeration oracle.
    fn mixture_by_enumeration(css: &CssState, channels: &[PauliChannel]) -> Vec<f64> {
        let n = css.n();
        let mut p = vec![0.0f64; 1 << n];
        let mut pattern = vec![0usize; n];
        loop {
            let mut weight = 1.0;
            let mut flip = BitVector::zeros(n);
            for (q, &op) in pattern.iter().enumerate() {
                weight *= channels[q].probs()[op];
                flip.xor_assign(&css.syndrome_flip(&error_vector(n, q, op)));
            }
            p[index_of_bits(&flip)] += weight;

            let mut carry = true;
            for slot in pattern.iter_mut() {
                if !carry {
                    break;
                }
                *slot += 1;
                if *slot == 4 {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
            if carry {
                break;
            }
        }
        p
    }

    /// The printed 16×4 coefficient matrix of the depolarizing cat4 mixture,
    /// applied to the monomials (F^3, F^2 e, F e^2, e^3) with e = (1−F)/3.
    pub(crate) fn cat4_reference_mixture(f: f64) -> Vec<f64> {
        let coeffs: [[f64; 4]; 16] = [
            [1.0, 0.0, 3.0, 0.0],
            [0.0, 3.0, 0.0, 1.0],
            [0.0, 1.0, 2.0, 1.0],
            [0.0, 1.0, 2.0, 1.0],
            [0.0, 1.0, 2.0, 1.0],
            [0.0, 1.0, 2.0, 1.0],
            [0.0, 0.0, 2.0, 2.0],
            [0.0, 0.0, 2.0, 2.0],
            [0.0, 0.0, 0.0, 4.0],
            [0.0, 0.0, 0.0, 4.0],
            [0.0, 0.0, 2.0, 2.0],
            [0.0, 0.0, 2.0, 2.0],
            [0.0, 0.0, 2.0, 2.0],
            [0.0, 0.0, 2.0, 2.0],
            [0.0, 1.0, 2.0, 1.0],
            [0.0, 1.0, 2.0, 1.0],
        ];
        let e = (1.0 - f) / 3.0;
        let mono = [f * f * f, f * f * e, f * e * e, e * e * e];
        coeffs
            .iter()
            .map(|row| row.iter().zip(&mono).map(|(c, m)| c * m).sum())
            .collect()
    }

    #[test]
    fn identity_channels_give_point_mass() {
        let css = cat_state(4);
        let mix = pauli_channel_mixture(&css, &[PauliChannel::identity(); 4]).unwrap();
        assert_eq!(mix.prob(&BitVector::zeros(4)), 1.0);
    }

    #[test]
    fn cat4_matches_reference_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let f: f64 = rng.random();
            let mix = depolarizing_cat4_mixture(f);
            let reference = cat4_reference_mixture(f);
            for (got, want) in mix.probs().iter().zip(&reference) {
                assert!((got - want).abs() < 1e-12, "F = {f}: {got} vs {want}");
            }
        }
        // the three two-qubit Z pairs among qubits 2..4 lie in the stabilizer,
        // giving the coefficient 3 of F(1−F)²/9 in p_0000
        let f = 0.5f64;
        let probe = depolarizing_cat4_mixture(f).probs()[0];
        let e = (1.0 - f) / 3.0;
        assert!((probe - (f * f * f + 3.0 * f * e * e)).abs() < 1e-12);
    }

    #[test]
    fn convolution_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for state in [cat_state(2), cat_state(3), cat_state(4)] {
            for _ in 0..5 {
                let channels: Vec<PauliChannel> = (0..state.n())
                    .map(|_| {
                        let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
                        let total: f64 = raw.iter().sum();
                        PauliChannel::new(
                            raw[0] / total,
                            raw[1] / total,
                            raw[2] / total,
                            raw[3] / total,
                        )
                        .unwrap()
                    })
                    .collect();
                let fast = pauli_channel_mixture(&state, &channels).unwrap();
                let slow = mixture_by_enumeration(&state, &channels);
                for (a, b) in fast.probs().iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn channel_linearity() {
        // mixing two channels on one qubit mixes the outputs with the same weights
        let css = cat_state(3);
        let a = PauliChannel::depolarizing(0.9);
        let b = PauliChannel::depolarizing(0.6);
        let w = 0.3;
        let mixed = PauliChannel::new(
            w * a.q_i + (1.0 - w) * b.q_i,
            w * a.q_x + (1.0 - w) * b.q_x,
            w * a.q_y + (1.0 - w) * b.q_y,
            w * a.q_z + (1.0 - w) * b.q_z,
        )
        .unwrap();
        let rest = [PauliChannel::identity(), PauliChannel::identity()];
        let via_mixed =
            pauli_channel_mixture(&css, &[mixed, rest[0], rest[1]]).unwrap();
        let via_a = pauli_channel_mixture(&css, &[a, rest[0], rest[1]]).unwrap();
        let via_b = pauli_channel_mixture(&css, &[b, rest[0], rest[1]]).unwrap();
        for i in 0..8 {
            let want = w * via_a.probs()[i] + (1.0 - w) * via_b.probs()[i];
            assert!((via_mixed.probs()[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn cat_state_structure() {
        let c4 = cat_state(4);
        assert_eq!(
            c4.sz(),
            &BitMatrix::from_bit_rows(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]])
        );
        assert_eq!(c4.sx(), &BitMatrix::ones(4, 1));

        let bell = cat_state(2).canonicalized().unwrap();
        assert_eq!(bell.theta().unwrap(), &BitMatrix::from_bit_rows(&[&[1]]));
        assert_eq!(bell.is_orthogonal(), Some(true));

        for n in 2..=6 {
            let canon = cat_state(n).canonicalized().unwrap();
            assert_eq!(canon.theta().unwrap(), &BitMatrix::ones(1, n - 1));
        }
    }

    #[test]
    fn example_8q_structure() {
        let (css, mix) = example_8q();
        let total: f64 = mix.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "3/4 + 127/508 = 1");
        assert_eq!(css.is_orthogonal(), Some(true));
        let h = mix.entropy();
        assert!((1.0 - h / 4.0 - 0.3604).abs() < 0.001);
        // b_1 = 1 carries no mass
        for idx in 128..256 {
            assert_eq!(mix.probs()[idx], 0.0);
        }
    }

    #[test]
    fn nonnegative_and_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let f: f64 = rng.random();
            let mix = depolarizing_cat4_mixture(f);
            assert!(mix.probs().iter().all(|&p| p >= 0.0));
            assert!((mix.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
