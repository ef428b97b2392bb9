//! Structure of the permutation subgroup for the 4-party cat state.
//!
//! Canonicalizing the state gives θ = [1 1 1]. The constraint systems then
//! force every C block to zero and the four B blocks to sum to zero, so a
//! valid local operation is determined by one invertible A and three free
//! symmetric B-parameters per matrix position.
//!
//! ```bash
//! cargo run --release --example cat4_structure
//! ```

use csshash::channels::cat_state;
use csshash::gf2::BitMatrix;
use csshash::permcliff::{
    enumerate_perm_cliffords, sample_perm_clifford, verify_permutation, ThetaStructure,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let css = cat_state(4).canonicalized().unwrap();
    let info = css.canonical().unwrap();
    println!("theta = {}", info.theta);
    println!("orthogonal = {}", info.orthogonal);

    let ts = ThetaStructure::new(&info.theta);
    println!("\nB-constraint system (one column per party):\n{}", ts.constraint_b);
    println!("C-constraint system:\n{}", ts.constraint_c);
    println!(
        "kernel dimensions: B -> {}, C -> {}",
        ts.kernel_b().cols(),
        ts.kernel_c().cols()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = 3;
    let mut all_c_zero = true;
    let mut all_b_sum_zero = true;
    for _ in 0..1000 {
        let pc = sample_perm_clifford(&ts, false, k, &mut rng);
        verify_permutation(&pc, &css).expect("every sample must verify");
        all_c_zero &= pc.c_blocks.iter().all(|c| c.is_zero());
        let mut sum = BitMatrix::zeros(k, k);
        for b in &pc.b_blocks {
            sum = sum.add(b);
        }
        all_b_sum_zero &= sum.is_zero();
    }
    println!("\n1000 samples at k = {k}: verified, C_i = 0: {all_c_zero}, sum B_i = 0: {all_b_sum_zero}");

    let valid = enumerate_perm_cliffords(&ts, false, 1).unwrap();
    println!(
        "k = 1 subgroup has {} elements (GL(1,2) x even-weight B assignments)",
        valid.len()
    );
}
