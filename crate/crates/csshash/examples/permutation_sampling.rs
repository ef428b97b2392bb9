//! Uniform sampling from the permutation subgroup, verified against the
//! defining equation, for all three built-in states and several copy counts.
//!
//! ```bash
//! cargo run --release --example permutation_sampling
//! ```

use csshash::channels::{cat_state, example_8q};
use csshash::permcliff::{
    apply_perm, compose, enumerate_perm_cliffords, sample_perm_clifford, verify_permutation,
    ThetaStructure,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, css) in [
        ("bell", cat_state(2)),
        ("cat4", cat_state(4)),
        ("css8", example_8q().0),
    ] {
        let canon = css.canonicalized().unwrap();
        let ts = ThetaStructure::new(canon.theta().unwrap());
        let orthogonal = canon.is_orthogonal().unwrap();
        for k in 1..=4usize {
            let samples = 250;
            for _ in 0..samples {
                let pc = sample_perm_clifford(&ts, orthogonal, k, &mut rng);
                verify_permutation(&pc, &canon).expect("sample must permute the basis");
            }
            println!("{name} k={k}: {samples}/{samples} sampled operations verified");
        }

        // closure under composition
        let pc1 = sample_perm_clifford(&ts, orthogonal, 3, &mut rng);
        let pc2 = sample_perm_clifford(&ts, orthogonal, 3, &mut rng);
        let prod = compose(&pc2, &pc1);
        verify_permutation(&prod, &canon).expect("products stay in the subgroup");
        let v = csshash::gf2::random_vector(canon.n() * 3, &mut rng);
        assert_eq!(apply_perm(&prod, &v), apply_perm(&pc2, &apply_perm(&pc1, &v)));
        println!("{name}: composition of two samples verified\n");
    }

    // at k = 1 the whole subgroup is enumerable; the sampler covers it
    let canon = cat_state(4).canonicalized().unwrap();
    let ts = ThetaStructure::new(canon.theta().unwrap());
    let valid: HashSet<_> =
        enumerate_perm_cliffords(&ts, false, 1).unwrap().into_iter().map(|pc| pc.r).collect();
    let mut seen = HashSet::new();
    for _ in 0..2000 {
        seen.insert(sample_perm_clifford(&ts, false, 1, &mut rng).r);
    }
    println!("cat4 k=1: sampler hit {}/{} subgroup elements", seen.len(), valid.len());
    assert_eq!(seen, valid);
}
