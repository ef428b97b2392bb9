//! Strongly typical sets at desk scale: empirical mass against the Chebyshev
//! bound, and the exact agreement between direct enumeration and the
//! multinomial counting identity for coset-constrained sequences.
//!
//! ```bash
//! cargo run --release --example typical_set_counting
//! ```

use csshash::gf2::BitMatrix;
use csshash::simulator::{
    chebyshev_mass_bound, count_matching, empirical_typical_mass, TypicalSet,
};
use csshash::yieldlp::DiagonalMixture;

fn main() {
    let mix = DiagonalMixture::new(2, vec![0.55, 0.25, 0.15, 0.05]).unwrap();

    println!("typical-set mass, 10000 sampled sequences per row:");
    println!("{:>4} {:>6} {:>12} {:>12}", "k", "eps", "empirical", "bound");
    for (k, eps) in [(16, 0.25), (32, 0.2), (64, 0.15), (128, 0.1), (512, 0.05)] {
        let mass = empirical_typical_mass(&mix, k, eps, 10_000, 17);
        let bound = chebyshev_mass_bound(&mix, k, eps);
        println!("{k:>4} {eps:>6.2} {mass:>12.4} {bound:>12.4}");
        assert!(mass >= bound - 0.02);
    }

    println!("\ncounting identity (enumeration vs multinomial formula), k = 6, eps = 0.35:");
    let ts = TypicalSet::enumerate(&mix, 6, 0.35).unwrap();
    println!("typical set has {} members", ts.len());
    let u = ts.members()[ts.len() / 2];
    for (label, j) in [
        ("J = I_2      ", BitMatrix::identity(2)),
        ("J = 0 columns", BitMatrix::zeros(2, 0)),
        ("J = [1;0]    ", BitMatrix::from_bit_rows(&[&[1], &[0]])),
        ("J = [1;1]    ", BitMatrix::from_bit_rows(&[&[1], &[1]])),
    ] {
        let (enumerated, combinatorial) = count_matching(&ts, &j, u);
        println!("  {label}: enumerated = {enumerated:>6}, multinomial = {combinatorial:>6}");
        assert_eq!(enumerated, combinatorial);
    }
}
