//! The yield linear program for the 4-party cat state under depolarizing
//! noise, worked in full: the coset table behind one H_[1,1] candidate, the
//! reduced constraint system and the optimum.
//!
//! ```bash
//! cargo run --release --example cat4_yield
//! ```

use csshash::channels::{cat_state, depolarizing_cat4_mixture};
use csshash::gf2::BitMatrix;
use csshash::permcliff::ThetaStructure;
use csshash::yieldlp::{build_j, coset_partition, protocol_yield};

fn main() {
    let css = cat_state(4).canonicalized().unwrap();
    let ts = ThetaStructure::new(css.theta().unwrap());

    // one d_z = 1 subspace choice and its four cosets
    let gz = BitMatrix::from_bit_rows(&[&[1, 0], &[1, 1], &[0, 1]]);
    let j = build_j(&ts, false, &gz, &BitMatrix::zeros(1, 0));
    println!("cosets of J^perp for G_z = [[1,0],[1,1],[0,1]], G_x empty:");
    for coset in coset_partition(4, &j) {
        let row: Vec<String> = coset.iter().map(|b| b.to_string()).collect();
        println!("  {}", row.join(" "));
    }

    for f in [0.88, 0.92, 0.96, 1.0] {
        let mix = depolarizing_cat4_mixture(f);
        let res = protocol_yield(&cat_state(4), &mix).unwrap();
        println!("\nF = {f}: H = {:.6}", res.h);
        println!("  constraints (d_z m_z + d_x m_x >= rhs):");
        // rows with d_x = 0 collapse to m_z >= 0
        println!("    m_z >= 0");
        for g in res.grid.iter().filter(|g| g.dx == 1) {
            println!("    {} m_z + m_x >= {:.6}", g.dz, res.h - g.h_dd);
        }
        println!(
            "  optimum: m_z = {:.6}, m_x = {:.6}, gamma = {:.6}",
            res.mz, res.mx, res.gamma
        );
    }
}
