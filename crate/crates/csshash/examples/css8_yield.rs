//! The 8-party orthogonal example: a state where general local Clifford
//! operations beat CNOT-only processing.
//!
//! θ is the complement of the identity (orthogonal), and the input mixture
//! puts 3/4 of the mass on the clean state and spreads the rest uniformly
//! over the 127 phase vectors with b_1 = 0. The full linear program gives a
//! strictly larger yield than the CNOT-only expression
//! 1 − H(b_5..b_8)/4 − (H − H(b_5..b_8))/3.
//!
//! Note the binding constraint: nesting G_z = G_x along the zero-mass
//! direction b_1 makes (d_z, d_x) = (3, 3) tight, so the optimum is
//! m = (H − H_[3,3])/3 — less than 1 − H/4 would suggest.
//!
//! ```bash
//! cargo run --release --example css8_yield
//! ```

use csshash::channels::example_8q;
use csshash::yieldlp::{cnot_only_yield_8q, protocol_yield};

fn main() {
    let (css, mix) = example_8q();
    let canon = css.canonicalized().unwrap();
    println!("theta =\n{}", canon.theta().unwrap());
    println!("orthogonal = {}", canon.is_orthogonal().unwrap());

    let res = protocol_yield(&css, &mix).unwrap();
    println!("\nH = {:.9}", res.h);
    println!("grid of H_[d_z,d_x] (rows d_z = 0..4, columns d_x = 0..4):");
    for dz in 0..=4usize {
        let mut row = Vec::new();
        for dx in 0..=4usize {
            let value = if (dz, dx) == (0, 0) {
                res.h
            } else {
                res.grid.iter().find(|g| (g.dz, g.dx) == (dz, dx)).unwrap().h_dd
            };
            row.push(format!("{value:.4}"));
        }
        println!("  {}", row.join("  "));
    }
    println!("\noptimum: m_z = {:.6}, m_x = {:.6}", res.mz, res.mx);
    println!("active constraints: {:?}", res.active);
    println!("gamma          = {:.6}", res.gamma);
    println!("CNOT-only yield = {:.6}", cnot_only_yield_8q(&mix));
    assert!(res.gamma > cnot_only_yield_8q(&mix));
    println!("\ngeneral local Clifford operations strictly beat CNOT-only processing");
}
