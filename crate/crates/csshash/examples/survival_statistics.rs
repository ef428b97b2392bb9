//! Planted-candidate survival statistics at k = 12 copies of the noisy
//! 4-party cat state: empirical rates against the elimination law
//! 2^{−(d_z ⌈m_z k⌉ + d_x ⌈m_x k⌉)}, plus the per-step drift table.
//!
//! ```bash
//! cargo run --release --example survival_statistics
//! ```

use csshash::channels::{cat_state, depolarizing_cat4_mixture};
use csshash::gf2::BitVector;
use csshash::simulator::{
    drift_check, proportions_chi_square, chi_square_sf, survival_experiment, ProtocolContext,
    RunSpec,
};

fn main() {
    let ctx = ProtocolContext::new(&cat_state(4), &depolarizing_cat4_mixture(0.9)).unwrap();
    let k = 12;
    let trials = 4000;

    // one z-side deviation (degrees (1,1)) and one x-side deviation ((0,1))
    let z_delta = BitVector::unit(4 * k, 0);
    let x_delta = BitVector::unit(4 * k, 3 * k);
    println!("degrees: z-side {:?}, x-side {:?}", ctx.degrees(k, &z_delta), ctx.degrees(k, &x_delta));

    let spec = RunSpec::new(k, 1.0 / 3.0, 1.0 / 3.0);
    println!("\nschedule: 4 σ_z copies + 4 σ_x copies, {trials} trials");
    println!("{:>3} {:>3} {:>10} {:>12} {:>8}", "d_z", "d_x", "survived", "predicted", "z");
    for row in survival_experiment(&ctx, &spec, &[z_delta.clone(), x_delta], trials, 11).unwrap()
    {
        println!(
            "{:>3} {:>3} {:>10} {:>12.6} {:>8.2}",
            row.dz,
            row.dx,
            format!("{}/{}", row.survivals, row.trials),
            row.predicted,
            row.z_score
        );
    }

    // per-step conditional survival across an all-z schedule: no drift
    let spec_z = RunSpec::new(k, 1.0 / 3.0, 0.0);
    println!("\nper-step conditional survival of the z-side candidate:");
    let rates = drift_check(&ctx, &spec_z, &z_delta, trials, 12).unwrap();
    for r in &rates {
        println!(
            "  step {} ({}) : {:>5}/{:<5} = {:.4} (expected {:.4})",
            r.step + 1,
            if r.z_kind { "z" } else { "x" },
            r.alive_after,
            r.alive_before,
            r.rate,
            r.expected
        );
    }
    let bins: Vec<(usize, usize)> =
        rates.iter().map(|r| (r.alive_after, r.alive_before)).collect();
    let (stat, df) = proportions_chi_square(&bins);
    println!("flatness chi-square = {stat:.3} (df {df}), p = {:.3}", chi_square_sf(stat, df));
}
