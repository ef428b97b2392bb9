//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with its elapsed time (run with `--nocapture` to see them on success).

use csshash::channels::{
    cat_state, depolarizing_cat4_mixture, example_8q, pauli_channel_mixture, PauliChannel,
};
use csshash::gf2::{BitMatrix, BitVector};
use csshash::permcliff::{
    enumerate_perm_cliffords, sample_perm_clifford, verify_permutation, ThetaStructure,
};
use csshash::simulator::{
    chebyshev_mass_bound, chi_square_sf, count_matching, drift_check, empirical_typical_mass,
    proportions_chi_square, survival_experiment, ProtocolContext, RunSpec, TypicalSet,
};
use csshash::stabilizer::CssState;
use csshash::yieldlp::{
    baseline_yields_cat4, build_j, cnot_only_yield_8q, coset_partition, protocol_yield,
    DiagonalMixture,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::time::Instant;

fn report(criterion: usize, label: &str, t0: Instant, budget_secs: f64) {
    let elapsed = t0.elapsed().as_secs_f64();
    println!("[acceptance] criterion {criterion} ({label}): PASS ({elapsed:.2} s)");
    assert!(
        elapsed < budget_secs,
        "criterion {criterion} exceeded its {budget_secs} s budget: {elapsed:.2} s"
    );
}

fn cat4_canonical() -> (CssState, ThetaStructure) {
    let css = cat_state(4).canonicalized().unwrap();
    let ts = ThetaStructure::new(css.theta().unwrap());
    (css, ts)
}

#[test]
fn criterion_1_cat4_structure() {
    let t0 = Instant::now();
    let (css, ts) = cat4_canonical();

    // canonicalization yields θ = [1 1 1]
    assert_eq!(css.theta().unwrap(), &BitMatrix::from_bit_rows(&[&[1, 1, 1]]));
    assert_eq!(css.is_orthogonal(), Some(false));

    // constraint solving: C blocks forced to zero, B blocks sum to zero
    assert_eq!(ts.kernel_c().cols(), 0, "C-kernel must be trivial");
    assert_eq!(ts.kernel_b().cols(), 3, "B-kernel is the even-weight space");
    for c in 0..ts.kernel_b().cols() {
        assert_eq!(ts.kernel_b().col(c).weight() % 2, 0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for k in 1..=3usize {
        for _ in 0..100 {
            let pc = sample_perm_clifford(&ts, false, k, &mut rng);
            assert!(pc.c_blocks.iter().all(|c| c.is_zero()));
            let mut sum = BitMatrix::zeros(k, k);
            for b in &pc.b_blocks {
                sum = sum.add(b);
            }
            assert!(sum.is_zero());
        }
    }

    // the LP table collapses to the printed five-row system
    let mix = depolarizing_cat4_mixture(0.9);
    let res = protocol_yield(&cat_state(4), &mix).unwrap();
    let h = res.h;
    let entry = |dz: usize, dx: usize| {
        res.grid.iter().find(|g| (g.dz, g.dx) == (dz, dx)).unwrap().h_dd
    };
    // rows with d_x = 0 all have rhs exactly 0, i.e. they are m_z >= 0
    for dz in 1..=3usize {
        assert!((entry(dz, 0) - h).abs() < 1e-12, "H[d_z,0] = H");
    }
    assert_eq!(entry(3, 1), 0.0, "H[3,1] = 0");
    // remaining rows: m_x >= H-H01, m_z+m_x >= H-H11, 2m_z+m_x >= H-H21,
    // 3m_z+m_x >= H, with strictly increasing right-hand sides
    let rhs01 = h - entry(0, 1);
    let rhs11 = h - entry(1, 1);
    let rhs21 = h - entry(2, 1);
    let rhs31 = h - entry(3, 1);
    assert!((entry(0, 1) - mix.marginal_entropy(&[0, 1, 2])).abs() < 1e-12);
    assert!(rhs01 > 0.0 && rhs11 > rhs01 && rhs21 > rhs11 && (rhs31 - h).abs() < 1e-12);
    // the optimum satisfies the five-row system
    assert!(res.mz >= -1e-12);
    assert!(res.mx >= rhs01 - 1e-9);
    assert!(res.mz + res.mx >= rhs11 - 1e-9);
    assert!(2.0 * res.mz + res.mx >= rhs21 - 1e-9);
    assert!(3.0 * res.mz + res.mx >= rhs31 - 1e-9);

    report(1, "cat4 structure reproduction", t0, 1.0);
}

#[test]
fn criterion_2_coset_table() {
    let t0 = Instant::now();
    let (_, ts) = cat4_canonical();
    let gz = BitMatrix::from_bit_rows(&[&[1, 0], &[1, 1], &[0, 1]]);
    let gx = BitMatrix::zeros(1, 0);
    let j = build_j(&ts, false, &gz, &gx);
    let cosets = coset_partition(4, &j);
    let strings: Vec<Vec<String>> =
        cosets.iter().map(|c| c.iter().map(|b| b.to_string()).collect()).collect();
    assert_eq!(
        strings,
        vec![
            vec!["0000", "0001", "1110", "1111"],
            vec!["0010", "0011", "1100", "1101"],
            vec!["0100", "0101", "1010", "1011"],
            vec!["0110", "0111", "1000", "1001"],
        ]
    );
    report(2, "coset table reproduction", t0, 1.0);
}

#[test]
fn criterion_3_css8_yield() {
    let t0 = Instant::now();
    let (css, mix) = example_8q();
    // H from the exact probabilities
    let h_expected =
        -(0.75f64 * 0.75f64.log2()) - 127.0 * (1.0 / 508.0) * (1.0f64 / 508.0).log2();
    let res = protocol_yield(&css, &mix).unwrap();
    assert!((res.h - h_expected).abs() < 1e-12);

    // CNOT-only expression evaluates to the printed ≈ 0.29
    let cnot = cnot_only_yield_8q(&mix);
    assert!((cnot - 0.29).abs() <= 0.005, "CNOT-only yield {cnot}");
    // γ strictly larger than the CNOT-only yield
    assert!(res.gamma > cnot, "γ = {} must beat CNOT-only {cnot}", res.gamma);
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "criterion 3 exceeded its 5 s budget");

    // γ = 1 − H/4 with the printed ≈ 0.36
    let claimed = 1.0 - res.h / 4.0;
    if (res.gamma - claimed).abs() < 1e-9 && (res.gamma - 0.3605).abs() <= 0.0005 {
        report(3, "8-qubit example yield", t0, 5.0);
    } else {
        println!(
            "[acceptance] criterion 3 (8-qubit example yield): FAIL ({elapsed:.2} s) — \
             computed γ = {:.12}, stated value 1 − H/4 = {claimed:.12}",
            res.gamma
        );
        panic!(
            "the stated γ = 1 − H/4 ≈ 0.3605 is not the optimum of the yield program for \
             this input: nesting G_z = G_x along the zero-mass direction b_1 makes the \
             (d_z,d_x) = (3,3) constraint bind with H[3,3] = {:.12} < H/4 = {:.12}, \
             giving m = (H − H[3,3])/3 = {:.12} and γ = {:.12}; every sampled operation \
             verifies, the 2^-d elimination law holds empirically for degree-(3,3) \
             candidates, and the 4-party worked example is reproduced exactly by the \
             same code paths, so the stated value appears to be in error",
            res.grid.iter().find(|g| (g.dz, g.dx) == (3, 3)).unwrap().h_dd,
            res.h / 4.0,
            res.mz + res.mx,
            res.gamma,
        );
    }
}

#[test]
fn criterion_4_channel_matrix() {
    let t0 = Instant::now();
    // the reference 16×4 coefficient matrix of the depolarizing cat4 mixture
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
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..20 {
        let f: f64 = rng.random();
        let e = (1.0 - f) / 3.0;
        let mono = [f * f * f, f * f * e, f * e * e, e * e * e];
        let mix = depolarizing_cat4_mixture(f);
        for (row, &got) in coeffs.iter().zip(mix.probs()) {
            let want: f64 = row.iter().zip(&mono).map(|(c, m)| c * m).sum();
            assert!((got - want).abs() < 1e-12, "F = {f}: {got} vs {want}");
        }
    }
    report(4, "channel-matrix reproduction", t0, 5.0);
}

#[test]
fn criterion_5_yield_comparison_dataset() {
    let t0 = Instant::now();
    let state = cat_state(4);
    let steps = 50usize;
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let f = 0.8 + 0.2 * i as f64 / (steps - 1) as f64;
        let mix = depolarizing_cat4_mixture(f);
        let ours = protocol_yield(&state, &mix).unwrap().gamma.max(0.0);
        let (man, lo) = baseline_yields_cat4(&mix);
        rows.push((f, ours, lo.max(0.0), man.max(0.0)));
    }
    for &(f, ours, lo, man) in &rows {
        assert!(ours >= lo - 1e-12, "ours {ours} < lo {lo} at F = {f}");
        assert!(lo >= man - 1e-12, "lo {lo} < man {man} at F = {f}");
    }
    assert!(
        rows.iter().any(|&(_, ours, lo, _)| ours > lo + 1e-6),
        "strict separation must appear somewhere on the grid"
    );
    let last = rows.last().unwrap();
    assert!((last.1 - 1.0).abs() < 1e-9 && (last.2 - 1.0).abs() < 1e-9);
    assert!((last.3 - 1.0).abs() < 1e-9);
    // monotone non-decreasing in F
    for w in rows.windows(2) {
        assert!(w[1].1 >= w[0].1 - 1e-9, "ours not monotone at F = {}", w[1].0);
    }
    report(5, "yield comparison dataset", t0, 30.0);
}

#[test]
fn criterion_6_bell_degenerate_case() {
    let t0 = Instant::now();
    let bell = cat_state(2);
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..10 {
        let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 1e-4).collect();
        let total: f64 = raw.iter().sum();
        let mix = DiagonalMixture::new(2, raw.iter().map(|x| x / total).collect()).unwrap();
        let res = protocol_yield(&bell, &mix).unwrap();
        let expected = (1.0 - mix.entropy()).clamp(0.0, 1.0);
        assert!(
            (res.gamma - expected).abs() < 1e-9,
            "bell mixture: γ = {} vs 1 − H = {expected}",
            res.gamma
        );
    }
    report(6, "bell degenerate case", t0, 1.0);
}

#[test]
fn criterion_7_permutation_property_suite() {
    let t0 = Instant::now();
    let states = [cat_state(2), cat_state(4), example_8q().0];
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for css in &states {
        let canon = css.canonicalized().unwrap();
        let ts = ThetaStructure::new(canon.theta().unwrap());
        let orthogonal = canon.is_orthogonal().unwrap();
        for k in 1..=4usize {
            for _ in 0..1000 {
                let pc = sample_perm_clifford(&ts, orthogonal, k, &mut rng);
                verify_permutation(&pc, &canon).unwrap();
            }
        }
    }

    // cat4, k = 1: sampled support equals the exhaustively enumerated set
    let (css, ts) = cat4_canonical();
    let valid: HashSet<BitMatrix> = enumerate_perm_cliffords(&ts, false, 1)
        .unwrap()
        .into_iter()
        .map(|pc| pc.r)
        .collect();
    assert_eq!(valid.len(), 8);
    let mut seen = HashSet::new();
    for _ in 0..2000 {
        let pc = sample_perm_clifford(&ts, false, 1, &mut rng);
        assert!(valid.contains(&pc.r), "sampler left the valid set");
        seen.insert(pc.r);
    }
    assert_eq!(seen, valid, "sampler support must cover the valid set");
    let _ = css;

    report(7, "permutation property suite", t0, 60.0);
}

#[test]
fn criterion_8_survival_rate_law() {
    let t0 = Instant::now();
    let ctx = ProtocolContext::new(&cat_state(4), &depolarizing_cat4_mixture(0.9)).unwrap();
    let k = 12usize;
    let trials = 10_000usize;

    // a z-side deviation has degrees (1,1); an x-side one has (0,1); every
    // nonzero deviation of the 4-party cat state has d_x = 1, so the pure
    // z-slope 2^{-k d_z m_z} is exercised with an x-free schedule
    let z_delta = BitVector::unit(4 * k, 0);
    let x_delta = BitVector::unit(4 * k, 3 * k);
    assert_eq!(ctx.degrees(k, &z_delta), (1, 1));
    assert_eq!(ctx.degrees(k, &x_delta), (0, 1));

    // z-slope alone: ⌈k/3⌉ = 4 σ_z copies, predicted 2^{-4}
    let spec_z = RunSpec::new(k, 1.0 / 3.0, 0.0);
    let rows = survival_experiment(&ctx, &spec_z, &[z_delta.clone()], trials, 108).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].predicted - 2f64.powi(-4)).abs() < 1e-15);
    assert!(rows[0].z_score.abs() < 3.0, "z-slope bin: z = {}", rows[0].z_score);

    // x-degree and joint bins under the (1/3, 1/3) schedule:
    // (0,1) predicted 2^{-4}, (1,1) predicted 2^{-8}
    let spec_zx = RunSpec::new(k, 1.0 / 3.0, 1.0 / 3.0);
    let rows =
        survival_experiment(&ctx, &spec_zx, &[x_delta, z_delta.clone()], trials, 109).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].dz, rows[0].dx), (0, 1));
    assert!((rows[0].predicted - 2f64.powi(-4)).abs() < 1e-15);
    assert!(rows[0].z_score.abs() < 3.0, "(0,1) bin: z = {}", rows[0].z_score);
    assert_eq!((rows[1].dz, rows[1].dx), (1, 1));
    assert!((rows[1].predicted - 2f64.powi(-8)).abs() < 1e-15);
    assert!(rows[1].z_score.abs() < 3.0, "(1,1) bin: z = {}", rows[1].z_score);

    // stepwise drift: per-step conditional survival of the z-slope candidate
    // stays flat across the four σ_z steps
    let rates = drift_check(&ctx, &spec_z, &z_delta, trials, 110).unwrap();
    assert_eq!(rates.len(), 4);
    for r in &rates {
        assert!((r.expected - 0.5).abs() < 1e-15);
    }
    let bins: Vec<(usize, usize)> =
        rates.iter().map(|r| (r.alive_after, r.alive_before)).collect();
    let (stat, df) = proportions_chi_square(&bins);
    let p = chi_square_sf(stat, df);
    assert!(p > 0.01, "per-step drift detected: chi2 = {stat:.3}, p = {p:.4}");

    report(8, "survival-rate law", t0, 300.0);
}

#[test]
fn criterion_9_counting_identity_and_chebyshev() {
    let t0 = Instant::now();

    // exact counting identity on the (n ≤ 2, k ≤ 8) grid
    let mix1 = DiagonalMixture::new(1, vec![0.6, 0.4]).unwrap();
    let mix2 = DiagonalMixture::new(2, vec![0.55, 0.25, 0.15, 0.05]).unwrap();
    for k in 2..=8usize {
        for eps in [0.2, 0.35] {
            let ts = TypicalSet::enumerate(&mix1, k, eps).unwrap();
            if !ts.is_empty() {
                let u = ts.members()[0];
                for j in [BitMatrix::identity(1), BitMatrix::zeros(1, 0)] {
                    let (e, c) = count_matching(&ts, &j, u);
                    assert_eq!(e, c, "n=1, k={k}, eps={eps}");
                }
            }
            let ts = TypicalSet::enumerate(&mix2, k, eps).unwrap();
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
                assert_eq!(e, c, "n=2, k={k}, eps={eps}");
            }
        }
    }

    // empirical typical mass respects the explicit Chebyshev bound
    for &k in &[8usize, 16, 32] {
        for &eps in &[0.05, 0.1, 0.2] {
            let bound = chebyshev_mass_bound(&mix2, k, eps);
            let mass = empirical_typical_mass(&mix2, k, eps, 10_000, 900 + k as u64);
            let sigma = (0.25f64 / 10_000.0).sqrt();
            assert!(
                mass >= bound - 3.0 * sigma,
                "(k, eps) = ({k}, {eps}): mass {mass} below bound {bound}"
            );
        }
    }

    report(9, "counting identity and typicality bound", t0, 60.0);
}
