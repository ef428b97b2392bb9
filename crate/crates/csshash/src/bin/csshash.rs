//! File-driven command line for the csshash library.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 assertion failure.

use clap::{Parser, Subcommand, ValueEnum};
use csshash::channels::{
    cat_state, depolarizing_cat4_mixture, example_8q, pauli_channel_mixture, PauliChannel,
};
use csshash::formats;
use csshash::gf2::BitVector;
use csshash::permcliff::{sample_perm_clifford, verify_permutation, ThetaStructure};
use csshash::simulator::{
    run_protocol, survival_experiment, Pool, ProtocolContext, RandMode, RunSpec,
};
use csshash::stabilizer::CssState;
use csshash::yieldlp::{baseline_yields_cat4, protocol_yield, DiagonalMixture};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "csshash",
    about = "Yield computation and desk-scale simulation of the CSS-state hashing protocol",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Overall,
    Stepwise,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    Exhaustive,
    Planted,
}

#[derive(Subcommand)]
enum Command {
    /// Canonicalize a CSS state: θ, qubit permutation, orthogonality, separability.
    Canon {
        #[arg(long, conflicts_with = "example")]
        state: Option<PathBuf>,
        /// Built-in state: cat4, css8 or bell.
        #[arg(long)]
        example: Option<String>,
    },
    /// Entropy table, yield LP and γ for a state/mixture pair.
    Yield {
        #[arg(long, conflicts_with = "example")]
        state: Option<PathBuf>,
        #[arg(long, requires = "state")]
        mixture: Option<PathBuf>,
        /// Built-in pair: cat4, css8 or bell (cat4/bell take --fidelity).
        #[arg(long)]
        example: Option<String>,
        #[arg(long, default_value_t = 0.9)]
        fidelity: f64,
        /// Also write the H_[d_z,d_x] grid as CSV.
        #[arg(long, value_name = "CSV")]
        grid_out: Option<PathBuf>,
    },
    /// Yield-vs-fidelity dataset for the built-in cat4 comparison.
    Sweep {
        #[arg(long, default_value = "cat4")]
        example: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Protocol runs with planted candidates; survival statistics as CSV.
    Simulate {
        #[arg(long, conflicts_with = "example")]
        state: Option<PathBuf>,
        #[arg(long, requires = "state")]
        mixture: Option<PathBuf>,
        #[arg(long)]
        example: Option<String>,
        #[arg(long, default_value_t = 0.9)]
        fidelity: f64,
        #[arg(long)]
        copies: usize,
        #[arg(long)]
        mz: f64,
        #[arg(long)]
        mx: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Overall)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = PoolArg::Planted)]
        pool: PoolArg,
        #[arg(long, value_name = "CSV")]
        out: Option<PathBuf>,
    },
    /// Sample permutation operations and verify every one of them.
    CheckPerm {
        #[arg(long, conflicts_with = "example")]
        state: Option<PathBuf>,
        #[arg(long)]
        example: Option<String>,
        #[arg(long)]
        copies: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Shannon entropy of a mixture.
    Entropy {
        #[arg(long, conflicts_with = "example")]
        mixture: Option<PathBuf>,
        #[arg(long)]
        example: Option<String>,
        #[arg(long, default_value_t = 0.9)]
        fidelity: f64,
    },
}

enum CliError {
    Data(String),
    Assertion(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Data(_) => 2,
            CliError::Assertion(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Data(m) | CliError::Assertion(m) => m,
        }
    }
}

fn data_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            // help/version requests are not usage errors
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(threads) = std::env::var("CSSHASH_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn read_to_string(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_state(path: &PathBuf) -> Result<CssState, CliError> {
    let text = read_to_string(path)?;
    formats::parse_css_state(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_mixture(path: &PathBuf) -> Result<DiagonalMixture, CliError> {
    let text = read_to_string(path)?;
    formats::parse_mixture(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn builtin_state(name: &str) -> Result<CssState, CliError> {
    match name {
        "cat4" => Ok(cat_state(4)),
        "bell" => Ok(cat_state(2)),
        "css8" => Ok(example_8q().0),
        other => {
            Err(CliError::Data(format!("unknown example '{other}' (available: cat4, css8, bell)")))
        }
    }
}

fn builtin_pair(name: &str, fidelity: f64) -> Result<(CssState, DiagonalMixture), CliError> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(CliError::Data(format!("fidelity {fidelity} outside [0, 1]")));
    }
    match name {
        "cat4" => Ok((cat_state(4), depolarizing_cat4_mixture(fidelity))),
        "bell" => {
            // one-sided depolarizing noise on the second qubit
            let state = cat_state(2);
            let mix = pauli_channel_mixture(
                &state,
                &[PauliChannel::identity(), PauliChannel::depolarizing(fidelity)],
            )
            .map_err(data_err)?;
            Ok((state, mix))
        }
        "css8" => Ok(example_8q()),
        other => {
            Err(CliError::Data(format!("unknown example '{other}' (available: cat4, css8, bell)")))
        }
    }
}

fn resolve_pair(
    state: Option<PathBuf>,
    mixture: Option<PathBuf>,
    example: Option<String>,
    fidelity: f64,
) -> Result<(CssState, DiagonalMixture), CliError> {
    match (state, mixture, example) {
        (Some(s), Some(m), None) => Ok((load_state(&s)?, load_mixture(&m)?)),
        (None, None, Some(name)) => builtin_pair(&name, fidelity),
        _ => Err(CliError::Data("provide either --state and --mixture, or --example".into())),
    }
}

fn write_output(path: &PathBuf, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn fmt_f(x: f64) -> String {
    format!("{x:.12}")
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Canon { state, example } => canon(state, example),
        Command::Yield { state, mixture, example, fidelity, grid_out } => {
            yield_report(state, mixture, example, fidelity, grid_out)
        }
        Command::Sweep { example, from, to, steps, out } => sweep(&example, from, to, steps, &out),
        Command::Simulate {
            state,
            mixture,
            example,
            fidelity,
            copies,
            mz,
            mx,
            trials,
            seed,
            mode,
            pool,
            out,
        } => simulate(
            resolve_pair(state, mixture, example, fidelity)?,
            copies,
            mz,
            mx,
            trials,
            seed,
            mode,
            pool,
            out,
        ),
        Command::CheckPerm { state, example, copies, samples, seed } => {
            check_perm(state, example, copies, samples, seed)
        }
        Command::Entropy { mixture, example, fidelity } => {
            let mix = match (mixture, example) {
                (Some(path), None) => load_mixture(&path)?,
                (None, Some(name)) => builtin_pair(&name, fidelity)?.1,
                _ => return Err(CliError::Data("provide --mixture or --example".into())),
            };
            println!("H = {}", fmt_f(mix.entropy()));
            Ok(())
        }
    }
}

fn canon(state: Option<PathBuf>, example: Option<String>) -> Result<(), CliError> {
    let css = match (state, example) {
        (Some(path), None) => load_state(&path)?,
        (None, Some(name)) => builtin_state(&name)?,
        _ => return Err(CliError::Data("provide --state or --example".into())),
    };
    let canon = css.canonicalized().map_err(data_err)?;
    let info = canon.canonical().expect("canonicalized");
    println!("n = {}  nz = {}  nx = {}", canon.n(), canon.nz(), canon.nx());
    let perm: Vec<String> = info.qubit_perm.iter().map(|q| (q + 1).to_string()).collect();
    println!("qubit permutation = {}", perm.join(" "));
    let theta_rows: Vec<String> = (0..info.theta.rows())
        .map(|r| {
            (0..info.theta.cols())
                .map(|c| if info.theta.get(r, c) { "1" } else { "0" })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    if theta_rows.len() == 1 {
        println!("theta = {}", theta_rows[0]);
    } else {
        println!("theta =");
        for row in &theta_rows {
            println!("  {row}");
        }
    }
    println!("orthogonal = {}", if info.orthogonal { "yes" } else { "no" });
    let sep = canon.is_separable().map_err(data_err)?;
    println!("separable = {}", if sep.separable { "yes" } else { "no" });
    if let Some((a, b)) = sep.bipartition {
        let show = |side: &[usize]| {
            side.iter().map(|&q| (info.qubit_perm[q] + 1).to_string()).collect::<Vec<_>>().join(",")
        };
        println!("bipartition = {{{}}} | {{{}}}", show(&a), show(&b));
    }
    Ok(())
}

fn yield_report(
    state: Option<PathBuf>,
    mixture: Option<PathBuf>,
    example: Option<String>,
    fidelity: f64,
    grid_out: Option<PathBuf>,
) -> Result<(), CliError> {
    let (css, mix) = resolve_pair(state, mixture, example, fidelity)?;
    let res = protocol_yield(&css, &mix).map_err(data_err)?;
    println!("H = {}", fmt_f(res.h));
    println!("grid (d_z, d_x, H_dd, rhs):");
    for g in &res.grid {
        println!("  {} {} {} {}", g.dz, g.dx, fmt_f(g.h_dd), fmt_f(res.h - g.h_dd));
    }
    println!("m_z = {}", fmt_f(res.mz));
    println!("m_x = {}", fmt_f(res.mx));
    println!("gamma = {}", fmt_f(res.gamma));
    let active: Vec<String> = res.active.iter().map(|(dz, dx)| format!("({dz},{dx})")).collect();
    println!("active constraints: {}", active.join(" "));
    if let Some(path) = grid_out {
        let mut csv = String::from("d_z,d_x,h_dd,rhs\n");
        for g in &res.grid {
            let _ = writeln!(csv, "{},{},{},{}", g.dz, g.dx, fmt_f(g.h_dd), fmt_f(res.h - g.h_dd));
        }
        write_output(&path, &csv)?;
    }
    Ok(())
}

fn sweep(example: &str, from: f64, to: f64, steps: usize, out: &PathBuf) -> Result<(), CliError> {
    if example != "cat4" {
        return Err(CliError::Data(
            "the yield comparison dataset is defined for --example cat4".into(),
        ));
    }
    if !(0.0..=1.0).contains(&from) || from >= to || to > 1.0 || steps < 2 {
        return Err(CliError::Data("need 0 <= from < to <= 1 and at least 2 steps".into()));
    }
    let state = cat_state(4);
    let rows: Result<Vec<String>, CliError> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let f = from + (to - from) * i as f64 / (steps - 1) as f64;
            let mix = depolarizing_cat4_mixture(f);
            let ours = protocol_yield(&state, &mix).map_err(data_err)?.gamma;
            let (man, lo) = baseline_yields_cat4(&mix);
            Ok(format!(
                "{},{},{},{}",
                fmt_f(f),
                fmt_f(ours.max(0.0)),
                fmt_f(lo.max(0.0)),
                fmt_f(man.max(0.0))
            ))
        })
        .collect();
    let mut csv = String::from("F,yield_ours,yield_lo,yield_man\n");
    for row in rows? {
        csv.push_str(&row);
        csv.push('\n');
    }
    write_output(out, &csv)?;
    println!("wrote {steps} rows to {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    pair: (CssState, DiagonalMixture),
    copies: usize,
    mz: f64,
    mx: f64,
    trials: usize,
    seed: u64,
    mode: ModeArg,
    pool: PoolArg,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let (css, mix) = pair;
    let ctx = ProtocolContext::new(&css, &mix).map_err(data_err)?;
    let spec = RunSpec {
        copies,
        mz,
        mx,
        mode: match mode {
            ModeArg::Overall => RandMode::Overall,
            ModeArg::Stepwise => RandMode::Stepwise,
        },
    };
    spec.measured_counts().map_err(data_err)?;
    let n = ctx.n();
    // one planted single-coordinate deviation per generator
    let deltas: Vec<BitVector> =
        (0..n).map(|j| BitVector::unit(n * copies, j * copies)).collect();
    if matches!(pool, PoolArg::Exhaustive) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut successes = 0usize;
        for _ in 0..trials {
            let run = run_protocol(&ctx, &spec, &Pool::Exhaustive, &mut rng).map_err(data_err)?;
            successes += run.success as usize;
        }
        println!("successes = {successes}/{trials}");
    }
    let rows = survival_experiment(&ctx, &spec, &deltas, trials, seed).map_err(data_err)?;
    let mut csv = String::from("d_z,d_x,trials,survivals,predicted,z_score\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.dz,
            r.dx,
            r.trials,
            r.survivals,
            fmt_f(r.predicted),
            fmt_f(r.z_score)
        );
    }
    match out {
        Some(path) => write_output(&path, &csv)?,
        None => print!("{csv}"),
    }
    let worst = rows.iter().map(|r| r.z_score.abs()).fold(0.0, f64::max);
    if worst > 5.0 {
        return Err(CliError::Assertion(format!(
            "survival statistics deviate from the elimination law (|z| = {worst:.2})"
        )));
    }
    Ok(())
}

fn check_perm(
    state: Option<PathBuf>,
    example: Option<String>,
    copies: usize,
    samples: usize,
    seed: u64,
) -> Result<(), CliError> {
    let css = match (state, example) {
        (Some(path), None) => load_state(&path)?,
        (None, Some(name)) => builtin_state(&name)?,
        _ => return Err(CliError::Data("provide --state or --example".into())),
    };
    let canon = css.canonicalized().map_err(data_err)?;
    if canon.is_separable().map_err(data_err)?.separable {
        return Err(CliError::Data(
            "state is separable; the permutation subgroup is undefined".into(),
        ));
    }
    let ts = ThetaStructure::new(canon.theta().expect("canonical"));
    let orthogonal = canon.is_orthogonal().expect("canonical");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = 0usize;
    for _ in 0..samples {
        let pc = sample_perm_clifford(&ts, orthogonal, copies, &mut rng);
        if verify_permutation(&pc, &canon).is_ok() {
            ok += 1;
        }
    }
    println!("{ok}/{samples} verified");
    if ok != samples {
        return Err(CliError::Assertion(format!(
            "{} sampled operations failed verification",
            samples - ok
        )));
    }
    Ok(())
}
