//! Command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 a property fails (the report carries the
//! witness), 2 usage or validation error, 3 resource budget exceeded.

mod args;
mod output;

use clap::Parser;

pub use args::{Cli, Command, Format};
pub use output::RunManifest;

use args::{CouplingCmd, ModeArg, RangeArgs, RangeCmd, TrajectoryArgs, TrapArgs, TrapCmd, Verify};
use output::{emit, verdict, Csv, Outcome};

use crate::coupling::{exhaustive_coupling_oracle, run_coupling, verify_pnxodd_exact};
use crate::engine::{
    domination_chain, range_via_hits, verify_decomposition, verify_pascal, verify_w_recursion, EngineOptions,
};
use crate::error::{Error, Result};
use crate::kernels::{check_conditions, ConditionMode, IncrementPmf};
use crate::montecarlo::{
    counterexample_ratio, enumerate_range, mc_range, simulate_trap_field, survival_via_identity, TrapSimConfig,
};
use crate::numeric::{Precision, DEFAULT_CELL_BUDGET};
use crate::perturb::{InsertionPath, TrapTrajectory};

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.global.threads {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match execute(&cli, &argv) {
        Ok(pass) => i32::from(!pass),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, argv: &[String]) -> Result<bool> {
    let config = serde_json::to_value(cli).map_err(|e| Error::Parse(e.to_string()))?;
    let manifest = RunManifest::start(argv.to_vec(), config, cli.global.seed());
    let outcome = dispatch(cli)?;
    emit(&outcome, manifest, cli.global.format, cli.global.out.as_deref())?;
    Ok(outcome.pass)
}

fn engine_options(cli: &Cli) -> EngineOptions {
    let precision = if cli.global.exact {
        Precision::Exact
    } else if cli.global.float {
        Precision::Float
    } else {
        Precision::Auto
    };
    EngineOptions { precision, cell_budget: DEFAULT_CELL_BUDGET }
}

fn trajectory(a: &TrajectoryArgs) -> Result<(IncrementPmf, TrapTrajectory, usize)> {
    let pmf = IncrementPmf::from_spec(&a.pmf)?;
    let phi = match (&a.phi, &a.phi_file) {
        (Some(spec), None) => TrapTrajectory::from_spec(spec, pmf.dim())?,
        (None, Some(path)) => TrapTrajectory::from_file(path, pmf.dim())?,
        _ => return Err(Error::validation("give exactly one of --phi or --phi-file")),
    };
    let horizon = a.horizon.unwrap_or(phi.len() - 1);
    Ok((pmf, phi, horizon))
}

fn insertion(a: &RangeArgs) -> Result<(IncrementPmf, InsertionPath)> {
    let pmf = IncrementPmf::from_spec(&a.pmf)?;
    let f = match (&a.f, &a.f_file) {
        (Some(spec), None) => InsertionPath::from_spec(spec, pmf.dim())?,
        (None, Some(path)) => InsertionPath::from_file(path, pmf.dim())?,
        (None, None) => InsertionPath::zero(pmf.dim(), a.n + 1),
        _ => return Err(Error::validation("give at most one of --f or --f-file")),
    };
    Ok((pmf, f))
}

fn trap_config(a: &TrapArgs, cli: &Cli) -> Result<TrapSimConfig> {
    let mut config = TrapSimConfig::from_toml_file(&a.config)?;
    if let Some(r) = a.reps {
        config.reps = r;
    }
    if let Some(w) = a.window {
        config.window = w;
    }
    if let Some(seed) = cli.global.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let opts = engine_options(cli);
    let seed = cli.global.seed();
    match &cli.command {
        Command::Verify(Verify::Pascal(a)) => {
            let (pmf, phi, n) = trajectory(a)?;
            let r = verify_pascal(&pmf, &phi, n, opts)?;
            let mut csv = Csv::new(&["n", "Wtilde_phi", "Wtilde_0", "margin", "verdict"]);
            for row in &r.rows {
                csv.row(&[&row.n, &row.w_phi, &row.w_zero, &row.margin, &verdict(row.ok)]);
            }
            let regime = if r.proved_regime { "" } else { " (unproved regime)" };
            let summary = format!("pascal {} N={n}: {} min margin {}{regime}", r.pmf, verdict(r.pass), r.min_margin);
            Outcome::new(r.pass, summary, &r, csv)
        }
        Command::Verify(Verify::Domination(a)) => {
            let (pmf, phi, n) = trajectory(a)?;
            let r = domination_chain(&pmf, &phi, n, opts)?;
            let mut csv = Csv::new(&["n", "min_slack", "witness_k", "witness_x0", "verdict"]);
            for row in &r.rows {
                csv.row(&[&row.n, &row.min_slack, &row.witness_k, &row.witness_x0, &verdict(row.pass)]);
            }
            let summary = format!("domination {} N={n}: {}", r.pmf, verdict(r.pass));
            Outcome::new(r.pass, summary, &r, csv)
        }
        Command::Verify(Verify::Decomposition(a)) => {
            let (pmf, phi, n) = trajectory(a)?;
            let r = verify_decomposition(&pmf, &phi, n, opts)?;
            let mut csv = Csv::new(&["n", "at_time", "before", "combined", "target", "residual", "verdict"]);
            for row in &r.rows {
                csv.row(&[&row.n, &row.at_time, &row.before, &row.combined, &row.target, &row.residual, &verdict(row.ok)]);
            }
            let summary = format!("decomposition {} N={n}: {}", r.pmf, verdict(r.pass));
            Outcome::new(r.pass, summary, &r, csv)
        }
        Command::Verify(Verify::WRecursion(a)) => {
            let (pmf, phi, n) = trajectory(a)?;
            let r = verify_w_recursion(&pmf, &phi, n, opts)?;
            let mut csv = Csv::new(&["n", "margin", "bound", "slack", "verdict"]);
            for row in &r.rows {
                csv.row(&[&row.n, &row.margin, &row.bound, &row.slack, &verdict(row.ok)]);
            }
            let regime = if r.proved_regime { "" } else { " (unproved regime)" };
            let summary = format!("w-recursion {} N={n}: {}{regime}", r.pmf, verdict(r.pass));
            Outcome::new(r.pass, summary, &r, csv)
        }
        Command::Verify(Verify::Conditions { pmf, horizon, mode }) => {
            let pmf = IncrementPmf::from_spec(pmf)?;
            let mode = match mode {
                ModeArg::Paired => ConditionMode::Paired,
                ModeArg::Moreau => ConditionMode::Moreau,
            };
            let r = check_conditions(&pmf, *horizon, mode, opts.precision, opts.cell_budget)?;
            let mut csv = Csv::new(&["n", "time_slack", "peak_slack", "peak_site"]);
            for row in &r.rows {
                let site = row.peak_site.as_ref().map(|s| format!("{s:?}").replace(',', " ")).unwrap_or_default();
                csv.row(&[&row.n, &row.time_slack, &row.peak_slack, &site]);
            }
            let witness = r
                .first_violation
                .as_ref()
                .map(|w| format!(" first violation n={} ({:?}, slack {})", w.n, w.condition, w.slack))
                .unwrap_or_default();
            let summary = format!("conditions {} {:?} N={horizon}: {}{witness}", r.pmf, r.mode, verdict(r.holds));
            Outcome::new(r.holds, summary, &r, csv)
        }
        Command::Verify(Verify::Pnxodd { dim, n, radius }) => {
            let r = verify_pnxodd_exact(*dim, *n, radius.unwrap_or(*n as i64))?;
            let mut csv = Csv::new(&["dim", "n", "radius", "checked", "p_e1", "worst_value", "verdict"]);
            let worst = r.worst_value.as_ref().map(ToString::to_string).unwrap_or_default();
            csv.row(&[&r.dim, &r.n, &r.radius, &r.checked, &r.p_e1, &worst, &verdict(r.pass)]);
            let summary = format!("pnxodd d={dim} n={n}: {} over {} sites", verdict(r.pass), r.checked);
            Outcome::new(r.pass, summary, &r, csv)
        }
        Command::Range(RangeCmd::Exact(a)) => {
            let (pmf, f) = insertion(a)?;
            let values = (0..=a.n).map(|k| range_via_hits(&pmf, &f, k, opts)).collect::<Result<Vec<_>>>()?;
            let mut csv = Csv::new(&["n", "expected_range"]);
            for (k, v) in values.iter().enumerate() {
                csv.row(&[&k, v]);
            }
            let summary = format!("range exact {} n={}: {}", pmf.name(), a.n, values[a.n]);
            Outcome::new(true, summary, &values, csv)
        }
        Command::Range(RangeCmd::Mc { range, reps }) => {
            let (pmf, f) = insertion(range)?;
            let r = mc_range(&pmf, &f, range.n, *reps, seed)?;
            let mut csv = Csv::new(&["n", "reps", "mean", "stderr"]);
            csv.row(&[&r.n, &r.reps, &r.mean, &r.stderr]);
            let summary = format!("range mc {} n={}: {:.6} +- {:.6}", pmf.name(), r.n, r.mean, r.stderr);
            Outcome::new(true, summary, &r, csv)
        }
        Command::Range(RangeCmd::Enumerate(a)) => {
            let (pmf, f) = insertion(a)?;
            let v = enumerate_range(&pmf, &f, a.n)?;
            let mut csv = Csv::new(&["n", "expected_range"]);
            csv.row(&[&a.n, &v]);
            let summary = format!("range enumerate {} n={}: {v}", pmf.name(), a.n);
            Outcome::new(true, summary, &v, csv)
        }
        Command::Trap(TrapCmd::Simulate(a)) => {
            let config = trap_config(a, cli)?;
            let r = simulate_trap_field(&config)?;
            let mut csv = Csv::new(&["t", "S_moving", "S_fixed"]);
            for p in &r.curve {
                csv.row(&[&p.t, &p.moving, &p.fixed]);
            }
            let summary = format!(
                "trap simulate t={}: S(X) = {:.5} +- {:.5}, S(0) = {:.5} +- {:.5}, ordering {}{}",
                config.horizon,
                r.moving.estimate,
                r.moving.stderr,
                r.fixed.estimate,
                r.fixed.stderr,
                verdict(r.pascal_ok),
                if r.window_flagged { ", window below default" } else { "" }
            );
            Outcome::new(true, summary, &r, csv)
        }
        Command::Trap(TrapCmd::Identity(a)) => {
            let config = trap_config(a, cli)?;
            let r = survival_via_identity(&config)?;
            let mut csv = Csv::new(&["trajectory", "estimate", "stderr", "hit_sum"]);
            csv.row(&[&"moving", &r.moving.estimate, &r.moving.stderr, &r.hit_sum_moving]);
            csv.row(&[&"fixed", &r.fixed.estimate, &r.fixed.stderr, &r.hit_sum_fixed]);
            let summary = format!(
                "trap identity t={}: S(X) = {:.5} +- {:.5}, S(0) = {:.5} +- {:.5}",
                config.horizon, r.moving.estimate, r.moving.stderr, r.fixed.estimate, r.fixed.stderr
            );
            Outcome::new(true, summary, &r, csv)
        }
        Command::Coupling(CouplingCmd::Run { x, n, reps }) => {
            let r = run_coupling(x, *n, *reps, seed)?;
            let mut csv = Csv::new(&["n", "reps", "p_x_hat", "stderr_x", "p_y_hat", "stderr_y", "p_x_exact", "p_y_exact", "verdict"]);
            csv.row(&[&r.n, &r.reps, &r.p_x_hat, &r.stderr_x, &r.p_y_hat, &r.stderr_y, &r.p_x_exact, &r.p_y_exact, &verdict(r.ordered)]);
            let summary = format!(
                "coupling run x={x:?} n={n}: {} steps checked, P(X_n=0) = {:.5}, P(Y_n=0) = {:.5}, {}",
                r.steps_checked,
                r.p_x_hat,
                r.p_y_hat,
                verdict(r.ordered)
            );
            Outcome::new(r.ordered, summary, &r, csv)
        }
        Command::Coupling(CouplingCmd::Oracle { x, n }) => {
            let r = exhaustive_coupling_oracle(x, *n)?;
            let mut csv = Csv::new(&["n", "paths", "distinct_y_paths", "x_hits", "y_hits", "verdict"]);
            csv.row(&[&r.n, &r.paths, &r.distinct_y_paths, &r.x_hits, &r.y_hits, &verdict(r.pass)]);
            let summary = format!("coupling oracle x={x:?} n={n}: {} over {} paths", verdict(r.pass), r.paths);
            Outcome::new(r.pass, summary, &r, csv)
        }
        Command::Counterexample { n, reps } => {
            let r = counterexample_ratio(*n, *reps, seed)?;
            let mut csv = Csv::new(&["n", "reps", "mean_ratio", "stderr", "min_ratio", "max_ratio", "all_even"]);
            csv.row(&[&r.n, &r.reps, &r.mean_ratio, &r.stderr, &r.min_ratio, &r.max_ratio, &r.all_even]);
            let summary = format!("counterexample n={n}: mean ratio {:.4} +- {:.4}, all sites even", r.mean_ratio, r.stderr);
            Outcome::new(true, summary, &r, csv)
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args() -> i32 {
    run(std::env::args())
}
