#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use neumann_core::closed_form::{asymptotic_bound, disk_row, symmetry_breaking_verdict, table1, table1_mismatches};
use neumann_core::dual::{run_dual, solve};
use neumann_core::experiments::{
    check_pq_to_0, classify_pq_to_1, continuation_to_sign, estimate_frak_c, ls_upper_bounds, run_sweep, PathSpec, Side,
    SweepSpec,
};
use neumann_core::oracle::oracle_dual_smallgrid;
use neumann_core::{Error, ExponentPair};
use serde_json::json;

use config::{CommonArgs, FileConfig, Format, GridArgs, RunConfig, SolverArgs};
use output::{ensure_dir, num, opt, write_csv, write_json, write_profile};

#[derive(Parser, Debug)]
#[command(name = "neumann-lab", version, about = "Neumann Lane-Emden systems on intervals and balls")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one exponent pair; p = 0 selects the sign nonlinearity
    Solve {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Radial and competitor energies for N = 3..8, checked against reference values
    Table1,
    /// Solve along a path in the (p, q) plane
    Sweep {
        /// e.g. "p:0.5..3,q:1"
        #[arg(long)]
        path: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        warm_start: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Bound chain of the symmetry-breaking certificate
    Asympt {
        #[arg(long, default_value_t = 5)]
        from: usize,
        #[arg(long, default_value_t = 50)]
        to: usize,
    },
    /// Brute-force dual level on a tiny grid next to the iteration
    Oracle {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Limit studies
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Above,
    Below,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// c and ‖u‖∞ as pq → 1 on (0, L)
    Pq1 {
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, value_enum, default_value = "above")]
        side: SideArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// The constant 𝔠 along p = q = 1 + t on (0, π)
    Frakc {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// c_{p,p} against 2c₀ on the unit interval
    Pq0 {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Upper bounds for the minimax levels c_1..c_k
    Ls {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Λ_{p,q} extrapolated to p = 0 against the sign solver
    Continuation {
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

/// Failed check, distinct from configuration and numerical errors.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

/// Non-convergence after the partial output was written.
#[derive(Debug)]
struct Unconverged(String);

impl std::fmt::Display for Unconverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Unconverged {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Unconverged>().is_some() {
        return 2;
    }
    if err.downcast_ref::<CheckFailed>().is_some() {
        return 3;
    }
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(
            Error::NonConvergence { .. }
            | Error::DegenerateIterate(_)
            | Error::OscillationDetected(_)
            | Error::ShiftRoot(_),
        ) => 2,
        Some(_) => 1,
        None if err.chain().any(|e| e.downcast_ref::<std::io::Error>().is_some()) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(j) = cli.common.jobs.or(file.jobs) {
        if j == 0 {
            bail!("--jobs must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().context("building thread pool")?;
    }
    let common = &cli.common;
    let merge = |name: &str, grid: &GridArgs, solver: &SolverArgs, default_n: usize| {
        RunConfig::merge(name, &file, common, grid, solver, default_n)
    };
    match &cli.command {
        Command::Solve { p, q, grid, solver } => {
            let mut cfg = merge("solve", grid, solver, 1000)?;
            cfg.p = Some(p.or(file.p).ok_or_else(|| anyhow!("solve needs --p"))?);
            cfg.q = Some(q.or(file.q).ok_or_else(|| anyhow!("solve needs --q"))?);
            cmd_solve(&cfg)
        }
        Command::Table1 => cmd_table1(&merge("table1", &GridArgs::default(), &SolverArgs::default(), 1000)?),
        Command::Sweep { path, samples, warm_start, grid, solver } => {
            let cfg = merge("sweep", grid, solver, 500)?;
            let path = path.clone().or_else(|| file.sweep.path.clone()).ok_or_else(|| anyhow!("sweep needs --path"))?;
            let samples = samples.or(file.sweep.samples).unwrap_or(26);
            let warm = *warm_start || file.sweep.warm_start.unwrap_or(false);
            cmd_sweep(&cfg, &path, samples, warm)
        }
        Command::Asympt { from, to } => {
            cmd_asympt(&merge("asympt", &GridArgs::default(), &SolverArgs::default(), 1000)?, *from, *to)
        }
        Command::Oracle { p, q, restarts, grid, solver } => {
            let mut cfg = merge("oracle", grid, solver, 9)?;
            cfg.p = Some(p.or(file.p).ok_or_else(|| anyhow!("oracle needs --p"))?);
            cfg.q = Some(q.or(file.q).ok_or_else(|| anyhow!("oracle needs --q"))?);
            cmd_oracle(&cfg, *restarts)
        }
        Command::Experiment { which } => cmd_experiment(which, &merge),
    }
}

fn exponents(cfg: &RunConfig) -> anyhow::Result<ExponentPair> {
    Ok(ExponentPair::new(cfg.p.unwrap(), cfg.q.unwrap(), cfg.grid.dim)?)
}

fn cmd_solve(cfg: &RunConfig) -> anyhow::Result<()> {
    let e = exponents(cfg)?;
    let grid = cfg.grid.build()?;
    let rep = solve(&e, &grid, &cfg.solver)?;
    ensure_dir(&cfg.out)?;
    let mut summary = serde_json::to_value(&rep)?;
    if let Some(obj) = summary.as_object_mut() {
        for key in ["r", "u", "v"] {
            obj.remove(key);
        }
        obj.insert("config".into(), serde_json::to_value(cfg)?);
    }
    write_json(&cfg.out.join("solution.json"), &summary)?;
    write_profile(&cfg.out.join("u.csv"), &rep.r, &rep.u)?;
    write_profile(&cfg.out.join("v.csv"), &rep.r, &rep.v)?;
    println!(
        "Lambda = {}  D = {}  c = {}  iterations = {}  converged = {}",
        num(rep.lambda),
        num(rep.d),
        num(rep.c),
        rep.iterations,
        rep.converged
    );
    if !rep.zeros.is_empty() {
        let z: Vec<String> = rep.zeros.iter().map(|z| num(*z)).collect();
        println!("zeros of u: {}", z.join(" "));
    }
    for n in &rep.notes {
        println!("note: {n}");
    }
    if !rep.converged {
        return Err(Unconverged(format!(
            "not converged after {} iterations (residuals {:e}, {:e}); partial output written",
            rep.iterations, rep.residual_u, rep.residual_v
        ))
        .into());
    }
    Ok(())
}

fn cmd_table1(cfg: &RunConfig) -> anyhow::Result<()> {
    ensure_dir(&cfg.out)?;
    let rows = table1();
    let disk = disk_row();
    match cfg.format {
        Format::Csv => {
            let body: Vec<Vec<String>> =
                rows.iter().map(|r| vec![r.dim.to_string(), num(r.h1), num(r.h2), num(r.diff)]).collect();
            write_csv(&cfg.out.join("table1.csv"), &["N", "h1", "h2", "h1_minus_h2"], &body)?;
        }
        Format::Json => {
            write_json(&cfg.out.join("table1.json"), &json!({ "config": cfg, "rows": rows, "disk": disk }))?;
        }
    }
    for r in &rows {
        println!("N={}  h1={}  h2={}  h1-h2={}", r.dim, num(r.h1), num(r.h2), num(r.diff));
    }
    println!("disk  h1={}  h2={}", num(disk.h1), num(disk.h2));
    let bad = table1_mismatches();
    if !bad.is_empty() {
        let items: Vec<String> = bad.iter().map(|(n, col, x, y)| format!("N={n} {col}: {x} vs {y}")).collect();
        return Err(CheckFailed(format!("table mismatch: {}", items.join("; "))).into());
    }
    println!("all entries within 1e-5 relative of the reference values");
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, path: &str, samples: usize, warm: bool) -> anyhow::Result<()> {
    let path: PathSpec = path.parse()?;
    let spec = SweepSpec::uniform(path, samples, cfg.grid.clone(), warm)?;
    let mut records = run_sweep(&spec, &cfg.solver)?;
    records.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.t.total_cmp(&b.t)));
    ensure_dir(&cfg.out)?;
    match cfg.format {
        Format::Csv => {
            let header =
                ["t", "p", "q", "region", "Lambda", "D", "c", "u_max", "v_max", "iterations", "converged", "error"];
            let body: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    vec![
                        num(r.t),
                        num(r.p),
                        num(r.q),
                        r.region.map(|x| format!("{x:?}")).unwrap_or_default(),
                        opt(r.lambda),
                        opt(r.d),
                        opt(r.c),
                        opt(r.u_max),
                        opt(r.v_max),
                        r.iterations.to_string(),
                        r.converged.to_string(),
                        r.error.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            write_csv(&cfg.out.join("sweep.csv"), &header, &body)?;
        }
        Format::Json => {
            write_json(&cfg.out.join("sweep.json"), &json!({ "config": cfg, "path": spec.path, "records": records }))?;
        }
    }
    let failed = records.iter().filter(|r| !r.converged).count();
    println!("{} samples, {} not converged", records.len(), failed);
    Ok(())
}

fn cmd_asympt(cfg: &RunConfig, from: usize, to: usize) -> anyhow::Result<()> {
    if from < 5 || to < from {
        bail!("need 5 <= from <= to, got {from}..{to}");
    }
    let mut body = vec![];
    let mut all = vec![];
    for n in from..=to {
        let b = asymptotic_bound(n)?;
        let v = symmetry_breaking_verdict(n)?;
        body.push(vec![
            n.to_string(),
            num(b.neg_p),
            num(b.mid),
            num(b.rhs),
            b.verdict.to_string(),
            v.broken.to_string(),
            format!("{:?}", v.provenance).to_lowercase(),
        ]);
        all.push(json!({ "bound": b, "verdict": v }));
    }
    ensure_dir(&cfg.out)?;
    match cfg.format {
        Format::Csv => {
            let header = ["N", "neg_p", "mid", "rhs", "chain_holds", "symmetry_broken", "provenance"];
            write_csv(&cfg.out.join("asympt.csv"), &header, &body)?;
        }
        Format::Json => {
            write_json(&cfg.out.join("asympt.json"), &json!({ "config": cfg, "rows": all }))?;
        }
    }
    let first = (from..=to).find(|&n| asymptotic_bound(n).map(|b| b.verdict).unwrap_or(false));
    match first {
        Some(n) => println!("bound chain holds from N = {n} within {from}..={to}"),
        None => println!("bound chain fails on {from}..={to}"),
    }
    Ok(())
}

fn cmd_oracle(cfg: &RunConfig, restarts: usize) -> anyhow::Result<()> {
    let e = exponents(cfg)?;
    let grid = cfg.grid.build()?;
    let oracle = oracle_dual_smallgrid(&e, &grid, restarts, cfg.solver.seed)?;
    let dp = run_dual(&e, &grid, &cfg.solver, None)?;
    let gap = (dp.d_estimate - oracle.best).abs() / oracle.best;
    println!(
        "oracle D = {}  iteration D = {}  relative gap = {:.3e}  converged = {}",
        num(oracle.best),
        num(dp.d_estimate),
        gap,
        dp.converged
    );
    ensure_dir(&cfg.out)?;
    write_json(
        &cfg.out.join("oracle.json"),
        &json!({
            "config": cfg,
            "oracle": oracle,
            "iteration": dp.d_estimate,
            "iterations": dp.iterations,
            "converged": dp.converged,
            "relative_gap": gap,
        }),
    )?;
    if !dp.converged {
        return Err(Unconverged(format!("dual iteration stopped after {} iterations", dp.iterations)).into());
    }
    Ok(())
}

fn emit(
    cfg: &RunConfig,
    name: &str,
    report: serde_json::Value,
    header: &[&str],
    rows: Vec<Vec<String>>,
) -> anyhow::Result<()> {
    ensure_dir(&cfg.out)?;
    let out: &Path = &cfg.out;
    match cfg.format {
        Format::Csv => write_csv(&out.join(format!("{name}.csv")), header, &rows)?,
        Format::Json => write_json(&out.join(format!("{name}.json")), &json!({ "config": cfg, "report": report }))?,
    };
    Ok(())
}

fn cmd_experiment(
    which: &Experiment,
    merge: &dyn Fn(&str, &GridArgs, &SolverArgs, usize) -> anyhow::Result<RunConfig>,
) -> anyhow::Result<()> {
    match which {
        Experiment::Pq1 { q, side, grid, solver } => {
            let cfg = merge("experiment pq1", grid, solver, 1000)?;
            let side = match side {
                SideArg::Above => Side::Above,
                SideArg::Below => Side::Below,
            };
            let rep = classify_pq_to_1(*q, side, cfg.grid.length, cfg.grid.intervals, &cfg.solver)?;
            println!(
                "mu1 = {}  c trend {:?}, u trend {:?}, expected {:?}, consistent = {}",
                num(rep.mu1),
                rep.c_trend,
                rep.u_trend,
                rep.expected,
                rep.consistent
            );
            let rows = rep
                .samples
                .iter()
                .map(|s| {
                    vec![
                        num(s.offset),
                        num(s.p),
                        num(s.q),
                        num(s.lambda),
                        num(s.c),
                        num(s.u_max),
                        s.converged.to_string(),
                    ]
                })
                .collect();
            emit(
                &cfg,
                "pq1",
                serde_json::to_value(&rep)?,
                &["offset", "p", "q", "Lambda", "c", "u_max", "converged"],
                rows,
            )
        }
        Experiment::Frakc { grid, solver } => {
            let cfg = merge("experiment frakc", grid, solver, 2000)?;
            let rep = estimate_frak_c(&|t| (1.0 + t, 1.0 + t), cfg.grid.intervals, &cfg.solver)?;
            println!(
                "frak c = {}  second order = {}  reference = {}  level ratio = {}",
                num(rep.frak_c),
                num(rep.frak_c_second),
                num(rep.reference),
                num(rep.level_ratio)
            );
            let rows = rep
                .samples
                .iter()
                .map(|s| vec![num(s.t), num(s.p), num(s.q), num(s.lambda), num(s.log_ratio), num(s.c_ratio)])
                .collect();
            emit(&cfg, "frakc", serde_json::to_value(&rep)?, &["t", "p", "q", "Lambda", "log_ratio", "c_ratio"], rows)
        }
        Experiment::Pq0 { grid, solver } => {
            let cfg = merge("experiment pq0", grid, solver, 2000)?;
            let rep = check_pq_to_0(cfg.grid.intervals, &cfg.solver)?;
            println!("c0 = {}  monotone = {}", num(rep.c0), rep.monotone);
            for s in &rep.samples {
                println!("p = {}  c = {}  c/2c0 = {}  |u-v|/|u| = {:.3e}", s.p, num(s.c), num(s.ratio), s.uv_gap);
            }
            let rows = rep.samples.iter().map(|s| vec![num(s.p), num(s.c), num(s.ratio), num(s.uv_gap)]).collect();
            emit(&cfg, "pq0", serde_json::to_value(&rep)?, &["p", "c", "ratio", "uv_gap"], rows)
        }
        Experiment::Ls { p, q, k, restarts, grid, solver } => {
            let cfg = merge("experiment ls", grid, solver, 400)?;
            let e = ExponentPair::new(*p, *q, cfg.grid.dim)?;
            let bounds = ls_upper_bounds(&e, *k, &cfg.grid.build()?, *restarts, &cfg.solver)?;
            for b in &bounds {
                println!("k = {}  bound = {}", b.k, num(b.bound));
            }
            let rows = bounds.iter().map(|b| vec![b.k.to_string(), num(b.diagonal), num(b.bound)]).collect();
            emit(&cfg, "ls", serde_json::to_value(&bounds)?, &["k", "diagonal", "bound"], rows)
        }
        Experiment::Continuation { q, grid, solver } => {
            let cfg = merge("experiment continuation", grid, solver, 2000)?;
            let rep = continuation_to_sign(*q, &cfg.grid.build()?, &cfg.solver)?;
            println!(
                "extrapolated = {}  direct = {}  relative gap = {:.3e}",
                num(rep.extrapolated),
                num(rep.direct),
                rep.relative_gap
            );
            let rows = rep.samples.iter().map(|(p, l)| vec![num(*p), num(*l)]).collect();
            emit(&cfg, "continuation", serde_json::to_value(&rep)?, &["p", "Lambda"], rows)
        }
    }
}
