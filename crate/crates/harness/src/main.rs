use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use reconfig_core::kalman::predict_mse;
use reconfig_core::matrix::identity;
use reconfig_core::scalar::feasibility_problem;
use reconfig_core::tracking::simulate_trace;
use reconfig_core::vector::{minmax_problem, minsum_problem};
use reconfig_harness::config::{parse_p_grid, parse_policies, ExperimentConfig, PolicyName};
use reconfig_harness::error::{HarnessError, Result};
use reconfig_harness::oracles::run_oracles;
use reconfig_harness::output::{csv_string, emit_csv, emit_svg};
use reconfig_harness::sweep::{run_point, run_sweep_with};
use reconfig_harness::system::generate_systems;

#[derive(Parser)]
#[command(name = "reconfig", version, about = "Reconfigurable-observation Kalman filtering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Configuration file (`key = value` lines); built-in defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SdpKind {
    Minsum,
    Minmax,
    Feasibility,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state MSE over the P grid for each policy and seed.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated budgets, e.g. `0.5,1,2,4,8`.
        #[arg(long)]
        p_grid: Option<String>,
        /// Comma-separated policy names.
        #[arg(long)]
        policies: Option<String>,
        #[arg(long)]
        num_seeds: Option<usize>,
        /// Written to stdout when neither this nor `out_csv` in the config is set.
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
    /// Cross-checks the optimizers against independent oracles.
    Oracle {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// One steady-state run with a summary of the final reconfiguration.
    Track {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "vec-minsum")]
        policy: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Also simulate this many steps and report the empirical error.
        #[arg(long)]
        simulate: Option<usize>,
    },
    /// Prints an SDP built at the first-step prediction MSE in text form.
    DumpSdp {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_enum, default_value = "minsum")]
        kind: SdpKind,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// MSE level for the feasibility problem.
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sweep(
    cfg: ConfigArgs,
    p_grid: Option<String>,
    policies: Option<String>,
    num_seeds: Option<usize>,
    out_csv: Option<PathBuf>,
    out_svg: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = cfg.load()?;
    if let Some(g) = p_grid {
        cfg.p_grid = parse_p_grid(&g)?;
    }
    if let Some(p) = policies {
        cfg.policies = parse_policies(&p)?;
    }
    if let Some(n) = num_seeds {
        cfg.num_seeds = n;
    }
    if out_csv.is_some() {
        cfg.out_csv = out_csv;
    }
    if out_svg.is_some() {
        cfg.out_svg = out_svg;
    }
    cfg.validate()?;

    let rows = run_sweep_with(&cfg, |r| {
        eprintln!(
            "seed {:>3}  P {:<8} {:<14} sum {:.6}  max {:.6}  iters {:>4}{}  {:.2}s",
            r.seed,
            r.p,
            r.policy.as_str(),
            r.sum_mse,
            r.max_mse,
            r.iterations,
            if r.converged { "" } else { " (unconverged)" },
            r.wall_time.as_secs_f64()
        );
    })?;
    let unconverged = rows.iter().filter(|r| !r.converged).count();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} of {} runs reached the iteration cap", rows.len());
    }
    match &cfg.out_csv {
        Some(path) => emit_csv(&rows, path)?,
        None => print!("{}", csv_string(&rows)),
    }
    if let Some(path) = &cfg.out_svg {
        emit_svg(&rows, path)?;
    }
    Ok(())
}

fn oracle(cfg: ConfigArgs) -> Result<()> {
    let cfg = cfg.load()?;
    let report = run_oracles(&cfg)?;
    for check in &report.checks {
        println!("{check}");
    }
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
        Err(HarnessError::Oracle(failed.join(", ")))
    }
}

fn track(cfg: ConfigArgs, policy: &str, p: f64, simulate: Option<usize>) -> Result<()> {
    let cfg = cfg.load()?;
    let name: PolicyName = policy.parse()?;
    let systems = generate_systems(&cfg, cfg.seed)?;
    let (row, ss) = run_point(&cfg, &systems, name, p)?;
    let res = &ss.result;
    println!("policy             {}", name);
    println!("seed               {}", cfg.seed);
    println!("P                  {}", p);
    println!("converged          {} after {} steps", row.converged, row.iterations);
    println!("sum MSE            {}", row.sum_mse);
    println!("max MSE            {}", row.max_mse);
    println!("SDP bound (sum)    {}", row.lower_sum);
    println!("SDP bound (max)    {}", row.lower_max);
    println!("objective lower    {}", res.objective_lower);
    println!("objective achieved {}", res.objective_achieved);
    if let Some(a) = &res.a_star {
        println!("gamma              {}", res.gamma);
        println!("pseudo-inverse     {}", res.pseudo_inverse);
        for (i, z) in a.iter().enumerate() {
            println!("a[{i}]               {:+.6} {:+.6}i", z.re, z.im);
        }
    }
    if let Some(r) = &res.relaxation {
        println!("t*                 {}", r.t_star);
        println!("rank one           {}", r.rank_one);
        println!("bisection steps    {}", r.bisection_iters);
    }
    if let Some(horizon) = simulate {
        let model = systems.for_mode(name.policy().mode().expect("named policies have a mode"));
        let trace = simulate_trace(model, &name.policy(), p, horizon, cfg.seed)?;
        let skip = (horizon / 10).min(500);
        println!("empirical MSE      {}", trace.empirical_mse(skip));
    }
    Ok(())
}

fn dump_sdp(cfg: ConfigArgs, kind: SdpKind, p: f64, t: f64, out: Option<PathBuf>) -> Result<()> {
    let cfg = cfg.load()?;
    let systems = generate_systems(&cfg, cfg.seed)?;
    let prior = predict_mse(&identity(cfg.m), &systems.vector);
    let problem = match kind {
        SdpKind::Minsum => minsum_problem(&prior, cfg.sigma_v_sq, p)?.0,
        SdpKind::Minmax => minmax_problem(&prior, cfg.sigma_v_sq, p)?.0,
        SdpKind::Feasibility => feasibility_problem(&prior, &systems.scalar.g, cfg.sigma_v_sq, p, t)?,
    };
    let text = problem.dump();
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| HarnessError::Io { path, source: e })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sweep { cfg, p_grid, policies, num_seeds, out_csv, out_svg } => {
            sweep(cfg, p_grid, policies, num_seeds, out_csv, out_svg)
        }
        Command::Oracle { cfg } => oracle(cfg),
        Command::Track { cfg, policy, p, simulate } => track(cfg, &policy, p, simulate),
        Command::DumpSdp { cfg, kind, p, t, out } => dump_sdp(cfg, kind, p, t, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
