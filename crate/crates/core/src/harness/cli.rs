//! Command-line dispatch. Exit codes: 0 pass, 1 error, 2 verification
//! failure, 64 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{parse_grid, ExperimentConfig};
use super::io;
use super::pipeline::{
    aubry_stage, barrier_stage, critical_stage, ensure_stable, mather_stage, prepare, read_u0,
    run_pipeline, schedule_stage, u0_stage, verify_supplied, write_aubry_csv, write_barrier,
    write_u0,
};
use crate::error::{Error, Result};
use crate::mather::Flag;
use crate::models::stability_bounds;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const THREADS_ENV: &str = "WEAKKAM_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "weakkam",
    version,
    about = "Discrete weak KAM experiments on flat tori"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Momentum and speed bounds that size the stencil.
    Bounds(Common),
    /// Ergodic critical-value estimate with the minimum-mean-cycle cross-check.
    Critical(Common),
    /// Peierls barrier, Aubry set and Mather classes.
    Peierls(Common),
    /// Discounted solves over the schedule at the critical shift.
    Discounted(Common),
    /// Minimizing closed measure by linear programming.
    Mather(Common),
    /// The limit function u0.
    U0(Common),
    /// Full pipeline: all artifacts plus report.json.
    Converge(Common),
    /// Verify a supplied u0 dump against fresh solves.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Binary u0 dump (little-endian f64, one per node).
        #[arg(long)]
        u0: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Discount schedule overriding the config, e.g. `0.5,0.25,0.125`.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Grid sizes overriding the config: `200` or `32x32`.
    #[arg(long, value_parser = grid_arg)]
    pub grid: Option<GridSizes>,
    /// Output directory overriding the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (also `WEAKKAM_THREADS`; default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Grid sizes from `--grid`; a newtype so clap treats the flag as one value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSizes(pub Vec<usize>);

fn grid_arg(s: &str) -> std::result::Result<GridSizes, String> {
    parse_grid(s).map(GridSizes)
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Bounds(c)
            | Command::Critical(c)
            | Command::Peierls(c)
            | Command::Discounted(c)
            | Command::Mather(c)
            | Command::U0(c)
            | Command::Converge(c) => c,
            Command::Verify { common, .. } => common,
        }
    }
}

impl Common {
    /// The config with command-line overrides applied and re-validated.
    pub fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(l) = &self.lambda {
            cfg.schedule.lambdas = l.clone();
        }
        if let Some(GridSizes(g)) = &self.grid {
            cfg.problem.dim = g.len();
            cfg.problem.sizes = g.clone();
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Thread count from the flag, else the environment, else rayon's default.
fn thread_count(flag: Option<usize>) -> Result<usize> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a thread count, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

/// Parses `argv` and runs the command, writing messages to the given streams.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = thread_count(cli.command.common().threads).and_then(|threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let mut buf = Vec::new();
        let r = pool.install(|| run(&cli.command, &mut buf));
        let _ = out.write_all(&buf);
        r
    });
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value)?;
    writeln!(out, "{s}").map_err(|e| Error::io("<stdout>", e))
}

fn print_flags(out: &mut dyn Write, flags: &[Flag]) -> Result<()> {
    for f in flags {
        writeln!(
            out,
            "{:<28} {:<4} value={:e} threshold={:e}",
            f.name,
            format!("{:?}", f.status).to_lowercase(),
            f.value,
            f.threshold
        )
        .map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

/// Returns whether every check passed.
fn run(cmd: &Command, out: &mut Vec<u8>) -> Result<bool> {
    let cfg = cmd.common().load()?;
    let dir = cfg.output_dir.clone();
    match cmd {
        Command::Bounds(_) => {
            let spec = cfg.lagrangian()?;
            let samples = super::pipeline::bound_samples(&cfg);
            let level = crate::models::max_h_at_zero(&spec, samples);
            let b = stability_bounds(&spec, level, samples).map_err(|e| e.at_stage("bounds"))?;
            io::write_json(&dir.join("bounds.json"), &b)?;
            print_json(out, &b)?;
            Ok(true)
        }
        Command::Critical(_) => {
            let setup = prepare(&cfg)?;
            let est = critical_stage(&setup, &cfg)?;
            let delta = (est.c_est - setup.c_crit()).abs();
            let flag = Flag::at_most(
                "critical_cross_check",
                delta,
                cfg.schedule.verify.cross_check_tol,
                "|c_est − (−min mean cycle)|",
            );
            #[derive(Serialize)]
            struct CriticalOut<'a> {
                c_est: f64,
                c_cycle: f64,
                cross_check_delta: f64,
                estimate: &'a crate::discounted::CriticalEstimate,
                cycle: &'a crate::mather::MeanCycle,
            }
            let doc = CriticalOut {
                c_est: est.c_est,
                c_cycle: setup.c_crit(),
                cross_check_delta: delta,
                estimate: &est,
                cycle: &setup.cycle,
            };
            io::write_json(&dir.join("critical.json"), &doc)?;
            writeln!(
                out,
                "c_est = {:.12}  c_cycle = {:.12}",
                est.c_est,
                setup.c_crit()
            )
            .map_err(|e| Error::io("<stdout>", e))?;
            print_flags(out, std::slice::from_ref(&flag))?;
            Ok(flag.passed())
        }
        Command::Peierls(_) => {
            let setup = prepare(&cfg)?;
            let h = barrier_stage(&setup, &cfg)?;
            write_barrier(&dir, &h)?;
            ensure_stable(&h)?;
            let aubry = aubry_stage(&setup, &cfg, &h)?;
            write_aubry_csv(&dir.join("aubry.csv"), &aubry)?;
            io::write_json(&dir.join("aubry.json"), &aubry)?;
            writeln!(
                out,
                "residual = {:e}  aubry = {:?}  classes = {:?}",
                h.residual, aubry.nodes, aubry.classes
            )
            .map_err(|e| Error::io("<stdout>", e))?;
            Ok(true)
        }
        Command::Discounted(_) => {
            let setup = prepare(&cfg)?;
            let sols = schedule_stage(&setup, &cfg)?;
            for (i, s) in sols.iter().enumerate() {
                s.write(&dir.join(format!("u_lambda_{i:02}.bin")))?;
                writeln!(
                    out,
                    "lambda = {:e}  iterations = {}  range = [{:.9}, {:.9}]",
                    s.lambda,
                    s.iterations,
                    s.values.min(),
                    s.values.max()
                )
                .map_err(|e| Error::io("<stdout>", e))?;
            }
            Ok(true)
        }
        Command::Mather(_) => {
            let setup = prepare(&cfg)?;
            let lp = mather_stage(&setup)?;
            lp.measure.write_csv(&dir.join("mather_measure.csv"))?;
            let flag = Flag::at_most(
                "mather_lp_vs_cycle",
                (lp.value - setup.cycle.mean).abs(),
                cfg.schedule.verify.lp_tol,
                "|LP value − min mean cycle|",
            );
            io::write_json(&dir.join("mather.json"), &lp.summary())?;
            print_json(out, &lp.summary())?;
            print_flags(out, std::slice::from_ref(&flag))?;
            Ok(flag.passed())
        }
        Command::U0(_) => {
            let setup = prepare(&cfg)?;
            let est = critical_stage(&setup, &cfg)?;
            let h = barrier_stage(&setup, &cfg)?;
            ensure_stable(&h)?;
            let lp = mather_stage(&setup)?;
            let r = u0_stage(&setup, &cfg, &h, &lp, est.c_est)?;
            let full = r.extend(&h);
            write_u0(&dir, &r, &full)?;
            writeln!(out, "u0 range = [{:.12}, {:.12}]", full.min(), full.max())
                .map_err(|e| Error::io("<stdout>", e))?;
            Ok(true)
        }
        Command::Converge(_) => {
            let report = run_pipeline(&cfg)?;
            writeln!(
                out,
                "c_est = {:.12}  c_cycle = {:.12}  plateau = {:e}",
                report.critical.c_est, report.critical.c_cycle, report.verification.plateau
            )
            .map_err(|e| Error::io("<stdout>", e))?;
            print_flags(out, &report.flags)?;
            Ok(report.passed)
        }
        Command::Verify { u0, .. } => {
            let nodes: usize = cfg.problem.sizes.iter().product();
            let u = read_u0(u0, nodes)?;
            let (report, passed) = verify_supplied(&cfg, &u)?;
            io::write_json(&dir.join("verify.json"), &report)?;
            print_flags(out, &report.flags)?;
            Ok(passed)
        }
    }
}
