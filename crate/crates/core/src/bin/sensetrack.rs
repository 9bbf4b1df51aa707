use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sensetrack::analysis::{stage_thresholds, structure_battery, wwlb_table, Check};
use sensetrack::config::{load_scenario, serialize_scenario};
use sensetrack::dp::{backward_induction, build_grid, DpOptions, QuadratureSpec};
use sensetrack::model::Scenario;
use sensetrack::output::{write_checks, write_controls, write_metrics, write_policy, write_thresholds, write_wwlb};
use sensetrack::sim::{default_lambdas, default_scenario, monte_carlo, sweep_lambda, Overrides, ScenarioKind, SimOptions};
use sensetrack::strategy::{CeWwlbConfig, CeWwlbPlanner, StrategySpec};
use sensetrack::wwlb::{TestPointSet, WwlbMode};
use sensetrack::{Error, Result};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "SENSETRACK_THREADS";

#[derive(Parser)]
#[command(name = "sensetrack", version, about = "Active state tracking with sensing costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a scenario, emit its canonical form.
    Validate(Common),
    /// Backward induction; emits the policy table.
    SolveDp {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        dp: DpArgs,
        /// Also write stage thresholds (two states only).
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Monte Carlo metrics of one strategy.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value = "myopic")]
        strategy: String,
        #[command(flatten)]
        dp: DpArgs,
        #[command(flatten)]
        wwlb: WwlbArgs,
    },
    /// Trade-off curves over a list of λ values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McArgs,
        /// Comma-separated strategies: dp, myopic, ce-wwlb, ea:<count>, fixed:<id>.
        #[arg(long, value_delimiter = ',', default_value = "dp,myopic,ce-wwlb")]
        strategy: Vec<String>,
        #[command(flatten)]
        dp: DpArgs,
        #[command(flatten)]
        wwlb: WwlbArgs,
    },
    /// Sequential bound scores along the CE-WWLB plan.
    Wwlb {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        wwlb: WwlbArgs,
    },
    /// Structural verification battery.
    Structure {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        dp: DpArgs,
    },
    /// List controls with costs and allocations.
    EnumerateControls(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file, or `builtin:<kind>` (two_state_scalar, crossing, two_sensor, body_sensing_like).
    #[arg(long)]
    scenario: String,
    /// Output path; `-` for standard output.
    #[arg(long, visible_alias = "output", default_value = "-")]
    out: String,
    /// Trade-off weight(s); a list only for `sweep`.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
}

#[derive(Args)]
struct DpArgs {
    /// Grid resolution (points per unit along each coordinate).
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    #[arg(long, default_value_t = 64)]
    quad_order: usize,
    #[arg(long, default_value_t = 4096)]
    qmc_samples: usize,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Exact,
}

#[derive(Args)]
struct WwlbArgs {
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
}

impl DpArgs {
    fn options(&self, seed: u64) -> Result<DpOptions> {
        let quad = QuadratureSpec { scalar_order: self.quad_order, vector_samples: self.qmc_samples, seed };
        quad.validate()?;
        Ok(DpOptions { quad, ..DpOptions::default() })
    }
}

impl WwlbArgs {
    fn config(&self) -> CeWwlbConfig {
        match self.mode {
            ModeArg::Exact => CeWwlbConfig::default(),
            ModeArg::Paper => {
                CeWwlbConfig { mode: WwlbMode::Paper, test_points: TestPointSet::Permutations, ..CeWwlbConfig::default() }
            }
        }
    }
}

fn load(common: &Common) -> Result<Scenario> {
    let base = match common.scenario.strip_prefix("builtin:") {
        Some(kind) => default_scenario(ScenarioKind::parse(kind)?, Overrides::default())?,
        None => load_scenario(&PathBuf::from(&common.scenario))?,
    };
    match common.lambda.as_slice() {
        [] => Ok(base),
        [l] => base.with_lambda(*l),
        _ => Err(Error::InvalidScenario("a single --lambda is expected here".into())),
    }
}

fn open_out(path: &str) -> Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate(common) => {
            let s = load(&common)?;
            let mut out = open_out(&common.out)?;
            out.write_all(serialize_scenario(&s).as_bytes())?;
            out.flush()?;
            eprintln!("ok: {} states, {} controls", s.n(), s.num_controls());
        }
        Command::SolveDp { common, dp, thresholds } => {
            let s = load(&common)?;
            let grid = Arc::new(build_grid(s.n(), dp.grid)?);
            let sol = backward_induction(&s, grid, &dp.options(0)?)?;
            if sol.fallbacks > 0 {
                eprintln!("warning: {} interpolations fell back to the nearest grid point", sol.fallbacks);
            }
            write_policy(open_out(&common.out)?, &sol)?;
            if let Some(path) = thresholds {
                write_thresholds(open_out(path.to_str().unwrap_or("-"))?, &stage_thresholds(&sol)?)?;
            }
        }
        Command::Simulate { common, mc, strategy, dp, wwlb } => {
            let s = load(&common)?;
            let spec = StrategySpec::parse(&strategy, dp.grid, dp.options(0)?, wwlb.config())?;
            let report = monte_carlo(&s, &spec.build(&s)?, mc.runs, mc.seed)?;
            write_metrics(open_out(&common.out)?, &[report])?;
        }
        Command::Sweep { mut common, mc, strategy, dp, wwlb } => {
            let lambdas = if common.lambda.is_empty() { default_lambdas() } else { std::mem::take(&mut common.lambda) };
            let s = load(&common)?;
            let opts = dp.options(0)?;
            let family = strategy
                .iter()
                .map(|t| StrategySpec::parse(t, dp.grid, opts, wwlb.config()))
                .collect::<Result<Vec<_>>>()?;
            let rows = sweep_lambda(&s, &family, &lambdas, mc.runs, mc.seed, SimOptions::default())?;
            write_metrics(open_out(&common.out)?, &rows)?;
        }
        Command::Wwlb { common, wwlb } => {
            let s = load(&common)?;
            let planner = CeWwlbPlanner::new(&s, wwlb.config())?;
            write_wwlb(open_out(&common.out)?, &wwlb_table(&planner, &s)?)?;
        }
        Command::Structure { common, dp } => {
            let s = load(&common)?;
            let grid = Arc::new(build_grid(s.n(), dp.grid)?);
            let sol = backward_induction(&s, grid, &dp.options(0)?)?;
            let checks = structure_battery(&s, &sol)?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            write_checks(open_out(&common.out)?, &checks.into_iter().map(Check::into_tuple).collect::<Vec<_>>())?;
            if failed > 0 {
                eprintln!("{failed} structural checks failed");
            }
        }
        Command::EnumerateControls(common) => {
            let s = load(&common)?;
            write_controls(open_out(&common.out)?, &s)?;
        }
    }
    Ok(())
}

fn configure_threads() {
    let Ok(v) = std::env::var(THREADS_ENV) else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("warning: ignoring {THREADS_ENV}={v}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.invariant());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
