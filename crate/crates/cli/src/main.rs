use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plap_cli::{estimate_sobolev_for, parse_scenario, run_file, self_test, suite, Report, RunOptions};

#[derive(Parser)]
#[command(name = "plap", version, about = "Weighted p-Laplacian gradient flow: runs, checks and reports")]
struct Cli {
    /// Output directory (per scenario for `run`, parent directory for `suite`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for `suite`; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Judge checks against the bare inner tolerance, without the factor 10.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one scenario and run its checks.
    Run { scenario: PathBuf },
    /// Run every `.scn` file in a directory.
    Suite { dir: PathBuf },
    /// Estimate the Sobolev constant for a scenario's weights.
    EstimateSobolev { scenario: PathBuf },
    /// Built-in runs with known outcomes.
    SelfTest {
        /// Report the checks of deliberately tampered runs (expected to fail).
        #[arg(long)]
        corrupt: bool,
    },
}

fn finish(report: &Report) -> ExitCode {
    print!("{}", report.summary());
    if report.pass() {
        println!("{}: PASS", report.scenario);
        ExitCode::SUCCESS
    } else {
        println!("{}: FAIL", report.scenario);
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let opts = RunOptions {
        out: cli.out,
        seed: cli.seed,
        strict: cli.strict,
    };
    let result = match cli.command {
        Command::Run { scenario } => run_file(&scenario, &opts).map(|o| {
            println!("artifacts in {}", o.out_dir.display());
            finish(&o.report)
        }),
        Command::Suite { dir } => suite(&dir, &opts).map(|s| {
            print!("{}", s.render());
            if s.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }),
        Command::EstimateSobolev { scenario } => parse_scenario(&scenario)
            .map_err(Into::into)
            .and_then(|mut s| {
                if let Some(seed) = opts.seed {
                    s.set_seed(seed);
                }
                estimate_sobolev_for(&s, &opts)
            })
            .map(|o| finish(&o.report)),
        Command::SelfTest { corrupt } => self_test(corrupt, opts.slack_factor()).map(|r| finish(&r)),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
