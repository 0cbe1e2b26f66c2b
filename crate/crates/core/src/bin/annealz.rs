use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use annealz::curves::{action_1d, MetricOptions, MogCurve};
use annealz::harness::benchmark::{rows_to_csv, run_benchmark};
use annealz::harness::{exit, exit_code, run_estimate, run_validate, Check, RunConfig, Scale, Suite};
use annealz::{Error, Result};

#[derive(Parser)]
#[command(name = "annealz", version, about = "Annealing-based normalizing constant estimation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one estimator from a TOML config and write the JSON report.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to the config's `output`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark suite and write one CSV row per method.
    Benchmark {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value = "desk")]
        scale: String,
        /// Comma-separated subset of the suite's methods.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the W₂ metric derivative and action of the 1-D mixture curve.
    Action {
        #[arg(long)]
        target: String,
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long = "s-lo")]
        s_lo: f64,
        #[arg(long = "s-hi")]
        s_hi: f64,
        #[arg(long = "n-s", default_value_t = 91)]
        n_s: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named validation procedure.
    Validate {
        #[arg(long)]
        check: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Estimate { config, seed, out } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = out.or_else(|| cfg.output.clone().map(PathBuf::from));
            let report = run_estimate(&cfg)?;
            write_out(out.as_ref(), &(report.to_json() + "\n"))?;
            Ok(exit::OK)
        }
        Cmd::Benchmark { suite, scale, methods, seed, out } => {
            let rows = run_benchmark(suite.parse::<Suite>()?, scale.parse::<Scale>()?, methods.as_deref(), seed)?;
            write_out(out.as_ref(), &rows_to_csv(&rows))?;
            Ok(exit::OK)
        }
        Cmd::Action { target, m, r, s_lo, s_hi, n_s, out } => {
            if target != "mog1d" {
                return Err(Error::Config(format!("action supports --target mog1d only, got `{target}`")));
            }
            if !(0.0 < s_lo && s_lo < s_hi && s_hi < 1.0) {
                return Err(Error::Config("need 0 < s-lo < s-hi < 1".into()));
            }
            let curve = MogCurve { m };
            let rep = action_1d(&curve, s_lo, s_hi, n_s, &MetricOptions::for_range(s_lo, s_hi))?;
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            write_out(out.as_ref(), &rep.to_csv(rep.theta_action(&curve, r)))?;
            Ok(exit::OK)
        }
        Cmd::Validate { check, seed } => {
            let rep = run_validate(check.parse::<Check>()?, seed)?;
            println!("{rep}");
            Ok(if rep.passed() { exit::OK } else { exit::VALIDATION_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.cmd) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
