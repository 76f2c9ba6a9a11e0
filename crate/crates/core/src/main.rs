use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wmnc::commands::{self, LimitopArgs, MncArgs, UiArgs};
use wmnc::noncompactness::CoverMode;
use wmnc::report::RunReport;
use wmnc::wasserstein::Method;

/// Wasserstein-1 distances and measures of non-compactness for families of
/// finitely supported probability measures.
///
/// Set WMNC_THREADS to bound the worker pool.
#[derive(Parser)]
#[command(name = "wmnc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// W1 distance between two measure files (.json or .csv)
    W1 {
        p: PathBuf,
        q: PathBuf,
        #[arg(long, default_value = "auto")]
        method: Method,
        /// Include the coupling matrix and potential values
        #[arg(long)]
        coupling: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Bracket for the relative Hausdorff measure of non-compactness
    Mnc {
        family: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "exact")]
        mode: CoverMode,
        /// JSON list of candidate center measures
        #[arg(long)]
        centers: Option<PathBuf>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Bracket for the measure of non-uniform integrability
    Ui {
        family: PathBuf,
        /// JSON list of center points
        #[arg(long)]
        centers: Option<PathBuf>,
        /// Comma-separated increasing radii
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Limit operators of a sequence against a target measure
    Limitop {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 1)]
        tail_start: usize,
        #[arg(long)]
        horizon: usize,
        /// JSON list of test-function expression trees
        #[arg(long)]
        test_fns: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare both brackets on a family and check tightness
    Verify {
        family: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the bounded, uniformly integrable, non-tight family
    Counterexample {
        #[arg(long = "M", default_value_t = 1.0, allow_negative_numbers = true)]
        m: f64,
        #[arg(long = "N", default_value_t = 100)]
        n: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the acceptance suite
    Selftest {
        #[arg(long, default_value_t = 20240917)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("WMNC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| format!("WMNC_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn emit(report: &RunReport, path: Option<&PathBuf>) -> std::io::Result<()> {
    let text = report.to_json();
    match path {
        Some(p) => std::fs::write(p, text + "\n"),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r,
            }
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("wmnc: {e}");
        return ExitCode::from(2);
    }
    let echo = argv.into_iter().skip(1).collect::<Vec<_>>();
    let (result, target) = match &cli.command {
        Command::W1 {
            p,
            q,
            method,
            coupling,
            report,
        } => (commands::cmd_w1(echo, p, q, *method, *coupling), report),
        Command::Mnc {
            family,
            k,
            mode,
            centers,
            eps,
            report,
        } => {
            let args = MncArgs {
                k: *k,
                mode: *mode,
                centers: centers.as_deref(),
                eps: *eps,
            };
            (commands::cmd_mnc(echo, family, &args), report)
        }
        Command::Ui {
            family,
            centers,
            radii,
            horizon,
            report,
        } => {
            let args = UiArgs {
                centers: centers.as_deref(),
                radii: radii.clone(),
                horizon: *horizon,
            };
            (commands::cmd_ui(echo, family, &args), report)
        }
        Command::Limitop {
            family,
            target,
            tail_start,
            horizon,
            test_fns,
            report,
        } => {
            let args = LimitopArgs {
                family,
                target,
                tail_start: *tail_start,
                horizon: *horizon,
                test_fns: test_fns.as_deref(),
            };
            (commands::cmd_limitop(echo, &args), report)
        }
        Command::Verify { family, report } => (commands::cmd_verify(echo, family), report),
        Command::Counterexample { m, n, report } => {
            (commands::cmd_counterexample(echo, *m, *n), report)
        }
        Command::Selftest { seed, report } => (commands::cmd_selftest(echo, *seed), report),
    };
    match result {
        Ok(report) => {
            if let Err(e) = emit(&report, target.as_ref()) {
                eprintln!("wmnc: cannot write report: {e}");
                return ExitCode::from(2);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("wmnc: an asserted property failed; see the report");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("wmnc: {e}");
            ExitCode::from(2)
        }
    }
}
