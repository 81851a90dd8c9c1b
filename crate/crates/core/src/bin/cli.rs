use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use parabolic_uniqueness::suite::{emit_plot_data, run_suite, Params, SuiteConfig, SuiteName};
use parabolic_uniqueness::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cli",
    version,
    about = "Numerical verification suites for backward uniqueness of parabolic operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML file with suite parameters; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON report path
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// CSV plot data path
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Weight ODE, closed forms and modulus registry
    Weight {
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long = "T")]
        t: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Littlewood-Paley partition, orthogonality, Bernstein and norm equivalences
    Lp {
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        ensemble: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Paraproduct identities, fitted constants and the positivity search
    Paraproduct {
        #[arg(long)]
        symbol: Option<PathBuf>,
        /// Order or `auto`
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        lambda0: Option<f64>,
        #[arg(long)]
        ensemble: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Coefficient invariants and mollifier estimates
    Coeffs {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        /// Run the mollifier sweep
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Carleman inequality harness
    Carleman {
        /// Coefficient spec or coeffs report
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        #[arg(long)]
        ensemble: Option<usize>,
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        m: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Non-uniqueness counterexample construction and checks
    Counterexample {
        #[arg(long = "N")]
        n: Option<usize>,
        /// Integer or `auto`
        #[arg(long)]
        j0: Option<String>,
        /// `all` or `none`
        #[arg(long)]
        verify: Option<String>,
        /// Grid output, `.json` or `.csv`
        #[arg(long)]
        emit_grid: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Every suite
    All {
        #[command(flatten)]
        common: Common,
    },
}

fn flags(cmd: Command) -> (SuiteName, Params, Common) {
    let mut p = Params::default();
    let (suite, common) = match cmd {
        Command::Weight {
            mu,
            alpha,
            gamma,
            t,
            common,
        } => {
            p = Params {
                mu,
                alpha,
                gamma,
                t_horizon: t,
                ..p
            };
            (SuiteName::Weight, common)
        }
        Command::Lp {
            field,
            s,
            grid_points,
            ensemble,
            common,
        } => {
            p = Params {
                field,
                s,
                grid_points,
                ensemble,
                ..p
            };
            (SuiteName::Lp, common)
        }
        Command::Paraproduct {
            symbol,
            m,
            lambda0,
            ensemble,
            common,
        } => {
            p = Params {
                symbol,
                m,
                lambda0,
                ensemble,
                ..p
            };
            (SuiteName::Paraproduct, common)
        }
        Command::Coeffs {
            family,
            alpha,
            mu,
            delta,
            t,
            depth,
            verify,
            common,
        } => {
            let verify = verify.then(|| "all".to_string());
            p = Params {
                family,
                alpha,
                mu,
                delta,
                t_horizon: t,
                depth,
                verify,
                ..p
            };
            (SuiteName::Coeffs, common)
        }
        Command::Carleman {
            coeffs,
            gammas,
            ensemble,
            t,
            mu,
            alpha,
            m,
            common,
        } => {
            p = Params {
                coeffs,
                gammas,
                ensemble,
                t_horizon: t,
                mu,
                alpha,
                m,
                ..p
            };
            (SuiteName::Carleman, common)
        }
        Command::Counterexample {
            n,
            j0,
            verify,
            emit_grid,
            common,
        } => {
            p = Params {
                n_intervals: n,
                j0,
                verify,
                emit_grid,
                ..p
            };
            (SuiteName::Counterexample, common)
        }
        Command::All { common } => (SuiteName::All, common),
    };
    p.seed = common.seed;
    (suite, p, common)
}

fn run(cli: Cli) -> Result<bool> {
    let (suite, over, common) = flags(cli.command);
    let base = match &common.config {
        Some(path) => Params::from_file(path)?,
        None => Params::default(),
    };
    let cfg = SuiteConfig {
        suite,
        params: base.merged(over),
        output_path: common.report.clone(),
    };
    let report = run_suite(&cfg)?;
    if let Some(path) = &common.csv {
        emit_plot_data(&report, path)?;
    }
    if cfg.output_path.is_none() {
        print!("{}", report.to_json()?);
    }
    for c in report.failures() {
        eprintln!(
            "FAIL {} = {} ({:?} {})",
            c.name, c.value, c.relation, c.threshold
        );
    }
    eprintln!(
        "{}: {}",
        report.suite,
        if report.passed { "pass" } else { "fail" }
    );
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Usage(_)) {
                eprintln!("see `cli --help`");
            }
            ExitCode::from(2)
        }
    }
}
