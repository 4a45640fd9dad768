use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dsrs::certify::QFamily;
use dsrs::synthetic::{default_grid, GridConfig};
use dsrs_cli::record::QFamilyArg;
use dsrs_cli::simulate::{Mode, SimulateArgs};
use dsrs_cli::{certify, oracle, sample, simulate, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "dsrs", version, about = "Certified radii from two smoothing distributions")]
struct Cli {
    #[command(flatten)]
    run: RunFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunFlags {
    /// Total significance level.
    #[arg(long, global = true, default_value_t = 0.001)]
    alpha: f64,
    /// Quadrature error tolerance.
    #[arg(long = "delta-int", global = true, default_value_t = dsrs::certify::DEFAULT_DELTA_INT)]
    delta_int: f64,
    #[arg(long = "eps-radius", global = true, default_value_t = dsrs::certify::DEFAULT_EPS_RADIUS)]
    eps_radius: f64,
    /// Largest radius tried; defaults to sigma * sqrt(d).
    #[arg(long, global = true)]
    rmax: Option<f64>,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Pool all draws into P when every first-half P draw succeeds.
    #[arg(long, global = true)]
    fallback: bool,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify line-delimited JSON records; `-` reads stdin.
    Certify { input: PathBuf },
    /// Radius curves for a classifier right on a Gaussian ball.
    Simulate {
        #[arg(long, value_enum, default_value = "concentration")]
        mode: Mode,
        #[arg(long = "d", value_delimiter = ',', default_values_t = [1000u64, 10000, 100000])]
        dims: Vec<u64>,
        /// Sample counts; `inf` means exact `Q_A = 1`.
        #[arg(long = "n", value_delimiter = ',', default_values_t = ["1000".to_string(), "100000".to_string(), "10000000".to_string()])]
        counts: Vec<String>,
        /// Exponents `a` of the relaxed holding probability `exp(-d^a)`.
        #[arg(long = "exponent", value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5])]
        exponents: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long = "p-con", default_value_t = 0.5)]
        p_con: f64,
        #[arg(long = "pa", default_value_t = 0.6)]
        pa: f64,
    },
    /// Soundness and dominance sweep over the ball-classifier grid.
    OracleCheck {
        #[arg(long = "q-family", value_enum)]
        q_family: Option<QFamilyArg>,
        #[arg(long = "d", value_delimiter = ',')]
        dims: Option<Vec<u64>>,
        #[arg(long = "sigma", value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
        #[arg(long = "pa", value_delimiter = ',')]
        pas: Option<Vec<f64>>,
        #[arg(long)]
        k: Option<u64>,
        /// Push each certified radius 2 eps-radius past the true one
        /// (harness self-test).
        #[arg(long = "inject-fault")]
        inject_fault: bool,
    },
    /// Draw input records from the ball classifier.
    Sample {
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long = "q-family", value_enum, default_value = "trunc")]
        q_family: QFamilyArg,
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Mass of P on the classifier's ball.
        #[arg(long = "ball-mass", default_value_t = 0.75)]
        ball_mass: f64,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        records: usize,
        #[arg(long = "id-prefix", default_value = "r")]
        id_prefix: String,
    },
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn read_lines(input: &PathBuf) -> io::Result<Vec<String>> {
    if input.as_os_str() == "-" {
        io::stdin().lock().lines().collect()
    } else {
        BufReader::new(File::open(input)?).lines().collect()
    }
}

fn grid_from(dims: Option<Vec<u64>>, sigmas: Option<Vec<f64>>, pas: Option<Vec<f64>>, k: Option<u64>) -> Result<Vec<GridConfig>, CliError> {
    if dims.is_none() && sigmas.is_none() && pas.is_none() && k.is_none() {
        return Ok(default_grid());
    }
    let base = default_grid();
    let dims = dims.unwrap_or_else(|| vec![20, 784, 3072]);
    let sigmas = sigmas.unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
    let pas = pas.unwrap_or_else(|| base.iter().take(3).map(|c| c.target_pa).collect());
    let mut out = Vec::new();
    for &d in &dims {
        let k = match k {
            Some(k) => k,
            None => dsrs::synthetic::grid_k(d)?,
        };
        for &sigma in &sigmas {
            for &target_pa in &pas {
                out.push(GridConfig { d, sigma, k, target_pa });
            }
        }
    }
    Ok(out)
}

fn parse_counts(raw: &[String]) -> Result<Vec<Option<u64>>, CliError> {
    raw.iter()
        .map(|s| match s.trim() {
            "inf" => Ok(None),
            v => v.parse().map(Some).map_err(|_| CliError::Usage(format!("bad sample count {v:?}"))),
        })
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let f = &cli.run;
    let cfg = RunConfig {
        alpha: f.alpha,
        delta_int: f.delta_int,
        eps_radius: f.eps_radius,
        r_max: f.rmax,
        workers: f.workers,
        seed: f.seed,
        fallback: f.fallback,
    }
    .validated()?;
    let mut out = open_output(&f.output)?;
    let code = match cli.command {
        Command::Certify { input } => {
            let lines = read_lines(&input)?;
            writeln!(out, "{}", certify::HEADER)?;
            let mut failed = false;
            for res in certify::certify_lines(&lines, &cfg)? {
                match res {
                    Ok(row) => writeln!(out, "{}", row.to_csv())?,
                    Err((id, e)) => {
                        failed = true;
                        eprintln!("{id}: {e}");
                        writeln!(out, "{}", certify::error_csv(&id))?;
                    }
                }
            }
            if failed { ExitCode::from(1) } else { ExitCode::SUCCESS }
        }
        Command::Simulate { mode, dims, counts, exponents, sigma, p_con, pa } => {
            let args = SimulateArgs { mode, dims, counts: parse_counts(&counts)?, exponents, sigma, p_con, pa };
            writeln!(out, "{}", simulate::HEADER)?;
            for line in simulate::simulate(&args, &cfg)? {
                writeln!(out, "{line}")?;
            }
            ExitCode::SUCCESS
        }
        Command::OracleCheck { q_family, dims, sigmas, pas, k, inject_fault } => {
            let grid = grid_from(dims, sigmas, pas, k)?;
            let families = match q_family {
                Some(QFamilyArg::Trunc) => vec![QFamily::Truncated],
                Some(QFamilyArg::Var) => vec![QFamily::Variance],
                None => vec![QFamily::Truncated, QFamily::Variance],
            };
            let report = oracle::oracle_check(&grid, &families, inject_fault, &cfg)?;
            writeln!(out, "{}", oracle::HEADER)?;
            for line in &report.lines {
                writeln!(out, "{line}")?;
            }
            eprintln!(
                "{} rows, {} violations, {} abstained, {} errors",
                report.lines.len(),
                report.violations,
                report.abstains,
                report.errors
            );
            if report.violations > 0 {
                ExitCode::from(2)
            } else if report.errors > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Sample { d, sigma, k, q_family, t, beta, ball_mass, n, records, id_prefix } => {
            let args = sample::SampleArgs { d, sigma, k, q_family, t, beta, ball_mass, n, records, id_prefix };
            for rec in sample::sample(&args, &cfg)? {
                writeln!(out, "{}", serde_json::to_string(&rec).map_err(|e| CliError::Record(e.to_string()))?)?;
            }
            ExitCode::SUCCESS
        }
    };
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
