use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use nctlab::geometry::{chern_grassmann, curvature_field};
use nctlab::harness::{all_passed, emit_report, run_suite, ReportFormat, SuiteConfig};
use nctlab::heis::witness_fibers;
use nctlab::sections::{ModuliParams, QuasiSection, DEFAULT_SERIES_N};
use nctlab::Error;

#[derive(Parser)]
#[command(name = "nctlab", version, about = "Verification suite for noncommutative-torus modules and elliptic line bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and write a report.
    Verify {
        /// Glob over check names, e.g. `chern-*`.
        #[arg(long)]
        filter: Option<String>,
        /// Config file of `key = value` lines.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Degree of the Grassmannian line bundle as a JSON record.
    Chern {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
        #[arg(long)]
        grid: usize,
        /// Also write the curvature field as CSV `x,y,omega_im`.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Sample a WBZ section over the fundamental parallelogram as CSV `x,y,re,im`.
    DumpSection {
        #[arg(long)]
        p: i64,
        /// Modular parameter as `RE,IM`.
        #[arg(long, allow_negative_numbers = true)]
        tau: String,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        grid: usize,
    },
}

fn parse_tau(s: &str) -> Result<Complex64, Error> {
    let (re, im) = s.split_once(',').ok_or_else(|| Error::Usage(format!("--tau expects RE,IM, got `{s}`")))?;
    let part = |v: &str| v.trim().parse::<f64>().map_err(|e| Error::Usage(format!("--tau `{s}`: {e}")));
    Ok(Complex64::new(part(re)?, part(im)?))
}

fn verify(
    filter: Option<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: &str,
) -> Result<bool, Error> {
    let format: ReportFormat = format.parse()?;
    let mut cfg = match config {
        Some(path) => SuiteConfig::parse(&fs::read_to_string(&path)?)?,
        None => SuiteConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    let results = run_suite(&cfg, filter.as_deref())?;
    let path = emit_report(&results, format, &cfg.output_dir)?;
    let failed = results.iter().filter(|r| !r.pass).count();
    for r in results.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {}[{}] metric={:e} tolerance={:e} {}", r.name, r.index, r.metric, r.tolerance, r.params);
    }
    println!("{} checks, {} passed, {} failed; report at {}", results.len(), results.len() - failed, failed, path.display());
    Ok(all_passed(&results))
}

fn chern(p: i64, grid: usize, field: Option<PathBuf>) -> Result<bool, Error> {
    let result = chern_grassmann(p, grid)?;
    if let Some(path) = field {
        fs::write(path, curvature_field(p, grid, grid)?.to_csv())?;
    }
    println!("{}", serde_json::to_string(&result)?);
    Ok(true)
}

fn dump_section(p: i64, tau: &str, theta: f64, grid: usize) -> Result<bool, Error> {
    if p < 1 {
        return Err(Error::Usage(format!("--p must be positive, got {p}")));
    }
    if grid == 0 {
        return Err(Error::Usage("--grid must be positive".into()));
    }
    let params = ModuliParams::new(theta, parse_tau(tau)?, p)?;
    let section = QuasiSection::new(params, witness_fibers(p as usize)?, DEFAULT_SERIES_N)?;
    let mut csv = String::from("x,y,re,im\n");
    for (x, y, v) in section.sample_grid(grid) {
        csv.push_str(&format!("{x},{y},{},{}\n", v.re, v.im));
    }
    print!("{csv}");
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Verify { filter, config, seed, out, format } => verify(filter, config, seed, out, &format),
        Command::Chern { p, grid, field } => chern(p, grid, field),
        Command::DumpSection { p, tau, theta, grid } => dump_section(p, &tau, theta, grid),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Usage(_) | Error::Parse(_) | Error::InvalidArgument(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
