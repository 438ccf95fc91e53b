//! Command line front end: transform polynomials, analyze a (P, A) pair,
//! run experiment campaigns, and render scatter plots.
//!
//! Exit codes: 0 success, 2 usage or I/O problems, 3 numerical rejection
//! (singular or near-singular input polynomial).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use mobius_sense::experiments::{
    run_experiment, write_csv, ExperimentConfig, ExperimentId, TrialRecord,
};
use mobius_sense::plot::{read_plot_data, render_svg, XAxis};
use mobius_sense::sensitivity::analyze_polynomial;
use mobius_sense::{coeff_norm_bound, mobius_transform, HomMatrixPolynomial, Mobius2x2};

#[derive(Parser)]
#[command(name = "mobius-sense", version, about = "Mobius transforms of matrix polynomials and their effect on eigenvalue sensitivity")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply a Mobius transformation to a polynomial JSON file.
    Transform {
        /// Input polynomial (JSON).
        #[arg(long)]
        input: PathBuf,
        /// Preset name (cayley+, cayley-, reversal, identity) or inline JSON.
        #[arg(long)]
        mobius: String,
        /// Output path for the transformed polynomial.
        #[arg(long)]
        output: PathBuf,
    },
    /// Eigenvalue sensitivity rows for one (P, A) pair, CSV on stdout.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        mobius: String,
        /// Weight scheme: absolute, polynorm, or coefficientwise.
        #[arg(long, default_value = "polynorm")]
        scheme: String,
    },
    /// Run one of the five standard experiments and write CSV plus manifest.
    Experiment {
        /// Experiment id, 1 through 5.
        #[arg(long)]
        id: u8,
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        /// desk (default) or paper.
        #[arg(long, default_value = "desk")]
        scale: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; the MOBIUS_SENSE_THREADS environment variable
        /// overrides this flag.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Render a scatter plot of a sensitivity CSV as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// x axis: k, rho, or cond.
        #[arg(long)]
        x: String,
        /// y axis; only q is supported.
        #[arg(long, default_value = "q")]
        y: String,
        /// Also draw the upper-bound values.
        #[arg(long)]
        bounds: bool,
        #[arg(long)]
        output: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn from_lib(e: mobius_sense::Error) -> CliError {
    use mobius_sense::Error::*;
    match e {
        NearSingular | EigensolveFailed => CliError::Numerical(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn read_poly(path: &Path) -> Result<HomMatrixPolynomial, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    HomMatrixPolynomial::from_json_str(&text).map_err(usage)
}

fn cmd_transform(input: &Path, spec: &str, output: &Path) -> Result<(), CliError> {
    let p = read_poly(input)?;
    let a = Mobius2x2::from_spec(spec).map_err(usage)?;
    let t = mobius_transform(&a, &p);
    fs::write(output, t.to_json_string())
        .map_err(|e| usage(format!("cannot write {}: {e}", output.display())))?;
    println!("norm_inf_A = {:.17e}", a.norm_inf());
    println!("norm_inf_A_inv = {:.17e}", a.inverse().norm_inf());
    println!("cond_inf_A = {:.17e}", a.cond_inf());
    println!("coeff_norm_bound = {:.17e}", coeff_norm_bound(&a, &p));
    Ok(())
}

fn cmd_analyze(input: &Path, spec: &str, scheme: &str) -> Result<(), CliError> {
    let p = read_poly(input)?;
    let a = Mobius2x2::from_spec(spec).map_err(usage)?;
    let scheme = scheme.parse().map_err(usage)?;
    if !p.is_square() {
        return Err(usage("analyze requires a square polynomial"));
    }
    let rows = analyze_polynomial(&a, &p, scheme).map_err(from_lib)?;
    let record = TrialRecord::standalone(rows, p.degree(), p.rows(), scheme);
    let stdout = std::io::stdout();
    write_csv(std::slice::from_ref(&record), stdout.lock()).map_err(usage)?;
    Ok(())
}

fn thread_count(flag: Option<usize>) -> Option<usize> {
    match std::env::var("MOBIUS_SENSE_THREADS") {
        Ok(v) => v.parse().ok(),
        Err(_) => flag,
    }
}

fn cmd_experiment(
    id: u8,
    seed: u64,
    scale: &str,
    out: &Path,
    threads: Option<usize>,
) -> Result<(), CliError> {
    let experiment = ExperimentId::from_index(id).map_err(usage)?;
    let cfg = match scale {
        "desk" => ExperimentConfig::desk(experiment, seed),
        "paper" => ExperimentConfig::paper(experiment, seed),
        other => return Err(usage(format!("scale must be desk or paper, got `{other}`"))),
    };
    fs::create_dir_all(out)
        .map_err(|e| usage(format!("cannot create {}: {e}", out.display())))?;

    let started = Instant::now();
    let records = match thread_count(threads) {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| usage(format!("thread pool: {e}")))?;
            pool.install(|| run_experiment(&cfg))
        }
        None => run_experiment(&cfg),
    }
    .map_err(from_lib)?;
    let wall = started.elapsed().as_secs_f64();

    let csv_path = out.join(format!("experiment{id}.csv"));
    let mut file = fs::File::create(&csv_path)
        .map_err(|e| usage(format!("cannot write {}: {e}", csv_path.display())))?;
    write_csv(&records, &mut file).map_err(usage)?;
    file.flush().map_err(usage)?;

    let rows: usize = records.iter().map(|r| r.rows.len()).sum();
    let dropped: usize = records.iter().map(|r| r.dropped_rows).sum();
    let manifest = serde_json::json!({
        "experiment": id,
        "scale": scale,
        "seed": seed,
        "config": cfg,
        "library_version": env!("CARGO_PKG_VERSION"),
        "wall_time_seconds": wall,
        "trials": records.len(),
        "rows": rows,
        "dropped_rows": dropped,
    });
    let manifest_path = out.join(format!("experiment{id}-manifest.json"));
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).map_err(usage)?,
    )
    .map_err(usage)?;

    println!("wrote {}", csv_path.display());
    println!("wrote {}", manifest_path.display());
    println!("trials = {}, rows = {rows}, dropped = {dropped}, wall = {wall:.2}s", records.len());
    Ok(())
}

fn cmd_plot(input: &Path, x: &str, y: &str, bounds: bool, output: &Path) -> Result<(), CliError> {
    if y != "q" {
        return Err(usage(format!("only --y q is supported, got `{y}`")));
    }
    let x = XAxis::from_flag(x).map_err(usage)?;
    let file = fs::File::open(input)
        .map_err(|e| usage(format!("cannot read {}: {e}", input.display())))?;
    let data = read_plot_data(file, x, bounds).map_err(usage)?;
    let svg = render_svg(&data);
    fs::write(output, svg)
        .map_err(|e| usage(format!("cannot write {}: {e}", output.display())))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Transform {
            input,
            mobius,
            output,
        } => cmd_transform(input, mobius, output),
        Cmd::Analyze {
            input,
            mobius,
            scheme,
        } => cmd_analyze(input, mobius, scheme),
        Cmd::Experiment {
            id,
            seed,
            scale,
            out,
            threads,
        } => cmd_experiment(*id, *seed, scale, out, *threads),
        Cmd::Plot {
            input,
            x,
            y,
            bounds,
            output,
        } => cmd_plot(input, x, y, *bounds, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
