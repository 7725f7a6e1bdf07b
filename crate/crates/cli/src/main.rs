use anyhow::{bail, Context, Result};
use bridgewave_cli::commands::{self, RunOptions};
use bridgewave_cli::{report, Certificate, Config};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Validated traveling waves of the suspension bridge equation.
#[derive(Parser)]
#[command(name = "bridgewave", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// One thread and no wall-clock time, so certificates are reproducible
    /// byte for byte.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ConfigArg {
    /// TOML configuration (see presets/).
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Newton iteration from the initial guess; writes a coefficient file.
    Approx {
        #[command(flatten)]
        config: ConfigArg,
        /// Overrides the guess named in the config.
        #[arg(long)]
        guess: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Bound suite and radii check; writes a certificate.
    Certify {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Eigenvalue enclosure and stability verdict for a certified wave.
    Stability {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        coeffs: PathBuf,
        /// Successful bound certificate of the same coefficients.
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write a plain-text listing of every spectral interval.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Samples the approximate solution on a uniform grid; writes CSV.
    ExportGrid {
        #[arg(long)]
        coeffs: PathBuf,
        /// Points per axis as `M1xM2`.
        #[arg(long, default_value = "201x51")]
        resolution: String,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Human-readable summary of a certificate.
    Report {
        certificate: PathBuf,
        /// List every spectral interval.
        #[arg(long)]
        full: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn parse_resolution(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .context("resolution must look like 201x51")?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn setup_threads(cli: &Cli) -> Result<()> {
    let threads = match (cli.threads, cli.deterministic) {
        (Some(n), true) if n != 1 => bail!("--deterministic runs on one thread"),
        (_, true) => Some(1),
        (Some(0), _) => bail!("--threads must be positive"),
        (n, false) => n,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    setup_threads(&cli)?;
    let opts = RunOptions {
        deterministic: cli.deterministic,
    };
    match cli.cmd {
        Cmd::Approx { config, guess, out } => {
            let cfg = Config::load(&config.config)?;
            let s = commands::cmd_approx(&cfg, guess.as_deref())?;
            s.u.write_file(&out, &cfg.problem.c)?;
            println!("iterations {}", s.iterations);
            println!("residual {:e}", s.residual);
            println!("trace norm {:e}", s.trace_norm);
            println!("wrote {}", out.display());
        }
        Cmd::Certify {
            config,
            coeffs,
            out,
        } => {
            let cfg = Config::load(&config.config)?;
            let cert = commands::cmd_certify(&cfg, &coeffs, opts)?;
            cert.write(&out)?;
            print!("{}", report::render(&cert, false));
            println!("wrote {}", out.display());
        }
        Cmd::Stability {
            config,
            coeffs,
            certificate,
            out,
            report: text,
        } => {
            let cfg = Config::load(&config.config)?;
            let cert = commands::cmd_stability(&cfg, &coeffs, &certificate, opts)?;
            cert.write(&out)?;
            if let Some(path) = text {
                bridgewave::write_atomic(&path, report::render(&cert, true).as_bytes())?;
            }
            print!("{}", report::render(&cert, false));
            println!("wrote {}", out.display());
        }
        Cmd::ExportGrid {
            coeffs,
            resolution,
            out,
        } => {
            let (m1, m2) = parse_resolution(&resolution)?;
            let file = bridgewave::sequences::CoeffFile::read(&coeffs)?;
            let rows = commands::export_grid(&file.as_float(), m1, m2)?;
            commands::write_grid_csv(&rows, &out)?;
            println!("wrote {} points to {}", rows.len(), out.display());
        }
        Cmd::Report {
            certificate,
            full,
            out,
        } => {
            let cert = Certificate::read(&certificate)?;
            let text = report::render(&cert, full);
            match out {
                Some(path) => bridgewave::write_atomic(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
