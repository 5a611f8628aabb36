use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use upif_core::precoder::{
    read_precoder, rotation_2d, type1_search, type2_rotation, write_precoder, xcode_precoder, xprecoder_search, Precoder,
    PrecoderKind, TYPE1_GRID_STEP,
};
use upif_core::sim::{diversity_slope, landscape_sweep, run_curve, write_landscape_csv, ErrorCurve, SimConfig};
use upif_core::{codebook::Codebook, Error, Result};

#[derive(Parser)]
#[command(name = "upif", version, about = "Unitary precoded integer-forcing MIMO simulator")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo codeword error rate curve.
    Curve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides master_seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Type I angle and coding gain over random 2x2 channels.
    Landscape {
        #[arg(long, default_value_t = 10_000)]
        channels: usize,
        #[arg(long, default_value_t = 100.0)]
        rho: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diversity slope of a curve CSV.
    Slope {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        cer_low: f64,
        #[arg(long, default_value_t = 1e-2)]
        cer_high: f64,
    },
    /// Precoder construction and inspection.
    Precoder {
        #[command(subcommand)]
        action: PrecoderAction,
    },
}

#[derive(Subcommand)]
enum PrecoderAction {
    /// Writes a precoder as a text matrix file.
    Export(ExportArgs),
    /// Reads a precoder file and prints its metadata.
    Show {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct ExportArgs {
    /// identity, rotation, type1, type2, xcode or xprecoder.
    #[arg(long)]
    kind: String,
    /// Real dimension (identity, type2).
    #[arg(long)]
    dim: Option<usize>,
    /// Complex antenna count (xcode).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    qam: Option<u32>,
    /// Angle in radians (rotation).
    #[arg(long)]
    theta: Option<f64>,
    /// Comma-separated singular values (type1, xprecoder).
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn missing(flag: &str, kind: &str) -> Error {
    Error::Parse(format!("--{flag} is required for --kind {kind}"))
}

fn build_precoder(a: &ExportArgs) -> Result<Precoder> {
    let kind: PrecoderKind = a.kind.parse()?;
    let k = a.kind.as_str();
    match kind {
        PrecoderKind::Identity => Ok(Precoder::identity(a.dim.ok_or_else(|| missing("dim", k))?)),
        PrecoderKind::Rotation => rotation_2d(a.theta.ok_or_else(|| missing("theta", k))?),
        PrecoderKind::Type1 => {
            let sigma = a.sigma.as_deref().ok_or_else(|| missing("sigma", k))?;
            type1_search(sigma, a.rho.ok_or_else(|| missing("rho", k))?, TYPE1_GRID_STEP)
        }
        PrecoderKind::Type2 => Ok(type2_rotation(a.dim.ok_or_else(|| missing("dim", k))?)?.precoder),
        PrecoderKind::XCode => {
            xcode_precoder(a.n.ok_or_else(|| missing("n", k))?, a.qam.ok_or_else(|| missing("qam", k))?)
        }
        PrecoderKind::XPrecoder => {
            let sigma = a.sigma.as_deref().ok_or_else(|| missing("sigma", k))?;
            let g = Codebook::from_qam(a.qam.ok_or_else(|| missing("qam", k))?)?.g();
            xprecoder_search(sigma, g, TYPE1_GRID_STEP)
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Curve { config, seed, out } => {
            let mut cfg = SimConfig::parse(&std::fs::read_to_string(&config)?)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let curve = run_curve(&cfg)?;
            let mut w = output(out.as_deref())?;
            curve.write_csv(&mut w)?;
            w.flush()?;
            if !curve.is_complete() {
                eprintln!("warning: some points stopped at max_trials before reaching min_errors");
            }
        }
        Command::Landscape { channels, rho, seed, out } => {
            let rows = landscape_sweep(channels, rho, seed)?;
            let mut w = output(out.as_deref())?;
            write_landscape_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Command::Slope { input, cer_low, cer_high } => {
            let curve = ErrorCurve::read_csv(BufReader::new(File::open(&input)?))?;
            println!("{:.6}", diversity_slope(&curve, cer_low, cer_high)?);
        }
        Command::Precoder { action: PrecoderAction::Export(args) } => {
            let p = build_precoder(&args)?;
            let mut w = output(args.out.as_deref())?;
            write_precoder(&p, &mut w)?;
            w.flush()?;
        }
        Command::Precoder { action: PrecoderAction::Show { input } } => {
            let p = read_precoder(BufReader::new(File::open(&input)?))?;
            println!("kind: {}", p.kind());
            println!("dim: {}", p.dim());
            match p.theta() {
                Some(t) => println!("theta: {t:.16e}"),
                None => println!("theta: none"),
            }
            println!("label: {}", p.label());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
