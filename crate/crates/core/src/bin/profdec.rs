use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use profdec::harness::{
    self, run_extract, run_mterm, run_norm, run_suite, HarnessError, Knobs, RunOutcome, Scenario, EXIT_INPUT,
};
use profdec::seqspace::{self, SpaceFamily, SpaceSpec};
use profdec::synthesis::{analyze, GridFunction, WaveletFamily};

#[derive(Parser)]
#[command(name = "profdec", version, about = "Wavelet profile decomposition experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Sequence norm of a coefficient file, or of an analyzed sample grid.
    Norm {
        #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
        coeffs: Option<PathBuf>,
        /// Sample grid (headed or plain numeric text).
        #[arg(long)]
        grid: Option<PathBuf>,
        /// e.g. "besov 0.5 2 2", "triebel 0 2 2", "lebesgue 2", "bmo".
        #[arg(long)]
        space: String,
        /// Dimension for empty coefficient files.
        #[arg(long)]
        dim: Option<usize>,
        /// Wavelet family for --grid (default: header, else haar).
        #[arg(long)]
        family: Option<String>,
        /// Cascade levels for --grid (default: all).
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Best M-term errors, bound envelope and fitted rate.
    Mterm {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Profile extraction with remainders, orthogonality and stability reports.
    Extract {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        mmax: Option<usize>,
    },
    /// Property suite plus every shipped scenario.
    Suite {
        #[command(flatten)]
        common: Common,
        /// Random cases per property.
        #[arg(long, default_value_t = 64)]
        count: usize,
    },
    /// Write the shipped scenarios and their materialized fixtures.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn read(path: &PathBuf) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
}

fn global_pool(jobs: usize) {
    // Fails only if a pool already exists, which is fine.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
}

fn report(outcome: &RunOutcome) -> ExitCode {
    for note in &outcome.notes {
        println!("note: {note}");
    }
    for (name, ok) in &outcome.checks {
        println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    ExitCode::from(outcome.exit_code() as u8)
}

fn grid_norm(path: &PathBuf, space: &str, family: Option<&str>, levels: Option<usize>) -> Result<f64, HarnessError> {
    let (g, header_family) = GridFunction::from_text(&read(path)?)?;
    let family = match family {
        Some(f) => f.parse()?,
        None => header_family.unwrap_or(WaveletFamily::Haar),
    };
    let fam: SpaceFamily = space.parse()?;
    let spec = SpaceSpec::new(fam, g.shape().dim)?;
    let a = analyze(&g, family, levels.unwrap_or(g.shape().max_levels()), &spec)?;
    Ok(seqspace::norm(&a.details, &spec)?)
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Norm {
            coeffs,
            grid,
            space,
            dim,
            family,
            levels,
        } => {
            let value = match (coeffs, grid) {
                (Some(c), _) => run_norm(&read(&c)?, &space, dim)?,
                (None, Some(g)) => grid_norm(&g, &space, family.as_deref(), levels)?,
                (None, None) => unreachable!("clap requires one"),
            };
            println!("{value:?}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Mterm { scenario, common } => {
            global_pool(common.jobs);
            let s = Scenario::load(&scenario)?;
            let knobs = Knobs {
                seed: common.seed,
                ..Knobs::default()
            };
            Ok(report(&run_mterm(&s, &common.out, &knobs)?))
        }
        Command::Extract {
            scenario,
            common,
            window,
            threshold,
            mmax,
        } => {
            global_pool(common.jobs);
            let s = Scenario::load(&scenario)?;
            let knobs = Knobs {
                seed: common.seed,
                window,
                threshold,
                m_max: mmax,
            };
            Ok(report(&run_extract(&s, &common.out, &knobs)?))
        }
        Command::Suite { common, count } => {
            let outcome = run_suite(&common.out, common.seed.unwrap_or(0), count, common.jobs)?;
            Ok(report(&outcome))
        }
        Command::Fixtures { out, seed } => {
            harness::write_fixtures(&out, seed)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
