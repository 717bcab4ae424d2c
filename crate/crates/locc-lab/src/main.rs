//! `locc-lab`: run multi-copy local-discrimination experiments from the
//! command line. See the crate README for file formats.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use locc_lab::reports::{
    cmd_classify, cmd_distinguish, cmd_upb_verify, sigma_rho_to_file, EnsembleFile, OutputFormat,
    RunConfig,
};
use locc_lab::upb::{catalog_tiles, make_sigma_rho, tensor_upb, RhoSpec, UpbCandidate, UpbJson};
use locc_lab::{Error, Result};

/// Default cap on tensor copies; n = 3 means 729-dimensional operators
/// and has to be enabled explicitly.
const DEFAULT_COPY_CAP: usize = 2;

#[derive(Parser)]
#[command(
    name = "locc-lab",
    version,
    about = "Multi-copy LOCC discrimination experiments: elimination protocol, \
             UPB ensembles, product-state witness searches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identify pure states with the round-by-round elimination protocol
    Distinguish {
        /// Ensemble JSON file (pure states only)
        #[arg(long)]
        ensemble: PathBuf,
        /// Prepared state index; omitted = uniform random per trial
        #[arg(long)]
        true_index: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classify an ensemble by many-copy local distinguishability
    Classify {
        /// Ensemble JSON file (pure states and/or density matrices)
        #[arg(long)]
        ensemble: PathBuf,
        /// Copy counts to test (1..=max)
        #[arg(long, default_value_t = DEFAULT_COPY_CAP)]
        max_copies: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// UPB toolbox: verify, tensor, build sigma/rho ensembles
    Upb {
        #[command(subcommand)]
        action: UpbAction,
    },
}

#[derive(Subcommand)]
enum UpbAction {
    /// Check orthogonality exactly and search the complement for
    /// product states
    Verify {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Tensor two UPB files into one
    Tensor {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the {sigma^n, rho^n} ensemble file from a UPB
    MakeSigmaRho {
        file: PathBuf,
        /// Number of tensor copies
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// How to pick rho inside the complement
        #[arg(long, value_enum, default_value_t = RhoArg::MaximallyMixed)]
        rho: RhoArg,
        /// Rank for --rho random-rank
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allow n beyond the default cap of 2 (dimension grows fast)
        #[arg(long)]
        allow_large: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a built-in UPB to a file (currently: tiles)
    Catalog {
        #[arg(long, default_value = "tiles")]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// See-saw restarts per witness search
    #[arg(long, default_value_t = 200)]
    restarts: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Omit the timestamp field (byte-identical reruns)
    #[arg(long)]
    no_timestamp: bool,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RhoArg {
    /// Normalized projector onto the whole complement
    MaximallyMixed,
    /// Random mixture of --rank orthonormal complement vectors
    RandomRank,
    /// Random pure state in the complement
    Pure,
}

impl CommonArgs {
    fn run_config(&self, max_copies: usize) -> RunConfig {
        RunConfig {
            seed: self.seed,
            trials: self.trials,
            restarts: self.restarts,
            max_copies,
            format: match self.format {
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Csv => OutputFormat::Csv,
            },
            timestamp: !self.no_timestamp,
        }
    }

    fn emit(&self, json: Result<String>, csv: String) -> Result<()> {
        let text = match self.format {
            FormatArg::Json => {
                let mut t = json?;
                t.push('\n');
                t
            }
            FormatArg::Csv => csv,
        };
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn load_upb(path: &Path) -> Result<UpbCandidate> {
    let text = std::fs::read_to_string(path)?;
    let json: UpbJson = serde_json::from_str(&text)?;
    UpbCandidate::from_json(&json)
}

fn save_upb(candidate: &UpbCandidate, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&candidate.to_json())?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Distinguish { ensemble, true_index, common } => {
            let file = EnsembleFile::load(&ensemble)?;
            let cfg = common.run_config(DEFAULT_COPY_CAP);
            let report = cmd_distinguish(&file, true_index, &cfg)?;
            common.emit(report.to_json_string(), report.to_csv_string())
        }
        Command::Classify { ensemble, max_copies, common } => {
            let file = EnsembleFile::load(&ensemble)?;
            let cfg = common.run_config(max_copies);
            let report = cmd_classify(&file, &cfg)?;
            common.emit(report.to_json_string(), report.to_csv_string())
        }
        Command::Upb { action } => match action {
            UpbAction::Verify { file, common } => {
                let candidate = load_upb(&file)?;
                let cfg = common.run_config(DEFAULT_COPY_CAP);
                let report = cmd_upb_verify(&candidate, &cfg)?;
                common.emit(report.to_json_string(), report.to_csv_string())
            }
            UpbAction::Tensor { left, right, out } => {
                let a = load_upb(&left)?;
                let b = load_upb(&right)?;
                save_upb(&tensor_upb(&a, &b), &out)
            }
            UpbAction::MakeSigmaRho { file, n, rho, rank, seed, allow_large, out } => {
                if n > DEFAULT_COPY_CAP && !allow_large {
                    return Err(Error::InvalidInput(format!(
                        "n = {n} exceeds the default cap of {DEFAULT_COPY_CAP}; \
                         pass --allow-large to build it anyway"
                    )));
                }
                let candidate = load_upb(&file)?;
                let spec = match rho {
                    RhoArg::MaximallyMixed => RhoSpec::MaximallyMixedComplement,
                    RhoArg::Pure => RhoSpec::PureInComplement { seed },
                    RhoArg::RandomRank => {
                        let rank = rank.ok_or_else(|| {
                            Error::InvalidInput("--rho random-rank needs --rank".into())
                        })?;
                        RhoSpec::RandomRank { rank, seed }
                    }
                };
                let ens = make_sigma_rho(&candidate, &spec, n)?;
                sigma_rho_to_file(&ens).save(&out)
            }
            UpbAction::Catalog { name, out } => {
                let candidate = match name.as_str() {
                    "tiles" => catalog_tiles(),
                    other => {
                        return Err(Error::InvalidInput(format!(
                            "unknown catalog entry '{other}' (available: tiles)"
                        )))
                    }
                };
                save_upb(&candidate, &out)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
