use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pmn::commands::{self, FeatureKind, TrainRequest};
use pmn::output::to_json;
use pmn::Result;

/// Graph clustering with a Potts-model loss and a trainable resolution.
#[derive(Debug, Parser)]
#[command(name = "pmn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train on a dataset directory and write trace.csv, assignment.tsv and
    /// metrics.json.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// JSON file with training options; omitted fields keep defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Number of runs, with consecutive seeds starting at the base seed.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        /// Base seed; overrides the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score an assignment file against a dataset and print JSON.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
    },
    /// Write a synthetic dataset directory.
    #[command(subcommand)]
    Gen(Gen),
}

#[derive(Debug, Subcommand)]
enum Gen {
    /// Cliques joined in a ring by single edges.
    RingOfCliques {
        #[arg(long)]
        cliques: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, value_enum, default_value_t = Features::Degree)]
        features: Features,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stochastic block model.
    Sbm {
        /// Comma-separated block sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        p_in: f64,
        #[arg(long)]
        p_out: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Features::Degree)]
        features: Features,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Features {
    Degree,
    Identity,
}

impl From<Features> for FeatureKind {
    fn from(f: Features) -> Self {
        match f {
            Features::Degree => FeatureKind::Degree,
            Features::Identity => FeatureKind::Identity,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            data,
            config,
            out,
            seeds,
            seed,
        } => {
            let config = commands::load_config(config.as_deref(), seed)?;
            commands::train(&TrainRequest {
                data,
                config,
                out,
                seeds,
            })?;
        }
        Command::Eval { data, assignment } => {
            print!("{}", to_json(&commands::eval(&data, &assignment)?));
        }
        Command::Gen(Gen::RingOfCliques {
            cliques,
            size,
            features,
            out,
        }) => {
            commands::gen_ring_of_cliques(cliques, size, features.into(), &out)?;
        }
        Command::Gen(Gen::Sbm {
            sizes,
            p_in,
            p_out,
            seed,
            features,
            out,
        }) => {
            commands::gen_sbm(&sizes, p_in, p_out, seed, features.into(), &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pmn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
