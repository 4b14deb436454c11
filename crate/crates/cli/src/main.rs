//! `lyromel`: build datasets from lyric MIDI files, train embeddings and the
//! conditional GAN, generate melodies for new lyrics and evaluate them.

mod artifacts;
mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::generate::{GenerateArgs, LyricsInput};
use config::PipelineConfig;

#[derive(Parser)]
#[command(name = "lyromel", version, about = "Lyrics-conditioned melody generation")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArg {
    /// Seed for every random choice the command makes.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a directory of MIDI files into a syllable-aligned dataset.
    BuildDataset {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Dataset file (JSON lines); sidecars are written next to it.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Train word and syllable skip-gram embeddings.
    TrainEmbeddings {
        #[arg(long)]
        dataset: PathBuf,
        /// Extra plain-text lyrics to add to the corpus.
        #[arg(long = "text")]
        texts: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fixed epoch count instead of decaying to the learning-rate floor.
        #[arg(long)]
        epochs: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Train the generator and discriminator.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        hidden: Option<usize>,
        /// Directory with pre-trained embedding tables.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Keep every n-th epoch checkpoint (0: only the selected model).
        #[arg(long, default_value_t = 1)]
        checkpoint_every: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Generate melodies for lyrics.
    Generate {
        /// Directory written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Use this checkpoint instead of the selected model.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["lyrics_file", "syllables"])]
        lyrics: Option<String>,
        #[arg(long, conflicts_with = "syllables")]
        lyrics_file: Option<PathBuf>,
        /// Pre-split lyrics, e.g. "lis-ten to the mu-sic".
        #[arg(long)]
        syllables: Option<String>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write the continuous generator output as CSV.
        #[arg(long)]
        emit_raw: bool,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Compare model, baseline and ground truth on the test split.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        shuffles: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Sample random melodies from the dataset attribute histograms.
    Baseline {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
    },
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("LYROMEL_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("LYROMEL_THREADS={v:?} is not a number"))?;
        if n == 0 {
            bail!("LYROMEL_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn output_dir(flag: Option<PathBuf>, config: &PipelineConfig) -> Result<PathBuf> {
    flag.or_else(|| config.paths.output_dir.clone())
        .context("an output directory is required: pass --out or set paths.output_dir")
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let mut config = PipelineConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::BuildDataset { input, out, seed } => {
            let seed = config.seed(seed.seed)?;
            let input = input
                .or_else(|| config.paths.dataset_dir.clone())
                .context("an input directory is required: pass --input or set paths.dataset_dir")?;
            commands::dataset::run(&input, &out, seed)
        }
        Command::TrainEmbeddings {
            dataset,
            texts,
            out,
            epochs,
            seed,
        } => {
            let seed = config.seed(seed.seed)?;
            if epochs.is_some() {
                config.embedding.epochs = epochs;
            }
            let out = output_dir(out, &config)?;
            commands::embeddings::run(&dataset, &texts, &out, &config.embedding, seed)
        }
        Command::Train {
            dataset,
            out,
            epochs,
            batch,
            hidden,
            embeddings,
            checkpoint_every,
            seed,
        } => {
            let seed = config.seed(seed.seed)?;
            config.gan.epochs = epochs.unwrap_or(config.gan.epochs);
            config.gan.batch = batch.unwrap_or(config.gan.batch);
            config.gan.hidden = hidden.unwrap_or(config.gan.hidden);
            config.gan.validate()?;
            let args = commands::train::TrainArgs {
                dataset,
                out: output_dir(out, &config)?,
                embeddings,
                seed,
                checkpoint_every,
            };
            commands::train::run(&args, &config)
        }
        Command::Generate {
            model,
            checkpoint,
            lyrics,
            lyrics_file,
            syllables,
            count,
            out,
            emit_raw,
            seed,
        } => {
            let seed = config.seed(seed.seed)?;
            let lyrics = match (lyrics, lyrics_file, syllables) {
                (Some(t), _, _) => LyricsInput::Text(t),
                (_, Some(p), _) => LyricsInput::Text(read(&p)?),
                (_, _, Some(s)) => LyricsInput::Syllables(s),
                _ => bail!("pass lyrics with --lyrics, --lyrics-file or --syllables"),
            };
            let args = GenerateArgs {
                model_dir: model,
                checkpoint,
                lyrics,
                count,
                seed,
                out,
                emit_raw,
            };
            commands::generate::run(&args, &config)
        }
        Command::Evaluate {
            model,
            checkpoint,
            dataset,
            out,
            shuffles,
            seed,
        } => {
            let seed = config.seed(seed.seed)?;
            config.evaluation.shuffles = shuffles.unwrap_or(config.evaluation.shuffles);
            let args = commands::evaluate::EvaluateArgs {
                model_dir: model,
                checkpoint,
                dataset,
                seed,
                out,
            };
            commands::evaluate::run(&args, &config)
        }
        Command::Baseline {
            dataset,
            count,
            out,
            seed,
        } => {
            let seed = config.seed(seed.seed)?;
            commands::baseline::run(&dataset, count, seed, &out)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
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
