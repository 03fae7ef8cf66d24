use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use torsion_core::dataset::{
    split_proteins, write_samples_csv, Corpus, Partitions, TargetMode, WindowConfig, WindowSample,
};
use torsion_core::encoding::{encode_sequence, EncodingScheme, SubstitutionMatrix, ALPHABET};
use torsion_core::geometry::{load_pdb_file, synth, write_torsions_csv};
use torsion_core::harness::{
    evaluate_model, format_table, rank_results, read_journal, run_sweep, train_cell, write_report_csv, GridCell,
    Metric, RunSettings, SweepConfig, SweepData, SweepOptions,
};
use torsion_core::neuralnet::{load_checkpoint, save_checkpoint, Architecture, TrainingConfig};
use torsion_core::{Error, Result};

#[derive(Parser)]
#[command(name = "torsion", version, about = "Backbone torsion-angle prediction from sequence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute φ/ψ/ω for every residue of the given PDB files.
    Dihedrals {
        #[arg(required = true)]
        pdb: Vec<PathBuf>,
        /// Output CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the encoding of a sequence as CSV.
    Encode {
        /// `one-hot`, a built-in matrix name or a matrix file.
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        seq: String,
        /// Min-max scale matrix scores to [0, 1].
        #[arg(long)]
        normalize: bool,
    },
    /// Split a corpus and write train/validation/test window CSVs.
    Dataset {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        window: usize,
        #[arg(long, default_value = "both")]
        target: TargetMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a single grid cell and save its checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a corpus partition.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Split seed; defaults to the one stored in the checkpoint.
        #[arg(long)]
        seed: Option<u64>,
        /// test, validation, train or all.
        #[arg(long, default_value = "test")]
        partition: String,
        /// Per-residue predictions CSV.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Train and evaluate every cell of a grid.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        /// Grid config (TOML); the full grid if omitted.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        journal: PathBuf,
        #[arg(long)]
        resume: bool,
        /// Stop after this many newly run cells.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Rank journaled sweep results.
    Report {
        #[arg(long)]
        journal: PathBuf,
        #[arg(long, default_value = "mae")]
        metric: Metric,
        /// Restrict to one target mode.
        #[arg(long)]
        target: Option<TargetMode>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write a corpus of noisy synthetic α-helices.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        chains: usize,
        #[arg(long, default_value_t = 40)]
        length: usize,
        /// Standard deviation of φ/ψ noise in degrees.
        #[arg(long, default_value_t = 3.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    scheme: String,
    #[arg(long)]
    window: usize,
    #[arg(long)]
    model: Architecture,
    #[arg(long, default_value = "both")]
    target: TargetMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TOML file of training settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, default_value_t = torsion_core::neuralnet::DEFAULT_HIDDEN_WIDTH)]
    hidden_width: usize,
    /// Checkpoint path.
    #[arg(long)]
    out: PathBuf,
    /// Training history CSV.
    #[arg(long)]
    history: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::from(e).in_file(path))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn resolve_scheme(name: &str, normalize: bool) -> Result<EncodingScheme> {
    let scheme = match EncodingScheme::by_name(name) {
        Ok(s) => s,
        Err(_) if Path::new(name).is_file() => EncodingScheme::from_matrix(SubstitutionMatrix::from_file(name)?),
        Err(e) => return Err(e),
    };
    Ok(scheme.with_normalization(normalize))
}

fn dihedrals(pdb: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut w = output(out)?;
    let mut chains = Vec::new();
    for path in pdb {
        chains.extend(load_pdb_file(path)?);
    }
    write_torsions_csv(&mut w, &chains)?;
    w.flush()?;
    Ok(())
}

fn encode(scheme: &str, seq: &str, normalize: bool) -> Result<()> {
    let scheme = resolve_scheme(scheme, normalize)?;
    let seq = seq.trim().to_ascii_uppercase();
    let rows = encode_sequence(&scheme, &seq)?;
    let mut w = output(None)?;
    let header: Vec<String> = ALPHABET.iter().map(char::to_string).collect();
    writeln!(w, "position,residue,{}", header.join(","))?;
    for (i, (row, letter)) in rows.iter().zip(seq.chars()).enumerate() {
        let values: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{},{},{}", i + 1, letter, values.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn dataset(manifest: &Path, scheme: &str, window: usize, target: TargetMode, seed: u64, out: &Path) -> Result<()> {
    let scheme = resolve_scheme(scheme, false)?;
    let config = WindowConfig::new(window, scheme, target)?;
    let corpus = Corpus::load(manifest)?;
    let split = split_proteins(&corpus.ids(), seed)?;
    let parts = Partitions::build(&corpus, &split, &config)?;
    std::fs::create_dir_all(out).map_err(|e| Error::from(e).in_file(out))?;
    for (name, samples) in [
        ("train", &parts.train),
        ("validation", &parts.validation),
        ("test", &parts.test),
    ] {
        let path = out.join(format!("{name}.csv"));
        let mut w = create(&path)?;
        write_samples_csv(&mut w, samples, window, target)?;
        w.flush()?;
        eprintln!("{name}: {} samples -> {}", samples.len(), path.display());
    }
    let path = out.join("split.json");
    std::fs::write(&path, serde_json::to_string_pretty(&split)?).map_err(|e| Error::from(e).in_file(&path))?;
    Ok(())
}

fn train(args: &TrainArgs) -> Result<()> {
    let mut training = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
            toml::from_str::<TrainingConfig>(&text)
                .map_err(|e| Error::Config(e.to_string()).in_file(path))?
        }
        None => TrainingConfig::default(),
    };
    if let Some(e) = args.epochs {
        training.max_epochs = e;
    }
    if let Some(b) = args.batch_size {
        training.batch_size = b;
    }
    if let Some(lr) = args.learning_rate {
        training.learning_rate = lr;
    }
    training.validate()?;

    let cell = GridCell {
        encoding: args.scheme.clone(),
        window_size: args.window,
        model: args.model,
        target_mode: args.target,
    };
    let data = SweepData::new(Corpus::load(&args.manifest)?, args.seed)?;
    let settings = RunSettings {
        training,
        hidden_width: args.hidden_width,
        seed: args.seed,
    };
    let trained = train_cell(&cell, &data, &settings)?;
    for e in &trained.history.epochs {
        eprintln!(
            "epoch {:>3}  train {:.6}  val {:.6}  lr {}",
            e.epoch, e.train_loss, e.val_loss, e.learning_rate
        );
    }
    let mut meta = trained.checkpoint_meta(&cell);
    meta.insert("split_seed".into(), args.seed.to_string());
    save_checkpoint(&args.out, &trained.model, &meta)?;
    if let Some(path) = &args.history {
        let mut w = create(path)?;
        trained.history.write_csv(&mut w)?;
        w.flush()?;
    }
    let metrics = evaluate_model(&trained.model, &trained.partitions.test)?;
    println!("{}", metrics_json(&cell.to_string(), &metrics, trained.partitions.test.len()));
    Ok(())
}

fn metrics_json(cell: &str, m: &torsion_core::harness::CellMetrics, n: usize) -> serde_json::Value {
    serde_json::json!({
        "cell": cell,
        "samples": n,
        "codec_mse": m.codec_mse,
        "codec_rmse": m.codec_rmse,
        "degree_mae_phi": m.degree_mae_phi,
        "degree_mae_psi": m.degree_mae_psi,
    })
}

fn meta_value<T: std::str::FromStr>(meta: &BTreeMap<String, String>, key: &str) -> Result<T> {
    meta.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Checkpoint(format!("missing or invalid metadata field {key:?}")))
}

fn evaluate(
    checkpoint: &Path,
    manifest: &Path,
    seed: Option<u64>,
    partition: &str,
    predictions: Option<&Path>,
) -> Result<()> {
    let (model, meta) = load_checkpoint(checkpoint)?;
    let encoding: String = meta_value(&meta, "encoding")?;
    let spec = model.spec().clone();
    let config = WindowConfig::new(spec.window_size, resolve_scheme(&encoding, false)?, spec.target_mode)?;
    let corpus = Corpus::load(manifest)?;
    let split = split_proteins(&corpus.ids(), seed.map_or_else(|| meta_value(&meta, "split_seed"), Ok)?)?;
    let parts = Partitions::build(&corpus, &split, &config)?;
    let samples: Vec<WindowSample> = match partition {
        "test" => parts.test,
        "validation" => parts.validation,
        "train" => parts.train,
        "all" => [parts.train, parts.validation, parts.test].concat(),
        other => return Err(Error::Config(format!("unknown partition {other:?}"))),
    };
    if samples.is_empty() {
        return Err(Error::EmptyInput("evaluation partition"));
    }
    let metrics = evaluate_model(&model, &samples)?;
    if let Some(path) = predictions {
        let preds = torsion_core::neuralnet::predict_angles(&model, &samples)?;
        let mut w = create(path)?;
        writeln!(w, "pdb_id,chain,residue_seq,phi,phi_pred,psi,psi_pred")?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_default();
        for (s, p) in samples.iter().zip(preds) {
            let mut truth = s.angles.iter().copied();
            let phi = spec.target_mode.predicts_phi().then(|| truth.next()).flatten();
            let psi = spec.target_mode.predicts_psi().then(|| truth.next()).flatten();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                s.center.pdb_id,
                s.center.chain_id,
                s.center.residue_seq,
                fmt(phi),
                fmt(p.phi),
                fmt(psi),
                fmt(p.psi)
            )?;
        }
        w.flush()?;
    }
    let label = format!("{encoding}/w{}/{}/{}", spec.window_size, spec.arch, spec.target_mode);
    println!("{}", metrics_json(&label, &metrics, samples.len()));
    Ok(())
}

fn sweep(
    manifest: &Path,
    grid: Option<&Path>,
    seed: u64,
    workers: usize,
    journal: &Path,
    resume: bool,
    limit: Option<usize>,
) -> Result<()> {
    let config = match grid {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::default(),
    };
    let data = SweepData::new(Corpus::load(manifest)?, seed)?;
    let settings = RunSettings {
        training: config.training.clone(),
        hidden_width: config.hidden_width,
        seed,
    };
    let options = SweepOptions {
        workers,
        journal: Some(journal.to_path_buf()),
        resume,
        cell_limit: limit,
        verbose: true,
    };
    let results = run_sweep(&config.grid(), &data, &settings, &options)?;
    eprintln!("{} of {} cells recorded in {}", results.len(), config.grid().len(), journal.display());
    Ok(())
}

fn report(journal: &Path, metric: Metric, target: Option<TargetMode>, top: usize, csv: Option<&Path>) -> Result<()> {
    let results = read_journal(journal)?;
    let rows = rank_results(&results, metric, target, top);
    print!("{}", format_table(&rows));
    if let Some(path) = csv {
        let mut w = create(path)?;
        write_report_csv(&mut w, &rows)?;
        w.flush()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dihedrals { pdb, out } => dihedrals(&pdb, out.as_deref()),
        Command::Encode { scheme, seq, normalize } => encode(&scheme, &seq, normalize),
        Command::Dataset {
            manifest,
            scheme,
            window,
            target,
            seed,
            out,
        } => dataset(&manifest, &scheme, window, target, seed, &out),
        Command::Train(args) => train(&args),
        Command::Evaluate {
            checkpoint,
            manifest,
            seed,
            partition,
            predictions,
        } => evaluate(&checkpoint, &manifest, seed, &partition, predictions.as_deref()),
        Command::Sweep {
            manifest,
            grid,
            seed,
            workers,
            journal,
            resume,
            limit,
        } => sweep(&manifest, grid.as_deref(), seed, workers, &journal, resume, limit),
        Command::Report {
            journal,
            metric,
            target,
            top,
            csv,
        } => report(&journal, metric, target, top, csv.as_deref()),
        Command::Synth {
            out,
            chains,
            length,
            noise,
            seed,
        } => synth::write_helix_corpus(&out, chains, length, noise, seed).map(|manifest| {
            eprintln!("wrote {chains} chains; manifest {}", manifest.display());
        }),
    }
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
