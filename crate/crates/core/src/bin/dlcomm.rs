//! Command-line front end: train, evaluate, adaptive, baseline, figure,
//! analyze.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dlcomm::adaptive::TIERS;
use dlcomm::analysis::{achievable_rate, mse_decomposition_with, DEFAULT_TAYLOR_ORDER, DEFAULT_U_MIN};
use dlcomm::autoencoder::{build_model, load_checkpoint, save_checkpoint, Autoencoder, TrainingSnr};
use dlcomm::baseline::BaselineScheme;
use dlcomm::harness::{
    parse_axis, recipe_names, run_figure, sweep_adaptive, sweep_baseline, sweep_model, AxisKind, CsvTable,
    ExperimentConfig, Manifest, ManifestFile, RecipeOptions, Scheme, SnrAxis, RECIPES,
};
use dlcomm::nn::LossKind;
use dlcomm::representation::build_gdr;
use dlcomm::rng::stream;
use dlcomm::{Error, Result};

#[derive(Parser)]
#[command(name = "dlcomm", version, about = "Autoencoder link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write a checkpoint.
    Train(TrainArgs),
    /// BLER/BER/MSE sweep of a checkpoint.
    Evaluate(EvalArgs),
    /// Adaptive vector selection sweep of a checkpoint.
    Adaptive(AdaptiveArgs),
    /// Hamming(7,4) and uncoded BPSK sweeps.
    Baseline(BaselineArgs),
    /// Regenerate the data behind a figure or table.
    Figure(FigureArgs),
    /// Linearized MSE decomposition or achievable-rate curves.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Vector size M.
    #[arg(long = "size", short = 'M')]
    size: Option<usize>,
    /// Representation order m.
    #[arg(long = "order", short = 'm')]
    order: Option<usize>,
    /// Channel uses n.
    #[arg(long, short = 'n')]
    channel_uses: Option<usize>,
    /// Fixed training SNR in dB.
    #[arg(long, conflicts_with = "snr_set")]
    snr_db: Option<f64>,
    /// Training SNR set in dB, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    snr_set: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    train_samples: Option<usize>,
    /// mse or categorical_cross_entropy.
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output checkpoint path.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Optional CSV of per-epoch losses.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct AxisArgs {
    /// Eb/N0 axis in dB: start:stop:step or a comma list.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "snr")]
    ebn0: Option<String>,
    /// SNR axis in dB: start:stop:step or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    checkpoint: PathBuf,
    #[command(flatten)]
    axis: AxisArgs,
    #[arg(long)]
    blocks: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; a manifest is written next to it. Prints to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AdaptiveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    checkpoint: PathBuf,
    #[command(flatten)]
    axis: AxisArgs,
    /// MSE threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// Probes per vector.
    #[arg(long)]
    probes: Option<usize>,
    #[arg(long)]
    blocks: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    common: Common,
    /// hamming_hd, hamming_ml, uncoded_bpsk or all.
    #[arg(long, default_value = "all")]
    scheme: String,
    #[command(flatten)]
    axis: AxisArgs,
    #[arg(long)]
    blocks: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// Recipe name.
    #[arg(required_unless_present = "list")]
    name: Option<String>,
    /// List recipe names and exit.
    #[arg(long)]
    list: bool,
    /// Output directory.
    #[arg(long, default_value = "figures")]
    output: PathBuf,
    /// 10^6 blocks per point instead of 10^5.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    blocks: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    train_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eval_seed: Option<u64>,
    #[arg(long)]
    probes: Option<usize>,
    /// Replace the recipe's axis points: start:stop:step or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(subcommand)]
    mode: AnalyzeMode,
}

#[derive(Subcommand)]
enum AnalyzeMode {
    /// Predicted against simulated MSE for a trained checkpoint.
    Mse {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Noise variances, start:stop:step or a comma list.
        #[arg(long, default_value = "0.01,0.05,0.1")]
        sigma2: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_TAYLOR_ORDER)]
        taylor_order: usize,
        #[arg(long, default_value_t = DEFAULT_U_MIN)]
        u_min: f64,
        #[arg(long, default_value_t = 2)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Maximum achievable rate over Eb/N0.
    Rate {
        #[arg(long = "size", short = 'M')]
        size: usize,
        #[arg(long = "order", short = 'm')]
        order: usize,
        #[arg(long, short = 'n', default_value_t = 7)]
        channel_uses: usize,
        #[arg(long, allow_hyphen_values = true, default_value = "-10:30:1")]
        ebn0: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    match &common.config {
        Some(p) => ExperimentConfig::from_file(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn apply_axis(config: &mut ExperimentConfig, axis: &AxisArgs) -> Result<()> {
    if let Some(r) = &axis.ebn0 {
        config.axis = SnrAxis::new(AxisKind::EbN0Db, parse_axis(r)?);
    }
    if let Some(r) = &axis.snr {
        config.axis = SnrAxis::new(AxisKind::SnrDb, parse_axis(r)?);
    }
    Ok(())
}

fn model_echo(table: &mut CsvTable, model: &Autoencoder, checkpoint: &Path) {
    table.comment("checkpoint", checkpoint.display().to_string());
    table.comment("codebook", model.codebook().manifest().to_string());
    table.comment("n", model.channel_uses().to_string());
    table.comment("parameter_checksum", format!("{:016x}", model.parameter_checksum()));
    if let Some(t) = model.training_config() {
        table.comment("training_snr", t.snr.describe());
        table.comment("train_seed", t.seed.to_string());
    }
}

/// Writes the table and `<stem>.manifest.toml`, or prints to stdout.
fn emit(command: &str, table: &CsvTable, settings: &[(String, String)], output: Option<&Path>) -> Result<()> {
    let Some(path) = output else {
        print!("{}", table.render());
        return Ok(());
    };
    table.write(path)?;
    let mut manifest = Manifest::new(command);
    for (k, v) in settings {
        manifest.set(k.clone(), v);
    }
    manifest.files.push(ManifestFile {
        name: path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        rows: table.rows.len(),
    });
    manifest.write(&path.with_extension("manifest.toml"))
}

fn train(args: TrainArgs) -> Result<()> {
    let mut c = load_config(&args.common)?;
    if let Some(v) = args.size {
        c.size = v;
    }
    if let Some(v) = args.order {
        c.order = v;
    }
    if let Some(v) = args.channel_uses {
        c.channel_uses = v;
    }
    if let Some(v) = args.snr_db {
        c.training.snr = TrainingSnr::Fixed(v);
    }
    if let Some(v) = &args.snr_set {
        c.training.snr =
            TrainingSnr::Set(parse_axis(v).map_err(|_| Error::config("snr_set", format!("bad list `{v}`")))?);
    }
    if let Some(v) = args.epochs {
        c.training.epochs = v;
    }
    if let Some(v) = args.batch_size {
        c.training.batch_size = v;
    }
    if let Some(v) = args.train_samples {
        c.training.train_samples = v;
    }
    if let Some(v) = &args.loss {
        c.training.loss = LossKind::from_name(v).ok_or_else(|| Error::config("loss", format!("unknown loss `{v}`")))?;
    }
    if let Some(v) = args.learning_rate {
        c.training.adam.learning_rate = v;
    }
    if let Some(v) = args.seed {
        c.training.seed = v;
    }
    c.validate()?;
    let mut model = build_model(build_gdr(c.size, c.order)?, c.channel_uses, c.training.seed)?;
    let trace = model.train(&c.training)?;
    save_checkpoint(&model, &args.checkpoint)?;
    if let Some(path) = &args.trace {
        let mut t = CsvTable::new(&["epoch", "loss"]);
        for (e, l) in trace.epoch_losses.iter().enumerate() {
            t.push(vec![(e + 1).to_string(), format!("{l:.9e}")])?;
        }
        for (k, v) in c.echo() {
            t.comment(k, v);
        }
        t.comment("converged", trace.converged().to_string());
        t.write(path)?;
    }
    let last = trace.epoch_losses.last().copied().unwrap_or(f64::NAN);
    eprintln!(
        "trained M={} m={} n={} epochs={} final_loss={last:.6e} converged={} checkpoint={}",
        c.size,
        c.order,
        c.channel_uses,
        trace.epoch_losses.len(),
        trace.converged(),
        args.checkpoint.display()
    );
    Ok(())
}

fn evaluate(args: EvalArgs) -> Result<()> {
    let mut c = load_config(&args.common)?;
    apply_axis(&mut c, &args.axis)?;
    if let Some(v) = args.blocks {
        c.blocks = v;
    }
    if let Some(v) = args.seed {
        c.eval_seed = v;
    }
    c.validate()?;
    let model = load_checkpoint(&args.checkpoint)?;
    let records = sweep_model(&model, &c.axis, c.blocks, c.eval_seed)?;
    let mut table = CsvTable::from_records(&records)?;
    model_echo(&mut table, &model, &args.checkpoint);
    let settings = vec![
        ("axis".to_string(), c.axis.describe()),
        ("blocks".to_string(), c.blocks.to_string()),
        ("eval_seed".to_string(), c.eval_seed.to_string()),
    ];
    for (k, v) in &settings {
        table.comment(k.clone(), v.clone());
    }
    let out = args.output.or(c.output);
    emit("evaluate", &table, &settings, out.as_deref())
}

fn adaptive(args: AdaptiveArgs) -> Result<()> {
    let mut c = load_config(&args.common)?;
    if args.common.config.is_none() {
        c.axis = SnrAxis::new(AxisKind::SnrDb, parse_axis("-5:5:2")?);
    }
    apply_axis(&mut c, &args.axis)?;
    if let Some(v) = args.threshold {
        c.mse_threshold = v;
    }
    if let Some(v) = args.probes {
        c.probes = v;
    }
    if let Some(v) = args.blocks {
        c.blocks = v;
    }
    if let Some(v) = args.seed {
        c.eval_seed = v;
    }
    c.validate()?;
    let model = load_checkpoint(&args.checkpoint)?;
    if model.codebook().len() < TIERS[0] {
        return Err(Error::domain("adaptive selection needs at least 4 codebook entries"));
    }
    let rows = sweep_adaptive(&model, &c.axis, c.mse_threshold, c.probes, c.blocks, c.eval_seed)?;
    let mut table = CsvTable::new(&[
        c.axis.kind.column(),
        "threshold",
        "K",
        "M1",
        "outage",
        "rate_bits_per_use",
        "bler",
        "bler_ci95",
        "ber",
        "mse",
        "blocks_simulated",
        "low_confidence",
    ]);
    for (state, r) in &rows {
        table.push(vec![
            format!("{}", r.snr_point),
            format!("{:e}", c.mse_threshold),
            state.probes_per_vector.to_string(),
            state.m1.to_string(),
            state.outage.to_string(),
            format!("{:.9e}", r.rate),
            format!("{:.9e}", r.bler),
            format!("{:.9e}", r.bler_ci95),
            format!("{:.9e}", r.ber),
            r.mse.map(|m| format!("{m:.9e}")).unwrap_or_default(),
            r.blocks.to_string(),
            r.low_confidence.to_string(),
        ])?;
    }
    model_echo(&mut table, &model, &args.checkpoint);
    let settings = vec![
        ("axis".to_string(), c.axis.describe()),
        ("threshold".to_string(), format!("{:e}", c.mse_threshold)),
        ("probes".to_string(), c.probes.to_string()),
        ("blocks".to_string(), c.blocks.to_string()),
        ("eval_seed".to_string(), c.eval_seed.to_string()),
    ];
    for (k, v) in &settings {
        table.comment(k.clone(), v.clone());
    }
    let out = args.output.or(c.output);
    emit("adaptive", &table, &settings, out.as_deref())
}

fn baseline(args: BaselineArgs) -> Result<()> {
    let mut c = load_config(&args.common)?;
    apply_axis(&mut c, &args.axis)?;
    if let Some(v) = args.blocks {
        c.blocks = v;
    }
    if let Some(v) = args.seed {
        c.eval_seed = v;
    }
    c.validate()?;
    let from_config = match c.scheme {
        Scheme::HammingHd => Some(BaselineScheme::HammingHd),
        Scheme::HammingMl => Some(BaselineScheme::HammingMl),
        Scheme::Uncoded => Some(BaselineScheme::UncodedBpsk),
        _ => None,
    };
    let schemes: Vec<BaselineScheme> = match args.scheme.as_str() {
        "all" => match (from_config, args.common.config.is_some()) {
            (Some(s), true) => vec![s],
            _ => BaselineScheme::ALL.to_vec(),
        },
        name => vec![BaselineScheme::from_name(name).ok_or_else(|| {
            Error::config(
                "scheme",
                format!("unknown baseline `{name}`; expected hamming_hd, hamming_ml, uncoded_bpsk or all"),
            )
        })?],
    };
    let mut records = Vec::new();
    for (i, s) in schemes.iter().enumerate() {
        records.extend(sweep_baseline(
            *s,
            &c.axis,
            c.blocks,
            c.eval_seed.wrapping_add(i as u64),
        )?);
    }
    let mut table = CsvTable::new(&[
        "scheme",
        c.axis.kind.column(),
        "ber",
        "ber_ci95",
        "bler",
        "bler_ci95",
        "blocks_simulated",
        "low_confidence",
    ]);
    for r in &records {
        table.push(vec![
            r.scheme.clone(),
            format!("{}", r.snr_point),
            format!("{:.9e}", r.ber),
            format!("{:.9e}", r.ber_ci95),
            format!("{:.9e}", r.bler),
            format!("{:.9e}", r.bler_ci95),
            r.blocks.to_string(),
            r.low_confidence.to_string(),
        ])?;
    }
    let settings = vec![
        ("axis".to_string(), c.axis.describe()),
        ("blocks".to_string(), c.blocks.to_string()),
        ("eval_seed".to_string(), c.eval_seed.to_string()),
    ];
    for (k, v) in &settings {
        table.comment(k.clone(), v.clone());
    }
    let out = args.output.or(c.output);
    emit("baseline", &table, &settings, out.as_deref())
}

fn figure(args: FigureArgs) -> Result<()> {
    if args.list {
        for r in RECIPES {
            println!("{}\t{}", r.name, r.description);
        }
        return Ok(());
    }
    let name = args.name.expect("clap enforces a name without --list");
    let mut opts = if args.paper_scale {
        RecipeOptions::paper()
    } else {
        RecipeOptions::default()
    };
    if let Some(v) = args.blocks {
        opts.blocks = v;
    }
    if let Some(v) = args.epochs {
        opts.epochs = v;
    }
    if let Some(v) = args.train_samples {
        opts.train_samples = v;
    }
    if let Some(v) = args.seed {
        opts.train_seed = v;
    }
    if let Some(v) = args.eval_seed {
        opts.eval_seed = v;
    }
    if let Some(v) = args.probes {
        opts.probes = v;
    }
    if let Some(p) = &args.points {
        opts.points = Some(parse_axis(p)?);
    }
    if !recipe_names().contains(&name.as_str()) {
        return Err(Error::UnknownRecipe {
            name,
            available: recipe_names().join(", "),
        });
    }
    let out = run_figure(&name, &opts, Some(&args.output))?;
    for (file, table) in &out.files {
        eprintln!("wrote {} ({} rows)", args.output.join(file).display(), table.rows.len());
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    match args.mode {
        AnalyzeMode::Mse {
            checkpoint,
            sigma2,
            samples,
            taylor_order,
            u_min,
            seed,
            output,
        } => {
            let model = load_checkpoint(&checkpoint)?;
            let sigmas = parse_axis(&sigma2).map_err(|_| Error::config("sigma2", format!("bad list `{sigma2}`")))?;
            let mut table = CsvTable::new(&[
                "sigma2",
                "signal_term",
                "noise_term",
                "predicted_total",
                "simulated_mse",
                "active_fraction",
                "region_fraction",
                "simulated_mse_all",
            ]);
            for (i, s2) in sigmas.iter().enumerate() {
                let d = mse_decomposition_with(&model, *s2, samples, taylor_order, u_min, &mut stream(seed, i as u64))?;
                table.push(vec![
                    format!("{s2}"),
                    format!("{:.9e}", d.signal_term),
                    format!("{:.9e}", d.noise_term),
                    format!("{:.9e}", d.predicted_total),
                    format!("{:.9e}", d.simulated_mse),
                    format!("{:.9e}", d.active_fraction),
                    format!("{:.9e}", d.region_fraction),
                    format!("{:.9e}", d.simulated_mse_all),
                ])?;
            }
            model_echo(&mut table, &model, &checkpoint);
            let settings = vec![
                ("samples".to_string(), samples.to_string()),
                ("taylor_order".to_string(), taylor_order.to_string()),
                ("u_min".to_string(), format!("{u_min:e}")),
                ("seed".to_string(), seed.to_string()),
            ];
            for (k, v) in &settings {
                table.comment(k.clone(), v.clone());
            }
            emit("analyze mse", &table, &settings, output.as_deref())
        }
        AnalyzeMode::Rate {
            size,
            order,
            channel_uses,
            ebn0,
            output,
        } => {
            let points = parse_axis(&ebn0)?;
            let mut table = CsvTable::new(&["ebn0_db", "achievable_rate_bits_per_s_per_hz"]);
            for p in &points {
                table.push(vec![
                    format!("{p}"),
                    format!("{:.9e}", achievable_rate(size, order, channel_uses, *p)?),
                ])?;
            }
            let settings = vec![
                ("M".to_string(), size.to_string()),
                ("m".to_string(), order.to_string()),
                ("n".to_string(), channel_uses.to_string()),
            ];
            for (k, v) in &settings {
                table.comment(k.clone(), v.clone());
            }
            emit("analyze rate", &table, &settings, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Adaptive(a) => adaptive(a),
        Command::Baseline(a) => baseline(a),
        Command::Figure(a) => figure(a),
        Command::Analyze(a) => analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error kind={} message={message}", e.kind());
            ExitCode::FAILURE
        }
    }
}
