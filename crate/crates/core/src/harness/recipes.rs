//! Named experiments that write the plot data for each figure and table.

use std::path::Path;

use super::config::{parse_axis, AxisKind, SnrAxis};
use super::csv::{point, real, CsvTable, Manifest, ManifestFile};
use super::metrics::{sweep_adaptive, sweep_baseline, sweep_model, MetricRecord};
use crate::adaptive::AdaptiveState;
use crate::analysis::{achievable_rate, mse_decomposition};
use crate::autoencoder::{
    build_model, theoretical_param_count, Autoencoder, TrainingConfig, TrainingSnr, TrainingTrace,
};
use crate::baseline::BaselineScheme;
use crate::error::{Error, Result};
use crate::representation::{bits_for, build_gdr, data_rate, STANDARD_SIZES};
use crate::rng::stream;

const DESK_BLOCKS: u64 = 100_000;
const PAPER_BLOCKS: u64 = 1_000_000;
const THRESHOLDS: [f64; 3] = [1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone, PartialEq)]
pub struct RecipeOptions {
    pub blocks: u64,
    pub epochs: usize,
    pub train_samples: usize,
    pub train_seed: u64,
    pub eval_seed: u64,
    /// Probes per vector for adaptive recipes.
    pub probes: usize,
    /// Replaces the recipe's default axis points (the axis kind is kept).
    pub points: Option<Vec<f64>>,
    pub paper_scale: bool,
}

impl Default for RecipeOptions {
    fn default() -> Self {
        let t = TrainingConfig::default();
        Self {
            blocks: DESK_BLOCKS,
            epochs: t.epochs,
            train_samples: t.train_samples,
            train_seed: t.seed,
            eval_seed: 2,
            probes: 1,
            points: None,
            paper_scale: false,
        }
    }
}

impl RecipeOptions {
    /// 10^6 blocks per point.
    pub fn paper() -> Self {
        Self {
            blocks: PAPER_BLOCKS,
            paper_scale: true,
            ..Self::default()
        }
    }

    fn training(&self, snr: TrainingSnr) -> TrainingConfig {
        TrainingConfig {
            epochs: self.epochs,
            train_samples: self.train_samples,
            snr,
            seed: self.train_seed,
            ..TrainingConfig::default()
        }
    }

    fn axis(&self, kind: AxisKind, default: &str) -> SnrAxis {
        let points = self
            .points
            .clone()
            .unwrap_or_else(|| parse_axis(default).expect("static axis"));
        SnrAxis::new(kind, points)
    }
}

type RecipeFn = fn(&RecipeOptions) -> Result<Vec<(String, CsvTable)>>;

pub struct Recipe {
    pub name: &'static str,
    pub description: &'static str,
    run: RecipeFn,
}

pub static RECIPES: &[Recipe] = &[
    Recipe {
        name: "fig3",
        description: "BER of a trained M=16 autoencoder against Hamming(7,4) HD/ML and uncoded BPSK",
        run: fig3,
    },
    Recipe {
        name: "fig4",
        description: "BER of one-hot autoencoders for M = 4..64",
        run: fig4,
    },
    Recipe {
        name: "fig5",
        description: "BLER of adaptive selection (M=64) per MSE threshold against conventional one-hot M = 4..64",
        run: fig5,
    },
    Recipe {
        name: "fig6",
        description: "Data rate of adaptive selection per MSE threshold against conventional one-hot",
        run: fig6,
    },
    Recipe {
        name: "fig7",
        description: "Simulated MSE of adaptive selection per MSE threshold",
        run: fig7,
    },
    Recipe {
        name: "fig8",
        description: "BLER of data representations at M=8 and at rate 6/7, trained at 5 dB",
        run: fig8,
    },
    Recipe {
        name: "fig9",
        description: "Maximum achievable rate of data representations (no training)",
        run: fig9,
    },
    Recipe {
        name: "fig10",
        description: "BLER of one-hot, adaptive, GDR and adaptive GDR at rate 6/7, trained at 5 dB",
        run: fig10,
    },
    Recipe {
        name: "fig11",
        description: "Training loss per epoch for fixed training SNRs and a training SNR set",
        run: fig11,
    },
    Recipe {
        name: "fig12",
        description: "BLER of models trained at different fixed SNRs and an SNR set",
        run: fig12,
    },
    Recipe {
        name: "fig13",
        description: "MSE of models trained at different fixed SNRs and an SNR set",
        run: fig13,
    },
    Recipe {
        name: "table4",
        description: "Trainable parameter counts per layer for M = 4..64, n = 7",
        run: table4,
    },
    Recipe {
        name: "table6",
        description: "Data rates of the one-hot and GDR configurations, n = 7",
        run: table6,
    },
    Recipe {
        name: "corrections_fig1",
        description: "BLER of M=8 representations m = 1..4 under l2 normalization, trained at 10 dB",
        run: corrections_fig1,
    },
    Recipe {
        name: "corrections_fig2",
        description: "BLER of M=8 one-hot trained at -10..30 dB and at the set {0,10,20,30} dB",
        run: corrections_fig2,
    },
    Recipe {
        name: "mse_analysis",
        description: "Linearized MSE decomposition against simulation for a trained M=4 model",
        run: mse_analysis,
    },
];

pub fn recipe_names() -> Vec<&'static str> {
    RECIPES.iter().map(|r| r.name).collect()
}

#[derive(Debug, Clone)]
pub struct RecipeOutput {
    pub files: Vec<(String, CsvTable)>,
    pub manifest: Manifest,
}

/// Runs a recipe; when `out_dir` is given every table and `manifest.toml`
/// are written there.
pub fn run_figure(name: &str, options: &RecipeOptions, out_dir: Option<&Path>) -> Result<RecipeOutput> {
    let recipe = RECIPES
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| Error::UnknownRecipe {
            name: name.to_string(),
            available: recipe_names().join(", "),
        })?;
    let mut files = (recipe.run)(options)?;
    for (_, table) in &mut files {
        table.comments.insert(0, ("recipe".into(), recipe.name.into()));
    }
    let mut manifest = Manifest::new(format!("figure {name}"));
    manifest
        .set("recipe", recipe.name)
        .set("description", recipe.description)
        .set("scale", if options.paper_scale { "paper" } else { "desk" })
        .set("blocks", options.blocks)
        .set("epochs", options.epochs)
        .set("train_samples", options.train_samples)
        .set("train_seed", options.train_seed)
        .set("eval_seed", options.eval_seed)
        .set("probes", options.probes);
    if let Some(p) = &options.points {
        let pts: Vec<String> = p.iter().map(|v| point(*v)).collect();
        manifest.set("points", pts.join(","));
    }
    for (file, table) in &files {
        manifest.files.push(ManifestFile {
            name: file.clone(),
            rows: table.rows.len(),
        });
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (file, table) in &files {
            table.write(&dir.join(file))?;
        }
        manifest.write(&dir.join("manifest.toml"))?;
    }
    Ok(RecipeOutput { files, manifest })
}

fn trained(size: usize, order: usize, snr: TrainingSnr, opts: &RecipeOptions) -> Result<(Autoencoder, TrainingTrace)> {
    let mut model = build_model(build_gdr(size, order)?, 7, opts.train_seed)?;
    let trace = model.train(&opts.training(snr))?;
    Ok((model, trace))
}

fn describe_training(model: &Autoencoder) -> String {
    match model.training_config() {
        Some(t) => format!("snr_db={} epochs={} seed={}", t.snr.describe(), t.epochs, t.seed),
        None => "untrained".into(),
    }
}

fn curve(
    file: String,
    label: &str,
    model: Option<&Autoencoder>,
    records: &[MetricRecord],
    opts: &RecipeOptions,
) -> Result<(String, CsvTable)> {
    let mut t = CsvTable::from_records(records)?;
    t.comment("curve", label);
    if let Some(m) = model {
        t.comment("codebook", m.codebook().manifest().to_string());
        t.comment("training", describe_training(m));
        t.comment("parameter_checksum", format!("{:016x}", m.parameter_checksum()));
    }
    t.comment("eval_seed", opts.eval_seed.to_string());
    t.comment("blocks", opts.blocks.to_string());
    Ok((file, t))
}

fn adaptive_table(
    file: String,
    model: &Autoencoder,
    rows: &[(AdaptiveState, MetricRecord)],
    threshold: f64,
    opts: &RecipeOptions,
) -> Result<(String, CsvTable)> {
    let kind = rows.first().map(|r| r.1.axis).unwrap_or(AxisKind::SnrDb);
    let mut t = CsvTable::new(&[
        kind.column(),
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
        "feedback_labels",
    ]);
    for (state, r) in rows {
        let labels: Vec<String> = state.feedback_labels.iter().map(|m| m.0.to_string()).collect();
        t.push(vec![
            point(r.snr_point),
            real(threshold),
            state.probes_per_vector.to_string(),
            state.m1.to_string(),
            state.outage.to_string(),
            real(r.rate),
            real(r.bler),
            real(r.bler_ci95),
            real(r.ber),
            r.mse.map(real).unwrap_or_default(),
            r.blocks.to_string(),
            r.low_confidence.to_string(),
            labels.join(" "),
        ])?;
    }
    t.comment("curve", format!("adaptive selection, threshold {threshold:e}"));
    t.comment("codebook", model.codebook().manifest().to_string());
    t.comment("training", describe_training(model));
    t.comment("eval_seed", opts.eval_seed.to_string());
    t.comment("blocks", opts.blocks.to_string());
    Ok((file, t))
}

fn threshold_tag(th: f64) -> String {
    format!("{th:e}").replace('-', "m")
}

fn fig3(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let axis = opts.axis(AxisKind::EbN0Db, "-2:10:1");
    let mut out = Vec::new();
    for (i, scheme) in BaselineScheme::ALL.into_iter().enumerate() {
        let recs = sweep_baseline(scheme, &axis, opts.blocks, opts.eval_seed.wrapping_add(i as u64))?;
        out.push(curve(
            format!("fig3_{}.csv", scheme.name()),
            scheme.name(),
            None,
            &recs,
            opts,
        )?);
    }
    let (model, _) = trained(16, 1, TrainingSnr::Fixed(10.0), opts)?;
    let recs = sweep_model(&model, &axis, opts.blocks, opts.eval_seed)?;
    out.push(curve(
        "fig3_autoencoder_M16.csv".into(),
        "autoencoder M=16 one-hot",
        Some(&model),
        &recs,
        opts,
    )?);
    Ok(out)
}

fn fig4(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let axis = opts.axis(AxisKind::EbN0Db, "-2:10:1");
    let mut out = Vec::new();
    for size in STANDARD_SIZES {
        let (model, _) = trained(size, 1, TrainingSnr::Fixed(10.0), opts)?;
        let recs = sweep_model(&model, &axis, opts.blocks, opts.eval_seed)?;
        out.push(curve(
            format!("fig4_onehot_M{size}.csv"),
            &format!("one-hot M={size}"),
            Some(&model),
            &recs,
            opts,
        )?);
    }
    Ok(out)
}

struct AdaptiveRun {
    conventional: Vec<(usize, Autoencoder, Vec<MetricRecord>)>,
    adaptive: Autoencoder,
    per_threshold: Vec<(f64, Vec<(AdaptiveState, MetricRecord)>)>,
}

fn adaptive_run(opts: &RecipeOptions, with_conventional: bool) -> Result<AdaptiveRun> {
    let axis = opts.axis(AxisKind::SnrDb, "-5:5:2");
    let mut conventional = Vec::new();
    let mut adaptive = None;
    for size in STANDARD_SIZES {
        if !with_conventional && size != 64 {
            continue;
        }
        let (model, _) = trained(size, 1, TrainingSnr::Fixed(10.0), opts)?;
        let recs = sweep_model(&model, &axis, opts.blocks, opts.eval_seed)?;
        if size == 64 {
            adaptive = Some(model.clone());
        }
        conventional.push((size, model, recs));
    }
    let adaptive = adaptive.expect("M=64 is a standard size");
    let mut per_threshold = Vec::new();
    for th in THRESHOLDS {
        per_threshold.push((
            th,
            sweep_adaptive(&adaptive, &axis, th, opts.probes, opts.blocks, opts.eval_seed)?,
        ));
    }
    Ok(AdaptiveRun {
        conventional,
        adaptive,
        per_threshold,
    })
}

fn fig5(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let run = adaptive_run(opts, true)?;
    let mut out = Vec::new();
    for (size, model, recs) in &run.conventional {
        out.push(curve(
            format!("fig5_onehot_M{size}.csv"),
            &format!("conventional one-hot M={size}"),
            Some(model),
            recs,
            opts,
        )?);
    }
    let mut summary = CsvTable::new(&[
        "snr_db",
        "threshold",
        "M1",
        "bler_adaptive",
        "bler_conventional",
        "reduction",
        "compatible_or_better",
    ]);
    let mut any80 = false;
    for (th, rows) in &run.per_threshold {
        out.push(adaptive_table(
            format!("fig5_adaptive_th{}.csv", threshold_tag(*th)),
            &run.adaptive,
            rows,
            *th,
            opts,
        )?);
        for (state, r) in rows {
            let Some((_, _, conv)) = run.conventional.iter().find(|(s, _, _)| *s == state.m1) else {
                continue;
            };
            let c = conv.iter().find(|c| c.snr_point == r.snr_point).expect("shared axis");
            let reduction = if c.bler > 0.0 { 1.0 - r.bler / c.bler } else { f64::NAN };
            any80 |= reduction >= 0.8;
            let ok = r.bler <= c.bler || r.bler_compatible(c);
            summary.push(vec![
                point(r.snr_point),
                real(*th),
                state.m1.to_string(),
                real(r.bler),
                real(c.bler),
                real(reduction),
                ok.to_string(),
            ])?;
        }
    }
    summary.comment(
        "curve",
        "matched-rate comparison, adaptive M1 against conventional M = M1",
    );
    summary.comment("reduction_80_percent_reached", any80.to_string());
    out.push(("fig5_matched_rate.csv".into(), summary));
    Ok(out)
}

fn fig6(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let run = adaptive_run(opts, false)?;
    let axis = opts.axis(AxisKind::SnrDb, "-5:5:2");
    let mut t = CsvTable::new(&["snr_db", "scheme", "threshold", "M1", "rate_bits_per_use"]);
    for size in STANDARD_SIZES {
        for p in &axis.points {
            let rate = (size as f64).log2() / 7.0;
            t.push(vec![
                point(*p),
                format!("onehot_M{size}"),
                String::new(),
                size.to_string(),
                real(rate),
            ])?;
        }
    }
    for (th, rows) in &run.per_threshold {
        for (state, r) in rows {
            t.push(vec![
                point(r.snr_point),
                "adaptive".into(),
                real(*th),
                state.m1.to_string(),
                real(r.rate),
            ])?;
        }
    }
    t.comment("training", describe_training(&run.adaptive));
    t.comment("probes", opts.probes.to_string());
    Ok(vec![("fig6_data_rate.csv".into(), t)])
}

fn fig7(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let run = adaptive_run(opts, false)?;
    run.per_threshold
        .iter()
        .map(|(th, rows)| {
            adaptive_table(
                format!("fig7_mse_th{}.csv", threshold_tag(*th)),
                &run.adaptive,
                rows,
                *th,
                opts,
            )
        })
        .collect()
}

fn fig8(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let axis = opts.axis(AxisKind::SnrDb, "-5:10:1");
    let mut out = Vec::new();
    for (panel, configs) in [
        ("a", vec![(8, 1), (8, 2), (8, 3), (8, 4)]),
        ("b", vec![(8, 4), (16, 2), (64, 1)]),
    ] {
        for (size, order) in configs {
            let (model, _) = trained(size, order, TrainingSnr::Fixed(5.0), opts)?;
            let recs = sweep_model(&model, &axis, opts.blocks, opts.eval_seed)?;
            out.push(curve(
                format!("fig8{panel}_M{size}_m{order}.csv"),
                &format!("M={size} m={order}"),
                Some(&model),
                &recs,
                opts,
            )?);
        }
    }
    Ok(out)
}

fn fig9(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let axis = opts.axis(AxisKind::EbN0Db, "-10:30:1");
    let configs = [
        (8, 1),
        (8, 2),
        (8, 3),
        (8, 4),
        (16, 1),
        (16, 2),
        (16, 6),
        (64, 1),
        (64, 2),
    ];
    let mut out = Vec::new();
    for (size, order) in configs {
        let mut t = CsvTable::new(&["ebn0_db", "achievable_rate_bits_per_s_per_hz"]);
        for p in &axis.points {
            t.push(vec![point(*p), real(achievable_rate(size, order, 7, *p)?)])?;
        }
        t.comment("curve", format!("M={size} m={order} bits={}", bits_for(size, order)));
        out.push((format!("fig9_M{size}_m{order}.csv"), t));
    }
    Ok(out)
}

fn fig10(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let axis = opts.axis(AxisKind::SnrDb, "-5:5:2");
    let th = 1e-4;
    let mut out = Vec::new();
    let (onehot, _) = trained(64, 1, TrainingSnr::Fixed(5.0), opts)?;
    let recs = sweep_model(&onehot, &axis, opts.blocks, opts.eval_seed)?;
    out.push(curve(
        "fig10_onehot_M64.csv".into(),
        "one-hot M=64",
        Some(&onehot),
        &recs,
        opts,
    )?);
    let rows = sweep_adaptive(&onehot, &axis, th, opts.probes, opts.blocks, opts.eval_seed)?;
    out.push(adaptive_table("fig10_adaptive.csv".into(), &onehot, &rows, th, opts)?);
    let (gdr, _) = trained(8, 4, TrainingSnr::Fixed(5.0), opts)?;
    let recs = sweep_model(&gdr, &axis, opts.blocks, opts.eval_seed)?;
    out.push(curve(
        "fig10_gdr_M8_m4.csv".into(),
        "GDR M=8 m=4",
        Some(&gdr),
        &recs,
        opts,
    )?);
    let rows = sweep_adaptive(&gdr, &axis, th, opts.probes, opts.blocks, opts.eval_seed)?;
    out.push(adaptive_table("fig10_adaptive_gdr.csv".into(), &gdr, &rows, th, opts)?);
    Ok(out)
}

fn training_snr_models(
    opts: &RecipeOptions,
    fixed: &[f64],
    set: &[f64],
) -> Result<Vec<(String, Autoencoder, TrainingTrace)>> {
    let mut out = Vec::new();
    for &db in fixed {
        let (m, t) = trained(8, 1, TrainingSnr::Fixed(db), opts)?;
        out.push((format!("snrT_{}", point(db).replace('-', "m")), m, t));
    }
    let (m, t) = trained(8, 1, TrainingSnr::Set(set.to_vec()), opts)?;
    out.push(("snrT_set".into(), m, t));
    Ok(out)
}

const FIG11_FIXED: [f64; 6] = [-30.0, -20.0, -10.0, 0.0, 10.0, 20.0];
const FIG11_SET: [f64; 5] = [-20.0, -10.0, 0.0, 10.0, 20.0];

fn fig11(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let mut out = Vec::new();
    for (tag, model, trace) in training_snr_models(opts, &FIG11_FIXED, &FIG11_SET)? {
        let mut t = CsvTable::new(&["epoch", "loss"]);
        for (e, l) in trace.epoch_losses.iter().enumerate() {
            t.push(vec![(e + 1).to_string(), real(*l)])?;
        }
        t.comment("training", describe_training(&model));
        t.comment("converged", trace.converged().to_string());
        out.push((format!("fig11_loss_{tag}.csv"), t));
    }
    Ok(out)
}

fn training_snr_sweeps(
    opts: &RecipeOptions,
    prefix: &str,
    fixed: &[f64],
    set: &[f64],
) -> Result<Vec<(String, CsvTable)>> {
    let axis = opts.axis(AxisKind::SnrDb, "-10:20:2");
    let mut out = Vec::new();
    for (tag, model, _) in training_snr_models(opts, fixed, set)? {
        let recs = sweep_model(&model, &axis, opts.blocks, opts.eval_seed)?;
        out.push(curve(
            format!("{prefix}_{tag}.csv"),
            &describe_training(&model),
            Some(&model),
            &recs,
            opts,
        )?);
    }
    Ok(out)
}

fn fig12(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    training_snr_sweeps(opts, "fig12_bler", &FIG11_FIXED, &FIG11_SET)
}

fn fig13(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    training_snr_sweeps(opts, "fig13_mse", &FIG11_FIXED, &FIG11_SET)
}

fn table4(_: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let mut t = CsvTable::new(&[
        "M",
        "dense",
        "normalization",
        "relu",
        "softmax",
        "total",
        "model_parameters",
    ]);
    for size in STANDARD_SIZES {
        let c = theoretical_param_count(size, 7);
        let actual = build_model(build_gdr(size, 1)?, 7, 0)?.parameter_count();
        t.push(vec![
            size.to_string(),
            c.dense.to_string(),
            c.normalization.to_string(),
            c.relu.to_string(),
            c.softmax.to_string(),
            c.total.to_string(),
            actual.to_string(),
        ])?;
    }
    t.comment("n", "7");
    t.comment(
        "model_parameters",
        "trainable parameters of the implemented model (l2 normalization has none)",
    );
    Ok(vec![("table4_parameters.csv".into(), t)])
}

fn table6(_: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let mut t = CsvTable::new(&["M", "m", "messages", "bits_per_message", "rate", "rate_bits_per_use"]);
    for (size, order) in [(8, 1), (8, 2), (8, 3), (8, 4), (16, 2), (64, 1)] {
        let cb = build_gdr(size, order)?;
        t.push(vec![
            size.to_string(),
            order.to_string(),
            cb.len().to_string(),
            cb.bits_per_message().to_string(),
            format!("{}/7", cb.bits_per_message()),
            real(data_rate(&cb, 7)),
        ])?;
    }
    t.comment("n", "7");
    Ok(vec![("table6_data_rates.csv".into(), t)])
}

fn corrections_fig1(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let axis = opts.axis(AxisKind::EbN0Db, "0:10:1");
    let mut out = Vec::new();
    for order in 1..=4 {
        let (model, _) = trained(8, order, TrainingSnr::Fixed(10.0), opts)?;
        let recs = sweep_model(&model, &axis, opts.blocks, opts.eval_seed)?;
        out.push(curve(
            format!("corrections_fig1_M8_m{order}.csv"),
            &format!("M=8 m={order}"),
            Some(&model),
            &recs,
            opts,
        )?);
    }
    Ok(out)
}

fn corrections_fig2(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    training_snr_sweeps(
        opts,
        "corrections_fig2",
        &[-10.0, 0.0, 10.0, 20.0, 30.0],
        &[0.0, 10.0, 20.0, 30.0],
    )
}

fn mse_analysis(opts: &RecipeOptions) -> Result<Vec<(String, CsvTable)>> {
    let (model, _) = trained(4, 1, TrainingSnr::Fixed(10.0), opts)?;
    let mut t = CsvTable::new(&[
        "sigma2",
        "signal_term",
        "noise_term",
        "predicted_total",
        "simulated_mse",
        "active_fraction",
        "region_fraction",
        "simulated_mse_all",
        "excluded_entries",
    ]);
    let sigmas = opts.points.clone().unwrap_or_else(|| vec![0.001, 0.01, 0.05, 0.1, 0.2]);
    for (i, s2) in sigmas.iter().enumerate() {
        let d = mse_decomposition(&model, *s2, opts.blocks, &mut stream(opts.eval_seed, i as u64))?;
        let excluded: Vec<String> = d.excluded_entries.iter().map(|e| e.to_string()).collect();
        t.push(vec![
            point(*s2),
            real(d.signal_term),
            real(d.noise_term),
            real(d.predicted_total),
            real(d.simulated_mse),
            real(d.active_fraction),
            real(d.region_fraction),
            real(d.simulated_mse_all),
            excluded.join(" "),
        ])?;
    }
    t.comment("codebook", model.codebook().manifest().to_string());
    t.comment("training", describe_training(&model));
    t.comment("taylor_order", "20");
    Ok(vec![("mse_analysis.csv".into(), t)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_recipe_lists_names() {
        match run_figure("fig99", &RecipeOptions::default(), None) {
            Err(Error::UnknownRecipe { available, .. }) => {
                for name in recipe_names() {
                    assert!(available.contains(name));
                }
            }
            other => panic!("{:?}", other.map(|o| o.files.len())),
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names = recipe_names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), RECIPES.len());
    }

    #[test]
    fn table4_totals() {
        let out = run_figure("table4", &RecipeOptions::default(), None).unwrap();
        let t = &out.files[0].1;
        assert_eq!(t.column("total").unwrap(), vec!["121", "285", "805", "2613", "9301"]);
    }

    #[test]
    fn fig9_needs_no_training_and_is_exact() {
        let out = run_figure("fig9", &RecipeOptions::default(), None).unwrap();
        assert_eq!(out.files.len(), 9);
        let (_, t) = out.files.iter().find(|(n, _)| n == "fig9_M16_m6.csv").unwrap();
        let row = t.rows.iter().find(|r| r[0] == "20").unwrap();
        let v: f64 = row[1].parse().unwrap();
        assert!((v - achievable_rate(16, 6, 7, 20.0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn quick_training_recipe_writes_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RecipeOptions {
            blocks: 500,
            epochs: 2,
            train_samples: 450,
            points: Some(vec![0.0, 4.0]),
            ..RecipeOptions::default()
        };
        let out = run_figure("corrections_fig1", &opts, Some(dir.path())).unwrap();
        assert_eq!(out.files.len(), 4);
        for (name, table) in &out.files {
            let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
            assert_eq!(text, table.render());
            assert!(text.contains("# recipe: corrections_fig1"));
        }
        let manifest = std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
        assert!(manifest.contains("corrections_fig1_M8_m4.csv"));
    }
}
