//! Experiment configuration files.
//!
//! ```toml
//! scheme = "gdr"          # onehot | gdr | adaptive | adaptive_gdr | hamming_hd | hamming_ml | uncoded
//! size = 8                # M
//! order = 3               # m
//! channel_uses = 7        # n
//! blocks = 100000
//! output = "out/gdr"
//!
//! [axis]
//! kind = "ebn0_db"        # or "snr_db"
//! range = "-2:10:1"       # or points = [0.0, 5.0]
//!
//! [training]
//! snr_db = 10.0           # or snr_set_db = [0.0, 10.0, 20.0, 30.0]
//! epochs = 150
//! batch_size = 45
//! train_samples = 20000
//! test_samples = 1000000
//! loss = "mse"            # or "categorical_cross_entropy"
//! learning_rate = 0.001
//!
//! [adaptive]
//! mse_threshold = 1e-4
//! probes = 1
//!
//! [seeds]
//! train = 1
//! eval = 2
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::autoencoder::{TrainingConfig, TrainingSnr};
use crate::error::{Error, Result};
use crate::nn::LossKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AxisKind {
    #[serde(rename = "ebn0_db")]
    EbN0Db,
    #[serde(rename = "snr_db")]
    SnrDb,
}

impl AxisKind {
    /// Column name of the axis in CSV output.
    pub fn column(self) -> &'static str {
        match self {
            AxisKind::EbN0Db => "ebn0_db",
            AxisKind::SnrDb => "snr_db",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ebn0_db" | "ebn0" => Some(AxisKind::EbN0Db),
            "snr_db" | "snr" => Some(AxisKind::SnrDb),
            _ => None,
        }
    }
}

impl fmt::Display for AxisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnrAxis {
    pub kind: AxisKind,
    pub points: Vec<f64>,
}

impl SnrAxis {
    pub fn new(kind: AxisKind, points: Vec<f64>) -> Self {
        Self { kind, points }
    }

    pub fn describe(&self) -> String {
        let pts: Vec<String> = self.points.iter().map(|p| format!("{p}")).collect();
        format!("{} [{}]", self.kind, pts.join(","))
    }
}

/// Parses `start:stop:step` (inclusive), a comma list, or a single value.
pub fn parse_axis(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::config("axis", msg);
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("`{s}` is not a number")))
            .and_then(|v| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(bad(format!("`{s}` is not finite")))
                }
            })
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').map(num).collect(),
        3 => {
            let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if step <= 0.0 {
                return Err(bad(format!("step must be positive in `{text}`")));
            }
            if stop < start {
                return Err(bad(format!("stop below start in `{text}`")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(bad(format!("`{text}` has {count} points")));
            }
            // Rounded to 1e-9 so that 0.1-style steps print cleanly.
            Ok((0..count)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect())
        }
        _ => Err(bad(format!("expected start:stop:step, got `{text}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Onehot,
    Gdr,
    Adaptive,
    AdaptiveGdr,
    HammingHd,
    HammingMl,
    Uncoded,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Onehot,
        Scheme::Gdr,
        Scheme::Adaptive,
        Scheme::AdaptiveGdr,
        Scheme::HammingHd,
        Scheme::HammingMl,
        Scheme::Uncoded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Onehot => "onehot",
            Scheme::Gdr => "gdr",
            Scheme::Adaptive => "adaptive",
            Scheme::AdaptiveGdr => "adaptive_gdr",
            Scheme::HammingHd => "hamming_hd",
            Scheme::HammingMl => "hamming_ml",
            Scheme::Uncoded => "uncoded",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Scheme::HammingHd | Scheme::HammingMl | Scheme::Uncoded)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub size: usize,
    pub order: usize,
    pub channel_uses: usize,
    pub axis: SnrAxis,
    /// Training seed lives in `training.seed`.
    pub training: TrainingConfig,
    pub mse_threshold: f64,
    pub probes: usize,
    pub eval_seed: u64,
    pub blocks: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Onehot,
            size: 8,
            order: 1,
            channel_uses: 7,
            axis: SnrAxis::new(AxisKind::EbN0Db, parse_axis("-2:10:1").expect("static axis")),
            training: TrainingConfig::default(),
            mse_threshold: 1e-4,
            probes: 1,
            eval_seed: 2,
            blocks: 100_000,
            output: None,
        }
    }
}

fn take<T: DeserializeOwned>(table: &mut toml::Table, section: Option<&str>, key: &str) -> Result<Option<T>> {
    let path = match section {
        Some(s) => format!("{s}.{key}"),
        None => key.to_string(),
    };
    match table.remove(key) {
        None => Ok(None),
        Some(v) => T::deserialize(v)
            .map(Some)
            .map_err(|e| Error::config(path, e.to_string().trim().to_string())),
    }
}

fn take_section(table: &mut toml::Table, name: &str) -> Result<toml::Table> {
    match table.remove(name) {
        None => Ok(toml::Table::new()),
        Some(toml::Value::Table(t)) => Ok(t),
        Some(_) => Err(Error::config(name, "expected a table")),
    }
}

fn reject_leftovers(table: &toml::Table, section: Option<&str>) -> Result<()> {
    match table.keys().next() {
        None => Ok(()),
        Some(k) => {
            let path = match section {
                Some(s) => format!("{s}.{k}"),
                None => k.clone(),
            };
            Err(Error::config(path, "unknown field"))
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut root: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
        let mut c = ExperimentConfig::default();

        if let Some(name) = take::<String>(&mut root, None, "scheme")? {
            c.scheme = Scheme::from_name(&name).ok_or_else(|| {
                let names: Vec<&str> = Scheme::ALL.iter().map(|s| s.name()).collect();
                Error::config(
                    "scheme",
                    format!("unknown scheme `{name}`; expected one of {}", names.join(", ")),
                )
            })?;
        }
        if let Some(v) = take(&mut root, None, "size")? {
            c.size = v;
        }
        if let Some(v) = take(&mut root, None, "order")? {
            c.order = v;
        }
        if let Some(v) = take(&mut root, None, "channel_uses")? {
            c.channel_uses = v;
        }
        if let Some(v) = take(&mut root, None, "blocks")? {
            c.blocks = v;
        }
        if let Some(v) = take::<String>(&mut root, None, "output")? {
            c.output = Some(PathBuf::from(v));
        }

        let mut axis = take_section(&mut root, "axis")?;
        if let Some(kind) = take::<String>(&mut axis, Some("axis"), "kind")? {
            c.axis.kind = AxisKind::from_name(&kind)
                .ok_or_else(|| Error::config("axis.kind", format!("expected ebn0_db or snr_db, got `{kind}`")))?;
        }
        let range = take::<String>(&mut axis, Some("axis"), "range")?;
        let points = take::<Vec<f64>>(&mut axis, Some("axis"), "points")?;
        match (range, points) {
            (Some(_), Some(_)) => return Err(Error::config("axis", "give either range or points, not both")),
            (Some(r), None) => {
                c.axis.points = parse_axis(&r).map_err(|e| match e {
                    Error::Config { message, .. } => Error::config("axis.range", message),
                    other => other,
                })?
            }
            (None, Some(p)) => c.axis.points = p,
            (None, None) => {}
        }
        reject_leftovers(&axis, Some("axis"))?;

        let mut tr = take_section(&mut root, "training")?;
        let s = Some("training");
        let fixed = take::<f64>(&mut tr, s, "snr_db")?;
        let set = take::<Vec<f64>>(&mut tr, s, "snr_set_db")?;
        match (fixed, set) {
            (Some(_), Some(_)) => return Err(Error::config("training", "give either snr_db or snr_set_db, not both")),
            (Some(v), None) => c.training.snr = TrainingSnr::Fixed(v),
            (None, Some(v)) => c.training.snr = TrainingSnr::Set(v),
            (None, None) => {}
        }
        if let Some(v) = take(&mut tr, s, "epochs")? {
            c.training.epochs = v;
        }
        if let Some(v) = take(&mut tr, s, "batch_size")? {
            c.training.batch_size = v;
        }
        if let Some(v) = take(&mut tr, s, "train_samples")? {
            c.training.train_samples = v;
        }
        if let Some(v) = take(&mut tr, s, "test_samples")? {
            c.training.test_samples = v;
        }
        if let Some(name) = take::<String>(&mut tr, s, "loss")? {
            c.training.loss = LossKind::from_name(&name)
                .ok_or_else(|| Error::config("training.loss", format!("unknown loss `{name}`")))?;
        }
        if let Some(v) = take(&mut tr, s, "learning_rate")? {
            c.training.adam.learning_rate = v;
        }
        reject_leftovers(&tr, s)?;

        let mut ad = take_section(&mut root, "adaptive")?;
        if let Some(v) = take(&mut ad, Some("adaptive"), "mse_threshold")? {
            c.mse_threshold = v;
        }
        if let Some(v) = take(&mut ad, Some("adaptive"), "probes")? {
            c.probes = v;
        }
        reject_leftovers(&ad, Some("adaptive"))?;

        let mut seeds = take_section(&mut root, "seeds")?;
        if let Some(v) = take(&mut seeds, Some("seeds"), "train")? {
            c.training.seed = v;
        }
        if let Some(v) = take(&mut seeds, Some("seeds"), "eval")? {
            c.eval_seed = v;
        }
        reject_leftovers(&seeds, Some("seeds"))?;
        reject_leftovers(&root, None)?;

        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::config("size", "must be at least 2"));
        }
        if self.order == 0 || self.order > self.size / 2 {
            return Err(Error::config("order", format!("must be in 1..={}", self.size / 2)));
        }
        if self.channel_uses == 0 {
            return Err(Error::config("channel_uses", "must be at least 1"));
        }
        if self.blocks == 0 {
            return Err(Error::config("blocks", "must be at least 1"));
        }
        if self.probes == 0 {
            return Err(Error::config("adaptive.probes", "must be at least 1"));
        }
        if !(self.mse_threshold >= 0.0) {
            return Err(Error::config("adaptive.mse_threshold", "must be non-negative"));
        }
        if self.axis.points.is_empty() {
            return Err(Error::config("axis", "no points"));
        }
        if self.axis.points.iter().any(|p| !p.is_finite()) {
            return Err(Error::config("axis.points", "non-finite point"));
        }
        self.training.validate().map_err(|e| match e {
            Error::Config { field, message } => Error::config(format!("training.{field}"), message),
            other => other,
        })
    }

    /// Key/value lines echoed into CSV headers.
    pub fn echo(&self) -> Vec<(String, String)> {
        let t = &self.training;
        let mut out = vec![
            ("scheme".to_string(), self.scheme.name().to_string()),
            ("M".to_string(), self.size.to_string()),
            ("m".to_string(), self.order.to_string()),
            ("n".to_string(), self.channel_uses.to_string()),
            ("axis".to_string(), self.axis.describe()),
            ("blocks".to_string(), self.blocks.to_string()),
            ("training_snr".to_string(), t.snr.describe()),
            ("epochs".to_string(), t.epochs.to_string()),
            ("batch_size".to_string(), t.batch_size.to_string()),
            ("train_samples".to_string(), t.train_samples.to_string()),
            ("loss".to_string(), t.loss.name().to_string()),
            ("learning_rate".to_string(), format!("{}", t.adam.learning_rate)),
            ("train_seed".to_string(), t.seed.to_string()),
            ("eval_seed".to_string(), self.eval_seed.to_string()),
        ];
        if matches!(self.scheme, Scheme::Adaptive | Scheme::AdaptiveGdr) {
            out.push(("mse_threshold".to_string(), format!("{:e}", self.mse_threshold)));
            out.push(("probes".to_string(), self.probes.to_string()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_ranges() {
        let p = parse_axis("-2:10:1").unwrap();
        assert_eq!(p.len(), 13);
        assert_eq!(p[0], -2.0);
        assert_eq!(p[12], 10.0);
        assert_eq!(parse_axis("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_axis("0:1:0.1").unwrap()[3], 0.3);
        assert_eq!(parse_axis("-5,-3,1").unwrap(), vec![-5.0, -3.0, 1.0]);
        assert_eq!(parse_axis("4").unwrap(), vec![4.0]);
        assert!(parse_axis("0:1:0").is_err());
        assert!(parse_axis("3:1:1").is_err());
        assert!(parse_axis("a:1:1").is_err());
        assert!(parse_axis("1:2").is_err());
    }

    #[test]
    fn full_file_parses() {
        let c = ExperimentConfig::from_toml_str(
            r#"
scheme = "adaptive"
size = 64
channel_uses = 7
blocks = 1000
[axis]
kind = "snr_db"
points = [-5.0, 5.0]
[training]
snr_set_db = [0.0, 10.0]
epochs = 3
loss = "categorical_cross_entropy"
[adaptive]
mse_threshold = 1e-5
probes = 100
[seeds]
train = 7
eval = 8
"#,
        )
        .unwrap();
        assert_eq!(c.scheme, Scheme::Adaptive);
        assert_eq!(c.size, 64);
        assert_eq!(c.axis, SnrAxis::new(AxisKind::SnrDb, vec![-5.0, 5.0]));
        assert_eq!(c.training.snr, TrainingSnr::Set(vec![0.0, 10.0]));
        assert_eq!(c.training.loss, LossKind::CategoricalCrossEntropy);
        assert_eq!(c.training.seed, 7);
        assert_eq!(c.eval_seed, 8);
        assert_eq!(c.probes, 100);
    }

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(
            ExperimentConfig::from_toml_str("").unwrap(),
            ExperimentConfig::default()
        );
    }

    fn field_of(text: &str) -> String {
        match ExperimentConfig::from_toml_str(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of("size = \"big\""), "size");
        assert_eq!(field_of("[training]\nepochs = -1"), "training.epochs");
        assert_eq!(field_of("[training]\nepochs = 0"), "training.epochs");
        assert_eq!(field_of("[training]\nsnr_set_db = []"), "training.training_snr_set_db");
        assert_eq!(field_of("[axis]\nrange = \"1:0:1\""), "axis.range");
        assert_eq!(field_of("[axis]\nkind = \"db\""), "axis.kind");
        assert_eq!(field_of("colour = 3"), "colour");
        assert_eq!(field_of("[seeds]\ntrian = 3"), "seeds.trian");
        assert_eq!(field_of("scheme = \"turbo\""), "scheme");
        assert_eq!(field_of("order = 9"), "order");
        assert_eq!(field_of("[adaptive]\nprobes = 0"), "adaptive.probes");
        assert_eq!(field_of("size = "), "<file>");
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(Scheme::from_name(s.name()), Some(s));
        }
    }
}
