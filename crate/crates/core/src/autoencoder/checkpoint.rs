//! Versioned text checkpoints.
//!
//! ```text
//! dlcomm-checkpoint <format_version>
//! [codebook]
//! M <size>
//! m <order>
//! selection <lexicographic|random>
//! selection_seed <u64>
//! bits_per_message <u32>
//! [model]
//! n <channel uses>
//! seed <u64>
//! [training]
//! trained <true|false>
//! epochs / batch_size / train_samples / test_samples <usize>
//! loss <mse|categorical_cross_entropy>
//! training_snr <fixed|set> <dB values…>
//! train_seed <u64>
//! adam <learning_rate> <beta1> <beta2> <epsilon>
//! [layer transmitter.0]      one section per dense layer, in order:
//! dense <activation> <rows> <cols>   transmitter.0, transmitter.1,
//! w <cols values>   × rows           receiver.0, receiver.1
//! b <rows values>
//! [end]
//! ```
//!
//! Reals are written with 17 significant digits so a round trip restores
//! every parameter bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::train::{TrainingConfig, TrainingSnr};
use super::Autoencoder;
use crate::error::{CheckpointError, Error, Result};
use crate::nn::{Activation, AdamConfig, DenseLayer, Layer, LossKind, Matrix, Network};
use crate::representation::{Codebook, CodebookManifest, Selection};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "dlcomm-checkpoint";
const LAYERS: [&str; 4] = [
    "layer transmitter.0",
    "layer transmitter.1",
    "layer receiver.0",
    "layer receiver.1",
];

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_layer(out: &mut String, name: &str, d: &DenseLayer) {
    let _ = writeln!(out, "[{name}]");
    let _ = writeln!(
        out,
        "dense {} {} {}",
        d.activation.name(),
        d.weights.rows(),
        d.weights.cols()
    );
    for r in 0..d.weights.rows() {
        let row: Vec<String> = d.weights.row(r).iter().map(|v| real(*v)).collect();
        let _ = writeln!(out, "w {}", row.join(" "));
    }
    let bias: Vec<String> = d.bias.iter().map(|v| real(*v)).collect();
    let _ = writeln!(out, "b {}", bias.join(" "));
}

/// Serializes a model to the checkpoint text format.
pub fn to_checkpoint_string(model: &Autoencoder) -> String {
    let mut out = String::new();
    let cb = model.codebook.manifest();
    let _ = writeln!(out, "{MAGIC} {CHECKPOINT_VERSION}");
    let _ = writeln!(out, "[codebook]");
    let _ = writeln!(out, "M {}", cb.size);
    let _ = writeln!(out, "m {}", cb.order);
    let _ = writeln!(out, "selection {}", cb.selection.name());
    let _ = writeln!(out, "selection_seed {}", cb.selection.seed());
    let _ = writeln!(out, "bits_per_message {}", cb.bits_per_message);
    let _ = writeln!(out, "[model]");
    let _ = writeln!(out, "n {}", model.channel_uses);
    let _ = writeln!(out, "seed {}", model.seed);
    let _ = writeln!(out, "[training]");
    match &model.training {
        None => {
            let _ = writeln!(out, "trained false");
        }
        Some(c) => {
            let _ = writeln!(out, "trained true");
            let _ = writeln!(out, "epochs {}", c.epochs);
            let _ = writeln!(out, "batch_size {}", c.batch_size);
            let _ = writeln!(out, "train_samples {}", c.train_samples);
            let _ = writeln!(out, "test_samples {}", c.test_samples);
            let _ = writeln!(out, "loss {}", c.loss.name());
            match &c.snr {
                TrainingSnr::Fixed(db) => {
                    let _ = writeln!(out, "training_snr fixed {}", real(*db));
                }
                TrainingSnr::Set(set) => {
                    let vals: Vec<String> = set.iter().map(|v| real(*v)).collect();
                    let _ = writeln!(out, "training_snr set {}", vals.join(" "));
                }
            }
            let _ = writeln!(out, "train_seed {}", c.seed);
            let a = c.adam;
            let _ = writeln!(
                out,
                "adam {} {} {} {}",
                real(a.learning_rate),
                real(a.beta1),
                real(a.beta2),
                real(a.epsilon)
            );
        }
    }
    let dense: Vec<&DenseLayer> = model
        .transmitter
        .dense_layers()
        .chain(model.receiver.dense_layers())
        .collect();
    for (name, d) in LAYERS.iter().zip(dense) {
        write_layer(&mut out, name, d);
    }
    let _ = writeln!(out, "[end]");
    out
}

pub fn save_checkpoint(model: &Autoencoder, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_checkpoint_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Autoencoder> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_checkpoint_str(&text)
}

struct Section<'a> {
    lines: Vec<(usize, &'a str)>,
}

impl<'a> Section<'a> {
    fn field(&self, key: &str) -> std::result::Result<(usize, &'a str), CheckpointError> {
        self.lines
            .iter()
            .find_map(|(n, l)| {
                let (k, v) = l.split_once(' ').unwrap_or((l, ""));
                (k == key).then_some((*n, v.trim()))
            })
            .ok_or_else(|| CheckpointError::Malformed {
                line: self.lines.last().map_or(0, |(n, _)| *n),
                message: format!("missing field `{key}`"),
            })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> std::result::Result<T, CheckpointError> {
        let (line, v) = self.field(key)?;
        v.parse().map_err(|_| CheckpointError::Malformed {
            line,
            message: format!("cannot parse `{key}` from `{v}`"),
        })
    }
}

fn parse_reals(line: usize, text: &str, expected: usize) -> std::result::Result<Vec<f64>, CheckpointError> {
    let vals = text
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CheckpointError::Malformed {
            line,
            message: format!("bad real: {e}"),
        })?;
    if vals.len() != expected {
        return Err(CheckpointError::DimensionMismatch(format!(
            "line {line}: expected {expected} values, found {}",
            vals.len()
        )));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(CheckpointError::Malformed {
            line,
            message: "non-finite parameter".into(),
        });
    }
    Ok(vals)
}

fn parse_layer(
    name: &str,
    section: &Section<'_>,
    rows: usize,
    cols: usize,
    activation: Activation,
) -> std::result::Result<DenseLayer, CheckpointError> {
    let (line, header) = section.field("dense")?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(CheckpointError::Malformed {
            line,
            message: "expected `dense <activation> <rows> <cols>`".into(),
        });
    }
    let act = Activation::from_name(parts[0]).ok_or_else(|| CheckpointError::Malformed {
        line,
        message: format!("unknown activation `{}`", parts[0]),
    })?;
    let (r, c): (usize, usize) = match (parts[1].parse(), parts[2].parse()) {
        (Ok(r), Ok(c)) => (r, c),
        _ => {
            return Err(CheckpointError::Malformed {
                line,
                message: "bad layer dimensions".into(),
            })
        }
    };
    if (r, c) != (rows, cols) || act != activation {
        return Err(CheckpointError::DimensionMismatch(format!(
            "{name}: file has {} {r}x{c}, architecture needs {} {rows}x{cols}",
            act.name(),
            activation.name()
        )));
    }
    let w_lines: Vec<&(usize, &str)> = section.lines.iter().filter(|(_, l)| l.starts_with("w ")).collect();
    let b_line = section.lines.iter().find(|(_, l)| l.starts_with("b "));
    if w_lines.len() < rows || b_line.is_none() {
        return Err(CheckpointError::Truncated {
            section: name.to_string(),
        });
    }
    if w_lines.len() > rows {
        return Err(CheckpointError::DimensionMismatch(format!(
            "{name}: {} weight rows, expected {rows}",
            w_lines.len()
        )));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (n, l) in w_lines {
        data.extend(parse_reals(*n, &l[2..], cols)?);
    }
    let (bn, bl) = b_line.expect("checked");
    let bias = parse_reals(*bn, &bl[2..], rows)?;
    let weights = Matrix::from_vec(rows, cols, data).map_err(|e| CheckpointError::Malformed {
        line: *bn,
        message: e.to_string(),
    })?;
    Ok(DenseLayer {
        weights,
        bias,
        activation,
    })
}

fn parse_training(s: &Section<'_>) -> std::result::Result<Option<TrainingConfig>, CheckpointError> {
    let trained: bool = s.parse("trained")?;
    if !trained {
        return Ok(None);
    }
    let (line, loss) = s.field("loss")?;
    let loss = LossKind::from_name(loss).ok_or_else(|| CheckpointError::Malformed {
        line,
        message: format!("unknown loss `{loss}`"),
    })?;
    let (line, snr) = s.field("training_snr")?;
    let (kind, rest) = snr.split_once(' ').unwrap_or((snr, ""));
    let values = rest
        .split_whitespace()
        .map(str::parse::<f64>)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CheckpointError::Malformed {
            line,
            message: e.to_string(),
        })?;
    let snr = match (kind, values.len()) {
        ("fixed", 1) => TrainingSnr::Fixed(values[0]),
        ("set", n) if n > 0 => TrainingSnr::Set(values),
        _ => {
            return Err(CheckpointError::Malformed {
                line,
                message: "expected `training_snr fixed <dB>` or `training_snr set <dB…>`".into(),
            })
        }
    };
    let (line, adam) = s.field("adam")?;
    let a = parse_reals(line, adam, 4)?;
    Ok(Some(TrainingConfig {
        epochs: s.parse("epochs")?,
        batch_size: s.parse("batch_size")?,
        train_samples: s.parse("train_samples")?,
        test_samples: s.parse("test_samples")?,
        loss,
        snr,
        seed: s.parse("train_seed")?,
        adam: AdamConfig {
            learning_rate: a[0],
            beta1: a[1],
            beta2: a[2],
            epsilon: a[3],
        },
    }))
}

pub fn from_checkpoint_str(text: &str) -> Result<Autoencoder> {
    Ok(parse(text)?)
}

fn parse(text: &str) -> std::result::Result<Autoencoder, CheckpointError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (_, first) = lines.next().ok_or(CheckpointError::Truncated {
        section: "header".into(),
    })?;
    match first.split_once(' ') {
        Some((MAGIC, v)) if v.trim() == CHECKPOINT_VERSION.to_string() => {}
        Some((MAGIC, v)) => {
            return Err(CheckpointError::VersionMismatch {
                found: v.trim().to_string(),
                expected: CHECKPOINT_VERSION,
            })
        }
        _ => {
            return Err(CheckpointError::Malformed {
                line: 1,
                message: format!("expected `{MAGIC} <version>`"),
            })
        }
    }

    let mut sections: HashMap<&str, Section<'_>> = HashMap::new();
    let mut current: Option<&str> = None;
    for (n, l) in lines {
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = Some(name);
            sections.insert(name, Section { lines: Vec::new() });
        } else if let Some(name) = current {
            sections.get_mut(name).expect("inserted").lines.push((n, l));
        } else {
            return Err(CheckpointError::Malformed {
                line: n,
                message: "content before first section".into(),
            });
        }
    }

    let order = ["codebook", "model", "training"]
        .into_iter()
        .chain(LAYERS)
        .chain(["end"]);
    for name in order {
        if !sections.contains_key(name) {
            return Err(CheckpointError::Truncated {
                section: name.to_string(),
            });
        }
    }

    let cb = &sections["codebook"];
    let (line, sel) = cb.field("selection")?;
    let selection =
        Selection::from_parts(sel, cb.parse("selection_seed")?).ok_or_else(|| CheckpointError::Malformed {
            line,
            message: format!("unknown selection `{sel}`"),
        })?;
    let manifest = CodebookManifest {
        size: cb.parse("M")?,
        order: cb.parse("m")?,
        selection,
        bits_per_message: cb.parse("bits_per_message")?,
    };
    let codebook = Codebook::from_manifest(&manifest).map_err(|e| CheckpointError::DimensionMismatch(e.to_string()))?;

    let model = &sections["model"];
    let n: usize = model.parse("n")?;
    let seed: u64 = model.parse("seed")?;
    if n == 0 {
        return Err(CheckpointError::DimensionMismatch("n = 0".into()));
    }
    let training = parse_training(&sections["training"])?;

    let m = manifest.size;
    let dims = [
        (m, m, Activation::Relu),
        (n, m, Activation::Linear),
        (m, n, Activation::Relu),
        (m, m, Activation::Softmax),
    ];
    let mut dense = Vec::with_capacity(4);
    for (name, (rows, cols, act)) in LAYERS.iter().zip(dims) {
        dense.push(parse_layer(name, &sections[name], rows, cols, act)?);
    }
    let mut dense = dense.into_iter();
    let mut next = || Layer::Dense(dense.next().expect("four layers"));
    let transmitter = Network::new(vec![next(), next(), Layer::PowerNormalize]);
    let receiver = Network::new(vec![next(), next()]);

    Ok(Autoencoder {
        codebook,
        channel_uses: n,
        seed,
        transmitter,
        receiver,
        training,
    })
}
