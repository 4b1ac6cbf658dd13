use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `‖s − p‖₂²`
    #[default]
    Mse,
    /// `−Σ sᵢ log pᵢ`
    CategoricalCrossEntropy,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::CategoricalCrossEntropy => "categorical_cross_entropy",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "mse" => Some(LossKind::Mse),
            "categorical_cross_entropy" | "cross_entropy" | "cce" => Some(LossKind::CategoricalCrossEntropy),
            _ => None,
        }
    }
}

fn check(kind: LossKind, target: &[f64], prediction: &[f64]) -> Result<()> {
    if target.len() != prediction.len() {
        return Err(Error::shape(format!(
            "loss: target has {} entries, prediction has {}",
            target.len(),
            prediction.len()
        )));
    }
    if kind == LossKind::CategoricalCrossEntropy {
        if let Some(i) = prediction.iter().position(|p| *p <= 0.0) {
            return Err(Error::domain(format!(
                "cross-entropy needs positive predictions, p[{i}] = {}",
                prediction[i]
            )));
        }
    }
    Ok(())
}

pub fn loss_eval(kind: LossKind, target: &[f64], prediction: &[f64]) -> Result<f64> {
    check(kind, target, prediction)?;
    Ok(match kind {
        LossKind::Mse => target.iter().zip(prediction).map(|(s, p)| (s - p) * (s - p)).sum(),
        LossKind::CategoricalCrossEntropy => -target
            .iter()
            .zip(prediction)
            .filter(|(s, _)| **s != 0.0)
            .map(|(s, p)| s * p.ln())
            .sum::<f64>(),
    })
}

/// Gradient of the loss w.r.t. the prediction.
pub fn loss_gradient(kind: LossKind, target: &[f64], prediction: &[f64]) -> Result<Vec<f64>> {
    check(kind, target, prediction)?;
    Ok(match kind {
        LossKind::Mse => prediction.iter().zip(target).map(|(p, s)| 2.0 * (p - s)).collect(),
        LossKind::CategoricalCrossEntropy => prediction.iter().zip(target).map(|(p, s)| -s / p).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        let s = [0.0, 1.0, 0.0, 0.0];
        assert_eq!(loss_eval(LossKind::Mse, &s, &s).unwrap(), 0.0);
        assert_eq!(loss_eval(LossKind::Mse, &[1.0, 0.0], &[0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn cross_entropy_example() {
        let l = loss_eval(LossKind::CategoricalCrossEntropy, &[0.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            loss_eval(LossKind::Mse, &[1.0], &[0.5, 0.5]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            loss_eval(LossKind::CategoricalCrossEntropy, &[1.0, 0.0], &[1.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let s = [0.2, 0.5, 0.3];
        let p = [0.3, 0.3, 0.4];
        for kind in [LossKind::Mse, LossKind::CategoricalCrossEntropy] {
            let g = loss_gradient(kind, &s, &p).unwrap();
            for i in 0..3 {
                let h = 1e-6;
                let mut up = p;
                let mut dn = p;
                up[i] += h;
                dn[i] -= h;
                let fd = (loss_eval(kind, &s, &up).unwrap() - loss_eval(kind, &s, &dn).unwrap()) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6, "{kind:?} {i}: {fd} vs {}", g[i]);
            }
        }
    }
}
