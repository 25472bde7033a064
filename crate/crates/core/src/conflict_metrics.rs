//! Pairwise parameter-update conflict metrics between two task vectors.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum_by;
use crate::tensor_store::TaskVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CosineGranularity {
    /// Cosine of the flattened vectors.
    Global,
    /// Unweighted mean of per-tensor cosines.
    #[default]
    PerTensor,
}

impl FromStr for CosineGranularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(CosineGranularity::Global),
            "per_tensor" => Ok(CosineGranularity::PerTensor),
            _ => Err(Error::invalid(format!("unknown cosine granularity {s:?}"))),
        }
    }
}

impl fmt::Display for CosineGranularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CosineGranularity::Global => "global",
            CosineGranularity::PerTensor => "per_tensor",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConflictReport {
    pub magnitude_change_ratio: f64,
    pub sign_change_ratio: f64,
    pub conflicting_magnitude_ratio: f64,
    pub avg_cosine_similarity: f64,
    pub n_positions: usize,
}

fn flats(a: &TaskVector, b: &TaskVector) -> Result<(Vec<f64>, Vec<f64>)> {
    a.checkpoint().check_same_layout(b.checkpoint())?;
    let fa: Vec<f64> = a.checkpoint().flat_values().map(f64::from).collect();
    let fb: Vec<f64> = b.checkpoint().flat_values().map(f64::from).collect();
    if fa.is_empty() {
        return Err(Error::invalid("task vectors have no parameters"));
    }
    Ok((fa, fb))
}

fn conflicts(x: f64, y: f64) -> bool {
    (x > 0.0 && y < 0.0) || (x < 0.0 && y > 0.0)
}

fn total_magnitude(a: &[f64], b: &[f64]) -> Result<f64> {
    let denom = pairwise_sum_by(a.len(), &|k| a[k].abs() + b[k].abs());
    if denom > 0.0 {
        Ok(denom)
    } else {
        Err(Error::UndefinedRatio("both task vectors are all zero".into()))
    }
}

/// `sum |a-b| / sum (|a|+|b|)`.
pub fn magnitude_change_ratio(tau_a: &TaskVector, tau_b: &TaskVector) -> Result<f64> {
    let (a, b) = flats(tau_a, tau_b)?;
    let denom = total_magnitude(&a, &b)?;
    Ok(pairwise_sum_by(a.len(), &|k| (a[k] - b[k]).abs()) / denom)
}

/// Fraction of positions whose signs are strictly opposed; zeros never conflict.
pub fn sign_change_ratio(tau_a: &TaskVector, tau_b: &TaskVector) -> Result<f64> {
    let (a, b) = flats(tau_a, tau_b)?;
    let n = a.iter().zip(&b).filter(|(&x, &y)| conflicts(x, y)).count();
    Ok(n as f64 / a.len() as f64)
}

/// `sum_{k in C} |a-b| / sum (|a|+|b|)` over the sign-conflict set C.
pub fn conflicting_magnitude_ratio(tau_a: &TaskVector, tau_b: &TaskVector) -> Result<f64> {
    let (a, b) = flats(tau_a, tau_b)?;
    let denom = total_magnitude(&a, &b)?;
    let num = pairwise_sum_by(a.len(), &|k| {
        if conflicts(a[k], b[k]) {
            (a[k] - b[k]).abs()
        } else {
            0.0
        }
    });
    Ok(num / denom)
}

fn cosine(a: &[f64], b: &[f64], label: &str) -> Result<f64> {
    let dot = pairwise_sum_by(a.len(), &|k| a[k] * b[k]);
    let na = pairwise_sum_by(a.len(), &|k| a[k] * a[k]).sqrt();
    let nb = pairwise_sum_by(b.len(), &|k| b[k] * b[k]).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm(format!("{label} has zero norm")));
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

pub fn avg_cosine_similarity(
    tau_a: &TaskVector,
    tau_b: &TaskVector,
    granularity: CosineGranularity,
) -> Result<f64> {
    match granularity {
        CosineGranularity::Global => {
            let (a, b) = flats(tau_a, tau_b)?;
            cosine(&a, &b, "flattened task vector")
        }
        CosineGranularity::PerTensor => {
            tau_a.checkpoint().check_same_layout(tau_b.checkpoint())?;
            if tau_a.tensors().is_empty() {
                return Err(Error::invalid("task vectors have no tensors"));
            }
            let cosines = tau_a
                .tensors()
                .iter()
                .zip(tau_b.tensors())
                .map(|(x, y)| {
                    let a: Vec<f64> = x.values.iter().map(|&v| f64::from(v)).collect();
                    let b: Vec<f64> = y.values.iter().map(|&v| f64::from(v)).collect();
                    cosine(&a, &b, &format!("tensor {}", x.name))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(cosines.iter().sum::<f64>() / cosines.len() as f64)
        }
    }
}

/// All four metrics for one pair.
pub fn conflict_report(
    tau_a: &TaskVector,
    tau_b: &TaskVector,
    granularity: CosineGranularity,
) -> Result<ConflictReport> {
    Ok(ConflictReport {
        magnitude_change_ratio: magnitude_change_ratio(tau_a, tau_b)?,
        sign_change_ratio: sign_change_ratio(tau_a, tau_b)?,
        conflicting_magnitude_ratio: conflicting_magnitude_ratio(tau_a, tau_b)?,
        avg_cosine_similarity: avg_cosine_similarity(tau_a, tau_b, granularity)?,
        n_positions: tau_a.numel(),
    })
}

/// Reports for every unordered pair `(i, j)`, `i < j`, in lexicographic order.
pub fn pairwise_reports(
    taus: &[TaskVector],
    granularity: CosineGranularity,
) -> Result<Vec<(usize, usize, ConflictReport)>> {
    let pairs: Vec<(usize, usize)> = (0..taus.len())
        .flat_map(|i| (i + 1..taus.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .map(|&(i, j)| conflict_report(&taus[i], &taus[j], granularity).map(|r| (i, j, r)))
        .collect()
}

/// CSV header matching [`report_csv_row`].
pub const CSV_HEADER: &str = "model_a,model_b,magnitude_change_ratio,sign_change_ratio,conflicting_magnitude_ratio,avg_cosine_similarity,n_positions";

pub fn report_csv_row(model_a: &str, model_b: &str, r: &ConflictReport) -> String {
    format!(
        "{model_a},{model_b},{},{},{},{},{}",
        r.magnitude_change_ratio,
        r.sign_change_ratio,
        r.conflicting_magnitude_ratio,
        r.avg_cosine_similarity,
        r.n_positions
    )
}
