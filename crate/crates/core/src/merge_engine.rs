//! Merging techniques over task vectors that share a base checkpoint.
//!
//! Every method produces a merged task vector; the merged checkpoint is
//! `apply_task_vector(base, merged, 1.0)`.
//!
//! Per-position reductions across models go through [`order_free_sum`], so
//! LA, TA and TIES outputs are bit-identical under any reordering of inputs.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, order_free_sum};
use crate::tensor_store::TaskVector;

const PAR_CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeMethod {
    #[serde(rename = "LA", alias = "la")]
    LinearAverage,
    #[serde(rename = "TA", alias = "ta")]
    TaskArithmetic,
    #[serde(rename = "TIES", alias = "ties")]
    Ties,
    #[serde(rename = "DARE", alias = "dare")]
    Dare,
    #[serde(rename = "SLERP", alias = "slerp")]
    Slerp,
}

impl FromStr for MergeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LA" => Ok(MergeMethod::LinearAverage),
            "TA" => Ok(MergeMethod::TaskArithmetic),
            "TIES" => Ok(MergeMethod::Ties),
            "DARE" => Ok(MergeMethod::Dare),
            "SLERP" => Ok(MergeMethod::Slerp),
            _ => Err(Error::invalid(format!("unknown merge method {s:?}"))),
        }
    }
}

impl fmt::Display for MergeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MergeMethod::LinearAverage => "LA",
            MergeMethod::TaskArithmetic => "TA",
            MergeMethod::Ties => "TIES",
            MergeMethod::Dare => "DARE",
            MergeMethod::Slerp => "SLERP",
        })
    }
}

/// Combiner applied to DARE's masked task vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Combiner {
    #[default]
    #[serde(rename = "TA", alias = "ta")]
    TaskArithmetic,
    #[serde(rename = "TIES", alias = "ties")]
    Ties,
}

impl FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TA" => Ok(Combiner::TaskArithmetic),
            "TIES" => Ok(Combiner::Ties),
            _ => Err(Error::invalid(format!("unknown DARE combiner {s:?}"))),
        }
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combiner::TaskArithmetic => "TA",
            Combiner::Ties => "TIES",
        })
    }
}

/// User-facing merge configuration. Also the schema of the TOML recipe file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MergeRecipe {
    pub method: MergeMethod,
    /// Final scaling for TA/TIES (and DARE's combiner). `None` means 1/n for
    /// TA and 1 for TIES.
    pub scale_lambda: Option<f64>,
    pub trim_keep_fraction: f64,
    pub drop_probability: f64,
    pub slerp_t: f64,
    pub seed: u64,
    pub weights: Option<Vec<f64>>,
    pub combiner: Combiner,
}

impl Default for MergeRecipe {
    fn default() -> Self {
        MergeRecipe {
            method: MergeMethod::LinearAverage,
            scale_lambda: None,
            trim_keep_fraction: 0.2,
            drop_probability: 0.5,
            slerp_t: 0.5,
            seed: 0,
            weights: None,
            combiner: Combiner::TaskArithmetic,
        }
    }
}

impl MergeRecipe {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Range checks for every knob, relevant to the method or not.
    pub fn validate(&self, n_models: usize) -> Result<()> {
        if let Some(l) = self.scale_lambda {
            if !l.is_finite() {
                return Err(Error::invalid(format!("scale_lambda must be finite, got {l}")));
            }
        }
        check_keep_fraction(self.trim_keep_fraction)?;
        check_drop_probability(self.drop_probability)?;
        if !(0.0..=1.0).contains(&self.slerp_t) {
            return Err(Error::invalid(format!("slerp_t must lie in [0,1], got {}", self.slerp_t)));
        }
        if let Some(w) = &self.weights {
            check_weights(w, n_models)?;
        }
        Ok(())
    }

    pub fn lambda_for(&self, method: MergeMethod, n_models: usize) -> f64 {
        self.scale_lambda.unwrap_or(match method {
            MergeMethod::Ties => 1.0,
            _ => 1.0 / n_models as f64,
        })
    }
}

fn check_keep_fraction(keep: f64) -> Result<()> {
    if keep > 0.0 && keep <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("trim_keep_fraction must lie in (0,1], got {keep}")))
    }
}

fn check_drop_probability(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("drop_probability must lie in [0,1), got {p}")))
    }
}

fn check_weights(weights: &[f64], n_models: usize) -> Result<()> {
    if weights.len() != n_models {
        return Err(Error::invalid(format!(
            "{} weights for {n_models} models",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid("weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

fn check_compatible(taus: &[&TaskVector], min_count: usize) -> Result<()> {
    if taus.len() < min_count {
        return Err(Error::invalid(format!(
            "need at least {min_count} task vectors, got {}",
            taus.len()
        )));
    }
    let first = taus[0];
    for tau in &taus[1..] {
        first.checkpoint().check_same_layout(tau.checkpoint())?;
        if tau.base_digest() != first.base_digest() {
            return Err(Error::DigestMismatch {
                expected: first.base_digest().to_string(),
                found: tau.base_digest().to_string(),
            });
        }
    }
    Ok(())
}

/// Runs `f(position, values_across_models)` for every flat position in parallel.
fn per_position<F>(flats: &[Vec<f32>], f: F) -> Vec<f32>
where
    F: Fn(&mut Vec<f64>) -> f64 + Sync,
{
    let len = flats.first().map_or(0, Vec::len);
    let mut out = vec![0.0f32; len];
    out.par_chunks_mut(PAR_CHUNK).enumerate().for_each(|(chunk, slot)| {
        let mut buf = Vec::with_capacity(flats.len());
        for (offset, o) in slot.iter_mut().enumerate() {
            let pos = chunk * PAR_CHUNK + offset;
            buf.clear();
            buf.extend(flats.iter().map(|v| f64::from(v[pos])));
            *o = f(&mut buf) as f32;
        }
    });
    out
}

fn sum_scaled(flats: &[Vec<f32>], lambda: f64) -> Vec<f32> {
    per_position(flats, |vals| order_free_sum(vals) * lambda)
}

/// Element-wise weighted mean; uniform `1/n` weights when `weights` is `None`.
pub fn merge_linear_average(taus: &[&TaskVector], weights: Option<&[f64]>) -> Result<TaskVector> {
    check_compatible(taus, 2)?;
    let flats: Vec<Vec<f32>> = taus.iter().map(|t| t.flat()).collect();
    let out = match weights {
        None => sum_scaled(&flats, 1.0 / taus.len() as f64),
        Some(w) => {
            check_weights(w, taus.len())?;
            let weighted: Vec<Vec<f64>> = flats
                .iter()
                .zip(w)
                .map(|(f, &wi)| f.iter().map(|&v| wi * f64::from(v)).collect())
                .collect();
            let len = flats[0].len();
            let mut buf = Vec::with_capacity(taus.len());
            (0..len)
                .map(|pos| {
                    buf.clear();
                    buf.extend(weighted.iter().map(|v| v[pos]));
                    order_free_sum(&mut buf) as f32
                })
                .collect()
        }
    };
    Ok(taus[0].with_flat(&out))
}

/// `lambda * sum(taus)`. With `lambda = 1/n` this is bit-identical to uniform LA.
pub fn merge_task_arithmetic(taus: &[&TaskVector], scale_lambda: f64) -> Result<TaskVector> {
    check_compatible(taus, 2)?;
    if !scale_lambda.is_finite() {
        return Err(Error::invalid("scale_lambda must be finite"));
    }
    let flats: Vec<Vec<f32>> = taus.iter().map(|t| t.flat()).collect();
    Ok(taus[0].with_flat(&sum_scaled(&flats, scale_lambda)))
}

/// Number of entries TIES keeps for a vector of `len` entries.
pub fn ties_keep_count(keep: f64, len: usize) -> usize {
    if len == 0 {
        return 0;
    }
    // The small slack stops products like 0.2 * 10 = 2.0000000000000004 from
    // rounding up an extra entry.
    let k = (keep * len as f64 - 1e-9).ceil() as usize;
    k.clamp(1, len)
}

/// Zeroes all but the `k` largest-magnitude entries; ties keep the lower index.
pub fn ties_trim(values: &[f32], keep: f64) -> Vec<f32> {
    let k = ties_keep_count(keep, values.len());
    if k >= values.len() {
        return values.to_vec();
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    let rank = |a: &usize, b: &usize| {
        values[*b]
            .abs()
            .total_cmp(&values[*a].abs())
            .then_with(|| a.cmp(b))
    };
    order.select_nth_unstable_by(k - 1, rank);
    let mut out = vec![0.0f32; values.len()];
    for &i in &order[..k] {
        out[i] = values[i];
    }
    out
}

fn ties_combine(trimmed: &[Vec<f32>], lambda: f64) -> Vec<f32> {
    per_position(trimmed, |vals| {
        let mut all = vals.clone();
        let positive = order_free_sum(&mut all) >= 0.0;
        vals.retain(|&v| if positive { v > 0.0 } else { v < 0.0 });
        if vals.is_empty() {
            return 0.0;
        }
        let count = vals.len() as f64;
        order_free_sum(vals) * (1.0 / count) * lambda
    })
}

/// TIES: global top-k trim per task vector, sign election by summed mass, then
/// the mean of the values agreeing with the elected sign, scaled by `lambda`.
pub fn merge_ties(taus: &[&TaskVector], trim_keep_fraction: f64, scale_lambda: f64) -> Result<TaskVector> {
    check_compatible(taus, 1)?;
    check_keep_fraction(trim_keep_fraction)?;
    let trimmed: Vec<Vec<f32>> = taus
        .par_iter()
        .map(|t| ties_trim(&t.flat(), trim_keep_fraction))
        .collect();
    Ok(taus[0].with_flat(&ties_combine(&trimmed, scale_lambda)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in [0,1) for element `index` of task `task` under `seed`.
pub fn dare_uniform(seed: u64, task: u64, index: u64) -> f64 {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ task) ^ index);
    (key >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Drop-and-rescale mask for one task vector.
pub fn dare_mask(values: &[f32], drop_probability: f64, seed: u64, task: u64) -> Vec<f32> {
    let keep = 1.0 - drop_probability;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if dare_uniform(seed, task, i as u64) >= drop_probability {
                (f64::from(v) / keep) as f32
            } else {
                0.0
            }
        })
        .collect()
}

/// DARE with explicit per-task stream keys.
///
/// Reordering `taus` together with `task_keys` leaves the output unchanged.
pub fn merge_dare_keyed(
    taus: &[&TaskVector],
    task_keys: &[u64],
    drop_probability: f64,
    seed: u64,
    combiner: Combiner,
    scale_lambda: f64,
    trim_keep_fraction: f64,
) -> Result<TaskVector> {
    check_compatible(taus, 1)?;
    check_drop_probability(drop_probability)?;
    if task_keys.len() != taus.len() {
        return Err(Error::invalid("one task key per task vector is required"));
    }
    let masked: Vec<Vec<f32>> = taus
        .par_iter()
        .zip(task_keys)
        .map(|(t, &key)| dare_mask(&t.flat(), drop_probability, seed, key))
        .collect();
    let out = match combiner {
        Combiner::TaskArithmetic => sum_scaled(&masked, scale_lambda),
        Combiner::Ties => {
            check_keep_fraction(trim_keep_fraction)?;
            let trimmed: Vec<Vec<f32>> = masked.iter().map(|m| ties_trim(m, trim_keep_fraction)).collect();
            ties_combine(&trimmed, scale_lambda)
        }
    };
    Ok(taus[0].with_flat(&out))
}

/// DARE keyed by input position.
pub fn merge_dare(
    taus: &[&TaskVector],
    drop_probability: f64,
    seed: u64,
    combiner: Combiner,
    scale_lambda: f64,
    trim_keep_fraction: f64,
) -> Result<TaskVector> {
    let keys: Vec<u64> = (0..taus.len() as u64).collect();
    merge_dare_keyed(taus, &keys, drop_probability, seed, combiner, scale_lambda, trim_keep_fraction)
}

const SLERP_MIN_ANGLE: f64 = 1e-7;

/// Spherical interpolation of two flat vectors, falling back to linear
/// interpolation when the angle (or its sine) is below 1e-7.
pub fn slerp_pair(u: &[f64], v: &[f64], t: f64, label: &str) -> Result<Vec<f64>> {
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm(format!("SLERP operand {label} is all zero")));
    }
    if t == 0.0 {
        return Ok(u.to_vec());
    }
    if t == 1.0 {
        return Ok(v.to_vec());
    }
    let cos = (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    let omega = cos.acos();
    let sin_omega = omega.sin();
    if omega < SLERP_MIN_ANGLE || sin_omega < SLERP_MIN_ANGLE {
        return Ok(u.iter().zip(v).map(|(a, b)| (1.0 - t) * a + t * b).collect());
    }
    let wu = ((1.0 - t) * omega).sin() / sin_omega;
    let wv = (t * omega).sin() / sin_omega;
    Ok(u.iter().zip(v).map(|(a, b)| wu * a + wv * b).collect())
}

/// Per-tensor SLERP. Two inputs use `slerp_t`; more inputs fold left with
/// `t = 1/k` for the k-th input.
pub fn merge_slerp(taus: &[&TaskVector], slerp_t: f64) -> Result<TaskVector> {
    check_compatible(taus, 2)?;
    if !(0.0..=1.0).contains(&slerp_t) {
        return Err(Error::invalid(format!("slerp_t must lie in [0,1], got {slerp_t}")));
    }
    let n_tensors = taus[0].tensors().len();
    let mut flat = Vec::with_capacity(taus[0].numel());
    for ti in 0..n_tensors {
        let name = &taus[0].tensors()[ti].name;
        let columns: Vec<Vec<f64>> = taus
            .iter()
            .map(|t| t.tensors()[ti].values.iter().map(|&v| f64::from(v)).collect())
            .collect();
        for (i, c) in columns.iter().enumerate() {
            if c.iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroNorm(format!("tensor {name} of input {i} is all zero")));
            }
        }
        let mut acc = columns[0].clone();
        if taus.len() == 2 {
            acc = slerp_pair(&acc, &columns[1], slerp_t, name)?;
        } else {
            for (k, col) in columns.iter().enumerate().skip(1) {
                acc = slerp_pair(&acc, col, 1.0 / (k + 1) as f64, name)?;
            }
        }
        flat.extend(acc.into_iter().map(|v| v as f32));
    }
    Ok(taus[0].with_flat(&flat))
}

/// Dispatches `recipe` over `taus`.
pub fn merge(taus: &[&TaskVector], recipe: &MergeRecipe) -> Result<TaskVector> {
    recipe.validate(taus.len())?;
    let n = taus.len();
    match recipe.method {
        MergeMethod::LinearAverage => merge_linear_average(taus, recipe.weights.as_deref()),
        MergeMethod::TaskArithmetic => {
            merge_task_arithmetic(taus, recipe.lambda_for(MergeMethod::TaskArithmetic, n))
        }
        MergeMethod::Ties => merge_ties(
            taus,
            recipe.trim_keep_fraction,
            recipe.lambda_for(MergeMethod::Ties, n),
        ),
        MergeMethod::Dare => {
            let combiner_method = match recipe.combiner {
                Combiner::TaskArithmetic => MergeMethod::TaskArithmetic,
                Combiner::Ties => MergeMethod::Ties,
            };
            merge_dare(
                taus,
                recipe.drop_probability,
                recipe.seed,
                recipe.combiner,
                recipe.lambda_for(combiner_method, n),
                recipe.trim_keep_fraction,
            )
        }
        MergeMethod::Slerp => merge_slerp(taus, recipe.slerp_t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_store::{Checkpoint, Digest, Tensor};

    fn tv(values: &[f32]) -> TaskVector {
        let t = Tensor::f32("w", vec![values.len()], values.to_vec()).unwrap();
        TaskVector::from_parts(Checkpoint::new(vec![t]).unwrap(), Digest(7))
    }

    fn tv2(a: &[f32], b: &[f32]) -> TaskVector {
        let ta = Tensor::f32("a", vec![a.len()], a.to_vec()).unwrap();
        let tb = Tensor::f32("b", vec![b.len()], b.to_vec()).unwrap();
        TaskVector::from_parts(Checkpoint::new(vec![ta, tb]).unwrap(), Digest(7))
    }

    #[test]
    fn linear_average_examples() {
        let a = tv(&[2.0, -4.0]);
        assert_eq!(merge_linear_average(&[&a, &a], None).unwrap().flat(), vec![2.0, -4.0]);
        let (x, y) = (tv(&[1.0, 0.0]), tv(&[0.0, 1.0]));
        assert_eq!(merge_linear_average(&[&x, &y], None).unwrap().flat(), vec![0.5, 0.5]);
        let (p, q) = (tv(&[4.0]), tv(&[0.0]));
        assert_eq!(merge_linear_average(&[&p, &q], Some(&[0.25, 0.75])).unwrap().flat(), vec![1.0]);
    }

    #[test]
    fn linear_average_rejects_bad_weights() {
        let a = tv(&[1.0]);
        assert!(merge_linear_average(&[&a, &a], Some(&[0.5, 0.6])).is_err());
        assert!(merge_linear_average(&[&a, &a], Some(&[1.0])).is_err());
        assert!(merge_linear_average(&[&a], None).is_err());
    }

    #[test]
    fn inputs_from_different_bases_are_rejected() {
        let a = tv(&[1.0]);
        let b = TaskVector::from_parts(a.checkpoint().clone(), Digest(8));
        assert!(matches!(merge_task_arithmetic(&[&a, &b], 1.0), Err(Error::DigestMismatch { .. })));
    }

    #[test]
    fn task_arithmetic_examples() {
        let (a, b) = (tv(&[1.0, 3.0]), tv(&[2.0, -5.0]));
        assert_eq!(
            merge_task_arithmetic(&[&a, &b], 0.5).unwrap(),
            merge_linear_average(&[&a, &b], None).unwrap()
        );
        assert_eq!(merge_task_arithmetic(&[&a, &b], 0.0).unwrap().flat(), vec![0.0, 0.0]);
        let (x, y) = (tv(&[1.0]), tv(&[2.0]));
        assert_eq!(merge_task_arithmetic(&[&x, &y], 0.3).unwrap().flat(), vec![0.9]);
    }

    #[test]
    fn ties_examples() {
        let a = tv(&[0.5, -1.5, 3.0]);
        assert_eq!(merge_ties(&[&a], 1.0, 1.0).unwrap(), a);

        let (x, y) = (tv(&[1.0, -2.0]), tv(&[3.0, 2.0]));
        assert_eq!(merge_ties(&[&x, &y], 1.0, 1.0).unwrap().flat(), vec![2.0, 2.0]);

        let (p, q) = (tv(&[0.1, -5.0, 0.0, 0.0]), tv(&[0.0, 4.0, 0.2, 0.0]));
        assert_eq!(ties_trim(&p.flat(), 0.25), vec![0.0, -5.0, 0.0, 0.0]);
        assert_eq!(ties_trim(&q.flat(), 0.25), vec![0.0, 4.0, 0.0, 0.0]);
        assert_eq!(merge_ties(&[&p, &q], 0.25, 1.0).unwrap().flat(), vec![0.0, -5.0, 0.0, 0.0]);
    }

    #[test]
    fn ties_trim_is_global_across_tensors() {
        let v = tv2(&[0.1, 0.2], &[5.0, -6.0]);
        let out = merge_ties(&[&v], 0.5, 1.0).unwrap();
        assert_eq!(out.flat(), vec![0.0, 0.0, 5.0, -6.0]);
    }

    #[test]
    fn ties_trim_tie_keeps_lower_index() {
        assert_eq!(ties_trim(&[1.0, -1.0, 1.0, 0.5], 0.5), vec![1.0, -1.0, 0.0, 0.0]);
        assert_eq!(ties_keep_count(0.2, 10), 2);
        assert_eq!(ties_keep_count(0.01, 10), 1);
    }

    #[test]
    fn ties_rejects_bad_fraction() {
        let a = tv(&[1.0]);
        assert!(merge_ties(&[&a], 0.0, 1.0).is_err());
        assert!(merge_ties(&[&a], 1.5, 1.0).is_err());
    }

    #[test]
    fn dare_no_drop_equals_combiner() {
        let (a, b) = (tv(&[0.3, -1.2, 2.5]), tv(&[1.1, 0.4, -0.7]));
        let ta = merge_task_arithmetic(&[&a, &b], 0.5).unwrap();
        let dare = merge_dare(&[&a, &b], 0.0, 42, Combiner::TaskArithmetic, 0.5, 0.2).unwrap();
        assert_eq!(dare, ta);
        let ties = merge_ties(&[&a, &b], 0.6, 1.0).unwrap();
        let dare = merge_dare(&[&a, &b], 0.0, 42, Combiner::Ties, 1.0, 0.6).unwrap();
        assert_eq!(dare, ties);
    }

    #[test]
    fn dare_is_deterministic_and_seed_sensitive() {
        let a = tv(&[1.0; 64]);
        let r1 = merge_dare(&[&a], 0.5, 9, Combiner::TaskArithmetic, 1.0, 0.2).unwrap();
        let r2 = merge_dare(&[&a], 0.5, 9, Combiner::TaskArithmetic, 1.0, 0.2).unwrap();
        let r3 = merge_dare(&[&a], 0.5, 10, Combiner::TaskArithmetic, 1.0, 0.2).unwrap();
        assert_eq!(r1, r2);
        assert_ne!(r1, r3);
        assert!(r1.flat().iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn dare_unbiased_on_large_vector() {
        let a = tv(&vec![1.0; 100_000]);
        let out = merge_dare(&[&a], 0.9, 1234, Combiner::TaskArithmetic, 1.0, 0.2).unwrap();
        let mean = out.flat().iter().map(|&v| f64::from(v)).sum::<f64>() / 100_000.0;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn dare_rejects_bad_probability() {
        let a = tv(&[1.0]);
        assert!(merge_dare(&[&a], 1.0, 0, Combiner::TaskArithmetic, 1.0, 0.2).is_err());
        assert!(merge_dare(&[&a], -0.1, 0, Combiner::TaskArithmetic, 1.0, 0.2).is_err());
    }

    #[test]
    fn slerp_endpoints_and_right_angle() {
        let (u, v) = (tv(&[1.0, 0.0]), tv(&[0.0, 1.0]));
        assert_eq!(merge_slerp(&[&u, &v], 0.0).unwrap(), u);
        assert_eq!(merge_slerp(&[&u, &v], 1.0).unwrap(), v);
        let mid = merge_slerp(&[&u, &v], 0.5).unwrap().flat();
        let h = std::f32::consts::FRAC_1_SQRT_2;
        assert!((mid[0] - h).abs() < 1e-7 && (mid[1] - h).abs() < 1e-7);
    }

    #[test]
    fn slerp_collinear_uses_linear_fallback() {
        let (u, v) = (tv(&[1.0, 2.0, -1.0]), tv(&[2.0, 4.0, -2.0]));
        for t in [0.1, 0.5, 0.9] {
            let out = merge_slerp(&[&u, &v], t).unwrap().flat();
            let expected: Vec<f32> = u.flat().iter().map(|&x| x * (1.0 + t as f32)).collect();
            for (o, e) in out.iter().zip(&expected) {
                assert!((o - e).abs() < 1e-6, "{o} vs {e}");
            }
        }
    }

    #[test]
    fn slerp_rejects_zero_tensor() {
        let u = tv2(&[1.0], &[0.0]);
        let v = tv2(&[1.0], &[1.0]);
        let err = merge_slerp(&[&u, &v], 0.5).unwrap_err();
        assert!(matches!(err, Error::ZeroNorm(msg) if msg.contains("tensor b")));
    }

    #[test]
    fn slerp_fold_on_collinear_inputs_is_uniform_average() {
        let xs: Vec<TaskVector> = (1..=4).map(|k| tv(&[k as f32, 2.0 * k as f32])).collect();
        let refs: Vec<&TaskVector> = xs.iter().collect();
        let out = merge_slerp(&refs, 0.5).unwrap().flat();
        assert!((out[0] - 2.5).abs() < 1e-6 && (out[1] - 5.0).abs() < 1e-6);
    }

    #[test]
    fn recipe_toml_and_validation() {
        let r = MergeRecipe::from_toml_str(
            "method = \"TIES\"\ntrim_keep_fraction = 0.5\nscale_lambda = 0.8\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(r.method, MergeMethod::Ties);
        assert_eq!(r.trim_keep_fraction, 0.5);
        assert_eq!(r.drop_probability, 0.5);
        assert!(r.validate(2).is_ok());
        assert!(MergeRecipe::from_toml_str("method = \"TIES\"\nbogus = 1\n").is_err());
        let bad = MergeRecipe {
            drop_probability: 1.0,
            ..MergeRecipe::default()
        };
        assert!(bad.validate(2).is_err());
        let bad_w = MergeRecipe {
            weights: Some(vec![0.3, 0.3]),
            ..MergeRecipe::default()
        };
        assert!(bad_w.validate(2).is_err());
    }

    #[test]
    fn default_lambda_depends_on_method() {
        let r = MergeRecipe::default();
        assert_eq!(r.lambda_for(MergeMethod::TaskArithmetic, 4), 0.25);
        assert_eq!(r.lambda_for(MergeMethod::Ties, 4), 1.0);
    }
}
