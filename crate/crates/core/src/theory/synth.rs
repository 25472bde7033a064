use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::repr_diag::ActivationSet;
use crate::tensor_store::{Checkpoint, Tensor};

/// Minima of a model whose hidden states are affine in its parameters, so
/// every convex combination of minima is exactly linear-mode connected.
#[derive(Debug, Clone, PartialEq)]
pub struct LmcLinearEnsemble {
    pub param_dim: usize,
    pub hidden_dim: usize,
    pub base_params: Vec<f64>,
    pub minima: Vec<Vec<f64>>,
    /// One `hidden_dim x param_dim` row-major matrix per datapoint.
    pub maps: Vec<Vec<f64>>,
    pub offsets: Vec<Vec<f64>>,
    pub model_ids: Vec<String>,
    pub datapoint_ids: Vec<String>,
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(2);
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

impl LmcLinearEnsemble {
    pub fn n_models(&self) -> usize {
        self.minima.len()
    }

    pub fn n_datapoints(&self) -> usize {
        self.maps.len()
    }

    /// `A_x theta + b_x`.
    pub fn hidden(&self, datapoint: usize, theta: &[f64]) -> Vec<f64> {
        let a = &self.maps[datapoint];
        let p = self.param_dim;
        (0..self.hidden_dim)
            .map(|r| {
                let row = &a[r * p..(r + 1) * p];
                row.iter().zip(theta).map(|(x, y)| x * y).sum::<f64>() + self.offsets[datapoint][r]
            })
            .collect()
    }

    pub fn activations(&self) -> Result<ActivationSet> {
        let mut vectors = Vec::with_capacity(self.n_models() * self.n_datapoints() * self.hidden_dim);
        for theta in &self.minima {
            for x in 0..self.n_datapoints() {
                vectors.extend(self.hidden(x, theta));
            }
        }
        ActivationSet::new(self.model_ids.clone(), self.datapoint_ids.clone(), self.hidden_dim, vectors)
    }

    fn params_checkpoint(theta: &[f64]) -> Result<Checkpoint> {
        let values = theta.iter().map(|&v| v as f32).collect();
        Checkpoint::new(vec![Tensor::f32("theta", vec![theta.len()], values)?])
    }

    /// Base checkpoint and one checkpoint per minimum, each a single `theta` tensor.
    pub fn checkpoints(&self) -> Result<(Checkpoint, Vec<Checkpoint>)> {
        let base = Self::params_checkpoint(&self.base_params)?;
        let minima = self
            .minima
            .iter()
            .map(|t| Self::params_checkpoint(t))
            .collect::<Result<Vec<_>>>()?;
        Ok((base, minima))
    }
}

fn normals(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Deterministic Gaussian ensemble: base, minima `theta_0 + spread * g_i`,
/// then per-datapoint maps scaled by `1/sqrt(p)` and offsets.
pub fn synth_lmc_ensemble(
    seed: u64,
    n_models: usize,
    param_dim: usize,
    hidden_dim: usize,
    n_datapoints: usize,
    spread: f64,
) -> Result<(LmcLinearEnsemble, ActivationSet)> {
    if n_models < 2 || hidden_dim == 0 || n_datapoints == 0 || param_dim < hidden_dim {
        return Err(Error::invalid(format!(
            "synthetic ensemble needs N >= 2, d >= 1, K >= 1, p >= d (got N={n_models}, p={param_dim}, d={hidden_dim}, K={n_datapoints})"
        )));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::invalid(format!("spread must be finite and non-negative, got {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_params = normals(&mut rng, param_dim, 1.0);
    let minima = (0..n_models)
        .map(|_| {
            let g = normals(&mut rng, param_dim, 1.0);
            base_params.iter().zip(g).map(|(b, g)| b + spread * g).collect()
        })
        .collect();
    let map_scale = 1.0 / (param_dim as f64).sqrt();
    let mut maps = Vec::with_capacity(n_datapoints);
    let mut offsets = Vec::with_capacity(n_datapoints);
    for _ in 0..n_datapoints {
        maps.push(normals(&mut rng, hidden_dim * param_dim, map_scale));
        offsets.push(normals(&mut rng, hidden_dim, 1.0));
    }
    let ens = LmcLinearEnsemble {
        param_dim,
        hidden_dim,
        base_params,
        minima,
        maps,
        offsets,
        model_ids: ids("m", n_models),
        datapoint_ids: ids("x", n_datapoints),
    };
    let acts = ens.activations()?;
    Ok((ens, acts))
}

fn check_simplex(alpha: &[f64], n: usize) -> Result<()> {
    if alpha.len() != n {
        return Err(Error::invalid(format!("alpha has {} entries for {n} models", alpha.len())));
    }
    if alpha.iter().any(|a| a.is_nan() || *a < 0.0) || (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("alpha {alpha:?} is not on the simplex")));
    }
    Ok(())
}

/// Hidden states of the parameter-space merge `sum alpha_i theta_i`, checked
/// against `sum alpha_i h(x; theta_i)` to 1e-10 relative.
pub fn merged_hidden_states(ens: &LmcLinearEnsemble, alpha: &[f64]) -> Result<ActivationSet> {
    check_simplex(alpha, ens.n_models())?;
    let mut merged = vec![0.0; ens.param_dim];
    for (theta, &w) in ens.minima.iter().zip(alpha) {
        merged.iter_mut().zip(theta).for_each(|(m, t)| *m += w * t);
    }
    let mut vectors = Vec::with_capacity(ens.n_datapoints() * ens.hidden_dim);
    for x in 0..ens.n_datapoints() {
        let direct = ens.hidden(x, &merged);
        let mut combined = vec![0.0; ens.hidden_dim];
        for (theta, &w) in ens.minima.iter().zip(alpha) {
            combined.iter_mut().zip(ens.hidden(x, theta)).for_each(|(c, h)| *c += w * h);
        }
        let diff: f64 = direct.iter().zip(&combined).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = combined.iter().map(|v| v * v).sum::<f64>().sqrt();
        if diff > 1e-10 * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::NumericalFault(format!(
                "linearity violated at {}: |h(merge) - merge(h)| = {diff:e}",
                ens.datapoint_ids[x]
            )));
        }
        vectors.extend(direct);
    }
    ActivationSet::new(vec!["merged".into()], ens.datapoint_ids.clone(), ens.hidden_dim, vectors)
}
