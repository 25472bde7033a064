//! Hidden-state geometry of an ensemble: diameter, minimum enclosing ball,
//! distortion bounds, the zero-rate point, and synthetic linear ensembles.

mod meb;
mod synth;

use std::fmt::Write as _;

pub use meb::{
    min_enclosing_ball_with as min_enclosing_ball_points, project_to_simplex, BallMethod, BallResult,
    DEFAULT_TOLERANCE, WELZL_MAX_DIM, WELZL_MAX_POINTS,
};
pub use synth::{merged_hidden_states, synth_lmc_ensemble, LmcLinearEnsemble};

use crate::error::{Error, Result};
use crate::numeric::squared_distance;
use crate::repr_diag::ActivationSet;

/// One stacked vector per model; squared Euclidean distance between two rows
/// is the mean squared hidden-state distance over datapoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ReprEnsemble {
    labels: Vec<String>,
    points: Vec<Vec<f64>>,
}

impl ReprEnsemble {
    pub fn from_activations(acts: &ActivationSet) -> Self {
        let scale = 1.0 / (acts.n_datapoints() as f64).sqrt();
        let points = (0..acts.n_models())
            .map(|i| acts.model_block(i).iter().map(|v| v * scale).collect())
            .collect();
        ReprEnsemble {
            labels: acts.model_ids().to_vec(),
            points,
        }
    }

    /// Points used as-is (a single datapoint per model).
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.is_empty() || dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("ensemble needs at least one point of a shared positive dimension"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("ensemble points must be finite"));
        }
        let width = (points.len() - 1).to_string().len();
        let labels = (0..points.len()).map(|i| format!("m{i:0width$}")).collect();
        Ok(ReprEnsemble { labels, points })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn n_models(&self) -> usize {
        self.points.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn effective_dim(&self) -> usize {
        self.ambient_dim().min(self.n_models() - 1)
    }

    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        squared_distance(&self.points[i], &self.points[j])
    }
}

/// `d / (2 (d + 1))`, the Jung factor on squared diameter.
pub fn jung_factor(dim: usize) -> f64 {
    dim as f64 / (2.0 * (dim as f64 + 1.0))
}

/// Largest pairwise distance; ties go to the lexicographically smallest pair.
pub fn diameter(ens: &ReprEnsemble) -> Result<(f64, (usize, usize))> {
    let n = ens.n_models();
    if n < 2 {
        return Err(Error::invalid(format!("diameter needs at least 2 models, got {n}")));
    }
    let mut best = (-1.0, (0, 1));
    for i in 0..n {
        for j in i + 1..n {
            let d2 = ens.squared_distance(i, j);
            if d2 > best.0 {
                best = (d2, (i, j));
            }
        }
    }
    Ok((best.0.sqrt(), best.1))
}

pub fn min_enclosing_ball(ens: &ReprEnsemble, tol: f64) -> Result<BallResult> {
    meb::min_enclosing_ball(ens.points(), tol)
}

fn bound_slack(diameter_sq: f64, tol: f64) -> f64 {
    tol * diameter_sq.max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Achievability {
    pub alpha: Vec<f64>,
    pub delta_max: f64,
    pub upper_bound: f64,
}

/// Convex merge at the enclosing-ball center and its worst-case distortion.
pub fn achievability_merge(ens: &ReprEnsemble, ball: &BallResult) -> Result<Achievability> {
    if ball.alpha.len() != ens.n_models() {
        return Err(Error::invalid("ball does not belong to this ensemble"));
    }
    let delta_max = ens
        .points()
        .iter()
        .map(|p| squared_distance(p, &ball.center))
        .fold(0.0, f64::max);
    let diameter_sq = if ens.n_models() < 2 { 0.0 } else { diameter(ens)?.0.powi(2) };
    let upper_bound = jung_factor(ens.effective_dim()) * diameter_sq;
    if delta_max > upper_bound + bound_slack(diameter_sq, ball.tolerance) {
        return Err(Error::NumericalFault(format!(
            "achievable distortion {delta_max} exceeds the Jung bound {upper_bound}"
        )));
    }
    Ok(Achievability {
        alpha: ball.alpha.clone(),
        delta_max,
        upper_bound,
    })
}

/// Worst-case distortion of an arbitrary merge point and whether it clears
/// the `diameter^2 / 4` floor.
pub fn converse_check(ens: &ReprEnsemble, candidate: &[f64], tol: f64) -> Result<(f64, bool)> {
    if candidate.len() != ens.ambient_dim() {
        return Err(Error::invalid(format!(
            "candidate has dimension {}, ensemble has {}",
            candidate.len(),
            ens.ambient_dim()
        )));
    }
    if candidate.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("candidate must be finite"));
    }
    let delta_max = ens
        .points()
        .iter()
        .map(|p| squared_distance(p, candidate))
        .fold(0.0, f64::max);
    let diameter_sq = if ens.n_models() < 2 { 0.0 } else { diameter(ens)?.0.powi(2) };
    Ok((delta_max, delta_max >= diameter_sq / 4.0 - tol))
}

/// Zero-rate step: no bits needed at or above `d_star`, `log2 n` below it.
pub fn rate_from_d_star(distortion: f64, d_star: f64, n_models: usize) -> f64 {
    if distortion >= d_star {
        0.0
    } else {
        (n_models as f64).log2()
    }
}

pub fn rate_lower_bound(distortion: f64, ens: &ReprEnsemble) -> Result<f64> {
    if distortion.is_nan() || distortion < 0.0 {
        return Err(Error::invalid(format!("distortion must be non-negative, got {distortion}")));
    }
    let ball = min_enclosing_ball(ens, DEFAULT_TOLERANCE)?;
    Ok(rate_from_d_star(distortion, ball.squared_radius(), ens.n_models()))
}

/// Sufficient test: the Jung bound on `d'` fits within the budget.
pub fn mergeability_test(ens: &ReprEnsemble, budget: f64) -> Result<bool> {
    if budget.is_nan() || budget < 0.0 {
        return Err(Error::invalid(format!("budget must be non-negative, got {budget}")));
    }
    let (delta, _) = diameter(ens)?;
    Ok(jung_factor(ens.effective_dim()) * delta * delta <= budget)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub n_models: usize,
    pub ambient_dim: usize,
    pub effective_dim: usize,
    pub diameter: f64,
    pub diameter_pair: (usize, usize),
    pub diameter_sq: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub upper_bound_ambient: f64,
    pub large_dim_approx: f64,
    pub d_star: f64,
    pub delta_max: f64,
    pub alpha: Vec<f64>,
    pub support_indices: Vec<usize>,
    pub method: BallMethod,
    pub tolerance: f64,
    pub budgets: Vec<(f64, bool)>,
}

pub fn distortion_report(ens: &ReprEnsemble, budgets: &[f64], tol: f64) -> Result<DistortionReport> {
    if let Some(b) = budgets.iter().find(|b| b.is_nan() || **b < 0.0) {
        return Err(Error::invalid(format!("budget must be non-negative, got {b}")));
    }
    let (delta, pair) = diameter(ens)?;
    let diameter_sq = delta * delta;
    let ball = min_enclosing_ball(ens, tol)?;
    let achieved = achievability_merge(ens, &ball)?;
    let lower_bound = diameter_sq / 4.0;
    let upper_bound = jung_factor(ens.effective_dim()) * diameter_sq;
    let d_star = ball.squared_radius();
    let slack = bound_slack(diameter_sq, tol);
    if d_star < lower_bound - slack || d_star > upper_bound + slack {
        return Err(Error::NumericalFault(format!(
            "D* = {d_star} outside [{lower_bound}, {upper_bound}]"
        )));
    }
    Ok(DistortionReport {
        n_models: ens.n_models(),
        ambient_dim: ens.ambient_dim(),
        effective_dim: ens.effective_dim(),
        diameter: delta,
        diameter_pair: pair,
        diameter_sq,
        lower_bound,
        upper_bound,
        upper_bound_ambient: jung_factor(ens.ambient_dim()) * diameter_sq,
        large_dim_approx: diameter_sq / 2.0,
        d_star,
        delta_max: achieved.delta_max,
        alpha: achieved.alpha,
        support_indices: ball.support_indices,
        method: ball.method,
        tolerance: tol,
        budgets: budgets.iter().map(|&b| (b, upper_bound <= b)).collect(),
    })
}

impl DistortionReport {
    fn rows(&self, labels: &[String]) -> Vec<(String, String)> {
        let join = |v: &[String]| v.join(";");
        let mut rows = vec![
            ("n_models".into(), self.n_models.to_string()),
            ("ambient_dim".into(), self.ambient_dim.to_string()),
            ("effective_dim".into(), self.effective_dim.to_string()),
            ("diameter".into(), self.diameter.to_string()),
            (
                "diameter_pair".into(),
                format!("{};{}", labels[self.diameter_pair.0], labels[self.diameter_pair.1]),
            ),
            ("diameter_sq".into(), self.diameter_sq.to_string()),
            ("lower_bound".into(), self.lower_bound.to_string()),
            ("d_star".into(), self.d_star.to_string()),
            ("delta_max".into(), self.delta_max.to_string()),
            ("upper_bound".into(), self.upper_bound.to_string()),
            ("upper_bound_ambient".into(), self.upper_bound_ambient.to_string()),
            ("large_dim_approx".into(), self.large_dim_approx.to_string()),
            ("method".into(), self.method.to_string()),
            ("tolerance".into(), self.tolerance.to_string()),
            (
                "support".into(),
                join(&self.support_indices.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>()),
            ),
            (
                "alpha".into(),
                join(&self.alpha.iter().map(f64::to_string).collect::<Vec<_>>()),
            ),
        ];
        for (budget, verdict) in &self.budgets {
            rows.push((format!("mergeable@{budget}"), verdict.to_string()));
        }
        rows
    }

    /// `key=value` lines.
    pub fn to_text(&self, labels: &[String]) -> String {
        let mut out = String::new();
        for (k, v) in self.rows(labels) {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Two-column `key,value` CSV.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in self.rows(labels) {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}
