//! Hidden-state diagnostics: pairwise distances, HiddenSim, merging difficulty
//! score (MDS) and merging loss.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::squared_distance;
use crate::tensor_store::{Checkpoint, Tensor};

pub const ACTIVATION_PREFIX: &str = "act/";

/// Per-model, per-datapoint hidden vectors for a shared validation set.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSet {
    model_ids: Vec<String>,
    datapoint_ids: Vec<String>,
    hidden_dim: usize,
    /// Model-major, then datapoint, then hidden dimension.
    vectors: Vec<f64>,
}

impl ActivationSet {
    /// `vectors` is laid out `[model][datapoint][dim]`.
    ///
    /// A single model is accepted so merged hidden states can be carried in the
    /// same type; pairwise diagnostics check for at least two models themselves.
    pub fn new(
        model_ids: Vec<String>,
        datapoint_ids: Vec<String>,
        hidden_dim: usize,
        vectors: Vec<f64>,
    ) -> Result<Self> {
        if model_ids.is_empty() || datapoint_ids.is_empty() || hidden_dim == 0 {
            return Err(Error::invalid(format!(
                "activation set needs N >= 1, K >= 1, d >= 1 (got {}, {}, {hidden_dim})",
                model_ids.len(),
                datapoint_ids.len()
            )));
        }
        if vectors.len() != model_ids.len() * datapoint_ids.len() * hidden_dim {
            return Err(Error::invalid(format!(
                "activation set is not rectangular: {} values for {}x{}x{hidden_dim}",
                vectors.len(),
                model_ids.len(),
                datapoint_ids.len()
            )));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("activation set contains non-finite values"));
        }
        for ids in [&model_ids, &datapoint_ids] {
            let mut sorted = ids.clone();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::NameCollision(format!("duplicate id in {ids:?}")));
            }
        }
        Ok(ActivationSet {
            model_ids,
            datapoint_ids,
            hidden_dim,
            vectors,
        })
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn datapoint_ids(&self) -> &[String] {
        &self.datapoint_ids
    }

    pub fn n_models(&self) -> usize {
        self.model_ids.len()
    }

    pub fn n_datapoints(&self) -> usize {
        self.datapoint_ids.len()
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn vector(&self, model: usize, datapoint: usize) -> &[f64] {
        let start = (model * self.n_datapoints() + datapoint) * self.hidden_dim;
        &self.vectors[start..start + self.hidden_dim]
    }

    /// All hidden vectors of one model, datapoints concatenated.
    pub fn model_block(&self, model: usize) -> &[f64] {
        let len = self.n_datapoints() * self.hidden_dim;
        &self.vectors[model * len..(model + 1) * len]
    }

    /// Parses tensors named `act/<model_id>/<datapoint_id>`, each of shape `[d]`.
    pub fn from_checkpoint(checkpoint: &Checkpoint) -> Result<Self> {
        let mut cells: BTreeMap<(String, String), &Tensor> = BTreeMap::new();
        for t in checkpoint.tensors() {
            let rest = t
                .name
                .strip_prefix(ACTIVATION_PREFIX)
                .ok_or_else(|| Error::InvalidName(format!("{} is not an activation tensor", t.name)))?;
            let (model, datapoint) = rest
                .split_once('/')
                .filter(|(m, d)| !m.is_empty() && !d.is_empty())
                .ok_or_else(|| Error::InvalidName(format!("{} is not act/<model>/<datapoint>", t.name)))?;
            if t.shape.len() != 1 {
                return Err(Error::HeaderMismatch(format!(
                    "{}: activation must have shape [d], found {:?}",
                    t.name, t.shape
                )));
            }
            cells.insert((model.to_string(), datapoint.to_string()), t);
        }
        let mut models: Vec<String> = cells.keys().map(|(m, _)| m.clone()).collect();
        models.dedup();
        let mut datapoints: Vec<String> = cells.keys().map(|(_, d)| d.clone()).collect();
        datapoints.sort();
        datapoints.dedup();
        let hidden_dim = cells.values().next().map_or(0, |t| t.shape[0]);
        let mut vectors = Vec::with_capacity(models.len() * datapoints.len() * hidden_dim);
        for m in &models {
            for d in &datapoints {
                let t = cells.get(&(m.clone(), d.clone())).ok_or_else(|| {
                    Error::invalid(format!("activation set is not rectangular: missing act/{m}/{d}"))
                })?;
                if t.shape[0] != hidden_dim {
                    return Err(Error::ShapeMismatch {
                        name: t.name.clone(),
                        expected: vec![hidden_dim],
                        found: t.shape.clone(),
                    });
                }
                vectors.extend(t.values.iter().map(|&v| f64::from(v)));
            }
        }
        ActivationSet::new(models, datapoints, hidden_dim, vectors)
    }

    /// Stores every vector as an f32 tensor `act/<model>/<datapoint>`.
    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        let mut tensors = Vec::with_capacity(self.n_models() * self.n_datapoints());
        for (i, m) in self.model_ids.iter().enumerate() {
            if m.contains('/') {
                return Err(Error::InvalidName(format!("model id {m:?} contains '/'")));
            }
            for (k, d) in self.datapoint_ids.iter().enumerate() {
                let values = self.vector(i, k).iter().map(|&v| v as f32).collect();
                tensors.push(Tensor::f32(
                    format!("{ACTIVATION_PREFIX}{m}/{d}"),
                    vec![self.hidden_dim],
                    values,
                )?);
            }
        }
        Checkpoint::new(tensors)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::read(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_checkpoint()?.write(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide every vector by `sqrt(d)`.
    #[default]
    PerDim,
    /// Divide every vector by its own L2 norm.
    UnitVector,
    None,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_dim" => Ok(Normalization::PerDim),
            "unit_vector" => Ok(Normalization::UnitVector),
            "none" => Ok(Normalization::None),
            _ => Err(Error::invalid(format!("unknown normalization {s:?}"))),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::PerDim => "per_dim",
            Normalization::UnitVector => "unit_vector",
            Normalization::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityKind {
    Distance,
    HiddenSim,
}

/// Symmetric N x N matrix over labelled models.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub kind: SimilarityKind,
    pub labels: Vec<String>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(kind: SimilarityKind, labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::invalid(format!("{} values for a {n}x{n} matrix", values.len())));
        }
        let m = SimilarityMatrix { kind, labels, values };
        let diag = match kind {
            SimilarityKind::Distance => 0.0,
            SimilarityKind::HiddenSim => 1.0,
        };
        for i in 0..n {
            if m.get(i, i) != diag {
                return Err(Error::invalid(format!("diagonal entry {i} must be {diag}")));
            }
            for j in 0..n {
                let v = m.get(i, j);
                if !v.is_finite() || (v - m.get(j, i)).abs() > 1e-9 {
                    return Err(Error::invalid(format!("matrix is not symmetric/finite at ({i},{j})")));
                }
                if kind == SimilarityKind::Distance && v < 0.0 {
                    return Err(Error::invalid(format!("negative distance at ({i},{j})")));
                }
                if kind == SimilarityKind::HiddenSim && !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!("similarity outside [0,1] at ({i},{j})")));
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    /// The matrix restricted to all models except `drop`.
    pub fn without(&self, drop: usize) -> SimilarityMatrix {
        let keep: Vec<usize> = (0..self.n()).filter(|&i| i != drop).collect();
        let values = keep
            .iter()
            .flat_map(|&i| keep.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        SimilarityMatrix {
            kind: self.kind,
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            values,
        }
    }

    /// Heatmap CSV: a header row of labels, then one labelled row per model.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.n() {
                out.push_str(&format!(",{}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

fn normalized(v: &[f64], mode: Normalization, label: &str) -> Result<Vec<f64>> {
    match mode {
        Normalization::None => Ok(v.to_vec()),
        Normalization::PerDim => {
            let s = (v.len() as f64).sqrt();
            Ok(v.iter().map(|x| x / s).collect())
        }
        Normalization::UnitVector => {
            let n = squared_distance(v, &vec![0.0; v.len()]).sqrt();
            if n == 0.0 {
                return Err(Error::ZeroNorm(format!("hidden state {label} under unit_vector normalization")));
            }
            Ok(v.iter().map(|x| x / n).collect())
        }
    }
}

/// `d(i,j) = (1/K) sum_k || norm(h_i^k) - norm(h_j^k) ||_2`.
pub fn pairwise_hidden_distance(acts: &ActivationSet, normalization: Normalization) -> Result<SimilarityMatrix> {
    let n = acts.n_models();
    if n < 2 {
        return Err(Error::invalid("pairwise distances need at least two models"));
    }
    let k_count = acts.n_datapoints();
    let normed: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| {
            (0..k_count)
                .map(|k| {
                    let label = format!("{}/{}", acts.model_ids()[i], acts.datapoint_ids()[k]);
                    normalized(acts.vector(i, k), normalization, &label)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let dists: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let total: f64 = (0..k_count)
                .map(|k| squared_distance(&normed[i][k], &normed[j][k]).sqrt())
                .sum();
            total / k_count as f64
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (&(i, j), &d) in pairs.iter().zip(&dists) {
        values[i * n + j] = d;
        values[j * n + i] = d;
    }
    SimilarityMatrix::new(SimilarityKind::Distance, acts.model_ids().to_vec(), values)
}

/// Min-max renormalisation of the off-diagonal distances: the closest pair maps
/// to 1, the farthest to 0.
pub fn hiddensim(distances: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    if distances.kind != SimilarityKind::Distance {
        return Err(Error::invalid("hiddensim expects a distance matrix"));
    }
    let n = distances.n();
    if n < 2 {
        return Err(Error::invalid("hiddensim needs at least two models"));
    }
    let off: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| distances.get(i, j))
        .collect();
    let max = off.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = off.iter().copied().fold(f64::INFINITY, f64::min);
    let span = max - min;
    if span.is_nan() || span <= 0.0 {
        return Err(Error::Degenerate(format!(
            "all {} model pairs are equidistant (d = {max}); HiddenSim is undefined, \
             add a model or compare against a different group",
            off.len()
        )));
    }
    let mut values = vec![1.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i * n + j] = (max - distances.get(i, j)) / span;
            }
        }
    }
    SimilarityMatrix::new(SimilarityKind::HiddenSim, distances.labels.clone(), values)
}

/// `MDS_i = 1 / mean_{j != i} HiddenSim(i, j)`.
pub fn mds(sim: &SimilarityMatrix) -> Result<Vec<f64>> {
    if sim.kind != SimilarityKind::HiddenSim {
        return Err(Error::invalid("mds expects a HiddenSim matrix"));
    }
    let n = sim.n();
    if n < 3 {
        return Err(Error::invalid(format!("MDS needs at least three models, got {n}")));
    }
    (0..n)
        .map(|i| {
            let mean = (0..n).filter(|&j| j != i).map(|j| sim.get(i, j)).sum::<f64>() / (n - 1) as f64;
            if mean == 0.0 {
                Err(Error::Degenerate(format!(
                    "model {} has zero similarity to every other model; MDS is infinite",
                    sim.labels[i]
                )))
            } else {
                Ok(1.0 / mean)
            }
        })
        .collect()
}

/// Drop-one subset candidate produced by [`drop_one_ranking`].
#[derive(Debug, Clone, PartialEq)]
pub struct DropOneCandidate {
    pub dropped: String,
    pub worst_mds: f64,
    pub worst_model: String,
}

/// For each model, the worst MDS of the group without it; best subsets first.
pub fn drop_one_ranking(distances: &SimilarityMatrix) -> Result<Vec<DropOneCandidate>> {
    if distances.n() < 4 {
        return Err(Error::invalid("drop-one ranking needs at least four models"));
    }
    let mut out = (0..distances.n())
        .map(|i| {
            let sub = distances.without(i);
            let scores = mds(&hiddensim(&sub)?)?;
            let (w, &worst) = scores
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("non-empty");
            Ok(DropOneCandidate {
                dropped: distances.labels[i].clone(),
                worst_mds: worst,
                worst_model: sub.labels[w].clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.worst_mds.total_cmp(&b.worst_mds).then_with(|| a.dropped.cmp(&b.dropped)));
    Ok(out)
}

/// `(merged / finetuned - 1) * 100`.
pub fn merging_loss(merged_perf: f64, finetuned_perf: f64) -> Result<f64> {
    if !finetuned_perf.is_finite() || finetuned_perf <= 0.0 {
        return Err(Error::invalid(format!("fine-tuned performance must be positive, got {finetuned_perf}")));
    }
    if !merged_perf.is_finite() || merged_perf < 0.0 {
        return Err(Error::invalid(format!("merged performance must be non-negative, got {merged_perf}")));
    }
    Ok((merged_perf / finetuned_perf - 1.0) * 100.0)
}

pub fn average_merging_loss(losses: &[f64]) -> Result<f64> {
    if losses.is_empty() {
        return Err(Error::invalid("average of an empty loss list"));
    }
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

/// Per task, the least negative loss over all techniques.
pub fn best_merging_loss(per_technique: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = per_technique
        .first()
        .ok_or_else(|| Error::invalid("no techniques supplied"))?;
    if per_technique.iter().any(|l| l.len() != first.len()) {
        return Err(Error::invalid("techniques cover different numbers of tasks"));
    }
    Ok((0..first.len())
        .map(|t| per_technique.iter().map(|l| l[t]).fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

/// Fine-tuned and merged performance per task and technique.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceTable {
    pub task_ids: Vec<String>,
    pub finetuned: Vec<f64>,
    /// Technique name to merged performance per task (same order as `task_ids`).
    pub merged: BTreeMap<String, Vec<f64>>,
    pub metric_name: String,
}

impl PerformanceTable {
    /// Reads `task_id,technique,finetuned,merged` rows (header required).
    pub fn from_csv_reader<R: std::io::Read>(reader: R, metric_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
        let expected = ["task_id", "technique", "finetuned", "merged"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Csv(format!("expected header {expected:?}, found {headers:?}")));
        }
        let mut task_ids: Vec<String> = Vec::new();
        let mut finetuned: Vec<f64> = Vec::new();
        let mut cells: BTreeMap<(String, usize), f64> = BTreeMap::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|_| Error::Csv(format!("row {}: {:?} is not a number", line + 2, &rec[i])))
            };
            let (ft, mg) = (num(2)?, num(3)?);
            if ft <= 0.0 || mg < 0.0 || !ft.is_finite() || !mg.is_finite() {
                return Err(Error::Csv(format!("row {}: performance values out of range", line + 2)));
            }
            let task = rec[0].to_string();
            let idx = match task_ids.iter().position(|t| *t == task) {
                Some(i) => {
                    if finetuned[i] != ft {
                        return Err(Error::Csv(format!(
                            "row {}: task {task} has conflicting fine-tuned values",
                            line + 2
                        )));
                    }
                    i
                }
                None => {
                    task_ids.push(task);
                    finetuned.push(ft);
                    task_ids.len() - 1
                }
            };
            if cells.insert((rec[1].to_string(), idx), mg).is_some() {
                return Err(Error::Csv(format!("row {}: duplicate (task, technique)", line + 2)));
            }
        }
        let techniques: Vec<String> = {
            let mut t: Vec<String> = cells.keys().map(|(t, _)| t.clone()).collect();
            t.dedup();
            t
        };
        let mut merged = BTreeMap::new();
        for tech in techniques {
            let row = (0..task_ids.len())
                .map(|i| {
                    cells.get(&(tech.clone(), i)).copied().ok_or_else(|| {
                        Error::Csv(format!("technique {tech} has no row for task {}", task_ids[i]))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            merged.insert(tech, row);
        }
        if task_ids.is_empty() {
            return Err(Error::Csv("performance table is empty".into()));
        }
        Ok(PerformanceTable {
            task_ids,
            finetuned,
            merged,
            metric_name: metric_name.to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, "performance")
    }

    /// Merging loss per technique, tasks in table order.
    pub fn losses(&self) -> Result<BTreeMap<String, Vec<f64>>> {
        self.merged
            .iter()
            .map(|(tech, row)| {
                let l = row
                    .iter()
                    .zip(&self.finetuned)
                    .map(|(&m, &f)| merging_loss(m, f))
                    .collect::<Result<Vec<f64>>>()?;
                Ok((tech.clone(), l))
            })
            .collect()
    }

    pub fn best_losses(&self) -> Result<Vec<f64>> {
        let losses: Vec<Vec<f64>> = self.losses()?.into_values().collect();
        best_merging_loss(&losses)
    }
}
