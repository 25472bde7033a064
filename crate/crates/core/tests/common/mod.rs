#![allow(dead_code)]

use std::path::Path;

use mergemeter::tensor_store::{Checkpoint, Digest, TaskVector, Tensor};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| gaussian(rng, dim).into_iter().map(|v| v * scale).collect())
        .collect()
}

/// Uniform draw from the simplex via normalized exponentials.
pub fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Random orthogonal matrix (rows) via Gram-Schmidt on Gaussian vectors.
pub fn random_rotation(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < dim {
        let mut v = gaussian(rng, dim);
        for b in &basis {
            let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

pub fn rotate(rot: &[Vec<f64>], p: &[f64], shift: &[f64]) -> Vec<f64> {
    rot.iter()
        .zip(shift)
        .map(|(row, s)| row.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + s)
        .collect()
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Smallest enclosing radius by enumerating every support subset of size at
/// most `dim + 1` and taking the smallest circumscribed ball that covers all
/// points.
pub fn brute_force_meb_radius(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let dim = points[0].len();
    let max_size = (dim + 1).min(n);
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if subset.len() > max_size {
            continue;
        }
        let Some(center) = circumcenter(points, &subset) else {
            continue;
        };
        let r2 = sq(&center, &points[subset[0]]);
        let covers = points.iter().all(|p| sq(p, &center) <= r2 * (1.0 + 1e-10) + 1e-12);
        if covers {
            best = best.min(r2.sqrt());
        }
    }
    best
}

/// Center of the smallest sphere through `subset` inside its affine hull.
fn circumcenter(points: &[Vec<f64>], subset: &[usize]) -> Option<Vec<f64>> {
    let p0 = &points[subset[0]];
    let m = subset.len() - 1;
    if m == 0 {
        return Some(p0.clone());
    }
    let dim = p0.len();
    let cols = DMatrix::from_fn(dim, m, |r, c| points[subset[c + 1]][r] - p0[r]);
    let gram = cols.transpose() * &cols;
    let rhs = DVector::from_fn(m, |i, _| 0.5 * gram[(i, i)]);
    if gram.determinant().abs() < 1e-12 * gram.norm().powi(m as i32).max(1e-300) {
        return None;
    }
    let beta = gram.lu().solve(&rhs)?;
    let offset = cols * beta;
    Some((0..dim).map(|r| p0[r] + offset[r]).collect())
}

pub fn tensor(name: &str, values: Vec<f32>) -> Tensor {
    Tensor::f32(name, vec![values.len()], values).unwrap()
}

pub fn task_vector_from(tensors: Vec<Tensor>, digest: u64) -> TaskVector {
    TaskVector::from_parts(Checkpoint::new(tensors).unwrap(), Digest(digest))
}

/// Two-tensor task vector with Gaussian entries.
pub fn random_task_vector(rng: &mut ChaCha8Rng, sizes: (usize, usize)) -> TaskVector {
    let a: Vec<f32> = gaussian(rng, sizes.0).into_iter().map(|v| v as f32).collect();
    let b: Vec<f32> = gaussian(rng, sizes.1).into_iter().map(|v| v as f32).collect();
    task_vector_from(vec![tensor("layer.bias", a), tensor("layer.weight", b)], 42)
}

#[derive(Debug, Clone)]
pub struct QwenRow {
    pub size: String,
    pub technique: String,
    pub task: String,
    pub finetuned: f64,
    pub merged: f64,
    pub reported_loss: f64,
}

fn data_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn qwen_rows() -> Vec<QwenRow> {
    let mut rdr = csv::Reader::from_path(data_path("qwen_glue.csv")).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            QwenRow {
                size: r[0].to_string(),
                technique: r[1].to_string(),
                task: r[2].to_string(),
                finetuned: r[3].parse().unwrap(),
                merged: r[4].parse().unwrap(),
                reported_loss: r[5].parse().unwrap(),
            }
        })
        .collect()
}

/// Per detail table: (name, mds row, per-technique loss rows for LA, TA, TIES).
pub fn detail_tables() -> Vec<(String, Vec<f64>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_path(data_path("detail_tables.csv")).unwrap();
    let mut out: Vec<(String, Vec<f64>, Vec<Vec<f64>>)> = Vec::new();
    for r in rdr.records() {
        let r = r.unwrap();
        let name = r[0].to_string();
        if out.last().map(|t| &t.0) != Some(&name) {
            out.push((name, Vec::new(), vec![Vec::new(); 3]));
        }
        let t = out.last_mut().unwrap();
        t.1.push(r[2].parse().unwrap());
        for k in 0..3 {
            t.2[k].push(r[3 + k].parse().unwrap());
        }
    }
    out
}
