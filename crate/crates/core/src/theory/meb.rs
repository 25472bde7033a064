//! Minimum enclosing ball of a finite point set.
//!
//! Small affine dimension: exact move-to-front Welzl with pivoting, run in
//! orthonormal coordinates of the points' affine hull. Otherwise a
//! farthest-point core-set iteration on the Gram matrix with away steps, stopped
//! once the radius is within `1 + tol` of a certified lower bound.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{dot, squared_distance};

/// Largest affine dimension handled by the exact solver.
pub const WELZL_MAX_DIM: usize = 16;
/// Largest point count handled by the exact solver.
pub const WELZL_MAX_POINTS: usize = 2048;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const CORESET_MAX_ITER: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallMethod {
    ExactWelzl,
    CoreSet,
}

impl fmt::Display for BallMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BallMethod::ExactWelzl => "exact_welzl",
            BallMethod::CoreSet => "core_set",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallResult {
    /// `sum_i alpha_i * point_i`.
    pub center: Vec<f64>,
    /// Largest distance from `center` to any point.
    pub radius: f64,
    pub support_indices: Vec<usize>,
    /// Barycentric coefficients over all points, zero off the support.
    pub alpha: Vec<f64>,
    pub method: BallMethod,
    pub tolerance: f64,
    /// Certified lower bound on the optimal radius (equals `radius` for the
    /// exact solver).
    pub radius_lower_bound: f64,
}

impl BallResult {
    pub fn squared_radius(&self) -> f64 {
        self.radius * self.radius
    }
}

/// Orthonormal coordinates of the points in their affine hull.
struct AffineFrame {
    coords: Vec<Vec<f64>>,
    rank: usize,
}

fn affine_frame(points: &[Vec<f64>]) -> AffineFrame {
    let origin = &points[0];
    let scale = points
        .iter()
        .map(|p| squared_distance(p, origin).sqrt())
        .fold(0.0, f64::max);
    let threshold = 1e-12 * scale;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    if scale > 0.0 {
        for p in &points[1..] {
            let mut v: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
            // Two Gram-Schmidt passes keep the basis orthogonal to working precision.
            for _ in 0..2 {
                for b in &basis {
                    let proj = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let n = dot(&v, &v).sqrt();
            if n > threshold {
                v.iter_mut().for_each(|x| *x /= n);
                basis.push(v);
            }
            if basis.len() == origin.len() {
                break;
            }
        }
    }
    let coords = points
        .iter()
        .map(|p| {
            let rel: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
            basis.iter().map(|b| dot(&rel, b)).collect()
        })
        .collect();
    AffineFrame {
        coords,
        rank: basis.len(),
    }
}

const NIL: usize = usize::MAX;

/// Move-to-front Welzl with pivoting over an index linked list.
struct Welzl<'a> {
    pts: &'a [Vec<f64>],
    dim: usize,
    next: Vec<usize>,
    prev: Vec<usize>,
    sentinel: usize,
    support_end: usize,
    // incremental boundary state
    m: usize,
    q0: Vec<f64>,
    z: Vec<f64>,
    f: Vec<f64>,
    v: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    sqr_r: Vec<f64>,
    current_c: Vec<f64>,
    current_sqr_r: f64,
}

impl<'a> Welzl<'a> {
    fn new(pts: &'a [Vec<f64>], dim: usize) -> Self {
        let n = pts.len();
        let sentinel = n;
        let mut next = vec![NIL; n + 1];
        let mut prev = vec![NIL; n + 1];
        for i in 0..n {
            next[i] = if i + 1 < n { i + 1 } else { sentinel };
            prev[i] = if i == 0 { sentinel } else { i - 1 };
        }
        next[sentinel] = if n > 0 { 0 } else { sentinel };
        prev[sentinel] = if n > 0 { n - 1 } else { sentinel };
        let slots = dim + 2;
        Welzl {
            pts,
            dim,
            next,
            prev,
            sentinel,
            support_end: 0,
            m: 0,
            q0: vec![0.0; dim],
            z: vec![0.0; slots],
            f: vec![0.0; slots],
            v: vec![vec![0.0; dim]; slots],
            a: vec![vec![0.0; slots]; slots],
            c: vec![vec![0.0; dim]; slots],
            sqr_r: vec![-1.0; slots],
            current_c: vec![0.0; dim],
            current_sqr_r: -1.0,
        }
    }

    fn begin(&self) -> usize {
        self.next[self.sentinel]
    }

    fn move_to_front(&mut self, j: usize) {
        if self.support_end == j {
            self.support_end = self.next[j];
        }
        if self.begin() == j {
            return;
        }
        let (p, n) = (self.prev[j], self.next[j]);
        self.next[p] = n;
        self.prev[n] = p;
        let first = self.begin();
        self.next[self.sentinel] = j;
        self.prev[j] = self.sentinel;
        self.next[j] = first;
        self.prev[first] = j;
    }

    fn excess(&self, i: usize) -> f64 {
        squared_distance(&self.pts[i], &self.current_c) - self.current_sqr_r
    }

    fn push(&mut self, i: usize) -> bool {
        let p = &self.pts[i];
        let m = self.m;
        if m == 0 {
            self.q0.clone_from(p);
            self.c[0].clone_from(p);
            self.sqr_r[0] = 0.0;
        } else {
            let mut vm: Vec<f64> = p.iter().zip(&self.q0).map(|(x, y)| x - y).collect();
            for k in 1..m {
                self.a[m][k] = 2.0 * dot(&self.v[k], &vm) / self.z[k];
            }
            for k in 1..m {
                let coef = self.a[m][k];
                vm.iter_mut().zip(&self.v[k]).for_each(|(x, y)| *x -= coef * y);
            }
            let zm = 2.0 * dot(&vm, &vm);
            if zm < f64::EPSILON * self.current_sqr_r {
                return false;
            }
            let e = squared_distance(p, &self.c[m - 1]) - self.sqr_r[m - 1];
            let fm = e / zm;
            let cm: Vec<f64> = self.c[m - 1].iter().zip(&vm).map(|(c, v)| c + fm * v).collect();
            self.z[m] = zm;
            self.f[m] = fm;
            self.v[m] = vm;
            self.c[m] = cm;
            self.sqr_r[m] = self.sqr_r[m - 1] + e * fm / 2.0;
        }
        self.current_c.clone_from(&self.c[m]);
        self.current_sqr_r = self.sqr_r[m];
        self.m += 1;
        true
    }

    fn pop(&mut self) {
        self.m -= 1;
    }

    fn mtf(&mut self, end: usize) {
        self.support_end = self.begin();
        if self.m == self.dim + 1 {
            return;
        }
        let mut k = self.begin();
        while k != end {
            let j = k;
            k = self.next[k];
            if self.excess(j) > 0.0 && self.push(j) {
                self.mtf(j);
                self.pop();
                self.move_to_front(j);
            }
        }
    }

    fn pivot(&mut self) {
        let mut t = self.next[self.begin()];
        self.mtf(t);
        loop {
            let mut max_e = 0.0;
            let mut pivot = NIL;
            let mut k = t;
            while k != self.sentinel {
                let e = self.excess(k);
                if e > max_e {
                    max_e = e;
                    pivot = k;
                }
                k = self.next[k];
            }
            if pivot == NIL {
                break;
            }
            t = self.support_end;
            if t == pivot {
                t = self.next[t];
            }
            let old = self.current_sqr_r;
            if !self.push(pivot) {
                break;
            }
            let end = self.support_end;
            self.mtf(end);
            self.pop();
            self.move_to_front(pivot);
            if self.current_sqr_r <= old {
                break;
            }
        }
    }

    fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut k = self.begin();
        while k != self.support_end && k != self.sentinel {
            out.push(k);
            k = self.next[k];
        }
        out
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting; columns
/// with a negligible pivot get a zero component.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    let scale = a.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let mut pivot_cols = vec![NIL; n];
    let mut row = 0;
    for col in 0..n {
        if row == n {
            break;
        }
        let best = (row..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        if a[best][col].abs() <= 1e-13 * scale {
            continue;
        }
        a.swap(row, best);
        b.swap(row, best);
        for r in row + 1..n {
            let factor = a[r][col] / a[row][col];
            let (upper, lower) = a.split_at_mut(r);
            for (x, y) in lower[0][col..n].iter_mut().zip(&upper[row][col..n]) {
                *x -= factor * y;
            }
            b[r] -= factor * b[row];
        }
        pivot_cols[row] = col;
        row += 1;
    }
    let mut x = vec![0.0; n];
    for r in (0..row).rev() {
        let col = pivot_cols[r];
        let s: f64 = (col + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[col] = (b[r] - s) / a[r][col];
    }
    x
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Least-squares barycentric coordinates of `center` over `support`, projected
/// to the simplex.
fn barycentric(coords: &[Vec<f64>], support: &[usize], center: &[f64]) -> Vec<f64> {
    if support.len() == 1 {
        return vec![1.0];
    }
    let s0 = &coords[support[0]];
    let cols: Vec<Vec<f64>> = support[1..]
        .iter()
        .map(|&i| coords[i].iter().zip(s0).map(|(a, b)| a - b).collect())
        .collect();
    let rhs: Vec<f64> = center.iter().zip(s0).map(|(a, b)| a - b).collect();
    let normal: Vec<Vec<f64>> = cols.iter().map(|ci| cols.iter().map(|cj| dot(ci, cj)).collect()).collect();
    let proj: Vec<f64> = cols.iter().map(|ci| dot(ci, &rhs)).collect();
    let beta = solve_linear(normal, proj);
    let mut alpha = Vec::with_capacity(support.len());
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta);
    project_to_simplex(&alpha)
}

fn convex_combination(points: &[Vec<f64>], alpha: &[f64]) -> Vec<f64> {
    let dim = points[0].len();
    let mut center = vec![0.0; dim];
    for (p, &w) in points.iter().zip(alpha) {
        if w != 0.0 {
            center.iter_mut().zip(p).for_each(|(c, x)| *c += w * x);
        }
    }
    center
}

fn max_distance(points: &[Vec<f64>], center: &[f64]) -> f64 {
    points
        .iter()
        .map(|p| squared_distance(p, center))
        .fold(0.0, f64::max)
        .sqrt()
}

fn exact_welzl(points: &[Vec<f64>], frame: &AffineFrame, tol: f64) -> Option<BallResult> {
    let n = points.len();
    let mut solver = Welzl::new(&frame.coords, frame.rank);
    solver.pivot();
    let support = solver.support();
    if support.is_empty() {
        return None;
    }
    let reduced_center = solver.current_c.clone();
    let reduced_radius = max_distance(&frame.coords, &reduced_center);
    if reduced_radius * reduced_radius > solver.current_sqr_r.max(0.0) * (1.0 + 1e-6) + 1e-300 {
        return None;
    }
    let local = barycentric(&frame.coords, &support, &reduced_center);
    let mut alpha = vec![0.0; n];
    for (&i, &w) in support.iter().zip(&local) {
        alpha[i] = w;
    }
    let center = convex_combination(points, &alpha);
    let radius = max_distance(points, &center);
    let mut support_indices: Vec<usize> = support.iter().copied().filter(|&i| alpha[i] > 0.0).collect();
    support_indices.sort_unstable();
    Some(BallResult {
        center,
        radius,
        support_indices,
        alpha,
        method: BallMethod::ExactWelzl,
        tolerance: tol,
        radius_lower_bound: radius,
    })
}

/// Farthest-point iteration with away steps on the Gram matrix of the points.
fn core_set(points: &[Vec<f64>], tol: f64) -> Result<BallResult> {
    let n = points.len();
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for p in points {
        mean.iter_mut().zip(p).for_each(|(m, x)| *m += x / n as f64);
    }
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(a, b)| a - b).collect())
        .collect();
    let gram: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| dot(&centered[i], &centered[j])).collect())
        .collect();
    let sq = |i: usize, j: usize| (gram[i][i] + gram[j][j] - 2.0 * gram[i][j]).max(0.0);
    let diameter_sq = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| sq(i, j))
        .fold(0.0, f64::max);

    let far_from = |i: usize| (0..n).max_by(|&a, &b| sq(i, a).total_cmp(&sq(i, b))).expect("n >= 1");
    let a0 = far_from(0);
    let b0 = far_from(a0);
    let mut alpha = vec![0.0; n];
    alpha[a0] += 0.5;
    alpha[b0] += 0.5;

    let gram_times = |alpha: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| alpha.iter().zip(&gram[i]).filter(|(w, _)| **w != 0.0).map(|(w, g)| w * g).sum())
            .collect()
    };
    let mut g = gram_times(&alpha);
    let mut ratio = f64::INFINITY;
    for iter in 0..CORESET_MAX_ITER {
        if iter % 1000 == 999 {
            g = gram_times(&alpha);
        }
        let c2: f64 = alpha.iter().zip(&g).map(|(a, b)| a * b).sum();
        let dist2: Vec<f64> = (0..n).map(|i| (gram[i][i] - 2.0 * g[i] + c2).max(0.0)).collect();
        let (far, &upper) = dist2
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("n >= 1");
        let dual: f64 = alpha.iter().zip(&dist2).map(|(a, d)| a * d).sum();
        let lower = dual.max(diameter_sq / 4.0);
        if upper <= 0.0 {
            ratio = 1.0;
            break;
        }
        ratio = (upper / lower).sqrt();
        if ratio <= 1.0 + tol {
            let center = convex_combination(points, &alpha);
            let radius = max_distance(points, &center);
            return Ok(BallResult {
                center,
                radius,
                support_indices: (0..n).filter(|&i| alpha[i] > 0.0).collect(),
                alpha,
                method: BallMethod::CoreSet,
                tolerance: tol,
                radius_lower_bound: lower.sqrt(),
            });
        }
        let gamma = dual.max(f64::MIN_POSITIVE);
        let delta_plus = upper / gamma - 1.0;
        let (near, near_d) = (0..n)
            .filter(|&i| alpha[i] > 0.0)
            .map(|i| (i, dist2[i]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("alpha has support");
        let delta_minus = 1.0 - near_d / gamma;
        if delta_plus >= delta_minus {
            let lambda = delta_plus / (2.0 * (1.0 + delta_plus));
            alpha.iter_mut().for_each(|a| *a *= 1.0 - lambda);
            alpha[far] += lambda;
            g.iter_mut().zip(&gram).for_each(|(gi, row)| *gi = (1.0 - lambda) * *gi + lambda * row[far]);
        } else {
            let w = alpha[near];
            let lambda = (delta_minus / (2.0 * (1.0 - delta_minus))).min(w / (1.0 - w));
            alpha.iter_mut().for_each(|a| *a *= 1.0 + lambda);
            alpha[near] -= lambda;
            if alpha[near] <= 1e-15 {
                alpha[near] = 0.0;
            }
            g.iter_mut().zip(&gram).for_each(|(gi, row)| *gi = (1.0 + lambda) * *gi - lambda * row[near]);
        }
    }
    Err(Error::NonConvergence {
        iterations: CORESET_MAX_ITER,
        achieved_ratio: ratio,
    })
}

fn validate_points(points: &[Vec<f64>], tol: f64) -> Result<()> {
    if points.is_empty() {
        return Err(Error::invalid("minimum enclosing ball of an empty set"));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("points must share a positive dimension"));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("points must be finite"));
    }
    Ok(())
}

/// Minimum enclosing ball, choosing the exact solver when the affine dimension
/// is at most 16 and there are at most 2048 points.
pub fn min_enclosing_ball(points: &[Vec<f64>], tol: f64) -> Result<BallResult> {
    min_enclosing_ball_with(points, tol, None)
}

/// As [`min_enclosing_ball`] with an optional forced method.
pub fn min_enclosing_ball_with(points: &[Vec<f64>], tol: f64, method: Option<BallMethod>) -> Result<BallResult> {
    validate_points(points, tol)?;
    let effective_dim = points[0].len().min(points.len() - 1);
    let auto = if effective_dim <= WELZL_MAX_DIM && points.len() <= WELZL_MAX_POINTS {
        BallMethod::ExactWelzl
    } else {
        BallMethod::CoreSet
    };
    match method.unwrap_or(auto) {
        BallMethod::ExactWelzl => {
            let frame = affine_frame(points);
            if frame.rank > WELZL_MAX_DIM.max(effective_dim) {
                return Err(Error::invalid(format!(
                    "affine dimension {} is too large for the exact solver",
                    frame.rank
                )));
            }
            match exact_welzl(points, &frame, tol) {
                Some(ball) => Ok(ball),
                None => {
                    log::warn!("exact enclosing-ball solve lost precision; using core-set iteration");
                    core_set(points, tol)
                }
            }
        }
        BallMethod::CoreSet => core_set(points, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_ball() {
        let pts = vec![vec![0.0], vec![4.0]];
        let b = min_enclosing_ball(&pts, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(b.center, vec![2.0]);
        assert_eq!(b.radius, 2.0);
        assert_eq!(b.alpha, vec![0.5, 0.5]);
    }

    #[test]
    fn single_point_and_duplicates() {
        let b = min_enclosing_ball(&[vec![1.0, 2.0]], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(b.radius, 0.0);
        assert_eq!(b.alpha, vec![1.0]);
        let b = min_enclosing_ball(&vec![vec![1.0, 2.0]; 4], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(b.radius, 0.0);
        assert!((b.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equilateral_triangle_circumcircle() {
        let h = 3f64.sqrt() / 2.0;
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]];
        let b = min_enclosing_ball(&pts, DEFAULT_TOLERANCE).unwrap();
        assert!((b.radius - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        for a in &b.alpha {
            assert!((a - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn obtuse_triangle_uses_long_edge() {
        let pts = vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 0.5]];
        let b = min_enclosing_ball(&pts, DEFAULT_TOLERANCE).unwrap();
        assert!((b.radius - 2.0).abs() < 1e-15);
        assert_eq!(b.alpha[2], 0.0);
        assert_eq!(b.support_indices, vec![0, 1]);
    }

    #[test]
    fn high_ambient_dimension_is_reduced_to_affine_hull() {
        let mut pts = vec![vec![0.0; 500]; 3];
        pts[1][10] = 2.0;
        pts[2][400] = 2.0;
        let b = min_enclosing_ball(&pts, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(b.method, BallMethod::ExactWelzl);
        assert!((b.radius - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn core_set_agrees_with_exact_solver() {
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let t = i as f64;
                vec![(t * 1.7).sin() * 3.0, (t * 0.9).cos(), (t * 2.3).sin() * t * 0.1]
            })
            .collect();
        let exact = min_enclosing_ball_with(&pts, 1e-9, Some(BallMethod::ExactWelzl)).unwrap();
        let approx = min_enclosing_ball_with(&pts, 1e-9, Some(BallMethod::CoreSet)).unwrap();
        assert!(approx.radius >= exact.radius - 1e-12);
        assert!(approx.radius <= exact.radius * (1.0 + 1e-9) + 1e-12);
        assert!(approx.radius_lower_bound <= exact.radius + 1e-12);
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_to_simplex(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(project_to_simplex(&[1.2, -0.2]), vec![1.0, 0.0]);
        let p = project_to_simplex(&[0.3, 0.3, 0.6]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(min_enclosing_ball(&[], 1e-9).is_err());
        assert!(min_enclosing_ball(&[vec![1.0], vec![1.0, 2.0]], 1e-9).is_err());
        assert!(min_enclosing_ball(&[vec![f64::NAN]], 1e-9).is_err());
        assert!(min_enclosing_ball(&[vec![1.0]], 0.0).is_err());
    }
}
