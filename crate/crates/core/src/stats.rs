//! Pearson correlation, one-way ANOVA, and the regularized incomplete beta
//! function behind their p-values.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

const LENTZ_FLOOR: f64 = 1e-30;
const CF_MAX_ITER: usize = 300;
const CF_EPS: f64 = 1e-16;
/// Below this argument ln Gamma shifts up before using Stirling's series.
const STIRLING_MIN: f64 = 15.0;

/// Remainder of Stirling's series for ln Gamma, valid for `x >= STIRLING_MIN`.
fn stirling_correction(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0
            + r2 * (1.0 / 1260.0 + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360360.0))))))
}

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < STIRLING_MIN {
        let mut shift = 1.0;
        let mut y = x;
        while y < STIRLING_MIN {
            shift *= y;
            y += 1.0;
        }
        return ln_gamma(y) - shift.ln();
    }
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + stirling_correction(x)
}

/// ln B(a, b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, big) = if a < b { (a, b) } else { (b, a) };
    if big < STIRLING_MIN {
        return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    }
    // ln Gamma(big) - ln Gamma(big + small) without the large cancelling terms.
    let s = big + small;
    let ratio = -(big - 0.5) * (small / big).ln_1p() - small * s.ln() + small + stirling_correction(big)
        - stirling_correction(s);
    ln_gamma(small) + ratio
}

/// `x^a y^b / B(a, b)` with `y = 1 - x` supplied separately for accuracy.
fn beta_front(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if a >= STIRLING_MIN && b >= STIRLING_MIN {
        let s = a + b;
        let delta = x * b - y * a;
        let exponent = a * (delta / a).ln_1p() + b * (-delta / b).ln_1p()
            + 0.5 * (a * b / (2.0 * PI * s)).ln()
            + stirling_correction(s)
            - stirling_correction(a)
            - stirling_correction(b);
        exponent.exp()
    } else {
        (a * x.ln() + b * y.ln() - ln_beta(a, b)).exp()
    }
}

/// Continued fraction for I_x(a,b) by modified Lentz evaluation.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let floor = |v: f64| if v.abs() < LENTZ_FLOOR { LENTZ_FLOOR } else { v };
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 / floor(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / floor(1.0 + aa * d);
        c = floor(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / floor(1.0 + aa * d);
        c = floor(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        iterations: CF_MAX_ITER,
        achieved_ratio: h,
    })
}

/// I_x(a,b) with `y = 1 - x` passed explicitly so callers that know `y`
/// exactly do not lose it to cancellation.
fn incomplete_beta_xy(a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        let front = beta_front(b, a, y, x);
        Ok(1.0 - front * beta_continued_fraction(b, a, y)? / b)
    } else {
        let front = beta_front(a, b, x, y);
        Ok(front * beta_continued_fraction(a, b, x)? / a)
    }
}

/// Regularized incomplete beta function I_x(a, b).
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("incomplete beta needs a, b > 0 (got {a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("incomplete beta needs x in [0,1], got {x}")));
    }
    incomplete_beta_xy(a, b, x, 1.0 - x).map(|v| v.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    pub t_stat: f64,
    pub p_two_sided: f64,
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = pairwise_sum(v) / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Pearson correlation with a two-sided t-test on n - 2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("pearson inputs differ in length ({} vs {})", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid(format!("pearson needs n >= 3, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("pearson inputs must be finite"));
    }
    let (cx, cy) = (centered(x), centered(y));
    let sxx = pairwise_sum(&cx.iter().map(|v| v * v).collect::<Vec<_>>());
    let syy = pairwise_sum(&cy.iter().map(|v| v * v).collect::<Vec<_>>());
    let sxy = pairwise_sum(&cx.iter().zip(&cy).map(|(a, b)| a * b).collect::<Vec<_>>());
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid("pearson input is constant; correlation undefined"));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let r2 = r * r;
    let one_minus_r2 = (1.0 - r) * (1.0 + r);
    let (t_stat, p) = if one_minus_r2 <= 0.0 {
        (f64::INFINITY.copysign(r), 0.0)
    } else {
        let t = r * (df / one_minus_r2).sqrt();
        // df / (df + t^2) == 1 - r^2
        (t, incomplete_beta_xy(df / 2.0, 0.5, one_minus_r2, r2)?.clamp(0.0, 1.0))
    };
    Ok(CorrelationResult {
        r,
        n,
        t_stat,
        p_two_sided: p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaResult {
    pub f_stat: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    /// Zero within-group variance. F is reported as +inf with p = 0 when the
    /// group means differ, and as 0 with p = 1 when every value is equal.
    pub degenerate: bool,
}

/// One-way ANOVA F-test.
pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::invalid(format!("anova needs at least 2 groups, got {}", groups.len())));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::invalid("anova groups must be non-empty"));
    }
    let total: usize = groups.iter().map(Vec::len).sum();
    if total <= groups.len() {
        return Err(Error::invalid("anova needs more observations than groups"));
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("anova inputs must be finite"));
    }
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = pairwise_sum(&all) / total as f64;
    let mut between = Vec::with_capacity(groups.len());
    let mut within = Vec::with_capacity(total);
    for g in groups {
        let mean = pairwise_sum(g) / g.len() as f64;
        between.push(g.len() as f64 * (mean - grand).powi(2));
        within.extend(g.iter().map(|v| (v - mean).powi(2)));
    }
    let ss_between = pairwise_sum(&between);
    let ss_within = pairwise_sum(&within);
    let df_between = groups.len() - 1;
    let df_within = total - groups.len();
    let scale = all.iter().map(|v| (v - grand).abs()).fold(0.0, f64::max);
    // Sums of squares at rounding level relative to the data spread count as zero.
    let noise = (scale * 1e-13).powi(2) * total as f64;
    if ss_within <= noise {
        return Ok(if ss_between <= noise {
            AnovaResult {
                f_stat: 0.0,
                df_between,
                df_within,
                p: 1.0,
                degenerate: true,
            }
        } else {
            AnovaResult {
                f_stat: f64::INFINITY,
                df_between,
                df_within,
                p: 0.0,
                degenerate: true,
            }
        });
    }
    let (dfb, dfw) = (df_between as f64, df_within as f64);
    let f_stat = (ss_between / dfb) / (ss_within / dfw);
    let denom = dfw + dfb * f_stat;
    let p = incomplete_beta_xy(dfw / 2.0, dfb / 2.0, dfw / denom, dfb * f_stat / denom)?.clamp(0.0, 1.0);
    Ok(AnovaResult {
        f_stat,
        df_between,
        df_within,
        p,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(3.5) - (15.0 / 8.0 * PI.sqrt()).ln()).abs() < 1e-14);
    }

    #[test]
    fn incomplete_beta_endpoints_and_uniform() {
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
        for x in [0.1, 0.25, 0.5, 0.9] {
            assert!((regularized_incomplete_beta(1.0, 1.0, x).unwrap() - x).abs() < 1e-14);
        }
    }

    #[test]
    fn incomplete_beta_domain_errors() {
        assert!(regularized_incomplete_beta(0.0, 1.0, 0.5).is_err());
        assert!(regularized_incomplete_beta(1.0, -1.0, 0.5).is_err());
        assert!(regularized_incomplete_beta(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn pearson_linear_and_null() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = pearson(&x, &y).unwrap();
        assert!((r.r - 1.0).abs() < 1e-15);
        assert!(r.p_two_sided < 1e-12);
        let r0 = pearson(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(r0.r, 0.0);
        assert_eq!(r0.t_stat, 0.0);
        assert!((r0.p_two_sided - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pearson_errors() {
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn anova_identical_groups() {
        let r = anova_oneway(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(r.f_stat, 0.0);
        assert!((r.p - 1.0).abs() < 1e-15);
        assert!(!r.degenerate);
        assert_eq!((r.df_between, r.df_within), (1, 4));
    }

    #[test]
    fn anova_degenerate_cases() {
        let same = anova_oneway(&[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        assert!(same.degenerate);
        assert_eq!(same.f_stat, 0.0);
        assert_eq!(same.p, 1.0);
        let split = anova_oneway(&[vec![1.0, 1.0], vec![3.0, 3.0]]).unwrap();
        assert!(split.degenerate);
        assert_eq!(split.p, 0.0);
    }

    #[test]
    fn anova_errors() {
        assert!(anova_oneway(&[vec![1.0, 2.0]]).is_err());
        assert!(anova_oneway(&[vec![1.0], vec![2.0]]).is_err());
        assert!(anova_oneway(&[vec![1.0, 2.0], vec![]]).is_err());
    }
}
