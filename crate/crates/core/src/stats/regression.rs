use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::median::normal_two_sided_p;
use crate::error::{Error, Result};
use crate::scalar::{mean, sample_sd, Scalar};

/// Residual degrees of freedom at or below which p-values are flagged approximate.
pub const SMALL_DF: f64 = 30.0;

/// Relative pivot size below which a design column counts as collinear.
const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsTerm<T> {
    pub name: String,
    pub coefficient: T,
    pub std_error: T,
    pub t_stat: T,
    pub p_value: f64,
    /// Coefficient in standard-deviation units; `None` for the intercept.
    pub standardized: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsResult<T> {
    /// Intercept first, then regressors in the order given.
    pub terms: Vec<OlsTerm<T>>,
    pub r_squared: T,
    pub n: usize,
    pub df: usize,
    /// p-values use a normal approximation; set when `df <= 30`.
    pub approximate: bool,
    pub residuals: Vec<T>,
}

impl<T: Scalar> OlsResult<T> {
    pub fn term(&self, name: &str) -> Option<&OlsTerm<T>> {
        self.terms.iter().find(|t| t.name == name)
    }
}

/// Cholesky factor of a symmetric positive definite matrix; fails on the
/// first column whose pivot vanishes relative to its diagonal.
fn cholesky<T: Scalar>(a: &[Vec<T>], names: &[String]) -> Result<Vec<Vec<T>>> {
    let p = a.len();
    let mut l = vec![vec![T::zero(); p]; p];
    for j in 0..p {
        let mut d = a[j][j];
        for k in 0..j {
            d = d - l[j][k] * l[j][k];
        }
        if !(d > T::of(PIVOT_TOL) * a[j][j].abs().max(T::min_positive_value())) {
            return Err(Error::Collinear(names[j].clone()));
        }
        let djj = d.sqrt();
        l[j][j] = djj;
        for i in j + 1..p {
            let mut s = a[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            l[i][j] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b`.
fn cholesky_solve<T: Scalar>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let p = l.len();
    let mut y = vec![T::zero(); p];
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut s = y[i];
        for k in i + 1..p {
            s = s - l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Least squares with an intercept over named regressors.
pub fn ols_named<T: Scalar>(y: &[T], regressors: &[(String, Vec<T>)]) -> Result<OlsResult<T>> {
    let n = y.len();
    let p = regressors.len() + 1;
    if let Some((name, col)) = regressors.iter().find(|(_, c)| c.len() != n) {
        return Err(Error::Invalid(format!(
            "regressor {name:?} has {} rows, response has {n}",
            col.len()
        )));
    }
    if n <= p {
        return Err(Error::TooFewObservations {
            needed: p + 1,
            found: n,
        });
    }
    if let Some(v) = y
        .iter()
        .chain(regressors.iter().flat_map(|(_, c)| c))
        .find(|v| !v.is_finite())
    {
        return Err(Error::Invalid(format!("non-finite value {v}")));
    }
    let mut names = vec!["intercept".to_string()];
    names.extend(regressors.iter().map(|(n, _)| n.clone()));
    let column = |j: usize, i: usize| if j == 0 { T::one() } else { regressors[j - 1].1[i] };

    let mut xtx = vec![vec![T::zero(); p]; p];
    let mut xty = vec![T::zero(); p];
    for i in 0..n {
        for a in 0..p {
            let xa = column(a, i);
            xty[a] = xty[a] + xa * y[i];
            for b in 0..=a {
                xtx[a][b] = xtx[a][b] + xa * column(b, i);
            }
        }
    }
    for a in 0..p {
        for b in a + 1..p {
            xtx[a][b] = xtx[b][a];
        }
    }
    let l = cholesky(&xtx, &names)?;
    let beta = cholesky_solve(&l, &xty);

    let residuals: Vec<T> = (0..n)
        .map(|i| y[i] - (0..p).fold(T::zero(), |acc, j| acc + beta[j] * column(j, i)))
        .collect();
    let rss: T = residuals.iter().map(|&r| r * r).sum();
    let my = mean(y).expect("nonempty");
    let tss: T = y.iter().map(|&v| (v - my) * (v - my)).sum();
    if tss <= T::zero() {
        return Err(Error::Invalid("response is constant".into()));
    }
    let df = n - p;
    let sigma2 = rss / T::count(df);
    let sd_y = sample_sd(y).expect("n > 2");

    let terms = (0..p)
        .map(|j| {
            let mut e = vec![T::zero(); p];
            e[j] = T::one();
            let var = cholesky_solve(&l, &e)[j] * sigma2;
            let se = var.max(T::zero()).sqrt();
            let t_stat = if se > T::zero() {
                beta[j] / se
            } else if beta[j] == T::zero() {
                T::zero()
            } else {
                beta[j].signum() * T::infinity()
            };
            let standardized = (j > 0).then(|| beta[j] * sample_sd(&regressors[j - 1].1).expect("n > 2") / sd_y);
            OlsTerm {
                name: names[j].clone(),
                coefficient: beta[j],
                std_error: se,
                t_stat,
                p_value: normal_two_sided_p(t_stat.as_f64()),
                standardized,
            }
        })
        .collect();
    Ok(OlsResult {
        terms,
        r_squared: T::one() - rss / tss,
        n,
        df,
        approximate: (df as f64) <= SMALL_DF,
        residuals,
    })
}

/// Least squares of `y` on `x` (named `x`) and controls (named `control1`, ...).
pub fn ols<T: Scalar>(y: &[T], x: &[T], controls: &[Vec<T>]) -> Result<OlsResult<T>> {
    let mut regs = vec![("x".to_string(), x.to_vec())];
    regs.extend(
        controls
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("control{}", i + 1), c.clone())),
    );
    ols_named(y, &regs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    /// Set when the Welch degrees of freedom are at most 30.
    pub approximate: bool,
}

/// Welch two-sample t-test, p-value from the normal approximation.
pub fn ttest_two_sample<T: Scalar>(a: &[T], b: &[T]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            found: a.len().min(b.len()),
        });
    }
    let va = sample_sd(a).expect("n >= 2").powi(2).as_f64() / a.len() as f64;
    let vb = sample_sd(b).expect("n >= 2").powi(2).as_f64() / b.len() as f64;
    if va == 0.0 && vb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let diff = mean(a).expect("nonempty").as_f64() - mean(b).expect("nonempty").as_f64();
    let statistic = diff / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    Ok(TTest {
        statistic,
        df,
        p_value: normal_two_sided_p(statistic),
        approximate: df <= SMALL_DF,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualGap {
    /// Pair ids with `d > mean + threshold_sd * sd`.
    pub selected: BTreeSet<String>,
    /// `d = r_a - r_b` per complete pair.
    pub d: BTreeMap<String, f64>,
    pub mean: f64,
    pub sd: f64,
    pub cutoff: f64,
}

/// Pairs where model `a`'s signed residual exceeds model `b`'s by more than
/// `threshold_sd` standard deviations above the mean difference. Residuals come
/// from regressing the labels on each model's predictions (with intercept).
pub fn residual_gap_set(
    labels: &BTreeMap<String, f64>,
    pred_a: &BTreeMap<String, f64>,
    pred_b: &BTreeMap<String, f64>,
    threshold_sd: f64,
) -> Result<ResidualGap> {
    let rows: Vec<(&String, f64, f64, f64)> = labels
        .iter()
        .filter_map(|(id, &y)| Some((id, y, *pred_a.get(id)?, *pred_b.get(id)?)))
        .collect();
    if rows.len() < 10 {
        return Err(Error::TooFewObservations {
            needed: 10,
            found: rows.len(),
        });
    }
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let fit = |name: &str, x: Vec<f64>| ols_named(&y, &[(name.to_string(), x)]).map(|r| r.residuals);
    let ra = fit("pred_a", rows.iter().map(|r| r.2).collect())?;
    let rb = fit("pred_b", rows.iter().map(|r| r.3).collect())?;
    let d: Vec<f64> = ra.iter().zip(&rb).map(|(a, b)| a - b).collect();
    let m = mean(&d).expect("nonempty");
    let sd = sample_sd(&d).expect("n >= 10");
    let cutoff = m + threshold_sd * sd;
    let selected = if sd > 0.0 {
        rows.iter()
            .zip(&d)
            .filter(|(_, &v)| v > cutoff)
            .map(|(r, _)| r.0.clone())
            .collect()
    } else {
        BTreeSet::new()
    };
    Ok(ResidualGap {
        selected,
        d: rows.iter().zip(&d).map(|(r, &v)| (r.0.clone(), v)).collect(),
        mean: m,
        sd,
        cutoff,
    })
}
