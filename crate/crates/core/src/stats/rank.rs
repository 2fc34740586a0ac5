use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_finite<T: Scalar>(xs: &[T]) -> Result<()> {
    match xs.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::Invalid(format!("non-finite value {v}"))),
        None => Ok(()),
    }
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks<T: Scalar>(xs: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("finite values"));
    let mut ranks = vec![T::zero(); xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let r = T::count(i + j + 2) / T::of(2.0);
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    let n = T::count(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult<T> {
    pub rho: T,
    pub n: usize,
    pub ci_low: Option<T>,
    pub ci_high: Option<T>,
    pub iterations: Option<usize>,
    /// Bootstrap resamples skipped because one side was constant.
    pub degenerate: usize,
    /// Set when the point estimate falls outside its percentile interval.
    pub outside_ci: bool,
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<SpearmanResult<T>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::TooFewObservations {
            needed: 3,
            found: x.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let rho = pearson(&average_ranks(x), &average_ranks(y)).ok_or(Error::ZeroRankVariance)?;
    Ok(SpearmanResult {
        rho,
        n: x.len(),
        ci_low: None,
        ci_high: None,
        iterations: None,
        degenerate: 0,
        outside_ci: false,
    })
}

/// `(average rank - 0.5) / n` for every value.
pub fn quantile_transform<T: Scalar>(values: &[T]) -> Vec<T> {
    let n = T::count(values.len());
    average_ranks(values)
        .into_iter()
        .map(|r| (r - T::of(0.5)) / n)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), [2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap().rho, 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap().rho, -1.0);
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroRankVariance)
        ));
        assert!(spearman(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn tied_fixture_by_hand() {
        // ranks x = (1, 2.5, 2.5, 4), y = (1, 3, 2, 4); both centered on 2.5
        // dx = (-1.5, 0, 0, 1.5), dy = (-1.5, 0.5, -0.5, 1.5)
        // sxy = 4.5, sxx = 4.5, syy = 5
        let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap().rho;
        assert!((rho - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quantile_examples() {
        let q = quantile_transform(&[10.0, 20.0, 30.0]);
        assert_eq!(q, [1.0 / 6.0, 0.5, 5.0 / 6.0]);
        assert_eq!(quantile_transform(&[3.0; 4]), [0.5; 4]);
        assert!(quantile_transform::<f64>(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_monotone_maps(v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..40)) {
            let (x, y): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let ex: Vec<f64> = x.iter().map(|a| a.exp()).collect();
            match (spearman(&x, &y), spearman(&ex, &y)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.rho, b.rho),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "inconsistent"),
            }
        }

        #[test]
        fn quantiles_depend_only_on_ranks(x in prop::collection::vec(-100i32..100, 1..50)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 7.0).collect();
            prop_assert_eq!(quantile_transform(&x), quantile_transform(&y));
        }

        #[test]
        fn distinct_values_give_uniform_grid(x in prop::collection::btree_set(-1000i32..1000, 1..60)) {
            let mut x: Vec<f64> = x.into_iter().map(f64::from).collect();
            x.reverse();
            let mut q = quantile_transform(&x);
            q.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = q.len() as f64;
            for (i, v) in q.iter().enumerate() {
                prop_assert_eq!(*v, (i as f64 + 0.5) / n);
            }
        }

        #[test]
        fn quantile_transform_preserves_rho(v in prop::collection::vec((0i32..10, -5.0f64..5.0), 3..40)) {
            let (x, y): (Vec<f64>, Vec<f64>) = v.into_iter().map(|(a, b)| (f64::from(a), b)).unzip();
            let q = quantile_transform(&x);
            match (spearman(&x, &y), spearman(&q, &y)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.rho, b.rho),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "inconsistent"),
            }
        }
    }
}
