use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rank::spearman;
use crate::corpus::ZScore;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fleiss' kappa from an items x categories matrix of rater counts.
/// Every item must have the same number of ratings, at least two.
pub fn fleiss_kappa<T: Scalar>(counts: &[Vec<usize>]) -> Result<T> {
    let first = counts
        .first()
        .ok_or(Error::TooFewObservations { needed: 1, found: 0 })?;
    let n: usize = first.iter().sum();
    if n < 2 {
        return Err(Error::Invalid(format!(
            "fleiss kappa needs at least 2 raters per item, got {n}"
        )));
    }
    let k = first.len();
    let mut totals = vec![0usize; k];
    let mut p_bar = T::zero();
    for (item, row) in counts.iter().enumerate() {
        let found: usize = row.iter().sum();
        if found != n || row.len() != k {
            return Err(Error::VaryingRaterCounts {
                item,
                expected: n,
                found,
            });
        }
        let agree: usize = row.iter().map(|&c| c * c).sum::<usize>() - n;
        p_bar = p_bar + T::count(agree) / T::count(n * (n - 1));
        for (t, &c) in totals.iter_mut().zip(row) {
            *t += c;
        }
    }
    let items = T::count(counts.len());
    p_bar = p_bar / items;
    let all = T::count(counts.len() * n);
    let p_e: T = totals.iter().map(|&t| T::count(t) / all).map(|p| p * p).sum();
    if p_e >= T::one() {
        return Err(Error::DegenerateAgreement);
    }
    Ok((p_bar - p_e) / (T::one() - p_e))
}

/// Raters x items z-score matrix; rows follow `raters`, columns `items`, both sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix<T> {
    pub raters: Vec<String>,
    pub items: Vec<String>,
    pub z: Vec<Vec<Option<T>>>,
}

impl RatingMatrix<f64> {
    pub fn from_zscores(scores: &[ZScore]) -> Self {
        let mut raters: BTreeMap<&str, usize> = scores.iter().map(|s| (s.rater_id.as_str(), 0)).collect();
        let mut items: BTreeMap<&str, usize> = scores.iter().map(|s| (s.pair_id.as_str(), 0)).collect();
        for (i, v) in raters.values_mut().enumerate() {
            *v = i;
        }
        for (i, v) in items.values_mut().enumerate() {
            *v = i;
        }
        let mut z = vec![vec![None; items.len()]; raters.len()];
        for s in scores {
            z[raters[s.rater_id.as_str()]][items[s.pair_id.as_str()]] = Some(s.z);
        }
        RatingMatrix {
            raters: raters.keys().map(|s| s.to_string()).collect(),
            items: items.keys().map(|s| s.to_string()).collect(),
            z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaveOutAgreement<T> {
    /// Mean of the per-rater values that could be computed.
    pub mean: T,
    /// Per rater: Spearman rho against the mean of the others, `None` when excluded.
    pub per_rater: Vec<Option<T>>,
}

/// Leave-out Spearman agreement over a raters x items matrix with gaps.
///
/// For each rater, items they rated that at least one other rater also rated
/// are collected; their scores are correlated with the mean of the other
/// raters' scores on those items. Raters with fewer than three such items,
/// or whose correlation is undefined, are excluded with a warning.
pub fn leave_out_agreement<T: Scalar>(z: &[Vec<Option<T>>]) -> Result<LeaveOutAgreement<T>> {
    let active = z.iter().filter(|row| row.iter().any(Option::is_some)).count();
    if active < 3 {
        return Err(Error::TooFewObservations {
            needed: 3,
            found: active,
        });
    }
    let n_items = z.iter().map(Vec::len).max().unwrap_or(0);
    let mut per_rater = Vec::with_capacity(z.len());
    for (r, row) in z.iter().enumerate() {
        let (mut mine, mut others) = (Vec::new(), Vec::new());
        for j in 0..n_items {
            let Some(Some(own)) = row.get(j) else { continue };
            let rest: Vec<T> = z
                .iter()
                .enumerate()
                .filter(|(o, _)| *o != r)
                .filter_map(|(_, other)| other.get(j).copied().flatten())
                .collect();
            if rest.is_empty() {
                continue;
            }
            mine.push(*own);
            others.push(rest.iter().copied().sum::<T>() / T::count(rest.len()));
        }
        let rho = if mine.len() < 3 {
            if row.iter().any(Option::is_some) {
                log::warn!("rater {r} shares {} item(s) with other raters; excluded", mine.len());
            }
            None
        } else {
            match spearman(&mine, &others) {
                Ok(s) => Some(s.rho),
                Err(e) => {
                    log::warn!("rater {r} excluded: {e}");
                    None
                }
            }
        };
        per_rater.push(rho);
    }
    let kept: Vec<T> = per_rater.iter().flatten().copied().collect();
    if kept.is_empty() {
        return Err(Error::Invalid(
            "no rater has enough items shared with the others".into(),
        ));
    }
    Ok(LeaveOutAgreement {
        mean: kept.iter().copied().sum::<T>() / T::count(kept.len()),
        per_rater,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fleiss_perfect_agreement() {
        let counts = vec![vec![3, 0, 0], vec![0, 3, 0], vec![0, 0, 3], vec![3, 0, 0]];
        assert_eq!(fleiss_kappa::<f64>(&counts).unwrap(), 1.0);
    }

    #[test]
    fn fleiss_hand_fixture() {
        // P_i: (9-3)/6 = 1, (5-3)/6 = 1/3, (3-3)/6 = 0, (5-3)/6 = 1/3
        // category totals (5, 5, 2) of 12 ratings
        let counts = vec![vec![3, 0, 0], vec![1, 2, 0], vec![1, 1, 1], vec![0, 2, 1]];
        let p_bar = (1.0 + 1.0 / 3.0 + 0.0 + 1.0 / 3.0) / 4.0;
        let totals = [5.0, 5.0, 2.0];
        let p_e: f64 = totals.iter().map(|t| (t / 12.0) * (t / 12.0)).sum();
        let want = (p_bar - p_e) / (1.0 - p_e);
        assert!((fleiss_kappa::<f64>(&counts).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn fleiss_anti_agreement_is_negative() {
        let counts = vec![vec![1, 1]; 6];
        assert!(fleiss_kappa::<f64>(&counts).unwrap() <= 0.0);
    }

    #[test]
    fn fleiss_errors() {
        assert!(matches!(
            fleiss_kappa::<f64>(&[vec![2, 1], vec![1, 1]]),
            Err(Error::VaryingRaterCounts {
                item: 1,
                expected: 3,
                found: 2
            })
        ));
        assert!(matches!(
            fleiss_kappa::<f64>(&[vec![3, 0], vec![3, 0]]),
            Err(Error::DegenerateAgreement)
        ));
    }

    fn full(rows: &[&[f64]]) -> Vec<Vec<Option<f64>>> {
        rows.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect()
    }

    #[test]
    fn identical_raters_agree() {
        let v = [-1.0, 0.0, 1.0, 0.5];
        let a = leave_out_agreement(&full(&[&v, &v, &v])).unwrap();
        assert_eq!(a.mean, 1.0);
    }

    #[test]
    fn anti_correlated_rater() {
        // rater 0 reverses the order of two identical raters
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        let w = [9.0, 5.0, 3.0, 2.0, 1.0];
        let a = leave_out_agreement(&full(&[&w, &v, &v])).unwrap();
        let mean_wv: Vec<f64> = w.iter().zip(&v).map(|(a, b)| (a + b) / 2.0).collect();
        let r0 = spearman(&w, &v).unwrap().rho;
        let r12 = spearman(&v, &mean_wv).unwrap().rho;
        assert_eq!(r0, -1.0);
        assert_eq!(a.per_rater, [Some(r0), Some(r12), Some(r12)]);
        assert!((a.mean - (r0 + 2.0 * r12) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fully_negated_rater_leaves_others_undefined() {
        let v = [-1.0, 0.0, 1.0, 0.5, 2.0];
        let w: Vec<f64> = v.iter().map(|x| -x).collect();
        // the others' mean for raters 1 and 2 is constant zero
        let a = leave_out_agreement(&full(&[&w, &v, &v])).unwrap();
        assert_eq!(a.per_rater, [Some(-1.0), None, None]);
    }

    #[test]
    fn missing_cells_and_isolated_rater() {
        let z = vec![
            vec![Some(1.0), Some(2.0), Some(3.0), None],
            vec![Some(1.0), Some(3.0), Some(2.0), None],
            vec![Some(0.0), Some(1.0), Some(2.0), None],
            vec![None, None, None, Some(1.0)],
        ];
        let a = leave_out_agreement(&z).unwrap();
        assert!(a.per_rater[3].is_none());
        assert!(a.per_rater[..3].iter().all(Option::is_some));
        assert!(leave_out_agreement(&z[..2]).is_err());
    }

    #[test]
    fn matrix_from_zscores() {
        let zs = vec![
            ZScore {
                rater_id: "b".into(),
                pair_id: "p2".into(),
                z: 1.0,
            },
            ZScore {
                rater_id: "a".into(),
                pair_id: "p1".into(),
                z: -1.0,
            },
        ];
        let m = RatingMatrix::from_zscores(&zs);
        assert_eq!(m.raters, ["a", "b"]);
        assert_eq!(m.z, [vec![Some(-1.0), None], vec![None, Some(1.0)]]);
    }
}
