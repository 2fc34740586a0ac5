use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{median, Scalar};

/// Survival function of the chi-square distribution with one degree of freedom.
pub fn chi2_sf_1df(stat: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    statrs::function::erf::erfc((stat / 2.0).sqrt())
}

/// Two-sided p-value of a standard normal statistic.
pub fn normal_two_sided_p(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianTest {
    pub statistic: f64,
    pub p_value: f64,
    pub grand_median: f64,
    /// `[[a above, b above], [a at or below, b at or below]]`
    pub table: [[usize; 2]; 2],
    /// All pooled values equal; the test is vacuous and p is 1.
    pub degenerate: bool,
}

/// Mood's median test with a Yates-corrected chi-square statistic (1 df).
/// Values equal to the pooled median count as "at or below".
pub fn median_test<T: Scalar>(a: &[T], b: &[T]) -> Result<MedianTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFewObservations {
            needed: 1,
            found: a.len().min(b.len()),
        });
    }
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("non-finite value {v}")));
    }
    let pooled: Vec<f64> = a.iter().chain(b).map(|v| v.as_f64()).collect();
    let grand = median(&pooled).expect("nonempty");
    let above = |xs: &[T]| xs.iter().filter(|v| v.as_f64() > grand).count();
    let (aa, ba) = (above(a), above(b));
    let table = [[aa, ba], [a.len() - aa, b.len() - ba]];
    let rows = [aa + ba, a.len() + b.len() - aa - ba];
    if rows.contains(&0) {
        log::warn!("median test: every pooled value is on one side of the median; p set to 1");
        return Ok(MedianTest {
            statistic: 0.0,
            p_value: 1.0,
            grand_median: grand,
            table,
            degenerate: true,
        });
    }
    let n = (a.len() + b.len()) as f64;
    let cross = table[0][0] as f64 * table[1][1] as f64 - table[0][1] as f64 * table[1][0] as f64;
    let corrected = (cross.abs() - n / 2.0).max(0.0);
    let denom = rows[0] as f64 * rows[1] as f64 * a.len() as f64 * b.len() as f64;
    let statistic = n * corrected * corrected / denom;
    Ok(MedianTest {
        statistic,
        p_value: chi2_sf_1df(statistic),
        grand_median: grand,
        table,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_reference_points() {
        // 3.841459 is the 0.95 quantile of chi-square(1)
        assert!((chi2_sf_1df(3.841458820694124) - 0.05).abs() < 1e-10);
        assert_eq!(chi2_sf_1df(0.0), 1.0);
        assert!((normal_two_sided_p(1.959963984540054) - 0.05).abs() < 1e-10);
        assert!((normal_two_sided_p(-2.5758293035489004) - 0.01).abs() < 1e-10);
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = median_test(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn separated_samples() {
        let a: Vec<f64> = (0..30).map(|i| 100.0 + f64::from(i)).collect();
        let b: Vec<f64> = (0..30).map(f64::from).collect();
        let r = median_test(&a, &b).unwrap();
        assert_eq!(r.table, [[30, 0], [0, 30]]);
        assert!(r.p_value < 0.001);
    }

    #[test]
    fn constant_pool() {
        let r = median_test(&[2.0; 5], &[2.0; 3]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn yates_value_by_hand() {
        // pooled median 4.5; a above: 3 of 4, b above: 2 of 6
        let a = [5.0, 6.0, 7.0, 1.0];
        let b = [8.0, 9.0, 2.0, 3.0, 4.0, 0.0];
        let r = median_test(&a, &b).unwrap();
        assert_eq!(r.table, [[3, 2], [1, 4]]);
        // N (|ad - bc| - N/2)^2 / (5 * 5 * 4 * 6) = 10 * (10 - 5)^2 / 600
        assert!((r.statistic - 250.0 / 600.0).abs() < 1e-15);
    }
}
