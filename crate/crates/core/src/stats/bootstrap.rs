use rand::Rng;
use rayon::prelude::*;

use super::rank::{spearman, SpearmanResult};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeds;

pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile<T: Scalar>(sorted: &[T], q: f64) -> T {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::of(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Spearman's rho with a percentile bootstrap interval over resampled index
/// pairs. Resample `i` uses its own generator derived from `seed` and `i`, so
/// the interval is the same for any thread count.
pub fn bootstrap_ci<T: Scalar>(
    x: &[T],
    y: &[T],
    iterations: usize,
    level: f64,
    seed: u64,
) -> Result<SpearmanResult<T>> {
    let point = spearman(x, y)?;
    if iterations == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::Invalid(
            "bootstrap needs iterations >= 1 and 0 < level < 1".into(),
        ));
    }
    let n = x.len();
    let draws: Vec<Option<T>> = (0..iterations)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeds::rng(seeds::derive(seed, i as u64));
            let (mut xs, mut ys) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for _ in 0..n {
                let j = rng.gen_range(0..n);
                xs.push(x[j]);
                ys.push(y[j]);
            }
            spearman(&xs, &ys).ok().map(|r| r.rho)
        })
        .collect();
    let mut rhos: Vec<T> = draws.iter().flatten().copied().collect();
    let degenerate = iterations - rhos.len();
    if degenerate * 2 > iterations {
        return Err(Error::DegenerateBootstrap {
            degenerate,
            total: iterations,
        });
    }
    if degenerate > 0 {
        log::warn!("{degenerate} of {iterations} bootstrap resamples were constant and skipped");
    }
    rhos.sort_by(|a, b| a.partial_cmp(b).expect("finite rho"));
    let tail = (1.0 - level) / 2.0;
    let low = percentile(&rhos, tail);
    let high = percentile(&rhos, 1.0 - tail);
    let outside_ci = point.rho < low || point.rho > high;
    if outside_ci {
        log::warn!("rho {} lies outside its bootstrap interval [{low}, {high}]", point.rho);
    }
    Ok(SpearmanResult {
        ci_low: Some(low),
        ci_high: Some(high),
        iterations: Some(iterations),
        degenerate,
        outside_ci,
        ..point
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert_eq!(percentile(&v, 0.125), 1.5);
        assert_eq!(percentile(&v, 1.0), 5.0);
    }

    #[test]
    fn perfect_correlation_has_degenerate_free_unit_interval() {
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v * 3.0 + 1.0).collect();
        let r = bootstrap_ci(&x, &y, 200, 0.95, 1).unwrap();
        assert_eq!((r.ci_low, r.ci_high), (Some(1.0), Some(1.0)));
        assert_eq!(r.iterations, Some(200));
    }

    #[test]
    fn seeded() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64).collect();
        let y: Vec<f64> = (0..40).map(|i| ((i * 13) % 7) as f64 + i as f64 * 0.1).collect();
        let a = bootstrap_ci(&x, &y, 300, 0.95, 5).unwrap();
        assert_eq!(a, bootstrap_ci(&x, &y, 300, 0.95, 5).unwrap());
        assert!(a.ci_low.unwrap() <= a.ci_high.unwrap());
    }

    #[test]
    fn mostly_degenerate_errors() {
        // each side has a single distinct value; a resample is usable only if it
        // draws both of them, which happens about 40% of the time
        let (mut x, mut y) = (vec![0.0; 40], vec![0.0; 40]);
        x[0] = 1.0;
        y[1] = 1.0;
        assert!(matches!(
            bootstrap_ci(&x, &y, 100, 0.95, 1),
            Err(Error::DegenerateBootstrap { .. })
        ));
    }
}
