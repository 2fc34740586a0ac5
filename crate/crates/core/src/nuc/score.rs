use rayon::prelude::*;

use super::dataset::sample_negatives;
use super::estimate::pjsd_estimate;
use super::features::Featurizer;
use super::train::ClassifierParams;
use crate::corpus::ExchangePair;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similarity::ScoreTable;

pub(crate) fn check_schema<T: Scalar>(params: &ClassifierParams<T>, featurizer: &Featurizer<'_, T>) -> Result<()> {
    let schema = featurizer.schema();
    if params.feature_schema_id != schema.id || params.feature_names != schema.names {
        return Err(Error::SchemaMismatch {
            expected: format!("{} ({} features)", schema.id, schema.names.len()),
            found: format!("{} ({} features)", params.feature_schema_id, params.feature_names.len()),
        });
    }
    Ok(())
}

/// Probability that `t` is the true reply to `s`, clamped away from 0 and 1.
pub fn predict<T: Scalar>(
    params: &ClassifierParams<T>,
    featurizer: &Featurizer<'_, T>,
    pair_id: &str,
    s: &str,
    t: &str,
) -> Result<T> {
    check_schema(params, featurizer)?;
    Ok(params.probability(&featurizer.values(pair_id, s, t)))
}

/// Columns `nuc_prob` and `pjsd` for every pair. The pJSD estimate uses `k`
/// replies freshly sampled (seeded) from the same source as negatives for S.
pub fn score_corpus_pjsd<T: Scalar>(
    params: &ClassifierParams<T>,
    featurizer: &Featurizer<'_, T>,
    pairs: &[ExchangePair],
    k: usize,
    seed: u64,
) -> Result<ScoreTable> {
    check_schema(params, featurizer)?;
    let negatives = sample_negatives(pairs, k, seed)?;
    let rows: Vec<(f64, f64)> = pairs
        .par_iter()
        .zip(negatives.par_iter())
        .map(|(p, negs)| {
            let f_true = params.probability(&featurizer.values(&p.id, &p.s, &p.t));
            let f_neg: Vec<T> = negs
                .iter()
                .map(|&j| params.probability(&featurizer.values(&p.id, &p.s, &pairs[j].t)))
                .collect();
            let est = pjsd_estimate(f_true, &f_neg)?;
            Ok((f_true.as_f64(), est.value.as_f64()))
        })
        .collect::<Result<_>>()?;
    let mut table = ScoreTable::new(["nuc_prob", "pjsd"]);
    for (p, (prob, pjsd)) in pairs.iter().zip(rows) {
        table.insert_row(p.id.clone(), vec![Some(prob), Some(pjsd)])?;
    }
    Ok(table)
}
