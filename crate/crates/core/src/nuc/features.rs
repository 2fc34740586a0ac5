use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::similarity::{shared_types, MetricContext, MetricId, MetricName};
use crate::textprep::{tokenize_with_marker, PreprocessProfile, INAUDIBLE_MARKER};

pub const DEFAULT_SCHEMA_ID: &str = "uptake-ref-v1";

/// Ordered feature names bound to a schema id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub id: String,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub feature_names: Vec<String>,
}

/// Similarity metrics used as features, each with a missing-value indicator.
const METRIC_FEATURES: [MetricName; 7] = [
    MetricName::PctSInT,
    MetricName::PctTInS,
    MetricName::Jaccard,
    MetricName::Bleu,
    MetricName::Lcs,
    MetricName::GloveAlign,
    MetricName::GloveUtt,
];

/// Computes the default feature schema:
/// the seven metric features at their default profiles, `ln(1 + len)` of S and T,
/// the number of distinct shared tokens after full preprocessing, then one
/// indicator per metric that is 1 when the metric was missing (its value is imputed as 0).
pub struct Featurizer<'a, T> {
    ctx: MetricContext<'a, T>,
    metrics: Vec<MetricId>,
    overlap_profile: PreprocessProfile,
    schema: FeatureSchema,
}

impl<'a, T: Scalar> Featurizer<'a, T> {
    pub fn new(ctx: MetricContext<'a, T>) -> Self {
        let metrics: Vec<MetricId> = METRIC_FEATURES.iter().map(|&m| MetricId::new(m)).collect();
        let mut names: Vec<String> = metrics.iter().map(MetricId::column).collect();
        names.extend(["log1p_len_s", "log1p_len_t", "unigram_overlap"].map(String::from));
        names.extend(metrics.iter().map(|m| format!("missing:{}", m.column())));
        Featurizer {
            ctx,
            metrics,
            overlap_profile: "PST".parse().expect("valid profile code"),
            schema: FeatureSchema {
                id: DEFAULT_SCHEMA_ID.to_string(),
                names,
            },
        }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn dim(&self) -> usize {
        self.schema.names.len()
    }

    pub fn values(&self, pair_id: &str, s: &str, t: &str) -> Vec<T> {
        let s = tokenize_with_marker(s, INAUDIBLE_MARKER);
        let t = tokenize_with_marker(t, INAUDIBLE_MARKER);
        let scores = self.ctx.score_many(&self.metrics, pair_id, &s, &t);
        let mut out = Vec::with_capacity(self.dim());
        out.extend(scores.iter().map(|v| v.unwrap_or_else(T::zero)));
        out.push(T::count(s.len()).ln_1p());
        out.push(T::count(t.len()).ln_1p());
        let pre = self.ctx.preprocessor;
        out.push(T::count(shared_types(
            &pre.apply(&s, &self.overlap_profile),
            &pre.apply(&t, &self.overlap_profile),
        )));
        out.extend(scores.iter().map(|v| if v.is_some() { T::zero() } else { T::one() }));
        out
    }

    pub fn featurize(&self, pair_id: &str, s: &str, t: &str) -> FeatureVector<T> {
        FeatureVector {
            values: self.values(pair_id, s, t),
            feature_names: self.schema.names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::WordVectorStore;
    use crate::similarity::{bleu, jaccard, lcs_norm, pct_s_in_t, pct_t_in_s};
    use crate::textprep::{tokenize, Preprocessor};

    #[test]
    fn schema_layout() {
        let pre = Preprocessor::new();
        let f = Featurizer::<f64>::new(MetricContext::new(&pre));
        assert_eq!(f.dim(), 17);
        assert_eq!(f.schema().names[0], "pct_s_in_t");
        assert_eq!(f.schema().names[9], "unigram_overlap");
        assert_eq!(f.schema().names[16], "missing:glove_utt");
    }

    #[test]
    fn identical_pair_maximizes_overlap() {
        let pre = Preprocessor::new();
        let words = WordVectorStore::from_entries([("cats", vec![1.0, 0.5]), ("purr", vec![0.2, 1.0])]).unwrap();
        let mut ctx = MetricContext::new(&pre);
        ctx.words = Some(&words);
        let f = Featurizer::<f64>::new(ctx);
        let v = f.values("p", "cats purr loudly today", "cats purr loudly today");
        for x in &v[..7] {
            assert!((x - 1.0).abs() < 1e-12, "{v:?}");
        }
        assert!(v[10..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn disjoint_pair_without_vectors() {
        let pre = Preprocessor::new();
        let f = Featurizer::<f64>::new(MetricContext::new(&pre));
        let v = f.values("p", "alpha beta gamma", "delta epsilon");
        assert!(v[..5].iter().all(|&x| x.abs() <= 1e-2));
        assert_eq!(v[..5].iter().filter(|&&x| x == 0.0).count(), 4); // BLEU is smoothed
        assert_eq!(&v[5..7], [0.0, 0.0]);
        assert_eq!(v[9], 0.0);
        assert_eq!(&v[10..15], [0.0; 5]);
        assert_eq!(&v[15..], [1.0, 1.0]);
    }

    #[test]
    fn matches_metric_functions() {
        let pre = Preprocessor::new();
        let f = Featurizer::<f64>::new(MetricContext::new(&pre));
        let (s, t) = (
            "So you added the two numbers, right?",
            "Right, we added them and got ten.",
        );
        let v = f.values("p", s, t);
        let (rs, rt) = (tokenize(s), tokenize(t));
        let with = |code: &str| {
            let p: PreprocessProfile = code.parse().unwrap();
            (pre.apply(&rs, &p), pre.apply(&rt, &p))
        };
        let (a, b) = with("PST");
        assert_eq!(v[0], pct_s_in_t::<f64>(&a, &b).unwrap());
        assert_eq!(v[3], bleu::<f64>(&a, &b, 4).unwrap());
        assert_eq!(v[9], 2.0); // "ad" and "right"
        let (a, b) = with("PS");
        assert_eq!(v[1], pct_t_in_s::<f64>(&a, &b).unwrap());
        assert_eq!(v[2], jaccard::<f64>(&a, &b).unwrap());
        assert_eq!(v[4], lcs_norm::<f64>(&rs, &rt).unwrap());
        assert_eq!(v[7], (rs.len() as f64).ln_1p());
    }
}
