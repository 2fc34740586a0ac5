use proptest::prelude::*;
use uptake_core::similarity::{bleu, jaccard, lcs_norm, pct_s_in_t, pct_t_in_s};
use uptake_core::textprep::TokenSequence;

fn seq(tokens: &[String]) -> TokenSequence {
    TokenSequence::from_tokens(tokens)
}

fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == *n))
}

fn brute_lcs(s: &[String], t: &[String]) -> usize {
    (0u32..1 << s.len())
        .filter_map(|mask| {
            let sub: Vec<&String> = (0..s.len()).filter(|i| mask >> i & 1 == 1).map(|i| &s[i]).collect();
            is_subsequence(&sub, t).then_some(sub.len())
        })
        .max()
        .unwrap_or(0)
}

fn count_of(window: &[String], tokens: &[String]) -> usize {
    if tokens.len() < window.len() {
        return 0;
    }
    (0..=tokens.len() - window.len())
        .filter(|&i| tokens[i..i + window.len()] == *window)
        .count()
}

/// Straightforward sentence BLEU: smoothed clipped precisions, geometric mean, brevity penalty.
fn reference_bleu(reference: &[String], hyp: &[String]) -> f64 {
    let orders = hyp.len().min(4);
    let mut product = 1.0f64;
    for n in 1..=orders {
        let mut seen: Vec<&[String]> = Vec::new();
        let mut clipped = 0;
        for i in 0..=hyp.len() - n {
            let g = &hyp[i..i + n];
            if seen.contains(&g) {
                continue;
            }
            seen.push(g);
            clipped += count_of(g, hyp).min(count_of(g, reference));
        }
        let p = if clipped == 0 {
            1e-9
        } else {
            clipped as f64 / (hyp.len() - n + 1) as f64
        };
        product *= p.powf(1.0 / orders as f64);
    }
    let bp = if hyp.len() >= reference.len() {
        1.0
    } else {
        (1.0 - reference.len() as f64 / hyp.len() as f64).exp()
    };
    bp * product
}

fn tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..=8)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lcs_matches_enumeration(s in tokens(), t in tokens()) {
        prop_assume!(!s.is_empty());
        let got: f64 = lcs_norm(&seq(&s), &seq(&t)).unwrap();
        prop_assert_eq!(got, brute_lcs(&s, &t) as f64 / s.len() as f64);
    }

    #[test]
    fn overlap_matches_set_arithmetic(s in tokens(), t in tokens()) {
        let (ss, ts) = (seq(&s), seq(&t));
        let in_t = s.iter().filter(|x| t.contains(x)).count();
        let in_s = t.iter().filter(|x| s.contains(x)).count();
        prop_assert_eq!(pct_s_in_t::<f64>(&ss, &ts), (!s.is_empty()).then(|| in_t as f64 / s.len() as f64));
        prop_assert_eq!(pct_t_in_s::<f64>(&ss, &ts), (!t.is_empty()).then(|| in_s as f64 / t.len() as f64));

        let mut union: Vec<&String> = s.iter().chain(&t).collect();
        union.sort();
        union.dedup();
        let inter = union.iter().filter(|x| s.contains(x) && t.contains(x)).count();
        prop_assert_eq!(jaccard::<f64>(&ss, &ts), (!union.is_empty()).then(|| inter as f64 / union.len() as f64));
    }

    #[test]
    fn bleu_matches_reference(s in tokens(), t in tokens()) {
        prop_assume!(!t.is_empty());
        let got: f64 = bleu(&seq(&s), &seq(&t), 4).unwrap();
        let want = reference_bleu(&s, &t);
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{} vs {}", got, want);
    }
}

#[test]
fn identity_and_disjoint_bounds() {
    let words = [
        "alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta", "iota", "kappa",
    ];
    for case in 0..50 {
        let len = 1 + case % 7;
        let s: Vec<String> = (0..len).map(|i| words[(case + i * 3) % 5].to_string()).collect();
        let other: Vec<String> = (0..1 + case % 5)
            .map(|i| words[5 + (case + i) % 5].to_string())
            .collect();
        let (a, b) = (seq(&s), seq(&other));
        assert_eq!(lcs_norm::<f64>(&a, &a).unwrap(), 1.0);
        assert_eq!(pct_s_in_t::<f64>(&a, &a), Some(1.0));
        assert_eq!(pct_t_in_s::<f64>(&a, &a), Some(1.0));
        assert_eq!(jaccard::<f64>(&a, &a), Some(1.0));
        assert!((bleu::<f64>(&a, &a, 4).unwrap() - 1.0).abs() < 1e-12);

        assert_eq!(lcs_norm::<f64>(&a, &b).unwrap(), 0.0);
        assert_eq!(pct_s_in_t::<f64>(&a, &b), Some(0.0));
        assert_eq!(pct_t_in_s::<f64>(&a, &b), Some(0.0));
        assert_eq!(jaccard::<f64>(&a, &b), Some(0.0));
        assert!(bleu::<f64>(&a, &b, 4).unwrap() <= 1e-2);
    }
}
