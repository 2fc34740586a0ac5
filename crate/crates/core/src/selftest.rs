//! Embedded oracle fixtures, run by `uptake selftest`.

use std::collections::HashMap;

use rand::Rng;

use crate::corpus::ExchangePair;
use crate::nuc::synthetic::copy_corpus;
use crate::nuc::{
    build_nuc_dataset, objective_and_gradient, pjsd_estimate, predict, split_holdout, train_reference_classifier,
    Featurizer, TrainHyper,
};
use crate::seeds;
use crate::similarity::{bleu, jaccard, lcs_norm, pct_s_in_t, pct_t_in_s, MetricContext};
use crate::stats::{
    bootstrap_ci, fleiss_kappa, map_damsl, median_test, ols, quantile_transform, spearman, Phenomenon,
    PhenomenonMapping,
};
use crate::textprep::{stem, tokenize, Preprocessor, TokenSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: std::result::Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tokenizer() -> std::result::Result<String, String> {
    let got = tokenize("Well, you'd multiply four-times [Inaudible] three!").tokens;
    let want = [
        "well",
        ",",
        "you'd",
        "multiply",
        "four-times",
        "[inaudible]",
        "three",
        "!",
    ];
    ensure(got == want, || format!("{got:?}"))?;
    for (w, s) in [
        ("running", "run"),
        ("generously", "generous"),
        ("conversational", "convers"),
        ("skies", "sky"),
    ] {
        ensure(stem(w) == s, || format!("stem({w}) = {}", stem(w)))?;
    }
    Ok("tokenizer and stemmer fixtures".into())
}

fn brute_lcs(s: &[String], t: &[String]) -> usize {
    (0u32..1 << s.len())
        .filter(|mask| {
            let mut it = t.iter();
            (0..s.len())
                .filter(|i| mask >> i & 1 == 1)
                .all(|i| it.any(|x| *x == s[i]))
        })
        .map(u32::count_ones)
        .max()
        .unwrap_or(0) as usize
}

fn metric_oracles() -> std::result::Result<String, String> {
    let mut rng = seeds::rng(2024);
    let alphabet = ["a", "b", "c", "d", "e"];
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<String> {
        let n = rng.gen_range(1..=8);
        (0..n).map(|_| alphabet[rng.gen_range(0..5)].to_string()).collect()
    };
    for case in 0..300 {
        let (s, t) = (draw(&mut rng), draw(&mut rng));
        let (a, b) = (TokenSequence::from_tokens(&s), TokenSequence::from_tokens(&t));
        let lcs: f64 = lcs_norm(&a, &b).map_err(|e| e.to_string())?;
        ensure(lcs == brute_lcs(&s, &t) as f64 / s.len() as f64, || {
            format!("lcs case {case}")
        })?;
        let hits = s.iter().filter(|x| t.contains(x)).count() as f64 / s.len() as f64;
        ensure(pct_s_in_t::<f64>(&a, &b) == Some(hits), || {
            format!("pct_s_in_t case {case}")
        })?;
        let back = t.iter().filter(|x| s.contains(x)).count() as f64 / t.len() as f64;
        ensure(pct_t_in_s::<f64>(&a, &b) == Some(back), || {
            format!("pct_t_in_s case {case}")
        })?;
        ensure(jaccard::<f64>(&a, &a) == Some(1.0), || {
            format!("jaccard identity case {case}")
        })?;
        let id: f64 = bleu(&a, &a, 4).ok_or("bleu undefined")?;
        ensure((id - 1.0).abs() < 1e-12, || format!("bleu identity case {case}"))?;
    }
    Ok("300 random pairs against enumeration and set arithmetic".into())
}

fn pjsd_points() -> std::result::Result<String, String> {
    let e = |f, n: &[f64]| pjsd_estimate(f, n).map(|e| e.value).map_err(|e| e.to_string());
    ensure(e(0.5, &[0.5, 0.5, 0.5])?.abs() <= 1e-12, || "chance is not 0".into())?;
    ensure((e(1.0 - 1e-6, &[1e-6])? - std::f64::consts::LN_2).abs() <= 1e-3, || {
        "saturation".into()
    })?;
    let v = e(0.8, &[0.3, 0.1, 0.4])?;
    ensure((v - 0.41942).abs() <= 1e-4, || format!("worked example {v}"))?;
    Ok(format!("worked example {v:.5}"))
}

fn gradient() -> std::result::Result<String, String> {
    let mut rng = seeds::rng(7);
    let x: Vec<Vec<f64>> = (0..40)
        .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let y: Vec<bool> = (0..40).map(|i| i % 4 == 0).collect();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let obj = objective_and_gradient(&x, &y, &w, b, 0.01).map_err(|e| e.to_string())?;
        for j in 0..4 {
            let at = |d: f64| {
                let mut w2 = w.clone();
                let mut b2 = b;
                if j < 3 {
                    w2[j] += d;
                } else {
                    b2 += d;
                }
                objective_and_gradient(&x, &y, &w2, b2, 0.01).map(|o| o.value)
            };
            let h = 1e-5;
            let fd = (at(h).map_err(|e| e.to_string())? - at(-h).map_err(|e| e.to_string())?) / (2.0 * h);
            let an = if j < 3 { obj.grad_weights[j] } else { obj.grad_bias };
            worst = worst.max((fd - an).abs() / an.abs().max(1e-3));
        }
    }
    ensure(worst < 1e-5, || format!("relative error {worst:e}"))?;
    Ok("20 points against central differences".into())
}

fn statistics() -> std::result::Result<String, String> {
    let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0])
        .map_err(|e| e.to_string())?
        .rho;
    ensure((rho - 4.5 / 22.5f64.sqrt()).abs() < 1e-12, || {
        format!("tied spearman {rho}")
    })?;

    let counts = vec![vec![3, 0, 0], vec![1, 2, 0], vec![1, 1, 1], vec![0, 2, 1]];
    let p_bar = (1.0 + 1.0 / 3.0 + 0.0 + 1.0 / 3.0) / 4.0;
    let p_e = (25.0 + 25.0 + 4.0) / 144.0;
    let kappa: f64 = fleiss_kappa(&counts).map_err(|e| e.to_string())?;
    ensure((kappa - (p_bar - p_e) / (1.0 - p_e)).abs() < 1e-12, || {
        format!("fleiss {kappa}")
    })?;

    let x: Vec<f64> = (0..12).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let fit = ols(&y, &x, &[]).map_err(|e| e.to_string())?;
    let coef = fit.term("x").map(|t| t.coefficient).unwrap_or(f64::NAN);
    ensure(
        (coef - 2.0).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12,
        || format!("ols {coef}"),
    )?;

    let q = quantile_transform(&[5.0, 1.0, 3.0, 2.0]);
    ensure(q == [0.875, 0.125, 0.625, 0.375], || format!("quantiles {q:?}"))?;

    let m = median_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).map_err(|e| e.to_string())?;
    ensure(m.p_value == 1.0, || format!("median test {}", m.p_value))?;

    let xs: Vec<f64> = (0..50).map(|i| f64::from(i % 17)).collect();
    let ys: Vec<f64> = (0..50).map(|i| f64::from((i * 7) % 13) + f64::from(i) / 10.0).collect();
    let a = bootstrap_ci(&xs, &ys, 200, 0.95, 3).map_err(|e| e.to_string())?;
    let b = bootstrap_ci(&xs, &ys, 200, 0.95, 3).map_err(|e| e.to_string())?;
    ensure(a == b, || "bootstrap not reproducible".into())?;
    Ok("spearman, fleiss, ols, quantiles, median test, bootstrap".into())
}

fn damsl() -> std::result::Result<String, String> {
    let m = PhenomenonMapping::default();
    let cases = [
        ("b", Some(Phenomenon::Acknowledgment)),
        ("bk", Some(Phenomenon::Acknowledgment)),
        ("nn", Some(Phenomenon::Answer)),
        ("bf", Some(Phenomenon::Reformulation)),
        ("sd^2", Some(Phenomenon::CollaborativeCompletion)),
        ("sv^m", Some(Phenomenon::Repetition)),
        ("sd", None),
        ("qy", None),
        ("aa", None),
        ("%", None),
    ];
    for (tag, want) in cases {
        ensure(map_damsl(tag, &m) == want, || format!("tag {tag}"))?;
    }
    Ok("10/10 tags".into())
}

fn nuc_recovery() -> std::result::Result<String, String> {
    let corpus = copy_corpus(600, 31);
    let alpha: HashMap<&str, f64> = corpus.iter().map(|c| (c.pair.id.as_str(), c.alpha)).collect();
    let pairs: Vec<ExchangePair> = corpus.iter().map(|c| c.pair.clone()).collect();
    let data = build_nuc_dataset(&pairs, 3, 31).map_err(|e| e.to_string())?;
    ensure(data.iter().filter(|e| e.z).count() * 4 == data.len(), || {
        "class balance".into()
    })?;
    let (train, test) = split_holdout(&data, 0.2, 31);
    let pre = Preprocessor::new();
    let f = Featurizer::<f64>::new(MetricContext::new(&pre));
    let hyper = TrainHyper {
        seed: 31,
        ..TrainHyper::default()
    };
    let out = train_reference_classifier(&train, &f, &hyper).map_err(|e| e.to_string())?;
    for e in &out.history {
        let dual = std::f64::consts::LN_2 - 0.5 * e.loss;
        ensure(e.mean_pjsd.is_some_and(|v| (v - dual).abs() <= 1e-12), || {
            format!("duality at epoch {}", e.epoch)
        })?;
    }
    let (mut p, mut a) = (Vec::new(), Vec::new());
    for e in test.iter().filter(|e| e.z) {
        p.push(predict(&out.params, &f, &e.pair_id, &e.s, &e.t).map_err(|e| e.to_string())?);
        a.push(alpha[e.pair_id.as_str()]);
    }
    let rho = spearman(&p, &a).map_err(|e| e.to_string())?.rho;
    ensure(rho >= 0.8, || format!("held-out rho {rho:.4}"))?;
    Ok(format!("held-out rho {rho:.4}"))
}

/// Runs every fixture. The output depends on nothing but the code.
pub fn run() -> Vec<Check> {
    vec![
        check("text preprocessing", tokenizer()),
        check("metric oracles", metric_oracles()),
        check("pjsd calibration", pjsd_points()),
        check("classifier gradient", gradient()),
        check("statistics fixtures", statistics()),
        check("damsl mapping", damsl()),
        check("synthetic dependence recovery", nuc_recovery()),
    ]
}

/// One line per check: `PASS name: detail` or `FAIL name: detail`.
pub fn report(checks: &[Check]) -> String {
    checks
        .iter()
        .map(|c| format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect()
}
