use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use uptake_core::seeds;
use uptake_core::stats::{bootstrap_ci, median_test, phenomenon_delta, PhenomenonMapping};

/// Permutation p-value for the median-test table statistic (uncorrected chi-square).
fn permutation_p(a: &[f64], b: &[f64], rounds: usize, seed: u64) -> f64 {
    fn stat(a: &[f64], b: &[f64]) -> f64 {
        let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let n = pooled.len();
        let med = if n % 2 == 1 {
            pooled[n / 2]
        } else {
            (pooled[n / 2 - 1] + pooled[n / 2]) / 2.0
        };
        let above_a = a.iter().filter(|&&v| v > med).count() as f64;
        let above_b = b.iter().filter(|&&v| v > med).count() as f64;
        let above = above_a + above_b;
        let total = n as f64;
        let mut chi = 0.0;
        for (obs, col) in [(above_a, a.len() as f64), (above_b, b.len() as f64)] {
            for (o, row) in [(obs, above), (col - obs, total - above)] {
                let e = row * col / total;
                chi += (o - e) * (o - e) / e;
            }
        }
        chi
    }
    let observed = stat(a, b);
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut rng = seeds::rng(seed);
    let mut hits = 0;
    for _ in 0..rounds {
        pooled.shuffle(&mut rng);
        if stat(&pooled[..a.len()], &pooled[a.len()..]) >= observed - 1e-12 {
            hits += 1;
        }
    }
    hits as f64 / rounds as f64
}

#[test]
fn median_test_agrees_with_permutation() {
    for (seed, shift, na, nb) in [(1u64, 0.0, 60, 60), (2, 0.4, 80, 50), (3, 0.8, 40, 70)] {
        let mut rng = seeds::rng(seed);
        let a: Vec<f64> = (0..na).map(|_| rng.sample::<f64, _>(StandardNormal) + shift).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let p = median_test(&a, &b).unwrap().p_value;
        let perm = permutation_p(&a, &b, 10_000, seed + 100);
        assert!(
            (p - perm).abs() <= 0.02,
            "seed {seed}: chi-square {p} vs permutation {perm}"
        );
    }
}

#[test]
fn identically_distributed_samples_are_not_flagged() {
    let mut rng = seeds::rng(12);
    let a: Vec<f64> = (0..2000).map(|_| rng.gen()).collect();
    let b: Vec<f64> = (0..2000).map(|_| rng.gen()).collect();
    assert!(median_test(&a, &b).unwrap().p_value >= 0.2);
}

/// Spearman rho of a bivariate normal with Pearson correlation r.
fn population_spearman(r: f64) -> f64 {
    6.0 / std::f64::consts::PI * (r / 2.0).asin()
}

#[test]
fn bootstrap_interval_coverage() {
    let r = 0.5f64;
    let truth = population_spearman(r);
    let trials = 100;
    let mut covered = 0;
    for trial in 0..trials {
        let mut rng = seeds::rng(seeds::derive(77, trial));
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for _ in 0..200 {
            let u: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(StandardNormal);
            x.push(u);
            y.push(r * u + (1.0 - r * r).sqrt() * v);
        }
        let res = bootstrap_ci(&x, &y, 1000, 0.95, trial).unwrap();
        if res.ci_low.unwrap() <= truth && truth <= res.ci_high.unwrap() {
            covered += 1;
        }
    }
    assert!(covered >= 90, "covered {covered} of {trials}");
}

#[test]
fn constructed_shift_is_recovered() {
    let mut rng = seeds::rng(5);
    let (mut a, mut b, mut tags) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for i in 0..400 {
        let id = format!("p{i:03}");
        let base: f64 = rng.gen_range(0.0..0.8);
        let tag = if i % 2 == 0 { "bf" } else { "sd" };
        let shift = if tag == "bf" { 0.2 } else { 0.0 };
        a.insert(id.clone(), base + shift);
        b.insert(id.clone(), base);
        tags.insert(id, tag.to_string());
    }
    let deltas = phenomenon_delta(&a, &b, &tags, &PhenomenonMapping::default()).unwrap();
    let reform = deltas
        .iter()
        .find(|d| d.phenomenon.as_str() == "reformulation")
        .unwrap();
    assert!((reform.delta.unwrap() - 0.2).abs() < 0.05);
    assert!(reform.p_value.unwrap() < 0.01);
    let completion = deltas
        .iter()
        .find(|d| d.phenomenon.as_str() == "collaborative_completion")
        .unwrap();
    assert_eq!(completion.delta, None);
}
