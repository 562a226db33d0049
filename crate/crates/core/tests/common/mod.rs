#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tailclust::params::{default_params, ClusterParams};
use tailclust::partition::TailPartition;
use tailclust::sim::{SimModel, SimModelSpec};

/// Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a one-sample KS test.
pub fn ks_pvalue(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    let d = ks_statistic(sample, cdf);
    kolmogorov_sf((n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d)
}

/// Asymptotic p-value of the two-sample KS test.
pub fn ks_two_sample_pvalue(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    kolmogorov_sf((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d)
}

/// CDF of `|T_v|` from closed forms, for `v ∈ {1, 2, 4}`.
pub fn abs_t_cdf_closed(v: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if v == 1.0 {
        2.0 / PI * x.atan()
    } else if v == 2.0 {
        x / (2.0 + x * x).sqrt()
    } else if v == 4.0 {
        // 2 F(x) - 1 with F(x) = 1/2 + (3/8) s (1 - x² / (12 w)), s = x / sqrt(w)
        let w = 1.0 + x * x / 4.0;
        let s = x / w.sqrt();
        0.75 * s * (1.0 - x * x / (12.0 * w))
    } else {
        panic!("no closed form for v = {v}")
    }
}

pub fn frechet_cdf_closed(gamma: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-x.powf(-1.0 / gamma)).exp()
    }
}

pub fn pareto_cdf_closed(gamma: f64, x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        1.0 - x.powf(-1.0 / gamma)
    }
}

/// Closed-form marginal CDF of a model column with index `gamma`.
pub fn marginal_cdf(model: SimModel, gamma: f64) -> impl Fn(f64) -> f64 {
    move |x| match model {
        SimModel::AF | SimModel::BF => frechet_cdf_closed(gamma, x),
        SimModel::ExactPareto => pareto_cdf_closed(gamma, x),
        _ => abs_t_cdf_closed(1.0 / gamma, x),
    }
}

/// Asserts that `part` is a partition of `0..p` into non-empty, disjoint groups.
pub fn assert_valid_partition(part: &TailPartition, p: usize) {
    let mut seen = vec![false; p];
    for g in part.groups() {
        assert!(!g.is_empty(), "empty group in {part:?}");
        for &j in g {
            assert!(j < p, "index {j} out of range");
            assert!(!seen[j], "column {j} in two groups");
            seen[j] = true;
        }
    }
    assert!(seen.iter().all(|&s| s), "partition {part:?} misses a column");
}

/// A random design and a valid parameter set for it.
pub fn random_case(rng: &mut ChaCha8Rng) -> (SimModelSpec, ClusterParams) {
    let model = SimModel::ALL[rng.random_range(0..SimModel::ALL.len())];
    let g = rng.random_range(1..=4);
    let q = rng.random_range(1..=5);
    let delta = rng.random_range(0.15..0.75);
    let n = rng.random_range(60..=600);
    let spec = SimModelSpec {
        model,
        g,
        q,
        delta,
        n,
        seed: rng.random(),
    };
    let p = g * q;
    let params = if p >= 2 && rng.random_bool(0.5) {
        default_params(p, n).unwrap()
    } else {
        let k = rng.random_range(2..=20.min(n / 3));
        let k_star = rng.random_range(k + 1..n);
        let beta = rng.random_range(1.0 / k as f64 + 1e-9..0.99);
        ClusterParams::new(k, k_star, beta).unwrap()
    };
    (spec, params)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
