// Independent scalar oracles and random instance builders shared by the
// integration tests. Nothing here calls into the fitting code.
#![allow(dead_code)]

use blockmix::{DataMatrix, ModelSpec, Params, Partitions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_logpdf(x: f64, mu: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (x - mu) * (x - mu) / (2.0 * var)
}

/// Complete-data log-likelihood cell by cell.
pub fn cdll_oracle(x: &DataMatrix, parts: &Partitions, theta: &Params) -> f64 {
    let mut s = 0.0;
    for &g in &parts.z {
        s += theta.pi()[g].ln();
    }
    for j in 0..x.p() {
        s += theta.rho_mu()[parts.w_mu[j]].ln() + theta.rho_sigma()[parts.w_sigma[j]].ln();
    }
    for i in 0..x.n() {
        for j in 0..x.p() {
            let g = parts.z[i];
            s += normal_logpdf(
                x.get(i, j),
                theta.mu()[g][parts.w_mu[j]],
                theta.sigma2()[g][parts.w_sigma[j]],
            );
        }
    }
    s
}

pub fn normalize(logw: &[f64]) -> Vec<f64> {
    let m = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - m).exp()).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|v| v / t).collect()
}

/// Row conditional from per-cell densities.
pub fn row_probs_oracle(
    x: &DataMatrix,
    w_mu: &[usize],
    w_sigma: &[usize],
    theta: &Params,
    i: usize,
) -> Vec<f64> {
    let logw: Vec<f64> = (0..theta.spec().g)
        .map(|g| {
            theta.pi()[g].ln()
                + (0..x.p())
                    .map(|j| {
                        normal_logpdf(
                            x.get(i, j),
                            theta.mu()[g][w_mu[j]],
                            theta.sigma2()[g][w_sigma[j]],
                        )
                    })
                    .sum::<f64>()
        })
        .collect();
    normalize(&logw)
}

/// Mean-partition conditional of column `j`.
pub fn col_mu_probs_oracle(
    x: &DataMatrix,
    z: &[usize],
    w_sigma: &[usize],
    theta: &Params,
    j: usize,
) -> Vec<f64> {
    let logw: Vec<f64> = (0..theta.spec().l_mu)
        .map(|l| {
            theta.rho_mu()[l].ln()
                + (0..x.n())
                    .map(|i| {
                        normal_logpdf(
                            x.get(i, j),
                            theta.mu()[z[i]][l],
                            theta.sigma2()[z[i]][w_sigma[j]],
                        )
                    })
                    .sum::<f64>()
        })
        .collect();
    normalize(&logw)
}

/// Variance-partition conditional of column `j`.
pub fn col_sigma_probs_oracle(
    x: &DataMatrix,
    z: &[usize],
    w_mu: &[usize],
    theta: &Params,
    j: usize,
) -> Vec<f64> {
    let logw: Vec<f64> = (0..theta.spec().l_sigma)
        .map(|l| {
            theta.rho_sigma()[l].ln()
                + (0..x.n())
                    .map(|i| {
                        normal_logpdf(
                            x.get(i, j),
                            theta.mu()[z[i]][w_mu[j]],
                            theta.sigma2()[z[i]][l],
                        )
                    })
                    .sum::<f64>()
        })
        .collect();
    normalize(&logw)
}

/// Adjusted Rand index by enumerating every unordered pair.
pub fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            if sa && sb {
                both += 1.0;
            }
            if sa {
                in_a += 1.0;
            }
            if sb {
                in_b += 1.0;
            }
        }
    }
    let total = (n * (n - 1) / 2) as f64;
    let expected = in_a * in_b / total;
    let max = 0.5 * (in_a + in_b);
    if max == expected {
        1.0
    } else {
        (both - expected) / (max - expected)
    }
}

fn simplex(r: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| r.random_range(0.2..1.0)).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|v| v / t).collect()
}

pub fn random_spec(r: &mut ChaCha8Rng, max: usize) -> ModelSpec {
    ModelSpec::new(
        r.random_range(1..=max),
        r.random_range(1..=max),
        r.random_range(1..=max),
    )
    .unwrap()
}

pub fn random_params(r: &mut ChaCha8Rng, spec: ModelSpec) -> Params {
    let mu = (0..spec.g)
        .map(|_| (0..spec.l_mu).map(|_| r.random_range(-3.0..3.0)).collect())
        .collect();
    let sigma2 = (0..spec.g)
        .map(|_| {
            (0..spec.l_sigma)
                .map(|_| r.random_range(0.2..3.0))
                .collect()
        })
        .collect();
    Params::new(
        simplex(r, spec.g),
        simplex(r, spec.l_mu),
        simplex(r, spec.l_sigma),
        mu,
        sigma2,
    )
    .unwrap()
}

pub fn random_labels(r: &mut ChaCha8Rng, len: usize, k: usize) -> Vec<usize> {
    (0..len).map(|_| r.random_range(0..k)).collect()
}

/// Labels where every cluster is used at least once (`len >= k`).
pub fn covering_labels(r: &mut ChaCha8Rng, len: usize, k: usize) -> Vec<usize> {
    let mut v = random_labels(r, len, k);
    for (c, slot) in v.iter_mut().take(k).enumerate() {
        *slot = c;
    }
    v
}

pub fn random_partitions(r: &mut ChaCha8Rng, spec: ModelSpec, n: usize, p: usize) -> Partitions {
    Partitions {
        z: covering_labels(r, n, spec.g),
        w_mu: covering_labels(r, p, spec.l_mu),
        w_sigma: covering_labels(r, p, spec.l_sigma),
    }
}

pub fn random_data(r: &mut ChaCha8Rng, n: usize, p: usize) -> DataMatrix {
    DataMatrix::new(
        n,
        p,
        (0..n * p).map(|_| r.random_range(-4.0..4.0)).collect(),
    )
    .unwrap()
}

pub fn random_perm(r: &mut ChaCha8Rng, k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..k).collect();
    for i in (1..k).rev() {
        v.swap(i, r.random_range(0..=i));
    }
    v
}

pub fn relabel(labels: &[usize], perm: &[usize]) -> Vec<usize> {
    labels.iter().map(|&l| perm[l]).collect()
}

pub fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &v) in perm.iter().enumerate() {
        inv[v] = k;
    }
    inv
}

/// Grand mean and biased variance of every cell.
pub fn grand_moments(x: &DataMatrix) -> (f64, f64) {
    let v = x.values();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    (mean, var)
}
