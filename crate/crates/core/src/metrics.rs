//! Partition agreement and label-aligned parameter errors.

use std::collections::HashMap;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Params;

fn pairs(k: u64) -> f64 {
    (k * k.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index between two label vectors.
///
/// Two partitions that are both a single cluster (or both all singletons)
/// score 1.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooFewItems(a.len()));
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(a.len() as u64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Label maps from the reference parameters to the estimate: true cluster
/// `k` on an axis corresponds to estimated cluster `axis[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelAlignment {
    pub rows: Vec<usize>,
    pub columns_mu: Vec<usize>,
    pub columns_sigma: Vec<usize>,
}

/// Sums of absolute errors under the best joint relabelling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamError {
    pub delta_mu: f64,
    pub delta_sigma: f64,
    pub delta_pi: f64,
    pub delta_rho_mu: f64,
    pub delta_rho_sigma: f64,
    pub alignment: LabelAlignment,
}

impl ParamError {
    pub fn total(&self) -> f64 {
        self.delta_mu + self.delta_sigma + self.delta_pi + self.delta_rho_mu + self.delta_rho_sigma
    }
}

/// Default cap on permutations examined by [`aligned_param_error`].
pub const DEFAULT_PERMUTATION_CAP: u128 = 3_628_800;

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

fn abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

// Best column relabelling for one block matrix (plus its proportions) under a
// fixed row relabelling. Returns (block error, proportion error, perm).
fn best_columns(
    hat_block: &[Vec<f64>],
    true_block: &[Vec<f64>],
    hat_rho: &[f64],
    true_rho: &[f64],
    rows: &[usize],
) -> (f64, f64, Vec<usize>) {
    let l = true_rho.len();
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for perm in (0..l).permutations(l) {
        let mut block = 0.0;
        for (g, &gh) in rows.iter().enumerate() {
            for (c, &ch) in perm.iter().enumerate() {
                block += (hat_block[gh][ch] - true_block[g][c]).abs();
            }
        }
        let rho: f64 = perm
            .iter()
            .enumerate()
            .map(|(c, &ch)| (hat_rho[ch] - true_rho[c]).abs())
            .sum();
        if best.as_ref().is_none_or(|b| block + rho < b.0 + b.1) {
            best = Some((block, rho, perm));
        }
    }
    best.expect("at least one permutation")
}

/// Δ statistics of `theta_hat` against `theta_true` over all joint label
/// permutations, minimising the total error.
pub fn aligned_param_error(theta_hat: &Params, theta_true: &Params) -> Result<ParamError> {
    aligned_param_error_with_cap(theta_hat, theta_true, DEFAULT_PERMUTATION_CAP)
}

pub fn aligned_param_error_with_cap(
    theta_hat: &Params,
    theta_true: &Params,
    cap: u128,
) -> Result<ParamError> {
    let (sh, st) = (theta_hat.spec(), theta_true.spec());
    if sh != st {
        return Err(Error::SpecMismatch {
            left: sh,
            right: st,
        });
    }
    // the column searches separate once the row permutation is fixed
    let required = factorial(st.g) * (factorial(st.l_mu) + factorial(st.l_sigma));
    if required > cap {
        return Err(Error::PermutationCap { required, cap });
    }
    let mut best: Option<ParamError> = None;
    for rows in (0..st.g).permutations(st.g) {
        let delta_pi: f64 = rows
            .iter()
            .enumerate()
            .map(|(g, &gh)| (theta_hat.pi()[gh] - theta_true.pi()[g]).abs())
            .sum();
        let (delta_mu, delta_rho_mu, columns_mu) = best_columns(
            theta_hat.mu(),
            theta_true.mu(),
            theta_hat.rho_mu(),
            theta_true.rho_mu(),
            &rows,
        );
        let (delta_sigma, delta_rho_sigma, columns_sigma) = best_columns(
            theta_hat.sigma2(),
            theta_true.sigma2(),
            theta_hat.rho_sigma(),
            theta_true.rho_sigma(),
            &rows,
        );
        let cand = ParamError {
            delta_mu,
            delta_sigma,
            delta_pi,
            delta_rho_mu,
            delta_rho_sigma,
            alignment: LabelAlignment {
                rows,
                columns_mu,
                columns_sigma,
            },
        };
        if best.as_ref().is_none_or(|b| cand.total() < b.total()) {
            best = Some(cand);
        }
    }
    Ok(best.expect("at least one row permutation"))
}

/// Unaligned Δ between two parameter sets with identical labels.
pub fn param_abs_error(a: &Params, b: &Params) -> f64 {
    abs_diff(a.pi(), b.pi())
        + abs_diff(a.rho_mu(), b.rho_mu())
        + abs_diff(a.rho_sigma(), b.rho_sigma())
        + a.mu()
            .iter()
            .zip(b.mu())
            .map(|(x, y)| abs_diff(x, y))
            .sum::<f64>()
        + a.sigma2()
            .iter()
            .zip(b.sigma2())
            .map(|(x, y)| abs_diff(x, y))
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta() -> Params {
        Params::new(
            vec![0.3, 0.7],
            vec![0.45, 0.55],
            vec![1.0],
            vec![vec![1.0, -1.0], vec![2.5, 0.5]],
            vec![vec![1.0], vec![3.0]],
        )
        .unwrap()
    }

    // every unordered pair, counted directly
    fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
        let n = a.len();
        let (mut both, mut in_a, mut in_b) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let sa = a[i] == a[j];
                let sb = b[i] == b[j];
                both += f64::from(u8::from(sa && sb));
                in_a += f64::from(u8::from(sa));
                in_b += f64::from(u8::from(sb));
            }
        }
        let total = (n * (n - 1) / 2) as f64;
        let exp = in_a * in_b / total;
        let max = 0.5 * (in_a + in_b);
        if max == exp {
            1.0
        } else {
            (both - exp) / (max - exp)
        }
    }

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&[0, 1, 1, 2], &[0, 1, 1, 2]).unwrap(), 1.0);
        assert_eq!(ari(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert!((ari(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap() + 0.5).abs() < 1e-15);
        assert!((ari_pairs(&[0, 0, 1, 1], &[0, 1, 0, 1]) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn ari_errors() {
        assert_eq!(
            ari(&[0, 1], &[0]),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        );
        assert_eq!(ari(&[0], &[0]), Err(Error::TooFewItems(1)));
    }

    #[test]
    fn alignment_identity_and_swap() {
        let t = theta();
        let e = aligned_param_error(&t, &t).unwrap();
        assert_eq!(e.total(), 0.0);
        assert_eq!(e.alignment.rows, vec![0, 1]);
        assert_eq!(e.alignment.columns_mu, vec![0, 1]);

        let swapped = t.relabeled(&[1, 0], &[0, 1], &[0]);
        let e = aligned_param_error(&swapped, &t).unwrap();
        assert_eq!(e.total(), 0.0);
        assert_eq!(e.alignment.rows, vec![1, 0]);
    }

    #[test]
    fn alignment_single_perturbation() {
        let t = theta();
        let hat = Params::new(
            vec![0.3, 0.7],
            vec![0.45, 0.55],
            vec![1.0],
            vec![vec![1.0, -1.0], vec![2.5, 0.6]],
            vec![vec![1.0], vec![3.0]],
        )
        .unwrap();
        let e = aligned_param_error(&hat, &t).unwrap();
        assert!((e.delta_mu - 0.1).abs() < 1e-12);
        assert_eq!(
            (e.delta_sigma, e.delta_pi, e.delta_rho_mu, e.delta_rho_sigma),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn alignment_errors() {
        let t = theta();
        let other = Params::new(
            vec![1.0],
            vec![1.0],
            vec![1.0],
            vec![vec![0.0]],
            vec![vec![1.0]],
        )
        .unwrap();
        assert!(matches!(
            aligned_param_error(&other, &t),
            Err(Error::SpecMismatch { .. })
        ));
        assert!(matches!(
            aligned_param_error_with_cap(&t, &t, 3),
            Err(Error::PermutationCap {
                required: 6,
                cap: 3
            })
        ));
    }

    #[test]
    fn ari_matches_pair_oracle_small() {
        let a = [0, 0, 1, 2, 2, 2, 1, 0];
        let b = [1, 1, 1, 0, 0, 2, 2, 0];
        assert!((ari(&a, &b).unwrap() - ari_pairs(&a, &b)).abs() < 1e-12);
    }
}
