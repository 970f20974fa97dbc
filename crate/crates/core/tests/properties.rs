mod common;

use blockmix::sem::{se_col_mu_probabilities, se_col_sigma_probabilities, se_row_probabilities};
use blockmix::{ari, block_logdensity, complete_data_loglik, icl_bic, ModelSpec, Partitions};
use common::*;
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = u64> {
    any::<u64>()
}

fn build(seed: u64) -> (blockmix::DataMatrix, Partitions, blockmix::Params) {
    let mut r = rng(seed);
    let s = random_spec(&mut r, 3);
    let x = random_data(&mut r, s.g + 4, s.l_mu.max(s.l_sigma) + 4);
    let parts = random_partitions(&mut r, s, x.n(), x.p());
    let theta = random_params(&mut r, s);
    (x, parts, theta)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdll_invariant_under_relabelling(seed in instance(), perm_seed in any::<u64>()) {
        let (x, parts, theta) = build(seed);
        let s = theta.spec();
        let mut r = rng(perm_seed);
        let (pr, pm, ps) = (random_perm(&mut r, s.g), random_perm(&mut r, s.l_mu), random_perm(&mut r, s.l_sigma));
        let moved = Partitions {
            z: relabel(&parts.z, &inverse(&pr)),
            w_mu: relabel(&parts.w_mu, &inverse(&pm)),
            w_sigma: relabel(&parts.w_sigma, &inverse(&ps)),
        };
        let a = complete_data_loglik(&x, &parts, &theta).unwrap();
        let b = complete_data_loglik(&x, &moved, &theta.relabeled(&pr, &pm, &ps)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs());
        prop_assert!((a - cdll_oracle(&x, &parts, &theta)).abs() <= 1e-10 * a.abs());
    }

    #[test]
    fn se_vectors_are_distributions(seed in instance()) {
        let (x, parts, theta) = build(seed);
        for i in 0..x.n() {
            let pr = se_row_probabilities(&x, &parts.w_mu, &parts.w_sigma, &theta, i).unwrap();
            prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(pr.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
        for j in 0..x.p() {
            let a = se_col_mu_probabilities(&x, &parts.z, &parts.w_sigma, &theta, j).unwrap();
            let b = se_col_sigma_probabilities(&x, &parts.z, &parts.w_mu, &theta, j).unwrap();
            prop_assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!((b.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn ari_symmetric_and_relabel_invariant(
        a in proptest::collection::vec(0usize..4, 2..30),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let b = random_labels(&mut r, a.len(), 3);
        let base = ari(&a, &b).unwrap();
        prop_assert!((base - ari(&b, &a).unwrap()).abs() <= 1e-12);
        let (s, t) = (random_perm(&mut r, 4), random_perm(&mut r, 3));
        prop_assert!((base - ari(&relabel(&a, &s), &relabel(&b, &t)).unwrap()).abs() <= 1e-12);
        prop_assert!(base <= 1.0 + 1e-12);
        if a.len() <= 12 {
            prop_assert!((base - ari_pairs(&a, &b)).abs() <= 1e-12);
        }
    }

    #[test]
    fn icl_decreases_along_every_axis(
        g in 1usize..8, lm in 1usize..8, ls in 1usize..8,
        n in 2usize..5000, p in 2usize..5000, cdll in -1e6f64..0.0,
    ) {
        let base = icl_bic(cdll, ModelSpec::new(g, lm, ls).unwrap(), n, p);
        for bigger in [(g + 1, lm, ls), (g, lm + 1, ls), (g, lm, ls + 1)] {
            let s = ModelSpec::new(bigger.0, bigger.1, bigger.2).unwrap();
            prop_assert!(icl_bic(cdll, s, n, p) < base);
        }
    }
}

#[test]
fn block_density_integrates_to_one() {
    for (mu, var) in [(0.0, 1.0), (2.5, 0.04), (-3.0, 9.0), (1.0, 1e-4)] {
        let sd: f64 = f64::sqrt(var);
        let (a, b, steps) = (mu - 12.0 * sd, mu + 12.0 * sd, 20_000);
        let h = (b - a) / steps as f64;
        let mut total = 0.0;
        for k in 0..=steps {
            let x = a + k as f64 * h;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            total += w * block_logdensity(x, mu, var).unwrap().exp();
        }
        assert!(
            (total * h - 1.0).abs() < 1e-9,
            "mu {mu} var {var}: {}",
            total * h
        );
        assert!(
            (block_logdensity(mu + 0.3, mu, var).unwrap() - normal_logpdf(mu + 0.3, mu, var)).abs()
                < 1e-12
        );
    }
    assert!(block_logdensity(0.0, 0.0, 0.0).is_err());
}
