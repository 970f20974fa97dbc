mod common;

use blockmix::baseline::complete_data_loglik_traditional;
use blockmix::{
    ari, complete_data_loglik, fit, fit_traditional, DataMatrix, ModelSpec, Params, Partitions,
    SemConfig, TraditionalSpec,
};
use common::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

// Classical block data: one column partition, means ±3, unit variance.
fn separated(seed: u64) -> (DataMatrix, Vec<usize>, Vec<usize>) {
    let mut r = rng(seed);
    let (n, p) = (200, 50);
    let z: Vec<usize> = (0..n).map(|_| r.random_range(0..2)).collect();
    let w: Vec<usize> = (0..p).map(|_| r.random_range(0..2)).collect();
    let means = [[3.0, -3.0], [-3.0, 3.0]];
    let mut v = Vec::with_capacity(n * p);
    for &g in &z {
        for &l in &w {
            let e: f64 = StandardNormal.sample(&mut r);
            v.push(means[g][l] + e);
        }
    }
    (DataMatrix::new(n, p, v).unwrap(), z, w)
}

#[test]
fn well_separated_blocks_are_recovered() {
    let mut perfect = 0;
    for seed in 0..20 {
        let (x, z, w) = separated(seed);
        let r = fit_traditional(
            &x,
            TraditionalSpec::new(2, 2).unwrap(),
            &SemConfig::with_seed(seed),
        )
        .unwrap();
        if ari(&z, &r.partitions.z).unwrap() == 1.0 && ari(&w, &r.partitions.w_mu).unwrap() == 1.0 {
            perfect += 1;
        }
    }
    assert!(perfect >= 18, "perfect recoveries {perfect}/20");
}

#[test]
fn single_block_matches_non_id() {
    let mut r = rng(3);
    let x = random_data(&mut r, 15, 7);
    let cfg = SemConfig::with_seed(4);
    let a = fit_traditional(&x, TraditionalSpec::new(1, 1).unwrap(), &cfg).unwrap();
    let b = fit(&x, ModelSpec::new(1, 1, 1).unwrap(), &cfg).unwrap();
    assert_eq!(a.theta_hat, b.theta_hat);
    assert_eq!(a.icl_bic, b.icl_bic);
}

#[test]
fn cdll_relation_between_models() {
    for seed in 0..20 {
        let mut r = rng(100 + seed);
        let (g, l) = (r.random_range(1..4), r.random_range(1..4));
        let s = ModelSpec::new(g, l, l).unwrap();
        let x = random_data(&mut r, g + 5, l + 5);
        let tmp = random_params(&mut r, s);
        let theta = Params::new(
            tmp.pi().to_vec(),
            tmp.rho_mu().to_vec(),
            tmp.rho_mu().to_vec(),
            tmp.mu().to_vec(),
            tmp.sigma2().to_vec(),
        )
        .unwrap();
        let z = covering_labels(&mut r, x.n(), g);
        let w = covering_labels(&mut r, x.p(), l);
        let trad = complete_data_loglik_traditional(&x, &z, &w, &theta).unwrap();
        let parts = Partitions {
            z,
            w_mu: w.clone(),
            w_sigma: w.clone(),
        };
        let non_id = complete_data_loglik(&x, &parts, &theta).unwrap();
        let extra: f64 = w.iter().map(|&k| theta.rho_mu()[k].ln()).sum();
        assert!((non_id - (trad + extra)).abs() < 1e-9 * non_id.abs());
    }
}
