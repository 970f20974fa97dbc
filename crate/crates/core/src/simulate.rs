//! Synthetic data from the parameter-wise generative model.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::model::{DataMatrix, Params, Partitions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub p: usize,
    pub theta: Params,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn with_size(mut self, n: usize, p: usize) -> Self {
        self.n = n;
        self.p = p;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Draws `z_i ~ M(π)`, `w^μ_j ~ M(ρ^μ)`, `w^Σ_j ~ M(ρ^Σ)`, then each
/// `x_ij ~ N(μ[z_i][w^μ_j], σ²[z_i][w^Σ_j])`.
pub fn generate(gs: &GeneratorSpec) -> (DataMatrix, Partitions) {
    let mut rng = ChaCha8Rng::seed_from_u64(gs.seed);
    let th = &gs.theta;
    let draw = |w: &[f64], len: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
        let d = WeightedIndex::new(w).expect("proportions are a valid simplex");
        (0..len).map(|_| d.sample(rng)).collect()
    };
    let z = draw(th.pi(), gs.n, &mut rng);
    let w_mu = draw(th.rho_mu(), gs.p, &mut rng);
    let w_sigma = draw(th.rho_sigma(), gs.p, &mut rng);
    let mut values = Vec::with_capacity(gs.n * gs.p);
    for &g in &z {
        for j in 0..gs.p {
            let e: f64 = StandardNormal.sample(&mut rng);
            let sd = th.sigma2()[g][w_sigma[j]].sqrt();
            values.push(th.mu()[g][w_mu[j]] + sd * e);
        }
    }
    let x = DataMatrix::new(gs.n, gs.p, values).expect("generated cells are finite");
    (x, Partitions { z, w_mu, w_sigma })
}

/// The four reference simulation designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Well separated blocks, `n = 1000`, `p = 100`, truth `(3, 2, 3)`.
    Sim1,
    /// Weak separation, `n = 200`, `p = 500`, truth `(3, 3, 2)`.
    Sim2,
    /// ICL-BIC selection design, `n = 2000`, `p = 500`, truth `(3, 3, 3)`.
    IclSelection,
    /// Forward-search design, truth `(3, 4, 3)`.
    ForwardSearch,
}

/// How the printed dispersion matrices are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaReading {
    /// Entries are variances σ².
    #[default]
    Variance,
    /// Entries are standard deviations and get squared.
    StdDev,
}

// (n, p, π, ρ^μ, ρ^Σ, μ, Σ)
type Design = (
    usize,
    usize,
    Vec<f64>,
    Vec<f64>,
    Vec<f64>,
    Vec<Vec<f64>>,
    Vec<Vec<f64>>,
);

/// Generator template for `which` with its default dimensions and seed 0.
pub fn scenario_spec(which: Scenario, reading: SigmaReading) -> GeneratorSpec {
    let (n, p, pi, rho_mu, rho_sigma, mu, sigma): Design = match which {
        Scenario::Sim1 => (
            1000,
            100,
            vec![0.3, 0.3, 0.4],
            vec![0.4, 0.6],
            vec![0.3, 0.3, 0.4],
            vec![vec![1.0, -1.0], vec![2.0, -2.0], vec![3.0, -3.0]],
            vec![
                vec![1.0, 0.5, 0.75],
                vec![2.0, 1.75, 0.25],
                vec![1.5, 2.25, 2.5],
            ],
        ),
        Scenario::Sim2 => (
            200,
            500,
            vec![0.3, 0.3, 0.4],
            vec![0.3, 0.5, 0.2],
            vec![0.4, 0.6],
            vec![
                vec![1.0, 1.25, 0.0],
                vec![2.0, 1.2, 1.0],
                vec![1.5, 1.9, 0.5],
            ],
            vec![vec![1.0, 0.5], vec![2.0, 1.75], vec![1.5, 2.25]],
        ),
        Scenario::IclSelection => (
            2000,
            500,
            vec![0.3, 0.3, 0.4],
            vec![0.3, 0.4, 0.3],
            vec![0.4, 0.3, 0.3],
            vec![
                vec![1.0, 1.25, 0.0],
                vec![2.0, 1.2, 1.0],
                vec![1.5, 1.9, 0.5],
            ],
            vec![
                vec![1.0, 0.5, 0.25],
                vec![2.0, 1.75, 0.5],
                vec![1.5, 2.25, 1.0],
            ],
        ),
        // dimensions are not part of the design; reuse the selection design's
        Scenario::ForwardSearch => (
            2000,
            500,
            vec![0.3, 0.3, 0.4],
            vec![0.2, 0.3, 0.25, 0.25],
            vec![0.5, 0.25, 0.25],
            vec![
                vec![1.0, -0.25, 0.3, -1.0],
                vec![1.25, 0.0, 0.1, -0.3],
                vec![0.5, -1.0, 0.0, 0.1],
            ],
            vec![
                vec![1.0, 0.5, 0.25],
                vec![2.0, 1.75, 0.5],
                vec![1.5, 2.25, 1.0],
            ],
        ),
    };
    let sigma2 = match reading {
        SigmaReading::Variance => sigma,
        SigmaReading::StdDev => sigma
            .into_iter()
            .map(|r| r.into_iter().map(|s| s * s).collect())
            .collect(),
    };
    GeneratorSpec {
        n,
        p,
        theta: Params::new(pi, rho_mu, rho_sigma, mu, sigma2)
            .expect("scenario parameters are valid"),
        seed: 0,
    }
}
