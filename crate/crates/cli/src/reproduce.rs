//! Simulation studies: repeated generate-and-fit with summary statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use blockmix::selection::Step;
use blockmix::{
    aligned_param_error, ari, derive_seed, fit, forward_search, generate, grid_search,
    scenario_spec, ColumnCoupling, GeneratorSpec, ModelSpec, SearchConfig, SemConfig,
};

use crate::args::{parse_ranges, ReproduceArgs, ScenarioArg};
use crate::output::{envelope, write_json};
use crate::CliError;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub sd: f64,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn spread(v: &[f64]) -> Spread {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Spread { mean, sd }
}

#[derive(Debug, Clone, Serialize)]
struct Recovery {
    data_seed: u64,
    fit_seed: u64,
    ari_rows: f64,
    ari_columns_mu: f64,
    ari_columns_sigma: f64,
    delta_mu: f64,
    delta_sigma: f64,
    delta_pi: f64,
    delta_rho_mu: f64,
    delta_rho_sigma: f64,
    repairs: usize,
}

#[derive(Debug, Serialize)]
struct RecoverySummary {
    ari_rows: Spread,
    ari_columns_mu: Spread,
    ari_columns_sigma: Spread,
    delta_mu: Spread,
    delta_sigma: Spread,
    delta_pi: Spread,
    delta_rho_mu: Spread,
    delta_rho_sigma: Spread,
}

#[derive(Debug, Serialize)]
struct SpecCount {
    spec: ModelSpec,
    count: usize,
}

#[derive(Debug, Serialize)]
struct Selection {
    data_seed: u64,
    fit_seed: u64,
    chosen: ModelSpec,
    chosen_icl_bic: f64,
}

#[derive(Debug, Serialize)]
struct SearchComparison {
    data_seed: u64,
    fit_seed: u64,
    forward_chosen: ModelSpec,
    grid_chosen: ModelSpec,
    matches: bool,
    path: Vec<Step>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Summary {
    Recovery {
        true_spec: ModelSpec,
        summary: RecoverySummary,
        replicates: Vec<Recovery>,
    },
    Selection {
        true_spec: ModelSpec,
        correct: usize,
        counts: Vec<SpecCount>,
        replicates: Vec<Selection>,
    },
    Search {
        true_spec: ModelSpec,
        agreement: usize,
        forward_counts: Vec<SpecCount>,
        replicates: Vec<SearchComparison>,
    },
}

fn seeds(master: u64, r: usize) -> (u64, u64) {
    (
        derive_seed(master, &[r as u64, 0]),
        derive_seed(master, &[r as u64, 1]),
    )
}

fn counts(specs: impl Iterator<Item = ModelSpec>) -> Vec<SpecCount> {
    let mut m: BTreeMap<ModelSpec, usize> = BTreeMap::new();
    for s in specs {
        *m.entry(s).or_default() += 1;
    }
    let mut v: Vec<SpecCount> = m
        .into_iter()
        .map(|(spec, count)| SpecCount { spec, count })
        .collect();
    v.sort_by(|a, b| b.count.cmp(&a.count).then(a.spec.cmp(&b.spec)));
    v
}

fn recovery(template: &GeneratorSpec, sem: &SemConfig, reps: usize) -> Result<Summary, CliError> {
    let spec = template.theta.spec();
    let rows: Vec<Recovery> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let (data_seed, fit_seed) = seeds(sem.seed, r);
            let gs = template.clone().with_seed(data_seed);
            let (x, truth) = generate(&gs);
            let res = fit(
                &x,
                spec,
                &SemConfig {
                    seed: fit_seed,
                    ..sem.clone()
                },
            )?;
            let e = aligned_param_error(&res.theta_hat, &gs.theta)?;
            Ok(Recovery {
                data_seed,
                fit_seed,
                ari_rows: ari(&truth.z, &res.partitions.z)?,
                ari_columns_mu: ari(&truth.w_mu, &res.partitions.w_mu)?,
                ari_columns_sigma: ari(&truth.w_sigma, &res.partitions.w_sigma)?,
                delta_mu: e.delta_mu,
                delta_sigma: e.delta_sigma,
                delta_pi: e.delta_pi,
                delta_rho_mu: e.delta_rho_mu,
                delta_rho_sigma: e.delta_rho_sigma,
                repairs: res.repairs,
            })
        })
        .collect::<blockmix::Result<_>>()?;
    let col = |f: fn(&Recovery) -> f64| spread(&rows.iter().map(f).collect::<Vec<_>>());
    Ok(Summary::Recovery {
        true_spec: spec,
        summary: RecoverySummary {
            ari_rows: col(|r| r.ari_rows),
            ari_columns_mu: col(|r| r.ari_columns_mu),
            ari_columns_sigma: col(|r| r.ari_columns_sigma),
            delta_mu: col(|r| r.delta_mu),
            delta_sigma: col(|r| r.delta_sigma),
            delta_pi: col(|r| r.delta_pi),
            delta_rho_mu: col(|r| r.delta_rho_mu),
            delta_rho_sigma: col(|r| r.delta_rho_sigma),
        },
        replicates: rows,
    })
}

pub fn run(a: &ReproduceArgs) -> Result<(), CliError> {
    let mut template = scenario_spec(a.scenario.scenario(), a.sigma_reading.reading());
    template = template
        .clone()
        .with_size(a.n.unwrap_or(template.n), a.p.unwrap_or(template.p));
    if template.n == 0 || template.p == 0 {
        return Err(CliError::Usage("--n and --p must be positive".into()));
    }
    let reps = a.replicates.unwrap_or(if a.scenario == ScenarioArg::Sim4 {
        25
    } else {
        50
    });
    if reps == 0 {
        return Err(CliError::Usage("--replicates must be at least 1".into()));
    }
    let sem = a.sem.config();
    sem.validate()?;
    let true_spec = template.theta.spec();
    let summary = match a.scenario {
        ScenarioArg::Sim1 | ScenarioArg::Sim2 => recovery(&template, &sem, reps)?,
        ScenarioArg::Sim3 => {
            let ranges = parse_ranges(a.range.as_deref().unwrap_or("2-4"))?;
            let mut rows = Vec::with_capacity(reps);
            for r in 0..reps {
                let (data_seed, fit_seed) = seeds(sem.seed, r);
                let (x, _) = generate(&template.clone().with_seed(data_seed));
                let cfg = SemConfig {
                    seed: fit_seed,
                    ..sem.clone()
                };
                let rec = grid_search(
                    &x,
                    &ranges,
                    &cfg,
                    ColumnCoupling::Free,
                    a.fits_per_candidate,
                )?;
                rows.push(Selection {
                    data_seed,
                    fit_seed,
                    chosen: rec.chosen,
                    chosen_icl_bic: rec.chosen_icl_bic,
                });
            }
            Summary::Selection {
                true_spec,
                correct: rows.iter().filter(|s| s.chosen == true_spec).count(),
                counts: counts(rows.iter().map(|s| s.chosen)),
                replicates: rows,
            }
        }
        ScenarioArg::Sim4 => {
            let ranges = parse_ranges(a.range.as_deref().unwrap_or("1-5"))?;
            let max = ModelSpec::new(*ranges.g.end(), *ranges.l_mu.end(), *ranges.l_sigma.end())?;
            let start = ModelSpec::new(
                *ranges.g.start(),
                *ranges.l_mu.start(),
                *ranges.l_sigma.start(),
            )?;
            let mut rows = Vec::with_capacity(reps);
            for r in 0..reps {
                let (data_seed, fit_seed) = seeds(sem.seed, r);
                let (x, _) = generate(&template.clone().with_seed(data_seed));
                let cfg = SemConfig {
                    seed: fit_seed,
                    ..sem.clone()
                };
                let grid = grid_search(
                    &x,
                    &ranges,
                    &cfg,
                    ColumnCoupling::Free,
                    a.fits_per_candidate,
                )?;
                let fwd = forward_search(
                    &x,
                    &SearchConfig {
                        start,
                        max,
                        fits_per_candidate: a.fits_per_candidate,
                        sem: cfg,
                        coupling: ColumnCoupling::Free,
                    },
                )?;
                rows.push(SearchComparison {
                    data_seed,
                    fit_seed,
                    forward_chosen: fwd.chosen,
                    grid_chosen: grid.chosen,
                    matches: fwd.chosen == grid.chosen,
                    path: fwd.path,
                });
            }
            Summary::Search {
                true_spec,
                agreement: rows.iter().filter(|s| s.matches).count(),
                forward_counts: counts(rows.iter().map(|s| s.forward_chosen)),
                replicates: rows,
            }
        }
    };
    #[derive(Serialize)]
    struct Config<'a> {
        args: &'a ReproduceArgs,
        generator: &'a GeneratorSpec,
        replicates: usize,
    }
    let config = Config {
        args: a,
        generator: &template,
        replicates: reps,
    };
    write_json(
        &a.run.output,
        "summary.json",
        &envelope("reproduce", sem.seed, &config, &summary),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_values() {
        let s = spread(&[1.0, 2.0, 3.0]);
        assert_eq!((s.mean, s.sd), (2.0, 1.0));
        assert_eq!(spread(&[4.0]).sd, 0.0);
    }

    #[test]
    fn counts_sorted_by_frequency() {
        let a = ModelSpec::new(3, 3, 3).unwrap();
        let b = ModelSpec::new(3, 3, 4).unwrap();
        let c = counts([b, a, a].into_iter());
        assert_eq!((c[0].spec, c[0].count, c[1].spec), (a, 2, b));
    }
}
