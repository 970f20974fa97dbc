//! ICL-BIC and the searches over `(G, L^μ, L^Σ)`.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DataMatrix, ModelSpec};
use crate::rng::derive_seed;
use crate::sem::{fit_constrained, ColumnCoupling, FitResult, SemConfig};

/// ICL-BIC of the parameter-wise model.
pub fn icl_bic(cdll: f64, spec: ModelSpec, n: usize, p: usize) -> f64 {
    let (g, lm, ls) = (spec.g as f64, spec.l_mu as f64, spec.l_sigma as f64);
    let (n, p) = (n as f64, p as f64);
    cdll - (g - 1.0) / 2.0 * n.ln()
        - (lm + ls - 2.0) / 2.0 * p.ln()
        - g * (lm + ls) / 2.0 * (n * p).ln()
}

/// ICL-BIC of the traditional model: one column partition with `GL` means and
/// `GL` variances.
pub fn icl_bic_traditional(cdll: f64, g: usize, l: usize, n: usize, p: usize) -> f64 {
    let (gf, lf) = (g as f64, l as f64);
    let (n, p) = (n as f64, p as f64);
    cdll - (gf - 1.0) / 2.0 * n.ln()
        - (lf - 1.0) / 2.0 * p.ln()
        - (2.0 * gf * lf) / 2.0 * (n * p).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    pub start: ModelSpec,
    pub max: ModelSpec,
    pub fits_per_candidate: usize,
    pub sem: SemConfig,
    /// `Tied` searches the traditional model over `(G, L)`; `l_sigma` follows `l_mu`.
    pub coupling: ColumnCoupling,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            start: ModelSpec {
                g: 1,
                l_mu: 1,
                l_sigma: 1,
            },
            max: ModelSpec {
                g: 5,
                l_mu: 5,
                l_sigma: 5,
            },
            fits_per_candidate: 1,
            sem: SemConfig::default(),
            coupling: ColumnCoupling::Free,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        ModelSpec::new(self.start.g, self.start.l_mu, self.start.l_sigma)?;
        let (s, m) = (self.start, self.max);
        if s.g > m.g || s.l_mu > m.l_mu || s.l_sigma > m.l_sigma {
            return Err(Error::InvalidConfig(format!(
                "start {s} exceeds max {m} on some axis"
            )));
        }
        if self.fits_per_candidate == 0 {
            return Err(Error::InvalidConfig(
                "fits_per_candidate must be at least 1".into(),
            ));
        }
        if self.coupling == ColumnCoupling::Tied && s.l_mu != s.l_sigma {
            return Err(Error::InvalidConfig(
                "traditional search needs l_mu == l_sigma at the start".into(),
            ));
        }
        self.sem.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub cdll: f64,
    pub icl_bic: f64,
    pub free_parameters: usize,
    pub seed: u64,
    pub repairs: usize,
    pub label_switch_suspected: bool,
}

impl From<&FitResult> for FitSummary {
    fn from(f: &FitResult) -> Self {
        Self {
            cdll: f.cdll,
            icl_bic: f.icl_bic,
            free_parameters: f.free_parameters,
            seed: f.seed,
            repairs: f.repairs,
            label_switch_suspected: f.label_switch_suspected,
        }
    }
}

/// One fitted candidate. `icl_bic` is `None` when every fit failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Visited {
    pub spec: ModelSpec,
    pub icl_bic: Option<f64>,
    pub summary: Option<FitSummary>,
    pub error: Option<String>,
}

impl Visited {
    pub fn score(&self) -> f64 {
        self.icl_bic.unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub spec: ModelSpec,
    pub icl_bic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRecord {
    pub visited: Vec<Visited>,
    pub chosen: ModelSpec,
    pub chosen_icl_bic: f64,
    pub path: Vec<Step>,
    #[serde(skip)]
    pub best: Option<FitResult>,
}

/// Seed used for replicate `rep` of `spec` under a master seed.
pub fn candidate_seed(master: u64, spec: ModelSpec, rep: usize) -> u64 {
    let base = derive_seed(master, &[rep as u64]);
    derive_seed(
        base,
        &[spec.g as u64, spec.l_mu as u64, spec.l_sigma as u64],
    )
}

struct Candidate {
    visited: Visited,
    fit: Option<FitResult>,
}

fn fit_candidate(
    x: &DataMatrix,
    spec: ModelSpec,
    coupling: ColumnCoupling,
    sem: &SemConfig,
    fits: usize,
) -> Candidate {
    let mut best: Option<FitResult> = None;
    let mut last_err = None;
    for rep in 0..fits {
        let cfg = SemConfig {
            seed: candidate_seed(sem.seed, spec, rep),
            ..sem.clone()
        };
        match fit_constrained(x, spec, coupling, &cfg) {
            Ok(f) => {
                if best.as_ref().is_none_or(|b| f.icl_bic > b.icl_bic) {
                    best = Some(f);
                }
            }
            Err(e) => last_err = Some(e.to_string()),
        }
    }
    Candidate {
        visited: Visited {
            spec,
            icl_bic: best.as_ref().map(|f| f.icl_bic),
            summary: best.as_ref().map(FitSummary::from),
            error: if best.is_none() { last_err } else { None },
        },
        fit: best,
    }
}

fn fit_all(
    x: &DataMatrix,
    specs: &[ModelSpec],
    coupling: ColumnCoupling,
    sem: &SemConfig,
    fits: usize,
) -> Vec<Candidate> {
    specs
        .par_iter()
        .map(|&s| fit_candidate(x, s, coupling, sem, fits))
        .collect()
}

// First index of the maximal score; earlier entries win ties.
fn argmax(cands: &[Candidate]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, c) in cands.iter().enumerate() {
        if c.fit.is_none() {
            continue;
        }
        if best.is_none_or(|b| c.visited.score() > cands[b].visited.score()) {
            best = Some(k);
        }
    }
    best
}

/// Per-axis inclusive ranges for [`grid_search`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridRanges {
    pub g: RangeInclusive<usize>,
    pub l_mu: RangeInclusive<usize>,
    pub l_sigma: RangeInclusive<usize>,
}

impl GridRanges {
    pub fn cube(r: RangeInclusive<usize>) -> Self {
        Self {
            g: r.clone(),
            l_mu: r.clone(),
            l_sigma: r,
        }
    }

    /// Specs in lexicographic `(G, L^μ, L^Σ)` order. Under `Tied` the
    /// variance axis is ignored and follows `l_mu`.
    pub fn specs(&self, coupling: ColumnCoupling) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        for g in self.g.clone() {
            for l_mu in self.l_mu.clone() {
                match coupling {
                    ColumnCoupling::Free => {
                        for l_sigma in self.l_sigma.clone() {
                            out.push(ModelSpec { g, l_mu, l_sigma });
                        }
                    }
                    ColumnCoupling::Tied => out.push(ModelSpec {
                        g,
                        l_mu,
                        l_sigma: l_mu,
                    }),
                }
            }
        }
        out
    }
}

/// Exhaustive search over the Cartesian product of `ranges`.
pub fn grid_search(
    x: &DataMatrix,
    ranges: &GridRanges,
    sem: &SemConfig,
    coupling: ColumnCoupling,
    fits_per_candidate: usize,
) -> Result<SearchRecord> {
    sem.validate()?;
    let specs = ranges.specs(coupling);
    if specs.is_empty() {
        return Err(Error::InvalidConfig("grid ranges are empty".into()));
    }
    if specs
        .iter()
        .any(|s| s.g == 0 || s.l_mu == 0 || s.l_sigma == 0)
    {
        return Err(Error::InvalidConfig(
            "grid ranges must start at 1 or above".into(),
        ));
    }
    let mut cands = fit_all(x, &specs, coupling, sem, fits_per_candidate.max(1));
    let Some(k) = argmax(&cands) else {
        return Err(Error::DegenerateFit {
            spec: specs[0],
            reason: "every candidate in the grid failed".into(),
        });
    };
    let best = cands[k].fit.take();
    let chosen = cands[k].visited.spec;
    let chosen_icl_bic = cands[k].visited.score();
    Ok(SearchRecord {
        visited: cands.into_iter().map(|c| c.visited).collect(),
        chosen,
        chosen_icl_bic,
        path: vec![Step {
            spec: chosen,
            icl_bic: chosen_icl_bic,
        }],
        best,
    })
}

fn neighbours(s: ModelSpec, max: ModelSpec, coupling: ColumnCoupling) -> Vec<ModelSpec> {
    let mut out = Vec::with_capacity(3);
    if s.g < max.g {
        out.push(ModelSpec { g: s.g + 1, ..s });
    }
    match coupling {
        ColumnCoupling::Free => {
            if s.l_mu < max.l_mu {
                out.push(ModelSpec {
                    l_mu: s.l_mu + 1,
                    ..s
                });
            }
            if s.l_sigma < max.l_sigma {
                out.push(ModelSpec {
                    l_sigma: s.l_sigma + 1,
                    ..s
                });
            }
        }
        ColumnCoupling::Tied => {
            if s.l_mu < max.l_mu.min(max.l_sigma) {
                out.push(ModelSpec {
                    l_mu: s.l_mu + 1,
                    l_sigma: s.l_mu + 1,
                    ..s
                });
            }
        }
    }
    out
}

/// Greedy forward search: from the incumbent, fit each single-axis `+1`
/// neighbour and move to the best one while it improves ICL-BIC.
///
/// Ties between neighbours go to the `G` axis, then `L^μ`, then `L^Σ`.
pub fn forward_search(x: &DataMatrix, cfg: &SearchConfig) -> Result<SearchRecord> {
    cfg.validate()?;
    let fits = cfg.fits_per_candidate;
    let mut first = fit_all(x, &[cfg.start], cfg.coupling, &cfg.sem, fits);
    let start = first.pop().expect("one candidate");
    let Some(mut incumbent_fit) = start.fit else {
        return Err(Error::DegenerateFit {
            spec: cfg.start,
            reason: start
                .visited
                .error
                .unwrap_or_else(|| "start spec failed".into()),
        });
    };
    let mut incumbent = start.visited.clone();
    let mut visited = vec![start.visited];
    let mut path = vec![Step {
        spec: incumbent.spec,
        icl_bic: incumbent.score(),
    }];

    loop {
        let specs = neighbours(incumbent.spec, cfg.max, cfg.coupling);
        if specs.is_empty() {
            break;
        }
        let mut cands = fit_all(x, &specs, cfg.coupling, &cfg.sem, fits);
        let best = argmax(&cands);
        let accepted = best.filter(|&k| cands[k].visited.score() > incumbent.score());
        let next = accepted.map(|k| (cands[k].visited.clone(), cands[k].fit.take()));
        visited.extend(cands.into_iter().map(|c| c.visited));
        let Some((v, fit)) = next else {
            break;
        };
        incumbent = v;
        incumbent_fit = fit.expect("accepted candidate has a fit");
        path.push(Step {
            spec: incumbent.spec,
            icl_bic: incumbent.score(),
        });
    }

    Ok(SearchRecord {
        visited,
        chosen: incumbent.spec,
        chosen_icl_bic: incumbent.score(),
        path,
        best: Some(incumbent_fit),
    })
}
