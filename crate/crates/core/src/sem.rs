//! SEM-Gibbs estimation.
//!
//! Each sweep draws the row partition, then the mean column partition, then
//! the variance column partition from their full conditionals and refits the
//! parameters in closed form. After burn-in the parameter draws are averaged;
//! the final partitions are the most frequent labels over extra SE sweeps run
//! at the averaged parameters.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Axis, Error, Result};
use crate::model::{
    cells_loglik, count_free_parameters, count_free_parameters_traditional, mixing_loglik,
    BlockTables, DataMatrix, ModelSpec, Params, Partitions, VARIANCE_FLOOR,
};
use crate::rng::{normalize_log_weights, sample_categorical, Phase, Streams};
use crate::selection::{icl_bic, icl_bic_traditional};

/// Starting partitions for the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Uniform random labels everywhere.
    #[default]
    RandomPartitions,
    /// Rows from a short Lloyd k-means run, columns uniform.
    KMeansRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SemConfig {
    pub burn_in: usize,
    pub iterations: usize,
    pub final_partition_runs: usize,
    pub seed: u64,
    pub init: Init,
    /// Redraws of a partition that left a cluster empty before one member is
    /// moved into it.
    pub max_resample_attempts: usize,
}

impl Default for SemConfig {
    fn default() -> Self {
        Self {
            burn_in: 20,
            iterations: 100,
            final_partition_runs: 20,
            seed: 0,
            init: Init::RandomPartitions,
            max_resample_attempts: 50,
        }
    }
}

impl SemConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.final_partition_runs == 0 {
            return Err(Error::InvalidConfig(
                "final_partition_runs must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn total_sweeps(&self) -> usize {
        self.burn_in + self.iterations
    }
}

/// How the two column partitions relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnCoupling {
    /// Independent mean and variance partitions.
    Free,
    /// One column partition shared by means and variances (classical LBM).
    Tied,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub theta: Params,
    pub cdll: f64,
}

/// Parameter draws of every chain sweep, burn-in included.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ChainTrace {
    pub entries: Vec<TraceEntry>,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Empirical label frequencies over the final SE sweeps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipProbs {
    pub rows: Vec<Vec<f64>>,
    pub columns_mu: Vec<Vec<f64>>,
    pub columns_sigma: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub coupling: ColumnCoupling,
    pub theta_hat: Params,
    pub partitions: Partitions,
    pub membership_probs: MembershipProbs,
    pub cdll: f64,
    pub icl_bic: f64,
    pub free_parameters: usize,
    /// Set when the ordering of block means changed after burn-in.
    pub label_switch_suspected: bool,
    /// Number of times a member was moved into an empty cluster.
    pub repairs: usize,
    pub seed: u64,
    #[serde(skip)]
    pub trace: ChainTrace,
}

fn conditional_error(axis: Axis, index: usize) -> Error {
    Error::DegeneratePosterior { axis, index }
}

// Sufficient statistics (count, sum, sum of squares) over groups of cells.
#[derive(Debug, Clone)]
struct Moments {
    s0: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self {
            s0: vec![0.0; k],
            s1: vec![0.0; k],
            s2: vec![0.0; k],
        }
    }

    #[inline]
    fn add(&mut self, k: usize, v: f64) {
        self.s0[k] += 1.0;
        self.s1[k] += v;
        self.s2[k] += v * v;
    }

    // -½ Σ [log σ² + (x − μ)²/σ²] over the cells in group k
    #[inline]
    fn kernel(&self, k: usize, mu: f64, log_var: f64, inv_var: f64) -> f64 {
        let c = self.s0[k];
        if c == 0.0 {
            return 0.0;
        }
        let sq = self.s2[k] - 2.0 * mu * self.s1[k] + c * mu * mu;
        -0.5 * (c * log_var + sq.max(0.0) * inv_var)
    }
}

fn row_probs(
    row: &[f64],
    w_mu: &[usize],
    w_sigma: &[usize],
    t: &BlockTables,
    ln_pi: &[f64],
) -> Option<Vec<f64>> {
    let (lm, ls) = (t.l_mu, t.l_sigma);
    let mut m = Moments::new(lm * ls);
    for (j, &v) in row.iter().enumerate() {
        m.add(w_mu[j] * ls + w_sigma[j], v);
    }
    let mut out: Vec<f64> = ln_pi.to_vec();
    for (g, o) in out.iter_mut().enumerate() {
        for a in 0..lm {
            let mu = t.mu[g * lm + a];
            for b in 0..ls {
                let s = g * ls + b;
                *o += m.kernel(a * ls + b, mu, t.log_var[s], t.inv_var[s]);
            }
        }
    }
    normalize_log_weights(&mut out).then_some(out)
}

fn column_moments(col: &[f64], z: &[usize], g: usize) -> Moments {
    let mut m = Moments::new(g);
    for (&v, &k) in col.iter().zip(z) {
        m.add(k, v);
    }
    m
}

#[derive(Clone, Copy)]
enum ColumnTarget {
    Mu { w_sigma: usize },
    Sigma { w_mu: usize },
    Tied,
}

fn column_probs(
    m: &Moments,
    target: ColumnTarget,
    t: &BlockTables,
    ln_rho: &[f64],
    g: usize,
) -> Option<Vec<f64>> {
    let mut out: Vec<f64> = ln_rho.to_vec();
    for (l, o) in out.iter_mut().enumerate() {
        for k in 0..g {
            let (a, b) = match target {
                ColumnTarget::Mu { w_sigma } => (l, w_sigma),
                ColumnTarget::Sigma { w_mu } => (w_mu, l),
                ColumnTarget::Tied => (l, l),
            };
            let s = k * t.l_sigma + b;
            *o += m.kernel(k, t.mu[k * t.l_mu + a], t.log_var[s], t.inv_var[s]);
        }
    }
    normalize_log_weights(&mut out).then_some(out)
}

fn ln_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.ln()).collect()
}

fn check_index(axis: Axis, index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(Error::LabelOutOfRange {
            axis,
            label: index,
            clusters: len,
        });
    }
    Ok(())
}

fn check_col_labels(axis: Axis, labels: &[usize], p: usize, clusters: usize) -> Result<()> {
    if labels.len() != p {
        return Err(Error::DimensionMismatch {
            axis,
            expected: p,
            found: labels.len(),
        });
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= clusters) {
        return Err(Error::LabelOutOfRange {
            axis,
            label,
            clusters,
        });
    }
    Ok(())
}

/// `P(z_i = g | x, w^μ, w^Σ; θ)` for every `g`.
pub fn se_row_probabilities(
    x: &DataMatrix,
    w_mu: &[usize],
    w_sigma: &[usize],
    theta: &Params,
    i: usize,
) -> Result<Vec<f64>> {
    let spec = theta.spec();
    check_col_labels(Axis::ColumnsMu, w_mu, x.p(), spec.l_mu)?;
    check_col_labels(Axis::ColumnsSigma, w_sigma, x.p(), spec.l_sigma)?;
    check_index(Axis::Rows, i, x.n())?;
    let t = BlockTables::new(theta);
    row_probs(x.row(i), w_mu, w_sigma, &t, &ln_vec(theta.pi()))
        .ok_or_else(|| conditional_error(Axis::Rows, i))
}

fn column_probabilities(
    x: &DataMatrix,
    z: &[usize],
    theta: &Params,
    j: usize,
    target: ColumnTarget,
    ln_rho: &[f64],
    axis: Axis,
) -> Result<Vec<f64>> {
    let spec = theta.spec();
    if z.len() != x.n() {
        return Err(Error::DimensionMismatch {
            axis: Axis::Rows,
            expected: x.n(),
            found: z.len(),
        });
    }
    if let Some(&label) = z.iter().find(|&&g| g >= spec.g) {
        return Err(Error::LabelOutOfRange {
            axis: Axis::Rows,
            label,
            clusters: spec.g,
        });
    }
    check_index(Axis::Columns, j, x.p())?;
    let t = BlockTables::new(theta);
    let m = column_moments(x.column(j), z, spec.g);
    column_probs(&m, target, &t, ln_rho, spec.g).ok_or_else(|| conditional_error(axis, j))
}

/// `P(w^μ_j = l | x, z, w^Σ; θ)` for every mean column cluster `l`.
pub fn se_col_mu_probabilities(
    x: &DataMatrix,
    z: &[usize],
    w_sigma: &[usize],
    theta: &Params,
    j: usize,
) -> Result<Vec<f64>> {
    check_col_labels(Axis::ColumnsSigma, w_sigma, x.p(), theta.spec().l_sigma)?;
    check_index(Axis::Columns, j, x.p())?;
    column_probabilities(
        x,
        z,
        theta,
        j,
        ColumnTarget::Mu {
            w_sigma: w_sigma[j],
        },
        &ln_vec(theta.rho_mu()),
        Axis::ColumnsMu,
    )
}

/// `P(w^Σ_j = l | x, z, w^μ; θ)` for every variance column cluster `l`.
pub fn se_col_sigma_probabilities(
    x: &DataMatrix,
    z: &[usize],
    w_mu: &[usize],
    theta: &Params,
    j: usize,
) -> Result<Vec<f64>> {
    check_col_labels(Axis::ColumnsMu, w_mu, x.p(), theta.spec().l_mu)?;
    check_index(Axis::Columns, j, x.p())?;
    column_probabilities(
        x,
        z,
        theta,
        j,
        ColumnTarget::Sigma { w_mu: w_mu[j] },
        &ln_vec(theta.rho_sigma()),
        Axis::ColumnsSigma,
    )
}

/// Tied-column conditional: the column's mean and variance clusters coincide.
pub(crate) fn se_col_tied_probabilities(
    x: &DataMatrix,
    z: &[usize],
    theta: &Params,
    j: usize,
) -> Result<Vec<f64>> {
    column_probabilities(
        x,
        z,
        theta,
        j,
        ColumnTarget::Tied,
        &ln_vec(theta.rho_mu()),
        Axis::Columns,
    )
}

fn counts(labels: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0usize; k];
    for &l in labels {
        c[l] += 1;
    }
    c
}

// Coordinate ascent on (mu, sigma2) stops once neither moves by more than
// this relative amount.
const M_STEP_TOL: f64 = 1e-14;
const M_STEP_MAX_ROUNDS: usize = 1000;

/// Parameter update for fixed partitions: the maximiser of the complete-data
/// log-likelihood.
///
/// Proportions are cluster frequencies. A mean block `(g, l^μ)` whose cells
/// all share one variance cluster gets the plain block mean; when it spans
/// several variance clusters the optimal mean is precision weighted, which
/// couples μ and σ². The two conditional updates are then alternated to a
/// fixed point, starting from the plain block means.
pub fn m_step(x: &DataMatrix, parts: &Partitions, spec: ModelSpec) -> Result<Params> {
    parts.check(spec, x.n(), x.p())?;
    let (n, p) = (x.n(), x.p());
    let row_counts = counts(&parts.z, spec.g);
    let mu_counts = counts(&parts.w_mu, spec.l_mu);
    let sigma_counts = counts(&parts.w_sigma, spec.l_sigma);
    for (axis, c) in [
        (Axis::Rows, &row_counts),
        (Axis::ColumnsMu, &mu_counts),
        (Axis::ColumnsSigma, &sigma_counts),
    ] {
        if let Some(index) = c.iter().position(|&k| k == 0) {
            return Err(Error::EmptyCluster { axis, index });
        }
    }

    // cells, mean and centred sum of squares per (g, l^μ, l^Σ) triple
    let (g_n, lm, ls) = (spec.g, spec.l_mu, spec.l_sigma);
    let tri = |g: usize, a: usize, b: usize| (g * lm + a) * ls + b;
    let mut cols = vec![0usize; lm * ls];
    for j in 0..p {
        cols[parts.w_mu[j] * ls + parts.w_sigma[j]] += 1;
    }
    let cells: Vec<f64> = (0..g_n * lm * ls)
        .map(|t| (row_counts[t / (lm * ls)] * cols[t % (lm * ls)]) as f64)
        .collect();
    let mut sums = vec![0.0; g_n * lm * ls];
    for i in 0..n {
        let g = parts.z[i];
        for (j, &v) in x.row(i).iter().enumerate() {
            sums[tri(g, parts.w_mu[j], parts.w_sigma[j])] += v;
        }
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&cells)
        .map(|(&s, &c)| if c > 0.0 { s / c } else { 0.0 })
        .collect();
    let mut m2 = vec![0.0; g_n * lm * ls];
    for i in 0..n {
        let g = parts.z[i];
        for (j, &v) in x.row(i).iter().enumerate() {
            let t = tri(g, parts.w_mu[j], parts.w_sigma[j]);
            let d = v - means[t];
            m2[t] += d * d;
        }
    }

    let block_mean = |g: usize, a: usize| -> f64 {
        let occupied: Vec<usize> = (0..ls).filter(|&b| cells[tri(g, a, b)] > 0.0).collect();
        if let [b] = occupied[..] {
            return means[tri(g, a, b)];
        }
        let s: f64 = occupied.iter().map(|&b| sums[tri(g, a, b)]).sum();
        s / (row_counts[g] * mu_counts[a]) as f64
    };
    let mut mu: Vec<Vec<f64>> = (0..g_n)
        .map(|g| (0..lm).map(|a| block_mean(g, a)).collect())
        .collect();
    let variances = |mu: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..g_n)
            .map(|g| {
                (0..ls)
                    .map(|b| {
                        let ss: f64 = (0..lm)
                            .map(|a| {
                                let t = tri(g, a, b);
                                let d = means[t] - mu[g][a];
                                m2[t] + cells[t] * d * d
                            })
                            .sum();
                        (ss / (row_counts[g] * sigma_counts[b]) as f64).max(VARIANCE_FLOOR)
                    })
                    .collect()
            })
            .collect()
    };
    let mut sigma2 = variances(&mu);

    let coupled: Vec<(usize, usize)> = (0..g_n)
        .flat_map(|g| (0..lm).map(move |a| (g, a)))
        .filter(|&(g, a)| (0..ls).filter(|&b| cells[tri(g, a, b)] > 0.0).count() > 1)
        .collect();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..if coupled.is_empty() {
        0
    } else {
        M_STEP_MAX_ROUNDS
    } {
        let mut moved = 0.0f64;
        for &(g, a) in &coupled {
            let (mut num, mut den) = (0.0, 0.0);
            for (b, &var) in sigma2[g].iter().enumerate() {
                let t = tri(g, a, b);
                let w = cells[t] / var;
                num += w * means[t];
                den += w;
            }
            let next = num / den;
            moved = moved.max(rel(next, mu[g][a]));
            mu[g][a] = next;
        }
        let next = variances(&mu);
        for (old, new) in sigma2.iter().flatten().zip(next.iter().flatten()) {
            moved = moved.max(rel(*old, *new));
        }
        sigma2 = next;
        if moved <= M_STEP_TOL {
            break;
        }
    }

    let prop = |c: &[usize], total: usize| c.iter().map(|&k| k as f64 / total as f64).collect();
    Params::new(
        prop(&row_counts, n),
        prop(&mu_counts, p),
        prop(&sigma_counts, p),
        mu,
        sigma2,
    )
}

pub(crate) fn chain_cdll(
    coupling: ColumnCoupling,
    x: &DataMatrix,
    parts: &Partitions,
    theta: &Params,
) -> f64 {
    let cells = cells_loglik(x, parts, theta);
    let mixing = mixing_loglik(parts, theta);
    match coupling {
        ColumnCoupling::Free => mixing + cells,
        // one column partition carries a single ρ term
        ColumnCoupling::Tied => {
            let extra: f64 = parts
                .w_sigma
                .iter()
                .map(|&l| theta.rho_sigma()[l].ln())
                .sum();
            mixing - extra + cells
        }
    }
}

struct Chain<'a> {
    x: &'a DataMatrix,
    spec: ModelSpec,
    coupling: ColumnCoupling,
    streams: Streams,
    max_attempts: usize,
    repairs: usize,
}

impl Chain<'_> {
    fn degenerate(&self, reason: impl Into<String>) -> Error {
        Error::DegenerateFit {
            spec: self.spec,
            reason: reason.into(),
        }
    }

    fn draw(
        &mut self,
        probs: &[Vec<f64>],
        k: usize,
        sweep: u64,
        phase: Phase,
        repair: bool,
    ) -> Result<Vec<usize>> {
        let attempts = if repair { self.max_attempts + 1 } else { 1 };
        let mut labels = Vec::new();
        for attempt in 0..attempts {
            let stream = self.streams.sweep(sweep, phase, attempt as u32);
            labels = probs
                .iter()
                .enumerate()
                .map(|(e, pr)| sample_categorical(pr, stream.uniform(e)))
                .collect();
            if !repair || counts(&labels, k).iter().all(|&c| c > 0) {
                return Ok(labels);
            }
        }
        self.repair(&mut labels, k, sweep, phase)?;
        Ok(labels)
    }

    // Moves one uniformly chosen member of a cluster with at least two members
    // into each empty cluster.
    fn repair(&mut self, labels: &mut [usize], k: usize, sweep: u64, phase: Phase) -> Result<()> {
        let stream = self.streams.sweep(sweep, Phase::Repair, phase as u32);
        let mut c = counts(labels, k);
        for empty in 0..k {
            if c[empty] > 0 {
                continue;
            }
            let donors: Vec<usize> = (0..labels.len()).filter(|&e| c[labels[e]] >= 2).collect();
            if donors.is_empty() {
                return Err(self.degenerate(format!("cannot fill {k} clusters")));
            }
            let pick = donors
                [((stream.uniform(empty) * donors.len() as f64) as usize).min(donors.len() - 1)];
            c[labels[pick]] -= 1;
            labels[pick] = empty;
            c[empty] += 1;
            self.repairs += 1;
        }
        Ok(())
    }

    fn sweep_rows(
        &mut self,
        parts: &Partitions,
        theta: &Params,
        sweep: u64,
        repair: bool,
    ) -> Result<Vec<usize>> {
        let t = BlockTables::new(theta);
        let ln_pi = ln_vec(theta.pi());
        let x = self.x;
        let probs: Vec<Vec<f64>> = (0..x.n())
            .into_par_iter()
            .map(|i| {
                row_probs(x.row(i), &parts.w_mu, &parts.w_sigma, &t, &ln_pi)
                    .ok_or_else(|| conditional_error(Axis::Rows, i))
            })
            .collect::<Result<_>>()?;
        self.draw(&probs, self.spec.g, sweep, Phase::Rows, repair)
    }

    #[allow(clippy::too_many_arguments)]
    fn sweep_columns(
        &mut self,
        theta: &Params,
        moments: &[Moments],
        target: impl Fn(usize) -> ColumnTarget + Sync,
        ln_rho: &[f64],
        phase: Phase,
        sweep: u64,
        repair: bool,
    ) -> Result<Vec<usize>> {
        let t = BlockTables::new(theta);
        let g = self.spec.g;
        let axis = match phase {
            Phase::ColumnsMu => Axis::ColumnsMu,
            Phase::ColumnsSigma => Axis::ColumnsSigma,
            _ => Axis::Columns,
        };
        let probs: Vec<Vec<f64>> = moments
            .par_iter()
            .enumerate()
            .map(|(j, m)| {
                column_probs(m, target(j), &t, ln_rho, g).ok_or_else(|| conditional_error(axis, j))
            })
            .collect::<Result<_>>()?;
        self.draw(&probs, ln_rho.len(), sweep, phase, repair)
    }

    /// One full SE step: z, then w^μ, then w^Σ (or the tied column partition).
    fn se_step(
        &mut self,
        parts: &Partitions,
        theta: &Params,
        sweep: u64,
        repair: bool,
    ) -> Result<Partitions> {
        let z = self.sweep_rows(parts, theta, sweep, repair)?;
        let x = self.x;
        let moments: Vec<Moments> = (0..x.p())
            .into_par_iter()
            .map(|j| column_moments(x.column(j), &z, self.spec.g))
            .collect();
        match self.coupling {
            ColumnCoupling::Free => {
                let ws = parts.w_sigma.clone();
                let w_mu = self.sweep_columns(
                    theta,
                    &moments,
                    |j| ColumnTarget::Mu { w_sigma: ws[j] },
                    &ln_vec(theta.rho_mu()),
                    Phase::ColumnsMu,
                    sweep,
                    repair,
                )?;
                let wm = w_mu.clone();
                let w_sigma = self.sweep_columns(
                    theta,
                    &moments,
                    |j| ColumnTarget::Sigma { w_mu: wm[j] },
                    &ln_vec(theta.rho_sigma()),
                    Phase::ColumnsSigma,
                    sweep,
                    repair,
                )?;
                Ok(Partitions { z, w_mu, w_sigma })
            }
            ColumnCoupling::Tied => {
                let w = self.sweep_columns(
                    theta,
                    &moments,
                    |_| ColumnTarget::Tied,
                    &ln_vec(theta.rho_mu()),
                    Phase::ColumnsTied,
                    sweep,
                    repair,
                )?;
                Ok(Partitions {
                    z,
                    w_mu: w.clone(),
                    w_sigma: w,
                })
            }
        }
    }

    fn uniform_labels(&mut self, len: usize, k: usize, entity_offset: usize) -> Result<Vec<usize>> {
        let stream = self.streams.sweep(0, Phase::Init, 0);
        let mut labels: Vec<usize> = (0..len)
            .map(|e| ((stream.uniform(entity_offset + e) * k as f64) as usize).min(k - 1))
            .collect();
        self.repair(&mut labels, k, 0, Phase::Init)?;
        Ok(labels)
    }

    fn kmeans_rows(&mut self) -> Result<Vec<usize>> {
        let x = self.x;
        let (n, p, g) = (x.n(), x.p(), self.spec.g);
        let mut rng = self.streams.sweep(0, Phase::KMeans, 0).entity(0);
        let picks = rand::seq::index::sample(&mut rng, n, g);
        let mut centers: Vec<Vec<f64>> = picks.iter().map(|i| x.row(i).to_vec()).collect();
        let mut z = vec![0usize; n];
        for _ in 0..10 {
            for (i, zi) in z.iter_mut().enumerate() {
                let row = x.row(i);
                let dist = |c: &Vec<f64>| {
                    row.iter()
                        .zip(c)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                };
                let mut best = (0, f64::INFINITY);
                for (k, c) in centers.iter().enumerate() {
                    let d = dist(c);
                    if d < best.1 {
                        best = (k, d);
                    }
                }
                *zi = best.0;
            }
            let c = counts(&z, g);
            let mut next = vec![vec![0.0; p]; g];
            for (i, &k) in z.iter().enumerate() {
                for (acc, v) in next[k].iter_mut().zip(x.row(i)) {
                    *acc += v;
                }
            }
            for k in 0..g {
                if c[k] > 0 {
                    centers[k] = next[k].iter().map(|s| s / c[k] as f64).collect();
                }
            }
        }
        self.repair(&mut z, g, 0, Phase::KMeans)?;
        Ok(z)
    }

    fn initial_partitions(&mut self, init: Init) -> Result<Partitions> {
        let (n, p) = (self.x.n(), self.x.p());
        let z = match init {
            Init::RandomPartitions => self.uniform_labels(n, self.spec.g, 0)?,
            Init::KMeansRows => self.kmeans_rows()?,
        };
        let w_mu = self.uniform_labels(p, self.spec.l_mu, n)?;
        let w_sigma = match self.coupling {
            ColumnCoupling::Free => self.uniform_labels(p, self.spec.l_sigma, n + p)?,
            ColumnCoupling::Tied => w_mu.clone(),
        };
        Ok(Partitions { z, w_mu, w_sigma })
    }
}

// Running arithmetic mean; exact when every sample is identical.
struct ParamMean {
    count: f64,
    pi: Vec<f64>,
    rho_mu: Vec<f64>,
    rho_sigma: Vec<f64>,
    mu: Vec<Vec<f64>>,
    sigma2: Vec<Vec<f64>>,
}

impl ParamMean {
    fn new(spec: ModelSpec) -> Self {
        Self {
            count: 0.0,
            pi: vec![0.0; spec.g],
            rho_mu: vec![0.0; spec.l_mu],
            rho_sigma: vec![0.0; spec.l_sigma],
            mu: vec![vec![0.0; spec.l_mu]; spec.g],
            sigma2: vec![vec![0.0; spec.l_sigma]; spec.g],
        }
    }

    fn push(&mut self, theta: &Params) {
        self.count += 1.0;
        let k = self.count;
        let upd = |acc: &mut [f64], v: &[f64]| {
            for (a, b) in acc.iter_mut().zip(v) {
                *a += (b - *a) / k;
            }
        };
        upd(&mut self.pi, theta.pi());
        upd(&mut self.rho_mu, theta.rho_mu());
        upd(&mut self.rho_sigma, theta.rho_sigma());
        for (a, b) in self.mu.iter_mut().zip(theta.mu()) {
            upd(a, b);
        }
        for (a, b) in self.sigma2.iter_mut().zip(theta.sigma2()) {
            upd(a, b);
        }
    }

    fn finish(self) -> Result<Params> {
        Params::new(self.pi, self.rho_mu, self.rho_sigma, self.mu, self.sigma2)
    }
}

fn ordering(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    idx
}

fn means_order(theta: &Params) -> (Vec<usize>, Vec<usize>) {
    let spec = theta.spec();
    let row_avg: Vec<f64> = theta
        .mu()
        .iter()
        .map(|r| r.iter().sum::<f64>() / spec.l_mu as f64)
        .collect();
    let col_avg: Vec<f64> = (0..spec.l_mu)
        .map(|l| theta.mu().iter().map(|r| r[l]).sum::<f64>() / spec.g as f64)
        .collect();
    (ordering(&row_avg), ordering(&col_avg))
}

fn label_switch_suspected(post: &[TraceEntry]) -> bool {
    let Some(first) = post.first() else {
        return false;
    };
    let reference = means_order(&first.theta);
    post.iter().any(|e| means_order(&e.theta) != reference)
}

fn argmax_lowest(freq: &[f64]) -> usize {
    let mut best = 0;
    for (k, &f) in freq.iter().enumerate() {
        if f > freq[best] {
            best = k;
        }
    }
    best
}

fn frequencies(counts: &[Vec<usize>], runs: usize) -> Vec<Vec<f64>> {
    counts
        .iter()
        .map(|c| c.iter().map(|&k| k as f64 / runs as f64).collect())
        .collect()
}

/// Fits the parameter-wise model.
pub fn fit(x: &DataMatrix, spec: ModelSpec, cfg: &SemConfig) -> Result<FitResult> {
    fit_constrained(x, spec, ColumnCoupling::Free, cfg)
}

/// Fits with an explicit column coupling. `Tied` requires `l_mu == l_sigma`.
pub fn fit_constrained(
    x: &DataMatrix,
    spec: ModelSpec,
    coupling: ColumnCoupling,
    cfg: &SemConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    spec.check_feasible(x.n(), x.p())?;
    if coupling == ColumnCoupling::Tied && spec.l_mu != spec.l_sigma {
        return Err(Error::InvalidSpec {
            spec,
            reason: "tied columns need equal mean and variance cluster counts".into(),
        });
    }

    let mut chain = Chain {
        x,
        spec,
        coupling,
        streams: Streams::new(cfg.seed),
        max_attempts: cfg.max_resample_attempts,
        repairs: 0,
    };

    let mut parts = chain.initial_partitions(cfg.init)?;
    let mut theta = m_step(x, &parts, spec)?;
    let mut trace = ChainTrace::default();
    let mut mean = ParamMean::new(spec);

    for q in 0..cfg.total_sweeps() {
        parts = chain.se_step(&parts, &theta, q as u64 + 1, true)?;
        theta = m_step(x, &parts, spec)?;
        let cdll = chain_cdll(coupling, x, &parts, &theta);
        if !cdll.is_finite() {
            return Err(chain.degenerate("complete-data log-likelihood is not finite"));
        }
        if q >= cfg.burn_in {
            mean.push(&theta);
        }
        trace.entries.push(TraceEntry {
            iteration: q,
            theta: theta.clone(),
            cdll,
        });
    }
    let theta_hat = mean.finish()?;

    let runs = cfg.final_partition_runs;
    let mut row_counts = vec![vec![0usize; spec.g]; x.n()];
    let mut mu_counts = vec![vec![0usize; spec.l_mu]; x.p()];
    let mut sigma_counts = vec![vec![0usize; spec.l_sigma]; x.p()];
    for r in 0..runs {
        let sweep = (cfg.total_sweeps() + 1 + r) as u64;
        parts = chain.se_step(&parts, &theta_hat, sweep, false)?;
        for (c, &l) in row_counts.iter_mut().zip(&parts.z) {
            c[l] += 1;
        }
        for (c, &l) in mu_counts.iter_mut().zip(&parts.w_mu) {
            c[l] += 1;
        }
        for (c, &l) in sigma_counts.iter_mut().zip(&parts.w_sigma) {
            c[l] += 1;
        }
    }
    let membership_probs = MembershipProbs {
        rows: frequencies(&row_counts, runs),
        columns_mu: frequencies(&mu_counts, runs),
        columns_sigma: frequencies(&sigma_counts, runs),
    };
    let map = |f: &[Vec<f64>]| f.iter().map(|r| argmax_lowest(r)).collect::<Vec<_>>();
    let w_mu = map(&membership_probs.columns_mu);
    let partitions = Partitions {
        z: map(&membership_probs.rows),
        w_sigma: match coupling {
            ColumnCoupling::Free => map(&membership_probs.columns_sigma),
            ColumnCoupling::Tied => w_mu.clone(),
        },
        w_mu,
    };

    let cdll = chain_cdll(coupling, x, &partitions, &theta_hat);
    let (icl, free_parameters) = match coupling {
        ColumnCoupling::Free => (
            icl_bic(cdll, spec, x.n(), x.p()),
            count_free_parameters(spec),
        ),
        ColumnCoupling::Tied => (
            icl_bic_traditional(cdll, spec.g, spec.l_mu, x.n(), x.p()),
            count_free_parameters_traditional(spec.g, spec.l_mu),
        ),
    };

    Ok(FitResult {
        spec,
        coupling,
        label_switch_suspected: label_switch_suspected(&trace.entries[cfg.burn_in..]),
        theta_hat,
        partitions,
        membership_probs,
        cdll,
        icl_bic: icl,
        free_parameters,
        repairs: chain.repairs,
        seed: cfg.seed,
        trace,
    })
}
