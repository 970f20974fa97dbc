//! Domain types for the parameter-wise Gaussian latent block model.
//!
//! Every cell `x_ij` is Gaussian with a mean chosen by the pair (row cluster,
//! mean column cluster) and a variance chosen by the pair (row cluster,
//! variance column cluster). Partitions are stored as label vectors; the
//! one-hot indicator `z_ig` is `z[i] == g`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};

/// Lower bound applied to every block variance.
pub const VARIANCE_FLOOR: f64 = 1e-8;

/// `0.5 * ln(2π)`.
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

const SIMPLEX_TOL: f64 = 1e-12;

/// Dense `n × p` matrix of observations, rows are individuals.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    rows: Vec<f64>,
    // column-major copy so column sweeps read contiguous memory
    cols: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values.
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::EmptyData { n, p });
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                axis: Axis::Rows,
                expected: n * p,
                found: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / p,
                col: k % p,
            });
        }
        let mut cols = vec![0.0; n * p];
        for i in 0..n {
            for j in 0..p {
                cols[j * n + i] = values[i * p + j];
            }
        }
        Ok(Self {
            n,
            p,
            rows: values,
            cols,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * p);
        for r in rows {
            if r.len() != p {
                return Err(Error::DimensionMismatch {
                    axis: Axis::Columns,
                    expected: p,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(n, p, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.p + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.p..(i + 1) * self.p]
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    /// Row-major view of all values.
    pub fn values(&self) -> &[f64] {
        &self.rows
    }

    /// Per-column z-scores. Constant columns are centred but not scaled.
    pub fn standardized(&self) -> Self {
        let mut out = self.rows.clone();
        for j in 0..self.p {
            let col = self.column(j);
            let mean = col.iter().sum::<f64>() / self.n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.n as f64;
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            for i in 0..self.n {
                out[i * self.p + j] = (self.rows[i * self.p + j] - mean) / sd;
            }
        }
        Self::new(self.n, self.p, out).expect("standardized values stay finite")
    }
}

/// Cluster counts `(G, L^μ, L^Σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelSpec {
    pub g: usize,
    pub l_mu: usize,
    pub l_sigma: usize,
}

impl ModelSpec {
    pub fn new(g: usize, l_mu: usize, l_sigma: usize) -> Result<Self> {
        let spec = Self { g, l_mu, l_sigma };
        if g == 0 || l_mu == 0 || l_sigma == 0 {
            return Err(Error::InvalidSpec {
                spec,
                reason: "every cluster count must be at least 1".into(),
            });
        }
        Ok(spec)
    }

    /// Checks that the spec can be fitted on an `n × p` matrix.
    pub fn check_feasible(&self, n: usize, p: usize) -> Result<()> {
        let reason = if self.g == 0 || self.l_mu == 0 || self.l_sigma == 0 {
            "every cluster count must be at least 1".to_string()
        } else if self.g > n {
            format!("G = {} exceeds the {n} rows", self.g)
        } else if self.l_mu > p || self.l_sigma > p {
            format!("column clusters exceed the {p} columns")
        } else {
            return Ok(());
        };
        Err(Error::InvalidSpec {
            spec: *self,
            reason,
        })
    }

    pub fn clusters(&self, axis: Axis) -> usize {
        match axis {
            Axis::Rows => self.g,
            Axis::ColumnsMu | Axis::Columns => self.l_mu,
            Axis::ColumnsSigma => self.l_sigma,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.g, self.l_mu, self.l_sigma)
    }
}

/// Model parameters `(π, ρ^μ, ρ^Σ, μ, σ²)`.
///
/// `mu` is `G × L^μ` and `sigma2` is `G × L^Σ`, both indexed `[g][l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pi: Vec<f64>,
    rho_mu: Vec<f64>,
    rho_sigma: Vec<f64>,
    mu: Vec<Vec<f64>>,
    sigma2: Vec<Vec<f64>>,
}

fn check_simplex(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidParams(format!("{name} is empty")));
    }
    if let Some(bad) = v.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::InvalidParams(format!(
            "{name} has entry {bad} outside (0, 1]"
        )));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidParams(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

fn check_block(name: &str, m: &[Vec<f64>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows {
        return Err(Error::InvalidParams(format!(
            "{name} has {} rows, expected {rows}",
            m.len()
        )));
    }
    for r in m {
        if r.len() != cols {
            return Err(Error::InvalidParams(format!(
                "{name} has a row of length {}, expected {cols}",
                r.len()
            )));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "{name} has a non-finite entry"
            )));
        }
    }
    Ok(())
}

impl Params {
    pub fn new(
        pi: Vec<f64>,
        rho_mu: Vec<f64>,
        rho_sigma: Vec<f64>,
        mu: Vec<Vec<f64>>,
        sigma2: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_simplex("pi", &pi)?;
        check_simplex("rho_mu", &rho_mu)?;
        check_simplex("rho_sigma", &rho_sigma)?;
        check_block("mu", &mu, pi.len(), rho_mu.len())?;
        check_block("sigma2", &sigma2, pi.len(), rho_sigma.len())?;
        if let Some(v) = sigma2.iter().flatten().find(|&&v| v < VARIANCE_FLOOR) {
            return Err(Error::InvalidParams(format!(
                "variance {v} is below the floor {VARIANCE_FLOOR}"
            )));
        }
        Ok(Self {
            pi,
            rho_mu,
            rho_sigma,
            mu,
            sigma2,
        })
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            g: self.pi.len(),
            l_mu: self.rho_mu.len(),
            l_sigma: self.rho_sigma.len(),
        }
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn rho_mu(&self) -> &[f64] {
        &self.rho_mu
    }

    pub fn rho_sigma(&self) -> &[f64] {
        &self.rho_sigma
    }

    pub fn mu(&self) -> &[Vec<f64>] {
        &self.mu
    }

    pub fn sigma2(&self) -> &[Vec<f64>] {
        &self.sigma2
    }

    /// Relabels clusters: new label `k` on each axis takes old label `perm[k]`.
    pub fn relabeled(&self, rows: &[usize], cols_mu: &[usize], cols_sigma: &[usize]) -> Self {
        let pick = |v: &[f64], perm: &[usize]| perm.iter().map(|&k| v[k]).collect::<Vec<_>>();
        Self {
            pi: pick(&self.pi, rows),
            rho_mu: pick(&self.rho_mu, cols_mu),
            rho_sigma: pick(&self.rho_sigma, cols_sigma),
            mu: rows.iter().map(|&g| pick(&self.mu[g], cols_mu)).collect(),
            sigma2: rows
                .iter()
                .map(|&g| pick(&self.sigma2[g], cols_sigma))
                .collect(),
        }
    }
}

/// Hard assignments: `z` over rows, `w_mu` and `w_sigma` over columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partitions {
    pub z: Vec<usize>,
    pub w_mu: Vec<usize>,
    pub w_sigma: Vec<usize>,
}

fn check_labels(axis: Axis, labels: &[usize], len: usize, clusters: usize) -> Result<()> {
    if labels.len() != len {
        return Err(Error::DimensionMismatch {
            axis,
            expected: len,
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

impl Partitions {
    /// Checks lengths against `n × p` and label ranges against `spec`.
    pub fn check(&self, spec: ModelSpec, n: usize, p: usize) -> Result<()> {
        check_labels(Axis::Rows, &self.z, n, spec.g)?;
        check_labels(Axis::ColumnsMu, &self.w_mu, p, spec.l_mu)?;
        check_labels(Axis::ColumnsSigma, &self.w_sigma, p, spec.l_sigma)
    }

    /// Indicator matrix for a label vector.
    pub fn one_hot(labels: &[usize], clusters: usize) -> Vec<Vec<u8>> {
        labels
            .iter()
            .map(|&l| (0..clusters).map(|k| u8::from(k == l)).collect())
            .collect()
    }
}

/// Log-density of `N(mu, sigma2)` at `x`.
pub fn block_logdensity(x: f64, mu: f64, sigma2: f64) -> Result<f64> {
    if sigma2.is_nan() || sigma2 <= 0.0 {
        return Err(Error::Domain(format!(
            "variance must be positive, got {sigma2}"
        )));
    }
    Ok(-HALF_LN_2PI - 0.5 * sigma2.ln() - (x - mu) * (x - mu) / (2.0 * sigma2))
}

pub(crate) fn check_params_against(
    theta: &Params,
    x: &DataMatrix,
    parts: &Partitions,
) -> Result<()> {
    parts.check(theta.spec(), x.n(), x.p())
}

/// Flat lookup tables for the inner sweeps.
#[derive(Debug, Clone)]
pub(crate) struct BlockTables {
    pub l_mu: usize,
    pub l_sigma: usize,
    pub mu: Vec<f64>,
    pub log_var: Vec<f64>,
    pub inv_var: Vec<f64>,
}

impl BlockTables {
    pub fn new(theta: &Params) -> Self {
        let spec = theta.spec();
        let mu = theta.mu.iter().flatten().copied().collect();
        let log_var = theta.sigma2.iter().flatten().map(|v| v.ln()).collect();
        let inv_var = theta.sigma2.iter().flatten().map(|v| 1.0 / v).collect();
        Self {
            l_mu: spec.l_mu,
            l_sigma: spec.l_sigma,
            mu,
            log_var,
            inv_var,
        }
    }

    /// Cell log-density without the `-½ln 2π` constant.
    #[inline]
    pub fn kernel(&self, g: usize, lm: usize, ls: usize, x: f64) -> f64 {
        let d = x - self.mu[g * self.l_mu + lm];
        let s = g * self.l_sigma + ls;
        -0.5 * (self.log_var[s] + d * d * self.inv_var[s])
    }
}

/// Complete-data log-likelihood `log p(x, z, w^μ, w^Σ; θ)`, including the
/// Gaussian normalising constant.
pub fn complete_data_loglik(x: &DataMatrix, parts: &Partitions, theta: &Params) -> Result<f64> {
    check_params_against(theta, x, parts)?;
    let mixing = mixing_loglik(parts, theta);
    Ok(mixing + cells_loglik(x, parts, theta))
}

pub(crate) fn mixing_loglik(parts: &Partitions, theta: &Params) -> f64 {
    let rows: f64 = parts.z.iter().map(|&g| theta.pi[g].ln()).sum();
    let mu: f64 = parts.w_mu.iter().map(|&l| theta.rho_mu[l].ln()).sum();
    let sigma: f64 = parts.w_sigma.iter().map(|&l| theta.rho_sigma[l].ln()).sum();
    rows + mu + sigma
}

pub(crate) fn cells_loglik(x: &DataMatrix, parts: &Partitions, theta: &Params) -> f64 {
    let t = BlockTables::new(theta);
    let mut total = 0.0;
    for (i, &g) in parts.z.iter().enumerate() {
        let row = x.row(i);
        let mut acc = 0.0;
        for (j, &v) in row.iter().enumerate() {
            acc += t.kernel(g, parts.w_mu[j], parts.w_sigma[j], v);
        }
        total += acc;
    }
    total - HALF_LN_2PI * (x.n() * x.p()) as f64
}

/// Free parameters of the parameter-wise model: `G + (L^μ + L^Σ)(G + 1) − 3`.
pub fn count_free_parameters(spec: ModelSpec) -> usize {
    spec.g + (spec.l_mu + spec.l_sigma) * (spec.g + 1) - 3
}

/// Free parameters of the traditional Gaussian block model, `G + L + 2(GL − 1)`.
pub fn count_free_parameters_traditional(g: usize, l: usize) -> usize {
    g + l + 2 * (g * l - 1)
}
