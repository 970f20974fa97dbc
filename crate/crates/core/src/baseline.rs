//! Traditional Gaussian latent block model (one column partition).
//!
//! Fitted by the same SEM-Gibbs core with the mean and variance column
//! partitions tied together: a fit for `(G, L)` is a tied fit of `(G, L, L)`.

use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};
use crate::model::{DataMatrix, ModelSpec, Params, Partitions};
use crate::sem::{self, chain_cdll, ColumnCoupling, FitResult, SemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraditionalSpec {
    pub g: usize,
    pub l: usize,
}

impl TraditionalSpec {
    pub fn new(g: usize, l: usize) -> Result<Self> {
        if g == 0 || l == 0 {
            return Err(Error::InvalidSpec {
                spec: ModelSpec {
                    g,
                    l_mu: l,
                    l_sigma: l,
                },
                reason: "every cluster count must be at least 1".into(),
            });
        }
        Ok(Self { g, l })
    }

    /// The equivalent tied parameter-wise spec `(G, L, L)`.
    pub fn as_model_spec(&self) -> ModelSpec {
        ModelSpec {
            g: self.g,
            l_mu: self.l,
            l_sigma: self.l,
        }
    }
}

/// SEM-Gibbs fit of the traditional model. The result stores the single
/// column partition in both `w_mu` and `w_sigma`, and `ρ` in both `rho_mu`
/// and `rho_sigma`.
pub fn fit_traditional(
    x: &DataMatrix,
    spec: TraditionalSpec,
    cfg: &SemConfig,
) -> Result<FitResult> {
    sem::fit_constrained(x, spec.as_model_spec(), ColumnCoupling::Tied, cfg)
}

/// Complete-data log-likelihood of the traditional model with column
/// partition `w`. `theta` must have `rho_mu == rho_sigma` and equal column
/// cluster counts.
pub fn complete_data_loglik_traditional(
    x: &DataMatrix,
    z: &[usize],
    w: &[usize],
    theta: &Params,
) -> Result<f64> {
    let spec = theta.spec();
    if spec.l_mu != spec.l_sigma {
        return Err(Error::InvalidParams(
            "traditional parameters need equal column cluster counts".into(),
        ));
    }
    if theta.rho_mu() != theta.rho_sigma() {
        return Err(Error::InvalidParams(
            "traditional parameters need one ρ vector".into(),
        ));
    }
    let parts = Partitions {
        z: z.to_vec(),
        w_mu: w.to_vec(),
        w_sigma: w.to_vec(),
    };
    parts.check(spec, x.n(), x.p())?;
    Ok(chain_cdll(ColumnCoupling::Tied, x, &parts, theta))
}

/// Column conditional of the traditional model for column `j`.
pub fn se_col_probabilities_traditional(
    x: &DataMatrix,
    z: &[usize],
    theta: &Params,
    j: usize,
) -> Result<Vec<f64>> {
    let spec = theta.spec();
    if spec.l_mu != spec.l_sigma {
        return Err(Error::DimensionMismatch {
            axis: Axis::ColumnsSigma,
            expected: spec.l_mu,
            found: spec.l_sigma,
        });
    }
    sem::se_col_tied_probabilities(x, z, theta, j)
}
