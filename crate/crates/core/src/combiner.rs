//! Combination-weight construction and adjustment: Hastings and Metropolis
//! rules, subset renormalization for the exhaustive-search combiner, and the
//! reweighted zero-attraction (RZA) weight transfer used by the
//! sparsity-inspired combiner.

use thiserror::Error;

use crate::scalar::Scalar;
use crate::topology::{Topology, TopologyError};

#[derive(Debug, Error)]
pub enum CombinerError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("noise variance of bus {0} must be strictly positive for the Hastings rule")]
    NonPositiveVariance(usize),
    #[error("restricted weights over the subset are all zero")]
    ZeroSubsetWeights,
    #[error("subset is empty")]
    EmptySubset,
    #[error("weight/error vectors have mismatched lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Row-stochastic combination coefficients supported on the neighborhood
/// structure: `c_kl = 0` unless `l` is in `N_k`, every row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T: Scalar> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> WeightMatrix<T> {
    /// `c_kl` with 1-based bus indices.
    pub fn entry(&self, k: usize, l: usize) -> T {
        self.rows[k - 1][l - 1]
    }

    pub fn num_buses(&self) -> usize {
        self.rows.len()
    }

    /// Row `k` restricted to the neighborhood `N_k`, in ascending bus order.
    pub fn neighborhood_row(&self, t: &Topology<T>, k: usize) -> Vec<T> {
        t.neighborhood(k)
            .expect("weight matrix built for this topology")
            .iter()
            .map(|&l| self.entry(k, l))
            .collect()
    }
}

fn build_rule<T: Scalar>(
    t: &Topology<T>,
    off_diag: impl Fn(usize, usize) -> T,
) -> Result<WeightMatrix<T>, CombinerError> {
    let k_count = t.num_buses();
    let mut rows = vec![vec![T::zero(); k_count]; k_count];
    for k in 1..=k_count {
        let mut off_sum = T::zero();
        for &l in t.neighborhood(k)? {
            if l != k {
                let c = off_diag(k, l);
                rows[k - 1][l - 1] = c;
                off_sum += c;
            }
        }
        rows[k - 1][k - 1] = T::one() - off_sum;
    }
    Ok(WeightMatrix { rows })
}

/// Hastings rule: for linked `k != l`,
/// `c_kl = sigma^2_k / max(|N_k| sigma^2_k, |N_l| sigma^2_l)`,
/// diagonal as the row complement.
pub fn hastings_weights<T: Scalar>(t: &Topology<T>) -> Result<WeightMatrix<T>, CombinerError> {
    for k in 1..=t.num_buses() {
        if t.noise_variance(k)? <= T::zero() {
            return Err(CombinerError::NonPositiveVariance(k));
        }
    }
    build_rule(t, |k, l| {
        let nk = t.neighborhood(k).unwrap().len();
        let nl = t.neighborhood(l).unwrap().len();
        let vk = t.noise_variance(k).unwrap();
        let vl = t.noise_variance(l).unwrap();
        if vk == vl {
            // algebraic reduction to the Metropolis value; keeps the
            // uniform-variance coincidence bitwise exact
            T::one() / T::of(nk.max(nl) as f64)
        } else {
            vk / (T::of(nk as f64) * vk).max(T::of(nl as f64) * vl)
        }
    })
}

/// Metropolis rule: `c_kl = 1 / max(|N_k|, |N_l|)` for linked `k != l`.
pub fn metropolis_weights<T: Scalar>(t: &Topology<T>) -> Result<WeightMatrix<T>, CombinerError> {
    build_rule(t, |k, l| {
        let nk = t.neighborhood(k).unwrap().len();
        let nl = t.neighborhood(l).unwrap().len();
        T::one() / T::of(nk.max(nl) as f64)
    })
}

/// Restrict a neighborhood weight row to `subset` (given as positions into
/// the row) and rescale so the restricted weights sum to one.
pub fn renormalize_over_subset<T: Scalar>(
    c_row: &[T],
    subset: &[usize],
) -> Result<Vec<T>, CombinerError> {
    if subset.is_empty() {
        return Err(CombinerError::EmptySubset);
    }
    let total: T = subset.iter().map(|&p| c_row[p]).sum();
    if total <= T::zero() {
        return Err(CombinerError::ZeroSubsetWeights);
    }
    Ok(subset.iter().map(|&p| c_row[p] / total).collect())
}

/// RZA weight adjustment: transfer `min(delta, c[argmax])` of weight from the
/// max-|e| entry to the min-|e| entry, `delta = rho*eps / (1 + eps*|xi_min|)`.
/// Ties break toward the lowest index; a single entry (or a max/min tie on
/// the same index) leaves the row unchanged. The transfer keeps the row
/// sum-to-one and every entry in [0, 1].
pub fn rza_adjust<T: Scalar>(
    c_row: &[T],
    e: &[T],
    rho: T,
    epsilon: T,
) -> Result<Vec<T>, CombinerError> {
    if c_row.len() != e.len() {
        return Err(CombinerError::LengthMismatch(c_row.len(), e.len()));
    }
    let mut out = c_row.to_vec();
    if c_row.len() <= 1 {
        return Ok(out);
    }
    let (mut arg_max, mut arg_min) = (0usize, 0usize);
    for (idx, &err) in e.iter().enumerate() {
        if err.abs() > e[arg_max].abs() {
            arg_max = idx;
        }
        if err.abs() < e[arg_min].abs() {
            arg_min = idx;
        }
    }
    if arg_max == arg_min {
        return Ok(out);
    }
    let delta = rho * epsilon / (T::one() + epsilon * e[arg_min].abs());
    let transfer = delta.min(out[arg_max]);
    out[arg_max] = out[arg_max] - transfer;
    out[arg_min] = out[arg_min] + transfer;
    Ok(out)
}
