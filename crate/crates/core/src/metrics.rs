//! Evaluation quantities: network mean-square deviation and per-bus phase
//! angle gap, with Monte Carlo averaging over runs.

use serde::Deserialize;
use thiserror::Error;

use crate::estimators::EstimatorState;
use crate::measurement::StateVector;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cannot average an empty list of traces")]
    EmptyTraceList,
    #[error("trace shape mismatch: {0} vs {1} iterations")]
    ShapeMismatch(usize, usize),
    #[error("bus index {0} out of range 1..={1}")]
    BusOutOfRange(usize, usize),
}

/// How the phase angle gap is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapDefinition {
    /// Signed difference `theta[k] - x_k[k]`: bus k's own-angle error.
    #[default]
    OwnAngle,
    /// `||theta - x_k||_1` over the whole state vector.
    L1Norm,
}

/// Per-iteration metric curves for one run (or averaged over many).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTrace<T: Scalar> {
    /// Network mean-square deviation per iteration.
    pub mse: Vec<T>,
    /// `gap[i][k-1]` = phase angle gap of bus k at iteration i.
    pub gap: Vec<Vec<T>>,
    /// Number of Monte Carlo runs averaged into this trace.
    pub runs: usize,
}

impl<T: Scalar> MetricsTrace<T> {
    pub fn with_capacity(iterations: usize) -> Self {
        MetricsTrace {
            mse: Vec::with_capacity(iterations),
            gap: Vec::with_capacity(iterations),
            runs: 1,
        }
    }

    pub fn iterations(&self) -> usize {
        self.mse.len()
    }

    /// Record one iteration's metrics from the estimator state.
    pub fn record(&mut self, state: &EstimatorState<T>, theta: &StateVector<T>, gap_def: GapDefinition) {
        self.mse.push(network_mse(state, theta));
        let k_count = theta.as_slice().len();
        let row = (1..=k_count)
            .map(|k| phase_angle_gap(state, theta, k, gap_def).expect("bus in range"))
            .collect();
        self.gap.push(row);
    }

    /// Gap curve of one bus across iterations.
    pub fn gap_of_bus(&self, k: usize) -> Vec<T> {
        self.gap.iter().map(|row| row[k - 1]).collect()
    }
}

/// `(1/K) sum_k ||x_k(i) - theta||^2`.
pub fn network_mse<T: Scalar>(state: &EstimatorState<T>, theta: &StateVector<T>) -> T {
    let theta = theta.as_slice();
    let total: T = state
        .x
        .iter()
        .map(|xk| {
            xk.iter()
                .zip(theta)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>()
        })
        .sum();
    total / T::of(state.x.len() as f64)
}

/// Phase angle gap of bus `k` under the chosen definition.
pub fn phase_angle_gap<T: Scalar>(
    state: &EstimatorState<T>,
    theta: &StateVector<T>,
    k: usize,
    def: GapDefinition,
) -> Result<T, MetricsError> {
    let th = theta.as_slice();
    if k < 1 || k > th.len() {
        return Err(MetricsError::BusOutOfRange(k, th.len()));
    }
    let xk = &state.x[k - 1];
    Ok(match def {
        GapDefinition::OwnAngle => th[k - 1] - xk[k - 1],
        GapDefinition::L1Norm => th.iter().zip(xk).map(|(&a, &b)| (a - b).abs()).sum(),
    })
}

/// Pointwise arithmetic mean of same-shape per-run traces.
pub fn average_traces<T: Scalar>(traces: &[MetricsTrace<T>]) -> Result<MetricsTrace<T>, MetricsError> {
    let first = traces.first().ok_or(MetricsError::EmptyTraceList)?;
    let iters = first.iterations();
    for tr in traces {
        if tr.iterations() != iters {
            return Err(MetricsError::ShapeMismatch(iters, tr.iterations()));
        }
    }
    let n = T::of(traces.len() as f64);
    let k_count = first.gap.first().map_or(0, |row| row.len());
    let mse = (0..iters)
        .map(|i| traces.iter().map(|tr| tr.mse[i]).sum::<T>() / n)
        .collect();
    let gap = (0..iters)
        .map(|i| {
            (0..k_count)
                .map(|k| traces.iter().map(|tr| tr.gap[i][k]).sum::<T>() / n)
                .collect()
        })
        .collect();
    Ok(MetricsTrace {
        mse,
        gap,
        runs: traces.iter().map(|tr| tr.runs).sum(),
    })
}
