//! True state, per-bus regressor vectors and noisy scalar measurements.
//!
//! A run is a pure function of (config, seed): every random draw comes from a
//! per-(run, bus) ChaCha stream, so Monte Carlo runs are reproducible and
//! order-independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::topology::{Topology, TopologyError};

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("state vector has length {0}, expected {1}")]
    StateLength(usize, usize),
    #[error("state vector entry {0} is not finite")]
    NonFiniteState(usize),
}

/// Voltage phase angle vector, one entry per bus.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Scalar>(Vec<T>);

impl<T: Scalar> StateVector<T> {
    pub fn new<U: Scalar>(theta: Vec<T>, t: &Topology<U>) -> Result<Self, MeasurementError> {
        if theta.len() != t.num_buses() {
            return Err(MeasurementError::StateLength(theta.len(), t.num_buses()));
        }
        if let Some(idx) = theta.iter().position(|v| !v.is_finite()) {
            return Err(MeasurementError::NonFiniteState(idx));
        }
        Ok(StateVector(theta))
    }

    pub fn ones<U: Scalar>(t: &Topology<U>) -> Self {
        StateVector(vec![T::one(); t.num_buses()])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

/// One scalar measurement `z_k(i)` with its regressor `h_k(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSample<T: Scalar> {
    pub regressor: Vec<T>,
    pub value: T,
    pub bus: usize,
    pub iteration: usize,
}

/// How the regressor vectors are built.
///
/// `DcJacobian` is the linearized power-injection model: bus k's row is the
/// graph-Laplacian row under unit branch susceptance, fixed over iterations.
/// `RandomGaussian` redraws i.i.d. N(0, std^2) entries each iteration, which
/// guarantees persistent excitation (the Laplacian annihilates constant
/// states, so it cannot identify an all-ones theta on its own).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegressorScheme<T: Scalar> {
    DcJacobian,
    RandomGaussian { std: T },
}

/// DC power-injection row for bus `k`: degree on the diagonal position,
/// -1 at each adjacent bus. Rows sum to zero.
pub fn dc_jacobian_row<T: Scalar, U: Scalar>(
    t: &Topology<U>,
    k: usize,
) -> Result<Vec<T>, TopologyError> {
    let hood = t.neighborhood(k)?;
    let mut row = vec![T::zero(); t.num_buses()];
    for &l in hood {
        if l != k {
            row[l - 1] = -T::one();
        }
    }
    row[k - 1] = T::of((hood.len() - 1) as f64);
    Ok(row)
}

/// RNG stream owned by one (run, bus) pair. Draws within a run advance the
/// stream in iteration order; distinct pairs never share a stream.
pub fn measurement_rng(master_seed: u64, run: u64, bus: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((run << 32) | bus as u64);
    rng
}

/// Draw one measurement for bus `k` at iteration `i`:
/// `value = regressor . theta + noise`, noise ~ N(0, sigma^2_{n,k}).
pub fn sample_measurement<T, R>(
    t: &Topology<T>,
    theta: &StateVector<T>,
    scheme: RegressorScheme<T>,
    k: usize,
    i: usize,
    rng: &mut R,
) -> Result<MeasurementSample<T>, MeasurementError>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let regressor = match scheme {
        RegressorScheme::DcJacobian => dc_jacobian_row(t, k)?,
        RegressorScheme::RandomGaussian { std } => (0..t.num_buses())
            .map(|_| rng.sample::<T, _>(StandardNormal) * std)
            .collect(),
    };
    let noise_std = t.noise_variance(k)?.sqrt();
    let noise = rng.sample::<T, _>(StandardNormal) * noise_std;
    let value = dot(&regressor, theta.as_slice()) + noise;
    Ok(MeasurementSample {
        regressor,
        value,
        bus: k,
        iteration: i,
    })
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Topology;
    use approx::assert_abs_diff_eq;

    fn path3(var: f64) -> Topology<f64> {
        Topology::load(&format!(
            "buses = 3\nbranches = [[1,2],[2,3]]\nnoise_variance = {var}"
        ))
        .unwrap()
    }

    #[test]
    fn dc_row_of_path_center() {
        let t = path3(0.001);
        let row: Vec<f64> = dc_jacobian_row(&t, 2).unwrap();
        assert_eq!(row, vec![-1.0, 2.0, -1.0]);
    }

    #[test]
    fn dc_row_of_isolated_bus_is_zero() {
        let t: Topology<f64> = Topology::load("buses = 2\nnoise_variance = 1.0").unwrap();
        let row: Vec<f64> = dc_jacobian_row(&t, 1).unwrap();
        assert_eq!(row, vec![0.0, 0.0]);
    }

    #[test]
    fn dc_rows_form_symmetric_zero_rowsum_laplacian() {
        let t: Topology<f64> = Topology::preset("ieee14").unwrap();
        let rows: Vec<Vec<f64>> = (1..=14).map(|k| dc_jacobian_row(&t, k).unwrap()).collect();
        for k in 0..14 {
            assert_abs_diff_eq!(rows[k].iter().sum::<f64>(), 0.0);
            for l in 0..14 {
                assert_eq!(rows[k][l], rows[l][k]);
            }
        }
    }

    #[test]
    fn zero_noise_dc_measurement_of_ones_is_zero() {
        let t = path3(0.0);
        let theta = StateVector::ones(&t);
        let mut rng = measurement_rng(1, 0, 2);
        let s =
            sample_measurement(&t, &theta, RegressorScheme::DcJacobian, 2, 0, &mut rng).unwrap();
        assert_abs_diff_eq!(s.value, 0.0);
    }

    #[test]
    fn zero_noise_value_is_inner_product() {
        let t = path3(0.0);
        let theta = StateVector::new(vec![0.3, -0.2, 0.7], &t).unwrap();
        let mut rng = measurement_rng(7, 3, 1);
        let s = sample_measurement(
            &t,
            &theta,
            RegressorScheme::RandomGaussian { std: 1.0 },
            1,
            0,
            &mut rng,
        )
        .unwrap();
        assert_abs_diff_eq!(s.value, dot(&s.regressor, theta.as_slice()), epsilon = 1e-15);
    }

    #[test]
    fn same_stream_reproduces_sample() {
        let t = path3(0.001);
        let theta = StateVector::ones(&t);
        let scheme = RegressorScheme::RandomGaussian { std: 1.0 };
        let mut a = measurement_rng(42, 5, 2);
        let mut b = measurement_rng(42, 5, 2);
        let sa = sample_measurement(&t, &theta, scheme, 2, 0, &mut a).unwrap();
        let sb = sample_measurement(&t, &theta, scheme, 2, 0, &mut b).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn distinct_buses_get_distinct_streams() {
        let t = path3(0.001);
        let theta = StateVector::ones(&t);
        let scheme = RegressorScheme::RandomGaussian { std: 1.0 };
        let sa = sample_measurement(&t, &theta, scheme, 1, 0, &mut measurement_rng(42, 0, 1))
            .unwrap();
        let sb = sample_measurement(&t, &theta, scheme, 2, 0, &mut measurement_rng(42, 0, 2))
            .unwrap();
        assert_ne!(sa.regressor, sb.regressor);
    }

    #[test]
    fn empirical_noise_variance_matches_sigma() {
        let t = path3(0.004);
        let theta = StateVector::new(vec![0.0, 0.0, 0.0], &t).unwrap();
        let mut rng = measurement_rng(9, 0, 1);
        let n = 200_000;
        let mut sum_sq = 0.0;
        for i in 0..n {
            let s =
                sample_measurement(&t, &theta, RegressorScheme::DcJacobian, 1, i, &mut rng)
                    .unwrap();
            sum_sq += s.value * s.value;
        }
        let var = sum_sq / n as f64;
        assert!((var - 0.004).abs() / 0.004 < 0.05, "empirical var {var}");
    }

    #[test]
    fn wrong_state_length_rejected() {
        let t = path3(0.001);
        assert!(StateVector::new(vec![1.0, 2.0], &t).is_err());
    }
}
