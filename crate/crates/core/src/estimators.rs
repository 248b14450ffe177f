//! The four per-iteration update algorithms behind one interface: diffusion
//! ATC, the coordinated area baseline (M-CSE), exhaustive-search topology
//! adaptation (DESTA) and sparsity-inspired topology adaptation (DSITA).
//!
//! All algorithms follow synchronous-round semantics: the adaptation step
//! runs at every bus before any combination step reads the intermediate
//! estimates of iteration `i`.

use std::str::FromStr;

use thiserror::Error;

use crate::combiner::{renormalize_over_subset, rza_adjust, CombinerError, WeightMatrix};
use crate::measurement::{dot, MeasurementSample};
use crate::scalar::Scalar;
use crate::topology::{Topology, TopologyError};

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Combiner(#[from] CombinerError),
    #[error("unknown algorithm {0:?} (expected atc, mcse, desta or dsita)")]
    UnknownAlgorithm(String),
    #[error("expected one sample per bus ({0}), got {1}")]
    SampleCount(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Atc,
    Mcse,
    Desta,
    Dsita,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Atc,
        Algorithm::Mcse,
        Algorithm::Desta,
        Algorithm::Dsita,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Atc => "atc",
            Algorithm::Mcse => "mcse",
            Algorithm::Desta => "desta",
            Algorithm::Dsita => "dsita",
        }
    }
}

impl FromStr for Algorithm {
    type Err = EstimatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "atc" => Ok(Algorithm::Atc),
            "mcse" => Ok(Algorithm::Mcse),
            "desta" => Ok(Algorithm::Desta),
            "dsita" => Ok(Algorithm::Dsita),
            other => Err(EstimatorError::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// `a(i) = base / (1+i)^gamma`; gamma = 0 gives a constant sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySequence<T: Scalar> {
    pub base: T,
    pub gamma: T,
}

impl<T: Scalar> DecaySequence<T> {
    pub fn constant(base: T) -> Self {
        DecaySequence {
            base,
            gamma: T::zero(),
        }
    }

    pub fn value(&self, i: usize) -> T {
        if self.gamma == T::zero() {
            self.base
        } else {
            self.base / T::of((i + 1) as f64).powf(self.gamma)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorParams<T: Scalar> {
    /// LMS step size, shared by all buses.
    pub mu: T,
    /// DSITA shrinkage intensity.
    pub rho: T,
    /// DSITA shrinkage magnitude.
    pub epsilon: T,
    /// M-CSE gradient weight sequence alpha(i).
    pub alpha: DecaySequence<T>,
    /// M-CSE consensus weight sequence beta(i).
    pub beta: DecaySequence<T>,
    /// Renormalize subset weights to a convex combination in DESTA.
    pub desta_renormalize: bool,
    /// EWMA factor for DESTA's subset error scores; None = instantaneous.
    pub desta_ewma: Option<T>,
}

impl<T: Scalar> EstimatorParams<T> {
    /// Defaults matching the reference experiment: mu = 0.018, rho = 0.07,
    /// epsilon = 10, constant alpha = beta = mu.
    pub fn default_experiment() -> Self {
        let mu = T::of(0.018);
        EstimatorParams {
            mu,
            rho: T::of(0.07),
            epsilon: T::of(10.0),
            alpha: DecaySequence::constant(mu),
            beta: DecaySequence::constant(mu),
            desta_renormalize: true,
            desta_ewma: None,
        }
    }
}

/// Per-bus estimates `x_k(i)` and intermediates `psi_k(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState<T: Scalar> {
    pub x: Vec<Vec<T>>,
    pub psi: Vec<Vec<T>>,
    pub iteration: usize,
}

impl<T: Scalar> EstimatorState<T> {
    /// All-zero initial estimates.
    pub fn zeros<U: Scalar>(t: &Topology<U>) -> Self {
        let k = t.num_buses();
        EstimatorState {
            x: vec![vec![T::zero(); k]; k],
            psi: vec![vec![T::zero(); k]; k],
            iteration: 0,
        }
    }
}

/// LMS adaptation: `psi = x_prev + mu * h * (z - h . x_prev)`.
pub fn adapt_step<T: Scalar>(x_prev: &[T], sample: &MeasurementSample<T>, mu: T) -> Vec<T> {
    let err = sample.value - dot(&sample.regressor, x_prev);
    x_prev
        .iter()
        .zip(&sample.regressor)
        .map(|(&x, &h)| x + mu * h * err)
        .collect()
}

/// Diffusion combination over the full neighborhood:
/// `x_k = sum_{l in N_k} c_kl psi_l`.
pub fn atc_combine<T: Scalar>(
    psi: &[Vec<T>],
    weights: &WeightMatrix<T>,
    t: &Topology<T>,
) -> Result<Vec<Vec<T>>, EstimatorError> {
    let k_count = t.num_buses();
    let mut x = Vec::with_capacity(k_count);
    for k in 1..=k_count {
        let mut acc = vec![T::zero(); k_count];
        for &l in t.neighborhood(k)? {
            let c = weights.entry(k, l);
            for (a, &p) in acc.iter_mut().zip(&psi[l - 1]) {
                *a += c * p;
            }
        }
        x.push(acc);
    }
    Ok(x)
}

/// Subset chosen by DESTA for one bus, as positions into the ascending
/// neighborhood list.
pub type SubsetChoice = Vec<usize>;

/// Exhaustive-search combination: every nonempty subset of `N_k` is scored by
/// the absolute combination error against `z_k(i)` and the minimizer is used.
/// Ties break toward smaller cardinality, then lexicographic subset order.
///
/// `ewma` (one score buffer per bus, indexed by subset mask - 1) smooths the
/// squared error across iterations when `params.desta_ewma` is set.
pub fn desta_step<T: Scalar>(
    psi: &[Vec<T>],
    weights: &WeightMatrix<T>,
    t: &Topology<T>,
    samples: &[MeasurementSample<T>],
    params: &EstimatorParams<T>,
    ewma: Option<&mut Vec<Vec<T>>>,
) -> Result<(Vec<Vec<T>>, Vec<SubsetChoice>), EstimatorError> {
    let k_count = t.num_buses();
    check_samples(t, samples)?;
    let mut ewma = ewma;
    let mut x = Vec::with_capacity(k_count);
    let mut choices = Vec::with_capacity(k_count);
    for k in 1..=k_count {
        let hood = t.neighborhood(k)?;
        let card = hood.len();
        let sample = &samples[k - 1];
        let c_row = weights.neighborhood_row(t, k);
        // Projections h_k . psi_l, one per neighbor: lets each subset be
        // scored in O(|subset|) instead of O(|subset| * K).
        let proj: Vec<T> = hood
            .iter()
            .map(|&l| dot(&sample.regressor, &psi[l - 1]))
            .collect();

        let mut best: Option<(T, Vec<usize>)> = None;
        for mask in 1u32..(1u32 << card) {
            let positions: Vec<usize> = (0..card).filter(|&p| mask & (1 << p) != 0).collect();
            let c_sub = if params.desta_renormalize {
                match renormalize_over_subset(&c_row, &positions) {
                    Ok(c) => c,
                    // zero-mass subsets cannot form a combination
                    Err(CombinerError::ZeroSubsetWeights) => continue,
                    Err(e) => return Err(e.into()),
                }
            } else {
                positions.iter().map(|&p| c_row[p]).collect()
            };
            let predicted: T = positions
                .iter()
                .zip(&c_sub)
                .map(|(&p, &c)| c * proj[p])
                .sum();
            let err = (sample.value - predicted).abs();
            let score = match (params.desta_ewma, ewma.as_deref_mut()) {
                (Some(w), Some(buf)) => {
                    let slot = &mut buf[k - 1][(mask - 1) as usize];
                    *slot = (T::one() - w) * *slot + w * err * err;
                    *slot
                }
                _ => err,
            };
            let better = match &best {
                None => true,
                Some((best_score, best_pos)) => {
                    score < *best_score
                        || (score == *best_score
                            && (positions.len() < best_pos.len()
                                || (positions.len() == best_pos.len()
                                    && positions < *best_pos)))
                }
            };
            if better {
                best = Some((score, positions));
            }
        }
        let (_, positions) = best.expect("full neighborhood subset always has unit mass");
        let c_sub = if params.desta_renormalize {
            renormalize_over_subset(&c_row, &positions)?
        } else {
            positions.iter().map(|&p| c_row[p]).collect()
        };
        let mut acc = vec![T::zero(); k_count];
        for (&p, &c) in positions.iter().zip(&c_sub) {
            let l = hood[p];
            for (a, &v) in acc.iter_mut().zip(&psi[l - 1]) {
                *a += c * v;
            }
        }
        x.push(acc);
        choices.push(positions);
    }
    Ok((x, choices))
}

/// Sparsity-inspired combination: per-neighbor errors against `z_k(i)` drive
/// an RZA weight transfer from the worst neighbor to the best, then the
/// adjusted weights combine the intermediates.
pub fn dsita_step<T: Scalar>(
    psi: &[Vec<T>],
    weights: &WeightMatrix<T>,
    t: &Topology<T>,
    samples: &[MeasurementSample<T>],
    params: &EstimatorParams<T>,
) -> Result<Vec<Vec<T>>, EstimatorError> {
    let k_count = t.num_buses();
    check_samples(t, samples)?;
    let mut x = Vec::with_capacity(k_count);
    for k in 1..=k_count {
        let hood = t.neighborhood(k)?;
        let sample = &samples[k - 1];
        let c_row = weights.neighborhood_row(t, k);
        let errors: Vec<T> = hood
            .iter()
            .map(|&l| sample.value - dot(&sample.regressor, &psi[l - 1]))
            .collect();
        let adjusted = rza_adjust(&c_row, &errors, params.rho, params.epsilon)?;
        let mut acc = vec![T::zero(); k_count];
        for (&l, &c) in hood.iter().zip(&adjusted) {
            for (a, &v) in acc.iter_mut().zip(&psi[l - 1]) {
                *a += c * v;
            }
        }
        x.push(acc);
    }
    Ok(x)
}

/// Coordinated area update: each area stacks its buses' measurements and
/// runs consensus-plus-gradient against the state vectors of adjacent areas:
/// `x_n <- x_n - [beta(i) sum_{l adj}(x_n - x_l) - alpha(i) H_n^T (z_n - H_n x_n)]`.
/// Every bus in an area carries the area's state vector.
pub fn mcse_step<T: Scalar>(
    x_prev: &[Vec<T>],
    t: &Topology<T>,
    samples: &[MeasurementSample<T>],
    params: &EstimatorParams<T>,
    iteration: usize,
) -> Result<Vec<Vec<T>>, EstimatorError> {
    let k_count = t.num_buses();
    check_samples(t, samples)?;
    let alpha = params.alpha.value(iteration);
    let beta = params.beta.value(iteration);
    let areas = t.areas();
    // area state = state of its first bus (all member buses agree)
    let area_state = |n: usize| &x_prev[areas[n][0] - 1];

    let mut x = vec![vec![T::zero(); k_count]; k_count];
    for n in 0..areas.len() {
        let xn = area_state(n);
        let mut update = vec![T::zero(); k_count];
        for l in t.adjacent_areas(n) {
            let xl = area_state(l);
            for ((u, &a), &b) in update.iter_mut().zip(xn).zip(xl) {
                *u += beta * (a - b);
            }
        }
        // gradient term: H_n^T (z_n - H_n x_n) accumulated row by row
        for &bus in &areas[n] {
            let s = &samples[bus - 1];
            let residual = s.value - dot(&s.regressor, xn);
            for (u, &h) in update.iter_mut().zip(&s.regressor) {
                *u += -(alpha * h * residual);
            }
        }
        for &bus in &areas[n] {
            for ((out, &prev), &u) in x[bus - 1].iter_mut().zip(xn).zip(&update) {
                *out = prev - u;
            }
        }
    }
    Ok(x)
}

/// One estimator run: owns the state and any cross-iteration buffers.
pub struct Estimator<T: Scalar> {
    algorithm: Algorithm,
    params: EstimatorParams<T>,
    weights: WeightMatrix<T>,
    state: EstimatorState<T>,
    desta_scores: Vec<Vec<T>>,
}

impl<T: Scalar> Estimator<T> {
    pub fn new(
        algorithm: Algorithm,
        t: &Topology<T>,
        weights: WeightMatrix<T>,
        params: EstimatorParams<T>,
    ) -> Self {
        let desta_scores = (1..=t.num_buses())
            .map(|k| {
                let card = t.neighborhood(k).unwrap().len();
                vec![T::zero(); (1usize << card) - 1]
            })
            .collect();
        Estimator {
            algorithm,
            params,
            weights,
            state: EstimatorState::zeros(t),
            desta_scores,
        }
    }

    pub fn state(&self) -> &EstimatorState<T> {
        &self.state
    }

    pub fn estimates(&self) -> &[Vec<T>] {
        &self.state.x
    }

    /// Advance one synchronous round with this iteration's samples
    /// (one per bus, bus order).
    pub fn step(&mut self, t: &Topology<T>, samples: &[MeasurementSample<T>]) -> Result<(), EstimatorError> {
        self.state = run_iteration(
            self.algorithm,
            &self.state,
            &self.weights,
            t,
            samples,
            &self.params,
            Some(&mut self.desta_scores),
        )?;
        Ok(())
    }
}

/// Dispatch one iteration of the chosen algorithm. Adaptation at all buses
/// completes before any combination reads the intermediates.
pub fn run_iteration<T: Scalar>(
    algorithm: Algorithm,
    state: &EstimatorState<T>,
    weights: &WeightMatrix<T>,
    t: &Topology<T>,
    samples: &[MeasurementSample<T>],
    params: &EstimatorParams<T>,
    desta_scores: Option<&mut Vec<Vec<T>>>,
) -> Result<EstimatorState<T>, EstimatorError> {
    check_samples(t, samples)?;
    let (psi, x) = match algorithm {
        Algorithm::Mcse => {
            let x = mcse_step(&state.x, t, samples, params, state.iteration)?;
            (x.clone(), x)
        }
        _ => {
            let psi: Vec<Vec<T>> = state
                .x
                .iter()
                .zip(samples)
                .map(|(xk, s)| adapt_step(xk, s, params.mu))
                .collect();
            let x = match algorithm {
                Algorithm::Atc => atc_combine(&psi, weights, t)?,
                Algorithm::Desta => {
                    let scores = desta_scores.filter(|_| params.desta_ewma.is_some());
                    desta_step(&psi, weights, t, samples, params, scores)?.0
                }
                Algorithm::Dsita => dsita_step(&psi, weights, t, samples, params)?,
                Algorithm::Mcse => unreachable!(),
            };
            (psi, x)
        }
    };
    Ok(EstimatorState {
        x,
        psi,
        iteration: state.iteration + 1,
    })
}

fn check_samples<T: Scalar>(
    t: &Topology<T>,
    samples: &[MeasurementSample<T>],
) -> Result<(), EstimatorError> {
    if samples.len() != t.num_buses() {
        return Err(EstimatorError::SampleCount(t.num_buses(), samples.len()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combiner::{hastings_weights, metropolis_weights};
    use crate::measurement::{measurement_rng, sample_measurement, RegressorScheme, StateVector};
    use approx::assert_abs_diff_eq;

    type Top = Topology<f64>;

    fn sample(bus: usize, regressor: Vec<f64>, value: f64) -> MeasurementSample<f64> {
        MeasurementSample {
            regressor,
            value,
            bus,
            iteration: 0,
        }
    }

    #[test]
    fn adapt_zero_error_is_fixed_point() {
        let x = vec![0.5, -0.5];
        let s = sample(1, vec![1.0, 1.0], 0.0);
        assert_eq!(adapt_step(&x, &s, 0.018), x);
    }

    #[test]
    fn adapt_unit_regressor_hand_case() {
        let x = vec![0.0, 0.0];
        let s = sample(1, vec![1.0, 0.0], 1.0);
        assert_eq!(adapt_step(&x, &s, 0.5), vec![0.5, 0.0]);
    }

    #[test]
    fn adapt_is_consistent_at_truth() {
        let theta = vec![0.2, 0.9, -0.3];
        let h = vec![1.5, -2.0, 0.25];
        let z = 1.5 * 0.2 - 2.0 * 0.9 + 0.25 * -0.3;
        let psi = adapt_step(&theta, &sample(1, h, z), 0.018);
        for (p, t) in psi.iter().zip(&theta) {
            assert_abs_diff_eq!(p, t, epsilon = 1e-15);
        }
    }

    #[test]
    fn atc_row_stochastic_preserves_consensus() {
        let t = Top::preset("ieee14").unwrap();
        let w = hastings_weights(&t).unwrap();
        let v: Vec<f64> = (0..14).map(|i| i as f64 * 0.1).collect();
        let psi = vec![v.clone(); 14];
        let x = atc_combine(&psi, &w, &t).unwrap();
        for xk in &x {
            for (a, b) in xk.iter().zip(&v) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn atc_two_bus_hand_case() {
        let t = Top::load("buses = 2\nbranches = [[1,2]]\nnoise_variance = 1.0").unwrap();
        let w = metropolis_weights(&t).unwrap();
        let psi = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let x = atc_combine(&psi, &w, &t).unwrap();
        assert_eq!(x[0], vec![0.5, 0.5]);
    }

    #[test]
    fn desta_isolated_bus_keeps_own_psi() {
        let t = Top::load("buses = 2\nnoise_variance = 1.0").unwrap();
        let w = metropolis_weights(&t).unwrap();
        let psi = vec![vec![0.3, 0.1], vec![-0.2, 0.4]];
        let samples = vec![
            sample(1, vec![1.0, 0.0], 0.0),
            sample(2, vec![0.0, 1.0], 0.0),
        ];
        let params = EstimatorParams::default_experiment();
        let (x, choices) = desta_step(&psi, &w, &t, &samples, &params, None).unwrap();
        assert_eq!(x[0], psi[0]);
        assert_eq!(choices[0], vec![0]);
    }

    #[test]
    fn desta_excludes_corrupted_neighbor() {
        // triangle; psi of bus 3 grossly corrupted, bus 1 should drop it
        let t =
            Top::load("buses = 3\nbranches = [[1,2],[1,3],[2,3]]\nnoise_variance = 1.0").unwrap();
        let w = metropolis_weights(&t).unwrap();
        let theta = [1.0, 1.0, 1.0];
        let psi = vec![vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0], vec![50.0, -30.0, 8.0]];
        let h = vec![0.3, -0.7, 0.5];
        let z = h.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>();
        let samples = vec![
            sample(1, h.clone(), z),
            sample(2, h.clone(), z),
            sample(3, h, z),
        ];
        let params = EstimatorParams::default_experiment();
        let (x, choices) = desta_step(&psi, &w, &t, &samples, &params, None).unwrap();
        assert!(!choices[0].contains(&2), "chose {:?}", choices[0]);
        for &v in &x[0] {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dsita_end_to_end_hand_case() {
        // c = [1/3,1/3,1/3], errors [0.5,-0.1,0.3] -> weights
        // [1/3-0.05, 1/3+0.05, 1/3] applied to the psi vectors.
        let t =
            Top::load("buses = 3\nbranches = [[1,2],[1,3],[2,3]]\nnoise_variance = 1.0").unwrap();
        let w = metropolis_weights(&t).unwrap();
        // h = e1 so h . psi_l = psi_l[0]; projections [0, 0.6, 0.2] with
        // z = 0.5 give bus-1 errors [0.5, -0.1, 0.3].
        let psi = vec![
            vec![0.0, 0.0, 0.0],
            vec![0.6, 0.0, 0.0],
            vec![0.2, 0.0, 0.0],
        ];
        let samples = vec![
            sample(1, vec![1.0, 0.0, 0.0], 0.5),
            sample(2, vec![1.0, 0.0, 0.0], 0.5),
            sample(3, vec![1.0, 0.0, 0.0], 0.5),
        ];
        let mut params = EstimatorParams::default_experiment();
        params.rho = 0.01;
        params.epsilon = 10.0;
        let x = dsita_step(&psi, &w, &t, &samples, &params).unwrap();
        // errors at bus 1: [0.5, -0.1, 0.3]
        let expected = (1.0 / 3.0 - 0.05) * 0.0 + (1.0 / 3.0 + 0.05) * 0.6 + (1.0 / 3.0) * 0.2;
        assert_abs_diff_eq!(x[0][0], expected, epsilon = 1e-15);
    }

    #[test]
    fn dsita_single_bus_neighborhood_keeps_psi() {
        let t = Top::load("buses = 1\nnoise_variance = 1.0").unwrap();
        let w = metropolis_weights(&t).unwrap();
        let psi = vec![vec![0.7]];
        let samples = vec![sample(1, vec![1.0], 0.7)];
        let params = EstimatorParams::default_experiment();
        let x = dsita_step(&psi, &w, &t, &samples, &params).unwrap();
        assert_eq!(x[0], vec![0.7]);
    }

    #[test]
    fn mcse_fixed_point_at_consensus() {
        let t = Top::load(
            "buses = 3\nbranches = [[1,2],[2,3]]\nnoise_variance = 1.0\nareas = [[1,2],[3]]",
        )
        .unwrap();
        let theta = vec![0.4, -0.2, 0.9];
        let x_prev = vec![theta.clone(); 3];
        let samples: Vec<_> = (1..=3)
            .map(|k| {
                let h = vec![k as f64, 0.5, -1.0];
                let z = h.iter().zip(&theta).map(|(a, b)| a * b).sum();
                sample(k, h, z)
            })
            .collect();
        let params = EstimatorParams::default_experiment();
        let x = mcse_step(&x_prev, &t, &samples, &params, 0).unwrap();
        for (xk, prev) in x.iter().zip(&x_prev) {
            for (a, b) in xk.iter().zip(prev) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn mcse_singleton_areas_beta_zero_equals_adapt_step() {
        let t = Top::load("buses = 3\nbranches = [[1,2],[2,3]]\nnoise_variance = 1.0").unwrap();
        let x_prev = vec![vec![0.1, 0.2, 0.3], vec![0.0; 3], vec![-0.5, 0.4, 0.0]];
        let samples: Vec<_> = (1..=3)
            .map(|k| sample(k, vec![0.3 * k as f64, -0.2, 1.1], 0.7))
            .collect();
        let mut params = EstimatorParams::default_experiment();
        params.alpha = DecaySequence::constant(params.mu);
        params.beta = DecaySequence::constant(0.0);
        let x = mcse_step(&x_prev, &t, &samples, &params, 0).unwrap();
        for k in 0..3 {
            let psi = adapt_step(&x_prev[k], &samples[k], params.mu);
            for (a, b) in x[k].iter().zip(&psi) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn run_iteration_atc_composes_adapt_and_combine() {
        let t = Top::preset("ieee14").unwrap();
        let w = hastings_weights(&t).unwrap();
        let theta = StateVector::ones(&t);
        let scheme = RegressorScheme::RandomGaussian { std: 1.0 };
        let params = EstimatorParams::default_experiment();
        let state = EstimatorState::zeros(&t);
        let samples: Vec<_> = (1..=14)
            .map(|k| {
                let mut rng = measurement_rng(3, 0, k);
                sample_measurement(&t, &theta, scheme, k, 0, &mut rng).unwrap()
            })
            .collect();
        let next =
            run_iteration(Algorithm::Atc, &state, &w, &t, &samples, &params, None).unwrap();
        let psi: Vec<Vec<f64>> = state
            .x
            .iter()
            .zip(&samples)
            .map(|(xk, s)| adapt_step(xk, s, params.mu))
            .collect();
        assert_eq!(next.x, atc_combine(&psi, &w, &t).unwrap());
        assert_eq!(next.iteration, 1);
    }

    #[test]
    fn run_iteration_is_deterministic() {
        let t = Top::preset("ieee14").unwrap();
        let w = hastings_weights(&t).unwrap();
        let theta = StateVector::ones(&t);
        let scheme = RegressorScheme::RandomGaussian { std: 1.0 };
        let params = EstimatorParams::default_experiment();
        let state = EstimatorState::zeros(&t);
        let samples: Vec<_> = (1..=14)
            .map(|k| {
                let mut rng = measurement_rng(11, 2, k);
                sample_measurement(&t, &theta, scheme, k, 0, &mut rng).unwrap()
            })
            .collect();
        for alg in Algorithm::ALL {
            let a = run_iteration(alg, &state, &w, &t, &samples, &params, None).unwrap();
            let b = run_iteration(alg, &state, &w, &t, &samples, &params, None).unwrap();
            assert_eq!(a, b, "{alg:?}");
        }
    }

    #[test]
    fn unknown_algorithm_tag_rejected() {
        assert!(matches!(
            "rls".parse::<Algorithm>(),
            Err(EstimatorError::UnknownAlgorithm(_))
        ));
    }
}
