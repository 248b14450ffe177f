//! Experiment runner: parse a TOML experiment config, execute seeded Monte
//! Carlo runs, average the metric traces and export CSV plus a plot script.
//!
//! Reproducibility contract: (config, seed) -> identical output bytes. Run
//! r draws only from the (r, bus) RNG streams, so runs are order-independent
//! and adding runs never perturbs existing ones.

use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::combiner::{hastings_weights, metropolis_weights, CombinerError, WeightMatrix};
use crate::estimators::{
    Algorithm, DecaySequence, Estimator, EstimatorError, EstimatorParams,
};
use crate::measurement::{
    measurement_rng, sample_measurement, MeasurementError, RegressorScheme, StateVector,
};
use crate::metrics::{average_traces, GapDefinition, MetricsError, MetricsTrace};
use crate::topology::{Topology, TopologyDoc, TopologyError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("malformed experiment config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Combiner(#[from] CombinerError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("topology section must name a preset, a file, or inline buses")]
    AmbiguousTopology,
    #[error("iterations must be >= 1")]
    NoIterations,
    #[error("runs must be >= 1")]
    NoRuns,
    #[error("theta spec {0:?} is not \"ones\" or an explicit vector")]
    BadTheta(String),
    #[error("unknown regressor scheme {0:?} (expected random-gaussian or dc-jacobian)")]
    BadScheme(String),
    #[error("unknown combiner {0:?} (expected hastings or metropolis)")]
    BadCombiner(String),
    #[error("gap bus {0} out of range 1..={1}")]
    GapBusOutOfRange(usize, usize),
    #[error("compare needs configs sharing topology, iterations, runs and seed")]
    CompareMismatch,
    #[error("compare needs at least one algorithm")]
    CompareEmpty,
}

fn io_err(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Topology selection inside an experiment config: a preset name, a file
/// path, or an inline document. `noise_variance`, `noise_variance_per_bus`
/// and `areas` override the preset/file values when given.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub preset: Option<String>,
    pub file: Option<String>,
    pub buses: Option<i64>,
    pub branches: Option<Vec<(usize, usize)>>,
    pub noise_variance: Option<f64>,
    pub noise_variance_per_bus: Option<Vec<f64>>,
    pub areas: Option<Vec<Vec<usize>>>,
}

impl TopologySpec {
    pub fn resolve(&self) -> Result<Topology<f64>, HarnessError> {
        let mut doc: TopologyDoc = match (&self.preset, &self.file, self.buses) {
            (Some(name), None, None) => match name.as_str() {
                "ieee14" => toml::from_str(crate::topology::IEEE14_CONFIG)
                    .map_err(TopologyError::Parse)?,
                other => return Err(TopologyError::UnknownPreset(other.to_string()).into()),
            },
            (None, Some(path), None) => {
                let path = Path::new(path);
                let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                toml::from_str(&text).map_err(TopologyError::Parse)?
            }
            (None, None, Some(buses)) => TopologyDoc {
                buses,
                branches: self.branches.clone().unwrap_or_default(),
                noise_variance: None,
                noise_variance_per_bus: None,
                areas: None,
            },
            _ => return Err(HarnessError::AmbiguousTopology),
        };
        if let Some(v) = self.noise_variance {
            doc.noise_variance = Some(v);
            doc.noise_variance_per_bus = None;
        }
        if let Some(v) = &self.noise_variance_per_bus {
            doc.noise_variance_per_bus = Some(v.clone());
        }
        if let Some(a) = &self.areas {
            doc.areas = Some(a.clone());
        }
        Ok(Topology::from_doc(&doc)?)
    }
}

/// `theta = "ones"` or an explicit vector.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Named(String),
    Explicit(Vec<f64>),
}

impl Default for ThetaSpec {
    fn default() -> Self {
        ThetaSpec::Named("ones".to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub epsilon: Option<f64>,
    pub alpha: Option<DecaySpec>,
    pub beta: Option<DecaySpec>,
    pub desta_renormalize: Option<bool>,
    pub desta_ewma: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub base: f64,
    #[serde(default)]
    pub gamma: f64,
}

/// Full experiment description. Unknown keys anywhere are hard errors.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologySpec,
    pub algorithm: String,
    pub iterations: usize,
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub theta: ThetaSpec,
    #[serde(default = "default_regressors")]
    pub regressors: String,
    #[serde(default = "default_regressor_std")]
    pub regressor_std: f64,
    #[serde(default = "default_combiner")]
    pub combiner: String,
    #[serde(default = "default_gap_buses")]
    pub gap_buses: Vec<usize>,
    #[serde(default)]
    pub gap: GapDefinition,
    pub output: Option<String>,
    pub params: Option<ParamsSpec>,
}

fn default_regressors() -> String {
    "random-gaussian".to_string()
}

fn default_regressor_std() -> f64 {
    1.0
}

fn default_combiner() -> String {
    "hastings".to_string()
}

fn default_gap_buses() -> Vec<usize> {
    vec![5]
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn params(&self) -> EstimatorParams<f64> {
        let mut p = EstimatorParams::default_experiment();
        if let Some(spec) = &self.params {
            if let Some(mu) = spec.mu {
                p.mu = mu;
                p.alpha = DecaySequence::constant(mu);
                p.beta = DecaySequence::constant(mu);
            }
            if let Some(rho) = spec.rho {
                p.rho = rho;
            }
            if let Some(eps) = spec.epsilon {
                p.epsilon = eps;
            }
            if let Some(a) = spec.alpha {
                p.alpha = DecaySequence {
                    base: a.base,
                    gamma: a.gamma,
                };
            }
            if let Some(b) = spec.beta {
                p.beta = DecaySequence {
                    base: b.base,
                    gamma: b.gamma,
                };
            }
            if let Some(r) = spec.desta_renormalize {
                p.desta_renormalize = r;
            }
            p.desta_ewma = spec.desta_ewma;
        }
        p
    }

    fn scheme(&self) -> Result<RegressorScheme<f64>, HarnessError> {
        match self.regressors.as_str() {
            "random-gaussian" => Ok(RegressorScheme::RandomGaussian {
                std: self.regressor_std,
            }),
            "dc-jacobian" => Ok(RegressorScheme::DcJacobian),
            other => Err(HarnessError::BadScheme(other.to_string())),
        }
    }

    fn weights(&self, t: &Topology<f64>) -> Result<WeightMatrix<f64>, HarnessError> {
        match self.combiner.as_str() {
            "hastings" => Ok(hastings_weights(t)?),
            "metropolis" => Ok(metropolis_weights(t)?),
            other => Err(HarnessError::BadCombiner(other.to_string())),
        }
    }

    fn theta(&self, t: &Topology<f64>) -> Result<StateVector<f64>, HarnessError> {
        match &self.theta {
            ThetaSpec::Named(name) if name == "ones" => Ok(StateVector::ones(t)),
            ThetaSpec::Named(other) => Err(HarnessError::BadTheta(other.clone())),
            ThetaSpec::Explicit(v) => Ok(StateVector::new(v.clone(), t)?),
        }
    }

    fn validate(&self, t: &Topology<f64>) -> Result<(), HarnessError> {
        if self.iterations == 0 {
            return Err(HarnessError::NoIterations);
        }
        if self.runs == 0 {
            return Err(HarnessError::NoRuns);
        }
        for &k in &self.gap_buses {
            if k < 1 || k > t.num_buses() {
                return Err(HarnessError::GapBusOutOfRange(k, t.num_buses()));
            }
        }
        Ok(())
    }
}

/// Averaged result of one experiment.
#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub trace: MetricsTrace<f64>,
    pub label: String,
    /// Resolved config echoed back for auditability.
    pub config_echo: String,
    pub duration: Duration,
}

/// Execute `cfg.runs` independent seeded trajectories and average the traces.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultBundle, HarnessError> {
    let start = Instant::now();
    let t = cfg.topology.resolve()?;
    cfg.validate(&t)?;
    let algorithm: Algorithm = cfg.algorithm.parse()?;
    let scheme = cfg.scheme()?;
    let weights = cfg.weights(&t)?;
    let theta = cfg.theta(&t)?;
    let params = cfg.params();

    let traces: Vec<MetricsTrace<f64>> = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|run| single_run(cfg, &t, algorithm, scheme, &weights, &theta, &params, run))
        .collect::<Result<_, _>>()?;
    let trace = average_traces(&traces)?;

    Ok(ResultBundle {
        trace,
        label: algorithm.label().to_string(),
        config_echo: format!("{cfg:?}"),
        duration: start.elapsed(),
    })
}

#[allow(clippy::too_many_arguments)]
fn single_run(
    cfg: &ExperimentConfig,
    t: &Topology<f64>,
    algorithm: Algorithm,
    scheme: RegressorScheme<f64>,
    weights: &WeightMatrix<f64>,
    theta: &StateVector<f64>,
    params: &EstimatorParams<f64>,
    run: u64,
) -> Result<MetricsTrace<f64>, HarnessError> {
    let k_count = t.num_buses();
    let mut rngs: Vec<_> = (1..=k_count)
        .map(|bus| measurement_rng(cfg.seed, run, bus))
        .collect();
    let mut estimator = Estimator::new(algorithm, t, weights.clone(), params.clone());
    let mut trace = MetricsTrace::with_capacity(cfg.iterations);
    for i in 0..cfg.iterations {
        let samples: Vec<_> = (1..=k_count)
            .map(|bus| sample_measurement(t, theta, scheme, bus, i, &mut rngs[bus - 1]))
            .collect::<Result<_, _>>()?;
        estimator.step(t, &samples)?;
        trace.record(estimator.state(), theta, cfg.gap);
    }
    Ok(trace)
}

fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.12e}")
    }
}

fn mse_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Write the averaged trace as CSV: iteration, mse_linear, mse_db and one
/// gap column per requested bus.
pub fn export_csv(
    bundle: &ResultBundle,
    gap_buses: &[usize],
    path: &Path,
) -> Result<(), HarnessError> {
    let mut out = String::new();
    out.push_str("iteration,mse_linear,mse_db");
    for &k in gap_buses {
        out.push_str(&format!(",gap_bus_{k}"));
    }
    out.push('\n');
    for i in 0..bundle.trace.iterations() {
        let mse = bundle.trace.mse[i];
        out.push_str(&format!(
            "{i},{},{}",
            format_value(mse),
            format_value(mse_db(mse))
        ));
        for &k in gap_buses {
            out.push_str(&format!(",{}", format_value(bundle.trace.gap[i][k - 1])));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Run several configs that differ only in their algorithm blocks and write
/// one CSV with per-algorithm MSE and gap (designated bus) columns, plus a
/// plot script next to it.
pub fn compare_experiments(
    cfgs: &[ExperimentConfig],
    gap_bus: usize,
    csv_path: &Path,
) -> Result<Vec<ResultBundle>, HarnessError> {
    if cfgs.is_empty() {
        return Err(HarnessError::CompareEmpty);
    }
    let first = &cfgs[0];
    let base_top = first.topology.resolve()?;
    for cfg in &cfgs[1..] {
        let top = cfg.topology.resolve()?;
        if top != base_top
            || cfg.iterations != first.iterations
            || cfg.runs != first.runs
            || cfg.seed != first.seed
        {
            return Err(HarnessError::CompareMismatch);
        }
    }
    if gap_bus < 1 || gap_bus > base_top.num_buses() {
        return Err(HarnessError::GapBusOutOfRange(gap_bus, base_top.num_buses()));
    }

    let bundles: Vec<ResultBundle> = cfgs
        .iter()
        .map(run_experiment)
        .collect::<Result<_, _>>()?;

    let mut out = String::new();
    out.push_str("iteration");
    for b in &bundles {
        out.push_str(&format!(",mse_{0},mse_db_{0}", b.label));
    }
    for b in &bundles {
        out.push_str(&format!(",gap_bus_{gap_bus}_{}", b.label));
    }
    out.push('\n');
    for i in 0..first.iterations {
        out.push_str(&i.to_string());
        for b in &bundles {
            let mse = b.trace.mse[i];
            out.push_str(&format!(
                ",{},{}",
                format_value(mse),
                format_value(mse_db(mse))
            ));
        }
        for b in &bundles {
            out.push_str(&format!(",{}", format_value(b.trace.gap[i][gap_bus - 1])));
        }
        out.push('\n');
    }
    std::fs::write(csv_path, out).map_err(|e| io_err(csv_path, e))?;

    let script_path = csv_path.with_extension("py");
    let labels: Vec<&str> = bundles.iter().map(|b| b.label.as_str()).collect();
    let script = plot_script(csv_path, &labels, gap_bus);
    std::fs::write(&script_path, script).map_err(|e| io_err(&script_path, e))?;
    Ok(bundles)
}

fn plot_script(csv_path: &Path, labels: &[&str], gap_bus: usize) -> String {
    let csv_name = csv_path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "compare.csv".to_string());
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str("import csv\n\nimport matplotlib.pyplot as plt\n\n");
    s.push_str(&format!("with open({csv_name:?}) as f:\n"));
    s.push_str("    rows = list(csv.DictReader(f))\n");
    s.push_str("it = [int(r[\"iteration\"]) for r in rows]\n\n");
    s.push_str("fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))\n");
    for label in labels {
        s.push_str(&format!(
            "ax1.plot(it, [float(r[\"mse_db_{label}\"]) for r in rows], label={label:?})\n"
        ));
    }
    s.push_str("ax1.set_xlabel(\"iteration\")\nax1.set_ylabel(\"MSE (dB)\")\nax1.legend()\n\n");
    for label in labels {
        s.push_str(&format!(
            "ax2.plot(it, [float(r[\"gap_bus_{gap_bus}_{label}\"]) for r in rows], label={label:?})\n"
        ));
    }
    s.push_str(&format!(
        "ax2.set_xlabel(\"iteration\")\nax2.set_ylabel(\"phase angle gap (bus {gap_bus})\")\nax2.legend()\n\n"
    ));
    s.push_str("plt.tight_layout()\nplt.savefig(\"compare.png\", dpi=150)\n");
    s
}
