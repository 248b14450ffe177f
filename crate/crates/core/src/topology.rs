//! Bus-network graph: branches, per-bus noise variances, control areas and
//! the self-inclusive neighborhoods every algorithm iterates over.
//!
//! Bus indices are 1-based everywhere in the public API, matching the
//! conventional numbering of the IEEE test cases.

use serde::Deserialize;
use thiserror::Error;

use crate::scalar::Scalar;

/// The standard IEEE 14-bus line list (20 branches), shipped as a preset
/// so experiments do not depend on transcribing a figure.
pub const IEEE14_CONFIG: &str = include_str!("presets/ieee14.toml");

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("malformed topology document: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("buses must be positive, got {0}")]
    NoBuses(i64),
    #[error("branch ({0}, {1}) references unknown bus (valid range 1..={2})")]
    UnknownBus(usize, usize, usize),
    #[error("branch ({0}, {1}) is a self-loop")]
    SelfLoop(usize, usize),
    #[error("duplicate branch ({0}, {1})")]
    DuplicateBranch(usize, usize),
    #[error("noise_variance for bus {0} is negative: {1}")]
    NegativeVariance(usize, f64),
    #[error("noise_variance_per_bus has {0} entries, expected {1}")]
    VarianceLength(usize, usize),
    #[error("missing noise_variance (give a global value or a per-bus list)")]
    MissingVariance,
    #[error("areas do not partition the bus set: bus {0} appears {1} times")]
    BadPartition(usize, usize),
    #[error("area {0} is empty")]
    EmptyArea(usize),
    #[error("bus index {0} out of range 1..={1}")]
    BusOutOfRange(usize, usize),
    #[error("unknown preset {0:?} (available: ieee14)")]
    UnknownPreset(String),
}

/// Immutable bus graph. Safe to share read-only across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology<T: Scalar> {
    num_buses: usize,
    branches: Vec<(usize, usize)>,
    noise_variance: Vec<T>,
    areas: Vec<Vec<usize>>,
    neighborhoods: Vec<Vec<usize>>,
}

/// On-disk topology document.
///
/// ```toml
/// buses = 3
/// branches = [[1, 2], [2, 3]]
/// noise_variance = 0.001            # or noise_variance_per_bus = [...]
/// areas = [[1, 2], [3]]             # optional; defaults to singletons
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDoc {
    pub buses: i64,
    #[serde(default)]
    pub branches: Vec<(usize, usize)>,
    pub noise_variance: Option<f64>,
    pub noise_variance_per_bus: Option<Vec<f64>>,
    pub areas: Option<Vec<Vec<usize>>>,
}

impl<T: Scalar> Topology<T> {
    pub fn from_doc(doc: &TopologyDoc) -> Result<Self, TopologyError> {
        if doc.buses <= 0 {
            return Err(TopologyError::NoBuses(doc.buses));
        }
        let k = doc.buses as usize;

        let mut branches = Vec::with_capacity(doc.branches.len());
        for &(a, b) in &doc.branches {
            if a == b {
                return Err(TopologyError::SelfLoop(a, b));
            }
            if a < 1 || a > k || b < 1 || b > k {
                return Err(TopologyError::UnknownBus(a, b, k));
            }
            let e = (a.min(b), a.max(b));
            if branches.contains(&e) {
                return Err(TopologyError::DuplicateBranch(a, b));
            }
            branches.push(e);
        }
        branches.sort_unstable();

        let noise_variance: Vec<f64> = match (&doc.noise_variance_per_bus, doc.noise_variance) {
            (Some(per_bus), _) => {
                if per_bus.len() != k {
                    return Err(TopologyError::VarianceLength(per_bus.len(), k));
                }
                per_bus.clone()
            }
            (None, Some(global)) => vec![global; k],
            (None, None) => return Err(TopologyError::MissingVariance),
        };
        for (idx, &v) in noise_variance.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(TopologyError::NegativeVariance(idx + 1, v));
            }
        }

        let areas = match &doc.areas {
            Some(areas) => {
                let mut seen = vec![0usize; k + 1];
                for (n, area) in areas.iter().enumerate() {
                    if area.is_empty() {
                        return Err(TopologyError::EmptyArea(n + 1));
                    }
                    for &bus in area {
                        if bus < 1 || bus > k {
                            return Err(TopologyError::BusOutOfRange(bus, k));
                        }
                        seen[bus] += 1;
                    }
                }
                if let Some(bus) = (1..=k).find(|&b| seen[b] != 1) {
                    return Err(TopologyError::BadPartition(bus, seen[bus]));
                }
                areas.iter().map(|a| {
                    let mut a = a.clone();
                    a.sort_unstable();
                    a
                }).collect()
            }
            None => (1..=k).map(|b| vec![b]).collect(),
        };

        let mut neighborhoods: Vec<Vec<usize>> = (1..=k).map(|b| vec![b]).collect();
        for &(a, b) in &branches {
            neighborhoods[a - 1].push(b);
            neighborhoods[b - 1].push(a);
        }
        for n in &mut neighborhoods {
            n.sort_unstable();
        }

        Ok(Topology {
            num_buses: k,
            branches,
            noise_variance: noise_variance.into_iter().map(T::of).collect(),
            areas,
            neighborhoods,
        })
    }

    /// Parse and validate a topology document (TOML text).
    pub fn load(config_text: &str) -> Result<Self, TopologyError> {
        let doc: TopologyDoc = toml::from_str(config_text)?;
        Self::from_doc(&doc)
    }

    /// Look up a built-in preset by name.
    pub fn preset(name: &str) -> Result<Self, TopologyError> {
        match name {
            "ieee14" => Self::load(IEEE14_CONFIG),
            other => Err(TopologyError::UnknownPreset(other.to_string())),
        }
    }

    pub fn num_buses(&self) -> usize {
        self.num_buses
    }

    pub fn branches(&self) -> &[(usize, usize)] {
        &self.branches
    }

    /// Self-inclusive neighborhood of bus `k`, ascending.
    pub fn neighborhood(&self, k: usize) -> Result<&[usize], TopologyError> {
        self.check_bus(k)?;
        Ok(&self.neighborhoods[k - 1])
    }

    /// Number of branches incident to `k` (so `|N_k| = degree(k) + 1`).
    pub fn degree(&self, k: usize) -> Result<usize, TopologyError> {
        Ok(self.neighborhood(k)?.len() - 1)
    }

    pub fn noise_variance(&self, k: usize) -> Result<T, TopologyError> {
        self.check_bus(k)?;
        Ok(self.noise_variance[k - 1])
    }

    pub fn areas(&self) -> &[Vec<usize>] {
        &self.areas
    }

    /// Indices (0-based into `areas()`) of areas adjacent to area `n`,
    /// where two areas are adjacent when any branch joins them.
    pub fn adjacent_areas(&self, n: usize) -> Vec<usize> {
        let area_of: Vec<usize> = {
            let mut m = vec![0usize; self.num_buses + 1];
            for (idx, area) in self.areas.iter().enumerate() {
                for &bus in area {
                    m[bus] = idx;
                }
            }
            m
        };
        let mut adj: Vec<usize> = self
            .branches
            .iter()
            .filter_map(|&(a, b)| {
                let (na, nb) = (area_of[a], area_of[b]);
                if na == n && nb != n {
                    Some(nb)
                } else if nb == n && na != n {
                    Some(na)
                } else {
                    None
                }
            })
            .collect();
        adj.sort_unstable();
        adj.dedup();
        adj
    }

    fn check_bus(&self, k: usize) -> Result<(), TopologyError> {
        if k < 1 || k > self.num_buses {
            return Err(TopologyError::BusOutOfRange(k, self.num_buses));
        }
        Ok(())
    }
}
