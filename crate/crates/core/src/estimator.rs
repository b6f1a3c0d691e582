//! Chernoff-calibrated estimation of IGS centrality from RR sets.
//!
//! For a sample `R_1..R_t` the statistic is
//! `φ̂(S) = n/t · Σ_i 1[R_i ∩ S ≠ ∅] / (|R_i \ S| + 1)`.
//! Sample sizes use the natural logarithm.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diffusion::{sample_rr_collection, RrSample, SamplingOptions};
use crate::error::{Error, Result};
use crate::graph::{InfluenceGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorMode {
    /// `(1 ± ε)` accuracy for one fixed set: `6 n² ε⁻² c ln n` sets.
    Single,
    /// One-sided accuracy uniformly over all size-`k` sets: `6 n ε⁻² (c + k) ln n` sets.
    Uniform,
    /// Enough sets for greedy selection: `24 n ε⁻² (c + k) ln n`.
    Selection,
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorMode::Single => "single",
            EstimatorMode::Uniform => "uniform",
            EstimatorMode::Selection => "selection",
        })
    }
}

impl FromStr for EstimatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "singleset" | "single-set" => Ok(EstimatorMode::Single),
            "uniform" => Ok(EstimatorMode::Uniform),
            "selection" => Ok(EstimatorMode::Selection),
            other => Err(Error::param(format!("unknown mode '{other}' (expected single, uniform or selection)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub c: f64,
    /// Budget; ignored in `Single` mode.
    pub k: usize,
    pub mode: EstimatorMode,
}

pub const DEFAULT_C: f64 = 2.0;

impl EstimatorConfig {
    pub fn single(epsilon: f64) -> Self {
        EstimatorConfig { epsilon, c: DEFAULT_C, k: 1, mode: EstimatorMode::Single }
    }

    pub fn selection(epsilon: f64, k: usize) -> Self {
        EstimatorConfig { epsilon, c: DEFAULT_C, k, mode: EstimatorMode::Selection }
    }

    pub fn with_c(self, c: f64) -> Self {
        EstimatorConfig { c, ..self }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param("epsilon must be in (0,1)"));
        }
        if !(self.c >= 2.0) || !self.c.is_finite() {
            return Err(Error::param("c must be at least 2"));
        }
        if self.mode != EstimatorMode::Single && (self.k < 1 || self.k > n) {
            return Err(Error::param(format!("k must be in [1, {n}]")));
        }
        Ok(())
    }
}

/// Smallest integer `t` meeting the sample-size bound of the configured mode.
pub fn required_sample_size(n: usize, config: &EstimatorConfig) -> Result<u64> {
    if n < 2 {
        return Err(Error::param("n must be at least 2"));
    }
    config.validate(n)?;
    let nf = n as f64;
    let scale = nf.ln() / (config.epsilon * config.epsilon);
    let bound = match config.mode {
        EstimatorMode::Single => 6.0 * nf * nf * config.c * scale,
        EstimatorMode::Uniform => 6.0 * nf * (config.c + config.k as f64) * scale,
        EstimatorMode::Selection => 24.0 * nf * (config.c + config.k as f64) * scale,
    };
    if bound >= u64::MAX as f64 {
        return Err(Error::ResourceCap(format!("sample size {bound:e} overflows")));
    }
    Ok(bound.ceil() as u64)
}

/// `φ̂(S)` over a fixed sample. Touches only the sets containing members of `S`.
pub fn evaluate_hat_phi(sample: &RrSample, set: &[NodeId]) -> f64 {
    let t = sample.len() as f64;
    let n = sample.node_count() as f64;
    n * sample.family().harmonic_hit_sum(set) / t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub set: Vec<NodeId>,
    pub estimate: f64,
    pub t: u64,
}

/// Samples a `Single`-mode number of RR sets and returns `φ̃(S)`.
pub fn estimate_phi_single(
    graph: &InfluenceGraph,
    set: &[NodeId],
    epsilon: f64,
    c: f64,
    base_seed: u64,
    opts: &SamplingOptions,
) -> Result<Estimate> {
    if set.is_empty() {
        return Err(Error::Precondition("set must be nonempty".into()));
    }
    if let Some(v) = set.iter().find(|&&v| v as usize >= graph.node_count()) {
        return Err(Error::param(format!("node {v} out of range")));
    }
    let config = EstimatorConfig { epsilon, c, k: 1, mode: EstimatorMode::Single };
    let t = required_sample_size(graph.node_count(), &config)?;
    let sample = sample_rr_collection(graph, t, base_seed, opts)?;
    let mut set = set.to_vec();
    set.sort_unstable();
    set.dedup();
    let estimate = evaluate_hat_phi(&sample, &set);
    Ok(Estimate { set, estimate, t })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    /// `exp(-α² t μ / 2)`; only defined for `α < 1`.
    pub lower: Option<f64>,
    /// `exp(-α² t μ / (2 + 2α/3))`.
    pub upper: f64,
}

/// Chernoff tail bounds for the mean of `t` i.i.d. `[0,1]` variables with mean `mu`
/// deviating by a relative `alpha`.
pub fn chernoff_tail_bounds(alpha: f64, t: u64, mu: f64) -> Result<TailBounds> {
    if t == 0 {
        return Err(Error::param("t must be at least 1"));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::param("mu must be in (0,1]"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha must be positive"));
    }
    let scale = alpha * alpha * t as f64 * mu;
    let lower = (alpha < 1.0).then(|| (-scale / 2.0).exp());
    let upper = (-scale / (2.0 + 2.0 * alpha / 3.0)).exp();
    Ok(TailBounds { lower, upper })
}
