//! Harmonic max hitting set: the `f_Z` / `h_Z` objectives, greedy maximization of `h_Z`,
//! an exhaustive `f_Z` optimum, and seed selection on sampled RR sets.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::diffusion::{sample_rr_collection, RrSample, SamplingOptions};
use crate::estimator::{required_sample_size, EstimatorConfig, EstimatorMode};
use crate::error::{Error, Result};
use crate::family::{CompensatedSum, SetFamily};
use crate::graph::{InfluenceGraph, NodeId};
use crate::shapley::binomial;

/// Largest number of candidate sets `brute_force_f` enumerates.
pub const MAX_BRUTE_FORCE_CANDIDATES: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct HittingInstance {
    family: SetFamily,
    k: usize,
}

impl HittingInstance {
    pub fn new(n: usize, sets: Vec<Vec<NodeId>>, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("ground set must be nonempty"));
        }
        let mut normalized = Vec::with_capacity(sets.len());
        for (i, mut s) in sets.into_iter().enumerate() {
            s.sort_unstable();
            s.dedup();
            match s.last() {
                None => return Err(Error::param(format!("set {i} is empty"))),
                Some(&u) if u as usize >= n => {
                    return Err(Error::param(format!("set {i} has element {u} outside 0..{n}")))
                }
                _ => normalized.push(s),
            }
        }
        Self::with_family(SetFamily::from_sorted_sets(n, normalized), k)
    }

    pub fn from_sample(sample: &RrSample, k: usize) -> Result<Self> {
        Self::with_family(sample.family().clone(), k)
    }

    fn with_family(family: SetFamily, k: usize) -> Result<Self> {
        let n = family.universe();
        if k < 1 || k > n {
            return Err(Error::param(format!("k must be in [1, {n}]")));
        }
        Ok(HittingInstance { family, k })
    }

    pub fn ground_size(&self) -> usize {
        self.family.universe()
    }

    pub fn set_count(&self) -> usize {
        self.family.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    fn check(&self, set: &[NodeId]) -> Result<()> {
        match set.iter().find(|&&u| u as usize >= self.ground_size()) {
            Some(u) => Err(Error::param(format!("element {u} outside 0..{}", self.ground_size()))),
            None => Ok(()),
        }
    }

    /// `f_Z(S) = Σ 1[Z_i ∩ S ≠ ∅] / (|Z_i \ S| + 1)`.
    pub fn f_value(&self, set: &[NodeId]) -> Result<f64> {
        self.check(set)?;
        Ok(self.family.harmonic_hit_sum(set))
    }

    /// `h_Z(S) = Σ 1[Z_i ∩ S ≠ ∅] / |Z_i|`.
    pub fn h_value(&self, set: &[NodeId]) -> Result<f64> {
        self.check(set)?;
        Ok(self.family.inverse_size_hit_sum(set))
    }

    /// `h_Z` gain of `u` given the sets already hit.
    fn h_gain(&self, u: NodeId, hit: &[bool]) -> f64 {
        let mut acc = CompensatedSum::default();
        for &i in self.family.containing(u) {
            if !hit[i as usize] {
                acc.add(1.0 / self.family.set_len(i as usize) as f64);
            }
        }
        acc.value()
    }

    fn mark_hit(&self, u: NodeId, hit: &mut [bool]) {
        for &i in self.family.containing(u) {
            hit[i as usize] = true;
        }
    }

    fn finish(&self, chosen: Vec<NodeId>, gains: Vec<f64>) -> GreedyTrace {
        let f_value = self.family.harmonic_hit_sum(&chosen);
        let h_value = self.family.inverse_size_hit_sum(&chosen);
        GreedyTrace { chosen, gains, f_value, h_value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    /// Elements in the order picked.
    pub chosen: Vec<NodeId>,
    /// `h_Z` marginal gain of each pick.
    pub gains: Vec<f64>,
    pub f_value: f64,
    pub h_value: f64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    node: NodeId,
    round: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Max-heap: larger gain first, then smaller id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then_with(|| other.node.cmp(&self.node))
    }
}

/// Lazy greedy maximization of `h_Z` with up to `k` picks; ties go to the smallest id and
/// the loop stops once the best gain is 0.
pub fn greedy_h(instance: &HittingInstance) -> GreedyTrace {
    let n = instance.ground_size();
    let mut hit = vec![false; instance.set_count()];
    let mut heap: BinaryHeap<Candidate> = (0..n as NodeId)
        .map(|u| Candidate { gain: instance.h_gain(u, &hit), node: u, round: 0 })
        .collect();
    let mut chosen = Vec::new();
    let mut gains = Vec::new();
    while chosen.len() < instance.k() {
        let Some(top) = heap.pop() else { break };
        if top.round != chosen.len() {
            let gain = instance.h_gain(top.node, &hit);
            heap.push(Candidate { gain, node: top.node, round: chosen.len() });
            continue;
        }
        if top.gain <= 0.0 {
            break;
        }
        instance.mark_hit(top.node, &mut hit);
        chosen.push(top.node);
        gains.push(top.gain);
    }
    instance.finish(chosen, gains)
}

/// Literal greedy: recomputes every gain in every round. Reference for `greedy_h`.
pub fn naive_greedy_h(instance: &HittingInstance) -> GreedyTrace {
    let n = instance.ground_size() as NodeId;
    let mut hit = vec![false; instance.set_count()];
    let mut taken = vec![false; n as usize];
    let mut chosen = Vec::new();
    let mut gains = Vec::new();
    while chosen.len() < instance.k() {
        let mut best: Option<(f64, NodeId)> = None;
        for u in (0..n).filter(|&u| !taken[u as usize]) {
            let g = instance.h_gain(u, &hit);
            if best.map_or(true, |(bg, _)| g > bg) {
                best = Some((g, u));
            }
        }
        match best {
            Some((g, u)) if g > 0.0 => {
                taken[u as usize] = true;
                instance.mark_hit(u, &mut hit);
                chosen.push(u);
                gains.push(g);
            }
            _ => break,
        }
    }
    instance.finish(chosen, gains)
}

/// Exact maximizer of `f_Z` over sets of size at most `k`. `f_Z` is monotone, so only sets of
/// size exactly `k` are scanned; ties go to the lexicographically smallest set.
pub fn brute_force_f(instance: &HittingInstance) -> Result<(Vec<NodeId>, f64)> {
    let n = instance.ground_size();
    let k = instance.k();
    let candidates = binomial(n as u64, k as u64);
    if candidates > MAX_BRUTE_FORCE_CANDIDATES || (candidates == 0 && n > 0) {
        return Err(Error::TooLarge(format!(
            "C({n}, {k}) candidates exceed {MAX_BRUTE_FORCE_CANDIDATES}"
        )));
    }
    let mut best: Option<(Vec<NodeId>, f64)> = None;
    for combo in (0..n as NodeId).combinations(k) {
        let value = instance.family.harmonic_hit_sum(&combo);
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((combo, value));
        }
    }
    Ok(best.expect("k ≤ n yields at least one candidate"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Chosen nodes, sorted ascending.
    pub seeds: Vec<NodeId>,
    pub hat_phi: f64,
    pub t: u64,
    /// `(1 − 1/e)/k − ε`; `None` when no accuracy target applies (fixed sample).
    pub guarantee: Option<f64>,
    pub trace: GreedyTrace,
    /// Nodes appended after greedy stopped on a zero gain, in order added.
    pub padding: Vec<NodeId>,
}

/// Runs `greedy_h` on `sample` and fills the set up to `k` nodes by largest `f_Z` gain
/// (smallest id on ties) when greedy stops early.
pub fn select_from_sample(sample: &RrSample, k: usize) -> Result<Selection> {
    let instance = HittingInstance::from_sample(sample, k)?;
    let trace = greedy_h(&instance);
    let mut seeds = trace.chosen.clone();
    let mut padding = Vec::new();
    let n = instance.ground_size() as NodeId;
    while seeds.len() < k {
        let base = instance.family.harmonic_hit_sum(&seeds);
        let mut best: Option<(f64, NodeId)> = None;
        for u in 0..n {
            if seeds.contains(&u) {
                continue;
            }
            seeds.push(u);
            let gain = instance.family.harmonic_hit_sum(&seeds) - base;
            seeds.pop();
            if best.map_or(true, |(bg, _)| gain > bg) {
                best = Some((gain, u));
            }
        }
        let (_, u) = best.expect("k ≤ n leaves a free node");
        seeds.push(u);
        padding.push(u);
    }
    seeds.sort_unstable();
    let f = instance.family.harmonic_hit_sum(&seeds);
    let hat_phi = sample.node_count() as f64 * f / sample.len() as f64;
    Ok(Selection { seeds, hat_phi, t: sample.len() as u64, guarantee: None, trace, padding })
}

/// Samples a `Selection`-size collection of RR sets and picks `k` seeds from it.
pub fn max_shapley_group(
    graph: &InfluenceGraph,
    k: usize,
    epsilon: f64,
    c: f64,
    base_seed: u64,
    opts: &SamplingOptions,
) -> Result<Selection> {
    let config = EstimatorConfig { epsilon, c, k, mode: EstimatorMode::Selection };
    let t = required_sample_size(graph.node_count(), &config)?;
    let sample = sample_rr_collection(graph, t, base_seed, opts)?;
    let mut selection = select_from_sample(&sample, k)?;
    selection.guarantee = Some((1.0 - (-1.0f64).exp()) / k as f64 - epsilon);
    Ok(selection)
}
