//! Exact Group Shapley values of node sets under the spread function, for desk-scale graphs.
//!
//! Two independent routes are provided: the weighted sum over coalitions `T ⊆ V \ S`, and
//! the average over orderings of `V \ S` plus one merged player standing in for `S`. Both
//! evaluate the spread exactly from an enumerated outcome table (forward reachability only,
//! no RR sets involved).

use std::collections::HashMap;

use itertools::Itertools;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::diffusion::{stream_rng, OutcomeSpace, MAX_ENUMERATED_OUTCOMES};
use crate::error::{Error, Result};
use crate::graph::{InfluenceGraph, NodeId};

/// Largest `|V \ S|` the coalition-sum route accepts.
pub const MAX_SUBSET_COMPLEMENT: usize = 18;
/// Largest number of players (`|V \ S| + 1`) the ordering route permutes.
pub const MAX_PERMUTATION_PLAYERS: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupValue {
    pub set: Vec<NodeId>,
    pub value: f64,
}

/// Enumerated outcome table of one graph with memoized spread values.
pub struct ShapleyOracle {
    n: usize,
    /// Per outcome: probability and, for every node, the bitmask of nodes it reaches.
    outcomes: Vec<(f64, Vec<u64>)>,
    memo: HashMap<u64, f64>,
}

impl ShapleyOracle {
    pub fn new(graph: &InfluenceGraph) -> Result<Self> {
        let n = graph.node_count();
        if n > 64 {
            return Err(Error::TooLarge(format!("exact oracle supports at most 64 nodes, graph has {n}")));
        }
        let space = OutcomeSpace::new(graph, MAX_ENUMERATED_OUTCOMES)?;
        let mut outcomes = Vec::with_capacity(space.count() as usize);
        space.for_each(|p, outcome| {
            let reach = (0..n as NodeId)
                .map(|v| outcome.forward_reachable(&[v]).iter().fold(0u64, |m, &u| m | 1 << u))
                .collect();
            outcomes.push((p, reach));
        });
        Ok(ShapleyOracle { n, outcomes, memo: HashMap::new() })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    fn mask_of(&self, nodes: &[NodeId]) -> Result<u64> {
        let mut mask = 0u64;
        for &v in nodes {
            if v as usize >= self.n {
                return Err(Error::param(format!("node {v} out of range 0..{}", self.n)));
            }
            mask |= 1 << v;
        }
        Ok(mask)
    }

    /// Exact spread of the node set encoded by `mask`.
    pub fn sigma_mask(&mut self, mask: u64) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        if let Some(&s) = self.memo.get(&mask) {
            return s;
        }
        let mut sigma = 0.0;
        for (p, reach) in &self.outcomes {
            let mut covered = 0u64;
            let mut rest = mask;
            while rest != 0 {
                let v = rest.trailing_zeros();
                covered |= reach[v as usize];
                rest &= rest - 1;
            }
            sigma += p * covered.count_ones() as f64;
        }
        self.memo.insert(mask, sigma);
        sigma
    }

    pub fn sigma(&mut self, nodes: &[NodeId]) -> Result<f64> {
        let mask = self.mask_of(nodes)?;
        Ok(self.sigma_mask(mask))
    }

    fn complement(&self, s_mask: u64) -> Vec<NodeId> {
        (0..self.n as NodeId).filter(|&v| s_mask >> v & 1 == 0).collect()
    }

    /// `Σ_{T ⊆ V\S} |T|!(n-|S|-|T|)!/(n-|S|+1)! · (σ(T∪S) − σ(T))`, with the differences
    /// grouped by `|T|` and each group divided once by its exact integer denominator.
    pub fn group_shapley_subsets(&mut self, set: &[NodeId]) -> Result<f64> {
        let s_mask = self.mask_of(set)?;
        if s_mask == 0 {
            return Ok(0.0);
        }
        let rest = self.complement(s_mask);
        let m = rest.len();
        if m > MAX_SUBSET_COMPLEMENT {
            return Err(Error::TooLarge(format!("|V \\ S| = {m} exceeds {MAX_SUBSET_COMPLEMENT}")));
        }
        let mut by_size = vec![0.0f64; m + 1];
        for pick in 0u64..(1u64 << m) {
            let mut t_mask = 0u64;
            for (j, &v) in rest.iter().enumerate() {
                if pick >> j & 1 == 1 {
                    t_mask |= 1 << v;
                }
            }
            let diff = self.sigma_mask(t_mask | s_mask) - self.sigma_mask(t_mask);
            by_size[pick.count_ones() as usize] += diff;
        }
        // |T|!(m-|T|)!/(m+1)! = 1 / ((m+1) * C(m, |T|))
        let value = by_size
            .iter()
            .enumerate()
            .map(|(j, &sum)| sum / ((m as u64 + 1) * binomial(m as u64, j as u64)) as f64)
            .sum();
        Ok(value)
    }

    /// Average of `σ(T∪S) − σ(T)` over all orderings of `V\S` plus the merged player,
    /// where `T` is whatever precedes the merged player.
    pub fn group_shapley_permutations(&mut self, set: &[NodeId]) -> Result<f64> {
        let s_mask = self.mask_of(set)?;
        if s_mask == 0 {
            return Ok(0.0);
        }
        let rest = self.complement(s_mask);
        let players = rest.len() + 1;
        if players > MAX_PERMUTATION_PLAYERS {
            return Err(Error::TooLarge(format!("{players} players exceed {MAX_PERMUTATION_PLAYERS}")));
        }
        let merged = rest.len();
        let mut total = 0.0;
        let mut count = 0u64;
        for order in (0..players).permutations(players) {
            let t_mask = order
                .iter()
                .take_while(|&&p| p != merged)
                .fold(0u64, |m, &p| m | 1 << rest[p]);
            total += self.sigma_mask(t_mask | s_mask) - self.sigma_mask(t_mask);
            count += 1;
        }
        Ok(total / count as f64)
    }

    pub fn group_value(&mut self, set: &[NodeId]) -> Result<GroupValue> {
        let mut set = set.to_vec();
        set.sort_unstable();
        set.dedup();
        let value = self.group_shapley_subsets(&set)?;
        Ok(GroupValue { set, value })
    }

    /// Best set of exactly `min(k, n)` nodes by exhaustive search; the value is monotone, so
    /// smaller sets never do better. Ties go to the lexicographically smallest set.
    pub fn best_group(&mut self, k: usize) -> Result<GroupValue> {
        if k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        let size = k.min(self.n);
        let mut best: Option<GroupValue> = None;
        for combo in (0..self.n as NodeId).combinations(size) {
            let value = self.group_shapley_subsets(&combo)?;
            if best.as_ref().map_or(true, |b| value > b.value) {
                best = Some(GroupValue { set: combo, value });
            }
        }
        Ok(best.expect("at least one candidate"))
    }
}

pub fn exact_group_shapley_subsets(graph: &InfluenceGraph, set: &[NodeId]) -> Result<f64> {
    ShapleyOracle::new(graph)?.group_shapley_subsets(set)
}

pub fn exact_group_shapley_permutations(graph: &InfluenceGraph, set: &[NodeId]) -> Result<f64> {
    ShapleyOracle::new(graph)?.group_shapley_permutations(set)
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Fraction of uniformly random orderings of `(V \ S) ∪ {merged player}` in which the
/// merged player precedes every node of `R \ S`.
pub fn intersection_probability_check(
    n: usize,
    set: &[NodeId],
    rr: &[NodeId],
    samples: u64,
    base_seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    if set.iter().chain(rr).any(|&v| v as usize >= n) {
        return Err(Error::param(format!("node out of range 0..{n}")));
    }
    if !rr.iter().any(|v| set.contains(v)) {
        return Err(Error::Precondition("R and S do not intersect".into()));
    }
    const MERGED: NodeId = NodeId::MAX;
    let mut in_set = vec![false; n];
    for &v in set {
        in_set[v as usize] = true;
    }
    let mut in_rest_of_r = vec![false; n];
    for &v in rr {
        in_rest_of_r[v as usize] = !in_set[v as usize];
    }
    let mut players: Vec<NodeId> = (0..n as NodeId).filter(|&v| !in_set[v as usize]).collect();
    players.push(MERGED);

    let mut first = 0u64;
    for i in 0..samples {
        let mut rng = stream_rng(base_seed, i);
        players.shuffle(&mut rng);
        let disjoint = players
            .iter()
            .take_while(|&&p| p != MERGED)
            .all(|&p| !in_rest_of_r[p as usize]);
        if disjoint {
            first += 1;
        }
    }
    Ok(first as f64 / samples as f64)
}
