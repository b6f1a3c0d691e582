//! Triggering-model sampling for the IC and LT specializations.
//!
//! A live-edge outcome fixes one triggering set per node; the spread of a seed set is the
//! expected size of its forward-reachable set over outcomes. Reverse reachable (RR) sets
//! are grown lazily backwards from a uniform root, sampling triggering sets only for nodes
//! that enter the set.
//!
//! Every random quantity indexed by `i` (the i-th RR set, the i-th simulation trial) is
//! drawn from its own ChaCha stream keyed by `(base_seed, i)`, so results do not depend
//! on how work is split across threads.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::graph::{InfluenceGraph, Model, NodeId, LT_SUM_TOLERANCE};

/// Upper bound on the number of outcomes [`exact_sigma`] will enumerate.
pub const MAX_ENUMERATED_OUTCOMES: u64 = 1 << 22;

const RR_DOMAIN: u64 = 0;
const SIMULATION_DOMAIN: u64 = 1 << 56;

/// Independent generator for item `index` of a batch keyed by `base_seed`.
pub fn stream_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng
}

/// One joint draw of triggering sets, with the induced live-edge graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveEdgeOutcome {
    n: usize,
    trig_offsets: Vec<usize>,
    trig_sources: Vec<NodeId>,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
}

impl LiveEdgeOutcome {
    fn from_triggering_sets<'a>(n: usize, sets: impl Iterator<Item = &'a [NodeId]>) -> Self {
        let mut trig_offsets = Vec::with_capacity(n + 1);
        trig_offsets.push(0);
        let mut trig_sources = Vec::new();
        for s in sets {
            trig_sources.extend_from_slice(s);
            trig_offsets.push(trig_sources.len());
        }
        debug_assert_eq!(trig_offsets.len(), n + 1);

        let mut out_offsets = vec![0usize; n + 1];
        for &u in &trig_sources {
            out_offsets[u as usize + 1] += 1;
        }
        for u in 0..n {
            out_offsets[u + 1] += out_offsets[u];
        }
        let mut fill = out_offsets.clone();
        let mut out_targets = vec![0; trig_sources.len()];
        for v in 0..n {
            for &u in &trig_sources[trig_offsets[v]..trig_offsets[v + 1]] {
                out_targets[fill[u as usize]] = v as NodeId;
                fill[u as usize] += 1;
            }
        }
        LiveEdgeOutcome { n, trig_offsets, trig_sources, out_offsets, out_targets }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// The sampled triggering set `T_v`.
    pub fn triggering_set(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.trig_sources[self.trig_offsets[v]..self.trig_offsets[v + 1]]
    }

    pub fn live_arc_count(&self) -> usize {
        self.trig_sources.len()
    }

    pub fn contains_arc(&self, source: NodeId, target: NodeId) -> bool {
        self.triggering_set(target).contains(&source)
    }

    /// Nodes reachable from `seeds` over live arcs, sorted ascending.
    pub fn forward_reachable(&self, seeds: &[NodeId]) -> Vec<NodeId> {
        let mut seen = vec![false; self.n];
        let mut queue = Vec::with_capacity(self.n);
        for &s in seeds {
            if !seen[s as usize] {
                seen[s as usize] = true;
                queue.push(s);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            for &v in &self.out_targets[self.out_offsets[u]..self.out_offsets[u + 1]] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push(v);
                }
            }
        }
        queue.sort_unstable();
        queue
    }
}

/// Calls `emit` for each member of a freshly sampled triggering set of `v`.
#[inline]
fn sample_triggering<R: Rng + ?Sized>(graph: &InfluenceGraph, v: NodeId, rng: &mut R, mut emit: impl FnMut(NodeId)) {
    let (sources, values) = graph.in_slices(v);
    match graph.model() {
        Model::Ic => {
            for (&u, &p) in sources.iter().zip(values) {
                if rng.gen::<f64>() < p {
                    emit(u);
                }
            }
        }
        Model::Lt => {
            let x = rng.gen::<f64>();
            let mut cumulative = 0.0;
            for (&u, &p) in sources.iter().zip(values) {
                cumulative += p;
                if x < cumulative {
                    emit(u);
                    return;
                }
            }
        }
    }
}

pub fn sample_live_edge_outcome<R: Rng + ?Sized>(graph: &InfluenceGraph, rng: &mut R) -> LiveEdgeOutcome {
    let n = graph.node_count();
    let mut sets: Vec<Vec<NodeId>> = Vec::with_capacity(n);
    for v in 0..n as NodeId {
        let mut t = Vec::new();
        sample_triggering(graph, v, rng, |u| t.push(u));
        sets.push(t);
    }
    LiveEdgeOutcome::from_triggering_sets(n, sets.iter().map(Vec::as_slice))
}

fn check_nodes(graph: &InfluenceGraph, nodes: &[NodeId]) -> Result<()> {
    match nodes.iter().find(|&&v| v as usize >= graph.node_count()) {
        Some(v) => Err(Error::param(format!("node {v} out of range 0..{}", graph.node_count()))),
        None => Ok(()),
    }
}

/// Monte Carlo estimate of `σ(seeds)` from `trials` independent outcomes.
pub fn simulate_sigma(graph: &InfluenceGraph, seeds: &[NodeId], trials: u64, base_seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    check_nodes(graph, seeds)?;
    if seeds.is_empty() {
        return Ok(0.0);
    }
    let mut total: u64 = 0;
    for i in 0..trials {
        let mut rng = stream_rng(base_seed, SIMULATION_DOMAIN | i);
        let outcome = sample_live_edge_outcome(graph, &mut rng);
        total += outcome.forward_reachable(seeds).len() as u64;
    }
    Ok(total as f64 / trials as f64)
}

/// The finite outcome space of a graph after pruning deterministic choices: each node
/// carries its list of `(probability, triggering set)` alternatives.
pub(crate) struct OutcomeSpace {
    n: usize,
    alternatives: Vec<Vec<(f64, Vec<NodeId>)>>,
    count: u64,
}

impl OutcomeSpace {
    pub(crate) fn new(graph: &InfluenceGraph, limit: u64) -> Result<Self> {
        let n = graph.node_count();
        let mut alternatives = Vec::with_capacity(n);
        let mut count: u64 = 1;
        for v in 0..n as NodeId {
            let alts = match graph.model() {
                Model::Ic => {
                    let fixed: Vec<NodeId> = graph.in_arcs(v).filter(|&(_, p)| p >= 1.0).map(|(u, _)| u).collect();
                    let random: Vec<(NodeId, f64)> = graph.in_arcs(v).filter(|&(_, p)| p > 0.0 && p < 1.0).collect();
                    if random.len() > 62 {
                        return Err(Error::TooLarge(format!("node {v} has {} random in-arcs", random.len())));
                    }
                    let mut alts = Vec::with_capacity(1 << random.len());
                    for mask in 0u64..(1u64 << random.len()) {
                        let mut prob = 1.0;
                        let mut set = fixed.clone();
                        for (j, &(u, p)) in random.iter().enumerate() {
                            if mask >> j & 1 == 1 {
                                prob *= p;
                                set.push(u);
                            } else {
                                prob *= 1.0 - p;
                            }
                        }
                        set.sort_unstable();
                        alts.push((prob, set));
                    }
                    alts
                }
                Model::Lt => {
                    let mut alts: Vec<(f64, Vec<NodeId>)> =
                        graph.in_arcs(v).filter(|&(_, p)| p > 0.0).map(|(u, p)| (p, vec![u])).collect();
                    let none = 1.0 - alts.iter().map(|(p, _)| p).sum::<f64>();
                    if none > LT_SUM_TOLERANCE {
                        alts.push((none, Vec::new()));
                    }
                    alts
                }
            };
            count = count.saturating_mul(alts.len() as u64);
            if count > limit {
                return Err(Error::TooLarge(format!("more than {limit} live-edge outcomes")));
            }
            alternatives.push(alts);
        }
        Ok(OutcomeSpace { n, alternatives, count })
    }

    pub(crate) fn count(&self) -> u64 {
        self.count
    }

    /// Visits every outcome with its probability.
    pub(crate) fn for_each(&self, mut visit: impl FnMut(f64, &LiveEdgeOutcome)) {
        let mut digits = vec![0usize; self.n];
        loop {
            let mut prob = 1.0;
            for (v, &d) in digits.iter().enumerate() {
                prob *= self.alternatives[v][d].0;
            }
            let outcome = LiveEdgeOutcome::from_triggering_sets(
                self.n,
                digits.iter().enumerate().map(|(v, &d)| self.alternatives[v][d].1.as_slice()),
            );
            visit(prob, &outcome);

            let mut v = 0;
            loop {
                if v == self.n {
                    return;
                }
                digits[v] += 1;
                if digits[v] < self.alternatives[v].len() {
                    break;
                }
                digits[v] = 0;
                v += 1;
            }
        }
    }
}

/// Exact `σ(seeds)` as a probability-weighted sum over all live-edge outcomes.
/// Arcs with IC probability 0 or 1 are folded in before enumeration.
pub fn exact_sigma(graph: &InfluenceGraph, seeds: &[NodeId]) -> Result<f64> {
    check_nodes(graph, seeds)?;
    let space = OutcomeSpace::new(graph, MAX_ENUMERATED_OUTCOMES)?;
    let mut sigma = 0.0;
    space.for_each(|p, outcome| sigma += p * outcome.forward_reachable(seeds).len() as f64);
    Ok(sigma)
}

/// Root plus every node reaching it in one sampled live-edge graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrSet {
    pub root: NodeId,
    /// Sorted ascending; always contains `root`.
    pub members: Vec<NodeId>,
}

/// Reusable per-worker buffers for RR generation.
#[derive(Debug, Clone)]
pub struct RrScratch {
    mark: Vec<bool>,
    queue: Vec<NodeId>,
}

impl RrScratch {
    pub fn new(n: usize) -> Self {
        RrScratch { mark: vec![false; n], queue: Vec::new() }
    }
}

pub fn sample_rr_set<R: Rng + ?Sized>(graph: &InfluenceGraph, rng: &mut R) -> RrSet {
    let mut scratch = RrScratch::new(graph.node_count());
    sample_rr_set_with(graph, rng, &mut scratch)
}

pub fn sample_rr_set_with<R: Rng + ?Sized>(graph: &InfluenceGraph, rng: &mut R, scratch: &mut RrScratch) -> RrSet {
    let root = rng.gen_range(0..graph.node_count() as NodeId);
    let RrScratch { mark, queue } = scratch;
    queue.clear();
    queue.push(root);
    mark[root as usize] = true;
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        sample_triggering(graph, v, rng, |u| {
            if !mark[u as usize] {
                mark[u as usize] = true;
                queue.push(u);
            }
        });
    }
    for &u in queue.iter() {
        mark[u as usize] = false;
    }
    let mut members = queue.clone();
    members.sort_unstable();
    RrSet { root, members }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingOptions {
    /// Worker threads used for sampling; 0 or 1 means the calling thread only.
    pub workers: usize,
    /// Cap on the summed size of all sampled sets.
    pub max_members: u64,
    /// Cap on the number of sets.
    pub max_sets: u64,
}

pub const DEFAULT_MAX_MEMBERS: u64 = 100_000_000;

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions { workers: 1, max_members: DEFAULT_MAX_MEMBERS, max_sets: DEFAULT_MAX_MEMBERS }
    }
}

impl SamplingOptions {
    pub fn with_workers(workers: usize) -> Self {
        SamplingOptions { workers, ..Default::default() }
    }
}

/// An ordered sequence of RR sets over one graph, with its inverted index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrSample {
    model: Model,
    base_seed: u64,
    roots: Vec<NodeId>,
    family: SetFamily,
}

impl RrSample {
    #[cfg(test)]
    pub(crate) fn from_parts(model: Model, base_seed: u64, roots: Vec<NodeId>, family: SetFamily) -> Self {
        RrSample { model, base_seed, roots, family }
    }

    /// Wraps explicitly given RR sets (each normalized to sorted, duplicate-free order).
    pub fn from_sets(n: usize, model: Model, base_seed: u64, sets: Vec<RrSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::param("a sample needs at least one RR set"));
        }
        let mut roots = Vec::with_capacity(sets.len());
        let mut offsets = vec![0usize];
        let mut members = Vec::new();
        for mut rr in sets {
            rr.members.sort_unstable();
            rr.members.dedup();
            if rr.members.last().map_or(true, |&u| u as usize >= n) || rr.members.binary_search(&rr.root).is_err() {
                return Err(Error::param("RR set must contain its root and only nodes below n"));
            }
            roots.push(rr.root);
            members.extend_from_slice(&rr.members);
            offsets.push(members.len());
        }
        Ok(RrSample { model, base_seed, roots, family: SetFamily::from_flat(n, offsets, members) })
    }

    pub fn node_count(&self) -> usize {
        self.family.universe()
    }

    /// Number of sets `t`.
    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn root(&self, i: usize) -> NodeId {
        self.roots[i]
    }

    pub fn set(&self, i: usize) -> &[NodeId] {
        self.family.set(i)
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn rr_set(&self, i: usize) -> RrSet {
        RrSet { root: self.roots[i], members: self.set(i).to_vec() }
    }
}

const CHUNK: u64 = 1 << 15;

/// Samples `t` RR sets; set `i` depends only on `(base_seed, i)`.
pub fn sample_rr_collection(graph: &InfluenceGraph, t: u64, base_seed: u64, opts: &SamplingOptions) -> Result<RrSample> {
    if t == 0 {
        return Err(Error::param("number of RR sets must be at least 1"));
    }
    if t > opts.max_sets || t > u32::MAX as u64 {
        return Err(Error::ResourceCap(format!("{t} RR sets requested, cap is {}", opts.max_sets.min(u32::MAX as u64))));
    }
    let n = graph.node_count();
    let key = ChaCha8Rng::seed_from_u64(base_seed);
    let generate = |i: u64, scratch: &mut RrScratch| {
        let mut rng = key.clone();
        rng.set_stream(RR_DOMAIN | i);
        sample_rr_set_with(graph, &mut rng, scratch)
    };

    let pool = if opts.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.workers)
                .build()
                .map_err(|e| Error::param(format!("cannot start sampling workers: {e}")))?,
        )
    } else {
        None
    };

    let mut roots = Vec::with_capacity(t as usize);
    let mut offsets = Vec::with_capacity(t as usize + 1);
    offsets.push(0usize);
    let mut members: Vec<NodeId> = Vec::new();
    let mut start = 0u64;
    while start < t {
        let end = (start + CHUNK).min(t);
        let batch: Vec<RrSet> = match &pool {
            Some(pool) => pool.install(|| {
                (start..end).into_par_iter().map_init(|| RrScratch::new(n), |s, i| generate(i, s)).collect()
            }),
            None => {
                let mut scratch = RrScratch::new(n);
                (start..end).map(|i| generate(i, &mut scratch)).collect()
            }
        };
        for rr in batch {
            roots.push(rr.root);
            members.extend_from_slice(&rr.members);
            offsets.push(members.len());
        }
        if members.len() as u64 > opts.max_members {
            return Err(Error::ResourceCap(format!(
                "RR sets exceed {} summed members after {} of {t} sets",
                opts.max_members, end
            )));
        }
        start = end;
    }
    let family = SetFamily::from_flat(n, offsets, members);
    Ok(RrSample { model: graph.model(), base_seed, roots, family })
}

const MAGIC: &[u8; 8] = b"IGSRRS01";

/// Binary dump: magic, then `n`, `t`, `base_seed` as little-endian u64 and the model byte
/// (0 = IC, 1 = LT); then per set a u32 length, the u32 root and the sorted u32 ids.
pub fn write_sample<W: Write>(sample: &RrSample, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(sample.node_count() as u64).to_le_bytes())?;
    w.write_all(&(sample.len() as u64).to_le_bytes())?;
    w.write_all(&sample.base_seed.to_le_bytes())?;
    w.write_all(&[match sample.model {
        Model::Ic => 0u8,
        Model::Lt => 1u8,
    }])?;
    for i in 0..sample.len() {
        let set = sample.set(i);
        w.write_all(&(set.len() as u32).to_le_bytes())?;
        w.write_all(&sample.roots[i].to_le_bytes())?;
        for &u in set {
            w.write_all(&u.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_sample<R: Read>(mut r: R) -> Result<RrSample> {
    fn u64_le<R: Read>(r: &mut R) -> Result<u64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn u32_le<R: Read>(r: &mut R) -> Result<u32> {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
    let bad = |m: &str| Error::SampleFormat(m.to_string());

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let n = u64_le(&mut r)? as usize;
    let t = u64_le(&mut r)?;
    let base_seed = u64_le(&mut r)?;
    let mut model = [0u8; 1];
    r.read_exact(&mut model)?;
    let model = match model[0] {
        0 => Model::Ic,
        1 => Model::Lt,
        _ => return Err(bad("unknown model byte")),
    };
    if n < 2 || t == 0 || t > u32::MAX as u64 {
        return Err(bad("header out of range"));
    }
    let mut roots = Vec::with_capacity(t as usize);
    let mut offsets = vec![0usize];
    let mut members = Vec::new();
    for _ in 0..t {
        let len = u32_le(&mut r)? as usize;
        let root = u32_le(&mut r)?;
        if len == 0 || len > n {
            return Err(bad("set length out of range"));
        }
        let start = members.len();
        for _ in 0..len {
            members.push(u32_le(&mut r)?);
        }
        let set = &members[start..];
        if set.windows(2).any(|w| w[0] >= w[1]) || set[len - 1] as usize >= n {
            return Err(bad("set ids not sorted or out of range"));
        }
        if set.binary_search(&root).is_err() {
            return Err(bad("root missing from its set"));
        }
        roots.push(root);
        offsets.push(members.len());
    }
    Ok(RrSample { model, base_seed, roots, family: SetFamily::from_flat(n, offsets, members) })
}
