//! Compact family of subsets of `0..universe` with a node -> set-index inverted index.

use crate::graph::NodeId;

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sets are stored as sorted, duplicate-free id runs in one flat buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    universe: usize,
    offsets: Vec<usize>,
    members: Vec<NodeId>,
    inv_offsets: Vec<usize>,
    inv_sets: Vec<u32>,
}

impl SetFamily {
    /// Builds a family from sets that are already sorted and duplicate-free with ids
    /// below `universe`. Callers outside the crate go through validating constructors.
    pub(crate) fn from_sorted_sets<I, S>(universe: usize, sets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[NodeId]>,
    {
        let mut offsets = vec![0usize];
        let mut members = Vec::new();
        for s in sets {
            let s = s.as_ref();
            debug_assert!(s.windows(2).all(|w| w[0] < w[1]));
            members.extend_from_slice(s);
            offsets.push(members.len());
        }
        let mut fam = SetFamily { universe, offsets, members, inv_offsets: Vec::new(), inv_sets: Vec::new() };
        fam.build_inverted_index();
        fam
    }

    pub(crate) fn from_flat(universe: usize, offsets: Vec<usize>, members: Vec<NodeId>) -> Self {
        debug_assert_eq!(offsets.last().copied(), Some(members.len()));
        let mut fam = SetFamily { universe, offsets, members, inv_offsets: Vec::new(), inv_sets: Vec::new() };
        fam.build_inverted_index();
        fam
    }

    fn build_inverted_index(&mut self) {
        let mut inv_offsets = vec![0usize; self.universe + 1];
        for &u in &self.members {
            inv_offsets[u as usize + 1] += 1;
        }
        for u in 0..self.universe {
            inv_offsets[u + 1] += inv_offsets[u];
        }
        let mut fill = inv_offsets.clone();
        let mut inv_sets = vec![0u32; self.members.len()];
        for i in 0..self.len() {
            for &u in self.set(i) {
                inv_sets[fill[u as usize]] = i as u32;
                fill[u as usize] += 1;
            }
        }
        self.inv_offsets = inv_offsets;
        self.inv_sets = inv_sets;
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Number of sets.
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn set(&self, i: usize) -> &[NodeId] {
        &self.members[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn set_len(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn total_members(&self) -> usize {
        self.members.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[NodeId]> + '_ {
        (0..self.len()).map(move |i| self.set(i))
    }

    /// Ascending indices of the sets containing `u`.
    pub fn containing(&self, u: NodeId) -> &[u32] {
        let u = u as usize;
        &self.inv_sets[self.inv_offsets[u]..self.inv_offsets[u + 1]]
    }

    /// `(set index, |set ∩ nodes|)` for every set hit by `nodes`, ascending by index.
    /// Only the inverted lists of `nodes` are touched.
    pub fn hit_counts(&self, nodes: &[NodeId]) -> Vec<(u32, usize)> {
        let mut nodes = nodes.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        let mut touched: Vec<u32> = Vec::new();
        for &u in &nodes {
            touched.extend_from_slice(self.containing(u));
        }
        touched.sort_unstable();
        let mut out: Vec<(u32, usize)> = Vec::new();
        for idx in touched {
            match out.last_mut() {
                Some((last, count)) if *last == idx => *count += 1,
                _ => out.push((idx, 1)),
            }
        }
        out
    }

    /// `Σ_i 1[Z_i ∩ S ≠ ∅] / (|Z_i \ S| + 1)`.
    pub fn harmonic_hit_sum(&self, nodes: &[NodeId]) -> f64 {
        let mut acc = CompensatedSum::default();
        for (idx, hits) in self.hit_counts(nodes) {
            let residual = self.set_len(idx as usize) - hits;
            acc.add(1.0 / (residual as f64 + 1.0));
        }
        acc.value()
    }

    /// `Σ_i 1[Z_i ∩ S ≠ ∅] / |Z_i|`.
    pub fn inverse_size_hit_sum(&self, nodes: &[NodeId]) -> f64 {
        let mut acc = CompensatedSum::default();
        for (idx, _) in self.hit_counts(nodes) {
            acc.add(1.0 / self.set_len(idx as usize) as f64);
        }
        acc.value()
    }
}
