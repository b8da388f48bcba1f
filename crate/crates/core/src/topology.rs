//! Chip coupling graphs and the qubit partitions the patterns are built on.
//!
//! Every partition here is a deterministic function of the topology (and of
//! the seed, for [`random_chains`]): checkerboard bipartitions by
//! breadth-first parity, greedy triplet covers for collision patterns, greedy
//! pair layouts for Bell patterns, and seeded self-avoiding walks for GHZ
//! chains.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::device_file::DeviceFile;
use crate::error::{Error, Result};

/// Attempt budget for one chain sample in [`random_chains`].
pub const CHAIN_ATTEMPT_BUDGET: usize = 10_000;

/// Qubit-coupling graph plus optional 2-D layout coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologyRepr", into = "TopologyRepr")]
pub struct ChipTopology {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    coords: Option<Vec<[f64; 2]>>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TopologyRepr {
    num_qubits: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<[f64; 2]>>,
}

impl TryFrom<TopologyRepr> for ChipTopology {
    type Error = Error;

    fn try_from(r: TopologyRepr) -> Result<Self> {
        ChipTopology::new(
            r.num_qubits,
            r.edges.iter().map(|e| (e[0], e[1])).collect(),
            r.coords,
        )
    }
}

impl From<ChipTopology> for TopologyRepr {
    fn from(t: ChipTopology) -> Self {
        TopologyRepr {
            num_qubits: t.num_qubits,
            edges: t.edges.iter().map(|&(a, b)| [a, b]).collect(),
            coords: t.coords,
        }
    }
}

impl ChipTopology {
    /// Builds a validated topology. Edges are stored normalized as
    /// `(min, max)` and sorted.
    pub fn new(
        num_qubits: usize,
        edges: Vec<(usize, usize)>,
        coords: Option<Vec<[f64; 2]>>,
    ) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        let mut seen = BTreeSet::new();
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::field(
                    format!("edges[{k}]"),
                    format!("endpoint out of range for {num_qubits} qubits: ({a}, {b})"),
                ));
            }
            if a == b {
                return Err(Error::field(format!("edges[{k}]"), format!("self-loop on qubit {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::field(
                    format!("edges[{k}]"),
                    format!("duplicate edge ({}, {})", e.0, e.1),
                ));
            }
            normalized.push(e);
        }
        normalized.sort_unstable();
        if let Some(c) = &coords {
            if c.len() != num_qubits {
                return Err(Error::field(
                    "coords",
                    format!("expected {num_qubits} positions, found {}", c.len()),
                ));
            }
            if c.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::field("coords", "non-finite coordinate"));
            }
        }
        let mut adjacency = vec![Vec::new(); num_qubits];
        for &(a, b) in &normalized {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(ChipTopology {
            num_qubits,
            edges: normalized,
            coords,
            adjacency,
        })
    }

    pub fn from_device_file(file: &DeviceFile) -> Result<Self> {
        ChipTopology::new(
            file.num_qubits,
            file.edges.iter().map(|e| (e[0], e[1])).collect(),
            file.coords.clone(),
        )
    }

    /// A path graph `0 - 1 - ... - (n-1)` laid out on a line.
    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i)).collect();
        let coords = (0..n).map(|i| [i as f64, 0.0]).collect();
        ChipTopology::new(n, edges, Some(coords)).expect("path graph is valid")
    }

    /// A star with qubit 0 at the center and `leaves` outer qubits.
    pub fn star(leaves: usize) -> Self {
        let edges = (1..=leaves).map(|i| (0, i)).collect();
        let coords = std::iter::once([0.0, 0.0])
            .chain((0..leaves).map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / leaves.max(1) as f64;
                [phi.cos(), phi.sin()]
            }))
            .collect();
        ChipTopology::new(leaves + 1, edges, Some(coords)).expect("star graph is valid")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits && self.adjacency[a].binary_search(&b).is_ok()
    }
}

/// Parses a device description and returns its coupling graph.
pub fn load_topology(text: &str) -> Result<ChipTopology> {
    ChipTopology::from_device_file(&DeviceFile::parse(text)?)
}

/// Two-colouring of the chip: no edge lies inside either group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub group_a: Vec<usize>,
    pub group_b: Vec<usize>,
}

impl Bipartition {
    pub fn contains_a(&self, q: usize) -> bool {
        self.group_a.binary_search(&q).is_ok()
    }

    pub fn contains_b(&self, q: usize) -> bool {
        self.group_b.binary_search(&q).is_ok()
    }
}

/// Breadth-first 2-colouring. Each connected component is coloured from its
/// smallest qubit id, which lands in `group_a`.
pub fn bipartition(topo: &ChipTopology) -> Result<Bipartition> {
    let n = topo.num_qubits();
    let mut color: Vec<Option<u8>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![0usize; n];
    for root in 0..n {
        if color[root].is_some() {
            continue;
        }
        color[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap();
            for &v in topo.neighbors(u) {
                match color[v] {
                    None => {
                        color[v] = Some(1 - cu);
                        parent[v] = Some(u);
                        depth[v] = depth[u] + 1;
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => {
                        return Err(Error::NotBipartite {
                            cycle: odd_cycle(u, v, &parent, &depth),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let (group_a, group_b) = (0..n).partition(|&q| color[q] == Some(0));
    Ok(Bipartition { group_a, group_b })
}

/// Closes the BFS-tree paths from `u` and `v` at their common ancestor.
fn odd_cycle(u: usize, v: usize, parent: &[Option<usize>], depth: &[usize]) -> Vec<usize> {
    let (mut a, mut b) = (u, v);
    let mut left = vec![a];
    let mut right = vec![b];
    while depth[a] > depth[b] {
        a = parent[a].unwrap();
        left.push(a);
    }
    while depth[b] > depth[a] {
        b = parent[b].unwrap();
        right.push(b);
    }
    while a != b {
        a = parent[a].unwrap();
        b = parent[b].unwrap();
        left.push(a);
        right.push(b);
    }
    right.pop();
    right.reverse();
    left.extend(right);
    left
}

/// Chain `a - b - c`: `a` is the excited neighbour of the CX control `b`,
/// and `c` is the CX target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triplet {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl Triplet {
    pub fn new(a: usize, b: usize, c: usize) -> Self {
        Triplet { a, b, c }
    }

    pub fn members(&self) -> [usize; 3] {
        [self.a, self.b, self.c]
    }

    pub fn is_chain_in(&self, topo: &ChipTopology) -> bool {
        self.a != self.c && topo.has_edge(self.a, self.b) && topo.has_edge(self.b, self.c)
    }
}

impl std::fmt::Display for Triplet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletCover {
    pub triplets: Vec<Triplet>,
    pub idle: Vec<usize>,
}

impl TripletCover {
    pub fn validate(&self, topo: &ChipTopology) -> Result<()> {
        let mut owner = vec![None; topo.num_qubits()];
        for (k, t) in self.triplets.iter().enumerate() {
            if !t.is_chain_in(topo) {
                return Err(Error::Pattern(format!("triplet {t} is not a chain")));
            }
            for q in t.members() {
                if owner[q].replace(k).is_some() {
                    return Err(Error::Pattern(format!("qubit {q} used by two triplets")));
                }
            }
        }
        for &(x, y) in topo.edges() {
            if let (Some(i), Some(j)) = (owner[x], owner[y]) {
                if i != j {
                    return Err(Error::Pattern(format!(
                        "triplets {} and {} are adjacent via ({x}, {y})",
                        self.triplets[i], self.triplets[j]
                    )));
                }
            }
        }
        let idle: Vec<usize> = (0..topo.num_qubits()).filter(|&q| owner[q].is_none()).collect();
        if idle != self.idle {
            return Err(Error::Pattern("idle set is not the complement of the triplets".into()));
        }
        Ok(())
    }
}

/// Greedy maximal cover by chain triplets, scanning candidates in ascending
/// `(b, a, c)` order.
pub fn triplet_cover(topo: &ChipTopology) -> TripletCover {
    triplet_cover_seeded(topo, &[])
}

/// Like [`triplet_cover`], but the `preferred` triplets are placed first (in
/// the given order, skipping any that are not chains or that conflict with an
/// earlier choice) before the greedy scan fills the rest of the chip.
pub fn triplet_cover_seeded(topo: &ChipTopology, preferred: &[Triplet]) -> TripletCover {
    let n = topo.num_qubits();
    let mut used = vec![false; n];
    // a qubit is blocked when it is used or adjacent to a used qubit
    let mut blocked = vec![false; n];
    let mut triplets = Vec::new();

    let mut place = |t: Triplet, used: &mut Vec<bool>, blocked: &mut Vec<bool>| -> bool {
        if !t.is_chain_in(topo) || t.members().iter().any(|&q| blocked[q]) {
            return false;
        }
        for q in t.members() {
            used[q] = true;
            blocked[q] = true;
            for &nb in topo.neighbors(q) {
                blocked[nb] = true;
            }
        }
        triplets.push(t);
        true
    };

    for &t in preferred {
        place(t, &mut used, &mut blocked);
    }
    for b in 0..n {
        for &a in topo.neighbors(b) {
            for &c in topo.neighbors(b) {
                if a != c {
                    place(Triplet::new(a, b, c), &mut used, &mut blocked);
                }
            }
        }
    }
    let idle = (0..n).filter(|&q| !used[q]).collect();
    TripletCover { triplets, idle }
}

/// Arrangement of Bell pairs on the chip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairLayout {
    /// Pairs may sit next to each other.
    Dense,
    /// Every pair is separated from every other pair by at least one idle qubit.
    Spaced,
}

/// Greedy matching over the edge list in ascending order.
pub fn bell_pairs(topo: &ChipTopology, layout: PairLayout) -> Vec<(usize, usize)> {
    let n = topo.num_qubits();
    let mut used = vec![false; n];
    let mut blocked = vec![false; n];
    let mut pairs = Vec::new();
    for &(a, b) in topo.edges() {
        let free = match layout {
            PairLayout::Dense => !used[a] && !used[b],
            PairLayout::Spaced => !blocked[a] && !blocked[b],
        };
        if !free {
            continue;
        }
        for q in [a, b] {
            used[q] = true;
            blocked[q] = true;
            for &nb in topo.neighbors(q) {
                blocked[nb] = true;
            }
        }
        pairs.push((a, b));
    }
    pairs
}

/// Draws `samples` simple paths of `length` qubits by restarting
/// self-avoiding walks from uniformly chosen qubits.
pub fn random_chains(
    topo: &ChipTopology,
    length: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if length < 2 {
        return Err(Error::field("length", "chains need at least 2 qubits"));
    }
    if length > topo.num_qubits() {
        return Err(Error::NoChain {
            length,
            attempts: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        out.push(sample_chain(topo, length, &mut rng)?);
    }
    Ok(out)
}

fn sample_chain(topo: &ChipTopology, length: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let n = topo.num_qubits();
    let mut visited = vec![false; n];
    for _ in 0..CHAIN_ATTEMPT_BUDGET {
        visited.iter_mut().for_each(|v| *v = false);
        let start = rng.random_range(0..n);
        let mut path = vec![start];
        visited[start] = true;
        while path.len() < length {
            let tail = *path.last().unwrap();
            let open: Vec<usize> = topo
                .neighbors(tail)
                .iter()
                .copied()
                .filter(|&q| !visited[q])
                .collect();
            match open.choose(rng) {
                Some(&next) => {
                    visited[next] = true;
                    path.push(next);
                }
                None => break,
            }
        }
        if path.len() == length {
            return Ok(path);
        }
    }
    Err(Error::NoChain {
        length,
        attempts: CHAIN_ATTEMPT_BUDGET,
    })
}
