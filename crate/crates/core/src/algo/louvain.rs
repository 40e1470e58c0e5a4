//! Louvain community detection: repeated local moving and aggregation.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::modularity::{modularity_of_labels, UndirectedProjection};
use crate::graph::SupplyChainGraph;
use crate::ids::NodeId;

/// Passes stop once a full sweep improves modularity by no more than this.
pub const MIN_GAIN: f64 = 1e-7;

pub const DEFAULT_RESTARTS: usize = 8;

/// Refinement costs O(n·m) per pass, so it is skipped above this many nodes.
pub const REFINE_LIMIT: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LouvainConfig {
    pub resolution: f64,
    pub seed: u64,
    /// Break equal-gain ties randomly (seeded) instead of by lowest community index.
    pub shuffle_ties: bool,
    /// Extra runs with seeded random visit orders; the partition with the
    /// highest modularity wins, earliest run on ties.
    pub restarts: usize,
    /// Polish each run with vertex-mover refinement on graphs of at most
    /// [`REFINE_LIMIT`] nodes.
    pub refine: bool,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            resolution: 1.0,
            seed: 0,
            shuffle_ties: false,
            restarts: DEFAULT_RESTARTS,
            refine: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub community_of: BTreeMap<NodeId, usize>,
    /// Classic (resolution 1) modularity of `community_of`.
    pub modularity: f64,
}

impl Partition {
    /// Communities indexed by label; members in id order.
    pub fn communities(&self) -> Vec<Vec<NodeId>> {
        let count = self.community_of.values().map(|c| c + 1).max().unwrap_or(0);
        let mut out: Vec<Vec<NodeId>> = alloc::vec![Vec::new(); count];
        for (id, c) in &self.community_of {
            out[*c].push(id.clone());
        }
        out
    }

    pub fn community_count(&self) -> usize {
        self.community_of.values().map(|c| c + 1).max().unwrap_or(0)
    }
}

/// Weighted symmetric graph used at each aggregation level.
struct Level {
    /// Neighbours excluding self, with summed weights.
    adj: Vec<Vec<(u32, f64)>>,
    /// `A_ii`: twice the weight of edges folded inside the node.
    self_weight: Vec<f64>,
    degree: Vec<f64>,
    /// Sum of all degrees (2m).
    total: f64,
}

impl Level {
    fn from_projection(p: &UndirectedProjection) -> Self {
        let adj: Vec<Vec<(u32, f64)>> = p.adj.iter().map(|nb| nb.iter().map(|&v| (v, 1.0)).collect()).collect();
        let degree: Vec<f64> = p.adj.iter().map(|nb| nb.len() as f64).collect();
        let total = degree.iter().sum();
        Level {
            self_weight: alloc::vec![0.0; adj.len()],
            adj,
            degree,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn modularity(&self, comm: &[u32], resolution: f64) -> f64 {
        let n = self.len();
        let mut inside = alloc::vec![0.0; n];
        let mut tot = alloc::vec![0.0; n];
        for u in 0..n {
            let c = comm[u] as usize;
            tot[c] += self.degree[u];
            inside[c] += self.self_weight[u];
            for &(v, w) in &self.adj[u] {
                if comm[v as usize] as usize == c {
                    inside[c] += w;
                }
            }
        }
        let m2 = self.total;
        (0..n)
            .map(|c| inside[c] / m2 - resolution * (tot[c] / m2) * (tot[c] / m2))
            .sum()
    }

    /// Local moving phase. Returns the community of each node and whether any node moved.
    fn local_moves(&self, cfg: &LouvainConfig, rng: &mut ChaCha8Rng, shuffle_order: bool) -> (Vec<u32>, bool) {
        let n = self.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        if shuffle_order {
            for i in (1..n).rev() {
                order.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
            }
        }
        let mut comm: Vec<u32> = (0..n as u32).collect();
        let mut tot: Vec<f64> = self.degree.clone();
        let mut link = alloc::vec![0.0f64; n];
        let mut touched: Vec<u32> = Vec::new();
        let m2 = self.total;
        let mut any_move = false;
        let mut q = self.modularity(&comm, cfg.resolution);
        loop {
            let mut moved = false;
            for &u in &order {
                let u = u as usize;
                let ku = self.degree[u];
                let own = comm[u];
                for &(v, w) in &self.adj[u] {
                    let c = comm[v as usize];
                    if link[c as usize] == 0.0 {
                        touched.push(c);
                    }
                    link[c as usize] += w;
                }
                tot[own as usize] -= ku;
                let gain =
                    |c: u32, link: &[f64], tot: &[f64]| link[c as usize] - cfg.resolution * tot[c as usize] * ku / m2;
                let mut best = own;
                let mut best_gain = gain(own, &link, &tot);
                let mut ties = 1u32;
                touched.sort_unstable();
                for &c in &touched {
                    if c == own {
                        continue;
                    }
                    let g = gain(c, &link, &tot);
                    if g > best_gain + 1e-12 {
                        best = c;
                        best_gain = g;
                        ties = 1;
                    } else if cfg.shuffle_ties && best != own && (g - best_gain).abs() <= 1e-12 {
                        ties += 1;
                        if rng.next_u32().is_multiple_of(ties) {
                            best = c;
                        }
                    }
                }
                tot[best as usize] += ku;
                if best != own {
                    comm[u] = best;
                    moved = true;
                }
                for &c in &touched {
                    link[c as usize] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
            let q_new = self.modularity(&comm, cfg.resolution);
            let improved = q_new - q;
            q = q_new;
            if improved <= MIN_GAIN {
                break;
            }
        }
        (comm, any_move)
    }

    /// Collapses each community into one node. `comm` must be dense (0..k).
    fn aggregate(&self, comm: &[u32], k: usize) -> Level {
        let mut maps: Vec<BTreeMap<u32, f64>> = alloc::vec![BTreeMap::new(); k];
        let mut self_weight = alloc::vec![0.0; k];
        let mut degree = alloc::vec![0.0; k];
        for u in 0..self.len() {
            let cu = comm[u];
            degree[cu as usize] += self.degree[u];
            self_weight[cu as usize] += self.self_weight[u];
            for &(v, w) in &self.adj[u] {
                let cv = comm[v as usize];
                if cu == cv {
                    self_weight[cu as usize] += w;
                } else {
                    *maps[cu as usize].entry(cv).or_default() += w;
                }
            }
        }
        Level {
            adj: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_weight,
            degree,
            total: self.total,
        }
    }
}

/// Renumbers labels densely in order of first appearance.
fn densify(comm: &mut [u32]) -> usize {
    let mut map: BTreeMap<u32, u32> = BTreeMap::new();
    for c in comm.iter_mut() {
        let next = map.len() as u32;
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}

/// Louvain partition of the undirected unit-weight projection.
///
/// The first run visits nodes in ascending id order; restarts visit them in
/// seeded random orders. The result is deterministic for a given graph and
/// configuration. Community labels are ordered by size (largest first), then
/// by smallest member id.
pub fn louvain(graph: &SupplyChainGraph, cfg: &LouvainConfig) -> Partition {
    let proj = UndirectedProjection::new(graph);
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    let runs = if proj.edges > 0 { 1 + cfg.restarts } else { 1 };
    for run in 0..runs {
        let mut membership = run_once(&proj, n, cfg, &mut rng, run > 0);
        if cfg.refine && n <= REFINE_LIMIT && proj.edges > 0 {
            refine(&proj, &mut membership, cfg.resolution);
        }
        let labels = canonical_labels(&membership);
        let q = modularity_of_labels(&proj, &labels);
        if best.as_ref().is_none_or(|(_, b)| q > *b) {
            best = Some((labels, q));
        }
    }
    let (labels, modularity) = best.expect("at least one run");
    let community_of = graph
        .nodes()
        .iter()
        .zip(&labels)
        .map(|(node, &c)| (node.id.clone(), c))
        .collect();
    Partition {
        community_of,
        modularity,
    }
}

fn run_once(
    proj: &UndirectedProjection,
    n: usize,
    cfg: &LouvainConfig,
    rng: &mut ChaCha8Rng,
    shuffle_order: bool,
) -> Vec<u32> {
    let mut membership: Vec<u32> = (0..n as u32).collect();
    if proj.edges == 0 {
        return membership;
    }
    let mut level = Level::from_projection(proj);
    loop {
        let (mut comm, moved) = level.local_moves(cfg, rng, shuffle_order);
        if !moved {
            break;
        }
        let k = densify(&mut comm);
        for m in membership.iter_mut() {
            *m = comm[*m as usize];
        }
        if k == level.len() {
            break;
        }
        level = level.aggregate(&comm, k);
    }
    membership
}

/// Kernighan-Lin style vertex mover. Each pass moves every node once, always
/// taking the best available move even when it lowers modularity, then keeps
/// the best prefix of the move sequence. Escapes the pairings on paths and
/// similar local optima that greedy local moving cannot leave.
fn refine(proj: &UndirectedProjection, membership: &mut [u32], resolution: f64) {
    let n = membership.len();
    let two_m = 2.0 * proj.edges as f64;
    let deg: Vec<f64> = proj.adj.iter().map(|nb| nb.len() as f64).collect();
    densify(membership);
    let mut size = alloc::vec![0usize; n];
    let mut tot = alloc::vec![0.0f64; n];
    for u in 0..n {
        size[membership[u] as usize] += 1;
        tot[membership[u] as usize] += deg[u];
    }
    let mut link = alloc::vec![0.0f64; n];
    let mut touched: Vec<u32> = Vec::new();
    for _pass in 0..32 {
        let mut locked = alloc::vec![false; n];
        let mut history: Vec<(u32, u32, u32)> = Vec::with_capacity(n);
        let (mut cum, mut best_cum, mut best_len) = (0.0f64, 0.0f64, 0usize);
        for _ in 0..n {
            // (scaled gain, node, target)
            let mut best: Option<(f64, u32, u32)> = None;
            let empty = size.iter().position(|&s| s == 0).map(|c| c as u32);
            for u in 0..n {
                if locked[u] {
                    continue;
                }
                let own = membership[u];
                for &v in &proj.adj[u] {
                    let c = membership[v as usize];
                    if link[c as usize] == 0.0 {
                        touched.push(c);
                    }
                    link[c as usize] += 1.0;
                }
                let k = deg[u];
                let k_own = link[own as usize];
                let d_own = tot[own as usize];
                // Scaled by 2m²: 2m·(k_B − k_A) − γ·k·(D_B − D_A + k).
                let gain = |k_to: f64, d_to: f64| two_m * (k_to - k_own) - resolution * k * (d_to - d_own + k);
                touched.sort_unstable();
                let mut consider = |g: f64, c: u32| {
                    if best.is_none_or(|(bg, _, _)| g > bg + 1e-9) {
                        best = Some((g, u as u32, c));
                    }
                };
                for &c in &touched {
                    if c != own {
                        consider(gain(link[c as usize], tot[c as usize]), c);
                    }
                }
                if size[own as usize] > 1 {
                    if let Some(e) = empty {
                        consider(gain(0.0, 0.0), e);
                    }
                }
                for &c in &touched {
                    link[c as usize] = 0.0;
                }
                touched.clear();
            }
            let Some((g, u, to)) = best else { break };
            let from = membership[u as usize];
            apply_move(membership, &mut size, &mut tot, &deg, u, from, to);
            locked[u as usize] = true;
            history.push((u, from, to));
            cum += g;
            if cum > best_cum + 1e-9 {
                best_cum = cum;
                best_len = history.len();
            }
        }
        for &(u, from, to) in history[best_len..].iter().rev() {
            apply_move(membership, &mut size, &mut tot, &deg, u, to, from);
        }
        if best_len == 0 {
            break;
        }
    }
}

fn apply_move(membership: &mut [u32], size: &mut [usize], tot: &mut [f64], deg: &[f64], u: u32, from: u32, to: u32) {
    membership[u as usize] = to;
    size[from as usize] -= 1;
    size[to as usize] += 1;
    tot[from as usize] -= deg[u as usize];
    tot[to as usize] += deg[u as usize];
}

fn canonical_labels(membership: &[u32]) -> Vec<usize> {
    let mut groups: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for (i, &c) in membership.iter().enumerate() {
        let e = groups.entry(c).or_insert((0, i));
        e.0 += 1;
    }
    let mut order: Vec<(u32, usize, usize)> = groups.into_iter().map(|(c, (size, first))| (c, size, first)).collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    let rank: BTreeMap<u32, usize> = order.iter().enumerate().map(|(r, (c, _, _))| (*c, r)).collect();
    membership.iter().map(|c| rank[c]).collect()
}
