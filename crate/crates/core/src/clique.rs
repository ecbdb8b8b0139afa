//! Exact maximum clique by branch and bound with greedy-coloring bounds,
//! plus a tabu search that looks for a clique of a prescribed size.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Dense bitset over graph vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        self.words[v / 64] &= !(1 << (v % 64));
    }

    pub fn contains(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * 64 + w.trailing_zeros() as usize)
    }

    pub fn intersect(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn subtract_in_place(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }
}

/// Undirected simple graph as adjacency bitsets.
#[derive(Clone, Debug)]
pub struct Graph {
    adj: Vec<VertexSet>,
}

impl Graph {
    /// Builds the graph with an edge wherever `edge(u, v)` holds for `u != v`.
    pub fn from_predicate(n: usize, edge: impl Fn(usize, usize) -> bool) -> Self {
        let mut adj = vec![VertexSet::empty(n); n];
        for u in 0..n {
            for v in u + 1..n {
                if edge(u, v) {
                    adj[u].insert(v);
                    adj[v].insert(u);
                }
            }
        }
        Graph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(k, &u)| vs[k + 1..].iter().all(|&v| self.adj[u].contains(v)))
    }
}

/// Search options.
#[derive(Clone, Copy, Debug, Default)]
pub struct CliqueOptions {
    /// Known upper bound on the clique number; the search stops once reached.
    pub ceiling: Option<usize>,
    /// Vertex that may be assumed to lie in some maximum clique
    /// (valid for vertex-transitive graphs).
    pub anchor: Option<usize>,
}

/// Result of [`max_clique`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueResult {
    /// Vertices of one maximum clique, ascending.
    pub vertices: Vec<usize>,
    /// Branch-and-bound nodes expanded.
    pub nodes: u64,
    /// The search stopped on the ceiling rather than exhausting the tree.
    pub hit_ceiling: bool,
}

struct Shared<'g> {
    graph: &'g Graph,
    best: AtomicUsize,
    witness: Mutex<Vec<usize>>,
    ceiling: usize,
    done: AtomicBool,
    nodes: AtomicUsize,
}

impl Shared<'_> {
    fn offer(&self, clique: &[usize]) {
        let mut w = self.witness.lock().expect("witness lock");
        if clique.len() > w.len() {
            let mut sorted = clique.to_vec();
            sorted.sort_unstable();
            *w = sorted;
            self.best.fetch_max(clique.len(), Ordering::SeqCst);
            if clique.len() >= self.ceiling {
                self.done.store(true, Ordering::SeqCst);
            }
        }
    }

    /// Greedy sequential coloring; returns vertices with nondecreasing colors.
    fn color_order(&self, p: &VertexSet) -> (Vec<usize>, Vec<usize>) {
        let mut order = Vec::with_capacity(p.len());
        let mut colors = Vec::with_capacity(p.len());
        let mut uncolored = p.clone();
        let mut color = 0;
        while !uncolored.is_empty() {
            color += 1;
            let mut q = uncolored.clone();
            while let Some(v) = q.first() {
                q.remove(v);
                q.subtract_in_place(self.graph.neighbors(v));
                uncolored.remove(v);
                order.push(v);
                colors.push(color);
            }
        }
        (order, colors)
    }

    fn expand(&self, clique: &mut Vec<usize>, p: VertexSet) {
        self.nodes.fetch_add(1, Ordering::Relaxed);
        let (order, colors) = self.color_order(&p);
        let mut p = p;
        for k in (0..order.len()).rev() {
            if self.done.load(Ordering::Relaxed) {
                return;
            }
            if clique.len() + colors[k] <= self.best.load(Ordering::Relaxed) {
                return;
            }
            let v = order[k];
            clique.push(v);
            let next = p.intersect(self.graph.neighbors(v));
            if next.is_empty() {
                self.offer(clique);
            } else {
                self.expand(clique, next);
            }
            clique.pop();
            p.remove(v);
        }
    }
}

/// Exact maximum clique. Root branches run in parallel; the size is
/// independent of scheduling, the witness may differ between runs.
pub fn max_clique(graph: &Graph, opts: CliqueOptions) -> CliqueResult {
    let n = graph.len();
    if n == 0 {
        return CliqueResult {
            vertices: Vec::new(),
            nodes: 0,
            hit_ceiling: false,
        };
    }
    let shared = Shared {
        graph,
        best: AtomicUsize::new(0),
        witness: Mutex::new(Vec::new()),
        ceiling: opts.ceiling.unwrap_or(usize::MAX).max(1),
        done: AtomicBool::new(false),
        nodes: AtomicUsize::new(0),
    };
    let (base, root) = match opts.anchor {
        Some(a) => (vec![a], graph.neighbors(a).clone()),
        None => (Vec::new(), VertexSet::full(n)),
    };
    shared.offer(&base_or_first(&base, &root));
    if !root.is_empty() && !shared.done.load(Ordering::SeqCst) {
        let (order, colors) = shared.color_order(&root);
        (0..order.len()).into_par_iter().rev().for_each(|k| {
            if shared.done.load(Ordering::Relaxed) || base.len() + colors[k] <= shared.best.load(Ordering::Relaxed) {
                return;
            }
            // Branch k owns order[k] and may use only vertices before it.
            let mut p = VertexSet::empty(n);
            for &u in &order[..k] {
                p.insert(u);
            }
            let v = order[k];
            let mut clique = base.clone();
            clique.push(v);
            let next = p.intersect(graph.neighbors(v));
            if next.is_empty() {
                shared.offer(&clique);
            } else {
                shared.expand(&mut clique, next);
            }
        });
    }
    let vertices = shared.witness.into_inner().expect("witness lock");
    CliqueResult {
        hit_ceiling: shared.done.load(Ordering::SeqCst),
        nodes: shared.nodes.load(Ordering::SeqCst) as u64,
        vertices,
    }
}

fn base_or_first(base: &[usize], root: &VertexSet) -> Vec<usize> {
    if base.is_empty() {
        root.first().into_iter().collect()
    } else {
        base.to_vec()
    }
}

/// Tabu search for a clique of exactly `k` vertices.
///
/// Keeps `k` vertices and swaps one in, one out, to drive the number of
/// non-adjacent pairs to zero. Finding nothing proves nothing; a returned
/// set is always a verified clique. Deterministic for a given seed.
pub fn find_clique_of_size(graph: &Graph, k: usize, seed: u64, max_moves: u64) -> Option<Vec<usize>> {
    let n = graph.len();
    if k == 0 || k > n {
        return (k == 0).then(Vec::new);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut in_set = vec![false; n];
    let mut members = Vec::with_capacity(k);
    // Greedy maximal clique in random order, topped up with random vertices.
    for &v in &order {
        if members.len() < k && members.iter().all(|&u| graph.neighbors(u).contains(v)) {
            in_set[v] = true;
            members.push(v);
        }
    }
    for &v in &order {
        if members.len() == k {
            break;
        }
        if !in_set[v] {
            in_set[v] = true;
            members.push(v);
        }
    }
    // conflicts[v]: members other than v that are not adjacent to v.
    let mut conflicts = vec![0usize; n];
    for (v, c) in conflicts.iter_mut().enumerate() {
        *c = members
            .iter()
            .filter(|&&u| u != v && !graph.neighbors(u).contains(v))
            .count();
    }
    let mut cost: usize = members.iter().map(|&u| conflicts[u]).sum::<usize>() / 2;
    let mut tabu_until = vec![0u64; n];
    let mut outs = Vec::new();
    let mut ins = Vec::new();
    for step in 1..=max_moves {
        if cost == 0 {
            break;
        }
        // Worst non-tabu member and best non-tabu outsider; ties broken at random.
        let free = |x: &usize| tabu_until[*x] <= step;
        let worst = members.iter().filter(|x| free(x)).map(|&u| conflicts[u]).max();
        outs.clear();
        outs.extend(
            members
                .iter()
                .copied()
                .filter(|u| free(u) && Some(conflicts[*u]) == worst),
        );
        let best = (0..n).filter(|v| !in_set[*v] && free(v)).map(|v| conflicts[v]).min();
        ins.clear();
        ins.extend((0..n).filter(|v| !in_set[*v] && free(v) && Some(conflicts[*v]) == best));
        let (Some(&u), Some(&v)) = (outs.choose(&mut rng), ins.choose(&mut rng)) else {
            continue;
        };
        let v_loses = usize::from(!graph.neighbors(u).contains(v));
        cost = cost + conflicts[v] - v_loses - conflicts[u];
        for (w, c) in conflicts.iter_mut().enumerate() {
            if w != u && !graph.neighbors(u).contains(w) {
                *c -= 1;
            }
            if w != v && !graph.neighbors(v).contains(w) {
                *c += 1;
            }
        }
        in_set[u] = false;
        in_set[v] = true;
        let slot = members.iter().position(|&x| x == u).expect("member");
        members[slot] = v;
        tabu_until[u] = step + 7 + rng.random_range(0..=k as u64 / 2);
        tabu_until[v] = step + 3;
    }
    members.sort_unstable();
    (cost == 0 && graph.is_clique(&members)).then_some(members)
}
