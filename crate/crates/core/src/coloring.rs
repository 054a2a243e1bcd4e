use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::LazyLock;

use rayon::prelude::*;

use crate::confusion::ConfusionGraph;
use crate::error::{Error, Result};
use crate::network::AutomataNetwork;
use crate::schedule::Schedule;
use crate::space::ceil_log;

/// Vertex guard for the exact solvers.
pub const EXACT_CHROMATIC_LIMIT: usize = 1 << 12;

/// Schedule-enumeration guard for the cost minimization.
pub const KAPPA_MIN_LIMIT: usize = 8;

/// A proper vertex coloring in canonical form: colors are `0..count` and
/// relabeled by first appearance in vertex order, so equal colorings
/// compare equal bit for bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<u32>,
    count: u32,
}

impl Coloring {
    pub fn new(raw: Vec<u32>) -> Self {
        let mut relabel: Vec<u32> = vec![u32::MAX; raw.len()];
        let mut next = 0u32;
        let mut colors = Vec::with_capacity(raw.len());
        for &c in &raw {
            let slot = &mut relabel[c as usize];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            colors.push(*slot);
        }
        Coloring { colors, count: next }
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn color(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn is_proper(&self, g: &ConfusionGraph) -> bool {
        g.edges().iter().all(|&(x, y)| self.colors[x] != self.colors[y])
    }
}

/// Dense adjacency used by the solvers; one bitset row per vertex.
#[derive(Debug, Clone)]
pub struct PackedGraph {
    n: usize,
    row_words: usize,
    rows: Vec<u64>,
    degree: Vec<u32>,
}

impl PackedGraph {
    pub fn from_confusion(g: &ConfusionGraph) -> Result<Self> {
        let n = g.vertex_count();
        if n > EXACT_CHROMATIC_LIMIT {
            return Err(Error::resource(format!(
                "exact coloring limited to {EXACT_CHROMATIC_LIMIT} vertices, got {n}"
            )));
        }
        let mut pg = PackedGraph::empty(n);
        for (x, y) in g.edges() {
            pg.add_edge(x, y);
        }
        Ok(pg)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut pg = PackedGraph::empty(n);
        for &(x, y) in edges {
            pg.add_edge(x, y);
        }
        pg
    }

    fn empty(n: usize) -> Self {
        let row_words = n.div_ceil(64).max(1);
        PackedGraph {
            n,
            row_words,
            rows: vec![0u64; row_words * n],
            degree: vec![0; n],
        }
    }

    fn add_edge(&mut self, x: usize, y: usize) {
        if x == y || self.adjacent(x, y) {
            return;
        }
        self.rows[x * self.row_words + y / 64] |= 1 << (y % 64);
        self.rows[y * self.row_words + x / 64] |= 1 << (x % 64);
        self.degree[x] += 1;
        self.degree[y] += 1;
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        self.rows[x * self.row_words + y / 64] >> (y % 64) & 1 == 1
    }

    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[x * self.row_words..(x + 1) * self.row_words]
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| {
                std::iter::successors(Some(w), |&b| Some(b & (b.wrapping_sub(1))))
                    .take_while(|&b| b != 0)
                    .map(move |b| wi * 64 + b.trailing_zeros() as usize)
            })
    }

    pub fn degree(&self, x: usize) -> u32 {
        self.degree[x]
    }
}

/// Maximum-saturation greedy coloring. Always proper; an upper bound on
/// the chromatic number, tight on edgeless and complete graphs.
pub fn greedy_coloring(g: &ConfusionGraph) -> Result<Coloring> {
    Ok(greedy_on(&PackedGraph::from_confusion(g)?))
}

pub fn greedy_on(g: &PackedGraph) -> Coloring {
    let n = g.order();
    let mut colors = vec![u32::MAX; n];
    // seen[v] tracks colors used by v's neighbors
    let mut seen: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut sat = vec![0u32; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colors[v] == u32::MAX)
            .max_by_key(|&v| (sat[v], g.degree(v), std::cmp::Reverse(v)))
            .expect("some vertex is uncolored");
        let c = (0..).find(|&c| !seen[v].get(c as usize).copied().unwrap_or(false)).unwrap();
        colors[v] = c;
        for u in g.neighbors(v) {
            if colors[u] == u32::MAX {
                let row = &mut seen[u];
                if row.len() <= c as usize {
                    row.resize(c as usize + 1, false);
                }
                if !row[c as usize] {
                    row[c as usize] = true;
                    sat[u] += 1;
                }
            }
        }
    }
    Coloring::new(colors)
}

/// Greedy maximal clique, used as a lower bound seed. Deterministic:
/// highest degree first, ties by ascending index.
pub fn greedy_clique(g: &PackedGraph) -> Vec<usize> {
    let n = g.order();
    if n == 0 {
        return Vec::new();
    }
    let start = (0..n)
        .max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v)))
        .unwrap();
    let mut clique = vec![start];
    let mut candidates: Vec<usize> = g.neighbors(start).collect();
    while let Some(&next) = candidates
        .iter()
        .max_by_key(|&&v| (g.degree(v), std::cmp::Reverse(v)))
    {
        clique.push(next);
        candidates.retain(|&v| v != next && g.adjacent(v, next));
    }
    clique.sort_unstable();
    clique
}

/// Decision procedure: find a proper coloring with at most `k` colors, or
/// report that none exists. Backtracking over a static order with a
/// fresh-color symmetry cap.
pub fn k_colorable(g: &PackedGraph, k: u32) -> Option<Coloring> {
    let n = g.order();
    if n == 0 {
        return Some(Coloring::new(Vec::new()));
    }
    if k == 0 {
        return None;
    }
    // beyond the greedy bound the answer is immediate
    let greedy = greedy_on(g);
    if greedy.count() <= k {
        return Some(greedy);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut colors = vec![u32::MAX; n];

    fn rec(
        g: &PackedGraph,
        order: &[usize],
        colors: &mut [u32],
        pos: usize,
        used: u32,
        k: u32,
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        let cap = (used + 1).min(k);
        for c in 0..cap {
            if g.neighbors(v).any(|u| colors[u] == c) {
                continue;
            }
            colors[v] = c;
            if rec(g, order, colors, pos + 1, used.max(c + 1), k) {
                return true;
            }
            colors[v] = u32::MAX;
        }
        false
    }

    if rec(g, &order, &mut colors, 0, 0, k) {
        Some(Coloring::new(colors))
    } else {
        None
    }
}

/// A strategy for computing an optimal proper coloring. Registered by
/// name and selectable at runtime.
pub trait ChromaticSolver: Sync + Send {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    /// Returns an optimal (chromatic-number) coloring.
    fn solve(&self, g: &PackedGraph) -> Coloring;
}

/// Branch and bound over a dynamic saturation order, seeded by the greedy
/// upper bound and a greedy maximal-clique lower bound.
pub struct DsaturBranchBound;

impl ChromaticSolver for DsaturBranchBound {
    fn name(&self) -> &'static str {
        "dsatur"
    }

    fn describe(&self) -> &'static str {
        "saturation-order branch and bound with clique lower bound"
    }

    fn solve(&self, g: &PackedGraph) -> Coloring {
        let n = g.order();
        let greedy = greedy_on(g);
        if n == 0 {
            return greedy;
        }
        let clique = greedy_clique(g);
        let lower = clique.len() as u32;
        if greedy.count() <= lower {
            return greedy;
        }

        struct Search<'a> {
            g: &'a PackedGraph,
            colors: Vec<u32>,
            best: u32,
            best_colors: Vec<u32>,
            uncolored: usize,
        }

        impl Search<'_> {
            fn run(&mut self, used: u32, lower: u32) {
                if self.best <= lower {
                    return;
                }
                if self.uncolored == 0 {
                    if used < self.best {
                        self.best = used;
                        self.best_colors = self.colors.clone();
                    }
                    return;
                }
                let v = self.pick();
                let cap = (used + 1).min(self.best - 1);
                for c in 0..cap {
                    if self.g.neighbors(v).any(|u| self.colors[u] == c) {
                        continue;
                    }
                    self.colors[v] = c;
                    self.uncolored -= 1;
                    self.run(used.max(c + 1), lower);
                    self.uncolored += 1;
                    self.colors[v] = u32::MAX;
                    if self.best <= lower {
                        return;
                    }
                }
            }

            fn pick(&self) -> usize {
                let n = self.g.order();
                let mut best_v = usize::MAX;
                let mut best_key = (0u32, 0u32, std::cmp::Reverse(usize::MAX));
                let mut seen = vec![false; n + 1];
                for v in 0..n {
                    if self.colors[v] != u32::MAX {
                        continue;
                    }
                    for s in seen.iter_mut() {
                        *s = false;
                    }
                    let mut sat = 0u32;
                    for u in self.g.neighbors(v) {
                        let c = self.colors[u];
                        if c != u32::MAX && !seen[c as usize] {
                            seen[c as usize] = true;
                            sat += 1;
                        }
                    }
                    let key = (sat, self.g.degree(v), std::cmp::Reverse(v));
                    if best_v == usize::MAX || key > best_key {
                        best_v = v;
                        best_key = key;
                    }
                }
                best_v
            }
        }

        let mut search = Search {
            g,
            colors: vec![u32::MAX; n],
            best: greedy.count(),
            best_colors: greedy.colors().to_vec(),
            uncolored: n,
        };
        for (c, &v) in clique.iter().enumerate() {
            search.colors[v] = c as u32;
            search.uncolored -= 1;
        }
        search.run(lower.max(1), lower);
        Coloring::new(search.best_colors)
    }
}

/// Independent cross-check: iterative deepening on the k-colorability
/// decision procedure, starting from the clique lower bound.
pub struct IterativeDeepening;

impl ChromaticSolver for IterativeDeepening {
    fn name(&self) -> &'static str {
        "iterdeep"
    }

    fn describe(&self) -> &'static str {
        "iterative deepening over k-colorability backtracking"
    }

    fn solve(&self, g: &PackedGraph) -> Coloring {
        let lower = greedy_clique(g).len().max(1) as u32;
        let mut k = lower;
        loop {
            if let Some(c) = k_colorable(g, k) {
                return c;
            }
            k += 1;
        }
    }
}

static SOLVERS: LazyLock<Vec<Box<dyn ChromaticSolver>>> =
    LazyLock::new(|| vec![Box::new(DsaturBranchBound), Box::new(IterativeDeepening)]);

pub fn solvers() -> &'static [Box<dyn ChromaticSolver>] {
    &SOLVERS
}

pub fn solver(name: &str) -> Option<&'static dyn ChromaticSolver> {
    SOLVERS.iter().find(|s| s.name() == name).map(|b| b.as_ref())
}

pub fn default_solver() -> &'static dyn ChromaticSolver {
    solver("dsatur").expect("default solver registered")
}

/// Exact chromatic number of a confusion graph with the default solver.
pub fn exact_chromatic_number(g: &ConfusionGraph) -> Result<Coloring> {
    Ok(default_solver().solve(&PackedGraph::from_confusion(g)?))
}

/// Cost of sequentialization respecting `u`, with the chromatic number it
/// came from: `kappa = ceil(log_q(chi))` via smallest-power comparison.
#[derive(Debug, Clone)]
pub struct KappaReport {
    pub kappa: u32,
    pub chi: u32,
    pub coloring: Coloring,
}

pub fn kappa_with(
    h: &AutomataNetwork,
    u: &Schedule,
    solver: &dyn ChromaticSolver,
) -> Result<KappaReport> {
    let g = ConfusionGraph::build(h, u)?;
    let coloring = solver.solve(&PackedGraph::from_confusion(&g)?);
    let chi = coloring.count();
    Ok(KappaReport {
        kappa: ceil_log(h.q(), chi as u64),
        chi,
        coloring,
    })
}

pub fn kappa(h: &AutomataNetwork, u: &Schedule) -> Result<u32> {
    Ok(kappa_with(h, u, default_solver())?.kappa)
}

/// `kappa(h,u)` if it is at most `cap`, else `None`; avoids computing the
/// chromatic number exactly when only the comparison matters. Exact on
/// every returned value: finds the smallest exponent `e` with
/// `chi <= q^e` by colorability tests.
pub fn kappa_at_most(h: &AutomataNetwork, u: &Schedule, cap: u32) -> Result<Option<u32>> {
    let g = ConfusionGraph::build(h, u)?;
    if g.is_edgeless() {
        return Ok(Some(0));
    }
    let pg = PackedGraph::from_confusion(&g)?;
    let q = h.q() as u64;
    let mut budget = q; // q^1
    for e in 1..=cap {
        let k = budget.min(pg.order() as u64) as u32;
        if k_colorable(&pg, k).is_some() {
            return Ok(Some(e));
        }
        budget = budget.saturating_mul(q);
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy)]
pub struct KappaMinOptions {
    /// Skip schedules that provably cannot improve on the running best.
    /// The minimum and its witness are unaffected.
    pub prune: bool,
}

impl Default for KappaMinOptions {
    fn default() -> Self {
        KappaMinOptions { prune: true }
    }
}

/// Minimum cost over all `n!` sequential schedules, with a minimizing
/// schedule as witness (the lexicographically first among ties).
pub fn kappa_min(h: &AutomataNetwork) -> Result<(u32, Schedule)> {
    kappa_min_opts(h, KappaMinOptions::default())
}

pub fn kappa_min_opts(
    h: &AutomataNetwork,
    opts: KappaMinOptions,
) -> Result<(u32, Schedule)> {
    let n = h.n();
    if n > KAPPA_MIN_LIMIT {
        return Err(Error::resource(format!(
            "kappa_min enumerates n! schedules; n <= {KAPPA_MIN_LIMIT} required, got {n}"
        )));
    }
    let total: u64 = (1..=n as u64).product();
    let best_seen = AtomicU32::new(u32::MAX);
    let chunk: u64 = 256;
    let mut best: Option<(u32, u64)> = None;

    let mut lo = 0u64;
    while lo < total {
        let hi = (lo + chunk).min(total);
        let chunk_best = (lo..hi)
            .into_par_iter()
            .map(|rank| -> Result<Option<(u32, u64)>> {
                let u = Schedule::unrank(n, rank);
                let value = if opts.prune {
                    let cap = best_seen.load(Ordering::Relaxed);
                    if cap == 0 {
                        return Ok(None);
                    }
                    let cap = if cap == u32::MAX {
                        ceil_log(h.q(), h.space().size() as u64)
                    } else {
                        cap
                    };
                    kappa_at_most(h, &u, cap)?
                } else {
                    Some(kappa(h, &u)?)
                };
                if let Some(v) = value {
                    best_seen.fetch_min(v, Ordering::Relaxed);
                }
                Ok(value.map(|v| (v, rank)))
            })
            .try_reduce(|| None, |a, b| {
                Ok(match (a, b) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (x, None) | (None, x) => x,
                })
            })?;
        best = match (best, chunk_best) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (x, None) | (None, x) => x,
        };
        if let Some((0, _)) = best {
            break;
        }
        lo = hi;
    }

    let (value, rank) = best.ok_or_else(|| Error::internal("no schedule evaluated"))?;
    Ok((value, Schedule::unrank(n, rank)))
}

/// The proven ceiling `ceil(n/2 + log_q(n/2 + 1))` on the cost for any
/// network of size `n`, evaluated in exact integer arithmetic.
pub fn theorem2_bound(n: usize, q: u32) -> u32 {
    let n = n as u128;
    let q = q as u128;
    let rhs = (n + 2) * (n + 2);
    let mut b = n.div_ceil(2);
    loop {
        // b >= n/2 + log_q((n+2)/2)  <=>  4 q^(2b-n) >= (n+2)^2
        let mut lhs: u128 = 4;
        for _ in 0..(2 * b - n) {
            lhs = lhs.saturating_mul(q);
        }
        if lhs >= rhs {
            return b as u32;
        }
        b += 1;
    }
}

/// Degree bound `(n/2 + 1) q^(n/2)` on the chromatic number of any
/// confusion graph with `n` even, from the factored-graph argument.
pub fn chi_degree_bound(n: usize, q: u32) -> u64 {
    assert!(n % 2 == 0, "degree bound stated for even n");
    (n as u64 / 2 + 1) * (q as u64).pow(n as u32 / 2)
}
