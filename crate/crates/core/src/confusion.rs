use crate::error::{Error, Result};
use crate::network::AutomataNetwork;
use crate::schedule::Schedule;

/// Vertex-count threshold below which adjacency is stored as one bitset
/// row per vertex; above it, sorted neighbor lists. Dense rows at 2^13
/// vertices cost 8 MiB total.
const BITSET_LIMIT: usize = 1 << 13;

/// Vertex-count guard for materializing a confusion graph at all.
const BUILD_LIMIT: usize = 1 << 20;

/// Decides whether two distinct configurations can be confused while
/// sequentializing `h` along `u`: their images under `h` differ, yet some
/// synchronous prefix update `h^{u_1..u_i}` maps them to the same
/// configuration.
pub fn are_confused(
    h: &AutomataNetwork,
    u: &Schedule,
    x: usize,
    y: usize,
) -> Result<bool> {
    check_schedule(h, u)?;
    if x == y {
        return Err(Error::input("confusion is defined on distinct configurations"));
    }
    let hx = h.apply(x)?;
    let hy = h.apply(y)?;
    if hx == hy {
        return Ok(false);
    }
    let space = h.space();
    let mut px = x;
    let mut py = y;
    for &i in u.order() {
        px = space.with_digit(px, i, space.digit(hx, i));
        py = space.with_digit(py, i, space.digit(hy, i));
        if px == py {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The confusion graph `G_{h,u}` on all `q^n` configurations.
#[derive(Debug, Clone)]
pub struct ConfusionGraph {
    h: AutomataNetwork,
    u: Schedule,
    vertices: usize,
    adj: Adjacency,
    edge_count: usize,
}

#[derive(Debug, Clone)]
enum Adjacency {
    Bits { row_words: usize, words: Vec<u64> },
    Lists(Vec<Vec<u32>>),
}

impl ConfusionGraph {
    /// Materializes the graph by grouping configurations on their prefix
    /// trajectories: for each prefix length the configurations are
    /// bucketed by `h^{u_1..u_i}(x)`, and every differing-image pair
    /// inside a bucket is an edge. This is `O(n * q^n log q^n)` grouping
    /// work instead of all-pairs testing.
    pub fn build(h: &AutomataNetwork, u: &Schedule) -> Result<Self> {
        check_schedule(h, u)?;
        let space = h.space();
        let size = space.size();
        if size > BUILD_LIMIT {
            return Err(Error::resource(format!(
                "confusion graph on {size} vertices exceeds the 2^20 guard"
            )));
        }
        let n = h.n();
        let mut adj = if size <= BITSET_LIMIT {
            let row_words = size.div_ceil(64);
            Adjacency::Bits {
                row_words,
                words: vec![0u64; row_words * size],
            }
        } else {
            Adjacency::Lists(vec![Vec::new(); size])
        };

        let images: Vec<u32> = (0..size).map(|x| h.table()[x]).collect();
        let mut traj: Vec<u32> = (0..size as u32).collect();
        // keyed runs: (trajectory value, image, vertex)
        let mut keys: Vec<(u32, u32, u32)> = Vec::with_capacity(size);
        for step in 0..n {
            let i = u.at(step);
            for x in 0..size {
                traj[x] =
                    space.with_digit(traj[x] as usize, i, space.digit(images[x] as usize, i))
                        as u32;
            }
            keys.clear();
            keys.extend((0..size).map(|x| (traj[x], images[x], x as u32)));
            keys.sort_unstable();
            let mut lo = 0;
            while lo < size {
                let mut hi = lo + 1;
                while hi < size && keys[hi].0 == keys[lo].0 {
                    hi += 1;
                }
                if hi - lo > 1 {
                    connect_bucket(&mut adj, &keys[lo..hi]);
                }
                lo = hi;
            }
        }

        let mut edge_count = 0usize;
        match &mut adj {
            Adjacency::Bits { words, .. } => {
                edge_count = words.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2;
            }
            Adjacency::Lists(lists) => {
                for l in lists.iter_mut() {
                    l.sort_unstable();
                    l.dedup();
                    edge_count += l.len();
                }
                edge_count /= 2;
            }
        }

        Ok(ConfusionGraph {
            h: h.clone(),
            u: u.clone(),
            vertices: size,
            adj,
            edge_count,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn network(&self) -> &AutomataNetwork {
        &self.h
    }

    pub fn schedule(&self) -> &Schedule {
        &self.u
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        if x == y {
            return false;
        }
        match &self.adj {
            Adjacency::Bits { row_words, words } => {
                words[x * row_words + y / 64] >> (y % 64) & 1 == 1
            }
            Adjacency::Lists(lists) => lists[x].binary_search(&(y as u32)).is_ok(),
        }
    }

    pub fn degree(&self, x: usize) -> usize {
        match &self.adj {
            Adjacency::Bits { row_words, words } => words[x * row_words..(x + 1) * row_words]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum(),
            Adjacency::Lists(lists) => lists[x].len(),
        }
    }

    pub fn neighbors(&self, x: usize) -> Vec<usize> {
        match &self.adj {
            Adjacency::Bits { row_words, words } => {
                let mut out = Vec::new();
                for (wi, &w) in words[x * row_words..(x + 1) * row_words].iter().enumerate() {
                    let mut bits = w;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        out.push(wi * 64 + b);
                        bits &= bits - 1;
                    }
                }
                out
            }
            Adjacency::Lists(lists) => lists[x].iter().map(|&y| y as usize).collect(),
        }
    }

    /// Undirected edges `(x, y)` with `x < y`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for x in 0..self.vertices {
            for y in self.neighbors(x) {
                if x < y {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn is_edgeless(&self) -> bool {
        self.edge_count == 0
    }

    /// Graphviz DOT with digit-string vertex labels (coordinate 1 first).
    pub fn to_dot(&self) -> String {
        let space = self.h.space();
        let label = |x: usize| -> String {
            space
                .decode(x)
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("")
        };
        let mut s = String::from("graph confusion {\n");
        for x in 0..self.vertices {
            s.push_str(&format!("  \"{}\";\n", label(x)));
        }
        for (x, y) in self.edges() {
            s.push_str(&format!("  \"{}\" -- \"{}\";\n", label(x), label(y)));
        }
        s.push_str("}\n");
        s
    }

    /// Plain `x_index y_index` edge list, one edge per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (x, y) in self.edges() {
            s.push_str(&format!("{x} {y}\n"));
        }
        s
    }
}

fn connect_bucket(adj: &mut Adjacency, bucket: &[(u32, u32, u32)]) {
    // bucket is sorted by image; join every differing-image pair
    for (a, &(_, img_a, x)) in bucket.iter().enumerate() {
        for &(_, img_b, y) in &bucket[a + 1..] {
            if img_a != img_b {
                add_edge(adj, x as usize, y as usize);
            }
        }
    }
}

fn add_edge(adj: &mut Adjacency, x: usize, y: usize) {
    match adj {
        Adjacency::Bits { row_words, words } => {
            words[x * *row_words + y / 64] |= 1 << (y % 64);
            words[y * *row_words + x / 64] |= 1 << (x % 64);
        }
        Adjacency::Lists(lists) => {
            lists[x].push(y as u32);
            lists[y].push(x as u32);
        }
    }
}

fn check_schedule(h: &AutomataNetwork, u: &Schedule) -> Result<()> {
    if u.len() != h.n() {
        return Err(Error::input(format!(
            "schedule length {} does not match n={}",
            u.len(),
            h.n()
        )));
    }
    Ok(())
}
