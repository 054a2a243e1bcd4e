use crate::error::{Error, Result};
use crate::schedule::{Schedule, UpdateWord};
use crate::space::Space;

/// A finite automata network: a transformation of `[0,q)^n` stored as a
/// full table over all `q^n` configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomataNetwork {
    space: Space,
    table: Vec<u32>,
}

impl AutomataNetwork {
    /// Builds a network from its full table. `table[x]` is the index of
    /// `h(x)`.
    pub fn from_table(n: usize, q: u32, table: Vec<u32>) -> Result<Self> {
        let space = Space::new(n, q)?;
        if table.len() != space.size() {
            return Err(Error::input(format!(
                "table has {} rows, expected q^n = {}",
                table.len(),
                space.size()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&y| y as usize >= space.size()) {
            return Err(Error::input(format!(
                "table entry {bad} out of range, expected < {}",
                space.size()
            )));
        }
        Ok(AutomataNetwork { space, table })
    }

    /// Builds a network by evaluating `f` on every configuration index.
    pub fn from_fn(n: usize, q: u32, f: impl Fn(usize) -> usize) -> Result<Self> {
        let space = Space::new(n, q)?;
        let mut table = Vec::with_capacity(space.size());
        for x in 0..space.size() {
            let y = f(x);
            if y >= space.size() {
                return Err(Error::internal(format!("image {y} out of range")));
            }
            table.push(y as u32);
        }
        Ok(AutomataNetwork { space, table })
    }

    /// Builds a network from per-coordinate digit functions: `coord(x, i)`
    /// is the digit of coordinate `i` in `h(x)`.
    pub fn from_coords(n: usize, q: u32, coord: impl Fn(usize, usize) -> u32) -> Result<Self> {
        let space = Space::new(n, q)?;
        AutomataNetwork::from_fn(n, q, |x| {
            let mut y = 0usize;
            for i in (0..n).rev() {
                let d = coord(x, i);
                debug_assert!(d < q);
                y = y * q as usize + d as usize;
            }
            y
        })
        .map(|net| {
            debug_assert_eq!(net.space, space);
            net
        })
    }

    pub fn identity(n: usize, q: u32) -> Result<Self> {
        AutomataNetwork::from_fn(n, q, |x| x)
    }

    /// Uniformly random network.
    pub fn random(n: usize, q: u32, rng: &mut impl rand::Rng) -> Result<Self> {
        let space = Space::new(n, q)?;
        let table = (0..space.size())
            .map(|_| rng.gen_range(0..space.size()) as u32)
            .collect();
        Ok(AutomataNetwork { space, table })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn q(&self) -> u32 {
        self.space.q()
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    /// Parallel update: `h(x)`.
    pub fn apply(&self, x: usize) -> Result<usize> {
        if !self.space.contains(x) {
            return Err(Error::input(format!(
                "configuration {x} out of range, expected < {}",
                self.space.size()
            )));
        }
        Ok(self.table[x] as usize)
    }

    fn image(&self, x: usize) -> usize {
        self.table[x] as usize
    }

    /// Coordinate function `h_i(x)` as a digit.
    pub fn coordinate(&self, i: usize, x: usize) -> u32 {
        self.space.digit(self.image(x), i)
    }

    /// Single update `h^i(x)`: only coordinate `i` fires.
    pub fn update_single(&self, i: usize, x: usize) -> Result<usize> {
        if i >= self.n() {
            return Err(Error::input(format!(
                "coordinate {} out of range for n={}",
                i + 1,
                self.n()
            )));
        }
        if !self.space.contains(x) {
            return Err(Error::input(format!("configuration {x} out of range")));
        }
        Ok(self.space.with_digit(x, i, self.coordinate(i, x)))
    }

    /// Synchronous subset update `h^I(x)`: all coordinates of `I` fire at
    /// once, reading the original `x`.
    pub fn update_set(&self, coords: &[usize], x: usize) -> Result<usize> {
        if !self.space.contains(x) {
            return Err(Error::input(format!("configuration {x} out of range")));
        }
        let mut y = x;
        for &i in coords {
            if i >= self.n() {
                return Err(Error::input(format!(
                    "coordinate {} out of range for n={}",
                    i + 1,
                    self.n()
                )));
            }
            y = self.space.with_digit(y, i, self.coordinate(i, x));
        }
        Ok(y)
    }

    /// Sequential word update `h^w(x)`: letters fire left to right, each
    /// reading the state left by its predecessors. Empty word is identity.
    pub fn update_word(&self, word: &UpdateWord, x: usize) -> Result<usize> {
        let mut y = x;
        for &i in word.letters() {
            y = self.update_single(i, y)?;
        }
        Ok(y)
    }

    /// Sequential update along a whole schedule.
    pub fn update_schedule(&self, schedule: &Schedule, x: usize) -> Result<usize> {
        if schedule.len() != self.n() {
            return Err(Error::input(format!(
                "schedule length {} does not match n={}",
                schedule.len(),
                self.n()
            )));
        }
        self.update_word(&UpdateWord::from(schedule), x)
    }

    /// True iff `h_i(x) = x_i` for every configuration.
    pub fn is_trivial_coordinate(&self, i: usize) -> bool {
        (0..self.space.size()).all(|x| self.coordinate(i, x) == self.space.digit(x, i))
    }

    /// Number of non-trivial coordinate functions.
    pub fn omega(&self) -> usize {
        (0..self.n()).filter(|&i| !self.is_trivial_coordinate(i)).count()
    }

    /// Interaction graph: `(i,j)` present iff some pair of configurations
    /// differing only at `i` maps to different digits at `j`. Exhaustive
    /// witness search over all `q^n * q` pairs per the definition.
    pub fn interaction_graph(&self) -> InteractionGraph {
        let n = self.n();
        let q = self.q();
        let full: u32 = (1u32 << n) - 1;
        let mut influences = vec![0u32; n];
        for i in 0..n {
            for x in 0..self.space.size() {
                if self.space.digit(x, i) != 0 {
                    continue;
                }
                let base = self.image(x);
                if q == 2 {
                    // for q = 2 index bits are digits, so xor marks exactly
                    // the coordinates that changed
                    let diff = base ^ self.image(self.space.with_digit(x, i, 1));
                    influences[i] |= diff as u32;
                } else {
                    for d in 1..q {
                        let other = self.image(self.space.with_digit(x, i, d));
                        if other == base {
                            continue;
                        }
                        for j in 0..n {
                            if self.space.digit(other, j) != self.space.digit(base, j) {
                                influences[i] |= 1 << j;
                            }
                        }
                    }
                }
                if influences[i] == full {
                    break;
                }
            }
        }
        InteractionGraph { n, influences }
    }
}

/// Directed interaction graph on the coordinates; `(i,j)` means `i` has an
/// influence on `j`. Self-loops allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    n: usize,
    /// `influences[i]` is the bitmask of coordinates influenced by `i`.
    influences: Vec<u32>,
}

impl InteractionGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.influences[i] >> j & 1 == 1
    }

    /// Directed edges in lexicographic order, 0-based.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Undirected edge set of `IG*`, self-loops dropped (a self-loop is
    /// covered by any bag containing the vertex, so it never constrains a
    /// path decomposition).
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.has_edge(i, j) || self.has_edge(j, i) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Undirected neighbors of `i` in `IG*`, without `i` itself.
    pub fn undirected_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| j != i && (self.has_edge(i, j) || self.has_edge(j, i)))
            .collect()
    }

    /// Graphviz DOT rendering, 1-based vertex labels.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph interaction {\n");
        for i in 0..self.n {
            s.push_str(&format!("  {};\n", i + 1));
        }
        for (i, j) in self.edges() {
            s.push_str(&format!("  {} -> {};\n", i + 1, j + 1));
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witnesses;

    fn swap2() -> AutomataNetwork {
        witnesses::swap_network(2, 2).unwrap()
    }

    #[test]
    fn apply_identity_is_identity() {
        let id = AutomataNetwork::identity(3, 2).unwrap();
        for x in 0..8 {
            assert_eq!(id.apply(x).unwrap(), x);
        }
    }

    #[test]
    fn apply_swap_exchanges_digits() {
        let h = swap2();
        let x = h.space().encode(&[0, 1]).unwrap();
        let y = h.apply(x).unwrap();
        assert_eq!(h.space().decode(y), vec![1, 0]);
    }

    #[test]
    fn apply_example1_alternating_configuration() {
        // h: x -> (x4,x5,x6,x1,x2,x3) sends (0,1,0,1,0,1) to (1,0,1,0,1,0)
        let h = witnesses::swap_network(6, 2).unwrap();
        let x = h.space().encode(&[0, 1, 0, 1, 0, 1]).unwrap();
        let y = h.apply(x).unwrap();
        assert_eq!(h.space().decode(y), vec![1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn apply_rejects_out_of_range() {
        let h = swap2();
        assert!(matches!(h.apply(4), Err(Error::Input(_))));
    }

    #[test]
    fn update_single_swap_first_coordinate() {
        let h = swap2();
        let x = h.space().encode(&[0, 1]).unwrap();
        let y = h.update_single(0, x).unwrap();
        assert_eq!(h.space().decode(y), vec![1, 1]);
    }

    #[test]
    fn update_single_identity_fixes_everything() {
        let id = AutomataNetwork::identity(3, 3).unwrap();
        for x in 0..27 {
            for i in 0..3 {
                assert_eq!(id.update_single(i, x).unwrap(), x);
            }
        }
    }

    #[test]
    fn update_single_example1_g_coordinate_seven() {
        // g_7(y) = y1 + y2 + y3 mod 2; on y starting (1,1,0,...) it becomes 0
        let ex = witnesses::example1(2).unwrap();
        let g = &ex.g;
        let y = g.space().encode(&[1, 1, 0, 0, 0, 0, 1]).unwrap();
        let z = g.update_single(6, y).unwrap();
        assert_eq!(g.space().digit(z, 6), 0);
        for i in 0..6 {
            assert_eq!(g.space().digit(z, i), g.space().digit(y, i));
        }
    }

    #[test]
    fn update_single_rejects_bad_coordinate() {
        let h = swap2();
        assert!(matches!(h.update_single(2, 0), Err(Error::Input(_))));
    }

    #[test]
    fn update_set_empty_and_full() {
        let h = witnesses::swap_network(4, 2).unwrap();
        for x in 0..16 {
            assert_eq!(h.update_set(&[], x).unwrap(), x);
            assert_eq!(h.update_set(&[0, 1, 2, 3], x).unwrap(), h.apply(x).unwrap());
        }
    }

    #[test]
    fn update_set_lemma4_half_update_zeroes() {
        // swap network n=4: updating {1,2} on x=(1,1,0,0) lands on (0,0,0,0)
        let h = witnesses::swap_network(4, 2).unwrap();
        let x = h.space().encode(&[1, 1, 0, 0]).unwrap();
        let y = h.update_set(&[0, 1], x).unwrap();
        assert_eq!(y, 0);
    }

    #[test]
    fn update_set_is_synchronous_not_sequential() {
        // counterexample: for the swap, h^{1,2} differs from the word (1,2)
        let h = swap2();
        let x = h.space().encode(&[0, 1]).unwrap();
        let sync = h.update_set(&[0, 1], x).unwrap();
        let word = UpdateWord::new(vec![0, 1], 2).unwrap();
        let seq = h.update_word(&word, x).unwrap();
        assert_eq!(h.space().decode(sync), vec![1, 0]);
        assert_eq!(h.space().decode(seq), vec![1, 1]);
        assert_ne!(sync, seq);
    }

    #[test]
    fn update_word_empty_is_identity() {
        let h = swap2();
        for x in 0..4 {
            assert_eq!(h.update_word(&UpdateWord::empty(), x).unwrap(), x);
        }
    }

    #[test]
    fn update_word_three_instruction_swap() {
        // f1 <- x2, f2 <- x3, f3 <- x1 executed as x3<-x1, x1<-x2, x2<-x3
        // swaps the first two coordinates using the third as scratch
        let f = AutomataNetwork::from_coords(3, 2, |x, i| {
            let s = Space::new(3, 2).unwrap();
            match i {
                0 => s.digit(x, 1),
                1 => s.digit(x, 2),
                _ => s.digit(x, 0),
            }
        })
        .unwrap();
        let word = UpdateWord::new(vec![2, 0, 1], 3).unwrap();
        for a in 0..2u32 {
            for b in 0..2u32 {
                let x = f.space().encode(&[a, b, 0]).unwrap();
                let y = f.update_word(&word, x).unwrap();
                let digits = f.space().decode(y);
                assert_eq!(digits[0], b);
                assert_eq!(digits[1], a);
            }
        }
    }

    #[test]
    fn update_word_example1_f_computes_h() {
        let ex = witnesses::example1(2).unwrap();
        let f = &ex.f;
        let h = &ex.h;
        for z in 0..f.space().size() {
            let out = f.update_schedule(&ex.w, z).unwrap();
            let x = z % h.space().size();
            let hx = h.apply(x).unwrap();
            assert_eq!(out % h.space().size(), hx);
            // the tail keeps the original first three digits: f^w(z) = h(z_[6]) z_[3]
            assert_eq!(out / h.space().size(), z % 8);
        }
    }

    #[test]
    fn interaction_graph_constant_network_has_no_edges() {
        let c = AutomataNetwork::from_fn(3, 2, |_| 5).unwrap();
        assert!(c.interaction_graph().edges().is_empty());
    }

    #[test]
    fn interaction_graph_identity_is_self_loops() {
        let id = AutomataNetwork::identity(3, 3).unwrap();
        let ig = id.interaction_graph();
        assert_eq!(ig.edges(), vec![(0, 0), (1, 1), (2, 2)]);
        assert!(ig.undirected_edges().is_empty());
    }

    #[test]
    fn interaction_graph_example1_pairing() {
        let h = witnesses::swap_network(6, 2).unwrap();
        let ig = h.interaction_graph();
        let expected = vec![(0, 3), (1, 4), (2, 5), (3, 0), (4, 1), (5, 2)];
        assert_eq!(ig.edges(), expected);
        assert_eq!(ig.undirected_edges(), vec![(0, 3), (1, 4), (2, 5)]);
    }

    #[test]
    fn interaction_graph_ternary_alphabet_influence() {
        // coordinate 0 copies a nonlinear function of coordinate 1 over q=3;
        // xor-based shortcut must not miss influences when q > 2
        let h = AutomataNetwork::from_coords(2, 3, |x, i| {
            let s = Space::new(2, 3).unwrap();
            if i == 0 {
                if s.digit(x, 1) == 2 { 1 } else { 0 }
            } else {
                s.digit(x, 1)
            }
        })
        .unwrap();
        let ig = h.interaction_graph();
        assert!(ig.has_edge(1, 0));
        assert!(!ig.has_edge(0, 0));
        assert!(!ig.has_edge(0, 1));
        assert!(ig.has_edge(1, 1));
    }

    #[test]
    fn omega_counts_nontrivial_coordinates() {
        assert_eq!(AutomataNetwork::identity(4, 2).unwrap().omega(), 0);
        assert_eq!(witnesses::swap_network(6, 2).unwrap().omega(), 6);
        // fixed odd coordinate stays trivial
        assert_eq!(witnesses::swap_network(5, 3).unwrap().omega(), 4);
    }

    #[test]
    fn dot_export_lists_vertices_and_edges() {
        let h = swap2();
        let dot = h.interaction_graph().to_dot();
        assert!(dot.contains("digraph"));
        assert!(dot.contains("1 -> 2;"));
        assert!(dot.contains("2 -> 1;"));
    }
}
