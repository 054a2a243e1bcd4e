use std::collections::HashMap;

use rayon::prelude::*;

use crate::coloring::{self, Coloring};
use crate::confusion::ConfusionGraph;
use crate::error::{Error, Result};
use crate::network::AutomataNetwork;
use crate::schedule::Schedule;
use crate::space::Space;
use crate::synthesis::SequentializationCertificate;

/// One instruction: overwrite a single register with a function of the
/// whole memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    target: usize,
    rule: Vec<u32>,
}

impl Instruction {
    pub fn new(space: Space, target: usize, rule: Vec<u32>) -> Result<Self> {
        if target >= space.n() {
            return Err(Error::input(format!(
                "instruction target {} out of range",
                target + 1
            )));
        }
        if rule.len() != space.size() {
            return Err(Error::input("rule table does not cover the memory space"));
        }
        if let Some(&d) = rule.iter().find(|&&d| d >= space.q()) {
            return Err(Error::input(format!("rule digit {d} out of range")));
        }
        Ok(Instruction { target, rule })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn eval(&self, z: usize) -> u32 {
        self.rule[z]
    }
}

/// A straight-line program of single-register instructions over `m`
/// registers on alphabet `q`, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionProgram {
    space: Space,
    steps: Vec<Instruction>,
}

impl InstructionProgram {
    pub fn new(m: usize, q: u32, steps: Vec<Instruction>) -> Result<Self> {
        let space = Space::new(m, q)?;
        for s in &steps {
            if s.target >= m || s.rule.len() != space.size() {
                return Err(Error::input("instruction does not fit the program space"));
            }
        }
        Ok(InstructionProgram { space, steps })
    }

    pub fn empty(m: usize, q: u32) -> Result<Self> {
        InstructionProgram::new(m, q, Vec::new())
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn registers(&self) -> usize {
        self.space.n()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Instruction] {
        &self.steps
    }

    pub fn run(&self, z: usize) -> Result<usize> {
        if !self.space.contains(z) {
            return Err(Error::input(format!("memory state {z} out of range")));
        }
        let mut cur = z;
        for s in &self.steps {
            cur = self.space.with_digit(cur, s.target, s.rule[cur]);
        }
        Ok(cur)
    }

    /// Whether the program computes `h` on the first `n` registers:
    /// `pr ∘ steps = h ∘ pr` over the whole memory space.
    pub fn computes(&self, h: &AutomataNetwork) -> Result<bool> {
        if h.q() != self.space.q() || h.n() > self.registers() {
            return Err(Error::input("program space does not embed the network"));
        }
        let visible = h.space().size();
        for z in 0..self.space.size() {
            if self.run(z)? % visible != h.apply(z % visible)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn run_program(p: &InstructionProgram, z: usize) -> Result<usize> {
    p.run(z)
}

/// Reads the `n + k` sequential updates off a certificate and deletes the
/// steps at trivial coordinates of `h`; the remaining `omega(h) + k`
/// instructions still compute `h`. Verified before returning.
pub fn program_from_certificate(
    cert: &SequentializationCertificate,
) -> Result<InstructionProgram> {
    let h = cert.base();
    let f = cert.seq();
    let m = f.n();
    let trivial: Vec<bool> = (0..h.n()).map(|i| h.is_trivial_coordinate(i)).collect();
    let mut steps = Vec::new();
    for &coord in cert.order().order() {
        if coord < h.n() && trivial[coord] {
            continue;
        }
        let rule: Vec<u32> = (0..f.space().size()).map(|z| f.coordinate(coord, z)).collect();
        steps.push(Instruction::new(f.space(), coord, rule)?);
    }
    let p = InstructionProgram::new(m, f.q(), steps)?;
    debug_assert_eq!(p.len(), h.omega() + cert.extra());
    if !p.computes(h)? {
        return Err(Error::internal(
            "trimmed instruction list no longer computes the network".to_string(),
        ));
    }
    Ok(p)
}

/// `Omega(h) + kappa_min(h)`: the procedural complexity with unbounded
/// registers.
pub fn procedural_complexity_star(h: &AutomataNetwork) -> Result<usize> {
    let (k, _) = coloring::kappa_min(h)?;
    Ok(h.omega() + k as usize)
}

/// Shortest-program oracle: level-synchronous breadth-first search from
/// the identity over compositions with every single-register instruction,
/// deduplicated on the full transformation table of `A^m`.
///
/// The state space is the transformation monoid of `A^m`, so this is only
/// enumerable for tiny memories; the guard requires the packed table to
/// fit 24 bits (`q^m <= 8`).
pub fn min_program_search(
    h: &AutomataNetwork,
    m: usize,
    t_max: usize,
) -> Result<Option<usize>> {
    Ok(min_program_search_many(std::slice::from_ref(h), m, t_max)?[0])
}

/// Same search shared across many targets over the same memory: one BFS
/// answers every `h` at once.
pub fn min_program_search_many(
    hs: &[AutomataNetwork],
    m: usize,
    t_max: usize,
) -> Result<Vec<Option<usize>>> {
    let Some(first) = hs.first() else {
        return Ok(Vec::new());
    };
    let q = first.q();
    let n = first.n();
    if hs.iter().any(|h| h.q() != q || h.n() != n) {
        return Err(Error::input("targets must share n and q"));
    }
    if n > m {
        return Err(Error::input(format!("need m >= n, got m={m}, n={n}")));
    }
    let mem = Space::new(m, q)?;
    let size = mem.size();
    let bits = usize::BITS - (size - 1).leading_zeros();
    if bits as usize * size > 24 {
        return Err(Error::resource(format!(
            "monoid search needs q^m <= 8 to enumerate transformations, got {size}"
        )));
    }
    let bits = bits as usize;
    let packed_states = 1usize << (bits * size);
    let visible = first.space().size();

    // visible trace -> target indices
    let mut wanted: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for (idx, h) in hs.iter().enumerate() {
        let trace: Vec<u32> = (0..size).map(|z| h.table()[z % visible]).collect();
        wanted.entry(trace).or_default().push(idx);
    }

    let mut found: Vec<Option<usize>> = vec![None; hs.len()];
    let mut unresolved = hs.len();
    let mut dist: Vec<u8> = vec![u8::MAX; packed_states];

    let pack = |t: &[u32]| -> usize {
        t.iter()
            .enumerate()
            .fold(0usize, |acc, (z, &v)| acc | (v as usize) << (bits * z))
    };
    let entry = |packed: usize, z: usize| -> u32 { (packed >> (bits * z)) as u32 & ((1 << bits) - 1) };

    let identity: Vec<u32> = (0..size as u32).collect();
    let id_packed = pack(&identity);
    dist[id_packed] = 0;
    let mut frontier: Vec<u32> = vec![id_packed as u32];

    let mut resolve = |packed: usize,
                       level: usize,
                       found: &mut Vec<Option<usize>>,
                       unresolved: &mut usize| {
        let trace: Vec<u32> = (0..size).map(|z| entry(packed, z) % visible as u32).collect();
        if let Some(idxs) = wanted.get(&trace) {
            for &i in idxs {
                if found[i].is_none() {
                    found[i] = Some(level);
                    *unresolved -= 1;
                }
            }
        }
    };
    resolve(id_packed, 0, &mut found, &mut unresolved);

    let mut level = 0usize;
    while unresolved > 0 && !frontier.is_empty() && level < t_max {
        level += 1;
        let next: Vec<u32> = frontier
            .par_iter()
            .fold(Vec::new, |mut acc, &tp| {
                successors(tp as usize, size, bits, m, q, &mem, |succ| acc.push(succ as u32));
                acc
            })
            .reduce(Vec::new, |mut a, mut b| {
                a.append(&mut b);
                a
            });
        let mut fresh = Vec::new();
        for succ in next {
            let s = succ as usize;
            if dist[s] == u8::MAX {
                dist[s] = level as u8;
                resolve(s, level, &mut found, &mut unresolved);
                fresh.push(succ);
            }
        }
        frontier = fresh;
    }
    Ok(found)
}

/// Pushes every distinct one-instruction extension of the packed
/// transformation `tp`: for each register, every recoloring of its digit
/// that factors through the current image.
fn successors(
    tp: usize,
    size: usize,
    bits: usize,
    m: usize,
    q: u32,
    mem: &Space,
    mut push: impl FnMut(usize),
) {
    let mask = (1usize << bits) - 1;
    // fibers of the transformation: distinct image values and their packed
    // positional weights
    let mut image: Vec<u32> = Vec::with_capacity(size);
    let mut weights: Vec<usize> = Vec::with_capacity(size);
    for z in 0..size {
        let v = (tp >> (bits * z)) as u32 & mask as u32;
        match image.iter().position(|&w| w == v) {
            Some(i) => weights[i] += 1usize << (bits * z),
            None => {
                image.push(v);
                weights.push(1usize << (bits * z));
            }
        }
    }
    for a in 0..m {
        // zero register a in every image entry
        let mut base = tp;
        for z in 0..size {
            let v = (tp >> (bits * z)) as u32 & mask as u32;
            let zeroed = mem.with_digit(v as usize, a, 0);
            base = (base & !(mask << (bits * z))) | (zeroed << (bits * z));
        }
        let step = (q as u64).pow(a as u32) as usize;
        // odometer over digit assignments to the fibers
        let mut digits = vec![0u32; image.len()];
        let mut packed = base;
        loop {
            push(packed);
            let mut j = 0;
            loop {
                if j == digits.len() {
                    return_or_break_outer(&mut digits);
                    break;
                }
                if digits[j] + 1 < q {
                    digits[j] += 1;
                    packed += step * weights[j];
                    break;
                }
                packed -= step * weights[j] * (q as usize - 1);
                digits[j] = 0;
                j += 1;
            }
            if digits.iter().all(|&d| d == 0) {
                break;
            }
        }
    }
}

fn return_or_break_outer(_digits: &mut [u32]) {}

/// Looks for a shortest-possible program touching only the nontrivial
/// coordinates, one instruction each, and never writing an auxiliary
/// register. Such a program has length exactly `omega(h)` and is valid
/// over any number of registers. Returns a verified witness or `None`.
///
/// Each instruction is forced to emit its coordinate's final value, so
/// existence reduces to a functionality check along each candidate order;
/// auxiliary registers hold untouched initial values and never merge
/// distinct memory states, making the check register-count independent.
pub fn omega_only_program(h: &AutomataNetwork) -> Result<Option<InstructionProgram>> {
    let n = h.n();
    if n > coloring::KAPPA_MIN_LIMIT {
        return Err(Error::resource(format!(
            "order enumeration bounded at n <= {}",
            coloring::KAPPA_MIN_LIMIT
        )));
    }
    let space = h.space();
    let size = space.size();
    let nontrivial: Vec<usize> = (0..n).filter(|&i| !h.is_trivial_coordinate(i)).collect();
    let omega = nontrivial.len();
    let total: u64 = (1..=omega as u64).product();
    'orders: for rank in 0..total {
        let order = permute(&nontrivial, rank);
        let mut memory: Vec<usize> = (0..size).collect();
        let mut steps = Vec::new();
        for &a in &order {
            let mut rule: Vec<Option<u32>> = vec![None; size];
            for x in 0..size {
                let want = h.coordinate(a, x);
                match rule[memory[x]] {
                    None => rule[memory[x]] = Some(want),
                    Some(d) if d == want => {}
                    Some(_) => continue 'orders,
                }
            }
            let rule: Vec<u32> = rule
                .iter()
                .enumerate()
                .map(|(state, d)| d.unwrap_or_else(|| space.digit(state, a)))
                .collect();
            steps.push(Instruction::new(space, a, rule)?);
            for mx in memory.iter_mut() {
                let x = *mx;
                *mx = space.with_digit(x, a, steps.last().unwrap().eval(x));
            }
        }
        // memory was advanced per-state; re-simulate from scratch to verify
        let p = InstructionProgram::new(n, h.q(), steps)?;
        if p.computes(h)? {
            return Ok(Some(p));
        }
        return Err(Error::internal(
            "forced-rule program failed verification".to_string(),
        ));
    }
    Ok(None)
}

fn permute(items: &[usize], mut rank: u64) -> Vec<usize> {
    let mut pool = items.to_vec();
    let mut fact: u64 = (1..=pool.len() as u64).product();
    let mut out = Vec::with_capacity(pool.len());
    for left in (1..=pool.len()).rev() {
        fact /= left as u64;
        let idx = (rank / fact) as usize;
        rank %= fact;
        out.push(pool.remove(idx));
    }
    out
}

/// From any program computing `h`, derives the last-update schedule `w`
/// and the proper coloring of `G_{h,w}` read off the non-final update
/// steps: the coloring certifies `kappa(h,w) <= len - omega(h)`.
pub fn coloring_from_program(
    h: &AutomataNetwork,
    p: &InstructionProgram,
) -> Result<(Schedule, Coloring)> {
    if !p.computes(h)? {
        return Err(Error::input("program does not compute the network"));
    }
    let n = h.n();
    let t = p.len();

    let mut last_update: Vec<Option<usize>> = vec![None; n];
    for (j, s) in p.steps().iter().enumerate() {
        if s.target() < n {
            last_update[s.target()] = Some(j);
        }
    }
    // order of [n] by last update step, then the never-updated coordinates
    let mut updated: Vec<(usize, usize)> = last_update
        .iter()
        .enumerate()
        .filter_map(|(i, &j)| j.map(|j| (j, i)))
        .collect();
    updated.sort_unstable();
    let final_steps: Vec<usize> = updated.iter().map(|&(j, _)| j).collect();
    let mut order: Vec<usize> = updated.into_iter().map(|(_, i)| i).collect();
    order.extend((0..n).filter(|&i| last_update[i].is_none()));
    let w = Schedule::new(order)?;

    let color_steps: Vec<usize> = (0..t).filter(|j| !final_steps.contains(j)).collect();
    let q = h.q() as u64;
    let size = h.space().size();
    let mut raw = Vec::with_capacity(size);
    for x in 0..size {
        let mut z = x; // auxiliary registers start at zero
        let mut color: u64 = 0;
        let mut weight: u64 = 1;
        for (j, s) in p.steps().iter().enumerate() {
            let d = s.eval(z);
            z = p.space().with_digit(z, s.target(), d);
            if color_steps.contains(&j) {
                color += d as u64 * weight;
                weight *= q;
            }
        }
        raw.push(color as u32);
    }
    let coloring = Coloring::new(raw);
    let g = ConfusionGraph::build(h, &w)?;
    if !coloring.is_proper(&g) {
        return Err(Error::internal(
            "program-derived coloring is improper".to_string(),
        ));
    }
    Ok((w, coloring))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::exact_chromatic_number;
    use crate::witnesses;

    fn xor_swap_program() -> InstructionProgram {
        // z3 <- z1, z1 <- z2, z2 <- z3: swaps the first two registers
        let space = Space::new(3, 2).unwrap();
        let col = |c: usize| -> Vec<u32> { (0..8).map(|z| space.digit(z, c)).collect() };
        InstructionProgram::new(
            3,
            2,
            vec![
                Instruction::new(space, 2, col(0)).unwrap(),
                Instruction::new(space, 0, col(1)).unwrap(),
                Instruction::new(space, 1, col(2)).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_program_is_identity() {
        let p = InstructionProgram::empty(3, 2).unwrap();
        for z in 0..8 {
            assert_eq!(p.run(z).unwrap(), z);
        }
    }

    #[test]
    fn xor_swap_program_computes_the_swap() {
        let p = xor_swap_program();
        let h = witnesses::swap_network(2, 2).unwrap();
        assert!(p.computes(&h).unwrap());
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn program_from_identity_certificate_is_empty() {
        let h = AutomataNetwork::identity(2, 2).unwrap();
        let cert = SequentializationCertificate::new(
            h.clone(),
            h.clone(),
            Schedule::canonical(2),
        )
        .unwrap();
        let p = program_from_certificate(&cert).unwrap();
        assert_eq!(p.len(), 0);
    }

    #[test]
    fn program_from_example1_g_certificate_has_length_seven() {
        let ex = witnesses::example1(2).unwrap();
        let cert = SequentializationCertificate::new(ex.h.clone(), ex.g, ex.v).unwrap();
        let p = program_from_certificate(&cert).unwrap();
        assert_eq!(p.len(), 7);
        assert!(p.computes(&ex.h).unwrap());
    }

    #[test]
    fn program_from_swap2_certificate_has_length_three() {
        let h = witnesses::swap_network(2, 2).unwrap();
        let u = Schedule::canonical(2);
        let g = ConfusionGraph::build(&h, &u).unwrap();
        let c = exact_chromatic_number(&g).unwrap();
        let cert = crate::synthesis::synthesize_from_coloring(&h, &u, &c).unwrap();
        let p = program_from_certificate(&cert).unwrap();
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn min_program_identity_is_zero() {
        let id = AutomataNetwork::identity(2, 2).unwrap();
        assert_eq!(min_program_search(&id, 2, 8).unwrap(), Some(0));
        assert_eq!(min_program_search(&id, 3, 8).unwrap(), Some(0));
    }

    #[test]
    fn min_program_swap2_without_scratch_is_impossible() {
        let h = witnesses::swap_network(2, 2).unwrap();
        assert_eq!(min_program_search(&h, 2, 8).unwrap(), None);
    }

    #[test]
    fn min_program_swap2_with_scratch_is_three() {
        let h = witnesses::swap_network(2, 2).unwrap();
        assert_eq!(min_program_search(&h, 3, 8).unwrap(), Some(3));
    }

    #[test]
    fn min_program_guard_rejects_large_memories() {
        let h = witnesses::swap_network(2, 2).unwrap();
        assert!(matches!(
            min_program_search(&h, 4, 8),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn omega_only_program_cases() {
        let id = AutomataNetwork::identity(3, 2).unwrap();
        assert_eq!(omega_only_program(&id).unwrap().unwrap().len(), 0);

        let h = witnesses::swap_network(2, 2).unwrap();
        assert!(omega_only_program(&h).unwrap().is_none());

        // h = (x2, x2): one nontrivial coordinate, order (1) works
        let s = Space::new(2, 2).unwrap();
        let h = AutomataNetwork::from_coords(2, 2, |x, _| s.digit(x, 1)).unwrap();
        let p = omega_only_program(&h).unwrap().unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn procedural_star_values() {
        let id = AutomataNetwork::identity(2, 2).unwrap();
        assert_eq!(procedural_complexity_star(&id).unwrap(), 0);
        let h = witnesses::swap_network(6, 2).unwrap();
        assert_eq!(procedural_complexity_star(&h).unwrap(), 7);
    }

    #[test]
    fn lemma_ab_network_has_star_at_least_four() {
        let enc = witnesses::SubsetEncoding::km2(1, 2, 0).unwrap();
        let h = witnesses::network_from_encoding(&enc).unwrap();
        assert_eq!(h.omega(), 3);
        assert!(procedural_complexity_star(&h).unwrap() >= 4);
    }

    #[test]
    fn coloring_from_xor_swap_program() {
        let h = witnesses::swap_network(2, 2).unwrap();
        let p = xor_swap_program();
        let (w, c) = coloring_from_program(&h, &p).unwrap();
        assert_eq!(w.order(), &[0, 1]);
        assert_eq!(c.count(), 2);
    }

    #[test]
    fn coloring_from_empty_program_on_identity() {
        let id = AutomataNetwork::identity(2, 2).unwrap();
        let p = InstructionProgram::empty(2, 2).unwrap();
        let (_, c) = coloring_from_program(&id, &p).unwrap();
        assert_eq!(c.count(), 1);
    }

    #[test]
    fn coloring_from_example1_program() {
        let ex = witnesses::example1(2).unwrap();
        let cert = SequentializationCertificate::new(ex.h.clone(), ex.g, ex.v).unwrap();
        let p = program_from_certificate(&cert).unwrap();
        let (w, c) = coloring_from_program(&ex.h, &p).unwrap();
        assert!(c.count() <= 2);
        let g = ConfusionGraph::build(&ex.h, &w).unwrap();
        assert!(c.is_proper(&g));
    }

    #[test]
    fn coloring_from_program_rejects_non_computing_programs() {
        let h = witnesses::swap_network(2, 2).unwrap();
        let p = InstructionProgram::empty(2, 2).unwrap();
        assert!(matches!(
            coloring_from_program(&h, &p),
            Err(Error::Input(_))
        ));
    }
}
