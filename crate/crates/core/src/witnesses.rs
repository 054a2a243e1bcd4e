use std::collections::HashMap;
use std::sync::LazyLock;

use crate::confusion;
use crate::error::{Error, Result};
use crate::network::AutomataNetwork;
use crate::schedule::Schedule;
use crate::space::{ceil_log, Space};

/// The pair-swap network: with `k = floor(n/2)`, coordinate `i` copies
/// `i+k` for `i < k`, coordinate `i` copies `i-k` for `k <= i < 2k`, and an
/// odd last coordinate holds its value.
pub fn swap_network(n: usize, q: u32) -> Result<AutomataNetwork> {
    if n < 2 {
        return Err(Error::input("swap network needs n >= 2"));
    }
    let space = Space::new(n, q)?;
    let k = n / 2;
    AutomataNetwork::from_coords(n, q, |x, i| {
        if i < k {
            space.digit(x, i + k)
        } else if i < 2 * k {
            space.digit(x, i - k)
        } else {
            space.digit(x, i)
        }
    })
}

/// The triple of networks from the running example: `h` swaps three pairs
/// of automata, `(f, w)` sequentializes it respecting the canonical order
/// with 3 extra automata, and `(g, v)` sequentializes it with a single
/// extra automaton by interleaving the pairs.
#[derive(Debug, Clone)]
pub struct Example1 {
    pub h: AutomataNetwork,
    pub f: AutomataNetwork,
    pub w: Schedule,
    pub g: AutomataNetwork,
    pub v: Schedule,
}

/// Builds the example for any alphabet size; sums are taken mod `q`.
pub fn example1(q: u32) -> Result<Example1> {
    let h = swap_network(6, q)?;

    // f: z -> z_[4,6] z_[7,9] z_[3]
    let fs = Space::new(9, q)?;
    let f = AutomataNetwork::from_coords(9, q, |z, i| {
        if i < 6 {
            fs.digit(z, i + 3)
        } else {
            fs.digit(z, i - 6)
        }
    })?;
    let w = Schedule::from_one_based(&[7, 8, 9, 1, 2, 3, 4, 5, 6])?;

    // g: y -> (y4, y5, y6, y7-y2-y3, y7-y4-y3, y7-y4-y5, y1+y2+y3)
    let gs = Space::new(7, q)?;
    let sub = |a: u32, b: u32| (a + q - b) % q;
    let g = AutomataNetwork::from_coords(7, q, |y, i| {
        let d = |j: usize| gs.digit(y, j - 1);
        match i + 1 {
            1 => d(4),
            2 => d(5),
            3 => d(6),
            4 => sub(sub(d(7), d(2)), d(3)),
            5 => sub(sub(d(7), d(4)), d(3)),
            6 => sub(sub(d(7), d(4)), d(5)),
            _ => (d(1) + d(2) + d(3)) % q,
        }
    })?;
    let v = Schedule::from_one_based(&[7, 1, 4, 2, 5, 3, 6])?;

    Ok(Example1 { h, f, w, g, v })
}

/// Which subset-coding scheme an encoding uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingFamily {
    /// Bits over the complement plus a successor table in the tail; works
    /// for any `q >= 2` with `n = 3k` (plus optional inert padding).
    Km2,
    /// Four-symbol scheme over the complement anchored at the prefix-sum
    /// maximum, with the anchor written in the tail; needs `q >= 4` and
    /// `n = 2k + ceil(log_q(2k))`.
    KmS,
}

/// An injective coding `b` of the k-subsets `E` of a 2k-element ground set
/// into configurations, such that the blocks `b(E)[E]` (free coordinates
/// exactly `E`) are pairwise disjoint. Decoding recovers `E` from any
/// member of its block.
#[derive(Debug, Clone)]
pub struct SubsetEncoding {
    family: EncodingFamily,
    k: usize,
    n: usize,
    q: u32,
    space: Space,
}

impl SubsetEncoding {
    /// Successor-table encoding on `n = 3k` coordinates, any `q >= 2`.
    /// `pad` appends that many extra coordinates fixed to 0.
    pub fn km2(k: usize, q: u32, pad: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("k must be positive"));
        }
        let n = 3 * k + pad;
        let enc = SubsetEncoding {
            family: EncodingFamily::Km2,
            k,
            n,
            q,
            space: Space::new(n, q)?,
        };
        enc.check_scale()?;
        Ok(enc)
    }

    /// Anchored four-symbol encoding on `n = 2k + ceil(log_q(2k))`
    /// coordinates; requires `q >= 4`.
    pub fn kms(k: usize, q: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("k must be positive"));
        }
        if q < 4 {
            return Err(Error::input(format!(
                "the anchored encoding needs q >= 4, got {q}"
            )));
        }
        let n = 2 * k + ceil_log(q, 2 * k as u64) as usize;
        let enc = SubsetEncoding {
            family: EncodingFamily::KmS,
            k,
            n,
            q,
            space: Space::new(n, q)?,
        };
        enc.check_scale()?;
        Ok(enc)
    }

    fn check_scale(&self) -> Result<()> {
        if self.k > 8 {
            return Err(Error::resource(
                "subset encodings are materialized exhaustively; k <= 8 required",
            ));
        }
        Ok(())
    }

    pub fn family(&self) -> EncodingFamily {
        self.family
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// All k-subsets of the ground set `[0, 2k)`, each sorted ascending,
    /// in lexicographic order.
    pub fn subsets(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..self.k).collect();
        loop {
            out.push(current.clone());
            // next k-combination of [0, 2k)
            let mut i = self.k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if current[i] < 2 * self.k - (self.k - i) {
                    current[i] += 1;
                    for j in i + 1..self.k {
                        current[j] = current[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// The canonical codeword `b(E)`: fixed coordinates written by the
    /// scheme, free coordinates (those in `E`) set to 0.
    pub fn encode(&self, subset: &[usize]) -> Result<usize> {
        let e = self.checked_subset(subset)?;
        let digits = match self.family {
            EncodingFamily::Km2 => self.km2_digits(&e),
            EncodingFamily::KmS => self.kms_digits(&e),
        };
        self.space.encode(&digits)
    }

    /// Recovers the subset coded by `x`; errors if `x` lies outside every
    /// code block.
    pub fn decode(&self, x: usize) -> Result<Vec<usize>> {
        if !self.space.contains(x) {
            return Err(Error::input(format!("configuration {x} out of range")));
        }
        let e = match self.family {
            EncodingFamily::Km2 => self.km2_decode(x)?,
            EncodingFamily::KmS => self.kms_decode(x)?,
        };
        if e.len() != self.k {
            return Err(Error::decode(format!(
                "scan recovered {} elements, expected {}",
                e.len(),
                self.k
            )));
        }
        // x must agree with the codeword off the free block
        let canonical = self.encode(&e)?;
        let mut masked = x;
        for &i in &e {
            masked = self.space.with_digit(masked, i, 0);
        }
        if masked != canonical {
            return Err(Error::decode(
                "configuration lies outside every code block".to_string(),
            ));
        }
        Ok(e)
    }

    /// The block `b(E)[E]`: all configurations agreeing with the codeword
    /// outside `E`.
    pub fn code_block(&self, subset: &[usize]) -> Result<Vec<usize>> {
        let e = self.checked_subset(subset)?;
        let base = self.encode(&e)?;
        Ok(self.space.block(base, &e))
    }

    /// Round-trips every fill of every block and checks the blocks are
    /// pairwise disjoint.
    pub fn validate(&self) -> Result<()> {
        let mut owner: HashMap<usize, Vec<usize>> = HashMap::new();
        for e in self.subsets() {
            for x in self.code_block(&e)? {
                if let Some(other) = owner.get(&x) {
                    return Err(Error::internal(format!(
                        "code blocks of {other:?} and {e:?} overlap at {x}"
                    )));
                }
                owner.insert(x, e.clone());
                let decoded = self.decode(x)?;
                if decoded != e {
                    return Err(Error::internal(format!(
                        "decode({x}) = {decoded:?}, expected {e:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn checked_subset(&self, subset: &[usize]) -> Result<Vec<usize>> {
        if subset.len() != self.k {
            return Err(Error::input(format!(
                "subset has {} elements, expected k = {}",
                subset.len(),
                self.k
            )));
        }
        let mut e = subset.to_vec();
        e.sort_unstable();
        e.dedup();
        if e.len() != self.k || e.last().copied().unwrap_or(0) >= 2 * self.k {
            return Err(Error::input(format!(
                "subset must consist of {} distinct elements of [0, {})",
                self.k,
                2 * self.k
            )));
        }
        Ok(e)
    }

    // --- successor-table scheme -------------------------------------------

    fn km2_digits(&self, e: &[usize]) -> Vec<u32> {
        let two_k = 2 * self.k;
        let in_e = |i: usize| e.binary_search(&i).is_ok();
        let succ_bit = |i: usize| u32::from(!in_e((i + 1) % two_k));
        let mut digits = vec![0u32; self.n];
        for i in 0..two_k {
            if !in_e(i) {
                digits[i] = succ_bit(i);
            }
        }
        digits[two_k] = u32::from(!in_e(0));
        for l in 1..self.k {
            digits[two_k + l] = succ_bit(e[l - 1]);
        }
        digits
    }

    fn km2_decode(&self, x: usize) -> Result<Vec<usize>> {
        let two_k = 2 * self.k;
        let bit = |pos: usize| -> Result<bool> {
            match self.space.digit(x, pos) {
                0 => Ok(true),
                1 => Ok(false),
                d => Err(Error::decode(format!(
                    "unexpected symbol {d} at coordinate {}",
                    pos + 1
                ))),
            }
        };
        let mut members = Vec::new();
        let mut next_in_e = bit(two_k)?; // membership of element 0
        for cursor in 0..two_k {
            let here = next_in_e;
            if here {
                members.push(cursor);
            }
            if cursor + 1 == two_k {
                break;
            }
            next_in_e = if here {
                if members.len() == self.k {
                    false
                } else {
                    bit(two_k + members.len())?
                }
            } else {
                bit(cursor)?
            };
        }
        Ok(members)
    }

    // --- anchored four-symbol scheme ---------------------------------------

    /// Prefix imbalance maximum `M(E)` and its earliest anchor `m(E)`.
    pub fn anchor(&self, subset: &[usize]) -> Result<(i32, usize)> {
        let e = self.checked_subset(subset)?;
        Ok(anchor_of(&e, self.k))
    }

    fn kms_digits(&self, e: &[usize]) -> Vec<u32> {
        let two_k = 2 * self.k;
        let in_e = |i: usize| e.binary_search(&i).is_ok();
        let (_, m) = anchor_of(e, self.k);
        let key = |i: usize| (i + two_k - (m + 1) % two_k) % two_k;

        // split E and its complement by whether the predecessor changes side
        let mut e1: Vec<usize> = e
            .iter()
            .copied()
            .filter(|&i| in_e((i + two_k - 1) % two_k))
            .collect();
        e1.sort_unstable_by_key(|&i| key(i));
        let mut ebar1: Vec<usize> = (0..two_k)
            .filter(|&i| !in_e(i) && !in_e((i + 1) % two_k))
            .collect();
        ebar1.sort_unstable_by_key(|&i| key(i));
        debug_assert_eq!(e1.len(), ebar1.len());

        let mut digits = vec![0u32; self.n];
        for i in 0..two_k {
            if !in_e(i) && in_e((i + 1) % two_k) {
                digits[i] = u32::from(!in_e((i + 2) % two_k));
            }
        }
        for (j, &i) in ebar1.iter().enumerate() {
            digits[i] = if in_e((e1[j] + 1) % two_k) { 2 } else { 3 };
        }
        for (t, d) in numeral(m as u64, self.q, self.n - two_k).into_iter().enumerate() {
            digits[two_k + t] = d;
        }
        digits
    }

    fn kms_decode(&self, x: usize) -> Result<Vec<usize>> {
        let two_k = 2 * self.k;
        let tail: u64 = (0..self.n - two_k)
            .rev()
            .fold(0u64, |acc, t| acc * self.q as u64 + self.space.digit(x, two_k + t) as u64);
        if tail >= two_k as u64 {
            return Err(Error::decode(format!("tail tag {tail} out of range")));
        }
        let m = tail as usize;

        let mut i0: Vec<usize> = Vec::new();
        let mut i1: Vec<usize> = Vec::new();
        let mut ibar1: Vec<usize> = Vec::new();
        let mut mode = 0u8;
        let mut cursor = (m + 1) % two_k;
        for _ in 0..two_k {
            match mode {
                0 => match self.space.digit(x, cursor) {
                    0 | 1 => mode = 1,
                    2 | 3 => {
                        ibar1.push(cursor);
                        mode = 0;
                    }
                    d => {
                        return Err(Error::decode(format!(
                            "unexpected symbol {d} at coordinate {}",
                            cursor + 1
                        )))
                    }
                },
                1 => {
                    i0.push(cursor);
                    match self.space.digit(x, (cursor + two_k - 1) % two_k) {
                        0 => mode = 2,
                        1 => mode = 0,
                        d => {
                            return Err(Error::decode(format!(
                                "unexpected predecessor symbol {d} before coordinate {}",
                                cursor + 1
                            )))
                        }
                    }
                }
                _ => {
                    let j = i1.len();
                    let &probe = ibar1.get(j).ok_or_else(|| {
                        Error::decode("scan ran out of paired complement positions".to_string())
                    })?;
                    i1.push(cursor);
                    match self.space.digit(x, probe) {
                        2 => mode = 2,
                        3 => mode = 0,
                        d => {
                            return Err(Error::decode(format!(
                                "unexpected paired symbol {d} at coordinate {}",
                                probe + 1
                            )))
                        }
                    }
                }
            }
            cursor = (cursor + 1) % two_k;
        }
        let mut e = i0;
        e.extend(i1);
        e.sort_unstable();
        Ok(e)
    }
}

/// `M(E)` and the earliest `m` with the prefix imbalance `|[0,m] ∩ E| -
/// |[0,m] \ E|` equal to `M(E)`.
fn anchor_of(e: &[usize], k: usize) -> (i32, usize) {
    let in_e = |i: usize| e.binary_search(&i).is_ok();
    let mut delta = 0i32;
    let mut best = i32::MIN;
    let mut at = 0usize;
    for i in 0..2 * k {
        delta += if in_e(i) { 1 } else { -1 };
        if delta > best {
            best = delta;
            at = i;
        }
    }
    (best, at)
}

/// Little-endian base-`q` numeral of `value`, zero-padded to `width`.
fn numeral(mut value: u64, q: u32, width: usize) -> Vec<u32> {
    let mut digits = vec![0u32; width];
    for d in digits.iter_mut() {
        *d = (value % q as u64) as u32;
        value /= q as u64;
    }
    debug_assert_eq!(value, 0);
    digits
}

/// The lower-bound network of the disjoint-blocks lemma: on each code
/// block the `E`-half and its complement swap values and the tail zeroes;
/// off the code it is constantly zero. Every coordinate function is
/// nontrivial and every schedule leaves a `q^k` clique in the confusion
/// graph.
pub fn network_from_encoding(enc: &SubsetEncoding) -> Result<AutomataNetwork> {
    let space = enc.space();
    let two_k = 2 * enc.k();
    let mut owner: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in enc.subsets() {
        for x in enc.code_block(&e)? {
            if owner.insert(x, e.clone()).is_some() {
                return Err(Error::internal("code blocks overlap".to_string()));
            }
        }
    }
    AutomataNetwork::from_fn(enc.n(), enc.q(), |x| {
        let Some(e) = owner.get(&x) else {
            return 0;
        };
        let ebar: Vec<usize> = (0..two_k).filter(|i| e.binary_search(i).is_err()).collect();
        let mut y = 0usize;
        for j in 0..enc.k() {
            y = space.with_digit(y, e[j], space.digit(x, ebar[j]));
            y = space.with_digit(y, ebar[j], space.digit(x, e[j]));
        }
        y
    })
}

/// The clique certifying the lower bound: for the first k ground-set
/// coordinates updated by `u`, the block of the corresponding codeword is
/// a clique of size `q^k` in the confusion graph. Checked pairwise before
/// returning.
pub fn clique_witness(
    h: &AutomataNetwork,
    u: &Schedule,
    enc: &SubsetEncoding,
) -> Result<Vec<usize>> {
    let mut e: Vec<usize> = u
        .order()
        .iter()
        .copied()
        .filter(|&i| i < 2 * enc.k())
        .take(enc.k())
        .collect();
    e.sort_unstable();
    let block = enc.code_block(&e)?;
    assert_pairwise_confused(h, u, &block)?;
    Ok(block)
}

/// The all-zero-second-half clique of the swap network under the canonical
/// schedule: `q^floor(n/2)` configurations, checked pairwise.
pub fn swap_clique(h: &AutomataNetwork, u: &Schedule) -> Result<Vec<usize>> {
    let k = h.n() / 2;
    let free: Vec<usize> = (0..k).collect();
    let block = h.space().block(0, &free);
    assert_pairwise_confused(h, u, &block)?;
    Ok(block)
}

fn assert_pairwise_confused(h: &AutomataNetwork, u: &Schedule, block: &[usize]) -> Result<()> {
    for (a, &x) in block.iter().enumerate() {
        for &y in &block[a + 1..] {
            if !confusion::are_confused(h, u, x, y)? {
                return Err(Error::internal(format!(
                    "expected clique, but {x} and {y} are not confused"
                )));
            }
        }
    }
    Ok(())
}

/// Parameters accepted by the named generators.
#[derive(Debug, Clone, Default)]
pub struct GenParams {
    pub n: Option<usize>,
    pub q: Option<u32>,
    pub k: Option<usize>,
}

/// A named family of witness networks, selectable at runtime.
pub trait NetworkGenerator: Sync + Send {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn generate(&self, params: &GenParams) -> Result<AutomataNetwork>;
}

struct SwapGen;
struct Example1Gen;
struct Km2Gen;
struct KmsGen;

impl NetworkGenerator for SwapGen {
    fn name(&self) -> &'static str {
        "swap"
    }
    fn describe(&self) -> &'static str {
        "pair-swap network with floor(n/2) transpositions (needs --n, --q)"
    }
    fn generate(&self, p: &GenParams) -> Result<AutomataNetwork> {
        let n = p.n.ok_or_else(|| Error::input("swap generator needs --n"))?;
        swap_network(n, p.q.unwrap_or(2))
    }
}

impl NetworkGenerator for Example1Gen {
    fn name(&self) -> &'static str {
        "example1"
    }
    fn describe(&self) -> &'static str {
        "the 6-automaton triple-swap running example (its h; --q optional)"
    }
    fn generate(&self, p: &GenParams) -> Result<AutomataNetwork> {
        Ok(example1(p.q.unwrap_or(2))?.h)
    }
}

impl NetworkGenerator for Km2Gen {
    fn name(&self) -> &'static str {
        "km2"
    }
    fn describe(&self) -> &'static str {
        "lower-bound network from the successor-table subset code, n = 3k (needs --k; --q >= 2)"
    }
    fn generate(&self, p: &GenParams) -> Result<AutomataNetwork> {
        let k = p.k.ok_or_else(|| Error::input("km2 generator needs --k"))?;
        let enc = SubsetEncoding::km2(k, p.q.unwrap_or(2), 0)?;
        network_from_encoding(&enc)
    }
}

impl NetworkGenerator for KmsGen {
    fn name(&self) -> &'static str {
        "kms"
    }
    fn describe(&self) -> &'static str {
        "lower-bound network from the anchored subset code, n = 2k + log_q(2k) (needs --k; --q >= 4)"
    }
    fn generate(&self, p: &GenParams) -> Result<AutomataNetwork> {
        let k = p.k.ok_or_else(|| Error::input("kms generator needs --k"))?;
        let enc = SubsetEncoding::kms(k, p.q.unwrap_or(4))?;
        network_from_encoding(&enc)
    }
}

static GENERATORS: LazyLock<Vec<Box<dyn NetworkGenerator>>> = LazyLock::new(|| {
    vec![
        Box::new(SwapGen),
        Box::new(Example1Gen),
        Box::new(Km2Gen),
        Box::new(KmsGen),
    ]
});

pub fn generators() -> &'static [Box<dyn NetworkGenerator>] {
    &GENERATORS
}

pub fn generator(name: &str) -> Option<&'static dyn NetworkGenerator> {
    GENERATORS.iter().find(|g| g.name() == name).map(|b| b.as_ref())
}
