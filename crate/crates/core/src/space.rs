use crate::error::{Error, Result};

/// Hard cap on the number of configurations a network table may hold.
///
/// Every algorithm here quantifies over all of `q^n`, so tables are the
/// honest representation; this guard keeps them at desk scale.
pub const MAX_CONFIGS: u64 = 1 << 26;

/// The configuration space `[0,q)^n`.
///
/// Configurations are addressed by their index in `[0, q^n)`; coordinate
/// `i` (0-based) is the base-`q` digit of weight `q^i`, so coordinate 0 is
/// the least significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Space {
    n: usize,
    q: u32,
    size: usize,
}

impl Space {
    pub fn new(n: usize, q: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("need at least one automaton"));
        }
        if q < 2 {
            return Err(Error::input(format!("alphabet size must be >= 2, got {q}")));
        }
        let mut size: u64 = 1;
        for _ in 0..n {
            size = size
                .checked_mul(q as u64)
                .filter(|&s| s <= MAX_CONFIGS)
                .ok_or_else(|| {
                    Error::resource(format!("q^n exceeds 2^26 for n={n}, q={q}"))
                })?;
        }
        Ok(Space { n, q, size: size as usize })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of configurations, `q^n`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.size
    }

    /// Digit of coordinate `i` in configuration `x`.
    pub fn digit(&self, x: usize, i: usize) -> u32 {
        debug_assert!(i < self.n);
        ((x as u64 / self.weight(i)) % self.q as u64) as u32
    }

    /// Configuration equal to `x` except coordinate `i` holds `d`.
    pub fn with_digit(&self, x: usize, i: usize, d: u32) -> usize {
        debug_assert!(d < self.q);
        let w = self.weight(i);
        let old = (x as u64 / w) % self.q as u64;
        (x as u64 + (d as u64).wrapping_sub(old).wrapping_mul(w)) as usize
    }

    pub fn decode(&self, x: usize) -> Vec<u32> {
        let mut digits = Vec::with_capacity(self.n);
        let mut rest = x as u64;
        for _ in 0..self.n {
            digits.push((rest % self.q as u64) as u32);
            rest /= self.q as u64;
        }
        digits
    }

    pub fn encode(&self, digits: &[u32]) -> Result<usize> {
        if digits.len() != self.n {
            return Err(Error::input(format!(
                "expected {} digits, got {}",
                self.n,
                digits.len()
            )));
        }
        let mut x: u64 = 0;
        for (i, &d) in digits.iter().enumerate() {
            if d >= self.q {
                return Err(Error::input(format!(
                    "digit {d} at coordinate {} out of range for q={}",
                    i + 1,
                    self.q
                )));
            }
            x += d as u64 * self.weight(i);
        }
        Ok(x as usize)
    }

    /// Configurations agreeing with `x` outside the coordinates of `free`,
    /// enumerated with the free block running through all `q^|free|` fills.
    pub fn block(&self, x: usize, free: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        let mut base = x;
        for &i in free {
            base = self.with_digit(base, i, 0);
        }
        let mut fill = vec![0u32; free.len()];
        loop {
            let mut y = base;
            for (j, &i) in free.iter().enumerate() {
                y = self.with_digit(y, i, fill[j]);
            }
            out.push(y);
            // odometer over the free block
            let mut j = 0;
            loop {
                if j == free.len() {
                    return out;
                }
                fill[j] += 1;
                if fill[j] < self.q {
                    break;
                }
                fill[j] = 0;
                j += 1;
            }
        }
    }

    fn weight(&self, i: usize) -> u64 {
        (self.q as u64).pow(i as u32)
    }
}

/// Smallest `k >= 0` with `q^k >= value`; exact integer arithmetic.
pub fn ceil_log(q: u32, value: u64) -> u32 {
    debug_assert!(q >= 2);
    let mut k = 0u32;
    let mut pow: u64 = 1;
    while pow < value {
        pow = pow.saturating_mul(q as u64);
        k += 1;
    }
    k
}
