use crate::error::{Error, Result};

/// A sequential update schedule: a permutation of the coordinates.
///
/// `order[j]` is the coordinate updated at step `j` (both 0-based). The
/// inverse view, `step_of(i)`, tells at which step coordinate `i` fires.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    order: Vec<usize>,
    step_of: Vec<usize>,
}

impl Schedule {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n == 0 {
            return Err(Error::input("schedule must be nonempty"));
        }
        let mut step_of = vec![usize::MAX; n];
        for (step, &i) in order.iter().enumerate() {
            if i >= n {
                return Err(Error::input(format!(
                    "schedule names coordinate {} but has length {n}",
                    i + 1
                )));
            }
            if step_of[i] != usize::MAX {
                return Err(Error::input(format!(
                    "schedule updates coordinate {} twice",
                    i + 1
                )));
            }
            step_of[i] = step;
        }
        Ok(Schedule { order, step_of })
    }

    /// The canonical schedule `(1, 2, ..., n)`.
    pub fn canonical(n: usize) -> Self {
        Schedule {
            order: (0..n).collect(),
            step_of: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Coordinates in update order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Coordinate updated at `step`.
    pub fn at(&self, step: usize) -> usize {
        self.order[step]
    }

    /// Step at which coordinate `i` is updated.
    pub fn step_of(&self, i: usize) -> usize {
        self.step_of[i]
    }

    /// True iff `self` (over `m >= n` coordinates) updates the first `n`
    /// coordinates in the same relative order as `other`.
    pub fn respects(&self, other: &Schedule) -> bool {
        let n = other.len();
        if self.len() < n {
            return false;
        }
        let restricted: Vec<usize> = self.order.iter().copied().filter(|&i| i < n).collect();
        restricted == other.order
    }

    /// 1-based view for I/O.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.order.iter().map(|&i| i + 1).collect()
    }

    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        let shifted: Vec<usize> = order
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .ok_or_else(|| Error::input("schedule coordinates are 1-based"))
            })
            .collect::<Result<_>>()?;
        Schedule::new(shifted)
    }

    /// Lexicographically `rank`-th permutation of `[n]` (Lehmer unranking).
    pub fn unrank(n: usize, mut rank: u64) -> Self {
        let mut available: Vec<usize> = (0..n).collect();
        let mut fact: u64 = (1..=n as u64).product();
        let mut order = Vec::with_capacity(n);
        for left in (1..=n).rev() {
            fact /= left as u64;
            let idx = (rank / fact) as usize;
            rank %= fact;
            order.push(available.remove(idx));
        }
        Schedule::new(order).expect("unranked permutation is valid")
    }
}

/// An update word over the coordinates: repeats allowed, possibly empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UpdateWord {
    letters: Vec<usize>,
}

impl UpdateWord {
    pub fn new(letters: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l >= n) {
            return Err(Error::input(format!(
                "word letter {} out of range for n={n}",
                bad + 1
            )));
        }
        Ok(UpdateWord { letters })
    }

    pub fn empty() -> Self {
        UpdateWord { letters: Vec::new() }
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl From<&Schedule> for UpdateWord {
    fn from(s: &Schedule) -> Self {
        UpdateWord {
            letters: s.order().to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_permutations() {
        assert!(Schedule::new(vec![0, 0]).is_err());
        assert!(Schedule::new(vec![0, 2]).is_err());
        assert!(Schedule::new(vec![]).is_err());
        assert!(Schedule::new(vec![1, 0, 2]).is_ok());
    }

    #[test]
    fn step_of_inverts_order() {
        let s = Schedule::new(vec![2, 0, 1]).unwrap();
        assert_eq!(s.step_of(2), 0);
        assert_eq!(s.step_of(0), 1);
        assert_eq!(s.step_of(1), 2);
    }

    #[test]
    fn respects_self_and_inversions() {
        let u = Schedule::canonical(2);
        assert!(Schedule::new(vec![0, 1]).unwrap().respects(&u));
        assert!(!Schedule::new(vec![1, 0]).unwrap().respects(&u));
    }

    #[test]
    fn respects_example_orders() {
        // w = (7,8,9,1,...,6) respects u = (1,...,6); v = (7,1,4,2,5,3,6) does not.
        let u = Schedule::canonical(6);
        let w = Schedule::from_one_based(&[7, 8, 9, 1, 2, 3, 4, 5, 6]).unwrap();
        let v = Schedule::from_one_based(&[7, 1, 4, 2, 5, 3, 6]).unwrap();
        assert!(w.respects(&u));
        assert!(!v.respects(&u));
    }

    #[test]
    fn unrank_is_lexicographic() {
        let perms: Vec<Vec<usize>> = (0..6).map(|r| Schedule::unrank(3, r).order().to_vec()).collect();
        assert_eq!(
            perms,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0],
            ]
        );
    }
}
