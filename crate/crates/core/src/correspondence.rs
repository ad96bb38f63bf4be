//! Correspondences between two finite point sets and an enumerator of the
//! minimal ones.
//!
//! A correspondence is minimal when no pair can be removed without losing a
//! full projection, which happens exactly when every pair has an endpoint of
//! degree one. Such a relation is a disjoint union of stars, so it is fixed by
//! the image set `S_x` of each left point: either a single right point (a
//! leaf, which may share its target with other leaves) or at least two right
//! points that no other left point touches (a star centre).
//!
//! Correspondences are ordered lexicographically by their sorted pair lists.
//! The enumerator emits in exactly that order.

use alloc::vec::Vec;

use crate::space::FiniteMetricSpace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorrespondenceError {
    #[error("pair ({0}, {1}) is out of range")]
    OutOfRange(usize, usize),
    #[error("left point {0} has no partner")]
    LeftUncovered(usize),
    #[error("right point {0} has no partner")]
    RightUncovered(usize),
}

/// A relation between `[n1]` and `[n2]` with both projections onto.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Correspondence {
    pairs: Vec<(usize, usize)>,
    n1: usize,
    n2: usize,
}

impl Correspondence {
    /// Sorts and deduplicates `pairs`, then checks both projections.
    pub fn new(n1: usize, n2: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self, CorrespondenceError> {
        pairs.sort_unstable();
        pairs.dedup();
        let mut left = alloc::vec![false; n1];
        let mut right = alloc::vec![false; n2];
        for &(a, b) in &pairs {
            if a >= n1 || b >= n2 {
                return Err(CorrespondenceError::OutOfRange(a, b));
            }
            left[a] = true;
            right[b] = true;
        }
        if let Some(a) = left.iter().position(|c| !c) {
            return Err(CorrespondenceError::LeftUncovered(a));
        }
        if let Some(b) = right.iter().position(|c| !c) {
            return Err(CorrespondenceError::RightUncovered(b));
        }
        Ok(Correspondence { pairs, n1, n2 })
    }

    /// Caller guarantees sorted, deduplicated, covering pairs.
    pub(crate) fn from_sorted_unchecked(n1: usize, n2: usize, pairs: Vec<(usize, usize)>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0] < w[1]));
        Correspondence { pairs, n1, n2 }
    }

    pub fn identity(n: usize) -> Self {
        Correspondence { pairs: (0..n).map(|i| (i, i)).collect(), n1: n, n2: n }
    }

    /// All of `[n1] x [n2]`.
    pub fn full(n1: usize, n2: usize) -> Self {
        let pairs = (0..n1).flat_map(|a| (0..n2).map(move |b| (a, b))).collect();
        Correspondence { pairs, n1, n2 }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }

    pub fn transpose(&self) -> Self {
        let mut pairs: Vec<_> = self.pairs.iter().map(|&(a, b)| (b, a)).collect();
        pairs.sort_unstable();
        Correspondence { pairs, n1: self.n2, n2: self.n1 }
    }

    /// `self` with the extra pairs added.
    pub fn with_pairs(&self, extra: &[(usize, usize)]) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.extend_from_slice(extra);
        pairs.sort_unstable();
        pairs.dedup();
        Correspondence { pairs, n1: self.n1, n2: self.n2 }
    }

    /// Left and right degrees.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut dl = alloc::vec![0; self.n1];
        let mut dr = alloc::vec![0; self.n2];
        for &(a, b) in &self.pairs {
            dl[a] += 1;
            dr[b] += 1;
        }
        (dl, dr)
    }

    /// No pair can be dropped without losing a full projection.
    pub fn is_minimal(&self) -> bool {
        let (dl, dr) = self.degrees();
        self.pairs.iter().all(|&(a, b)| dl[a] == 1 || dr[b] == 1)
    }

    /// Whether the pair at `pairs()[k]` can be dropped.
    pub fn is_removable(&self, k: usize) -> bool {
        let (a, b) = self.pairs[k];
        let left = self.pairs.iter().filter(|p| p.0 == a).count();
        let right = self.pairs.iter().filter(|p| p.1 == b).count();
        left > 1 && right > 1
    }
}

/// `max over (a, b), (a', b') in R of |d1(a, a') - d2(b, b')|`
pub fn distortion(r: &Correspondence, x1: &FiniteMetricSpace, x2: &FiniteMetricSpace) -> f64 {
    pairs_distortion(r.pairs(), x1, x2)
}

pub(crate) fn pairs_distortion(pairs: &[(usize, usize)], x1: &FiniteMetricSpace, x2: &FiniteMetricSpace) -> f64 {
    let mut worst = 0.0f64;
    for (k, &(a, b)) in pairs.iter().enumerate() {
        for &(a2, b2) in &pairs[k + 1..] {
            worst = worst.max((x1.dist(a, a2) - x2.dist(b, b2)).abs());
        }
    }
    worst
}

/// Largest right-side size the enumerator handles (subsets are bitmasks).
pub const MAX_ENUMERATED_SIDE: usize = 64;

#[inline]
fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// The subset after `s` in the enumeration order of right-point sets: sets
/// are compared by their sorted element lists with end-of-list ranking above
/// every element, so each set is preceded by all of its extensions.
#[inline]
fn next_subset(s: u64, n: usize) -> u64 {
    let l = 63 - s.leading_zeros() as usize;
    let q = s & !(1u64 << l);
    if l + 1 < n {
        q | (low_mask(n) & !low_mask(l + 1))
    } else {
        q
    }
}

/// Depth-first walker over minimal correspondences of `[n1] x [n2]`,
/// yielding a borrowed pair list per step.
pub struct MinimalWalker {
    n1: usize,
    n2: usize,
    all: u64,
    choice: Vec<u64>,
    depth: usize,
    used: u64,
    exclusive: u64,
    degree: Vec<u32>,
    pairs: Vec<(usize, usize)>,
    started: bool,
    done: bool,
    supported: bool,
}

impl MinimalWalker {
    pub fn new(n1: usize, n2: usize) -> Self {
        let supported = n1 >= 1 && n2 >= 1 && n2 <= MAX_ENUMERATED_SIDE;
        MinimalWalker {
            n1,
            n2,
            all: low_mask(n2),
            choice: alloc::vec![0; n1],
            depth: 0,
            used: 0,
            exclusive: 0,
            degree: alloc::vec![0; n2],
            pairs: Vec::with_capacity(n1 + n2),
            started: false,
            done: !supported,
            supported,
        }
    }

    /// False when the sizes are outside what the walker can enumerate.
    pub fn is_supported(&self) -> bool {
        self.supported
    }

    fn admissible(&self, s: u64) -> bool {
        if s.count_ones() >= 2 {
            s & self.used == 0
        } else {
            s & self.exclusive == 0
        }
    }

    fn apply(&mut self, s: u64) {
        if s.count_ones() >= 2 {
            self.used |= s;
            self.exclusive |= s;
        } else {
            let y = s.trailing_zeros() as usize;
            self.degree[y] += 1;
            self.used |= s;
        }
    }

    fn undo(&mut self, s: u64) {
        if s.count_ones() >= 2 {
            self.used &= !s;
            self.exclusive &= !s;
        } else {
            let y = s.trailing_zeros() as usize;
            self.degree[y] -= 1;
            if self.degree[y] == 0 {
                self.used &= !s;
            }
        }
    }

    /// Moves `choice[depth]` to its next admissible subset, backtracking
    /// through exhausted levels. Returns false once everything is exhausted.
    fn advance_choice(&mut self) -> bool {
        loop {
            let cur = self.choice[self.depth];
            let mut s = if cur == 0 { self.all } else { next_subset(cur, self.n2) };
            while s != 0 && !self.admissible(s) {
                s = next_subset(s, self.n2);
            }
            if s != 0 {
                self.choice[self.depth] = s;
                self.apply(s);
                return true;
            }
            self.choice[self.depth] = 0;
            if self.depth == 0 {
                return false;
            }
            self.depth -= 1;
            let prev = self.choice[self.depth];
            self.undo(prev);
        }
    }

    /// Next minimal correspondence as a sorted pair list.
    pub fn advance(&mut self) -> Option<&[(usize, usize)]> {
        if self.done {
            return None;
        }
        if self.started {
            // Leave the previously emitted leaf.
            let s = self.choice[self.depth];
            self.undo(s);
        }
        self.started = true;
        loop {
            if !self.advance_choice() {
                self.done = true;
                return None;
            }
            if self.depth + 1 == self.n1 {
                if self.used == self.all {
                    self.fill_pairs();
                    return Some(&self.pairs);
                }
                let s = self.choice[self.depth];
                self.undo(s);
            } else {
                self.depth += 1;
            }
        }
    }

    fn fill_pairs(&mut self) {
        self.pairs.clear();
        for (x, &s) in self.choice.iter().enumerate() {
            let mut bits = s;
            while bits != 0 {
                let y = bits.trailing_zeros() as usize;
                self.pairs.push((x, y));
                bits &= bits - 1;
            }
        }
    }
}

/// Budgeted stream of minimal correspondences in lexicographic order.
pub struct MinimalCorrespondences {
    walker: MinimalWalker,
    budget: u64,
    emitted: u64,
    exhausted: bool,
}

/// Every minimal correspondence of `[n1] x [n2]` exactly once, stopping
/// after `budget` emissions.
pub fn minimal_correspondences(n1: usize, n2: usize, budget: u64) -> MinimalCorrespondences {
    let walker = MinimalWalker::new(n1, n2);
    let exhausted = !walker.is_supported() && n1 >= 1 && n2 >= 1;
    MinimalCorrespondences { walker, budget, emitted: 0, exhausted }
}

impl MinimalCorrespondences {
    /// True when emissions stopped because of the budget (or the sizes are
    /// beyond the enumerator) while correspondences remained.
    pub fn budget_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }
}

impl Iterator for MinimalCorrespondences {
    type Item = Correspondence;

    fn next(&mut self) -> Option<Correspondence> {
        if self.emitted >= self.budget {
            if !self.exhausted && self.walker.advance().is_some() {
                self.exhausted = true;
            }
            return None;
        }
        let (n1, n2) = (self.walker.n1, self.walker.n2);
        let pairs = self.walker.advance()?.to_vec();
        self.emitted += 1;
        Some(Correspondence::from_sorted_unchecked(n1, n2, pairs))
    }
}
