//! Ranking of nondecreasing multi-indices.
//!
//! Degree-`n` symmetric tensors over `dim` coordinates store one coefficient
//! per nondecreasing tuple `k_1 <= ... <= k_n`, ordered lexicographically.
//! There are `C(dim + n - 1, n)` such tuples.

use crate::error::{Error, Result};
use crate::numerics::binomial;

/// Upper bound on stored coefficients per tensor.
pub const MAX_ENTRIES: u128 = 1 << 28;

/// Number of nondecreasing `degree`-tuples over `dim` values.
pub fn space_len(degree: usize, dim: usize) -> Result<usize> {
    if degree == 0 {
        return Ok(1);
    }
    if dim == 0 {
        return Ok(0);
    }
    let len = binomial((dim + degree - 1) as u64, degree as u64)
        .filter(|&l| l <= MAX_ENTRIES)
        .ok_or(Error::TooLarge { degree, dim })?;
    Ok(len as usize)
}

/// Rank tables for one `(degree, dim)` pair.
#[derive(Debug, Clone)]
pub struct MultiIndexSpace {
    degree: usize,
    dim: usize,
    len: usize,
    // prefix[r][v]: number of nondecreasing r-tuples whose values lie in
    // [u, dim) for some u < v, summed over u.
    prefix: Vec<Vec<usize>>,
}

impl MultiIndexSpace {
    pub fn new(degree: usize, dim: usize) -> Result<Self> {
        let len = space_len(degree, dim)?;
        let mut prefix = Vec::with_capacity(degree);
        for r in 0..degree {
            let mut row = Vec::with_capacity(dim + 1);
            let mut acc = 0usize;
            row.push(0);
            for u in 0..dim {
                // tuples of length r with values in [u, dim)
                let cnt = binomial((dim - u + r - 1) as u64, r as u64)
                    .ok_or(Error::TooLarge { degree, dim })? as usize;
                acc += cnt;
                row.push(acc);
            }
            prefix.push(row);
        }
        Ok(Self {
            degree,
            dim,
            len,
            prefix,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Rank of a sorted tuple.
    #[inline]
    pub fn rank_sorted(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.degree);
        debug_assert!(idx.windows(2).all(|w| w[0] <= w[1]));
        let n = self.degree;
        let mut rank = 0;
        let mut prev = 0;
        for (i, &v) in idx.iter().enumerate() {
            let row = &self.prefix[n - i - 1];
            rank += row[v] - row[prev];
            prev = v;
        }
        rank
    }

    /// Rank of an arbitrary tuple (sorted internally).
    pub fn rank(&self, idx: &[usize]) -> usize {
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        self.rank_sorted(&sorted)
    }

    /// All sorted tuples in rank order.
    pub fn iter(&self) -> MultiIndexIter {
        MultiIndexIter::new(self.degree, self.dim)
    }

    /// Tuple with the given rank.
    pub fn unrank(&self, mut rank: usize) -> Vec<usize> {
        let n = self.degree;
        let mut out = Vec::with_capacity(n);
        let mut prev = 0;
        for i in 0..n {
            let row = &self.prefix[n - i - 1];
            let mut v = prev;
            while row[v + 1] - row[prev] <= rank {
                v += 1;
            }
            rank -= row[v] - row[prev];
            out.push(v);
            prev = v;
        }
        out
    }
}

/// Lexicographic walk over nondecreasing tuples.
#[derive(Debug, Clone)]
pub struct MultiIndexIter {
    current: Vec<usize>,
    dim: usize,
    done: bool,
}

impl MultiIndexIter {
    pub fn new(degree: usize, dim: usize) -> Self {
        Self {
            current: vec![0; degree],
            dim,
            done: dim == 0 && degree > 0,
        }
    }

    /// Walk only tuples whose first entry equals `first`.
    pub fn starting_at(
        degree: usize,
        dim: usize,
        first: usize,
    ) -> impl Iterator<Item = Vec<usize>> {
        let mut it = Self {
            current: vec![first; degree],
            dim,
            done: first >= dim,
        };
        std::iter::from_fn(move || it.next()).take_while(move |t| t[0] == first)
    }
}

impl Iterator for MultiIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        match self.current.iter().rposition(|&v| v + 1 < self.dim) {
            Some(i) => {
                let v = self.current[i] + 1;
                for slot in &mut self.current[i..] {
                    *slot = v;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}

/// Number of distinct arrangements of a sorted tuple, `n! / Π c_v!`.
pub fn multiplicity(sorted: &[usize]) -> f64 {
    let mut mult = 1.0;
    let mut placed = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let run = j - i;
        // choose positions for this run among placed + run
        for r in 1..=run {
            mult *= (placed + r) as f64 / r as f64;
        }
        placed += run;
        i = j;
    }
    mult.round()
}

/// Insert `v` into a sorted tuple, keeping it sorted.
pub fn insert_sorted(sorted: &[usize], v: usize, out: &mut Vec<usize>) {
    out.clear();
    let pos = sorted.partition_point(|&x| x <= v);
    out.extend_from_slice(&sorted[..pos]);
    out.push(v);
    out.extend_from_slice(&sorted[pos..]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_matches_iteration_order() {
        for degree in 0..5 {
            for dim in 1..6 {
                let space = MultiIndexSpace::new(degree, dim).unwrap();
                let all: Vec<_> = space.iter().collect();
                assert_eq!(all.len(), space.len());
                for (r, t) in all.iter().enumerate() {
                    assert_eq!(space.rank_sorted(t), r);
                    assert_eq!(&space.unrank(r), t);
                }
            }
        }
    }

    #[test]
    fn starting_at_walks_one_block() {
        let block: Vec<_> = MultiIndexIter::starting_at(3, 4, 2).collect();
        assert_eq!(block, vec![vec![2, 2, 2], vec![2, 2, 3], vec![2, 3, 3]]);
    }

    #[test]
    fn multiplicities() {
        assert_eq!(multiplicity(&[]), 1.0);
        assert_eq!(multiplicity(&[0, 0]), 1.0);
        assert_eq!(multiplicity(&[0, 1]), 2.0);
        assert_eq!(multiplicity(&[0, 0, 1]), 3.0);
        assert_eq!(multiplicity(&[0, 1, 2, 3]), 24.0);
        assert_eq!(multiplicity(&[1, 1, 2, 2]), 6.0);
    }

    #[test]
    fn oversized_spaces_are_rejected() {
        assert!(matches!(
            space_len(20, 100_000),
            Err(Error::TooLarge { .. })
        ));
    }
}
