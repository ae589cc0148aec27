//! Level partitions of the coordinate set `{0, ..., N-1}`.
//!
//! A partition into `D` disjoint, covering, nonempty index sets underpins the
//! sparsity-in-levels and sparse-and-distributed signal models, the banded
//! and piecewise-constant profile families, and the level-wise bound factors.
//! Indices are zero-based throughout; the JSON form is a bare array of index
//! arrays.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct LevelPartition {
    n: usize,
    levels: Vec<Vec<usize>>,
}

impl LevelPartition {
    /// Build a partition from explicit level index sets, validating that the
    /// levels are nonempty, disjoint, and cover `{0, ..., n-1}`.
    pub fn new(n: usize, levels: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("partition: N must be >= 1".into()));
        }
        if levels.is_empty() {
            return Err(Error::Config("partition: at least one level required".into()));
        }
        let mut seen = vec![false; n];
        let mut sorted_levels = Vec::with_capacity(levels.len());
        for (d, level) in levels.into_iter().enumerate() {
            if level.is_empty() {
                return Err(Error::Config(format!("partition: level {d} is empty")));
            }
            let mut lv = level;
            lv.sort_unstable();
            for &i in &lv {
                if i >= n {
                    return Err(Error::Config(format!(
                        "partition: index {i} out of range for N={n}"
                    )));
                }
                if seen[i] {
                    return Err(Error::Config(format!(
                        "partition: index {i} appears in more than one level"
                    )));
                }
                seen[i] = true;
            }
            sorted_levels.push(lv);
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::Config(format!(
                "partition: index {missing} not covered by any level"
            )));
        }
        Ok(Self {
            n,
            levels: sorted_levels,
        })
    }

    /// Split `{0, ..., n-1}` into `d` contiguous blocks of near-equal size.
    pub fn contiguous(n: usize, d: usize) -> Result<Self> {
        if d == 0 || d > n {
            return Err(Error::Config(format!(
                "partition: cannot split N={n} into D={d} nonempty levels"
            )));
        }
        let levels = (0..d)
            .map(|k| ((k * n) / d..((k + 1) * n) / d).collect())
            .collect();
        Self::new(n, levels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of levels `D`.
    pub fn d(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn level(&self, d: usize) -> &[usize] {
        &self.levels[d]
    }

    /// Map each index to the level containing it.
    pub fn level_of(&self) -> Vec<usize> {
        let mut map = vec![0usize; self.n];
        for (d, level) in self.levels.iter().enumerate() {
            for &i in level {
                map[i] = d;
            }
        }
        map
    }
}

impl TryFrom<Vec<Vec<usize>>> for LevelPartition {
    type Error = Error;

    fn try_from(levels: Vec<Vec<usize>>) -> Result<Self> {
        let n = levels.iter().map(|l| l.len()).sum();
        LevelPartition::new(n, levels)
    }
}

impl From<LevelPartition> for Vec<Vec<usize>> {
    fn from(p: LevelPartition) -> Self {
        p.levels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguous_covers_everything() {
        let p = LevelPartition::contiguous(10, 3).unwrap();
        assert_eq!(p.d(), 3);
        assert_eq!(p.levels()[0], vec![0, 1, 2]);
        assert_eq!(p.levels()[1], vec![3, 4, 5]);
        assert_eq!(p.levels()[2], vec![6, 7, 8, 9]);
        let lof = p.level_of();
        assert_eq!(lof[0], 0);
        assert_eq!(lof[9], 2);
    }

    #[test]
    fn rejects_bad_partitions() {
        assert!(LevelPartition::new(4, vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(LevelPartition::new(4, vec![vec![0, 1], vec![2]]).is_err());
        assert!(LevelPartition::new(4, vec![vec![0, 1, 2, 3], vec![]]).is_err());
        assert!(LevelPartition::new(4, vec![vec![0, 1, 2, 4]]).is_err());
        assert!(LevelPartition::contiguous(4, 5).is_err());
        assert!(LevelPartition::contiguous(4, 0).is_err());
    }

    #[test]
    fn json_round_trip_is_bare_arrays() {
        let p = LevelPartition::new(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[0,2],[1,3]]");
        let q: LevelPartition = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
