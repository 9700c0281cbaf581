use serde::{Deserialize, Serialize};

use super::ModelSpec;
use crate::error::{Error, Result};

/// Direct dependence `i ≼ j` (A_ij positive) and its reflexive-transitive
/// closure `i ⊴ j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepGraph {
    d: usize,
    direct: Vec<bool>,
    reach: Vec<bool>,
}

impl DepGraph {
    /// Builds from a row-major upper-triangular pattern. The diagonal is
    /// always treated as positive.
    pub fn from_pattern(d: usize, pattern: &[bool]) -> Result<Self> {
        if pattern.len() != d * d {
            return Err(Error::InvalidInput(format!("pattern must have {} entries", d * d)));
        }
        let mut direct = pattern.to_vec();
        for i in 0..d {
            direct[i * d + i] = true;
            if (0..i).any(|j| direct[i * d + j]) {
                return Err(Error::InvalidInput(format!(
                    "row {} has a nonzero below the diagonal",
                    i + 1
                )));
            }
        }
        // Rows are closed from the bottom up: reach(i) = {i} ∪ reach(j) for i ≺ j.
        let mut reach = vec![false; d * d];
        for i in (0..d).rev() {
            reach[i * d + i] = true;
            for j in i + 1..d {
                if direct[i * d + j] {
                    for k in j..d {
                        if reach[j * d + k] {
                            reach[i * d + k] = true;
                        }
                    }
                }
            }
        }
        Ok(Self { d, direct, reach })
    }

    /// Uses the upper triangle of the model's positivity pattern.
    pub fn build(spec: &ModelSpec) -> Self {
        let d = spec.dim();
        let mut pattern = spec.pattern();
        for i in 0..d {
            for j in 0..i {
                pattern[i * d + j] = false;
            }
        }
        Self::from_pattern(d, &pattern).expect("upper triangle is always a valid pattern")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn direct(&self, i: usize, j: usize) -> bool {
        self.direct[i * self.d + j]
    }

    pub fn reach(&self, i: usize, j: usize) -> bool {
        self.reach[i * self.d + j]
    }

    /// Coordinates `j` with `i ⊴ j`, ascending.
    pub fn reach_set(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (i..self.d).filter(move |&j| self.reach(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Five-coordinate pattern, 0-based: (0,1), (0,4), (1,3), (2,4).
    fn example_pattern() -> Vec<bool> {
        let d = 5;
        let mut p = vec![false; d * d];
        for (i, j) in [(0, 1), (0, 4), (1, 3), (2, 4)] {
            p[i * d + j] = true;
        }
        p
    }

    #[test]
    fn example_indirect_dependence() {
        let g = DepGraph::from_pattern(5, &example_pattern()).unwrap();
        assert!(g.reach(0, 3));
        assert!(!g.direct(0, 3));
        assert!(g.reach(0, 4) && g.reach(2, 4));
        assert!(!g.reach(0, 2));
        assert!(!g.reach(1, 4));
        for i in 0..5 {
            assert!(g.reach(i, i));
        }
        assert_eq!(g.reach_set(0).collect::<Vec<_>>(), vec![0, 1, 3, 4]);
    }

    #[test]
    fn rejects_lower_entries() {
        let mut p = vec![false; 4];
        p[2] = true;
        assert!(DepGraph::from_pattern(2, &p).is_err());
        assert!(DepGraph::from_pattern(2, &[true]).is_err());
    }

    /// Exhaustive ≼-path search: the oracle for `reach`.
    fn reach_by_paths(d: usize, pattern: &[bool], i: usize, j: usize) -> bool {
        fn go(d: usize, p: &[bool], at: usize, target: usize, len: usize) -> bool {
            if at == target {
                return true;
            }
            if len == 0 {
                return false;
            }
            (0..d).any(|k| k != at && p[at * d + k] && go(d, p, k, target, len - 1))
        }
        go(d, pattern, i, j, d)
    }

    #[test]
    fn random_patterns_match_path_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            let d = 6;
            let mut p = vec![false; d * d];
            for i in 0..d {
                for j in i + 1..d {
                    p[i * d + j] = rng.random_bool(0.3);
                }
            }
            let g = DepGraph::from_pattern(d, &p).unwrap();
            for i in 0..d {
                for j in 0..d {
                    assert_eq!(g.reach(i, j), reach_by_paths(d, &p, i, j), "{i} {j} {p:?}");
                    if g.direct(i, j) {
                        assert!(g.reach(i, j));
                    }
                    if g.reach(i, j) {
                        assert!(i <= j);
                        for k in 0..d {
                            if g.reach(j, k) {
                                assert!(g.reach(i, k));
                            }
                        }
                    }
                }
            }
        }
    }
}
