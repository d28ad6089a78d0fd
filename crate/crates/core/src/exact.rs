//! Small exact linear-algebra kernels over `BigRational`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::Zero;

/// Sparse row: column index to nonzero value.
pub type SparseRow = BTreeMap<usize, BigRational>;

/// Incremental row echelon form used to detect linear dependence.
#[derive(Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, (SparseRow, BigRational)>,
}

/// Outcome of inserting a row into an [`Echelon`].
#[derive(Debug, PartialEq, Eq)]
pub enum Insert {
    Independent,
    /// The row is a combination of earlier rows and so is its right-hand side.
    Redundant,
    /// The row is a combination of earlier rows but its right-hand side is not.
    Inconsistent,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn insert(&mut self, row: &SparseRow, rhs: &BigRational) -> Insert {
        let mut row: SparseRow = row.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (*k, v.clone())).collect();
        let mut rhs = rhs.clone();
        let mut floor = 0usize;
        loop {
            let next = row.range(floor..).map(|(k, _)| *k).find(|k| self.pivots.contains_key(k));
            let Some(col) = next else { break };
            let (prow, prhs) = &self.pivots[&col];
            let factor = &row[&col] / &prow[&col];
            for (k, v) in prow {
                let e = row.entry(*k).or_insert_with(BigRational::zero);
                *e -= &factor * v;
                if e.is_zero() {
                    row.remove(k);
                }
            }
            rhs -= &factor * prhs;
            floor = col + 1;
        }
        match row.keys().next().copied() {
            Some(lead) => {
                self.pivots.insert(lead, (row, rhs));
                Insert::Independent
            }
            None if rhs.is_zero() => Insert::Redundant,
            None => Insert::Inconsistent,
        }
    }
}

/// Solves the square system `m x = rhs`; `None` when singular.
pub fn solve(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = BigRational::from_integer(1.into()) / &m[col][col];
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            for c in col..n {
                if m[col][c].is_zero() {
                    continue;
                }
                let delta = &factor * &m[col][c];
                m[r][c] -= delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] -= delta;
        }
    }
    let mut x = alloc::vec![BigRational::zero(); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r].clone();
        for c in r + 1..n {
            if !m[r][c].is_zero() {
                acc -= &m[r][c] * &x[c];
            }
        }
        x[r] = acc / &m[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int;
    use alloc::vec;

    #[test]
    fn solve_small_system() {
        let m = vec![vec![int(0), int(2)], vec![int(3), int(1)]];
        let x = solve(m, vec![int(4), int(5)]).unwrap();
        assert_eq!(x, vec![int(1), int(2)]);
        assert!(solve(vec![vec![int(1), int(2)], vec![int(2), int(4)]], vec![int(1), int(2)]).is_none());
    }

    #[test]
    fn echelon_detects_dependence() {
        let row = |v: &[(usize, i64)]| v.iter().map(|&(k, x)| (k, int(x))).collect::<SparseRow>();
        let mut e = Echelon::new();
        assert_eq!(e.insert(&row(&[(0, 1), (1, 1)]), &int(2)), Insert::Independent);
        assert_eq!(e.insert(&row(&[(1, 1), (2, 1)]), &int(3)), Insert::Independent);
        assert_eq!(e.insert(&row(&[(0, 1), (2, -1)]), &int(-1)), Insert::Redundant);
        assert_eq!(e.insert(&row(&[(0, 2), (1, 2)]), &int(5)), Insert::Inconsistent);
        assert_eq!(e.rank(), 2);
    }
}
