//! Working-precision pivoted factorization of numerical Gram matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::bigfloat::BigFloat;
use crate::gram::GramNumeric;

/// Truncated `P G Pᵀ ≈ L D Lᵀ` keeping `rank` pivots.
#[derive(Clone, Debug)]
pub struct FloatLdlt {
    /// `perm[i]` is the original index at position `i`.
    pub perm: Vec<usize>,
    /// `m × rank`, rows in permuted order, unit diagonal.
    pub l: Vec<Vec<BigFloat>>,
    pub d: Vec<BigFloat>,
}

impl FloatLdlt {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    /// Column `j` of `L` in original coordinates.
    pub fn column(&self, j: usize) -> Vec<BigFloat> {
        let mut out = vec![BigFloat::zero(); self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = self.l[i][j].clone();
        }
        out
    }
}

/// Largest-diagonal pivoting; stops once the next pivot is at most
/// `eps · first pivot` (or nonpositive).
pub fn pivoted_ldlt(g: &GramNumeric, eps: f64) -> FloatLdlt {
    let m = g.dim();
    let prec = g.precision.min(u32::MAX - 64);
    let mut a: Vec<Vec<BigFloat>> = (0..m).map(|i| (0..m).map(|j| g.get(i, j).clone()).collect()).collect();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut l: Vec<Vec<BigFloat>> = vec![Vec::new(); m];
    let mut d = Vec::new();
    let mut threshold: Option<BigFloat> = None;
    for k in 0..m {
        let p = (k..m).max_by(|&x, &y| a[x][x].cmp(&a[y][y]).then(y.cmp(&x))).expect("nonempty range");
        let pivot = a[p][p].clone();
        if pivot.signum() <= 0 {
            break;
        }
        let limit = threshold.get_or_insert_with(|| pivot.mul(&BigFloat::from_f64(eps), prec)).clone();
        if pivot <= limit {
            break;
        }
        a.swap(k, p);
        for row in a.iter_mut() {
            row.swap(k, p);
        }
        perm.swap(k, p);
        l.swap(k, p);
        let mut col = vec![BigFloat::zero(); m];
        col[k] = BigFloat::one();
        for i in k + 1..m {
            col[i] = a[i][k].div(&pivot, prec);
        }
        for i in k + 1..m {
            if col[i].is_zero() {
                continue;
            }
            for j in k + 1..=i {
                if a[k][j].is_zero() {
                    continue;
                }
                let v = a[i][j].sub(&col[i].mul(&a[k][j], prec), prec);
                a[i][j] = v.clone();
                a[j][i] = v;
            }
        }
        for (i, row) in l.iter_mut().enumerate() {
            row.push(col[i].clone());
        }
        d.push(pivot);
    }
    FloatLdlt { perm, l, d }
}

/// Count of pivots above `eps` times the largest.
pub fn numerical_rank(g: &GramNumeric, eps: f64) -> usize {
    pivoted_ldlt(g, eps).rank()
}

/// Indices of rows whose largest entry magnitude reaches `eps`.
pub fn significant_rows(g: &GramNumeric, eps: f64) -> Vec<usize> {
    let limit = BigFloat::from_f64(eps);
    (0..g.dim()).filter(|&i| (0..g.dim()).any(|j| g.get(i, j).abs() >= limit)).collect()
}
