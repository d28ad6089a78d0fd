//! Exact positive-semidefiniteness test by pivoted `LDLᵀ`.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::gram::GramRational;

/// `P G Pᵀ = L D Lᵀ` with `perm[i]` the original index placed at position `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdltFactors {
    pub perm: Vec<usize>,
    /// Unit lower-triangular, row-major.
    pub l: Vec<Vec<BigRational>>,
    pub d: Vec<BigRational>,
}

impl LdltFactors {
    pub fn rank(&self) -> usize {
        self.d.iter().filter(|x| !x.is_zero()).count()
    }

    /// Column `j` of `L` mapped back to original coordinates.
    pub fn column_in_original_order(&self, j: usize) -> Vec<BigRational> {
        let n = self.perm.len();
        let mut out = vec![BigRational::zero(); n];
        for i in 0..n {
            out[self.perm[i]] = self.l[i][j].clone();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsdCheck {
    Psd(LdltFactors),
    /// `witnessᵀ G witness = value < 0`.
    NotPsd { witness: Vec<BigRational>, value: BigRational },
}

impl PsdCheck {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdCheck::Psd(_))
    }

    pub fn factors(&self) -> Option<&LdltFactors> {
        match self {
            PsdCheck::Psd(f) => Some(f),
            PsdCheck::NotPsd { .. } => None,
        }
    }
}

/// `yᵀ M y` for a dense symmetric matrix.
pub fn quadratic_form(m: &[Vec<BigRational>], y: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (i, yi) in y.iter().enumerate() {
        if yi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            if !yj.is_zero() && !m[i][j].is_zero() {
                acc += yi * &m[i][j] * yj;
            }
        }
    }
    acc
}

fn dense(g: &GramRational) -> Vec<Vec<BigRational>> {
    let n = g.dim();
    (0..n).map(|i| (0..n).map(|j| g.get(i, j).clone()).collect()).collect()
}

/// Decides `G ⪰ 0` exactly.
///
/// Pivots on the largest remaining diagonal. A negative pivot, or a zero
/// maximal diagonal beside a nonzero off-diagonal entry, proves `G` indefinite
/// and yields a rational witness.
pub fn exact_psd_check(g: &GramRational) -> PsdCheck {
    exact_psd_check_dense(&dense(g))
}

/// [`exact_psd_check`] on a dense symmetric matrix.
pub fn exact_psd_check_dense(g: &[Vec<BigRational>]) -> PsdCheck {
    let n = g.len();
    let mut a: Vec<Vec<BigRational>> = g.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = vec![vec![BigRational::zero(); n]; n];
    let mut d = vec![BigRational::zero(); n];

    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i][i] > a[p][p] {
                p = i;
            }
        }
        if p != k {
            a.swap(k, p);
            for row in a.iter_mut() {
                row.swap(k, p);
            }
            l.swap(k, p);
            for row in l.iter_mut() {
                row.swap(k, p);
            }
            perm.swap(k, p);
        }
        let pivot = a[k][k].clone();
        if pivot.is_negative() {
            let mut z = vec![BigRational::zero(); n - k];
            z[0] = BigRational::one();
            return witness(g, &l, &perm, k, z);
        }
        if pivot.is_zero() {
            for i in k..n {
                if a[i][i].is_negative() {
                    let mut z = vec![BigRational::zero(); n - k];
                    z[i - k] = BigRational::one();
                    return witness(g, &l, &perm, k, z);
                }
            }
            // every remaining diagonal is zero: any nonzero entry left is fatal
            for i in k..n {
                for j in i + 1..n {
                    if !a[i][j].is_zero() {
                        let mut z = vec![BigRational::zero(); n - k];
                        z[i - k] = BigRational::one();
                        z[j - k] = if a[i][j].is_positive() { -BigRational::one() } else { BigRational::one() };
                        return witness(g, &l, &perm, k, z);
                    }
                }
            }
            for i in k..n {
                l[i][i] = BigRational::one();
            }
            return PsdCheck::Psd(LdltFactors { perm, l, d });
        }
        l[k][k] = BigRational::one();
        let inv = BigRational::one() / &pivot;
        for i in k + 1..n {
            l[i][k] = &a[i][k] * &inv;
        }
        for i in k + 1..n {
            if l[i][k].is_zero() {
                continue;
            }
            for j in i..n {
                if a[k][j].is_zero() {
                    continue;
                }
                let delta = &l[i][k] * &a[k][j];
                a[i][j] -= &delta;
                if i != j {
                    a[j][i] = a[i][j].clone();
                }
            }
        }
        for i in k + 1..n {
            a[i][k] = BigRational::zero();
            a[k][i] = BigRational::zero();
        }
        d[k] = pivot;
    }
    PsdCheck::Psd(LdltFactors { perm, l, d })
}

/// Lifts a Schur-complement direction `z` at step `k` to original coordinates.
fn witness(g: &[Vec<BigRational>], l: &[Vec<BigRational>], perm: &[usize], k: usize, z: Vec<BigRational>) -> PsdCheck {
    let n = perm.len();
    // solve L11ᵀ y1 = −L21ᵀ z
    let mut y1 = vec![BigRational::zero(); k];
    for c in (0..k).rev() {
        let mut acc = BigRational::zero();
        for (r, zr) in z.iter().enumerate() {
            if !zr.is_zero() {
                acc -= &l[k + r][c] * zr;
            }
        }
        for r in c + 1..k {
            if !y1[r].is_zero() {
                acc -= &l[r][c] * &y1[r];
            }
        }
        y1[c] = acc;
    }
    let mut y = vec![BigRational::zero(); n];
    for i in 0..k {
        y[perm[i]] = y1[i].clone();
    }
    for (r, zr) in z.into_iter().enumerate() {
        y[perm[k + r]] = zr;
    }
    let value = quadratic_form(g, &y);
    debug_assert!(value.is_negative(), "witness must certify indefiniteness");
    PsdCheck::NotPsd { witness: y, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{GramRational, MonomialBasis};
    use crate::poly::{int, Monomial};

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    fn reconstruct(f: &LdltFactors) -> Vec<Vec<BigRational>> {
        let n = f.perm.len();
        let mut out = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigRational::zero();
                for k in 0..n {
                    acc += &f.l[i][k] * &f.d[k] * &f.l[j][k];
                }
                out[f.perm[i]][f.perm[j]] = acc;
            }
        }
        out
    }

    #[test]
    fn worked_example_gram_is_psd_with_rank_two() {
        let g = mat(&[&[2, -3, 1], &[-3, 5, 0], &[1, 0, 5]]);
        let PsdCheck::Psd(f) = exact_psd_check_dense(&g) else { panic!("expected PSD") };
        assert_eq!(f.rank(), 2);
        assert!(f.d.iter().any(|x| x.is_zero()));
        assert_eq!(reconstruct(&f), g);
    }

    #[test]
    fn swap_matrix_is_indefinite() {
        let r = exact_psd_check_dense(&mat(&[&[0, 1], &[1, 0]]));
        assert_eq!(r, PsdCheck::NotPsd { witness: vec![int(1), int(-1)], value: int(-2) });
    }

    #[test]
    fn negative_pivot_witness_after_elimination() {
        let g = mat(&[&[4, 2, 0], &[2, 1, 3], &[0, 3, 1]]);
        let PsdCheck::NotPsd { witness, value } = exact_psd_check_dense(&g) else { panic!("expected indefinite") };
        assert!(value < BigRational::zero());
        assert_eq!(quadratic_form(&g, &witness), value);
    }

    #[test]
    fn gram_wrapper() {
        let b = MonomialBasis::new(1, vec![Monomial::var(1, 0)]).unwrap();
        let g = GramRational::from_rows(b, &[vec![int(4)]]);
        assert!(exact_psd_check(&g).is_psd());
    }
}
