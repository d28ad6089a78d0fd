use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{GramError, GramRational, MonomialBasis};
use crate::exact::{self, Echelon, Insert, SparseRow};
use crate::poly::{Monomial, Polynomial};
use crate::sym::{packed_index, SymMatrix};

/// Linear constraints `A y = b` on the packed upper triangle `y` of a symmetric
/// `dim × dim` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub dim: usize,
    /// `(i, j)` with `i <= j`, in packed order; unknown `k` is `unknowns[k]`.
    pub unknowns: Vec<(usize, usize)>,
    /// Sparse rows `(unknown index, coefficient)` sorted by unknown index.
    pub rows: Vec<Vec<(usize, BigRational)>>,
    pub rhs: Vec<BigRational>,
    pub target_monomials: Vec<Monomial>,
}

fn packed_unknowns(dim: usize) -> Vec<(usize, usize)> {
    (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect()
}

impl LinearSystem {
    pub fn new(
        dim: usize,
        rows: Vec<Vec<(usize, BigRational)>>,
        rhs: Vec<BigRational>,
        target_monomials: Vec<Monomial>,
    ) -> Self {
        assert_eq!(rows.len(), rhs.len());
        assert_eq!(rows.len(), target_monomials.len());
        LinearSystem { dim, unknowns: packed_unknowns(dim), rows, rhs, target_monomials }
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    /// Metric weight of unknown `k` in the Frobenius norm: 1 on the diagonal, 2 off it.
    pub fn weight(&self, k: usize) -> u32 {
        let (i, j) = self.unknowns[k];
        if i == j {
            1
        } else {
            2
        }
    }

    pub fn dense_row(&self, r: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.num_unknowns()];
        for (k, v) in &self.rows[r] {
            out[*k] = v.clone();
        }
        out
    }

    /// `A y − b`.
    pub fn residual(&self, y: &[BigRational]) -> Vec<BigRational> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                let mut acc = -b.clone();
                for (k, v) in row {
                    acc += v * &y[*k];
                }
                acc
            })
            .collect()
    }

    pub fn is_satisfied_by_packed(&self, y: &[BigRational]) -> bool {
        self.residual(y).iter().all(Zero::is_zero)
    }

    pub fn is_satisfied_by(&self, g: &GramRational) -> bool {
        g.dim() == self.dim && self.is_satisfied_by_packed(g.entries.packed())
    }

    /// Indices of a maximal independent subset of rows, chosen in first-seen order.
    pub fn independent_rows(&self) -> Result<Vec<usize>, GramError> {
        let mut ech = Echelon::new();
        let mut keep = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let sparse: SparseRow = row.iter().cloned().collect();
            match ech.insert(&sparse, &self.rhs[r]) {
                Insert::Independent => keep.push(r),
                Insert::Redundant => {}
                Insert::Inconsistent => return Err(GramError::Inconsistent(self.target_monomials[r].clone())),
            }
        }
        Ok(keep)
    }

    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new();
        for row in &self.rows {
            let sparse: SparseRow = row.iter().cloned().collect();
            ech.insert(&sparse, &BigRational::zero());
        }
        ech.rank()
    }
}

/// Coefficient-matching constraints between `f` and `v(x)ᵀ G v(x)` over `basis`.
///
/// One row per monomial of the union of `supp(f)` and all pairwise basis
/// products, in graded-lex order.
pub fn matching_system(f: &Polynomial, basis: &MonomialBasis) -> Result<LinearSystem, GramError> {
    if f.nvars() != basis.nvars() {
        return Err(GramError::NvarsMismatch(f.nvars(), basis.nvars()));
    }
    let m = basis.len();
    let two = BigRational::from_integer(2.into());
    let mut by_monomial: BTreeMap<Monomial, Vec<(usize, BigRational)>> = BTreeMap::new();
    for i in 0..m {
        for j in i..m {
            let coef = if i == j { BigRational::one() } else { two.clone() };
            by_monomial.entry(basis.get(i).mul(basis.get(j))).or_default().push((packed_index(m, i, j), coef));
        }
    }
    for (mono, _) in f.terms() {
        if !by_monomial.contains_key(mono) {
            return Err(GramError::Inexpressible(mono.clone()));
        }
    }
    let mut rows = Vec::with_capacity(by_monomial.len());
    let mut rhs = Vec::with_capacity(by_monomial.len());
    let mut targets = Vec::with_capacity(by_monomial.len());
    for (mono, mut row) in by_monomial {
        row.sort_by_key(|(k, _)| *k);
        rhs.push(f.coeff(&mono));
        targets.push(mono);
        rows.push(row);
    }
    Ok(LinearSystem::new(m, rows, rhs, targets))
}

/// Closest point (in the weighted metric of [`LinearSystem::weight`]) to `y0` on
/// `{y : A y = b}`, computed exactly.
pub fn project_coordinates(sys: &LinearSystem, y0: &[BigRational]) -> Result<Vec<BigRational>, GramError> {
    if y0.len() != sys.num_unknowns() {
        return Err(GramError::DimensionMismatch { expected: sys.num_unknowns(), found: y0.len() });
    }
    let keep = sys.independent_rows()?;
    let residual = sys.residual(y0);
    let err: Vec<BigRational> = keep.iter().map(|&r| residual[r].clone()).collect();
    if err.iter().all(Zero::is_zero) {
        return Ok(y0.to_vec());
    }
    // M = A W⁻¹ Aᵀ over the kept rows
    let k = keep.len();
    let mut by_col: BTreeMap<usize, Vec<(usize, &BigRational)>> = BTreeMap::new();
    for (pos, &r) in keep.iter().enumerate() {
        for (c, v) in &sys.rows[r] {
            by_col.entry(*c).or_default().push((pos, v));
        }
    }
    let mut m = vec![vec![BigRational::zero(); k]; k];
    for (c, entries) in &by_col {
        let w = BigRational::from_integer(sys.weight(*c).into());
        for (p, a) in entries {
            for (q, b) in entries {
                m[*p][*q] += (*a * *b) / &w;
            }
        }
    }
    let diagonal = (0..k).all(|p| (0..k).all(|q| p == q || m[p][q].is_zero()));
    let z = if diagonal {
        (0..k)
            .map(|p| if m[p][p].is_zero() { None } else { Some(&err[p] / &m[p][p]) })
            .collect::<Option<Vec<_>>>()
    } else {
        exact::solve(m, err)
    }
    .ok_or(GramError::RankDeficient)?;
    let mut y = y0.to_vec();
    for (pos, &r) in keep.iter().enumerate() {
        if z[pos].is_zero() {
            continue;
        }
        for (c, v) in &sys.rows[r] {
            let w = BigRational::from_integer(sys.weight(*c).into());
            y[*c] -= v * &z[pos] / w;
        }
    }
    Ok(y)
}

/// Nearest Gram matrix to `g0` in Frobenius norm satisfying `sys` exactly.
pub fn project_onto_affine(g0: &GramRational, sys: &LinearSystem) -> Result<GramRational, GramError> {
    if g0.dim() != sys.dim {
        return Err(GramError::DimensionMismatch { expected: sys.dim, found: g0.dim() });
    }
    let y = project_coordinates(sys, g0.entries.packed())?;
    Ok(GramRational { basis: g0.basis.clone(), entries: SymMatrix::from_packed(sys.dim, y) })
}

#[cfg(test)]
mod tests {
    use super::super::{gram_to_poly, support_restricted_basis, DEFAULT_BASIS_CAP};
    use super::*;
    use crate::poly::{int, parse_polynomial};

    fn worked_example_poly() -> Polynomial {
        parse_polynomial("2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4", 2).unwrap()
    }

    #[test]
    fn worked_example_constraints() {
        let f = worked_example_poly();
        let b = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        let sys = matching_system(&f, &b).unwrap();
        // basis order [x1^2, x1*x2, x2^2]; unknowns (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
        assert_eq!(sys.rows.len(), 5);
        assert_eq!(sys.rank(), 5);
        let row_of = |s: &str| {
            let m = parse_polynomial(s, 2).unwrap().terms().next().unwrap().0.clone();
            sys.target_monomials.iter().position(|t| *t == m).unwrap()
        };
        let x14 = row_of("x1^4");
        assert_eq!(sys.rows[x14], vec![(0, int(1))]);
        assert_eq!(sys.rhs[x14], int(2));
        let x1x2_sq = row_of("x1^2*x2^2");
        assert_eq!(sys.rows[x1x2_sq], vec![(2, int(2)), (3, int(1))]);
        assert_eq!(sys.rhs[x1x2_sq], int(-1));
    }

    #[test]
    fn projection_lands_on_affine_set() {
        let f = worked_example_poly();
        let b = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        let sys = matching_system(&f, &b).unwrap();
        let mut g0 = GramRational::zeros(b);
        g0.entries.set(0, 0, int(2));
        g0.entries.set(2, 2, int(5));
        let g = project_onto_affine(&g0, &sys).unwrap();
        assert!(sys.is_satisfied_by(&g));
        assert_eq!(gram_to_poly(&g), f);
        assert_eq!(project_onto_affine(&g, &sys).unwrap(), g);
    }

    #[test]
    fn inexpressible_monomial_is_reported() {
        let f = parse_polynomial("x1^2 + x2^2", 2).unwrap();
        let basis = MonomialBasis::new(2, vec![Monomial::var(2, 0)]).unwrap();
        assert!(matches!(matching_system(&f, &basis), Err(GramError::Inexpressible(_))));
    }
}
