use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;

use super::MonomialBasis;
use crate::bigfloat::BigFloat;
use crate::poly::{FloatPolynomial, Polynomial};
use crate::sym::SymMatrix;

/// Approximate Gram matrix at a fixed binary precision.
#[derive(Clone, Debug, PartialEq)]
pub struct GramNumeric {
    pub basis: MonomialBasis,
    pub precision: u32,
    pub entries: SymMatrix<BigFloat>,
}

/// Exact rational Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramRational {
    pub basis: MonomialBasis,
    pub entries: SymMatrix<BigRational>,
}

impl GramNumeric {
    pub fn zeros(basis: MonomialBasis, precision: u32) -> Self {
        let n = basis.len();
        GramNumeric { basis, precision, entries: SymMatrix::filled(n, BigFloat::zero()) }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &BigFloat {
        self.entries.get(i, j)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j).to_f64())
    }

    /// Frobenius norm as `f64`.
    pub fn frobenius_norm(&self) -> f64 {
        let m = self.to_dmatrix();
        m.norm()
    }

    pub fn from_rational(g: &GramRational, precision: u32) -> Self {
        GramNumeric {
            basis: g.basis.clone(),
            precision,
            entries: g.entries.map(|c| BigFloat::from_rational(c, precision)),
        }
    }

    /// Principal submatrix on the given basis positions.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        GramNumeric { basis: self.basis.select(keep), precision: self.precision, entries: self.entries.submatrix(keep) }
    }
}

impl GramRational {
    pub fn zeros(basis: MonomialBasis) -> Self {
        let n = basis.len();
        GramRational { basis, entries: SymMatrix::filled(n, BigRational::zero()) }
    }

    /// Row-major dense input; only the upper triangle is read.
    pub fn from_rows(basis: MonomialBasis, rows: &[Vec<BigRational>]) -> Self {
        let n = basis.len();
        assert_eq!(rows.len(), n, "row count must equal basis length");
        GramRational { basis, entries: SymMatrix::from_fn(n, |i, j| rows[i][j].clone()) }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        self.entries.get(i, j)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        use num_traits::ToPrimitive;
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j).to_f64().unwrap_or(f64::NAN))
    }
}

/// Expands `v(x)ᵀ G v(x)` exactly.
pub fn gram_to_poly(g: &GramRational) -> Polynomial {
    let b = &g.basis;
    let two = BigRational::from_integer(2.into());
    Polynomial::from_terms(
        b.nvars(),
        (0..b.len()).flat_map(|i| (i..b.len()).map(move |j| (i, j))).filter_map(|(i, j)| {
            let c = g.get(i, j);
            if c.is_zero() {
                return None;
            }
            let coef = if i == j { c.clone() } else { c * &two };
            Some((b.get(i).mul(b.get(j)), coef))
        }),
    )
}

/// Expands `v(x)ᵀ G v(x)` at the matrix precision.
pub fn gram_to_float_poly(g: &GramNumeric) -> FloatPolynomial {
    let b = &g.basis;
    let prec = g.precision;
    let two = BigFloat::from_i64(2);
    let mut acc: alloc::collections::BTreeMap<crate::poly::Monomial, BigFloat> = Default::default();
    for i in 0..b.len() {
        for j in i..b.len() {
            let c = g.get(i, j);
            if c.is_zero() {
                continue;
            }
            let e = acc.entry(b.get(i).mul(b.get(j))).or_insert_with(BigFloat::zero);
            *e = if i == j { e.add(c, u32::MAX) } else { e.mul_add(c, &two, u32::MAX) };
        }
    }
    FloatPolynomial::from_terms(b.nvars(), prec, acc.into_iter().map(|(m, c)| (m, c.round_to(prec))))
}
