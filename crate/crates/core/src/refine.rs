//! Damped Gauss–Newton refinement of a factorized Gram representation.
//!
//! The unknowns are the coefficients of `k` polynomials `ℓᵢ` over a monomial
//! basis; the residual is `coeff(Σ ℓᵢ² − f)`. Residuals and iterates live at
//! the configured binary precision, while each step is computed from an `f64`
//! Jacobian by a damped SVD solve. The step only needs to be a good descent
//! direction: the residual it reduces is always evaluated at full precision,
//! so accuracy keeps improving past `f64` resolution.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_rational::BigRational;

use crate::bigfloat::{l2_norm, BigFloat};
use crate::deadline::{Deadline, NoDeadline};
use crate::gram::{gram_to_float_poly, GramError, GramNumeric, MonomialBasis};
use crate::poly::{coeff_l2_distance_at, FloatPolynomial, Monomial, Polynomial};
use crate::sym::SymMatrix;

/// Column `i` holds the coefficients of `ℓᵢ` over `basis`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorMatrix {
    pub basis: MonomialBasis,
    pub precision: u32,
    pub columns: Vec<Vec<BigFloat>>,
}

impl FactorMatrix {
    pub fn zeros(basis: MonomialBasis, k: usize, precision: u32) -> Self {
        let m = basis.len();
        FactorMatrix { basis, precision, columns: vec![vec![BigFloat::zero(); m]; k] }
    }

    pub fn from_f64(basis: MonomialBasis, columns: &[Vec<f64>], precision: u32) -> Self {
        let cols = columns.iter().map(|c| c.iter().map(|&x| BigFloat::from_f64(x).round_to(precision)).collect()).collect();
        FactorMatrix { basis, precision, columns: cols }
    }

    /// Number of columns.
    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, col: usize, row: usize) -> &BigFloat {
        &self.columns[col][row]
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        FactorMatrix {
            basis: self.basis.clone(),
            precision,
            columns: self.columns.iter().map(|c| c.iter().map(|x| x.round_to(precision)).collect()).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.columns.iter().map(|c| c.iter().map(BigFloat::to_f64).collect()).collect()
    }

    /// `ℓᵢ` as a float polynomial.
    pub fn column_polynomial(&self, col: usize) -> FloatPolynomial {
        FloatPolynomial::from_terms(
            self.basis.nvars(),
            self.precision,
            self.columns[col].iter().enumerate().map(|(a, c)| (self.basis.get(a).clone(), c.clone())),
        )
    }

    /// `Σ ℓᵢ²`, accumulated exactly and rounded once per coefficient.
    pub fn expand(&self) -> FloatPolynomial {
        gram_to_float_poly(&factor_to_gram_exact(self)).with_rounding(self.precision)
    }

    fn all_finite(&self) -> bool {
        self.columns.iter().flatten().all(|x| x.to_f64().is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineConfig {
    pub tol_tau: f64,
    pub max_iters: usize,
    pub precision_bits: u32,
    /// Initial damping, relative to the largest squared singular value.
    pub damping_init: f64,
    pub damping_growth: f64,
    pub damping_shrink: f64,
    /// Damping above this ends the run as stalled.
    pub damping_max: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            tol_tau: 1e-15,
            max_iters: 50,
            precision_bits: 256,
            damping_init: 1e-4,
            damping_growth: 10.0,
            damping_shrink: 0.1,
            damping_max: 1e16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// No step reduces the residual any further.
    Stalled,
    TimedOut,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOutcome {
    pub factor: FactorMatrix,
    pub gram: GramNumeric,
    /// Backward error of `gram` against the target.
    pub theta_final: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Residual norm after the start and after every accepted step.
    pub theta_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefineError {
    #[error("negative weight on square {0}")]
    NegativeWeight(usize),
    #[error("square {0} uses a variable count different from the basis")]
    NvarsMismatch(usize),
    #[error(transparent)]
    Basis(#[from] GramError),
}

/// Builds `ℓᵢ = √kᵢ·qᵢ`, extending `basis` with any missing monomials.
///
/// When there are more squares than basis monomials the columns are
/// compressed to an eigen-factor of the same Gram matrix.
pub fn initial_factor(
    squares: &[(BigRational, FloatPolynomial)],
    basis: &MonomialBasis,
    precision: u32,
    cap: usize,
) -> Result<FactorMatrix, RefineError> {
    let nvars = basis.nvars();
    let mut monomials: Vec<Monomial> = basis.monomials().to_vec();
    for (i, (w, q)) in squares.iter().enumerate() {
        if num_traits::Signed::is_negative(w) {
            return Err(RefineError::NegativeWeight(i));
        }
        if q.nvars() != nvars {
            return Err(RefineError::NvarsMismatch(i));
        }
        for (m, _) in q.terms() {
            if !basis.contains(m) && !monomials.contains(m) {
                monomials.push(m.clone());
            }
        }
    }
    if monomials.len() > cap {
        return Err(GramError::BasisTooLarge { size: monomials.len(), cap }.into());
    }
    let basis = if monomials.len() == basis.len() { basis.clone() } else { MonomialBasis::new(nvars, monomials)? };
    let m = basis.len();
    let mut columns = Vec::with_capacity(squares.len());
    for (w, q) in squares {
        let root = BigFloat::from_rational(w, precision + 32).sqrt(precision + 32);
        let mut col = vec![BigFloat::zero(); m];
        for (mono, c) in q.terms() {
            let a = basis.index_of(mono).expect("basis extended above");
            col[a] = c.mul(&root, precision);
        }
        columns.push(col);
    }
    let factor = FactorMatrix { basis, precision, columns };
    if factor.rank() > m {
        return Ok(compress(&factor));
    }
    Ok(factor)
}

fn compress(factor: &FactorMatrix) -> FactorMatrix {
    let g = factor_to_gram(factor).to_dmatrix();
    let eig = SymmetricEigen::new(g);
    let m = factor.dim();
    let mut cols = Vec::new();
    for j in 0..m {
        let lambda = eig.eigenvalues[j];
        if lambda > 0.0 {
            let s = libm::sqrt(lambda);
            cols.push((0..m).map(|a| s * eig.eigenvectors[(a, j)]).collect::<Vec<f64>>());
        }
    }
    FactorMatrix::from_f64(factor.basis.clone(), &cols, factor.precision)
}

/// `Σᵢ ℓᵢℓᵢᵀ` rounded to the factor precision.
pub fn factor_to_gram(l: &FactorMatrix) -> GramNumeric {
    let exact = factor_to_gram_exact(l);
    GramNumeric { basis: exact.basis, precision: l.precision, entries: exact.entries.map(|x| x.round_to(l.precision)) }
}

fn factor_to_gram_exact(l: &FactorMatrix) -> GramNumeric {
    let m = l.dim();
    let entries = SymMatrix::from_fn(m, |a, b| {
        let mut acc = BigFloat::zero();
        for col in &l.columns {
            acc = acc.mul_add(&col[a], &col[b], u32::MAX);
        }
        acc
    });
    GramNumeric { basis: l.basis.clone(), precision: u32::MAX, entries }
}

impl FloatPolynomial {
    fn with_rounding(self, prec: u32) -> FloatPolynomial {
        FloatPolynomial::from_terms(self.nvars(), prec, self.terms().map(|(m, c)| (m.clone(), c.round_to(prec))))
    }
}

/// Residual `coeff(Σ ℓᵢ² − f)` over a fixed basis, with its Jacobian.
#[derive(Clone, Debug)]
pub struct ResidualModel {
    basis_len: usize,
    /// Residual monomials: products of basis pairs plus the support of `f`.
    rows: Vec<Monomial>,
    /// Row of `basis[a]·basis[b]`, upper triangle packed.
    pair_row: Vec<usize>,
    target: Vec<BigRational>,
}

impl ResidualModel {
    pub fn new(f: &Polynomial, basis: &MonomialBasis) -> Self {
        let m = basis.len();
        let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
        let mut rows = Vec::new();
        let mut pair_row = Vec::with_capacity(m * (m + 1) / 2);
        let mut intern = |mono: Monomial, rows: &mut Vec<Monomial>| -> usize {
            *index.entry(mono.clone()).or_insert_with(|| {
                rows.push(mono);
                rows.len() - 1
            })
        };
        for a in 0..m {
            for b in a..m {
                pair_row.push(intern(basis.get(a).mul(basis.get(b)), &mut rows));
            }
        }
        for (mono, _) in f.terms() {
            intern(mono.clone(), &mut rows);
        }
        let target = rows.iter().map(|mono| f.coeff(mono)).collect();
        ResidualModel { basis_len: m, rows, pair_row, target }
    }

    pub fn rows(&self) -> &[Monomial] {
        &self.rows
    }

    fn pair(&self, a: usize, b: usize) -> usize {
        self.pair_row[crate::sym::packed_index(self.basis_len, a, b)]
    }

    /// Residual at `prec` bits.
    pub fn residual(&self, l: &FactorMatrix, prec: u32) -> Vec<BigFloat> {
        let m = self.basis_len;
        let mut acc = vec![BigFloat::zero(); self.rows.len()];
        for col in &l.columns {
            for a in 0..m {
                if col[a].is_zero() {
                    continue;
                }
                let r = self.pair(a, a);
                acc[r] = acc[r].mul_add(&col[a], &col[a], u32::MAX);
                let twice = col[a].mul(&BigFloat::from_i64(2), u32::MAX);
                for b in a + 1..m {
                    if col[b].is_zero() {
                        continue;
                    }
                    let r = self.pair(a, b);
                    acc[r] = acc[r].mul_add(&twice, &col[b], u32::MAX);
                }
            }
        }
        acc.iter()
            .zip(&self.target)
            .map(|(s, t)| s.sub(&BigFloat::from_rational(t, prec + 64), prec))
            .collect()
    }

    /// `θ = ‖residual‖₂` at `prec` bits.
    pub fn theta(&self, l: &FactorMatrix, prec: u32) -> f64 {
        l2_norm(&self.residual(l, prec), prec).to_f64()
    }

    /// `∂r_β/∂c_{i,a} = 2·Σ_b c_{i,b}` over `basis[a]·basis[b] = β`; column `i·m + a`.
    pub fn jacobian(&self, l: &FactorMatrix) -> DMatrix<f64> {
        let m = self.basis_len;
        let cols = l.to_f64();
        let mut j = DMatrix::zeros(self.rows.len(), m * cols.len());
        for (i, c) in cols.iter().enumerate() {
            for a in 0..m {
                j[(self.pair(a, a), i * m + a)] += 2.0 * c[a];
                for b in a + 1..m {
                    let r = self.pair(a, b);
                    j[(r, i * m + a)] += 2.0 * c[b];
                    j[(r, i * m + b)] += 2.0 * c[a];
                }
            }
        }
        j
    }
}

/// `‖coeff(Σ ℓᵢ² − f)‖₂` at the factor precision.
pub fn backward_error(f: &Polynomial, l: &FactorMatrix) -> f64 {
    ResidualModel::new(f, &l.basis).theta(l, l.precision)
}

const SINGULAR_CUTOFF: f64 = 1e-13;

fn damped_step(j: &DMatrix<f64>, r: &DVector<f64>, damping: f64) -> Option<DVector<f64>> {
    let svd = j.clone().svd(true, true);
    let u = svd.u.as_ref()?;
    let vt = svd.v_t.as_ref()?;
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 || !smax.is_finite() {
        return None;
    }
    let mu = damping * smax * smax;
    let mut step = DVector::zeros(j.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= SINGULAR_CUTOFF * smax {
            continue;
        }
        let coef = -(s / (s * s + mu)) * u.column(k).dot(r);
        step.axpy(coef, &vt.row(k).transpose(), 1.0);
    }
    step.iter().all(|x| x.is_finite()).then_some(step)
}

fn apply_step(l: &FactorMatrix, step: &DVector<f64>) -> FactorMatrix {
    let m = l.dim();
    let mut out = l.clone();
    for (i, col) in out.columns.iter_mut().enumerate() {
        for (a, c) in col.iter_mut().enumerate() {
            let d = step[i * m + a];
            if d != 0.0 {
                *c = c.add(&BigFloat::from_f64(d), l.precision);
            }
        }
    }
    out
}

pub fn gauss_newton(f: &Polynomial, l0: &FactorMatrix, cfg: &RefineConfig) -> RefineOutcome {
    gauss_newton_until(f, l0, cfg, &NoDeadline)
}

/// Levenberg-damped Gauss–Newton; a step is kept only if it lowers `θ`.
pub fn gauss_newton_until(f: &Polynomial, l0: &FactorMatrix, cfg: &RefineConfig, deadline: &dyn Deadline) -> RefineOutcome {
    let prec = cfg.precision_bits;
    let model = ResidualModel::new(f, &l0.basis);
    let mut l = l0.with_precision(prec);
    let mut residual = model.residual(&l, prec);
    let mut theta = l2_norm(&residual, prec).to_f64();
    let mut history = vec![theta];
    let mut damping = cfg.damping_init;
    let mut iterations = 0;
    let stop = loop {
        if theta < cfg.tol_tau {
            break StopReason::Converged;
        }
        if deadline.expired() {
            break StopReason::TimedOut;
        }
        if iterations >= cfg.max_iters {
            break StopReason::MaxIterations;
        }
        if l.rank() == 0 || l.dim() == 0 || !l.all_finite() {
            break StopReason::Stalled;
        }
        iterations += 1;
        let j = model.jacobian(&l);
        let r = DVector::from_iterator(residual.len(), residual.iter().map(BigFloat::to_f64));
        let accepted = damped_step(&j, &r, damping).and_then(|step| {
            let trial = apply_step(&l, &step);
            let trial_residual = model.residual(&trial, prec);
            let trial_theta = l2_norm(&trial_residual, prec).to_f64();
            (trial_theta.is_finite() && trial_theta < theta).then_some((trial, trial_residual, trial_theta))
        });
        match accepted {
            Some((trial, trial_residual, trial_theta)) => {
                l = trial;
                residual = trial_residual;
                theta = trial_theta;
                history.push(theta);
                damping *= cfg.damping_shrink;
            }
            None => {
                damping = if damping == 0.0 { f64::MIN_POSITIVE } else { damping * cfg.damping_growth };
                if damping > cfg.damping_max {
                    break StopReason::Stalled;
                }
            }
        }
    };
    let gram = factor_to_gram(&l);
    let theta_final = coeff_l2_distance_at(f, &gram_to_float_poly(&gram), prec).to_f64();
    let converged = theta_final < cfg.tol_tau;
    let stop = if stop == StopReason::Converged && !converged { StopReason::Stalled } else { stop };
    RefineOutcome { factor: l, gram, theta_final, iterations, converged, stop, theta_history: history }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{support_restricted_basis, DEFAULT_BASIS_CAP};
    use crate::poly::{int, parse_polynomial, ratio};

    fn p(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n).unwrap()
    }

    fn worked_example() -> Polynomial {
        p("2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4", 2)
    }

    #[test]
    fn initial_factor_folds_weights() {
        let basis = MonomialBasis::new(1, vec![Monomial::new(vec![1])]).unwrap();
        let sq = vec![(int(4), p("x1", 1).to_float(256))];
        let l = initial_factor(&sq, &basis, 256, DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(l.to_f64(), vec![vec![2.0]]);

        let basis = MonomialBasis::new(1, vec![Monomial::one(1)]).unwrap();
        let sq = vec![(int(1), p("x1 + 1", 1).to_float(256))];
        let l = initial_factor(&sq, &basis, 256, DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(l.dim(), 2);
        assert_eq!(l.to_f64(), vec![vec![1.0, 1.0]]);

        let neg = vec![(int(-1), p("x1", 1).to_float(256))];
        assert_eq!(initial_factor(&neg, &basis, 256, DEFAULT_BASIS_CAP), Err(RefineError::NegativeWeight(0)));
    }

    #[test]
    fn worked_example_factor_reproduces_gram() {
        let f = worked_example();
        let basis = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        let sq = vec![
            (ratio(1, 2), p("2*x1^2 - 3*x2^2 + x1*x2", 2).to_float(256)),
            (ratio(1, 2), p("x2^2 + 3*x1*x2", 2).to_float(256)),
        ];
        let l = initial_factor(&sq, &basis, 256, DEFAULT_BASIS_CAP).unwrap();
        assert!(backward_error(&f, &l) < 1e-70);
        let g = factor_to_gram(&l).to_dmatrix();
        // basis [x1^2, x1*x2, x2^2]
        let expect = [[2.0, 1.0, -3.0], [1.0, 5.0, 0.0], [-3.0, 0.0, 5.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[(i, j)] - expect[i][j]).abs() < 1e-60);
            }
        }
        let out = gauss_newton(&f, &l, &RefineConfig::default());
        assert!(out.converged && out.iterations <= 1);
    }

    #[test]
    fn zero_factor_error_is_target_norm() {
        let f = p("x1^2", 1);
        let basis = MonomialBasis::new(1, vec![Monomial::var(1, 0)]).unwrap();
        let l = FactorMatrix::zeros(basis, 1, 256);
        assert_eq!(backward_error(&f, &l), 1.0);
        assert!(factor_to_gram(&l).get(0, 0).is_zero());
    }

    #[test]
    fn infeasible_target_never_converges() {
        let f = p("-x1^2", 1);
        let basis = MonomialBasis::new(1, vec![Monomial::var(1, 0)]).unwrap();
        let l = FactorMatrix::from_f64(basis, &[vec![0.3]], 256);
        let out = gauss_newton(&f, &l, &RefineConfig::default());
        assert!(!out.converged);
        assert!(out.theta_final >= 1.0);
        assert!(out.theta_history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn noisy_factor_converges() {
        let f = worked_example();
        let basis = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        let s = 1.0 / libm::sqrt(2.0);
        let cols = vec![vec![2.0 * s + 1e-3, s - 2e-3, -3.0 * s], vec![1e-3, 3.0 * s, s + 1e-3]];
        let l = FactorMatrix::from_f64(basis, &cols, 256);
        let out = gauss_newton(&f, &l, &RefineConfig::default());
        assert!(out.converged, "theta {}", out.theta_final);
        assert!(out.theta_history.windows(2).all(|w| w[1] < w[0]));
    }
}
