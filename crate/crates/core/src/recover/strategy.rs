//! Turning a numerical Gram matrix into an exact one.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::lattice::simultaneous_diophantine_capped;
use super::numeric::{pivoted_ldlt, significant_rows, FloatLdlt};
use super::psd::{exact_psd_check, exact_psd_check_dense, PsdCheck};
use super::rationalize::rationalize_exact;
use crate::bigfloat::BigFloat;
use crate::deadline::{Deadline, NoDeadline};
use crate::exact::{self, Echelon, Insert, SparseRow};
use crate::gram::{
    gram_to_poly, matching_system, project_coordinates, project_onto_affine, GramError, GramNumeric, GramRational,
    LinearSystem, MonomialBasis,
};
use crate::poly::{Monomial, Polynomial};
use crate::sym::SymMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct RecoverConfig {
    pub rank_eps: f64,
    /// Largest denominator tried when rationalizing.
    pub denom_bound: u64,
    pub lll_delta: BigRational,
    /// Retries after the first rationalization attempt.
    pub max_denom_escalations: usize,
    /// Enumeration budget per Diophantine call.
    pub diophantine_nodes: usize,
    /// Evaluate the interior sufficiency bound (costs an SVD of the constraint matrix).
    pub bound_diagnostic: bool,
    /// Backward error assumed by the sufficiency bound.
    pub bound_tau: f64,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        RecoverConfig {
            rank_eps: 1e-8,
            denom_bound: 1_000_000,
            lll_delta: BigRational::new(3.into(), 4.into()),
            max_denom_escalations: 3,
            diophantine_nodes: 20_000,
            bound_diagnostic: false,
            bound_tau: 1e-15,
        }
    }
}

impl RecoverConfig {
    /// `10³, 10⁶, 10⁹, …` below `denom_bound`, then `denom_bound`, at most
    /// `1 + max_denom_escalations` rungs.
    pub fn denominator_ladder(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut rung = 1_000u64;
        while rung < self.denom_bound {
            out.push(rung);
            rung = match rung.checked_mul(1_000) {
                Some(r) => r,
                None => break,
            };
        }
        out.push(self.denom_bound.max(1));
        let keep = 1 + self.max_denom_escalations;
        if out.len() > keep {
            out.drain(..out.len() - keep);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecoveryPath {
    Interior,
    /// Lattice-recovered `L` columns with pivot repair.
    Boundary,
    /// Rationalized range with a free Gram block on that face.
    BoundaryFace,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecoverError {
    #[error("no positive semidefinite projection up to denominator {denom_bound}")]
    NotPsd { denom_bound: u64 },
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error("identity unreachable within the rank-{rank} structure")]
    IdentityUnsatisfiable { rank: usize },
    #[error("repaired pivot {index} is negative")]
    NegativePivot { index: usize },
    #[error("numerical rank is zero but the target is nonzero")]
    ZeroRank,
    #[error("deadline reached")]
    TimedOut,
    #[error("every recovery path failed")]
    AllFailed(Vec<(RecoveryPath, RecoverError)>),
    #[error("internal check rejected a recovered matrix")]
    Unsound(Box<RecoveryPath>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteriorBound {
    pub lambda_min: f64,
    pub frobenius: f64,
    pub kappa: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recovered {
    pub gram: GramRational,
    pub path: RecoveryPath,
    pub numerical_rank: usize,
    /// Basis monomials removed as negligible before recovery.
    pub pruned: Vec<Monomial>,
    pub denom_bound: u64,
    pub bound: Option<InteriorBound>,
}

fn to_rational(x: &BigFloat) -> BigRational {
    x.to_rational()
}

fn rationalize_float(x: &BigFloat, bound: u64) -> BigRational {
    rationalize_exact(&to_rational(x), &BigInt::from(bound))
}

/// Rationalize, project onto the affine constraints, and test PSD exactly,
/// escalating the denominator bound on failure.
pub fn interior_recover(
    f: &Polynomial,
    g_n: &GramNumeric,
    sys: &LinearSystem,
    cfg: &RecoverConfig,
) -> Result<Recovered, RecoverError> {
    interior_recover_until(f, g_n, sys, cfg, &NoDeadline)
}

pub fn interior_recover_until(
    f: &Polynomial,
    g_n: &GramNumeric,
    sys: &LinearSystem,
    cfg: &RecoverConfig,
    deadline: &dyn Deadline,
) -> Result<Recovered, RecoverError> {
    let mut last = 0;
    for bound in cfg.denominator_ladder() {
        if deadline.expired() {
            return Err(RecoverError::TimedOut);
        }
        last = bound;
        let g0 = GramRational { basis: g_n.basis.clone(), entries: g_n.entries.map(|x| rationalize_float(x, bound)) };
        let g = project_onto_affine(&g0, sys)?;
        if exact_psd_check(&g).is_psd() {
            debug_assert_eq!(gram_to_poly(&g), *f);
            let diag = cfg.bound_diagnostic.then(|| interior_bound(g_n, &g, sys, cfg.bound_tau));
            return Ok(Recovered {
                gram: g,
                path: RecoveryPath::Interior,
                numerical_rank: g_n.dim(),
                pruned: Vec::new(),
                denom_bound: bound,
                bound: diag,
            });
        }
    }
    Err(RecoverError::NotPsd { denom_bound: last })
}

/// `λ_min(G̃) > ‖G_N‖_F² · κ₂(A)² · τ²`, evaluated in `f64`.
pub fn interior_bound(g_n: &GramNumeric, g: &GramRational, sys: &LinearSystem, tau: f64) -> InteriorBound {
    let lambda_min = SymmetricEigen::new(g.to_dmatrix()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let keep = sys.independent_rows().unwrap_or_default();
    let kappa = if keep.is_empty() {
        1.0
    } else {
        use num_traits::ToPrimitive;
        let a = DMatrix::from_fn(keep.len(), sys.num_unknowns(), |r, c| {
            sys.rows[keep[r]].iter().find(|(k, _)| *k == c).map(|(_, v)| v.to_f64().unwrap_or(0.0)).unwrap_or(0.0)
        });
        let sv = a.singular_values();
        let hi = sv.iter().cloned().fold(0.0, f64::max);
        let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    };
    let frobenius = g_n.frobenius_norm();
    let rhs = frobenius * frobenius * kappa * kappa * tau * tau;
    InteriorBound { lambda_min, frobenius, kappa, satisfied: lambda_min > rhs }
}

/// Rational vector `v` with `v[j] = 1` and zeros above position `j` in
/// pivot order, remaining entries recovered with a common denominator.
fn lattice_column(ldlt: &FloatLdlt, j: usize, bound: u64, cfg: &RecoverConfig) -> Vec<BigRational> {
    let m = ldlt.perm.len();
    let below: Vec<BigRational> = (j + 1..m).map(|i| to_rational(&ldlt.l[i][j])).collect();
    let approx = simultaneous_diophantine_capped(&below, bound, &cfg.lll_delta, cfg.diophantine_nodes).values();
    let mut out = vec![BigRational::zero(); m];
    out[ldlt.perm[j]] = BigRational::from_integer(1.into());
    for (off, v) in approx.into_iter().enumerate() {
        out[ldlt.perm[j + 1 + off]] = v;
    }
    out
}

fn basis_polynomial(basis: &MonomialBasis, coeffs: &[BigRational]) -> Polynomial {
    Polynomial::from_terms(basis.nvars(), coeffs.iter().enumerate().map(|(a, c)| (basis.get(a).clone(), c.clone())))
}

/// Closest point to `x0` (Euclidean) satisfying `rows · x = rhs` exactly.
fn nearest_solution(rows: &[SparseRow], rhs: &[BigRational], x0: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut ech = Echelon::new();
    let mut keep = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        match ech.insert(row, &rhs[r]) {
            Insert::Independent => keep.push(r),
            Insert::Redundant => {}
            Insert::Inconsistent => return None,
        }
    }
    let err: Vec<BigRational> = keep
        .iter()
        .map(|&r| rows[r].iter().map(|(k, v)| v * &x0[*k]).sum::<BigRational>() - &rhs[r])
        .collect();
    if err.iter().all(Zero::is_zero) {
        return Some(x0.to_vec());
    }
    let k = keep.len();
    let mut m = vec![vec![BigRational::zero(); k]; k];
    for p in 0..k {
        for q in p..k {
            let (a, b) = (&rows[keep[p]], &rows[keep[q]]);
            let dot: BigRational = a.iter().filter_map(|(c, v)| b.get(c).map(|w| v * w)).sum();
            m[p][q] = dot.clone();
            m[q][p] = dot;
        }
    }
    let z = exact::solve(m, err)?;
    let mut x = x0.to_vec();
    for (p, &r) in keep.iter().enumerate() {
        for (c, v) in &rows[r] {
            x[*c] -= v * &z[p];
        }
    }
    Some(x)
}

/// Coefficient rows of `Σ_s unknown_s · poly_s = f`.
fn coefficient_rows(f: &Polynomial, polys: &[Polynomial]) -> (Vec<SparseRow>, Vec<BigRational>) {
    let mut by_mono: BTreeMap<Monomial, SparseRow> = BTreeMap::new();
    for (s, p) in polys.iter().enumerate() {
        for (mono, c) in p.terms() {
            by_mono.entry(mono.clone()).or_default().insert(s, c.clone());
        }
    }
    for (mono, _) in f.terms() {
        by_mono.entry(mono.clone()).or_default();
    }
    let rhs = by_mono.keys().map(|m| f.coeff(m)).collect();
    (by_mono.into_values().collect(), rhs)
}

fn outer_sum(basis: &MonomialBasis, cols: &[Vec<BigRational>], weights: &[BigRational]) -> GramRational {
    let m = basis.len();
    let entries = SymMatrix::from_fn(m, |a, b| {
        cols.iter().zip(weights).map(|(c, w)| if c[a].is_zero() || c[b].is_zero() { BigRational::zero() } else { w * &c[a] * &c[b] }).sum()
    });
    GramRational { basis: basis.clone(), entries }
}

/// Lattice-rationalized `L` columns, then exact pivot repair on `D` only.
fn boundary_lattice(
    f: &Polynomial,
    g_n: &GramNumeric,
    ldlt: &FloatLdlt,
    bound: u64,
    cfg: &RecoverConfig,
) -> Result<GramRational, RecoverError> {
    let r = ldlt.rank();
    let cols: Vec<Vec<BigRational>> = (0..r).map(|j| lattice_column(ldlt, j, bound, cfg)).collect();
    let squares: Vec<Polynomial> = cols.iter().map(|c| basis_polynomial(&g_n.basis, c).square()).collect();
    let (rows, rhs) = coefficient_rows(f, &squares);
    let d0: Vec<BigRational> = ldlt.d.iter().map(|d| rationalize_float(d, bound)).collect();
    let d = nearest_solution(&rows, &rhs, &d0).ok_or(RecoverError::IdentityUnsatisfiable { rank: r })?;
    if let Some(index) = d.iter().position(|x| x.is_negative()) {
        return Err(RecoverError::NegativePivot { index });
    }
    Ok(outer_sum(&g_n.basis, &cols, &d))
}

/// Range basis `E = L·L_P⁻¹` rationalized column by column, then the
/// `r × r` block `S` in `G = E S Eᵀ` projected onto the constraints and
/// checked exactly.
fn boundary_face(
    f: &Polynomial,
    g_n: &GramNumeric,
    ldlt: &FloatLdlt,
    bound: u64,
    cfg: &RecoverConfig,
) -> Result<GramRational, RecoverError> {
    let r = ldlt.rank();
    let m = ldlt.perm.len();
    let prec = g_n.precision.min(u32::MAX - 64);
    // L = [L_P; L_R] in pivot order; E_R·L_P = L_R solved right to left.
    let mut e_rows: Vec<Vec<BigFloat>> = vec![vec![BigFloat::zero(); r]; m];
    for i in r..m {
        for j in (0..r).rev() {
            let mut acc = ldlt.l[i][j].clone();
            for t in j + 1..r {
                acc = acc.sub(&e_rows[i][t].mul(&ldlt.l[t][j], prec), prec);
            }
            e_rows[i][j] = acc;
        }
    }
    let mut cols = vec![vec![BigRational::zero(); m]; r];
    for j in 0..r {
        cols[j][ldlt.perm[j]] = BigRational::from_integer(1.into());
        let free: Vec<BigRational> = (r..m).map(|i| to_rational(&e_rows[i][j])).collect();
        let approx = simultaneous_diophantine_capped(&free, bound, &cfg.lll_delta, cfg.diophantine_nodes).values();
        for (off, v) in approx.into_iter().enumerate() {
            cols[j][ldlt.perm[r + off]] = v;
        }
    }
    // S = L_P D L_Pᵀ
    let s0 = SymMatrix::from_fn(r, |a, b| {
        let mut acc = BigFloat::zero();
        for t in 0..=a.min(b) {
            acc = acc.add(&ldlt.l[a][t].mul(&ldlt.l[b][t], prec).mul(&ldlt.d[t], prec), prec);
        }
        rationalize_float(&acc, bound)
    });
    let polys: Vec<Polynomial> = cols.iter().map(|c| basis_polynomial(&g_n.basis, c)).collect();
    let two = BigRational::from_integer(2.into());
    let mut by_mono: BTreeMap<Monomial, Vec<(usize, BigRational)>> = BTreeMap::new();
    for s in 0..r {
        for t in s..r {
            let prod = &polys[s] * &polys[t];
            let k = crate::sym::packed_index(r, s, t);
            for (mono, c) in prod.terms() {
                let coef = if s == t { c.clone() } else { c * &two };
                by_mono.entry(mono.clone()).or_default().push((k, coef));
            }
        }
    }
    for (mono, _) in f.terms() {
        by_mono.entry(mono.clone()).or_default();
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut targets = Vec::new();
    for (mono, mut row) in by_mono {
        row.sort_by_key(|(k, _)| *k);
        rhs.push(f.coeff(&mono));
        targets.push(mono);
        rows.push(row);
    }
    let face = LinearSystem::new(r, rows, rhs, targets);
    let s = project_coordinates(&face, s0.packed()).map_err(|_| RecoverError::IdentityUnsatisfiable { rank: r })?;
    let s = SymMatrix::from_packed(r, s);
    let dense: Vec<Vec<BigRational>> = (0..r).map(|a| (0..r).map(|b| s.get(a, b).clone()).collect()).collect();
    if let PsdCheck::NotPsd { .. } = exact_psd_check_dense(&dense) {
        return Err(RecoverError::NotPsd { denom_bound: bound });
    }
    let entries = SymMatrix::from_fn(m, |a, b| {
        let mut acc = BigRational::zero();
        for x in 0..r {
            if cols[x][a].is_zero() {
                continue;
            }
            for y in 0..r {
                if cols[y][b].is_zero() || s.get(x, y).is_zero() {
                    continue;
                }
                acc += &cols[x][a] * s.get(x, y) * &cols[y][b];
            }
        }
        acc
    });
    Ok(GramRational { basis: g_n.basis.clone(), entries })
}

/// Truncated `LDLᵀ` at the numerical rank; lattice recovery of the retained
/// columns with pivot repair, falling back to a free block on the
/// rationalized face.
pub fn boundary_recover(
    f: &Polynomial,
    g_n: &GramNumeric,
    sys: &LinearSystem,
    cfg: &RecoverConfig,
) -> Result<Recovered, RecoverError> {
    boundary_recover_until(f, g_n, sys, cfg, &NoDeadline)
}

pub fn boundary_recover_until(
    f: &Polynomial,
    g_n: &GramNumeric,
    sys: &LinearSystem,
    cfg: &RecoverConfig,
    deadline: &dyn Deadline,
) -> Result<Recovered, RecoverError> {
    let ldlt = pivoted_ldlt(g_n, cfg.rank_eps);
    let r = ldlt.rank();
    let done = |gram: GramRational, path, bound| Recovered {
        gram,
        path,
        numerical_rank: r,
        pruned: Vec::new(),
        denom_bound: bound,
        bound: None,
    };
    if r == 0 {
        return if f.is_zero() {
            Ok(done(GramRational::zeros(g_n.basis.clone()), RecoveryPath::Boundary, 1))
        } else {
            Err(RecoverError::ZeroRank)
        };
    }
    let mut last = RecoverError::IdentityUnsatisfiable { rank: r };
    for bound in cfg.denominator_ladder() {
        for path in [RecoveryPath::Boundary, RecoveryPath::BoundaryFace] {
            if deadline.expired() {
                return Err(RecoverError::TimedOut);
            }
            let attempt = match path {
                RecoveryPath::Boundary => boundary_lattice(f, g_n, &ldlt, bound, cfg),
                _ => boundary_face(f, g_n, &ldlt, bound, cfg),
            };
            match attempt {
                Ok(g) if sys.is_satisfied_by(&g) && exact_psd_check(&g).is_psd() => return Ok(done(g, path, bound)),
                Ok(_) => last = RecoverError::Unsound(Box::new(path)),
                Err(e) => last = e,
            }
        }
    }
    Err(last)
}

/// Drops negligible basis monomials, then picks interior or boundary
/// recovery by numerical rank and falls back to the other on failure.
/// Anything returned satisfies the identity and is PSD exactly.
pub fn recover(f: &Polynomial, g_n: &GramNumeric, cfg: &RecoverConfig) -> Result<Recovered, RecoverError> {
    recover_until(f, g_n, cfg, &NoDeadline)
}

pub fn recover_until(
    f: &Polynomial,
    g_n: &GramNumeric,
    cfg: &RecoverConfig,
    deadline: &dyn Deadline,
) -> Result<Recovered, RecoverError> {
    let keep = significant_rows(g_n, cfg.rank_eps);
    let (g, sys, pruned) = match prune(f, g_n, &keep) {
        Some((g, sys)) => {
            let pruned = (0..g_n.dim()).filter(|i| !keep.contains(i)).map(|i| g_n.basis.get(i).clone()).collect();
            (g, sys, pruned)
        }
        None => (g_n.clone(), matching_system(f, &g_n.basis)?, Vec::new()),
    };
    let rank = pivoted_ldlt(&g, cfg.rank_eps).rank();
    let order = if rank == g.dim() {
        [RecoveryPath::Interior, RecoveryPath::Boundary]
    } else {
        [RecoveryPath::Boundary, RecoveryPath::Interior]
    };
    let mut failures = Vec::new();
    for path in order {
        let attempt = match path {
            RecoveryPath::Interior => interior_recover_until(f, &g, &sys, cfg, deadline),
            _ => boundary_recover_until(f, &g, &sys, cfg, deadline),
        };
        match attempt {
            Ok(mut rec) => {
                if gram_to_poly(&rec.gram) != *f || !exact_psd_check(&rec.gram).is_psd() {
                    failures.push((path, RecoverError::Unsound(Box::new(rec.path))));
                    continue;
                }
                rec.numerical_rank = rank;
                rec.pruned = pruned;
                return Ok(rec);
            }
            Err(RecoverError::TimedOut) => return Err(RecoverError::TimedOut),
            Err(e) => failures.push((path, e)),
        }
    }
    Err(RecoverError::AllFailed(failures))
}

fn prune(f: &Polynomial, g_n: &GramNumeric, keep: &[usize]) -> Option<(GramNumeric, LinearSystem)> {
    if keep.len() == g_n.dim() {
        return None;
    }
    let g = g_n.restrict(keep);
    let sys = matching_system(f, &g.basis).ok()?;
    Some((g, sys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{support_restricted_basis, DEFAULT_BASIS_CAP};
    use crate::poly::{int, parse_polynomial, ratio};
    use crate::refine::{gauss_newton, FactorMatrix, RefineConfig};

    fn p(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n).unwrap()
    }

    fn numeric(rows: &[Vec<BigRational>], basis: MonomialBasis) -> GramNumeric {
        GramNumeric::from_rational(&GramRational::from_rows(basis, rows), 256)
    }

    #[test]
    fn ladder() {
        let cfg = RecoverConfig::default();
        assert_eq!(cfg.denominator_ladder(), vec![1_000, 1_000_000]);
        let cfg = RecoverConfig { denom_bound: 10u64.pow(12), max_denom_escalations: 2, ..cfg };
        assert_eq!(cfg.denominator_ladder(), vec![1_000_000, 1_000_000_000, 10u64.pow(12)]);
    }

    #[test]
    fn interior_round_trip() {
        let f = p("2*x1^2 + 2*x1*x2 + 3*x2^2", 2);
        let basis = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        let rows = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        let g_n = numeric(&rows, basis.clone());
        let sys = matching_system(&f, &basis).unwrap();
        let cfg = RecoverConfig { bound_diagnostic: true, ..Default::default() };
        let rec = interior_recover(&f, &g_n, &sys, &cfg).unwrap();
        assert_eq!(rec.gram, GramRational::from_rows(basis, &rows));
        assert!(rec.bound.unwrap().satisfied);
    }

    #[test]
    fn corrupted_interior_fails_loudly() {
        let f = p("x1^4 + x2^4", 2);
        let basis = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        // x1^2 x2^2 coefficient forces G11 = -2 G02; pick G02 = 3 so G11 = -6.
        let rows = vec![
            vec![int(1), int(0), int(3)],
            vec![int(0), int(-6), int(0)],
            vec![int(3), int(0), int(1)],
        ];
        let g_n = numeric(&rows, basis.clone());
        let sys = matching_system(&f, &basis).unwrap();
        assert!(matches!(
            interior_recover(&f, &g_n, &sys, &RecoverConfig::default()),
            Err(RecoverError::NotPsd { .. })
        ));
        assert!(recover(&f, &g_n, &RecoverConfig::default()).is_err());
    }

    #[test]
    fn rank_one_boundary() {
        let f = p("x1^2 + 2*x1*x2 + x2^2", 2);
        let basis = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        let ones = vec![vec![int(1), int(1)], vec![int(1), int(1)]];
        let g_n = numeric(&ones, basis.clone());
        let sys = matching_system(&f, &basis).unwrap();
        let rec = boundary_recover(&f, &g_n, &sys, &RecoverConfig::default()).unwrap();
        assert_eq!(rec.gram, GramRational::from_rows(basis, &ones));
        assert_eq!(rec.numerical_rank, 1);
    }

    #[test]
    fn zero_target_gives_zero_gram() {
        let f = Polynomial::zero(1);
        let basis = MonomialBasis::new(1, vec![Monomial::var(1, 0)]).unwrap();
        let g_n = GramNumeric::zeros(basis.clone(), 256);
        let sys = matching_system(&f, &basis).unwrap();
        let rec = boundary_recover(&f, &g_n, &sys, &RecoverConfig::default()).unwrap();
        assert!(gram_to_poly(&rec.gram).is_zero());
    }

    #[test]
    fn worked_example_after_refinement() {
        let f = p("2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4", 2);
        let basis = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        let s = 1.0 / libm::sqrt(2.0);
        let cols = vec![vec![2.0 * s + 1e-3, s, -3.0 * s - 2e-3], vec![0.0, 3.0 * s + 1e-3, s]];
        let out = gauss_newton(&f, &FactorMatrix::from_f64(basis, &cols, 256), &RefineConfig::default());
        assert!(out.converged);
        let rec = recover(&f, &out.gram, &RecoverConfig::default()).unwrap();
        assert_eq!(gram_to_poly(&rec.gram), f);
        assert!(exact_psd_check(&rec.gram).is_psd());
        // G(0,0) = 2 and G(2,2) = 5 are forced by the constraints.
        assert_eq!(rec.gram.get(0, 0), &int(2));
        assert_eq!(rec.gram.get(2, 2), &int(5));
        assert_eq!(rec.gram.get(0, 1), &ratio(1, 1));
    }
}
