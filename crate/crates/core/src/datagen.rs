//! Random nonnegative polynomials paired with exact SOS decompositions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;
use core::str::FromStr;

use nalgebra::SymmetricEigen;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gram::{full_basis, gram_to_poly, GramError, GramRational, MonomialBasis, DEFAULT_BASIS_CAP};
use crate::poly::{Monomial, Polynomial};
use crate::recover::exact_psd_check;
use crate::sym::SymMatrix;
use crate::verify::{gram_to_certificate, SosCertificate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Shift,
    Factored,
    OptShift,
    Dd,
    Sdd,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Shift, Method::Factored, Method::OptShift, Method::Dd, Method::Sdd];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Shift => "shift",
            Method::Factored => "factored",
            Method::OptShift => "opt_shift",
            Method::Dd => "dd",
            Method::Sdd => "sdd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL.into_iter().find(|m| m.tag() == s).ok_or_else(|| alloc::format!("unknown method `{}`", s))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub nvars: usize,
    pub half_degree: u32,
    pub coefficient_range: RangeInclusive<i64>,
    /// Probability that a random entry is zero.
    pub sparsity: f64,
    /// Squares in the factored construction.
    pub rank_k: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { nvars: 2, half_degree: 2, coefficient_range: -9..=9, sparsity: 0.6, rank_k: 2, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingPair {
    pub f: Polynomial,
    pub decomposition: SosCertificate,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("nvars and half_degree must be at least 1")]
    EmptyShape,
    #[error("rank {rank} exceeds basis size {basis}")]
    RankTooLarge { rank: usize, basis: usize },
    #[error("scaling diagonal has a zero entry")]
    ZeroDiagonal,
    #[error("no nonzero draw after {0} attempts")]
    Degenerate(usize),
    #[error(transparent)]
    Basis(#[from] GramError),
}

const MAX_ATTEMPTS: usize = 64;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn basis_of(cfg: &GenConfig) -> Result<MonomialBasis, GenError> {
    if cfg.nvars == 0 || cfg.half_degree == 0 {
        return Err(GenError::EmptyShape);
    }
    Ok(full_basis(cfg.nvars, cfg.half_degree, DEFAULT_BASIS_CAP)?)
}

fn sparse_entry(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> i64 {
    if rng.gen_bool(cfg.sparsity.clamp(0.0, 1.0)) {
        0
    } else {
        rng.gen_range(cfg.coefficient_range.clone())
    }
}

fn linear_form(basis: &MonomialBasis, coeffs: &[BigRational]) -> Polynomial {
    Polynomial::from_terms(basis.nvars(), coeffs.iter().enumerate().map(|(a, c)| (basis.get(a).clone(), c.clone())))
}

fn finish(f: Polynomial, decomposition: SosCertificate, method: Method) -> TrainingPair {
    TrainingPair { f, decomposition, method }
}

/// Float `λ_min`, nudged up so an integral eigenvalue is not rounded past.
fn lambda_min_hint(g: &SymMatrix<BigRational>) -> f64 {
    let n = g.dim();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| g.get(i, j).to_f64().unwrap_or(0.0));
    let eig = SymmetricEigen::new(m.clone());
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    lmin + 1e-9 * (1.0 + m.norm())
}

fn shifted(g: &SymMatrix<BigRational>, k: i64) -> SymMatrix<BigRational> {
    let mut out = g.clone();
    for i in 0..g.dim() {
        let v = out.get(i, i) - int(k);
        out.set(i, i, v);
    }
    out
}

/// `G − kI` for the largest integer `k ≤ start` the exact check accepts.
fn certified_shift(basis: &MonomialBasis, g: &SymMatrix<BigRational>, start: i64) -> (i64, GramRational) {
    let mut k = start;
    loop {
        let cand = GramRational { basis: basis.clone(), entries: shifted(g, k) };
        if exact_psd_check(&cand).is_psd() {
            return (k, cand);
        }
        k -= 1;
    }
}

/// Random symmetric integer Gram matrix shifted onto the PSD cone.
pub fn gen_shift(cfg: &GenConfig) -> Result<TrainingPair, GenError> {
    let basis = basis_of(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = basis.len();
    for _ in 0..MAX_ATTEMPTS {
        let g = SymMatrix::from_fn(m, |_, _| int(sparse_entry(&mut rng, cfg)));
        let pair = shift_pair(&basis, &g);
        if !pair.f.is_zero() {
            return Ok(pair);
        }
    }
    Err(GenError::Degenerate(MAX_ATTEMPTS))
}

/// Shift construction for a given symmetric matrix.
pub fn shift_pair(basis: &MonomialBasis, g: &SymMatrix<BigRational>) -> TrainingPair {
    let start = libm::floor(lambda_min_hint(g)) as i64;
    let (_, shifted) = certified_shift(basis, g, start);
    let cert = gram_to_certificate(&shifted).expect("shift is certified PSD");
    finish(gram_to_poly(&shifted), cert, Method::Shift)
}

/// `Σⱼ dⱼ·(rowⱼ · v(x))²` for a sparse integer `k × m` matrix and positive `d`.
pub fn gen_factored(cfg: &GenConfig) -> Result<TrainingPair, GenError> {
    let basis = basis_of(cfg)?;
    let m = basis.len();
    if cfg.rank_k > m {
        return Err(GenError::RankTooLarge { rank: cfg.rank_k, basis: m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut squares = Vec::with_capacity(cfg.rank_k);
    for _ in 0..cfg.rank_k {
        let row = (0..MAX_ATTEMPTS)
            .map(|_| (0..m).map(|_| int(sparse_entry(&mut rng, cfg))).collect::<Vec<_>>())
            .find(|r| r.iter().any(|x| !x.is_zero()))
            .ok_or(GenError::Degenerate(MAX_ATTEMPTS))?;
        let d = BigRational::new(rng.gen_range(1..=4).into(), rng.gen_range(1..=2).into());
        squares.push((d, linear_form(&basis, &row)));
    }
    Ok(factored_pair(cfg.nvars, squares))
}

pub fn factored_pair(nvars: usize, squares: Vec<(BigRational, Polynomial)>) -> TrainingPair {
    let cert = SosCertificate { nvars, squares };
    finish(cert.expand(), cert, Method::Factored)
}

/// Minimum-Frobenius-norm Gram matrix of `f` over `basis`: every ordered pair
/// producing a monomial carries an equal share of its coefficient.
pub fn least_norm_gram(f: &Polynomial, basis: &MonomialBasis) -> Result<SymMatrix<BigRational>, GramError> {
    let m = basis.len();
    let mut counts: alloc::collections::BTreeMap<Monomial, i64> = Default::default();
    for i in 0..m {
        for j in 0..m {
            *counts.entry(basis.get(i).mul(basis.get(j))).or_default() += 1;
        }
    }
    for (mono, _) in f.terms() {
        if !counts.contains_key(mono) {
            return Err(GramError::Inexpressible(mono.clone()));
        }
    }
    Ok(SymMatrix::from_fn(m, |i, j| {
        let mono = basis.get(i).mul(basis.get(j));
        f.coeff(&mono) / int(counts[&mono])
    }))
}

/// Random integer polynomial plus `k·Σ w²` with `k` the smallest
/// nonnegative integer making its least-norm Gram matrix PSD.
pub fn gen_opt_shift(cfg: &GenConfig) -> Result<TrainingPair, GenError> {
    let basis = basis_of(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let monomials: Vec<Monomial> =
        (0..basis.len()).flat_map(|i| (i..basis.len()).map(move |j| (i, j))).map(|(i, j)| basis.get(i).mul(basis.get(j))).collect();
    for _ in 0..MAX_ATTEMPTS {
        let mut f = Polynomial::zero(cfg.nvars);
        let mut seen = alloc::collections::BTreeSet::new();
        for mono in &monomials {
            if seen.insert(mono.clone()) {
                f = &f + &Polynomial::monomial(mono.clone(), int(sparse_entry(&mut rng, cfg)));
            }
        }
        if f.is_zero() {
            continue;
        }
        return Ok(opt_shift_pair(&f, &basis)?);
    }
    Err(GenError::Degenerate(MAX_ATTEMPTS))
}

pub fn opt_shift_pair(f: &Polynomial, basis: &MonomialBasis) -> Result<TrainingPair, GramError> {
    let g = least_norm_gram(f, basis)?;
    let start = (libm::floor(lambda_min_hint(&g)) as i64).min(0);
    let (k, shifted) = certified_shift(basis, &g, start);
    let cert = gram_to_certificate(&shifted).expect("shift is certified PSD");
    let lift = Polynomial::from_terms(basis.nvars(), basis.monomials().iter().map(|w| (w.pow(2), int(-k))));
    let f_shifted = f + &lift;
    debug_assert_eq!(gram_to_poly(&shifted), f_shifted);
    Ok(finish(f_shifted, cert, Method::OptShift))
}

/// Generator vectors with at most two nonzero `±1` entries: `e_k`, `e_k ± e_l`.
pub fn dd_generators(m: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for k in 0..m {
        let mut v = vec![0; m];
        v[k] = 1;
        out.push(v);
    }
    for k in 0..m {
        for l in k + 1..m {
            for s in [1, -1] {
                let mut v = vec![0; m];
                v[k] = 1;
                v[l] = s;
                out.push(v);
            }
        }
    }
    out
}

fn dd_weights(rng: &mut ChaCha8Rng, cfg: &GenConfig, count: usize) -> Vec<i64> {
    let hi = (*cfg.coefficient_range.end()).abs().max(1);
    let mut w: Vec<i64> = (0..count).map(|_| if rng.gen_bool(cfg.sparsity.clamp(0.0, 1.0)) { 0 } else { rng.gen_range(1..=hi) }).collect();
    if w.iter().all(|&x| x == 0) {
        let i = rng.gen_range(0..count);
        w[i] = rng.gen_range(1..=hi);
    }
    w
}

/// Nonnegative combination of diagonally dominant generators.
pub fn gen_dd(cfg: &GenConfig) -> Result<TrainingPair, GenError> {
    let basis = basis_of(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gens = dd_generators(basis.len());
    let weights = dd_weights(&mut rng, cfg, gens.len());
    let scale = vec![BigRational::one(); basis.len()];
    scaled_generator_pair(&basis, &gens, &weights, &scale, Method::Dd)
}

/// As [`gen_dd`] with generators `D⁻¹u` for a random positive diagonal `D`.
pub fn gen_sdd(cfg: &GenConfig) -> Result<TrainingPair, GenError> {
    let basis = basis_of(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gens = dd_generators(basis.len());
    let weights = dd_weights(&mut rng, cfg, gens.len());
    let scale: Vec<BigRational> = (0..basis.len()).map(|_| int(rng.gen_range(1..=3))).collect();
    scaled_generator_pair(&basis, &gens, &weights, &scale, Method::Sdd)
}

/// `Σ ηᵢ (D⁻¹uᵢ · v(x))²`; a unit `diagonal` gives the plain dd construction.
pub fn scaled_generator_pair(
    basis: &MonomialBasis,
    generators: &[Vec<i64>],
    weights: &[i64],
    diagonal: &[BigRational],
    method: Method,
) -> Result<TrainingPair, GenError> {
    if diagonal.iter().any(|d| d.is_zero()) {
        return Err(GenError::ZeroDiagonal);
    }
    let mut squares = Vec::new();
    for (u, &w) in generators.iter().zip(weights) {
        if w == 0 {
            continue;
        }
        let coeffs: Vec<BigRational> = u.iter().zip(diagonal).map(|(&x, d)| int(x) / d).collect();
        squares.push((int(w), linear_form(basis, &coeffs)));
    }
    let cert = SosCertificate { nvars: basis.nvars(), squares };
    Ok(finish(cert.expand(), cert, method))
}

pub fn generate(method: Method, cfg: &GenConfig) -> Result<TrainingPair, GenError> {
    match method {
        Method::Shift => gen_shift(cfg),
        Method::Factored => gen_factored(cfg),
        Method::OptShift => gen_opt_shift(cfg),
        Method::Dd => gen_dd(cfg),
        Method::Sdd => gen_sdd(cfg),
    }
}

/// Diagonal dominance `Gᵢᵢ ≥ Σ_{j≠i} |Gᵢⱼ|`, exactly.
pub fn is_diagonally_dominant(g: &SymMatrix<BigRational>) -> bool {
    let n = g.dim();
    (0..n).all(|i| {
        let off: BigRational = (0..n).filter(|&j| j != i).map(|j| g.get(i, j).abs()).sum();
        *g.get(i, i) >= off
    })
}

/// Gram matrix `Σ wᵢ cᵢcᵢᵀ` of a certificate over `basis`; `None` if a
/// square leaves the basis.
pub fn certificate_gram(cert: &SosCertificate, basis: &MonomialBasis) -> Option<SymMatrix<BigRational>> {
    let m = basis.len();
    let mut g = SymMatrix::filled(m, BigRational::zero());
    for (w, q) in &cert.squares {
        let mut c = vec![BigRational::zero(); m];
        for (mono, v) in q.terms() {
            c[basis.index_of(mono)?] = v.clone();
        }
        for a in 0..m {
            if c[a].is_zero() {
                continue;
            }
            for b in a..m {
                if !c[b].is_zero() {
                    *g.get_mut(a, b) += w * &c[a] * &c[b];
                }
            }
        }
    }
    Some(g)
}

/// SplitMix64 step, used to derive independent per-draw seeds.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusConfig {
    pub base: GenConfig,
    /// Draw `i` uses `methods[i % len]`.
    pub methods: Vec<Method>,
    pub nvars: RangeInclusive<usize>,
    pub half_degree: RangeInclusive<u32>,
    /// Factored rank drawn from `1..=rank_max`, capped by the basis size.
    pub rank_max: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { base: GenConfig::default(), methods: Method::ALL.to_vec(), nvars: 1..=3, half_degree: 1..=2, rank_max: 3 }
    }
}

/// Draw `index` of a corpus; depends only on `(cfg, index)`.
pub fn corpus_draw(cfg: &CorpusConfig, index: u64) -> Result<TrainingPair, GenError> {
    let seed = split_seed(cfg.base.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let method = cfg.methods[(index as usize) % cfg.methods.len().max(1)];
    let nvars = rng.gen_range(cfg.nvars.clone());
    let half_degree = rng.gen_range(cfg.half_degree.clone());
    let basis_len = binomial(nvars + half_degree as usize, half_degree as usize);
    let rank_k = rng.gen_range(1..=cfg.rank_max.max(1)).min(basis_len);
    let gc = GenConfig { nvars, half_degree, rank_k, seed: rng.gen(), ..cfg.base.clone() };
    generate(method, &gc)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, ratio};
    use crate::verify::check_certificate;

    fn mono_basis(exps: &[&[u32]]) -> MonomialBasis {
        let n = exps[0].len();
        MonomialBasis::new(n, exps.iter().map(|e| Monomial::new(e.to_vec())).collect()).unwrap()
    }

    fn dense(rows: &[&[i64]]) -> SymMatrix<BigRational> {
        SymMatrix::from_fn(rows.len(), |i, j| int(rows[i][j]))
    }

    #[test]
    fn shift_examples() {
        let b = mono_basis(&[&[1, 0], &[0, 1]]);
        let pair = shift_pair(&b, &dense(&[&[3, 0], &[0, -2]]));
        assert_eq!(pair.f, parse_polynomial("5*x1^2", 2).unwrap());
        let pair = shift_pair(&b, &dense(&[&[0, 1], &[1, 0]]));
        assert_eq!(pair.f, parse_polynomial("x1^2 + 2*x1*x2 + x2^2", 2).unwrap());
        assert!(check_certificate(&pair.f, &pair.decomposition).ok);
    }

    #[test]
    fn factored_examples() {
        let b = mono_basis(&[&[1, 0], &[0, 1]]);
        let pair = factored_pair(2, vec![(int(2), linear_form(&b, &[int(1), int(0)])), (int(3), linear_form(&b, &[int(0), int(1)]))]);
        assert_eq!(certificate_gram(&pair.decomposition, &b).unwrap(), dense(&[&[2, 0], &[0, 3]]));
        let pair = factored_pair(2, vec![(int(1), linear_form(&b, &[int(1), int(1)]))]);
        assert_eq!(pair.f, parse_polynomial("(x1 + x2)^2", 2).unwrap());
    }

    #[test]
    fn opt_shift_example() {
        let f = parse_polynomial("-x1^2", 1).unwrap();
        let b = mono_basis(&[&[0], &[1]]);
        let pair = opt_shift_pair(&f, &b).unwrap();
        assert_eq!(pair.f, parse_polynomial("1", 1).unwrap());
        assert!(check_certificate(&pair.f, &pair.decomposition).ok);
        let sos = parse_polynomial("x1^2 + 1", 1).unwrap();
        assert_eq!(opt_shift_pair(&sos, &b).unwrap().f, sos);
    }

    #[test]
    fn dd_and_sdd_examples() {
        let b = mono_basis(&[&[1, 0], &[0, 1]]);
        let gens = vec![vec![1, -1]];
        let one = vec![BigRational::one(); 2];
        let pair = scaled_generator_pair(&b, &gens, &[1], &one, Method::Dd).unwrap();
        assert_eq!(pair.f, parse_polynomial("x1^2 - 2*x1*x2 + x2^2", 2).unwrap());
        let pair = scaled_generator_pair(&b, &[vec![1, 1]], &[1], &[int(2), int(1)], Method::Sdd).unwrap();
        assert_eq!(pair.decomposition.squares[0].1, linear_form(&b, &[ratio(1, 2), int(1)]));
        assert_eq!(scaled_generator_pair(&b, &gens, &[1], &[int(0), int(1)], Method::Sdd), Err(GenError::ZeroDiagonal));
    }

    #[test]
    fn every_method_verifies() {
        for method in Method::ALL {
            for seed in 0..5 {
                let cfg = GenConfig { nvars: 2, half_degree: 2, rank_k: 2, seed, ..Default::default() };
                let pair = generate(method, &cfg).unwrap();
                assert!(check_certificate(&pair.f, &pair.decomposition).ok, "{method} seed {seed}");
                assert_eq!(generate(method, &cfg).unwrap(), pair);
            }
        }
    }
}
