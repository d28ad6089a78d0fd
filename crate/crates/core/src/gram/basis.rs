use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::GramError;
use crate::poly::{Monomial, Polynomial};

/// Default upper bound on basis length.
pub const DEFAULT_BASIS_CAP: usize = 4096;

/// Ordered, duplicate-free list of monomials `v(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    nvars: usize,
    monomials: Vec<Monomial>,
    index: BTreeMap<Monomial, usize>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, monomials: Vec<Monomial>) -> Result<Self, GramError> {
        let mut index = BTreeMap::new();
        for (i, m) in monomials.iter().enumerate() {
            if m.nvars() != nvars {
                return Err(GramError::NvarsMismatch(nvars, m.nvars()));
            }
            if index.insert(m.clone(), i).is_some() {
                return Err(GramError::DuplicateMonomial(m.clone()));
            }
        }
        Ok(MonomialBasis { nvars, monomials, index })
    }

    /// Sorted, deduplicated basis from arbitrary monomials.
    pub fn from_set<I: IntoIterator<Item = Monomial>>(nvars: usize, monomials: I) -> Self {
        let mut v: Vec<Monomial> = monomials.into_iter().collect();
        v.sort();
        v.dedup();
        MonomialBasis::new(nvars, v).expect("sorted unique monomials")
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn get(&self, i: usize) -> &Monomial {
        &self.monomials[i]
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.index.contains_key(m)
    }

    /// Subset of the basis at `keep`, order preserved.
    pub fn select(&self, keep: &[usize]) -> MonomialBasis {
        MonomialBasis::new(self.nvars, keep.iter().map(|&i| self.monomials[i].clone()).collect())
            .expect("subset of a valid basis")
    }

    /// The basis as polynomials `[b_0, b_1, ...]`.
    pub fn as_polynomials(&self) -> Vec<Polynomial> {
        self.monomials
            .iter()
            .map(|m| Polynomial::monomial(m.clone(), num_rational::BigRational::from_integer(1.into())))
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Every exponent vector in the box `lo <= e <= hi` with `min_deg <= |e| <= max_deg`, sorted.
fn enumerate_box(lo: &[u32], hi: &[u32], min_deg: u32, max_deg: u32, cap: usize) -> Result<Vec<Monomial>, GramError> {
    let n = lo.len();
    let mut out = Vec::new();
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Ok(out);
    }
    let mut cur: Vec<u32> = lo.to_vec();
    loop {
        let deg: u32 = cur.iter().sum();
        if deg >= min_deg && deg <= max_deg {
            if out.len() == cap {
                return Err(GramError::BasisTooLarge { size: cap + 1, cap });
            }
            out.push(Monomial::new(cur.clone()));
        }
        // odometer increment, pruning on degree
        let mut k = 0;
        loop {
            if k == n {
                out.sort();
                return Ok(out);
            }
            let deg: u32 = cur.iter().sum();
            if cur[k] < hi[k] && deg < max_deg {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
            k += 1;
        }
    }
}

/// All monomials of degree at most `half_degree`, in graded-lex order.
pub fn full_basis(nvars: usize, half_degree: u32, cap: usize) -> Result<MonomialBasis, GramError> {
    let size = binomial(nvars + half_degree as usize, half_degree as usize).unwrap_or(usize::MAX);
    if size > cap {
        return Err(GramError::BasisTooLarge { size, cap });
    }
    let monos = enumerate_box(&vec![0; nvars], &vec![half_degree; nvars], 0, half_degree, cap)?;
    MonomialBasis::new(nvars, monos)
}

/// Monomials `β` with `2β` inside the coordinate bounding box and degree band of
/// the support of `f`.
///
/// Each exponent satisfies `⌈min αᵥ/2⌉ ≤ βᵥ ≤ ⌊max αᵥ/2⌋` and the total degree
/// satisfies `mindeg(f) ≤ 2|β| ≤ deg(f)`. The zero polynomial gets the empty basis.
pub fn support_restricted_basis(f: &Polynomial, cap: usize) -> Result<MonomialBasis, GramError> {
    let n = f.nvars();
    if f.is_zero() {
        return Ok(MonomialBasis::new(n, Vec::new()).expect("empty basis"));
    }
    let deg = f.total_degree();
    if !deg.is_multiple_of(2) {
        return Err(GramError::OddDegree(deg));
    }
    let mut lo = vec![u32::MAX; n];
    let mut hi = vec![0u32; n];
    for (m, _) in f.terms() {
        for (v, &e) in m.exponents().iter().enumerate() {
            lo[v] = lo[v].min(e);
            hi[v] = hi[v].max(e);
        }
    }
    let lo: Vec<u32> = lo.iter().map(|&e| e.div_ceil(2)).collect();
    let hi: Vec<u32> = hi.iter().map(|&e| e / 2).collect();
    let monos = enumerate_box(&lo, &hi, f.min_degree().div_ceil(2), deg / 2, cap)?;
    MonomialBasis::new(n, monos)
}
