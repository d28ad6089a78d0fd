//! Integral LLL reduction and simultaneous Diophantine approximation.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::bigfloat::BigFloat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("lattice basis rows are linearly dependent")]
    Dependent,
    #[error("Lovász constant must lie in (1/4, 1]")]
    BadDelta,
    #[error("lattice rows have inconsistent lengths")]
    Ragged,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nearest integer to `n / d` for `d > 0`, halves rounded up.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (n * &two + d).div_floor(&(d * &two))
}

/// LLL-reduces the rows of `basis` with Lovász constant `delta`, in exact
/// integer arithmetic (integral variant with subdeterminants `d_i`).
pub fn lll_reduce(basis: &[Vec<BigInt>], delta: &BigRational) -> Result<Vec<Vec<BigInt>>, LatticeError> {
    let quarter = BigRational::new(1.into(), 4.into());
    if delta <= &quarter || delta > &BigRational::one() {
        return Err(LatticeError::BadDelta);
    }
    let n = basis.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dim = basis[0].len();
    if basis.iter().any(|r| r.len() != dim) {
        return Err(LatticeError::Ragged);
    }
    let (dp, dq) = (delta.numer().clone(), delta.denom().clone());
    let mut b: Vec<Vec<BigInt>> = basis.to_vec();
    // 1-based: d[0] = 1, d[i] for row i-1
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n + 1]; n + 1];
    d[0] = BigInt::one();
    d[1] = dot(&b[0], &b[0]);
    if d[1].is_zero() {
        return Err(LatticeError::Dependent);
    }
    let mut k = 2usize;
    let mut kmax = 1usize;

    let red = |b: &mut Vec<Vec<BigInt>>, lam: &mut Vec<Vec<BigInt>>, d: &[BigInt], k: usize, l: usize| {
        if (&lam[k][l] * BigInt::from(2)).abs() > d[l] {
            let q = round_div(&lam[k][l], &d[l]);
            let bl = b[l - 1].clone();
            for (x, y) in b[k - 1].iter_mut().zip(&bl) {
                *x -= &q * y;
            }
            lam[k][l] -= &q * &d[l];
            for i in 1..l {
                let t = &q * &lam[l][i];
                lam[k][i] -= t;
            }
        }
    };

    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&b[k - 1], &b[j - 1]);
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(LatticeError::Dependent);
                    }
                    d[k] = u;
                }
            }
        }
        loop {
            red(&mut b, &mut lam, &d, k, k - 1);
            let lhs = &dq * &d[k] * &d[k - 2];
            let rhs = &dp * &d[k - 1] * &d[k - 1] - &dq * &lam[k][k - 1] * &lam[k][k - 1];
            if lhs >= rhs {
                break;
            }
            // swap rows k-1 and k
            b.swap(k - 1, k - 2);
            for j in 1..k - 1 {
                let t = lam[k][j].clone();
                lam[k][j] = core::mem::replace(&mut lam[k - 1][j], t);
            }
            let l = lam[k][k - 1].clone();
            let bb = (&d[k - 2] * &d[k] + &l * &l) / &d[k - 1];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k] * &lam[i][k - 1] - &l * &t) / &d[k - 1];
                lam[i][k - 1] = (&bb * &t + &l * &lam[i][k]) / &d[k];
            }
            d[k - 1] = bb;
            if k > 2 {
                k -= 1;
            }
        }
        for l in (1..k - 1).rev() {
            red(&mut b, &mut lam, &d, k, l);
        }
        k += 1;
    }
    Ok(b)
}

/// Result of [`simultaneous_diophantine`]: `vᵢ ≈ pᵢ / q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiophantineApprox {
    pub q: BigInt,
    pub p: Vec<BigInt>,
    /// `maxᵢ |q·vᵢ − pᵢ|`.
    pub error: BigRational,
}

impl DiophantineApprox {
    pub fn values(&self) -> Vec<BigRational> {
        self.p.iter().map(|p| BigRational::new(p.clone(), self.q.clone())).collect()
    }
}

/// Default enumeration budget of [`simultaneous_diophantine`].
pub const ENUMERATION_NODE_CAP: usize = 1_000_000;
const SCALE_EXTRA_BITS: u32 = 24;

fn nearest(x: &BigRational) -> BigInt {
    round_div(x.numer(), x.denom())
}

fn evaluate(v: &[BigRational], q: &BigInt) -> DiophantineApprox {
    let qr = BigRational::from_integer(q.clone());
    let mut p = Vec::with_capacity(v.len());
    let mut err = BigRational::zero();
    for x in v {
        let t = &qr * x;
        let pi = nearest(&t);
        let e = (t - BigRational::from_integer(pi.clone())).abs();
        if e > err {
            err = e;
        }
        p.push(pi);
    }
    DiophantineApprox { q: q.clone(), p, error: err }
}

fn better(a: &DiophantineApprox, b: &DiophantineApprox) -> bool {
    a.error < b.error || (a.error == b.error && a.q < b.q)
}

/// Common denominator `q ≤ max_q` minimizing `maxᵢ |q·vᵢ − round(q·vᵢ)|`
/// (smallest `q` on ties).
///
/// Embeds the problem in the lattice spanned by `(C, S·v)` and `S·eᵢ`, reduces
/// it with LLL, then enumerates every lattice vector short enough to beat the
/// best denominator seen so far. Enumeration stops early after a fixed node
/// budget, in which case the best denominator found is returned.
pub fn simultaneous_diophantine(v: &[BigRational], max_q: u64, delta: &BigRational) -> DiophantineApprox {
    simultaneous_diophantine_capped(v, max_q, delta, ENUMERATION_NODE_CAP)
}

/// [`simultaneous_diophantine`] with an explicit enumeration node budget;
/// `0` keeps only the LLL-reduced rows.
pub fn simultaneous_diophantine_capped(
    v: &[BigRational],
    max_q: u64,
    delta: &BigRational,
    node_cap: usize,
) -> DiophantineApprox {
    assert!(max_q >= 1, "denominator bound must be at least 1");
    let n = v.len();
    let mut best = evaluate(v, &BigInt::one());
    if n == 0 || best.error.is_zero() || max_q == 1 {
        return best;
    }
    let qmax = BigInt::from(max_q);
    let q_bits = 64 - max_q.leading_zeros();
    let scale = BigInt::one() << (2 * q_bits + SCALE_EXTRA_BITS) as usize;
    let scale_f = libm::ldexp(1.0, (2 * q_bits + SCALE_EXTRA_BITS) as i32);
    let c_f = libm::round(scale_f / libm::pow(max_q as f64, 1.0 + 1.0 / n as f64)).max(1.0);
    let c = BigInt::from_f64(c_f).expect("finite scale");
    let scale_r = BigRational::from_integer(scale.clone());

    let mut rows = Vec::with_capacity(n + 1);
    let mut first = vec![c.clone()];
    first.extend(v.iter().map(|x| nearest(&(x * &scale_r))));
    rows.push(first);
    for i in 0..n {
        let mut r = vec![BigInt::zero(); n + 1];
        r[i + 1] = scale.clone();
        rows.push(r);
    }
    let reduced = lll_reduce(&rows, delta).expect("embedding lattice has full rank");

    let mut seen: BTreeSet<BigInt> = BTreeSet::new();
    let mut consider = |w0: &BigInt, best: &mut DiophantineApprox| {
        if !w0.is_multiple_of(&c) {
            return;
        }
        let q = (w0 / &c).abs();
        if q.is_zero() || q > qmax || !seen.insert(q.clone()) {
            return;
        }
        let cand = evaluate(v, &q);
        if better(&cand, best) {
            *best = cand;
        }
    };
    for r in &reduced {
        consider(&r[0], &mut best);
    }
    if best.error.is_zero() {
        return best;
    }

    // Radius covering the lattice vector of any denominator that beats `best`.
    if node_cap == 0 {
        return best;
    }
    let e_best = BigFloat::from_rational(&best.error, 64).to_f64();
    let qc = max_q as f64 * c_f;
    let per_coord = scale_f * e_best + max_q as f64 / 2.0 + 1.0;
    let radius2 = (qc * qc + n as f64 * per_coord * per_coord) * (1.0 + 1e-9) + 1.0;

    let dim = n + 1;
    let bf: Vec<Vec<f64>> = reduced.iter().map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::MAX)).collect()).collect();
    let (mu, bstar2) = gram_schmidt_f64(&bf);
    let mut coeffs = vec![0i64; dim];
    let mut nodes = 0usize;
    let mut visit = |x: &[i64]| {
        let mut w0 = BigInt::zero();
        for (xi, row) in x.iter().zip(&reduced) {
            if *xi != 0 {
                w0 += BigInt::from(*xi) * &row[0];
            }
        }
        consider(&w0, &mut best);
    };
    enumerate(dim - 1, &mu, &bstar2, radius2, 0.0, &mut coeffs, &mut nodes, node_cap, &mut visit);
    best
}

/// [`simultaneous_diophantine`] on the exact binary values of `v`.
pub fn simultaneous_diophantine_f64(v: &[f64], max_q: u64, delta: &BigRational) -> DiophantineApprox {
    let exact: Vec<BigRational> = v.iter().map(|x| BigFloat::from_f64(*x).to_rational()).collect();
    simultaneous_diophantine(&exact, max_q, delta)
}

fn gram_schmidt_f64(b: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = b.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i].clone();
        for j in 0..i {
            let m = b[i].iter().zip(&star[j]).map(|(x, y)| x * y).sum::<f64>() / norms[j];
            mu[i][j] = m;
            for (sk, tk) in s.iter_mut().zip(&star[j]) {
                *sk -= m * tk;
            }
        }
        norms[i] = s.iter().map(|x| x * x).sum();
        star.push(s);
    }
    (mu, norms)
}

/// Collects every nonzero coefficient vector whose lattice vector has squared
/// norm at most `radius2`.
#[allow(clippy::too_many_arguments)]
fn enumerate(
    level: usize,
    mu: &[Vec<f64>],
    bstar2: &[f64],
    radius2: f64,
    partial: f64,
    x: &mut Vec<i64>,
    nodes: &mut usize,
    node_cap: usize,
    visit: &mut dyn FnMut(&[i64]),
) {
    let n = x.len();
    let center: f64 = -(level + 1..n).map(|j| x[j] as f64 * mu[j][level]).sum::<f64>();
    let room = radius2 - partial;
    if room < 0.0 {
        return;
    }
    let half_width = libm::sqrt(room / bstar2[level]);
    let lo = libm::ceil(center - half_width) as i64;
    let hi = libm::floor(center + half_width) as i64;
    for xi in lo..=hi {
        *nodes += 1;
        if *nodes > node_cap {
            return;
        }
        x[level] = xi;
        let diff = xi as f64 - center;
        let next = partial + diff * diff * bstar2[level];
        if level == 0 {
            if x.iter().any(|&v| v != 0) {
                visit(x);
            }
        } else {
            enumerate(level - 1, mu, bstar2, radius2, next, x, nodes, node_cap, visit);
        }
    }
    x[level] = 0;
}
