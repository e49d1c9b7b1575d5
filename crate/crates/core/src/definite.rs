//! Positive definite lattices: short vectors, halving, isometry of small
//! lattices.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;
use crate::lattice::{bigint_to_json, IntegerLattice};

/// Largest rank accepted by [`isometric_small`].
pub const MAX_ISOMETRY_RANK: usize = 8;

/// Norm bound of the theta-series prefilter in [`isometric_small`].
pub const THETA_BOUND: i64 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortVectorReport {
    pub bound: BigInt,
    /// norm -> number of vectors of that norm (zero excluded)
    pub counts: BTreeMap<BigInt, u64>,
    pub minimum: Option<BigInt>,
}

impl ShortVectorReport {
    pub fn count(&self, norm: i64) -> u64 {
        self.counts.get(&BigInt::from(norm)).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let counts: serde_json::Map<String, serde_json::Value> = self
            .counts
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::from(*v)))
            .collect();
        serde_json::json!({
            "bound": bigint_to_json(&self.bound),
            "minimum": self.minimum.as_ref().map(bigint_to_json),
            "counts": counts,
        })
    }
}

fn require_positive_definite(l: &IntegerLattice) -> Result<()> {
    if l.is_positive_definite() {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite)
    }
}

/// `q(x) = sum_i d_i (x_i + sum_{j>i} mu_ij x_j)^2` over the rationals.
struct Decomposition {
    d: Vec<BigRational>,
    mu: Vec<Vec<BigRational>>,
}

fn decompose(gram: &IntMatrix) -> Decomposition {
    let n = gram.nrows();
    let mut q: Vec<Vec<BigRational>> = (0..n)
        .map(|i| gram.row(i).iter().cloned().map(BigRational::from).collect())
        .collect();
    let mut d = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        let di = q[i][i].clone();
        for j in i + 1..n {
            mu[i][j] = &q[i][j] / &di;
        }
        for j in i + 1..n {
            for k in i + 1..n {
                let v = &q[i][j] * &q[i][k] / &di;
                q[j][k] -= v;
            }
        }
        d.push(di);
    }
    Decomposition { d, mu }
}

/// Calls `visit(x, norm)` for every nonzero `x` with `x^T G x <= bound`
/// (Fincke-Pohst with exact rational bounds).
fn enumerate<F: FnMut(&[BigInt], &BigInt)>(lattice: &IntegerLattice, bound: &BigInt, mut visit: F) {
    let n = lattice.rank();
    if n == 0 {
        return;
    }
    let dec = decompose(lattice.gram());
    let mut x = vec![BigInt::zero(); n];
    let budget = BigRational::from(bound.clone());
    let mut on_leaf = |x: &[BigInt]| visit(x, &lattice.norm(x));
    descend(&dec, n - 1, &budget, &mut x, &mut on_leaf);
}

fn descend<F: FnMut(&[BigInt])>(
    dec: &Decomposition,
    i: usize,
    budget: &BigRational,
    x: &mut Vec<BigInt>,
    visit: &mut F,
) {
    let n = x.len();
    let mut center = BigRational::zero();
    for j in i + 1..n {
        if !x[j].is_zero() {
            center -= &dec.mu[i][j] * BigRational::from(x[j].clone());
        }
    }
    let t = budget / &dec.d[i];
    // sqrt(t) < s + 1
    let s = t.floor().to_integer().sqrt() + 1u32;
    let lo = (&center - BigRational::from(s.clone())).ceil().to_integer();
    let hi = (&center + BigRational::from(s)).floor().to_integer();
    let mut xi = lo;
    while xi <= hi {
        let off = BigRational::from(xi.clone()) - &center;
        let used = &dec.d[i] * &off * &off;
        if used <= *budget {
            x[i] = xi.clone();
            let rest = budget - &used;
            if i == 0 {
                if x.iter().any(|c| !c.is_zero()) {
                    visit(x);
                }
            } else {
                descend(dec, i - 1, &rest, x, visit);
            }
        }
        xi += 1;
    }
    x[i] = BigInt::zero();
}

/// All nonzero vectors of norm at most `bound`, counted by norm.
pub fn short_vectors(lattice: &IntegerLattice, bound: &BigInt) -> Result<ShortVectorReport> {
    require_positive_definite(lattice)?;
    if !bound.is_positive() {
        return Err(Error::InvalidInput(format!("norm bound must be positive, got {bound}")));
    }
    let mut counts: BTreeMap<BigInt, u64> = BTreeMap::new();
    enumerate(lattice, bound, |_, norm| {
        *counts.entry(norm.clone()).or_default() += 1;
    });
    let minimum = counts.keys().next().cloned();
    Ok(ShortVectorReport {
        bound: bound.clone(),
        counts,
        minimum,
    })
}

/// The vectors themselves, with their norms.
pub fn short_vector_list(lattice: &IntegerLattice, bound: &BigInt) -> Result<Vec<(Vec<BigInt>, BigInt)>> {
    require_positive_definite(lattice)?;
    let mut out = Vec::new();
    enumerate(lattice, bound, |x, norm| out.push((x.to_vec(), norm.clone())));
    Ok(out)
}

/// `L(1/2)`, defined when all inner products are even and all norms are
/// divisible by 4.
pub fn half_rescale_check(lattice: &IntegerLattice) -> Result<IntegerLattice> {
    let g = lattice.gram();
    let n = lattice.rank();
    let two = BigInt::from(2);
    let four = BigInt::from(4);
    let mut out = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let ok = if i == j {
                g[(i, j)].is_multiple_of(&four)
            } else {
                g[(i, j)].is_multiple_of(&two)
            };
            if !ok {
                return Err(Error::NotHalfScalable { row: i, col: j });
            }
            out[(i, j)] = &g[(i, j)] / &two;
        }
    }
    IntegerLattice::new(out)
}

/// Isometry test for positive definite lattices of rank at most 8:
/// invariant prefilter, then a search for images of the basis of `a`
/// among the short vectors of `b`.
pub fn isometric_small(a: &IntegerLattice, b: &IntegerLattice) -> Result<bool> {
    for l in [a, b] {
        if l.rank() > MAX_ISOMETRY_RANK {
            return Err(Error::RankTooLarge {
                rank: l.rank(),
                max: MAX_ISOMETRY_RANK,
            });
        }
        require_positive_definite(l)?;
    }
    if a.rank() != b.rank() || a.determinant() != b.determinant() {
        return Ok(false);
    }
    let n = a.rank();
    if n == 0 {
        return Ok(true);
    }
    let theta = BigInt::from(THETA_BOUND);
    if short_vectors(a, &theta)?.counts != short_vectors(b, &theta)?.counts {
        return Ok(false);
    }

    let ga = a.gram();
    let max_norm = (0..n).map(|i| ga[(i, i)].clone()).max().expect("rank > 0");
    let vectors = short_vector_list(b, &max_norm)?;
    // b's Gram times each candidate, for cheap inner products
    let images: Vec<Vec<BigInt>> = vectors.iter().map(|(v, _)| b.gram().mul_vec(v)).collect();
    let mut candidates: Vec<(usize, Vec<usize>)> = (0..n)
        .map(|i| {
            let c = vectors
                .iter()
                .enumerate()
                .filter(|(_, (_, norm))| *norm == ga[(i, i)])
                .map(|(k, _)| k)
                .collect();
            (i, c)
        })
        .collect();
    // most constrained first
    candidates.sort_by_key(|(i, c)| (c.len(), *i));
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    Ok(assign(&candidates, &vectors, &images, ga, &mut chosen))
}

fn assign(
    order: &[(usize, Vec<usize>)],
    vectors: &[(Vec<BigInt>, BigInt)],
    images: &[Vec<BigInt>],
    ga: &IntMatrix,
    chosen: &mut Vec<usize>,
) -> bool {
    let depth = chosen.len();
    if depth == order.len() {
        return true;
    }
    let (pos, cands) = &order[depth];
    for &c in cands {
        let ok = chosen.iter().enumerate().all(|(k, &prev)| {
            let other = order[k].0;
            let ip: BigInt = vectors[c].0.iter().zip(&images[prev]).map(|(x, y)| x * y).sum();
            ip == ga[(*pos, other)]
        });
        if !ok {
            continue;
        }
        chosen.push(c);
        if assign(order, vectors, images, ga, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}
