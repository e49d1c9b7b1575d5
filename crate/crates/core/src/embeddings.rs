//! Overlattices from isotropic glue, orthogonal complements and primitivity.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::discform::{self, find_anti_isometry};
use crate::error::{Error, Result};
use crate::intmat::{self, IntMatrix};
use crate::lattice::IntegerLattice;

/// A sublattice of `ambient`, spanned by integer coordinate rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SublatticeBasis {
    ambient: IntegerLattice,
    basis: IntMatrix,
}

impl SublatticeBasis {
    pub fn new(ambient: IntegerLattice, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = ambient.rank();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: r.len() });
        }
        let basis = IntMatrix::from_rows(rows, n);
        if intmat::rank(&basis) != basis.nrows() {
            return Err(Error::DependentVectors);
        }
        Ok(SublatticeBasis { ambient, basis })
    }

    pub fn from_i64(ambient: IntegerLattice, rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            ambient,
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn ambient(&self) -> &IntegerLattice {
        &self.ambient
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.nrows()
    }

    /// The Gram matrix of the sublattice itself.
    pub fn lattice(&self) -> IntegerLattice {
        self.ambient
            .in_basis(&self.basis)
            .expect("basis rows have ambient dimension")
    }

    /// `(Q span) ∩ ambient`, basis in Hermite normal form.
    pub fn saturation(&self) -> SublatticeBasis {
        SublatticeBasis {
            ambient: self.ambient.clone(),
            basis: intmat::saturation(&self.basis),
        }
    }

    pub fn is_primitive(&self) -> bool {
        is_primitive(self)
    }
}

/// True iff the span is saturated in the ambient lattice.
pub fn is_primitive(sub: &SublatticeBasis) -> bool {
    let snf = intmat::smith_normal_form(&sub.basis);
    snf.rank() == sub.rank() && snf.diagonal().iter().all(|d| d.is_zero() || d.is_one())
}

/// Basis of the orthogonal complement `{x : x.s = 0 for all s in sub}`.
/// Non-primitive input is accepted; the complement only sees the
/// saturation.
pub fn complement_basis(sub: &SublatticeBasis) -> Result<SublatticeBasis> {
    if !sub.ambient.is_nondegenerate() {
        return Err(Error::Degenerate);
    }
    let sg = sub.basis.mul(sub.ambient.gram());
    Ok(SublatticeBasis {
        ambient: sub.ambient.clone(),
        basis: intmat::integer_kernel(&sg),
    })
}

pub fn orthogonal_complement(sub: &SublatticeBasis) -> Result<IntegerLattice> {
    Ok(complement_basis(sub)?.lattice())
}

/// A base lattice together with dual vectors spanning a glue group `H`.
#[derive(Debug, Clone)]
pub struct GlueData {
    pub base: IntegerLattice,
    pub generators: Vec<Vec<BigRational>>,
}

/// The overlattice generated by `base` and the glue vectors, in a basis
/// obtained from the Hermite normal form of the generating set.
pub fn overlattice(glue: &GlueData) -> Result<IntegerLattice> {
    Ok(overlattice_with_index(glue)?.0)
}

/// As [`overlattice`], also returning the index `|H|`.
pub fn overlattice_with_index(glue: &GlueData) -> Result<(IntegerLattice, BigInt)> {
    let base = &glue.base;
    let n = base.rank();
    if !base.is_even() {
        return Err(Error::OddLattice);
    }
    if !base.is_nondegenerate() {
        return Err(Error::Degenerate);
    }
    let gram = base.gram();
    let to_rat = |x: &BigInt| BigRational::from(x.clone());
    let pair = |x: &[BigRational], y: &[BigRational]| -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..n {
            for j in 0..n {
                if !gram[(i, j)].is_zero() {
                    acc += &x[i] * to_rat(&gram[(i, j)]) * &y[j];
                }
            }
        }
        acc
    };
    for (a, g) in glue.generators.iter().enumerate() {
        if g.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.len() });
        }
        for i in 0..n {
            let mut acc = BigRational::zero();
            for j in 0..n {
                acc += to_rat(&gram[(i, j)]) * &g[j];
            }
            if !acc.is_integer() {
                return Err(Error::NotFiniteIndex(format!("generator {a} pairs to {acc} with basis vector {i}")));
            }
        }
        let norm = pair(g, g);
        if !norm.is_integer() || !norm.to_integer().is_even() {
            return Err(Error::NotIsotropic(format!("generator {a} has norm {norm}")));
        }
        for (c, h) in glue.generators.iter().enumerate().skip(a + 1) {
            let ip = pair(g, h);
            if !ip.is_integer() {
                return Err(Error::NotIsotropic(format!("generators {a} and {c} pair to {ip}")));
            }
        }
    }
    let den = glue
        .generators
        .iter()
        .fold(BigInt::one(), |acc, g| num_integer::lcm(acc, intmat::common_denominator(g)));
    let mut rows: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut r = vec![BigInt::zero(); n];
            r[i] = den.clone();
            r
        })
        .collect();
    for g in &glue.generators {
        rows.push(g.iter().map(|x| (x * BigRational::from(den.clone())).to_integer()).collect());
    }
    let basis = intmat::hermite_normal_form(&IntMatrix::from_rows(rows, n));
    debug_assert_eq!(basis.nrows(), n);
    let raw = basis.mul(gram).mul(&basis.transpose());
    let den2 = &den * &den;
    let mut out = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            debug_assert!((&raw[(i, j)] % &den2).is_zero());
            out[(i, j)] = &raw[(i, j)] / &den2;
        }
    }
    let index = num_traits::pow(den, n) / intmat::determinant(&basis).abs();
    Ok((IntegerLattice::new(out)?, index))
}

/// Glue `a ⊕ b` along the graph of an anti-isometry between the
/// discriminant forms (or their `p`-primary parts when `prime` is given).
/// Returns `None` when no anti-isometry exists.
pub fn anti_isometry_glue(
    a: &IntegerLattice,
    b: &IntegerLattice,
    prime: Option<u64>,
    limit: u64,
) -> Result<Option<GlueData>> {
    let mut la = discform::discriminant_form_lifted(a)?;
    let mut lb = discform::discriminant_form_lifted(b)?;
    if let Some(p) = prime {
        la = la.p_primary_part(p);
        lb = lb.p_primary_part(p);
    }
    let Some(images) = find_anti_isometry(&la.form, &lb.form, limit)? else {
        return Ok(None);
    };
    let generators = la
        .lifts
        .iter()
        .zip(&images)
        .map(|(x, y)| {
            let mut v = x.clone();
            v.extend(lb.lift(y));
            v
        })
        .collect();
    Ok(Some(GlueData {
        base: a.direct_sum(b),
        generators,
    }))
}
