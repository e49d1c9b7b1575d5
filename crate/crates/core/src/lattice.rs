//! Integral lattices given by a symmetric Gram matrix.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmat::{self, IntMatrix, SnfResult};

/// A finite-rank lattice `Z^n` with a symmetric integral bilinear form.
///
/// Evenness and the determinant are computed once at construction.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerLattice {
    gram: IntMatrix,
    det: BigInt,
    even: bool,
}

/// Counts of positive and negative eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub t_plus: usize,
    pub t_minus: usize,
}

impl Signature {
    pub fn new(t_plus: usize, t_minus: usize) -> Self {
        Signature { t_plus, t_minus }
    }

    /// `t_plus - t_minus`.
    pub fn difference(&self) -> i64 {
        self.t_plus as i64 - self.t_minus as i64
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.t_plus, self.t_minus)
    }
}

/// A finite abelian group by its invariant factors (all > 1, each dividing
/// the next).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    invariant_factors: Vec<BigInt>,
}

impl FiniteAbelianGroup {
    /// Normalizes an arbitrary list of cyclic orders into invariant factors.
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Self {
        let diag = IntMatrix::from_diagonal(orders);
        let snf = intmat::smith_normal_form(&diag);
        FiniteAbelianGroup {
            invariant_factors: snf.diagonal().into_iter().filter(|d| *d > BigInt::one()).collect(),
        }
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup {
            invariant_factors: Vec::new(),
        }
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    /// Minimal number of generators.
    pub fn length(&self) -> usize {
        self.invariant_factors.len()
    }

    /// The `p`-Sylow subgroup.
    pub fn p_part(&self, p: u64) -> FiniteAbelianGroup {
        let p = BigInt::from(p);
        let factors = self
            .invariant_factors
            .iter()
            .map(|n| {
                let mut n = n.clone();
                let mut pp = BigInt::one();
                while (&n % &p).is_zero() {
                    n /= &p;
                    pp *= &p;
                }
                pp
            })
            .filter(|pp| *pp > BigInt::one())
            .collect();
        FiniteAbelianGroup {
            invariant_factors: factors,
        }
    }

    /// True iff the group is `(Z/2)^l` for some `l >= 0`.
    pub fn is_two_elementary(&self) -> bool {
        self.invariant_factors.iter().all(|n| *n == BigInt::from(2))
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariant_factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .invariant_factors
            .iter()
            .map(|n| format!("Z/{n}"))
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

impl IntegerLattice {
    /// Validates a Gram matrix. The empty matrix is the rank-0 lattice.
    pub fn new(gram: IntMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::NotSquare {
                rows: gram.nrows(),
                cols: gram.ncols(),
            });
        }
        let n = gram.nrows();
        for i in 0..n {
            for j in i + 1..n {
                if gram[(i, j)] != gram[(j, i)] {
                    return Err(Error::NonSymmetric { row: i, col: j });
                }
            }
        }
        let even = (0..n).all(|i| gram[(i, i)].is_even());
        let det = intmat::determinant(&gram);
        Ok(IntegerLattice { gram, det, even })
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(IntMatrix::from_rows(rows, n))
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn zero() -> Self {
        IntegerLattice {
            gram: IntMatrix::zeros(0, 0),
            det: BigInt::one(),
            even: true,
        }
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.det.is_zero()
    }

    pub fn determinant(&self) -> &BigInt {
        &self.det
    }

    pub fn inner(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        self.gram.bilinear(x, y)
    }

    pub fn norm(&self, x: &[BigInt]) -> BigInt {
        self.gram.bilinear(x, x)
    }

    /// Signature by exact congruence diagonalization over the rationals.
    pub fn signature(&self) -> Result<Signature> {
        let diag = congruence_diagonal(&self.gram);
        if diag.iter().any(|d| d.is_zero()) {
            return Err(Error::Degenerate);
        }
        let t_plus = diag.iter().filter(|d| d.is_positive()).count();
        Ok(Signature::new(t_plus, diag.len() - t_plus))
    }

    pub fn is_positive_definite(&self) -> bool {
        matches!(self.signature(), Ok(s) if s.t_minus == 0)
    }

    pub fn direct_sum(&self, other: &IntegerLattice) -> IntegerLattice {
        IntegerLattice {
            gram: self.gram.block_diag(&other.gram),
            det: &self.det * &other.det,
            even: self.even && other.even,
        }
    }

    /// `L(a)`: the Gram matrix multiplied by `a`.
    pub fn rescale(&self, a: &BigInt) -> Result<IntegerLattice> {
        if a.is_zero() {
            return Err(Error::ZeroScale);
        }
        let gram = self.gram.scale(a);
        let det = &self.det * num_traits::pow(a.clone(), self.rank());
        let even = self.even || a.is_even();
        Ok(IntegerLattice { gram, det, even })
    }

    pub fn smith_normal_form(&self) -> SnfResult {
        intmat::smith_normal_form(&self.gram)
    }

    /// `L*/L` from the Smith form of the Gram matrix.
    pub fn discriminant_group(&self) -> Result<FiniteAbelianGroup> {
        if !self.is_nondegenerate() {
            return Err(Error::Degenerate);
        }
        let snf = self.smith_normal_form();
        Ok(FiniteAbelianGroup {
            invariant_factors: snf
                .diagonal()
                .into_iter()
                .filter(|d| *d > BigInt::one())
                .collect(),
        })
    }

    /// The same lattice in the basis given by the rows of `basis`
    /// (`B G B^T`). `basis` need not be unimodular.
    pub fn in_basis(&self, basis: &IntMatrix) -> Result<IntegerLattice> {
        if basis.ncols() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: basis.ncols(),
            });
        }
        IntegerLattice::new(basis.mul(&self.gram).mul(&basis.transpose()))
    }

    /// JSON form `{"gram": [[...], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .gram
            .to_rows()
            .iter()
            .map(|r| serde_json::Value::Array(r.iter().map(bigint_to_json).collect()))
            .collect();
        serde_json::json!({ "gram": rows })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let gram = value
            .get("gram")
            .ok_or_else(|| Error::InvalidInput("missing `gram` field".into()))?;
        let rows = gram
            .as_array()
            .ok_or_else(|| Error::InvalidInput("`gram` must be an array".into()))?;
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row
                .as_array()
                .ok_or_else(|| Error::InvalidInput("Gram rows must be arrays".into()))?;
            out.push(row.iter().map(bigint_from_json).collect::<Result<Vec<_>>>()?);
        }
        Self::from_rows(out)
    }
}

impl fmt::Debug for IntegerLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegerLattice({:?})", self.gram)
    }
}

/// Integers go out as JSON numbers when they fit in 64 bits, otherwise as
/// decimal strings.
pub fn bigint_to_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(x.to_string()),
    }
}

pub fn bigint_from_json(v: &serde_json::Value) -> Result<BigInt> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(Error::InvalidInput(format!("non-integer entry {n}")))
            }
        }
        serde_json::Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad integer string `{s}`"))),
        other => Err(Error::InvalidInput(format!("expected integer, got {other}"))),
    }
}

/// Diagonal of a congruence diagonalization `P G P^T`. When every remaining
/// diagonal entry vanishes but an off-diagonal one does not, row/column `j`
/// is added to `i` to expose the pivot `2 g_ij`.
fn congruence_diagonal(gram: &IntMatrix) -> Vec<BigRational> {
    let n = gram.nrows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| gram.row(i).iter().cloned().map(BigRational::from).collect())
        .collect();
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = (k..n).find(|&i| !a[i][i].is_zero());
        let pivot = match pivot {
            Some(p) => Some(p),
            None => {
                let pair = (k..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !a[i][j].is_zero());
                pair.map(|(i, j)| {
                    for c in 0..n {
                        let v = a[j][c].clone();
                        a[i][c] += v;
                    }
                    for r in 0..n {
                        let v = a[r][j].clone();
                        a[r][i] += v;
                    }
                    i
                })
            }
        };
        let Some(p) = pivot else {
            // remaining block is identically zero
            diag.extend((k..n).map(|_| BigRational::zero()));
            break;
        };
        a.swap(k, p);
        for row in a.iter_mut() {
            row.swap(k, p);
        }
        let piv = a[k][k].clone();
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = &a[r][k] / &piv;
            for c in k..n {
                let v = &a[k][c] * &f;
                a[r][c] -= v;
            }
            for rr in k..n {
                let v = &a[rr][k] * &f;
                a[rr][r] -= v;
            }
        }
        diag.push(piv);
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(rows: &[Vec<i64>]) -> IntegerLattice {
        IntegerLattice::from_i64(rows).unwrap()
    }

    #[test]
    fn validate_examples() {
        let a2 = lat(&[vec![2, 1], vec![1, 2]]);
        assert!(a2.is_even() && a2.is_nondegenerate());
        assert_eq!(
            IntegerLattice::from_i64(&[vec![2, 1], vec![0, 2]]).unwrap_err().code(),
            "NonSymmetric"
        );
        let one = lat(&[vec![1]]);
        assert!(!one.is_even());
        assert_eq!(IntegerLattice::from_rows(vec![]).unwrap().rank(), 0);
    }

    #[test]
    fn signature_examples() {
        assert_eq!(lat(&[vec![2, 1], vec![1, 2]]).signature().unwrap(), Signature::new(2, 0));
        assert_eq!(lat(&[vec![0, 1], vec![1, 0]]).signature().unwrap(), Signature::new(1, 1));
        assert_eq!(lat(&[vec![0, 0], vec![0, 0]]).signature().unwrap_err(), Error::Degenerate);
        // all-zero diagonal needs the off-diagonal repair
        let h = lat(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        assert_eq!(h.signature().unwrap(), Signature::new(1, 2));
    }

    #[test]
    fn determinant_and_rescale() {
        let u = lat(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(*u.determinant(), BigInt::from(-1));
        let uu = u.direct_sum(&u);
        assert_eq!(uu.rank(), 4);
        assert_eq!(*uu.determinant(), BigInt::one());
        assert_eq!(u.direct_sum(&IntegerLattice::zero()), u);
        let a1 = lat(&[vec![2]]);
        assert_eq!(a1.rescale(&BigInt::from(-1)).unwrap(), lat(&[vec![-2]]));
        assert_eq!(a1.rescale(&BigInt::one()).unwrap(), a1);
        assert_eq!(a1.rescale(&BigInt::zero()).unwrap_err(), Error::ZeroScale);
        // rescaling by an even factor makes an odd lattice even
        let one = lat(&[vec![1]]);
        assert!(one.rescale(&BigInt::from(2)).unwrap().is_even());
    }

    #[test]
    fn discriminant_groups() {
        let a2 = lat(&[vec![2, 1], vec![1, 2]]);
        let g = a2.discriminant_group().unwrap();
        assert_eq!(g.invariant_factors(), &[BigInt::from(3)]);
        assert_eq!(g.length(), 1);
        let g = FiniteAbelianGroup::from_cyclic_orders(&[BigInt::from(2), BigInt::from(3), BigInt::from(2)]);
        assert_eq!(g.invariant_factors(), &[BigInt::from(2), BigInt::from(6)]);
        assert_eq!(g.p_part(2).invariant_factors(), &[BigInt::from(2), BigInt::from(2)]);
        assert_eq!(g.p_part(3).invariant_factors(), &[BigInt::from(3)]);
        assert_eq!(g.to_string(), "Z/2 x Z/6");
    }

    #[test]
    fn json_round_trip() {
        let a2 = lat(&[vec![2, 1], vec![1, 2]]);
        let v = a2.to_json();
        assert_eq!(v.to_string(), r#"{"gram":[[2,1],[1,2]]}"#);
        assert_eq!(IntegerLattice::from_json(&v).unwrap(), a2);
        let big: serde_json::Value =
            serde_json::from_str(r#"{"gram":[["123456789012345678901234567890"]]}"#).unwrap();
        let l = IntegerLattice::from_json(&big).unwrap();
        assert_eq!(l.to_json(), big);
    }
}
