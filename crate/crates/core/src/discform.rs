//! Finite quadratic forms `q: A -> Q/2Z` on finite abelian groups, in
//! particular the discriminant form `q_L` on `A_L = L*/L` of an even lattice.
//!
//! A form is stored on a fixed generating system `g_1, ..., g_k` of cyclic
//! orders `n_1, ..., n_k`. Values are kept as integer numerators over the
//! common denominator `N = lcm(2 n_i)`: `q(g_i) = q_i / N mod 2` and
//! `b(g_i, g_j) = b_ij / N mod 1`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intmat::{self, IntMatrix};
use crate::lattice::{FiniteAbelianGroup, IntegerLattice};

/// Default bound on the group order for brute-force routines.
pub const DEFAULT_MAX_GROUP_ORDER: u64 = 1 << 16;

/// An element of a finite form's group, coordinates reduced into `[0, n_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub Vec<u64>);

impl GroupElement {
    pub fn zero(k: usize) -> Self {
        GroupElement(vec![0; k])
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteQuadraticForm {
    orders: Vec<u64>,
    denom: u64,
    q: Vec<u64>,
    b: Vec<Vec<u64>>,
}

fn rational_mod(x: &BigRational, m: i64) -> BigRational {
    let m = BigRational::from(BigInt::from(m));
    x - (x / &m).floor() * &m
}

impl FiniteQuadraticForm {
    /// Builds a form from generator orders and rational values, checking
    /// well-definedness. Values are reduced mod 2 (q) and mod 1 (b).
    pub fn from_rationals(
        orders: Vec<u64>,
        q: Vec<BigRational>,
        b: Vec<Vec<BigRational>>,
    ) -> Result<Self> {
        let k = orders.len();
        if q.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: q.len() });
        }
        if b.len() != k || b.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidForm("b must be a k x k matrix".into()));
        }
        if let Some(n) = orders.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidForm(format!("generator order {n} < 2")));
        }
        let denom = orders.iter().fold(2u64, |acc, &n| acc.lcm(&(2 * n)));
        let big_denom = BigRational::from(BigInt::from(denom));
        let mut qn = Vec::with_capacity(k);
        for (i, qi) in q.iter().enumerate() {
            let n = BigRational::from(BigInt::from(orders[i]));
            let nq = qi * &n;
            if !nq.is_integer() {
                return Err(Error::InvalidForm(format!("n_{i} q(g_{i}) is not integral")));
            }
            if orders[i] % 2 == 1 && !nq.to_integer().is_even() {
                return Err(Error::InvalidForm(format!("q(n_{i} g_{i}) is not 0 mod 2")));
            }
            let v = rational_mod(qi, 2) * &big_denom;
            qn.push(v.to_integer().to_u64().expect("reduced value fits"));
        }
        let mut bn = vec![vec![0u64; k]; k];
        for i in 0..k {
            for j in 0..k {
                if !rational_mod(&(&b[i][j] - &b[j][i]), 1).is_zero() {
                    return Err(Error::InvalidForm("b is not symmetric".into()));
                }
                let n = BigRational::from(BigInt::from(orders[i]));
                if !(&b[i][j] * &n).is_integer() {
                    return Err(Error::InvalidForm(format!("n_{i} b(g_{i}, g_{j}) is not integral")));
                }
                let v = rational_mod(&b[i][j], 1) * &big_denom;
                bn[i][j] = v.to_integer().to_u64().expect("reduced value fits");
            }
            if (qn[i] % denom) != bn[i][i] {
                return Err(Error::InvalidForm(format!("b(g_{i}, g_{i}) != q(g_{i}) mod 1")));
            }
        }
        Ok(FiniteQuadraticForm {
            orders,
            denom,
            q: qn,
            b: bn,
        })
    }

    pub fn trivial() -> Self {
        FiniteQuadraticForm {
            orders: Vec::new(),
            denom: 2,
            q: Vec::new(),
            b: Vec::new(),
        }
    }

    /// Generator orders `n_i`.
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    /// `q(g_i)` in `[0, 2)`.
    pub fn q_value(&self, i: usize) -> BigRational {
        BigRational::new(BigInt::from(self.q[i]), BigInt::from(self.denom))
    }

    /// `b(g_i, g_j)` in `[0, 1)`.
    pub fn b_value(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(BigInt::from(self.b[i][j]), BigInt::from(self.denom))
    }

    pub fn group(&self) -> FiniteAbelianGroup {
        let orders: Vec<BigInt> = self.orders.iter().map(|&n| BigInt::from(n)).collect();
        FiniteAbelianGroup::from_cyclic_orders(&orders)
    }

    pub fn order(&self) -> u128 {
        self.orders.iter().map(|&n| n as u128).product()
    }

    /// Reduces coordinates into `[0, n_i)`.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.orders.len() {
            return Err(Error::DimensionMismatch {
                expected: self.orders.len(),
                got: coords.len(),
            });
        }
        Ok(GroupElement(
            coords
                .iter()
                .zip(&self.orders)
                .map(|(&c, &n)| c.rem_euclid(n as i64) as u64)
                .collect(),
        ))
    }

    fn check_element(&self, x: &GroupElement) -> Result<()> {
        if x.0.len() != self.orders.len() {
            return Err(Error::DimensionMismatch {
                expected: self.orders.len(),
                got: x.0.len(),
            });
        }
        Ok(())
    }

    /// Numerator of `q(x)` over `N`, in `[0, 2N)`.
    fn q_num(&self, x: &[u64]) -> u64 {
        let two_n = 2 * self.denom as u128;
        let mut acc: u128 = 0;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            let xi = x[i] as u128 % two_n;
            acc = (acc + xi * xi % two_n * self.q[i] as u128) % two_n;
            for j in i + 1..x.len() {
                if x[j] == 0 {
                    continue;
                }
                let t = xi * (x[j] as u128 % two_n) % two_n;
                acc = (acc + 2 * t * self.b[i][j] as u128) % two_n;
            }
        }
        acc as u64
    }

    /// Numerator of `b(x, y)` over `N`, in `[0, N)`.
    fn b_num(&self, x: &[u64], y: &[u64]) -> u64 {
        let n = self.denom as u128;
        let mut acc: u128 = 0;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            for j in 0..y.len() {
                if y[j] == 0 {
                    continue;
                }
                let t = (x[i] as u128 % n) * (y[j] as u128 % n) % n;
                acc = (acc + t * self.b[i][j] as u128) % n;
            }
        }
        acc as u64
    }

    /// `q(x)` in `[0, 2)`.
    pub fn evaluate(&self, x: &GroupElement) -> Result<BigRational> {
        self.check_element(x)?;
        Ok(BigRational::new(BigInt::from(self.q_num(&x.0)), BigInt::from(self.denom)))
    }

    /// `b(x, y)` in `[0, 1)`.
    pub fn bilinear(&self, x: &GroupElement, y: &GroupElement) -> Result<BigRational> {
        self.check_element(x)?;
        self.check_element(y)?;
        Ok(BigRational::new(BigInt::from(self.b_num(&x.0, &y.0)), BigInt::from(self.denom)))
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.orders)
                .map(|((a, b), n)| (a + b) % n)
                .collect(),
        )
    }

    pub fn scalar_mul(&self, k: u64, x: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&self.orders)
                .map(|(&a, &n)| ((a as u128 * k as u128) % n as u128) as u64)
                .collect(),
        )
    }

    /// All group elements in lexicographic coordinate order.
    pub fn elements(&self) -> ElementIter<'_> {
        ElementIter {
            orders: &self.orders,
            next: Some(vec![0; self.orders.len()]),
        }
    }

    fn ensure_within(&self, limit: u64) -> Result<()> {
        let order = self.order();
        if order > limit as u128 {
            return Err(Error::GroupTooLarge {
                order: order.to_string(),
                limit,
            });
        }
        Ok(())
    }

    /// `-q`.
    pub fn negate(&self) -> FiniteQuadraticForm {
        let two_n = 2 * self.denom;
        FiniteQuadraticForm {
            orders: self.orders.clone(),
            denom: self.denom,
            q: self.q.iter().map(|&v| (two_n - v) % two_n).collect(),
            b: self
                .b
                .iter()
                .map(|r| r.iter().map(|&v| (self.denom - v) % self.denom).collect())
                .collect(),
        }
    }

    /// Orthogonal direct sum; generators of `self` come first.
    pub fn orthogonal_sum(&self, other: &FiniteQuadraticForm) -> FiniteQuadraticForm {
        let k1 = self.num_generators();
        let k = k1 + other.num_generators();
        let mut orders = self.orders.clone();
        orders.extend(&other.orders);
        let q = (0..k)
            .map(|i| if i < k1 { self.q_value(i) } else { other.q_value(i - k1) })
            .collect();
        let b = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| match (i < k1, j < k1) {
                        (true, true) => self.b_value(i, j),
                        (false, false) => other.b_value(i - k1, j - k1),
                        _ => BigRational::zero(),
                    })
                    .collect()
            })
            .collect();
        FiniteQuadraticForm::from_rationals(orders, q, b).expect("sum of valid forms is valid")
    }

    /// `(l, delta)` of a 2-elementary form. `delta` is read off the
    /// generator values: cross terms `2 b(x, y)` are integral when every
    /// order is 2, so integrality on generators propagates.
    pub fn two_elementary_invariants(&self) -> Result<(usize, u8)> {
        if self.orders.iter().any(|&n| n != 2) {
            return Err(Error::NotTwoElementary {
                factors: format!("{:?}", self.orders),
            });
        }
        let delta = self.q.iter().any(|&v| v % self.denom != 0);
        Ok((self.orders.len(), delta as u8))
    }

    /// The restriction of `q` to the `p`-Sylow subgroup, on generators
    /// `m_i g_i` where `n_i = p^a_i m_i`.
    pub fn p_primary_part(&self, p: u64) -> FiniteQuadraticForm {
        let (orders, mults) = p_part_generators(&self.orders, p);
        let q = mults
            .iter()
            .map(|&(i, m)| self.q_value(i) * BigRational::from(BigInt::from(m * m)))
            .collect();
        let b = mults
            .iter()
            .map(|&(i, mi)| {
                mults
                    .iter()
                    .map(|&(j, mj)| self.b_value(i, j) * BigRational::from(BigInt::from(mi * mj)))
                    .collect()
            })
            .collect();
        FiniteQuadraticForm::from_rationals(orders, q, b).expect("restriction of a valid form")
    }

    /// True iff `b` is nondegenerate (the radical is trivial).
    pub fn is_nondegenerate(&self) -> bool {
        let all: Vec<Vec<u64>> = (0..self.num_generators())
            .map(|i| {
                let mut e = vec![0; self.num_generators()];
                e[i] = 1;
                e
            })
            .collect();
        let perp = self.perp_preimage(&all);
        intmat::determinant(&perp).abs() == self.orders.iter().map(|&n| BigInt::from(n)).product()
    }

    /// Lattice basis (HNF rows) of `{x in Z^k : b(x, h) = 0 for all h}`.
    fn perp_preimage(&self, hs: &[Vec<u64>]) -> IntMatrix {
        let k = self.num_generators();
        let m = hs.len();
        let n = BigInt::from(self.denom);
        // [C | N I] with C[h][i] = numerator of b(g_i, h)
        let mut rows = Vec::with_capacity(m);
        for (r, h) in hs.iter().enumerate() {
            let mut row = Vec::with_capacity(k + m);
            for i in 0..k {
                let mut e = vec![0; k];
                e[i] = 1;
                row.push(BigInt::from(self.b_num(&e, h)));
            }
            for c in 0..m {
                row.push(if c == r { n.clone() } else { BigInt::zero() });
            }
            rows.push(row);
        }
        let mut gens: Vec<Vec<BigInt>> = if m == 0 {
            Vec::new()
        } else {
            let ker = intmat::integer_kernel(&IntMatrix::from_rows(rows, k + m));
            (0..ker.nrows()).map(|r| ker.row(r)[..k].to_vec()).collect()
        };
        for i in 0..k {
            let mut e = vec![BigInt::zero(); k];
            e[i] = BigInt::from(self.orders[i]);
            gens.push(e);
        }
        if m == 0 {
            for i in 0..k {
                let mut e = vec![BigInt::zero(); k];
                e[i] = BigInt::one();
                gens.push(e);
            }
        }
        intmat::hermite_normal_form(&IntMatrix::from_rows(gens, k))
    }

    /// `H^perp / H` with the induced form. `H` is given by generators and
    /// must be isotropic.
    pub fn subgroup_perp_quotient(&self, h: &[GroupElement]) -> Result<FiniteQuadraticForm> {
        let k = self.num_generators();
        for x in h {
            self.check_element(x)?;
        }
        let h: Vec<GroupElement> = h
            .iter()
            .map(|x| GroupElement(x.0.iter().zip(&self.orders).map(|(a, n)| a % n).collect()))
            .collect();
        for (a, x) in h.iter().enumerate() {
            if self.q_num(&x.0) != 0 {
                return Err(Error::NotIsotropic(format!("q({:?}) != 0", x.0)));
            }
            for y in &h[a + 1..] {
                if self.b_num(&x.0, &y.0) != 0 {
                    return Err(Error::NotIsotropic(format!("b({:?}, {:?}) != 0", x.0, y.0)));
                }
            }
        }
        if k == 0 {
            return Ok(self.clone());
        }
        let hs: Vec<Vec<u64>> = h.iter().map(|x| x.0.clone()).collect();
        let perp = self.perp_preimage(&hs);
        let mut sub_gens: Vec<Vec<BigInt>> = hs
            .iter()
            .map(|x| x.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        for i in 0..k {
            let mut e = vec![BigInt::zero(); k];
            e[i] = BigInt::from(self.orders[i]);
            sub_gens.push(e);
        }
        let sub = intmat::hermite_normal_form(&IntMatrix::from_rows(sub_gens, k));
        // coordinates of the H-preimage basis in the perp basis
        let perp_inv = intmat::rational_inverse(&perp).expect("perp preimage has full rank");
        let mut rel_rows = Vec::with_capacity(k);
        for r in 0..sub.nrows() {
            let mut row = Vec::with_capacity(k);
            for c in 0..k {
                let mut acc = BigRational::zero();
                for t in 0..k {
                    acc += BigRational::from(sub[(r, t)].clone()) * &perp_inv[t][c];
                }
                debug_assert!(acc.is_integer(), "H is not contained in its perp");
                row.push(acc.to_integer());
            }
            rel_rows.push(row);
        }
        let snf = intmat::smith_normal_form(&IntMatrix::from_rows(rel_rows, k));
        let mut orders = Vec::new();
        let mut gens = Vec::new();
        for (i, d) in snf.diagonal().iter().enumerate() {
            if *d <= BigInt::one() {
                continue;
            }
            let coeffs = snf.v_inv.row(i);
            let mut g = Vec::with_capacity(k);
            for c in 0..k {
                let mut acc = BigInt::zero();
                for t in 0..k {
                    acc += &coeffs[t] * &perp[(t, c)];
                }
                let n = BigInt::from(self.orders[c]);
                g.push(acc.mod_floor(&n).to_u64().expect("reduced"));
            }
            orders.push(d.to_u64().ok_or_else(|| Error::GroupTooLarge {
                order: d.to_string(),
                limit: u64::MAX,
            })?);
            gens.push(g);
        }
        let q = gens
            .iter()
            .map(|g| BigRational::new(BigInt::from(self.q_num(g)), BigInt::from(self.denom)))
            .collect();
        let b = gens
            .iter()
            .map(|x| {
                gens.iter()
                    .map(|y| BigRational::new(BigInt::from(self.b_num(x, y)), BigInt::from(self.denom)))
                    .collect()
            })
            .collect();
        FiniteQuadraticForm::from_rationals(orders, q, b)
    }

    /// Signature mod 8 from the Gauss sum `sum_x exp(pi i q(x)) =
    /// sqrt|A| e^{2 pi i sigma / 8}`.
    ///
    /// The sum is accumulated exactly as an element of `Z[zeta_M]`. The
    /// candidate `sigma` is read off a floating evaluation, then confirmed
    /// exactly by checking `G^2 = |A| i^sigma` modulo the cyclotomic
    /// polynomial; the float only separates `sigma` from `sigma + 4`, whose
    /// values differ by `2 sqrt|A|`.
    pub fn milgram_signature(&self, limit: u64) -> Result<u8> {
        self.ensure_within(limit)?;
        if !self.is_nondegenerate() {
            return Err(Error::InvalidForm("Gauss sum of a degenerate form".into()));
        }
        let two_n = 2 * self.denom;
        let m = two_n.lcm(&8);
        let step = m / two_n;
        let mut counts: HashMap<u64, i128> = HashMap::new();
        for x in self.elements() {
            *counts.entry(self.q_num(&x.0) * step).or_default() += 1;
        }
        let order = self.order() as f64;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (&e, &c) in &counts {
            let angle = 2.0 * PI * e as f64 / m as f64;
            re += c as f64 * angle.cos();
            im += c as f64 * angle.sin();
        }
        if ((re * re + im * im) - order).abs() > 1e-6 * order.max(1.0) {
            return Err(Error::InvalidForm("Gauss sum has wrong absolute value".into()));
        }
        let eighths = (im.atan2(re) / (PI / 4.0)).round() as i64;
        let sigma = eighths.rem_euclid(8) as u64;

        // exact: G^2 - |A| zeta_M^{sigma M / 4} must vanish mod Phi_M
        let mut square = vec![0i128; m as usize];
        for (&e1, &c1) in &counts {
            for (&e2, &c2) in &counts {
                square[((e1 + e2) % m) as usize] += c1 * c2;
            }
        }
        square[((sigma * m / 4) % m) as usize] -= self.order() as i128;
        let phi = cyclotomic(m);
        if !reduce_mod_monic(square, &phi).iter().all(|&c| c == 0) {
            return Err(Error::InvalidForm("Gauss sum failed exact verification".into()));
        }
        Ok(sigma as u8)
    }

    /// JSON dump `{"orders": [...], "q": ["p/q", ...], "b": [["p/q", ...], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let k = self.num_generators();
        let q: Vec<String> = (0..k).map(|i| self.q_value(i).to_string()).collect();
        let b: Vec<Vec<String>> = (0..k)
            .map(|i| (0..k).map(|j| self.b_value(i, j).to_string()).collect())
            .collect();
        serde_json::json!({ "orders": self.orders, "q": q, "b": b })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidInput(m.to_string());
        let orders: Vec<u64> = v
            .get("orders")
            .and_then(|o| o.as_array())
            .ok_or_else(|| bad("missing `orders`"))?
            .iter()
            .map(|x| x.as_u64().ok_or_else(|| bad("orders must be positive integers")))
            .collect::<Result<_>>()?;
        let parse = |x: &serde_json::Value| -> Result<BigRational> {
            match x {
                serde_json::Value::String(s) => parse_rational(s),
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(|i| BigRational::from(BigInt::from(i)))
                    .ok_or_else(|| bad("non-integer number")),
                _ => Err(bad("rational values must be strings")),
            }
        };
        let q = v
            .get("q")
            .and_then(|o| o.as_array())
            .ok_or_else(|| bad("missing `q`"))?
            .iter()
            .map(parse)
            .collect::<Result<Vec<_>>>()?;
        let b = v
            .get("b")
            .and_then(|o| o.as_array())
            .ok_or_else(|| bad("missing `b`"))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| bad("b rows must be arrays"))?
                    .iter()
                    .map(parse)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rationals(orders, q, b)
    }
}

impl fmt::Debug for FiniteQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteQuadraticForm({})", self.to_json())
    }
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from(s.parse::<BigInt>().map_err(|_| bad())?)),
    }
}

/// `(new orders, (source index, multiplier m_i))` for the `p`-part.
fn p_part_generators(orders: &[u64], p: u64) -> (Vec<u64>, Vec<(usize, u64)>) {
    let mut out_orders = Vec::new();
    let mut mults = Vec::new();
    for (i, &n) in orders.iter().enumerate() {
        let mut m = n;
        let mut pp = 1;
        while m % p == 0 {
            m /= p;
            pp *= p;
        }
        if pp > 1 {
            out_orders.push(pp);
            mults.push((i, m));
        }
    }
    (out_orders, mults)
}

pub struct ElementIter<'a> {
    orders: &'a [u64],
    next: Option<Vec<u64>>,
}

impl Iterator for ElementIter<'_> {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut carry = true;
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.orders[i] {
                carry = false;
                break;
            }
            succ[i] = 0;
        }
        if !carry {
            self.next = Some(succ);
        }
        Some(GroupElement(cur))
    }
}

fn poly_divide_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    // both little-endian, den monic
    let mut rem = num.to_vec();
    let dl = den.len();
    if rem.len() < dl {
        return vec![0];
    }
    let mut quot = vec![0i128; rem.len() - dl + 1];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dl - 1];
        quot[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

/// The `m`-th cyclotomic polynomial, little-endian coefficients.
pub(crate) fn cyclotomic(m: u64) -> Vec<i128> {
    let mut cache: HashMap<u64, Vec<i128>> = HashMap::new();
    cyclotomic_cached(m, &mut cache)
}

fn cyclotomic_cached(m: u64, cache: &mut HashMap<u64, Vec<i128>>) -> Vec<i128> {
    if let Some(p) = cache.get(&m) {
        return p.clone();
    }
    let mut p = vec![0i128; m as usize + 1];
    p[0] = -1;
    p[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            let phi_d = cyclotomic_cached(d, cache);
            p = poly_divide_exact(&p, &phi_d);
        }
    }
    cache.insert(m, p.clone());
    p
}

fn reduce_mod_monic(mut a: Vec<i128>, modulus: &[i128]) -> Vec<i128> {
    let dl = modulus.len();
    if a.len() < dl {
        return a;
    }
    for i in (dl - 1..a.len()).rev() {
        let c = a[i];
        if c == 0 {
            continue;
        }
        for (j, &d) in modulus.iter().enumerate() {
            a[i + 1 - dl + j] -= c * d;
        }
    }
    a.truncate(dl - 1);
    a
}

/// A discriminant form together with dual-lattice lifts of its generators
/// and the coordinate map `L* -> A_L`.
#[derive(Clone, Debug)]
pub struct LiftedForm {
    pub form: FiniteQuadraticForm,
    /// `lifts[i]` is a vector of `L*` (ambient coordinates) mapping to `g_i`.
    pub lifts: Vec<Vec<BigRational>>,
    gram: IntMatrix,
    coord_rows: Vec<Vec<BigInt>>,
    coord_mults: Vec<u64>,
}

impl LiftedForm {
    /// The lattice vector `sum_i x_i lift_i`.
    pub fn lift(&self, x: &GroupElement) -> Vec<BigRational> {
        let n = self.gram.nrows();
        let mut v = vec![BigRational::zero(); n];
        for (c, l) in x.0.iter().zip(&self.lifts) {
            if *c == 0 {
                continue;
            }
            let c = BigRational::from(BigInt::from(*c));
            for (vi, li) in v.iter_mut().zip(l) {
                *vi += &c * li;
            }
        }
        v
    }

    /// The class of a dual vector. For a `p`-primary form this is the
    /// projection to the `p`-part.
    pub fn element_of(&self, v: &[BigRational]) -> Result<GroupElement> {
        let n = self.gram.nrows();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        let mut w = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = BigRational::zero();
            for j in 0..n {
                acc += BigRational::from(self.gram[(i, j)].clone()) * &v[j];
            }
            if !acc.is_integer() {
                return Err(Error::NotFiniteIndex(format!("vector pairs non-integrally with basis vector {i}")));
            }
            w.push(acc.to_integer());
        }
        let coords = self
            .coord_rows
            .iter()
            .zip(&self.coord_mults)
            .zip(self.form.orders())
            .map(|((row, &mult), &ord)| {
                let c: BigInt = row.iter().zip(&w).map(|(a, b)| a * b).sum();
                (c * BigInt::from(mult)).mod_floor(&BigInt::from(ord)).to_u64().expect("reduced")
            })
            .collect();
        Ok(GroupElement(coords))
    }

    pub fn p_primary_part(&self, p: u64) -> LiftedForm {
        let (_, mults) = p_part_generators(self.form.orders(), p);
        let form = self.form.p_primary_part(p);
        let lifts = mults
            .iter()
            .map(|&(i, m)| {
                let m = BigRational::from(BigInt::from(m));
                self.lifts[i].iter().map(|x| x * &m).collect()
            })
            .collect();
        let coord_rows = mults.iter().map(|&(i, _)| self.coord_rows[i].clone()).collect();
        let coord_mults = mults
            .iter()
            .zip(form.orders())
            .map(|(&(i, m), &pp)| {
                let inv = mod_inverse(m % pp, pp);
                ((self.coord_mults[i] as u128 * inv as u128) % pp as u128) as u64
            })
            .collect();
        LiftedForm {
            form,
            lifts,
            gram: self.gram.clone(),
            coord_rows,
            coord_mults,
        }
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let e = (a as i128).extended_gcd(&(m as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m as i128) as u64
}

/// `q_L` with dual-vector lifts, generators read off the Smith form of the
/// Gram matrix.
pub fn discriminant_form_lifted(lattice: &IntegerLattice) -> Result<LiftedForm> {
    if !lattice.is_nondegenerate() {
        return Err(Error::Degenerate);
    }
    if !lattice.is_even() {
        return Err(Error::OddLattice);
    }
    let gram = lattice.gram();
    let n = lattice.rank();
    let snf = lattice.smith_normal_form();
    let mut orders = Vec::new();
    let mut cols: Vec<Vec<BigInt>> = Vec::new();
    let mut dens: Vec<BigInt> = Vec::new();
    let mut coord_rows = Vec::new();
    for (i, d) in snf.diagonal().into_iter().enumerate() {
        if d <= BigInt::one() {
            continue;
        }
        orders.push(d.to_u64().ok_or_else(|| Error::GroupTooLarge {
            order: lattice.determinant().abs().to_string(),
            limit: u64::MAX,
        })?);
        cols.push((0..n).map(|r| snf.v[(r, i)].clone()).collect());
        coord_rows.push(snf.u.row(i).to_vec());
        dens.push(d);
    }
    let k = orders.len();
    let mut q = Vec::with_capacity(k);
    let mut b = vec![Vec::with_capacity(k); k];
    for i in 0..k {
        for j in 0..k {
            let val = BigRational::new(gram.bilinear(&cols[i], &cols[j]), &dens[i] * &dens[j]);
            if i == j {
                q.push(val.clone());
            }
            b[i].push(val);
        }
    }
    let lifts = cols
        .iter()
        .zip(&dens)
        .map(|(c, d)| c.iter().map(|x| BigRational::new(x.clone(), d.clone())).collect())
        .collect();
    let form = FiniteQuadraticForm::from_rationals(orders, q, b)?;
    Ok(LiftedForm {
        form,
        lifts,
        gram: gram.clone(),
        coord_mults: vec![1; k],
        coord_rows,
    })
}

/// `q_L` on `A_L`.
pub fn discriminant_form(lattice: &IntegerLattice) -> Result<FiniteQuadraticForm> {
    Ok(discriminant_form_lifted(lattice)?.form)
}

struct SearchSpace {
    n1: usize,
    candidates: Vec<Vec<usize>>,
    elements2: Vec<Vec<u64>>,
    /// required b2(phi g_i, phi g_j) numerators over `den`
    target_b: Vec<Vec<u64>>,
    den: u64,
    check_bijective: bool,
}

/// Sets up the backtracking search for maps `phi` with
/// `q2(phi x) = sign q1(x)` and `b2(phi x, phi y) = sign b1(x, y)`.
fn search_space(
    q1: &FiniteQuadraticForm,
    q2: &FiniteQuadraticForm,
    anti: bool,
    limit: u64,
) -> Result<Option<SearchSpace>> {
    q1.ensure_within(limit)?;
    q2.ensure_within(limit)?;
    if q1.group() != q2.group() {
        return Ok(None);
    }
    let den = q1.denom.lcm(&q2.denom);
    let (s1, s2) = (den / q1.denom, den / q2.denom);
    let k = q1.num_generators();
    let sign = |v: u64, m: u64| if anti { (m - v % m) % m } else { v % m };
    let target_q: Vec<u64> = (0..k).map(|i| sign(q1.q[i] * s1, 2 * den)).collect();
    let target_b: Vec<Vec<u64>> = (0..k)
        .map(|i| (0..k).map(|j| sign(q1.b[i][j] * s1, den)).collect())
        .collect();

    let mut elements2: Vec<(u64, Vec<u64>)> = q2
        .elements()
        .map(|x| (q2.q_num(&x.0) * s2, x.0))
        .collect();
    // ascending q-value, then lexicographic
    elements2.sort();
    let candidates = (0..k)
        .map(|i| {
            let n = q1.orders[i];
            elements2
                .iter()
                .enumerate()
                .filter(|(_, (qv, x))| {
                    *qv == target_q[i]
                        && x.iter().zip(&q2.orders).all(|(&c, &m)| (c as u128 * n as u128).is_multiple_of(m as u128))
                })
                .map(|(idx, _)| idx)
                .collect()
        })
        .collect();
    Ok(Some(SearchSpace {
        n1: k,
        candidates,
        elements2: elements2.into_iter().map(|(_, x)| x).collect(),
        target_b,
        den,
        check_bijective: !q1.is_nondegenerate(),
    }))
}

fn backtrack(
    space: &SearchSpace,
    q1: &FiniteQuadraticForm,
    q2: &FiniteQuadraticForm,
    chosen: &mut Vec<usize>,
    stop_at_first: bool,
    count: &mut u64,
) -> bool {
    let i = chosen.len();
    if i == space.n1 {
        if space.check_bijective && !is_bijective(space, q1, q2, chosen) {
            return false;
        }
        *count += 1;
        return stop_at_first;
    }
    let s2 = space.den / q2.denom;
    for &cand in &space.candidates[i] {
        let y = &space.elements2[cand];
        let ok = chosen.iter().enumerate().all(|(j, &prev)| {
            q2.b_num(y, &space.elements2[prev]) * s2 == space.target_b[i][j]
        });
        if !ok {
            continue;
        }
        chosen.push(cand);
        if backtrack(space, q1, q2, chosen, stop_at_first, count) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn is_bijective(
    space: &SearchSpace,
    q1: &FiniteQuadraticForm,
    q2: &FiniteQuadraticForm,
    chosen: &[usize],
) -> bool {
    let mut seen = std::collections::HashSet::new();
    for x in q1.elements() {
        let mut img = GroupElement::zero(q2.num_generators());
        for (c, &idx) in x.0.iter().zip(chosen) {
            let y = GroupElement(space.elements2[idx].clone());
            img = q2.add(&img, &q2.scalar_mul(*c, &y));
        }
        if !seen.insert(img) {
            return false;
        }
    }
    true
}

/// A group isomorphism `phi: A1 -> A2` with `q2(phi x) = -q1(x)` (and
/// likewise for `b`), given by the images of `q1`'s generators. The search
/// is exhaustive, so `None` proves that no anti-isometry exists.
pub fn find_anti_isometry(
    q1: &FiniteQuadraticForm,
    q2: &FiniteQuadraticForm,
    limit: u64,
) -> Result<Option<Vec<GroupElement>>> {
    let Some(space) = search_space(q1, q2, true, limit)? else {
        return Ok(None);
    };
    let mut chosen = Vec::new();
    let mut count = 0;
    if backtrack(&space, q1, q2, &mut chosen, true, &mut count) {
        Ok(Some(
            chosen
                .iter()
                .map(|&i| GroupElement(space.elements2[i].clone()))
                .collect(),
        ))
    } else {
        Ok(None)
    }
}

/// `|O(q)|`, counted by backtracking over generator images.
pub fn orthogonal_group_order(q: &FiniteQuadraticForm, limit: u64) -> Result<u64> {
    let space = search_space(q, q, false, limit)?.expect("a form is isomorphic to itself");
    let mut chosen = Vec::new();
    let mut count = 0;
    backtrack(&space, q, q, &mut chosen, false, &mut count);
    Ok(count)
}

/// Applies a generator map to an arbitrary element.
pub fn apply_map(
    source: &FiniteQuadraticForm,
    target: &FiniteQuadraticForm,
    images: &[GroupElement],
    x: &GroupElement,
) -> Result<GroupElement> {
    source.check_element(x)?;
    let mut img = GroupElement::zero(target.num_generators());
    for (c, y) in x.0.iter().zip(images) {
        img = target.add(&img, &target.scalar_mul(*c, y));
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn lat(rows: &[Vec<i64>]) -> IntegerLattice {
        IntegerLattice::from_i64(rows).unwrap()
    }

    fn a1() -> IntegerLattice {
        lat(&[vec![2]])
    }

    fn u2_form() -> FiniteQuadraticForm {
        FiniteQuadraticForm::from_rationals(
            vec![2, 2],
            vec![rat(0, 1), rat(0, 1)],
            vec![vec![rat(0, 1), rat(1, 2)], vec![rat(1, 2), rat(0, 1)]],
        )
        .unwrap()
    }

    #[test]
    fn a1_form() {
        let q = discriminant_form(&a1()).unwrap();
        assert_eq!(q.orders(), &[2]);
        assert_eq!(q.q_value(0), rat(1, 2));
        assert_eq!(q.two_elementary_invariants().unwrap(), (1, 1));
        assert_eq!(q.milgram_signature(DEFAULT_MAX_GROUP_ORDER).unwrap(), 1);
        assert_eq!(orthogonal_group_order(&q, 1 << 16).unwrap(), 1);
    }

    #[test]
    fn odd_and_degenerate_rejected() {
        assert_eq!(discriminant_form(&lat(&[vec![1]])).unwrap_err(), Error::OddLattice);
        assert_eq!(discriminant_form(&lat(&[vec![0]])).unwrap_err(), Error::Degenerate);
    }

    #[test]
    fn u2_evaluate_and_subgroups() {
        let q = u2_form();
        let g1 = q.element(&[1, 0]).unwrap();
        let sum = q.element(&[1, 1]).unwrap();
        assert_eq!(q.evaluate(&sum).unwrap(), rat(1, 1));
        assert_eq!(q.evaluate(&GroupElement::zero(2)).unwrap(), rat(0, 1));
        assert_eq!(orthogonal_group_order(&q, 1 << 16).unwrap(), 2);

        let quot = q.subgroup_perp_quotient(&[g1]).unwrap();
        assert_eq!(quot.num_generators(), 0);
        assert_eq!(q.subgroup_perp_quotient(&[]).unwrap().group(), q.group());
        assert_eq!(q.subgroup_perp_quotient(&[sum]).unwrap_err().code(), "NotIsotropic");
        assert_eq!(q.evaluate(&GroupElement(vec![1])).unwrap_err().code(), "DimensionMismatch");
    }

    #[test]
    fn invalid_forms_rejected() {
        // q(g) = 1/2 on Z/3 is not well defined
        assert!(FiniteQuadraticForm::from_rationals(vec![3], vec![rat(1, 2)], vec![vec![rat(1, 2)]]).is_err());
        // b(g,g) must agree with q(g) mod 1
        assert!(FiniteQuadraticForm::from_rationals(vec![2], vec![rat(1, 2)], vec![vec![rat(0, 1)]]).is_err());
        // order-3 form with q = 2/3 is fine
        assert!(FiniteQuadraticForm::from_rationals(vec![3], vec![rat(2, 3)], vec![vec![rat(2, 3)]]).is_ok());
    }

    #[test]
    fn not_two_elementary() {
        let a2 = lat(&[vec![2, 1], vec![1, 2]]);
        let q = discriminant_form(&a2).unwrap();
        assert_eq!(q.two_elementary_invariants().unwrap_err().code(), "NotTwoElementary");
        // A2 has signature 2
        assert_eq!(q.milgram_signature(DEFAULT_MAX_GROUP_ORDER).unwrap(), 2);
    }

    #[test]
    fn anti_isometry_small() {
        let q1 = discriminant_form(&a1()).unwrap();
        let q2 = discriminant_form(&lat(&[vec![-2]])).unwrap();
        let phi = find_anti_isometry(&q1, &q2, 1 << 12).unwrap().unwrap();
        assert_eq!(phi, vec![GroupElement(vec![1])]);
        // A1 against A1: 1/2 != -1/2 mod 2
        assert!(find_anti_isometry(&q1, &q1, 1 << 12).unwrap().is_none());
        let a2 = discriminant_form(&lat(&[vec![2, 1], vec![1, 2]])).unwrap();
        assert!(find_anti_isometry(&q1, &a2, 1 << 12).unwrap().is_none());
    }

    #[test]
    fn group_limit() {
        let q = discriminant_form(&lat(&[vec![2, 0], vec![0, 2]])).unwrap();
        assert_eq!(q.milgram_signature(2).unwrap_err().code(), "GroupTooLarge");
    }

    #[test]
    fn json_dump() {
        let q = u2_form();
        assert_eq!(q.to_json().to_string(), r#"{"b":[["0","1/2"],["1/2","0"]],"orders":[2,2],"q":["0","0"]}"#);
        assert_eq!(FiniteQuadraticForm::from_json(&q.to_json()).unwrap(), q);
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(cyclotomic(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn lift_and_element_round_trip() {
        let e6_2 = lat(&[
            vec![4, -2, 0, 0, 0, 0],
            vec![-2, 4, -2, 0, 0, 0],
            vec![0, -2, 4, -2, 0, -2],
            vec![0, 0, -2, 4, -2, 0],
            vec![0, 0, 0, -2, 4, 0],
            vec![0, 0, -2, 0, 0, 4],
        ]);
        let lf = discriminant_form_lifted(&e6_2).unwrap();
        for x in lf.form.elements().take(40) {
            assert_eq!(lf.element_of(&lf.lift(&x)).unwrap(), x);
        }
        let two = lf.p_primary_part(2);
        assert_eq!(two.form.orders(), &[2, 2, 2, 2, 2, 2]);
        for x in two.form.elements() {
            assert_eq!(two.element_of(&two.lift(&x)).unwrap(), x);
        }
        let three = lf.p_primary_part(3);
        assert_eq!(three.form.orders(), &[3]);
    }
}
