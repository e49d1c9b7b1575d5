//! Embedding criteria for transcendental lattices of cubic fourfolds into
//! the K3 lattice, the algebraicity index and the classification of the
//! 2-elementary case.
//!
//! A candidate transcendental lattice `T` is even of signature `(n, 2)`
//! inside `Λ₀ = A2 ⊕ E8² ⊕ U²` (rank 22). Its algebraic rank is
//! `rho = 22 - rank T`, `ell` is the length of `A_T` and `d = |det T|`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::discform::discriminant_form;
use crate::error::{Error, Result};
use crate::lattice::IntegerLattice;

/// Rank of `Λ₀`, the primitive cohomology lattice of a cubic fourfold.
pub const AMBIENT_RANK: usize = 22;

/// Genus invariants `(t+, t-, l, delta)` of an even 2-elementary lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TwoElemInvariants {
    pub t_plus: i64,
    pub t_minus: i64,
    pub l: i64,
    pub delta: u8,
}

impl TwoElemInvariants {
    pub fn new(t_plus: i64, t_minus: i64, l: i64, delta: u8) -> Self {
        TwoElemInvariants { t_plus, t_minus, l, delta }
    }

    /// Invariants computed from an even 2-elementary lattice.
    pub fn of_lattice(lattice: &IntegerLattice) -> Result<Self> {
        let sig = lattice.signature()?;
        let (l, delta) = discriminant_form(lattice)?.two_elementary_invariants()?;
        Ok(TwoElemInvariants::new(sig.t_plus as i64, sig.t_minus as i64, l as i64, delta))
    }

    pub fn swapped(&self) -> Self {
        TwoElemInvariants::new(self.t_minus, self.t_plus, self.l, self.delta)
    }
}

/// Which of the existence conditions (0)..(7) are enforced. Everything is
/// on by default; switching one off is only useful for mutation tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExistenceRules {
    enabled: [bool; 8],
}

impl Default for ExistenceRules {
    fn default() -> Self {
        ExistenceRules { enabled: [true; 8] }
    }
}

impl ExistenceRules {
    pub fn without(mut self, condition: usize) -> Self {
        self.enabled[condition] = false;
        self
    }

    pub fn is_enabled(&self, condition: usize) -> bool {
        self.enabled[condition]
    }
}

/// Existence of an even 2-elementary lattice with the given invariants.
pub fn two_elementary_exists(inv: TwoElemInvariants) -> bool {
    two_elementary_exists_with(inv, ExistenceRules::default())
}

pub fn two_elementary_exists_with(inv: TwoElemInvariants, rules: ExistenceRules) -> bool {
    let TwoElemInvariants { t_plus, t_minus, l, delta } = inv;
    let diff = t_plus - t_minus;
    let rank = t_plus + t_minus;
    let on = |c| rules.is_enabled(c);
    // (0)
    if on(0) && (l < 0 || t_plus < 0 || t_minus < 0 || delta > 1) {
        return false;
    }
    // (1)
    if on(1) && rank < l {
        return false;
    }
    // (2)
    if on(2) && (rank + l).rem_euclid(2) != 0 {
        return false;
    }
    // (3)
    if on(3) && delta == 0 && diff.rem_euclid(4) != 0 {
        return false;
    }
    // (4)
    if on(4) && l == 0 && (delta != 0 || diff.rem_euclid(8) != 0) {
        return false;
    }
    // (5): E7 has difference 7, so both signs are allowed
    if on(5) && l == 1 && !matches!(diff.rem_euclid(8), 1 | 7) {
        return false;
    }
    // (6)
    if on(6) && l == 2 && diff.rem_euclid(8) == 4 && delta != 0 {
        return false;
    }
    // (7)
    if on(7) && delta == 0 && l == rank && diff.rem_euclid(8) != 0 {
        return false;
    }
    true
}

/// Outcome of the K3-embedding test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EmbeddingStatus {
    No,
    Yes,
    YesUnique,
    Undecided,
}

/// Criterion that decided an embedding or classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// `ell > min(rho, 22 - rho)`: `A_T` needs more generators than a
    /// complement in the K3 lattice could supply.
    LengthExceedsComplementRank,
    /// `rho >= 11`: `T` has small positive index and always embeds.
    LargeAlgebraicRank,
    /// `ell <= rho - 2`: unique primitive embedding.
    LengthAtMostRhoMinusTwo,
    /// `ell <= rho - 1`: a primitive embedding exists.
    LengthAtMostRhoMinusOne,
    /// `ell = rho`, `T` 2-elementary: the complement exists.
    TwoElementaryComplementExists,
    /// `ell = rho`, `T` 2-elementary: no complement exists.
    TwoElementaryComplementMissing,
    /// `ell = rho`, not 2-elementary: not decided by rank comparisons.
    BorderlineLength,
    /// `rho = 1`: decided by the discriminant conditions mod 9, 4 and 3.
    HassettRankOne,
}

impl Criterion {
    pub fn describe(&self) -> &'static str {
        match self {
            Criterion::LengthExceedsComplementRank => "ell > min(rho, 22 - rho): no embedding into the K3 lattice",
            Criterion::LargeAlgebraicRank => "rho >= 11: primitive embedding exists",
            Criterion::LengthAtMostRhoMinusTwo => "ell <= rho - 2: unique primitive embedding",
            Criterion::LengthAtMostRhoMinusOne => "ell <= rho - 1: primitive embedding exists",
            Criterion::TwoElementaryComplementExists => {
                "ell = rho, 2-elementary: complement with (rho-1, 1), l = rho exists"
            }
            Criterion::TwoElementaryComplementMissing => {
                "ell = rho, 2-elementary: no complement with (rho-1, 1), l = rho"
            }
            Criterion::BorderlineLength => "ell = rho, not 2-elementary: undecided by rank comparison",
            Criterion::HassettRankOne => "rho = 1: discriminant criterion (9 | d, 4 | d, or prime p = 2 mod 3)",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

fn check_transcendental(t: &IntegerLattice) -> Result<()> {
    let rank = t.rank();
    if !(2..=AMBIENT_RANK).contains(&rank) {
        return Err(Error::RankOutOfRange(rank));
    }
    if !t.is_nondegenerate() {
        return Err(Error::Degenerate);
    }
    if !t.is_even() {
        return Err(Error::OddLattice);
    }
    let sig = t.signature()?;
    if sig.t_minus != 2 {
        return Err(Error::WrongSignature {
            expected_plus: rank - 2,
            t_plus: sig.t_plus,
            t_minus: sig.t_minus,
        });
    }
    Ok(())
}

/// Embedding status together with the criterion that decided it.
pub fn k3_embedding_decision(t: &IntegerLattice) -> Result<(EmbeddingStatus, Criterion)> {
    check_transcendental(t)?;
    let rho = (AMBIENT_RANK - t.rank()) as i64;
    let group = t.discriminant_group()?;
    let ell = group.length() as i64;
    if ell > rho.min(AMBIENT_RANK as i64 - rho) {
        return Ok((EmbeddingStatus::No, Criterion::LengthExceedsComplementRank));
    }
    if rho >= 11 {
        return Ok((EmbeddingStatus::Yes, Criterion::LargeAlgebraicRank));
    }
    if ell <= rho - 2 {
        return Ok((EmbeddingStatus::YesUnique, Criterion::LengthAtMostRhoMinusTwo));
    }
    if ell < rho {
        return Ok((EmbeddingStatus::Yes, Criterion::LengthAtMostRhoMinusOne));
    }
    // ell == rho
    if group.is_two_elementary() {
        let (_, delta) = discriminant_form(t)?.two_elementary_invariants()?;
        let complement = TwoElemInvariants::new(rho - 1, 1, rho, delta);
        return Ok(if two_elementary_exists(complement) {
            (EmbeddingStatus::Yes, Criterion::TwoElementaryComplementExists)
        } else {
            (EmbeddingStatus::No, Criterion::TwoElementaryComplementMissing)
        });
    }
    Ok((EmbeddingStatus::Undecided, Criterion::BorderlineLength))
}

pub fn k3_embedding_status(t: &IntegerLattice) -> Result<EmbeddingStatus> {
    Ok(k3_embedding_decision(t)?.0)
}

/// `2^rho / d`.
pub fn kappa(rho: u32, d: &BigInt) -> Result<BigRational> {
    if !d.is_positive() {
        return Err(Error::NonPositiveD(d.to_string()));
    }
    Ok(BigRational::new(BigInt::one() << rho, d.clone()))
}

/// Rank-one criterion: for `d = 0, 2 mod 6`, potentially irrational iff
/// `9 | d`, `4 | d`, or `d` has an odd prime factor `p = 2 mod 3`.
pub fn hassett_rho1(d: u64) -> Result<bool> {
    if d == 0 || !matches!(d % 6, 0 | 2) {
        return Err(Error::InvalidDiscriminant(d.to_string()));
    }
    if d.is_multiple_of(9) || d.is_multiple_of(4) {
        return Ok(true);
    }
    Ok(odd_prime_factors(d).into_iter().any(|p| p % 3 == 2))
}

fn odd_prime_factors(mut n: u64) -> Vec<u64> {
    while n.is_multiple_of(2) {
        n /= 2;
    }
    let mut out = Vec::new();
    let mut p = 3;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    PotentiallyIrrational,
    AssociatedK3,
    AssociatedK3Unique,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationReport {
    pub rho: u32,
    pub ell: usize,
    pub d: BigInt,
    pub kappa: BigRational,
    pub verdict: Verdict,
    pub reasons: Vec<Criterion>,
}

impl ClassificationReport {
    pub fn to_json(&self, explain: bool) -> serde_json::Value {
        let mut v = serde_json::json!({
            "rho": self.rho,
            "ell": self.ell,
            "d": crate::lattice::bigint_to_json(&self.d),
            "kappa": self.kappa.to_string(),
            "verdict": self.verdict,
        });
        if explain {
            v["reasons"] = serde_json::to_value(&self.reasons).expect("serializable");
            v["explanation"] = self.reasons.iter().map(|r| r.describe()).collect();
        }
        v
    }
}

/// `(rho, ell, d, kappa, verdict)` for a candidate transcendental lattice.
pub fn classify(t: &IntegerLattice) -> Result<ClassificationReport> {
    let (status, criterion) = k3_embedding_decision(t)?;
    let rho = (AMBIENT_RANK - t.rank()) as u32;
    let ell = t.discriminant_group()?.length();
    let d = t.determinant().abs();
    let kappa = kappa(rho, &d)?;
    let mut reasons = vec![criterion];
    let mut verdict = match status {
        EmbeddingStatus::No => Verdict::PotentiallyIrrational,
        EmbeddingStatus::Yes => Verdict::AssociatedK3,
        EmbeddingStatus::YesUnique => Verdict::AssociatedK3Unique,
        EmbeddingStatus::Undecided => Verdict::Undecided,
    };
    if verdict == Verdict::Undecided && rho == 1 {
        if let Some(d64) = d.to_u64() {
            if let Ok(irrational) = hassett_rho1(d64) {
                reasons.push(Criterion::HassettRankOne);
                verdict = if irrational {
                    Verdict::PotentiallyIrrational
                } else {
                    Verdict::AssociatedK3
                };
            }
        }
    }
    Ok(ClassificationReport { rho, ell, d, kappa, verdict, reasons })
}

/// Result of sweeping the 2-elementary case `ell = rho in 1..=10`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumerationReport {
    /// `(rho, delta)` where `T` exists but its K3 complement does not.
    pub candidates: Vec<(i64, u8)>,
    /// `rho` with `delta = 0` for which `T` of signature `(20 - rho, 2)` exists.
    pub delta0_t_exists: Vec<i64>,
    /// `rho` with `delta = 0` for which a complement of signature `(rho - 1, 1)` exists.
    pub delta0_m_exists: Vec<i64>,
}

/// Complement signature `(rho - 1, 1)`; `swap_complement` uses `(1, rho - 1)`.
pub fn enumerate_2elem_candidates_with(rules: ExistenceRules, swap_complement: bool) -> EnumerationReport {
    let mut report = EnumerationReport {
        candidates: Vec::new(),
        delta0_t_exists: Vec::new(),
        delta0_m_exists: Vec::new(),
    };
    for rho in 1..=10i64 {
        for delta in 0..=1u8 {
            let t = TwoElemInvariants::new(20 - rho, 2, rho, delta);
            let mut m = TwoElemInvariants::new(rho - 1, 1, rho, delta);
            if swap_complement {
                m = m.swapped();
            }
            let t_exists = two_elementary_exists_with(t, rules);
            let m_exists = two_elementary_exists_with(m, rules);
            if delta == 0 {
                if t_exists {
                    report.delta0_t_exists.push(rho);
                }
                if m_exists {
                    report.delta0_m_exists.push(rho);
                }
            }
            if t_exists && !m_exists {
                report.candidates.push((rho, delta));
            }
        }
    }
    report
}

pub fn enumerate_2elem_candidates() -> EnumerationReport {
    enumerate_2elem_candidates_with(ExistenceRules::default(), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv(tp: i64, tm: i64, l: i64, d: u8) -> TwoElemInvariants {
        TwoElemInvariants::new(tp, tm, l, d)
    }

    #[test]
    fn existence_examples() {
        assert!(two_elementary_exists(inv(1, 0, 1, 1)));
        assert!(!two_elementary_exists(inv(1, 5, 6, 0)));
        assert!(two_elementary_exists(inv(1, 1, 2, 0)));
        assert!(two_elementary_exists(inv(1, 9, 10, 0)));
        // E7: difference 7
        assert!(two_elementary_exists(inv(7, 0, 1, 1)));
        assert!(!two_elementary_exists(inv(3, 0, 1, 1)));
        assert!(!two_elementary_exists(inv(-1, 0, 0, 0)));
        assert!(!two_elementary_exists(inv(1, 0, 0, 1)));
    }

    #[test]
    fn condition_seven_is_what_kills_rho_six() {
        let rules = ExistenceRules::default().without(7);
        assert!(two_elementary_exists_with(inv(1, 5, 6, 0), rules));
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(0, &BigInt::from(3)).unwrap(), BigRational::new(1.into(), 3.into()));
        assert_eq!(kappa(6, &BigInt::from(64)).unwrap(), BigRational::one());
        assert_eq!(kappa(0, &BigInt::one()).unwrap(), BigRational::one());
        assert_eq!(kappa(0, &BigInt::from(0)).unwrap_err().code(), "NonPositiveD");
    }

    #[test]
    fn hassett_examples() {
        assert!(hassett_rho1(8).unwrap());
        assert!(!hassett_rho1(14).unwrap());
        assert!(hassett_rho1(18).unwrap());
        assert_eq!(hassett_rho1(13).unwrap_err().code(), "InvalidDiscriminant");
    }

    #[test]
    fn odd_primes() {
        assert_eq!(odd_prime_factors(2 * 9 * 7 * 7 * 13), vec![3, 7, 13]);
        assert_eq!(odd_prime_factors(16), Vec::<u64>::new());
    }

    #[test]
    fn enumeration() {
        let r = enumerate_2elem_candidates();
        assert_eq!(r.candidates, vec![(6, 0)]);
        assert_eq!(r.delta0_t_exists, vec![2, 6, 10]);
        assert_eq!(r.delta0_m_exists, vec![2, 10]);
        assert_eq!(enumerate_2elem_candidates_with(ExistenceRules::default(), true), r);
    }
}
