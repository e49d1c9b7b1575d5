//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use latticeforge::intmat::rational_inverse;
use latticeforge::IntegerLattice;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Number of nonzero `x` with `x^T G x == norm`, found by scanning the box
/// `|x_i| <= sqrt(norm * (G^-1)_ii)` in Gram coordinates.
pub fn box_count(l: &IntegerLattice, norm: i64) -> u64 {
    let n = l.rank();
    let inv = rational_inverse(l.gram()).expect("nondegenerate");
    let radius: Vec<i64> = (0..n)
        .map(|i| {
            let r = (&inv[i][i] * BigRational::from(BigInt::from(norm))).to_f64().unwrap();
            (r.sqrt() + 1e-9).floor() as i64
        })
        .collect();
    let g: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| l.gram()[(i, j)].to_i64().unwrap()).collect())
        .collect();
    let mut x: Vec<i64> = radius.iter().map(|r| -r).collect();
    let mut count = 0;
    loop {
        let mut q = 0;
        for i in 0..n {
            if x[i] != 0 {
                for j in 0..n {
                    q += x[i] * g[i][j] * x[j];
                }
            }
        }
        if q == norm && x.iter().any(|&c| c != 0) {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == n {
                return count;
            }
            if x[k] < radius[k] {
                x[k] += 1;
                break;
            }
            x[k] = -radius[k];
            k += 1;
        }
    }
}

/// Roots of the E8 model `{x in Z^8 u (Z+1/2)^8 : sum x even}` orthogonal to
/// every vector in `perp`. Everything is stored doubled.
pub fn e8_model_roots(perp: &[[i64; 8]]) -> u64 {
    let mut count = 0;
    for code in 0..5i64.pow(8) {
        let mut y = [0i64; 8];
        let mut c = code;
        for slot in y.iter_mut() {
            *slot = c % 5 - 2;
            c /= 5;
        }
        let parity = y[0].rem_euclid(2);
        if y.iter().any(|v| v.rem_euclid(2) != parity) {
            continue;
        }
        if (y.iter().sum::<i64>() / 2).rem_euclid(2) != 0 {
            continue;
        }
        // doubled norm 8 is norm 2
        if y.iter().map(|v| v * v).sum::<i64>() != 8 {
            continue;
        }
        if perp.iter().all(|p| p.iter().zip(&y).map(|(a, b)| a * b).sum::<i64>() == 0) {
            count += 1;
        }
    }
    count
}

/// Two roots of the model with inner product -1, spanning an A2.
pub const MODEL_R1: [i64; 8] = [2, -2, 0, 0, 0, 0, 0, 0];
pub const MODEL_R2: [i64; 8] = [0, 2, -2, 0, 0, 0, 0, 0];

/// Odd prime divisors by trial division.
pub fn naive_odd_primes(d: u64) -> Vec<u64> {
    (3..=d).filter(|p| d.is_multiple_of(*p) && (2..*p).all(|k| p % k != 0)).collect()
}
