//! Dense matrices over the integers and the exact elimination routines the
//! rest of the crate is built on: Bareiss determinant, Smith and Hermite
//! normal forms, integer kernels and saturation.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Row-major integer matrix with arbitrary-precision entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix");
            data.extend(row);
        }
        IntMatrix {
            rows: r,
            cols,
            data,
        }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
            cols,
        )
    }

    pub fn from_diagonal(diag: &[BigInt]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, a: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * a).collect(),
        }
    }

    /// `x^T M y` for a square matrix.
    pub fn bilinear(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for i in 0..self.rows {
            if x[i].is_zero() {
                continue;
            }
            let mut s = BigInt::zero();
            for j in 0..self.cols {
                if !y[j].is_zero() {
                    s += &self[(i, j)] * &y[j];
                }
            }
            acc += &x[i] * s;
        }
        acc
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &IntMatrix) -> IntMatrix {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += c * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self[(src, j)] * c;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += c * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self[(i, src)] * c;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// Fraction-free (Bareiss) determinant of a square matrix.
pub fn determinant(m: &IntMatrix) -> BigInt {
    assert!(m.is_square());
    let n = m.nrows();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[(k, k)].is_zero() {
            match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                Some(i) => {
                    a.swap_rows(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                a[(i, j)] = v;
            }
        }
        prev = a[(k, k)].clone();
    }
    sign * &a[(n - 1, n - 1)]
}

/// Smith normal form `u * m * v = d` together with `v^{-1}`.
#[derive(Debug, Clone)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SnfResult {
    /// Diagonal entries `d_0 | d_1 | ...` (length `min(rows, cols)`).
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.nrows().min(self.d.ncols()))
            .map(|i| self.d[(i, i)].clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Smith normal form by repeated minimal-pivot elimination. The output is
/// a deterministic function of the input.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut v_inv = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block
        let Some((pi, pj)) = min_abs_entry(&d, t) else {
            break;
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        v_inv.swap_rows(t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -d[(i, t)].div_floor(&d[(t, t)]);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                if !d[(i, t)].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -d[(t, j)].div_floor(&d[(t, t)]);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                v_inv.add_row_multiple(t, j, &-&q);
                if !d[(t, j)].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                // a remainder survived: move the smallest entry of row/column t to the pivot
                let mut best: Option<(usize, usize)> = None;
                let mut best_abs: Option<BigInt> = None;
                let candidates = (t..rows)
                    .map(|i| (i, t))
                    .chain((t + 1..cols).map(|j| (t, j)));
                for (i, j) in candidates {
                    let a = d[(i, j)].abs();
                    if a.is_zero() {
                        continue;
                    }
                    if best_abs.as_ref().is_none_or(|b| a < *b) {
                        best_abs = Some(a);
                        best = Some((i, j));
                    }
                }
                let (i, j) = best.expect("nonzero entry in pivot cross");
                d.swap_rows(t, i);
                u.swap_rows(t, i);
                d.swap_cols(t, j);
                v.swap_cols(t, j);
                v_inv.swap_rows(t, j);
                continue;
            }
            // divisibility: fold an offending row into row t and retry
            let offending = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !(&d[(i, j)] % &d[(t, t)]).is_zero())
            });
            match offending {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfResult { u, d, v, v_inv }
}

fn min_abs_entry(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut best_abs: Option<BigInt> = None;
    for i in t..d.nrows() {
        for j in t..d.ncols() {
            let a = d[(i, j)].abs();
            if a.is_zero() {
                continue;
            }
            if best_abs.as_ref().is_none_or(|b| a < *b) {
                best_abs = Some(a);
                best = Some((i, j));
            }
        }
    }
    best
}

/// Row-style Hermite normal form of the lattice spanned by the rows of `m`:
/// echelon form, positive pivots, entries above each pivot reduced into
/// `[0, pivot)`. Zero rows are dropped.
pub fn hermite_normal_form(m: &IntMatrix) -> IntMatrix {
    let cols = m.ncols();
    let mut a = m.clone();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        if pivot_row >= a.nrows() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in pivot_row..a.nrows() {
                if a[(i, col)].is_zero() {
                    continue;
                }
                if best.is_none_or(|b| a[(i, col)].abs() < a[(b, col)].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            a.swap_rows(pivot_row, b);
            let mut done = true;
            for i in pivot_row + 1..a.nrows() {
                if a[(i, col)].is_zero() {
                    continue;
                }
                let q = -a[(i, col)].div_floor(&a[(pivot_row, col)]);
                a.add_row_multiple(i, pivot_row, &q);
                if !a[(i, col)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[(pivot_row, col)].is_zero() {
            continue;
        }
        if a[(pivot_row, col)].is_negative() {
            a.negate_row(pivot_row);
        }
        for i in 0..pivot_row {
            let q = -a[(i, col)].div_floor(&a[(pivot_row, col)]);
            a.add_row_multiple(i, pivot_row, &q);
        }
        pivots.push(col);
        pivot_row += 1;
    }
    IntMatrix::from_rows((0..pivot_row).map(|i| a.row(i).to_vec()).collect(), cols)
}

/// A basis (as rows) of the integer kernel `{x in Z^n : m x = 0}`. The
/// kernel of an integer matrix is always saturated. The basis is returned
/// in Hermite normal form.
pub fn integer_kernel(m: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(m);
    let r = snf.rank();
    let n = m.ncols();
    let rows: Vec<Vec<BigInt>> = (r..n)
        .map(|j| (0..n).map(|i| snf.v[(i, j)].clone()).collect())
        .collect();
    hermite_normal_form(&IntMatrix::from_rows(rows, n))
}

/// Basis (rows, HNF) of the saturation `(Q-span of rows) ∩ Z^n`.
pub fn saturation(m: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(m);
    let r = snf.rank();
    let n = m.ncols();
    let rows: Vec<Vec<BigInt>> = (0..r).map(|i| snf.v_inv.row(i).to_vec()).collect();
    hermite_normal_form(&IntMatrix::from_rows(rows, n))
}

pub fn rank(m: &IntMatrix) -> usize {
    smith_normal_form(m).rank()
}

/// Inverse over the rationals, `None` if singular.
pub fn rational_inverse(m: &IntMatrix) -> Option<Vec<Vec<BigRational>>> {
    assert!(m.is_square());
    let n = m.nrows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = m.row(i).iter().cloned().map(BigRational::from).collect();
            row.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !a[i][k].is_zero())?;
        a.swap(k, p);
        let inv = a[k][k].recip();
        for x in a[k].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i == k || a[i][k].is_zero() {
                continue;
            }
            let f = a[i][k].clone();
            for j in 0..2 * n {
                let v = &a[k][j] * &f;
                a[i][j] -= v;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Least common multiple of the denominators of a rational vector.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a BigRational>>(xs: I) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}
