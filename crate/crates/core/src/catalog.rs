//! Named lattices and the expression language `3*D4 + 2*U`, `E6(2)`, ...
//!
//! Gram conventions: `A_n` is the path with 2 on the diagonal and +1 next to
//! it (so `A2 = [[2,1],[1,2]]`); `D_n` and `E_n` are Cartan matrices with
//! -1 off the diagonal. `D_n` is the chain `1..n-1` with node `n` attached
//! to node `n-2`; `E_n` is the chain `1..n-1` with node `n` attached to
//! node 3. `U = [[0,1],[1,0]]`, `<k>` is rank one, `Ip,q` is
//! `diag(1^p, (-1)^q)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;
use crate::lattice::IntegerLattice;

/// The K3 lattice `E8² ⊕ U³` (positive definite `E8` convention).
pub const K3_LATTICE: &str = "2*E8 + 3*U";

/// `Λ₀ = A2 ⊕ E8² ⊕ U²`.
pub const LAMBDA0: &str = "A2 + 2*E8 + 2*U";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CatalogName {
    A(usize),
    D(usize),
    E(usize),
    U,
    Rank1(BigInt),
    Odd(usize, usize),
}

impl CatalogName {
    pub fn parse(name: &str) -> Result<Self> {
        let bad = |reason: &str| Error::BadParameter {
            name: name.to_string(),
            reason: reason.to_string(),
        };
        if name == "U" {
            return Ok(CatalogName::U);
        }
        if let Some(inner) = name.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
            let k: BigInt = inner.parse().map_err(|_| bad("expected an integer"))?;
            if k.is_zero() {
                return Err(bad("<0> is degenerate"));
            }
            return Ok(CatalogName::Rank1(k));
        }
        let (head, rest) = name.split_at(name.chars().take_while(|c| c.is_ascii_alphabetic()).count());
        let index = |s: &str| -> Result<usize> {
            if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad("expected a numeric index"));
            }
            s.parse().map_err(|_| bad("index too large"))
        };
        match head {
            "A" => {
                let n = index(rest)?;
                if n < 1 {
                    return Err(bad("A_n needs n >= 1"));
                }
                Ok(CatalogName::A(n))
            }
            "D" => {
                let n = index(rest)?;
                if n < 4 {
                    return Err(bad("D_n needs n >= 4"));
                }
                Ok(CatalogName::D(n))
            }
            "E" => {
                let n = index(rest)?;
                if !(6..=8).contains(&n) {
                    return Err(bad("E_n needs n in 6..=8"));
                }
                Ok(CatalogName::E(n))
            }
            "I" => {
                let (p, q) = rest.split_once(',').ok_or_else(|| bad("expected Ip,q"))?;
                Ok(CatalogName::Odd(index(p)?, index(q)?))
            }
            _ => Err(Error::UnknownName(name.to_string())),
        }
    }

    pub fn lattice(&self) -> IntegerLattice {
        let gram = match self {
            CatalogName::A(n) => {
                let mut g = IntMatrix::zeros(*n, *n);
                for i in 0..*n {
                    g[(i, i)] = 2.into();
                    if i + 1 < *n {
                        g[(i, i + 1)] = 1.into();
                        g[(i + 1, i)] = 1.into();
                    }
                }
                g
            }
            CatalogName::D(n) => {
                let mut edges: Vec<(usize, usize)> = (0..n - 2).map(|i| (i, i + 1)).collect();
                edges.push((n - 3, n - 1));
                cartan(*n, &edges)
            }
            CatalogName::E(n) => {
                let mut edges: Vec<(usize, usize)> = (0..n - 2).map(|i| (i, i + 1)).collect();
                edges.push((2, n - 1));
                cartan(*n, &edges)
            }
            CatalogName::U => IntMatrix::from_i64(&[vec![0, 1], vec![1, 0]]),
            CatalogName::Rank1(k) => IntMatrix::from_rows(vec![vec![k.clone()]], 1),
            CatalogName::Odd(p, q) => {
                let diag: Vec<BigInt> = (0..p + q)
                    .map(|i| if i < *p { BigInt::from(1) } else { BigInt::from(-1) })
                    .collect();
                IntMatrix::from_diagonal(&diag)
            }
        };
        IntegerLattice::new(gram).expect("catalog Grams are symmetric")
    }
}

fn cartan(n: usize, edges: &[(usize, usize)]) -> IntMatrix {
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = 2.into();
    }
    for &(a, b) in edges {
        g[(a, b)] = (-1).into();
        g[(b, a)] = (-1).into();
    }
    g
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogName::A(n) => write!(f, "A{n}"),
            CatalogName::D(n) => write!(f, "D{n}"),
            CatalogName::E(n) => write!(f, "E{n}"),
            CatalogName::U => write!(f, "U"),
            CatalogName::Rank1(k) => write!(f, "<{k}>"),
            CatalogName::Odd(p, q) => write!(f, "I{p},{q}"),
        }
    }
}

/// A catalog lattice by name.
pub fn named(name: &str) -> Result<IntegerLattice> {
    Ok(CatalogName::parse(name)?.lattice())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LatticeExpr {
    Named(CatalogName),
    Scale(Box<LatticeExpr>, BigInt),
    Repeat(u32, Box<LatticeExpr>),
    Sum(Vec<LatticeExpr>),
}

impl LatticeExpr {
    pub fn evaluate(&self) -> Result<IntegerLattice> {
        match self {
            LatticeExpr::Named(n) => Ok(n.lattice()),
            LatticeExpr::Scale(e, a) => e.evaluate()?.rescale(a),
            LatticeExpr::Repeat(k, e) => {
                let l = e.evaluate()?;
                Ok((0..*k).fold(IntegerLattice::zero(), |acc, _| acc.direct_sum(&l)))
            }
            LatticeExpr::Sum(terms) => terms
                .iter()
                .try_fold(IntegerLattice::zero(), |acc, t| Ok(acc.direct_sum(&t.evaluate()?))),
        }
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeExpr::Named(n) => write!(f, "{n}"),
            other => write!(f, "({other})"),
        }
    }
}

impl fmt::Display for LatticeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeExpr::Named(n) => write!(f, "{n}"),
            LatticeExpr::Scale(e, a) => {
                e.fmt_atom(f)?;
                write!(f, "({a})")
            }
            LatticeExpr::Repeat(k, e) => {
                write!(f, "{k}*")?;
                match e.as_ref() {
                    LatticeExpr::Scale(..) => write!(f, "{e}"),
                    _ => e.fmt_atom(f),
                }
            }
            LatticeExpr::Sum(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    match t {
                        LatticeExpr::Sum(_) => t.fmt_atom(f)?,
                        _ => write!(f, "{t}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

/// Parses `expr := term ("+" term)*`,
/// `term := [count "*"] atom ["(" integer ")"]`, `atom := name | "(" expr ")"`.
/// Whitespace is ignored everywhere.
pub fn parse(text: &str) -> Result<LatticeExpr> {
    let chars: Vec<(usize, char)> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    let mut p = Parser {
        chars,
        pos: 0,
        len: text.len(),
    };
    let e = p.expr()?;
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses and evaluates an expression.
pub fn build(text: &str) -> Result<IntegerLattice> {
    parse(text)?.evaluate()
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |&(o, _)| o)
    }

    fn error(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.offset(),
            msg: msg.to_string(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<LatticeExpr> {
        let mut terms = vec![self.term()?];
        while self.eat('+') {
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            LatticeExpr::Sum(terms)
        })
    }

    fn integer(&mut self, signed: bool) -> Option<String> {
        let start = self.pos;
        let mut s = String::new();
        if signed && self.peek() == Some('-') {
            s.push('-');
            self.pos += 1;
        }
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
            s.push(c);
            self.pos += 1;
        }
        if s.is_empty() || s == "-" {
            self.pos = start;
            None
        } else {
            Some(s)
        }
    }

    fn term(&mut self) -> Result<LatticeExpr> {
        let start = self.pos;
        let count = match self.integer(false) {
            Some(digits) => {
                if !self.eat('*') {
                    self.pos = start;
                    return Err(self.error("expected `*` after repeat count"));
                }
                Some(digits.parse::<u32>().map_err(|_| Error::Syntax {
                    pos: self.chars[start].0,
                    msg: "repeat count too large".into(),
                })?)
            }
            None => None,
        };
        let mut atom = self.atom()?;
        if self.peek() == Some('(') {
            let open = self.pos;
            self.pos += 1;
            let Some(digits) = self.integer(true) else {
                self.pos = open;
                return Err(self.error("expected integer scale"));
            };
            if !self.eat(')') {
                return Err(self.error("expected `)`"));
            }
            let a: BigInt = digits.parse().expect("validated digits");
            if a.is_zero() {
                return Err(Error::ZeroScale);
            }
            atom = LatticeExpr::Scale(Box::new(atom), a);
        }
        Ok(match count {
            Some(k) => LatticeExpr::Repeat(k, Box::new(atom)),
            None => atom,
        })
    }

    fn atom(&mut self) -> Result<LatticeExpr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some('<') => {
                let start = self.pos;
                let mut name = String::new();
                while let Some(c) = self.peek() {
                    name.push(c);
                    self.pos += 1;
                    if c == '>' {
                        break;
                    }
                }
                if !name.ends_with('>') {
                    self.pos = start;
                    return Err(self.error("unterminated `<k>`"));
                }
                Ok(LatticeExpr::Named(CatalogName::parse(&name)?))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(c) = self.peek().filter(|c| c.is_ascii_alphabetic()) {
                    name.push(c);
                    self.pos += 1;
                }
                while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                    name.push(c);
                    self.pos += 1;
                }
                if (name == "I" || (name.starts_with('I') && self.peek() == Some(',')))
                    && self.eat(',') {
                        name.push(',');
                        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                            name.push(c);
                            self.pos += 1;
                        }
                    }
                Ok(LatticeExpr::Named(CatalogName::parse(&name)?))
            }
            _ => Err(self.error("expected a lattice name or `(`")),
        }
    }
}

/// Expressions for every catalog lattice used across the test suites and
/// the CLI examples.
pub fn fixtures() -> Vec<&'static str> {
    vec![
        "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "D4", "D5", "D6", "D7", "D8", "E6", "E7", "E8", "U",
        "U(2)", "U(3)", "A1(-1)", "A2(-1)", "D4(-1)", "E7(-1)", "E8(-1)", "A1(2)", "A2(2)", "D4(2)", "E6(2)",
        "E7(2)", "E8(2)", "<2>", "<4>", "<6>", "<-2>", "<-6>", "A2 + U", "D4 + U(2)", "2*A1 + A1(-1)",
        "3*D4 + 2*U", "D4 + E8 + U(2) + U", "D4 + E8 + 2*U(2)", LAMBDA0, K3_LATTICE, "E6(2) + 3*D4 + 2*U",
        "I21,2", "I1,1", "<1>", "<3>",
    ]
}

/// Size bound used when a fixture is too large for brute force.
pub fn is_small(l: &IntegerLattice, max_det: u64) -> bool {
    l.determinant().abs().to_u64().is_some_and(|d| d <= max_det)
}
