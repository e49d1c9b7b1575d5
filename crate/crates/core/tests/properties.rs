use latticeforge::catalog::CatalogName;
use latticeforge::discform::{self, discriminant_form_lifted};
use latticeforge::embeddings::{self, SublatticeBasis};
use latticeforge::intmat::{self, IntMatrix};
use latticeforge::nikulin::{self, two_elementary_exists, TwoElemInvariants};
use latticeforge::{build, classify, discriminant_form, IntegerLattice, LatticeExpr};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

const PIECES: &[&str] = &[
    "A1", "A2", "A3", "D4", "E6", "E7", "U", "U(2)", "U(3)", "<2>", "<6>", "<-2>", "<-4>", "A1(-1)", "A2(-1)",
    "A2(2)", "D4(-1)",
];

fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-9i64..=9, rows * cols)
        .prop_map(move |v| IntMatrix::from_i64(&v.chunks(cols).map(|c| c.to_vec()).collect::<Vec<_>>()))
}

fn lattice() -> impl Strategy<Value = IntegerLattice> {
    prop::collection::vec(prop::sample::select(PIECES), 1..4).prop_map(|ps| build(&ps.join(" + ")).unwrap())
}

/// A random unimodular matrix as a product of elementary operations.
fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
    let mut rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    for &(a, b, k) in ops {
        let (a, b) = (a % n, b % n);
        if a == b {
            rows.swap(a, (a + 1) % n);
            continue;
        }
        for j in 0..n {
            rows[a][j] += k * rows[b][j];
        }
    }
    IntMatrix::from_i64(&rows)
}

fn ops() -> impl Strategy<Value = Vec<(usize, usize, i64)>> {
    prop::collection::vec((0usize..32, 0usize..32, -2i64..=2), 0..12)
}

fn expr() -> impl Strategy<Value = LatticeExpr> {
    let leaf = prop_oneof![
        (1usize..9).prop_map(|n| LatticeExpr::Named(CatalogName::A(n))),
        (4usize..9).prop_map(|n| LatticeExpr::Named(CatalogName::D(n))),
        (6usize..9).prop_map(|n| LatticeExpr::Named(CatalogName::E(n))),
        Just(LatticeExpr::Named(CatalogName::U)),
        prop_oneof![-7i64..=-1, 1i64..=7].prop_map(|k| LatticeExpr::Named(CatalogName::Rank1(k.into()))),
        (0usize..4, 0usize..4).prop_map(|(p, q)| LatticeExpr::Named(CatalogName::Odd(p, q))),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), prop_oneof![-5i64..=-1, 2i64..=5]).prop_map(|(e, a)| LatticeExpr::Scale(Box::new(e), a.into())),
            (0u32..4, inner.clone()).prop_map(|(k, e)| LatticeExpr::Repeat(k, Box::new(e))),
            prop::collection::vec(inner, 2..4).prop_map(LatticeExpr::Sum),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snf_reconstructs(m in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| small_matrix(r, c))) {
        let (rows, cols) = (m.nrows(), m.ncols());
        let snf = intmat::smith_normal_form(&m);
        prop_assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.d.clone());
        prop_assert_eq!(snf.v.mul(&snf.v_inv), IntMatrix::identity(cols));
        prop_assert_eq!(intmat::determinant(&snf.u).magnitude().clone(), BigInt::one().magnitude().clone());
        let diag = snf.diagonal();
        for i in 0..rows.min(cols) {
            for j in 0..rows.min(cols) {
                if i != j {
                    prop_assert!(snf.d[(i, j)].is_zero());
                }
            }
        }
        for w in diag.windows(2) {
            prop_assert!(w[0] >= BigInt::zero());
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }
        let h = intmat::hermite_normal_form(&m);
        prop_assert_eq!(intmat::hermite_normal_form(&h), h.clone());
        prop_assert_eq!(h.nrows(), snf.rank());
    }

    #[test]
    fn basis_change_invariants(l in lattice(), ops in ops()) {
        let b = unimodular(l.rank(), &ops);
        let m = l.in_basis(&b).unwrap();
        prop_assert_eq!(m.determinant(), l.determinant());
        prop_assert_eq!(m.signature().unwrap(), l.signature().unwrap());
        prop_assert_eq!(m.is_even(), l.is_even());
        prop_assert_eq!(m.discriminant_group().unwrap(), l.discriminant_group().unwrap());
    }

    #[test]
    fn discriminant_form_identities(l in lattice()) {
        prop_assume!(l.is_even());
        let q = discriminant_form(&l).unwrap();
        prop_assume!(q.order() <= 256);
        prop_assert_eq!(BigInt::from(q.order()), l.determinant().magnitude().clone().into());
        prop_assert!(q.is_nondegenerate());
        let elements: Vec<_> = q.elements().collect();
        let two = BigRational::from(BigInt::from(2));
        for x in elements.iter().take(16) {
            for y in &elements {
                let lhs = q.evaluate(&q.add(x, y)).unwrap();
                let rhs = q.evaluate(x).unwrap() + q.evaluate(y).unwrap() + &two * q.bilinear(x, y).unwrap();
                let diff = (lhs - rhs) / &two;
                prop_assert!(diff.is_integer());
            }
        }
        let sig = l.signature().unwrap();
        let expected = (sig.difference().rem_euclid(8)) as u8;
        prop_assert_eq!(q.milgram_signature(1 << 12).unwrap(), expected);
        prop_assert_eq!(q.negate().milgram_signature(1 << 12).unwrap(), (8 - expected) % 8);
    }

    #[test]
    fn classify_ignores_basis(ops in ops(), which in 0usize..4) {
        let t = build(["3*D4 + 2*U", "D4 + E8 + U(2) + U", "A2 + 2*E8 + 2*U", "E6(2) + 2*U + 4*A1"][which]).unwrap();
        let b = unimodular(t.rank(), &ops);
        prop_assert_eq!(classify(&t.in_basis(&b).unwrap()).unwrap(), classify(&t).unwrap());
    }

    #[test]
    fn printer_round_trip(e in expr()) {
        let printed = e.to_string();
        prop_assert_eq!(latticeforge::parse(&printed).unwrap(), e.clone());
        prop_assert_eq!(build(&printed).unwrap(), e.evaluate().unwrap());
    }

    #[test]
    fn complement_of_complement_is_saturation(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..3)) {
        let ambient = build("A1 + A1(-1) + U").unwrap();
        let Ok(sub) = SublatticeBasis::from_i64(ambient, &rows) else {
            return Ok(());
        };
        let comp = embeddings::complement_basis(&sub).unwrap();
        prop_assert_eq!(comp.rank() + sub.rank(), 4);
        let back = embeddings::complement_basis(&comp).unwrap();
        let sat = sub.saturation();
        prop_assert_eq!(intmat::hermite_normal_form(back.basis()), intmat::hermite_normal_form(sat.basis()));
        prop_assert!(comp.is_primitive());
    }
}

#[test]
fn existence_is_swap_symmetric() {
    for tp in 0..=12 {
        for tm in 0..=12 {
            for l in 0..=12 {
                for delta in 0..=1 {
                    let inv = TwoElemInvariants::new(tp, tm, l, delta);
                    assert_eq!(two_elementary_exists(inv), two_elementary_exists(inv.swapped()), "{inv:?}");
                }
            }
        }
    }
}

#[test]
fn complement_order_does_not_matter() {
    let rules = nikulin::ExistenceRules::default();
    assert_eq!(
        nikulin::enumerate_2elem_candidates_with(rules, false),
        nikulin::enumerate_2elem_candidates_with(rules, true)
    );
}

#[test]
fn catalog_two_elementary_lattices_exist() {
    for f in latticeforge::catalog::fixtures() {
        let l = build(f).unwrap();
        if !l.is_even() || !l.discriminant_group().unwrap().is_two_elementary() {
            continue;
        }
        let inv = TwoElemInvariants::of_lattice(&l).unwrap();
        assert!(two_elementary_exists(inv), "{f}: {inv:?}");
    }
}

fn sorted_q_values(q: &latticeforge::FiniteQuadraticForm) -> Vec<BigRational> {
    let mut v: Vec<_> = q.elements().map(|x| q.evaluate(&x).unwrap()).collect();
    v.sort();
    v
}

#[test]
fn overlattice_form_is_perp_quotient() {
    for (a, b) in [("A2", "A2(-1)"), ("D4", "D4"), ("A1", "E7"), ("A2", "E6"), ("U(2)", "U(2)"), ("A1 + A2", "A1(-1) + A2(-1)")] {
        let (a, b) = (build(a).unwrap(), build(b).unwrap());
        let glue = embeddings::anti_isometry_glue(&a, &b, None, 1 << 12).unwrap().expect("anti-isometric");
        let over = embeddings::overlattice(&glue).unwrap();
        let lifted = discriminant_form_lifted(&glue.base).unwrap();
        let h: Vec<_> = glue.generators.iter().map(|g| lifted.element_of(g).unwrap()).collect();
        let quotient = lifted.form.subgroup_perp_quotient(&h).unwrap();
        let direct = discriminant_form(&over).unwrap();
        assert_eq!(quotient.order(), direct.order());
        assert_eq!(quotient.group().length(), direct.group().length());
        assert_eq!(sorted_q_values(&quotient), sorted_q_values(&direct));
        assert!(over.is_even());
    }
}

#[test]
fn anti_isometries_are_exhaustively_correct() {
    for (a, b) in [("A2", "A2(-1)"), ("D4", "D4(-1)"), ("3*A1", "3*A1(-1)"), ("E6", "A2")] {
        let q1 = discriminant_form(&build(a).unwrap()).unwrap();
        let q2 = discriminant_form(&build(b).unwrap()).unwrap();
        let images = discform::find_anti_isometry(&q1, &q2, 1 << 12).unwrap().expect("anti-isometric");
        for x in q1.elements() {
            let y = discform::apply_map(&q1, &q2, &images, &x).unwrap();
            let s = q1.evaluate(&x).unwrap() + q2.evaluate(&y).unwrap();
            assert!((s / BigRational::from(BigInt::from(2))).is_integer(), "{a} -> {b}");
        }
    }
}
