use cylalg::fragment::{closed_index, padding_label};
use cylalg::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn tuple(max_len: usize) -> impl Strategy<Value = Tuple> {
    prop::collection::vec(0u64..5, 0..=max_len).prop_map(Tuple::from_values)
}

fn monomial() -> impl Strategy<Value = Monomial> {
    (0usize..=3)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0u64..4, n),
                prop::collection::vec(0u64..4, n),
            )
        })
        .prop_map(|(a, b)| Monomial::new(Tuple::from_values(a), Tuple::from_values(b)).unwrap())
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-3i64..=3, 1i64..=3, -2i64..=2).prop_map(|(n, d, im)| {
        Scalar::new(
            BigRational::new(BigInt::from(n), BigInt::from(d)),
            BigRational::from_integer(BigInt::from(im)),
        )
    })
}

fn polynomial() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((scalar(), monomial()), 0..=4).prop_map(|terms| {
        let mut p = Polynomial::zero();
        for (c, m) in terms {
            p.add_term(c, m);
        }
        p
    })
}

fn state() -> impl Strategy<Value = DiagonalState> {
    prop::collection::btree_map((tuple(3), 0u64..5), 1i64..5, 1..=4).prop_map(|points| {
        let total: i64 = points.values().sum();
        let support = points
            .into_iter()
            .map(|((prefix, tail), w)| {
                (
                    SequenceDesc::new(prefix, Label(tail)),
                    BigRational::new(w.into(), total.into()),
                )
            })
            .collect::<Vec<_>>();
        // Distinct (prefix, tail) pairs may still describe the same point.
        let mut seen = Vec::new();
        let support: Vec<_> = support
            .into_iter()
            .filter(|(x, _)| {
                let fresh = !seen.contains(x);
                seen.push(x.clone());
                fresh
            })
            .collect();
        let total: BigRational = support.iter().map(|(_, w)| w.clone()).sum();
        DiagonalState::new(support.into_iter().map(|(x, w)| (x, w / &total)).collect()).unwrap()
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        scalar().prop_map(Expr::Scalar),
        tuple(3).prop_map(Expr::Projection),
        monomial().prop_map(|m| Expr::from_monomial(&m)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Adjoint(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Negate(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Product(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sum(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Difference(Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #[test]
    fn ring_laws(p in polynomial(), q in polynomial(), r in polynomial()) {
        prop_assert_eq!(p.multiply(&q).multiply(&r), p.multiply(&q.multiply(&r)));
        prop_assert_eq!(p.multiply(&q.add(&r)), p.multiply(&q).add(&p.multiply(&r)));
        prop_assert_eq!(p.add(&q).multiply(&r), p.multiply(&r).add(&q.multiply(&r)));
        prop_assert_eq!(p.multiply(&q).adjoint(), q.adjoint().multiply(&p.adjoint()));
        prop_assert_eq!(p.adjoint().adjoint(), p.clone());
        prop_assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn unit_is_the_empty_projection(p in polynomial()) {
        let one = Polynomial::scalar(Scalar::one());
        prop_assert_eq!(one.multiply(&p), p.clone());
        prop_assert_eq!(p.multiply(&one), p);
    }

    #[test]
    fn fragment_is_multiplicative(p in polynomial(), q in polynomial(), extra in 0usize..2) {
        let level = p.max_tuple_len().max(q.max_tuple_len()).max(1) + extra;
        let pad = padding_label(&[&p, &q]);
        let index = closed_index(&[&p, &q], level, pad).unwrap();
        let m = |x: &Polynomial| FragmentMatrix::on_index(x, level, pad, index.clone()).unwrap();
        prop_assert_eq!(m(&p).multiply(&m(&q)).unwrap(), m(&p.multiply(&q)));
        prop_assert_eq!(m(&p).adjoint(), m(&p.adjoint()));
        prop_assert!(m(&p.adjoint().multiply(&p)).is_psd());
    }

    #[test]
    fn states_are_positive_and_satisfy_cauchy_schwarz(rho in state(), a in polynomial(), b in polynomial()) {
        let aa = rho.eval(&a.adjoint().multiply(&a));
        let bb = rho.eval(&b.adjoint().multiply(&b));
        prop_assert!(aa.is_real() && !(aa.re < BigRational::zero()));
        prop_assert!(bb.is_real() && !(bb.re < BigRational::zero()));
        let ba = rho.eval(&b.adjoint().multiply(&a));
        prop_assert!(ba.norm_sqr() <= &aa.re * &bb.re);
        prop_assert_eq!(rho.eval(&Polynomial::scalar(Scalar::one())), Scalar::one());
        prop_assert_eq!(rho.eval(&a.adjoint()), rho.eval(&a).conj());
    }

    #[test]
    fn printing_then_parsing_preserves_value(e in expr()) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(back.eval(), e.eval(), "{}", printed);
        let p = e.eval();
        prop_assert_eq!(parse_polynomial(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn g_is_constant_on_long_cylinders(p in polynomial(), ext in tuple(2), tail in 0u64..6, extra in tuple(2)) {
        let t = ext.concat(&Tuple::from_values(std::iter::repeat_n(1, p.max_tuple_len())));
        let x = SequenceDesc::new(t.concat(&extra), Label(tail));
        prop_assert_eq!(p.g_on_cylinder(&t).unwrap(), p.g_eval(&x));
    }

    #[test]
    fn registry_audit_survives_interleaving(
        ops in prop::collection::vec(prop_oneof![
            (tuple(3), tuple(3)).prop_map(Ok),
            (state(), 1usize..4).prop_map(Err),
        ], 1..40)
    ) {
        let mut reg = Registry::new();
        for op in &ops {
            match op {
                Ok((a, b)) => {
                    let g = reg.link(a, b);
                    prop_assert_eq!(
                        normal_form(&[g.monomial(), Monomial::projection(g.a.clone()), g.monomial().adjoint()]),
                        Some(Monomial::projection(g.b.clone()))
                    );
                }
                Err((rho, h)) => { reg.register_protection(rho, *h); }
            }
        }
        prop_assert_eq!(reg.audit(), Ok(()));
    }
}
