use proptest::prelude::*;

use super::*;
use crate::padic::Valuation::{AtLeast, Exact};

fn root_pt(p: u64) -> Tower {
    TowerSpec::new(p)
        .laurent("t")
        .eisenstein("pi", &format!("X^{p} - {p}*t"))
        .build()
        .unwrap()
}

const ROOT_PT_DOC: &str = r#"
# Q_3{{t}}(pi), pi^3 = 3t
p = 3
precision = 64
[[step]] kind = "laurent"    var = "t"  window = [-32, 32]
[[step]] kind = "eisenstein" var = "pi" poly = "X^3 - 3*t"
"#;

#[test]
fn parses_the_type_two_example() {
    let spec = TowerSpec::parse(ROOT_PT_DOC).unwrap();
    assert_eq!(spec.p, 3);
    assert_eq!(spec.precision, 64);
    assert_eq!(
        spec.steps,
        vec![
            StepSpec::Laurent {
                var: "t".into(),
                window: (-32, 32)
            },
            StepSpec::Eisenstein {
                var: "pi".into(),
                poly: "X^3 - 3*t".into()
            },
        ]
    );
}

#[test]
fn step_keys_may_span_lines() {
    let doc = "p = 5\n[[step]]\nkind = \"eisenstein\"\nvar = \"a\"\npoly = \"X^2 - 5\"\n";
    let spec = TowerSpec::parse(doc).unwrap();
    assert_eq!(spec.precision, crate::padic::DEFAULT_PRECISION);
    assert_eq!(spec.steps.len(), 1);
}

#[test]
fn rejects_non_eisenstein_constant_term() {
    let doc = "p = 3\n[[step]] kind = \"eisenstein\" var = \"pi\" poly = \"X^3 - 9\"";
    assert!(matches!(
        TowerSpec::parse(doc),
        Err(Error::NotEisenstein { .. })
    ));
    let unit_coeff = TowerSpec::new(3).eisenstein("pi", "X^2 + X - 3").build();
    assert!(matches!(unit_coeff, Err(Error::NotEisenstein { .. })));
}

#[test]
fn rejects_unramified_after_laurent() {
    let doc = "p = 3\n[[step]] kind = \"laurent\" var = \"t\"\n[[step]] kind = \"unramified\" var = \"a\" poly = \"X^2 + 1\"";
    assert_eq!(
        TowerSpec::parse(doc),
        Err(Error::UnramifiedAfterLaurent("a".into()))
    );
}

#[test]
fn rejects_structural_problems() {
    let dup = TowerSpec::new(3).laurent("t").laurent("t").build();
    assert!(matches!(dup, Err(Error::DuplicateVariable(v)) if v == "t"));
    assert!(matches!(TowerSpec::new(6).build(), Err(Error::NonPrimeP(6))));
    let unknown = "p = 3\nfoo = 1\n";
    assert!(matches!(
        TowerSpec::parse(unknown),
        Err(Error::Syntax { line: 2, column: 1, .. })
    ));
    let step_key = "p = 3\n[[step]] kind = \"laurent\" var = \"t\" colour = \"red\"";
    assert!(matches!(
        TowerSpec::parse(step_key),
        Err(Error::Syntax { line: 2, .. })
    ));
    let bad_value = "p = 3\nprecision = \"high\"";
    assert!(matches!(TowerSpec::parse(bad_value), Err(Error::Syntax { line: 2, .. })));
    let not_monic = TowerSpec::new(3).eisenstein("pi", "2*X^2 - 3").build();
    assert!(matches!(not_monic, Err(Error::NotMonic(_))));
}

#[test]
fn syntax_errors_carry_positions() {
    let doc = "p = 3\n[[step]] kind = \"laurent\" var = \"t\" window = [-2 3]";
    match TowerSpec::parse(doc) {
        Err(Error::Syntax { line, column, .. }) => {
            assert_eq!(line, 2);
            assert_eq!(column, 50);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn poly_expressions() {
    let base = TowerSpec::new(3).laurent("t").build().unwrap();
    let mut f = parse_poly("X^3 - 3*t", &base).unwrap();
    f.trim(&base, 1);
    assert_eq!(f.degree(), Some(3));
    let minus_3t = base.element("-3*t").unwrap();
    assert!(base.eq_at_precision(1, &f.coeffs[0], &minus_3t));
    assert!(base.eq_at_precision(1, &f.coeffs[3], &base.one(1)));

    let qp = TowerSpec::new(3).build().unwrap();
    let f = parse_poly("X^2 - 3", &qp).unwrap();
    assert_eq!(f.degree(), Some(2));
    assert!(qp.eq_at_precision(0, &f.coeffs[0], &qp.int(-3)));

    assert_eq!(
        parse_poly("X^2 - y", &qp).unwrap_err(),
        Error::UnknownIdentifier("y".into())
    );
    assert!(matches!(parse_poly("X^", &qp), Err(Error::Syntax { .. })));
    assert!(matches!(parse_poly("(X + 1", &qp), Err(Error::Syntax { .. })));
    assert!(matches!(parse_poly("X $ 1", &qp), Err(Error::Syntax { column: 3, .. })));
}

#[test]
fn valuations_in_the_type_two_example() {
    let k = root_pt(3);
    let pi = k.var("pi").unwrap();
    let t = k.var("t").unwrap();
    assert_eq!(k.v(&k.int(3)), Exact(3));
    assert_eq!(k.v(&t), Exact(0));
    assert_eq!(k.v(&pi), Exact(1));
    assert_eq!(k.v(&k.int(1)), Exact(0));

    // 3 = pi^3 * t^{-1}
    let top = k.top();
    let t_inv = k.inverse_unit(top, &t).unwrap();
    let pi3 = k.pow(top, &pi, 3).unwrap();
    let three = k.mul(top, &pi3, &t_inv).unwrap();
    assert!(k.eq_at_precision(top, &three, &k.int(3)));

    let x = k.element("pi^2 + 3").unwrap();
    assert_eq!(k.v(&x), Exact(2));
}

#[test]
fn ramification_indices() {
    assert_eq!(root_pt(3).ramification_index(), 3);
    assert_eq!(TowerSpec::new(3).build().unwrap().ramification_index(), 1);
    let k = TowerSpec::new(3)
        .eisenstein("pi", "X^2 - 3")
        .laurent("t")
        .build()
        .unwrap();
    assert_eq!(k.ramification_index(), 2);
    assert_eq!(k.v(&k.int(3)), Exact(2));
}

/// Roots of `X^2 + 1` in `F_3`, found by trying every element.
fn roots_mod_3() -> usize {
    (0..3u64).filter(|x| (x * x + 1) % 3 == 0).count()
}

#[test]
fn residue_fields() {
    let f = root_pt(3).residue_field();
    assert_eq!(f.q, 3);
    assert_eq!(f.laurent_vars, vec!["t".to_string()]);
    assert_eq!(f.to_string(), "F_3((t\u{304}))");

    let f = TowerSpec::new(3).build().unwrap().residue_field();
    assert_eq!((f.q, f.is_perfect()), (3, true));

    assert_eq!(roots_mod_3(), 0);
    let k = TowerSpec::new(3)
        .unramified("a", "X^2 + 1")
        .laurent("t")
        .build()
        .unwrap();
    let f = k.residue_field();
    assert_eq!(f.q, 9);
    assert_eq!(f.laurent_vars, vec!["t".to_string()]);
}

#[test]
fn unramified_validation() {
    let reducible = TowerSpec::new(3).unramified("a", "X^2 + 2").build();
    assert!(matches!(reducible, Err(Error::NotUnramifiedSeparable { .. })));
    let inseparable = TowerSpec::new(3).unramified("a", "X^3 - 1").build();
    assert!(matches!(inseparable, Err(Error::NotUnramifiedSeparable { .. })));
    // X^3 - X - 1 is irreducible over F_3 (Artin-Schreier)
    let k = TowerSpec::new(3).unramified("a", "X^3 - X - 1").build().unwrap();
    assert_eq!(k.residue_field().q, 27);
    // X^2 + 1 over F_9 = F_3(a), a^2 = -1, splits
    let split = TowerSpec::new(3)
        .unramified("a", "X^2 + 1")
        .unramified("b", "X^2 + 1")
        .build();
    assert!(matches!(split, Err(Error::NotUnramifiedSeparable { .. })));
    // in F_9 = F_3(a): a^4 = 1 so a is a square, (a + 1)^4 = -1 so a + 1 is not
    let square = TowerSpec::new(3)
        .unramified("a", "X^2 + 1")
        .unramified("b", "X^2 - a")
        .build();
    assert!(matches!(square, Err(Error::NotUnramifiedSeparable { .. })));
    let k = TowerSpec::new(3)
        .unramified("a", "X^2 + 1")
        .unramified("b", "X^2 - a - 1")
        .build()
        .unwrap();
    assert_eq!(k.residue_field().q, 81);
}

#[test]
fn arithmetic_examples() {
    let k = root_pt(3);
    let top = k.top();
    let pi = k.var("pi").unwrap();
    let pi2 = k.mul(top, &pi, &pi).unwrap();
    let prod = k.mul(top, &pi, &pi2).unwrap();
    assert!(k.eq_at_precision(top, &prod, &k.element("3*t").unwrap()));

    let l = TowerSpec::new(3).laurent("t").build().unwrap();
    let t = l.var("t").unwrap();
    let t_inv = l.inverse_unit(1, &t).unwrap();
    assert!(l.eq_at_precision(1, &l.mul(1, &t, &t_inv).unwrap(), &l.int(1)));
    let a = l.element("1 + t").unwrap();
    let b = l.element("1 - t").unwrap();
    let c = l.mul(1, &a, &b).unwrap();
    assert!(l.eq_at_precision(1, &c, &l.element("1 - t^2").unwrap()));
    assert_eq!(l.render(1, &c), "1 - t^2");
}

#[test]
fn generator_satisfies_its_minimal_polynomial() {
    for k in [
        root_pt(3),
        root_pt(5),
        TowerSpec::new(5)
            .unramified("a", "X^2 + 2")
            .eisenstein("pi", "X^3 + 5*a*X - 5")
            .build()
            .unwrap(),
    ] {
        let top = k.top();
        let LayerKind::Eisenstein { min_poly } = &k.layer(top).kind else {
            unreachable!()
        };
        let pi = k.generator(top).unwrap();
        let mut acc = k.pow(top, &pi, min_poly.len() as u64).unwrap();
        for (j, c) in min_poly.iter().enumerate() {
            let cj = k.lift(top - 1, top, c.clone());
            let term = k.mul(top, &cj, &k.pow(top, &pi, j as u64).unwrap()).unwrap();
            acc = k.add(top, &acc, &term).unwrap();
        }
        assert_eq!(k.v(&acc), AtLeast(k.cap(top)));
    }
}

#[test]
fn window_overflow_is_reported() {
    let r = TowerSpec::new(3)
        .laurent_window("t", (-4, 4))
        .eisenstein("pi", "X^2 - 3*t^5")
        .build();
    assert!(matches!(r, Err(Error::WindowOverflow(_))));
}

#[test]
fn inverses_track_truncation() {
    let l = TowerSpec::new(3).laurent("t").build().unwrap();
    // 1 + 3t: p-adically convergent expansion, truncation only at high valuation
    let u = l.element("1 + 3*t").unwrap();
    let ui = l.inverse_unit(1, &u).unwrap();
    let r = l.sub(1, &l.one(1), &l.mul(1, &u, &ui).unwrap()).unwrap();
    assert!(l.valuation(1, &r).lower_bound() >= 33);
    assert_eq!(l.valuation(1, &ui), Exact(0));

    // 1 + t: the inverse is an infinite power series in t
    let u = l.element("1 + t").unwrap();
    let ui = l.inverse_unit(1, &u).unwrap();
    assert_eq!(ui.tail(), Some(0));
    assert_eq!(l.valuation(1, &ui), AtLeast(0));

    assert_eq!(l.inverse_unit(1, &l.int(3)), Err(Error::NotAUnit));
}

#[test]
fn uniformizer_division() {
    let k = root_pt(3);
    let top = k.top();
    let x = k.element("3*pi^2").unwrap();
    let mut y = x.clone();
    for _ in 0..5 {
        y = k.div_uniformizer(top, &y).unwrap();
    }
    // 3*pi^2 / pi^5 = 3 / pi^3 = 1/t
    let t = k.var("t").unwrap();
    assert!(k.eq_at_precision(top, &k.mul(top, &y, &t).unwrap(), &k.int(1)));
    let q = k.div_exact(top, &x, &k.int(-3)).unwrap();
    assert!(k.eq_at_precision(top, &q, &k.element("-pi^2").unwrap()));
}

type Shape = (Vec<i64>, Vec<i64>);

fn shape() -> impl Strategy<Value = Shape> {
    (
        prop::collection::vec(-9i64..=9, 3),
        prop::collection::vec(-2i64..=2, 3),
    )
}

/// `c0*t^e0 + c1*pi*t^e1 + c2*pi^2*t^e2` with exponents in `[-2, 2]`.
fn small_elem(k: &Tower, (c, e): &Shape) -> Elem {
    let text = format!(
        "{}*t^{} + {}*pi*t^{} + {}*pi^2*t^{}",
        c[0],
        e[0] + 2,
        c[1],
        e[1] + 2,
        c[2],
        e[2] + 2
    );
    let top = k.top();
    let x = k.element(&text).unwrap();
    let t2 = k.element("t^2").unwrap();
    let t2i = k.inverse_unit(top, &t2).unwrap();
    k.mul(top, &x, &t2i).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuation_is_multiplicative_and_ultrametric(
        a in shape(), b in shape()
    ) {
        let k = root_pt(3);
        let (x, y) = (small_elem(&k, &a), small_elem(&k, &b));
        let top = k.top();
        let (vx, vy) = (k.v(&x), k.v(&y));
        if let (Exact(a), Exact(b)) = (vx, vy) {
            prop_assert_eq!(k.v(&k.mul(top, &x, &y).unwrap()), Exact(a + b));
            let s = k.v(&k.add(top, &x, &y).unwrap());
            prop_assert!(s.lower_bound() >= a.min(b));
            if a != b {
                prop_assert_eq!(s, Exact(a.min(b)));
            }
        }
    }

    #[test]
    fn ramification_index_is_valuation_of_p(n in 1u32..5, m in 2u32..4, laurent_first in any::<bool>()) {
        let mut spec = TowerSpec::new(5);
        if laurent_first {
            spec = spec.laurent("t");
        }
        spec = spec.eisenstein("a", &format!("X^{n} - 5"));
        spec = spec.eisenstein("b", &format!("X^{m} + 5*X - a"));
        let k = spec.build().unwrap();
        prop_assert_eq!(k.ramification_index(), n * m);
        prop_assert_eq!(k.v(&k.int(5)), Exact(n * m));
        prop_assert_eq!(k.v(&k.var("b").unwrap()), Exact(1));
        prop_assert_eq!(k.v(&k.var("a").unwrap()), Exact(m));
        if laurent_first {
            prop_assert_eq!(k.v(&k.var("t").unwrap()), Exact(0));
        }
    }
}
