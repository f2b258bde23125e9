use super::*;
use crate::tower::TowerSpec;
use proptest::prelude::*;

fn root_pt(p: u64) -> Tower {
    TowerSpec::new(p)
        .laurent("t")
        .eisenstein("pi", &format!("X^{p} - {p}*t"))
        .build()
        .unwrap()
}

/// Least integer m with m (p - 1) >= (ell + delta)(p - 1) + 2e, by search.
fn least_threshold(p: u64, e: u32, ell: u32, delta: u64) -> u64 {
    let rhs = (u64::from(ell) + delta) * (p - 1) + 2 * u64::from(e);
    (0..).find(|m| m * (p - 1) >= rhs).unwrap()
}

#[test]
fn threshold_examples() {
    let t = theorem_bounds(3, 3, 3, TypeKind::TypeII, 2);
    assert_eq!((t.rho_surjectivity_m0, t.cyclic_exponent_i0), (6, 6));
    assert_eq!(t.cyclic_kind, CyclicKind::TotallyRamified);
    assert_eq!(t.bound, Rational { num: 6, den: 1 });

    let t = theorem_bounds(3, 2, 1, TypeKind::TypeI, 2);
    assert_eq!((t.rho_surjectivity_m0, t.cyclic_exponent_i0), (4, 4));
    assert_eq!(t.cyclic_kind, CyclicKind::FerociouslyRamified);

    let t = theorem_bounds(5, 5, 5, TypeKind::TypeII, 2);
    assert_eq!(t.bound, Rational { num: 15, den: 2 });
    assert_eq!(t.rho_surjectivity_m0, 8);
    assert_eq!(t.bound.to_string(), "15/2");
}

#[test]
fn type_two_needs_q_at_least_two() {
    let t = theorem_bounds(3, 3, 3, TypeKind::TypeII, 1);
    assert!(t.rho_statement.contains("needs q ≥ 2"));
    let t = theorem_bounds(3, 3, 3, TypeKind::TypeII, 3);
    assert!(t.rho_statement.contains("Ω_F^1"));
    assert!(t.filtration_text.contains("K_3(K)"));
    assert_eq!(t.filtration_caveat, SHARPNESS_CAVEAT);
}

#[test]
fn miki_examples() {
    assert!(miki_check(5, 2).applies);
    assert!(!miki_check(3, 3).applies);
    assert!(miki_check(3, 1).applies);
    assert!(!miki_check(2, 1).applies);
}

#[test]
fn refinements_attach_to_the_family_only() {
    let has_p3 = |k: &Tower| {
        known_refinements(k)
            .iter()
            .any(|r| r.kind == RefinementKind::NoCyclicDegreeP3)
    };
    assert!(has_p3(&root_pt(3)));
    assert!(has_p3(&root_pt(5)));
    let sqrt3 = TowerSpec::new(3).eisenstein("pi", "X^2 - 3").build().unwrap();
    assert!(!has_p3(&sqrt3));
    let r = known_refinements(&sqrt3);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].kind, RefinementKind::MikiConstant);
    let sign = TowerSpec::new(3).laurent("t").eisenstein("pi", "X^3 + 3*t").build().unwrap();
    assert!(!has_p3(&sign));
    let extra = TowerSpec::new(3).laurent("t").eisenstein("pi", "X^3 + 3*X - 3*t").build().unwrap();
    assert!(!has_p3(&extra));
    let renamed = TowerSpec::new(3)
        .laurent_window("u", (-8, 8))
        .eisenstein("w", "X^3 - 3*u")
        .build()
        .unwrap();
    assert!(has_p3(&renamed));
    let two = TowerSpec::new(2).laurent("t").eisenstein("pi", "X^2 - 2*t").build().unwrap();
    assert!(!has_p3(&two));
}

#[test]
fn gr_table_examples() {
    let t = gr_k2_table(&root_pt(3), 10).unwrap();
    let at = |m: usize| &t.entries[m];
    assert_eq!(at(2).structure, GrStructure::Omega1F);
    assert_eq!(at(5).structure, GrStructure::Zero);
    assert_eq!(at(6).structure, GrStructure::FModFp);
    assert_eq!(at(6).annotation.as_deref(), Some("x ↦ {1 + pπ^p x, π}"));
    assert_eq!(at(9).structure, GrStructure::FPowPNMinus2);
    assert_eq!(at(9).n, Some(3));
    assert_eq!(at(9).annotation.as_deref(), Some("x ↦ {1 + p^n x, π}"));
}

#[test]
fn gr_table_preconditions() {
    let sqrt3 = TowerSpec::new(3).eisenstein("pi", "X^2 - 3").build().unwrap();
    assert!(matches!(gr_k2_table(&sqrt3, 10), Err(Error::FamilyMismatch(_))));
    let two = TowerSpec::new(2).laurent("t").eisenstein("pi", "X^2 - 2*t").build().unwrap();
    assert_eq!(gr_k2_table(&two, 10), Err(Error::PLeTwo));
}

#[test]
fn full_reports() {
    let r = full_report(&root_pt(3), ReportOptions::default()).unwrap();
    assert_eq!((r.e, r.ell), (3, 3));
    assert_eq!(r.verdict.kind, TypeKind::TypeII);
    assert_eq!(r.omega.free_rank, 1);
    assert_eq!(r.omega.diag_valuations, vec![3]);
    assert_eq!(r.thresholds.rho_surjectivity_m0, 6);
    assert_eq!(r.thresholds.cyclic_exponent_i0, 6);
    let g = r.gr_table.as_ref().unwrap();
    assert_eq!(g.entries.len(), 11);
    assert_eq!(g.index_note, GR_INDEX_NOTE);

    let q3 = full_report(&TowerSpec::new(3).build().unwrap(), ReportOptions::default()).unwrap();
    assert_eq!((q3.e, q3.ell, q3.omega.free_rank), (1, 0, 0));
    assert_eq!(q3.verdict.kind, TypeKind::TypeI);
    assert!(q3.miki.applies);
    assert!(q3.gr_table.is_none());

    let free = TowerSpec::new(3).laurent("t").build().unwrap();
    let r = full_report(&free, ReportOptions::default()).unwrap();
    assert_eq!((r.e, r.ell, r.omega.free_rank), (1, 0, 1));
    assert_eq!(r.verdict.kind, TypeKind::TypeI);
}

#[test]
fn errors_carry_their_stage() {
    let k = TowerSpec::new(3)
        .with_precision(9)
        .laurent("t")
        .eisenstein("pi", "X^3 - 3*t")
        .build()
        .unwrap();
    let err = full_report(&k, ReportOptions::default()).unwrap_err();
    assert_eq!(err.stage, Stage::Smith);
    assert!(matches!(err.error, Error::PrecisionExhausted(_)));
    assert!(err.to_string().starts_with("[dvr-smith] "));
}

#[test]
fn json_schema_is_strict() {
    let r = full_report(&root_pt(3), ReportOptions::default()).unwrap();
    let json = serde_json::to_value(&r).unwrap();
    let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    let mut want = vec!["p", "e", "ell", "type", "omega", "thresholds", "miki", "refinements", "gr_table"];
    want.sort_unstable();
    let mut got = keys.clone();
    got.sort_unstable();
    assert_eq!(got, want);
    assert_eq!(json["thresholds"]["rho_source"], "Ω_F^{q−2}");
    assert_eq!(json["type"]["kind"], "II");
    let back: FieldReport = serde_json::from_value(json.clone()).unwrap();
    assert_eq!(back, r);
    let mut extra = json;
    extra["thresholds"]["sharp"] = true.into();
    assert!(serde_json::from_value::<FieldReport>(extra).is_err());
}

#[test]
fn text_rendering() {
    let r = full_report(&root_pt(3), ReportOptions::default()).unwrap();
    let text = render_text(&r);
    assert!(text.contains("Ω̂¹: free rank 1; torsion O/(π³); ℓ = 3"));
    assert!(text.contains("type II; witness: dt − π²·dπ ↦ dt̄ ≠ 0"));
    assert!(text.contains("m = 3: a quotient of Ω¹_F/dF ⊕ F (unresolved)"));
    let sqrt3 = TowerSpec::new(3).eisenstein("pi", "X^2 - 3").build().unwrap();
    let r = full_report(&sqrt3, ReportOptions::default()).unwrap();
    assert_eq!(render_omega(&r.omega), "free rank 0; torsion O/(π¹); ℓ = 1");
}

fn kind() -> impl Strategy<Value = TypeKind> {
    prop_oneof![Just(TypeKind::TypeI), Just(TypeKind::TypeII)]
}

proptest! {
    #[test]
    fn thresholds_match_search_and_agree(
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
        e in 1u32..40, ell in 0u32..60, k in kind(), q in 1u32..5,
    ) {
        let t = theorem_bounds(p, e, ell, k, q);
        let delta = u64::from(k == TypeKind::TypeI);
        prop_assert_eq!(t.rho_surjectivity_m0, least_threshold(p, e, ell, delta));
        prop_assert_eq!(t.cyclic_exponent_i0, t.rho_surjectivity_m0);
        // ceiling: m0 >= bound > m0 - 1
        let m0 = t.rho_surjectivity_m0;
        prop_assert!(m0 * t.bound.den >= t.bound.num);
        prop_assert!(m0 == 0 || (m0 - 1) * t.bound.den < t.bound.num);
        let one = k == TypeKind::TypeI;
        prop_assert_eq!(t.rho_source == RhoSource::QMinusOne, one);
        prop_assert_eq!(t.cyclic_kind == CyclicKind::FerociouslyRamified, one);
        prop_assert_eq!(t.filtration_statement == FiltrationStatement::UmEqualsVm, one);
        // monotone in ell and e
        prop_assert!(theorem_bounds(p, e, ell + 1, k, q).rho_surjectivity_m0 >= m0);
        prop_assert!(theorem_bounds(p, e + 1, ell, k, q).rho_surjectivity_m0 >= m0);
    }

    #[test]
    fn gr_table_shape(p in prop::sample::select(vec![3u64, 5, 7, 11, 13]), m_max in 0u32..80) {
        let entries = gr_k2_entries(p, m_max);
        let p32 = p as u32;
        prop_assert_eq!(entries.len() as u32, m_max + 1);
        prop_assert_eq!(entries[0].structure, GrStructure::K2FPlusFStar);
        for e in &entries {
            if e.m >= p32 + 2 && e.m % p32 != 0 {
                prop_assert_eq!(e.structure, GrStructure::Zero);
            }
            if (1..p32).contains(&e.m) || e.m == p32 + 1 {
                prop_assert_eq!(e.structure, GrStructure::Omega1F);
            }
        }
        let unresolved = entries.iter().filter(|e| e.structure == GrStructure::QuotientOfOmega1FModDFPlusF).count();
        prop_assert_eq!(unresolved, usize::from(m_max >= p32));
    }
}
