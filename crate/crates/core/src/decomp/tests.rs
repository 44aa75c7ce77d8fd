use super::*;
use crate::field::FieldSpec;
use crate::oracle;

fn special_props(s: &SpecialDecomposition, c: &CompanionSpec, k: usize) {
    let cm = c.realize();
    assert_eq!(s.witness.pull_back(&cm).unwrap(), s.d);
    assert_eq!(s.e.add(&s.v).unwrap(), s.d);
    assert!(s.e.is_p_potent());
    assert!(s.v.pow(k as u64 + 1).unwrap().is_zero());
    assert!(s.v.column(0).iter().all(|x| x.is_zero()));
    let n = c.n();
    for j in 0..n - 1 {
        assert!(s.e.get(n - 1, j).is_zero());
    }
    assert_eq!(*s.e.get(n - 1, n - 1), s.shape.e_last_row_scalar);
}

#[test]
fn main_lemma_smallest_instance() {
    let f = FieldSpec::prime(3).unwrap();
    let c = CompanionSpec::from_ints(f.clone(), &[0, 0, 1]);
    let s = main_lemma(&c, 2, 1, 1).unwrap();
    special_props(&s, &c, 2);
    assert_eq!(s.shape.e_last_row_scalar, f.one());
    assert_eq!(s.route, RouteTag::Maincor);
}

#[test]
fn main_lemma_rejects_bad_trace() {
    let f = FieldSpec::prime(3).unwrap();
    let c = CompanionSpec::from_ints(f, &[0, 0, 0]);
    assert!(matches!(main_lemma(&c, 2, 1, 1), Err(DecompError::PreconditionViolated(_))));
}

#[test]
fn maincor_candidate_lists() {
    assert_eq!(maincor_candidates(3, 5, 2, 2), vec![(1, 2)]);
    // 3a = a has no nonzero solution mod 5
    let c = maincor_candidates(5, 3, 2, 0);
    assert_eq!(c.len(), 4);
    assert!(c.iter().all(|&(a, l)| a != l));
    assert_eq!(c, vec![(1, 3), (2, 1), (3, 4), (4, 2)]);
    assert_eq!(maincor_candidates(3, 3, 2, 2), vec![(1, 1), (2, 1)]);
}

#[test]
fn minus3_candidate_lists() {
    let c = minus3_candidates(5, 5, 2, 4);
    assert!(c.contains(&(1, 3)));
    assert_eq!(c.len(), 3);
}

#[test]
fn minus3_gives_zero_last_row() {
    let f = FieldSpec::prime(5).unwrap();
    // trace 4
    let c = CompanionSpec::from_ints(f.clone(), &[1, 2, 0, 3, 1]);
    assert_eq!(c.trace(), f.int_embed(4));
    let s = route_minus3(&c, 2).unwrap();
    special_props(&s, &c, 2);
    assert!(s.shape.e_last_row_scalar.is_zero());
}

#[test]
fn n1_is_its_own_p_potent() {
    let f = FieldSpec::prime(3).unwrap();
    let c = CompanionSpec::from_ints(f.clone(), &[1]);
    let d = decompose_companion(&c).unwrap();
    assert_eq!(d.e, Matrix::from_ints(f.clone(), &[&[2]]));
    assert!(d.v.is_zero());
    assert_eq!(d.route, RouteTag::N1);
}

#[test]
fn sharpness_witness_has_index_three() {
    let f = FieldSpec::prime(3).unwrap();
    let c = CompanionSpec::from_ints(f.clone(), &[1, 0, 2]);
    let d = decompose_companion(&c).unwrap();
    assert_eq!(d.nil_index(), 3);
    assert!(oracle::oracle_decompose(&c.realize(), 2).unwrap().is_none());
}

#[test]
fn non_subfield_trace_is_rejected() {
    let f = FieldSpec::default_extension(3, 2).unwrap();
    let root = f.element(&[0, 1]).unwrap();
    let c = CompanionSpec::new(f.clone(), vec![f.one(), f.neg(&root)]);
    assert!(matches!(decompose_companion(&c), Err(DecompError::TraceNotPrimeSubfield)));
    assert_eq!(check_trace_condition(&c.realize()), None);
}

#[test]
fn trip_smallest_instance() {
    let f = FieldSpec::prime(3).unwrap();
    let mut ran = 0;
    for c0 in 0..3 {
        for c1 in 0..3 {
            let c = CompanionSpec::from_ints(f.clone(), &[c0, c1, 0]);
            match route_trip(&c) {
                Ok(s) => {
                    ran += 1;
                    special_props(&s, &c, 2);
                    assert!(s.v.pow(3).unwrap().is_zero());
                }
                Err(e) => assert!(matches!(e, DecompError::TripotencyFailed | DecompError::PreconditionViolated(_) | DecompError::CompletionFailed(_))),
            }
            // engine always succeeds and the oracle agrees
            let d = decompose_companion(&c).unwrap();
            assert!(oracle::oracle_decompose(&c.realize(), 3).unwrap().is_some());
            assert!(d.checks.passes(3));
        }
    }
    let _ = ran;
}

#[test]
fn even_border_example() {
    let f = FieldSpec::prime(3).unwrap();
    let c = CompanionSpec::from_ints(f.clone(), &[1, 0, 0, 1]);
    let d = even_border(&c).unwrap();
    assert_eq!(d.route, RouteTag::EvenBorder);
    assert!(d.detail.starts_with("sub=P3_T2"), "{}", d.detail);
    assert_eq!(d.a, c.realize());
    assert!(d.checks.passes(3));
}

#[test]
fn decompose_diagonal() {
    let f = FieldSpec::prime(3).unwrap();
    let a = Matrix::from_ints(f.clone(), &[&[0, 0, 0], &[0, 1, 0], &[0, 0, 2]]);
    let d = decompose(&a).unwrap();
    assert_eq!(d.a, a);
    assert_eq!(d.e.add(&d.v).unwrap(), a);
    assert!(d.e.is_p_potent());
    assert!(d.v.pow(3).unwrap().is_zero());
}

#[test]
fn derogatory_is_rejected() {
    let f = FieldSpec::prime(3).unwrap();
    let a = Matrix::from_ints(f, &[&[1, 0], &[0, 1]]);
    assert!(matches!(decompose(&a), Err(DecompError::NotNonderogatory)));
}

#[test]
fn companion_input_matches_direct_run() {
    let f = FieldSpec::prime(5).unwrap();
    let c = CompanionSpec::from_ints(f, &[2, 1, 4]);
    let a = decompose(&c.realize()).unwrap();
    let b = decompose_companion(&c).unwrap();
    assert_eq!(a.e, b.e);
    assert_eq!(a.v, b.v);
    assert_eq!(a.route, b.route);
}

#[test]
fn alt_mixed_covers_single_scalar_gap() {
    // p = 5, n = 5, t = 0: no single-scalar pair is completable
    let f = FieldSpec::prime(5).unwrap();
    let c = CompanionSpec::from_ints(f.clone(), &[1, 0, 0, 0, 0]);
    let s = alt_mixed(&c).unwrap();
    special_props(&s, &c, 2);
    assert!(!s.shape.e_last_row_scalar.is_zero());
}

#[test]
fn certificate_json_round_trip() {
    let f = FieldSpec::default_extension(3, 2).unwrap();
    let c = CompanionSpec::from_ints(f, &[1, 0, 2]);
    let d = decompose_companion(&c).unwrap();
    let cert = Certificate::from_decomposition(&d);
    let text = serde_json::to_string(&cert).unwrap();
    let back: Certificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cert);
    assert!(back.reverify(3).unwrap().ok());
    let mut bad = back.clone();
    bad.e[0][0] = "[1,1]".into();
    assert!(!bad.reverify(3).unwrap().ok());
}

#[test]
fn route_tags_parse_back() {
    for r in RouteTag::ALL {
        assert_eq!(RouteTag::parse(r.as_str()), Some(r));
        assert_eq!(serde_json::to_string(&r).unwrap(), format!("\"{r}\""));
    }
}
