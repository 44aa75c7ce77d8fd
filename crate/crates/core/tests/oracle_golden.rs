use std::path::PathBuf;

use potent_core::canonical::CompanionSpec;
use potent_core::decomp::{check_trace_condition, decompose_companion, Certificate, DecompError};
use potent_core::field::FieldSpec;
use potent_core::matf::Matrix;
use potent_core::oracle::{
    companions, enumerate_p_potents, exhaustive_sweep, exhaustive_sweep_par, oracle_decompose,
    oracle_decompose_in, sharpness_scan,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn golden(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn p_potent_counts_match_golden() {
    let g = golden("p_potent_counts.json");
    let f = FieldSpec::prime(3).unwrap();
    for (n, want) in g["counts"].as_object().unwrap() {
        let n: usize = n.parse().unwrap();
        let got = enumerate_p_potents(n, &f).unwrap().count();
        assert_eq!(got as u64, want.as_u64().unwrap(), "n = {n}");
    }
}

#[test]
fn p_potents_are_lexicographic_and_reflect() {
    let f = FieldSpec::prime(3).unwrap();
    let all: Vec<Matrix> = enumerate_p_potents(2, &f).unwrap().collect();
    let keys: Vec<Vec<u64>> = all.iter().map(Matrix::index_vector).collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
    let two = f.int_embed(2);
    for e in &all {
        assert!(e.neg().add_scalar(&two).is_p_potent());
    }
}

#[test]
fn p_potents_closed_under_conjugation() {
    let f = FieldSpec::prime(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let all: Vec<Matrix> = enumerate_p_potents(2, &f).unwrap().collect();
    for _ in 0..50 {
        let p = loop {
            let m = Matrix::from_ints(
                f.clone(),
                &[&[rng.gen_range(0..3), rng.gen_range(0..3)], &[rng.gen_range(0..3), rng.gen_range(0..3)]],
            );
            if m.rank() == 2 {
                break m;
            }
        };
        let e = &all[rng.gen_range(0..all.len())];
        let conj = e.conjugate_by(&p).unwrap();
        assert!(conj.is_p_potent());
        assert!(all.contains(&conj));
    }
}

#[test]
fn sharpness_matches_golden() {
    let g = golden("sharpness_qualifiers.json");
    let f = FieldSpec::prime(3).unwrap();
    let report = sharpness_scan(&f).unwrap();
    let got: Vec<Vec<String>> = report.qualifying.iter().map(|q| q.companion.clone()).collect();
    let want: Vec<Vec<String>> = serde_json::from_value(g["qualifying"].clone()).unwrap();
    assert_eq!(got, want);
    assert_eq!(got.len() as u64, g["count"].as_u64().unwrap());
    assert!(got.contains(&vec!["1".to_string(), "0".into(), "2".into()]));
    assert!(report.confirms_claim());
    // p-potent 3x3 over F_3, counted once for the whole scan
    assert!(report.p_potents_searched > 0 && report.p_potents_searched <= 19683);
}

#[test]
fn sharpness_report_serializes() {
    let f = FieldSpec::prime(3).unwrap();
    let report = sharpness_scan(&f).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["qualifying"].as_array().unwrap().len(), report.qualifying.len());
    for q in json["qualifying"].as_array().unwrap() {
        assert_eq!(q["index2_impossible"], Value::Bool(true));
        let cert: Certificate = serde_json::from_value(q["index3_certificate"].clone()).unwrap();
        assert!(cert.reverify(3).unwrap().ok());
    }
}

#[test]
fn oracle_examples() {
    let f = FieldSpec::prime(3).unwrap();
    let a = CompanionSpec::from_ints(f.clone(), &[1, 0, 2]).realize();
    assert!(oracle_decompose(&a, 2).unwrap().is_none());
    let (e, nmat) = oracle_decompose(&a, 3).unwrap().unwrap();
    assert!(e.is_p_potent());
    assert!(nmat.pow(3).unwrap().is_zero());
    assert_eq!(e.add(&nmat).unwrap(), a);
}

#[test]
fn theorem_agreement_over_f3() {
    let f = FieldSpec::prime(3).unwrap();
    for n in 1..=3 {
        let table: Vec<Matrix> = enumerate_p_potents(n, &f).unwrap().collect();
        for c in companions(n, &f).unwrap() {
            let a = c.realize();
            assert!(check_trace_condition(&a).is_some());
            assert!(oracle_decompose_in(&table, &a, n).is_some(), "{c}");
        }
    }
}

#[test]
fn theorem_agreement_over_f9() {
    let g = golden("f9_n2_split.json");
    let f = FieldSpec::default_extension(3, 2).unwrap();
    let table: Vec<Matrix> = enumerate_p_potents(2, &f).unwrap().collect();
    let mut present = 0;
    for c in companions(2, &f).unwrap() {
        let a = c.realize();
        let oracle = oracle_decompose_in(&table, &a, 2).is_some();
        assert_eq!(oracle, check_trace_condition(&a).is_some(), "{c}");
        present += oracle as u64;
        match decompose_companion(&c) {
            Ok(d) => assert!(d.checks.passes(3)),
            Err(e) => {
                assert_eq!(e, DecompError::TraceNotPrimeSubfield);
                assert!(!oracle);
            }
        }
    }
    assert_eq!(present, g["succeeded"].as_u64().unwrap());

    let report = exhaustive_sweep(2, &f).unwrap();
    assert_eq!(report.total, g["total"].as_u64().unwrap());
    assert_eq!(report.succeeded, g["succeeded"].as_u64().unwrap());
    assert_eq!(report.rejected_trace, g["rejected_trace"].as_u64().unwrap());
    assert!(report.is_consistent());
}

#[test]
fn engine_certificates_pass_independent_recheck() {
    let f = FieldSpec::prime(5).unwrap();
    for c in companions(3, &f).unwrap() {
        let d = decompose_companion(&c).unwrap();
        let a = c.realize();
        // recompute without touching the engine's checks
        assert_eq!(d.e.add(&d.v).unwrap(), a);
        assert_eq!(d.e.pow(5).unwrap(), d.e);
        assert!(d.v.pow(3).unwrap().is_zero());
    }
}

#[test]
fn parallel_sweep_equals_serial() {
    let f = FieldSpec::prime(3).unwrap();
    for n in 1..=5 {
        let serial = exhaustive_sweep(n, &f).unwrap();
        assert_eq!(exhaustive_sweep_par(n, &f, 3).unwrap(), serial);
        assert_eq!(serial.total, 3u64.pow(n as u32));
        assert!(serial.failures.is_empty());
        assert!(serial.is_consistent());
    }
}

#[test]
fn sweep_report_json_shape() {
    let f = FieldSpec::prime(3).unwrap();
    let r = exhaustive_sweep(1, &f).unwrap();
    assert_eq!((r.total, r.succeeded), (3, 3));
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["route_histogram"]["N1"], 3);
    assert_eq!(v["field"]["p"], 3);
}
