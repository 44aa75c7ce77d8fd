use potent_core::canonical::{companion_form, shifted_companion, CompanionSpec};
use potent_core::decomp::{check_trace_condition, decompose, DecompError};
use potent_core::field::{Field, FieldElement, FieldSpec};
use potent_core::matf::{text, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field_for(choice: u8) -> Field {
    match choice % 4 {
        0 => FieldSpec::prime(3).unwrap(),
        1 => FieldSpec::prime(5).unwrap(),
        2 => FieldSpec::prime(7).unwrap(),
        _ => FieldSpec::default_extension(3, 2).unwrap(),
    }
}

fn random_matrix(f: &Field, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let q = f.order();
    let entries = (0..rows * cols).map(|_| f.from_index(rng.gen_range(0..q))).collect();
    Matrix::from_entries(f.clone(), rows, cols, entries).unwrap()
}

fn random_invertible(f: &Field, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let m = random_matrix(f, n, n, rng);
        if m.rank() == n {
            return m;
        }
    }
}

/// det by permutation expansion, independent of the Hessenberg code path.
fn leibniz_det(f: &Field, m: &[Vec<FieldElement>]) -> FieldElement {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = f.zero();
    loop {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| perm[i] > perm[j])
            .count();
        let mut term = f.one();
        for (i, &j) in perm.iter().enumerate() {
            term = f.mul(&term, &m[i][j]);
        }
        total = if inversions % 2 == 0 { f.add(&total, &term) } else { f.sub(&total, &term) };
        // next permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return total;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn char_poly_matches_leibniz(choice in 0u8..4, n in 1usize..5, seed in any::<u64>()) {
        let f = field_for(choice);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&f, n, n, &mut rng);
        let chi = a.char_poly().unwrap();
        prop_assert_eq!(chi.degree(), Some(n));
        prop_assert!(chi.is_monic());
        for x in f.elements() {
            let rows: Vec<Vec<FieldElement>> = (0..n)
                .map(|i| (0..n).map(|j| {
                    let d = if i == j { x.clone() } else { f.zero() };
                    f.sub(&d, a.get(i, j))
                }).collect())
                .collect();
            prop_assert_eq!(chi.eval(&x), leibniz_det(&f, &rows));
        }
    }

    #[test]
    fn char_poly_is_similarity_invariant(choice in 0u8..4, n in 1usize..6, seed in any::<u64>()) {
        let f = field_for(choice);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&f, n, n, &mut rng);
        let p = random_invertible(&f, n, &mut rng);
        let b = a.conjugate_by(&p).unwrap();
        prop_assert_eq!(a.char_poly().unwrap(), b.char_poly().unwrap());
        prop_assert_eq!(a.is_nilpotent(), b.is_nilpotent());
        prop_assert_eq!(a.is_p_potent(), b.is_p_potent());
    }

    #[test]
    fn min_poly_divides_char_poly_and_both_annihilate(choice in 0u8..4, n in 1usize..6, seed in any::<u64>()) {
        let f = field_for(choice);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // bias towards repeated structure: small-rank perturbation of a scalar
        let s = f.from_index(rng.gen_range(0..f.order()));
        let a = if rng.gen_bool(0.5) {
            random_matrix(&f, n, n, &mut rng)
        } else {
            let u = random_matrix(&f, n, 1, &mut rng);
            let v = random_matrix(&f, 1, n, &mut rng);
            u.mul(&v).unwrap().add_scalar(&s)
        };
        let chi = a.char_poly().unwrap();
        let mu = a.min_poly().unwrap();
        prop_assert!(mu.is_monic());
        prop_assert!(chi.divrem(&mu).1.is_zero());
        prop_assert!(chi.eval_matrix(&a).is_zero());
        prop_assert!(mu.eval_matrix(&a).is_zero());
        prop_assert_eq!(a.is_nonderogatory(), mu.degree() == Some(n));
    }

    #[test]
    fn text_format_round_trips(choice in 0u8..4, rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let f = field_for(choice);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&f, rows, cols, &mut rng);
        prop_assert_eq!(text::parse(&text::render(&m)).unwrap(), m);
    }

    #[test]
    fn companion_form_reconjugates(choice in 0u8..4, n in 1usize..6, seed in any::<u64>()) {
        let f = field_for(choice);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&f, n, n, &mut rng);
        match companion_form(&a) {
            Ok((c, w)) => {
                prop_assert!(w.is_exact());
                prop_assert_eq!(w.pull_back(&a).unwrap(), c.realize());
                prop_assert_eq!(c.char_poly(), a.char_poly().unwrap());
            }
            Err(_) => prop_assert!(!a.is_nonderogatory()),
        }
    }

    #[test]
    fn shifted_companion_trace_bookkeeping(choice in 0u8..3, n in 1usize..7, seed in any::<u64>()) {
        let f = field_for(choice);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..f.p() as i64)).collect();
        let c = CompanionSpec::from_ints(f.clone(), &coeffs);
        let k = rng.gen_range(1..=n);
        let shifts: Vec<FieldElement> = (0..k).map(|_| f.int_embed(rng.gen_range(0..f.p() as i64))).collect();
        let (c2, w) = shifted_companion(&c, &shifts).unwrap();
        prop_assert!(w.is_unit_upper_triangular());
        let sum = shifts.iter().fold(f.zero(), |acc, s| f.add(&acc, s));
        prop_assert_eq!(c2.trace(), f.sub(&c.trace(), &sum));
        let mut diag = shifts.clone();
        diag.resize(n, f.zero());
        let expected = Matrix::diag(f.clone(), &diag).add(&c2.realize()).unwrap();
        prop_assert_eq!(w.pull_back(&c.realize()).unwrap(), expected);
    }

    #[test]
    fn decompose_arbitrary_nonderogatory(choice in 0u8..4, n in 1usize..6, seed in any::<u64>()) {
        let f = field_for(choice);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&f, n, n, &mut rng);
        match decompose(&a) {
            Ok(d) => {
                prop_assert_eq!(&d.a, &a);
                prop_assert_eq!(d.e.add(&d.v).unwrap(), a);
                prop_assert_eq!(d.e.pow(f.p() as u64).unwrap(), d.e.clone());
                prop_assert!(d.v.pow(3).unwrap().is_zero());
            }
            Err(DecompError::TraceNotPrimeSubfield) => prop_assert!(check_trace_condition(&a).is_none()),
            Err(DecompError::NotNonderogatory) => {
                prop_assert!(check_trace_condition(&a).is_some());
                prop_assert!(!a.is_nonderogatory());
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
