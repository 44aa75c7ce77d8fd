//! The constructive routes of the case tree and their fallback order.

use crate::canonical::{
    alternating_basis, alternating_basis_mixed, companion_form, shifted_companion, AlternatingBasis,
    CompanionSpec, SimilarityWitness,
};
use crate::field::FieldElement;
use crate::matf::Matrix;
use crate::oracle;

use super::{
    trailing_p_potent_completion, Checks, DecompError, Decomposition, Params, RouteTag,
    SpecialDecomposition, SpecialShape,
};

/// Largest `q^{n²}` the engine will enumerate as a last resort.
pub const ORACLE_FALLBACK_CAP: u64 = 1_000_000;

fn half(x: i64) -> i64 {
    debug_assert!(x % 2 == 0);
    x / 2
}

fn ordered_pairs(p: u32, l_of: impl Fn(i64) -> i64) -> Vec<(u32, u32)> {
    let p64 = p as i64;
    let viable: Vec<(u32, u32)> = (1..p64)
        .map(|a| (a as u32, l_of(a).rem_euclid(p64) as u32))
        .filter(|&(_, l)| l != 0)
        .collect();
    let (mut preferred, rest): (Vec<_>, Vec<_>) = viable.into_iter().partition(|&(a, l)| a == l);
    preferred.extend(rest);
    preferred
}

/// `(a, l_a)` pairs with `l_a = ((n+k+1)/2·a − t) mod p` nonzero; pairs with
/// `a = l_a` first, then the rest, each group in increasing `a`.
pub fn maincor_candidates(p: u32, n: usize, k: usize, t: u32) -> Vec<(u32, u32)> {
    let h = half((n + k + 1) as i64);
    ordered_pairs(p, |a| h * a - t as i64)
}

/// `(a, l_a)` pairs with `l_a = (t − (n−k−1)/2·a) mod p` nonzero, ordered as in
/// [`maincor_candidates`].
pub fn minus3_candidates(p: u32, n: usize, k: usize, t: u32) -> Vec<(u32, u32)> {
    let g = half((n - k - 1) as i64);
    ordered_pairs(p, |a| t as i64 - g * a)
}

fn trace_index(c: &CompanionSpec) -> Result<u32, DecompError> {
    c.field()
        .prime_subfield_index(&c.trace())
        .ok_or(DecompError::TraceNotPrimeSubfield)
}

/// Splits `D` from the alternating basis into `E + V` given the trailing
/// p-potent block `K`.
fn assemble(
    c: &CompanionSpec,
    ab: AlternatingBasis,
    kmat: &Matrix,
    route: RouteTag,
    detail: String,
    params: Params,
) -> Result<SpecialDecomposition, DecompError> {
    let f = c.field().clone();
    let n = c.n();
    let k = ab.k;
    let head = n - k;
    // R: ones at (i+1, i) for odd i (0-based), zero first column
    let r = Matrix::from_fn(f.clone(), head, head, |i, j| (i == j + 1 && j % 2 == 1).then(|| f.one()));
    // S: odd-indexed d's (1-based) in the last column
    let s = Matrix::from_fn(f.clone(), head, k, |i, j| (j == k - 1 && i % 2 == 0).then(|| ab.ds[i].clone()));
    let q = ab.d.block(head, head, k, k);
    let t = q.sub(kmat)?;
    let v = Matrix::from_blocks(&r, &s, &Matrix::zeros(f.clone(), k, head), &t)?;
    let e = ab.d.sub(&v)?;
    let checks = Checks::compute(&ab.d, &e, &v);
    let out = SpecialDecomposition {
        d: ab.d,
        e,
        v,
        witness: ab.witness,
        shape: SpecialShape {
            e_last_row_scalar: ab.tail_scalar,
            v_first_col_zero: true,
        },
        route,
        detail,
        params,
        checks,
    };
    out.verify(&c.realize(), k + 1)?;
    Ok(out)
}

/// `C ∼ D = E + V` with `E^p = E`, `V^{k+1} = 0`, `V`'s first column zero and
/// `E`'s last row `(0, …, 0, a)`, for `trace(C) = ((n+k+1)/2·a − l)·1`.
pub fn main_lemma(c: &CompanionSpec, k: usize, a: u32, l: u32) -> Result<SpecialDecomposition, DecompError> {
    let f = c.field();
    let n = c.n();
    let p = f.p();
    if n < 3 || k == 0 || k >= n || (n - k) % 2 == 0 {
        return Err(DecompError::PreconditionViolated(format!(
            "main lemma needs n >= 3, 1 <= k < n, n-k odd (n = {n}, k = {k})"
        )));
    }
    if a == 0 || a >= p || l == 0 || l >= p {
        return Err(DecompError::PreconditionViolated(format!(
            "a and l must lie in 1..{p} (a = {a}, l = {l})"
        )));
    }
    let h = half((n + k + 1) as i64);
    let want = f.int_embed(h * a as i64 - l as i64);
    if c.trace() != want {
        return Err(DecompError::PreconditionViolated(format!(
            "trace(C) = {} but ((n+k+1)/2)·a − l = {}",
            f.format_element(&c.trace()),
            f.format_element(&want)
        )));
    }
    let a_el = f.int_embed(a as i64);
    let l_el = f.int_embed(l as i64);
    let ab = alternating_basis(c, k, &a_el)?;
    debug_assert_eq!(ab.ds[n - 1], f.neg(&l_el));
    let kmat = trailing_p_potent_completion(&ab.trailing_companion(), &a_el, &l_el)?;
    let t = trace_index(c)?;
    let params = Params {
        k: Some(k as i64),
        a: Some(a as i64),
        l: Some(l as i64),
        t: Some(t as i64),
    };
    assemble(c, ab, &kmat, RouteTag::Maincor, format!("k={k} a={a} l={l}"), params)
}

/// Picks `a` (preferring `a = l_a`) and runs the main lemma.
pub fn route_maincor(c: &CompanionSpec, k: usize) -> Result<SpecialDecomposition, DecompError> {
    let n = c.n();
    let p = c.field().p();
    let t = trace_index(c)?;
    if n < 3 || k == 0 || k >= n || (n - k) % 2 == 0 {
        return Err(DecompError::PreconditionViolated(format!("n = {n}, k = {k}")));
    }
    if half((n + k + 1) as i64).rem_euclid(p as i64) == 0 {
        return Err(DecompError::PreconditionViolated("(n+k+1)/2 vanishes in F_p".into()));
    }
    let mut tried = Vec::new();
    for (a, l) in maincor_candidates(p, n, k, t) {
        match main_lemma(c, k, a, l) {
            Ok(s) => return Ok(s),
            Err(e) => tried.push(format!("(a={a}, l={l}): {e}")),
        }
    }
    Err(DecompError::NoViableA(tried.join("; ")))
}

/// Reflection route for a fixed `(a, l)`: decomposes the companion form of
/// `a·I − C` with the main lemma and reflects back, giving `E` a zero last row.
pub fn route_minus3_with(
    c: &CompanionSpec,
    k: usize,
    a: u32,
    l: u32,
) -> Result<SpecialDecomposition, DecompError> {
    let f = c.field();
    let n = c.n();
    if n < 3 || k == 0 || k >= n || (n - k) % 2 == 0 {
        return Err(DecompError::PreconditionViolated(format!("n = {n}, k = {k}")));
    }
    let t = trace_index(c)?;
    let g = half((n - k - 1) as i64);
    if f.int_embed(g * a as i64 + l as i64) != c.trace() {
        return Err(DecompError::PreconditionViolated(format!(
            "trace {t} != (n-k-1)/2·{a} + {l}"
        )));
    }
    let a_el = f.int_embed(a as i64);
    let cm = c.realize();
    let reflected = cm.neg().add_scalar(&a_el);
    let (c2, w) = companion_form(&reflected)?;
    let inner = main_lemma(&c2, k, a, l)?;
    let witness = w.then(&inner.witness)?;
    let d = inner.d.neg().add_scalar(&a_el);
    let e = inner.e.neg().add_scalar(&a_el);
    let v = inner.v.neg();
    let checks = Checks::compute(&d, &e, &v);
    let out = SpecialDecomposition {
        d,
        e,
        v,
        witness,
        shape: SpecialShape {
            e_last_row_scalar: f.zero(),
            v_first_col_zero: true,
        },
        route: RouteTag::Minus3,
        detail: format!("k={k} a={a} l={l}"),
        params: Params {
            k: Some(k as i64),
            a: Some(a as i64),
            l: Some(l as i64),
            t: Some(t as i64),
        },
        checks,
    };
    out.verify(&cm, k + 1)?;
    Ok(out)
}

/// Reflection route over every viable `(a, l)`.
pub fn route_minus3(c: &CompanionSpec, k: usize) -> Result<SpecialDecomposition, DecompError> {
    let n = c.n();
    if n < 3 || k == 0 || k >= n || (n - k) % 2 == 0 {
        return Err(DecompError::PreconditionViolated(format!("n = {n}, k = {k}")));
    }
    let t = trace_index(c)?;
    let mut tried = Vec::new();
    for (a, l) in minus3_candidates(c.field().p(), n, k, t) {
        match route_minus3_with(c, k, a, l) {
            Ok(s) => return Ok(s),
            Err(e) => tried.push(format!("(a={a}, l={l}): {e}")),
        }
    }
    Err(DecompError::NoViableA(tried.join("; ")))
}

/// `C ∼ I + C'`: decomposes `C'` with `inner` and shifts back, adding 1 to
/// the last-row scalar.
fn via_identity_shift(
    c: &CompanionSpec,
    route: RouteTag,
    inner: impl FnOnce(&CompanionSpec) -> Result<SpecialDecomposition, DecompError>,
) -> Result<SpecialDecomposition, DecompError> {
    let f = c.field();
    let ones = vec![f.one(); c.n()];
    let (c2, shift) = shifted_companion(c, &ones)?;
    let s = inner(&c2)?;
    let witness = shift.then(&s.witness)?;
    let one = f.one();
    let d = s.d.add_scalar(&one);
    let e = s.e.add_scalar(&one);
    let checks = Checks::compute(&d, &e, &s.v);
    let out = SpecialDecomposition {
        d,
        e,
        v: s.v,
        witness,
        shape: SpecialShape {
            e_last_row_scalar: f.add(&s.shape.e_last_row_scalar, &one),
            v_first_col_zero: true,
        },
        route,
        detail: format!("shift by I; inner {} {}", s.route, s.detail),
        params: Params {
            t: Some(trace_index(c)? as i64),
            ..s.params
        },
        checks,
    };
    out.verify(&c.realize(), 3)?;
    Ok(out)
}

/// Characteristic 3, trace 0: `C = F + C₁` with `F = diag(0,…,0,1)`, `C₁`
/// decomposed by the main lemma with `a = l = 1`, and `E = F + Q·E₁·Q⁻¹`.
pub fn route_trip(c: &CompanionSpec) -> Result<SpecialDecomposition, DecompError> {
    let f = c.field();
    let n = c.n();
    if f.p() != 3 || n < 3 || n % 2 == 0 || (n + 3) / 2 % 3 != 0 {
        return Err(DecompError::PreconditionViolated(
            "tripotent route needs p = 3, odd n >= 3, (n+3)/2 = 0 in F_3".into(),
        ));
    }
    if !c.trace().is_zero() {
        return Err(DecompError::PreconditionViolated("tripotent route needs trace 0".into()));
    }
    let mut coeffs = c.coeffs().to_vec();
    coeffs[n - 1] = f.add(&coeffs[n - 1], &f.one());
    let c1 = CompanionSpec::new(f.clone(), coeffs);
    let inner = main_lemma(&c1, 2, 1, 1)?;
    let q = &inner.witness;
    let mut last_row = vec![f.zero(); n];
    last_row[n - 1] = f.neg(&f.one());
    if q.p.row(n - 1) != last_row.as_slice() {
        return Err(DecompError::PreconditionViolated(
            "transition matrix last row is not (0,…,0,−1)".into(),
        ));
    }
    let mut fd = vec![f.zero(); n];
    fd[n - 1] = f.one();
    let fmat = Matrix::diag(f.clone(), &fd);
    let e = fmat.add(&q.push_forward(&inner.e)?)?;
    if e.pow(3)? != e {
        return Err(DecompError::TripotencyFailed);
    }
    let v = q.push_forward(&inner.v)?;
    let cm = c.realize();
    let checks = Checks::compute(&cm, &e, &v);
    let out = SpecialDecomposition {
        d: cm.clone(),
        e: e.clone(),
        v,
        witness: SimilarityWitness::identity(f.clone(), n, "identity"),
        shape: SpecialShape {
            e_last_row_scalar: e.get(n - 1, n - 1).clone(),
            v_first_col_zero: true,
        },
        route: RouteTag::P3T0Trip,
        detail: "F + Q E1 Q^-1 with a=1 l=1".into(),
        params: Params {
            k: Some(2),
            a: Some(1),
            l: Some(1),
            t: Some(0),
        },
        checks,
    };
    out.verify(&cm, 3)?;
    Ok(out)
}

/// Alternating basis with an independent nonzero scalar per diagonal pair
/// and trailing scalar `b = l`, so the `k = 2` completion always exists.
/// Scalars are chosen lexicographically subject to `Σαᵢ + b = t`, `b ≠ 0`.
pub fn alt_mixed(c: &CompanionSpec) -> Result<SpecialDecomposition, DecompError> {
    let f = c.field();
    let n = c.n();
    if n < 3 || n % 2 == 0 {
        return Err(DecompError::PreconditionViolated("mixed route needs odd n >= 3".into()));
    }
    let p = f.p();
    let t = trace_index(c)?;
    let pairs = (n - 1) / 2;
    let mut alphas = vec![1u32; pairs];
    loop {
        let sum: i64 = alphas.iter().map(|&x| x as i64).sum();
        let b = (t as i64 - sum).rem_euclid(p as i64) as u32;
        if b != 0 {
            let a_el: Vec<FieldElement> = alphas.iter().map(|&x| f.int_embed(x as i64)).collect();
            let b_el = f.int_embed(b as i64);
            let ab = alternating_basis_mixed(c, 2, &a_el, &b_el)?;
            let kmat = trailing_p_potent_completion(&ab.trailing_companion(), &b_el, &b_el)?;
            let params = Params {
                k: Some(2),
                a: Some(b as i64),
                l: Some(b as i64),
                t: Some(t as i64),
            };
            let detail = format!("pair scalars {alphas:?} b={b}");
            return assemble(c, ab, &kmat, RouteTag::AltMixed, detail, params);
        }
        // next tuple in lexicographic order over 1..p-1
        let mut pos = pairs;
        loop {
            if pos == 0 {
                return Err(DecompError::NoViableA("no scalar tuple sums to the trace".into()));
            }
            pos -= 1;
            alphas[pos] += 1;
            if alphas[pos] < p {
                break;
            }
            alphas[pos] = 1;
        }
    }
}

/// Special decomposition of an odd-size companion with `V^3 = 0`, running
/// the case tree and then the fallback order. With `need_nonzero_a` only
/// certificates whose `E` has last row `(0, …, 0, a)`, `a ≠ 0`, are accepted.
pub fn special_odd(c: &CompanionSpec, need_nonzero_a: bool) -> Result<SpecialDecomposition, DecompError> {
    let n = c.n();
    if n < 3 || n % 2 == 0 {
        return Err(DecompError::PreconditionViolated("special decomposition needs odd n >= 3".into()));
    }
    let p = c.field().p();
    let t = trace_index(c)?;
    let h_zero = ((n + 3) / 2) as u32 % p == 0;

    type Attempt<'a> = Box<dyn Fn() -> Result<SpecialDecomposition, DecompError> + 'a>;
    let mut attempts: Vec<Attempt> = Vec::new();
    let retag = |r: Result<SpecialDecomposition, DecompError>, tag: RouteTag| {
        r.map(|mut s| {
            s.route = tag;
            s
        })
    };
    let minus3_shift = move || via_identity_shift(c, RouteTag::Minus3Shift, |c2| route_minus3(c2, 2));
    if !h_zero {
        attempts.push(Box::new(|| route_maincor(c, 2)));
    } else if p != 3 {
        attempts.push(Box::new(minus3_shift));
    } else {
        match t {
            1 => attempts.push(Box::new(|| {
                via_identity_shift(c, RouteTag::P3T1, |c2| route_minus3_with(c2, 2, 1, 1))
            })),
            2 => attempts.push(Box::new(move || retag(main_lemma(c, 2, 1, 1), RouteTag::P3T2))),
            _ => attempts.push(Box::new(|| route_trip(c))),
        }
    }
    // fallback order
    if !need_nonzero_a {
        attempts.push(Box::new(|| route_minus3(c, 2)));
    }
    if !(h_zero && p != 3) {
        attempts.push(Box::new(minus3_shift));
    }
    attempts.push(Box::new(|| alt_mixed(c)));

    let cm = c.realize();
    let mut last_err = DecompError::Unverifiable;
    for attempt in attempts {
        match attempt() {
            Ok(s) => {
                if need_nonzero_a && s.shape.e_last_row_scalar.is_zero() {
                    last_err = DecompError::PreconditionViolated(format!("{} gave a = 0", s.route));
                    continue;
                }
                match s.verify(&cm, 3) {
                    Ok(()) => return Ok(s),
                    Err(e) => last_err = e,
                }
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// Even `n >= 4`: `C = [[0, (0,…,0,−c₀)], [e₁, C_sub]]` with `C_sub` the odd
/// companion of `(c₁, …, c_{n−1})`; the special decomposition of `C_sub`
/// (nonzero last-row scalar) lifts to `C`.
pub fn even_border(c: &CompanionSpec) -> Result<Decomposition, DecompError> {
    let f = c.field().clone();
    let n = c.n();
    if n < 4 || n % 2 == 1 {
        return Err(DecompError::PreconditionViolated("bordering needs even n >= 4".into()));
    }
    let t = trace_index(c)?;
    let sub = CompanionSpec::new(f.clone(), c.coeffs()[1..].to_vec());
    let s = special_odd(&sub, true)?;
    let m = n - 1;
    let one = Matrix::identity(f.clone(), 1);
    let zc = Matrix::zeros(f.clone(), m, 1);
    let zr = Matrix::zeros(f.clone(), 1, m);
    let big_p = Matrix::from_blocks(&one, &zr, &zc, &s.witness.p)?;
    let big_p_inv = Matrix::from_blocks(&one, &zr, &zc, &s.witness.p_inv)?;
    let lift = SimilarityWitness {
        p: big_p,
        p_inv: big_p_inv,
        note: format!("border of {}", s.witness.note),
    };
    let cm = c.realize();
    let dprime = lift.pull_back(&cm)?;
    let top = dprime.block(0, 1, 1, m);
    let left = dprime.block(1, 0, m, 1);
    let e_lift = Matrix::from_blocks(&Matrix::zeros(f.clone(), 1, 1), &top, &zc, &s.e)?;
    let w_lift = Matrix::from_blocks(&Matrix::zeros(f.clone(), 1, 1), &zr, &left, &s.v)?;
    let checks = Checks::compute(&dprime, &e_lift, &w_lift);
    if !checks.passes(3) {
        return Err(DecompError::VerificationFailed(format!("bordered lift: {checks:?}")));
    }
    let e = lift.push_forward(&e_lift)?;
    let v = lift.push_forward(&w_lift)?;
    let detail = format!("sub={} {}", s.route, s.detail);
    let params = Params {
        t: Some(t as i64),
        ..s.params
    };
    Decomposition::finish(cm, e, v, Some(lift), RouteTag::EvenBorder, detail, params)
}

/// `n = 2`: closed forms, then enumeration of the 2×2 p-potents.
pub(super) fn decompose_n2(c: &CompanionSpec, t: u32) -> Result<Decomposition, DecompError> {
    let f = c.field().clone();
    let cm = c.realize();
    let c0 = c.coeffs()[0].clone();
    let params = Params {
        t: Some(t as i64),
        ..Params::default()
    };
    let t_el = f.int_embed(t as i64);
    if t != 0 {
        // E = [[t, u], [0, 0]] with det(C − E) = 0
        let u = f.sub(&f.mul(&t_el, &t_el), &c0);
        let e = Matrix::from_fn(f.clone(), 2, 2, |i, j| match (i, j) {
            (0, 0) => Some(t_el.clone()),
            (0, 1) => Some(u.clone()),
            _ => None,
        });
        let v = cm.sub(&e)?;
        return Decomposition::finish(cm, e, v, None, RouteTag::N2, "E = [[t,u],[0,0]]".into(), params);
    }
    if c0.is_zero() {
        let e = Matrix::zeros(f.clone(), 2, 2);
        return Decomposition::finish(cm.clone(), e, cm, None, RouteTag::N2, "E = 0".into(), params);
    }
    let (e, v) = oracle::oracle_decompose(&cm, 2)?.ok_or(DecompError::Unverifiable)?;
    Decomposition::finish(cm, e, v, None, RouteTag::N2, "enumerated".into(), params)
}

/// Exhaustive fallback when every constructive route failed.
pub(super) fn oracle_fallback(c: &CompanionSpec, t: u32) -> Result<Decomposition, DecompError> {
    let cm = c.realize();
    let n = c.n() as u32;
    let q = c.field().order();
    match q.checked_pow(n * n) {
        Some(s) if s <= ORACLE_FALLBACK_CAP => {}
        _ => return Err(DecompError::Unverifiable),
    }
    let (e, v) = oracle::oracle_decompose(&cm, 3)?.ok_or(DecompError::Unverifiable)?;
    let params = Params {
        t: Some(t as i64),
        ..Params::default()
    };
    Decomposition::finish(cm, e, v, None, RouteTag::OracleFallback, "exhaustive search".into(), params)
}
