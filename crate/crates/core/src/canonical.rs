//! Companion matrices and the explicit basis changes used by the
//! decomposition routes. Each construction returns the transition matrix so
//! callers can re-check the similarity.

use std::fmt;

use thiserror::Error;

use crate::field::{Field, FieldElement};
use crate::matf::{Matrix, MatrixError, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("matrix is derogatory (minimal polynomial degree {0} < {1})")]
    NotNonderogatory(usize, usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// The companion matrix of `X^n + c_{n-1} X^{n-1} + … + c_0`: ones on the
/// subdiagonal and last column `(-c_0, …, -c_{n-1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanionSpec {
    field: Field,
    coeffs: Vec<FieldElement>,
}

impl CompanionSpec {
    pub fn new(field: Field, coeffs: Vec<FieldElement>) -> Self {
        assert!(!coeffs.is_empty(), "companion of size 0");
        CompanionSpec { field, coeffs }
    }

    pub fn from_ints(field: Field, coeffs: &[i64]) -> Self {
        let c = coeffs.iter().map(|&v| field.int_embed(v)).collect();
        Self::new(field, c)
    }

    /// The companion whose characteristic polynomial is `chi` (must be monic).
    pub fn from_char_poly(chi: &Polynomial) -> Self {
        debug_assert!(chi.is_monic());
        let n = chi.degree().expect("nonzero polynomial");
        Self::new(chi.field().clone(), (0..n).map(|i| chi.coeff(i)).collect())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn trace(&self) -> FieldElement {
        self.field.neg(self.coeffs.last().unwrap())
    }

    pub fn char_poly(&self) -> Polynomial {
        Polynomial::monic_from_lower(self.field.clone(), &self.coeffs)
    }

    pub fn realize(&self) -> Matrix {
        let n = self.n();
        let f = &self.field;
        Matrix::from_fn(f.clone(), n, n, |i, j| {
            if j == n - 1 {
                Some(f.neg(&self.coeffs[i]))
            } else if i == j + 1 {
                Some(f.one())
            } else {
                None
            }
        })
    }

    /// Reads the companion back from its realization, if it is one.
    pub fn recognize(a: &Matrix) -> Option<CompanionSpec> {
        let n = a.rows();
        if n == 0 || !a.is_square() {
            return None;
        }
        let f = a.field();
        let coeffs = (0..n).map(|i| f.neg(a.get(i, n - 1))).collect();
        let c = CompanionSpec::new(f.clone(), coeffs);
        (c.realize() == *a).then_some(c)
    }

    /// Text form `coeffs: c0 c1 … c_{n-1}`.
    pub fn coeffs_text(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(|c| self.field.format_element(c)).collect();
        format!("coeffs: {}", parts.join(" "))
    }
}

impl fmt::Display for CompanionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| self.field.format_element(c)).collect();
        write!(f, "companion({})", parts.join(","))
    }
}

/// An invertible transition matrix together with its exact inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityWitness {
    pub p: Matrix,
    pub p_inv: Matrix,
    pub note: String,
}

impl SimilarityWitness {
    pub fn new(p: Matrix, note: impl Into<String>) -> Result<Self, MatrixError> {
        let p_inv = p.inverse()?;
        Ok(SimilarityWitness {
            p,
            p_inv,
            note: note.into(),
        })
    }

    pub fn identity(field: Field, n: usize, note: impl Into<String>) -> Self {
        let i = Matrix::identity(field, n);
        SimilarityWitness {
            p: i.clone(),
            p_inv: i,
            note: note.into(),
        }
    }

    /// The witness for `self` followed by `inner`: if `D₁ = P⁻¹AP` and
    /// `D₂ = Q⁻¹D₁Q` then `D₂ = (PQ)⁻¹A(PQ)`.
    pub fn then(&self, inner: &SimilarityWitness) -> Result<Self, MatrixError> {
        Ok(SimilarityWitness {
            p: self.p.mul(&inner.p)?,
            p_inv: inner.p_inv.mul(&self.p_inv)?,
            note: format!("{}; {}", self.note, inner.note),
        })
    }

    /// `P⁻¹·A·P`.
    pub fn pull_back(&self, a: &Matrix) -> Result<Matrix, MatrixError> {
        self.p_inv.mul(a)?.mul(&self.p)
    }

    /// `P·A·P⁻¹`.
    pub fn push_forward(&self, a: &Matrix) -> Result<Matrix, MatrixError> {
        a.conjugate_with(&self.p, &self.p_inv)
    }

    pub fn is_exact(&self) -> bool {
        self.p.mul(&self.p_inv).is_ok_and(|m| m.is_identity())
    }

    pub fn is_unit_upper_triangular(&self) -> bool {
        let p = &self.p;
        let one = p.field().one();
        (0..p.rows()).all(|i| {
            (0..p.cols()).all(|j| match i.cmp(&j) {
                std::cmp::Ordering::Equal => *p.get(i, j) == one,
                std::cmp::Ordering::Greater => p.get(i, j).is_zero(),
                std::cmp::Ordering::Less => true,
            })
        })
    }
}

fn unit(field: &Field, n: usize, i: usize) -> Vec<FieldElement> {
    (0..n)
        .map(|j| if i == j { field.one() } else { field.zero() })
        .collect()
}

fn krylov(a: &Matrix, v: &[FieldElement]) -> Matrix {
    let n = a.rows();
    let mut cols = Vec::with_capacity(n);
    let mut cur = v.to_vec();
    for _ in 0..n {
        let next = a.apply(&cur);
        cols.push(cur);
        cur = next;
    }
    Matrix::from_columns(a.field().clone(), &cols)
}

/// Candidate cyclic vectors: unit vectors, then 0/1 vectors in lexicographic
/// order, then every vector.
fn cyclic_candidates(field: &Field, n: usize) -> impl Iterator<Item = Vec<FieldElement>> + '_ {
    let units = (0..n).map(move |i| unit(field, n, i));
    let zero_one = (1u64..(1u64 << n.min(63))).map(move |mask| {
        (0..n)
            .map(|j| {
                if mask >> (n - 1 - j) & 1 == 1 {
                    field.one()
                } else {
                    field.zero()
                }
            })
            .collect()
    });
    let q = field.order();
    let total = q.checked_pow(n as u32).unwrap_or(u64::MAX);
    let all = (1..total).map(move |mut idx| {
        let mut v = vec![field.zero(); n];
        for slot in v.iter_mut().rev() {
            *slot = field.from_index(idx % q);
            idx /= q;
        }
        v
    });
    units.chain(zero_one).chain(all)
}

/// Similarity to companion form: returns `C` and `P` with `P⁻¹·A·P = C`,
/// where the columns of `P` are `v, Av, …, A^{n-1}v` for a cyclic vector `v`.
pub fn companion_form(a: &Matrix) -> Result<(CompanionSpec, SimilarityWitness), CanonicalError> {
    if !a.is_square() {
        return Err(MatrixError::DimensionMismatch("companion form needs a square matrix".into()).into());
    }
    let n = a.rows();
    let mp = a.min_poly()?;
    let deg = mp.degree().unwrap_or(0);
    if deg < n {
        return Err(CanonicalError::NotNonderogatory(deg, n));
    }
    let companion = CompanionSpec::from_char_poly(&mp);
    let field = a.field();
    for v in cyclic_candidates(field, n) {
        let k = krylov(a, &v);
        if k.rank() < n {
            continue;
        }
        let w = SimilarityWitness::new(k, "cyclic basis")?;
        let d = w.pull_back(a)?;
        if d != companion.realize() {
            return Err(CanonicalError::PreconditionViolated(
                "Krylov basis did not reproduce the companion form".into(),
            ));
        }
        return Ok((companion, w));
    }
    unreachable!("a nonderogatory matrix has a cyclic vector")
}

/// `P⁻¹·C·P = diag(a₁,…,a_k,0,…,0) + C'` with `P` unit upper triangular.
///
/// Basis: `f₁ = e₁`, `f_{i+1} = (C − aᵢ)fᵢ` for `i ≤ k`, `f_{i+1} = C·fᵢ`
/// afterwards.
pub fn shifted_companion(
    c: &CompanionSpec,
    shifts: &[FieldElement],
) -> Result<(CompanionSpec, SimilarityWitness), CanonicalError> {
    let n = c.n();
    let k = shifts.len();
    if k == 0 || k > n {
        return Err(CanonicalError::PreconditionViolated(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let f = c.field();
    let cm = c.realize();
    let mut basis = vec![unit(f, n, 0)];
    for i in 0..n - 1 {
        let prev = &basis[i];
        let mut next = cm.apply(prev);
        if i < k {
            for (x, y) in next.iter_mut().zip(prev) {
                *x = f.sub(x, &f.mul(&shifts[i], y));
            }
        }
        basis.push(next);
    }
    let w = SimilarityWitness::new(Matrix::from_columns(f.clone(), &basis), "shifted companion basis")?;
    let d = w.pull_back(&cm)?;
    let mut full_shift = shifts.to_vec();
    full_shift.resize(n, f.zero());
    let diag = Matrix::diag(f.clone(), &full_shift);
    let rest = d.sub(&diag)?;
    let shifted = CompanionSpec::recognize(&rest).ok_or_else(|| {
        CanonicalError::PreconditionViolated("shifted basis did not yield a companion".into())
    })?;
    Ok((shifted, w))
}

/// `C₁` with `χ_{C₁}(X) = (−1)ⁿ χ_C(−X)`, so that `−C ∼ C₁`.
pub fn negate_companion(c: &CompanionSpec) -> CompanionSpec {
    let f = c.field();
    let n = c.n();
    let coeffs = c
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, x)| if (n - i) % 2 == 1 { f.neg(x) } else { x.clone() })
        .collect();
    CompanionSpec::new(f.clone(), coeffs)
}

/// Result of the alternating basis change: `D = P⁻¹·C·P` in block form
/// `[[M, N], [P₀, Q]]` plus the coefficients `d₁, …, d_n` read off `D`.
#[derive(Debug, Clone)]
pub struct AlternatingBasis {
    pub d: Matrix,
    pub witness: SimilarityWitness,
    /// `d₁, …, d_n` (index 0 holds `d₁`).
    pub ds: Vec<FieldElement>,
    /// Size of the trailing block.
    pub k: usize,
    /// Diagonal scalar at each odd position `1, 3, …, n−k` of `M`.
    pub pair_scalars: Vec<FieldElement>,
    /// Scalar of the trailing block `Q = b·I_k − companion(d_{n−k+1}, …, d_n)`.
    pub tail_scalar: FieldElement,
}

fn check_alternating_pre(n: usize, k: usize) -> Result<(), CanonicalError> {
    if n < 3 || k == 0 || k >= n || (n - k) % 2 == 0 {
        return Err(CanonicalError::PreconditionViolated(format!(
            "alternating basis needs n >= 3, 1 <= k <= n-1 and n-k odd (n = {n}, k = {k})"
        )));
    }
    Ok(())
}

/// The alternating basis with a single scalar `a` throughout.
pub fn alternating_basis(
    c: &CompanionSpec,
    k: usize,
    a: &FieldElement,
) -> Result<AlternatingBasis, CanonicalError> {
    let n = c.n();
    check_alternating_pre(n, k)?;
    if c.field().prime_subfield_index(a).is_none() {
        return Err(CanonicalError::PreconditionViolated(
            "scalar must be an integer multiple of unity".into(),
        ));
    }
    let pairs = vec![a.clone(); (n - k + 1) / 2];
    alternating_basis_mixed(c, k, &pairs, a)
}

/// Alternating basis with a separate scalar per diagonal pair of `M`.
///
/// `f₁ = e₁`; for `i ≤ n−k+1`, `fᵢ = C·f_{i−1} − α·f_{i−1}` when `i` is even
/// (with `α` the scalar of the pair starting at `i−1`) and `fᵢ = C·f_{i−1}`
/// when `i` is odd; for `i ≥ n−k+2`, `fᵢ = b·f_{i−1} − C·f_{i−1}`.
pub fn alternating_basis_mixed(
    c: &CompanionSpec,
    k: usize,
    pair_scalars: &[FieldElement],
    tail_scalar: &FieldElement,
) -> Result<AlternatingBasis, CanonicalError> {
    let n = c.n();
    check_alternating_pre(n, k)?;
    let head = n - k;
    if pair_scalars.len() != (head + 1) / 2 {
        return Err(CanonicalError::PreconditionViolated(format!(
            "expected {} pair scalars, got {}",
            (head + 1) / 2,
            pair_scalars.len()
        )));
    }
    let f = c.field();
    let cm = c.realize();
    let mut basis = vec![unit(f, n, 0)];
    for i in 2..=n {
        let prev = &basis[i - 2];
        let cf = cm.apply(prev);
        let next: Vec<FieldElement> = if i <= head + 1 {
            if i % 2 == 0 {
                let alpha = &pair_scalars[(i - 2) / 2];
                cf.iter().zip(prev).map(|(x, y)| f.sub(x, &f.mul(alpha, y))).collect()
            } else {
                cf
            }
        } else {
            cf.iter()
                .zip(prev)
                .map(|(x, y)| f.sub(&f.mul(tail_scalar, y), x))
                .collect()
        };
        basis.push(next);
    }
    let witness = SimilarityWitness::new(Matrix::from_columns(f.clone(), &basis), "alternating basis")?;
    let d = witness.pull_back(&cm)?;
    let mut ds: Vec<FieldElement> = (0..n).map(|i| d.get(i, n - 1).clone()).collect();
    ds[n - 1] = f.sub(&ds[n - 1], tail_scalar);
    let out = AlternatingBasis {
        d,
        witness,
        ds,
        k,
        pair_scalars: pair_scalars.to_vec(),
        tail_scalar: tail_scalar.clone(),
    };
    if !out.matches_template() {
        return Err(CanonicalError::PreconditionViolated(
            "alternating basis produced an unexpected block shape".into(),
        ));
    }
    Ok(out)
}

impl AlternatingBasis {
    pub fn n(&self) -> usize {
        self.d.rows()
    }

    /// The trailing companion `companion(d_{n−k+1}, …, d_n)`.
    pub fn trailing_companion(&self) -> CompanionSpec {
        let n = self.n();
        CompanionSpec::new(self.d.field().clone(), self.ds[n - self.k..].to_vec())
    }

    /// Expected `D` rebuilt from the scalars and `d₁, …, d_n`.
    pub fn template(&self) -> Matrix {
        let n = self.n();
        let head = n - self.k;
        let f = self.d.field();
        let q = self
            .trailing_companion()
            .realize()
            .neg()
            .add_scalar(&self.tail_scalar);
        Matrix::from_fn(f.clone(), n, n, |i, j| {
            if i < head && j < head {
                // M: alternating diagonal, ones below it
                if i == j && i % 2 == 0 {
                    Some(self.pair_scalars[i / 2].clone())
                } else if i == j + 1 {
                    Some(f.one())
                } else {
                    None
                }
            } else if i < head {
                // N: last column only
                (j == n - 1).then(|| self.ds[i].clone())
            } else if j < head {
                // single 1 at (first row of the tail, last column of the head)
                (i == head && j == head - 1).then(|| f.one())
            } else {
                Some(q.get(i - head, j - head).clone())
            }
        })
    }

    pub fn matches_template(&self) -> bool {
        self.d == self.template()
    }

    /// Rescales `f_n` (and `f_{n−1}` when `also_prev`) by `−1`; the block
    /// template no longer applies to the result.
    pub fn normalize_last(&self, also_prev: bool) -> Result<(Matrix, SimilarityWitness), CanonicalError> {
        let n = self.n();
        let f = self.d.field();
        let mut signs = vec![f.one(); n];
        signs[n - 1] = f.neg(&f.one());
        if also_prev {
            signs[n - 2] = f.neg(&f.one());
        }
        let s = Matrix::diag(f.clone(), &signs);
        let sw = SimilarityWitness {
            p: s.clone(),
            p_inv: s,
            note: "sign normalization".into(),
        };
        let w = self.witness.then(&sw)?;
        let d = sw.pull_back(&self.d)?;
        Ok((d, w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn f3() -> Field {
        FieldSpec::prime(3).unwrap()
    }

    #[test]
    fn realization_matches_definition() {
        let f = f3();
        let c = CompanionSpec::from_ints(f.clone(), &[1, 0, 2]);
        let expect = Matrix::from_ints(f.clone(), &[&[0, 0, -1], &[1, 0, 0], &[0, 1, -2]]);
        assert_eq!(c.realize(), expect);
        assert_eq!(c.trace(), f.int_embed(1));
        assert_eq!(c.realize().char_poly().unwrap(), c.char_poly());
        assert_eq!(CompanionSpec::recognize(&expect), Some(c));
    }

    #[test]
    fn companion_form_of_companion_is_trivial() {
        let f = f3();
        let c = CompanionSpec::from_ints(f.clone(), &[2, 1, 1, 0]);
        let (c2, w) = companion_form(&c.realize()).unwrap();
        assert_eq!(c2, c);
        assert!(w.p.is_identity());
    }

    #[test]
    fn companion_form_of_diagonal() {
        let f = f3();
        let a = Matrix::diag(f.clone(), &[f.int_embed(0), f.int_embed(1), f.int_embed(2)]);
        let (c, w) = companion_form(&a).unwrap();
        // X(X-1)(X-2) = X^3 + 2X over F_3
        assert_eq!(c, CompanionSpec::from_ints(f.clone(), &[0, 2, 0]));
        assert_eq!(w.pull_back(&a).unwrap(), c.realize());
        assert!(w.is_exact());
    }

    #[test]
    fn derogatory_is_rejected() {
        let f = f3();
        let a = Matrix::identity(f.clone(), 2);
        assert_eq!(companion_form(&a).unwrap_err(), CanonicalError::NotNonderogatory(1, 2));
    }

    #[test]
    fn cyclic_search_moves_past_e1() {
        let f = f3();
        // every unit vector is an eigenvector; the first cyclic 0/1 vector is (1,1,1)
        let a = Matrix::diag(f.clone(), &[f.int_embed(0), f.int_embed(1), f.int_embed(2)]);
        let (c, w) = companion_form(&a).unwrap();
        assert_eq!(w.pull_back(&a).unwrap(), c.realize());
        assert_eq!(w.p.column(0), vec![f.one(); 3]);
    }

    #[test]
    fn shifted_companion_zero_shifts_is_identity() {
        let f = f3();
        let c = CompanionSpec::from_ints(f.clone(), &[1, 2, 0, 1]);
        let (c2, w) = shifted_companion(&c, &[f.zero(), f.zero()]).unwrap();
        assert_eq!(c2, c);
        assert!(w.p.is_identity());
    }

    #[test]
    fn shifted_companion_two_by_two() {
        let f = f3();
        for c0 in 0..3 {
            for c1 in 0..3 {
                let c = CompanionSpec::from_ints(f.clone(), &[c0, c1]);
                let (c2, w) = shifted_companion(&c, &[f.one()]).unwrap();
                // f2 = C e1 - e1 = e2 - e1
                assert_eq!(w.p.column(1), vec![f.int_embed(-1), f.one()]);
                let d = w.pull_back(&c.realize()).unwrap();
                assert_eq!(d.get(0, 0), &f.one());
                assert_eq!(d, c2.realize().add(&Matrix::diag(f.clone(), &[f.one(), f.zero()])).unwrap());
                assert_eq!(c2.trace(), f.sub(&c.trace(), &f.one()));
            }
        }
    }

    #[test]
    fn shifted_companion_bounds() {
        let f = f3();
        let c = CompanionSpec::from_ints(f.clone(), &[1, 2]);
        assert!(shifted_companion(&c, &[]).is_err());
        assert!(shifted_companion(&c, &vec![f.one(); 3]).is_err());
    }

    #[test]
    fn negate_companion_examples() {
        let f = f3();
        let c = CompanionSpec::from_ints(f.clone(), &[1, 1]);
        assert_eq!(negate_companion(&c), CompanionSpec::from_ints(f.clone(), &[1, 2]));
        let nil = CompanionSpec::from_ints(f.clone(), &[0, 0, 0]);
        assert_eq!(negate_companion(&nil), nil);
        let c = CompanionSpec::from_ints(f.clone(), &[2, 1, 1, 2, 1]);
        let c1 = negate_companion(&c);
        assert_eq!(c1.trace(), f.neg(&c.trace()));
        assert_eq!(c1.char_poly(), c.realize().neg().char_poly().unwrap());
    }

    #[test]
    fn alternating_basis_small_example() {
        let f = f3();
        let c = CompanionSpec::from_ints(f.clone(), &[0, 0, 1]);
        let ab = alternating_basis(&c, 2, &f.one()).unwrap();
        let cm = c.realize();
        let e1 = unit(&f, 3, 0);
        let f2: Vec<_> = cm.apply(&e1).iter().zip(&e1).map(|(x, y)| f.sub(x, y)).collect();
        let cf2 = cm.apply(&f2);
        let f3v: Vec<_> = f2.iter().zip(&cf2).map(|(x, y)| f.sub(x, y)).collect();
        assert_eq!(ab.witness.p.column(0), e1);
        assert_eq!(ab.witness.p.column(1), f2);
        assert_eq!(ab.witness.p.column(2), f3v);
        assert!(ab.matches_template());
    }

    #[test]
    fn alternating_basis_preconditions() {
        let f = f3();
        let c = CompanionSpec::from_ints(f.clone(), &[0, 0, 1, 1]);
        assert!(alternating_basis(&c, 2, &f.one()).is_err());
        let c = CompanionSpec::from_ints(f.clone(), &[0, 1]);
        assert!(alternating_basis(&c, 1, &f.one()).is_err());
        let c = CompanionSpec::from_ints(f.clone(), &[0, 0, 1]);
        assert!(alternating_basis(&c, 3, &f.one()).is_err());
        let f9 = FieldSpec::default_extension(3, 2).unwrap();
        let c = CompanionSpec::from_ints(f9.clone(), &[0, 0, 1]);
        let root = f9.element(&[0, 1]).unwrap();
        assert!(alternating_basis(&c, 2, &root).is_err());
    }

    #[test]
    fn normalize_last_flips_signs() {
        let f = f3();
        let c = CompanionSpec::from_ints(f.clone(), &[1, 2, 2, 0, 1]);
        let ab = alternating_basis(&c, 2, &f.one()).unwrap();
        assert_eq!(ab.witness.p.get(4, 4), &f.int_embed(-1));
        let (d, w) = ab.normalize_last(false).unwrap();
        assert_eq!(w.p.get(4, 4), &f.one());
        assert_eq!(w.pull_back(&c.realize()).unwrap(), d);
        assert!(w.is_exact());
    }
}
