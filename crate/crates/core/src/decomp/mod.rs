//! The decomposition engine.
//!
//! Every certificate, whatever route produced it, is re-verified before it is
//! returned: `A = E + V`, `E^p = E` and `V^3 = 0`. A route whose output fails
//! verification is discarded and the next route in the fallback order runs.

mod certificate;
mod completion;
mod routes;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{companion_form, CanonicalError, CompanionSpec, SimilarityWitness};
use crate::field::FieldElement;
use crate::matf::{Matrix, MatrixError};
use crate::oracle::OracleError;

pub use certificate::{matrix_from_json, matrix_to_json, Certificate, FieldHeader, MatrixJson, Reverification};
pub use completion::{trailing_p_potent_completion, COMPLETION_SEARCH_CAP};
pub use routes::{
    ORACLE_FALLBACK_CAP,
    alt_mixed, even_border, main_lemma, maincor_candidates, minus3_candidates, route_maincor,
    route_minus3, route_minus3_with, route_trip, special_odd,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error("trace is not an integer multiple of unity")]
    TraceNotPrimeSubfield,
    #[error("matrix is derogatory")]
    NotNonderogatory,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("p-potent completion failed: {0}")]
    CompletionFailed(String),
    #[error("no viable scalar a: {0}")]
    NoViableA(String),
    #[error("E^3 != E for the tripotent construction")]
    TripotencyFailed,
    #[error("certificate failed verification: {0}")]
    VerificationFailed(String),
    #[error("no route produced a verified certificate")]
    Unverifiable,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl From<CanonicalError> for DecompError {
    fn from(e: CanonicalError) -> Self {
        match e {
            CanonicalError::NotNonderogatory(..) => DecompError::NotNonderogatory,
            CanonicalError::PreconditionViolated(s) => DecompError::PreconditionViolated(s),
            CanonicalError::Matrix(m) => DecompError::Matrix(m),
        }
    }
}

/// Which branch of the construction produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RouteTag {
    N1,
    N2,
    Maincor,
    Minus3,
    Minus3Shift,
    #[serde(rename = "P3_T1")]
    P3T1,
    #[serde(rename = "P3_T2")]
    P3T2,
    #[serde(rename = "P3_T0_TRIP")]
    P3T0Trip,
    EvenBorder,
    AltMixed,
    OracleFallback,
}

impl RouteTag {
    pub const ALL: [RouteTag; 11] = [
        RouteTag::N1,
        RouteTag::N2,
        RouteTag::Maincor,
        RouteTag::Minus3,
        RouteTag::Minus3Shift,
        RouteTag::P3T1,
        RouteTag::P3T2,
        RouteTag::P3T0Trip,
        RouteTag::EvenBorder,
        RouteTag::AltMixed,
        RouteTag::OracleFallback,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RouteTag::N1 => "N1",
            RouteTag::N2 => "N2",
            RouteTag::Maincor => "MAINCOR",
            RouteTag::Minus3 => "MINUS3",
            RouteTag::Minus3Shift => "MINUS3_SHIFT",
            RouteTag::P3T1 => "P3_T1",
            RouteTag::P3T2 => "P3_T2",
            RouteTag::P3T0Trip => "P3_T0_TRIP",
            RouteTag::EvenBorder => "EVEN_BORDER",
            RouteTag::AltMixed => "ALT_MIXED",
            RouteTag::OracleFallback => "ORACLE_FALLBACK",
        }
    }

    pub fn parse(s: &str) -> Option<RouteTag> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for RouteTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Integer parameters recorded on a certificate (`None` when unused).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub k: Option<i64>,
    pub a: Option<i64>,
    pub l: Option<i64>,
    pub t: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub sum_ok: bool,
    pub p_potent_ok: bool,
    /// Least `j` with `V^j = 0`; 0 when `V` is not nilpotent.
    pub nil_index: usize,
}

impl Checks {
    /// Recomputes every property from scratch.
    pub fn compute(a: &Matrix, e: &Matrix, v: &Matrix) -> Checks {
        let sum_ok = e.add(v).is_ok_and(|s| s == *a);
        let p_potent_ok = e.is_p_potent();
        let nil_index = v.nilpotency_index().unwrap_or(0);
        Checks {
            sum_ok,
            p_potent_ok,
            nil_index,
        }
    }

    pub fn passes(&self, max_index: usize) -> bool {
        self.sum_ok && self.p_potent_ok && self.nil_index >= 1 && self.nil_index <= max_index
    }
}

/// Boundary conditions carried by a special decomposition: `E`'s last row is
/// `(0, …, 0, a)` and `V`'s first column is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialShape {
    pub e_last_row_scalar: FieldElement,
    pub v_first_col_zero: bool,
}

impl SpecialShape {
    pub fn holds(&self, e: &Matrix, v: &Matrix) -> bool {
        let n = e.rows();
        let last_ok = (0..n).all(|j| {
            if j == n - 1 {
                *e.get(n - 1, j) == self.e_last_row_scalar
            } else {
                e.get(n - 1, j).is_zero()
            }
        });
        let col_ok = v.column(0).iter().all(FieldElement::is_zero);
        last_ok && (col_ok || !self.v_first_col_zero)
    }
}

/// A decomposition built at a representative `D = P⁻¹·C·P`, carrying the
/// special shape.
#[derive(Debug, Clone)]
pub struct SpecialDecomposition {
    /// The representative `D`, equal to `E + V`.
    pub d: Matrix,
    pub e: Matrix,
    pub v: Matrix,
    /// `P` with `D = P⁻¹·C·P` for the companion `C` that was decomposed.
    pub witness: SimilarityWitness,
    pub shape: SpecialShape,
    pub route: RouteTag,
    pub detail: String,
    pub params: Params,
    pub checks: Checks,
}

impl SpecialDecomposition {
    /// Checks the certificate against `c` with nilpotency bound `max_index`.
    pub(crate) fn verify(&self, c: &Matrix, max_index: usize) -> Result<(), DecompError> {
        let fail = |why: &str| Err(DecompError::VerificationFailed(format!("{}: {why}", self.route)));
        if !self.witness.is_exact() {
            return fail("witness inverse is inexact");
        }
        if self.witness.pull_back(c)? != self.d {
            return fail("representative is not P^-1 C P");
        }
        if !self.checks.passes(max_index) {
            return fail(&format!("checks {:?}", self.checks));
        }
        if !self.shape.holds(&self.e, &self.v) {
            return fail("special shape violated");
        }
        Ok(())
    }
}

/// A verified certificate `A = E + V` with `E^p = E`, `V^3 = 0`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub a: Matrix,
    pub e: Matrix,
    pub v: Matrix,
    /// When present, the certificate was built at `P⁻¹·A·P` and transported
    /// back to `A`.
    pub witness: Option<SimilarityWitness>,
    pub route: RouteTag,
    pub detail: String,
    pub params: Params,
    pub checks: Checks,
}

impl Decomposition {
    fn finish(
        a: Matrix,
        e: Matrix,
        v: Matrix,
        witness: Option<SimilarityWitness>,
        route: RouteTag,
        detail: String,
        params: Params,
    ) -> Result<Decomposition, DecompError> {
        let checks = Checks::compute(&a, &e, &v);
        if !checks.passes(3) {
            return Err(DecompError::VerificationFailed(format!("{route}: {checks:?}")));
        }
        Ok(Decomposition {
            a,
            e,
            v,
            witness,
            route,
            detail,
            params,
            checks,
        })
    }

    fn from_special(c: &Matrix, s: SpecialDecomposition) -> Result<Decomposition, DecompError> {
        let e = s.witness.push_forward(&s.e)?;
        let v = s.witness.push_forward(&s.v)?;
        Self::finish(c.clone(), e, v, Some(s.witness), s.route, s.detail, s.params)
    }

    /// Conjugates the certificate by `w`: certifies `P·A·P⁻¹`.
    fn transport(self, w: &SimilarityWitness, target: &Matrix) -> Result<Decomposition, DecompError> {
        let e = w.push_forward(&self.e)?;
        let v = w.push_forward(&self.v)?;
        let witness = match self.witness {
            Some(inner) => Some(w.then(&inner)?),
            None => Some(w.clone()),
        };
        Self::finish(target.clone(), e, v, witness, self.route, self.detail, self.params)
    }

    pub fn nil_index(&self) -> usize {
        self.checks.nil_index
    }
}

/// `Some(t)` iff `trace(A) = t·1`.
pub fn check_trace_condition(a: &Matrix) -> Option<u32> {
    a.field().prime_subfield_index(&a.trace())
}

/// Full case tree for a companion matrix.
pub fn decompose_companion(c: &CompanionSpec) -> Result<Decomposition, DecompError> {
    let cm = c.realize();
    let t = check_trace_condition(&cm).ok_or(DecompError::TraceNotPrimeSubfield)?;
    let n = c.n();
    let base = Params {
        t: Some(t as i64),
        ..Params::default()
    };
    match n {
        1 => Decomposition::finish(
            cm.clone(),
            cm.clone(),
            Matrix::zeros(c.field().clone(), 1, 1),
            None,
            RouteTag::N1,
            String::new(),
            base,
        ),
        2 => routes::decompose_n2(c, t),
        _ => {
            let constructed = if n % 2 == 1 {
                special_odd(c, false).and_then(|s| Decomposition::from_special(&cm, s))
            } else {
                even_border(c)
            };
            constructed.or_else(|_| routes::oracle_fallback(c, t))
        }
    }
}

/// Decomposes an arbitrary nonderogatory matrix via its companion form.
pub fn decompose(a: &Matrix) -> Result<Decomposition, DecompError> {
    if !a.is_square() {
        return Err(MatrixError::DimensionMismatch("decompose needs a square matrix".into()).into());
    }
    if check_trace_condition(a).is_none() {
        return Err(DecompError::TraceNotPrimeSubfield);
    }
    let (c, w) = companion_form(a)?;
    let dc = decompose_companion(&c)?;
    // w⁻¹·A·w = C, so A = w·C·w⁻¹
    dc.transport(&w, a)
}

#[cfg(test)]
mod tests;
