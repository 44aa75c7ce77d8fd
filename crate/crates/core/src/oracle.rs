//! Brute-force ground truth at desk scale, plus the exhaustive sweeps and
//! the sharpness scan built on it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::CompanionSpec;
use crate::decomp::{decompose_companion, Certificate, DecompError, Decomposition, FieldHeader, RouteTag};
use crate::field::{Field, FieldSpec};
use crate::matf::Matrix;

/// Largest `q^{n²}` matrix space enumerated.
pub const ENUMERATION_CAP: u64 = 100_000_000;
/// Largest `q^n` companion space swept.
pub const SWEEP_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space of {0} candidates exceeds the cap of {1}")]
    SearchSpaceTooLarge(String, u64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

fn guarded_size(q: u64, exp: u32, cap: u64) -> Result<u64, OracleError> {
    match q.checked_pow(exp) {
        Some(s) if s <= cap => Ok(s),
        _ => Err(OracleError::SearchSpaceTooLarge(format!("{q}^{exp}"), cap)),
    }
}

/// Every `n×n` matrix over `field`, lexicographic in row-major entry indices.
pub fn all_matrices(n: usize, field: &Field) -> Result<impl Iterator<Item = Matrix> + '_, OracleError> {
    let q = field.order();
    let total = guarded_size(q, (n * n) as u32, ENUMERATION_CAP)?;
    Ok((0..total).map(move |mut idx| {
        let mut entries = vec![field.zero(); n * n];
        for slot in entries.iter_mut().rev() {
            *slot = field.from_index(idx % q);
            idx /= q;
        }
        Matrix::from_entries(field.clone(), n, n, entries).expect("in-field entries")
    }))
}

/// All `E` with `E^p = E`, in lexicographic order.
pub fn enumerate_p_potents(n: usize, field: &Field) -> Result<impl Iterator<Item = Matrix> + '_, OracleError> {
    Ok(all_matrices(n, field)?.filter(Matrix::is_p_potent))
}

/// First `(E, A − E)` in enumeration order with `E^p = E` and
/// `(A − E)^{max_index} = 0`.
pub fn oracle_decompose(a: &Matrix, max_index: usize) -> Result<Option<(Matrix, Matrix)>, OracleError> {
    if !a.is_square() {
        return Err(OracleError::PreconditionViolated("square matrix required".into()));
    }
    let field = a.field().clone();
    for e in enumerate_p_potents(a.rows(), &field)? {
        if let Some(pair) = try_split(a, &e, max_index) {
            return Ok(Some(pair));
        }
    }
    Ok(None)
}

/// Same search against a precomputed table of p-potents.
pub fn oracle_decompose_in(table: &[Matrix], a: &Matrix, max_index: usize) -> Option<(Matrix, Matrix)> {
    table.iter().find_map(|e| try_split(a, e, max_index))
}

fn try_split(a: &Matrix, e: &Matrix, max_index: usize) -> Option<(Matrix, Matrix)> {
    let nmat = a.sub(e).ok()?;
    nmat.pow(max_index as u64)
        .ok()?
        .is_zero()
        .then(|| (e.clone(), nmat))
}

/// Companion matrices of size `n`, lexicographic in `(c₀, …, c_{n−1})`.
pub fn companions(n: usize, field: &Field) -> Result<impl Iterator<Item = CompanionSpec> + '_, OracleError> {
    let q = field.order();
    let total = guarded_size(q, n as u32, SWEEP_CAP)?;
    Ok((0..total).map(move |idx| companion_at(n, field, idx)))
}

fn companion_at(n: usize, field: &Field, mut idx: u64) -> CompanionSpec {
    let q = field.order();
    let mut coeffs = vec![field.zero(); n];
    for slot in coeffs.iter_mut().rev() {
        *slot = field.from_index(idx % q);
        idx /= q;
    }
    CompanionSpec::new(field.clone(), coeffs)
}

fn coeff_strings(c: &CompanionSpec) -> Vec<String> {
    c.coeffs().iter().map(|x| c.field().format_element(x)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteNote {
    pub companion: Vec<String>,
    pub route: String,
    pub detail: String,
}

/// Aggregate outcome of decomposing every companion of one size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub field: FieldHeader,
    pub n: usize,
    pub total: u64,
    pub succeeded: u64,
    pub rejected_trace: u64,
    pub route_histogram: BTreeMap<String, u64>,
    pub failures: Vec<RouteNote>,
    /// Certificates from routes outside the constructive tree
    /// (`ALT_MIXED`, `ORACLE_FALLBACK`), listed individually.
    pub off_tree: Vec<RouteNote>,
}

impl SweepReport {
    fn empty(field: &FieldSpec, n: usize) -> Self {
        SweepReport {
            field: FieldHeader::of(field),
            n,
            total: 0,
            succeeded: 0,
            rejected_trace: 0,
            route_histogram: BTreeMap::new(),
            failures: Vec::new(),
            off_tree: Vec::new(),
        }
    }

    /// Associative merge; `other` covers a later chunk of the space.
    pub fn merge(mut self, other: SweepReport) -> SweepReport {
        self.total += other.total;
        self.succeeded += other.succeeded;
        self.rejected_trace += other.rejected_trace;
        for (k, v) in other.route_histogram {
            *self.route_histogram.entry(k).or_default() += v;
        }
        self.failures.extend(other.failures);
        self.off_tree.extend(other.off_tree);
        self
    }

    pub fn is_consistent(&self) -> bool {
        self.total == self.succeeded + self.rejected_trace + self.failures.len() as u64
    }

    fn record(&mut self, c: &CompanionSpec, outcome: Result<Decomposition, DecompError>) {
        self.total += 1;
        let note = |route: String, detail: String| RouteNote {
            companion: coeff_strings(c),
            route,
            detail,
        };
        match outcome {
            Ok(d) => {
                // independent recomputation of every property
                let cm = c.realize();
                let ok = d.a == cm
                    && d.e.add(&d.v).is_ok_and(|s| s == cm)
                    && d.e.is_p_potent()
                    && d.v.pow(3).is_ok_and(|m| m.is_zero());
                if ok {
                    self.succeeded += 1;
                    *self.route_histogram.entry(d.route.to_string()).or_default() += 1;
                    if matches!(d.route, RouteTag::AltMixed | RouteTag::OracleFallback)
                        || d.detail.contains("ALT_MIXED")
                    {
                        self.off_tree.push(note(d.route.to_string(), d.detail));
                    }
                } else {
                    self.failures.push(note(d.route.to_string(), "certificate failed re-check".into()));
                }
            }
            Err(DecompError::TraceNotPrimeSubfield) => self.rejected_trace += 1,
            Err(e) => self.failures.push(note("ERROR".into(), e.to_string())),
        }
    }
}

fn sweep_range(n: usize, field: &Field, range: std::ops::Range<u64>) -> SweepReport {
    let mut report = SweepReport::empty(field, n);
    for idx in range {
        let c = companion_at(n, field, idx);
        let outcome = decompose_companion(&c);
        report.record(&c, outcome);
    }
    report
}

/// Decomposes and re-verifies every companion of size `n`, single-threaded.
pub fn exhaustive_sweep(n: usize, field: &Field) -> Result<SweepReport, OracleError> {
    let total = guarded_size(field.order(), n as u32, SWEEP_CAP)?;
    Ok(sweep_range(n, field, 0..total))
}

/// As [`exhaustive_sweep`], splitting the coefficient space into contiguous
/// chunks on a pool of at most `threads` workers.
pub fn exhaustive_sweep_par(n: usize, field: &Field, threads: usize) -> Result<SweepReport, OracleError> {
    const CHUNK: u64 = 64;
    let total = guarded_size(field.order(), n as u32, SWEEP_CAP)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| OracleError::PreconditionViolated(e.to_string()))?;
    let starts: Vec<u64> = (0..total).step_by(CHUNK as usize).collect();
    let parts: Vec<SweepReport> = pool.install(|| {
        starts
            .par_iter()
            .map(|&s| sweep_range(n, field, s..(s + CHUNK).min(total)))
            .collect()
    });
    Ok(parts
        .into_iter()
        .fold(SweepReport::empty(field, n), SweepReport::merge))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SharpnessEntry {
    pub companion: Vec<String>,
    pub index2_impossible: bool,
    pub index3_certificate: Certificate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub field: FieldHeader,
    pub n: usize,
    /// Number of p-potent 3×3 matrices searched per qualifier.
    pub p_potents_searched: usize,
    pub qualifying: Vec<SharpnessEntry>,
}

impl SharpnessReport {
    /// Every qualifier has no index-2 split and a verified index-≤3 certificate.
    pub fn confirms_claim(&self) -> bool {
        !self.qualifying.is_empty()
            && self.qualifying.iter().all(|q| {
                q.index2_impossible
                    && q.index3_certificate.reverify(3).is_ok_and(|r| r.ok())
            })
    }
}

/// 3×3 companions over `F_3` with trace 1 and none of `0, 1, −1` as
/// eigenvalues: checks that no `E^3 = E` leaves `N^2 = 0` and that the
/// engine finds `V^3 = 0`.
pub fn sharpness_scan(field: &Field) -> Result<SharpnessReport, DecompError> {
    if field.p() != 3 || field.m() != 1 {
        return Err(OracleError::PreconditionViolated("sharpness scan runs over F_3".into()).into());
    }
    let n = 3;
    let table: Vec<Matrix> = enumerate_p_potents(n, field)?.collect();
    let mut qualifying = Vec::new();
    for c in companions(n, field)? {
        if c.trace() != field.one() {
            continue;
        }
        let chi = c.char_poly();
        let excluded = [field.zero(), field.one(), field.neg(&field.one())];
        if excluded.iter().any(|x| chi.eval(x).is_zero()) {
            continue;
        }
        let cm = c.realize();
        let index2_impossible = oracle_decompose_in(&table, &cm, 2).is_none();
        let cert = decompose_companion(&c)?;
        qualifying.push(SharpnessEntry {
            companion: coeff_strings(&c),
            index2_impossible,
            index3_certificate: Certificate::from_decomposition(&cert),
        });
    }
    Ok(SharpnessReport {
        field: FieldHeader::of(field),
        n,
        p_potents_searched: table.len(),
        qualifying,
    })
}
