//! JSON form of a decomposition certificate.

use serde::{Deserialize, Serialize};

use crate::field::{Field, FieldError, FieldSpec};
use crate::matf::Matrix;

use super::{Checks, Decomposition, Params};

/// Field header as it appears in JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub p: u32,
    pub m: usize,
    pub modulus: Option<Vec<u32>>,
}

impl FieldHeader {
    pub fn of(field: &FieldSpec) -> Self {
        FieldHeader {
            p: field.p(),
            m: field.m(),
            modulus: field.modulus().map(<[u32]>::to_vec),
        }
    }

    pub fn build(&self) -> Result<Field, FieldError> {
        FieldSpec::new(self.p, self.m, self.modulus.clone())
    }
}

/// Row-major matrix of canonical element strings.
pub type MatrixJson = Vec<Vec<String>>;

pub fn matrix_to_json(m: &Matrix) -> MatrixJson {
    let f = m.field();
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|e| f.format_element(e)).collect())
        .collect()
}

pub fn matrix_from_json(field: &Field, rows: &MatrixJson) -> Result<Matrix, String> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    let mut entries = Vec::with_capacity(n * cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(format!("row {i} has {} entries, expected {cols}", row.len()));
        }
        for s in row {
            entries.push(field.parse_element(s).map_err(|e| e.to_string())?);
        }
    }
    Matrix::from_entries(field.clone(), n, cols, entries).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub field: FieldHeader,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: MatrixJson,
    #[serde(rename = "E")]
    pub e: MatrixJson,
    #[serde(rename = "V")]
    pub v: MatrixJson,
    pub route: String,
    #[serde(default)]
    pub detail: String,
    pub params: Params,
    pub checks: Checks,
}

/// Outcome of re-checking a certificate from its serialized form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reverification {
    pub recomputed: Checks,
    pub matches_recorded: bool,
    pub nil_bound_ok: bool,
}

impl Reverification {
    pub fn ok(&self) -> bool {
        self.recomputed.sum_ok && self.recomputed.p_potent_ok && self.matches_recorded && self.nil_bound_ok
    }
}

impl Certificate {
    pub fn from_decomposition(d: &Decomposition) -> Self {
        Certificate {
            field: FieldHeader::of(d.a.field()),
            n: d.a.rows(),
            a: matrix_to_json(&d.a),
            e: matrix_to_json(&d.e),
            v: matrix_to_json(&d.v),
            route: d.route.to_string(),
            detail: d.detail.clone(),
            params: d.params,
            checks: d.checks,
        }
    }

    /// Rebuilds the matrices and recomputes every check; `V` must satisfy
    /// `V^{max_index} = 0`.
    pub fn reverify(&self, max_index: usize) -> Result<Reverification, String> {
        let field = self.field.build().map_err(|e| e.to_string())?;
        let a = matrix_from_json(&field, &self.a)?;
        let e = matrix_from_json(&field, &self.e)?;
        let v = matrix_from_json(&field, &self.v)?;
        for (name, m) in [("A", &a), ("E", &e), ("V", &v)] {
            if m.rows() != self.n || m.cols() != self.n {
                return Err(format!("{name} is not {0}x{0}", self.n));
            }
        }
        let recomputed = Checks::compute(&a, &e, &v);
        Ok(Reverification {
            recomputed,
            matches_recorded: recomputed == self.checks,
            nil_bound_ok: recomputed.nil_index >= 1 && recomputed.nil_index <= max_index,
        })
    }
}
