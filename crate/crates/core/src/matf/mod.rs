//! Dense exact matrices over a finite field, with the predicates the
//! decomposition engine quantifies over.

mod poly;
pub mod text;

use std::fmt;

use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError};

pub use poly::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("operands live over different fields")]
    FieldMismatch,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Row-major dense matrix. Values are never mutated once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
}

/// Structural facts about a square matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Predicates {
    pub is_nilpotent: bool,
    pub is_p_potent: bool,
    pub is_nonderogatory: bool,
    pub nilpotency_index: Option<usize>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        let entries = vec![field.zero(); rows * cols];
        Matrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        Self::scalar(field.clone(), n, &field.one())
    }

    pub fn scalar(field: Field, n: usize, s: &FieldElement) -> Self {
        Self::from_fn(field, n, n, |i, j| if i == j { Some(s.clone()) } else { None })
    }

    pub fn diag(field: Field, d: &[FieldElement]) -> Self {
        Self::from_fn(field, d.len(), d.len(), |i, j| (i == j).then(|| d[i].clone()))
    }

    /// Builds from a closure; `None` means zero.
    pub fn from_fn(
        field: Field,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Option<FieldElement>,
    ) -> Self {
        let zero = field.zero();
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j).unwrap_or_else(|| zero.clone()));
            }
        }
        Matrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn from_entries(
        field: Field,
        rows: usize,
        cols: usize,
        entries: Vec<FieldElement>,
    ) -> Result<Self, MatrixError> {
        if entries.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| !field.contains(e)) {
            return Err(FieldError::FieldMismatch(format!("{bad:?} not in {field}")).into());
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    /// Prime-subfield matrix from integer rows; handy in tests.
    pub fn from_ints(field: Field, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(field.clone(), r, c, |i, j| Some(field.int_embed(rows[i][j])))
    }

    /// Column vector.
    pub fn column_vector(field: Field, v: &[FieldElement]) -> Self {
        Self::from_fn(field, v.len(), 1, |i, _| Some(v[i].clone()))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Copy with one entry replaced.
    pub fn with_entry(&self, i: usize, j: usize, v: FieldElement) -> Matrix {
        let mut out = self.clone();
        out.entries[i * self.cols + j] = v;
        out
    }

    /// Sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Matrix {
        Self::from_fn(self.field.clone(), h, w, |i, j| {
            Some(self.get(r0 + i, c0 + j).clone())
        })
    }

    /// Assembles `[[tl, tr], [bl, br]]`.
    pub fn from_blocks(tl: &Matrix, tr: &Matrix, bl: &Matrix, br: &Matrix) -> Result<Matrix, MatrixError> {
        if tl.rows != tr.rows || bl.rows != br.rows || tl.cols != bl.cols || tr.cols != br.cols {
            return Err(MatrixError::DimensionMismatch("block shapes disagree".into()));
        }
        let (h, w) = (tl.rows, tl.cols);
        Ok(Self::from_fn(
            tl.field.clone(),
            h + bl.rows,
            w + tr.cols,
            |i, j| {
                Some(match (i < h, j < w) {
                    (true, true) => tl.get(i, j).clone(),
                    (true, false) => tr.get(i, j - w).clone(),
                    (false, true) => bl.get(i - h, j).clone(),
                    (false, false) => br.get(i - h, j - w).clone(),
                })
            },
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(FieldElement::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(self.field.clone(), self.rows)
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_fn(self.field.clone(), self.cols, self.rows, |i, j| {
            Some(self.get(j, i).clone())
        })
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<(), MatrixError> {
        if self.field != other.field {
            return Err(MatrixError::FieldMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn require_square(&self) -> Result<usize, MatrixError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(MatrixError::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.check_same_shape(other)?;
        let f = &self.field;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| f.add(a, b)).collect();
        Ok(Matrix { entries, ..self.clone_shape() })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.check_same_shape(other)?;
        let f = &self.field;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| f.sub(a, b)).collect();
        Ok(Matrix { entries, ..self.clone_shape() })
    }

    pub fn neg(&self) -> Matrix {
        let f = &self.field;
        let entries = self.entries.iter().map(|a| f.neg(a)).collect();
        Matrix { entries, ..self.clone_shape() }
    }

    pub fn scalar_mul(&self, s: &FieldElement) -> Matrix {
        let f = &self.field;
        let entries = self.entries.iter().map(|a| f.mul(a, s)).collect();
        Matrix { entries, ..self.clone_shape() }
    }

    /// `self + s·I` for square `self`.
    pub fn add_scalar(&self, s: &FieldElement) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let k = i * self.cols + i;
            out.entries[k] = self.field.add(&out.entries[k], s);
        }
        out
    }

    fn clone_shape(&self) -> Matrix {
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: Vec::new(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        if self.field != other.field {
            return Err(MatrixError::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut entries = vec![f.zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let slot = &mut entries[i * other.cols + j];
                    *slot = f.add(slot, &f.mul(a, b));
                }
            }
        }
        Ok(Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    /// `self^k` by repeated squaring; `self^0 = I`.
    pub fn pow(&self, mut k: u64) -> Result<Matrix, MatrixError> {
        let n = self.require_square()?;
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.field.clone(), n);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `P · self · P⁻¹`.
    pub fn conjugate_by(&self, p: &Matrix) -> Result<Matrix, MatrixError> {
        let p_inv = p.inverse()?;
        self.conjugate_with(p, &p_inv)
    }

    /// `P · self · P⁻¹` with a precomputed inverse.
    pub fn conjugate_with(&self, p: &Matrix, p_inv: &Matrix) -> Result<Matrix, MatrixError> {
        p.mul(self)?.mul(p_inv)
    }

    pub fn trace(&self) -> FieldElement {
        let f = &self.field;
        (0..self.rows.min(self.cols)).fold(f.zero(), |acc, i| f.add(&acc, self.get(i, i)))
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        let n = self.require_square()?;
        let f = &self.field;
        let mut a: Vec<Vec<FieldElement>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut inv: Vec<Vec<FieldElement>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { f.one() } else { f.zero() }).collect())
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(MatrixError::SingularMatrix)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let s = f.inv(&a[col][col])?;
            for j in 0..n {
                a[col][j] = f.mul(&a[col][j], &s);
                inv[col][j] = f.mul(&inv[col][j], &s);
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let factor = a[r][col].clone();
                for j in 0..n {
                    let t = f.mul(&factor, &a[col][j]);
                    a[r][j] = f.sub(&a[r][j], &t);
                    let t = f.mul(&factor, &inv[col][j]);
                    inv[r][j] = f.sub(&inv[r][j], &t);
                }
            }
        }
        Ok(Matrix {
            field: f.clone(),
            rows: n,
            cols: n,
            entries: inv.into_iter().flatten().collect(),
        })
    }

    /// Row rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let f = &self.field;
        let mut a: Vec<Vec<FieldElement>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..self.rows).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(rank, pivot);
            let s = f.inv(&a[rank][col]).expect("nonzero pivot");
            for r in rank + 1..self.rows {
                if a[r][col].is_zero() {
                    continue;
                }
                let factor = f.mul(&a[r][col], &s);
                for j in col..self.cols {
                    let t = f.mul(&factor, &a[rank][j]);
                    a[r][j] = f.sub(&a[r][j], &t);
                }
            }
            rank += 1;
        }
        rank
    }

    /// `det(X·I − A)` via Hessenberg reduction and the standard
    /// determinant recurrence on the Hessenberg form.
    pub fn char_poly(&self) -> Result<Polynomial, MatrixError> {
        let n = self.require_square()?;
        let f = self.field.clone();
        let h = self.hessenberg();
        // chi[m] = char poly of the leading m x m block
        let mut chi: Vec<Polynomial> = vec![Polynomial::one(f.clone())];
        for m in 0..n {
            let x_minus = Polynomial::linear(f.clone(), &h[m][m]);
            let mut next = x_minus.mul(&chi[m]);
            let mut prod = f.one();
            for i in (0..m).rev() {
                prod = f.mul(&prod, &h[i + 1][i]);
                if prod.is_zero() {
                    break;
                }
                let coeff = f.mul(&h[i][m], &prod);
                next = next.sub(&chi[i].scale(&coeff));
            }
            chi.push(next);
        }
        Ok(chi.pop().unwrap())
    }

    /// Upper Hessenberg form similar to `self`.
    fn hessenberg(&self) -> Vec<Vec<FieldElement>> {
        let n = self.rows;
        let f = &self.field;
        let mut h: Vec<Vec<FieldElement>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        for j in 0..n.saturating_sub(2) {
            let Some(piv) = (j + 1..n).find(|&i| !h[i][j].is_zero()) else {
                continue;
            };
            if piv != j + 1 {
                h.swap(piv, j + 1);
                for row in h.iter_mut() {
                    row.swap(piv, j + 1);
                }
            }
            let inv = f.inv(&h[j + 1][j]).expect("nonzero pivot");
            for r in j + 2..n {
                if h[r][j].is_zero() {
                    continue;
                }
                let u = f.mul(&h[r][j], &inv);
                // row_r -= u * row_{j+1}
                for c in 0..n {
                    let t = f.mul(&u, &h[j + 1][c]);
                    h[r][c] = f.sub(&h[r][c], &t);
                }
                // col_{j+1} += u * col_r
                for row in h.iter_mut() {
                    let t = f.mul(&u, &row[r]);
                    row[j + 1] = f.add(&row[j + 1], &t);
                }
            }
        }
        h
    }

    /// Least-degree monic annihilator, from the first linear dependence
    /// among `I, A, A², …` viewed as vectors.
    pub fn min_poly(&self) -> Result<Polynomial, MatrixError> {
        let n = self.require_square()?;
        let f = self.field.clone();
        // Echelon rows: (pivot column, reduced vector, combination over powers)
        let mut basis: Vec<(usize, Vec<FieldElement>, Vec<FieldElement>)> = Vec::new();
        let mut power = Matrix::identity(f.clone(), n);
        for k in 0..=n {
            let mut v = power.entries.clone();
            let mut combo = vec![f.zero(); n + 1];
            combo[k] = f.one();
            for (piv, row, rc) in &basis {
                if v[*piv].is_zero() {
                    continue;
                }
                let factor = v[*piv].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    *x = f.sub(x, &f.mul(&factor, y));
                }
                for (x, y) in combo.iter_mut().zip(rc) {
                    *x = f.sub(x, &f.mul(&factor, y));
                }
            }
            match v.iter().position(|x| !x.is_zero()) {
                None => return Ok(Polynomial::new(f, combo)),
                Some(piv) => {
                    let s = f.inv(&v[piv])?;
                    let v = v.iter().map(|x| f.mul(x, &s)).collect();
                    let combo = combo.iter().map(|x| f.mul(x, &s)).collect();
                    basis.push((piv, v, combo));
                }
            }
            power = power.mul(self)?;
        }
        unreachable!("Cayley-Hamilton bounds the degree by n")
    }

    /// Least `k` with `A^k = 0`, or `None` if `A` is not nilpotent.
    pub fn nilpotency_index(&self) -> Option<usize> {
        if !self.is_square() {
            return None;
        }
        let mut power = self.clone();
        for k in 1..=self.rows {
            if power.is_zero() {
                return Some(k);
            }
            power = power.mul(self).ok()?;
        }
        None
    }

    pub fn is_nilpotent(&self) -> bool {
        self.is_square() && self.pow(self.rows as u64).is_ok_and(|m| m.is_zero())
    }

    pub fn is_p_potent(&self) -> bool {
        self.is_square() && self.pow(self.field.p() as u64).is_ok_and(|m| m == *self)
    }

    pub fn is_nonderogatory(&self) -> bool {
        self.min_poly().is_ok_and(|m| m.degree() == Some(self.rows))
    }

    pub fn predicates(&self) -> Result<Predicates, MatrixError> {
        self.require_square()?;
        let nilpotency_index = self.nilpotency_index();
        Ok(Predicates {
            is_nilpotent: nilpotency_index.is_some(),
            is_p_potent: self.is_p_potent(),
            is_nonderogatory: self.is_nonderogatory(),
            nilpotency_index,
        })
    }

    /// Whether `λ` is a root of the characteristic polynomial.
    pub fn eigenvalue_member(&self, lambda: &FieldElement) -> Result<bool, MatrixError> {
        Ok(self.char_poly()?.eval(lambda).is_zero())
    }

    /// `A·v` for a vector given as a slice.
    pub fn apply(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect()
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: Field, cols: &[Vec<FieldElement>]) -> Matrix {
        let n = cols.first().map_or(0, Vec::len);
        Self::from_fn(field, n, cols.len(), |i, j| Some(cols[j][i].clone()))
    }

    /// Index of each entry in the field's enumeration order, row-major.
    pub fn index_vector(&self) -> Vec<u64> {
        self.entries.iter().map(|e| self.field.index_of(e)).collect()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|e| self.field.format_element(e)).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
