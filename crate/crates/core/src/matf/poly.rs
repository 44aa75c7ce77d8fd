use std::fmt;

use crate::field::{Field, FieldElement};
use crate::matf::Matrix;

/// Dense univariate polynomial, lowest degree first. The zero polynomial has
/// no coefficients; otherwise the last coefficient is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    field: Field,
    coeffs: Vec<FieldElement>,
}

impl Polynomial {
    pub fn new(field: Field, mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(FieldElement::is_zero) {
            coeffs.pop();
        }
        Polynomial { field, coeffs }
    }

    pub fn zero(field: Field) -> Self {
        Polynomial {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: Field) -> Self {
        let one = field.one();
        Self::new(field, vec![one])
    }

    /// `X - root`.
    pub fn linear(field: Field, root: &FieldElement) -> Self {
        let c = vec![field.neg(root), field.one()];
        Self::new(field, c)
    }

    /// `X^n + c_{n-1} X^{n-1} + ... + c_0`.
    pub fn monic_from_lower(field: Field, lower: &[FieldElement]) -> Self {
        let mut c = lower.to_vec();
        c.push(field.one());
        Self::new(field, c)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(&self.field.one())
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let f = &self.field;
        let len = self.coeffs.len().max(other.coeffs.len());
        let c = (0..len).map(|i| f.add(&self.coeff(i), &other.coeff(i))).collect();
        Polynomial::new(f.clone(), c)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let f = &self.field;
        let len = self.coeffs.len().max(other.coeffs.len());
        let c = (0..len).map(|i| f.sub(&self.coeff(i), &other.coeff(i))).collect();
        Polynomial::new(f.clone(), c)
    }

    pub fn scale(&self, s: &FieldElement) -> Polynomial {
        let c = self.coeffs.iter().map(|x| self.field.mul(x, s)).collect();
        Polynomial::new(self.field.clone(), c)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero(self.field.clone());
        }
        let f = &self.field;
        let mut c = vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] = f.add(&c[i + j], &f.mul(a, b));
            }
        }
        Polynomial::new(f.clone(), c)
    }

    /// Quotient and remainder; panics on division by the zero polynomial.
    pub fn divrem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        let f = &self.field;
        let db = divisor.degree().expect("division by zero polynomial");
        let lead_inv = f.inv(divisor.leading().unwrap()).unwrap();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![f.zero(); self.coeffs.len().saturating_sub(db)];
        while rem.len() > db {
            let top = rem.len() - 1;
            let q = f.mul(&rem[top], &lead_inv);
            for (i, d) in divisor.coeffs.iter().enumerate() {
                let idx = top - db + i;
                rem[idx] = f.sub(&rem[idx], &f.mul(&q, d));
            }
            quot[top - db] = q;
            rem.pop();
            while rem.last().is_some_and(FieldElement::is_zero) {
                rem.pop();
            }
        }
        (Polynomial::new(f.clone(), quot), Polynomial::new(f.clone(), rem))
    }

    /// `q(X) = self(-X)`.
    pub fn negate_variable(&self) -> Polynomial {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, x)| if i % 2 == 1 { self.field.neg(x) } else { x.clone() })
            .collect();
        Polynomial::new(self.field.clone(), c)
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, a: &Matrix) -> Matrix {
        let n = a.rows();
        let mut acc = Matrix::zeros(self.field.clone(), n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(a).expect("square").add_scalar(c);
        }
        acc
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(out, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(out, " + ")?;
            }
            first = false;
            let cs = self.field.format_element(c);
            let show_coeff = i == 0 || *c != self.field.one();
            match (i, show_coeff) {
                (0, _) => write!(out, "{cs}")?,
                (1, true) => write!(out, "{cs}X")?,
                (1, false) => write!(out, "X")?,
                (_, true) => write!(out, "{cs}X^{i}")?,
                (_, false) => write!(out, "X^{i}")?,
            }
        }
        Ok(())
    }
}
