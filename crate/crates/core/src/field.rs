//! Exact arithmetic in `F_p` and `F_{p^m}` for odd primes `p`.
//!
//! Elements are dense coefficient vectors in the quotient
//! `F_p[X] / (modulus)`, lowest degree first. Every element of a field with
//! extension degree `m` carries exactly `m` coefficients, each reduced into
//! `[0, p)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element does not belong to field {0}")]
    FieldMismatch(String),
    #[error("characteristic {0} is not an odd prime")]
    BadCharacteristic(u32),
    #[error("extension degree must be at least 1")]
    BadDegree,
    #[error("invalid modulus: {0}")]
    BadModulus(String),
    #[error("modulus {0} is reducible over F_{1}")]
    ReducibleModulus(String, u32),
    #[error("cannot parse field element {0:?}: {1}")]
    Parse(String, String),
}

/// An ambient finite field of odd characteristic.
///
/// `modulus` holds all `m + 1` coefficients of the monic defining polynomial
/// (lowest degree first) and is `None` for prime fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    p: u32,
    m: usize,
    modulus: Option<Vec<u32>>,
}

/// Shared handle to a field; matrices and polynomials hold one of these.
pub type Field = Arc<FieldSpec>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    coeffs: SmallVec<[u32; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// The prime field `F_p`.
    pub fn prime(p: u32) -> Result<Field, FieldError> {
        Self::new(p, 1, None)
    }

    /// Builds `F_{p^m}`. For `m > 1` the modulus must be monic of degree `m`
    /// and irreducible over `F_p`; this is checked here.
    pub fn new(p: u32, m: usize, modulus: Option<Vec<u32>>) -> Result<Field, FieldError> {
        if p == 2 || !is_prime(p) {
            return Err(FieldError::BadCharacteristic(p));
        }
        if m == 0 {
            return Err(FieldError::BadDegree);
        }
        let modulus = match (m, modulus) {
            (1, None) => None,
            (1, Some(_)) => {
                return Err(FieldError::BadModulus(
                    "prime fields take no modulus".into(),
                ))
            }
            (_, None) => {
                return Err(FieldError::BadModulus(format!(
                    "degree {m} extension needs a modulus"
                )))
            }
            (_, Some(f)) => {
                if f.len() != m + 1 {
                    return Err(FieldError::BadModulus(format!(
                        "expected {} coefficients, got {}",
                        m + 1,
                        f.len()
                    )));
                }
                if f.iter().any(|&c| c >= p) {
                    return Err(FieldError::BadModulus("coefficients must be reduced".into()));
                }
                if f[m] != 1 {
                    return Err(FieldError::BadModulus("modulus must be monic".into()));
                }
                if !prime_poly::is_irreducible(&f, p) {
                    return Err(FieldError::ReducibleModulus(format_coeffs(&f), p));
                }
                Some(f)
            }
        };
        Ok(Arc::new(FieldSpec { p, m, modulus }))
    }

    /// The shipped test fields: `X^2 + 1` over `F_3` and `X^2 + 2` over `F_5`.
    pub fn default_extension(p: u32, m: usize) -> Option<Field> {
        let modulus = match (p, m) {
            (_, 1) => return Self::prime(p).ok(),
            (3, 2) => vec![1, 0, 1],
            (5, 2) => vec![2, 0, 1],
            _ => return None,
        };
        Self::new(p, m, Some(modulus)).ok()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn modulus(&self) -> Option<&[u32]> {
        self.modulus.as_deref()
    }

    /// Field size `p^m`.
    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.m as u32)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            coeffs: SmallVec::from_elem(0, self.m),
        }
    }

    pub fn one(&self) -> FieldElement {
        self.int_embed(1)
    }

    /// `t·1`, reduced into the prime subfield.
    pub fn int_embed(&self, t: i64) -> FieldElement {
        let mut e = self.zero();
        e.coeffs[0] = t.rem_euclid(self.p as i64) as u32;
        e
    }

    /// Returns `t` when `x = t·1`, `None` when `x` lies outside the prime subfield.
    pub fn prime_subfield_index(&self, x: &FieldElement) -> Option<u32> {
        if x.coeffs[1..].iter().all(|&c| c == 0) {
            Some(x.coeffs[0])
        } else {
            None
        }
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        x.coeffs.len() == self.m && x.coeffs.iter().all(|&c| c < self.p)
    }

    pub fn element(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        let e = FieldElement {
            coeffs: SmallVec::from_slice(coeffs),
        };
        if self.contains(&e) {
            Ok(e)
        } else {
            Err(FieldError::FieldMismatch(self.to_string()))
        }
    }

    /// Position of `x` in the lexicographic enumeration: `sum c_i p^i`.
    pub fn index_of(&self, x: &FieldElement) -> u64 {
        x.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }

    pub fn from_index(&self, mut idx: u64) -> FieldElement {
        let mut e = self.zero();
        for c in e.coeffs.iter_mut() {
            *c = (idx % self.p as u64) as u32;
            idx /= self.p as u64;
        }
        e
    }

    /// All `q` elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |i| self.from_index(i))
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement {
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(&a, &b)| (a + b) % p)
                .collect(),
        }
    }

    pub fn sub(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement {
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(&a, &b)| (a + p - b) % p)
                .collect(),
        }
    }

    pub fn neg(&self, x: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement {
            coeffs: x.coeffs.iter().map(|&a| (p - a) % p).collect(),
        }
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let p = self.p as u64;
        let Some(f) = &self.modulus else {
            let v = (x.coeffs[0] as u64 * y.coeffs[0] as u64) % p;
            return FieldElement {
                coeffs: SmallVec::from_elem(v as u32, 1),
            };
        };
        let m = self.m;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &a) in x.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in y.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a as u64 * b as u64) % p;
            }
        }
        // X^m = -(f_0 + ... + f_{m-1} X^{m-1})
        for d in (m..prod.len()).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for (i, &fi) in f[..m].iter().enumerate() {
                let idx = d - m + i;
                prod[idx] = (prod[idx] + (p - fi as u64) * c) % p;
            }
        }
        FieldElement {
            coeffs: prod[..m].iter().map(|&c| c as u32).collect(),
        }
    }

    pub fn pow(&self, x: &FieldElement, mut e: u64) -> FieldElement {
        let mut base = x.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        if x.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(x, self.order() - 2))
    }

    pub fn div(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    /// Checked binary arithmetic: both operands must be canonical elements
    /// of this field.
    pub fn arith(
        &self,
        x: &FieldElement,
        y: &FieldElement,
        op: ArithOp,
    ) -> Result<FieldElement, FieldError> {
        if !self.contains(x) || !self.contains(y) {
            return Err(FieldError::FieldMismatch(self.to_string()));
        }
        Ok(match op {
            ArithOp::Add => self.add(x, y),
            ArithOp::Sub => self.sub(x, y),
            ArithOp::Mul => self.mul(x, y),
            ArithOp::Div => self.div(x, y)?,
        })
    }

    /// Canonical text: a decimal integer when `m = 1`, `[a0,a1,...]` otherwise.
    pub fn format_element(&self, x: &FieldElement) -> String {
        if self.m == 1 {
            x.coeffs[0].to_string()
        } else {
            format_coeffs(&x.coeffs)
        }
    }

    pub fn parse_element(&self, s: &str) -> Result<FieldElement, FieldError> {
        let err = |why: &str| FieldError::Parse(s.to_string(), why.to_string());
        let s = s.trim();
        let coeffs: Vec<u32> = if self.m == 1 {
            vec![parse_residue(s, self.p).map_err(|w| err(&w))?]
        } else {
            let inner = s
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| err("expected a bracketed coefficient list"))?;
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != self.m {
                return Err(err(&format!("expected {} coefficients", self.m)));
            }
            parts
                .iter()
                .map(|t| parse_residue(t.trim(), self.p))
                .collect::<Result<_, _>>()
                .map_err(|w| err(&w))?
        };
        Ok(FieldElement {
            coeffs: SmallVec::from_vec(coeffs),
        })
    }

    /// Header line used by the matrix text format.
    pub fn header(&self) -> String {
        match &self.modulus {
            None => format!("field: p={} m=1", self.p),
            Some(f) => format!("field: p={} m={} modulus={}", self.p, self.m, format_coeffs(f)),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.modulus {
            None => write!(f, "F_{}", self.p),
            Some(m) => write!(f, "F_{}^{} mod {}", self.p, self.m, format_coeffs(m)),
        }
    }
}

impl FieldElement {
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

fn parse_residue(s: &str, p: u32) -> Result<u32, String> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err("expected a non-negative decimal integer".into());
    }
    let v: u64 = s.parse().map_err(|_| "integer out of range".to_string())?;
    if v >= p as u64 {
        return Err(format!("entry {v} is not reduced mod {p}"));
    }
    Ok(v as u32)
}

pub(crate) fn format_coeffs(c: &[u32]) -> String {
    let parts: Vec<String> = c.iter().map(u32::to_string).collect();
    format!("[{}]", parts.join(","))
}

/// Dense polynomial helpers over `F_p` used only for the irreducibility test.
mod prime_poly {
    fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv_mod(x: u64, p: u64) -> u64 {
        let (mut acc, mut base, mut e) = (1u64, x % p, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc
    }

    fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut r = trim(a.to_vec());
        let db = b.len() - 1;
        let lead_inv = inv_mod(b[db], p);
        while r.len() > db {
            let dr = r.len() - 1;
            let q = r[dr] * lead_inv % p;
            for (i, &bi) in b.iter().enumerate() {
                let idx = dr - db + i;
                r[idx] = (r[idx] + p - q * bi % p) % p;
            }
            r = trim(r);
        }
        r
    }

    fn mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        rem(&prod, f, p)
    }

    fn gcd(a: Vec<u64>, b: Vec<u64>, p: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a), trim(b));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// Rabin-style test: no factor of degree `<= m/2`, i.e.
    /// `gcd(X^{p^i} - X, f) = 1` for `1 <= i <= m/2`.
    pub(super) fn is_irreducible(f: &[u32], p: u32) -> bool {
        let p = p as u64;
        let f: Vec<u64> = f.iter().map(|&c| c as u64).collect();
        let m = f.len() - 1;
        let x = rem(&[0, 1], &f, p);
        let mut frob = x.clone();
        for _ in 1..=m / 2 {
            // frob <- frob^p mod f
            let mut acc = vec![1u64];
            let mut base = frob.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(&acc, &base, &f, p);
                }
                base = mulmod(&base, &base, &f, p);
                e >>= 1;
            }
            frob = acc;
            let mut diff = frob.clone();
            diff.resize(diff.len().max(x.len()), 0);
            for (i, &xi) in x.iter().enumerate() {
                diff[i] = (diff[i] + p - xi) % p;
            }
            let g = gcd(f.clone(), diff, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }
}
