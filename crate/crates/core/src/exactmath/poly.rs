//! Univariate polynomials over exact rationals in a tagged variable (`N` or `t`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::rational::{format_rational, is_negative, parse_rational, Rational};
use super::ExactMathError;

/// The formal variable of a [`GenusPolynomial`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Matrix size, grading of the thin expansion.
    N,
    /// 't Hooft coupling, grading of the fat expansion.
    T,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::N => "N",
            Var::T => "t",
        }
    }

    pub fn parse(s: &str) -> Result<Var, ExactMathError> {
        match s {
            "N" => Ok(Var::N),
            "t" => Ok(Var::T),
            _ => Err(ExactMathError::Parse(format!("unknown polynomial variable {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenusPolynomial {
    var: Var,
    coeffs: BTreeMap<u32, Rational>,
}

impl GenusPolynomial {
    pub fn zero(var: Var) -> Self {
        GenusPolynomial { var, coeffs: BTreeMap::new() }
    }

    pub fn constant(var: Var, c: Rational) -> Self {
        Self::monomial(var, c, 0)
    }

    pub fn monomial(var: Var, c: Rational, exp: u32) -> Self {
        let mut p = Self::zero(var);
        if !c.is_zero() {
            p.coeffs.insert(exp, c);
        }
        p
    }

    /// From `(coefficient, exponent)` pairs; repeated exponents are summed.
    pub fn from_terms(var: Var, terms: impl IntoIterator<Item = (Rational, u32)>) -> Self {
        let mut p = Self::zero(var);
        for (c, e) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: u32) -> Rational {
        self.coeffs.get(&exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Nonzero terms, ascending by exponent.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn exponents(&self) -> Vec<u32> {
        self.coeffs.keys().copied().collect()
    }

    pub fn add_term(&mut self, exp: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(exp).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(self.var);
        }
        GenusPolynomial {
            var: self.var,
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, c * r)).collect(),
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().map(|(&e, c)| c * pow(x, e)).sum()
    }

    /// Same coefficients, different variable tag.
    pub fn retag(&self, var: Var) -> Self {
        GenusPolynomial { var, coeffs: self.coeffs.clone() }
    }

    fn check_var(&self, other: &Self) -> Result<(), ExactMathError> {
        if self.var == other.var {
            Ok(())
        } else {
            Err(ExactMathError::VariableMismatch { left: self.var, right: other.var })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ExactMathError> {
        self.check_var(other)?;
        let mut out = self.clone();
        for (&e, c) in &other.coeffs {
            out.add_term(e, c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ExactMathError> {
        self.check_var(other)?;
        let mut out = Self::zero(self.var);
        for (&ea, ca) in &self.coeffs {
            for (&eb, cb) in &other.coeffs {
                out.add_term(ea + eb, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .coeffs
            .iter()
            .rev()
            .map(|(&e, c)| json!([format_rational(c), e]))
            .collect();
        json!({ "var": self.var.name(), "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self, ExactMathError> {
        let bad = || ExactMathError::Parse(format!("invalid polynomial JSON {v}"));
        let var = Var::parse(v.get("var").and_then(Value::as_str).ok_or_else(bad)?)?;
        let mut p = Self::zero(var);
        for term in v.get("terms").and_then(Value::as_array).ok_or_else(bad)? {
            let pair = term.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
            let c = parse_rational(pair[0].as_str().ok_or_else(bad)?)?;
            let e = pair[1].as_u64().ok_or_else(bad)?;
            p.add_term(u32::try_from(e).map_err(|_| bad())?, c);
        }
        Ok(p)
    }
}

fn pow(x: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// Canonical text, descending exponents: `1/2*N^3 + 1/4*N`.
impl fmt::Display for GenusPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let v = self.var.name();
        for (i, (&e, c)) in self.coeffs.iter().rev().enumerate() {
            let neg = is_negative(c);
            let abs = if neg { -c.clone() } else { c.clone() };
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let cs = format_rational(&abs);
            match e {
                0 => write!(f, "{cs}")?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{cs}*")?;
                    }
                    if e == 1 {
                        write!(f, "{v}")?;
                    } else {
                        write!(f, "{v}^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Add for &GenusPolynomial {
    type Output = GenusPolynomial;
    fn add(self, rhs: &GenusPolynomial) -> GenusPolynomial {
        self.try_add(rhs).expect("polynomial variable mismatch")
    }
}

impl Sub for &GenusPolynomial {
    type Output = GenusPolynomial;
    fn sub(self, rhs: &GenusPolynomial) -> GenusPolynomial {
        self.try_add(&-rhs).expect("polynomial variable mismatch")
    }
}

impl Mul for &GenusPolynomial {
    type Output = GenusPolynomial;
    fn mul(self, rhs: &GenusPolynomial) -> GenusPolynomial {
        self.try_mul(rhs).expect("polynomial variable mismatch")
    }
}

impl Neg for &GenusPolynomial {
    type Output = GenusPolynomial;
    fn neg(self) -> GenusPolynomial {
        GenusPolynomial {
            var: self.var,
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }
}
