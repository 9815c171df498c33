//! Multivariate formal power series truncated by weighted total degree.
//!
//! Every symbol carries a positive integer weight. A series of truncation `D`
//! stores exactly the terms of weight `≤ D`; all operations re-truncate.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use super::poly::{GenusPolynomial, Var};
use super::rational::{binomial, factorial_rat, format_rational, int, parse_rational, Rational};
use super::ExactMathError;

/// Coefficient ring of a [`TruncatedSeries`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    /// What a zero or unit of this ring needs to know (the variable tag for polynomials).
    type Ctx: Copy + Eq + fmt::Debug + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn from_rational(ctx: Self::Ctx, r: Rational) -> Self;
    fn is_zero_value(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn scale(&self, r: &Rational) -> Self;
    fn to_json(&self) -> Value;
    fn from_json(ctx: Self::Ctx, v: &Value) -> Result<Self, ExactMathError>;
    /// Text used inside a series rendering; multi-term values get parentheses.
    fn render_factor(&self) -> String;
}

impl Coeff for Rational {
    type Ctx = ();

    fn ctx(&self) {}
    fn from_rational(_: (), r: Rational) -> Self {
        r
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn from_json(_: (), v: &Value) -> Result<Self, ExactMathError> {
        let s = v.as_str().ok_or_else(|| ExactMathError::Parse(format!("expected rational string, got {v}")))?;
        parse_rational(s)
    }
    fn render_factor(&self) -> String {
        format_rational(self)
    }
}

impl Coeff for GenusPolynomial {
    type Ctx = Var;

    fn ctx(&self) -> Var {
        self.var()
    }
    fn from_rational(ctx: Var, r: Rational) -> Self {
        GenusPolynomial::constant(ctx, r)
    }
    fn is_zero_value(&self) -> bool {
        GenusPolynomial::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn scale(&self, r: &Rational) -> Self {
        GenusPolynomial::scale(self, r)
    }
    fn to_json(&self) -> Value {
        GenusPolynomial::to_json(self)
    }
    fn from_json(ctx: Var, v: &Value) -> Result<Self, ExactMathError> {
        let p = GenusPolynomial::from_json(v)?;
        if p.var() != ctx {
            return Err(ExactMathError::VariableMismatch { left: ctx, right: p.var() });
        }
        Ok(p)
    }
    fn render_factor(&self) -> String {
        if self.terms().count() > 1 {
            format!("({self})")
        } else {
            self.to_string()
        }
    }
}

/// A coupling symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// Generic weight-1 variable, used in tests and examples.
    X(u32),
    /// Matrix-model coupling g_n (n ≥ 1), weight n.
    G(u32),
    /// 1D-gravity coupling t_k (k ≥ 0), weight k+1.
    T(u32),
    /// Renormalized coupling I_k, weight k+1.
    I(u32),
    /// q_n = I_{n+1}/(1−I_1)^{(n+2)/2}, weight n+2.
    Q(u32),
}

impl Symbol {
    pub fn weight(self) -> u32 {
        match self {
            Symbol::X(_) => 1,
            Symbol::G(n) => n,
            Symbol::T(k) | Symbol::I(k) => k + 1,
            Symbol::Q(n) => n + 2,
        }
    }

    pub fn name(self) -> String {
        match self {
            Symbol::X(k) => format!("x{k}"),
            Symbol::G(n) => format!("g_{n}"),
            Symbol::T(k) => format!("t_{k}"),
            Symbol::I(k) => format!("I_{k}"),
            Symbol::Q(n) => format!("q_{n}"),
        }
    }

    pub fn parse(s: &str) -> Result<Symbol, ExactMathError> {
        let bad = || ExactMathError::Parse(format!("unknown symbol {s:?}"));
        let (head, idx) = match s.split_once('_') {
            Some((h, i)) => (h, i),
            None if s.starts_with('x') => ("x", &s[1..]),
            None => return Err(bad()),
        };
        let idx: u32 = idx.parse().map_err(|_| bad())?;
        match head {
            "x" => Ok(Symbol::X(idx)),
            "g" if idx >= 1 => Ok(Symbol::G(idx)),
            "t" => Ok(Symbol::T(idx)),
            "I" => Ok(Symbol::I(idx)),
            "q" if idx >= 1 => Ok(Symbol::Q(idx)),
            _ => Err(bad()),
        }
    }
}

/// Product of symbol powers. Factors are sorted by descending symbol; ordering
/// of monomials is by total weight, then lexicographic on the factors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    weight: u32,
    factors: Vec<(Symbol, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(s: Symbol) -> Self {
        Monomial::from_factors([(s, 1)])
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (Symbol, u32)>) -> Self {
        let mut map: BTreeMap<Symbol, u32> = BTreeMap::new();
        for (s, e) in factors {
            if e > 0 {
                *map.entry(s).or_insert(0) += e;
            }
        }
        let weight = map.iter().map(|(s, e)| s.weight() * e).sum();
        Monomial { weight, factors: map.into_iter().rev().collect() }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.factors
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.factors.iter().find(|(t, _)| *t == s).map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_factors(self.factors.iter().chain(other.factors.iter()).copied())
    }

    /// Divides out one power of `s`; `None` if `s` does not occur.
    pub fn reduce(&self, s: Symbol) -> Option<Monomial> {
        let e = self.exponent(s);
        if e == 0 {
            return None;
        }
        Some(Monomial::from_factors(
            self.factors.iter().map(|&(t, k)| if t == s { (t, k - 1) } else { (t, k) }),
        ))
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (s, e) in &self.factors {
            m.insert(s.name(), json!(e));
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self, ExactMathError> {
        let obj = v.as_object().ok_or_else(|| ExactMathError::Parse(format!("invalid monomial {v}")))?;
        let mut factors = Vec::new();
        for (k, e) in obj {
            let e = e
                .as_u64()
                .and_then(|e| u32::try_from(e).ok())
                .ok_or_else(|| ExactMathError::Parse(format!("invalid exponent in {v}")))?;
            factors.push((Symbol::parse(k)?, e));
        }
        Ok(Monomial::from_factors(factors))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (s, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{}", s.name())?;
            } else {
                write!(f, "{}^{e}", s.name())?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<C: Coeff>
{
    truncation: u32,
    ctx: C::Ctx,
    terms: BTreeMap<Monomial, C>,
}

/// Series with rational coefficients.
pub type RatSeries = TruncatedSeries<Rational>;
/// Series whose coefficients are polynomials in `N` or `t`.
pub type PolySeries = TruncatedSeries<GenusPolynomial>;

impl<C: Coeff> TruncatedSeries<C>
{
    pub fn zero(ctx: C::Ctx, truncation: u32) -> Self {
        TruncatedSeries { truncation, ctx, terms: BTreeMap::new() }
    }

    pub fn one(ctx: C::Ctx, truncation: u32) -> Self {
        Self::constant(C::from_rational(ctx, Rational::one()), truncation)
    }

    pub fn constant(c: C, truncation: u32) -> Self {
        let mut s = Self::zero(c.ctx(), truncation);
        s.add_term(Monomial::one(), c);
        s
    }

    pub fn var(s: Symbol, ctx: C::Ctx, truncation: u32) -> Self {
        Self::monomial(Monomial::var(s), C::from_rational(ctx, Rational::one()), truncation)
    }

    pub fn monomial(m: Monomial, c: C, truncation: u32) -> Self {
        let mut s = Self::zero(c.ctx(), truncation);
        s.add_term(m, c);
        s
    }

    pub fn from_terms(ctx: C::Ctx, truncation: u32, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut s = Self::zero(ctx, truncation);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn ctx(&self) -> C::Ctx {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order (weight, then lexicographic).
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&C> {
        self.terms.get(m)
    }

    pub fn coeff_or_zero(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(|| C::from_rational(self.ctx, Rational::zero()))
    }

    pub fn constant_term(&self) -> Option<&C> {
        self.terms.get(&Monomial::one())
    }

    /// Smallest weight among stored terms; `None` for the zero series.
    pub fn min_weight(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::weight)
    }

    /// Symbols occurring in some stored term, ascending.
    pub fn variables(&self) -> Vec<Symbol> {
        let mut v: Vec<Symbol> = self.terms.keys().flat_map(|m| m.factors.iter().map(|(s, _)| *s)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Adds `c·m`, dropping it if its weight exceeds the truncation.
    pub fn add_term(&mut self, m: Monomial, c: C) {
        if m.weight() > self.truncation || c.is_zero_value() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                let sum = slot.add_ref(&c);
                if sum.is_zero_value() {
                    self.terms.remove(&m);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn truncate(&self, truncation: u32) -> Self {
        let truncation = truncation.min(self.truncation);
        TruncatedSeries {
            truncation,
            ctx: self.ctx,
            terms: self.terms.iter().filter(|(m, _)| m.weight() <= truncation).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Same terms, declared valid to a different truncation (terms above it are dropped).
    pub fn with_truncation(&self, truncation: u32) -> Self {
        let mut s = self.clone();
        s.truncation = truncation;
        s.terms.retain(|m, _| m.weight() <= truncation);
        s
    }

    fn check_ctx(&self, other: &Self) {
        assert_eq!(self.ctx, other.ctx, "series coefficient rings differ");
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Self::zero(self.ctx, self.truncation);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.scale(r));
        }
        out
    }

    pub fn mul_coeff(&self, k: &C) -> Self {
        let mut out = Self::zero(self.ctx, self.truncation);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.mul_ref(k));
        }
        out
    }

    /// Multiplication by an exact monomial; the truncation moves up by its weight.
    pub fn mul_monomial(&self, mono: &Monomial, k: &C) -> Self {
        let mut out = Self::zero(self.ctx, self.truncation + mono.weight());
        for (m, c) in &self.terms {
            out.add_term(m.mul(mono), c.mul_ref(k));
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, ctx: D::Ctx, f: impl Fn(&C) -> D) -> TruncatedSeries<D> {
        let mut out = TruncatedSeries::zero(ctx, self.truncation);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn pow_u(&self, k: u32) -> Self {
        let mut acc = Self::one(self.ctx, self.truncation);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Partial derivative; the result is valid through `D − weight(s)`.
    pub fn derivative(&self, s: Symbol) -> Self {
        let trunc = self.truncation.saturating_sub(s.weight());
        let mut out = Self::zero(self.ctx, trunc);
        for (m, c) in &self.terms {
            let e = m.exponent(s);
            if e > 0 {
                out.add_term(m.reduce(s).expect("exponent checked"), c.scale(&int(i64::from(e))));
            }
        }
        out
    }

    /// `Σ_k a_k s^k` for a series `s` with zero constant term.
    fn compose_univariate(&self, coeffs: impl Fn(u32) -> Rational) -> Self {
        let max_k = match self.min_weight() {
            None => 0,
            Some(w) => self.truncation / w,
        };
        let mut out = Self::zero(self.ctx, self.truncation);
        let mut power = Self::one(self.ctx, self.truncation);
        for k in 0..=max_k {
            if k > 0 {
                power = &power * self;
            }
            let a = coeffs(k);
            if !a.is_zero() {
                out = &out + &power.scale(&a);
            }
        }
        out
    }

    fn require_zero_constant(&self) -> Result<(), ExactMathError> {
        match self.constant_term() {
            None => Ok(()),
            Some(_) => Err(ExactMathError::NonZeroConstant),
        }
    }

    fn minus_one(&self) -> Result<Self, ExactMathError> {
        let one = Self::one(self.ctx, self.truncation);
        if self.constant_term() != one.constant_term() {
            return Err(ExactMathError::ConstantNotOne);
        }
        Ok(self - &one)
    }

    /// `exp(s) = Σ s^k/k!`; `s` must have zero constant term.
    pub fn exp(&self) -> Result<Self, ExactMathError> {
        self.require_zero_constant()?;
        Ok(self.compose_univariate(|k| Rational::one() / factorial_rat(k)))
    }

    /// `log(s) = Σ_{k≥1} (−1)^{k+1} (s−1)^k / k`; `s` must have constant term 1.
    pub fn log(&self) -> Result<Self, ExactMathError> {
        let u = self.minus_one()?;
        Ok(u.compose_univariate(|k| match k {
            0 => Rational::zero(),
            k if k % 2 == 1 => int(1) / int(i64::from(k)),
            k => int(-1) / int(i64::from(k)),
        }))
    }

    /// `s^r = Σ C(r,k) (s−1)^k`; `s` must have constant term 1.
    pub fn pow(&self, r: &Rational) -> Result<Self, ExactMathError> {
        let u = self.minus_one()?;
        Ok(u.compose_univariate(|k| binomial(r, k)))
    }

    /// Replaces each symbol in `subs` by a series. Every replacement must have
    /// minimum weight at least the weight of the symbol it replaces, so that no
    /// dropped high-weight term of `self` could contribute below the truncation.
    pub fn substitute(&self, subs: &BTreeMap<Symbol, Self>) -> Result<Self, ExactMathError> {
        for (s, r) in subs {
            self.check_ctx(r);
            if let Some(w) = r.min_weight() {
                if w < s.weight() {
                    return Err(ExactMathError::UnsoundSubstitution { symbol: s.name(), min_weight: w });
                }
            }
        }
        let trunc = subs.values().map(|r| r.truncation).fold(self.truncation, u32::min);
        let mut powers: BTreeMap<(Symbol, u32), Self> = BTreeMap::new();
        let mut out = Self::zero(self.ctx, trunc);
        for (m, c) in &self.terms {
            let mut term = Self::constant(c.clone(), trunc);
            for &(s, e) in m.factors() {
                match subs.get(&s) {
                    Some(r) => {
                        let p = powers.entry((s, e)).or_insert_with(|| r.truncate(trunc).pow_u(e));
                        term = &term * p;
                    }
                    None => term = term.mul_monomial(&Monomial::from_factors([(s, e)]), &C::from_rational(self.ctx, Rational::one())).truncate(trunc),
                }
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// First monomial (in canonical order) where the two series differ.
    pub fn first_difference(&self, other: &Self) -> Option<(Monomial, C, C)> {
        let zero = C::from_rational(self.ctx, Rational::zero());
        let mut keys: Vec<&Monomial> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().find_map(|m| {
            let a = self.terms.get(m).unwrap_or(&zero);
            let b = other.terms.get(m).unwrap_or(&zero);
            (a != b).then(|| (m.clone(), a.clone(), b.clone()))
        })
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| json!({ "monomial": m.to_json(), "coeff": c.to_json() }))
            .collect();
        json!({ "truncation": self.truncation, "terms": terms })
    }

    pub fn from_json(ctx: C::Ctx, v: &Value) -> Result<Self, ExactMathError> {
        let bad = || ExactMathError::Parse("invalid series JSON".into());
        let trunc = v
            .get("truncation")
            .and_then(Value::as_u64)
            .and_then(|d| u32::try_from(d).ok())
            .ok_or_else(bad)?;
        let mut s = Self::zero(ctx, trunc);
        for t in v.get("terms").and_then(Value::as_array).ok_or_else(bad)? {
            let m = Monomial::from_json(t.get("monomial").ok_or_else(bad)?)?;
            let c = C::from_json(ctx, t.get("coeff").ok_or_else(bad)?)?;
            s.add_term(m, c);
        }
        Ok(s)
    }
}

impl<C: Coeff> fmt::Display for TruncatedSeries<C>
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O({})", self.truncation + 1);
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let cf = c.render_factor();
            match (m.is_one(), cf.as_str()) {
                (true, _) => write!(f, "{cf}")?,
                (false, "1") => write!(f, "{m}")?,
                (false, "-1") => write!(f, "-{m}")?,
                (false, _) => write!(f, "{cf}*{m}")?,
            }
        }
        write!(f, " + O({})", self.truncation + 1)
    }
}

impl<C: Coeff> Add for &TruncatedSeries<C>
{
    type Output = TruncatedSeries<C>;
    fn add(self, rhs: Self) -> TruncatedSeries<C> {
        self.check_ctx(rhs);
        let mut out = self.truncate(rhs.truncation);
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &TruncatedSeries<C>
{
    type Output = TruncatedSeries<C>;
    fn sub(self, rhs: Self) -> TruncatedSeries<C> {
        self + &(-rhs)
    }
}

impl<C: Coeff> Neg for &TruncatedSeries<C>
{
    type Output = TruncatedSeries<C>;
    fn neg(self) -> TruncatedSeries<C> {
        TruncatedSeries {
            truncation: self.truncation,
            ctx: self.ctx,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg_ref())).collect(),
        }
    }
}

impl<C: Coeff> Mul for &TruncatedSeries<C>
{
    type Output = TruncatedSeries<C>;
    fn mul(self, rhs: Self) -> TruncatedSeries<C> {
        self.check_ctx(rhs);
        let trunc = self.truncation.min(rhs.truncation);
        let mut out = TruncatedSeries::zero(self.ctx, trunc);
        for (ma, ca) in &self.terms {
            if ma.weight() > trunc {
                break;
            }
            for (mb, cb) in &rhs.terms {
                if ma.weight() + mb.weight() > trunc {
                    break;
                }
                out.add_term(ma.mul(mb), ca.mul_ref(cb));
            }
        }
        out
    }
}
