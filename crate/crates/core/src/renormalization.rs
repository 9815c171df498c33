//! Renormalized coupling constants `I_k`, the finite expressions of `F_{g,N}`
//! in them, the `q_n` variables, and the renormalization identity.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::correlator::CorrelatorEngine;
use crate::exactmath::partition::weak_compositions;
use crate::exactmath::rational::format_rational;
use crate::exactmath::{
    factorial, factorial_rat, int, ExactMathError, GenusPolynomial, Monomial, Partition, PolySeries, RatSeries, Rational, Symbol, Var,
};
use crate::free_energy::{g_to_t, promote, FreeEnergySeries};
use crate::report::{series_diff, VerificationReport};

#[derive(Debug, Error)]
pub enum RenormError {
    #[error("the two constructions of I_0 disagree at {0}")]
    FixedPointDisagreement(String),
    #[error(transparent)]
    Math(#[from] ExactMathError),
}

/// `I_k` (and `q_n`) as series in the `t_k`, valid through weight `order`.
#[derive(Clone, Debug)]
pub struct ICoordinateFrame {
    order: u32,
    i: Vec<RatSeries>,
    q: BTreeMap<u32, RatSeries>,
}

fn t_var(k: u32, d: u32) -> RatSeries {
    RatSeries::var(Symbol::T(k), (), d)
}

/// `Σ_{k≥1} (1/k) Σ_{p_1+⋯+p_k=k−1} ∏ t_{p_i}/p_i!`
pub fn i0_explicit(d: u32) -> RatSeries {
    let mut out = RatSeries::zero((), d);
    // a term with k factors has weight 2k − 1
    for k in 1..=d.div_ceil(2) {
        for comp in weak_compositions(k - 1, k as usize) {
            let mut coeff = Rational::new(BigInt::one(), BigInt::from(k));
            let mut factors = Vec::new();
            for &p in &comp {
                coeff /= factorial_rat(p);
                factors.push((Symbol::T(p), 1));
            }
            out.add_term(Monomial::from_factors(merge(factors)), coeff);
        }
    }
    out
}

fn merge(mut factors: Vec<(Symbol, u32)>) -> Vec<(Symbol, u32)> {
    factors.sort();
    let mut out: Vec<(Symbol, u32)> = Vec::new();
    for (s, e) in factors {
        match out.last_mut() {
            Some((t, f)) if *t == s => *f += e,
            _ => out.push((s, e)),
        }
    }
    out
}

/// `Σ_n t_{n+k} x^n/n!` through weight `d`.
fn action_derivative(x: &RatSeries, k: u32, d: u32) -> RatSeries {
    let mut out = RatSeries::zero((), d);
    let mut power = RatSeries::one((), d);
    for n in 0.. {
        if n + k + 1 > d {
            break;
        }
        if n > 0 {
            power = &power * x;
        }
        out = &out + &(&power * &t_var(n + k, d)).scale(&(Rational::one() / factorial_rat(n)));
    }
    out
}

/// Solves `x = Σ t_n x^n/n!` by iteration; each pass fixes one more weight.
pub fn i0_fixed_point(d: u32) -> RatSeries {
    let mut x = RatSeries::zero((), d);
    for _ in 0..d {
        x = action_derivative(&x, 0, d);
    }
    x
}

impl ICoordinateFrame {
    /// Builds `I_0` twice (explicit sum and fixed point), insists they agree,
    /// then derives `I_k` and `q_n`.
    pub fn build(order: u32) -> Result<Self, RenormError> {
        let explicit = i0_explicit(order);
        let fixed = i0_fixed_point(order);
        if let Err(m) = series_diff(&explicit, &fixed) {
            return Err(RenormError::FixedPointDisagreement(m));
        }
        let mut i = vec![explicit.clone()];
        for k in 1..=order {
            i.push(action_derivative(&explicit, k, order));
        }
        let one_minus = &RatSeries::one((), order) - &i[1];
        let mut q = BTreeMap::new();
        for n in 1..order.saturating_sub(1) {
            let s = &i[n as usize + 1] * &one_minus.pow(&Rational::new(-BigInt::from(n + 2), BigInt::from(2)))?;
            q.insert(n, s);
        }
        Ok(ICoordinateFrame { order, i, q })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `I_k`; zero for `k ≥ order`.
    pub fn i(&self, k: u32) -> RatSeries {
        self.i.get(k as usize).cloned().unwrap_or_else(|| RatSeries::zero((), self.order))
    }

    pub fn q(&self, n: u32) -> RatSeries {
        self.q.get(&n).cloned().unwrap_or_else(|| RatSeries::zero((), self.order))
    }

    /// `Σ t_n I_0^n/n! − I_0`, which must vanish.
    pub fn fixed_point_residual(&self) -> RatSeries {
        &action_derivative(&self.i[0], 0, self.order) - &self.i[0]
    }

    /// Checks `t_k = Σ_n (−1)^n I_0^n/n! I_{n+k}` for `k < order`.
    pub fn invert(&self) -> VerificationReport {
        let d = self.order;
        for k in 0..d {
            let mut rhs = RatSeries::zero((), d);
            let mut power = RatSeries::one((), d);
            for n in 0..d - k {
                if n > 0 {
                    power = &power * &self.i[0];
                }
                let sign = if n % 2 == 0 { int(1) } else { int(-1) };
                rhs = &rhs + &(&power * &self.i(n + k)).scale(&(sign / factorial_rat(n)));
            }
            if let Err(m) = series_diff(&rhs, &t_var(k, d)) {
                return VerificationReport::fail("t from I round trip", format!("k={k}: {m}"));
            }
        }
        VerificationReport::pass("t from I round trip")
    }

    /// Replaces every `I_k` in a symbolic series by its expansion in the `t_k`.
    pub fn realize(&self, s: &PolySeries) -> Result<PolySeries, ExactMathError> {
        let d = self.order.min(s.truncation());
        let var = s.ctx();
        let subs = s
            .variables()
            .into_iter()
            .filter_map(|sym| match sym {
                Symbol::I(k) => Some((sym, promote(&self.i(k).truncate(d), var))),
                Symbol::Q(n) => Some((sym, promote(&self.q(n).truncate(d), var))),
                _ => None,
            })
            .collect();
        s.truncate(d).substitute(&subs)
    }
}

/// `Σ_k (−1)^k/(k+1)! (I_k + δ_{k,1}) I_0^{k+1}` in the symbols `I_k`.
pub fn f0_closed_symbolic(d: u32) -> RatSeries {
    let i = |k| RatSeries::var(Symbol::I(k), (), d);
    let mut out = RatSeries::zero((), d);
    for k in 0..d {
        let sign = if k % 2 == 0 { int(1) } else { int(-1) };
        let mut inner = i(k);
        if k == 1 {
            inner = &inner + &RatSeries::one((), d);
        }
        out = &out + &(&inner * &i(0).pow_u(k + 1)).scale(&(sign / factorial_rat(k + 1)));
    }
    out
}

/// `−½I_0² + Σ_n (−1)^n I_0^{n+1}/(n+1)! I_n`.
pub fn f0_split_symbolic(d: u32) -> RatSeries {
    let i = |k| RatSeries::var(Symbol::I(k), (), d);
    let mut out = i(0).pow_u(2).scale(&Rational::new((-1).into(), 2.into()));
    for n in 0..d {
        let sign = if n % 2 == 0 { int(1) } else { int(-1) };
        out = &out + &(&i(0).pow_u(n + 1) * &i(n)).scale(&(sign / factorial_rat(n + 1)));
    }
    out
}

/// `(1 − I_1)^{−h/2}` in the symbol `I_1`.
fn one_minus_i1_pow(half: u32, d: u32) -> RatSeries {
    let base = &RatSeries::one((), d) - &RatSeries::var(Symbol::I(1), (), d);
    base.pow(&Rational::new(-BigInt::from(half), BigInt::from(2))).expect("constant term 1")
}

/// A finite expression in renormalized couplings:
/// `c_0·F0(I) + c_log·log 1/(1−I_1) + Σ c·∏I_k^{e_k}·(1−I_1)^{−h/2}`,
/// where `F0(I)` is the genus-zero closed form and the `c` are polynomials in `N` or `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralExpr {
    pub var: Var,
    pub closed_form: GenusPolynomial,
    pub log: GenusPolynomial,
    pub terms: BTreeMap<(Monomial, u32), GenusPolynomial>,
}

impl StructuralExpr {
    pub fn zero(var: Var) -> Self {
        StructuralExpr { var, closed_form: GenusPolynomial::zero(var), log: GenusPolynomial::zero(var), terms: BTreeMap::new() }
    }

    fn add_term(&mut self, key: (Monomial, u32), c: GenusPolynomial) {
        let sum = match self.terms.remove(&key) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    /// Does any term involve `I_0`?
    pub fn mentions_i0(&self) -> bool {
        !self.closed_form.is_zero() || self.terms.keys().any(|(m, _)| m.exponent(Symbol::I(0)) > 0)
    }

    /// Expansion as a series in the symbols `I_k`.
    pub fn expand_symbolic(&self, d: u32) -> PolySeries {
        let mut out = PolySeries::zero(self.var, d);
        if !self.closed_form.is_zero() {
            out = &out + &promote(&f0_closed_symbolic(d), self.var).mul_coeff(&self.closed_form);
        }
        if !self.log.is_zero() {
            let one_minus = &RatSeries::one((), d) - &RatSeries::var(Symbol::I(1), (), d);
            let log = one_minus.log().expect("constant term 1").scale(&int(-1));
            out = &out + &promote(&log, self.var).mul_coeff(&self.log);
        }
        for ((m, half), c) in &self.terms {
            if m.weight() > d {
                continue;
            }
            let term = promote(&one_minus_i1_pow(*half, d), self.var).mul_monomial(m, c).truncate(d);
            out = &out + &term;
        }
        out
    }

    /// Expansion in the `t_k` through the frame's order.
    pub fn expand_t(&self, frame: &ICoordinateFrame) -> Result<PolySeries, ExactMathError> {
        frame.realize(&self.expand_symbolic(frame.order()))
    }

    /// Keeps only the `var^m` part of every coefficient, retagged as `to^m`.
    pub fn layer(&self, m: u32, to: Var) -> StructuralExpr {
        let pick = |c: &GenusPolynomial| GenusPolynomial::monomial(to, c.coeff(m), m);
        let mut out = StructuralExpr::zero(to);
        out.closed_form = pick(&self.closed_form);
        out.log = pick(&self.log);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), pick(c));
        }
        out
    }

    pub fn add(&self, other: &StructuralExpr) -> StructuralExpr {
        let mut out = self.clone();
        out.closed_form = &out.closed_form + &other.closed_form;
        out.log = &out.log + &other.log;
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    /// Rewrites `∏ I_{k+1}^{m_k} (1−I_1)^{−Σ(k+2)m_k/2}` as `∏ q_k^{m_k}`.
    /// Returns `None` if some term is not of that shape.
    pub fn to_q(&self) -> Option<BTreeMap<Monomial, GenusPolynomial>> {
        if !self.closed_form.is_zero() || !self.log.is_zero() {
            return None;
        }
        let mut out = BTreeMap::new();
        for ((m, half), c) in &self.terms {
            let mut factors = Vec::new();
            let mut expected_half = 0;
            for &(s, e) in m.factors() {
                match s {
                    Symbol::I(k) if k >= 2 => {
                        factors.push((Symbol::Q(k - 1), e));
                        expected_half += (k + 1) * e;
                    }
                    _ => return None,
                }
            }
            if expected_half != *half {
                return None;
            }
            out.insert(Monomial::from_factors(factors), c.clone());
        }
        Some(out)
    }

    /// Inverse of [`StructuralExpr::to_q`].
    pub fn from_q(var: Var, q: &BTreeMap<Monomial, GenusPolynomial>) -> StructuralExpr {
        let mut out = StructuralExpr::zero(var);
        for (m, c) in q {
            let mut factors = Vec::new();
            let mut half = 0;
            for &(s, e) in m.factors() {
                if let Symbol::Q(n) = s {
                    factors.push((Symbol::I(n + 1), e));
                    half += (n + 2) * e;
                }
            }
            out.add_term((Monomial::from_factors(factors), half), c.clone());
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|((m, h), c)| json!({ "monomial": m.to_json(), "half_power": h, "coeff": c.to_json() }))
            .collect();
        json!({
            "var": self.var.name(),
            "closed_form": self.closed_form.to_json(),
            "log": self.log.to_json(),
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, ExactMathError> {
        let bad = || ExactMathError::Parse("invalid structural expression JSON".into());
        let var = Var::parse(v.get("var").and_then(Value::as_str).ok_or_else(bad)?)?;
        let mut out = StructuralExpr::zero(var);
        out.closed_form = GenusPolynomial::from_json(v.get("closed_form").ok_or_else(bad)?)?;
        out.log = GenusPolynomial::from_json(v.get("log").ok_or_else(bad)?)?;
        for t in v.get("terms").and_then(Value::as_array).ok_or_else(bad)? {
            let m = Monomial::from_json(t.get("monomial").ok_or_else(bad)?)?;
            let h = t.get("half_power").and_then(Value::as_u64).ok_or_else(bad)? as u32;
            out.add_term((m, h), GenusPolynomial::from_json(t.get("coeff").ok_or_else(bad)?)?);
        }
        Ok(out)
    }
}

fn render_half(half: u32) -> String {
    if half.is_multiple_of(2) {
        format!("(1-I_1)^(-{})", half / 2)
    } else {
        format!("(1-I_1)^(-{half}/2)")
    }
}

impl fmt::Display for StructuralExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pieces = Vec::new();
        if !self.closed_form.is_zero() {
            pieces.push(format!("({})*F0(I)", self.closed_form));
        }
        if !self.log.is_zero() {
            pieces.push(format!("({})*log(1/(1-I_1))", self.log));
        }
        for ((m, h), c) in &self.terms {
            let mut s = format!("({c})");
            if !m.is_one() {
                s.push_str(&format!("*{m}"));
            }
            if *h > 0 {
                s.push_str(&format!("*{}", render_half(*h)));
            }
            pieces.push(s);
        }
        if pieces.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", pieces.join(" + "))
    }
}

/// Renders a `q`-polynomial, e.g. `(1/6*N^3 + 1/24*N)*q_1^2 + …`.
pub fn render_q(q: &BTreeMap<Monomial, GenusPolynomial>) -> String {
    if q.is_empty() {
        return "0".into();
    }
    q.iter().map(|(m, c)| format!("({c})*{m}")).collect::<Vec<_>>().join(" + ")
}

/// `F_{g,N}` in renormalized couplings.
///
/// For `g ≥ 2` the sum runs over partitions of `2g−2`; a part `k` stands for a
/// `p_{k+2}` insertion and contributes `I_{k+1}/((k+1)!)` with `(1−I_1)^{−(k+2)/2}`.
pub fn structural_fgn(engine: &CorrelatorEngine, genus: u32) -> StructuralExpr {
    let mut out = StructuralExpr::zero(Var::N);
    match genus {
        0 => out.closed_form = GenusPolynomial::monomial(Var::N, Rational::one(), 1),
        1 => out.log = GenusPolynomial::monomial(Var::N, Rational::new(1.into(), 2.into()), 2),
        g => {
            for mu in Partition::all_of(2 * g - 2) {
                let lambda = Partition::new(mu.parts().iter().map(|k| k + 2)).expect("positive parts");
                let v = engine.thin(&lambda, i64::from(g));
                let mut denom = BigInt::one();
                let mut factors = Vec::new();
                let mut half = 0;
                for (j, l) in lambda.multiplicities() {
                    denom *= factorial(l) * factorial(j - 1).pow(l);
                    factors.push((Symbol::I(j - 1), l));
                    half += j * l;
                }
                out.add_term((Monomial::from_factors(factors), half), v.scale(&Rational::new(BigInt::one(), denom)));
            }
        }
    }
    out
}

/// The `q`-polynomial form of [`structural_fgn`] for `g ≥ 2`.
pub fn q_rewrite(engine: &CorrelatorEngine, genus: u32) -> BTreeMap<Monomial, GenusPolynomial> {
    structural_fgn(engine, genus).to_q().expect("genus at least 2")
}

/// `F_g̃(t)` in renormalized couplings, summing the layers `t^m` for `m ≤ max_layer`.
pub fn fat_in_i(engine: &CorrelatorEngine, fat_genus: u32, max_layer: u32) -> StructuralExpr {
    let mut out = StructuralExpr::zero(Var::T);
    for m in 1..=max_layer {
        let g = 2 * fat_genus + m - 1;
        out = out.add(&structural_fgn(engine, g).layer(m, Var::T));
    }
    out
}

/// Assembled `F_{g,N}` rewritten in the `t_k`.
fn assembled_t(f: &FreeEnergySeries, genus: u32, d: u32) -> PolySeries {
    g_to_t(&f.genus_series(genus)).truncate(d)
}

/// Closed forms for `F_{0,N}` and the `I_0`-derivative identity.
pub fn f0_closed_form_checks(f: &FreeEnergySeries, frame: &ICoordinateFrame) -> Result<Vec<VerificationReport>, ExactMathError> {
    let d = frame.order().min(f.truncation());
    let n = GenusPolynomial::monomial(Var::N, Rational::one(), 1);
    let expected = assembled_t(f, 0, d);
    let mut out = Vec::new();
    for (name, sym) in [("F_0,N closed form", f0_split_symbolic(d)), ("F_0,N shifted form", f0_closed_symbolic(d))] {
        let got = frame.realize(&promote(&sym, Var::N).mul_coeff(&n))?;
        out.push(VerificationReport::compare(name, &got, &expected));
    }
    // ∂/∂I_0 with the I_k treated as independent
    let lhs = f0_split_symbolic(d).derivative(Symbol::I(0));
    let mut rhs = RatSeries::zero((), d.saturating_sub(1));
    let i = |k| RatSeries::var(Symbol::I(k), (), d);
    for k in 0..d {
        let sign = if k % 2 == 0 { int(1) } else { int(-1) };
        rhs = &rhs + &(&i(0).pow_u(k) * &i(k)).scale(&(sign / factorial_rat(k)));
    }
    out.push(VerificationReport::compare("dF_0,N/dI_0", &lhs, &rhs));
    Ok(out)
}

/// [`structural_fgn`] expanded in the `t_k`, against the assembled series.
pub fn structural_check(
    engine: &CorrelatorEngine,
    f: &FreeEnergySeries,
    frame: &ICoordinateFrame,
    genus: u32,
) -> Result<VerificationReport, ExactMathError> {
    let d = frame.order().min(f.truncation());
    let expr = structural_fgn(engine, genus);
    let name = format!("F_{genus},N structural form");
    if genus >= 1 && expr.mentions_i0() {
        return Ok(VerificationReport::fail(name, "depends on I_0"));
    }
    Ok(VerificationReport::compare(name, &expr.expand_t(frame)?, &assembled_t(f, genus, d)))
}

/// `F_g(t) = δ_{g,0} N F0(I) + δ_{g,1} (N²/2) log 1/(1−I_1) + F_g(ĝ)` with
/// `ĝ_1 = ĝ_2 = 0` and `ĝ_n = I_{n−1}/((n−1)!(1−I_1)^{n/2})`.
pub fn renormalization_identity(f: &FreeEnergySeries, frame: &ICoordinateFrame, genus: u32) -> Result<VerificationReport, ExactMathError> {
    let d = frame.order().min(f.truncation());
    let one_minus = &RatSeries::one((), d) - &frame.i(1).truncate(d);
    let mut subs = BTreeMap::new();
    subs.insert(Symbol::G(1), PolySeries::zero(Var::N, d));
    subs.insert(Symbol::G(2), PolySeries::zero(Var::N, d));
    for n in 3..=d {
        let hat = &frame.i(n - 1).truncate(d) * &one_minus.pow(&Rational::new(-BigInt::from(n), BigInt::from(2)))?;
        subs.insert(Symbol::G(n), promote(&hat.scale(&(Rational::one() / factorial_rat(n - 1))), Var::N));
    }
    let shifted = f.genus_series(genus).truncate(d).substitute(&subs)?;
    let mut rhs = shifted;
    let mut head = StructuralExpr::zero(Var::N);
    if genus <= 1 {
        head = structural_fgn(&CorrelatorEngine::new(), genus);
    }
    if head != StructuralExpr::zero(Var::N) {
        rhs = &rhs + &head.expand_t(frame)?;
    }
    Ok(VerificationReport::compare(format!("renormalization identity g={genus}"), &rhs, &assembled_t(f, genus, d)))
}

/// Multiplies a printed coefficient by the structural normalization of its term,
/// `∏ 1/(l_j!(j−1)!^{l_j})`, for the insertion multiset `lambda`.
pub fn printed_term(lambda: &Partition, value: Rational) -> ((Monomial, u32), Rational) {
    let mut denom = BigInt::one();
    let mut factors = Vec::new();
    let mut half = 0;
    for (j, l) in lambda.multiplicities() {
        denom *= factorial(l) * factorial(j - 1).pow(l);
        factors.push((Symbol::I(j - 1), l));
        half += j * l;
    }
    ((Monomial::from_factors(factors), half), value / Rational::from_integer(denom))
}

/// Compares a structural expression's coefficients of `var^m` with printed values.
pub fn printed_check(name: &str, expr: &StructuralExpr, m: u32, printed: &[(&str, Rational)]) -> VerificationReport {
    for (parts, value) in printed {
        let lambda: Partition = parts.parse().expect("valid partition");
        let (key, expected) = printed_term(&lambda, value.clone());
        let got = expr.terms.get(&key).map(|c| c.coeff(m)).unwrap_or_else(Rational::zero);
        if got != expected {
            return VerificationReport::fail(
                name,
                format!("{lambda}: got {}, expected {}", format_rational(&got), format_rational(&expected)),
            );
        }
    }
    VerificationReport::pass(name)
}
