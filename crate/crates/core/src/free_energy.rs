//! Truncated free energies assembled from thin correlators, and the
//! reorganizations of them: fat layers, the N = 1 specialization, dilaton
//! resummation and the Virasoro residual.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::correlator::{thin_genus, CorrelatorEngine};
use crate::exactmath::partition::weak_compositions;
use crate::exactmath::{
    factorial_rat, int, Coeff, ExactMathError, GenusPolynomial, Monomial, Partition, PolySeries, RatSeries, Rational, Symbol,
    TruncatedSeries, Var,
};
use crate::report::{series_diff, VerificationReport};

/// `g_λ = ∏ g_{λ_i}`.
pub fn coupling_monomial(lambda: &Partition) -> Monomial {
    Monomial::from_factors(lambda.multiplicities().into_iter().map(|(j, m)| (Symbol::G(j), m)))
}

/// Rewrites `g_n ↦ t_{n−1}/(n−1)!`. Weights are preserved, so the truncation is too.
pub fn g_to_t<C: Coeff>(s: &TruncatedSeries<C>) -> TruncatedSeries<C> {
    rename(s, |sym| match sym {
        Symbol::G(n) if n >= 1 => Some((Symbol::T(n - 1), Rational::one() / factorial_rat(n - 1))),
        _ => None,
    })
}

/// Inverse of [`g_to_t`]: `t_k ↦ k!·g_{k+1}`.
pub fn t_to_g<C: Coeff>(s: &TruncatedSeries<C>) -> TruncatedSeries<C> {
    rename(s, |sym| match sym {
        Symbol::T(k) => Some((Symbol::G(k + 1), factorial_rat(k))),
        _ => None,
    })
}

fn rename<C: Coeff>(s: &TruncatedSeries<C>, f: impl Fn(Symbol) -> Option<(Symbol, Rational)>) -> TruncatedSeries<C> {
    let mut out = TruncatedSeries::zero(s.ctx(), s.truncation());
    for (m, c) in s.terms() {
        let mut scale = Rational::one();
        let mut factors = Vec::new();
        for &(sym, e) in m.factors() {
            match f(sym) {
                Some((to, k)) => {
                    for _ in 0..e {
                        scale *= &k;
                    }
                    factors.push((to, e));
                }
                None => factors.push((sym, e)),
            }
        }
        out.add_term(Monomial::from_factors(factors), c.scale(&scale));
    }
    out
}

/// Evaluates polynomial coefficients at a rational value of their variable.
pub fn evaluate(s: &PolySeries, x: &Rational) -> RatSeries {
    s.map_coeffs((), |p| p.eval(x))
}

/// Promotes rational coefficients to constant polynomials in `var`.
pub fn promote(s: &RatSeries, var: Var) -> PolySeries {
    s.map_coeffs(var, |r| GenusPolynomial::constant(var, r.clone()))
}

/// Coefficients of `g_λ` in `F_{g,N}` for every `λ` with `|λ| ≤ D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeEnergySeries {
    truncation: u32,
    entries: BTreeMap<(u32, Partition), GenusPolynomial>,
}

impl FreeEnergySeries {
    /// Queries the engine for every partition of size at most `D`.
    pub fn assemble(engine: &CorrelatorEngine, truncation: u32) -> Self {
        let entries = Partition::all_up_to(truncation)
            .into_par_iter()
            .filter_map(|lambda| {
                let g = thin_genus(&lambda)?;
                let v = engine.thin(&lambda, i64::from(g));
                if v.is_zero() {
                    return None;
                }
                let c = v.scale(&Rational::new(BigInt::one(), lambda.multiplicity_factorial()));
                Some(((g, lambda), c))
            })
            .collect();
        FreeEnergySeries { truncation, entries }
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, &Partition, &GenusPolynomial)> {
        self.entries.iter().map(|((g, l), c)| (*g, l, c))
    }

    pub fn coefficient(&self, genus: u32, lambda: &Partition) -> Option<&GenusPolynomial> {
        self.entries.get(&(genus, lambda.clone()))
    }

    /// Genera with at least one nonzero entry.
    pub fn genera(&self) -> Vec<u32> {
        let mut gs: Vec<u32> = self.entries.keys().map(|(g, _)| *g).collect();
        gs.dedup();
        gs
    }

    /// `F_{g,N}` as a series in the `g_n`.
    pub fn genus_series(&self, genus: u32) -> PolySeries {
        let mut s = PolySeries::zero(Var::N, self.truncation);
        for ((g, lambda), c) in &self.entries {
            if *g == genus {
                s.add_term(coupling_monomial(lambda), c.clone());
            }
        }
        s
    }

    /// `F_N` with `g_s = 1`: all genera summed (each `g_λ` sits in one genus).
    pub fn total_series(&self) -> PolySeries {
        let mut s = PolySeries::zero(Var::N, self.truncation);
        for ((_, lambda), c) in &self.entries {
            s.add_term(coupling_monomial(lambda), c.clone());
        }
        s
    }

    /// The fat layer `F_g̃(t)`: each `N^m` at thin genus `g` goes to `g̃ = (g+1−m)/2` as `t^m`.
    pub fn fat_expansion(&self, fat_genus: u32) -> PolySeries {
        let mut s = PolySeries::zero(Var::T, self.truncation);
        for ((g, lambda), c) in &self.entries {
            for (m, a) in c.terms() {
                if g + 1 == 2 * fat_genus + m {
                    s.add_term(coupling_monomial(lambda), GenusPolynomial::monomial(Var::T, a.clone(), m));
                }
            }
        }
        s
    }

    /// `F_g^{1D}`: `N = 1` and `g_n = t_{n−1}/(n−1)!`.
    pub fn one_d_specialize(&self, genus: u32) -> RatSeries {
        g_to_t(&evaluate(&self.genus_series(genus), &int(1)))
    }

    /// Rebuilds `F_{g,N}` from its entries free of `p_2` and compares it with the
    /// direct assembly through weight `D`.
    pub fn dilaton_resum(&self, genus: u32, truncation: u32) -> (PolySeries, VerificationReport) {
        let d = truncation.min(self.truncation);
        let g2 = RatSeries::var(Symbol::G(2), (), d);
        let one_minus = &RatSeries::one((), d) - &g2;
        let mut out = PolySeries::zero(Var::N, d);
        if genus == 1 {
            // (N²/2)·log 1/(1−g_2)
            let log = one_minus.log().expect("constant term 1");
            let n2 = GenusPolynomial::monomial(Var::N, Rational::new((-1).into(), 2.into()), 2);
            out = &out + &promote(&log, Var::N).mul_coeff(&n2);
        }
        for ((g, lambda), c) in &self.entries {
            if *g != genus || lambda.contains(2) || lambda.size() > d {
                continue;
            }
            let r = i64::from(genus) - 1 + lambda.len() as i64;
            let resum = one_minus.pow(&int(-r)).expect("constant term 1");
            let term = promote(&resum, Var::N).mul_monomial(&coupling_monomial(lambda), c).truncate(d);
            out = &out + &term;
        }
        let report = VerificationReport::compare(format!("dilaton resummation g={genus}"), &out, &self.genus_series(genus).truncate(d));
        (out, report)
    }

    /// `Σ_λ` coefficient exponents of `N` must lie in `allowed` for genus `g`.
    pub fn n_powers_check(&self, genus: u32, allowed: &[u32]) -> VerificationReport {
        let bad = self.entries.iter().find(|((g, _), c)| *g == genus && c.exponents().iter().any(|e| !allowed.contains(e)));
        match bad {
            None => VerificationReport::pass(format!("N powers of F_{genus},N in {allowed:?}")),
            Some(((_, lambda), c)) => VerificationReport::fail(format!("N powers of F_{genus},N in {allowed:?}"), format!("{lambda}: {c}")),
        }
    }

    /// `L_m Z` for `Z = exp F` (with `g_s = 1`), valid through `D − max(2, m+2)`.
    pub fn virasoro_residual(&self, m: i32, truncation: u32) -> Result<PolySeries, ExactMathError> {
        let d = truncation.min(self.truncation);
        let z = self.total_series().truncate(d).exp()?;
        let n = |e: u32| GenusPolynomial::monomial(Var::N, Rational::one(), e);
        let c = |k: i64| GenusPolynomial::constant(Var::N, int(k));
        let g = |k: u32| Monomial::var(Symbol::G(k));
        let dz = |k: u32| z.derivative(Symbol::G(k));

        let mut res = PolySeries::zero(Var::N, d);
        match m {
            -1 => {
                res = &res - &dz(1);
                for k in 1..d {
                    res = &res + &dz(k).mul_monomial(&g(k + 1), &c(i64::from(k)));
                }
                res = &res + &z.mul_monomial(&g(1), &n(1));
            }
            0 => {
                res = &res - &dz(2).scale(&int(2));
                for k in 1..=d {
                    res = &res + &dz(k).mul_monomial(&g(k), &c(i64::from(k)));
                }
                res = &res + &z.mul_coeff(&n(2));
            }
            m if m >= 1 => {
                let m = m as u32;
                res = &res - &dz(m + 2).scale(&int(i64::from(m) + 2));
                for k in 1..=d.saturating_sub(m) {
                    res = &res + &dz(k + m).mul_monomial(&g(k), &c(i64::from(k + m)));
                }
                for k in 1..m {
                    res = &res + &dz(k).derivative(Symbol::G(m - k)).scale(&int(i64::from(k * (m - k))));
                }
                res = &res + &dz(m).mul_coeff(&n(1)).scale(&int(2 * i64::from(m)));
            }
            _ => panic!("L_m is defined for m ≥ −1"),
        }
        let valid = d.saturating_sub((m + 2).max(2) as u32);
        Ok(res.truncate(valid))
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|((g, lambda), c)| json!({ "genus": g, "parts": lambda.parts(), "coeff": c.to_json() }))
            .collect();
        json!({ "truncation": self.truncation, "entries": entries })
    }

    pub fn from_json(v: &Value) -> Result<Self, ExactMathError> {
        let bad = || ExactMathError::Parse("invalid free energy JSON".into());
        let truncation = v.get("truncation").and_then(Value::as_u64).ok_or_else(bad)? as u32;
        let mut entries = BTreeMap::new();
        for e in v.get("entries").and_then(Value::as_array).ok_or_else(bad)? {
            let g = e.get("genus").and_then(Value::as_u64).ok_or_else(bad)? as u32;
            let parts = e
                .get("parts")
                .and_then(Value::as_array)
                .ok_or_else(bad)?
                .iter()
                .map(|p| p.as_u64().map(|x| x as u32).ok_or_else(bad))
                .collect::<Result<Vec<_>, _>>()?;
            let c = GenusPolynomial::from_json(e.get("coeff").ok_or_else(bad)?)?;
            entries.insert((g, Partition::new(parts)?), c);
        }
        Ok(FreeEnergySeries { truncation, entries })
    }
}

/// `N Σ_k 1/(k(k+1)) Σ_{j_1+⋯+j_{k+1}=2k} ∏ g_{j_i}` through weight `D`.
pub fn f0_partition_sum(truncation: u32) -> PolySeries {
    f0_sum(truncation, false)
}

/// The same sum over parts `≠ 2`, each term carrying `(1−g_2)^{−k}`.
pub fn f0_partition_sum_resummed(truncation: u32) -> PolySeries {
    f0_sum(truncation, true)
}

fn f0_sum(truncation: u32, resummed: bool) -> PolySeries {
    let mut out = RatSeries::zero((), truncation);
    let one_minus = &RatSeries::one((), truncation) - &RatSeries::var(Symbol::G(2), (), truncation);
    for k in 1..=truncation / 2 {
        let mut inner = RatSeries::zero((), truncation);
        for comp in weak_compositions(k - 1, k as usize + 1) {
            if resummed && comp.contains(&1) {
                continue;
            }
            let parts = Partition::new(comp.iter().map(|p| p + 1)).expect("positive parts");
            inner.add_term(coupling_monomial(&parts), Rational::one());
        }
        let mut term = inner.scale(&Rational::new(BigInt::one(), BigInt::from(k) * BigInt::from(k + 1)));
        if resummed {
            term = &term * &one_minus.pow(&int(-i64::from(k))).expect("constant term 1");
        }
        out = &out + &term;
    }
    promote(&out, Var::N).mul_coeff(&GenusPolynomial::monomial(Var::N, Rational::one(), 1))
}

/// Both partition-sum formulas against the assembled genus-zero free energy.
pub fn f0_partition_sum_checks(f: &FreeEnergySeries, truncation: u32) -> Vec<VerificationReport> {
    let f0 = f.genus_series(0).truncate(truncation);
    vec![
        VerificationReport::compare("F_0,N partition sum", &f0_partition_sum(truncation), &f0),
        VerificationReport::compare("F_0,N resummed partition sum", &f0_partition_sum_resummed(truncation), &f0),
    ]
}

/// `F_{g,N} = N^{g+1} F_g^{1D}` for `g = 0, 1`, and odd `aN + bN³` for `g = 2`.
pub fn scaling_checks(f: &FreeEnergySeries) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    for g in [0u32, 1] {
        let lhs = g_to_t(&f.genus_series(g));
        let rhs = promote(&f.one_d_specialize(g), Var::N).mul_coeff(&GenusPolynomial::monomial(Var::N, Rational::one(), g + 1));
        out.push(VerificationReport::from_result(format!("F_{g},N = N^{} F_{g}^1D", g + 1), series_diff(&lhs, &rhs)));
    }
    out.push(f.n_powers_check(2, &[1, 3]));
    out
}
