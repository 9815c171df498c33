//! Acceptance gate: one line per criterion, nonzero exit if any fails.
//!
//! Set `ACCEPTANCE_QUICK=1` to stop the oracle sweep at degree 10.

#![allow(clippy::type_complexity)]

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use matmodel_core::correlator::{poly, thin_genus};
use matmodel_core::exactmath::{int, rat};
use matmodel_core::free_energy::{f0_partition_sum_checks, scaling_checks};
use matmodel_core::renormalization::{
    f0_closed_form_checks, fat_in_i, printed_check, printed_term, q_rewrite, renormalization_identity, structural_check, structural_fgn,
};
use matmodel_core::verify::{even_partitions, run_suite, SuiteConfig};
use matmodel_core::{
    CorrelatorEngine, FreeEnergySeries, GenusPolynomial, ICoordinateFrame, Monomial, Partition, RatSeries, Rational, StructuralExpr,
    Symbol, VerificationReport, Var, WickOracle,
};

type Check = Result<(), String>;

/// Observations attached to the current criterion's result line.
static NOTES: Mutex<Vec<String>> = Mutex::new(Vec::new());

fn note(s: String) {
    let mut notes = NOTES.lock().unwrap();
    if !notes.contains(&s) {
        notes.push(s);
    }
}

/// Genus-4 correlators whose printed values disagree with brute-force Wick
/// enumeration. Any other disagreement is a failure.
const ERRATA: [(&str, [(i64, i64); 3]); 3] = [
    ("3^6", [(4736, 1), (7104, 1), (840, 1)]),
    ("3^2,4^2", [(156, 1), (384, 1), (70, 1)]),
    ("3,4,5", [(18, 1), (54, 1), (12, 1)]),
];

fn printed_errata(lambda: &Partition) -> Option<GenusPolynomial> {
    ERRATA.iter().find(|(parts, _)| &p(parts) == lambda).map(|(_, c)| n(&[(c[0].0, c[0].1, 5), (c[1].0, c[1].1, 3), (c[2].0, c[2].1, 1)]))
}

fn oracle_value(lambda: &Partition) -> GenusPolynomial {
    static MEMO: OnceLock<Mutex<HashMap<Partition, GenusPolynomial>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(v) = memo.lock().unwrap().get(lambda) {
        return v.clone();
    }
    let v = WickOracle::new(18).oracle_correlator(lambda).expect("within cap").1;
    memo.lock().unwrap().insert(lambda.clone(), v.clone());
    v
}

/// Accepts a printed/computed disagreement only for a listed erratum where the
/// oracle sides with the computation.
fn erratum(lambda: &Partition, ours: &GenusPolynomial) -> Check {
    let Some(printed) = printed_errata(lambda) else {
        return Err(format!("<{lambda}>_4 = {ours} disagrees with the printed value"));
    };
    let oracle = oracle_value(lambda);
    if &oracle != ours || oracle == printed {
        return Err(format!("<{lambda}>_4: oracle {oracle}, recursion {ours}, printed {printed}"));
    }
    note(format!("printed <{lambda}>_4 = {printed} corrected to {ours} by Wick enumeration"));
    Ok(())
}

fn p(s: &str) -> Partition {
    s.parse().expect("valid partition")
}

fn n(terms: &[(i64, i64, u32)]) -> GenusPolynomial {
    poly(Var::N, terms)
}

fn t(terms: &[(i64, i64, u32)]) -> GenusPolynomial {
    poly(Var::T, terms)
}

/// Parses `g_3*g_1^2` style monomials.
fn mono(s: &str) -> Monomial {
    Monomial::from_factors(s.split('*').map(|f| {
        let (sym, e) = f.split_once('^').unwrap_or((f, "1"));
        (Symbol::parse(sym).expect("symbol"), e.parse().expect("exponent"))
    }))
}

fn expect_eq<T: PartialEq + std::fmt::Display>(what: impl std::fmt::Display, got: &T, want: &T) -> Check {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, expected {want}"))
    }
}

fn reports(rs: impl IntoIterator<Item = VerificationReport>) -> Check {
    for r in rs {
        if !r.passed() {
            return Err(r.to_string());
        }
    }
    Ok(())
}

fn thin_tables() -> Check {
    let e = CorrelatorEngine::new();
    let table = [
        ("2", 1, n(&[(1, 2, 2)])),
        ("1,1", 0, n(&[(1, 1, 1)])),
        ("4", 2, n(&[(1, 2, 3), (1, 4, 1)])),
        ("3,1", 1, n(&[(1, 1, 2)])),
        ("2,2", 1, n(&[(1, 2, 2)])),
        ("2,1,1", 0, n(&[(1, 1, 1)])),
        ("6", 3, n(&[(5, 3, 2), (5, 6, 4)])),
        ("5,1", 2, n(&[(1, 1, 1), (2, 1, 3)])),
        ("4,2", 2, n(&[(1, 2, 1), (1, 1, 3)])),
        ("4,1,1", 1, n(&[(3, 1, 2)])),
        ("3,3", 2, n(&[(1, 3, 1), (4, 3, 3)])),
        ("3,2,1", 1, n(&[(2, 1, 2)])),
        ("3,1,1,1", 0, n(&[(2, 1, 1)])),
        ("2,2,2", 1, n(&[(1, 1, 2)])),
        ("2,2,1,1", 0, n(&[(2, 1, 1)])),
    ];
    for (parts, g, want) in &table {
        expect_eq(format!("<{parts}>_{g}"), &e.thin(&p(parts), *g), want)?;
    }
    for parts in ["1,1,1,1", "2,1,1,1,1", "1,1,1,1,1,1"] {
        for g in -3..=6 {
            expect_eq(format!("<{parts}>_{g}"), &e.thin(&p(parts), g), &GenusPolynomial::zero(Var::N))?;
        }
    }
    Ok(())
}

fn worked_virasoro() -> Check {
    let e = CorrelatorEngine::new();
    let table = [
        ("3,5", n(&[(4, 1, 2), (3, 1, 4)])),
        ("4,4", n(&[(15, 4, 2), (9, 4, 4)])),
        ("3,3,4", n(&[(13, 1, 2), (12, 1, 4)])),
        ("3,3,3,3", n(&[(56, 1, 2), (64, 1, 4)])),
    ];
    for (parts, want) in &table {
        expect_eq(format!("<{parts}>_3"), &e.thin(&p(parts), 3), want)?;
    }
    Ok(())
}

fn fat_tables() -> Check {
    let e = CorrelatorEngine::new();
    let table = [
        ("2", 0, t(&[(1, 2, 2)])),
        ("1,1", 0, t(&[(1, 1, 1)])),
        ("4", 0, t(&[(1, 2, 3)])),
        ("4", 1, t(&[(1, 4, 1)])),
        ("3,1", 0, t(&[(1, 1, 2)])),
        ("2,2", 0, t(&[(1, 2, 2)])),
        ("2,1,1", 0, t(&[(1, 1, 1)])),
        ("6", 0, t(&[(5, 6, 4)])),
        ("6", 1, t(&[(5, 3, 2)])),
        ("5,1", 0, t(&[(2, 1, 3)])),
        ("5,1", 1, t(&[(1, 1, 1)])),
        ("4,2", 0, t(&[(1, 1, 3)])),
        ("4,2", 1, t(&[(1, 2, 1)])),
        ("4,1,1", 0, t(&[(3, 1, 2)])),
        ("3,3", 0, t(&[(4, 3, 3)])),
        ("3,3", 1, t(&[(1, 3, 1)])),
        ("3,2,1", 0, t(&[(2, 1, 2)])),
        ("3,1,1,1", 0, t(&[(2, 1, 1)])),
        ("2,2,2", 0, t(&[(1, 1, 2)])),
        ("2,2,1,1", 0, t(&[(2, 1, 1)])),
        ("5,3", 0, t(&[(3, 1, 4)])),
        ("5,3", 1, t(&[(4, 1, 2)])),
    ];
    for (parts, g, want) in &table {
        expect_eq(format!("fat <{parts}>_{g}"), &e.fat(&p(parts), *g), want)?;
        expect_eq(format!("regraded <{parts}>_{g}"), &e.fat_from_thin(&p(parts), *g), want)?;
    }
    for parts in ["1,1,1,1", "2,1,1,1,1", "1,1,1,1,1,1", "5,3"] {
        let first = if parts == "5,3" { 2 } else { 0 };
        for g in first..=4 {
            expect_eq(format!("fat <{parts}>_{g}"), &e.fat(&p(parts), g), &GenusPolynomial::zero(Var::T))?;
        }
    }
    Ok(())
}

fn oracle_sweep(max_degree: u32) -> Check {
    let e = CorrelatorEngine::new();
    let w = WickOracle::default();
    let mut count = 0;
    for lambda in even_partitions(max_degree) {
        let (g, v) = w.oracle_correlator(&lambda).map_err(|x| x.to_string())?;
        expect_eq(format!("oracle <{lambda}>_{g}"), &v, &e.thin(&lambda, g))?;
        count += 1;
    }
    let expected: usize = (1..=max_degree / 2).map(|k| Partition::all_of(2 * k).len()).sum();
    if count != expected {
        return Err(format!("swept {count} partitions, expected {expected}"));
    }
    Ok(())
}

fn printed_series(name: &str, got: &matmodel_core::PolySeries, rows: &[(&str, GenusPolynomial)]) -> Check {
    for (m, want) in rows {
        expect_eq(format!("{name} [{m}]"), &got.coeff_or_zero(&mono(m)), want)?;
    }
    Ok(())
}

fn free_energy_golden() -> Check {
    let f = FreeEnergySeries::assemble(&CorrelatorEngine::new(), 8);
    printed_series(
        "F_0,N",
        &f.genus_series(0),
        &[
            ("g_1^2", n(&[(1, 2, 1)])),
            ("g_2*g_1^2", n(&[(1, 2, 1)])),
            ("g_3*g_1^3", n(&[(1, 3, 1)])),
            ("g_2^2*g_1^2", n(&[(1, 2, 1)])),
            ("g_2^3*g_1^2", n(&[(1, 2, 1)])),
            ("g_3*g_2*g_1^3", n(&[(1, 1, 1)])),
            ("g_4*g_1^4", n(&[(1, 4, 1)])),
        ],
    )?;
    printed_series(
        "F_1,N",
        &f.genus_series(1),
        &[
            ("g_2", n(&[(1, 2, 2)])),
            ("g_3*g_1", n(&[(1, 1, 2)])),
            ("g_2^2", n(&[(1, 4, 2)])),
            ("g_4*g_1^2", n(&[(3, 2, 2)])),
            ("g_3*g_2*g_1", n(&[(2, 1, 2)])),
            ("g_2^3", n(&[(1, 6, 2)])),
        ],
    )?;
    printed_series(
        "F_2,N",
        &f.genus_series(2),
        &[
            ("g_4", n(&[(1, 2, 3), (1, 4, 1)])),
            ("g_5*g_1", n(&[(1, 1, 1), (2, 1, 3)])),
            ("g_4*g_2", n(&[(1, 2, 1), (1, 1, 3)])),
            ("g_3^2", n(&[(1, 6, 1), (2, 3, 3)])),
        ],
    )?;
    printed_series("F_3,N", &f.genus_series(3), &[("g_6", n(&[(5, 3, 2), (5, 6, 4)]))])?;

    let one_d: [(u32, &[(&str, i64, i64)]); 5] = [
        (
            0,
            &[
                ("t_0^2", 1, 2),
                ("t_1*t_0^2", 1, 2),
                ("t_1^2*t_0^2", 1, 2),
                ("t_2*t_0^3", 1, 6),
                ("t_1^3*t_0^2", 1, 2),
                ("t_2*t_1*t_0^3", 1, 2),
                ("t_3*t_0^4", 1, 24),
            ],
        ),
        (
            1,
            &[
                ("t_1", 1, 2),
                ("t_2*t_0", 1, 2),
                ("t_1^2", 1, 4),
                ("t_1^3", 1, 6),
                ("t_3*t_0^2", 1, 4),
                ("t_2*t_1*t_0", 1, 1),
                ("t_1^4", 1, 8),
                ("t_3*t_1*t_0^2", 3, 4),
                ("t_2*t_1^2*t_0", 3, 2),
                ("t_4*t_0^3", 1, 12),
                ("t_2^2*t_0^2", 1, 2),
            ],
        ),
        (
            2,
            &[
                ("t_3", 1, 8),
                ("t_2^2", 5, 24),
                ("t_4*t_0", 1, 8),
                ("t_3*t_1", 1, 4),
                ("t_2^2*t_1", 5, 8),
                ("t_4*t_1*t_0", 3, 8),
                ("t_3*t_1^2", 3, 8),
                ("t_5*t_0^2", 1, 16),
                ("t_3*t_2*t_0", 2, 3),
            ],
        ),
        (3, &[("t_5", 1, 48), ("t_5*t_1", 1, 16), ("t_3^2", 1, 12), ("t_6*t_0", 1, 48), ("t_4*t_2", 7, 48)]),
        (4, &[("t_7", 1, 384)]),
    ];
    for (g, rows) in one_d {
        let s = f.one_d_specialize(g);
        for (m, a, b) in rows {
            expect_eq(format!("F_{g}^1D [{m}]"), &s.coeff_or_zero(&mono(m)), &rat(*a, *b))?;
        }
    }

    printed_series(
        "F_0(t)",
        &f.fat_expansion(0),
        &[
            ("g_2", t(&[(1, 2, 2)])),
            ("g_1^2", t(&[(1, 2, 1)])),
            ("g_4", t(&[(1, 2, 3)])),
            ("g_3*g_1", t(&[(1, 1, 2)])),
            ("g_2^2", t(&[(1, 4, 2)])),
            ("g_2*g_1^2", t(&[(1, 2, 1)])),
            ("g_6", t(&[(5, 6, 4)])),
            ("g_5*g_1", t(&[(2, 1, 3)])),
            ("g_4*g_2", t(&[(1, 1, 3)])),
            ("g_4*g_1^2", t(&[(3, 2, 2)])),
            ("g_3^2", t(&[(2, 3, 3)])),
            ("g_3*g_2*g_1", t(&[(2, 1, 2)])),
            ("g_3*g_1^3", t(&[(1, 3, 1)])),
            ("g_2^3", t(&[(1, 6, 2)])),
            ("g_2^2*g_1^2", t(&[(1, 2, 1)])),
        ],
    )?;
    printed_series(
        "F_1(t)",
        &f.fat_expansion(1),
        &[
            ("g_4", t(&[(1, 4, 1)])),
            ("g_6", t(&[(5, 3, 2)])),
            ("g_5*g_1", t(&[(1, 1, 1)])),
            ("g_4*g_2", t(&[(1, 2, 1)])),
            ("g_3^2", t(&[(1, 6, 1)])),
        ],
    )
}

fn scaling_identities() -> Check {
    let f = FreeEnergySeries::assemble(&CorrelatorEngine::new(), 8);
    reports(scaling_checks(&f))?;
    if f.genus_series(2).is_zero() {
        return Err("F_2,N is empty".into());
    }
    Ok(())
}

/// `∏ q_k^{m_k}` ↦ the insertion multiset with `m_k` parts `k+2`.
fn q_partition(m: &Monomial) -> Partition {
    Partition::new(m.factors().iter().flat_map(|&(s, e)| match s {
        Symbol::Q(k) => vec![k + 2; e as usize],
        _ => vec![],
    }))
    .expect("positive parts")
}

fn q_tables(e: &CorrelatorEngine) -> Check {
    let rows: [(u32, &str, GenusPolynomial); 17] = [
        (2, "q_1^2", n(&[(1, 6, 3), (1, 24, 1)])),
        (2, "q_2", n(&[(1, 12, 3), (1, 24, 1)])),
        (3, "q_1^4", n(&[(1, 6, 4), (7, 48, 2)])),
        (3, "q_2*q_1^2", n(&[(1, 4, 4), (13, 48, 2)])),
        (3, "q_2^2", n(&[(1, 32, 4), (5, 96, 2)])),
        (3, "q_3*q_1", n(&[(1, 16, 4), (1, 12, 2)])),
        (3, "q_4", n(&[(1, 144, 4), (1, 72, 2)])),
        (4, "q_1^6", n(&[(37, 360, 5), (37, 240, 3), (7, 384, 1)])),
        (4, "q_2*q_1^4", n(&[(17, 24, 5), (19, 12, 3), (35, 128, 1)])),
        (4, "q_2^2*q_1^2", n(&[(13, 48, 5), (2, 3, 3), (35, 288, 1)])),
        (4, "q_2^3", n(&[(1, 48, 5), (11, 144, 3), (5, 288, 1)])),
        (4, "q_3*q_1^3", n(&[(5, 24, 5), (17, 32, 3), (19, 192, 1)])),
        (4, "q_3*q_2*q_1", n(&[(1, 16, 5), (3, 16, 3), (1, 24, 1)])),
        (4, "q_3^2", n(&[(1, 160, 5), (1, 48, 3), (11, 1920, 1)])),
        (4, "q_4*q_1^2", n(&[(5, 192, 5), (37, 288, 3), (1, 24, 1)])),
        (4, "q_5*q_1", n(&[(7, 1440, 5), (1, 48, 3), (1, 180, 1)])),
        (4, "q_6", n(&[(1, 1920, 5), (1, 576, 3), (1, 2880, 1)])),
    ];
    for g in 2..=4 {
        let q = q_rewrite(e, g);
        let expected_terms = Partition::all_of(2 * g - 2).len();
        if q.len() != expected_terms {
            return Err(format!("genus {g}: {} q-terms, expected {expected_terms}", q.len()));
        }
        let printed = rows.iter().filter(|r| r.0 == g).count();
        if printed < expected_terms {
            note(format!("genus {g}: {} of {expected_terms} q-terms are printed", printed));
        }
        for (_, m, want) in rows.iter().filter(|r| r.0 == g) {
            let got = q.get(&mono(m)).cloned().unwrap_or_else(|| GenusPolynomial::zero(Var::N));
            if &got == want {
                continue;
            }
            let lambda = q_partition(&mono(m));
            let ours = e.thin(&lambda, i64::from(g));
            let printed_v = if g == 4 { printed_genus4().into_iter().find(|(parts, _)| p(parts) == lambda).map(|x| x.1) } else { None };
            let norm = printed_term(&lambda, int(1)).1;
            match printed_v {
                Some(v) if &v.scale(&norm) != want => {
                    // the printed row does not follow from the printed correlator
                    if v != ours || oracle_value(&lambda) != ours {
                        return Err(format!("F_{g},N [{m}]: got {got}, printed {want}, printed correlator {v}"));
                    }
                    note(format!("printed F_{g},N [{m}] = {want} contradicts the printed correlator {v}, which gives {got}"));
                }
                _ => erratum(&lambda, &ours)?,
            }
        }
    }
    let (key, _) = printed_term(&p("3^6"), int(1));
    if key.1 != 18 {
        return Err(format!("I_2^6 carries (1-I_1)^(-{}/2), expected -9", key.1));
    }
    Ok(())
}

fn i_coordinates() -> Check {
    let e = CorrelatorEngine::new();
    let frame = ICoordinateFrame::build(10).map_err(|x| x.to_string())?;
    if !frame.fixed_point_residual().is_zero() {
        return Err(format!("fixed point residual {}", frame.fixed_point_residual()));
    }
    reports([frame.invert()])?;
    let f8 = FreeEnergySeries::assemble(&e, 8);
    let frame8 = ICoordinateFrame::build(8).map_err(|x| x.to_string())?;
    reports(f0_closed_form_checks(&f8, &frame8).map_err(|x| x.to_string())?)?;
    reports(f0_partition_sum_checks(&f8, 8))?;
    let f10 = FreeEnergySeries::assemble(&e, 10);
    for g in 1..=3 {
        reports([structural_check(&e, &f10, &frame, g).map_err(|x| x.to_string())?])?;
    }
    let counts: Vec<usize> = (2..=4).map(|g| structural_fgn(&e, g).terms.len()).collect();
    expect_eq("structural term counts", &format!("{counts:?}"), &"[2, 5, 11]".to_string())?;
    q_tables(&e)
}

fn renormalization() -> Check {
    let f = FreeEnergySeries::assemble(&CorrelatorEngine::new(), 6);
    let frame = ICoordinateFrame::build(6).map_err(|x| x.to_string())?;
    for g in 0..=2 {
        reports([renormalization_identity(&f, &frame, g).map_err(|x| x.to_string())?])?;
    }
    Ok(())
}

/// The printed genus-4 correlators entering `F_{4,N}`, as printed.
fn printed_genus4() -> Vec<(&'static str, GenusPolynomial)> {
    vec![
        ("3^6", n(&[(4736, 1, 5), (7104, 1, 3), (840, 1, 1)])),
        ("3^4,4", n(&[(1632, 1, 5), (3648, 1, 3), (630, 1, 1)])),
        ("3^2,4^2", n(&[(156, 1, 5), (384, 1, 3), (70, 1, 1)])),
        ("4^3", n(&[(27, 1, 5), (99, 1, 3), (45, 2, 1)])),
        ("3^3,5", n(&[(240, 1, 5), (612, 1, 3), (114, 1, 1)])),
        ("3,4,5", n(&[(18, 1, 5), (54, 1, 3), (12, 1, 1)])),
        ("5^2", n(&[(36, 5, 5), (24, 1, 3), (33, 5, 1)])),
        ("3^2,6", n(&[(40, 1, 5), (370, 3, 3), (25, 1, 1)])),
        ("3,7", n(&[(8, 1, 5), (30, 1, 3), (7, 1, 1)])),
        ("8", n(&[(14, 8, 5), (70, 8, 3), (21, 8, 1)])),
    ]
}

/// Checks printed `[N^m]` values of genus-`g` correlators, then that the fat
/// structural expression carries them with the right denominators.
fn printed_layer(e: &CorrelatorEngine, name: &str, expr: &StructuralExpr, g: u32, m: u32, rows: &[(&str, Rational)]) -> Check {
    let mut confirmed = Vec::new();
    for (parts, printed) in rows {
        let lambda = p(parts);
        let ours = e.thin(&lambda, i64::from(g));
        if &ours.coeff(m) != printed {
            erratum(&lambda, &ours)?;
        }
        confirmed.push((*parts, ours.coeff(m)));
    }
    reports([printed_check(name, expr, m, &confirmed)])
}

fn fat_structural() -> Check {
    let e = CorrelatorEngine::new();
    let f2 = fat_in_i(&e, 2, 1);
    let printed = [
        ("3^6", int(840)),
        ("3^4,4", int(630)),
        ("3^2,4^2", int(70)),
        ("4^3", rat(45, 2)),
        ("3^3,5", int(114)),
        ("3,4,5", int(12)),
        ("5^2", rat(33, 5)),
        ("3^2,6", int(25)),
        ("3,7", int(7)),
        ("8", rat(21, 8)),
    ];
    printed_layer(&e, "F_2(t) t-layer", &f2, 4, 1, &printed)?;
    if f2.terms.len() != 11 {
        return Err(format!("F_2(t) t-layer has {} terms, expected 11", f2.terms.len()));
    }
    let f0 = fat_in_i(&e, 0, 5);
    printed_layer(&e, "F_0(t) t^3-layer", &f0, 2, 3, &[("3,3", rat(4, 3)), ("4", rat(1, 2))])?;
    printed_layer(&e, "F_0(t) t^4-layer", &f0, 3, 4, &[("3^4", int(64)), ("3^2,4", int(12)), ("4,4", rat(9, 4)), ("3,5", int(3)), ("6", rat(5, 6))])?;
    let f1 = fat_in_i(&e, 1, 3);
    printed_layer(&e, "F_1(t) t-layer", &f1, 2, 1, &[("3,3", rat(1, 3)), ("4", rat(1, 4))])?;
    printed_layer(&e, "F_1(t) t^2-layer", &f1, 3, 2, &[("3^4", int(56)), ("3^2,4", int(13)), ("4,4", rat(15, 4)), ("3,5", int(4)), ("6", rat(5, 3))])?;
    let genus4 = |k: u32| -> Vec<(&'static str, Rational)> { printed_genus4().into_iter().map(|(parts, v)| (parts, v.coeff(k))).collect() };
    printed_layer(&e, "F_0(t) t^5-layer", &f0, 4, 5, &genus4(5))?;
    printed_layer(&e, "F_1(t) t^3-layer", &f1, 4, 3, &genus4(3))
}

fn virasoro() -> Check {
    let f = FreeEnergySeries::assemble(&CorrelatorEngine::new(), 8);
    for m in -1..=4 {
        let r = f.virasoro_residual(m, 8).map_err(|x| x.to_string())?;
        if !r.is_zero() {
            return Err(format!("L_{m} residual {r}"));
        }
    }
    Ok(())
}

fn random_series() -> impl Strategy<Value = RatSeries> {
    proptest::collection::vec(((0u32..3, 0u32..3, 0u32..3), -4i64..5, 1i64..4), 1..6).prop_map(|terms| {
        let mut s = RatSeries::zero((), 6);
        for ((a, b, c), num, den) in terms {
            let m = Monomial::from_factors([(Symbol::X(0), a), (Symbol::X(1), b), (Symbol::X(2), c)].into_iter().filter(|f| f.1 > 0));
            if !m.is_one() {
                s.add_term(m, rat(num, den));
            }
        }
        s
    })
}

fn properties() -> Check {
    let mut runner = TestRunner::new_with_rng(Config { cases: 64, ..Config::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let e = CorrelatorEngine::new();
    let w = WickOracle::default();
    let parts = proptest::collection::vec(1u32..6, 1..5);

    runner
        .run(&(parts.clone(), any::<u64>()), |(parts, seed)| {
            prop_assume!(parts.iter().sum::<u32>() <= 12);
            let mut shuffled = parts.clone();
            shuffled.rotate_left((seed % parts.len() as u64) as usize);
            shuffled.swap(0, (seed as usize / 7) % parts.len());
            let lambda = Partition::new(parts.clone()).unwrap();
            prop_assert_eq!(w.connected_moment_ordered(&shuffled).unwrap(), w.connected_moment(&lambda).unwrap());
            Ok(())
        })
        .map_err(|x| format!("part order: {x}"))?;

    runner
        .run(&(parts.clone(), -2i64..6), |(parts, g)| {
            let lambda = Partition::new(parts).unwrap();
            if lambda.size() % 2 == 1 {
                prop_assert!(e.thin(&lambda, g).is_zero());
                prop_assert!(e.fat(&lambda, g).is_zero());
            }
            Ok(())
        })
        .map_err(|x| format!("parity vanishing: {x}"))?;

    runner
        .run(&proptest::collection::vec(1u32..8, 1..6), |parts| {
            let lambda = Partition::new(parts).unwrap();
            if let Some(g) = thin_genus(&lambda) {
                for k in e.thin(&lambda, i64::from(g)).exponents() {
                    prop_assert_eq!(k % 2, (g + 1) % 2);
                    prop_assert!(k <= g + 1);
                }
            }
            Ok(())
        })
        .map_err(|x| format!("N-power parity: {x}"))?;

    for m in 1..=6u32 {
        let lambda = Partition::new(vec![2; m as usize]).unwrap();
        let fact: i64 = (1..m as i64).product();
        expect_eq(format!("<(p_2/2)^{m}>_1"), &e.thin(&lambda, 1), &n(&[(fact, 2, 2)]))?;
    }

    runner
        .run(&(random_series(), -3i64..4, 1i64..4), |(s, a, b)| {
            let one = RatSeries::one((), 6);
            let r = rat(a, b);
            prop_assert_eq!(s.exp().unwrap().log().unwrap(), s.clone());
            let u = &one + &s;
            prop_assert_eq!(u.log().unwrap().exp().unwrap(), u.clone());
            prop_assert_eq!(&u.pow(&r).unwrap() * &u.pow(&-r.clone()).unwrap(), one.clone());
            let half = u.pow(&rat(1, 2)).unwrap();
            prop_assert_eq!(&half * &half, u);
            Ok(())
        })
        .map_err(|x| format!("series round trips: {x}"))?;

    let all = run_suite(&e, "all", SuiteConfig { max_degree: 10, wick: w }).map_err(|x| x.to_string())?;
    reports(all)?;
    Ok(())
}

fn main() -> ExitCode {
    let quick = std::env::var("ACCEPTANCE_QUICK").is_ok_and(|v| v == "1");
    let oracle_degree = if quick { 10 } else { 12 };
    let criteria: Vec<(&str, u64, Box<dyn Fn() -> Check>)> = vec![
        ("thin correlator tables", 1, Box::new(thin_tables)),
        ("worked Virasoro examples", 1, Box::new(worked_virasoro)),
        ("fat correlator tables", 1, Box::new(fat_tables)),
        ("oracle equivalence", 60, Box::new(move || oracle_sweep(oracle_degree))),
        ("free energy printed terms", 5, Box::new(free_energy_golden)),
        ("scaling identities", 10, Box::new(scaling_identities)),
        ("I-coordinate suite", 60, Box::new(i_coordinates)),
        ("renormalization identity", 120, Box::new(renormalization)),
        ("fat structural expressions", 10, Box::new(fat_structural)),
        ("Virasoro residuals", 30, Box::new(virasoro)),
        ("property suites", 300, Box::new(properties)),
    ];
    let mut failures = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        NOTES.lock().unwrap().clear();
        let outcome = check();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*limit);
        match (&outcome, over) {
            (Ok(()), false) => println!("PASS {:>2} {name} ({:.2}s, limit {limit}s)", i + 1, elapsed.as_secs_f64()),
            (Ok(()), true) => println!("FAIL {:>2} {name}: took {:.2}s, limit {limit}s", i + 1, elapsed.as_secs_f64()),
            (Err(e), _) => println!("FAIL {:>2} {name}: {e}", i + 1),
        }
        for n in NOTES.lock().unwrap().iter() {
            println!("       note: {n}");
        }
        if outcome.is_err() || over {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures} of {} criteria failed", criteria.len());
        return ExitCode::FAILURE;
    }
    println!("all {} criteria passed", criteria.len());
    ExitCode::SUCCESS
}
