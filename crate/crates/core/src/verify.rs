//! Named verification suites, each a list of reports.

use crate::correlator::{thin_genus, CorrelatorEngine};
use crate::exactmath::{Partition, Var};
use crate::free_energy::{f0_partition_sum_checks, scaling_checks, FreeEnergySeries};
use crate::renormalization::{
    f0_closed_form_checks, renormalization_identity, structural_check, structural_fgn, ICoordinateFrame, StructuralExpr,
};
use crate::report::VerificationReport;
use crate::wick::{WickError, WickOracle};

pub const SUITES: [&str; 7] = ["oracle", "fat-thin", "free-energy", "icoords", "structure", "renormalization", "virasoro"];

/// Every partition of even size `2..=max_degree`.
pub fn even_partitions(max_degree: u32) -> Vec<Partition> {
    (1..=max_degree / 2).flat_map(|n| Partition::all_of(2 * n)).collect()
}

/// Oracle against recursion, one report per partition.
pub fn oracle(engine: &CorrelatorEngine, wick: &WickOracle, max_degree: u32) -> Result<Vec<VerificationReport>, WickError> {
    let mut out = Vec::new();
    for lambda in even_partitions(max_degree) {
        let (g, v) = wick.oracle_correlator(&lambda)?;
        let r = engine.thin(&lambda, g);
        let name = format!("oracle {lambda}");
        out.push(if r == v { VerificationReport::pass(name) } else { VerificationReport::fail(name, format!("recursion {r}, oracle {v}")) });
    }
    Ok(out)
}

/// Fat recursion against the regrading of thin correlators, for every fat genus.
pub fn fat_thin(engine: &CorrelatorEngine, max_degree: u32) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    for lambda in Partition::all_up_to(max_degree) {
        let Some(g) = thin_genus(&lambda) else { continue };
        for fg in 0..=(g as i64 + 1) / 2 {
            let a = engine.fat(&lambda, fg);
            let b = engine.fat_from_thin(&lambda, fg);
            if a != b {
                out.push(VerificationReport::fail("fat recursion vs thin regrading", format!("{lambda} genus {fg}: {a} vs {b}")));
                return out;
            }
        }
    }
    out.push(VerificationReport::pass("fat recursion vs thin regrading"));
    out
}

/// Dilaton resummation, both partition sums, and the scaling identities.
pub fn free_energy(f: &FreeEnergySeries) -> Vec<VerificationReport> {
    let d = f.truncation();
    let mut out: Vec<VerificationReport> = (0..=d / 2).map(|g| f.dilaton_resum(g, d).1).collect();
    out.extend(f0_partition_sum_checks(f, d));
    out.extend(scaling_checks(f));
    out
}

pub fn icoords(frame: &ICoordinateFrame) -> Vec<VerificationReport> {
    let r = frame.fixed_point_residual();
    vec![
        if r.is_zero() { VerificationReport::pass("I_0 fixed point") } else { VerificationReport::fail("I_0 fixed point", r.to_string()) },
        frame.invert(),
    ]
}

/// Closed forms in I-coordinates, structural `F_g` for `g ≤ max_genus`, and the q round trip.
pub fn structure(engine: &CorrelatorEngine, f: &FreeEnergySeries, frame: &ICoordinateFrame, max_genus: u32) -> Vec<VerificationReport> {
    let mut out = match f0_closed_form_checks(f, frame) {
        Ok(r) => r,
        Err(e) => vec![VerificationReport::fail("F_0,N closed form", e.to_string())],
    };
    for g in 1..=max_genus {
        out.push(structural_check(engine, f, frame, g).unwrap_or_else(|e| VerificationReport::fail(format!("F_{g},N structural form"), e.to_string())));
    }
    for g in 2..=max_genus.max(4) {
        let s = structural_fgn(engine, g);
        let name = format!("F_{g},N q-form round trip");
        out.push(match s.to_q() {
            Some(q) if StructuralExpr::from_q(Var::N, &q) == s => VerificationReport::pass(name),
            _ => VerificationReport::fail(name, "q rewrite does not invert"),
        });
    }
    out
}

pub fn renormalization(f: &FreeEnergySeries, frame: &ICoordinateFrame) -> Vec<VerificationReport> {
    (0..=2)
        .map(|g| renormalization_identity(f, frame, g).unwrap_or_else(|e| VerificationReport::fail(format!("renormalization identity g={g}"), e.to_string())))
        .collect()
}

/// `L_m Z = 0` for `m = −1..=max_m`.
pub fn virasoro(f: &FreeEnergySeries, max_m: i32) -> Vec<VerificationReport> {
    (-1..=max_m)
        .map(|m| {
            let name = format!("L_{m} Z = 0");
            match f.virasoro_residual(m, f.truncation()) {
                Ok(r) if r.is_zero() => VerificationReport::pass(name),
                Ok(r) => VerificationReport::fail(name, r.to_string()),
                Err(e) => VerificationReport::fail(name, e.to_string()),
            }
        })
        .collect()
}

/// Knobs for [`run_suite`].
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub max_degree: u32,
    pub wick: WickOracle,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { max_degree: 8, wick: WickOracle::default() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Wick(#[from] WickError),
    #[error(transparent)]
    Renorm(#[from] crate::renormalization::RenormError),
}

/// Runs one suite by name (or `all`).
pub fn run_suite(engine: &CorrelatorEngine, name: &str, cfg: SuiteConfig) -> Result<Vec<VerificationReport>, SuiteError> {
    let d = cfg.max_degree;
    let needs_f = !matches!(name, "oracle" | "fat-thin" | "icoords");
    let f = if needs_f { Some(FreeEnergySeries::assemble(engine, d)) } else { None };
    let frame = || ICoordinateFrame::build(d);
    Ok(match name {
        "oracle" => oracle(engine, &cfg.wick, d)?,
        "fat-thin" => fat_thin(engine, d),
        "free-energy" => free_energy(f.as_ref().expect("assembled")),
        "icoords" => icoords(&frame()?),
        "structure" => structure(engine, f.as_ref().expect("assembled"), &frame()?, (d / 2).saturating_sub(1).max(1)),
        "renormalization" => renormalization(f.as_ref().expect("assembled"), &frame()?),
        "virasoro" => virasoro(f.as_ref().expect("assembled"), (d as i32 - 4).min(4)),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(engine, s, cfg)?);
            }
            out
        }
        other => return Err(SuiteError::Unknown(other.to_string())),
    })
}
