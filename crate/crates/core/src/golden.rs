//! Reference JSON documents for the assembled free energies.

use serde_json::{json, Value};

use crate::free_energy::FreeEnergySeries;
use crate::{Coeff, TruncatedSeries};

pub const GOLDEN_FILES: [&str; 3] = ["thin.json", "fat.json", "one_d.json"];

fn layers<C: Coeff>(truncation: u32, key: &str, series: impl Iterator<Item = (u32, TruncatedSeries<C>)>) -> Value {
    let items: Vec<Value> = series.filter(|(_, s)| !s.is_zero()).map(|(g, s)| json!({ key: g, "series": s.to_json() })).collect();
    json!({ "truncation": truncation, "layers": items })
}

/// `(file name, document)` pairs for `F_{g,N}`, `F_g̃(t)` and `F_g^{1D}`.
pub fn golden_documents(f: &FreeEnergySeries) -> Vec<(&'static str, Value)> {
    let d = f.truncation();
    let top = d / 2;
    vec![
        (GOLDEN_FILES[0], layers(d, "genus", (0..=top).map(|g| (g, f.genus_series(g))))),
        (GOLDEN_FILES[1], layers(d, "fat_genus", (0..=top).map(|g| (g, f.fat_expansion(g))))),
        (GOLDEN_FILES[2], layers(d, "genus", (0..=top).map(|g| (g, f.one_d_specialize(g))))),
    ]
}

/// Canonical text of a document: pretty JSON with a trailing newline.
pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}
