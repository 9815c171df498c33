//! Connected correlators V(λ, g) = ⟨∏ p_{a_j}/a_j⟩^c by memoized Virasoro recursion.
//!
//! Thin correlators are polynomials in `N` graded by the loop number of the
//! underlying graph; fat correlators are monomials `c·t^m` graded by the genus
//! of the ribbon graph. Both are computed by the same rule cascade:
//!
//! 1. a part equal to 1 is removed by the puncture equation,
//! 2. otherwise a part equal to 2 is removed by the dilaton equation,
//! 3. otherwise the largest part `m+2 ≥ 3` is removed by the `L_m` constraint.
//!
//! Each step lowers `|λ|` by two, so the recursion terminates.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::RwLock;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exactmath::{int, GenusPolynomial, Partition, Rational, Var};

/// Environment variable naming the on-disk memo directory.
pub const CACHE_ENV: &str = "MATMODEL_CACHE";
const CACHE_FILE: &str = "correlators.jsonl";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    Thin,
    Fat,
}

impl Flavor {
    pub fn var(self) -> Var {
        match self {
            Flavor::Thin => Var::N,
            Flavor::Fat => Var::T,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Flavor::Thin => "thin",
            Flavor::Fat => "fat",
        }
    }

    pub fn parse(s: &str) -> Option<Flavor> {
        match s {
            "thin" => Some(Flavor::Thin),
            "fat" => Some(Flavor::Fat),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelatorKey {
    pub partition: Partition,
    pub genus: u32,
    pub flavor: Flavor,
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed cache record at {path}:{line}")]
    Malformed { path: PathBuf, line: usize },
}

/// `|λ| = 2g − 2 + 2ℓ(λ)` with `g ≥ 0`.
pub fn thin_selection(lambda: &Partition, genus: i64) -> bool {
    genus >= 0 && i64::from(lambda.size()) == 2 * genus - 2 + 2 * lambda.len() as i64
}

/// The unique thin genus at which `λ` can contribute, if any.
pub fn thin_genus(lambda: &Partition) -> Option<u32> {
    let size = i64::from(lambda.size());
    if lambda.is_empty() || size % 2 != 0 {
        return None;
    }
    let g = size / 2 - lambda.len() as i64 + 1;
    u32::try_from(g).ok()
}

/// The power `m ≥ 1` of `t` in a nonvanishing fat correlator of genus `g̃`,
/// from `|λ| = 4g̃ − 4 + 2ℓ + 2m`.
pub fn fat_selection(lambda: &Partition, genus: i64) -> Option<u32> {
    if genus < 0 || lambda.is_empty() {
        return None;
    }
    let twice_m = i64::from(lambda.size()) - 2 * lambda.len() as i64 - 4 * genus + 4;
    if twice_m % 2 != 0 || twice_m < 2 {
        return None;
    }
    u32::try_from(twice_m / 2).ok()
}

/// Memoizing correlator engine, safe to share across threads.
#[derive(Debug, Default)]
pub struct CorrelatorEngine {
    memo: RwLock<HashMap<CorrelatorKey, GenusPolynomial>>,
    cache_dir: Option<PathBuf>,
}

impl CorrelatorEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Engine backed by `dir/correlators.jsonl`; existing records are loaded.
    pub fn with_cache_dir(dir: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let dir = dir.into();
        let engine = CorrelatorEngine { memo: RwLock::default(), cache_dir: Some(dir.clone()) };
        let path = dir.join(CACHE_FILE);
        if path.exists() {
            engine.load(&path)?;
        }
        Ok(engine)
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().len()
    }

    fn load(&self, path: &Path) -> Result<(), CacheError> {
        let io = |source| CacheError::Io { path: path.to_owned(), source };
        let file = fs::File::open(path).map_err(io)?;
        let mut memo = self.memo.write();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let (key, poly) = parse_record(&line).ok_or(CacheError::Malformed { path: path.to_owned(), line: i + 1 })?;
            memo.insert(key, poly);
        }
        Ok(())
    }

    /// Writes every memoized value to the cache file, sorted by key.
    pub fn persist(&self) -> Result<(), CacheError> {
        let Some(dir) = &self.cache_dir else { return Ok(()) };
        let io = |source| CacheError::Io { path: dir.clone(), source };
        fs::create_dir_all(dir).map_err(io)?;
        let path = dir.join(CACHE_FILE);
        let mut entries: Vec<(CorrelatorKey, GenusPolynomial)> =
            self.memo.read().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let tmp = dir.join(format!("{CACHE_FILE}.tmp"));
        let mut out = fs::File::create(&tmp).map_err(|source| CacheError::Io { path: tmp.clone(), source })?;
        for (key, poly) in &entries {
            writeln!(out, "{}", record(key, poly)).map_err(|source| CacheError::Io { path: tmp.clone(), source })?;
        }
        drop(out);
        fs::rename(&tmp, &path).map_err(|source| CacheError::Io { path, source })
    }

    pub fn correlator(&self, lambda: &Partition, genus: i64, flavor: Flavor) -> GenusPolynomial {
        match flavor {
            Flavor::Thin => self.thin(lambda, genus),
            Flavor::Fat => self.fat(lambda, genus),
        }
    }

    /// Thin correlator ⟨∏ p_{a_j}/a_j⟩^c_{g,N}.
    pub fn thin(&self, lambda: &Partition, genus: i64) -> GenusPolynomial {
        if lambda.is_empty() || !thin_selection(lambda, genus) {
            return GenusPolynomial::zero(Var::N);
        }
        match (lambda.parts(), genus) {
            ([1, 1], 0) => return GenusPolynomial::monomial(Var::N, int(1), 1),
            ([2], 1) => return GenusPolynomial::monomial(Var::N, Rational::new(1.into(), 2.into()), 2),
            _ => {}
        }
        self.memoized(lambda, genus, Flavor::Thin)
    }

    /// Fat correlator ⟨∏ p_{a_j}/a_j⟩^c_{g̃}(t).
    pub fn fat(&self, lambda: &Partition, genus: i64) -> GenusPolynomial {
        if fat_selection(lambda, genus).is_none() {
            return GenusPolynomial::zero(Var::T);
        }
        match (lambda.parts(), genus) {
            ([1, 1], 0) => return GenusPolynomial::monomial(Var::T, int(1), 1),
            ([2], 0) => return GenusPolynomial::monomial(Var::T, Rational::new(1.into(), 2.into()), 2),
            _ => {}
        }
        self.memoized(lambda, genus, Flavor::Fat)
    }

    /// Fat correlator read off the thin one: `g = 2g̃ + m − 1`, coefficient of `N^m`.
    pub fn fat_from_thin(&self, lambda: &Partition, fat_genus: i64) -> GenusPolynomial {
        let Some(g) = thin_genus(lambda) else { return GenusPolynomial::zero(Var::T) };
        let m = i64::from(g) + 1 - 2 * fat_genus;
        if fat_genus < 0 || m < 1 {
            return GenusPolynomial::zero(Var::T);
        }
        let m = m as u32;
        let c = self.thin(lambda, i64::from(g)).coeff(m);
        GenusPolynomial::monomial(Var::T, c, m)
    }

    fn memoized(&self, lambda: &Partition, genus: i64, flavor: Flavor) -> GenusPolynomial {
        let key = CorrelatorKey { partition: lambda.clone(), genus: genus as u32, flavor };
        if let Some(v) = self.memo.read().get(&key) {
            return v.clone();
        }
        let value = self.reduce(lambda, genus, flavor);
        self.memo.write().entry(key).or_insert_with(|| value.clone());
        value
    }

    fn reduce(&self, lambda: &Partition, genus: i64, flavor: Flavor) -> GenusPolynomial {
        let var = flavor.var();
        let v = |p: &Partition, g: i64| self.correlator(p, g, flavor);
        let mut acc = GenusPolynomial::zero(var);

        if lambda.contains(1) {
            // puncture: ⟨p_1 ∏⟩ = Σ (a_j − 1)⟨… p_{a_j−1}/(a_j−1) …⟩
            let rest = lambda.remove_one(1).expect("contains 1");
            for (j, &a) in rest.parts().iter().enumerate() {
                if a >= 2 {
                    acc = &acc + &v(&rest.replace_at(j, a - 1), genus).scale(&int(i64::from(a) - 1));
                }
            }
            return acc;
        }

        if lambda.contains(2) {
            // dilaton: ⟨p_2/2 ∏⟩ = (Σ a_j / 2)⟨∏⟩
            let rest = lambda.remove_one(2).expect("contains 2");
            let factor = Rational::new(rest.size().into(), 2.into());
            return v(&rest, genus).scale(&factor);
        }

        let top = lambda.largest().expect("nonempty");
        let m = top - 2;
        let mu = lambda.remove_one(top).expect("largest part present");
        let (shift_linear, shift_double) = match flavor {
            Flavor::Thin => (1, 2),
            Flavor::Fat => (0, 1),
        };

        for (j, &a) in mu.parts().iter().enumerate() {
            acc = &acc + &v(&mu.replace_at(j, a + m), genus).scale(&int(i64::from(a + m)));
        }

        let x = GenusPolynomial::monomial(var, int(2 * i64::from(m)), 1);
        acc = &acc + &(&x * &v(&mu.with_parts(&[m]), genus - shift_linear));

        let n = mu.len();
        for k in 1..m {
            let weight = int(i64::from(k * (m - k)));
            let mut inner = v(&mu.with_parts(&[k, m - k]), genus - shift_double);
            for mask in 0..(1u64 << n) {
                let left = mu.select(mask).with_parts(&[k]);
                let right = mu.select(!mask & ((1u64 << n) - 1)).with_parts(&[m - k]);
                inner = &inner + &self.split_sum(&left, &right, genus, flavor);
            }
            acc = &acc + &inner.scale(&weight);
        }

        acc.scale(&Rational::new(1.into(), (i64::from(top)).into()))
    }

    /// Σ over genus splits of V(left, g1)·V(right, g2).
    fn split_sum(&self, left: &Partition, right: &Partition, genus: i64, flavor: Flavor) -> GenusPolynomial {
        match flavor {
            Flavor::Thin => {
                // g1 is forced by the selection rule; g1 + g2 = g − 1
                let Some(g1) = thin_genus(left) else { return GenusPolynomial::zero(Var::N) };
                let g2 = genus - 1 - i64::from(g1);
                let b = self.thin(right, g2);
                if b.is_zero() {
                    return b;
                }
                &self.thin(left, i64::from(g1)) * &b
            }
            Flavor::Fat => {
                let mut acc = GenusPolynomial::zero(Var::T);
                for g1 in 0..=genus {
                    let a = self.fat(left, g1);
                    if a.is_zero() {
                        continue;
                    }
                    acc = &acc + &(&a * &self.fat(right, genus - g1));
                }
                acc
            }
        }
    }
}

fn record(key: &CorrelatorKey, poly: &GenusPolynomial) -> Value {
    json!({
        "parts": key.partition.parts(),
        "genus": key.genus,
        "flavor": key.flavor.name(),
        "poly": poly.to_json(),
    })
}

fn parse_record(line: &str) -> Option<(CorrelatorKey, GenusPolynomial)> {
    let v: Value = serde_json::from_str(line).ok()?;
    let parts = v
        .get("parts")?
        .as_array()?
        .iter()
        .map(|p| p.as_u64().and_then(|p| u32::try_from(p).ok()))
        .collect::<Option<Vec<u32>>>()?;
    let partition = Partition::new(parts).ok()?;
    let genus = u32::try_from(v.get("genus")?.as_u64()?).ok()?;
    let flavor = Flavor::parse(v.get("flavor")?.as_str()?)?;
    let poly = GenusPolynomial::from_json(v.get("poly")?).ok()?;
    if poly.var() != flavor.var() {
        return None;
    }
    Some((CorrelatorKey { partition, genus, flavor }, poly))
}

/// Convenience: `Σ c_i N^{e_i}` from `(numerator, denominator, exponent)` triples.
pub fn poly(var: Var, terms: &[(i64, i64, u32)]) -> GenusPolynomial {
    GenusPolynomial::from_terms(var, terms.iter().map(|&(n, d, e)| (Rational::new(n.into(), d.into()), e)))
}
