//! Integer partitions: weakly decreasing sequences of positive parts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;

use super::rational::{factorial, Rational};
use super::ExactMathError;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Builds a partition from parts in any order. Zero parts are rejected.
    pub fn new(parts: impl IntoIterator<Item = u32>) -> Result<Self, ExactMathError> {
        let mut parts: Vec<u32> = parts.into_iter().collect();
        if parts.contains(&0) {
            return Err(ExactMathError::Parse("partition parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition(parts))
    }

    /// Like [`Partition::new`] but drops zero parts instead of rejecting them.
    pub(crate) fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// |λ|
    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    /// ℓ(λ)
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn contains(&self, part: u32) -> bool {
        self.0.contains(&part)
    }

    /// m_j = number of parts equal to j.
    pub fn multiplicity(&self, j: u32) -> usize {
        self.0.iter().filter(|&&p| p == j).count()
    }

    /// Map part → multiplicity, ascending by part.
    pub fn multiplicities(&self) -> BTreeMap<u32, u32> {
        let mut m = BTreeMap::new();
        for &p in &self.0 {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }

    /// ∏_j m_j!
    pub fn multiplicity_factorial(&self) -> BigInt {
        self.multiplicities().values().map(|&m| factorial(m)).product()
    }

    /// ∏ λ_i
    pub fn part_product(&self) -> BigInt {
        self.0.iter().map(|&p| BigInt::from(p)).product()
    }

    /// Removes one occurrence of `part`; `None` if absent.
    pub fn remove_one(&self, part: u32) -> Option<Partition> {
        let pos = self.0.iter().position(|&p| p == part)?;
        let mut parts = self.0.clone();
        parts.remove(pos);
        Some(Partition(parts))
    }

    pub fn with_parts(&self, extra: &[u32]) -> Partition {
        let mut parts = self.0.clone();
        parts.extend_from_slice(extra);
        Partition::from_unsorted(parts)
    }

    /// Replaces the part at `index` by `value` (a zero value drops the part).
    pub fn replace_at(&self, index: usize, value: u32) -> Partition {
        let mut parts = self.0.clone();
        parts[index] = value;
        Partition::from_unsorted(parts)
    }

    /// Sub-multiset picked by a bitmask over part positions.
    pub fn select(&self, mask: u64) -> Partition {
        Partition(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect(),
        )
    }

    /// All partitions of `n`, in reverse lexicographic order ((n) first).
    pub fn all_of(n: u32) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        partitions_rec(n, n, &mut current, &mut out);
        out
    }

    /// All partitions of `n` with every part at least `min_part`.
    pub fn all_of_with_min_part(n: u32, min_part: u32) -> Vec<Partition> {
        Partition::all_of(n)
            .into_iter()
            .filter(|p| p.0.iter().all(|&x| x >= min_part))
            .collect()
    }

    /// Partitions of every size in `1..=max`, grouped by size.
    pub fn all_up_to(max: u32) -> Vec<Partition> {
        (1..=max).flat_map(Partition::all_of).collect()
    }

    /// Power-form rendering, e.g. `3^2,4`.
    pub fn to_power_string(&self) -> String {
        self.multiplicities()
            .iter()
            .map(|(p, m)| if *m == 1 { p.to_string() } else { format!("{p}^{m}") })
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn partitions_rec(rest: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    for p in (1..=max_part.min(rest)).rev() {
        current.push(p);
        partitions_rec(rest - p, p, current, out);
        current.pop();
    }
}

/// z_λ = ∏_j j^{m_j} m_j!
pub fn z_lambda(lambda: &Partition) -> Rational {
    let z: BigInt = lambda
        .multiplicities()
        .iter()
        .map(|(&j, &m)| BigInt::from(j).pow(m) * factorial(m))
        .fold(BigInt::one(), |a, b| a * b);
    Rational::from_integer(z)
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Accepts `3,3,4`, `3^2,4`, and mixtures; whitespace and surrounding parentheses are ignored.
impl FromStr for Partition {
    type Err = ExactMathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| ExactMathError::Parse(format!("invalid partition {s:?}: {why}"));
        let body = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if body.is_empty() {
            return Ok(Partition::empty());
        }
        let mut parts = Vec::new();
        for item in body.split(',') {
            let item = item.trim();
            let (base, count) = match item.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim().parse::<u32>().map_err(|_| bad("bad exponent"))?),
                None => (item, 1),
            };
            let base: u32 = base.parse().map_err(|_| bad("bad part"))?;
            if base == 0 {
                return Err(bad("parts must be positive"));
            }
            parts.extend(std::iter::repeat_n(base, count as usize));
        }
        Partition::new(parts)
    }
}

/// Ordered tuples `(p_1, …, p_k)` of non-negative integers with `Σ p_i = total`.
pub fn weak_compositions(total: u32, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    weak_comp_rec(total, k, &mut current, &mut out);
    out
}

fn weak_comp_rec(rest: u32, slots: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slots == 0 {
        if rest == 0 {
            out.push(current.clone());
        }
        return;
    }
    if slots == 1 {
        current.push(rest);
        out.push(current.clone());
        current.pop();
        return;
    }
    for p in 0..=rest {
        current.push(p);
        weak_comp_rec(rest - p, slots - 1, current, out);
        current.pop();
    }
}
