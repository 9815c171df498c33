//! Brute-force correlators from Wick pairings of trace darts.
//!
//! A product `∏ tr M^{a_i}` is modelled by `d = |λ|` darts; `σ` cycles the
//! darts of each trace, a pairing `α` is a fixed-point-free involution, and each
//! pairing contributes `N^{c(σ∘α)}` where `c` counts cycles (faces).

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::exactmath::{GenusPolynomial, Partition, Rational, Var};

pub const DEFAULT_MAX_DARTS: usize = 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WickError {
    #[error("{darts} darts exceeds the enumeration limit of {limit}")]
    TooManyDarts { darts: usize, limit: usize },
}

/// Darts of a product of traces: `sigma` advances within a trace,
/// `component_of` names the trace a dart belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DartStructure {
    pub sigma: Vec<usize>,
    pub component_of: Vec<usize>,
    pub traces: usize,
}

impl DartStructure {
    pub fn new(lambda: &Partition) -> Self {
        Self::from_traces(lambda.parts())
    }

    /// Traces in the given order (need not be sorted).
    pub fn from_traces(traces: &[u32]) -> Self {
        let d = traces.iter().map(|&a| a as usize).sum();
        let mut sigma = vec![0; d];
        let mut component_of = vec![0; d];
        let mut start = 0;
        for (i, &a) in traces.iter().enumerate() {
            let a = a as usize;
            for k in 0..a {
                sigma[start + k] = start + (k + 1) % a;
                component_of[start + k] = i;
            }
            start += a;
        }
        DartStructure { sigma, component_of, traces: traces.len() }
    }

    pub fn darts(&self) -> usize {
        self.sigma.len()
    }
}

/// A perfect matching of darts, stored as an involution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    pub alpha: Vec<usize>,
}

impl Pairing {
    pub fn is_valid(&self) -> bool {
        self.alpha.iter().enumerate().all(|(x, &y)| y != x && y < self.alpha.len() && self.alpha[y] == x)
    }
}

/// `p ∘ q`: apply `q`, then `p`.
pub fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&x| p[x]).collect()
}

pub fn cycle_count(perm: &[usize]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut cycles = 0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
        }
    }
    cycles
}

/// Number of faces `c(σ∘α)`.
pub fn face_count(darts: &DartStructure, pairing: &Pairing) -> usize {
    let sigma = &darts.sigma;
    let alpha = &pairing.alpha;
    let mut seen = vec![false; sigma.len()];
    let mut cycles = 0;
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = sigma[alpha[x]];
        }
    }
    cycles
}

/// Union-find over traces with undo, used to prune disconnected pairings early.
struct Components {
    parent: Vec<usize>,
    open: Vec<usize>,
    size: Vec<usize>,
    history: Vec<Undo>,
}

enum Undo {
    Merge { child: usize, root: usize, open_child: usize, open_root: usize },
    Internal { root: usize },
}

impl Components {
    fn new(darts: &DartStructure) -> Self {
        let mut open = vec![0; darts.traces];
        for &c in &darts.component_of {
            open[c] += 1;
        }
        Components { parent: (0..darts.traces).collect(), open, size: vec![1; darts.traces], history: Vec::new() }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Records an edge between traces `a` and `b`; returns the root and whether
    /// its component has just been closed off.
    fn link(&mut self, a: usize, b: usize) -> (usize, bool) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            self.open[ra] -= 2;
            self.history.push(Undo::Internal { root: ra });
            return (ra, self.open[ra] == 0);
        }
        let (root, child) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.history.push(Undo::Merge { child, root, open_child: self.open[child], open_root: self.open[root] });
        self.parent[child] = root;
        self.size[root] += self.size[child];
        self.open[root] = self.open[root] + self.open[child] - 2;
        (root, self.open[root] == 0)
    }

    fn undo(&mut self) {
        match self.history.pop().expect("undo without link") {
            Undo::Internal { root } => self.open[root] += 2,
            Undo::Merge { child, root, open_child, open_root } => {
                self.parent[child] = child;
                self.size[root] -= self.size[child];
                self.open[child] = open_child;
                self.open[root] = open_root;
            }
        }
    }
}

struct Enumeration<'a> {
    darts: &'a DartStructure,
    connected_only: bool,
    alpha: Vec<usize>,
    matched: Vec<bool>,
    components: Components,
    counts: Vec<u64>,
}

impl<'a> Enumeration<'a> {
    fn new(darts: &'a DartStructure, connected_only: bool) -> Self {
        let d = darts.darts();
        Enumeration {
            darts,
            connected_only,
            alpha: vec![usize::MAX; d],
            matched: vec![false; d],
            components: Components::new(darts),
            counts: vec![0; d + 1],
        }
    }

    fn pair(&mut self, x: usize, y: usize) -> bool {
        self.alpha[x] = y;
        self.alpha[y] = x;
        self.matched[x] = true;
        self.matched[y] = true;
        let (root, closed) = self.components.link(self.darts.component_of[x], self.darts.component_of[y]);
        // a closed component that is not everything can never become connected
        !(self.connected_only && closed && self.components.size[root] < self.darts.traces)
    }

    fn unpair(&mut self, x: usize, y: usize) {
        self.components.undo();
        self.matched[x] = false;
        self.matched[y] = false;
    }

    fn run(&mut self) {
        let Some(x) = self.matched.iter().position(|m| !m) else {
            let faces = face_count(self.darts, &Pairing { alpha: self.alpha.clone() });
            self.counts[faces] += 1;
            return;
        };
        for y in x + 1..self.alpha.len() {
            if self.matched[y] {
                continue;
            }
            if self.pair(x, y) {
                self.run();
            }
            self.unpair(x, y);
        }
    }
}

/// Brute-force oracle with a configurable dart cap.
#[derive(Clone, Copy, Debug)]
pub struct WickOracle {
    pub max_darts: usize,
    pub parallel: bool,
}

impl Default for WickOracle {
    fn default() -> Self {
        WickOracle { max_darts: DEFAULT_MAX_DARTS, parallel: false }
    }
}

impl WickOracle {
    pub fn new(max_darts: usize) -> Self {
        WickOracle { max_darts, parallel: false }
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    /// Pairing counts indexed by face number.
    fn face_histogram(&self, traces: &[u32], connected_only: bool) -> Result<Vec<u64>, WickError> {
        let darts = DartStructure::from_traces(traces);
        let d = darts.darts();
        if d > self.max_darts {
            return Err(WickError::TooManyDarts { darts: d, limit: self.max_darts });
        }
        if d == 0 || d % 2 == 1 {
            return Ok(vec![0; d + 1]);
        }
        let branch = |&(y, weight): &(usize, u64)| {
            let mut e = Enumeration::new(&darts, connected_only);
            if e.pair(0, y) {
                e.run();
            }
            e.counts.into_iter().map(|c| c * weight).collect::<Vec<u64>>()
        };
        let partners = first_partners(traces);
        let partials: Vec<Vec<u64>> = if self.parallel {
            partners.par_iter().map(branch).collect()
        } else {
            partners.iter().map(branch).collect()
        };
        let mut counts = vec![0; d + 1];
        for part in partials {
            for (c, p) in counts.iter_mut().zip(part) {
                *c += p;
            }
        }
        Ok(counts)
    }

    /// `⟨∏ tr M^{a_i}⟩` = Σ over all pairings of `N^{faces}`.
    pub fn gaussian_moment(&self, lambda: &Partition) -> Result<GenusPolynomial, WickError> {
        Ok(histogram_poly(&self.face_histogram(lambda.parts(), false)?))
    }

    /// Same sum restricted to pairings that connect all traces.
    pub fn connected_moment(&self, lambda: &Partition) -> Result<GenusPolynomial, WickError> {
        Ok(histogram_poly(&self.face_histogram(lambda.parts(), true)?))
    }

    /// Connected moment with the traces taken in the given order.
    pub fn connected_moment_ordered(&self, traces: &[u32]) -> Result<GenusPolynomial, WickError> {
        Ok(histogram_poly(&self.face_histogram(traces, true)?))
    }

    /// `(g, V)` with `g = |λ|/2 − ℓ + 1` and `V = connected_moment / ∏ λ_i`,
    /// directly comparable with the thin recursion.
    pub fn oracle_correlator(&self, lambda: &Partition) -> Result<(i64, GenusPolynomial), WickError> {
        let genus = (i64::from(lambda.size()) - 2 * lambda.len() as i64 + 2).div_euclid(2);
        let connected = self.connected_moment(lambda)?;
        let scale = Rational::new(BigInt::from(1), lambda.part_product());
        Ok((genus, connected.scale(&scale)))
    }

    /// Connected moment by Möbius inversion of gaussian moments over set
    /// partitions of the traces (the cumulant route).
    pub fn connected_via_cumulants(&self, lambda: &Partition) -> Result<GenusPolynomial, WickError> {
        let parts = lambda.parts();
        let mut total = GenusPolynomial::zero(Var::N);
        for blocks in set_partitions(parts.len()) {
            let mut term = GenusPolynomial::constant(Var::N, Rational::from_integer(mobius(blocks.len())));
            for block in &blocks {
                let sub = Partition::new(block.iter().map(|&i| parts[i])).expect("positive parts");
                term = &term * &self.gaussian_moment(&sub)?;
                if term.is_zero() {
                    break;
                }
            }
            total = &total + &term;
        }
        Ok(total)
    }
}

/// Representative partners of dart 0 with orbit sizes.
///
/// Rotating any trace other than the first, or swapping two such traces of equal
/// length, commutes with `σ`; so all darts of the other traces of a given length
/// are equivalent partners for dart 0.
fn first_partners(traces: &[u32]) -> Vec<(usize, u64)> {
    let first = traces[0] as usize;
    let mut out: Vec<(usize, u64)> = (1..first).map(|y| (y, 1)).collect();
    let mut start = first;
    let mut seen = Vec::new();
    for &a in &traces[1..] {
        if !seen.contains(&a) {
            seen.push(a);
            let copies = traces[1..].iter().filter(|&&b| b == a).count() as u64;
            out.push((start, copies * u64::from(a)));
        }
        start += a as usize;
    }
    out
}

/// μ(π, 1̂) = (−1)^{k−1}(k−1)! for a set partition with `k` blocks.
fn mobius(blocks: usize) -> BigInt {
    let f: BigInt = (1..blocks).map(BigInt::from).product();
    if blocks.is_multiple_of(2) {
        -f
    } else {
        f
    }
}

fn histogram_poly(counts: &[u64]) -> GenusPolynomial {
    GenusPolynomial::from_terms(
        Var::N,
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(f, &c)| (Rational::from_integer(BigInt::from(c)), f as u32)),
    )
}

/// All set partitions of `{0, …, n−1}` via restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, labels: &mut Vec<usize>, blocks: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            let mut bs = vec![Vec::new(); blocks];
            for (x, &b) in labels.iter().enumerate() {
                bs[b].push(x);
            }
            out.push(bs);
            return;
        }
        for b in 0..=blocks {
            labels.push(b);
            rec(i + 1, n, labels, blocks.max(b + 1), out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::with_capacity(n), 0, &mut out);
    out
}
