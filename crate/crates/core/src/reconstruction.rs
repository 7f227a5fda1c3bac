//! Inverse problems answered through language queries alone: edge
//! adjacency, right angles, rational angles and angle estimates.
//!
//! Everything here talks to a [`SpectrumOracle`], which exposes membership of
//! words over an opaque alphabet and nothing about the table's geometry.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{normalize, EdgeLabel, LabeledPolygon, Point2};
use crate::language::{max_alternation, Language};
use crate::sturmian::{gcd, insertion_strings, rotations};

/// Membership queries on a bounce language over the letters `0..alphabet().len()`.
pub trait SpectrumOracle: Sync {
    fn alphabet(&self) -> &[EdgeLabel];

    fn contains(&self, word: &[usize]) -> Result<bool>;

    /// Longest word the oracle can answer for, if bounded.
    fn max_len(&self) -> Option<usize> {
        None
    }

    /// Letters `e` with `word·e` in the language.
    fn list_extensions(&self, word: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        let mut w = word.to_vec();
        w.push(0);
        for e in 0..self.alphabet().len() {
            if word.last() == Some(&e) {
                continue;
            }
            *w.last_mut().unwrap() = e;
            if self.contains(&w)? {
                out.push(e);
            }
        }
        Ok(out)
    }

    /// Letters `e` with `e·word` in the language.
    fn list_prefixes(&self, word: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        let mut w = Vec::with_capacity(word.len() + 1);
        w.push(0);
        w.extend_from_slice(word);
        for e in 0..self.alphabet().len() {
            if word.first() == Some(&e) {
                continue;
            }
            w[0] = e;
            if self.contains(&w)? {
                out.push(e);
            }
        }
        Ok(out)
    }

    fn letter(&self, label: &str) -> Result<usize> {
        self.alphabet()
            .iter()
            .position(|l| l.as_str() == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn format(&self, word: &[usize]) -> String {
        word.iter()
            .map(|&e| self.alphabet()[e].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Wraps a table's language behind an alphabet sorted by label text, so
/// letter indices carry no trace of the boundary order.
#[derive(Debug)]
pub struct PolygonOracle<'a> {
    language: Language<'a>,
    alphabet: Vec<EdgeLabel>,
    /// `to_edge[letter]` is the hidden edge index.
    to_edge: Vec<usize>,
}

impl<'a> PolygonOracle<'a> {
    pub fn new(poly: &'a LabeledPolygon) -> Self {
        let mut order: Vec<usize> = (0..poly.len()).collect();
        order.sort_by(|&i, &j| poly.label(i).as_str().cmp(poly.label(j).as_str()));
        Self::with_order(poly, order)
    }

    /// Letters in the given edge order; `order` must be a permutation.
    pub fn with_order(poly: &'a LabeledPolygon, order: Vec<usize>) -> Self {
        assert_eq!(order.iter().collect::<BTreeSet<_>>().len(), poly.len());
        PolygonOracle {
            language: Language::new(poly),
            alphabet: order.iter().map(|&e| poly.label(e).clone()).collect(),
            to_edge: order,
        }
    }

    pub fn queries(&self) -> usize {
        self.language.cached_queries()
    }
}

impl SpectrumOracle for PolygonOracle<'_> {
    fn alphabet(&self) -> &[EdgeLabel] {
        &self.alphabet
    }

    fn contains(&self, word: &[usize]) -> Result<bool> {
        let mut edges = Vec::with_capacity(word.len());
        for &l in word {
            edges.push(
                *self
                    .to_edge
                    .get(l)
                    .ok_or_else(|| Error::UnknownLabel(format!("#{l}")))?,
            );
        }
        self.language.contains(&edges)
    }
}

fn alternating(first: usize, second: usize, len: usize) -> Vec<usize> {
    (0..len).map(|i| if i % 2 == 0 { first } else { second }).collect()
}

fn reversed(w: &[usize]) -> Vec<usize> {
    w.iter().rev().copied().collect()
}

/// Every `t` of length `len` with `prefix·t` in the language and `t[0]` not in `avoid`.
fn tails<O: SpectrumOracle + ?Sized>(
    oracle: &O,
    prefix: &[usize],
    len: usize,
    avoid: &[usize],
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut stack = vec![prefix.to_vec()];
    while let Some(w) = stack.pop() {
        if w.len() == prefix.len() + len {
            out.push(w[prefix.len()..].to_vec());
            continue;
        }
        let mut ext = oracle.list_extensions(&w)?;
        if w.len() == prefix.len() {
            ext.retain(|e| !avoid.contains(e));
        }
        for &e in ext.iter().rev() {
            let mut x = w.clone();
            x.push(e);
            stack.push(x);
        }
    }
    out.sort();
    Ok(out)
}

/// Every `h` of length `len` with `h·suffix` in the language and its last
/// letter not in `avoid`.
fn heads<O: SpectrumOracle + ?Sized>(
    oracle: &O,
    suffix: &[usize],
    len: usize,
    avoid: &[usize],
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut stack = vec![suffix.to_vec()];
    while let Some(w) = stack.pop() {
        if w.len() == suffix.len() + len {
            out.push(w[..len].to_vec());
            continue;
        }
        let mut pre = oracle.list_prefixes(&w)?;
        if w.len() == suffix.len() {
            pre.retain(|e| !avoid.contains(e));
        }
        for &e in pre.iter().rev() {
            let mut x = Vec::with_capacity(w.len() + 1);
            x.push(e);
            x.extend_from_slice(&w);
            stack.push(x);
        }
    }
    out.sort();
    Ok(out)
}

/// One sequence of a matching family: `head · insertion · tail`, where the
/// insertion is the maximal alternating run of the corner's two letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MatchRecord {
    pub head: Vec<usize>,
    pub insertion: Vec<usize>,
    pub tail: Vec<usize>,
}

impl MatchRecord {
    pub fn word(&self) -> Vec<usize> {
        let mut w = self.head.clone();
        w.extend_from_slice(&self.insertion);
        w.extend_from_slice(&self.tail);
        w
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchingFamily {
    pub pair: (usize, usize),
    pub depth: usize,
    /// Longest alternating run at the corner.
    pub k: usize,
    pub sequences: Vec<MatchRecord>,
    pub closed: bool,
}

impl MatchingFamily {
    pub fn size(&self) -> usize {
        self.sequences.len()
    }

    pub fn total_insertion(&self) -> usize {
        self.sequences.iter().map(|s| s.insertion.len()).sum()
    }

    pub fn insertion_lengths(&self) -> Vec<usize> {
        self.sequences.iter().map(|s| s.insertion.len()).collect()
    }

    /// Checks alternation, the start-letter rule, length bounds and the
    /// head/tail match around the cycle.
    pub fn is_consistent(&self) -> bool {
        let (a, b) = self.pair;
        let m = self.sequences.len();
        if m == 0 {
            return false;
        }
        let mut last_letter = None;
        for s in self.sequences.iter().cycle().take(2 * m) {
            if !s.insertion.iter().all(|&x| x == a || x == b)
                || s.insertion.windows(2).any(|p| p[0] == p[1])
            {
                return false;
            }
            if s.insertion.len() + 1 < self.k || s.insertion.len() > self.k {
                return false;
            }
            if let (Some(&first), Some(prev)) = (s.insertion.first(), last_letter) {
                if first == prev {
                    return false;
                }
            }
            if let Some(&l) = s.insertion.last() {
                last_letter = Some(l);
            }
        }
        let closes = |i: usize, j: usize| reversed(&self.sequences[i].tail) == self.sequences[j].head;
        (0..m - 1).all(|i| closes(i, i + 1)) && (!self.closed || closes(m - 1, 0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Chain states expanded per start sequence.
    pub max_states: usize,
    /// Start sequences tried per depth.
    pub max_starts: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_states: 20_000,
            max_starts: 64,
        }
    }
}

/// Result of looking for a closed family from one start sequence.
enum ChainOutcome {
    Closed(Vec<MatchRecord>),
    Open,
    Exhausted,
}

/// Where a chain stands between two records.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct State {
    head: Vec<usize>,
    last: Option<usize>,
    /// Tail that would make the next record the reverse of the previous one.
    forbid: Option<Vec<usize>>,
}

struct FamilySearch<'o, O: SpectrumOracle + ?Sized> {
    oracle: &'o O,
    a: usize,
    b: usize,
    k: usize,
    depth: usize,
    budget: SearchBudget,
}

impl<O: SpectrumOracle + ?Sized> FamilySearch<'_, O> {
    fn other(&self, x: usize) -> usize {
        if x == self.a {
            self.b
        } else {
            self.a
        }
    }

    /// Insertions allowed after a run that ended with `last`.
    fn insertions(&self, last: Option<usize>) -> Vec<Vec<usize>> {
        let firsts: Vec<usize> = match last {
            Some(l) => vec![self.other(l)],
            None => vec![self.b, self.a],
        };
        let mut out = Vec::new();
        for len in [self.k, self.k.saturating_sub(1)] {
            if len == 0 {
                if !out.contains(&Vec::new()) {
                    out.push(Vec::new());
                }
                continue;
            }
            for &f in &firsts {
                let ins = alternating(f, self.other(f), len);
                if !out.contains(&ins) {
                    out.push(ins);
                }
            }
        }
        out
    }

    fn starts(&self) -> Result<Vec<MatchRecord>> {
        let avoid = [self.a, self.b];
        let mut out = Vec::new();
        for first in [self.b, self.a] {
            let ins = alternating(first, self.other(first), self.k);
            for tail in tails(self.oracle, &ins, self.depth, &avoid)? {
                let mut mid = ins.clone();
                mid.extend_from_slice(&tail);
                for head in heads(self.oracle, &mid, self.depth, &avoid)? {
                    out.push(MatchRecord {
                        head,
                        insertion: ins.clone(),
                        tail: tail.clone(),
                    });
                    if out.len() >= self.budget.max_starts {
                        return Ok(out);
                    }
                }
            }
        }
        Ok(out)
    }

    fn initial(start: &MatchRecord) -> State {
        State {
            head: reversed(&start.tail),
            last: start.insertion.last().copied(),
            forbid: start.insertion.is_empty().then(|| reversed(&start.head)),
        }
    }

    /// Records that can follow `state`, each with the state it leads to.
    fn successors(&self, state: &State) -> Result<Vec<(MatchRecord, State)>> {
        let avoid = [self.a, self.b];
        let mut out = Vec::new();
        for ins in self.insertions(state.last) {
            let mut prefix = state.head.clone();
            prefix.extend_from_slice(&ins);
            for tail in tails(self.oracle, &prefix, self.depth, &avoid)? {
                if ins.is_empty() && state.forbid.as_ref() == Some(&tail) {
                    continue;
                }
                let next = State {
                    head: reversed(&tail),
                    last: ins.last().copied().or(state.last),
                    forbid: ins.is_empty().then(|| reversed(&state.head)),
                };
                let rec = MatchRecord {
                    head: state.head.clone(),
                    insertion: ins.clone(),
                    tail,
                };
                out.push((rec, next));
            }
        }
        Ok(out)
    }

    /// Whether a chain standing at `state` may close onto `start`.
    fn closes(start: &MatchRecord, state: &State) -> bool {
        let start_ok = start.insertion.first().is_none_or(|&f| state.last != Some(f));
        state.head == start.head && start_ok
    }

    /// Shortest chain from `start` back to itself.
    fn close_from(&self, start: &MatchRecord) -> Result<ChainOutcome> {
        let first = Self::initial(start);
        let mut parents: Vec<(usize, MatchRecord)> = Vec::new();
        let mut queue = VecDeque::new();
        let mut seen = HashSet::new();
        seen.insert(first.clone());
        queue.push_back((first, usize::MAX));
        let mut expanded = 0;
        while let Some((state, parent)) = queue.pop_front() {
            // can the chain close onto the start here?
            if Self::closes(start, &state) {
                let mut chain = vec![start.clone()];
                let mut tail_chain = Vec::new();
                let mut p = parent;
                while p != usize::MAX {
                    tail_chain.push(parents[p].1.clone());
                    p = parents[p].0;
                }
                tail_chain.reverse();
                chain.extend(tail_chain);
                return Ok(ChainOutcome::Closed(chain));
            }
            expanded += 1;
            if expanded > self.budget.max_states {
                return Ok(ChainOutcome::Exhausted);
            }
            for (rec, next) in self.successors(&state)? {
                if !seen.insert(next.clone()) {
                    continue;
                }
                parents.push((parent, rec));
                queue.push_back((next, parents.len() - 1));
            }
        }
        Ok(ChainOutcome::Open)
    }
}

impl<O: SpectrumOracle + ?Sized> FamilySearch<'_, O> {
    fn new(oracle: &O, a: usize, b: usize, depth: usize, budget: SearchBudget) -> Result<FamilySearch<'_, O>> {
        if a == b || a >= oracle.alphabet().len() || b >= oracle.alphabet().len() {
            return Err(Error::Precondition(format!("({a}, {b}) is not a pair of distinct letters")));
        }
        if depth == 0 {
            return Err(Error::Precondition("matching needs depth >= 1".into()));
        }
        let k = max_alternation(oracle, a, b, 4 * depth + 8)?;
        Ok(FamilySearch {
            oracle,
            a,
            b,
            k,
            depth,
            budget,
        })
    }

    fn family(&self, mut sequences: Vec<MatchRecord>) -> MatchingFamily {
        // A cycle with an odd count or odd total winds once around a
        // half-turn; the family proper goes around twice.
        let total: usize = sequences.iter().map(|r| r.insertion.len()).sum();
        if sequences.len() % 2 == 1 || total % 2 == 1 {
            let again = sequences.clone();
            sequences.extend(again);
        }
        MatchingFamily {
            pair: (self.a, self.b),
            depth: self.depth,
            k: self.k,
            sequences,
            closed: true,
        }
    }
}

/// Chains matching sequences around the corner of `a` and `b` at one depth
/// and returns the shortest closed family. `Ok(None)` means no start closed
/// within budget and no search ran out of budget.
pub fn find_matching_family<O: SpectrumOracle + ?Sized>(
    oracle: &O,
    a: usize,
    b: usize,
    depth: usize,
    budget: SearchBudget,
) -> Result<Option<MatchingFamily>> {
    use rayon::prelude::*;
    let search = FamilySearch::new(oracle, a, b, depth, budget)?;
    let starts = search.starts()?;
    let outcomes: Vec<ChainOutcome> = starts
        .par_iter()
        .map(|s| search.close_from(s))
        .collect::<Result<_>>()?;
    let mut best: Option<Vec<MatchRecord>> = None;
    let mut exhausted = 0;
    for outcome in outcomes {
        match outcome {
            ChainOutcome::Closed(chain) => {
                let key = |c: &[MatchRecord]| (c.len(), c.iter().map(|r| r.insertion.len()).sum::<usize>());
                if best.as_ref().is_none_or(|b| key(&chain) < key(b)) {
                    best = Some(chain);
                }
            }
            ChainOutcome::Open => {}
            ChainOutcome::Exhausted => exhausted += 1,
        }
    }
    match best {
        Some(chain) => Ok(Some(search.family(chain))),
        None if exhausted > 0 => Err(Error::BudgetExhausted { explored: exhausted }),
        None => Ok(None),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngleKind {
    /// Family size and insertion total held still over the last three depths.
    ExactRational { p: u64, q: u64 },
    Estimate {
        num_sequences: usize,
        total_insertion: usize,
        depth: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleEstimate {
    pub pair: (usize, usize),
    /// Radians.
    pub value: f64,
    pub kind: AngleKind,
    /// Deepest head/tail length the answer was checked at.
    pub certified_depth: usize,
    /// `(depth, size, total)` of the family found at each depth.
    pub history: Vec<(usize, usize, usize)>,
    pub notes: Vec<String>,
}

impl AngleEstimate {
    pub fn is_exact(&self) -> bool {
        matches!(self.kind, AngleKind::ExactRational { .. })
    }

    /// Sequence count of the family the value came from.
    pub fn num_sequences(&self) -> usize {
        match self.kind {
            AngleKind::ExactRational { p, .. } => 2 * p as usize,
            AngleKind::Estimate { num_sequences, .. } => num_sequences,
        }
    }
}

/// Consecutive depths whose family must agree before a rational angle is declared.
pub const STABLE_DEPTHS: usize = 3;

/// Runs the family search at every depth up to `depth`. When the last
/// [`STABLE_DEPTHS`] families agree in size and insertion total the angle is
/// reported as the rational `π·size/total`; otherwise the largest family
/// found gives the estimate.
pub fn estimate_angle<O: SpectrumOracle + ?Sized>(
    oracle: &O,
    a: usize,
    b: usize,
    depth: usize,
    budget: SearchBudget,
) -> Result<Option<AngleEstimate>> {
    if depth == 0 {
        return Err(Error::Precondition("angle estimation needs depth >= 1".into()));
    }
    let mut history = Vec::new();
    let mut notes = Vec::new();
    let mut per_depth = Vec::new();
    for n in 1..=depth {
        match find_matching_family(oracle, a, b, n, budget) {
            Ok(Some(f)) => {
                history.push((n, f.size(), f.total_insertion()));
                per_depth.push(Some((f.size(), f.total_insertion())));
            }
            Ok(None) => per_depth.push(None),
            Err(Error::BudgetExhausted { explored }) => {
                notes.push(format!("depth {n}: budget exhausted on {explored} starts"));
                per_depth.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let pair = (a, b);
    let tail = &per_depth[depth.saturating_sub(STABLE_DEPTHS)..];
    if tail.len() == STABLE_DEPTHS && tail.iter().all(|x| x.is_some() && *x == tail[0]) {
        let (size, total) = tail[0].unwrap();
        let g = gcd(size as u64, total as u64);
        let (p, q) = (size as u64 / g, total as u64 / g);
        return Ok(Some(AngleEstimate {
            pair,
            value: PI * p as f64 / q as f64,
            kind: AngleKind::ExactRational { p, q },
            certified_depth: depth,
            history,
            notes,
        }));
    }
    let Some(&(n, size, total)) = history.iter().max_by_key(|(n, size, _)| (*size, *n)) else {
        if notes.is_empty() {
            return Ok(None);
        }
        return Err(Error::BudgetExhausted { explored: notes.len() });
    };
    notes.push(format!("family size not stable over the last {STABLE_DEPTHS} depths"));
    Ok(Some(AngleEstimate {
        pair,
        value: PI * size as f64 / total as f64,
        kind: AngleKind::Estimate {
            num_sequences: size,
            total_insertion: total,
            depth: n,
        },
        certified_depth: depth,
        history,
        notes,
    }))
}

/// Looks for a closed family whose insertion strings are those of the
/// rational angle `π·p/q`, up to rotation and swapping the two letters, at
/// every depth from 1 to `depth`.
pub fn verify_rational_angle<O: SpectrumOracle + ?Sized>(
    oracle: &O,
    a: usize,
    b: usize,
    p: u64,
    q: u64,
    depth: usize,
    budget: SearchBudget,
) -> Result<bool> {
    let pattern = insertion_strings(p, q)?;
    let spell = |x: usize, y: usize| -> Vec<Vec<usize>> {
        pattern
            .strings
            .iter()
            .map(|s| s.chars().map(|c| if c == 'B' { x } else { y }).collect())
            .collect()
    };
    let mut targets: Vec<Vec<Vec<usize>>> = Vec::new();
    for spelled in [spell(b, a), spell(a, b)] {
        for rot in rotations(&spelled) {
            if !targets.contains(&rot) {
                targets.push(rot);
            }
        }
    }
    for n in 1..=depth {
        let search = FamilySearch::new(oracle, a, b, n, budget)?;
        if !search.has_pattern(&targets)? {
            return Ok(false);
        }
    }
    Ok(true)
}

impl<O: SpectrumOracle + ?Sized> FamilySearch<'_, O> {
    /// Depth-first search for a closed chain spelling one of `targets`.
    fn has_pattern(&self, targets: &[Vec<Vec<usize>>]) -> Result<bool> {
        let avoid = [self.a, self.b];
        let m = targets[0].len();
        let mut expanded = 0;
        for target in targets {
            let first = &target[0];
            // any head and tail around the first insertion can start the chain
            let mut starts = Vec::new();
            for tail in tails(self.oracle, first, self.depth, &avoid)? {
                let mut mid = first.clone();
                mid.extend_from_slice(&tail);
                for head in heads(self.oracle, &mid, self.depth, &avoid)? {
                    starts.push(MatchRecord {
                        head,
                        insertion: first.clone(),
                        tail: tail.clone(),
                    });
                }
            }
            for start in starts {
                let mut stack = vec![(1usize, reversed(&start.tail), reversed(&start.head))];
                while let Some((i, head, prev_head)) = stack.pop() {
                    if i == m {
                        if head == start.head {
                            return Ok(true);
                        }
                        continue;
                    }
                    expanded += 1;
                    if expanded > self.budget.max_states * self.budget.max_starts {
                        return Err(Error::BudgetExhausted { explored: expanded });
                    }
                    let ins = &target[i];
                    let mut prefix = head.clone();
                    prefix.extend_from_slice(ins);
                    for tail in tails(self.oracle, &prefix, self.depth, &avoid)? {
                        if ins.is_empty() && target[i - 1].is_empty() && tail == prev_head {
                            continue;
                        }
                        stack.push((i + 1, reversed(&tail), reversed(&head)));
                    }
                }
            }
        }
        Ok(false)
    }
}

/// Looks for a single nested chain `E_n…E_1 A B E_1…E_n` of palindromic
/// words for every `n` up to `depth`.
pub fn detect_right_angle<O: SpectrumOracle + ?Sized>(oracle: &O, a: usize, b: usize, depth: usize) -> Result<bool> {
    let mut stack = vec![vec![a, b]];
    while let Some(w) = stack.pop() {
        if w.len() == 2 * depth + 2 {
            return Ok(true);
        }
        for e in 0..oracle.alphabet().len() {
            if e == w[0] || e == w[w.len() - 1] {
                continue;
            }
            let mut x = Vec::with_capacity(w.len() + 2);
            x.push(e);
            x.extend_from_slice(&w);
            x.push(e);
            if oracle.contains(&x)? {
                stack.push(x);
            }
        }
    }
    Ok(false)
}

/// Tolerance on the raw angle sum of a reconstructed triangle.
pub const TRIANGLE_SUM_TOL: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct TriangleReconstruction {
    /// Estimates for the corners `(0,1)`, `(1,2)`, `(0,2)`.
    pub estimates: Vec<AngleEstimate>,
    /// Corner angles after forcing the sum to π, in the same order.
    pub angles: [f64; 3],
    /// Normalized triangle with edges labelled in the recovered cyclic order.
    pub triangle: LabeledPolygon,
}

/// Estimates the three corner angles of a triangular table and rebuilds the
/// triangle up to similarity and reflection.
///
/// The residual of the angle sum is shared out in proportion to each
/// estimate's expected error, which scales like `θ²/m` for a family of `m`
/// sequences; certified rational corners absorb none of it.
pub fn reconstruct_triangle<O: SpectrumOracle + ?Sized>(
    oracle: &O,
    depth: usize,
    budget: SearchBudget,
) -> Result<TriangleReconstruction> {
    let labels = oracle.alphabet();
    if labels.len() != 3 {
        return Err(Error::Precondition(format!(
            "a triangle has three edges, the oracle has {}",
            labels.len()
        )));
    }
    let corners = [(0, 1), (1, 2), (0, 2)];
    let mut estimates = Vec::with_capacity(3);
    for &(a, b) in &corners {
        let est = estimate_angle(oracle, a, b, depth, budget)?.ok_or_else(|| {
            Error::Inconsistent(format!("no matching family at corner {}", oracle.format(&[a, b])))
        })?;
        estimates.push(est);
    }
    let raw: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let residual = raw.iter().sum::<f64>() - PI;
    if residual.abs() > TRIANGLE_SUM_TOL {
        return Err(Error::Inconsistent(format!(
            "angle estimates sum to {:.6}, off by {residual:+.6}",
            raw.iter().sum::<f64>()
        )));
    }
    let weights: Vec<f64> = estimates
        .iter()
        .map(|e| if e.is_exact() { 0.0 } else { e.value * e.value / e.num_sequences() as f64 })
        .collect();
    let wsum: f64 = weights.iter().sum();
    let angles: [f64; 3] = std::array::from_fn(|i| {
        if wsum > 0.0 {
            raw[i] - residual * weights[i] / wsum
        } else {
            raw[i] * PI / (PI + residual)
        }
    });
    // edge i runs from vertex i to vertex i+1; vertex 1 sits between edges 0
    // and 1, vertex 2 between 1 and 2, vertex 0 between 2 and 0
    let [at1, at2, at0] = angles;
    let side2 = at1.sin() / at2.sin();
    let vertices = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(side2 * at0.cos(), side2 * at0.sin()),
    ];
    let triangle = normalize(&LabeledPolygon::new(vertices, labels.to_vec())?);
    Ok(TriangleReconstruction {
        estimates,
        angles,
        triangle,
    })
}

/// Every word of length `len` in the oracle's language, sorted.
pub fn words_of_len<O: SpectrumOracle + ?Sized>(oracle: &O, len: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if len == 0 {
        return Ok(vec![Vec::new()]);
    }
    let mut stack: Vec<Vec<usize>> = (0..oracle.alphabet().len()).rev().map(|e| vec![e]).collect();
    while let Some(w) = stack.pop() {
        if w.len() == len {
            out.push(w);
            continue;
        }
        for e in oracle.list_extensions(&w)?.into_iter().rev() {
            let mut x = w.clone();
            x.push(e);
            stack.push(x);
        }
    }
    Ok(out)
}

/// Finite-depth grazing test for the witness `w` of the common prefixes
/// `{e0, g}`: some past `v` reaches `e0` and then continues both along `w`
/// and into an edge `f` that itself shares prefixes with `g`, so the
/// limiting line runs on through the vertex of `f` and `g`.
fn grazes<O: SpectrumOracle + ?Sized>(
    oracle: &O,
    w: &[usize],
    e0: usize,
    g: usize,
    depth: usize,
    raw: &BTreeSet<(usize, usize)>,
    known: &BTreeSet<(usize, usize)>,
) -> Result<bool> {
    let mut suffix = vec![e0];
    suffix.extend_from_slice(w);
    for v in heads(oracle, &suffix, 2 * depth, &[])? {
        let mut ve = v.clone();
        ve.push(e0);
        let ext = oracle.list_extensions(&ve)?;
        if ext
            .iter()
            .any(|&f| {
                let key = |x: usize, y: usize| (x.min(y), x.max(y));
                f != e0 && f != g && f != w[0] && raw.contains(&key(f, g)) && !known.contains(&key(f, w[0]))
            })
        {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Adjacency {
    pub depth: usize,
    /// Unordered pairs `(a, b)` with `a < b`.
    pub pairs: BTreeSet<(usize, usize)>,
    /// Cyclic boundary order when every letter has exactly two partners and
    /// the pairs form a single cycle.
    pub cyclic_order: Option<Vec<usize>>,
}

const MAX_ROUNDS: usize = 8;

pub fn adjacency_pairs<O: SpectrumOracle + ?Sized>(oracle: &O, depth: usize) -> Result<Adjacency> {
    use rayon::prelude::*;
    if depth < 2 {
        return Err(Error::Precondition(format!("adjacency needs depth >= 2, got {depth}")));
    }
    // the grazing test reads words of length 3·depth + 1
    if let Some(m) = oracle.max_len() {
        if m < 3 * depth + 1 {
            return Err(Error::Precondition(format!(
                "adjacency at depth {depth} needs words up to length {}, the language stops at {m}",
                3 * depth + 1
            )));
        }
    }
    let words = words_of_len(oracle, depth)?;
    // a billiard language is closed under taking factors
    let broken = words
        .par_iter()
        .map(|w| oracle.contains(&w[1..]).map(|ok| (!ok).then(|| w.clone())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    if let Some(w) = broken {
        return Err(Error::Inconsistent(format!(
            "{} is listed but its suffix is not",
            oracle.format(&w)
        )));
    }
    let prefixes: Vec<Vec<usize>> = words
        .par_iter()
        .map(|w| oracle.list_prefixes(w))
        .collect::<Result<_>>()?;
    let mut raw = BTreeSet::new();
    for pre in &prefixes {
        for (i, &a) in pre.iter().enumerate() {
            for &b in &pre[i + 1..] {
                raw.insert((a.min(b), a.max(b)));
            }
        }
    }
    let pass = |known: &BTreeSet<(usize, usize)>| -> Result<BTreeSet<(usize, usize)>> {
        let found: Vec<Option<(usize, usize)>> = words
            .par_iter()
            .zip(prefixes.par_iter())
            .map(|(w, pre)| -> Result<Option<(usize, usize)>> {
                if pre.len() != 2 {
                    return Ok(None);
                }
                let (a, b) = (pre[0], pre[1]);
                if grazes(oracle, w, a, b, depth, &raw, known)? || grazes(oracle, w, b, a, depth, &raw, known)? {
                    return Ok(None);
                }
                Ok(Some((a.min(b), a.max(b))))
            })
            .collect::<Result<_>>()?;
        Ok(found.into_iter().flatten().collect())
    };
    // Grow from nothing: a branch only excuses a witness once the branch's
    // own pair is known to be a corner.
    let mut pairs = BTreeSet::new();
    for _ in 0..MAX_ROUNDS {
        let next = pass(&pairs)?;
        if next == pairs {
            break;
        }
        pairs = next;
    }
    // Every edge of a simple polygon has exactly two neighbours, so letters
    // left short are completed from the permissive pass.
    let mut degree = vec![0usize; oracle.alphabet().len()];
    for &(a, b) in &pairs {
        degree[a] += 1;
        degree[b] += 1;
    }
    if degree.iter().any(|&d| d < 2) {
        for (a, b) in pass(&raw)? {
            if !pairs.contains(&(a, b)) && degree[a] < 2 && degree[b] < 2 {
                pairs.insert((a, b));
                degree[a] += 1;
                degree[b] += 1;
            }
        }
    }
    let cyclic_order = cycle_from_pairs(oracle.alphabet().len(), &pairs);
    Ok(Adjacency {
        depth,
        pairs,
        cyclic_order,
    })
}

fn cycle_from_pairs(n: usize, pairs: &BTreeSet<(usize, usize)>) -> Option<Vec<usize>> {
    let mut nbrs = vec![Vec::new(); n];
    for &(a, b) in pairs {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    if n < 3 || nbrs.iter().any(|v| v.len() != 2) {
        return None;
    }
    let mut order = vec![0];
    let mut prev = 0;
    let mut cur = nbrs[0][0].min(nbrs[0][1]);
    while cur != 0 {
        order.push(cur);
        let next = if nbrs[cur][0] == prev { nbrs[cur][1] } else { nbrs[cur][0] };
        prev = cur;
        cur = next;
        if order.len() > n {
            return None;
        }
    }
    (order.len() == n).then_some(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::{enumerate_language, LanguageTable};

    fn square() -> LabeledPolygon {
        LabeledPolygon::from_coords(
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
            &["A", "B", "C", "D"],
        )
        .unwrap()
    }

    fn equilateral() -> LabeledPolygon {
        LabeledPolygon::from_coords(
            &[(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)],
            &["A", "B", "C"],
        )
        .unwrap()
    }

    #[test]
    fn square_adjacency() {
        let p = square();
        let o = PolygonOracle::new(&p);
        let adj = adjacency_pairs(&o, 3).unwrap();
        let want: BTreeSet<(usize, usize)> = [(0, 1), (1, 2), (2, 3), (0, 3)].into_iter().collect();
        assert_eq!(adj.pairs, want);
        let order = adj.cyclic_order.unwrap();
        assert_eq!(order.len(), 4);
        for i in 0..4 {
            let (x, y) = (order[i], order[(i + 1) % 4]);
            assert!(want.contains(&(x.min(y), x.max(y))));
        }
        assert!(adjacency_pairs(&o, 1).is_err());
    }

    #[test]
    fn stored_language_matches_live_oracle() {
        let p = square();
        let table = enumerate_language(&p, 7).unwrap();
        let live = adjacency_pairs(&PolygonOracle::new(&p), 2).unwrap();
        let stored = adjacency_pairs(&table, 2).unwrap();
        assert_eq!(live.pairs, stored.pairs);
        assert!(matches!(adjacency_pairs(&table, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn factor_gaps_are_reported() {
        let mut table = enumerate_language(&square(), 7).unwrap();
        let victim = vec![0];
        table.words.remove(&victim);
        assert!(matches!(adjacency_pairs(&table, 2), Err(Error::Inconsistent(_))));
        assert!(!table.factor_violations().is_empty());
        let _ = LanguageTable::from_lines("A,B\n").unwrap();
    }

    #[test]
    fn equilateral_corner_is_a_third_of_pi() {
        let p = equilateral();
        let o = PolygonOracle::new(&p);
        let est = estimate_angle(&o, 0, 1, 6, SearchBudget::default()).unwrap().unwrap();
        assert_eq!(est.kind, AngleKind::ExactRational { p: 1, q: 3 });
        assert!((est.value - PI / 3.0).abs() < 1e-12);
        let fam = find_matching_family(&o, 0, 1, 4, SearchBudget::default()).unwrap().unwrap();
        assert!(fam.closed && fam.is_consistent());
        assert_eq!(fam.size() % 2, 0);
        assert!(verify_rational_angle(&o, 0, 1, 1, 3, 5, SearchBudget::default()).unwrap());
        assert!(!verify_rational_angle(&o, 0, 1, 1, 2, 5, SearchBudget::default()).unwrap());
    }

    #[test]
    fn broken_family_is_inconsistent() {
        let p = equilateral();
        let o = PolygonOracle::new(&p);
        let mut fam = find_matching_family(&o, 0, 1, 3, SearchBudget::default()).unwrap().unwrap();
        let first = fam.sequences[0].insertion[0];
        fam.sequences[0].insertion.push(first);
        assert!(!fam.is_consistent());
    }

    #[test]
    fn right_angles() {
        let sq = square();
        let o = PolygonOracle::new(&sq);
        assert!(detect_right_angle(&o, 0, 1, 4).unwrap());
        let eq = equilateral();
        let o = PolygonOracle::new(&eq);
        assert!(!detect_right_angle(&o, 0, 1, 4).unwrap());
    }

    #[test]
    fn equilateral_reconstruction() {
        let p = equilateral();
        let o = PolygonOracle::new(&p);
        let r = reconstruct_triangle(&o, 6, SearchBudget::default()).unwrap();
        for a in r.angles {
            assert!((a - PI / 3.0).abs() < 1e-9);
        }
        let v = r.triangle.vertices();
        assert!((v[2].x - 0.5).abs() < 1e-9 && (v[2].y.abs() - 3f64.sqrt() / 2.0).abs() < 1e-9);
    }
}
