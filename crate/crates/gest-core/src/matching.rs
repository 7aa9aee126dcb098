//! Spectral graph matching between two story graphs.
//!
//! The pipeline follows classic Spectral Matching: enumerate candidate
//! node pairs, build a symmetric non-negative affinity matrix whose
//! diagonal holds node similarities and whose off-diagonal entries hold
//! edge-pair similarities, take its principal eigenvector by power
//! iteration, and greedily discretize it into a one-to-one
//! [`Assignment`]. [`graph_similarity`] turns the matching objective
//! into a scale-free score in `[0,1]` by normalizing against both
//! self-match objectives.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

// Redundant whenever std reaches the crate graph (tests, feature
// unification), required for the pure no_std build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::embed::{phrase_similarity, EmbeddingTable};
use crate::model::{Event, GestGraph, RefKind, Relation, RelationKind};

/// Weights and solver knobs for the matcher.
///
/// The five node-component weights must be non-negative and sum to 1;
/// `alpha_rel` blends relation-kind similarity against endpoint
/// similarity in [`edge_similarity`]. `max_candidates` caps the number
/// of node pairs (the affinity matrix is dense in the square of that
/// count). `refs_as_edges` additionally turns every same-X ref into a
/// pseudo-edge so coreference structure participates in matching.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    pub w_action: f64,
    pub w_entities: f64,
    pub w_location: f64,
    pub w_time: f64,
    pub w_props: f64,
    pub alpha_rel: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_candidates: usize,
    pub refs_as_edges: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            w_action: 0.4,
            w_entities: 0.3,
            w_location: 0.1,
            w_time: 0.1,
            w_props: 0.1,
            alpha_rel: 0.5,
            tol: 1e-8,
            max_iter: 1000,
            max_candidates: 4096,
            refs_as_edges: false,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), MatchError> {
        let weights = [
            self.w_action,
            self.w_entities,
            self.w_location,
            self.w_time,
            self.w_props,
        ];
        if weights.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
            return Err(MatchError::InvalidConfig(
                "node weights must lie in [0,1]".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MatchError::InvalidConfig(
                "node weights must sum to 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha_rel) {
            return Err(MatchError::InvalidConfig(
                "alpha_rel must lie in [0,1]".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(MatchError::InvalidConfig("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(MatchError::InvalidConfig(
                "max_iter must be positive".into(),
            ));
        }
        if self.max_candidates == 0 {
            return Err(MatchError::InvalidConfig(
                "max_candidates must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Why a matching operation failed.
#[derive(Debug, Clone, PartialEq)]
pub enum MatchError {
    InvalidConfig(String),
    /// `n1·n2` exceeds `MatchConfig::max_candidates`.
    CandidateCapExceeded { candidates: usize, cap: usize },
    /// Power iteration has nothing to converge to.
    AllZeroAffinity,
    /// Brute force would enumerate too many assignments.
    BruteForceTooLarge { min_side: usize, cap: usize },
}

impl fmt::Display for MatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchError::InvalidConfig(reason) => write!(f, "invalid match config: {reason}"),
            MatchError::CandidateCapExceeded { candidates, cap } => write!(
                f,
                "candidate count {candidates} exceeds the cap of {cap} node pairs"
            ),
            MatchError::AllZeroAffinity => f.write_str("affinity matrix is all zero"),
            MatchError::BruteForceTooLarge { min_side, cap } => write!(
                f,
                "brute force limited to {cap} nodes on the smaller side, got {min_side}"
            ),
        }
    }
}

impl core::error::Error for MatchError {}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Greedy best-match average between two entity lists.
///
/// Every entity of the longer list is matched to its most similar
/// counterpart in the other list and the scores are averaged over the
/// longer length; for equal lengths both directions are averaged so the
/// result stays symmetric. Both lists empty → 1, exactly one empty → 0.
fn entity_similarity(table: &EmbeddingTable, a: &[String], b: &[String]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let best_sum = |xs: &[String], ys: &[String]| -> f64 {
        xs.iter()
            .map(|x| {
                ys.iter()
                    .map(|y| phrase_similarity(table, &words(x), &words(y)))
                    .fold(0.0, f64::max)
            })
            .sum()
    };
    match a.len().cmp(&b.len()) {
        core::cmp::Ordering::Greater => best_sum(a, b) / a.len() as f64,
        core::cmp::Ordering::Less => best_sum(b, a) / b.len() as f64,
        core::cmp::Ordering::Equal => {
            (best_sum(a, b) + best_sum(b, a)) / (2.0 * a.len() as f64)
        }
    }
}

/// Jaccard similarity of the `key=value` pair sets; 1 when both maps
/// are empty.
fn property_similarity(e1: &Event, e2: &Event) -> f64 {
    if e1.properties.is_empty() && e2.properties.is_empty() {
        return 1.0;
    }
    let shared = e1
        .properties
        .iter()
        .filter(|(k, v)| e2.properties.get(*k) == Some(v))
        .count();
    let union = e1.properties.len() + e2.properties.len() - shared;
    shared as f64 / union as f64
}

fn optional_phrase_similarity(
    table: &EmbeddingTable,
    a: Option<&str>,
    b: Option<&str>,
) -> f64 {
    match (a, b) {
        (None, None) => 1.0,
        (Some(a), Some(b)) => phrase_similarity(table, &words(a), &words(b)),
        _ => 0.0,
    }
}

/// Similarity of two events in `[0,1]`: the config-weighted sum of the
/// action, entity-list, location, timeframe-label, and property
/// similarities. Timeframe order indices are not compared — only the
/// symbolic labels are.
pub fn node_similarity(
    e1: &Event,
    e2: &Event,
    table: &EmbeddingTable,
    cfg: &MatchConfig,
) -> f64 {
    let action = phrase_similarity(table, &words(&e1.action), &words(&e2.action));
    let entities = entity_similarity(table, &e1.entities, &e2.entities);
    let location =
        optional_phrase_similarity(table, e1.location.as_deref(), e2.location.as_deref());
    let time = optional_phrase_similarity(
        table,
        e1.timeframe.label.as_deref(),
        e2.timeframe.label.as_deref(),
    );
    let props = property_similarity(e1, e2);
    cfg.w_action * action
        + cfg.w_entities * entities
        + cfg.w_location * location
        + cfg.w_time * time
        + cfg.w_props * props
}

/// Similarity of two relation kinds: 1 when equal, the verbs' phrase
/// similarity when both are `other`, 0.5 for inverse pairs
/// (`before`/`after`, `causes`/`caused_by`), otherwise 0.
fn relation_kind_similarity(r1: &Relation, r2: &Relation, table: &EmbeddingTable) -> f64 {
    if r1.kind == RelationKind::Other && r2.kind == RelationKind::Other {
        let v1 = r1.verb.as_deref().unwrap_or("");
        let v2 = r2.verb.as_deref().unwrap_or("");
        return phrase_similarity(table, &words(v1), &words(v2));
    }
    if r1.kind == r2.kind {
        return 1.0;
    }
    if r1.kind.inverse() == Some(r2.kind) {
        return 0.5;
    }
    0.0
}

/// Similarity of two edges given the similarities of their aligned
/// endpoints: `alpha_rel·rel_sim + (1−alpha_rel)·√(ns_src·ns_dst)`.
pub fn edge_similarity(
    r1: &Relation,
    r2: &Relation,
    node_sim_src: f64,
    node_sim_dst: f64,
    table: &EmbeddingTable,
    cfg: &MatchConfig,
) -> f64 {
    let rel = relation_kind_similarity(r1, r2, table);
    cfg.alpha_rel * rel + (1.0 - cfg.alpha_rel) * (node_sim_src * node_sim_dst).sqrt()
}

/// Dense symmetric affinity matrix over the candidate node pairs of two
/// graphs. Candidate `(i, a)` — node `i` of the first graph matched to
/// node `a` of the second, both in id order — has flat index `i·n2 + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    n1: usize,
    n2: usize,
    data: Vec<f64>,
}

impl AffinityMatrix {
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Number of candidates; the matrix is `dim × dim`.
    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn candidate(&self, i: usize, a: usize) -> usize {
        i * self.n2 + a
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.data[p * self.dim() + q]
    }

    fn set_symmetric(&mut self, p: usize, q: usize, value: f64) {
        let dim = self.dim();
        self.data[p * dim + q] = value;
        self.data[q * dim + p] = value;
    }

    /// Row-major matrix entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn is_all_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }
}

/// Same-X refs viewed as pseudo-edges for `refs_as_edges` matching:
/// `same_time` maps to the relation kind of the same name, the other
/// ref kinds become `other` edges mediated by the ref-kind word.
fn pseudo_relations(g: &GestGraph) -> Vec<Relation> {
    let mut out = Vec::new();
    for event in g.events() {
        for r in &event.refs {
            let relation = match r.kind {
                RefKind::SameTime => {
                    Relation::new(event.id.clone(), r.target.clone(), RelationKind::SameTime)
                }
                kind => Relation::other(event.id.clone(), r.target.clone(), kind.as_str()),
            };
            out.push(relation);
        }
    }
    out
}

/// Builds the affinity matrix for two graphs.
///
/// The diagonal carries [`node_similarity`] for each candidate; entry
/// `((i,a),(j,b))` carries [`edge_similarity`] whenever relations
/// `i→j` and `a→b` exist (direction-respecting). When parallel
/// relations produce several values for one entry, the maximum is kept.
/// Relations with dangling endpoints or self-loops are skipped.
pub fn build_affinity(
    g1: &GestGraph,
    g2: &GestGraph,
    table: &EmbeddingTable,
    cfg: &MatchConfig,
) -> Result<AffinityMatrix, MatchError> {
    cfg.validate()?;
    let n1 = g1.event_count();
    let n2 = g2.event_count();
    let candidates = n1
        .checked_mul(n2)
        .filter(|&c| c <= cfg.max_candidates)
        .ok_or(MatchError::CandidateCapExceeded {
            candidates: n1.saturating_mul(n2),
            cap: cfg.max_candidates,
        })?;

    let events1: Vec<&Event> = g1.events().collect();
    let events2: Vec<&Event> = g2.events().collect();
    let index = |events: &[&Event], id: &str| events.iter().position(|e| e.id.as_str() == id);

    let mut m = AffinityMatrix {
        n1,
        n2,
        data: alloc::vec![0.0; candidates * candidates],
    };

    for (i, e1) in events1.iter().enumerate() {
        for (a, e2) in events2.iter().enumerate() {
            let p = m.candidate(i, a);
            m.set_symmetric(p, p, node_similarity(e1, e2, table, cfg));
        }
    }

    let mut relations1: Vec<Relation> = g1.relations().to_vec();
    let mut relations2: Vec<Relation> = g2.relations().to_vec();
    if cfg.refs_as_edges {
        relations1.extend(pseudo_relations(g1));
        relations2.extend(pseudo_relations(g2));
    }

    for r1 in &relations1 {
        let (Some(i), Some(j)) = (index(&events1, r1.src.as_str()), index(&events1, r1.dst.as_str()))
        else {
            continue;
        };
        if i == j {
            continue;
        }
        for r2 in &relations2 {
            let (Some(a), Some(b)) =
                (index(&events2, r2.src.as_str()), index(&events2, r2.dst.as_str()))
            else {
                continue;
            };
            if a == b {
                continue;
            }
            let p = m.candidate(i, a);
            let q = m.candidate(j, b);
            let ns_src = m.get(p, p);
            let ns_dst = m.get(q, q);
            let value = edge_similarity(r1, r2, ns_src, ns_dst, table, cfg);
            if value > m.get(p, q) {
                m.set_symmetric(p, q, value);
            }
        }
    }

    Ok(m)
}

/// Principal eigenvector of a symmetric non-negative `dim × dim`
/// row-major matrix by power iteration.
///
/// Iteration starts from the uniform vector and stops when successive
/// normalized iterates differ by less than `tol` in L2 norm, or after
/// `max_iter` steps. The result is L2-normalized and non-negative.
pub fn principal_eigenvector(
    matrix: &[f64],
    dim: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, MatchError> {
    assert_eq!(matrix.len(), dim * dim, "matrix must be dim × dim");
    if dim == 0 || matrix.iter().all(|&v| v == 0.0) {
        return Err(MatchError::AllZeroAffinity);
    }

    let mut x = alloc::vec![1.0 / (dim as f64).sqrt(); dim];
    let mut y = alloc::vec![0.0; dim];
    for _ in 0..max_iter {
        for (r, yr) in y.iter_mut().enumerate() {
            let row = &matrix[r * dim..(r + 1) * dim];
            *yr = row.iter().zip(&x).map(|(&m, &xv)| m * xv).sum();
        }
        let norm = y.iter().map(|&v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(MatchError::AllZeroAffinity);
        }
        for v in &mut y {
            *v /= norm;
        }
        let diff = x
            .iter()
            .zip(&y)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        core::mem::swap(&mut x, &mut y);
        if diff < tol {
            break;
        }
    }
    Ok(x)
}

/// Greedily discretizes an eigenvector into one-to-one pairs.
///
/// Repeatedly takes the largest remaining entry (ties go to the
/// smallest flat index, i.e. lexicographically smallest `(i, a)`),
/// accepts that pair, and zeroes the rest of row `i` and column `a`;
/// stops when the remaining maximum is 0 or `min(n1, n2)` pairs are
/// chosen. Returns the pair list sorted by `i`.
pub fn greedy_discretize(x: &[f64], n1: usize, n2: usize) -> Vec<(usize, usize)> {
    assert_eq!(x.len(), n1 * n2, "candidate vector must have length n1·n2");
    let mut x = x.to_vec();
    let mut pairs = Vec::new();
    while pairs.len() < n1.min(n2) {
        let mut best = 0usize;
        let mut best_value = 0.0;
        for (idx, &v) in x.iter().enumerate() {
            if v > best_value {
                best = idx;
                best_value = v;
            }
        }
        if best_value <= 0.0 {
            break;
        }
        let (i, a) = (best / n2, best % n2);
        pairs.push((i, a));
        for col in 0..n2 {
            x[i * n2 + col] = 0.0;
        }
        for row in 0..n1 {
            x[row * n2 + a] = 0.0;
        }
    }
    pairs.sort_unstable();
    pairs
}

/// A one-to-one matching between the nodes of two graphs, with the
/// quadratic objective `x^T M x` of its indicator vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(i, a)` index pairs into the id-ordered node lists, sorted by `i`.
    pub pairs: Vec<(usize, usize)>,
    pub objective: f64,
}

impl Assignment {
    fn empty() -> Self {
        Assignment {
            pairs: Vec::new(),
            objective: 0.0,
        }
    }

    /// Sorts the pairs and computes the exact objective from `m`.
    pub fn from_pairs(m: &AffinityMatrix, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        let objective = assignment_objective(m, &pairs);
        Assignment { pairs, objective }
    }
}

/// `x^T M x` for the indicator of `pairs`, summed in the sorted pair
/// order so that equal assignments always produce bit-identical values.
pub fn assignment_objective(m: &AffinityMatrix, pairs: &[(usize, usize)]) -> f64 {
    debug_assert!(pairs.is_sorted());
    let mut total = 0.0;
    for &(i, a) in pairs {
        let p = m.candidate(i, a);
        for &(j, b) in pairs {
            total += m.get(p, m.candidate(j, b));
        }
    }
    total
}

/// Spectral Matching: affinity matrix → principal eigenvector → greedy
/// discretization. An empty graph, or an affinity matrix with no
/// nonzero entry at all, yields the empty assignment.
pub fn sm_match(
    g1: &GestGraph,
    g2: &GestGraph,
    table: &EmbeddingTable,
    cfg: &MatchConfig,
) -> Result<Assignment, MatchError> {
    cfg.validate()?;
    if g1.is_empty() || g2.is_empty() {
        return Ok(Assignment::empty());
    }
    let m = build_affinity(g1, g2, table, cfg)?;
    if m.is_all_zero() {
        return Ok(Assignment::empty());
    }
    let x = principal_eigenvector(m.as_slice(), m.dim(), cfg.tol, cfg.max_iter)?;
    let pairs = greedy_discretize(&x, m.n1(), m.n2());
    Ok(Assignment::from_pairs(&m, pairs))
}

/// Exhaustive matching oracle: evaluates every injective assignment of
/// the smaller node set into the larger one and keeps the first maximum
/// in enumeration order (ascending choices for each smaller-side node
/// in turn). The smaller side is limited to 6 nodes.
pub fn brute_force_match(
    g1: &GestGraph,
    g2: &GestGraph,
    table: &EmbeddingTable,
    cfg: &MatchConfig,
) -> Result<Assignment, MatchError> {
    const MAX_SIDE: usize = 6;
    cfg.validate()?;
    if g1.is_empty() || g2.is_empty() {
        return Ok(Assignment::empty());
    }
    let (n1, n2) = (g1.event_count(), g2.event_count());
    let min_side = n1.min(n2);
    if min_side > MAX_SIDE {
        return Err(MatchError::BruteForceTooLarge {
            min_side,
            cap: MAX_SIDE,
        });
    }
    let m = build_affinity(g1, g2, table, cfg)?;

    // Map each node of the smaller side to a distinct node of the
    // larger side.
    let swap = n1 > n2;
    let (small, large) = if swap { (n2, n1) } else { (n1, n2) };
    let mut used = alloc::vec![false; large];
    let mut current: Vec<usize> = Vec::with_capacity(small);
    let mut best: Option<Assignment> = None;

    fn recurse(
        small: usize,
        large: usize,
        swap: bool,
        m: &AffinityMatrix,
        used: &mut [bool],
        current: &mut Vec<usize>,
        best: &mut Option<Assignment>,
    ) {
        if current.len() == small {
            let mut pairs: Vec<(usize, usize)> = current
                .iter()
                .enumerate()
                .map(|(s, &l)| if swap { (l, s) } else { (s, l) })
                .collect();
            pairs.sort_unstable();
            let objective = assignment_objective(m, &pairs);
            if best.as_ref().is_none_or(|b| objective > b.objective) {
                *best = Some(Assignment { pairs, objective });
            }
            return;
        }
        for l in 0..large {
            if used[l] {
                continue;
            }
            used[l] = true;
            current.push(l);
            recurse(small, large, swap, m, used, current, best);
            current.pop();
            used[l] = false;
        }
    }
    recurse(small, large, swap, &m, &mut used, &mut current, &mut best);
    Ok(best.expect("at least one assignment exists for non-empty graphs"))
}

/// Normalized similarity of two graphs in `[0,1]`.
///
/// `raw(a,b)` is the [`sm_match`] objective; the score is
/// `raw(g1,g2) / √(raw(g1,g1)·raw(g2,g2))`, clamped to `[0,1]`. Two
/// empty graphs are fully similar (1); exactly one empty graph scores
/// 0. The pair is evaluated in a canonical orientation (by comparing
/// the graphs' canonical strings) so the score is exactly symmetric.
pub fn graph_similarity(
    g1: &GestGraph,
    g2: &GestGraph,
    table: &EmbeddingTable,
    cfg: &MatchConfig,
) -> Result<f64, MatchError> {
    match (g1.is_empty(), g2.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let (a, b) = if g1.to_canonical_string() <= g2.to_canonical_string() {
        (g1, g2)
    } else {
        (g2, g1)
    };
    let raw_ab = sm_match(a, b, table, cfg)?.objective;
    let raw_aa = sm_match(a, a, table, cfg)?.objective;
    let raw_bb = sm_match(b, b, table, cfg)?.objective;
    let denom = (raw_aa * raw_bb).sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((raw_ab / denom).clamp(0.0, 1.0))
}
