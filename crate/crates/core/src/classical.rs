//! The classical projective-simulation agent.
//!
//! Deliberation is a random walk over a [`WeightedClipGraph`]: the excitation
//! leaves clip `c_i` for `c_j` with probability `h(c_i, c_j) / Σ_k h(c_i, c_k)`
//! and stops at the first action clip. After the environment judges the
//! action, every weight relaxes toward 1 and the traversed edges gain the
//! reward:
//!
//! ```text
//! h ← h − damping·(h − 1) + reward·[edge traversed and rewarded]
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::RngCore;

use crate::agent::{Agent, Deliberation};
use crate::clip::{toy_clips, ClipId, ClipKind, Edge};
use crate::error::{Error, Result};

/// Fixed point of the damping term; weights never go below it.
pub const H_MIN: f64 = 1.0;

pub const DEFAULT_MAX_HOPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningParams {
    damping: f64,
    reward: f64,
}

impl LearningParams {
    pub fn new(damping: f64, reward: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&damping) {
            return Err(Error::InvalidParams(format!("damping {damping} outside [0, 1]")));
        }
        if !(reward >= 0.0) || !reward.is_finite() {
            return Err(Error::InvalidParams(format!("reward {reward} must be finite and >= 0")));
        }
        Ok(Self { damping, reward })
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn reward(&self) -> f64 {
        self.reward
    }

    /// One application of the damped update to a single weight or coupling.
    pub fn apply(&self, value: f64, rewarded_edge: bool) -> f64 {
        let damped = value - self.damping * (value - H_MIN);
        if rewarded_edge {
            damped + self.reward
        } else {
            damped
        }
    }
}

/// The agent's episodic memory: clips and weighted directed edges.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedClipGraph {
    clips: Vec<ClipKind>,
    weights: BTreeMap<Edge, f64>,
}

/// Outcome of one random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    pub action: ClipId,
    pub path: Vec<Edge>,
}

impl WeightedClipGraph {
    pub fn new(clips: Vec<ClipKind>) -> Self {
        Self { clips, weights: BTreeMap::new() }
    }

    /// Complete bipartite percept → action graph with uniform weights.
    pub fn invasion_game(n_symbols: usize, initial_weight: f64) -> Result<Self> {
        let mut g = Self::new(toy_clips(n_symbols, n_symbols));
        for p in 0..n_symbols {
            for a in 0..n_symbols {
                g.add_edge(ClipId(p), ClipId(n_symbols + a), initial_weight)?;
            }
        }
        Ok(g)
    }

    pub fn clips(&self) -> &[ClipKind] {
        &self.clips
    }

    pub fn kind(&self, id: ClipId) -> Result<ClipKind> {
        self.clips.get(id.0).copied().ok_or_else(|| Error::UnknownClip(format!("#{}", id.0)))
    }

    pub fn id_of(&self, kind: ClipKind) -> Option<ClipId> {
        self.clips.iter().position(|&k| k == kind).map(ClipId)
    }

    pub fn percept_id(&self, index: usize) -> Result<ClipId> {
        self.id_of(ClipKind::Percept(index)).ok_or_else(|| Error::UnknownClip(ClipKind::Percept(index).to_string()))
    }

    pub fn action_ids(&self) -> Vec<ClipId> {
        let mut ids: Vec<(usize, ClipId)> = self
            .clips
            .iter()
            .enumerate()
            .filter_map(|(i, k)| match k {
                ClipKind::Action(a) => Some((*a, ClipId(i))),
                ClipKind::Percept(_) => None,
            })
            .collect();
        ids.sort();
        ids.into_iter().map(|(_, id)| id).collect()
    }

    pub fn n_percepts(&self) -> usize {
        self.clips.iter().filter(|k| k.is_percept()).count()
    }

    pub fn n_actions(&self) -> usize {
        self.clips.iter().filter(|k| k.is_action()).count()
    }

    /// Adds or replaces an edge. Action clips are absorbing, so they cannot
    /// have outgoing edges.
    pub fn add_edge(&mut self, from: ClipId, to: ClipId, weight: f64) -> Result<()> {
        let from_kind = self.kind(from)?;
        let to_kind = self.kind(to)?;
        let edge_name = || format!("{from_kind}->{to_kind}");
        if from_kind.is_action() {
            return Err(Error::InvalidWeight {
                edge: edge_name(),
                weight,
                reason: "action clips are absorbing".into(),
            });
        }
        if from == to {
            return Err(Error::InvalidWeight { edge: edge_name(), weight, reason: "self loop".into() });
        }
        if !(weight >= H_MIN) || !weight.is_finite() {
            return Err(Error::InvalidWeight { edge: edge_name(), weight, reason: format!("must be >= {H_MIN}") });
        }
        self.weights.insert(Edge::new(from, to), weight);
        Ok(())
    }

    pub fn weight(&self, edge: Edge) -> Option<f64> {
        self.weights.get(&edge).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.weights.iter().map(|(e, w)| (*e, *w))
    }

    fn outgoing(&self, from: ClipId) -> impl Iterator<Item = (ClipId, f64)> + '_ {
        let lo = Edge::new(from, ClipId(0));
        let hi = Edge::new(from, ClipId(usize::MAX));
        self.weights.range(lo..=hi).map(|(e, w)| (e.to, *w))
    }

    /// `p(c_j | c_i) = h(c_i, c_j) / Σ_k h(c_i, c_k)` over the outgoing edges of `from`.
    pub fn hop_probabilities(&self, from: ClipId) -> Result<Vec<(ClipId, f64)>> {
        let out: Vec<(ClipId, f64)> = self.outgoing(from).collect();
        if out.is_empty() {
            return Err(Error::NoOutgoingEdges(self.kind(from)?.to_string()));
        }
        let total: f64 = out.iter().map(|(_, w)| w).sum();
        Ok(out.into_iter().map(|(to, w)| (to, w / total)).collect())
    }

    pub fn walk(&self, start: ClipId, rng: &mut dyn RngCore) -> Result<Walk> {
        self.walk_capped(start, rng, DEFAULT_MAX_HOPS)
    }

    /// Hops from `start` until an action clip absorbs the excitation.
    pub fn walk_capped(&self, start: ClipId, rng: &mut dyn RngCore, max_hops: usize) -> Result<Walk> {
        let start_kind = self.kind(start)?;
        if !start_kind.is_percept() {
            return Err(Error::NotAPercept(start_kind.to_string()));
        }
        let mut current = start;
        let mut path = Vec::new();
        while path.len() < max_hops {
            let probs = self.hop_probabilities(current)?;
            let next = if probs.len() == 1 {
                probs[0].0
            } else {
                let dist = WeightedIndex::new(probs.iter().map(|(_, p)| *p)).expect("positive weights");
                probs[dist.sample(rng)].0
            };
            path.push(Edge::new(current, next));
            if self.kind(next)?.is_action() {
                return Ok(Walk { action: next, path });
            }
            current = next;
        }
        Err(Error::NotAbsorbed { hops: max_hops })
    }

    /// Probability of the walk from `start` ending on each action clip,
    /// indexed like [`Self::action_ids`].
    pub fn action_distribution(&self, start: ClipId) -> Result<Vec<f64>> {
        let actions = self.action_ids();
        let mut absorbed = vec![0.0; self.clips.len()];
        let mut mass = BTreeMap::from([(start, 1.0)]);
        for _ in 0..DEFAULT_MAX_HOPS {
            let mut next: BTreeMap<ClipId, f64> = BTreeMap::new();
            for (&clip, &m) in &mass {
                for (to, p) in self.hop_probabilities(clip)? {
                    if self.kind(to)?.is_action() {
                        absorbed[to.0] += m * p;
                    } else {
                        *next.entry(to).or_default() += m * p;
                    }
                }
            }
            mass = next;
            if mass.values().sum::<f64>() < 1e-15 {
                return Ok(actions.iter().map(|a| absorbed[a.0]).collect());
            }
        }
        Err(Error::NotAbsorbed { hops: DEFAULT_MAX_HOPS })
    }

    /// Damps every edge toward 1 and rewards the traversed edges when
    /// `rewarded` is set.
    pub fn apply_update(&mut self, traversed: &[Edge], rewarded: bool, params: &LearningParams) {
        for (edge, w) in self.weights.iter_mut() {
            *w = params.apply(*w, rewarded && traversed.contains(edge));
        }
    }

    /// Functional form of [`Self::apply_update`].
    pub fn updated(&self, traversed: &[Edge], rewarded: bool, params: &LearningParams) -> Self {
        let mut g = self.clone();
        g.apply_update(traversed, rewarded, params);
        g
    }

    /// One `from, to, weight` line per edge.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        for (edge, w) in &self.weights {
            let _ = writeln!(out, "{}, {}, {}", self.clips[edge.from.0], self.clips[edge.to.0], w);
        }
        out
    }
}

impl FromStr for WeightedClipGraph {
    type Err = Error;

    /// Parses the adjacency listing. Clips are registered in order of first
    /// appearance; blank lines and `#` comments are ignored.
    fn from_str(text: &str) -> Result<Self> {
        let mut g = WeightedClipGraph::new(Vec::new());
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [from, to, weight] = fields[..] else {
                return Err(Error::AdjacencyParse { line: line_no, reason: "expected `from, to, weight`".into() });
            };
            let parse_err = |e: Error| Error::AdjacencyParse { line: line_no, reason: e.to_string() };
            let from: ClipKind = from.parse().map_err(parse_err)?;
            let to: ClipKind = to.parse().map_err(parse_err)?;
            let weight: f64 = weight
                .parse()
                .map_err(|_| Error::AdjacencyParse { line: line_no, reason: format!("bad weight `{weight}`") })?;
            let from_id = g.intern(from);
            let to_id = g.intern(to);
            g.add_edge(from_id, to_id, weight).map_err(parse_err)?;
        }
        Ok(g)
    }
}

impl WeightedClipGraph {
    fn intern(&mut self, kind: ClipKind) -> ClipId {
        self.id_of(kind).unwrap_or_else(|| {
            self.clips.push(kind);
            ClipId(self.clips.len() - 1)
        })
    }
}

/// Classical agent for the invasion game.
#[derive(Debug, Clone)]
pub struct ClassicalAgent {
    graph: WeightedClipGraph,
    params: LearningParams,
    last_path: Vec<Edge>,
}

impl ClassicalAgent {
    pub fn new(graph: WeightedClipGraph, params: LearningParams) -> Self {
        Self { graph, params, last_path: Vec::new() }
    }

    pub fn invasion_game(n_symbols: usize, params: LearningParams) -> Self {
        Self::new(WeightedClipGraph::invasion_game(n_symbols, H_MIN).expect("valid toy graph"), params)
    }

    pub fn graph(&self) -> &WeightedClipGraph {
        &self.graph
    }
}

impl Agent for ClassicalAgent {
    fn n_percepts(&self) -> usize {
        self.graph.n_percepts()
    }

    fn n_actions(&self) -> usize {
        self.graph.n_actions()
    }

    fn deliberate(&mut self, percept: usize, rng: &mut dyn RngCore) -> Result<Deliberation> {
        let start = self.graph.percept_id(percept)?;
        let probabilities = self.graph.action_distribution(start)?;
        let walk = self.graph.walk(start, rng)?;
        let action = match self.graph.kind(walk.action)? {
            ClipKind::Action(a) => a,
            ClipKind::Percept(_) => unreachable!("walks end on action clips"),
        };
        self.last_path = walk.path;
        Ok(Deliberation { action, t_star: None, probabilities })
    }

    fn learn(&mut self, _percept: usize, _action: usize, rewarded: bool) {
        let path = std::mem::take(&mut self.last_path);
        self.graph.apply_update(&path, rewarded, &self.params);
    }
}
