//! Clip identifiers shared by the classical and excitation-mode agents.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// What a clip remembers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClipKind {
    Percept(usize),
    Action(usize),
}

impl ClipKind {
    pub fn is_percept(self) -> bool {
        matches!(self, ClipKind::Percept(_))
    }

    pub fn is_action(self) -> bool {
        matches!(self, ClipKind::Action(_))
    }
}

impl fmt::Display for ClipKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClipKind::Percept(i) => write!(f, "p{i}"),
            ClipKind::Action(k) => write!(f, "a{k}"),
        }
    }
}

impl FromStr for ClipKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let parse_index = |rest: &str| rest.parse::<usize>().map_err(|_| Error::UnknownClip(s.to_string()));
        match s.split_at_checked(1) {
            Some(("p", rest)) => Ok(ClipKind::Percept(parse_index(rest)?)),
            Some(("a", rest)) => Ok(ClipKind::Action(parse_index(rest)?)),
            _ => Err(Error::UnknownClip(s.to_string())),
        }
    }
}

/// Index of a clip inside one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClipId(pub usize);

/// Directed edge `from → to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: ClipId,
    pub to: ClipId,
}

impl Edge {
    pub fn new(from: ClipId, to: ClipId) -> Self {
        Self { from, to }
    }
}

/// Percepts `p0..p{n-1}` followed by actions `a0..a{n-1}`.
pub fn toy_clips(n_percepts: usize, n_actions: usize) -> Vec<ClipKind> {
    (0..n_percepts).map(ClipKind::Percept).chain((0..n_actions).map(ClipKind::Action)).collect()
}
