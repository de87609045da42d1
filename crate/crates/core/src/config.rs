//! Initial configurations and the feasibility classifier.
//!
//! A configuration is gatherable iff some pair satisfies
//! `|t_i - t_j| >= dist(p_i, p_j) - eps`. Gatherable configurations split into
//! *good* ones (strict inequality for some pair) and *bad* ones (equality is
//! the best any pair achieves).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Vec2, TIME_TOL};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("a configuration needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("epsilon must be a positive finite number, got {0}")]
    BadEpsilon(f64),
    #[error("agent {index} has a non-finite coordinate or start time")]
    NonFinite { index: usize },
    #[error("agent {index} has negative start time {t}")]
    NegativeStart { index: usize, t: f64 },
    #[error("agents {first} and {second} start at the same point")]
    DuplicateStart { first: usize, second: usize },
    #[error("no pair satisfies the gatherability condition")]
    Ungatherable,
    #[error("{path}:{line}:{column}: {message}\n  | {context}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
        context: String,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// One agent of a configuration: start point and start time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentStart {
    pub position: Point,
    pub start_time: f64,
}

#[derive(Serialize, Deserialize)]
struct AgentRecord {
    x: f64,
    y: f64,
    t: f64,
}

#[derive(Serialize, Deserialize)]
struct ConfigRecord {
    epsilon: f64,
    agents: Vec<AgentRecord>,
}

/// A validated set of `(start point, start time)` pairs plus the adversary's
/// visibility radius.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfiguration {
    epsilon: f64,
    agents: Vec<AgentStart>,
}

impl InitialConfiguration {
    pub fn new(epsilon: f64, agents: Vec<AgentStart>) -> Result<Self, ConfigError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(ConfigError::BadEpsilon(epsilon));
        }
        if agents.len() < 2 {
            return Err(ConfigError::TooFewAgents(agents.len()));
        }
        for (index, a) in agents.iter().enumerate() {
            if !(a.position.is_finite() && a.start_time.is_finite()) {
                return Err(ConfigError::NonFinite { index });
            }
            if a.start_time < 0.0 {
                return Err(ConfigError::NegativeStart {
                    index,
                    t: a.start_time,
                });
            }
        }
        for i in 0..agents.len() {
            for j in i + 1..agents.len() {
                if agents[i].position == agents[j].position {
                    return Err(ConfigError::DuplicateStart {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(InitialConfiguration { epsilon, agents })
    }

    /// Convenience constructor from `(x, y, t)` triples.
    pub fn from_triples(epsilon: f64, triples: &[(f64, f64, f64)]) -> Result<Self, ConfigError> {
        Self::new(
            epsilon,
            triples
                .iter()
                .map(|&(x, y, t)| AgentStart {
                    position: Point::new(x, y),
                    start_time: t,
                })
                .collect(),
        )
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn agents(&self) -> &[AgentStart] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn max_start_time(&self) -> f64 {
        self.agents.iter().map(|a| a.start_time).fold(0.0, f64::max)
    }

    /// Largest pairwise distance between start points.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.agents.iter().enumerate() {
            for b in &self.agents[i + 1..] {
                d = d.max(a.position.dist(b.position));
            }
        }
        d
    }

    /// All points moved by `v`; start times untouched.
    pub fn translated(&self, v: Vec2) -> Self {
        InitialConfiguration {
            epsilon: self.epsilon,
            agents: self
                .agents
                .iter()
                .map(|a| AgentStart {
                    position: a.position + v,
                    start_time: a.start_time,
                })
                .collect(),
        }
    }

    pub fn time_shifted(&self, dt: f64) -> Self {
        InitialConfiguration {
            epsilon: self.epsilon,
            agents: self
                .agents
                .iter()
                .map(|a| AgentStart {
                    position: a.position,
                    start_time: a.start_time + dt,
                })
                .collect(),
        }
    }

    pub fn from_json_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let record: ConfigRecord = serde_json::from_str(text).map_err(|e| {
            let line = e.line();
            let context = text
                .lines()
                .nth(line.saturating_sub(1))
                .unwrap_or("")
                .to_string();
            ConfigError::Parse {
                path: origin.to_string(),
                line,
                column: e.column(),
                message: e.to_string(),
                context,
            }
        })?;
        Self::from_triples(
            record.epsilon,
            &record
                .agents
                .iter()
                .map(|a| (a.x, a.y, a.t))
                .collect::<Vec<_>>(),
        )
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn to_json_string(&self) -> String {
        let record = ConfigRecord {
            epsilon: self.epsilon,
            agents: self
                .agents
                .iter()
                .map(|a| AgentRecord {
                    x: a.position.x,
                    y: a.position.y,
                    t: a.start_time,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&record).expect("configuration serializes")
    }
}

/// How a pair relates to the gatherability inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRelation {
    /// `|dt| > d - eps`
    Strict,
    /// `|dt| = d - eps` within the time tolerance
    Boundary,
    /// `|dt| < d - eps`
    Short,
}

/// Compares `|t_i - t_j|` against `dist(p_i, p_j) - eps`.
pub fn pair_relation(a: &AgentStart, b: &AgentStart, eps: f64) -> PairRelation {
    let gap = (a.start_time - b.start_time).abs() - (a.position.dist(b.position) - eps);
    if gap.abs() <= TIME_TOL {
        PairRelation::Boundary
    } else if gap > 0.0 {
        PairRelation::Strict
    } else {
        PairRelation::Short
    }
}

/// `z = |dt| - (d - eps)` for a pair; positive means the pair is good.
pub fn pair_margin(a: &AgentStart, b: &AgentStart, eps: f64) -> f64 {
    (a.start_time - b.start_time).abs() - (a.position.dist(b.position) - eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityKind {
    Ungatherable,
    Bad,
    Good,
}

impl fmt::Display for FeasibilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeasibilityKind::Ungatherable => "UNGATHERABLE",
            FeasibilityKind::Bad => "BAD",
            FeasibilityKind::Good => "GOOD",
        })
    }
}

/// Classification result with the first pair that decides it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityClass {
    pub kind: FeasibilityKind,
    pub witness: Option<(usize, usize)>,
}

impl FeasibilityClass {
    pub fn is_gatherable(&self) -> bool {
        self.kind != FeasibilityKind::Ungatherable
    }
}

pub fn classify(cfg: &InitialConfiguration) -> FeasibilityClass {
    let eps = cfg.epsilon();
    let agents = cfg.agents();
    let mut boundary = None;
    for i in 0..agents.len() {
        for j in i + 1..agents.len() {
            match pair_relation(&agents[i], &agents[j], eps) {
                PairRelation::Strict => {
                    return FeasibilityClass {
                        kind: FeasibilityKind::Good,
                        witness: Some((i, j)),
                    }
                }
                PairRelation::Boundary if boundary.is_none() => boundary = Some((i, j)),
                _ => {}
            }
        }
    }
    match boundary {
        Some(w) => FeasibilityClass {
            kind: FeasibilityKind::Bad,
            witness: Some(w),
        },
        None => FeasibilityClass {
            kind: FeasibilityKind::Ungatherable,
            witness: None,
        },
    }
}

/// All `n(n-1)` difference vectors `p_j - p_i`, sorted ascending.
pub fn vector_sequence(cfg: &InitialConfiguration) -> Vec<Vec2> {
    let agents = cfg.agents();
    let mut out = Vec::with_capacity(agents.len() * (agents.len() - 1));
    for (i, a) in agents.iter().enumerate() {
        for (j, b) in agents.iter().enumerate() {
            if i != j {
                out.push(b.position - a.position);
            }
        }
    }
    out.sort_by(|a, b| a.lex_cmp(b));
    out
}

/// Largest difference vector whose pair satisfies the gatherability condition.
pub fn qualifying_vector(cfg: &InitialConfiguration) -> Result<Vec2, ConfigError> {
    let eps = cfg.epsilon();
    let agents = cfg.agents();
    let mut best: Option<Vec2> = None;
    for (i, a) in agents.iter().enumerate() {
        for (j, b) in agents.iter().enumerate() {
            if i == j || pair_relation(a, b, eps) == PairRelation::Short {
                continue;
            }
            let v = b.position - a.position;
            if best.is_none_or(|cur| v.lex_cmp(&cur).is_gt()) {
                best = Some(v);
            }
        }
    }
    best.ok_or(ConfigError::Ungatherable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(eps: f64, t: &[(f64, f64, f64)]) -> InitialConfiguration {
        InitialConfiguration::from_triples(eps, t).unwrap()
    }

    #[test]
    fn classify_examples() {
        let bad = classify(&cfg(0.5, &[(0.0, 0.0, 0.0), (1.0, 0.0, 0.5)]));
        assert_eq!(bad.kind, FeasibilityKind::Bad);
        assert_eq!(bad.witness, Some((0, 1)));
        let good = classify(&cfg(0.5, &[(0.0, 0.0, 0.0), (1.0, 0.0, 2.0)]));
        assert_eq!(good.kind, FeasibilityKind::Good);
        let un = classify(&cfg(0.5, &[(0.0, 0.0, 0.0), (10.0, 0.0, 1.0)]));
        assert_eq!(un.kind, FeasibilityKind::Ungatherable);
        assert_eq!(un.witness, None);
    }

    #[test]
    fn good_witness_wins_over_earlier_boundary_pair() {
        // pair (0,1) is on the boundary, pair (1,2) is strictly good
        let c = cfg(0.5, &[(0.0, 0.0, 0.0), (1.0, 0.0, 0.5), (1.0, 5.0, 10.0)]);
        let k = classify(&c);
        assert_eq!(k.kind, FeasibilityKind::Good);
        assert_eq!(k.witness, Some((0, 2)));
    }

    #[test]
    fn vector_sequence_examples() {
        let two = vector_sequence(&cfg(0.5, &[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]));
        assert_eq!(two, vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)]);

        let three = vector_sequence(&cfg(
            0.5,
            &[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)],
        ));
        // by hand: (-1,0) (-1,1) (0,-1) (0,1) (1,-1) (1,0)
        let expected = [
            (-1.0, 0.0),
            (-1.0, 1.0),
            (0.0, -1.0),
            (0.0, 1.0),
            (1.0, -1.0),
            (1.0, 0.0),
        ];
        assert_eq!(
            three,
            expected
                .iter()
                .map(|&(x, y)| Vec2::new(x, y))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn qualifying_vector_examples() {
        let a = cfg(0.5, &[(0.0, 0.0, 0.0), (1.0, 0.0, 1.0)]);
        assert_eq!(qualifying_vector(&a).unwrap(), Vec2::new(1.0, 0.0));
        let b = cfg(2.0, &[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]);
        assert_eq!(qualifying_vector(&b).unwrap(), Vec2::new(1.0, 0.0));
        // only agents 1 and 2 qualify (close together), agent 0 is far away
        let c = cfg(0.5, &[(-20.0, 0.0, 0.0), (3.0, 1.0, 0.0), (3.2, 0.8, 0.0)]);
        // max of (0.2,-0.2) and (-0.2,0.2)
        assert_eq!(
            qualifying_vector(&c).unwrap(),
            Point::new(3.2, 0.8) - Point::new(3.0, 1.0)
        );
        let un = cfg(0.5, &[(0.0, 0.0, 0.0), (10.0, 0.0, 1.0)]);
        assert!(matches!(
            qualifying_vector(&un),
            Err(ConfigError::Ungatherable)
        ));
    }

    #[test]
    fn rejects_invalid_configurations() {
        assert!(matches!(
            InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0), (0.0, 0.0, 1.0)]),
            Err(ConfigError::DuplicateStart {
                first: 0,
                second: 1
            })
        ));
        assert!(matches!(
            InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0)]),
            Err(ConfigError::TooFewAgents(1))
        ));
        assert!(matches!(
            InitialConfiguration::from_triples(0.0, &[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]),
            Err(ConfigError::BadEpsilon(_))
        ));
        assert!(matches!(
            InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, -1.0), (1.0, 0.0, 0.0)]),
            Err(ConfigError::NegativeStart { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_parse_errors() {
        let text = r#"{"epsilon": 0.5, "agents": [{"x": 0.0, "y": 0.0, "t": 0.0}, {"x": 1.0, "y": 0.0, "t": 2.0}]}"#;
        let c = InitialConfiguration::from_json_str(text, "inline").unwrap();
        assert_eq!(c.len(), 2);
        let again = InitialConfiguration::from_json_str(&c.to_json_string(), "inline").unwrap();
        assert_eq!(again, c);

        let broken = "{\n  \"epsilon\": 0.5,\n  \"agents\": [ {\"x\": 1.0, \"y\": }\n]}";
        match InitialConfiguration::from_json_str(broken, "broken.json") {
            Err(ConfigError::Parse { line, context, .. }) => {
                assert_eq!(line, 3);
                assert!(context.contains("\"y\""));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    fn arb_config() -> impl Strategy<Value = InitialConfiguration> {
        (
            0.1..2.0f64,
            prop::collection::vec((-5i32..5, -5i32..5, 0i32..8), 2..5),
        )
            .prop_filter_map("distinct points", |(eps, pts)| {
                let triples: Vec<_> = pts
                    .iter()
                    .map(|&(x, y, t)| (x as f64 * 0.5, y as f64 * 0.5, t as f64 * 0.5))
                    .collect();
                InitialConfiguration::from_triples(eps, &triples).ok()
            })
    }

    proptest! {
        #[test]
        fn classify_is_invariant(c in arb_config(), vx in -50.0..50.0f64, vy in -50.0..50.0f64, dt in 0.0..10.0f64) {
            let k = classify(&c).kind;
            prop_assert_eq!(classify(&c.translated(Vec2::new(vx, vy))).kind, k);
            prop_assert_eq!(classify(&c.time_shifted(dt)).kind, k);
            let mut rev = c.agents().to_vec();
            rev.reverse();
            let permuted = InitialConfiguration::new(c.epsilon(), rev).unwrap();
            prop_assert_eq!(classify(&permuted).kind, k);
        }

        #[test]
        fn vector_sequence_is_closed_under_negation(c in arb_config()) {
            let seq = vector_sequence(&c);
            prop_assert_eq!(seq.len(), c.len() * (c.len() - 1));
            for v in &seq {
                prop_assert!(seq.contains(&-*v));
            }
            prop_assert!(seq.windows(2).all(|w| w[0].lex_cmp(&w[1]).is_le()));
        }

        #[test]
        fn qualifying_vector_is_in_sequence(c in arb_config()) {
            match qualifying_vector(&c) {
                Ok(v) => {
                    prop_assert!(classify(&c).is_gatherable());
                    prop_assert!(vector_sequence(&c).contains(&v));
                    // the reverse pair qualifies too
                    let agents = c.agents();
                    let ok = agents.iter().any(|a| agents.iter().any(|b| {
                        b.position - a.position == -v
                            && pair_relation(b, a, c.epsilon()) != PairRelation::Short
                    }));
                    prop_assert!(ok);
                }
                Err(_) => prop_assert!(!classify(&c).is_gatherable()),
            }
        }
    }
}
