//! Simulation trace and its JSON Lines rendering.

use serde::Serialize;
use serde_json::json;

use super::program::StateTag;
use crate::geometry::{Point, Trajectory, POSITION_TOL};

fn xy(p: Point) -> [f64; 2] {
    [p.x, p.y]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EventKind {
    Appear {
        agent: usize,
        position: [f64; 2],
    },
    Ga {
        agents: Vec<usize>,
        positions: Vec<[f64; 2]>,
    },
    Order {
        issuer: usize,
        recipients: Vec<usize>,
        target: [f64; 2],
    },
    State {
        agent: usize,
        from: StateTag,
        to: StateTag,
    },
    Stop {
        agent: usize,
        position: [f64; 2],
    },
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl Event {
    pub(crate) fn appear(t: f64, agent: usize, p: Point) -> Self {
        Event {
            t,
            kind: EventKind::Appear {
                agent,
                position: xy(p),
            },
        }
    }

    pub(crate) fn ga(t: f64, agents: Vec<usize>, positions: &[Point]) -> Self {
        Event {
            t,
            kind: EventKind::Ga {
                agents,
                positions: positions.iter().copied().map(xy).collect(),
            },
        }
    }

    pub(crate) fn order(t: f64, issuer: usize, recipients: Vec<usize>, target: Point) -> Self {
        Event {
            t,
            kind: EventKind::Order {
                issuer,
                recipients,
                target: xy(target),
            },
        }
    }

    pub(crate) fn stop(t: f64, agent: usize, p: Point) -> Self {
        Event {
            t,
            kind: EventKind::Stop {
                agent,
                position: xy(p),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Gathered { point: Point },
    Split { groups: usize, points: Vec<Point> },
    Timeout,
}

impl Verdict {
    pub fn is_gathered(&self) -> bool {
        matches!(self, Verdict::Gathered { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Gathered { .. } => "gathered",
            Verdict::Split { .. } => "split",
            Verdict::Timeout => "timeout",
        }
    }
}

/// Groups points that coincide within [`POSITION_TOL`] (single linkage).
pub fn cluster_points(points: &[Point]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if label[start].is_some() {
            continue;
        }
        let g = groups.len();
        label[start] = Some(g);
        let mut members = vec![start];
        let mut k = 0;
        while k < members.len() {
            let cur = members[k];
            for other in 0..n {
                if label[other].is_none() && points[cur].dist(points[other]) <= POSITION_TOL {
                    label[other] = Some(g);
                    members.push(other);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups
}

/// Full record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub events: Vec<Event>,
    pub final_positions: Vec<Point>,
    pub final_states: Vec<StateTag>,
    pub stopped: Vec<bool>,
    pub trajectories: Vec<Trajectory>,
    pub end_time: f64,
    pub verdict: Verdict,
}

impl Trace {
    pub fn ga_events(&self) -> impl Iterator<Item = (f64, &[usize])> + '_ {
        self.events.iter().filter_map(|e| match &e.kind {
            EventKind::Ga { agents, .. } => Some((e.t, agents.as_slice())),
            _ => None,
        })
    }

    pub fn ga_count(&self) -> usize {
        self.ga_events().count()
    }

    pub fn first_ga_time(&self) -> Option<f64> {
        self.ga_events().next().map(|(t, _)| t)
    }

    pub fn count_final_state(&self, tag: StateTag) -> usize {
        self.final_states.iter().filter(|&&s| s == tag).count()
    }

    /// Whether any agent ever entered `tag` through a transition.
    pub fn ever_entered(&self, tag: StateTag) -> bool {
        self.events
            .iter()
            .any(|e| matches!(e.kind, EventKind::State { to, .. } if to == tag))
    }

    /// Time of the last stop event, i.e. when the gathering completed.
    pub fn gathering_time(&self) -> Option<f64> {
        if !self.verdict.is_gathered() {
            return None;
        }
        self.events
            .iter()
            .rev()
            .find(|e| matches!(e.kind, EventKind::Stop { .. }))
            .map(|e| e.t)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        let verdict = match &self.verdict {
            Verdict::Gathered { point } => json!({
                "kind": "verdict", "verdict": "gathered", "point": xy(*point), "t": self.end_time,
            }),
            Verdict::Split { groups, points } => json!({
                "kind": "verdict", "verdict": "split", "groups": groups,
                "points": points.iter().copied().map(xy).collect::<Vec<_>>(), "t": self.end_time,
            }),
            Verdict::Timeout => json!({
                "kind": "verdict", "verdict": "timeout", "t": self.end_time,
            }),
        };
        out.push_str(&verdict.to_string());
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_lines_match_schema() {
        let e = Event::ga(
            1.5,
            vec![0, 2],
            &[Point::new(0.0, 0.0), Point::new(0.5, 0.0)],
        );
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"t":1.5,"kind":"ga","agents":[0,2],"positions":[[0.0,0.0],[0.5,0.0]]}"#
        );
    }

    #[test]
    fn clustering_uses_position_tolerance() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(5.0, 5.0),
            Point::new(1e-7, 0.0),
            Point::new(5.0, 5.0 + 1e-3),
        ];
        assert_eq!(cluster_points(&pts), vec![vec![0, 2], vec![1], vec![3]]);
    }
}
