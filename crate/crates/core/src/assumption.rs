//! Assumption sets: independence and the shifted-copy counterexample for
//! dependent sets.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::algorithms::gather_a_program;
use crate::config::{AgentStart, ConfigError, InitialConfiguration};
use crate::engine::{default_horizon, run, EngineError, Verdict};
use crate::geometry::{Point, Vec2, POSITION_TOL};

#[derive(Debug, Error)]
pub enum AssumptionError {
    #[error("assumption set is empty")]
    Empty,
    #[error("assumption set elements must exceed 1, got {0}")]
    TooSmall(usize),
    #[error("assumption set must be strictly increasing ({prev} then {next})")]
    NotIncreasing { prev: usize, next: usize },
    #[error("cannot parse `{0}` as an assumption set element")]
    Parse(String),
    #[error("assumption set {0} is independent, no counterexample exists")]
    Independent(AssumptionSet),
    #[error("sub-configuration of size {size} did not gather on its own")]
    SubRunFailed { size: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Finite set of possible team sizes, all at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AssumptionSet {
    elements: Vec<usize>,
}

impl AssumptionSet {
    /// Elements must be given in strictly increasing order.
    pub fn new(elements: Vec<usize>) -> Result<Self, AssumptionError> {
        if elements.is_empty() {
            return Err(AssumptionError::Empty);
        }
        if let Some(&bad) = elements.iter().find(|&&a| a < 2) {
            return Err(AssumptionError::TooSmall(bad));
        }
        if let Some(w) = elements.windows(2).find(|w| w[0] >= w[1]) {
            return Err(AssumptionError::NotIncreasing {
                prev: w[0],
                next: w[1],
            });
        }
        Ok(AssumptionSet { elements })
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn max(&self) -> usize {
        *self.elements.last().expect("nonempty")
    }

    pub fn contains(&self, n: usize) -> bool {
        self.elements.binary_search(&n).is_ok()
    }
}

impl FromStr for AssumptionSet {
    type Err = AssumptionError;

    /// Comma-separated integers, e.g. `2,3,7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let elements = s
            .split(',')
            .map(|part| {
                let part = part.trim();
                part.parse::<usize>()
                    .map_err(|_| AssumptionError::Parse(part.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        AssumptionSet::new(elements)
    }
}

impl fmt::Display for AssumptionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Result of the independence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Independence {
    Independent,
    /// `element = sum(count * term)` over smaller elements; terms ascending.
    Dependent {
        element: usize,
        terms: Vec<(usize, usize)>,
    },
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent)
    }
}

impl fmt::Display for Independence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Independence::Independent => f.write_str("INDEPENDENT"),
            Independence::Dependent { element, terms } => {
                let sum: Vec<String> = terms
                    .iter()
                    .map(|(term, count)| format!("{count}·{term}"))
                    .collect();
                write!(f, "DEPENDENT: {element} = {}", sum.join(" + "))
            }
        }
    }
}

/// Finds the smallest element that is a positive integer combination of
/// smaller ones, if any.
pub fn is_independent(set: &AssumptionSet) -> Independence {
    let max = set.max();
    // parent[s] = last coin used to reach sum s
    let mut parent: Vec<Option<usize>> = vec![None; max + 1];
    let mut reach = vec![false; max + 1];
    reach[0] = true;
    for &a in set.elements() {
        if reach[a] {
            let mut counts: Vec<(usize, usize)> = Vec::new();
            let mut s = a;
            while s > 0 {
                let coin = parent[s].expect("reachable sums record their last coin");
                match counts.iter_mut().find(|(t, _)| *t == coin) {
                    Some(entry) => entry.1 += 1,
                    None => counts.push((coin, 1)),
                }
                s -= coin;
            }
            counts.sort_unstable();
            return Independence::Dependent {
                element: a,
                terms: counts,
            };
        }
        for s in a..=max {
            if !reach[s] && reach[s - a] {
                reach[s] = true;
                parent[s] = Some(a);
            }
        }
    }
    Independence::Independent
}

/// `m` agents on a horizontal line `eps / 2` apart, all starting at time 0.
pub fn canonical_good_configuration(
    m: usize,
    eps: f64,
) -> Result<InitialConfiguration, ConfigError> {
    let agents = (0..m)
        .map(|i| AgentStart {
            position: Point::new(i as f64 * eps / 2.0, 0.0),
            start_time: 0.0,
        })
        .collect();
    InitialConfiguration::new(eps, agents)
}

/// Center and radius of a disc containing every trajectory of a run.
fn bounding_disc(
    cfg: &InitialConfiguration,
    set: &AssumptionSet,
) -> Result<(Point, f64), AssumptionError> {
    let trace = run(cfg, &gather_a_program(set), default_horizon(cfg))?;
    if !matches!(trace.verdict, Verdict::Gathered { .. }) {
        return Err(AssumptionError::SubRunFailed { size: cfg.len() });
    }
    let points: Vec<Point> = trace
        .trajectories
        .iter()
        .flat_map(|tr| tr.breakpoints().map(|(_, p)| p))
        .collect();
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in &points {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let center = Point::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0);
    let radius = points.iter().map(|p| p.dist(center)).fold(0.0, f64::max);
    Ok((center, radius))
}

/// Lays out shifted copies of small good configurations, one per term of
/// the dependency certificate, so far apart that no two copies ever meet.
/// GATHER(A) then stops every copy at its own point.
pub fn build_dependent_counterexample(
    set: &AssumptionSet,
    eps: f64,
) -> Result<InitialConfiguration, AssumptionError> {
    let Independence::Dependent { terms, .. } = is_independent(set) else {
        return Err(AssumptionError::Independent(set.clone()));
    };
    let gap = 2.0 * eps + 10.0 * POSITION_TOL;
    let mut agents = Vec::new();
    let mut cursor = 0.0;
    for &(m, count) in &terms {
        let sub = canonical_good_configuration(m, eps)?;
        let (center, radius) = bounding_disc(&sub, set)?;
        for _ in 0..count {
            let new_center = Point::new(cursor + radius, 0.0);
            let shift: Vec2 = new_center - center;
            agents.extend(sub.translated(shift).agents().iter().copied());
            cursor += 2.0 * radius + gap;
        }
    }
    Ok(InitialConfiguration::new(eps, agents)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{classify, FeasibilityKind};
    use proptest::prelude::*;

    fn set(s: &str) -> AssumptionSet {
        s.parse().unwrap()
    }

    #[test]
    fn parsing_and_validation() {
        assert_eq!(set("2, 3,7").elements(), &[2, 3, 7]);
        assert!(matches!(
            "".parse::<AssumptionSet>(),
            Err(AssumptionError::Parse(_))
        ));
        assert!(matches!(
            "1,2".parse::<AssumptionSet>(),
            Err(AssumptionError::TooSmall(1))
        ));
        assert!(matches!(
            "3,2".parse::<AssumptionSet>(),
            Err(AssumptionError::NotIncreasing { prev: 3, next: 2 })
        ));
        assert!(matches!(
            "2,2".parse::<AssumptionSet>(),
            Err(AssumptionError::NotIncreasing { .. })
        ));
        assert_eq!(set("2,3,7").to_string(), "{2,3,7}");
    }

    #[test]
    fn independence_examples() {
        assert_eq!(
            is_independent(&set("2,4")),
            Independence::Dependent {
                element: 4,
                terms: vec![(2, 2)]
            }
        );
        let cert = is_independent(&set("2,3,7"));
        assert_eq!(cert.to_string(), "DEPENDENT: 7 = 2·2 + 1·3");
        assert!(is_independent(&set("3,4,5")).is_independent());
        assert!(is_independent(&set("7")).is_independent());
        assert!(is_independent(&set("2,3")).is_independent());
        for x in 4..12 {
            let s = AssumptionSet::new((2..=x).collect()).unwrap();
            assert!(!is_independent(&s).is_independent(), "x={x}");
        }
        for x in 2..12 {
            let s = AssumptionSet::new((x..2 * x).collect()).unwrap();
            assert!(is_independent(&s).is_independent(), "x={x}");
        }
    }

    #[test]
    fn counterexample_for_two_four() {
        let cfg = build_dependent_counterexample(&set("2,4"), 0.5).unwrap();
        assert_eq!(cfg.len(), 4);
        assert_eq!(classify(&cfg).kind, FeasibilityKind::Good);
        assert!(build_dependent_counterexample(&set("2,3"), 0.5).is_err());
    }

    #[test]
    fn counterexample_for_two_three_seven_has_three_clusters() {
        let cfg = build_dependent_counterexample(&set("2,3,7"), 0.5).unwrap();
        assert_eq!(cfg.len(), 7);
        assert_eq!(classify(&cfg).kind, FeasibilityKind::Good);
        let mut xs: Vec<f64> = cfg.agents().iter().map(|a| a.position.x).collect();
        xs.sort_by(f64::total_cmp);
        let big_gaps = xs.windows(2).filter(|w| w[1] - w[0] > 1.0).count();
        assert_eq!(big_gaps, 2);
    }

    proptest! {
        #[test]
        fn certificate_sums_to_element(elems in proptest::collection::btree_set(2usize..40, 1..6)) {
            let s = AssumptionSet::new(elems.into_iter().collect()).unwrap();
            if let Independence::Dependent { element, terms } = is_independent(&s) {
                prop_assert!(s.contains(element));
                prop_assert_eq!(terms.iter().map(|(t, c)| t * c).sum::<usize>(), element);
                prop_assert!(terms.iter().all(|(t, c)| *c >= 1 && *t < element && s.contains(*t)));
            }
        }
    }
}
