//! Algorithm DEDICATED: gathers one fixed configuration that the agents
//! know up to translation (but not which of its points is their own).

use std::sync::Arc;

use crate::config::{
    pair_relation, vector_sequence, ConfigError, InitialConfiguration, PairRelation,
};
use crate::engine::{
    AgentProgram, Behavior, GaView, Instruction, LocalContext, Response, StateTag,
};
use crate::geometry::{lex_max_vec, Vec2, TIME_TOL};

use super::{go_home, largest_known};

#[derive(Debug)]
struct Shared {
    vectors: Vec<Vec2>,
    v: Vec2,
    n: usize,
}

/// Program for one configuration, including its visibility radius.
#[derive(Debug, Clone)]
pub struct DedicatedProgram {
    shared: Arc<Shared>,
}

impl DedicatedProgram {
    /// Fails when the configuration is not gatherable.
    pub fn new(cfg: &InitialConfiguration) -> Result<Self, ConfigError> {
        let v = meeting_vector(cfg).ok_or(ConfigError::Ungatherable)?;
        Ok(Self::with_vector(cfg, v))
    }

    /// Like [`DedicatedProgram::new`], but falls back to the largest vector
    /// when no pair qualifies. Only useful to watch the algorithm fail.
    pub fn unchecked(cfg: &InitialConfiguration) -> Self {
        let v = meeting_vector(cfg)
            .or_else(|| lex_max_vec(vector_sequence(cfg)))
            .expect("configurations have at least two agents");
        Self::with_vector(cfg, v)
    }

    fn with_vector(cfg: &InitialConfiguration, v: Vec2) -> Self {
        DedicatedProgram {
            shared: Arc::new(Shared {
                vectors: vector_sequence(cfg),
                v,
                n: cfg.len(),
            }),
        }
    }

    pub fn vector(&self) -> Vec2 {
        self.shared.v
    }
}

/// Largest vector `p_j - p_i` over qualifying pairs for which moving along
/// it and back is sure to bring agents `i` and `j` within reach.
///
/// That excludes one orientation: when `i` starts more than `d + eps`
/// before `j`, it is already home again when `j` appears, and `j` then
/// walks away from it. The opposite orientation always works, so a vector
/// exists exactly when the configuration is gatherable.
pub fn meeting_vector(cfg: &InitialConfiguration) -> Option<Vec2> {
    let eps = cfg.epsilon();
    let agents = cfg.agents();
    let mut candidates = Vec::new();
    for (i, a) in agents.iter().enumerate() {
        for (j, b) in agents.iter().enumerate() {
            if i == j || pair_relation(a, b, eps) == PairRelation::Short {
                continue;
            }
            let d = a.position.dist(b.position);
            if b.start_time - a.start_time <= d + eps + TIME_TOL {
                candidates.push(b.position - a.position);
            }
        }
    }
    lex_max_vec(candidates)
}

impl AgentProgram for DedicatedProgram {
    fn name(&self) -> &str {
        "dedicated"
    }

    fn spawn(&self) -> Box<dyn Behavior> {
        Box::new(DedicatedAgent {
            shared: Arc::clone(&self.shared),
            mode: Mode::Beginner { moves_done: 0 },
            target: None,
            finished: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Beginner {
        moves_done: u8,
    },
    Passive,
    Active {
        index: usize,
        outbound_next: bool,
        /// Vectors still to travel once everything is known.
        final_left: Option<usize>,
    },
}

struct DedicatedAgent {
    shared: Arc<Shared>,
    mode: Mode,
    /// Largest start point, once all `n` are known.
    target: Option<Vec2>,
    finished: bool,
}

impl DedicatedAgent {
    fn learn(&mut self, view: &GaView) -> bool {
        if self.target.is_none() && view.known.len() >= self.shared.n {
            self.target = Some(largest_known(&view.known));
            return true;
        }
        false
    }

    fn finish(&mut self, target: Vec2) -> Instruction {
        self.finished = true;
        Instruction::GotoAndStop { target }
    }
}

impl Behavior for DedicatedAgent {
    fn state(&self) -> StateTag {
        match self.mode {
            Mode::Beginner { .. } => StateTag::Beginner,
            Mode::Passive => StateTag::Passive,
            Mode::Active { .. } => StateTag::Active,
        }
    }

    fn next_instruction(&mut self, ctx: &LocalContext) -> Instruction {
        if self.finished {
            return Instruction::Halt;
        }
        let v = self.shared.v;
        match &mut self.mode {
            Mode::Beginner { moves_done } => {
                *moves_done += 1;
                match *moves_done {
                    1 => Instruction::go_along(v),
                    2 => Instruction::go_along(-v),
                    _ => {
                        self.mode = Mode::Passive;
                        Instruction::Halt
                    }
                }
            }
            Mode::Passive => match self.target {
                Some(t) => self.finish(t),
                None => go_home(ctx.position).unwrap_or(Instruction::Halt),
            },
            Mode::Active {
                index,
                outbound_next,
                final_left,
            } => {
                let vectors = &self.shared.vectors;
                if *outbound_next {
                    if let Some(back) = go_home(ctx.position) {
                        return back;
                    }
                    if *final_left == Some(0) {
                        let t = self
                            .target
                            .expect("final round only starts once all is known");
                        return self.finish(t);
                    }
                    *outbound_next = false;
                    Instruction::go_along(vectors[*index])
                } else {
                    let w = vectors[*index];
                    *index = (*index + 1) % vectors.len();
                    *outbound_next = true;
                    if let Some(k) = final_left {
                        *k -= 1;
                    }
                    Instruction::go_along(-w)
                }
            }
        }
    }

    fn on_ga(&mut self, view: &GaView) -> Response {
        let learned_all = self.learn(view);
        match self.mode {
            Mode::Beginner { .. } => {
                let me = view.me().initial_position;
                let larger_beginner = view.others().any(|p| {
                    p.state == StateTag::Beginner && me.lex_cmp(&p.initial_position).is_lt()
                });
                self.mode = if larger_beginner {
                    Mode::Passive
                } else {
                    Mode::Active {
                        index: 0,
                        outbound_next: true,
                        final_left: self.target.map(|_| self.shared.vectors.len()),
                    }
                };
                Response::REPLAN
            }
            Mode::Passive if learned_all && !self.finished => Response::REPLAN,
            Mode::Active {
                ref mut final_left, ..
            } if learned_all => {
                *final_left = Some(self.shared.vectors.len());
                Response::CONTINUE
            }
            _ => Response::CONTINUE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::geometry::Point;

    #[test]
    fn rejects_ungatherable() {
        let cfg =
            InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0), (3.0, 0.0, 0.0)]).unwrap();
        assert!(matches!(
            DedicatedProgram::new(&cfg),
            Err(ConfigError::Ungatherable)
        ));
        assert_eq!(
            DedicatedProgram::unchecked(&cfg).vector(),
            Vec2::new(3.0, 0.0)
        );
    }

    #[test]
    fn skips_the_orientation_that_cannot_meet() {
        // agent 0 is home again long before agent 1 appears
        let cfg =
            InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0), (1.0, 0.0, 5.0)]).unwrap();
        assert_eq!(meeting_vector(&cfg), Some(Vec2::new(-1.0, 0.0)));
        let trace = run(&cfg, &DedicatedProgram::new(&cfg).unwrap(), 100.0).unwrap();
        assert!(trace.verdict.is_gathered());
    }

    #[test]
    fn later_agent_is_met_at_its_start() {
        let cfg =
            InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0), (1.0, 0.0, 1.0)]).unwrap();
        let prog = DedicatedProgram::new(&cfg).unwrap();
        assert_eq!(prog.vector(), Vec2::new(1.0, 0.0));
        let trace = run(&cfg, &prog, 100.0).unwrap();
        assert_eq!(trace.first_ga_time(), Some(1.0));
        match trace.verdict {
            crate::engine::Verdict::Gathered { point } => {
                assert!(point.dist(Point::new(1.0, 0.0)) < 1e-6)
            }
            ref other => panic!("expected gathering, got {other:?}"),
        }
    }

    #[test]
    fn close_pair_meets_at_appearance() {
        let cfg =
            InitialConfiguration::from_triples(1.0, &[(0.0, 0.0, 0.0), (0.5, 0.5, 0.0)]).unwrap();
        let prog = DedicatedProgram::new(&cfg).unwrap();
        let trace = run(&cfg, &prog, 100.0).unwrap();
        assert_eq!(trace.first_ga_time(), Some(0.0));
        assert!(trace.verdict.is_gathered());
    }

    #[test]
    fn three_agents_gather_at_largest_start() {
        let cfg = InitialConfiguration::from_triples(
            0.3,
            &[(0.0, 0.0, 0.0), (2.0, 1.0, 5.0), (-1.0, 3.0, 0.5)],
        )
        .unwrap();
        let prog = DedicatedProgram::new(&cfg).unwrap();
        let trace = run(&cfg, &prog, 1e4).unwrap();
        match trace.verdict {
            crate::engine::Verdict::Gathered { point } => {
                assert!(point.dist(Point::new(2.0, 1.0)) < 1e-6)
            }
            ref other => panic!("expected gathering, got {other:?}"),
        }
        assert!(trace.ever_entered(StateTag::Active));
    }
}
