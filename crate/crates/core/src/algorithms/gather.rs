//! The universal algorithms GATHER(n) and GATHER(A).
//!
//! Both are the same cruiser/explorer/token/shadow machine; GATHER(n) is the
//! special case of the singleton assumption set `{n}`.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::assumption::AssumptionSet;
use crate::engine::{
    Action, AgentProgram, AgentRef, Behavior, GaView, Instruction, LocalContext, Response, StateTag,
};
use crate::geometry::{Vec2, POSITION_TOL};

use super::star::StarState;
use super::{go_home, largest_known};

#[derive(Debug, Clone)]
pub struct GatherProgram {
    name: &'static str,
    sizes: Arc<Vec<usize>>,
}

/// GATHER(n): only the team size is known.
pub fn gather_n_program(n: usize) -> GatherProgram {
    assert!(n >= 2, "teams have at least two agents");
    GatherProgram {
        name: "gather-n",
        sizes: Arc::new(vec![n]),
    }
}

/// GATHER(A): the team size is known to lie in `set`.
pub fn gather_a_program(set: &AssumptionSet) -> GatherProgram {
    GatherProgram {
        name: "gather-a",
        sizes: Arc::new(set.elements().to_vec()),
    }
}

impl GatherProgram {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }
}

impl AgentProgram for GatherProgram {
    fn name(&self) -> &str {
        self.name
    }

    fn spawn(&self) -> Box<dyn Behavior> {
        Box::new(GatherAgent {
            sizes: Arc::clone(&self.sizes),
            assumption: 0,
            star: StarState::default(),
            role: Role::Cruiser,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Finale {
    Searching,
    /// Repeating `phase` of Star and ordering everyone met.
    Replaying {
        phase: u32,
        restart_pending: bool,
        target: Vec2,
    },
    /// Checking on seen agents the replay did not meet again.
    Visiting {
        queue: Vec<Vec2>,
        target: Vec2,
    },
    /// Stopped at `target` (GATHER(A) may wake it up again).
    Resting {
        target: Vec2,
    },
}

impl Finale {
    fn target(&self) -> Option<Vec2> {
        match *self {
            Finale::Searching => None,
            Finale::Replaying { target, .. }
            | Finale::Visiting { target, .. }
            | Finale::Resting { target } => Some(target),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Explorer {
    /// Start points of the agents that became tokens when this agent was promoted.
    own_tokens: Vec<Vec2>,
    /// Tokens and shadows met in a GA, with where they were standing.
    seen: Vec<(AgentRef, Vec2)>,
    ordered: Vec<AgentRef>,
    finale: Finale,
}

impl Explorer {
    fn note_seen(&mut self, agent: AgentRef, position: Vec2) {
        match self.seen.iter_mut().find(|(a, _)| *a == agent) {
            Some(entry) => entry.1 = position,
            None => self.seen.push((agent, position)),
        }
    }

    fn mark_ordered(&mut self, view: &GaView) {
        for p in view.others() {
            if !self.ordered.contains(&p.agent) {
                self.ordered.push(p.agent);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Role {
    Cruiser,
    Explorer(Box<Explorer>),
    /// Token or shadow: frozen until ordered, then executes orders in turn.
    Frozen {
        tag: StateTag,
        orders: VecDeque<Vec2>,
        last_order: Option<Vec2>,
        moving: bool,
    },
}

impl Role {
    fn frozen(tag: StateTag) -> Role {
        Role::Frozen {
            tag,
            orders: VecDeque::new(),
            last_order: None,
            moving: false,
        }
    }
}

struct GatherAgent {
    sizes: Arc<Vec<usize>>,
    assumption: usize,
    star: StarState,
    role: Role,
}

impl GatherAgent {
    fn assumed_size(&self) -> usize {
        self.sizes[self.assumption]
    }

    /// Moves to the smallest assumption covering every agent known so far.
    fn update_assumption(&mut self, known: usize) -> bool {
        let before = self.assumption;
        while known > self.sizes[self.assumption] && self.assumption + 1 < self.sizes.len() {
            self.assumption += 1;
        }
        self.assumption != before
    }

    fn cruiser_ga(&mut self, view: &GaView) -> Response {
        if view.others().any(|p| p.state == StateTag::Token) {
            self.role = Role::frozen(StateTag::Shadow);
            return Response::REPLAN;
        }
        let cruisers: Vec<_> = view
            .others()
            .filter(|p| p.state == StateTag::Cruiser)
            .collect();
        if cruisers.is_empty() {
            return Response::CONTINUE;
        }
        let me = view.me().initial_position;
        if cruisers
            .iter()
            .any(|p| me.lex_cmp(&p.initial_position).is_lt())
        {
            self.role = Role::frozen(StateTag::Token);
            return Response::REPLAN;
        }
        let explorer = Explorer {
            own_tokens: cruisers.iter().map(|p| p.initial_position).collect(),
            seen: cruisers.iter().map(|p| (p.agent, p.position)).collect(),
            ordered: Vec::new(),
            finale: Finale::Searching,
        };
        self.role = Role::Explorer(Box::new(explorer));
        self.explorer_ga(view)
    }

    fn explorer_ga(&mut self, view: &GaView) -> Response {
        let advanced = self.update_assumption(view.known.len());
        let needed = self.assumed_size() - 1;
        let phase = self.star.phase();
        let Role::Explorer(ex) = &mut self.role else {
            unreachable!("called for explorers only")
        };
        for p in view.others() {
            if matches!(p.state, StateTag::Token | StateTag::Shadow) {
                ex.note_seen(p.agent, p.position);
            }
        }

        let was_resting = matches!(ex.finale, Finale::Resting { .. });
        if advanced && ex.finale != Finale::Searching {
            ex.finale = Finale::Searching;
        }
        let action = if was_resting && ex.finale == Finale::Searching {
            Action::Replan
        } else {
            Action::Continue
        };

        if let Some(target) = ex.finale.target() {
            ex.mark_ordered(view);
            return Response {
                action,
                order: Some(target),
            };
        }
        if ex.seen.len() >= needed {
            let target = largest_known(&view.known);
            ex.finale = Finale::Replaying {
                phase,
                restart_pending: true,
                target,
            };
            ex.mark_ordered(view);
            return Response {
                action,
                order: Some(target),
            };
        }
        let beaten = view.others().any(|p| {
            p.state == StateTag::Token
                && ex
                    .own_tokens
                    .iter()
                    .all(|t| t.lex_cmp(&p.initial_position).is_lt())
        });
        if beaten {
            self.role = Role::frozen(StateTag::Shadow);
            return Response::REPLAN;
        }
        Response {
            action,
            order: None,
        }
    }

    fn explorer_instruction(&mut self, ctx: &LocalContext) -> Instruction {
        let Role::Explorer(ex) = &mut self.role else {
            unreachable!("called for explorers only")
        };
        loop {
            match &mut ex.finale {
                Finale::Searching => break,
                Finale::Replaying {
                    phase,
                    restart_pending,
                    target,
                } => {
                    if *restart_pending {
                        if !self.star.at_stage_start() {
                            break;
                        }
                        self.star = StarState::at_phase(*phase);
                        *restart_pending = false;
                    }
                    if self.star.phase() == *phase {
                        break;
                    }
                    let queue = ex
                        .seen
                        .iter()
                        .filter(|(a, _)| !ex.ordered.contains(a))
                        .map(|&(_, pos)| pos)
                        .rev()
                        .collect();
                    ex.finale = Finale::Visiting {
                        queue,
                        target: *target,
                    };
                }
                Finale::Visiting { queue, target } => match queue.pop() {
                    Some(pos) => {
                        if (pos - ctx.position).norm() > POSITION_TOL {
                            return Instruction::go_along(pos - ctx.position);
                        }
                    }
                    None => {
                        let target = *target;
                        ex.finale = Finale::Resting { target };
                        return Instruction::GotoAndStop { target };
                    }
                },
                Finale::Resting { .. } => return Instruction::Halt,
            }
        }
        self.star_instruction(ctx)
    }

    fn star_instruction(&mut self, ctx: &LocalContext) -> Instruction {
        if self.star.at_stage_start() {
            if let Some(back) = go_home(ctx.position) {
                return back;
            }
        }
        self.star.next_instruction()
    }
}

impl Behavior for GatherAgent {
    fn state(&self) -> StateTag {
        match &self.role {
            Role::Cruiser => StateTag::Cruiser,
            Role::Explorer(_) => StateTag::Explorer,
            Role::Frozen { tag, .. } => *tag,
        }
    }

    fn next_instruction(&mut self, ctx: &LocalContext) -> Instruction {
        match &mut self.role {
            Role::Cruiser => self.star_instruction(ctx),
            Role::Explorer(_) => self.explorer_instruction(ctx),
            Role::Frozen { orders, moving, .. } => match orders.pop_front() {
                Some(target) => {
                    *moving = true;
                    Instruction::go_along(target - ctx.position)
                }
                None => {
                    *moving = false;
                    Instruction::Halt
                }
            },
        }
    }

    fn on_ga(&mut self, view: &GaView) -> Response {
        match self.role {
            Role::Cruiser => self.cruiser_ga(view),
            Role::Explorer(_) => self.explorer_ga(view),
            Role::Frozen { .. } => Response::CONTINUE,
        }
    }

    fn on_order(&mut self, target: Vec2, _ctx: &LocalContext) -> Action {
        let Role::Frozen {
            orders,
            last_order,
            moving,
            ..
        } = &mut self.role
        else {
            return Action::Continue;
        };
        if last_order.is_some_and(|prev| (prev - target).norm() <= POSITION_TOL) {
            return Action::Continue;
        }
        *last_order = Some(target);
        orders.push_back(target);
        if *moving {
            Action::Continue
        } else {
            Action::Replan
        }
    }
}
