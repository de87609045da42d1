//! The boundary between the simulator and agent logic.
//!
//! Programs only ever see data expressed in their own frame (origin at their
//! start point, clock started at appearance): no absolute coordinates, no
//! global time and no visibility radius cross this boundary.

use serde::Serialize;

use crate::geometry::Vec2;

/// Opaque token identifying an agent inside one simulation.
///
/// Supports equality and hashing only. Agents cannot order each other by it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentRef(u32);

impl AgentRef {
    pub(crate) fn new(index: usize) -> Self {
        AgentRef(index as u32)
    }
}

/// State an agent declares to the others during a GA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateTag {
    Beginner,
    Passive,
    Active,
    Cruiser,
    Explorer,
    Token,
    Shadow,
    Idle,
}

impl StateTag {
    pub fn as_str(self) -> &'static str {
        match self {
            StateTag::Beginner => "beginner",
            StateTag::Passive => "passive",
            StateTag::Active => "active",
            StateTag::Cruiser => "cruiser",
            StateTag::Explorer => "explorer",
            StateTag::Token => "token",
            StateTag::Shadow => "shadow",
            StateTag::Idle => "idle",
        }
    }
}

/// What an agent knows about one other agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnowledgeItem {
    pub agent: AgentRef,
    /// Start point of `agent` in the owner's frame.
    pub initial_position: Vec2,
    pub last_known_state: StateTag,
}

/// Re-expresses an item learned from a sender in the receiver's frame.
///
/// `offset` is the sender's frame origin as seen in the receiver's frame.
pub fn translate_knowledge(item: &KnowledgeItem, offset: Vec2) -> KnowledgeItem {
    KnowledgeItem {
        initial_position: item.initial_position + offset,
        ..*item
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instruction {
    /// Move along a unit `direction` for `distance`.
    Go { direction: Vec2, distance: f64 },
    /// Stay put for `duration`.
    Wait { duration: f64 },
    /// Move to `target` (own frame) and stop there.
    GotoAndStop { target: Vec2 },
    /// Stay put until the next GA.
    Halt,
}

impl Instruction {
    /// Go straight by `v`.
    pub fn go_along(v: Vec2) -> Instruction {
        match v.normalized() {
            Some(direction) => Instruction::Go {
                direction,
                distance: v.norm(),
            },
            None => Instruction::Wait { duration: 0.0 },
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        match *self {
            Instruction::Go {
                direction,
                distance,
            } => {
                if !direction.is_finite() || (direction.norm() - 1.0).abs() > 1e-9 {
                    return Err(format!("direction {direction} is not a unit vector"));
                }
                if !(distance.is_finite() && distance >= 0.0) {
                    return Err(format!("invalid distance {distance}"));
                }
            }
            Instruction::Wait { duration } => {
                if !(duration.is_finite() && duration >= 0.0) {
                    return Err(format!("invalid wait duration {duration}"));
                }
            }
            Instruction::GotoAndStop { target } => {
                if !target.is_finite() {
                    return Err("non-finite target".into());
                }
            }
            Instruction::Halt => {}
        }
        Ok(())
    }
}

/// What an agent knows about itself when asked for its next instruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalContext {
    /// Time since own appearance.
    pub local_time: f64,
    /// Current position in own frame.
    pub position: Vec2,
}

/// One GA participant as seen by the observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Participant {
    pub agent: AgentRef,
    /// Current position in the observer's frame.
    pub position: Vec2,
    /// State declared at the start of the GA.
    pub state: StateTag,
    /// Start point in the observer's frame.
    pub initial_position: Vec2,
}

/// Everything an agent learns at a GA, after gossip.
#[derive(Debug, Clone, PartialEq)]
pub struct GaView {
    pub local_time: f64,
    pub position: Vec2,
    pub participants: Vec<Participant>,
    pub self_index: usize,
    pub known: Vec<KnowledgeItem>,
}

impl GaView {
    pub fn me(&self) -> &Participant {
        &self.participants[self.self_index]
    }

    pub fn others(&self) -> impl Iterator<Item = &Participant> + '_ {
        self.participants
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.self_index)
            .map(|(_, p)| p)
    }

    pub fn context(&self) -> LocalContext {
        LocalContext {
            local_time: self.local_time,
            position: self.position,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Keep executing the interrupted instruction.
    Continue,
    /// Drop the current instruction and ask for a new one.
    Replan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub action: Action,
    /// Order every other participant to go to this point (own frame) and stop.
    pub order: Option<Vec2>,
}

impl Response {
    pub const CONTINUE: Response = Response {
        action: Action::Continue,
        order: None,
    };
    pub const REPLAN: Response = Response {
        action: Action::Replan,
        order: None,
    };
}

/// Per-agent logic driven by the engine.
pub trait Behavior: Send {
    fn state(&self) -> StateTag;

    fn next_instruction(&mut self, ctx: &LocalContext) -> Instruction;

    fn on_ga(&mut self, view: &GaView) -> Response;

    /// An order from another participant; `target` is in own frame.
    fn on_order(&mut self, _target: Vec2, _ctx: &LocalContext) -> Action {
        Action::Continue
    }
}

/// A deterministic algorithm run identically by every agent.
pub trait AgentProgram: Sync {
    fn name(&self) -> &str;

    fn spawn(&self) -> Box<dyn Behavior>;
}
