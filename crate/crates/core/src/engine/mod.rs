//! Deterministic discrete-event simulation of agents in the plane.
//!
//! Between two consecutive events every agent moves linearly, so pairwise
//! distances are convex in time and the next approach of each non-adjacent
//! pair is the root of a quadratic. At every instant the engine completes
//! finished instructions, lets pending agents appear, recomputes the
//! proximity graph and turns each component that gained an edge into one GA
//! (gossip, then one callback per participant).

mod graph;
mod program;
mod trace;

pub use graph::{form_ga_groups, Adjacency};
pub use program::{
    translate_knowledge, Action, AgentProgram, AgentRef, Behavior, GaView, Instruction,
    KnowledgeItem, LocalContext, Participant, Response, StateTag,
};
pub use trace::{cluster_points, Event, EventKind, Trace, Verdict};

use thiserror::Error;

use crate::config::InitialConfiguration;
use crate::geometry::{
    linear_first_entry, Point, Segment, Trajectory, Vec2, POSITION_TOL, TIME_TOL,
};

/// Slack on the contact radius so that approaches landing within
/// [`TIME_TOL`] of an instant (relative speed at most 2) join that instant.
pub const CONTACT_SLACK: f64 = 4.0 * TIME_TOL;

const MAX_INSTANT_INSTRUCTIONS: usize = 10_000;
const MAX_IDLE_INSTANTS: usize = 1_000;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("agent {agent} issued an invalid instruction: {reason}")]
    InvalidInstruction { agent: usize, reason: String },
    #[error("agent {agent} issued {MAX_INSTANT_INSTRUCTIONS} zero-length instructions at t={t}")]
    InstructionLoop { agent: usize, t: f64 },
    #[error("horizon {horizon} does not exceed the last start time {last_start}")]
    HorizonTooShort { horizon: f64, last_start: f64 },
    #[error("simulation stalled at t={0}")]
    Stalled(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MotionKind {
    Step,
    Final,
    Halt,
}

#[derive(Debug, Clone, Copy)]
struct Motion {
    start_time: f64,
    start: Point,
    velocity: Vec2,
    end_time: f64,
    end: Point,
    kind: MotionKind,
}

impl Motion {
    fn halt(t: f64, at: Point) -> Self {
        Motion {
            start_time: t,
            start: at,
            velocity: Vec2::ZERO,
            end_time: f64::INFINITY,
            end: at,
            kind: MotionKind::Halt,
        }
    }

    fn position_at(&self, t: f64) -> Point {
        if t >= self.end_time {
            self.end
        } else {
            self.start + self.velocity * (t - self.start_time).max(0.0)
        }
    }
}

/// Engine-side record of one agent.
struct AgentRuntime {
    frame_origin: Point,
    appear_time: f64,
    appeared: bool,
    trajectory: Trajectory,
    /// `None` while waiting for the next instruction.
    motion: Option<Motion>,
    rest: Point,
    behavior: Box<dyn Behavior>,
    knowledge: Vec<KnowledgeItem>,
}

impl AgentRuntime {
    fn position(&self, t: f64) -> Point {
        self.motion.map_or(self.rest, |m| m.position_at(t))
    }

    fn stopped(&self) -> bool {
        matches!(self.motion, Some(m) if m.kind == MotionKind::Halt)
    }

    fn velocity(&self) -> Vec2 {
        self.motion.map_or(Vec2::ZERO, |m| m.velocity)
    }

    fn end_time(&self) -> f64 {
        self.motion.map_or(f64::INFINITY, |m| m.end_time)
    }

    /// Ends the current motion at `t`, recording the travelled piece.
    fn close_motion(&mut self, t: f64) {
        if let Some(m) = self.motion.take() {
            let end = m.position_at(t);
            if t > m.start_time {
                self.trajectory.segments.push(Segment {
                    start_time: m.start_time,
                    end_time: t,
                    start_point: m.start,
                    end_point: end,
                });
            }
            self.rest = end;
        }
    }

    fn context(&self, t: f64) -> LocalContext {
        LocalContext {
            local_time: t - self.appear_time,
            position: self.position(t) - self.frame_origin,
        }
    }
}

/// What triggers the next instant.
#[derive(Debug, Clone, PartialEq)]
pub enum NextEvent {
    Appearance {
        time: f64,
        agent: usize,
    },
    Approach {
        time: f64,
        pair: (usize, usize),
    },
    Completion {
        time: f64,
        agent: usize,
    },
    /// Nothing can happen any more: every agent is stopped.
    Quiescent,
}

impl NextEvent {
    pub fn time(&self) -> Option<f64> {
        match *self {
            NextEvent::Appearance { time, .. }
            | NextEvent::Approach { time, .. }
            | NextEvent::Completion { time, .. } => Some(time),
            NextEvent::Quiescent => None,
        }
    }
}

/// One running simulation; a self-contained value.
pub struct Simulation {
    epsilon: f64,
    horizon: f64,
    now: f64,
    agents: Vec<AgentRuntime>,
    adjacency: Adjacency,
    events: Vec<Event>,
    idle_instants: usize,
    finished: Option<Verdict>,
}

impl Simulation {
    pub fn new(
        cfg: &InitialConfiguration,
        program: &dyn AgentProgram,
        horizon: f64,
    ) -> Result<Self, EngineError> {
        let last_start = cfg.max_start_time();
        if horizon.is_nan() || horizon <= last_start {
            return Err(EngineError::HorizonTooShort {
                horizon,
                last_start,
            });
        }
        let agents = cfg
            .agents()
            .iter()
            .enumerate()
            .map(|(i, a)| AgentRuntime {
                frame_origin: a.position,
                appear_time: a.start_time,
                appeared: false,
                trajectory: Trajectory::new(a.start_time, a.position),
                motion: None,
                rest: a.position,
                behavior: program.spawn(),
                knowledge: vec![KnowledgeItem {
                    agent: AgentRef::new(i),
                    initial_position: Vec2::ZERO,
                    last_known_state: StateTag::Idle,
                }],
            })
            .collect::<Vec<_>>();
        let n = agents.len();
        let first = cfg
            .agents()
            .iter()
            .map(|a| a.start_time)
            .fold(f64::INFINITY, f64::min);
        Ok(Simulation {
            epsilon: cfg.epsilon(),
            horizon,
            now: first,
            agents,
            adjacency: Adjacency::new(n),
            events: Vec::new(),
            idle_instants: 0,
            finished: None,
        })
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn is_finished(&self) -> bool {
        self.finished.is_some()
    }

    /// Current global position of agent `i` (observer view).
    pub fn position(&self, i: usize) -> Point {
        self.agents[i].position(self.now)
    }

    pub fn state(&self, i: usize) -> StateTag {
        self.agents[i].behavior.state()
    }

    /// The earliest upcoming trigger: appearance, approach of a non-adjacent
    /// pair, or instruction completion.
    pub fn next_event(&self) -> NextEvent {
        let mut best = NextEvent::Quiescent;
        let mut best_t = f64::INFINITY;
        let mut consider = |t: f64, ev: NextEvent| {
            if t < best_t {
                best_t = t;
                best = ev;
            }
        };
        for (i, a) in self.agents.iter().enumerate() {
            if !a.appeared {
                consider(
                    a.appear_time,
                    NextEvent::Appearance {
                        time: a.appear_time,
                        agent: i,
                    },
                );
            } else {
                let end = a.end_time();
                if end.is_finite() {
                    consider(
                        end,
                        NextEvent::Completion {
                            time: end,
                            agent: i,
                        },
                    );
                }
            }
        }
        for i in 0..self.agents.len() {
            let a = &self.agents[i];
            if !a.appeared {
                continue;
            }
            for j in i + 1..self.agents.len() {
                let b = &self.agents[j];
                if !b.appeared || self.adjacency.get(i, j) {
                    continue;
                }
                let rel = b.position(self.now) - a.position(self.now);
                let vel = b.velocity() - a.velocity();
                let window = a.end_time().min(b.end_time()) - self.now;
                if let Some(s) = linear_first_entry(rel, vel, self.epsilon, window) {
                    let t = self.now + s;
                    consider(
                        t,
                        NextEvent::Approach {
                            time: t,
                            pair: (i, j),
                        },
                    );
                }
            }
        }
        best
    }

    /// Advances to the next instant. Returns `false` once the run is over.
    pub fn step(&mut self) -> Result<bool, EngineError> {
        if self.finished.is_some() {
            return Ok(false);
        }
        match self.next_event().time() {
            None => {
                self.finish_quiescent();
                Ok(false)
            }
            Some(t) if t > self.horizon => {
                self.finish_timeout();
                Ok(false)
            }
            Some(t) => {
                self.process_instant(t.max(self.now))?;
                Ok(true)
            }
        }
    }

    pub fn run(mut self) -> Result<Trace, EngineError> {
        while self.step()? {}
        Ok(self.into_trace())
    }

    fn process_instant(&mut self, t: f64) -> Result<(), EngineError> {
        self.now = t;
        let mut changed = false;

        // finished instructions
        for i in 0..self.agents.len() {
            let a = &mut self.agents[i];
            let Some(m) = a.motion else { continue };
            if m.kind == MotionKind::Halt || m.end_time > t + TIME_TOL {
                continue;
            }
            changed = true;
            if t > m.start_time {
                a.trajectory.segments.push(Segment {
                    start_time: m.start_time,
                    end_time: t,
                    start_point: m.start,
                    end_point: m.end,
                });
            }
            a.motion = None;
            a.rest = m.end;
            if m.kind == MotionKind::Final {
                a.motion = Some(Motion::halt(t, m.end));
                self.events.push(Event::stop(t, i, m.end));
            }
        }

        // appearances
        for (i, a) in self.agents.iter_mut().enumerate() {
            if !a.appeared && a.appear_time <= t + TIME_TOL {
                changed = true;
                a.appeared = true;
                a.rest = a.frame_origin;
                self.events.push(Event::appear(t, i, a.frame_origin));
            }
        }

        // proximity graph
        let n = self.agents.len();
        let positions: Vec<Point> = self.agents.iter().map(|a| a.position(t)).collect();
        let mut adj = Adjacency::new(n);
        for i in 0..n {
            if !self.agents[i].appeared {
                continue;
            }
            for j in i + 1..n {
                if self.agents[j].appeared
                    && positions[i].dist(positions[j]) <= self.epsilon + CONTACT_SLACK
                {
                    adj.set(i, j, true);
                }
            }
        }
        let new_edges = adj.new_edges(&self.adjacency);
        let groups = form_ga_groups(&adj, &new_edges);
        self.adjacency = adj;
        changed |= !groups.is_empty();
        for group in &groups {
            self.process_ga(group, &positions);
        }

        for i in 0..n {
            if self.agents[i].appeared && self.agents[i].motion.is_none() {
                self.fetch_instruction(i)?;
            }
        }

        if changed {
            self.idle_instants = 0;
        } else {
            self.idle_instants += 1;
            if self.idle_instants > MAX_IDLE_INSTANTS {
                return Err(EngineError::Stalled(t));
            }
        }
        Ok(())
    }

    /// Gossip followed by the participants' callbacks and any orders.
    fn process_ga(&mut self, group: &[usize], positions: &[Point]) {
        let t = self.now;
        let group_positions: Vec<Point> = group.iter().map(|&i| positions[i]).collect();
        self.events
            .push(Event::ga(t, group.to_vec(), &group_positions));

        let tags: Vec<StateTag> = group
            .iter()
            .map(|&i| self.agents[i].behavior.state())
            .collect();

        // Sender s tells receiver b about item c in s's frame; b knows where s
        // currently is in both frames, which fixes the offset between them.
        let snapshot: Vec<Vec<KnowledgeItem>> = group
            .iter()
            .map(|&i| self.agents[i].knowledge.clone())
            .collect();
        for (bi, &b) in group.iter().enumerate() {
            for (si, &s) in group.iter().enumerate() {
                if si == bi {
                    continue;
                }
                let seen_by_b = positions[s] - self.agents[b].frame_origin;
                let own_view = positions[s] - self.agents[s].frame_origin;
                let offset = seen_by_b - own_view;
                for item in &snapshot[si] {
                    let known = &mut self.agents[b].knowledge;
                    if !known.iter().any(|k| k.agent == item.agent) {
                        known.push(translate_knowledge(item, offset));
                    }
                }
            }
            let known = &mut self.agents[b].knowledge;
            for (k, &m) in group.iter().enumerate() {
                let r = AgentRef::new(m);
                if let Some(item) = known.iter_mut().find(|it| it.agent == r) {
                    item.last_known_state = tags[k];
                }
            }
        }

        let mut responses = Vec::with_capacity(group.len());
        for (bi, &b) in group.iter().enumerate() {
            let origin = self.agents[b].frame_origin;
            let known = self.agents[b].knowledge.clone();
            let participants = group
                .iter()
                .zip(&tags)
                .map(|(&m, &state)| {
                    let agent = AgentRef::new(m);
                    let initial_position = known
                        .iter()
                        .find(|k| k.agent == agent)
                        .map(|k| k.initial_position)
                        .expect("gossip delivers every participant's start point");
                    Participant {
                        agent,
                        position: positions[m] - origin,
                        state,
                        initial_position,
                    }
                })
                .collect();
            let view = GaView {
                local_time: t - self.agents[b].appear_time,
                position: positions[b] - origin,
                participants,
                self_index: bi,
                known,
            };
            responses.push(self.agents[b].behavior.on_ga(&view));
        }

        let mut replan = vec![false; group.len()];
        for (bi, r) in responses.iter().enumerate() {
            replan[bi] |= r.action == Action::Replan;
        }
        for (bi, r) in responses.iter().enumerate() {
            let Some(target) = r.order else { continue };
            let issuer = group[bi];
            let global = self.agents[issuer].frame_origin + target;
            let recipients: Vec<usize> = group.iter().copied().filter(|&m| m != issuer).collect();
            self.events
                .push(Event::order(t, issuer, recipients.clone(), global));
            for (ri, &m) in group.iter().enumerate() {
                if m == issuer {
                    continue;
                }
                let local = global - self.agents[m].frame_origin;
                let ctx = self.agents[m].context(t);
                if self.agents[m].behavior.on_order(local, &ctx) == Action::Replan {
                    replan[ri] = true;
                }
            }
        }

        for (bi, &b) in group.iter().enumerate() {
            let after = self.agents[b].behavior.state();
            if after != tags[bi] {
                self.events.push(Event {
                    t,
                    kind: EventKind::State {
                        agent: b,
                        from: tags[bi],
                        to: after,
                    },
                });
            }
            if replan[bi] {
                self.agents[b].close_motion(t);
            }
        }
    }

    fn fetch_instruction(&mut self, i: usize) -> Result<(), EngineError> {
        let t = self.now;
        for _ in 0..MAX_INSTANT_INSTRUCTIONS {
            let a = &mut self.agents[i];
            let ctx = a.context(t);
            let before = a.behavior.state();
            let instr = a.behavior.next_instruction(&ctx);
            let after = a.behavior.state();
            if after != before {
                self.events.push(Event {
                    t,
                    kind: EventKind::State {
                        agent: i,
                        from: before,
                        to: after,
                    },
                });
            }
            let a = &mut self.agents[i];
            instr
                .validate()
                .map_err(|reason| EngineError::InvalidInstruction { agent: i, reason })?;
            let here = a.rest;
            let motion = match instr {
                Instruction::Go {
                    direction,
                    distance,
                } => {
                    if distance <= TIME_TOL {
                        continue;
                    }
                    Motion {
                        start_time: t,
                        start: here,
                        velocity: direction,
                        end_time: t + distance,
                        end: here + direction * distance,
                        kind: MotionKind::Step,
                    }
                }
                Instruction::Wait { duration } => {
                    if duration <= TIME_TOL {
                        continue;
                    }
                    Motion {
                        start_time: t,
                        start: here,
                        velocity: Vec2::ZERO,
                        end_time: t + duration,
                        end: here,
                        kind: MotionKind::Step,
                    }
                }
                Instruction::GotoAndStop { target } => {
                    let goal = a.frame_origin + target;
                    let d = here.dist(goal);
                    if d <= POSITION_TOL * 1e-3 {
                        self.events.push(Event::stop(t, i, here));
                        Motion::halt(t, here)
                    } else {
                        Motion {
                            start_time: t,
                            start: here,
                            velocity: (goal - here) * (1.0 / d),
                            end_time: t + d,
                            end: goal,
                            kind: MotionKind::Final,
                        }
                    }
                }
                Instruction::Halt => {
                    self.events.push(Event::stop(t, i, here));
                    Motion::halt(t, here)
                }
            };
            self.agents[i].motion = Some(motion);
            return Ok(());
        }
        Err(EngineError::InstructionLoop { agent: i, t })
    }

    fn close_all(&mut self, t: f64) {
        for a in &mut self.agents {
            if a.appeared {
                let halted = a.stopped();
                let m = a.motion;
                a.close_motion(t);
                if halted {
                    a.motion = m.map(|m| Motion::halt(t, m.end));
                }
            }
        }
    }

    fn finish_quiescent(&mut self) {
        let t = self.now;
        self.close_all(t);
        let finals: Vec<Point> = self.agents.iter().map(|a| a.rest).collect();
        let groups = cluster_points(&finals);
        let verdict = if groups.len() == 1 {
            let pts = &finals;
            let k = pts.len() as f64;
            let sum = pts
                .iter()
                .fold(Vec2::ZERO, |acc, p| acc + (*p - Point::ORIGIN));
            Verdict::Gathered {
                point: Point::ORIGIN + sum * (1.0 / k),
            }
        } else {
            Verdict::Split {
                groups: groups.len(),
                points: groups.iter().map(|g| finals[g[0]]).collect(),
            }
        };
        self.finished = Some(verdict);
    }

    fn finish_timeout(&mut self) {
        let h = self.horizon;
        self.now = h;
        self.close_all(h);
        self.events.push(Event {
            t: h,
            kind: EventKind::Horizon,
        });
        self.finished = Some(Verdict::Timeout);
    }

    /// Final trace; only meaningful once [`Simulation::step`] returned `false`.
    pub fn into_trace(self) -> Trace {
        let verdict = self.finished.unwrap_or(Verdict::Timeout);
        Trace {
            final_positions: self.agents.iter().map(|a| a.rest).collect(),
            final_states: self.agents.iter().map(|a| a.behavior.state()).collect(),
            stopped: self
                .agents
                .iter()
                .map(|a| !a.appeared || a.stopped())
                .collect(),
            trajectories: self.agents.into_iter().map(|a| a.trajectory).collect(),
            end_time: self.now,
            events: self.events,
            verdict,
        }
    }
}

/// Simulates every agent of `cfg` running `program` until all stop or
/// `horizon` is reached.
pub fn run(
    cfg: &InitialConfiguration,
    program: &dyn AgentProgram,
    horizon: f64,
) -> Result<Trace, EngineError> {
    Simulation::new(cfg, program, horizon)?.run()
}

/// Horizon used when none is given.
///
/// `50 (diameter + last start + n) + 100 / min(eps, 1)` plus the time a Star
/// search needs to finish the phase that covers the whole configuration at
/// the configuration's visibility scale; the first term alone ends long
/// before phase 4 of a Star search.
pub fn default_horizon(cfg: &InitialConfiguration) -> f64 {
    let eps_floor = cfg.epsilon().min(1.0);
    let spread = cfg.diameter() + cfg.max_start_time();
    let base = 50.0 * (spread + cfg.len() as f64) + 100.0 / eps_floor;
    let phase = (spread.ceil() + (1.0 / eps_floor).ceil()) as u32 + cfg.len() as u32;
    base + cfg.max_start_time() + crate::algorithms::star::elapsed_through_phase(phase)
}
