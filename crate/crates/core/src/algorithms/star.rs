//! Procedure Star: phased out-and-back exploration around the start point.
//!
//! Phase `x` sends `k` rays of length `x`, consecutive rays `alpha` apart
//! clockwise from North, with `sin(alpha / 2) = 1 / (2 x^2)` so that
//! consecutive ray tips are exactly `1 / x` apart. After each ray the agent
//! waits `x` at its start point, so every stage lasts `3x`.

use std::f64::consts::TAU;

use crate::engine::Instruction;
use crate::geometry::Vec2;

/// `(alpha, k)` for phase `x >= 1`.
pub fn star_phase_params(x: u32) -> (f64, u32) {
    assert!(x >= 1, "Star phases start at 1");
    let xf = f64::from(x);
    let alpha = 2.0 * (1.0 / (2.0 * xf * xf)).asin();
    let ratio = TAU / alpha;
    // 2pi/alpha is an integer for x = 1 but lands a hair above or below it
    let k = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round()
    } else {
        ratio.ceil()
    };
    (alpha, k as u32)
}

pub fn stage_duration(x: u32) -> f64 {
    3.0 * f64::from(x)
}

pub fn phase_duration(x: u32) -> f64 {
    let (_, k) = star_phase_params(x);
    f64::from(k) * stage_duration(x)
}

/// Time from the start of Star until phase `x` is complete.
pub fn elapsed_through_phase(x: u32) -> f64 {
    (1..=x).map(phase_duration).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageProgress {
    Outbound,
    Inbound,
    Waiting,
}

/// Resumable position inside Procedure Star: the next instruction to emit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarState {
    phase: u32,
    stage: u32,
    alpha: f64,
    k: u32,
    progress: StageProgress,
}

impl Default for StarState {
    fn default() -> Self {
        Self::at_phase(1)
    }
}

impl StarState {
    /// Stage 1 of phase `x`, nothing emitted yet.
    pub fn at_phase(x: u32) -> Self {
        let (alpha, k) = star_phase_params(x);
        StarState {
            phase: x,
            stage: 1,
            alpha,
            k,
            progress: StageProgress::Outbound,
        }
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn stages_in_phase(&self) -> u32 {
        self.k
    }

    pub fn progress(&self) -> StageProgress {
        self.progress
    }

    /// True when the previous stage (if any) is fully emitted.
    pub fn at_stage_start(&self) -> bool {
        self.progress == StageProgress::Outbound
    }

    /// Unit direction of the current stage's ray.
    pub fn ray(&self) -> Vec2 {
        Vec2::from_bearing(f64::from(self.stage - 1) * self.alpha)
    }

    pub fn next_instruction(&mut self) -> Instruction {
        let x = f64::from(self.phase);
        match self.progress {
            StageProgress::Outbound => {
                self.progress = StageProgress::Inbound;
                Instruction::Go {
                    direction: self.ray(),
                    distance: x,
                }
            }
            StageProgress::Inbound => {
                self.progress = StageProgress::Waiting;
                Instruction::Go {
                    direction: -self.ray(),
                    distance: x,
                }
            }
            StageProgress::Waiting => {
                if self.stage == self.k {
                    *self = StarState::at_phase(self.phase + 1);
                } else {
                    self.stage += 1;
                    self.progress = StageProgress::Outbound;
                }
                Instruction::Wait { duration: x }
            }
        }
    }
}
