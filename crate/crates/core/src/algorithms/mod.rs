//! Agent programs: DEDICATED, GATHER(n), GATHER(A), and the Star search they share.

pub mod dedicated;
pub mod gather;
pub mod star;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Instruction, KnowledgeItem};
use crate::geometry::{lex_max_vec, Vec2};

pub use dedicated::DedicatedProgram;
pub use gather::{gather_a_program, gather_n_program, GatherProgram};
pub use star::{elapsed_through_phase, star_phase_params, StarState};

/// Distance from the start point under which an agent counts as home.
pub(crate) const HOME_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmName {
    Dedicated,
    GatherN,
    GatherA,
}

impl AlgorithmName {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmName::Dedicated => "dedicated",
            AlgorithmName::GatherN => "gather-n",
            AlgorithmName::GatherA => "gather-a",
        }
    }
}

impl fmt::Display for AlgorithmName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown algorithm `{0}` (expected dedicated, gather-n or gather-a)")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for AlgorithmName {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dedicated" => Ok(AlgorithmName::Dedicated),
            "gather-n" => Ok(AlgorithmName::GatherN),
            "gather-a" => Ok(AlgorithmName::GatherA),
            other => Err(UnknownAlgorithm(other.to_string())),
        }
    }
}

/// Start point of the largest known agent, in the owner's frame.
pub(crate) fn largest_known(known: &[KnowledgeItem]) -> Vec2 {
    lex_max_vec(known.iter().map(|k| k.initial_position)).unwrap_or(Vec2::ZERO)
}

/// Move back to the start point, or `None` if already there.
pub(crate) fn go_home(position: Vec2) -> Option<Instruction> {
    (position.norm() > HOME_TOL).then(|| Instruction::go_along(-position))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for name in [
            AlgorithmName::Dedicated,
            AlgorithmName::GatherN,
            AlgorithmName::GatherA,
        ] {
            assert_eq!(name.as_str().parse::<AlgorithmName>(), Ok(name));
        }
        assert!("gather".parse::<AlgorithmName>().is_err());
    }

    #[test]
    fn go_home_ignores_rounding_noise() {
        assert_eq!(go_home(Vec2::new(1e-12, 0.0)), None);
        assert_eq!(
            go_home(Vec2::new(0.0, 2.0)),
            Some(Instruction::Go {
                direction: Vec2::new(0.0, -1.0),
                distance: 2.0
            })
        );
    }
}
