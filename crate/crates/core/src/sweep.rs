//! Seeded batches of random configurations run in parallel.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algorithms::{gather_a_program, gather_n_program, AlgorithmName, DedicatedProgram};
use crate::assumption::AssumptionSet;
use crate::config::{classify, AgentStart, ConfigError, FeasibilityKind, InitialConfiguration};
use crate::engine::{default_horizon, run, AgentProgram, StateTag, Trace};
use crate::geometry::{Point, Vec2};

const MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep needs at least one configuration of at least two agents")]
    Empty,
    #[error("scales and epsilon must be positive and finite")]
    BadScale,
    #[error("no {class} configuration found in {attempts} attempts")]
    Exhausted {
        class: FeasibilityKind,
        attempts: usize,
    },
    #[error("gather-a needs an assumption set")]
    MissingAssumptionSet,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub class: FeasibilityKind,
    pub algorithm: AlgorithmName,
    pub assumption_set: Option<AssumptionSet>,
    /// Start points are drawn from `[0, spatial_scale]^2`.
    pub spatial_scale: f64,
    /// Start times are drawn from `[0, time_scale]`.
    pub time_scale: f64,
    pub epsilon: f64,
    pub horizon: Option<f64>,
}

impl SweepSpec {
    pub fn new(n: usize, count: usize, seed: u64, class: FeasibilityKind) -> Self {
        SweepSpec {
            n,
            count,
            seed,
            class,
            algorithm: AlgorithmName::GatherN,
            assumption_set: None,
            spatial_scale: 2.0,
            time_scale: 2.0,
            epsilon: 0.5,
            horizon: None,
        }
    }

    fn validate(&self) -> Result<(), SweepError> {
        if self.count == 0 || self.n < 2 {
            return Err(SweepError::Empty);
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.spatial_scale) && positive(self.time_scale) && positive(self.epsilon)) {
            return Err(SweepError::BadScale);
        }
        if self.algorithm == AlgorithmName::GatherA && self.assumption_set.is_none() {
            return Err(SweepError::MissingAssumptionSet);
        }
        Ok(())
    }
}

fn random_agent(rng: &mut ChaCha8Rng, spec: &SweepSpec) -> AgentStart {
    AgentStart {
        position: Point::new(
            rng.gen::<f64>() * spec.spatial_scale,
            rng.gen::<f64>() * spec.spatial_scale,
        ),
        start_time: rng.gen::<f64>() * spec.time_scale,
    }
}

fn sample_by_rejection(
    rng: &mut ChaCha8Rng,
    spec: &SweepSpec,
) -> Result<InitialConfiguration, SweepError> {
    for _ in 0..MAX_ATTEMPTS {
        let agents = (0..spec.n).map(|_| random_agent(rng, spec)).collect();
        let Ok(cfg) = InitialConfiguration::new(spec.epsilon, agents) else {
            continue;
        };
        if classify(&cfg).kind == spec.class {
            return Ok(cfg);
        }
    }
    Err(SweepError::Exhausted {
        class: spec.class,
        attempts: MAX_ATTEMPTS,
    })
}

/// A boundary pair (`|dt| = d - eps`) plus agents that are strictly short
/// of every other agent.
fn construct_bad(
    rng: &mut ChaCha8Rng,
    spec: &SweepSpec,
) -> Result<InitialConfiguration, SweepError> {
    let eps = spec.epsilon;
    for _ in 0..MAX_ATTEMPTS {
        let first = random_agent(rng, spec);
        let d = eps + rng.gen::<f64>() * spec.time_scale;
        let dir = Vec2::from_bearing(rng.gen::<f64>() * std::f64::consts::TAU);
        let mut agents = vec![
            first,
            AgentStart {
                position: first.position + dir * d,
                start_time: first.start_time + (d - eps),
            },
        ];
        let mut tries = 0;
        while agents.len() < spec.n && tries < MAX_ATTEMPTS {
            tries += 1;
            let cand = random_agent(rng, spec);
            let short = agents.iter().all(|a| {
                (a.start_time - cand.start_time).abs() < a.position.dist(cand.position) - eps - 1e-6
            });
            if short {
                agents.push(cand);
            }
        }
        if agents.len() < spec.n {
            continue;
        }
        let Ok(cfg) = InitialConfiguration::new(eps, agents) else {
            continue;
        };
        if classify(&cfg).kind == FeasibilityKind::Bad {
            return Ok(cfg);
        }
    }
    Err(SweepError::Exhausted {
        class: FeasibilityKind::Bad,
        attempts: MAX_ATTEMPTS,
    })
}

/// The `count` configurations a spec describes, in order.
pub fn generate_configurations(spec: &SweepSpec) -> Result<Vec<InitialConfiguration>, SweepError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count)
        .map(|_| match spec.class {
            FeasibilityKind::Bad => construct_bad(&mut rng, spec),
            _ => sample_by_rejection(&mut rng, spec),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub index: usize,
    pub verdict: String,
    pub gathering_time: Option<f64>,
    pub ga_count: usize,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub runs: Vec<RunOutcome>,
}

impl SweepReport {
    pub fn gathered(&self) -> usize {
        self.runs.iter().filter(|r| r.verdict == "gathered").count()
    }

    pub fn gather_rate(&self) -> f64 {
        self.gathered() as f64 / self.runs.len() as f64
    }

    pub fn max_gathering_time(&self) -> Option<f64> {
        self.runs
            .iter()
            .filter_map(|r| r.gathering_time)
            .max_by(f64::total_cmp)
    }

    pub fn total_ga_events(&self) -> usize {
        self.runs.iter().map(|r| r.ga_count).sum()
    }

    pub fn violations(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        self.runs
            .iter()
            .flat_map(|r| r.violations.iter().map(move |v| (r.index, v.as_str())))
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.spec;
        writeln!(
            f,
            "sweep: n={} count={} seed={} class={} algorithm={}",
            s.n, s.count, s.seed, s.class, s.algorithm
        )?;
        writeln!(
            f,
            "gathered:           {}/{}",
            self.gathered(),
            self.runs.len()
        )?;
        writeln!(f, "gather rate:        {:.2}", self.gather_rate())?;
        match self.max_gathering_time() {
            Some(t) => writeln!(f, "max gathering time: {t:.3}")?,
            None => writeln!(f, "max gathering time: -")?,
        }
        writeln!(f, "GA events:          {}", self.total_ga_events())?;
        let violations: Vec<_> = self.violations().collect();
        writeln!(f, "violations:         {}", violations.len())?;
        for (i, v) in violations {
            writeln!(f, "  #{i}: {v}")?;
        }
        Ok(())
    }
}

fn program_for(spec: &SweepSpec, cfg: &InitialConfiguration) -> Box<dyn AgentProgram + Send> {
    match spec.algorithm {
        AlgorithmName::Dedicated => Box::new(DedicatedProgram::unchecked(cfg)),
        AlgorithmName::GatherN => Box::new(gather_n_program(cfg.len())),
        AlgorithmName::GatherA => Box::new(gather_a_program(
            spec.assumption_set.as_ref().expect("validated"),
        )),
    }
}

fn check(spec: &SweepSpec, trace: &Trace) -> Vec<String> {
    let mut out = Vec::new();
    match spec.class {
        FeasibilityKind::Ungatherable => {
            if trace.ga_count() > 0 {
                out.push(format!(
                    "{} GA events on an ungatherable configuration",
                    trace.ga_count()
                ));
            }
        }
        FeasibilityKind::Good => {
            if !trace.verdict.is_gathered() {
                out.push(format!(
                    "verdict {} on a good configuration",
                    trace.verdict.label()
                ));
            }
            if spec.algorithm != AlgorithmName::Dedicated {
                if !trace.ever_entered(StateTag::Token) {
                    out.push("no agent became a token".into());
                }
                if trace.count_final_state(StateTag::Cruiser) > 0 {
                    out.push("cruisers left at the end".into());
                }
                let explorers = trace.count_final_state(StateTag::Explorer);
                if trace.verdict.is_gathered() && explorers != 1 {
                    out.push(format!("{explorers} explorers at the end"));
                }
            }
        }
        FeasibilityKind::Bad => {
            if spec.algorithm == AlgorithmName::Dedicated && !trace.verdict.is_gathered() {
                out.push(format!(
                    "verdict {} on a gatherable configuration",
                    trace.verdict.label()
                ));
            }
        }
    }
    out
}

/// Generates and simulates every configuration of `spec`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport, SweepError> {
    let configs = generate_configurations(spec)?;
    let mut runs: Vec<RunOutcome> = configs
        .par_iter()
        .enumerate()
        .map(|(index, cfg)| {
            let program = program_for(spec, cfg);
            let horizon = spec.horizon.unwrap_or_else(|| default_horizon(cfg));
            match run(cfg, program.as_ref(), horizon) {
                Ok(trace) => RunOutcome {
                    index,
                    verdict: trace.verdict.label().to_string(),
                    gathering_time: trace.gathering_time(),
                    ga_count: trace.ga_count(),
                    violations: check(spec, &trace),
                },
                Err(e) => RunOutcome {
                    index,
                    verdict: "error".into(),
                    gathering_time: None,
                    ga_count: 0,
                    violations: vec![e.to_string()],
                },
            }
        })
        .collect();
    runs.sort_by_key(|r| r.index);
    Ok(SweepReport {
        spec: spec.clone(),
        runs,
    })
}
