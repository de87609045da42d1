use gathering::algorithms::{gather_n_program, DedicatedProgram};
use gathering::config::{FeasibilityKind, InitialConfiguration};
use gathering::engine::{
    default_horizon, run, AgentProgram, Behavior, EventKind, GaView, Instruction, LocalContext,
    NextEvent, Response, Simulation, StateTag, Trace, Verdict,
};
use gathering::geometry::{Vec2, POSITION_TOL, TIME_TOL};
use gathering::sweep::{generate_configurations, SweepSpec};
use proptest::prelude::*;

/// Every agent runs the same fixed instruction list, then halts.
struct Script(Vec<Instruction>);

struct ScriptAgent {
    rest: Vec<Instruction>,
}

impl Behavior for ScriptAgent {
    fn state(&self) -> StateTag {
        StateTag::Idle
    }

    fn next_instruction(&mut self, _ctx: &LocalContext) -> Instruction {
        if self.rest.is_empty() {
            Instruction::Halt
        } else {
            self.rest.remove(0)
        }
    }

    fn on_ga(&mut self, _view: &GaView) -> Response {
        Response::CONTINUE
    }
}

impl AgentProgram for Script {
    fn name(&self) -> &str {
        "script"
    }

    fn spawn(&self) -> Box<dyn Behavior> {
        Box::new(ScriptAgent {
            rest: self.0.clone(),
        })
    }
}

fn north(d: f64) -> Instruction {
    Instruction::Go {
        direction: Vec2::new(0.0, 1.0),
        distance: d,
    }
}

fn ga_list(trace: &Trace) -> Vec<(f64, Vec<usize>)> {
    trace.ga_events().map(|(t, a)| (t, a.to_vec())).collect()
}

#[test]
fn appearing_next_to_a_waiting_agent_is_a_ga() {
    let cfg = InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0), (0.3, 0.0, 1.0)]).unwrap();
    let trace = run(&cfg, &Script(vec![]), 10.0).unwrap();
    assert_eq!(ga_list(&trace), vec![(1.0, vec![0, 1])]);
}

#[test]
fn agent_crossing_the_midpoint_meets_both_in_one_ga() {
    let script = Script(vec![Instruction::Wait { duration: 3.0 }, north(10.0)]);
    let cfg = InitialConfiguration::from_triples(
        1.0,
        &[(-1.0, 0.0, 6.0), (1.0, 0.0, 6.0), (0.0, -5.0, 0.0)],
    )
    .unwrap();
    let sim = Simulation::new(&cfg, &script, 100.0).unwrap();
    // the moving agent appears first and then waits
    assert_eq!(
        sim.next_event(),
        NextEvent::Appearance {
            time: 0.0,
            agent: 2
        }
    );
    let trace = sim.run().unwrap();
    let gas = ga_list(&trace);
    // a second GA follows when the pair catches up with the halted walker
    assert_eq!(gas.len(), 2, "{gas:?}");
    assert!((gas[0].0 - 8.0).abs() < 1e-9);
    assert_eq!(gas[0].1, vec![0, 1, 2]);
}

#[test]
fn completion_is_the_next_event_for_a_lone_walker() {
    let cfg =
        InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0), (50.0, 0.0, 0.0)]).unwrap();
    let mut sim = Simulation::new(&cfg, &Script(vec![north(2.0)]), 100.0).unwrap();
    sim.step().unwrap();
    assert_eq!(
        sim.next_event(),
        NextEvent::Completion {
            time: 2.0,
            agent: 0
        }
    );
    let trace = sim.run().unwrap();
    assert!(matches!(trace.verdict, Verdict::Split { groups: 2, .. }));
    assert!(trace.stopped.iter().all(|&s| s));
}

#[test]
fn horizon_ends_a_run_with_timeout() {
    let cfg =
        InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0), (50.0, 0.0, 0.0)]).unwrap();
    let trace = run(&cfg, &Script(vec![north(1e6)]), 10.0).unwrap();
    assert_eq!(trace.verdict, Verdict::Timeout);
    assert!(matches!(
        trace.events.last().unwrap().kind,
        EventKind::Horizon
    ));
    assert_eq!(trace.end_time, 10.0);
    assert!((trace.final_positions[0].y - 10.0).abs() < 1e-9);
}

#[test]
fn rejects_bad_instructions_and_short_horizons() {
    let cfg = InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0), (5.0, 0.0, 2.0)]).unwrap();
    let crooked = Script(vec![Instruction::Go {
        direction: Vec2::new(1.0, 1.0),
        distance: 1.0,
    }]);
    assert!(run(&cfg, &crooked, 10.0).is_err());
    assert!(Simulation::new(&cfg, &Script(vec![]), 1.0).is_err());
}

fn check_trace_invariants(cfg: &InitialConfiguration, trace: &Trace) {
    let eps = cfg.epsilon();
    for tr in &trace.trajectories {
        for seg in &tr.segments {
            seg.check_speed().unwrap();
            assert!(seg.end_time >= seg.start_time);
        }
        for w in tr.segments.windows(2) {
            assert!((w[0].end_time - w[1].start_time).abs() <= TIME_TOL);
            assert!(w[0].end_point.dist(w[1].start_point) <= POSITION_TOL);
        }
    }
    let mut last_t = f64::NEG_INFINITY;
    for e in &trace.events {
        assert!(e.t >= last_t - TIME_TOL, "events out of order");
        last_t = e.t;
    }
    let at = |i: usize, t: f64| {
        let a = &cfg.agents()[i];
        (t >= a.start_time).then(|| trace.trajectories[i].position_at(t).unwrap())
    };
    for (t, agents) in trace.ga_events() {
        // some pair inside the group was apart (or absent) just before
        let before = t - 10.0 * TIME_TOL;
        let fresh = agents.iter().enumerate().any(|(k, &i)| {
            agents[k + 1..]
                .iter()
                .any(|&j| match (at(i, before), at(j, before)) {
                    (Some(p), Some(q)) => p.dist(q) > eps,
                    _ => true,
                })
        });
        assert!(fresh, "GA at {t} of {agents:?} had no new pair");
        // and the group is connected now
        let mut reached = vec![agents[0]];
        let mut k = 0;
        while k < reached.len() {
            let u = reached[k];
            for &v in agents {
                if !reached.contains(&v) && at(u, t).unwrap().dist(at(v, t).unwrap()) <= eps + 1e-8
                {
                    reached.push(v);
                }
            }
            k += 1;
        }
        assert_eq!(reached.len(), agents.len(), "GA group at {t} not connected");
    }
    if let Verdict::Gathered { point } = trace.verdict {
        assert!(trace.stopped.iter().all(|&s| s));
        for p in &trace.final_positions {
            assert!(p.dist(point) <= POSITION_TOL);
        }
    }
}

#[test]
fn traces_respect_engine_invariants() {
    for n in [2, 3, 5] {
        let cfgs =
            generate_configurations(&SweepSpec::new(n, 15, 11, FeasibilityKind::Good)).unwrap();
        for cfg in &cfgs {
            let trace = run(cfg, &gather_n_program(n), default_horizon(cfg)).unwrap();
            check_trace_invariants(cfg, &trace);
            let prog = DedicatedProgram::new(cfg).unwrap();
            let trace = run(cfg, &prog, default_horizon(cfg)).unwrap();
            check_trace_invariants(cfg, &trace);
        }
    }
}

#[test]
fn runs_are_bit_identical() {
    let cfg = generate_configurations(&SweepSpec::new(4, 1, 3, FeasibilityKind::Good))
        .unwrap()
        .remove(0);
    let a = run(&cfg, &gather_n_program(4), default_horizon(&cfg)).unwrap();
    let b = run(&cfg, &gather_n_program(4), default_horizon(&cfg)).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert!(a.to_jsonl().ends_with("}\n"));
    let last: serde_json::Value =
        serde_json::from_str(a.to_jsonl().lines().last().unwrap()).unwrap();
    assert_eq!(last["kind"], "verdict");
    assert_eq!(last["verdict"], "gathered");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn outcomes_do_not_depend_on_frame_or_clock(
        seed in 0u64..1000,
        n in 2usize..5,
        dx in -500.0f64..500.0,
        dy in -500.0f64..500.0,
        dt in 0.0f64..100.0,
    ) {
        let cfg = generate_configurations(&SweepSpec::new(n, 1, seed, FeasibilityKind::Good))
            .unwrap()
            .remove(0);
        let moved = cfg.translated(Vec2::new(dx, dy)).time_shifted(dt);
        let prog = gather_n_program(n);
        let a = run(&cfg, &prog, default_horizon(&cfg)).unwrap();
        let b = run(&moved, &prog, default_horizon(&moved)).unwrap();
        let (ga, gb) = (ga_list(&a), ga_list(&b));
        prop_assert_eq!(ga.len(), gb.len());
        for ((ta, xa), (tb, xb)) in ga.iter().zip(&gb) {
            prop_assert_eq!(xa, xb);
            prop_assert!((ta + dt - tb).abs() < 1e-6);
        }
        match (&a.verdict, &b.verdict) {
            (Verdict::Gathered { point: p }, Verdict::Gathered { point: q }) => {
                prop_assert!((*p + Vec2::new(dx, dy)).dist(*q) < 1e-6);
            }
            (va, vb) => prop_assert!(false, "verdicts {:?} / {:?}", va, vb),
        }
        prop_assert_eq!(a.final_states, b.final_states);
    }
}
