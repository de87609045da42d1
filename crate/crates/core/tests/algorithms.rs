use gathering::algorithms::{gather_a_program, gather_n_program, DedicatedProgram};
use gathering::assumption::AssumptionSet;
use gathering::config::InitialConfiguration;
use gathering::engine::{default_horizon, run, EventKind, StateTag, Verdict};
use gathering::geometry::Point;

fn gather_point(v: &Verdict) -> Point {
    match v {
        Verdict::Gathered { point } => *point,
        other => panic!("expected gathering, got {other:?}"),
    }
}

#[test]
fn gather_two_three_matches_gather_two_on_pairs() {
    let cfg = InitialConfiguration::from_triples(0.5, &[(0.0, 0.0, 0.0), (1.0, 0.0, 2.0)]).unwrap();
    let set: AssumptionSet = "2,3".parse().unwrap();
    let a = run(&cfg, &gather_a_program(&set), default_horizon(&cfg)).unwrap();
    let n = run(&cfg, &gather_n_program(2), default_horizon(&cfg)).unwrap();
    assert_eq!(a.events, n.events);
    assert!(gather_point(&a.verdict).dist(Point::new(1.0, 0.0)) < 1e-6);
}

#[test]
fn distant_third_agent_joins_a_temporary_gathering() {
    let cfg = InitialConfiguration::from_triples(
        0.5,
        &[(0.0, 0.0, 0.0), (0.25, 0.0, 0.5), (6.0, 3.0, 0.2)],
    )
    .unwrap();
    let set: AssumptionSet = "2,3".parse().unwrap();
    let trace = run(&cfg, &gather_a_program(&set), default_horizon(&cfg)).unwrap();
    let p = gather_point(&trace.verdict);
    assert!(p.dist(Point::new(6.0, 3.0)) < 1e-6, "gathered at {p}");

    // the close pair stopped together before the third agent ever met them
    let first_contact_with_2 = trace
        .ga_events()
        .find(|(_, agents)| agents.contains(&2))
        .map(|(t, _)| t)
        .unwrap();
    let early_stops: Vec<usize> = trace
        .events
        .iter()
        .filter(|e| e.t < first_contact_with_2)
        .filter_map(|e| match e.kind {
            EventKind::Stop { agent, .. } => Some(agent),
            _ => None,
        })
        .collect();
    assert!(
        early_stops.contains(&0) && early_stops.contains(&1),
        "{early_stops:?}"
    );
}

#[test]
fn explorer_yields_to_a_larger_token() {
    // two separate good pairs far apart; the pair whose token is larger wins
    let cfg = InitialConfiguration::from_triples(
        0.5,
        &[
            (0.0, 0.0, 0.0),
            (0.3, 0.0, 0.0),
            (5.0, 5.0, 0.0),
            (5.3, 5.0, 0.0),
        ],
    )
    .unwrap();
    let trace = run(&cfg, &gather_n_program(4), default_horizon(&cfg)).unwrap();
    assert!(gather_point(&trace.verdict).dist(Point::new(5.3, 5.0)) < 1e-6);
    assert_eq!(trace.count_final_state(StateTag::Explorer), 1);
    assert_eq!(trace.count_final_state(StateTag::Token), 2);
    assert_eq!(trace.count_final_state(StateTag::Shadow), 1);
}

#[test]
fn dedicated_handles_many_agents() {
    let cfg = InitialConfiguration::from_triples(
        0.4,
        &[
            (0.0, 0.0, 0.0),
            (3.0, 0.0, 4.0),
            (0.0, 3.0, 1.0),
            (-2.0, -2.0, 0.5),
            (4.0, 4.0, 2.0),
        ],
    )
    .unwrap();
    let prog = DedicatedProgram::new(&cfg).unwrap();
    let trace = run(&cfg, &prog, default_horizon(&cfg)).unwrap();
    assert!(gather_point(&trace.verdict).dist(Point::new(4.0, 4.0)) < 1e-6);
    assert!(trace.ever_entered(StateTag::Active));
    assert!(trace.ever_entered(StateTag::Passive));
}
