use sensetrack::config::*;
use sensetrack::sim::{default_scenario, Overrides, ScenarioKind};
use sensetrack::Error;

const EXPLICIT: &str = r#"
lambda = 0.3
horizon = 4

[chain]
columns = [[0.9, 0.1], [0.2, 0.8]]
prior = [0.5, 0.5]

[[controls]]
cost = 0.0
means = [[0.0], [0.0]]
covariances = [[[1.0]], [[1.0]]]

[[controls]]
cost = 0.4
means = [[0.0], [1.5]]
covariances = [[[1.0]], [[0.5]]]
"#;

#[test]
fn builtin_scenarios_round_trip() {
    for kind in [ScenarioKind::TwoStateScalar, ScenarioKind::Crossing, ScenarioKind::TwoSensor, ScenarioKind::BodySensingLike] {
        let s = default_scenario(kind, Overrides::default()).unwrap();
        let text = serialize_scenario(&s);
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back.num_controls(), s.num_controls());
        assert_eq!(back.lambda, s.lambda);
        assert_eq!(back.chain.columns(), s.chain.columns());
        for u in 0..s.num_controls() {
            assert_eq!(back.cost(u), s.cost(u));
            assert_eq!(back.kernels[u], s.kernels[u]);
        }
        assert_eq!(serialize_scenario(&back), text);
    }
}

#[test]
fn canonical_text_is_a_fixed_point() {
    let once = canonicalize(EXPLICIT).unwrap();
    assert_eq!(canonicalize(&once).unwrap(), once);
    let s = parse_scenario(EXPLICIT).unwrap();
    assert_eq!(s.num_controls(), 2);
    assert_eq!(s.horizon, 4);
    assert_eq!(serialize_scenario(&s), once);
}

#[test]
fn non_stochastic_chain_is_rejected() {
    let text = EXPLICIT.replace("[0.9, 0.1]", "[0.9, 0.2]");
    match parse_scenario(&text) {
        Err(Error::ValidationError { invariant, .. }) => assert_eq!(invariant, "NonStochastic"),
        other => panic!("{other:?}"),
    }
    let text = EXPLICIT.replace("lambda = 0.3", "lambda = 1.5");
    assert!(matches!(parse_scenario(&text), Err(Error::ValidationError { invariant, .. }) if invariant == "LambdaOutOfRange"));
    let text = EXPLICIT.replace("cost = 0.4", "cost = 1.4");
    assert!(matches!(parse_scenario(&text), Err(Error::ValidationError { invariant, .. }) if invariant == "CostOutOfRange"));
}

#[test]
fn parse_errors_carry_a_line() {
    let text = EXPLICIT.replace("horizon = 4", "horizon = \"four\"");
    match parse_doc(&text) {
        Err(Error::ParseError { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    let text = EXPLICIT.replace("horizon = 4", "horizon = 4\nbogus = 1");
    match parse_scenario(&text) {
        Err(Error::ParseError { line, field, .. }) => {
            assert_eq!(line, 4);
            assert_eq!(field, "bogus");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn sensing_and_controls_are_exclusive() {
    let s = default_scenario(ScenarioKind::TwoSensor, Overrides::default()).unwrap();
    let mut text = serialize_scenario(&s);
    text.push_str("\n[[controls]]\ncost = 0.1\nmeans = [[0.0], [1.0]]\ncovariances = [[[1.0]], [[1.0]]]\n");
    assert!(matches!(parse_scenario(&text), Err(Error::ValidationError { .. })));
    let bare = "lambda = 0.5\nhorizon = 2\n[chain]\ncolumns = [[1.0, 0.0], [0.0, 1.0]]\nprior = [0.5, 0.5]\n";
    assert!(parse_scenario(bare).is_err());
}

#[test]
fn files_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, EXPLICIT).unwrap();
    assert_eq!(load_scenario(&path).unwrap().num_controls(), 2);
    assert!(matches!(load_scenario(&dir.path().join("missing.toml")), Err(Error::Io(_))));
}
