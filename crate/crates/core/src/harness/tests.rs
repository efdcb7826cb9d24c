use super::*;

fn def(json: &str) -> SystemDefinition {
    SystemDefinition::from_json(json).unwrap()
}

#[test]
fn parses_definitions() {
    let d = def(r#"{"m": 1, "N": 8, "omega": 0.5, "coefficients": {"standard": 1}}"#);
    assert_eq!(d.omegas(), vec![UnitCircleParam::new(0.5)]);
    let d = def(r#"{"m": 1, "N": 4, "omega": [{"angle": 0.0}, 3.0], "coefficients": {"constant": [[1, 0], [0, 1]]}}"#);
    assert_eq!(d.omegas().len(), 2);
    let d = def(
        r#"{"m": 1, "N": 16, "coefficients": {"continuous": {"trig": {"base": [[1, 0], [0, 1]],
            "terms": [{"amp": [[0.5, 0], [0, 0]], "freq": 1}]}}}, "discretization": "sample"}"#,
    );
    assert_eq!(d.discretization, Discretization::Sample);
    assert!(d.build().is_ok());
    let bad = SystemDefinition::from_json(r#"{"m": 1, "N": 4, "coefficients": {"constant": [[1, 2], [0, 1]]}}"#);
    assert!(bad.is_ok());
    assert!(matches!(bad.unwrap().build(), Err(Error::NotSymmetric { .. })));
    assert!(SystemDefinition::from_json(r#"{"m": 0, "N": 4, "coefficients": {"standard": 0}}"#).is_err());
}

#[test]
fn interpolating_discretization_hits_nodes() {
    let d = def(r#"{"m": 1, "N": 32, "coefficients": {"continuous": {"standard": {"j": 3}}}}"#);
    let sys = d.build().unwrap();
    let sol = fundamental_solution(&sys).unwrap();
    let p = standard_path(1, 3).unwrap();
    for n in 0..=32 {
        assert!(max_abs(&(sol.gamma(n) - p.value(n as f64 / 32.0))) < 1e-9);
    }
}

#[test]
fn index_examples() {
    let opts = RunOptions::default();
    let r = run_index(&def(r#"{"m": 1, "N": 8, "coefficients": {"standard": 1}}"#), &opts).unwrap();
    let x = &r.reports[0];
    assert_eq!((x.i_omega, x.nu_omega, x.m_minus, x.m_zero, x.m_plus), (1, 0, 9, 0, 7));
    assert!(r.passed);
    let zero = vec![vec![0.0; 4]; 4];
    let d = SystemDefinition {
        m: 2,
        n: 8,
        h: None,
        omega: OmegaSpec::default(),
        coefficients: Coefficients::Constant(zero),
        discretization: Discretization::default(),
    };
    let x = &run_index(&d, &opts).unwrap().reports[0];
    assert_eq!((x.i_omega, x.nu_omega, x.m_minus, x.m_zero, x.m_plus), (-2, 4, 14, 4, 14));
    assert_eq!((x.s_plus, x.s_minus), (2, 2));
    assert_eq!(x.theorem1_residuals, [0, 0, 0]);
    let r = run_index(
        &def(r#"{"m": 1, "N": 8, "omega": 1.0471975511965976, "coefficients": {"constant": [[0, 0], [0, 0]]}}"#),
        &opts,
    )
    .unwrap();
    assert_eq!(r.reports[0].nu_omega, 0);
    assert!(r.passed);
}

#[test]
fn small_suite_passes() {
    let cfg = SuiteConfig {
        seed: 7,
        trials: 6,
        ms: vec![1, 2],
        ns: vec![8, 16],
        omegas: vec![UnitCircleParam::one(), UnitCircleParam::minus_one(), UnitCircleParam::new(std::f64::consts::FRAC_PI_3)],
        degenerate: 3,
        norm_bound: 3.0,
    };
    let s = run_theorem_suite(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(s.checks, 6 * 3 + 3);
    assert_eq!(s.failures, 0, "{:?}", s.rows.iter().filter(|r| !r.passed).collect::<Vec<_>>());
    assert!(s.rows.iter().filter(|r| r.degenerate).all(|r| r.m_zero >= 1));
    let again = run_theorem_suite(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(render(&s, Format::Json).unwrap(), render(&again, Format::Json).unwrap());
}

#[test]
fn empty_grid() {
    let cfg = SuiteConfig {
        ms: vec![],
        ..SuiteConfig::default()
    };
    let s = run_theorem_suite(&cfg, &RunOptions::default()).unwrap();
    assert_eq!((s.systems, s.checks, s.failures), (0, 0, 0));
}

#[test]
fn convergence_examples() {
    let r = run_convergence(&Generator::Standard { j: 0 }, 1, &[8, 16, 32, 64]).unwrap();
    assert!(r.monotone && r.passed);
    let p = r.rows.last().unwrap().order_estimate.unwrap();
    assert!((p - 1.0).abs() < 0.1, "order {p}");
    let r = run_convergence(&Generator::Constant(vec![vec![0.0; 2]; 2]), 1, &[8, 16]).unwrap();
    assert!(r.rows.iter().all(|x| x.eps < 1e-15));
    assert!(r.passed);
    let csv = String::from_utf8(render(&r, Format::Csv).unwrap()).unwrap();
    assert!(csv.starts_with("N,h,eps,order_estimate\n"));
}

#[test]
fn corollaries_on_standard_two() {
    // the bump coefficient reaches 2π², so the step gate needs N ≥ 40
    let d = def(r#"{"m": 1, "N": 64, "coefficients": {"continuous": {"standard": {"j": 2}}}}"#);
    let r = run_corollaries(&d, 3, &RunOptions::default()).unwrap();
    assert!(r.passed, "{:#?}", r.checks);
    assert!(r.checks.iter().any(|c| c.name == "index_independent_of_h"));
}

#[test]
fn report_json_has_integer_indices() {
    let r = run_index(&def(r#"{"m": 1, "N": 8, "coefficients": {"standard": 1}}"#), &RunOptions::default()).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&render(&r, Format::Json).unwrap()).unwrap();
    assert_eq!(v["schema"], SCHEMA);
    assert!(v["reports"][0]["m_minus"].is_u64());
    assert!(v["reports"][0]["i_omega"].is_i64());
    assert!(v["reports"][0].get("timing_ms").is_none());
    assert!(emit_report(&r, Format::Json, Some(Path::new("/nonexistent-dir/x.json"))).is_err());
}

