use sdns_cli::validate::{trend_violations, Bound, Check, Report};

#[test]
fn bounds_judge_measurements() {
    assert!(Check::new("a", 1e-9, Bound::Below(1e-8)).passed());
    assert!(!Check::new("a", 1e-8, Bound::Below(1e-8)).passed());
    assert!(!Check::new("a", f64::NAN, Bound::Below(1e-8)).passed());
    assert!(Check::new("a", 2.0, Bound::Range(1.7, 2.3)).passed());
    assert!(!Check::new("a", 2.4, Bound::Range(1.7, 2.3)).passed());
    assert!(Check::new("a", 7.0, Bound::Finite).passed());
    assert!(!Check::new("a", f64::INFINITY, Bound::Finite).passed());
}

#[test]
fn report_counts_failures() {
    let report = Report {
        checks: vec![
            Check::new("good", 0.0, Bound::Below(1.0)),
            Check::new("bad", 2.0, Bound::Below(1.0)),
        ],
    };
    assert!(!report.passed());
    assert_eq!(report.failures().count(), 1);
    let mut buf = Vec::new();
    report.write(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().next().unwrap().starts_with("PASS  good"));
    assert!(text.lines().nth(1).unwrap().starts_with("FAIL  bad"));
    assert!(text.ends_with("2 checks, 1 passed, 1 failed\n"));
}

#[test]
fn one_small_inversion_is_tolerated() {
    assert_eq!(trend_violations(&[0.2, 0.1, 0.05]), 0);
    assert_eq!(trend_violations(&[0.2, 0.1, 0.105, 0.05]), 0);
    assert_eq!(trend_violations(&[0.2, 0.1, 0.12]), 1);
    assert_eq!(trend_violations(&[0.2, 0.1, 0.105, 0.05, 0.052]), 1);
    assert_eq!(trend_violations(&[0.0, 0.0]), 0);
}
