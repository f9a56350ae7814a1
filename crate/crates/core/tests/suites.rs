//! The verification suites at reduced sizes, so regressions show up in a
//! plain `cargo test`.

use subquad::verify::{run_suite, VerifyConfig};

fn assert_suite(name: &str, cfg: &VerifyConfig) {
    let checks = run_suite(name, cfg).unwrap();
    assert!(!checks.is_empty());
    for c in &checks {
        assert!(c.passed, "{}/{}: {}", c.suite, c.name, c.detail);
    }
}

#[test]
fn marginal_suite() {
    assert_suite("marginals", &VerifyConfig { samples: 5000, ..VerifyConfig::default() });
}

#[test]
fn batch_suite() {
    assert_suite("batch", &VerifyConfig { batch_reps: 100, ..VerifyConfig::default() });
}

#[test]
fn saw_suite() {
    assert_suite("saw", &VerifyConfig::default());
}

#[test]
fn boundary_suite() {
    assert_suite("boundary", &VerifyConfig::default());
}

#[test]
fn chain_rule_suite() {
    assert_suite("counting", &VerifyConfig::default());
}

#[test]
fn skewed_coin_is_caught() {
    let cfg = VerifyConfig { coin_skew: 0.3, ..VerifyConfig::default() };
    let checks = run_suite("marginals", &cfg).unwrap();
    assert!(checks.iter().any(|c| c.name == "hardcore/aj" && !c.passed));
}
