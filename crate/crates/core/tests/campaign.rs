use plwe_core::harness::{prepare, run_campaign, ExperimentConfig, Validated};

fn validated(v: serde_json::Value) -> Validated {
    ExperimentConfig::from_json(&v.to_string()).unwrap().validate().unwrap()
}

/// q = 7, f = (x^2 - 3)(x^2 - 5); x^2 - 3 is irreducible mod 7.
fn tiny_trace(honest: bool) -> serde_json::Value {
    serde_json::json!({
        "instance": {"N": 4, "f": [15, 0, -8, 0, 1], "q": 7, "sigma": 1.0},
        "attack": {"family": "unbounded_small_values", "root": {"n": 2, "a": 3}, "ell": 20, "delta": 0.1, "trials": 200},
        "honest_sampling": honest,
        "seed": 17
    })
}

#[test]
fn honest_sampling_accounting() {
    let v = validated(tiny_trace(true));
    let p = prepare(&v).unwrap();
    let rep = run_campaign(&v, &p, 200, None).unwrap();
    let a = &rep.aggregate;
    assert_eq!(a.failures, 0);
    let total: u64 = rep.per_trial.iter().map(|t| t.oracle_invocations).sum();
    assert_eq!(a.oracle_invocations, total);
    let samples: usize = rep.per_trial.iter().map(|t| t.samples_used).sum();
    assert_eq!(samples, 200 * 20);
    // geometric with success probability 1/q^{n-1}
    assert!((a.mean_invocations_per_sample - 7.0).abs() < 0.7, "{}", a.mean_invocations_per_sample);

    // direct construction costs one invocation per sample
    let v = validated(tiny_trace(false));
    let p = prepare(&v).unwrap();
    let rep = run_campaign(&v, &p, 50, None).unwrap();
    assert_eq!(rep.aggregate.mean_invocations_per_sample, 1.0);
}

#[test]
fn aggregate_matches_trials() {
    let v = validated(serde_json::json!({
        "instance": {"N": 6, "f": [-2018, 1, 0, 0, 0, -2018, 1], "q": 4099, "sigma": 0.7, "truncated": true},
        "attack": {"family": "small_set", "root": {"alpha": 2018}, "M": 8, "trials": 60},
        "seed": 8
    }));
    let p = prepare(&v).unwrap();
    let rep = run_campaign(&v, &p, 60, None).unwrap();
    let a = &rep.aggregate;
    let t = &rep.per_trial;
    let count = |f: &dyn Fn(&plwe_core::harness::campaign::TrialRecord) -> bool| t.iter().filter(|r| f(r)).count();
    assert_eq!(a.completed + a.failures, 60);
    assert_eq!(a.plwe_trials, count(&|r| r.truth == plwe_core::harness::Truth::Plwe && r.failure.is_none()));
    assert_eq!(a.correct_on_plwe + a.correct_on_uniform, count(&|r| r.correct == Some(true)));
    assert_eq!(a.flagged, count(&|r| r.decision == Some(plwe_core::harness::Truth::Plwe)));
    let seeds: std::collections::HashSet<u64> = t.iter().map(|r| r.sub_seed).collect();
    assert_eq!(seeds.len(), 60);
    assert_eq!(rep.canonical_json(), run_campaign(&v, &p, 60, None).unwrap().canonical_json());
}
