//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Tolerances and seeds are pinned below.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num::rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use plwe_core::analysis::{delta_probability, mc_quarter_rate, posterior_bounds, BoundFamily, DEFAULT_SERIES_TOL};
use plwe_core::attacks::{small_set_attack, small_values_attack};
use plwe_core::extension::ExtFieldCtx;
use plwe_core::field::PrimeModulus;
use plwe_core::harness::{prepare, run_campaign, ExperimentConfig, Validated};
use plwe_core::ring::RqContext;
use plwe_core::sampling::{GaussianSpec, Oracle, PlweInstance, DEFAULT_RQ0_CAP};
use plwe_core::scan::{scan_instance, RootKind};
use plwe_core::sigma::{SigmaTable, DEFAULT_TABLE_CAP};

const POSTERIOR_TOL: f64 = 0.02;
const C4_RANGE: (f64, f64) = (4.5, 5.5);
const C6_MIN_RATE: f64 = 0.95;
const C7_TOL: f64 = 2e-3;
const C8_TARGET: f64 = 0.000173;
const C8_TOL: f64 = 0.00002;
const C9_SE: f64 = 3.0;
const C10_REL: f64 = 0.15;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config(name: &str) -> Validated {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::from_path(&p).unwrap().validate().unwrap()
}

fn ring(q: u64, f: Vec<i64>) -> RqContext {
    RqContext::new(f, PrimeModulus::new(q).unwrap()).unwrap()
}

fn c1() -> Outcome {
    let mut bad = Vec::new();
    for q in [5u64, 7, 11, 13, 17, 19] {
        let m = PrimeModulus::new(q).unwrap();
        let hits = (0..q).filter(|&x| m.in_quarter_interval(x)).count() as i64;
        let got = Ratio::new(hits, q as i64);
        let half = Ratio::new(1, 2);
        let off = Ratio::new(1, 2 * q as i64);
        let want = if q % 4 == 1 { half + off } else { half - off };
        if got != want {
            bad.push(format!("q={q}: {got} != {want}"));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "6 moduli exact".into() } else { bad.join("; ") })
}

fn c2() -> Outcome {
    let m = PrimeModulus::new(4099).unwrap();
    let mut bad = Vec::new();
    for a in [2017u64, 2018] {
        let ext = ExtFieldCtx::new(m, 3, a).unwrap();
        for j in 1..=30u64 {
            let t = ext.alpha_pow(j).trace().value();
            let want = if j % 3 == 0 { m.mul(3, m.pow(a, j / 3)) } else { 0 };
            if t != want {
                bad.push(format!("a={a} j={j}: {t} != {want}"));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "j = 1..30, both a".into() } else { bad.join("; ") })
}

fn c3() -> Outcome {
    // f = (x^2 + 1)(x^2 + x + 2) over F_3, and x^2 - 2 = x^2 + 1
    let ctx = ring(3, vec![2, 1, 0, 1, 1]);
    let ext = ExtFieldCtx::new(ctx.modulus(), 2, 2).unwrap();
    let divides = ctx.find_binomial_factors(2).iter().any(|b| b.a == 2);
    let mut members = 0;
    for idx in 0..81u64 {
        let coeffs: Vec<u64> = (0..4).map(|k| (idx / 3u64.pow(k)) % 3).collect();
        if ctx.rq0_membership(&ctx.poly(&coeffs).unwrap(), &ext).is_member {
            members += 1;
        }
    }
    outcome(divides && members == 27, format!("{members} of 81 members, x^2-2 | f: {divides}"))
}

fn mean_rq0_count(q: u64, f: Vec<i64>, n: usize, a: u64, runs: u64, seed: u64) -> f64 {
    let ctx = ring(q, f);
    let ext = ExtFieldCtx::new(ctx.modulus(), n, a).unwrap();
    let oracle = Oracle::Uniform(&ctx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: u64 = (0..runs)
        .map(|_| oracle.sample_rq0(&ext, &mut rng, DEFAULT_RQ0_CAP).unwrap().count)
        .sum();
    total as f64 / runs as f64
}

fn c4() -> Outcome {
    // x^2 - 2 is irreducible mod 5 and divides x^4 - x^2 - 2
    let mean = mean_rq0_count(5, vec![-2, 0, -1, 0, 1], 2, 2, 10_000, 4);
    outcome((C4_RANGE.0..=C4_RANGE.1).contains(&mean), format!("mean count {mean:.4}"))
}

fn c5() -> Outcome {
    let m = PrimeModulus::new(4099).unwrap();
    let g1 = GaussianSpec::new(0.7, false).unwrap();
    let g2 = GaussianSpec::new(2.5, false).unwrap();
    let fam1 = BoundFamily::SmallSet {
        sigma_size: (4.0 * 0.7 + 1.0f64).powi(6),
        r: 6,
    };
    let fam2 = BoundFamily::SmallSet {
        sigma_size: (4.0 * 2f64.sqrt() * 2.5 + 1.0).powi(3),
        r: 3,
    };
    let rows = [
        ("inst1 M=350", fam1, &g1, 350, 0.861),
        ("inst1 M=500", fam1, &g1, 500, 0.998),
        ("inst2 M=350", fam2, &g2, 350, 0.629),
        ("inst2 M=500", fam2, &g2, 500, 0.993),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, fam, g, mm, want) in rows {
        let got = posterior_bounds(fam, m, mm, g).posterior_plwe;
        let ok = (got - want).abs() <= POSTERIOR_TOL;
        pass &= ok;
        parts.push(format!("{name} {got:.4} vs {want}{}", if ok { "" } else { " (off)" }));
    }
    outcome(pass, parts.join(", "))
}

fn c6() -> Outcome {
    let v = config("trace_instance2.json");
    let p = prepare(&v).unwrap();
    let rep = run_campaign(&v, &p, 200, None).unwrap();
    let a = &rep.aggregate;
    let rp = a.rate_plwe.unwrap_or(0.0);
    let ru = a.rate_uniform.unwrap_or(0.0);
    outcome(
        a.failures == 0 && rp >= C6_MIN_RATE && ru >= C6_MIN_RATE,
        format!(
            "M0 = {:?}, PLWE {}/{} = {rp:.3}, uniform {}/{} = {ru:.3}",
            p.m0, a.correct_on_plwe, a.plwe_trials, a.correct_on_uniform, a.uniform_trials
        ),
    )
}

fn c7() -> Outcome {
    let mut worst = 0.0f64;
    let mut seed = 700;
    for q in [2887u64, 3329, 3677, 4111] {
        let m = PrimeModulus::new(q).unwrap();
        for div in [32.0, 16.0, 8.0, 4.0] {
            let sb = q as f64 / div;
            let cf = delta_probability(m, sb, DEFAULT_SERIES_TOL).p_event;
            let mc = mc_quarter_rate(m, sb, 1_000_000, seed);
            seed += 1;
            worst = worst.max((cf - mc).abs());
        }
    }
    outcome(worst < C7_TOL, format!("max |closed form - MC| = {worst:.2e} over 16 points"))
}

fn c8() -> Outcome {
    let v = config("usva_q2887.json");
    let rep = scan_instance(&v.ctx, &v.gauss, v.n_max);
    let Some(e) = rep.entries.iter().find(|e| matches!(e.root, RootKind::FqRoot { alpha: 698, .. })) else {
        return outcome(false, "scanner did not report alpha = 698".into());
    };
    let d = delta_probability(v.ctx.modulus(), e.sigma_bar, DEFAULT_SERIES_TOL).big_delta;
    outcome(
        (d - C8_TARGET).abs() <= C8_TOL,
        format!("sigma_bar = {:.3}, Delta = {d:.7}", e.sigma_bar),
    )
}

fn c9() -> Outcome {
    let v = config("usva_q3677.json");
    let p = prepare(&v).unwrap();
    let rep = run_campaign(&v, &p, 100, None).unwrap();
    let a = &rep.aggregate;
    let acc = a.accuracy.unwrap_or(0.0);
    let se = (0.25 / a.completed.max(1) as f64).sqrt();
    let delta = p.predicted.delta.as_ref().map_or(f64::NAN, |d| d.delta);
    outcome(
        acc - 0.5 >= C9_SE * se,
        format!("MC delta = {delta:.5}, accuracy {acc:.3} over {} trials, 3 SE = {:.3}", a.completed, C9_SE * se),
    )
}

fn c10() -> Outcome {
    // x^3 - 2 is irreducible mod 7 and divides x^6 - 5x^3 + 6
    let mean = mean_rq0_count(7, vec![6, 0, 0, -5, 0, 0, 1], 3, 2, 10_000, 10);
    outcome(((mean - 49.0) / 49.0).abs() <= C10_REL, format!("mean count {mean:.3} (expected 49)"))
}

fn c11() -> Outcome {
    let mut bad = Vec::new();
    let ss = config("truncated_small_set.json");
    let m = ss.ctx.modulus();
    let table = SigmaTable::for_fq_root(m, 2018, 6, ss.ctx.degree(), ss.gauss.sigma(), DEFAULT_TABLE_CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1100);
    for t in 0..500 {
        let inst = PlweInstance::new(ss.ctx.clone(), ss.gauss, &mut rng);
        let samples: Vec<_> = (0..8).map(|_| inst.plwe_oracle(&mut rng)).collect();
        let v = small_set_attack(&ss.ctx, &samples, &table, 2018).unwrap();
        let target = ss.ctx.eval_fq(inst.reveal_secret(), 2018);
        if v.is_not_plwe() || !v.contains(target) {
            bad.push(format!("small set trial {t}"));
        }
    }
    let sv = config("truncated_small_values.json");
    let alpha = sv.ctx.modulus().value() - 1;
    for t in 0..500 {
        let inst = PlweInstance::new(sv.ctx.clone(), sv.gauss, &mut rng);
        let samples: Vec<_> = (0..30).map(|_| inst.plwe_oracle(&mut rng)).collect();
        let v = small_values_attack(&sv.ctx, &samples, alpha).unwrap();
        let target = sv.ctx.eval_fq(inst.reveal_secret(), alpha);
        if v.is_not_plwe() || !v.contains(target) {
            bad.push(format!("small values trial {t}"));
        }
    }
    let n = bad.len();
    outcome(n == 0, if n == 0 { "1000 trials, target always survives".into() } else { bad.join("; ") })
}

fn main() {
    let criteria: [(u32, Duration, fn() -> Outcome); 11] = [
        (1, Duration::from_secs(1), c1),
        (2, Duration::from_secs(1), c2),
        (3, Duration::from_secs(1), c3),
        (4, Duration::from_secs(5), c4),
        (5, Duration::from_secs(1), c5),
        (6, Duration::from_secs(600), c6),
        (7, Duration::from_secs(120), c7),
        (8, Duration::from_secs(120), c8),
        (9, Duration::from_secs(600), c9),
        (10, Duration::from_secs(120), c10),
        (11, Duration::from_secs(120), c11),
    ];
    let mut failed = 0;
    for (id, budget, f) in criteria {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let in_time = took <= budget;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let time_note = if in_time { String::new() } else { format!(" (over the {budget:?} budget)") };
        println!(
            "criterion {id:>2}: {} {} [{:.2}s{time_note}]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
