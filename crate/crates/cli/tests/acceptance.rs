//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use plaus_core::ensembles::{IndexRange, UniformBits, UniformOdd};
use plaus_core::forecasters::{
    constant_half, exact_oracle, Constant, Density, FermatBayes, HardCodedOverride,
    InductionForecaster, PlausibilityFunction,
};
use plaus_core::market::{
    arbitrage_verdict, gain_series, settle_positions, Constraints, FermatGreedyBuyer, MarketConfig,
    PayoffKind, Position, VerdictParams,
};
use plaus_core::problems::primes::primes_up_to;
use plaus_core::problems::{
    machin_digits, DecisionProblem, Parity, PiDigitStore, PiGap, Primality,
};
use plaus_core::scoring::{
    check_propriety, dominance_check, expected_score, grid_dominator, Mode, ScoreTask, ScoringRule,
    WorldSet,
};
use plaus_core::stream::experiment;
use plaus_core::{Instance, RandomStream};
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn plaus(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_plaus"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "plaus {} exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn plaus_json(args: &[&str]) -> Result<Value, String> {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    serde_json::from_str(&plaus(&all)?).map_err(|e| e.to_string())
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, format!("took {t:?}, limit {limit:?}"))
}

fn propriety() -> Outcome {
    let start = Instant::now();
    for rule in ["brier", "log"] {
        let v = plaus_json(&["propriety", "--rule", rule, "--grid", "0.001"])?;
        let dev = v["report"]["max_deviation"]
            .as_f64()
            .ok_or("missing max_deviation")?;
        ensure(dev <= 0.001, format!("{rule}: max deviation {dev}"))?;
    }
    let abs = check_propriety(ScoringRule::Absolute, 0.001).map_err(|e| e.to_string())?;
    let x = abs.minimizer_at(0.3);
    ensure(
        !abs.passes && x == 0.0,
        format!("absolute: passes={} x*(0.3)={x}", abs.passes),
    )?;
    within(start, Duration::from_secs(5))?;
    Ok(format!(
        "brier, log within 0.001; absolute x*(0.3) = 0; {:?}",
        start.elapsed()
    ))
}

fn baseline() -> Outcome {
    let start = Instant::now();
    let half = constant_half();
    let cases: [(
        &dyn DecisionProblem,
        &dyn plaus_core::ensembles::Ensemble,
        usize,
    ); 2] = [(&Parity, &UniformBits, 1), (&Primality, &UniformOdd, 2)];
    for (problem, ensemble, lo) in cases {
        let oracle = exact_oracle(problem_arc(problem.name()));
        for n in lo..=12 {
            for (f, want) in [(&half as &dyn PlausibilityFunction, 0.25), (&oracle, 0.0)] {
                let task = ScoreTask {
                    forecaster: f,
                    problem,
                    ensemble,
                    rule: ScoringRule::Brier,
                    seed: 0,
                };
                let got = expected_score(&task, n, Mode::Exact)
                    .map_err(|e| e.to_string())?
                    .mean;
                ensure(
                    got == want,
                    format!("{} {} n={n}: {got} != {want}", problem.name(), f.name()),
                )?;
            }
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!(
        "half = 0.25, oracle = 0 for n <= 12 on parity and primality; {:?}",
        start.elapsed()
    ))
}

fn problem_arc(name: &str) -> Arc<dyn DecisionProblem> {
    match name {
        "parity" => Arc::new(Parity),
        _ => Arc::new(Primality),
    }
}

fn oracle_agreement() -> Outcome {
    let store = PiDigitStore::bundled();
    let density: Arc<dyn PlausibilityFunction> = Arc::new(Density::new(100).unwrap());
    let table: HashMap<Instance, f64> = [
        (Instance::from_integer(2047), 0.9),
        (Instance::from_integer(1009), 0.1),
    ]
    .into();
    let forecasters: Vec<Arc<dyn PlausibilityFunction>> = vec![
        Arc::new(constant_half()),
        Arc::new(Constant::new(0.3).unwrap()),
        density.clone(),
        Arc::new(FermatBayes::new(10, 100).unwrap()),
        Arc::new(exact_oracle(Arc::new(Primality))),
        Arc::new(HardCodedOverride::new(density, table).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    let mut check = |task: &ScoreTask<'_>, n: usize| -> Result<(), String> {
        let exact = expected_score(task, n, Mode::Exact).map_err(|e| e.to_string())?;
        let mc = expected_score(task, n, Mode::MonteCarlo { samples: 100_000 })
            .map_err(|e| e.to_string())?;
        let diff = (mc.mean - exact.mean).abs();
        let ok = if mc.stderr > 0.0 {
            diff <= 4.0 * mc.stderr
        } else {
            diff <= 1e-12
        };
        if mc.stderr > 0.0 {
            worst = worst.max(diff / mc.stderr);
        }
        ensure(
            ok,
            format!(
                "{} n={n}: mc {} +- {} vs exact {}",
                task.forecaster.name(),
                mc.mean,
                mc.stderr,
                exact.mean
            ),
        )
    };
    for f in &forecasters {
        for n in 2..=12 {
            let task = ScoreTask {
                forecaster: f.as_ref(),
                problem: &Primality,
                ensemble: &UniformOdd,
                rule: ScoringRule::Brier,
                seed: 17,
            };
            check(&task, n)?;
        }
    }
    let induction = InductionForecaster::with_threshold(store.clone(), 0.999).unwrap();
    let gap = PiGap::new(store);
    let ensemble = IndexRange::new(1, 316).unwrap();
    let task = ScoreTask {
        forecaster: &induction,
        problem: &gap,
        ensemble: &ensemble,
        rule: ScoringRule::Brier,
        seed: 17,
    };
    check(&task, 9)?;
    Ok(format!(
        "{} forecasters, max |mc - exact| = {worst:.2} SE",
        forecasters.len() + 1
    ))
}

fn ladder() -> Outcome {
    let oracle = exact_oracle(Arc::new(Primality));
    let fermat = FermatBayes::new(10, 100).unwrap();
    let density = Density::new(100).unwrap();
    let half = constant_half();
    let chain: [&dyn PlausibilityFunction; 4] = [&oracle, &fermat, &density, &half];
    let mut min_gap = f64::INFINITY;
    for n in 8..=16 {
        let scores = chain
            .iter()
            .map(|f| {
                let task = ScoreTask {
                    forecaster: *f,
                    problem: &Primality,
                    ensemble: &UniformOdd,
                    rule: ScoringRule::Brier,
                    seed: 0,
                };
                expected_score(&task, n, Mode::Exact)
                    .map(|e| e.mean)
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, _>>()?;
        for w in scores.windows(2) {
            ensure(
                w[0] < w[1],
                format!("n={n}: scores {scores:?} not increasing"),
            )?;
            min_gap = min_gap.min(w[1] - w[0]);
        }
    }
    Ok(format!(
        "oracle < fermat(k=10) < density(B=100) < half for n = 8..16, min gap {min_gap:.3e}"
    ))
}

fn fermat_soundness() -> Outcome {
    let f = FermatBayes::new(20, 100).unwrap();
    let mut checked = 0;
    for seed in 0..4 {
        for p in primes_up_to(10_000).into_iter().filter(|&p| p >= 3) {
            let x = Instance::from_integer(p);
            let v = f
                .evaluate(
                    &x,
                    &RandomStream::for_instance(seed, experiment::FORECAST, &x),
                )
                .map_err(|e| e.to_string())?;
            ensure(v > 0.0, format!("prime {p} got exact 0 (seed {seed})"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} prime evaluations, no false certificate"))
}

fn godel_pi() -> Outcome {
    let store = PiDigitStore::bundled();
    ensure(
        store.range(1, 1000) == &machin_digits(1000)[..],
        "digit file disagrees with Machin",
    )?;
    let v = plaus_json(&["godel-pi", "--threshold", "0.999", "--digits", "10000"])?;
    let s = &v["report"]["summary"];
    // smallest N from a 60-digit product oracle
    ensure(
        s["threshold_n"] == 2,
        format!("threshold_n = {}", s["threshold_n"]),
    )?;
    ensure(
        s["all_verified"] == true && s["largest_verified"] == 100,
        format!("summary {s}"),
    )?;
    let lenient = plaus_json(&["godel-pi", "--threshold", "0.9", "--digits", "10000"])?;
    ensure(
        lenient["report"]["summary"]["threshold_n"] == 1,
        "threshold 0.9 should give N = 1",
    )?;
    Ok("N = 2 at 0.999; phi_m verified for m <= 100; digits match Machin on 1000".into())
}

fn dominance() -> Outcome {
    let start = Instant::now();
    let v = plaus_json(&[
        "dominance",
        "--worlds",
        "[[1,0],[0,1]]",
        "--forecast",
        "0.8,0.8",
    ])?;
    let r = &v["report"];
    ensure(r["dominated"] == true, "(0.8, 0.8) not dominated")?;
    let w: Vec<f64> = serde_json::from_value(r["witness"].clone()).map_err(|e| e.to_string())?;
    ensure(
        w.iter().all(|c| (c - 0.5).abs() <= 0.01),
        format!("witness {w:?}"),
    )?;
    let worlds = WorldSet::from_json("[[1,0],[0,1]]").map_err(|e| e.to_string())?;
    let inside =
        dominance_check(&[0.3, 0.7], &worlds, ScoringRule::Brier).map_err(|e| e.to_string())?;
    ensure(!inside.dominated, "(0.3, 0.7) declared dominated")?;
    let grid = grid_dominator(&[0.3, 0.7], &worlds, ScoringRule::Brier, 0.01)
        .map_err(|e| e.to_string())?;
    ensure(grid.is_none(), format!("grid found {grid:?}"))?;
    within(start, Duration::from_secs(5))?;
    Ok(format!(
        "witness {w:?}; no grid dominator for (0.3, 0.7); {:?}",
        start.elapsed()
    ))
}

fn market() -> Outcome {
    let config = |seller: Arc<dyn PlausibilityFunction>| MarketConfig {
        problem: Arc::new(Primality),
        ensemble: Arc::new(UniformOdd),
        seller,
        n_lo: 8,
        n_hi: 18,
        payoff: PayoffKind::Expectation { reps: 100 },
        seed: 7,
    };
    let oracle: Arc<dyn PlausibilityFunction> = Arc::new(exact_oracle(Arc::new(Primality)));
    let truthful = config(oracle.clone());
    let all = Constraints {
        max_support: 1 << 10,
        max_quantity: 1.0,
        max_notional: f64::INFINITY,
    };
    for n in 8..=10 {
        let positions: Vec<Position> = plaus_core::ensembles::Ensemble::enumerate(&UniformOdd, n)
            .map_err(|e| e.to_string())?
            .into_iter()
            .enumerate()
            .map(|(i, (x, _))| Position {
                instance: x,
                quantity: if i % 3 == 0 { -1.0 } else { 1.0 },
            })
            .collect();
        let b = settle_positions(&truthful, &all, n, &positions).map_err(|e| e.to_string())?;
        ensure(b == 0.0, format!("f = F gave b_{n} = {b}"))?;
    }

    let buyer = FermatGreedyBuyer::new(10, 100, 32, 0.1).unwrap();
    let params = VerdictParams::defaults_for(8);
    let half =
        gain_series(&config(Arc::new(constant_half())), &buyer).map_err(|e| e.to_string())?;
    let positive =
        half.gains.iter().filter(|g| g.mean_gain > 0.0).count() as f64 / half.gains.len() as f64;
    let v = arbitrage_verdict(&half, &params).map_err(|e| e.to_string())?;
    ensure(
        positive >= 0.5 && v.relaxed,
        format!(
            "half seller: positive fraction {positive}, relaxed {}",
            v.relaxed
        ),
    )?;

    let exact = gain_series(&truthful, &buyer).map_err(|e| e.to_string())?;
    ensure(
        exact.gains.iter().all(|g| g.mean_gain == 0.0),
        "oracle seller produced gains",
    )?;
    let v2 = arbitrage_verdict(&exact, &params).map_err(|e| e.to_string())?;
    ensure(!v2.relaxed && !v2.strict, "oracle seller verdict not false")?;
    Ok(format!(
        "f = F gives 0; half seller relaxed = true ({:.0}% positive); oracle seller false",
        positive * 100.0
    ))
}

fn reproducibility(dir: &Path) -> Outcome {
    let runs: Vec<Vec<&str>> = vec![
        vec![
            "score",
            "--problem",
            "primality",
            "--ensemble",
            "uniform-odd",
            "--forecaster",
            "fermat:k=5,B=100",
            "--n",
            "8..12",
            "--mode",
            "monte-carlo",
            "--samples",
            "20000",
            "--seed",
            "3",
        ],
        vec![
            "compare",
            "--problem",
            "primality",
            "--ensemble",
            "uniform-odd",
            "--p",
            "fermat:k=5,B=100",
            "--q",
            "density:B=100",
            "--n",
            "8..12",
            "--mode",
            "monte-carlo",
            "--samples",
            "20000",
            "--seed",
            "3",
        ],
        vec!["propriety", "--rule", "log", "--grid", "0.001"],
        vec![
            "dominance",
            "--worlds",
            "[[1,0,0],[0,1,0],[0,0,1]]",
            "--forecast",
            "0.5,0.5,0.5",
            "--grid-check",
            "0.05",
        ],
        vec!["godel-pi", "--threshold", "0.999"],
        vec![
            "worst-case-demo",
            "--problem",
            "primality",
            "--ensemble",
            "uniform-odd",
            "--forecaster",
            "fermat:k=3,B=10",
            "--forecaster",
            "constant:v=0.5",
            "--n",
            "6..12",
            "--seed",
            "3",
        ],
    ];
    for args in &runs {
        let a = plaus(&[args.as_slice(), &["--jobs", "1"]].concat())?;
        let b = plaus(&[args.as_slice(), &["--jobs", "4"]].concat())?;
        ensure(a == b, format!("{} differs across --jobs", args[0]))?;
    }
    let market = |jobs: &str| -> Result<Vec<u8>, String> {
        let out = dir.join(format!("market-{jobs}.json"));
        plaus(&[
            "market",
            "--problem",
            "primality",
            "--ensemble",
            "uniform-odd",
            "--seller",
            "density:B=100",
            "--buyer",
            "fermat-greedy:k=10,support=32,margin=0.1",
            "--n",
            "8..18",
            "--reps",
            "100",
            "--seed",
            "7",
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
        ])?;
        std::fs::read(out.with_extension("csv")).map_err(|e| e.to_string())
    };
    ensure(
        market("1")? == market("4")?,
        "market CSV differs across --jobs",
    )?;
    Ok(format!(
        "{} subcommands byte-identical at --jobs 1 and 4",
        runs.len() + 1
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("propriety", Box::new(propriety)),
        ("baseline exactness", Box::new(baseline)),
        ("oracle agreement", Box::new(oracle_agreement)),
        ("quality/cost ladder", Box::new(ladder)),
        ("fermat soundness", Box::new(fermat_soundness)),
        ("godel-pi threshold", Box::new(godel_pi)),
        ("dominance", Box::new(dominance)),
        ("market sanity", Box::new(market)),
        ("reproducibility", Box::new(|| reproducibility(dir.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
