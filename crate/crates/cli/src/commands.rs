use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::Args;
use plaus_core::forecasters::{
    induction_product, min_verified_for_threshold, BudgetClass, Horizon, PlausibilityFunction,
    ResourceBudget, Usage,
};
use plaus_core::market::{
    arbitrage_verdict, gain_series, BuyerStrategy, MarketConfig, MarketReport, PayoffKind,
    VerdictParams,
};
use plaus_core::problems::{gap_width, pi_gap_nonzero, DecisionProblem, PiDigitStore};
use plaus_core::scoring::{
    check_propriety, compare as compare_forecasters, dominance_check, grid_dominator, score_report,
    worst_case_report, Mode, ScoreTask, ScoringRule, WorldSet,
};
use plaus_core::{registry, Error};
use serde_json::{json, Value};

use crate::output::{csv_with_meta, emit, write_to, Format};
use crate::{Global, ModeArg, UsageError};

fn store(global: &Global) -> anyhow::Result<Arc<PiDigitStore>> {
    Ok(match &global.pi_digits {
        Some(path) => Arc::new(
            PiDigitStore::from_file(path).with_context(|| format!("reading {}", path.display()))?,
        ),
        None => PiDigitStore::bundled(),
    })
}

fn seed_for(seed: Option<u64>, randomized: bool, command: &str) -> anyhow::Result<u64> {
    match (seed, randomized) {
        (Some(s), _) => Ok(s),
        (None, false) => Ok(0),
        (None, true) => {
            Err(UsageError(format!("{command}: --seed is required for randomized runs")).into())
        }
    }
}

fn rule(text: &str) -> anyhow::Result<ScoringRule> {
    Ok(text.parse::<ScoringRule>()?)
}

fn mode(arg: ModeArg, samples: usize) -> Mode {
    match arg {
        ModeArg::Exact => Mode::Exact,
        ModeArg::MonteCarlo => Mode::MonteCarlo { samples },
    }
}

#[derive(Args, Debug)]
pub struct Workload {
    #[arg(long)]
    problem: String,

    /// `name[:key=value,...]`, e.g. `index-range:lo=2,hi=50`.
    #[arg(long)]
    ensemble: String,

    #[arg(long, default_value = "brier")]
    rule: String,

    /// Lengths, `lo..hi` inclusive or a single value.
    #[arg(long = "n")]
    lengths: String,

    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,

    /// Draws per length in Monte Carlo mode.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,

    #[arg(long)]
    seed: Option<u64>,
}

struct Resolved {
    problem: Arc<dyn DecisionProblem>,
    ensemble: Arc<dyn plaus_core::ensembles::Ensemble>,
    rule: ScoringRule,
    lengths: std::ops::RangeInclusive<usize>,
    mode: Mode,
    store: Arc<PiDigitStore>,
}

impl Workload {
    fn resolve(&self, global: &Global) -> anyhow::Result<Resolved> {
        let store = store(global)?;
        Ok(Resolved {
            problem: registry::problem(&self.problem, store.clone())?,
            ensemble: registry::ensemble(&self.ensemble)?,
            rule: rule(&self.rule)?,
            lengths: registry::lengths(&self.lengths)?,
            mode: mode(self.mode, self.samples),
            store,
        })
    }
}

impl Resolved {
    fn config(&self, seed: u64) -> Value {
        json!({
            "problem": self.problem.name(),
            "ensemble": self.ensemble.name(),
            "rule": self.rule,
            "n_lo": self.lengths.start(),
            "n_hi": self.lengths.end(),
            "mode": self.mode,
            "seed": seed,
        })
    }

    fn forecaster(&self, text: &str) -> anyhow::Result<Arc<dyn PlausibilityFunction>> {
        Ok(registry::forecaster(text, &self.problem, &self.store)?)
    }

    fn task<'a>(&'a self, f: &'a dyn PlausibilityFunction, seed: u64) -> ScoreTask<'a> {
        ScoreTask {
            forecaster: f,
            problem: self.problem.as_ref(),
            ensemble: self.ensemble.as_ref(),
            rule: self.rule,
            seed,
        }
    }
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[command(flatten)]
    work: Workload,

    #[arg(long)]
    forecaster: String,
}

pub fn score(global: &Global, a: ScoreArgs) -> anyhow::Result<()> {
    let r = a.work.resolve(global)?;
    let f = r.forecaster(&a.forecaster)?;
    let randomized = f.is_randomized() || matches!(r.mode, Mode::MonteCarlo { .. });
    let seed = seed_for(a.work.seed, randomized, "score")?;
    let report = score_report(&r.task(f.as_ref(), seed), r.lengths.clone(), r.mode)?;
    let mut config = r.config(seed);
    config["forecaster"] = json!(f.name());
    emit(
        global,
        "score",
        &config,
        &report.to_csv(),
        serde_json::to_value(&report)?,
    )
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    work: Workload,

    #[arg(long)]
    p: String,

    #[arg(long)]
    q: String,
}

pub fn compare(global: &Global, a: CompareArgs) -> anyhow::Result<()> {
    let r = a.work.resolve(global)?;
    let p = r.forecaster(&a.p)?;
    let q = r.forecaster(&a.q)?;
    let randomized =
        p.is_randomized() || q.is_randomized() || matches!(r.mode, Mode::MonteCarlo { .. });
    let seed = seed_for(a.work.seed, randomized, "compare")?;
    let report = compare_forecasters(
        p.as_ref(),
        q.as_ref(),
        r.problem.as_ref(),
        r.ensemble.as_ref(),
        r.rule,
        r.lengths.clone(),
        r.mode,
        seed,
    )?;
    let mut config = r.config(seed);
    config["p"] = json!(p.name());
    config["q"] = json!(q.name());
    config["aggregate"] = json!(report.aggregate);
    emit(
        global,
        "compare",
        &config,
        &report.to_csv(),
        serde_json::to_value(&report)?,
    )
}

#[derive(Args, Debug)]
pub struct ProprietyArgs {
    #[arg(long)]
    rule: String,

    #[arg(long, default_value_t = 0.001)]
    grid: f64,
}

pub fn propriety(global: &Global, a: ProprietyArgs) -> anyhow::Result<()> {
    let rule = rule(&a.rule)?;
    let report = check_propriety(rule, a.grid)?;
    let config = json!({
        "rule": rule,
        "grid": a.grid,
        "max_deviation": report.max_deviation,
        "passes": report.passes,
    });
    let mut csv = String::from("y,x_star,deviation\n");
    for &(y, x) in &report.minimizers {
        writeln!(csv, "{y},{x},{}", (x - y).abs())?;
    }
    emit(
        global,
        "propriety",
        &config,
        &csv,
        serde_json::to_value(&report)?,
    )
}

#[derive(Args, Debug)]
pub struct DominanceArgs {
    /// Admissible worlds as JSON, e.g. `[[1,0],[0,1]]`.
    #[arg(long)]
    worlds: String,

    /// Comma-separated forecast vector.
    #[arg(long, allow_hyphen_values = true)]
    forecast: String,

    #[arg(long, default_value = "brier")]
    rule: String,

    /// Also search the grid of this resolution for a dominating point.
    #[arg(long)]
    grid_check: Option<f64>,
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

pub fn dominance(global: &Global, a: DominanceArgs) -> anyhow::Result<()> {
    let rule = rule(&a.rule)?;
    let worlds = WorldSet::from_json(&a.worlds)?;
    let forecast = a
        .forecast
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad forecast entry {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let result = dominance_check(&forecast, &worlds, rule)?;
    let grid = a
        .grid_check
        .map(|res| grid_dominator(&forecast, &worlds, rule, res))
        .transpose()?;
    let config = json!({
        "worlds": a.worlds,
        "forecast": forecast,
        "rule": rule,
        "grid_check": a.grid_check,
    });
    let csv = format!(
        "dominated,distance,forecast,witness,grid_dominator\n{},{},{},{},{}\n",
        result.dominated,
        result.distance,
        join(&forecast),
        result.witness.as_deref().map(join).unwrap_or_default(),
        grid.as_ref()
            .map(|g| g.as_deref().map(join).unwrap_or_else(|| "none".into()))
            .unwrap_or_default(),
    );
    let mut report = serde_json::to_value(&result)?;
    if let Some(g) = grid {
        report["grid_dominator"] = json!(g);
    }
    emit(global, "dominance", &config, &csv, report)
}

#[derive(Args, Debug)]
pub struct MarketArgs {
    #[arg(long)]
    problem: String,

    #[arg(long)]
    ensemble: String,

    #[arg(long)]
    seller: String,

    /// e.g. `fermat-greedy:k=10,support=32,margin=0.1`.
    #[arg(long)]
    buyer: String,

    #[arg(long = "n")]
    lengths: String,

    /// Settlements averaged per length.
    #[arg(long, default_value_t = 100)]
    reps: usize,

    /// Settle once per length instead of averaging.
    #[arg(long)]
    deterministic: bool,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    delta: Option<f64>,

    #[arg(long)]
    rho: Option<f64>,

    #[arg(long)]
    burn_in: Option<usize>,
}

pub fn market(global: &Global, a: MarketArgs) -> anyhow::Result<()> {
    let seed = seed_for(a.seed, true, "market")?;
    let store = store(global)?;
    let problem = registry::problem(&a.problem, store.clone())?;
    let seller = registry::forecaster(&a.seller, &problem, &store)?;
    let buyer = registry::buyer(&a.buyer)?;
    let lengths = registry::lengths(&a.lengths)?;
    let payoff = if a.deterministic {
        PayoffKind::Deterministic
    } else {
        PayoffKind::Expectation { reps: a.reps }
    };
    let config = MarketConfig {
        problem,
        ensemble: registry::ensemble(&a.ensemble)?,
        seller,
        n_lo: *lengths.start(),
        n_hi: *lengths.end(),
        payoff,
        seed,
    };
    let mut params = VerdictParams::defaults_for(config.n_lo);
    params.delta = a.delta.unwrap_or(params.delta);
    params.rho = a.rho.unwrap_or(params.rho);
    params.burn_in = a.burn_in.unwrap_or(params.burn_in);

    let series = gain_series(&config, &buyer)?;
    let verdict = arbitrage_verdict(&series, &params)?;
    let echo = json!({
        "problem": config.problem.name(),
        "ensemble": config.ensemble.name(),
        "seller": config.seller.name(),
        "buyer": buyer.name(),
        "buyer_budget": buyer.budget(),
        "n_lo": config.n_lo,
        "n_hi": config.n_hi,
        "payoff": payoff,
        "seed": seed,
    });
    let csv = csv_with_meta("market", &echo, &series.to_csv());
    let report = MarketReport::new(echo, series, verdict);
    let mut json_text = serde_json::to_string_pretty(&report)?;
    json_text.push('\n');
    match &global.out {
        Some(path) => {
            let (json_path, csv_path) = if path.extension().is_some_and(|e| e == "csv") {
                (path.with_extension("json"), path.clone())
            } else {
                (path.clone(), path.with_extension("csv"))
            };
            write_to(Some(&json_path), &json_text)?;
            write_to(Some(&csv_path), &csv)?;
        }
        None => match global.format {
            Format::Json => write_to(None, &json_text)?,
            Format::Csv => write_to(None, &csv)?,
        },
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct GodelPiArgs {
    /// Target plausibility for the remaining statements, in (0, 1).
    #[arg(long)]
    threshold: f64,

    /// Digits of pi available for verification.
    #[arg(long, default_value_t = 10_000)]
    digits: u64,
}

pub fn godel_pi(global: &Global, a: GodelPiArgs) -> anyhow::Result<()> {
    if !(a.threshold > 0.0 && a.threshold < 1.0) {
        return Err(
            UsageError(format!("threshold must lie in (0, 1), got {}", a.threshold)).into(),
        );
    }
    if a.digits < 1 {
        return Err(Error::InvalidParameter("digit budget below 1 verifies nothing".into()).into());
    }
    let store = store(global)?;
    if a.digits > store.count() as u64 {
        return Err(Error::InsufficientDigits {
            n: (a.digits as f64).sqrt() as u64,
            needed: a.digits,
            available: store.count() as u64,
        }
        .into());
    }
    let budget_n = (a.digits as f64).sqrt().floor() as u64;
    let mut rows = String::from("m,window_lo,window_hi,width,holds\n");
    let mut verified = 0;
    for m in 1..=budget_n {
        let holds = pi_gap_nonzero(m, &store)?;
        writeln!(rows, "{m},{m},{},{},{holds}", m * m, gap_width(m))?;
        if holds && verified == m - 1 {
            verified = m;
        }
    }
    let all_verified = verified == budget_n;
    let mut usage = Usage::default();
    let tail = induction_product(
        &store,
        verified.max(1),
        Horizon::Infinite,
        &ResourceBudget::new(BudgetClass::Poly),
        &mut usage,
    )?;
    let threshold_n = min_verified_for_threshold(a.threshold)?;
    let threshold_tail = plaus_core::forecasters::tail_product(threshold_n, Horizon::Infinite);
    let config = json!({
        "threshold": a.threshold,
        "digits": a.digits,
        "digits_available": store.count(),
    });
    let report = json!({
        "largest_verified": verified,
        "all_verified": all_verified,
        "tail": tail.to_decimal(60),
        "tail_shortfall_log10": tail.shortfall_log10(),
        "threshold_n": threshold_n,
        "threshold_tail": threshold_tail.to_decimal(60),
        "threshold_met": verified >= threshold_n,
        "digit_reads": usage.digit_reads,
    });
    let body = format!("# summary: {report}\n{rows}");
    emit(
        global,
        "godel-pi",
        &config,
        &body,
        json!({"summary": report, "rows": rows_json(budget_n, &store)?}),
    )
}

fn rows_json(n: u64, store: &PiDigitStore) -> anyhow::Result<Value> {
    (1..=n)
        .map(|m| Ok(json!({"m": m, "width": gap_width(m), "holds": pi_gap_nonzero(m, store)?})))
        .collect::<anyhow::Result<Vec<_>>>()
        .map(Value::from)
}

#[derive(Args, Debug)]
pub struct WorstCaseArgs {
    #[arg(long)]
    problem: String,

    #[arg(long)]
    ensemble: String,

    /// Repeat for several forecasters.
    #[arg(long, required = true)]
    forecaster: Vec<String>,

    #[arg(long, default_value = "brier")]
    rule: String,

    #[arg(long = "n")]
    lengths: String,

    #[arg(long)]
    seed: Option<u64>,
}

pub fn worst_case(global: &Global, a: WorstCaseArgs) -> anyhow::Result<()> {
    let store = store(global)?;
    let problem = registry::problem(&a.problem, store.clone())?;
    let ensemble = registry::ensemble(&a.ensemble)?;
    let rule = rule(&a.rule)?;
    let lengths = registry::lengths(&a.lengths)?;
    let forecasters = a
        .forecaster
        .iter()
        .map(|t| registry::forecaster(t, &problem, &store))
        .collect::<Result<Vec<_>, _>>()?;
    let seed = seed_for(
        a.seed,
        forecasters.iter().any(|f| f.is_randomized()),
        "worst-case-demo",
    )?;
    let mut csv = String::from("forecaster,n,worst_score,worst_instance\n");
    let mut rows = Vec::new();
    for f in &forecasters {
        let task = ScoreTask {
            forecaster: f.as_ref(),
            problem: problem.as_ref(),
            ensemble: ensemble.as_ref(),
            rule,
            seed,
        };
        for n in lengths.clone() {
            let e = worst_case_report(&task, n)?;
            writeln!(
                csv,
                "{},{},{},{}",
                f.name(),
                e.n,
                e.worst_score,
                e.worst_instance
            )?;
            rows.push(json!({"forecaster": f.name(), "entry": e}));
        }
    }
    let config = json!({
        "problem": problem.name(),
        "ensemble": ensemble.name(),
        "forecasters": forecasters.iter().map(|f| f.name()).collect::<Vec<_>>(),
        "rule": rule,
        "n_lo": lengths.start(),
        "n_hi": lengths.end(),
        "seed": seed,
    });
    emit(global, "worst-case-demo", &config, &csv, Value::from(rows))
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    /// JSON file: `{"runs": [{"command": "score", "flags": {...}}, ...]}`.
    file: PathBuf,
}

pub fn batch(global: &Global, a: BatchArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&a.file)
        .with_context(|| format!("reading {}", a.file.display()))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("{}: {e}", a.file.display())))?;
    let runs = doc
        .get("runs")
        .and_then(Value::as_array)
        .ok_or_else(|| UsageError("batch file needs a \"runs\" array".into()))?;
    for (i, run) in runs.iter().enumerate() {
        let command = run
            .get("command")
            .and_then(Value::as_str)
            .ok_or_else(|| UsageError(format!("run {i}: missing command")))?;
        if command == "batch" {
            return Err(UsageError(format!("run {i}: nested batch")).into());
        }
        let empty = serde_json::Map::new();
        let flags = run
            .get("flags")
            .and_then(Value::as_object)
            .unwrap_or(&empty);
        let mut args = vec!["plaus".to_string(), command.to_string()];
        args.extend(crate::config::flags_to_args(flags, &HashSet::new())?);
        if let (Some(p), false) = (&global.pi_digits, flags.contains_key("pi-digits")) {
            args.extend(["--pi-digits".into(), p.display().to_string()]);
        }
        if let (Some(j), false) = (global.jobs, flags.contains_key("jobs")) {
            args.extend(["--jobs".into(), j.to_string()]);
        }
        crate::run(args).with_context(|| format!("batch run {i} ({command})"))?;
    }
    Ok(())
}
