//! Command-line front end. Reports are JSON objects with sorted keys and a
//! top-level `schema_version`; the same command and seed always produce the
//! same bytes. Timing goes to stderr only.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::capacity;
use crate::error::{Error, Result};
use crate::gpt::{product_effect, product_state, State, EPS_EXACT, EPS_OPT};
use crate::hadamard::{self, BitString};
use crate::hst;
use crate::protocols;
use crate::sampling;
use crate::theory::{self, TheoryConfig};
use crate::variants::{self, LambdaTauTheory};

pub const SCHEMA_VERSION: u32 = 1;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const DOMAIN: i32 = 2;
    pub const FALSIFIED: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "gptlab", version, about = "Hypersphere theories, hyperdense coding and teleportation")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the report to PATH instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoryKind {
    Base,
    LambdaTau,
    Embedded,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Group,
    Consistency,
    Tomography,
    Lemmas,
    Baseline,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dense coding with a shared entangled state.
    DenseCoding(DenseCodingArgs),
    /// Teleport a state through the maximally entangled state.
    Teleport(TeleportArgs),
    /// Entanglement swapping of an entangled state.
    Swap(SwapArgs),
    /// Best dense coding information of the (lambda, tau) theories.
    LtTable(LtTableArgs),
    /// Run invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DenseCodingArgs {
    #[arg(long)]
    pub n_bits: u32,
    #[arg(long, value_enum, default_value_t = TheoryKind::Base)]
    pub theory: TheoryKind,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TeleportArgs {
    #[arg(long)]
    pub n_bits: u32,
    /// `random` or `axis:k` for the pure state along axis k (1-based).
    #[arg(long, default_value = "random")]
    pub state: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SwapArgs {
    #[arg(long)]
    pub n_bits: u32,
    #[arg(long, default_value_t = 0)]
    pub mu: usize,
}

#[derive(Debug, Args)]
pub struct LtTableArgs {
    #[arg(long, default_value_t = 5)]
    pub n_max: u32,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// A finished command: the report and whether every check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn report(command: &[String], body: Map<String, Value>) -> Value {
    let mut top = body;
    top.insert("schema_version".into(), json!(SCHEMA_VERSION));
    top.insert("command".into(), json!(command));
    Value::Object(top)
}

fn theory_config(a: &DenseCodingArgs) -> Result<TheoryConfig> {
    let forbid = |name: &str, present: bool| -> Result<()> {
        if present {
            return Err(Error::Domain(format!("--{name} does not apply to this theory")));
        }
        Ok(())
    };
    let need = |name: &str, v: Option<f64>| -> Result<f64> {
        v.ok_or_else(|| Error::Domain(format!("--{name} is required for this theory")))
    };
    let cfg = match a.theory {
        TheoryKind::Base => {
            forbid("lambda", a.lambda.is_some())?;
            forbid("tau", a.tau.is_some())?;
            forbid("m", a.m.is_some())?;
            TheoryConfig::Base { n_bits: a.n_bits }
        }
        TheoryKind::LambdaTau => {
            forbid("m", a.m.is_some())?;
            TheoryConfig::LambdaTau {
                n_bits: a.n_bits,
                lambda: need("lambda", a.lambda)?,
                tau: a.tau.unwrap_or(1.0),
            }
        }
        TheoryKind::Embedded => {
            forbid("lambda", a.lambda.is_some())?;
            forbid("tau", a.tau.is_some())?;
            TheoryConfig::Embedded {
                n_bits: a.n_bits,
                m: a.m.ok_or_else(|| Error::Domain("--m is required for the embedded theory".into()))?,
            }
        }
        TheoryKind::Weak => {
            forbid("tau", a.tau.is_some())?;
            forbid("m", a.m.is_some())?;
            TheoryConfig::Weak { n_bits: a.n_bits, lambda: need("lambda", a.lambda)? }
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_dense_coding(command: &[String], a: &DenseCodingArgs) -> Result<Outcome> {
    let cfg = theory_config(a)?;
    let run = protocols::dense_coding(&cfg, a.seed)?;
    let n = f64::from(run.n_bits);
    let cap = capacity::channel_capacity(run.channel.conditional())?;
    let mut bounds = Map::new();
    bounds.insert("local_capacity_bits".into(), json!(1.0));
    bounds.insert("dimension_upper_bound_bits".into(), json!(capacity::dimension_upper_bound(run.n_bits)?));
    bounds.insert("dense_coding_lower_bound_bits".into(), json!(run.info_bits));
    match cfg {
        TheoryConfig::LambdaTau { n_bits, lambda, tau } => {
            let (lo, hi) = variants::admissible_range(n_bits)?;
            let p = (1.0 + ((1u64 << n_bits) as f64 - 1.0) * lambda * tau) / (1u64 << n_bits) as f64;
            bounds.insert("admissible_lambda_tau".into(), json!([lo, hi]));
            bounds.insert("closed_form_bits".into(), json!(n - variants::lt_entropy(p, n_bits)));
            bounds.insert("family_optimum_bits".into(), json!(variants::lt_optimal_info(n_bits)?));
        }
        TheoryConfig::Weak { n_bits, lambda } => {
            bounds.insert("weak_bound_bits".into(), json!(capacity::weak_entanglement_bound(lambda, n_bits)?));
            bounds.insert(
                "thresholds".into(),
                json!([capacity::weak_threshold(0, n_bits)?, capacity::weak_threshold(1, n_bits)?]),
            );
        }
        _ => {}
    }
    let within = cap.capacity_bits <= capacity::dimension_upper_bound(run.n_bits)? + EPS_OPT;
    let mut body = Map::new();
    body.insert("theory".into(), to_value(&cfg));
    body.insert("seed".into(), json!(a.seed));
    body.insert("channel".into(), to_value(&run.channel));
    body.insert("info_bits".into(), json!(run.info_bits));
    body.insert("capacity".into(), to_value(&cap));
    body.insert("classification".into(), to_value(&protocols::classify(run.info_bits, 1.0)));
    body.insert("bounds".into(), Value::Object(bounds));
    Ok(Outcome { report: report(command, body), passed: within })
}

fn teleport_input(arg: &str, n_bits: u32, seed: u64) -> Result<State> {
    BitString::zero(n_bits)?;
    let n = (1usize << n_bits) - 1;
    if arg == "random" {
        return Ok(sampling::pure_state(n, &mut sampling::rng_for(seed, 1)));
    }
    let k = arg
        .strip_prefix("axis:")
        .and_then(|k| k.parse::<usize>().ok())
        .ok_or_else(|| Error::Domain(format!("--state must be `random` or `axis:k`, got `{arg}`")))?;
    if k == 0 || k > n {
        return Err(Error::Domain(format!("axis must be in 1..={n}, got {k}")));
    }
    let mut r = vec![0.0; n];
    r[k - 1] = 1.0;
    hst::make_state(&r)
}

pub fn cmd_teleport(command: &[String], a: &TeleportArgs) -> Result<Outcome> {
    let omega = teleport_input(&a.state, a.n_bits, a.seed)?;
    let run = protocols::teleport(&omega, a.n_bits, a.seed)?;
    let mut body = Map::new();
    body.insert("seed".into(), json!(a.seed));
    body.insert("n_bits".into(), json!(a.n_bits));
    body.insert("input_state".into(), json!(run.input_state));
    body.insert("bob_effects".into(), json!(run.direct.len()));
    body.insert("p_x".into(), json!(run.p_x));
    body.insert("corrections".into(), json!(run.corrections));
    body.insert("max_residual".into(), json!(run.max_residual));
    Ok(Outcome { report: report(command, body), passed: true })
}

pub fn cmd_swap(command: &[String], a: &SwapArgs) -> Result<Outcome> {
    let mu = BitString::new(a.mu, a.n_bits)?;
    let run = protocols::swap_entangled(mu)?;
    let mut body = Map::new();
    body.insert("n_bits".into(), json!(a.n_bits));
    body.insert("mu".into(), json!(a.mu));
    body.insert("p_x".into(), json!(run.p_x));
    body.insert("conditional".into(), json!(run.conditional));
    body.insert("max_residual".into(), json!(run.max_residual));
    Ok(Outcome { report: report(command, body), passed: true })
}

/// Published two-decimal values for `N = 2..=5`.
pub const LT_REFERENCE: [(u32, f64); 4] = [(2, 2.0), (3, 0.15), (4, 0.05), (5, 0.02)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LtRow {
    pub n_bits: u32,
    pub lambda_tau: f64,
    pub success_probability: f64,
    pub info_bits: f64,
    pub capacity_bits: f64,
    pub reference: Option<f64>,
    pub matches_reference: Option<bool>,
}

pub fn lt_table(n_max: u32) -> Result<Vec<LtRow>> {
    if !(2..=12).contains(&n_max) {
        return Err(Error::Domain(format!("--n-max must be in 2..=12, got {n_max}")));
    }
    (2..=n_max)
        .map(|n| {
            let th = LambdaTauTheory::optimal(n)?;
            let info = variants::lt_optimal_info(n)?;
            let ch = variants::lt_channel(&th)?;
            let cap = capacity::channel_capacity(ch.conditional())?;
            let reference = LT_REFERENCE.iter().find(|r| r.0 == n).map(|r| r.1);
            Ok(LtRow {
                n_bits: n,
                lambda_tau: th.lambda() * th.tau(),
                success_probability: variants::optimal_success_probability(n)?,
                info_bits: info,
                capacity_bits: cap.capacity_bits,
                reference,
                matches_reference: reference.map(|r| (info - r).abs() <= 0.005),
            })
        })
        .collect()
}

pub fn cmd_lt_table(command: &[String], a: &LtTableArgs) -> Result<Outcome> {
    let rows = lt_table(a.n_max)?;
    let decreasing = rows.windows(2).all(|w| w[1].info_bits < w[0].info_bits);
    let passed = decreasing
        && rows.iter().all(|r| {
            r.matches_reference != Some(false) && (r.capacity_bits - r.info_bits).abs() <= EPS_OPT
        });
    let mut body = Map::new();
    body.insert("rows".into(), to_value(&rows));
    body.insert("decreasing".into(), json!(decreasing));
    Ok(Outcome { report: report(command, body), passed })
}

fn suite_result(passed: bool, details: Value) -> Value {
    json!({ "passed": passed, "details": details })
}

fn suite_group() -> Result<Value> {
    let mut rows = Vec::new();
    let mut ok = true;
    for n in 1..=6 {
        let r = hadamard::verify_group(n)?;
        ok &= r.passed();
        rows.push(to_value(&r));
    }
    Ok(suite_result(ok, Value::Array(rows)))
}

fn suite_consistency(trials: usize, seed: u64) -> Result<Value> {
    let mut ok = true;
    let mut worst_norm: f64 = 0.0;
    let mut worst_product: f64 = 0.0;
    let mut membership = Vec::new();
    let mut measurements = Vec::new();
    for n_bits in 1..=4u32 {
        let n = (1usize << n_bits) - 1;
        let mut rng = sampling::rng_for(seed, u64::from(n_bits));
        for mu in BitString::all(n_bits)? {
            let t = hadamard::local_transformation(mu);
            for _ in 0..trials {
                let w = sampling::any_state(n, &mut rng);
                let out = t.apply_state(&w)?;
                worst_norm = worst_norm.max((out.coord_norm() - w.coord_norm()).abs());
                worst_norm = worst_norm.max((out.entries()[0] - 1.0).abs());
            }
            let wa = sampling::any_state(n, &mut rng);
            let wb = sampling::any_state(n, &mut rng);
            let prod = product_state(&wa, &wb);
            let moved = t.apply_a(&prod)?;
            let expected = product_state(&t.apply_state(&wa)?, &wb);
            worst_product = worst_product.max((moved.matrix() - expected.matrix()).amax());
            let r = hadamard::verify_max_tensor_membership(
                &hadamard::entangled_state(mu),
                n_bits,
                trials.min(200),
                seed ^ mu.value() as u64,
            )?;
            ok &= r.passed();
            if !r.passed() {
                membership.push(to_value(&r));
            }
        }
        let cfg = TheoryConfig::Base { n_bits };
        let bell = theory::validate_bipartite_measurement(&hadamard::bell_measurement(n_bits)?, &cfg, 50, seed)?;
        let local = theory::validate_measurement(
            &hst::canonical_measurement(&sampling::unit_vector(n, &mut rng))?,
            &TheoryConfig::Hst { n },
        )?;
        ok &= bell.passed() && local.passed();
        measurements.push(json!({ "n_bits": n_bits, "bell": to_value(&bell), "canonical": to_value(&local) }));
    }
    let ns = protocols::no_signalling_residual(3, trials.min(200), seed)?;
    ok &= worst_norm < EPS_EXACT && worst_product < EPS_EXACT && ns < EPS_EXACT;
    Ok(suite_result(
        ok,
        json!({
            "max_state_norm_change": worst_norm,
            "max_product_residual": worst_product,
            "no_signalling_residual": ns,
            "membership_failures": membership,
            "measurements": measurements,
        }),
    ))
}

fn suite_tomography(trials: usize, seed: u64) -> Result<Value> {
    let mut worst: f64 = 0.0;
    for n_bits in 1..=3u32 {
        let n = (1usize << n_bits) - 1;
        let mut rng = sampling::rng_for(seed, u64::from(n_bits));
        let phis: Vec<_> = BitString::all(n_bits)?.map(hadamard::entangled_state).collect();
        for phi in &phis {
            worst = worst.max((hadamard::tomography_of(phi).matrix() - phi.matrix()).amax());
        }
        for _ in 0..trials.min(100) {
            let prod = product_state(&sampling::any_state(n, &mut rng), &sampling::any_state(n, &mut rng));
            let k = rand::Rng::random_range(&mut rng, 0..phis.len());
            let w: f64 = rand::Rng::random(&mut rng);
            let mix = phis[k].mix(&prod, w)?;
            for phi in [&prod, &mix] {
                worst = worst.max((hadamard::tomography_of(phi).matrix() - phi.matrix()).amax());
            }
        }
    }
    Ok(suite_result(worst < EPS_EXACT, json!({ "max_reconstruction_error": worst })))
}

fn suite_lemmas(trials: usize, seed: u64) -> Result<Value> {
    let mut checked = 0usize;
    let mut failures = Vec::new();
    let mut record = |label: String, r: variants::LemmaReport| {
        checked += 1;
        if !r.passed() {
            failures.push(json!({ "object": label, "report": to_value(&r) }));
        }
    };
    for n_bits in 1..=4u32 {
        let n = (1usize << n_bits) - 1;
        let mut rng = sampling::rng_for(seed, u64::from(n_bits));
        for mu in BitString::all(n_bits)? {
            record(format!("phi_{} N={n_bits}", mu.value()), variants::lemma_state_check(&hadamard::entangled_state(mu)));
            record(format!("E_{} N={n_bits}", mu.value()), variants::lemma_effect_check(&hadamard::entangled_effect(mu)));
        }
        if n_bits >= 2 {
            let th = LambdaTauTheory::optimal(n_bits)?;
            for mu in BitString::all(n_bits)? {
                record(format!("lambda-tau phi_{} N={n_bits}", mu.value()), variants::lemma_state_check(&th.state(mu)?));
                record(format!("lambda-tau E_{} N={n_bits}", mu.value()), variants::lemma_effect_check(&th.effect(mu)?));
            }
            record(format!("lambda-tau witness N={n_bits}"), variants::lemma_state_check(&th.witness_state()));
        }
        for t in 0..trials.min(200) {
            let prod = product_state(&sampling::any_state(n, &mut rng), &sampling::any_state(n, &mut rng));
            record(format!("product state {t} N={n_bits}"), variants::lemma_state_check(&prod));
            let eff = product_effect(&sampling::any_effect(n, &mut rng), &sampling::any_effect(n, &mut rng));
            record(format!("product effect {t} N={n_bits}"), variants::lemma_effect_check(&eff));
        }
    }
    let ok = failures.is_empty();
    Ok(suite_result(ok, json!({ "checked": checked, "failures": failures })))
}

fn suite_baseline(trials: usize, seed: u64) -> Result<Value> {
    let s = protocols::separable_baseline(3, trials.max(1), seed)?;
    let hst_search = hst::random_protocol_search(3, trials.max(1), seed)?;
    let ok = s.max_info_bits <= 1.0 + EPS_OPT && hst_search.max_capacity_bits <= 1.0 + EPS_OPT;
    Ok(suite_result(
        ok,
        json!({ "separable": to_value(&s), "single_system": to_value(&hst_search) }),
    ))
}

pub fn cmd_verify(command: &[String], a: &VerifyArgs) -> Result<Outcome> {
    let run = |s: Suite| a.suite == Suite::All || a.suite == s;
    let mut suites = Map::new();
    if run(Suite::Group) {
        suites.insert("group".into(), suite_group()?);
    }
    if run(Suite::Consistency) {
        suites.insert("consistency".into(), suite_consistency(a.trials, a.seed)?);
    }
    if run(Suite::Tomography) {
        suites.insert("tomography".into(), suite_tomography(a.trials, a.seed)?);
    }
    if run(Suite::Lemmas) {
        suites.insert("lemmas".into(), suite_lemmas(a.trials, a.seed)?);
    }
    if run(Suite::Baseline) {
        suites.insert("baseline".into(), suite_baseline(a.trials, a.seed)?);
    }
    let passed = suites.values().all(|v| v["passed"] == Value::Bool(true));
    let mut body = Map::new();
    body.insert("seed".into(), json!(a.seed));
    body.insert("trials".into(), json!(a.trials));
    body.insert("passed".into(), json!(passed));
    body.insert("suites".into(), Value::Object(suites));
    Ok(Outcome { report: report(command, body), passed })
}

/// Flattens a report into `(path, value)` pairs, objects joined with `.`
/// and array elements as `[i]`.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(prefix: String, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, v) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(p, v, out);
                }
            }
            Value::Array(a) => {
                for (i, v) in a.iter().enumerate() {
                    walk(format!("{prefix}[{i}]"), v, out);
                }
            }
            Value::String(s) => out.push((prefix, s.clone())),
            Value::Null => out.push((prefix, String::new())),
            other => out.push((prefix, other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk(String::new(), value, &mut out);
    out
}

pub fn render(value: &Value, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("serializable");
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Domain(format!("csv output failed: {e}"));
            w.write_record(["path", "value"]).map_err(io)?;
            for (p, v) in flatten(value) {
                w.write_record([p, v]).map_err(io)?;
            }
            w.into_inner().map_err(|e| Error::Domain(format!("csv output failed: {e}")))
        }
        Format::Table => {
            let rows = flatten(value);
            let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
            let mut s = String::new();
            for (p, v) in rows {
                s.push_str(&format!("{p:<width$}  {v}\n"));
            }
            Ok(s.into_bytes())
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ProtocolFailure(_) => exit::FALSIFIED,
        _ => exit::DOMAIN,
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    if let Ok(v) = std::env::var("GPTLAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("GPTLAB_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err("GPTLAB_THREADS must be positive".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and writes the
/// report. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::DOMAIN } else { exit::OK };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return exit::DOMAIN;
    }
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::DenseCoding(a) => cmd_dense_coding(&echo, a),
        Command::Teleport(a) => cmd_teleport(&echo, a),
        Command::Swap(a) => cmd_swap(&echo, a),
        Command::LtTable(a) => cmd_lt_table(&echo, a),
        Command::Verify(a) => cmd_verify(&echo, a),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let bytes = match render(&outcome.report, cli.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::DOMAIN;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return exit::DOMAIN;
    }
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    if outcome.passed {
        exit::OK
    } else {
        eprintln!("validation failed");
        exit::VALIDATION
    }
}
