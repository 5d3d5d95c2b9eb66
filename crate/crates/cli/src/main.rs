use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use halfspin::embeddings::{
    corollary_suite, open_problem_probe, run_search, verify_hypercube_theorem, verify_main_theorem, Kind, PatternSpec,
    Sample, SearchConfig,
};
use halfspin::graphcore::{to_dot, to_json, FiniteGraph, MAX_DENSE_VERTICES};
use halfspin::grassmann::{build_dual_polar_graph, build_halfspin_graph, PolarGeometry, Sign};
use halfspin::report::to_json as report_json;
use halfspin::suites::{axiom_suite, clique_suite, halfcube_lemmas_exhaustive, halfcube_lemmas_sampled};
use halfspin::Error;

const EXIT_OK: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_SOFTWARE: u8 = 70;
const EXIT_IO: u8 = 74;

const SCHEMA: &str = "halfspin/1";

#[derive(Parser, Debug)]
#[command(name = "halfspin", version, about = "Half-spin Grassmann graphs of D_n(2): build, verify, search")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write points, generators and graphs of the rank-n model.
    Build(BuildArgs),
    /// Run a verification suite. Exit 0 pass, 1 violation, 2 inconclusive.
    Verify(VerifyArgs),
    /// Search embeddings of a cube or half-cube pattern.
    Search(SearchArgs),
}

#[derive(Args, Debug, Serialize)]
struct Common {
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BuildArgs {
    #[arg(long)]
    n: usize,
    /// Comma-separated targets: points, generators, dual, halfspin+, halfspin-.
    #[arg(long, value_delimiter = ',')]
    emit: Option<Vec<String>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Suite {
    Axioms,
    Cliques,
    HalfcubeLemmas,
    Theorem31,
    Theorem51,
    Corollary44,
    OpenProbe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Switch {
    On,
    Off,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Half-spin family, `+` or `-`.
    #[arg(long, default_value = "+", value_parser = parse_sign)]
    family: Sign,
    /// Wall-clock limit for searches, e.g. `60s` or `5m`.
    #[arg(long, value_parser = humantime::parse_duration)]
    #[serde(serialize_with = "ser_duration")]
    budget: Option<std::time::Duration>,
    /// Symmetry breaking for exhaustive searches.
    #[arg(long, value_enum)]
    symmetry: Option<Switch>,
    /// Number of seeded samples instead of an exhaustive search.
    #[arg(long)]
    sample: Option<usize>,
    /// Force an exhaustive search where sampling is the default.
    #[arg(long)]
    exhaustive: bool,
    /// Randomized instances per lemma.
    #[arg(long, default_value_t = 10_000)]
    instances: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    /// `H<m>` or `halfH<m>`.
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "+", value_parser = parse_sign)]
    family: Sign,
    #[arg(long, default_value = "isometric", value_parser = parse_kind)]
    kind: Kind,
    #[arg(long, value_parser = humantime::parse_duration)]
    #[serde(serialize_with = "ser_duration")]
    budget: Option<std::time::Duration>,
    #[arg(long, value_enum, default_value = "off")]
    symmetry: Switch,
    #[arg(long)]
    sample: Option<usize>,
    /// Solutions written to the report.
    #[arg(long, default_value_t = 100)]
    keep: usize,
    #[command(flatten)]
    common: Common,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn ser_duration<S: serde::Serializer>(d: &Option<std::time::Duration>, s: S) -> Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_str(&humantime::format_duration(*d).to_string()),
        None => s.serialize_none(),
    }
}

enum Outcome {
    Pass,
    Violation,
    Inconclusive,
}

impl Outcome {
    fn of(passed: bool, conclusive: bool) -> Self {
        match (passed, conclusive) {
            (false, _) => Outcome::Violation,
            (true, false) => Outcome::Inconclusive,
            (true, true) => Outcome::Pass,
        }
    }

    fn code(&self) -> u8 {
        match self {
            Outcome::Pass => EXIT_OK,
            Outcome::Violation => EXIT_VIOLATION,
            Outcome::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Violation => "violation",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

/// A command's result: report files to write and the overall outcome.
struct Run {
    files: Vec<(String, String)>,
    outcome: Outcome,
    summary: Vec<String>,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Lib(Error::Budget { .. } | Error::CliqueLimit(_)) => EXIT_BUDGET,
            Failure::Lib(Error::Contradiction(_)) => EXIT_VIOLATION,
            Failure::Lib(Error::InvalidParameter(_) | Error::Precondition(_)) => EXIT_USAGE,
            Failure::Lib(_) => EXIT_SOFTWARE,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Report envelope: schema tag, the exact configuration and the body.
#[derive(Serialize)]
struct Envelope<'a, C: Serialize, B: Serialize> {
    schema: &'static str,
    kind: &'a str,
    config: &'a C,
    report: B,
}

fn envelope<C: Serialize, B: Serialize>(kind: &str, config: &C, report: B) -> Result<String, Error> {
    report_json(&Envelope {
        schema: SCHEMA,
        kind,
        config,
        report,
    })
}

/// Top-level scalar fields of a report, one per line.
fn scalar_lines(prefix: &str, v: &Value) -> Vec<String> {
    let Value::Object(map) = v else {
        return Vec::new();
    };
    map.iter()
        .filter(|(_, x)| !x.is_object() && !x.is_array())
        .map(|(k, x)| format!("{prefix}{k}: {x}"))
        .collect()
}

fn geometry(n: usize) -> Result<PolarGeometry, Error> {
    PolarGeometry::new(n)
}

fn cmd_build(a: &BuildArgs) -> Result<Run, Failure> {
    let geo = geometry(a.n)?;
    let explicit = a.emit.is_some();
    let targets: Vec<String> = a.emit.clone().unwrap_or_else(|| {
        let mut t = vec!["points", "generators", "dual"];
        if a.n >= 3 {
            t.extend(["halfspin+", "halfspin-"]);
        }
        t.into_iter().map(String::from).collect()
    });
    let mut files = Vec::new();
    let mut summary = vec![
        format!("n: {}", a.n),
        format!("points: {}", geo.model().points().len()),
        format!("generators: {}", geo.generators().len()),
        format!(
            "families: {} (+), {} (-)",
            geo.family(Sign::Plus).len(),
            geo.family(Sign::Minus).len()
        ),
    ];
    let emit_graph = |name: &str, g: &FiniteGraph, files: &mut Vec<(String, String)>| -> Result<(), Error> {
        files.push((format!("{name}.json"), report_json(&to_json(g))?));
        files.push((format!("{name}.dot"), to_dot(g)));
        Ok(())
    };
    for t in &targets {
        let graph_size = match t.as_str() {
            "dual" => Some(geo.generators().len()),
            "halfspin+" => Some(geo.family(Sign::Plus).len()),
            "halfspin-" => Some(geo.family(Sign::Minus).len()),
            "points" | "generators" => None,
            other => return Err(Error::InvalidParameter(format!("unknown build target {other:?}")).into()),
        };
        if let Some(k) = graph_size {
            if k > MAX_DENSE_VERTICES && !explicit {
                summary.push(format!("{t}: skipped, {k} vertices exceed {MAX_DENSE_VERTICES}"));
                continue;
            }
        }
        match t.as_str() {
            "points" => {
                let pts: Vec<String> = geo.model().points().iter().map(|p| format!("{p:#x}")).collect();
                files.push(("points.json".into(), report_json(&pts)?));
            }
            "generators" => {
                #[derive(Serialize)]
                struct Gen {
                    index: usize,
                    family: Sign,
                    rows: Vec<String>,
                }
                let gens: Vec<Gen> = geo
                    .generators()
                    .iter()
                    .enumerate()
                    .map(|(i, g)| Gen {
                        index: i,
                        family: geo.sign(i),
                        rows: g.rows().iter().map(|r| format!("{r:#x}")).collect(),
                    })
                    .collect();
                files.push(("generators.json".into(), report_json(&gens)?));
            }
            "dual" => emit_graph("dual", &build_dual_polar_graph(&geo)?.graph, &mut files)?,
            s => {
                let sign = if s == "halfspin+" { Sign::Plus } else { Sign::Minus };
                let hs = build_halfspin_graph(&geo, sign)?;
                let name = if sign == Sign::Plus { "halfspin-plus" } else { "halfspin-minus" };
                summary.push(format!("{name}: {} vertices, {} edges", hs.graph.vertex_count(), hs.graph.edge_count()));
                emit_graph(name, &hs.graph, &mut files)?;
            }
        }
    }
    Ok(Run {
        files,
        outcome: Outcome::Pass,
        summary,
    })
}

fn search_config(a: &VerifyArgs, exhaustive_default: bool, symmetry_default: bool) -> SearchConfig {
    let sampled = a.sample.is_some() || (!exhaustive_default && !a.exhaustive);
    let mut cfg = if sampled {
        SearchConfig::sampled(Kind::Isometric, Sample::new(a.sample.unwrap_or(100)), a.common.seed)
    } else {
        SearchConfig::exhaustive(Kind::Isometric)
    };
    cfg.seed = a.common.seed;
    cfg.time_budget = a.budget;
    cfg.symmetric(a.symmetry.map_or(symmetry_default, |s| s == Switch::On))
}

fn single<R: Serialize>(kind: &str, a: &VerifyArgs, r: &R, passed: bool, conclusive: bool) -> Result<Run, Failure> {
    let body = envelope(kind, a, r)?;
    let v = serde_json::to_value(r).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(Run {
        files: vec![(format!("{kind}.json"), body)],
        outcome: Outcome::of(passed, conclusive),
        summary: scalar_lines("", &v),
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Run, Failure> {
    let seed = a.common.seed;
    match a.suite {
        Suite::Axioms => {
            let r = axiom_suite(a.n.unwrap_or(4), a.instances, seed)?;
            single("axioms", a, &r, r.passed, true)
        }
        Suite::Cliques => {
            let geo = geometry(a.n.unwrap_or(4))?;
            let r = clique_suite(&geo, a.family)?;
            single("cliques", a, &r, r.passed, true)
        }
        Suite::HalfcubeLemmas => {
            let ms: Vec<usize> = match a.m {
                Some(m) => vec![m],
                None => vec![4, 5, 6, 8, 10],
            };
            let reports = ms
                .iter()
                .map(|&m| {
                    if m <= 6 && a.sample.is_none() {
                        halfcube_lemmas_exhaustive(m)
                    } else {
                        halfcube_lemmas_sampled(m, a.sample.unwrap_or(a.instances), seed)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let passed = reports.iter().all(|r| r.passed);
            let mut summary = Vec::new();
            for r in &reports {
                summary.push(format!("m = {} ({}): {}", r.m, r.mode, if r.passed { "pass" } else { "FAIL" }));
            }
            Ok(Run {
                files: vec![("halfcube-lemmas.json".into(), envelope("halfcube-lemmas", a, &reports)?)],
                outcome: Outcome::of(passed, true),
                summary,
            })
        }
        Suite::Theorem31 => {
            let n = a.n.unwrap_or(4);
            let geo = geometry(n)?;
            let cfg = search_config(a, false, false);
            let r = verify_hypercube_theorem(&geo, a.m.unwrap_or(n), &cfg)?;
            single("theorem31", a, &r, r.passed, r.conclusive)
        }
        Suite::Theorem51 => {
            let n = a.n.unwrap_or(4);
            let geo = geometry(n)?;
            let cfg = search_config(a, n == 4, false);
            let r = verify_main_theorem(&geo, a.family, a.m.unwrap_or(4), &cfg)?;
            single("theorem51", a, &r, r.passed, r.conclusive)
        }
        Suite::Corollary44 => {
            if a.n.is_some_and(|n| n != 4) {
                return Err(Error::InvalidParameter("corollary44 runs with n = 4".into()).into());
            }
            let geo = geometry(4)?;
            let full = a.symmetry != Some(Switch::On);
            let r = corollary_suite(&geo, a.family, seed, full)?;
            single("corollary44", a, &r, r.passed, r.conclusive)
        }
        Suite::OpenProbe => {
            let m = a.m.unwrap_or(6);
            let geo = geometry(a.n.unwrap_or(m))?;
            let mut cfg = search_config(a, true, true);
            cfg.time_budget = Some(a.budget.unwrap_or(std::time::Duration::from_secs(60)));
            let r = open_problem_probe(&geo, a.family, m, &cfg)?;
            single("open-probe", a, &r, true, !r.inconclusive)
        }
    }
}

fn cmd_search(a: &SearchArgs) -> Result<Run, Failure> {
    let pattern: PatternSpec = a.pattern.parse()?;
    let geo = geometry(a.n)?;
    let mut cfg = match a.sample {
        Some(k) => SearchConfig::sampled(a.kind, Sample::new(k), a.common.seed),
        None => SearchConfig::exhaustive(a.kind),
    };
    cfg.seed = a.common.seed;
    cfg.time_budget = a.budget;
    let cfg = cfg.symmetric(a.symmetry == Switch::On);
    let r = run_search(&geo, pattern, a.family, &cfg, a.keep)?;
    let passed = r.check_failures == 0 && r.verdicts.is_none_or(|v| v.failures == 0);
    let v = serde_json::to_value(&r).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut summary = scalar_lines("", &v);
    if let Some(vc) = r.verdicts {
        summary.push(format!("verdicts: {} A, {} B, {} errors", vc.a, vc.b, vc.failures));
    }
    Ok(Run {
        files: vec![("search.json".into(), envelope("search", a, &r)?)],
        outcome: Outcome::of(passed, r.conclusive),
        summary,
    })
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    command_line: Vec<String>,
    /// SHA-256 of the canonical JSON configuration.
    config_hash: String,
    config: &'a Value,
    seed: u64,
    n: Option<usize>,
    family: Option<Sign>,
    version: &'static str,
    wall_time_ms: u128,
    outcome: &'a str,
    exit_code: u8,
    summary: &'a [String],
    reports: Vec<&'a str>,
}

fn write_outputs(out: &Path, run: &Run, manifest: &Manifest) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    for (name, body) in &run.files {
        std::fs::write(out.join(name), body)?;
    }
    let mut text = format!("outcome: {}\n", manifest.outcome);
    for line in &run.summary {
        text.push_str(line);
        text.push('\n');
    }
    std::fs::write(out.join("summary.txt"), text)?;
    let body = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)? + "\n";
    std::fs::write(out.join("manifest.json"), body)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let start = Instant::now();
    let (result, config, common, n, family) = match &cli.cmd {
        Cmd::Build(a) => (cmd_build(a), serde_json::to_value(("build", a)), &a.common, Some(a.n), None),
        Cmd::Verify(a) => (cmd_verify(a), serde_json::to_value(("verify", a)), &a.common, a.n, Some(a.family)),
        Cmd::Search(a) => (cmd_search(a), serde_json::to_value(("search", a)), &a.common, Some(a.n), Some(a.family)),
    };
    let config = config.unwrap_or(Value::Null);
    let run = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("halfspin: {e}");
            return ExitCode::from(e.code());
        }
    };
    let code = run.outcome.code();
    let manifest = Manifest {
        schema: SCHEMA,
        command_line: std::env::args().collect(),
        config_hash: hex::encode(Sha256::digest(config.to_string().as_bytes())),
        config: &config,
        seed: common.seed,
        n,
        family,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_ms: start.elapsed().as_millis(),
        outcome: run.outcome.name(),
        exit_code: code,
        summary: &run.summary,
        reports: run.files.iter().map(|f| f.0.as_str()).collect(),
    };
    if let Err(e) = write_outputs(&common.out, &run, &manifest) {
        eprintln!("halfspin: cannot write to {}: {e}", common.out.display());
        return ExitCode::from(EXIT_IO);
    }
    println!("outcome: {}", run.outcome.name());
    for line in &run.summary {
        println!("{line}");
    }
    ExitCode::from(code)
}
