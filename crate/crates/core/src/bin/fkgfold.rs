// Copyright 2026 The fkgfold Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `fkgfold` command-line driver.
//!
//! Exit status: 0 when every verdict passes, 1 when some verdict fails, 2 on
//! errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use fkgfold::association::{
    exchangeable_from_levels, fkg_theorem_pipeline, is_fkg, is_na_with_cap, is_nfkg, is_pa_with_cap, is_snfkg,
    is_ulc, snfkg_limit_rcr, ExchangeableLevels,
};
use fkgfold::folding::{branch_limit, check_convergence_against, fold_path, FoldPath};
use fkgfold::gen::{self, instance_rng};
use fkgfold::occurrence::{box_with_rule, check_lemma_232, check_lemma_233, SelectionRule};
use fkgfold::rational::{format_ratio, parse_nonneg_ratio, parse_ratio};
use fkgfold::rcr::{construct_uniform_symmetric_rcr, ising_build, verify_rcr, IsingSpec, RcrBase};
use fkgfold::suite::{run_suite, Caps, RunConfig, Selection, SUITES};
use fkgfold::{Event, Measure, SiteSpace};

#[derive(Parser)]
#[command(name = "fkgfold", version, about = "Exact checks for finite measures on product spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Seed for generated instances.
    #[arg(long, global = true, env = "FKGFOLD_SEED", default_value_t = 7)]
    seed: u64,
    /// Worker threads for suites and parallel scans.
    #[arg(long, global = true, env = "FKGFOLD_JOBS", default_value_t = 1)]
    jobs: usize,
    /// Largest site count for exhaustive event scans.
    #[arg(long, global = true, env = "FKGFOLD_CAP_SITES", default_value_t = Caps::default().max_sites)]
    cap_sites: usize,
    /// Largest up-set count per space in association scans.
    #[arg(long, global = true, env = "FKGFOLD_CAP_UPSETS", default_value_t = Caps::default().max_upsets)]
    cap_upsets: usize,
    /// Longest essential prefix drawn in convergence runs.
    #[arg(long, global = true, env = "FKGFOLD_CAP_BRANCH_LEN", default_value_t = Caps::default().max_branch_len)]
    cap_branch_len: usize,
    /// Rejection attempts before generators use their fallback family.
    #[arg(long, global = true, env = "FKGFOLD_RETRY_BUDGET", default_value_t = gen::RETRY_BUDGET)]
    retry_budget: u64,
    /// Instance index (suites: run only this one; generators: stream index).
    #[arg(long, global = true, env = "FKGFOLD_INSTANCE")]
    instance: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, env = "FKGFOLD_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a measure file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Apply a fold path to a measure.
    Fold { measure: PathBuf, path: PathBuf },
    /// Branch limit of an essential prefix, with optional convergence check.
    Limit {
        measure: PathBuf,
        path: PathBuf,
        /// Iterate index `i > L` to compare against the limit.
        #[arg(long)]
        iterate: Vec<usize>,
    },
    /// Random-cluster representations.
    Rcr {
        #[command(subcommand)]
        op: RcrOp,
    },
    /// Disjoint-occurrence operations.
    Occurrence {
        #[command(subcommand)]
        op: OccurrenceOp,
    },
    /// Association and lattice checks.
    Check { kind: CheckKind, measure: PathBuf },
    /// Staged checks.
    Pipeline { kind: PipelineKind, measure: PathBuf },
    /// Run a seeded suite and write its report.
    Suite {
        /// Suite name; `list` prints the names.
        name: String,
        /// Run only the first N instances.
        #[arg(long)]
        count: Option<usize>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Zero-field Ising model; edges as `u-v:x` with `x = e^{2J}`.
    Ising {
        /// Number of vertices, named 1..n (ignored with --spec).
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        edges: Vec<String>,
        /// Model file instead of --n/--edges.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Exchangeable measure from level weights `p_0..p_n`.
    Exchangeable {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<String>,
    },
    /// Uniform integer weights in 1..=64.
    Random {
        #[arg(long)]
        n: usize,
    },
    #[command(name = "random-fkg", alias = "random_fkg")]
    RandomFkg {
        #[arg(long)]
        n: usize,
    },
    #[command(name = "random-nfkg", alias = "random_nfkg")]
    RandomNfkg {
        #[arg(long)]
        n: usize,
    },
    /// Uniform measure on a set of configurations.
    #[command(name = "uniform-subset", alias = "uniform_subset")]
    UniformSubset {
        #[arg(long)]
        n: usize,
        /// Comma-separated configurations or a 0x bitset.
        #[arg(long)]
        configs: String,
    },
}

#[derive(Subcommand)]
enum RcrOp {
    /// Exact check that a base represents a measure.
    Verify {
        measure: PathBuf,
        base: PathBuf,
        #[arg(long, default_value = "0")]
        eps: String,
    },
    /// Base for the uniform measure on the support of a symmetric FKG measure.
    Construct { measure: PathBuf },
    /// Ising measure with its random-cluster base.
    Ising { spec: PathBuf },
}

#[derive(Subcommand)]
enum OccurrenceOp {
    /// `A □_Ψ B`.
    Box {
        measure: PathBuf,
        #[command(flatten)]
        events: EventArgs,
    },
    /// Upper bound by `P(A ∩ B̄)` through a random-cluster base.
    #[command(name = "check-232")]
    Check232 {
        measure: PathBuf,
        base: PathBuf,
        #[command(flatten)]
        events: EventArgs,
        #[arg(long, default_value = "0")]
        eps: String,
    },
    /// Folding hypothesis and product bound.
    #[command(name = "check-233")]
    Check233 {
        measure: PathBuf,
        #[command(flatten)]
        events: EventArgs,
        #[arg(long, default_value = "0")]
        eps: String,
    },
}

#[derive(Args)]
struct EventArgs {
    /// Event A: comma-separated configurations or a 0x bitset.
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    /// full, increasing-only or increasing-decreasing.
    #[arg(long, default_value = "full")]
    rule: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Fkg,
    Pa,
    Na,
    Nfkg,
    Snfkg,
    Ulc,
}

#[derive(Clone, Copy, ValueEnum)]
enum PipelineKind {
    FkgTheorem,
    SnfkgRcr,
}

/// A JSON document and whether it counts as a pass.
struct Output {
    value: Value,
    passed: bool,
    text: Option<String>,
}

impl Output {
    fn pass(value: Value) -> Self {
        Self { value, passed: true, text: None }
    }

    fn verdict(value: Value, passed: bool) -> Self {
        Self { value, passed, text: None }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_measure(path: &Path) -> anyhow::Result<Measure> {
    Measure::from_json_str(&read(path)?).with_context(|| format!("parsing measure {}", path.display()))
}

fn parse_event(space: &SiteSpace, text: &str) -> anyhow::Result<Event> {
    let t = text.trim();
    Ok(if t.starts_with("0x") {
        Event::parse_hex(space, t)?
    } else {
        Event::parse_configs(space, t)?
    })
}

fn event_json(p: &Measure, e: &Event) -> anyhow::Result<Value> {
    Ok(json!({
        "configs": e.configs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "hex": e.to_hex(),
        "prob": format_ratio(&p.prob_of(e)?),
    }))
}

fn measure_value(p: &Measure) -> Value {
    serde_json::to_value(p.to_json()).expect("measure serializes")
}

fn parse_edge(text: &str, space: &SiteSpace) -> anyhow::Result<(usize, usize, BigRational)> {
    let (uv, x) = text
        .split_once(':')
        .with_context(|| format!("edge `{text}` is not of the form u-v:x"))?;
    let (u, v) = uv
        .split_once('-')
        .with_context(|| format!("edge `{text}` is not of the form u-v:x"))?;
    Ok((
        space.require_position_of_name(u.trim())?,
        space.require_position_of_name(v.trim())?,
        parse_ratio(x)?,
    ))
}

fn run_gen(global: &Global, kind: &GenKind) -> anyhow::Result<Output> {
    let mut rng = instance_rng(global.seed, global.instance.unwrap_or(0) as u64);
    let measure = match kind {
        GenKind::Ising { n, edges, spec } => {
            let spec = match spec {
                Some(path) => IsingSpec::from_json_str(&read(path)?)?,
                None => {
                    let space = SiteSpace::binary(*n);
                    let edges = edges
                        .iter()
                        .filter(|e| !e.trim().is_empty())
                        .map(|e| parse_edge(e, &space))
                        .collect::<anyhow::Result<Vec<_>>>()?;
                    IsingSpec::numbered(*n, edges)?
                }
            };
            gen::ising(&spec)?
        }
        GenKind::Exchangeable { n, levels } => {
            let raw = levels.iter().map(|l| parse_nonneg_ratio(l)).collect::<Result<Vec<_>, _>>()?;
            exchangeable_from_levels(&ExchangeableLevels::new(*n, raw)?)?
        }
        GenKind::Random { n } => gen::random_measure(&mut rng, *n)?.measure,
        GenKind::RandomFkg { n } => gen::random_fkg(&mut rng, *n, global.retry_budget)?.measure,
        GenKind::RandomNfkg { n } => gen::random_nfkg(&mut rng, *n, global.retry_budget)?.measure,
        GenKind::UniformSubset { n, configs } => {
            let space = SiteSpace::binary(*n);
            gen::uniform_subset(&parse_event(&space, configs)?)?
        }
    };
    Ok(Output::pass(measure_value(&measure)))
}

fn exchangeable_levels(p: &Measure) -> Option<Vec<BigRational>> {
    let n = p.space().len();
    let mut levels: Vec<Option<BigRational>> = vec![None; n + 1];
    for w in 0..p.len() {
        let k = w.count_ones() as usize;
        let prob = p.prob(w);
        match &levels[k] {
            Some(x) if *x != prob => return None,
            Some(_) => {}
            None => levels[k] = Some(prob),
        }
    }
    levels.into_iter().collect()
}

fn run_check(global: &Global, kind: CheckKind, p: &Measure) -> anyhow::Result<Output> {
    let report = match kind {
        CheckKind::Fkg => is_fkg(p)?,
        CheckKind::Pa => is_pa_with_cap(p, global.cap_sites)?,
        CheckKind::Na => is_na_with_cap(p, global.cap_sites)?,
        CheckKind::Nfkg => is_nfkg(p)?,
        CheckKind::Snfkg => is_snfkg(p)?,
        CheckKind::Ulc => {
            p.space().require_binary()?;
            let n = p.space().len();
            return Ok(match exchangeable_levels(p) {
                None => Output::verdict(json!({ "check": "ulc", "exchangeable": false, "verdict": false }), false),
                Some(raw) => {
                    let levels = ExchangeableLevels::new(n, raw)?;
                    let ulc = is_ulc(&levels);
                    let lv: Vec<String> = levels.levels().iter().map(format_ratio).collect();
                    Output::verdict(
                        json!({ "check": "ulc", "exchangeable": true, "levels": lv, "verdict": ulc }),
                        ulc,
                    )
                }
            });
        }
    };
    let passed = report.verdict;
    Ok(Output::verdict(serde_json::to_value(&report)?, passed))
}

fn rule_for(text: &str) -> anyhow::Result<SelectionRule> {
    Ok(SelectionRule::parse(text)?)
}

fn run_occurrence(op: &OccurrenceOp) -> anyhow::Result<Output> {
    match op {
        OccurrenceOp::Box { measure, events } => {
            let p = load_measure(measure)?;
            let a = parse_event(p.space(), &events.a)?;
            let b = parse_event(p.space(), &events.b)?;
            let boxed = box_with_rule(&a, &b, &rule_for(&events.rule)?)?;
            Ok(Output::pass(json!({ "rule": events.rule, "box": event_json(&p, &boxed)? })))
        }
        OccurrenceOp::Check232 { measure, base, events, eps } => {
            let p = load_measure(measure)?;
            let nu = RcrBase::from_json_str(&read(base)?)?;
            let a = parse_event(p.space(), &events.a)?;
            let b = parse_event(p.space(), &events.b)?;
            let r = check_lemma_232(&p, &nu, &rule_for(&events.rule)?, &a, &b, &parse_nonneg_ratio(eps)?)?;
            let ok = r.ok;
            Ok(Output::verdict(serde_json::to_value(&r)?, ok))
        }
        OccurrenceOp::Check233 { measure, events, eps } => {
            let p = load_measure(measure)?;
            let a = parse_event(p.space(), &events.a)?;
            let b = parse_event(p.space(), &events.b)?;
            let r = check_lemma_233(&p, &rule_for(&events.rule)?, &a, &b, &parse_nonneg_ratio(eps)?)?;
            let ok = !r.hypothesis_ok || r.conclusion_ok;
            Ok(Output::verdict(serde_json::to_value(&r)?, ok))
        }
    }
}

fn run_rcr(op: &RcrOp) -> anyhow::Result<Output> {
    match op {
        RcrOp::Verify { measure, base, eps } => {
            let p = load_measure(measure)?;
            let nu = RcrBase::from_json_str(&read(base)?)?;
            let c = verify_rcr(&p, &nu, &parse_nonneg_ratio(eps)?)?;
            Ok(Output::verdict(
                json!({ "max_dev": format_ratio(&c.max_dev), "ok": c.ok }),
                c.ok,
            ))
        }
        RcrOp::Construct { measure } => {
            let p = load_measure(measure)?;
            let support = p.support();
            if Measure::uniform_on(&support)? != p {
                bail!("construct needs a measure uniform on its support");
            }
            let nu = construct_uniform_symmetric_rcr(&support)?;
            Ok(Output::pass(serde_json::to_value(nu.to_json())?))
        }
        RcrOp::Ising { spec } => {
            let spec = IsingSpec::from_json_str(&read(spec)?)?;
            let model = ising_build(&spec)?;
            let exact = verify_rcr(&model.measure, &model.base, &BigRational::zero())?;
            Ok(Output::verdict(
                json!({
                    "measure": measure_value(&model.measure),
                    "base": serde_json::to_value(model.base.to_json())?,
                    "bond_probabilities": model.bond_probabilities.iter().map(format_ratio).collect::<Vec<_>>(),
                    "fk_marginal_matches": model.fk_marginal_matches,
                    "rcr_exact": exact.ok,
                }),
                model.fk_marginal_matches && exact.ok,
            ))
        }
    }
}

fn run_suite_command(global: &Global, name: &str, count: Option<usize>) -> anyhow::Result<Output> {
    if name == "list" {
        return Ok(Output {
            value: Value::Null,
            passed: true,
            text: Some(SUITES.join("\n") + "\n"),
        });
    }
    let selection = match (global.instance, count) {
        (Some(_), Some(_)) => bail!("--instance and --count are exclusive"),
        (Some(i), None) => Selection::Instance(i),
        (None, Some(c)) => Selection::First(c),
        (None, None) => Selection::All,
    };
    let config = RunConfig {
        seed: global.seed,
        caps: Caps {
            max_sites: global.cap_sites,
            max_upsets: global.cap_upsets,
            max_branch_len: global.cap_branch_len,
        },
        jobs: global.jobs,
        retry_budget: global.retry_budget,
        selection,
    };
    let report = run_suite(&config, name)?;
    eprintln!("{}", report.timing_summary());
    for f in report.json["failures"].as_array().into_iter().flatten() {
        eprintln!(
            "instance {} failed: {}\n  reproduce: {}",
            f["instance"],
            f["reason"].as_str().unwrap_or(""),
            f["reproduce"].as_str().unwrap_or("")
        );
    }
    Ok(Output {
        text: Some(report.to_json_string()),
        value: Value::Null,
        passed: report.passed,
    })
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    let g = &cli.global;
    if g.jobs > 0 {
        // parallel scans inside single commands; ignore a pool that already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(g.jobs).build_global();
    }
    match &cli.command {
        Command::Gen { kind } => run_gen(g, kind),
        Command::Fold { measure, path } => {
            let p = load_measure(measure)?;
            let path = FoldPath::from_json_str(p.space(), &read(path)?)?;
            Ok(Output::pass(measure_value(&fold_path(&p, &path)?)))
        }
        Command::Limit { measure, path, iterate } => {
            let p = load_measure(measure)?;
            let path = FoldPath::from_json_str(p.space(), &read(path)?)?;
            let limit = branch_limit(&p, &path)?;
            let mut checks = Vec::new();
            let mut ok = true;
            for &i in iterate {
                let c = check_convergence_against(&limit, i)?;
                ok &= c.ok;
                checks.push(json!({
                    "i": i,
                    "distance": format_ratio(&c.distance),
                    "bound": format_ratio(&c.bound),
                    "ok": c.ok,
                }));
            }
            Ok(Output::verdict(
                json!({
                    "essential_len": limit.essential_len,
                    "ratio": format_ratio(&limit.ratio),
                    "argmax": event_json(&limit.prefix_measure, &limit.argmax_set)?,
                    "limit": measure_value(&limit.measure),
                    "convergence": checks,
                }),
                ok,
            ))
        }
        Command::Rcr { op } => run_rcr(op),
        Command::Occurrence { op } => run_occurrence(op),
        Command::Check { kind, measure } => run_check(g, *kind, &load_measure(measure)?),
        Command::Pipeline { kind, measure } => {
            let p = load_measure(measure)?;
            let report = match kind {
                PipelineKind::FkgTheorem => fkg_theorem_pipeline(&p)?,
                PipelineKind::SnfkgRcr => snfkg_limit_rcr(&p)?,
            };
            let passed = report.verdict;
            Ok(Output::verdict(serde_json::to_value(&report)?, passed))
        }
        Command::Suite { name, count } => run_suite_command(g, name, *count),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|o| {
        let text = match o.text {
            Some(t) => t,
            None => serde_json::to_string_pretty(&o.value)? + "\n",
        };
        emit(&cli.global.out, &text)?;
        Ok(o.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
