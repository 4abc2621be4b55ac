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

//! Seeded batch suites with deterministic JSON reports.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::association::{
    exchangeable_from_levels, fkg_theorem_pipeline, is_fkg, is_fkg_via_foldings, is_na_with_cap, is_nfkg, is_pa_with_cap,
    is_snfkg, is_ulc, perturb, snfkg_limit_rcr, AssociationReport, ExchangeableLevels,
};
use crate::error::{Error, Result};
use crate::event::{upset_masks, Event, DEFAULT_UPSET_CAP};
use crate::folding::{
    check_convergence_against, essential_branches, essentialize, fold, fold_path, FoldPath, FoldSpec,
    DEFAULT_BRANCH_CAP,
};
use crate::gen::{instance_rng, random_fkg, random_measure, random_nfkg, Generated, RETRY_BUDGET};
use crate::measure::Measure;
use crate::occurrence::{check_lemma_232, check_lemma_233, full_box_table, SelectionRule};
use crate::rational::{format_ratio, ratio};
use crate::rcr::{eta_marginal, fk_marginal, ising_build, ising_measure, verify_rcr, check_sublattice, IsingSpec};
use crate::space::SiteSpace;

pub const SUITES: &[&str] = &[
    "fkg-pa",
    "snfkg-na",
    "nfkg-na",
    "rcr-roundtrip",
    "folding-convergence",
    "bk-sanity",
    "lemma-232",
    "lemma-233",
    "sublattice",
    "fkg-equivalence",
    "essentialize",
    "ulc-na",
];

/// Number of up-sets of `{0,1}^n`.
const DEDEKIND: [usize; 7] = [2, 3, 6, 20, 168, 7581, 7_828_354];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Largest `|Λ|` for exhaustive event scans.
    pub max_sites: usize,
    /// Largest number of up-sets per space in association scans.
    pub max_upsets: usize,
    /// Longest essential prefix drawn in convergence runs.
    pub max_branch_len: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_sites: DEFAULT_UPSET_CAP,
            max_upsets: DEDEKIND[DEFAULT_UPSET_CAP],
            max_branch_len: DEFAULT_BRANCH_CAP,
        }
    }
}

impl Caps {
    fn validate(&self) -> Result<()> {
        if self.max_sites == 0 || self.max_upsets == 0 || self.max_branch_len == 0 {
            return Err(Error::InvalidParams("caps must be positive".into()));
        }
        Ok(())
    }
}

/// Which instances of a suite to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Selection {
    #[default]
    All,
    /// Only the instance with this index.
    Instance(usize),
    /// The first `count` instances.
    First(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub caps: Caps,
    /// Worker threads; `0` uses the rayon default.
    pub jobs: usize,
    pub retry_budget: u64,
    pub selection: Selection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            caps: Caps::default(),
            jobs: 1,
            retry_budget: RETRY_BUDGET,
            selection: Selection::All,
        }
    }
}

impl RunConfig {
    /// Command line reproducing one instance under this configuration.
    pub fn reproduce(&self, suite: &str, instance: usize) -> String {
        let mut cmd = format!("fkgfold suite {suite} --seed {} --instance {instance}", self.seed);
        let d = Caps::default();
        if self.caps.max_sites != d.max_sites {
            cmd += &format!(" --cap-sites {}", self.caps.max_sites);
        }
        if self.caps.max_upsets != d.max_upsets {
            cmd += &format!(" --cap-upsets {}", self.caps.max_upsets);
        }
        if self.caps.max_branch_len != d.max_branch_len {
            cmd += &format!(" --cap-branch-len {}", self.caps.max_branch_len);
        }
        if self.retry_budget != RETRY_BUDGET {
            cmd += &format!(" --retry-budget {}", self.retry_budget);
        }
        cmd
    }
}

/// Result of one instance.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub reason: Option<String>,
    pub detail: Value,
}

impl Outcome {
    fn new(passed: bool, reason: impl FnOnce() -> String, detail: Value) -> Self {
        Self {
            passed,
            reason: (!passed).then(reason),
            detail,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub instances: usize,
    pub failed: usize,
    pub json: Value,
    /// Wall time per instance, in report order. Not part of `json`.
    pub timings: Vec<(usize, Duration)>,
}

impl SuiteReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line for humans, with total and slowest instance time.
    pub fn timing_summary(&self) -> String {
        let total: Duration = self.timings.iter().map(|t| t.1).sum();
        match self.timings.iter().max_by_key(|t| t.1) {
            Some((i, slow)) => format!(
                "{}: {} instances in {:.2?} (slowest: instance {i}, {:.2?})",
                self.suite, self.instances, total, slow
            ),
            None => format!("{}: no instances", self.suite),
        }
    }
}

type Job<'a> = Box<dyn Fn() -> Result<Outcome> + Send + Sync + 'a>;

/// Runs a suite. Instances run in parallel on `config.jobs` workers; the
/// report does not depend on the worker count.
pub fn run_suite(config: &RunConfig, suite: &str) -> Result<SuiteReport> {
    config.caps.validate()?;
    if !SUITES.contains(&suite) {
        return Err(Error::InvalidParams(format!(
            "unknown suite `{suite}` (expected one of {})",
            SUITES.join(", ")
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start {} workers: {e}", config.jobs)))?;
    pool.install(|| run_in_pool(config, suite))
}

fn run_in_pool(config: &RunConfig, suite: &str) -> Result<SuiteReport> {
    let jobs = build_jobs(config, suite)?;
    let selected: Vec<usize> = match config.selection {
        Selection::All => (0..jobs.len()).collect(),
        Selection::First(count) => (0..count.min(jobs.len())).collect(),
        Selection::Instance(i) => {
            if i >= jobs.len() {
                return Err(Error::InvalidParams(format!(
                    "suite `{suite}` has {} instances, no instance {i}",
                    jobs.len()
                )));
            }
            vec![i]
        }
    };
    let results: Vec<(usize, Outcome, Duration)> = selected
        .par_iter()
        .map(|&i| {
            let start = Instant::now();
            let outcome = jobs[i]().unwrap_or_else(|e| Outcome {
                passed: false,
                reason: Some(format!("error: {e}")),
                detail: json!({}),
            });
            (i, outcome, start.elapsed())
        })
        .collect();
    let mut instances = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, outcome, _) in &results {
        let mut record = json!({ "instance": i, "passed": outcome.passed });
        if let (Value::Object(rec), Value::Object(detail)) = (&mut record, &outcome.detail) {
            rec.extend(detail.clone());
        }
        instances.push(record);
        if !outcome.passed {
            failures.push(json!({
                "instance": i,
                "reason": outcome.reason.clone().unwrap_or_default(),
                "reproduce": config.reproduce(suite, *i),
            }));
        }
    }
    let failed = failures.len();
    let selection = match config.selection {
        Selection::All => json!("all"),
        Selection::First(count) => json!({ "first": count }),
        Selection::Instance(i) => json!({ "instance": i }),
    };
    let report = json!({
        "suite": suite,
        "seed": config.seed,
        "caps": {
            "max_sites": config.caps.max_sites,
            "max_upsets": config.caps.max_upsets,
            "max_branch_len": config.caps.max_branch_len,
        },
        "retry_budget": config.retry_budget,
        "selection": selection,
        "summary": {
            "total_instances": jobs.len(),
            "run": results.len(),
            "passed": results.len() - failed,
            "failed": failed,
        },
        "verdict": failed == 0,
        "failures": failures,
        "instances": instances,
    });
    Ok(SuiteReport {
        suite: suite.to_string(),
        passed: failed == 0,
        instances: results.len(),
        failed,
        json: report,
        timings: results.iter().map(|(i, _, t)| (*i, *t)).collect(),
    })
}

fn build_jobs<'a>(config: &'a RunConfig, suite: &str) -> Result<Vec<Job<'a>>> {
    Ok(match suite {
        "fkg-pa" => fkg_pa_jobs(config),
        "snfkg-na" => snfkg_na_jobs(config),
        "nfkg-na" => nfkg_na_jobs(config),
        "rcr-roundtrip" => rcr_roundtrip_jobs()?,
        "folding-convergence" => convergence_jobs(config)?,
        "bk-sanity" => bk_sanity_jobs(config)?,
        "lemma-232" => lemma_232_jobs()?,
        "lemma-233" => lemma_233_jobs(config),
        "sublattice" => sublattice_jobs(),
        "fkg-equivalence" => fkg_equivalence_jobs(config),
        "essentialize" => essentialize_jobs(config),
        "ulc-na" => ulc_na_jobs(config)?,
        _ => unreachable!("suite names are validated"),
    })
}

fn rq(r: &BigRational) -> Value {
    Value::String(format_ratio(r))
}

fn probs(p: &Measure) -> Value {
    Value::Array(p.probs().iter().map(rq).collect())
}

fn origin(g: &Generated) -> Value {
    serde_json::to_value(g.origin).expect("origin serializes")
}

fn report_json(r: &AssociationReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

fn check_upset_cap(config: &RunConfig, n: usize) -> Result<()> {
    let count = DEDEKIND.get(n).copied().unwrap_or(usize::MAX);
    if count > config.caps.max_upsets {
        return Err(Error::CapExceeded {
            what: "up-sets per space",
            got: count,
            cap: config.caps.max_upsets,
        });
    }
    Ok(())
}

fn rng_for(config: &RunConfig, i: usize) -> rand_chacha::ChaCha8Rng {
    instance_rng(config.seed, i as u64)
}

// FKG measures, 500 on three sites then 100 on four: PA and the constructive
// pipeline.
fn fkg_pa_jobs(config: &RunConfig) -> Vec<Job<'_>> {
    (0..600)
        .map(|i| -> Job<'_> {
            Box::new(move || {
                let n = if i < 500 { 3 } else { 4 };
                let g = random_fkg(&mut rng_for(config, i), n, config.retry_budget)?;
                check_upset_cap(config, n)?;
                let pa = is_pa_with_cap(&g.measure, config.caps.max_sites)?;
                let pipeline = fkg_theorem_pipeline(&g.measure)?;
                let failed_stage = pipeline.stages.iter().find(|s| !s.passed);
                let reason = || match failed_stage {
                    Some(s) => format!("stage {} failed: {}", s.name, s.failure.clone().unwrap_or_default()),
                    None => "PA fails".into(),
                };
                Ok(Outcome::new(
                    pa.verdict && pipeline.verdict,
                    reason,
                    json!({
                        "n": n,
                        "origin": origin(&g),
                        "probs": probs(&g.measure),
                        "pa": report_json(&pa),
                        "pipeline": serde_json::to_value(&pipeline).expect("pipeline serializes"),
                    }),
                ))
            })
        })
        .collect()
}

fn nfkg_instance(config: &RunConfig, i: usize) -> Result<(usize, Generated)> {
    let n = 2 + i % 2;
    Ok((n, random_nfkg(&mut rng_for(config, i), n, config.retry_budget)?))
}

// NFKG instances on two and three sites: NA, and the 1/8 perturbation is SNFKG.
fn nfkg_na_jobs(config: &RunConfig) -> Vec<Job<'_>> {
    (0..200)
        .map(|i| -> Job<'_> {
            Box::new(move || {
                let (n, g) = nfkg_instance(config, i)?;
                check_upset_cap(config, n)?;
                let nfkg = is_nfkg(&g.measure)?;
                let na = is_na_with_cap(&g.measure, config.caps.max_sites)?;
                let snfkg = is_snfkg(&perturb(&g.measure, &ratio(1, 8))?)?;
                Ok(Outcome::new(
                    nfkg.verdict && na.verdict && snfkg.verdict,
                    || {
                        if !nfkg.verdict {
                            "generator produced a measure that is not NFKG".into()
                        } else if !na.verdict {
                            format!("NA fails: {:?}", na.witness)
                        } else {
                            format!("perturbation is not SNFKG: {:?}", snfkg.witness)
                        }
                    },
                    json!({
                        "n": n,
                        "origin": origin(&g),
                        "probs": probs(&g.measure),
                        "nfkg": nfkg.verdict,
                        "na": report_json(&na),
                        "perturbed_snfkg": report_json(&snfkg),
                    }),
                ))
            })
        })
        .collect()
}

// Perturbed NFKG instances: the pairing-limit pipeline ending in NA.
fn snfkg_na_jobs(config: &RunConfig) -> Vec<Job<'_>> {
    (0..200)
        .map(|i| -> Job<'_> {
            Box::new(move || {
                let (n, g) = nfkg_instance(config, i)?;
                check_upset_cap(config, n)?;
                let q = perturb(&g.measure, &ratio(1, 8))?;
                let pipeline = snfkg_limit_rcr(&q)?;
                let failed_stage = pipeline.stages.iter().find(|s| !s.passed);
                Ok(Outcome::new(
                    pipeline.verdict,
                    || match failed_stage {
                        Some(s) => format!("stage {} failed: {}", s.name, s.failure.clone().unwrap_or_default()),
                        None => "pipeline failed".into(),
                    },
                    json!({
                        "n": n,
                        "origin": origin(&g),
                        "probs": probs(&q),
                        "pipeline": serde_json::to_value(&pipeline).expect("pipeline serializes"),
                    }),
                ))
            })
        })
        .collect()
}

/// Every connected labeled graph on at most `max_n` vertices with every
/// assignment of edge weights from `weights`, in a fixed order.
pub fn connected_ising_cases(max_n: usize, weights: &[BigRational]) -> Vec<IsingSpec> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        for mask in 0u32..1 << all.len() {
            let edges: Vec<(usize, usize)> = (0..all.len()).filter(|&e| mask >> e & 1 == 1).map(|e| all[e]).collect();
            if !connected(n, &edges) {
                continue;
            }
            let combos = weights.len().pow(edges.len() as u32);
            for c in 0..combos {
                let mut code = c;
                let weighted = edges
                    .iter()
                    .map(|&(u, v)| {
                        let x = weights[code % weights.len()].clone();
                        code /= weights.len();
                        (u, v, x)
                    })
                    .collect();
                out.push(IsingSpec::numbered(n, weighted).expect("generated graphs are simple"));
            }
        }
    }
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = 1u32;
    loop {
        let next = edges.iter().fold(seen, |s, &(u, v)| {
            if s >> u & 1 == 1 || s >> v & 1 == 1 {
                s | 1 << u | 1 << v
            } else {
                s
            }
        });
        if next == seen {
            return seen.count_ones() as usize == n;
        }
        seen = next;
    }
}

fn ising_weights() -> Vec<BigRational> {
    vec![ratio(2, 1), ratio(3, 1), ratio(5, 2)]
}

fn spec_json(spec: &IsingSpec) -> Value {
    serde_json::to_value(spec.to_json()).expect("spec serializes")
}

// Connected graphs on up to four vertices with x_e in {2, 3, 5/2}.
fn rcr_roundtrip_jobs() -> Result<Vec<Job<'static>>> {
    Ok(connected_ising_cases(4, &ising_weights())
        .into_iter()
        .map(|spec| -> Job<'static> {
            Box::new(move || {
                let model = ising_build(&spec)?;
                let exact = verify_rcr(&model.measure, &model.base, &BigRational::zero())?;
                let marginal = fk_marginal(&model.base) == eta_marginal(&model.base);
                let folded = fold(&model.measure, &FoldSpec::inessential())?;
                let doubled = ising_measure(&spec.doubled())?;
                let fold_ok = folded == doubled;
                Ok(Outcome::new(
                    exact.ok && marginal && fold_ok,
                    || {
                        if !exact.ok {
                            format!("RCR deviates by {}", format_ratio(&exact.max_dev))
                        } else if !marginal {
                            "FK weights differ from the bond marginal".into()
                        } else {
                            "inessential fold differs from the doubled model".into()
                        }
                    },
                    json!({
                        "model": spec_json(&spec),
                        "rcr_max_dev": rq(&exact.max_dev),
                        "fk_marginal": marginal,
                        "fold_doubles_coupling": fold_ok,
                    }),
                ))
            })
        })
        .collect())
}

// The fixed two-site Ising instance, then 100 random measures on one to three
// sites with a random essential prefix each.
fn convergence_jobs(config: &RunConfig) -> Result<Vec<Job<'_>>> {
    let edge = IsingSpec::numbered(2, vec![(0, 1, ratio(2, 1))])?;
    Ok((0..101)
        .map(|i| -> Job<'_> {
            let edge = edge.clone();
            Box::new(move || {
                let (p, prefix) = if i == 0 {
                    let p = ising_measure(&edge)?;
                    (p, FoldPath::new(vec![FoldSpec::inessential()])?)
                } else {
                    let mut rng = rng_for(config, i);
                    let n = 1 + (i - 1) % 3;
                    let p = random_measure(&mut rng, n)?.measure;
                    let branches = essential_branches(&p, config.caps.max_branch_len, DEFAULT_BRANCH_CAP)?;
                    if branches.is_empty() {
                        return Err(Error::InvalidParams("no defined essential prefix".into()));
                    }
                    let pick = rng.random_range(0..branches.len());
                    (p, branches[pick].path.clone())
                };
                let limit = crate::folding::branch_limit(&p, &prefix)?;
                let l = limit.essential_len;
                let mut steps = Vec::new();
                let mut all_ok = true;
                let mut last = None;
                for step in l + 1..=l + 6 {
                    let c = check_convergence_against(&limit, step)?;
                    all_ok &= c.ok;
                    steps.push(json!({ "i": step, "distance": rq(&c.distance), "bound": rq(&c.bound), "ok": c.ok }));
                    last = Some(c.distance);
                }
                let small_ratio = limit.ratio <= ratio(1, 2);
                let tiny = BigRational::new(1.into(), 1_000_000_000u64.into());
                let numeric_ok = !small_ratio || last.is_some_and(|d| d < tiny);
                Ok(Outcome::new(
                    all_ok && numeric_ok,
                    || {
                        if all_ok {
                            "distance at i = L+6 is not below 1e-9".into()
                        } else {
                            "distance exceeds the bound".into()
                        }
                    },
                    json!({
                        "n": p.space().len(),
                        "probs": probs(&p),
                        "prefix": prefix.to_json(),
                        "ratio": rq(&limit.ratio),
                        "steps": steps,
                        "small_ratio_check": if small_ratio { json!(numeric_ok) } else { Value::Null },
                    }),
                ))
            })
        })
        .collect())
}

// Product measures on three sites against every pair of events.
fn bk_sanity_jobs(config: &RunConfig) -> Result<Vec<Job<'_>>> {
    let space = SiteSpace::binary(3);
    let table = std::sync::Arc::new(full_box_table(&space)?);
    Ok((0..8)
        .map(|i| -> Job<'_> {
            let table = table.clone();
            let space = space.clone();
            Box::new(move || {
                // site marginals a_j / (a_j + b_j); instance 0 is uniform
                let mut rng = rng_for(config, i);
                let marg: Vec<(u64, u64)> = (0..3)
                    .map(|_| if i == 0 { (1, 1) } else { (rng.random_range(1..=8), rng.random_range(1..=8)) })
                    .collect();
                let w: Vec<u64> = (0..8usize)
                    .map(|idx| {
                        let v = space.values_of(idx);
                        (0..3).map(|p| if v[p] == 1 { marg[p].0 } else { marg[p].1 }).product()
                    })
                    .collect();
                let p = Measure::from_u64(space.clone(), &w)?;
                let total: u128 = w.iter().map(|&x| x as u128).sum();
                let mass = |mask: u64| -> u128 { (0..8).filter(|j| mask >> j & 1 == 1).map(|j| w[j] as u128).sum() };
                let masses: Vec<u128> = (0..256u64).map(mass).collect();
                let mut violation = None;
                let mut min_slack: Option<(BigRational, u64, u64)> = None;
                'outer: for a in 0..256u64 {
                    for b in 0..256u64 {
                        let boxed = table[(a * 256 + b) as usize];
                        // P(A□B) ≤ P(A)P(B) scaled by total²
                        let lhs = masses[boxed as usize] * total;
                        let rhs = masses[a as usize] * masses[b as usize];
                        if lhs > rhs {
                            violation = Some((a, b, lhs, rhs));
                            break 'outer;
                        }
                        let slack = rhs - lhs;
                        if slack > 0 && (a & b) != 0 {
                            let s = BigRational::new(BigUint::from(slack).into(), BigUint::from(total * total).into());
                            if min_slack.as_ref().is_none_or(|m| s < m.0) {
                                min_slack = Some((s, a, b));
                            }
                        }
                    }
                }
                let hex = |m: u64| Event::from_mask(&space, m).to_hex();
                let t2 = BigUint::from(total * total);
                let frac = |x: u128| rq(&BigRational::new(BigUint::from(x).into(), t2.clone().into()));
                let detail = json!({
                    "probs": probs(&p),
                    "pairs": 65536,
                    "violation": violation.map(|(a, b, l, r)| json!({ "a": hex(a), "b": hex(b), "lhs": frac(l), "rhs": frac(r) })),
                    "min_positive_slack": min_slack.map(|(s, a, b)| json!({ "a": hex(a), "b": hex(b), "slack": rq(&s) })),
                });
                Ok(Outcome::new(violation.is_none(), || "P(A□B) > P(A)P(B)".into(), detail))
            })
        })
        .collect())
}

// Every connected three-vertex Ising model with x_e in {2, 3, 5/2}: all
// increasing A against all decreasing B under the increasing/decreasing rule.
fn lemma_232_jobs() -> Result<Vec<Job<'static>>> {
    let cases: Vec<IsingSpec> = connected_ising_cases(3, &ising_weights())
        .into_iter()
        .filter(|s| s.vertices.len() == 3)
        .collect();
    Ok(cases
        .into_iter()
        .map(|spec| -> Job<'static> {
            Box::new(move || {
                let model = ising_build(&spec)?;
                let space = model.measure.space().clone();
                let ups: Vec<Event> = upset_masks(3, 3)?.into_iter().map(|m| Event::from_mask(&space, m)).collect();
                let mut checked = 0u64;
                let mut failure = None;
                for a in &ups {
                    for up in &ups {
                        let b = up.complement();
                        let r = check_lemma_232(
                            &model.measure,
                            &model.base,
                            &SelectionRule::IncreasingDecreasing,
                            a,
                            &b,
                            &BigRational::zero(),
                        )?;
                        checked += 1;
                        if !r.ok && failure.is_none() {
                            failure = Some(json!({ "a": a.to_hex(), "b": b.to_hex(), "lhs": rq(&r.lhs), "rhs": rq(&r.rhs) }));
                        }
                    }
                }
                Ok(Outcome::new(
                    failure.is_none(),
                    || "P(A □ B) > P(A ∩ B̄)".into(),
                    json!({ "model": spec_json(&spec), "pairs": checked, "violation": failure }),
                ))
            })
        })
        .collect())
}

// Random FKG measures on two and three sites, all up-set pairs under the full
// and increasing-only rules: hypothesis at every folding implies the conclusion.
fn lemma_233_jobs(config: &RunConfig) -> Vec<Job<'_>> {
    (0..20)
        .map(|i| -> Job<'_> {
            Box::new(move || {
                let n = 2 + i % 2;
                let g = random_fkg(&mut rng_for(config, i), n, config.retry_budget)?;
                let space = g.measure.space().clone();
                let ups: Vec<Event> = upset_masks(n, n)?.into_iter().map(|m| Event::from_mask(&space, m)).collect();
                let mut rules = Vec::new();
                let mut violation = None;
                for rule in [SelectionRule::Full, SelectionRule::IncreasingOnly] {
                    let (mut pairs, mut hyp, mut concl) = (0u64, 0u64, 0u64);
                    for a in &ups {
                        for b in &ups {
                            let r = check_lemma_233(&g.measure, &rule, a, b, &BigRational::zero())?;
                            pairs += 1;
                            hyp += r.hypothesis_ok as u64;
                            concl += r.conclusion_ok as u64;
                            if r.hypothesis_ok && !r.conclusion_ok && violation.is_none() {
                                violation = Some(json!({
                                    "rule": rule.name(), "a": a.to_hex(), "b": b.to_hex(),
                                    "lhs": rq(&r.lhs), "rhs": rq(&r.rhs),
                                }));
                            }
                        }
                    }
                    rules.push(json!({ "rule": rule.name(), "pairs": pairs, "hypothesis_holds": hyp, "conclusion_holds": concl }));
                }
                Ok(Outcome::new(
                    violation.is_none(),
                    || "hypothesis holds at every folding but the conclusion fails".into(),
                    json!({ "n": n, "origin": origin(&g), "probs": probs(&g.measure), "rules": rules, "violation": violation }),
                ))
            })
        })
        .collect()
}

// Subsets of {0,1}^m for m ≤ 4; m = 4 is split into 16 chunks.
fn sublattice_jobs() -> Vec<Job<'static>> {
    let mut chunks: Vec<(usize, u64, u64)> = (0..4).map(|m| (m, 0, 1u64 << (1 << m))).collect();
    let step = (1u64 << 16) / 16;
    chunks.extend((0..16).map(|c| (4, c * step, (c + 1) * step)));
    chunks
        .into_iter()
        .map(|(m, lo, hi)| -> Job<'static> {
            Box::new(move || {
                let space = SiteSpace::binary(m);
                let (mut sublattices, mut symmetric_separating, mut exceptions) = (0u64, 0u64, Vec::new());
                for mask in lo..hi {
                    let l = Event::from_mask(&space, mask);
                    let f = check_sublattice(&l)?;
                    sublattices += f.sublattice as u64;
                    if f.sublattice && f.symmetric && f.separates_points {
                        symmetric_separating += 1;
                    }
                    if !f.conclusion_holds() {
                        exceptions.push(l.to_hex());
                    }
                }
                Ok(Outcome::new(
                    exceptions.is_empty(),
                    || format!("symmetric separating sublattices short of the cube: {}", exceptions.join(", ")),
                    json!({
                        "m": m,
                        "subsets": { "from": lo, "to": hi },
                        "sublattices": sublattices,
                        "symmetric_separating": symmetric_separating,
                        "exceptions": exceptions.len(),
                    }),
                ))
            })
        })
        .collect()
}

// The lattice condition against its folding characterization.
fn fkg_equivalence_jobs(config: &RunConfig) -> Vec<Job<'_>> {
    (0..2000)
        .map(|i| -> Job<'_> {
            Box::new(move || {
                let n = 1 + i % 3;
                let p = random_measure(&mut rng_for(config, i), n)?.measure;
                let direct = is_fkg(&p)?;
                let folded = is_fkg_via_foldings(&p)?;
                Ok(Outcome::new(
                    direct.verdict == folded.verdict,
                    || "verdicts differ".into(),
                    json!({ "n": n, "probs": probs(&p), "fkg": direct.verdict, "via_foldings": folded.verdict }),
                ))
            })
        })
        .collect()
}

fn random_path<R: Rng>(rng: &mut R, space: &SiteSpace, len: usize) -> Result<FoldPath> {
    let mut current = space.clone();
    let mut steps = Vec::with_capacity(len);
    for _ in 0..len {
        let mask = (0..current.len()).fold(0u64, |m, pos| if rng.random_bool(0.5) { m | 1 << pos } else { m });
        let alpha: Vec<usize> = (0..mask.count_ones()).map(|_| rng.random_range(0..2)).collect();
        let spec = FoldSpec::on_positions(&current, mask, alpha)?;
        current = spec.output_space(&current)?;
        steps.push(spec);
    }
    FoldPath::new(steps)
}

// Random fold paths of length four on three sites, before and after moving
// the folds with empty K to the end.
fn essentialize_jobs(config: &RunConfig) -> Vec<Job<'_>> {
    (0..200)
        .map(|i| -> Job<'_> {
            Box::new(move || {
                let mut rng = rng_for(config, i);
                let p = random_measure(&mut rng, 3)?.measure;
                let path = random_path(&mut rng, p.space(), 4)?;
                let reordered = essentialize(&path);
                let a = fold_path(&p, &path);
                let b = fold_path(&p, &reordered);
                let same = match (&a, &b) {
                    (Ok(x), Ok(y)) => x == y,
                    (Err(Error::FoldingUndefined), Err(Error::FoldingUndefined)) => true,
                    _ => false,
                };
                Ok(Outcome::new(
                    same,
                    || "reordered path folds to a different measure".into(),
                    json!({
                        "probs": probs(&p),
                        "path": path.to_json(),
                        "essentialized": reordered.to_json(),
                        "result": match &a { Ok(m) => probs(m), Err(_) => Value::Null },
                    }),
                ))
            })
        })
        .collect()
}

/// Level vectors in `{1..=4}^{n+1}` satisfying ULC, in lexicographic order.
pub fn ulc_level_vectors(n: usize) -> Vec<Vec<u64>> {
    let len = n + 1;
    (0..4usize.pow(len as u32))
        .map(|code| (0..len).map(|k| (code / 4usize.pow((len - 1 - k) as u32) % 4) as u64 + 1).collect::<Vec<u64>>())
        .filter(|v| v.windows(3).all(|w| w[0] * w[2] <= w[1] * w[1]))
        .collect()
}

// Exchangeable ULC measures on three to five sites.
fn ulc_na_jobs(config: &RunConfig) -> Result<Vec<Job<'_>>> {
    let mut cases = Vec::new();
    for n in 3..=5 {
        cases.extend(ulc_level_vectors(n).into_iter().map(|v| (n, v)));
    }
    Ok(cases
        .into_iter()
        .map(|(n, v)| -> Job<'_> {
            Box::new(move || {
                check_upset_cap(config, n)?;
                let levels = ExchangeableLevels::from_u64(n, &v)?;
                let ulc = is_ulc(&levels);
                let p = exchangeable_from_levels(&levels)?;
                let na = is_na_with_cap(&p, config.caps.max_sites)?;
                Ok(Outcome::new(
                    ulc && na.verdict,
                    || format!("NA fails: {:?}", na.witness),
                    json!({ "n": n, "levels": v, "ulc": ulc, "na": report_json(&na) }),
                ))
            })
        })
        .collect())
}

/// Number of instances in each suite under `config`.
pub fn instance_count(config: &RunConfig, suite: &str) -> Result<usize> {
    if !SUITES.contains(&suite) {
        return Err(Error::InvalidParams(format!("unknown suite `{suite}`")));
    }
    Ok(build_jobs(config, suite)?.len())
}
