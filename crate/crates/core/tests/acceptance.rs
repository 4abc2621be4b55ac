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

//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::HashMap;
use std::process::ExitCode;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

use fkgfold::rational::parse_ratio;
use fkgfold::suite::{connected_ising_cases, run_suite, RunConfig, SuiteReport};

const SEED: u64 = 7;

fn q(v: &Value) -> BigRational {
    parse_ratio(v.as_str().expect("rational string")).expect("rational")
}

fn probs(inst: &Value) -> Vec<BigRational> {
    inst["probs"].as_array().expect("probs").iter().map(q).collect()
}

fn instances(r: &SuiteReport) -> &Vec<Value> {
    r.json["instances"].as_array().expect("instances")
}

fn all_passed(r: &SuiteReport) -> bool {
    r.passed && instances(r).iter().all(|i| i["passed"] == true)
}

// Oracles below work on index bits directly: bit b of a configuration index
// is one site, and the coordinatewise order is bitwise inclusion.

fn upsets_brute(n: usize) -> Vec<u64> {
    let size = 1usize << n;
    (0u64..1 << size)
        .filter(|&s| {
            (0..size).all(|w| s >> w & 1 == 0 || (0..size).all(|v| v & w != w || s >> v & 1 == 1))
        })
        .collect()
}

fn mass(p: &[BigRational], set: u64) -> BigRational {
    (0..p.len()).filter(|&i| set >> i & 1 == 1).map(|i| p[i].clone()).sum()
}

fn pa_oracle(p: &[BigRational], ups: &[u64]) -> bool {
    ups.iter()
        .all(|&a| ups.iter().all(|&b| mass(p, a & b) >= mass(p, a) * mass(p, b)))
}

fn lattice_oracle(p: &[BigRational]) -> bool {
    (0..p.len()).all(|i| (0..p.len()).all(|j| &p[i | j] * &p[i & j] >= &p[i] * &p[j]))
}

/// Events depending only on the sites in `sites` that are increasing.
fn lifted_upsets(n: usize, sites: u64, all: &[u64]) -> Vec<u64> {
    let size = 1usize << n;
    all.iter()
        .copied()
        .filter(|&e| (0..size).all(|w| (e >> w & 1) == (e >> (w & sites as usize) & 1)))
        .collect()
}

/// Disjoint site sets, increasing events on each: `P(A ∩ B) ≤ P(A) P(B)`.
fn na_oracle(n: usize, p: &[BigRational]) -> bool {
    let all = upsets_brute(n);
    let full = (1u64 << n) - 1;
    (1..=full).all(|s| {
        let left = lifted_upsets(n, s, &all);
        let rest = full & !s;
        (1..=rest).filter(|t| t & !rest == 0).all(|t| {
            let right = lifted_upsets(n, t, &all);
            left.iter()
                .all(|&a| right.iter().all(|&b| mass(p, a & b) <= mass(p, a) * mass(p, b)))
        })
    })
}

/// `Σ_ω ∏_e x_e^{[ω_u = ω_v]} = Σ_η ∏_{e ∈ η} (x_e − 1) · 2^{components(η)}`.
fn fk_identity(n: usize, edges: &[(usize, usize, BigRational)]) -> bool {
    let spins: BigRational = (0..1usize << n)
        .map(|w| {
            edges
                .iter()
                .filter(|(u, v, _)| (w >> u & 1) == (w >> v & 1))
                .fold(BigRational::one(), |acc, (_, _, x)| acc * x)
        })
        .sum();
    let clusters: BigRational = (0..1usize << edges.len())
        .map(|eta| {
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(parent: &mut [usize], x: usize) -> usize {
                if parent[x] != x {
                    let r = find(parent, parent[x]);
                    parent[x] = r;
                }
                parent[x]
            }
            let mut weight = BigRational::one();
            for (e, (u, v, x)) in edges.iter().enumerate() {
                if eta >> e & 1 == 1 {
                    weight *= x - BigRational::one();
                    let (a, b) = (find(&mut parent, *u), find(&mut parent, *v));
                    parent[a] = b;
                }
            }
            let comps = (0..n).filter(|&i| find(&mut parent, i) == i).count();
            weight * BigRational::from_integer((1u64 << comps).into())
        })
        .sum();
    spins == clusters
}

struct Tally {
    failed: usize,
}

impl Tally {
    fn line(&mut self, id: usize, ok: bool, what: &str) {
        println!("criterion {id:>2}: {}  {what}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }
}

fn main() -> ExitCode {
    let base = RunConfig {
        seed: SEED,
        jobs: 1,
        ..RunConfig::default()
    };
    let mut reports: HashMap<&str, SuiteReport> = HashMap::new();
    let used = [
        "fkg-pa",
        "fkg-equivalence",
        "essentialize",
        "folding-convergence",
        "rcr-roundtrip",
        "sublattice",
        "nfkg-na",
        "snfkg-na",
        "ulc-na",
        "bk-sanity",
        "lemma-232",
    ];
    for name in used {
        let r = run_suite(&base, name).unwrap_or_else(|e| panic!("suite {name}: {e}"));
        eprintln!("{}", r.timing_summary());
        for f in r.json["failures"].as_array().into_iter().flatten() {
            eprintln!("  {name} failure: {f}");
        }
        reports.insert(name, r);
    }
    let mut t = Tally { failed: 0 };

    // 1
    let fkg = &reports["fkg-pa"];
    let insts = instances(fkg);
    let n3 = insts.iter().filter(|i| i["n"] == 3).count();
    let n4 = insts.iter().filter(|i| i["n"] == 4).count();
    let pa_all = insts.iter().all(|i| i["pa"]["verdict"] == true);
    let pairs_ok = insts.iter().all(|i| {
        let expect = if i["n"] == 3 { 400 } else { 28_224 };
        i["pa"]["checked"]["pairs"] == expect
    });
    let ups3 = upsets_brute(3);
    let oracle_ok = insts
        .iter()
        .filter(|i| i["n"] == 3)
        .all(|i| pa_oracle(&probs(i), &ups3) && lattice_oracle(&probs(i)));
    t.line(
        1,
        n3 == 500 && n4 == 100 && pa_all && pairs_ok && oracle_ok,
        &format!("FKG measures are PA ({n3} on 3 sites, {n4} on 4 sites, exhaustive up-set pairs, cross-checked)"),
    );

    // 2
    let stages_ok = insts.iter().all(|i| {
        i["pipeline"]["verdict"] == true
            && i["pipeline"]["stages"]
                .as_array()
                .is_some_and(|s| s.len() == 5 && s.iter().all(|st| st["passed"] == true))
    });
    t.line(
        2,
        stages_ok,
        "branch limits are symmetric uniform FKG with exact symmetric ferromagnetic pairwise RCRs",
    );

    // 3
    let eq = &reports["fkg-equivalence"];
    let eq_oracle = instances(eq)
        .iter()
        .all(|i| i["fkg"] == lattice_oracle(&probs(i)));
    t.line(
        3,
        all_passed(eq) && instances(eq).len() == 2000 && eq_oracle,
        "lattice condition agrees with the folding characterization on 2000 measures",
    );

    // 4
    let es = &reports["essentialize"];
    t.line(
        4,
        all_passed(es) && instances(es).len() == 200,
        "moving empty-K folds to the end preserves fold_path on 200 random paths",
    );

    // 5
    let fc = &reports["folding-convergence"];
    let steps_ok = instances(fc).iter().all(|i| {
        let steps = i["steps"].as_array().expect("steps");
        steps.len() == 6 && steps.iter().all(|s| q(&s["distance"]) <= q(&s["bound"]))
    });
    let tiny = BigRational::new(1.into(), 1_000_000_000u64.into());
    let small_ok = instances(fc).iter().all(|i| {
        q(&i["ratio"]) > BigRational::new(1.into(), 2.into()) || q(&i["steps"][5]["distance"]) < tiny
    });
    t.line(
        5,
        all_passed(fc) && instances(fc).len() == 101 && steps_ok && small_ok,
        "iterates stay within |Ω|·a^(2^(i-L)) of the branch limit for i = L+1..L+6",
    );

    // 6
    let rr = &reports["rcr-roundtrip"];
    let cases = connected_ising_cases(4, &[parse_ratio("2").unwrap(), parse_ratio("3").unwrap(), parse_ratio("5/2").unwrap()]);
    let identity_ok = cases.iter().all(|s| fk_identity(s.vertices.len(), &s.edges));
    let rr_ok = all_passed(rr)
        && instances(rr).len() == cases.len()
        && instances(rr).iter().all(|i| {
            q(&i["rcr_max_dev"]).is_zero() && i["fk_marginal"] == true && i["fold_doubles_coupling"] == true
        });
    t.line(
        6,
        rr_ok && identity_ok,
        &format!("Ising FK round trip on {} weighted connected graphs with at most 4 vertices", cases.len()),
    );

    // 7
    let sl = &reports["sublattice"];
    let scanned: u64 = instances(sl)
        .iter()
        .map(|i| i["subsets"]["to"].as_u64().unwrap() - i["subsets"]["from"].as_u64().unwrap())
        .sum();
    let exceptions: u64 = instances(sl).iter().map(|i| i["exceptions"].as_u64().unwrap()).sum();
    t.line(
        7,
        all_passed(sl) && scanned == 2 + 4 + 16 + 256 + 65_536 && exceptions == 0,
        &format!("every symmetric point-separating sublattice is the full cube ({scanned} subsets, m <= 4)"),
    );

    // 8
    let nf = &reports["nfkg-na"];
    let sn = &reports["snfkg-na"];
    let nf_oracle = instances(nf)
        .iter()
        .filter(|i| i["n"] == 2)
        .all(|i| na_oracle(2, &probs(i)));
    t.line(
        8,
        all_passed(nf)
            && all_passed(sn)
            && instances(nf).len() == 200
            && instances(nf).iter().all(|i| i["na"]["verdict"] == true && i["perturbed_snfkg"]["verdict"] == true)
            && nf_oracle,
        "NFKG measures are NA and their 1/8 perturbations are SNFKG (200 instances)",
    );

    // 9
    let ul = &reports["ulc-na"];
    let ul_oracle = instances(ul).iter().filter(|i| i["n"] == 3).all(|i| {
        let levels: Vec<u64> = i["levels"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        let w: Vec<BigRational> = (0..8usize)
            .map(|x| BigRational::from_integer(levels[x.count_ones() as usize].into()))
            .collect();
        let z: BigRational = w.iter().sum();
        let p: Vec<BigRational> = w.iter().map(|x| x / &z).collect();
        na_oracle(3, &p)
    });
    t.line(
        9,
        all_passed(ul) && ul_oracle,
        &format!("exchangeable ULC measures with levels in 1..4 are NA ({} vectors, n = 3, 4, 5)", instances(ul).len()),
    );

    // 10
    let bk = &reports["bk-sanity"];
    let l232 = &reports["lemma-232"];
    let bk_pairs = instances(bk).iter().all(|i| i["pairs"] == 65_536);
    let l232_pairs = instances(l232).iter().all(|i| i["pairs"] == 400);
    t.line(
        10,
        all_passed(bk) && bk_pairs && all_passed(l232) && l232_pairs,
        "P(A□B) <= P(A)P(B) for all event pairs on 3-site products; cluster bound on 3-site Ising",
    );

    // 11
    let mut identical = true;
    for name in used {
        for jobs in [4, 8] {
            let config = RunConfig { jobs, ..base.clone() };
            let again = run_suite(&config, name).unwrap_or_else(|e| panic!("suite {name}: {e}"));
            if again.to_json_string() != reports[name].to_json_string() {
                eprintln!("  {name}: report differs with {jobs} workers");
                identical = false;
            }
        }
    }
    t.line(11, identical, "suite reports are byte-identical with 1, 4 and 8 workers");

    if t.failed == 0 {
        println!("acceptance: all 11 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria fail", t.failed);
        ExitCode::FAILURE
    }
}
