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

//! Positive and negative association checks by exhaustive enumeration, the
//! FKG family of lattice conditions, and the staged pipelines that rebuild
//! the association results from branch limits of the folding tree.

use std::collections::HashMap;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::{upset_masks, Event, DEFAULT_UPSET_CAP};
use crate::folding::{all_foldings, essential_branches, fold, FoldSpec, DEFAULT_BRANCH_CAP};
use crate::measure::Measure;
use crate::rational::{pow, uint_ratio};
use crate::rcr::{construct_uniform_symmetric_rcr, complete_pairing_base, induced_measure, predicates, verify_rcr};
use crate::space::SiteSpace;

/// A violation found by a check. The meaning of `a` and `b` depends on the
/// check: configurations for lattice conditions, a folding and a
/// configuration for folding conditions, events for association.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub a: String,
    pub b: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(with = "crate::rational::serde_ratio")]
    pub lhs: BigRational,
    #[serde(with = "crate::rational::serde_ratio")]
    pub rhs: BigRational,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QuantifierLog {
    pub pairs: u64,
    pub foldings: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssociationReport {
    pub check: &'static str,
    pub verdict: bool,
    pub witness: Option<Witness>,
    pub checked: QuantifierLog,
}

impl AssociationReport {
    fn new(check: &'static str, witness: Option<Witness>, checked: QuantifierLog) -> Self {
        Self {
            check,
            verdict: witness.is_none(),
            witness,
            checked,
        }
    }
}

fn require_binary(p: &Measure) -> Result<()> {
    if !p.space().is_binary() {
        return Err(Error::NonBinaryAlphabet(
            "association checks need two-symbol alphabets".into(),
        ));
    }
    Ok(())
}

/// Arithmetic shared by the `u128` fast path and the `BigUint` fallback.
trait Mass: Clone + Ord + Zero + Add<Output = Self> + Mul<Output = Self> + Into<BigUint> + Send + Sync {}
impl<T: Clone + Ord + Zero + Add<Output = T> + Mul<Output = T> + Into<BigUint> + Send + Sync> Mass for T {}

fn mask_mass<T: Mass>(masses: &[T], mut mask: u64) -> T {
    let mut sum = T::zero();
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        sum = sum + masses[i].clone();
        mask &= mask - 1;
    }
    sum
}

fn prob(mass: impl Into<BigUint>, total: &BigUint) -> BigRational {
    uint_ratio(&mass.into(), total)
}

fn prob2(mass: impl Into<BigUint>, total: &BigUint) -> BigRational {
    uint_ratio(&mass.into(), &(total * total))
}

fn config_label(space: &SiteSpace, index: usize) -> String {
    space.config(index).to_string()
}

/// `{c1,c2,...}` listing the members of an event.
pub fn event_label(e: &Event) -> String {
    let members: Vec<String> = e.configs().iter().map(|c| c.to_string()).collect();
    format!("{{{}}}", members.join(","))
}

fn positions_label(space: &SiteSpace, mask: u64) -> String {
    let names: Vec<&str> = (0..space.len())
        .filter(|p| mask >> p & 1 == 1)
        .map(|p| space.sites()[p].name.as_str())
        .collect();
    format!("{{{}}}", names.join(","))
}

/// `P(ω ∨ ω′) P(ω ∧ ω′) ≥ P(ω) P(ω′)` for all pairs.
pub fn is_fkg(p: &Measure) -> Result<AssociationReport> {
    require_binary(p)?;
    let size = p.len();
    let pairs = (size * size.saturating_sub(1) / 2) as u64;
    let found = match p.small_masses() {
        Some(m) => fkg_scan(&m, size).map(|(i, j, a, b)| (i, j, a.into(), b.into())),
        None => fkg_scan(p.masses(), size),
    };
    let witness = found.map(|(i, j, lhs, rhs)| Witness {
        a: config_label(p.space(), i),
        b: config_label(p.space(), j),
        detail: None,
        lhs: prob2(lhs, p.total()),
        rhs: prob2(rhs, p.total()),
    });
    Ok(AssociationReport::new("fkg", witness, QuantifierLog { pairs, foldings: 0 }))
}

fn fkg_scan<T: Mass>(m: &[T], size: usize) -> Option<(usize, usize, T, T)> {
    for i in 0..size {
        for j in i + 1..size {
            if i & j == i || i & j == j {
                continue;
            }
            let lhs = m[i | j].clone() * m[i & j].clone();
            let rhs = m[i].clone() * m[j].clone();
            if lhs < rhs {
                return Some((i, j, lhs, rhs));
            }
        }
    }
    None
}

/// Every defined folding has its maximum at the all-ones configuration.
pub fn is_fkg_via_foldings(p: &Measure) -> Result<AssociationReport> {
    require_binary(p)?;
    let mut log = QuantifierLog::default();
    for spec in all_foldings(p.space())? {
        let f = match fold(p, &spec) {
            Ok(f) => f,
            Err(Error::FoldingUndefined) => continue,
            Err(e) => return Err(e),
        };
        log.foldings += 1;
        let top = f.len() - 1;
        log.pairs += f.len() as u64;
        if let Some(w) = (0..f.len()).find(|&w| f.mass(w) > f.mass(top)) {
            let witness = Witness {
                a: fold_label(&spec),
                b: config_label(f.space(), w),
                detail: Some(format!("maximal configuration {}", config_label(f.space(), top))),
                lhs: f.prob(top),
                rhs: f.prob(w),
            };
            return Ok(AssociationReport::new("fkg-foldings", Some(witness), log));
        }
    }
    Ok(AssociationReport::new("fkg-foldings", None, log))
}

fn fold_label(spec: &FoldSpec) -> String {
    serde_json::to_string(&spec.to_json()).expect("fold step serializes")
}

/// `P(A ∩ B) ≥ P(A) P(B)` for all increasing `A`, `B`.
pub fn is_pa(p: &Measure) -> Result<AssociationReport> {
    is_pa_with_cap(p, DEFAULT_UPSET_CAP)
}

pub fn is_pa_with_cap(p: &Measure, cap: usize) -> Result<AssociationReport> {
    require_binary(p)?;
    let n = p.space().len();
    let ups = upset_masks(n, cap)?;
    let count = ups.len() as u64;
    let found = match p.small_masses() {
        Some(m) => pa_scan(&m, p.total().to_u128(), &ups).map(|(i, j, ab, a, b)| (i, j, ab.into(), a.into(), b.into())),
        None => pa_scan(p.masses(), Some(p.total().clone()), &ups),
    };
    let witness = found.map(|(i, j, ab, a, b)| {
        let ea = Event::from_mask(p.space(), ups[i]);
        let eb = Event::from_mask(p.space(), ups[j]);
        Witness {
            a: event_label(&ea),
            b: event_label(&eb),
            detail: None,
            lhs: prob(ab, p.total()),
            rhs: prob(a, p.total()) * prob(b, p.total()),
        }
    });
    Ok(AssociationReport::new(
        "pa",
        witness,
        QuantifierLog {
            pairs: count * count,
            foldings: 0,
        },
    ))
}

fn pa_scan<T: Mass>(m: &[T], total: Option<T>, ups: &[u64]) -> Option<(usize, usize, T, T, T)> {
    let total = total?;
    let ma: Vec<T> = ups.iter().map(|&u| mask_mass(m, u)).collect();
    (0..ups.len()).into_par_iter().find_map_first(|i| {
        (i..ups.len()).find_map(|j| {
            let ab = mask_mass(m, ups[i] & ups[j]);
            if ab.clone() * total.clone() < ma[i].clone() * ma[j].clone() {
                Some((i, j, ab, ma[i].clone(), ma[j].clone()))
            } else {
                None
            }
        })
    })
}

/// Index mask lifting an up-set of the sub-space on `positions` (given as a
/// mask over the sub-space's configuration indices) to the full space.
fn lift_mask(n: usize, positions: &[usize], sub_mask: u64) -> u64 {
    let mut out = 0u64;
    for w in 0..1usize << n {
        let sub = positions.iter().fold(0usize, |acc, &p| acc << 1 | (w >> (n - 1 - p) & 1));
        if sub_mask >> sub & 1 == 1 {
            out |= 1 << w;
        }
    }
    out
}

/// Increasing pairs with disjoint support satisfy `P(A ∩ B) ≤ P(A) P(B)`.
///
/// Pairs are scanned as `A = A_N × Ω_{N^c}`, `B = Ω_N × B_{N^c}` with `A_N`,
/// `B_{N^c}` increasing, over all `N ⊆ Λ` in ascending position-mask order.
/// This gives the same verdict as scanning every increasing pair `(A, B)` for
/// which some `N` has `[ω]_N ⊆ A` and `[ω]_{N^c} ⊆ B` on `A ∩ B`: replacing
/// `A` and `B` by their `N`- and `N^c`-interiors keeps `A ∩ B` and can only
/// lower `P(A) P(B)`.
pub fn is_na(p: &Measure) -> Result<AssociationReport> {
    is_na_with_cap(p, DEFAULT_UPSET_CAP)
}

pub fn is_na_with_cap(p: &Measure, cap: usize) -> Result<AssociationReport> {
    require_binary(p)?;
    let n = p.space().len();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "sites for negative association",
            got: n,
            cap,
        });
    }
    if n > 6 {
        return Err(Error::CapExceeded {
            what: "sites for mask-based negative association",
            got: n,
            cap: 6,
        });
    }
    let mut by_size = Vec::with_capacity(n + 1);
    for k in 0..=n {
        by_size.push(upset_masks(k, cap)?);
    }
    let blocks: Vec<NaBlock> = (0..1u64 << n)
        .map(|nmask| {
            let inside: Vec<usize> = (0..n).filter(|q| nmask >> q & 1 == 1).collect();
            let outside: Vec<usize> = (0..n).filter(|q| nmask >> q & 1 == 0).collect();
            NaBlock {
                nmask,
                a: by_size[inside.len()].iter().map(|&u| lift_mask(n, &inside, u)).collect(),
                b: by_size[outside.len()].iter().map(|&u| lift_mask(n, &outside, u)).collect(),
            }
        })
        .collect();
    let pairs: u64 = blocks.iter().map(|b| (b.a.len() * b.b.len()) as u64).sum();
    let found = match p.small_masses() {
        Some(m) => na_scan(&m, p.total().to_u128(), &blocks)
            .map(|(nm, a, b, ab, ma, mb)| (nm, a, b, ab.into(), ma.into(), mb.into())),
        None => na_scan(p.masses(), Some(p.total().clone()), &blocks),
    };
    let witness = found.map(|(nmask, a, b, ab, ma, mb)| Witness {
        a: event_label(&Event::from_mask(p.space(), a)),
        b: event_label(&Event::from_mask(p.space(), b)),
        detail: Some(format!("N = {}", positions_label(p.space(), nmask))),
        lhs: prob(ab, p.total()),
        rhs: prob(ma, p.total()) * prob(mb, p.total()),
    });
    Ok(AssociationReport::new("na", witness, QuantifierLog { pairs, foldings: 0 }))
}

struct NaBlock {
    nmask: u64,
    a: Vec<u64>,
    b: Vec<u64>,
}

type NaHit<T> = (u64, u64, u64, T, T, T);

fn na_scan<T: Mass>(m: &[T], total: Option<T>, blocks: &[NaBlock]) -> Option<NaHit<T>> {
    let total = total?;
    blocks.par_iter().find_map_first(|block| {
        let mb: Vec<T> = block.b.iter().map(|&v| mask_mass(m, v)).collect();
        block.a.iter().find_map(|&a| {
            let ma = mask_mass(m, a);
            block.b.iter().zip(&mb).find_map(|(&b, mbv)| {
                let ab = mask_mass(m, a & b);
                if ab.clone() * total.clone() > ma.clone() * mbv.clone() {
                    Some((block.nmask, a, b, ab, ma.clone(), mbv.clone()))
                } else {
                    None
                }
            })
        })
    })
}

/// `||ω| − m/2| ≤ 1/2` for a configuration index of an `m`-site binary space.
pub fn is_balanced(m: usize, index: usize) -> bool {
    (2 * index.count_ones() as i64 - m as i64).abs() <= 1
}

/// Number of site pairs `{u, v}` with `ω_u ≠ ω_v`: `k(m − k)` for `|ω| = k`.
pub fn disagreement_count(m: usize, index: usize) -> usize {
    let k = index.count_ones() as usize;
    k * (m - k)
}

fn negative_scan(p: &Measure, strict: bool) -> Result<AssociationReport> {
    require_binary(p)?;
    let check = if strict { "snfkg" } else { "nfkg" };
    let mut log = QuantifierLog::default();
    for spec in all_foldings(p.space())? {
        let f = match fold(p, &spec) {
            Ok(f) => f,
            Err(Error::FoldingUndefined) => continue,
            Err(e) => return Err(e),
        };
        log.foldings += 1;
        log.pairs += (f.len() * f.len()) as u64;
        if let Some((good, other, detail)) = negative_violation(&f, strict) {
            let witness = Witness {
                a: fold_label(&spec),
                b: config_label(f.space(), other),
                detail: Some(format!("{detail} {}", config_label(f.space(), good))),
                lhs: f.prob(good),
                rhs: f.prob(other),
            };
            return Ok(AssociationReport::new(check, Some(witness), log));
        }
    }
    Ok(AssociationReport::new(check, None, log))
}

/// First `(balanced ω, ω′)` breaking the (strict) negative condition.
fn negative_violation(f: &Measure, strict: bool) -> Option<(usize, usize, &'static str)> {
    let m = f.space().len();
    for good in (0..f.len()).filter(|&w| is_balanced(m, w)) {
        for other in 0..f.len() {
            let (a, b) = (f.mass(good), f.mass(other));
            if is_balanced(m, other) {
                if (strict && a != b) || a < b {
                    return Some((good, other, "balanced configuration differs from"));
                }
            } else if a < b || (strict && a == b) {
                return Some((good, other, "not strictly above unbalanced, balanced"));
            }
        }
    }
    None
}

/// In every defined folding, balanced configurations are maxima.
pub fn is_nfkg(p: &Measure) -> Result<AssociationReport> {
    negative_scan(p, false)
}

/// In every defined folding, balanced configurations share one value that
/// is strictly above every unbalanced configuration.
pub fn is_snfkg(p: &Measure) -> Result<AssociationReport> {
    negative_scan(p, true)
}

/// Whether every defined single folding of `P` is again SNFKG.
pub fn snfkg_closed_under_folding(p: &Measure) -> Result<bool> {
    for spec in all_foldings(p.space())? {
        match fold(p, &spec) {
            Ok(f) => {
                if !is_snfkg(&f)?.verdict {
                    return Ok(false);
                }
            }
            Err(Error::FoldingUndefined) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// `P_ε(ω) ∝ P(ω) (1 + ε)^{d(ω)}`, with `d` counting disagreeing site pairs
/// over the complete graph.
pub fn perturb(p: &Measure, eps: &BigRational) -> Result<Measure> {
    require_binary(p)?;
    if *eps <= BigRational::zero() {
        return Err(Error::InvalidParams("perturbation needs ε > 0".into()));
    }
    let base = BigRational::one() + eps;
    let m = p.space().len();
    let max_d = m * m / 4;
    let powers: Vec<BigRational> = (0..=max_d).map(|d| pow(&base, d as u64)).collect();
    let weights: Vec<BigRational> = (0..p.len())
        .map(|w| BigRational::from_integer(p.mass(w).clone().into()) * &powers[disagreement_count(m, w)])
        .collect();
    Measure::normalize(p.space().clone(), &weights)
}

/// Level weights `p_0..p_n` of an exchangeable measure, normalized so that
/// `Σ_k C(n, k) p_k = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExchangeableLevels {
    n: usize,
    p: Vec<BigRational>,
}

impl ExchangeableLevels {
    pub fn new(n: usize, raw: Vec<BigRational>) -> Result<Self> {
        if raw.len() != n + 1 {
            return Err(Error::InvalidParams(format!("{} levels for {n} sites", raw.len())));
        }
        if raw.iter().any(|x| *x < BigRational::zero()) {
            return Err(Error::InvalidParams("level weights must be nonnegative".into()));
        }
        let total: BigRational = raw
            .iter()
            .enumerate()
            .map(|(k, x)| x * BigRational::from_integer(binomial(n, k).into()))
            .sum();
        if total.is_zero() {
            return Err(Error::AllZero);
        }
        Ok(Self {
            n,
            p: raw.into_iter().map(|x| x / &total).collect(),
        })
    }

    pub fn from_u64(n: usize, raw: &[u64]) -> Result<Self> {
        Self::new(n, raw.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[BigRational] {
        &self.p
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// The measure giving each `ω` the weight `p_{|ω|}`.
pub fn exchangeable_from_levels(levels: &ExchangeableLevels) -> Result<Measure> {
    let space = SiteSpace::binary(levels.n);
    let weights: Vec<BigRational> = (0..space.num_configs())
        .map(|w| levels.p[w.count_ones() as usize].clone())
        .collect();
    Measure::normalize(space, &weights)
}

/// `p_{k+1} p_{k−1} ≤ p_k²` for `1 ≤ k < n`.
pub fn is_ulc(levels: &ExchangeableLevels) -> bool {
    levels.p.windows(3).all(|w| &w[2] * &w[0] <= &w[1] * &w[1])
}

/// One stage of a pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub name: &'static str,
    pub passed: bool,
    pub checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub pipeline: &'static str,
    pub verdict: bool,
    pub branches: u64,
    pub distinct_limits: u64,
    pub stages: Vec<Stage>,
}

struct StageLog {
    stages: Vec<Stage>,
}

impl StageLog {
    fn new(names: &[&'static str]) -> Self {
        Self {
            stages: names
                .iter()
                .map(|&name| Stage {
                    name,
                    passed: true,
                    checked: 0,
                    failure: None,
                })
                .collect(),
        }
    }

    fn record(&mut self, stage: usize, ok: bool, failure: impl FnOnce() -> String) {
        let s = &mut self.stages[stage];
        s.checked += 1;
        if !ok && s.passed {
            s.passed = false;
            s.failure = Some(failure());
        }
    }

    fn finish(self, pipeline: &'static str, branches: u64, distinct_limits: u64) -> PipelineReport {
        PipelineReport {
            pipeline,
            verdict: self.stages.iter().all(|s| s.passed),
            branches,
            distinct_limits,
            stages: self.stages,
        }
    }
}

/// The constructive route from the FKG condition to positive association:
/// every branch limit of the essential folding tree is uniform on a
/// symmetric set whose uniform measure is FKG, carries a symmetric
/// ferromagnetic pairwise RCR, and finally `P` is PA.
pub fn fkg_theorem_pipeline(p: &Measure) -> Result<PipelineReport> {
    require_binary(p)?;
    let n = p.space().len();
    if !is_fkg(p)?.verdict {
        return Err(Error::PreconditionFailed("input does not satisfy the FKG condition".into()));
    }
    const STAGES: [&str; 5] = ["limit-symmetric-uniform", "limit-fkg", "rcr-predicates", "rcr-exact", "pa"];
    let mut log = StageLog::new(&STAGES);
    let branches = essential_branches(p, n + 1, DEFAULT_BRANCH_CAP)?;
    let mut seen: HashMap<(Vec<u32>, Event), ()> = HashMap::new();
    for branch in &branches {
        let limit = branch.limit(p.space().num_configs())?;
        let key = (limit.measure.space().ids(), limit.argmax_set.clone());
        if seen.insert(key, ()).is_some() {
            continue;
        }
        let where_ = || serde_json::to_string(&branch.path.to_json()).expect("path serializes");
        let d = &limit.argmax_set;
        let symmetric = d.bar()? == *d && limit.measure.is_reversal_symmetric();
        log.record(0, symmetric, || format!("limit of branch {} is not symmetric", where_()));
        let fkg = is_fkg(&limit.measure)?.verdict;
        log.record(1, fkg, || format!("limit of branch {} is not FKG", where_()));
        if !(symmetric && fkg) {
            continue;
        }
        let nu = construct_uniform_symmetric_rcr(d)?;
        let flags = predicates(&nu);
        log.record(2, flags.symmetric && flags.ferromagnetic && flags.pairwise, || {
            format!("RCR of branch {} fails predicates {flags:?}", where_())
        });
        let check = verify_rcr(&limit.measure, &nu, &BigRational::zero())?;
        log.record(3, check.ok, || {
            format!("RCR of branch {} deviates by {}", where_(), check.max_dev)
        });
    }
    let pa = is_pa(p)?;
    log.record(4, pa.verdict, || format!("PA fails: {:?}", pa.witness));
    Ok(log.finish("fkg-theorem", branches.len() as u64, seen.len() as u64))
}

/// The route from SNFKG to negative association: every branch limit equals
/// the measure induced by the complete-pairing base on its terminal space,
/// that base is symmetric, antiferromagnetic, pairwise and concentrated on
/// isolated edges, and finally `P` is NA.
pub fn snfkg_limit_rcr(p: &Measure) -> Result<PipelineReport> {
    require_binary(p)?;
    let n = p.space().len();
    if !is_snfkg(p)?.verdict {
        return Err(Error::PreconditionFailed("input does not satisfy the strict negative FKG condition".into()));
    }
    const STAGES: [&str; 3] = ["limit-pairing", "rcr-predicates", "na"];
    let mut log = StageLog::new(&STAGES);
    let branches = essential_branches(p, n + 1, DEFAULT_BRANCH_CAP)?;
    let mut seen: HashMap<(Vec<u32>, Event), ()> = HashMap::new();
    for branch in &branches {
        let limit = branch.limit(p.space().num_configs())?;
        let key = (limit.measure.space().ids(), limit.argmax_set.clone());
        if seen.insert(key, ()).is_some() {
            continue;
        }
        let where_ = || serde_json::to_string(&branch.path.to_json()).expect("path serializes");
        let nu = complete_pairing_base(limit.measure.space())?;
        let induced = induced_measure(&nu)?;
        log.record(0, induced == limit.measure, || {
            format!("limit of branch {} differs from the pairing measure", where_())
        });
        let flags = predicates(&nu);
        log.record(1, flags.symmetric && flags.antiferromagnetic && flags.isolated_edges && flags.pairwise, || {
            format!("pairing base of branch {} fails predicates {flags:?}", where_())
        });
    }
    let na = is_na(p)?;
    log.record(2, na.verdict, || format!("NA fails: {:?}", na.witness));
    Ok(log.finish("snfkg-rcr", branches.len() as u64, seen.len() as u64))
}
