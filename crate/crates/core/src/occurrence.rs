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

//! Disjoint occurrence, selection rules and the generalized box operation.
//!
//! Site sets `K`, `L` are position masks: bit `p` selects the `p`-th site of
//! the space. A pair `(K, L)` is a disjoint occurrence pair of `(A, B)` at `ω`
//! when `K ∩ L = ∅`, `[ω]_K ⊆ A` and `[ω]_L ⊆ B`.

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::folding::{all_foldings, embedding, fold, FoldSpec};
use crate::measure::Measure;
use crate::rational::pow;
use crate::rcr::{clusters, predicates, verify_rcr, RcrBase};
use crate::space::SiteSpace;

/// Largest space handled by occurrence enumeration.
pub const MAX_OCCURRENCE_SITES: usize = 12;

/// `agree[ω][ω']`: positions where the two configurations agree.
#[derive(Clone, Debug, PartialEq, Eq)]
struct AgreeTable {
    rows: Vec<Vec<u64>>,
}

impl AgreeTable {
    fn new(space: &SiteSpace) -> Self {
        let values: Vec<Vec<usize>> = (0..space.num_configs()).map(|i| space.values_of(i)).collect();
        let rows = values
            .iter()
            .map(|a| {
                values
                    .iter()
                    .map(|b| {
                        a.iter()
                            .zip(b)
                            .enumerate()
                            .filter(|(_, (x, y))| x == y)
                            .fold(0u64, |m, (p, _)| m | 1 << p)
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// All `K` with `[ω]_K ⊆ A`, ascending.
    fn witnesses(&self, a: &Event, omega: usize) -> Vec<u64> {
        let n = a.space().len();
        if !a.contains(omega) {
            return Vec::new();
        }
        let outside: Vec<u64> = (0..a.space().num_configs())
            .filter(|&j| !a.contains(j))
            .map(|j| self.rows[omega][j])
            .collect();
        (0..1u64 << n)
            .filter(|&k| outside.iter().all(|&agree| k & !agree != 0))
            .collect()
    }
}

fn check_size(space: &SiteSpace) -> Result<()> {
    if space.len() > MAX_OCCURRENCE_SITES {
        return Err(Error::CapExceeded {
            what: "sites for occurrence enumeration",
            got: space.len(),
            cap: MAX_OCCURRENCE_SITES,
        });
    }
    Ok(())
}

fn check_pair(a: &Event, b: &Event) -> Result<()> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch("events on different spaces".into()));
    }
    check_size(a.space())
}

/// `𝒟(A, B, ω)`, sorted by `(K, L)`.
pub fn disjoint_pairs(a: &Event, b: &Event, omega: usize) -> Result<Vec<(u64, u64)>> {
    check_pair(a, b)?;
    let table = AgreeTable::new(a.space());
    Ok(pairs_from(&table, a, b, omega))
}

fn pairs_from(table: &AgreeTable, a: &Event, b: &Event, omega: usize) -> Vec<(u64, u64)> {
    let wa = table.witnesses(a, omega);
    if wa.is_empty() {
        return Vec::new();
    }
    let wb = table.witnesses(b, omega);
    wa.iter()
        .flat_map(|&k| wb.iter().filter(move |&&l| k & l == 0).map(move |&l| (k, l)))
        .collect()
}

/// A filter on disjoint occurrence pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelectionRule {
    Full,
    /// `K` and `L` only use sites where `ω` takes its top symbol.
    IncreasingOnly,
    /// `K` uses only top-symbol sites, `L` only bottom-symbol sites.
    IncreasingDecreasing,
    /// `Ψ_{K,α}` on the folded space of `fold`.
    Induced(Box<InducedRule>),
}

/// `Ψ_{K,α}`. Events `A'` on the folded space are lifted to `Ω_K × A'`
/// over the sites of `K` and the folded sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedRule {
    pub parent: SelectionRule,
    pub lifted_space: SiteSpace,
    pub space: SiteSpace,
    /// Folded index of each lifted configuration.
    project: Vec<usize>,
    /// Lifted index of `α ω` for each folded `ω`.
    with_alpha: Vec<usize>,
    /// Folded position of each lifted position, if it is not in `K`.
    position_map: Vec<Option<usize>>,
    table: AgreeTable,
}

impl SelectionRule {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionRule::Full => "full",
            SelectionRule::IncreasingOnly => "increasing-only",
            SelectionRule::IncreasingDecreasing => "increasing-decreasing",
            SelectionRule::Induced(_) => "induced",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "full" => Ok(SelectionRule::Full),
            "increasing-only" | "increasing_only" => Ok(SelectionRule::IncreasingOnly),
            "increasing-decreasing" | "increasing_decreasing" => Ok(SelectionRule::IncreasingDecreasing),
            other => Err(Error::Parse(format!("unknown selection rule `{other}`"))),
        }
    }

    /// `Ψ(A, B, ω)`, sorted by `(K, L)`.
    pub fn pairs(&self, a: &Event, b: &Event, omega: usize) -> Result<Vec<(u64, u64)>> {
        check_pair(a, b)?;
        let table = AgreeTable::new(a.space());
        self.pairs_with(&table, a, b, omega)
    }

    fn pairs_with(&self, table: &AgreeTable, a: &Event, b: &Event, omega: usize) -> Result<Vec<(u64, u64)>> {
        let space = a.space();
        let (top, bottom) = extreme_masks(space, omega);
        let all = || pairs_from(table, a, b, omega);
        Ok(match self {
            SelectionRule::Full => all(),
            SelectionRule::IncreasingOnly => all()
                .into_iter()
                .filter(|&(k, l)| k & !top == 0 && l & !top == 0)
                .collect(),
            SelectionRule::IncreasingDecreasing => all()
                .into_iter()
                .filter(|&(k, l)| k & !top == 0 && l & !bottom == 0)
                .collect(),
            SelectionRule::Induced(rule) => {
                if space != &rule.space {
                    return Err(Error::SpaceMismatch("induced rule used on another space".into()));
                }
                let lift = |e: &Event| Event::from_predicate(&rule.lifted_space, |x| e.contains(rule.project[x]));
                let (la, lb) = (lift(a), lift(b));
                let mut out: Vec<(u64, u64)> = rule
                    .parent
                    .pairs_with(&rule.table, &la, &lb, rule.with_alpha[omega])?
                    .into_iter()
                    .map(|(m, n)| (rule.project_mask(m), rule.project_mask(n)))
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            }
        })
    }
}

impl InducedRule {
    fn project_mask(&self, lifted_mask: u64) -> u64 {
        self.position_map
            .iter()
            .enumerate()
            .filter(|&(p, _)| lifted_mask >> p & 1 == 1)
            .filter_map(|(_, q)| *q)
            .fold(0, |m, q| m | 1 << q)
    }
}

/// Positions where `ω` takes the largest, respectively smallest, symbol.
fn extreme_masks(space: &SiteSpace, omega: usize) -> (u64, u64) {
    let values = space.values_of(omega);
    let mut top = 0;
    let mut bottom = 0;
    for (p, &v) in values.iter().enumerate() {
        if v + 1 == space.radix(p) {
            top |= 1 << p;
        }
        if v == 0 {
            bottom |= 1 << p;
        }
    }
    (top, bottom)
}

/// `Ψ_{K,α}(A', B', ω) = Ψ(Ω_K × A', Ω_K × B', αω) ∩ K^c`, on the folded space.
pub fn induced_rule(rule: &SelectionRule, parent_space: &SiteSpace, spec: &FoldSpec) -> Result<SelectionRule> {
    let emb = embedding(parent_space, spec)?;
    let k_space = spec.alpha().space();
    let lifted_space = k_space.union(&emb.space)?;
    let position_map: Vec<Option<usize>> = lifted_space.sites().iter().map(|s| emb.space.position(s.id)).collect();
    let k_map: Vec<Option<usize>> = lifted_space.sites().iter().map(|s| k_space.position(s.id)).collect();
    let out_len = emb.space.len();
    let project = (0..lifted_space.num_configs())
        .map(|x| {
            let values = lifted_space.values_of(x);
            let mut out = vec![0; out_len];
            for (p, q) in position_map.iter().enumerate() {
                if let Some(q) = q {
                    out[*q] = values[p];
                }
            }
            emb.space.index_of(&out)
        })
        .collect();
    let alpha = spec.alpha().values();
    let with_alpha = (0..emb.space.num_configs())
        .map(|j| {
            let out = emb.space.values_of(j);
            let values: Vec<usize> = position_map
                .iter()
                .zip(&k_map)
                .map(|(q, k)| match (q, k) {
                    (Some(q), _) => out[*q],
                    (None, Some(k)) => alpha[*k],
                    (None, None) => unreachable!("lifted sites come from K or the folded space"),
                })
                .collect();
            lifted_space.index_of(&values)
        })
        .collect();
    check_size(&lifted_space)?;
    Ok(SelectionRule::Induced(Box::new(InducedRule {
        parent: rule.clone(),
        table: AgreeTable::new(&lifted_space),
        lifted_space,
        space: emb.space,
        project,
        with_alpha,
        position_map,
    })))
}

/// `A □ B`.
pub fn box_op(a: &Event, b: &Event) -> Result<Event> {
    box_with_rule(a, b, &SelectionRule::Full)
}

/// `A □_Ψ B = { ω : Ψ(A, B, ω) ≠ ∅ }`.
pub fn box_with_rule(a: &Event, b: &Event, rule: &SelectionRule) -> Result<Event> {
    check_pair(a, b)?;
    let table = AgreeTable::new(a.space());
    box_with_table(&table, a, b, rule)
}

fn box_with_table(table: &AgreeTable, a: &Event, b: &Event, rule: &SelectionRule) -> Result<Event> {
    let mut members = Vec::new();
    for omega in a.indices() {
        if b.contains(omega) && !rule.pairs_with(table, a, b, omega)?.is_empty() {
            members.push(omega);
        }
    }
    Ok(Event::from_indices(a.space(), members))
}

/// Precomputed tables for many box operations on one space.
pub struct BoxContext {
    space: SiteSpace,
    table: AgreeTable,
}

impl BoxContext {
    pub fn new(space: &SiteSpace) -> Result<Self> {
        check_size(space)?;
        Ok(Self {
            space: space.clone(),
            table: AgreeTable::new(space),
        })
    }

    pub fn box_with_rule(&self, a: &Event, b: &Event, rule: &SelectionRule) -> Result<Event> {
        if a.space() != &self.space || b.space() != &self.space {
            return Err(Error::SpaceMismatch("events not on the context space".into()));
        }
        box_with_table(&self.table, a, b, rule)
    }

    /// Minimal witnesses suffice for the full rule.
    pub fn full_box(&self, a: &Event, b: &Event) -> Event {
        let minimal = |e: &Event, omega| {
            let w = self.table.witnesses(e, omega);
            w.iter()
                .copied()
                .filter(|&k| !w.iter().any(|&j| j != k && j & !k == 0))
                .collect::<Vec<u64>>()
        };
        Event::from_predicate(&self.space, |omega| {
            if !a.contains(omega) || !b.contains(omega) {
                return false;
            }
            let wb = minimal(b, omega);
            minimal(a, omega).iter().any(|&k| wb.iter().any(|&l| k & l == 0))
        })
    }
}

/// Largest space (in configurations) for [`full_box_table`].
pub const MAX_BOX_TABLE_CONFIGS: usize = 8;

/// `A □ B` as an index mask for every pair of events given as index masks,
/// row-major over `A`.
pub fn full_box_table(space: &SiteSpace) -> Result<Vec<u64>> {
    let size = space.num_configs();
    if size > MAX_BOX_TABLE_CONFIGS {
        return Err(Error::CapExceeded {
            what: "configurations for the all-pairs box table",
            got: size,
            cap: MAX_BOX_TABLE_CONFIGS,
        });
    }
    let table = AgreeTable::new(space);
    let events = 1usize << size;
    // minimal witnesses of every event at every configuration
    let minimal: Vec<Vec<Vec<u64>>> = (0..events)
        .map(|mask| {
            let e = Event::from_mask(space, mask as u64);
            (0..size)
                .map(|omega| {
                    let w = table.witnesses(&e, omega);
                    w.iter()
                        .copied()
                        .filter(|&k| !w.iter().any(|&j| j != k && j & !k == 0))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut out = vec![0u64; events * events];
    for a in 0..events {
        for b in 0..events {
            let both = (a & b) as u64;
            let mut boxed = 0u64;
            for (omega, (wa, wb)) in minimal[a].iter().zip(&minimal[b]).enumerate() {
                if both >> omega & 1 == 1 && wa.iter().any(|&k| wb.iter().any(|&l| k & l == 0))
                {
                    boxed |= 1 << omega;
                }
            }
            out[a * events + b] = boxed;
        }
    }
    Ok(out)
}

/// `R_{K,α,β}(E) = { ω in the β-range : αω ∈ E }`, on the folded space.
pub fn r_functional(spec: &FoldSpec, e: &Event) -> Result<Event> {
    let emb = embedding(e.space(), spec)?;
    Ok(Event::from_predicate(&emb.space, |j| e.contains(emb.parent_index[j])))
}

/// Outcome of checking `P(A □_Ψ B) ≤ P(A ∩ B̄) + ε` from an RCR.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma232Report {
    #[serde(with = "crate::rational::serde_ratio")]
    pub representation_dev: BigRational,
    #[serde(with = "crate::rational::serde_ratio")]
    pub representation_tolerance: BigRational,
    pub representation_ok: bool,
    #[serde(with = "crate::rational::serde_ratio")]
    pub lhs: BigRational,
    #[serde(with = "crate::rational::serde_ratio")]
    pub rhs: BigRational,
    pub ok: bool,
}

/// Requires a binary space, a symmetric base, and a rule using disjoint
/// clusters of `ν`. The base must represent `P` to within `ε / 2^{|Λ|+1}`
/// for the conclusion to be guaranteed.
pub fn check_lemma_232(
    p: &Measure,
    nu: &RcrBase,
    rule: &SelectionRule,
    a: &Event,
    b: &Event,
    eps: &BigRational,
) -> Result<Lemma232Report> {
    let space = p.space();
    space.require_binary()?;
    check_pair(a, b)?;
    if a.space() != space || nu.space() != space {
        return Err(Error::SpaceMismatch("measure, base and events differ in space".into()));
    }
    if !predicates(nu).symmetric {
        return Err(Error::PreconditionFailed("the base measure is not symmetric".into()));
    }
    let table = AgreeTable::new(space);
    let boxed = box_with_table(&table, a, b, rule)?;
    let structure = nu.structure();
    for (i, (eta, _)) in nu.atoms().iter().enumerate() {
        let cluster_masks: Vec<u64> = clusters(structure, eta)
            .iter()
            .map(|c| {
                c.iter()
                    .fold(0u64, |m, &id| m | 1 << space.position(id).expect("cluster site in space"))
            })
            .collect();
        for omega in boxed.indices() {
            if !crate::rcr::compatible(structure, eta, omega) {
                continue;
            }
            let pairs = rule.pairs_with(&table, a, b, omega)?;
            let separated = pairs
                .iter()
                .any(|&(k, l)| cluster_masks.iter().all(|&c| c & k == 0 || c & l == 0));
            if !separated {
                return Err(Error::PreconditionFailed(format!(
                    "rule does not use disjoint clusters: atom {i} at {}",
                    space.config(omega)
                )));
            }
        }
    }
    let representation_tolerance = eps / pow(&BigRational::from_integer(2.into()), space.len() as u64 + 1);
    let check = verify_rcr(p, nu, &representation_tolerance)?;
    let lhs = p.prob_of(&boxed)?;
    let rhs = p.prob_of(&a.intersection(&b.bar()?)?)?;
    let ok = lhs <= &rhs + eps;
    Ok(Lemma232Report {
        representation_dev: check.max_dev,
        representation_tolerance,
        representation_ok: check.ok,
        lhs,
        rhs,
        ok,
    })
}

/// A folding where `P^{K,α,β}(R(A) □ R(B)) ≤ P^{K,α,β}(R(A) ∩ R̄(B)) + ε` fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FoldingFailure {
    pub fold: crate::folding::FoldStepJson,
    #[serde(with = "crate::rational::serde_ratio")]
    pub lhs: BigRational,
    #[serde(with = "crate::rational::serde_ratio")]
    pub rhs: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma233Report {
    pub foldings_checked: usize,
    pub hypothesis_ok: bool,
    pub failures: Vec<FoldingFailure>,
    #[serde(with = "crate::rational::serde_ratio")]
    pub lhs: BigRational,
    #[serde(with = "crate::rational::serde_ratio")]
    pub rhs: BigRational,
    pub conclusion_ok: bool,
}

/// Checks the folding hypothesis over every defined folding of `P`, using the
/// induced rule on each folded space, and the conclusion
/// `P(A □_Ψ B) ≤ P(A) P(B) + ε`.
pub fn check_lemma_233(p: &Measure, rule: &SelectionRule, a: &Event, b: &Event, eps: &BigRational) -> Result<Lemma233Report> {
    let space = p.space();
    check_pair(a, b)?;
    if a.space() != space {
        return Err(Error::SpaceMismatch("measure and events differ in space".into()));
    }
    let mut failures = Vec::new();
    let mut checked = 0;
    for spec in all_foldings(space)? {
        let folded = match fold(p, &spec) {
            Ok(f) => f,
            Err(Error::FoldingUndefined) => continue,
            Err(e) => return Err(e),
        };
        checked += 1;
        let ra = r_functional(&spec, a)?;
        let rb = r_functional(&spec, b)?;
        let sub_rule = induced_rule(rule, space, &spec)?;
        let boxed = box_with_rule(&ra, &rb, &sub_rule)?;
        let lhs = folded.prob_of(&boxed)?;
        let rhs = folded.prob_of(&ra.intersection(&rb.bar()?)?)?;
        if lhs > &rhs + eps {
            failures.push(FoldingFailure {
                fold: spec.to_json(),
                lhs,
                rhs,
            });
        }
    }
    let lhs = p.prob_of(&box_with_rule(a, b, rule)?)?;
    let rhs = p.prob_of(a)? * p.prob_of(b)?;
    let conclusion_ok = lhs <= &rhs + eps;
    Ok(Lemma233Report {
        foldings_checked: checked,
        hypothesis_ok: failures.is_empty(),
        failures,
        lhs,
        rhs,
        conclusion_ok,
    })
}

/// `P(A) P(B) − P(A □_Ψ B)`; nonnegative exactly when the BK-type inequality holds.
pub fn bk_slack(p: &Measure, ctx: &BoxContext, a: &Event, b: &Event) -> Result<BigRational> {
    let boxed = ctx.full_box(a, b);
    Ok(p.prob_of(a)? * p.prob_of(b)? - p.prob_of(&boxed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::upset_masks;
    use crate::rational::ratio;
    use crate::rcr::{ising_build, IsingSpec};
    use proptest::prelude::*;

    fn site_is_one(space: &SiteSpace, pos: usize) -> Event {
        let n = space.len();
        Event::from_predicate(space, |w| w >> (n - 1 - pos) & 1 == 1)
    }

    fn all_pairs_oracle(a: &Event, b: &Event, omega: usize) -> Vec<(u64, u64)> {
        // brute force over the 3^n assignments of each site to K, L or neither
        let space = a.space();
        let n = space.len();
        let mut out = Vec::new();
        for code in 0..3usize.pow(n as u32) {
            let (mut k, mut l, mut c) = (0u64, 0u64, code);
            for p in 0..n {
                match c % 3 {
                    1 => k |= 1 << p,
                    2 => l |= 1 << p,
                    _ => {}
                }
                c /= 3;
            }
            let inside = |e: &Event, mask: u64| {
                Event::cylinder(space, omega, mask).indices().all(|j| e.contains(j))
            };
            if inside(a, k) && inside(b, l) {
                out.push((k, l));
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn disjoint_pair_examples() {
        let s3 = SiteSpace::binary(3);
        let full = Event::full(&s3);
        let pairs = disjoint_pairs(&full, &full, 5).unwrap();
        assert_eq!(pairs.len(), 27);
        assert!(pairs.contains(&(0, 0)));

        let a = site_is_one(&s3, 0);
        let b = site_is_one(&s3, 1);
        let omega = s3.parse_config("110").unwrap().index();
        assert_eq!(disjoint_pairs(&a, &b, omega).unwrap(), vec![(0b001, 0b010), (0b001, 0b110), (0b101, 0b010)]);

        let omega = s3.parse_config("011").unwrap().index();
        assert!(disjoint_pairs(&a, &Event::empty(&s3), omega).unwrap().is_empty());
        assert!(disjoint_pairs(&a, &b, omega).unwrap().is_empty());
    }

    #[test]
    fn box_examples() {
        let s2 = SiteSpace::binary(2);
        let a = site_is_one(&s2, 0);
        let b = site_is_one(&s2, 1);
        assert_eq!(box_op(&a, &b).unwrap(), Event::parse_configs(&s2, "11").unwrap());
        assert_eq!(box_op(&a, &Event::full(&s2)).unwrap(), a);
        assert_eq!(box_with_rule(&a, &b, &SelectionRule::Full).unwrap(), box_op(&a, &b).unwrap());
    }

    #[test]
    fn increasing_rules_on_monotone_events() {
        let s3 = SiteSpace::binary(3);
        let ctx = BoxContext::new(&s3).unwrap();
        let ups: Vec<Event> = upset_masks(3, 5).unwrap().into_iter().map(|m| Event::from_mask(&s3, m)).collect();
        for a in &ups {
            for b in &ups {
                let full = box_op(a, b).unwrap();
                assert_eq!(box_with_rule(a, b, &SelectionRule::IncreasingOnly).unwrap(), full);
                assert_eq!(ctx.full_box(a, b), full);
                let down = b.complement();
                assert_eq!(
                    box_with_rule(a, &down, &SelectionRule::IncreasingDecreasing).unwrap(),
                    a.intersection(&down).unwrap()
                );
            }
        }
    }

    #[test]
    fn induced_rule_examples() {
        let s3 = SiteSpace::binary(3);
        let empty = FoldSpec::inessential();
        let k1 = FoldSpec::on_positions(&s3, 0b001, vec![1]).unwrap();
        let sub = k1.output_space(&s3).unwrap();
        let from_full = induced_rule(&SelectionRule::Full, &s3, &k1).unwrap();
        let from_inc = induced_rule(&SelectionRule::IncreasingOnly, &s3, &k1).unwrap();
        let same = induced_rule(&SelectionRule::IncreasingDecreasing, &s3, &empty).unwrap();
        for am in 0u64..16 {
            for bm in 0u64..16 {
                let (a, b) = (Event::from_mask(&sub, am), Event::from_mask(&sub, bm));
                for omega in 0..4 {
                    assert_eq!(from_full.pairs(&a, &b, omega).unwrap(), disjoint_pairs(&a, &b, omega).unwrap());
                    assert!(from_inc.pairs(&a, &b, omega).unwrap().iter().all(|&(k, l)| (k | l) < 4));
                }
            }
        }
        for am in (0u64..256).step_by(7) {
            for bm in (0u64..256).step_by(11) {
                let (a, b) = (Event::from_mask(&s3, am), Event::from_mask(&s3, bm));
                for omega in 0..8 {
                    assert_eq!(
                        same.pairs(&a, &b, omega).unwrap(),
                        SelectionRule::IncreasingDecreasing.pairs(&a, &b, omega).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn r_functional_examples() {
        let s2 = SiteSpace::binary(2);
        let spec = FoldSpec::on_positions(&s2, 0b01, vec![1]).unwrap();
        let r = r_functional(&spec, &Event::full(&s2)).unwrap();
        assert_eq!(r, Event::full(r.space()));
        let e = Event::parse_configs(&s2, "11,10").unwrap();
        assert_eq!(r_functional(&spec, &e).unwrap(), Event::full(r.space()));
        let e = Event::parse_configs(&s2, "01,10").unwrap();
        assert_eq!(r_functional(&spec, &e).unwrap(), Event::parse_configs(r.space(), "0").unwrap());
    }

    #[test]
    fn box_table_matches_box() {
        let s2 = SiteSpace::binary(2);
        let t = full_box_table(&s2).unwrap();
        for a in 0..16u64 {
            for b in 0..16u64 {
                let expect = box_op(&Event::from_mask(&s2, a), &Event::from_mask(&s2, b)).unwrap();
                assert_eq!(t[(a * 16 + b) as usize], expect.mask().unwrap());
            }
        }
        assert!(full_box_table(&SiteSpace::binary(4)).is_err());
    }

    #[test]
    fn lemma_232_examples() {
        let spec = IsingSpec::numbered(2, vec![(0, 1, ratio(2, 1))]).unwrap();
        let model = ising_build(&spec).unwrap();
        let s2 = model.measure.space().clone();
        let a = site_is_one(&s2, 0);
        let b = site_is_one(&s2, 1).complement();
        let zero = ratio(0, 1);
        let rule = SelectionRule::IncreasingDecreasing;
        let report = check_lemma_232(&model.measure, &model.base, &rule, &a, &b, &zero).unwrap();
        assert_eq!(report.lhs, ratio(1, 6));
        assert_eq!(report.rhs, ratio(1, 3));
        assert!(report.ok && report.representation_ok);

        let full = Event::full(&s2);
        let report = check_lemma_232(&model.measure, &model.base, &rule, &a, &full, &zero).unwrap();
        assert_eq!(report.lhs, ratio(1, 2));
        assert!(report.ok);

        let triangle = IsingSpec::numbered(3, vec![(0, 1, ratio(2, 1)), (1, 2, ratio(3, 1)), (0, 2, ratio(5, 2))]).unwrap();
        let model = ising_build(&triangle).unwrap();
        let s3 = model.measure.space().clone();
        let ups: Vec<Event> = upset_masks(3, 5).unwrap().into_iter().map(|m| Event::from_mask(&s3, m)).collect();
        for a in &ups {
            for b in &ups {
                let report = check_lemma_232(&model.measure, &model.base, &rule, a, &b.complement(), &zero).unwrap();
                assert!(report.ok);
            }
        }
    }

    #[test]
    fn lemma_232_rejects_shared_clusters() {
        let spec = IsingSpec::numbered(2, vec![(0, 1, ratio(2, 1))]).unwrap();
        let model = ising_build(&spec).unwrap();
        let s2 = model.measure.space().clone();
        let a = site_is_one(&s2, 0);
        let b = site_is_one(&s2, 1);
        let result = check_lemma_232(&model.measure, &model.base, &SelectionRule::Full, &a, &b, &ratio(0, 1));
        assert!(matches!(result, Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn lemma_233_examples() {
        let spec = IsingSpec::numbered(2, vec![(0, 1, ratio(2, 1))]).unwrap();
        let p = ising_build(&spec).unwrap().measure;
        let s2 = p.space().clone();
        let a = site_is_one(&s2, 0);
        let b = site_is_one(&s2, 1);
        let zero = ratio(0, 1);
        let report = check_lemma_233(&p, &SelectionRule::IncreasingOnly, &a, &b, &zero).unwrap();
        assert_eq!(report.lhs, ratio(1, 3));
        assert_eq!(report.rhs, ratio(1, 4));
        assert!(!report.conclusion_ok);
        assert!(!report.hypothesis_ok);
        assert_eq!(report.foldings_checked, 9);

        let report = check_lemma_233(&p, &SelectionRule::Full, &Event::full(&s2), &b, &zero).unwrap();
        assert_eq!(report.lhs, report.rhs);
        assert!(report.conclusion_ok);
    }

    #[test]
    fn bk_on_small_product_measures() {
        let s2 = SiteSpace::binary(2);
        let p = Measure::from_u64(s2.clone(), &[6, 3, 2, 1]).unwrap();
        let ctx = BoxContext::new(&s2).unwrap();
        for am in 0u64..16 {
            for bm in 0u64..16 {
                let (a, b) = (Event::from_mask(&s2, am), Event::from_mask(&s2, bm));
                assert!(bk_slack(&p, &ctx, &a, &b).unwrap() >= ratio(0, 1));
                let report = check_lemma_233(&p, &SelectionRule::Full, &a, &b, &ratio(0, 1)).unwrap();
                if report.hypothesis_ok {
                    assert!(report.conclusion_ok);
                }
            }
        }
    }

    fn arb_events(n: usize) -> impl Strategy<Value = (Event, Event)> {
        let size = 1u64 << (1usize << n);
        (0..size, 0..size).prop_map(move |(a, b)| {
            let s = SiteSpace::binary(n);
            (Event::from_mask(&s, a), Event::from_mask(&s, b))
        })
    }

    proptest! {
        #[test]
        fn pairs_match_brute_force((a, b) in arb_events(3), omega in 0usize..8) {
            prop_assert_eq!(disjoint_pairs(&a, &b, omega).unwrap(), all_pairs_oracle(&a, &b, omega));
        }

        #[test]
        fn box_properties((a, b) in arb_events(3), extra in 0u64..256) {
            let s = a.space().clone();
            let boxed = box_op(&a, &b).unwrap();
            prop_assert!(boxed.is_subset(&a.intersection(&b).unwrap()).unwrap());
            let bigger = a.union(&Event::from_mask(&s, extra)).unwrap();
            prop_assert!(boxed.is_subset(&box_op(&bigger, &b).unwrap()).unwrap());
            for rule in [SelectionRule::IncreasingOnly, SelectionRule::IncreasingDecreasing] {
                prop_assert!(box_with_rule(&a, &b, &rule).unwrap().is_subset(&boxed).unwrap());
            }
            let ctx = BoxContext::new(&s).unwrap();
            prop_assert_eq!(ctx.full_box(&a, &b), boxed);
        }

        #[test]
        fn r_of_box_is_inside_box_of_r((a, b) in arb_events(3), pick in 0usize..27, rule_pick in 0usize..3) {
            let s = a.space().clone();
            let rule = [SelectionRule::Full, SelectionRule::IncreasingOnly, SelectionRule::IncreasingDecreasing][rule_pick].clone();
            let specs = all_foldings(&s).unwrap();
            let spec = &specs[pick % specs.len()];
            let lhs = r_functional(spec, &box_with_rule(&a, &b, &rule).unwrap()).unwrap();
            let sub_rule = induced_rule(&rule, &s, spec).unwrap();
            let rhs = box_with_rule(&r_functional(spec, &a).unwrap(), &r_functional(spec, &b).unwrap(), &sub_rule).unwrap();
            prop_assert!(lhs.is_subset(&rhs).unwrap());
        }
    }
}
