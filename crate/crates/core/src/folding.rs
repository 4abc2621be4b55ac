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

//! Folding of a measure, iterated folding paths, and branch limits.
//!
//! The folding with respect to `(K, α, β)` conditions `P × P` on both copies
//! agreeing with `α` on `K` and lying coordinatewise in `{β_i(1), β_i(2)}`
//! off `K` with opposite choices, then keeps the first copy:
//!
//! `P^{K,α,β}(ω) ∝ P(αω) · P(αω̄^β)`.
//!
//! The folded measure lives on `K^c` with each alphabet cut down to the two
//! `β` symbols, listed in their original order. It is always invariant under
//! global reversal.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::Event;
use crate::measure::{sup_distance, Measure};
use crate::rational::{pow, uint_ratio};
use crate::space::{BetaPair, Config, Site, SiteId, SiteSpace};

/// Default cap on `|Λ|` for essential-tree enumeration.
pub const DEFAULT_BRANCH_CAP: usize = 4;

/// One folding `(K, α, β)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FoldSpec {
    region: Vec<SiteId>,
    alpha: Config,
    beta: Option<BetaPair>,
}

impl FoldSpec {
    /// `alpha` must be a configuration on exactly the region `K`; `beta`, when
    /// given, a pair on the complement.
    pub fn new(alpha: Config, beta: Option<BetaPair>) -> Self {
        Self {
            region: alpha.space().ids(),
            alpha,
            beta,
        }
    }

    /// Folding with `K = ∅` and canonical `β`.
    pub fn inessential() -> Self {
        Self::new(Config::empty(), None)
    }

    /// Folding of `space` on the positions in `mask` with `α` given by
    /// values aligned with those positions, and canonical `β`.
    pub fn on_positions(space: &SiteSpace, mask: u64, alpha_values: Vec<usize>) -> Result<Self> {
        let sub = space.restrict_mask(mask);
        Ok(Self::new(Config::new(sub, alpha_values)?, None))
    }

    pub fn region(&self) -> &[SiteId] {
        &self.region
    }

    pub fn alpha(&self) -> &Config {
        &self.alpha
    }

    pub fn beta(&self) -> Option<&BetaPair> {
        self.beta.as_ref()
    }

    pub fn is_inessential(&self) -> bool {
        self.region.is_empty()
    }

    fn resolve(&self, space: &SiteSpace) -> Result<Resolved> {
        let mut k_positions = Vec::with_capacity(self.region.len());
        for (&id, site) in self.region.iter().zip(self.alpha.space().sites()) {
            let pos = space.position(id).ok_or_else(|| {
                Error::MalformedFoldSpec(format!("site `{}` is not in the current space", site.name))
            })?;
            if space.sites()[pos] != *site {
                return Err(Error::MalformedFoldSpec(format!(
                    "alphabet of site `{}` does not match the current space",
                    site.name
                )));
            }
            k_positions.push(pos);
        }
        let rest_positions: Vec<usize> = (0..space.len()).filter(|p| !k_positions.contains(p)).collect();
        let rest_space = space.restrict(&rest_positions);
        let beta = match &self.beta {
            Some(beta) => {
                if beta.space() != &rest_space {
                    return Err(Error::MalformedFoldSpec(
                        "beta is not defined on the complement of K".into(),
                    ));
                }
                beta.clone()
            }
            None => {
                if let Some(site) = rest_space.sites().iter().find(|s| s.alphabet.len() != 2) {
                    return Err(Error::MalformedFoldSpec(format!(
                        "beta must be given when site `{}` is not binary",
                        site.name
                    )));
                }
                BetaPair::canonical(&rest_space)?
            }
        };
        let pairs: Vec<(usize, usize)> = beta
            .first
            .values()
            .iter()
            .zip(beta.second.values())
            .map(|(&a, &b)| (a.min(b), a.max(b)))
            .collect();
        let out_space = SiteSpace::from_sites(
            rest_space
                .sites()
                .iter()
                .zip(&pairs)
                .map(|(s, &(lo, hi))| Site {
                    id: s.id,
                    name: s.name.clone(),
                    alphabet: vec![s.alphabet[lo].clone(), s.alphabet[hi].clone()],
                })
                .collect(),
        )?;
        Ok(Resolved {
            k_positions,
            alpha_values: self.alpha.values().to_vec(),
            rest_positions,
            pairs,
            out_space,
        })
    }

    /// The space `P^{K,α,β}` lives on, for a measure on `space`.
    pub fn output_space(&self, space: &SiteSpace) -> Result<SiteSpace> {
        Ok(self.resolve(space)?.out_space)
    }

    pub fn to_json(&self) -> FoldStepJson {
        FoldStepJson {
            region: self.alpha.space().sites().iter().map(|s| s.name.clone()).collect(),
            alpha: self.alpha.symbols(),
            beta: self
                .beta
                .as_ref()
                .map(|b| (b.first.symbols(), b.second.symbols())),
        }
    }

    /// Resolves a JSON step against the space it applies to.
    pub fn from_json(space: &SiteSpace, json: &FoldStepJson) -> Result<Self> {
        if json.region.len() != json.alpha.len() {
            return Err(Error::MalformedFoldSpec("K and alpha differ in length".into()));
        }
        let mut pairs = Vec::with_capacity(json.region.len());
        for (name, sym) in json.region.iter().zip(&json.alpha) {
            let pos = space.require_position_of_name(name)?;
            if pairs.iter().any(|&(p, _): &(usize, &String)| p == pos) {
                return Err(Error::MalformedFoldSpec(format!("site `{name}` repeated in K")));
            }
            pairs.push((pos, sym));
        }
        pairs.sort_by_key(|&(p, _)| space.sites()[p].id);
        let positions: Vec<usize> = pairs.iter().map(|&(p, _)| p).collect();
        let region_space = space.restrict(&positions);
        let symbols: Vec<&String> = pairs.iter().map(|&(_, s)| s).collect();
        let alpha = region_space.config_from_symbols(&symbols)?;
        let beta = match &json.beta {
            None => None,
            Some((first, second)) => {
                let rest: Vec<usize> = (0..space.len()).filter(|p| !positions.contains(p)).collect();
                let rest_space = space.restrict(&rest);
                Some(BetaPair::new(
                    rest_space.config_from_symbols(first)?,
                    rest_space.config_from_symbols(second)?,
                )?)
            }
        };
        Ok(Self::new(alpha, beta))
    }
}

struct Resolved {
    k_positions: Vec<usize>,
    alpha_values: Vec<usize>,
    rest_positions: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    out_space: SiteSpace,
}

/// JSON form of one folding step: `{ "K": [...], "alpha": [...], "beta": [[...], [...]] }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldStepJson {
    #[serde(rename = "K")]
    pub region: Vec<String>,
    pub alpha: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<(Vec<String>, Vec<String>)>,
}

/// Output space of a folding, the parent index of each output configuration
/// with `α` on `K`, and the parent positions of the output sites.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub space: SiteSpace,
    pub parent_index: Vec<usize>,
    pub rest_positions: Vec<usize>,
}

pub fn embedding(space: &SiteSpace, spec: &FoldSpec) -> Result<Embedding> {
    let r = spec.resolve(space)?;
    let m = r.out_space.len();
    let mut values = space.values_of(0);
    for (&pos, &v) in r.k_positions.iter().zip(&r.alpha_values) {
        values[pos] = v;
    }
    let parent_index = (0..1usize << m)
        .map(|j| {
            for (bit, (&pos, &(lo, hi))) in r.rest_positions.iter().zip(&r.pairs).enumerate() {
                // first output site is the most significant bit
                let on = j >> (m - 1 - bit) & 1 == 1;
                values[pos] = if on { hi } else { lo };
            }
            space.index_of(&values)
        })
        .collect();
    Ok(Embedding {
        space: r.out_space,
        parent_index,
        rest_positions: r.rest_positions,
    })
}

/// `P^{K,α,β}`.
pub fn fold(p: &Measure, spec: &FoldSpec) -> Result<Measure> {
    let emb = embedding(p.space(), spec)?;
    let flip = emb.parent_index.len() - 1;
    let masses: Vec<BigUint> = (0..emb.parent_index.len())
        .map(|j| p.mass(emb.parent_index[j]) * p.mass(emb.parent_index[j ^ flip]))
        .collect();
    Measure::from_masses(emb.space, masses).map_err(|e| match e {
        Error::AllZero => Error::FoldingUndefined,
        other => other,
    })
}

/// A sequence of foldings, each applied to the output of the previous one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FoldPath {
    steps: Vec<FoldSpec>,
}

impl FoldPath {
    pub fn new(steps: Vec<FoldSpec>) -> Result<Self> {
        if steps.iter().skip(1).any(|s| s.beta.is_some()) {
            return Err(Error::MalformedFoldSpec("beta is only allowed on the first fold".into()));
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[FoldSpec] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Appends a folding.
    pub fn then(&self, spec: FoldSpec) -> Result<FoldPath> {
        let mut steps = self.steps.clone();
        steps.push(spec);
        FoldPath::new(steps)
    }

    /// Appends `count` foldings with `K = ∅`.
    pub fn then_inessential(&self, count: usize) -> FoldPath {
        let mut steps = self.steps.clone();
        steps.extend(std::iter::repeat_n(FoldSpec::inessential(), count));
        FoldPath { steps }
    }

    /// The complements `(K_1 ∪ … ∪ K_i)^c` along the path.
    pub fn remaining_spaces(&self, space: &SiteSpace) -> Result<Vec<SiteSpace>> {
        let mut out = vec![space.clone()];
        let mut current = space.clone();
        for step in &self.steps {
            current = step.output_space(&current)?;
            out.push(current.clone());
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Vec<FoldStepJson> {
        self.steps.iter().map(FoldSpec::to_json).collect()
    }

    pub fn from_json(space: &SiteSpace, steps: &[FoldStepJson]) -> Result<Self> {
        let mut current = space.clone();
        let mut out = Vec::with_capacity(steps.len());
        for json in steps {
            let spec = FoldSpec::from_json(&current, json)?;
            current = spec.output_space(&current)?;
            out.push(spec);
        }
        Self::new(out)
    }

    pub fn from_json_str(space: &SiteSpace, text: &str) -> Result<Self> {
        let steps: Vec<FoldStepJson> = serde_json::from_str(text)?;
        Self::from_json(space, &steps)
    }
}

/// Applies every step of the path in order.
pub fn fold_path(p: &Measure, path: &FoldPath) -> Result<Measure> {
    path.steps.iter().try_fold(p.clone(), |acc, spec| fold(&acc, spec))
}

/// Moves every nonempty-K fold after the first to the front, keeping their
/// order, and the `K = ∅` folds to the back. Leaves the result unchanged.
pub fn essentialize(path: &FoldPath) -> FoldPath {
    let Some((first, rest)) = path.steps.split_first() else {
        return path.clone();
    };
    let mut steps = vec![first.clone()];
    steps.extend(rest.iter().filter(|s| !s.is_inessential()).cloned());
    steps.extend(rest.iter().filter(|s| s.is_inessential()).cloned());
    FoldPath { steps }
}

/// The limit along a branch whose folds beyond an essential prefix all have
/// `K = ∅`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchLimit {
    /// Measure at the end of the prefix.
    pub prefix_measure: Measure,
    /// Uniform measure on the maxima of `prefix_measure`.
    pub measure: Measure,
    pub argmax_set: Event,
    /// Number of steps in the prefix.
    pub essential_len: usize,
    /// Largest ratio of a non-maximal weight to the maximal weight; zero when
    /// every non-maximal configuration has zero weight.
    pub ratio: BigRational,
    /// `|Ω_Λ|` of the starting space.
    pub omega_size: usize,
}

impl BranchLimit {
    /// `|Ω_Λ| · ratio^{2^{i−L}}`.
    pub fn bound(&self, i: usize) -> Result<BigRational> {
        let steps = check_iterate_index(self.essential_len, i)?;
        let omega = BigRational::from_integer(self.omega_size.into());
        Ok(omega * pow(&self.ratio, 1u64 << steps))
    }
}

fn check_iterate_index(essential_len: usize, i: usize) -> Result<usize> {
    if i <= essential_len {
        return Err(Error::InvalidParams(format!(
            "iterate index {i} must exceed the prefix length {essential_len}"
        )));
    }
    let steps = i - essential_len;
    if steps > 24 {
        return Err(Error::InvalidParams(format!("{steps} inessential folds is too many")));
    }
    Ok(steps)
}

pub fn branch_limit(p: &Measure, essential_prefix: &FoldPath) -> Result<BranchLimit> {
    if essential_prefix.is_empty() {
        return Err(Error::MalformedFoldSpec(
            "a branch prefix must contain at least the first fold".into(),
        ));
    }
    let prefix_measure = fold_path(p, essential_prefix)?;
    limit_of_folded(p.space().num_configs(), essential_prefix.len(), prefix_measure)
}

fn limit_of_folded(omega_size: usize, essential_len: usize, prefix_measure: Measure) -> Result<BranchLimit> {
    let (max, argmax_set) = prefix_measure.argmax();
    let runner_up = prefix_measure
        .masses()
        .iter()
        .filter(|m| **m != max)
        .max()
        .cloned()
        .unwrap_or_else(BigUint::zero);
    let ratio = if runner_up.is_zero() {
        BigRational::zero()
    } else {
        uint_ratio(&runner_up, &max)
    };
    let measure = Measure::uniform_on(&argmax_set)?;
    Ok(BranchLimit {
        prefix_measure,
        measure,
        argmax_set,
        essential_len,
        ratio,
        omega_size,
    })
}

/// Outcome of comparing an iterate against the branch limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceCheck {
    pub distance: BigRational,
    pub bound: BigRational,
    pub ok: bool,
}

/// Compares the `i`-th iterate (the prefix followed by `i − L` folds with
/// `K = ∅`) with the branch limit.
pub fn check_convergence_bound(p: &Measure, prefix: &FoldPath, i: usize) -> Result<ConvergenceCheck> {
    let limit = branch_limit(p, prefix)?;
    check_convergence_against(&limit, i)
}

pub fn check_convergence_against(limit: &BranchLimit, i: usize) -> Result<ConvergenceCheck> {
    let steps = check_iterate_index(limit.essential_len, i)?;
    let mut iterate = limit.prefix_measure.clone();
    for _ in 0..steps {
        iterate = fold(&iterate, &FoldSpec::inessential())?;
    }
    let distance = sup_distance(&iterate, &limit.measure)?;
    let bound = limit.bound(i)?;
    let ok = distance <= bound;
    Ok(ConvergenceCheck { distance, bound, ok })
}

/// An essential prefix together with the measure it folds `P` into.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EssentialBranch {
    pub path: FoldPath,
    pub measure: Measure,
}

impl EssentialBranch {
    pub fn limit(&self, omega_size: usize) -> Result<BranchLimit> {
        limit_of_folded(omega_size, self.path.len(), self.measure.clone())
    }
}

/// Every single folding `(K, α, β)` of a space. For binary complements the
/// canonical `β` is used; otherwise one `β` per unordered symbol pair choice.
pub fn all_foldings(space: &SiteSpace) -> Result<Vec<FoldSpec>> {
    let n = space.len();
    if n >= 32 {
        return Err(Error::CapExceeded {
            what: "sites for folding enumeration",
            got: n,
            cap: 31,
        });
    }
    let mut out = Vec::new();
    for mask in 0..(1u64 << n) {
        let region = space.restrict_mask(mask);
        let rest = space.restrict_mask(space.full_mask() & !mask);
        let betas = beta_choices(&rest)?;
        for a in 0..region.num_configs() {
            let alpha = region.config(a);
            for beta in &betas {
                out.push(FoldSpec::new(alpha.clone(), beta.clone()));
            }
        }
    }
    Ok(out)
}

fn beta_choices(rest: &SiteSpace) -> Result<Vec<Option<BetaPair>>> {
    if rest.is_binary() {
        return Ok(vec![None]);
    }
    if rest.sites().iter().any(|s| s.alphabet.len() < 2) {
        return Ok(Vec::new());
    }
    let mut choices: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new())];
    for site in rest.sites() {
        let r = site.alphabet.len();
        let mut next = Vec::new();
        for (f, s) in &choices {
            for lo in 0..r {
                for hi in lo + 1..r {
                    let mut f = f.clone();
                    let mut s = s.clone();
                    f.push(lo);
                    s.push(hi);
                    next.push((f, s));
                }
            }
        }
        choices = next;
    }
    choices
        .into_iter()
        .map(|(f, s)| {
            Ok(Some(BetaPair::new(
                Config::new(rest.clone(), f)?,
                Config::new(rest.clone(), s)?,
            )?))
        })
        .collect()
}

/// Every defined essential prefix of length `1..=max_len`: a first fold
/// followed by folds with nonempty `K`. Output order is deterministic (depth
/// first, first folds in ascending region-mask order).
pub fn essential_branches(p: &Measure, max_len: usize, cap: usize) -> Result<Vec<EssentialBranch>> {
    let n = p.space().len();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "sites for essential-tree enumeration",
            got: n,
            cap,
        });
    }
    if max_len == 0 {
        return Ok(Vec::new());
    }
    let firsts = all_foldings(p.space())?;
    let groups: Vec<Vec<EssentialBranch>> = firsts
        .into_par_iter()
        .map(|spec| {
            let mut out = Vec::new();
            match fold(p, &spec) {
                Ok(measure) => {
                    let path = FoldPath { steps: vec![spec] };
                    extend_essential(path, measure, max_len, &mut out)?;
                }
                Err(Error::FoldingUndefined) => {}
                Err(e) => return Err(e),
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(groups.into_iter().flatten().collect())
}

fn extend_essential(path: FoldPath, measure: Measure, max_len: usize, out: &mut Vec<EssentialBranch>) -> Result<()> {
    let space = measure.space().clone();
    let len = path.len();
    out.push(EssentialBranch {
        path: path.clone(),
        measure: measure.clone(),
    });
    if len >= max_len {
        return Ok(());
    }
    for mask in 1..=space.full_mask() {
        let region = space.restrict_mask(mask);
        for a in 0..region.num_configs() {
            let spec = FoldSpec::new(region.config(a), None);
            match fold(&measure, &spec) {
                Ok(next) => {
                    let child = path.then(spec)?;
                    extend_essential(child, next, max_len, out)?;
                }
                Err(Error::FoldingUndefined) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

/// The paths of [`essential_branches`].
pub fn enumerate_essential_prefixes(p: &Measure, max_len: usize, cap: usize) -> Result<Vec<FoldPath>> {
    Ok(essential_branches(p, max_len, cap)?
        .into_iter()
        .map(|b| b.path)
        .collect())
}
