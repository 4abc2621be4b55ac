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

//! Random-cluster representations over hyperbonds.
//!
//! A base measure `ν` on bond-state assignments `η = (η_b)_b`, `η_b ⊆ Ω_b`,
//! induces `P(ω) ∝ Σ_{η∼ω} ν(η)` where `η ∼ ω` means `ω_b ∈ η_b` for every
//! bond. Ising models appear with agreement weights `x = e^{2J}` so that the
//! bond probability `p = 1 − 1/x` stays rational.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::Event;
use crate::measure::{sup_distance, Measure};
use crate::rational::{format_ratio, parse_ratio};
use crate::space::{SiteId, SiteSpace};

/// Most edges accepted by [`ising_build`]; the base has one atom per edge subset.
pub const MAX_ISING_EDGES: usize = 16;

/// A space together with its hyperbonds, each a nonempty set of positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HyperbondStructure {
    space: SiteSpace,
    bonds: Vec<Vec<usize>>,
    bond_spaces: Vec<SiteSpace>,
}

impl HyperbondStructure {
    pub fn new(space: SiteSpace, bonds: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(bonds.len());
        for mut b in bonds {
            b.sort_unstable();
            b.dedup();
            if b.is_empty() {
                return Err(Error::InvalidParams("empty hyperbond".into()));
            }
            if let Some(&p) = b.iter().find(|&&p| p >= space.len()) {
                return Err(Error::InvalidParams(format!("bond position {p} out of range")));
            }
            if !seen.insert(b.clone()) {
                return Err(Error::InvalidParams("duplicate hyperbond".into()));
            }
            normalized.push(b);
        }
        let bond_spaces = normalized.iter().map(|b| space.restrict(b)).collect();
        Ok(Self {
            space,
            bonds: normalized,
            bond_spaces,
        })
    }

    /// All pairs `{u, v}` of distinct positions, lexicographically ordered.
    pub fn all_pairs(space: SiteSpace) -> Self {
        let n = space.len();
        let bonds = (0..n).flat_map(|u| (u + 1..n).map(move |v| vec![u, v])).collect();
        Self::new(space, bonds).expect("pairs are distinct and nonempty")
    }

    pub fn space(&self) -> &SiteSpace {
        &self.space
    }

    pub fn bonds(&self) -> &[Vec<usize>] {
        &self.bonds
    }

    pub fn bond_space(&self, b: usize) -> &SiteSpace {
        &self.bond_spaces[b]
    }

    /// Index of `ω|_b` in `Ω_b` for a configuration index of the full space.
    pub fn project(&self, b: usize, omega: usize) -> usize {
        let values = self.space.values_of(omega);
        self.project_values(b, &values)
    }

    fn project_values(&self, b: usize, values: &[usize]) -> usize {
        let sub: Vec<usize> = self.bonds[b].iter().map(|&p| values[p]).collect();
        self.bond_spaces[b].index_of(&sub)
    }

    /// The assignment with `η_b = Ω_b` everywhere.
    pub fn free(&self) -> BondStateAssignment {
        BondStateAssignment {
            states: self.bond_spaces.iter().map(Event::full).collect(),
        }
    }

    fn projections(&self) -> Vec<Vec<usize>> {
        (0..self.space.num_configs())
            .map(|i| {
                let values = self.space.values_of(i);
                (0..self.bonds.len()).map(|b| self.project_values(b, &values)).collect()
            })
            .collect()
    }
}

/// One state `η_b ⊆ Ω_b` per bond, in bond order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BondStateAssignment {
    states: Vec<Event>,
}

impl BondStateAssignment {
    pub fn new(structure: &HyperbondStructure, states: Vec<Event>) -> Result<Self> {
        if states.len() != structure.bonds.len() {
            return Err(Error::InvalidParams(format!(
                "{} bond states for {} bonds",
                states.len(),
                structure.bonds.len()
            )));
        }
        for (state, space) in states.iter().zip(&structure.bond_spaces) {
            if state.space() != space {
                return Err(Error::SpaceMismatch("bond state on the wrong sub-space".into()));
            }
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[Event] {
        &self.states
    }

    pub fn is_active(&self, b: usize) -> bool {
        self.states[b].count() != self.states[b].space().num_configs()
    }

    pub fn active_bonds(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(|&b| self.is_active(b))
    }

    fn compatible_projected(&self, projected: &[usize]) -> bool {
        self.states.iter().zip(projected).all(|(s, &i)| s.contains(i))
    }
}

/// `η ∼ ω`.
pub fn compatible(structure: &HyperbondStructure, eta: &BondStateAssignment, omega: usize) -> bool {
    (0..structure.bonds.len()).all(|b| eta.states[b].contains(structure.project(b, omega)))
}

/// A finitely supported base measure `ν`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcrBase {
    structure: HyperbondStructure,
    atoms: Vec<(BondStateAssignment, BigRational)>,
}

impl RcrBase {
    /// Weights must be positive; they are rescaled to sum to one.
    pub fn new(structure: HyperbondStructure, atoms: Vec<(BondStateAssignment, BigRational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParams("base measure has no atoms".into()));
        }
        let mut seen = HashSet::new();
        let mut total = BigRational::zero();
        for (eta, w) in &atoms {
            if eta.states.len() != structure.bonds.len() {
                return Err(Error::InvalidParams("atom does not match the bonds".into()));
            }
            if *w <= BigRational::zero() {
                return Err(Error::InvalidParams("atom weights must be positive".into()));
            }
            if !seen.insert(eta.clone()) {
                return Err(Error::InvalidParams("duplicate atom".into()));
            }
            total += w;
        }
        let atoms = atoms.into_iter().map(|(eta, w)| (eta, w / &total)).collect();
        Ok(Self { structure, atoms })
    }

    pub fn point_mass(structure: HyperbondStructure, eta: BondStateAssignment) -> Self {
        Self {
            structure,
            atoms: vec![(eta, BigRational::one())],
        }
    }

    pub fn structure(&self) -> &HyperbondStructure {
        &self.structure
    }

    pub fn space(&self) -> &SiteSpace {
        &self.structure.space
    }

    pub fn atoms(&self) -> &[(BondStateAssignment, BigRational)] {
        &self.atoms
    }

    pub fn to_json(&self) -> RcrBaseJson {
        let space = self.space();
        RcrBaseJson {
            sites: space.sites().iter().map(|s| s.name.clone()).collect(),
            alphabets: space.sites().iter().map(|s| s.alphabet.clone()).collect(),
            bonds: self
                .structure
                .bonds
                .iter()
                .map(|b| b.iter().map(|&p| space.sites()[p].name.clone()).collect())
                .collect(),
            atoms: self
                .atoms
                .iter()
                .map(|(eta, w)| AtomJson {
                    weight: format_ratio(w),
                    states: eta
                        .states
                        .iter()
                        .map(|s| s.configs().iter().map(|c| c.to_string()).collect())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &RcrBaseJson) -> Result<Self> {
        let space = SiteSpace::new(json.sites.clone(), json.alphabets.clone())?;
        let bonds = json
            .bonds
            .iter()
            .map(|b| b.iter().map(|name| space.require_position_of_name(name)).collect())
            .collect::<Result<Vec<Vec<usize>>>>()?;
        let structure = HyperbondStructure::new(space, bonds)?;
        let atoms = json
            .atoms
            .iter()
            .map(|a| {
                let states = a
                    .states
                    .iter()
                    .zip(&structure.bond_spaces)
                    .map(|(configs, sub)| {
                        let parsed = configs
                            .iter()
                            .map(|c| sub.parse_config(c))
                            .collect::<Result<Vec<_>>>()?;
                        Event::from_configs(sub, &parsed)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((BondStateAssignment::new(&structure, states)?, parse_ratio(&a.weight)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(structure, atoms)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("base serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RcrBaseJson {
    pub sites: Vec<String>,
    pub alphabets: Vec<Vec<String>>,
    pub bonds: Vec<Vec<String>>,
    pub atoms: Vec<AtomJson>,
}

/// One atom: its weight and, per bond, the configurations in `η_b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomJson {
    pub weight: String,
    pub states: Vec<Vec<String>>,
}

/// `P(ω) ∝ Σ_{η∼ω} ν(η)`.
pub fn induced_measure(nu: &RcrBase) -> Result<Measure> {
    let weights = induced_weights(nu);
    if weights.iter().all(Zero::is_zero) {
        return Err(Error::NoCompatiblePair);
    }
    Measure::normalize(nu.space().clone(), &weights)
}

fn induced_weights(nu: &RcrBase) -> Vec<BigRational> {
    nu.structure
        .projections()
        .iter()
        .map(|proj| {
            nu.atoms
                .iter()
                .filter(|(eta, _)| eta.compatible_projected(proj))
                .map(|(_, w)| w.clone())
                .sum()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcrCheck {
    pub max_dev: BigRational,
    pub ok: bool,
}

/// Sup-distance between `P` and the measure induced by `ν`.
pub fn verify_rcr(p: &Measure, nu: &RcrBase, eps: &BigRational) -> Result<RcrCheck> {
    if p.space() != nu.space() {
        return Err(Error::SpaceMismatch("measure and base live on different spaces".into()));
    }
    let induced = induced_measure(nu)?;
    let max_dev = sup_distance(p, &induced)?;
    let ok = max_dev <= *eps;
    Ok(RcrCheck { max_dev, ok })
}

/// Components of the graph of active bonds; untouched sites are singletons.
/// Each cluster lists site ids in ascending order; clusters are ordered by
/// their smallest id.
pub fn clusters(structure: &HyperbondStructure, eta: &BondStateAssignment) -> Vec<Vec<SiteId>> {
    let n = structure.space.len();
    let mut uf = UnionFind::<usize>::new(n);
    for b in eta.active_bonds() {
        let bond = &structure.bonds[b];
        for w in bond.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let mut groups: BTreeMap<usize, Vec<SiteId>> = BTreeMap::new();
    let labels = uf.into_labeling();
    let mut first_of: BTreeMap<usize, usize> = BTreeMap::new();
    for (pos, &label) in labels.iter().enumerate() {
        let first = *first_of.entry(label).or_insert(pos);
        groups.entry(first).or_default().push(structure.space.sites()[pos].id);
    }
    groups.into_values().collect()
}

pub fn cluster_count(structure: &HyperbondStructure, eta: &BondStateAssignment) -> usize {
    clusters(structure, eta).len()
}

/// Structural properties holding for every atom of a base measure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RcrFlags {
    /// Every `η_b` is closed under reversal.
    pub symmetric: bool,
    /// Every nonempty `η_b` contains the all-ones configuration of `b`.
    pub ferromagnetic: bool,
    /// Every `η_b` is `{01, 10}` or `Ω_b`.
    pub antiferromagnetic: bool,
    /// Active bonds of an atom never share a site.
    pub isolated_edges: bool,
    /// Every bond has at most two sites.
    pub pairwise: bool,
}

pub fn predicates(nu: &RcrBase) -> RcrFlags {
    let st = &nu.structure;
    let binary = st.space.is_binary();
    let pairwise = st.bonds.iter().all(|b| b.len() <= 2);
    let mut flags = RcrFlags {
        symmetric: binary,
        ferromagnetic: binary,
        antiferromagnetic: binary,
        isolated_edges: true,
        pairwise,
    };
    for (eta, _) in &nu.atoms {
        if binary {
            for (b, state) in eta.states.iter().enumerate() {
                let top = state.space().num_configs() - 1;
                if state.bar().map(|s| s != *state).unwrap_or(true) {
                    flags.symmetric = false;
                }
                if !state.is_empty() && !state.contains(top) {
                    flags.ferromagnetic = false;
                }
                if eta.is_active(b) {
                    let anti = st.bonds[b].len() == 2 && state.indices().eq([0b01, 0b10]);
                    if !anti {
                        flags.antiferromagnetic = false;
                    }
                }
            }
        }
        let mut used = vec![false; st.space.len()];
        for b in eta.active_bonds() {
            for &p in &st.bonds[b] {
                if std::mem::replace(&mut used[p], true) {
                    flags.isolated_edges = false;
                }
            }
        }
    }
    flags
}

/// Whether `D` is closed under coordinatewise min and max.
pub fn is_sublattice(d: &Event) -> Result<bool> {
    d.space().require_binary()?;
    let members: Vec<usize> = d.indices().collect();
    Ok(members
        .iter()
        .all(|&a| members.iter().all(|&b| d.contains(a & b) && d.contains(a | b))))
}

/// The point mass on `η̄`, where `η̄_{u,v}` is the diagonal when every `ω ∈ D`
/// agrees on `u` and `v`, and `Ω_{u,v}` otherwise. The induced measure is
/// uniform on `D` whenever `D` is symmetric and its uniform measure is FKG.
pub fn construct_uniform_symmetric_rcr(d: &Event) -> Result<RcrBase> {
    let space = d.space();
    space.require_binary()?;
    if d.is_empty() {
        return Err(Error::PreconditionFailed("D is empty".into()));
    }
    if d.bar()? != *d {
        return Err(Error::PreconditionFailed("D is not symmetric under reversal".into()));
    }
    if !is_sublattice(d)? {
        return Err(Error::PreconditionFailed(
            "the uniform measure on D fails the FKG condition".into(),
        ));
    }
    let n = space.len();
    let structure = HyperbondStructure::all_pairs(space.clone());
    let states = structure
        .bonds
        .iter()
        .zip(&structure.bond_spaces)
        .map(|(b, sub)| {
            let (u, v) = (n - 1 - b[0], n - 1 - b[1]);
            let tied = d.indices().all(|w| (w >> u & 1) == (w >> v & 1));
            if tied {
                Event::from_indices(sub, [0b00, 0b11])
            } else {
                Event::full(sub)
            }
        })
        .collect();
    let eta = BondStateAssignment::new(&structure, states)?;
    Ok(RcrBase::point_mass(structure, eta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SublatticeFlags {
    pub sublattice: bool,
    pub symmetric: bool,
    /// `L` is nonempty and for all distinct sites `u, v` some `ω ∈ L` has
    /// `ω_u ≠ ω_v`.
    pub separates_points: bool,
    pub equals_full: bool,
}

impl SublatticeFlags {
    /// A symmetric sublattice separating points is the whole cube.
    pub fn conclusion_holds(&self) -> bool {
        !(self.sublattice && self.symmetric && self.separates_points) || self.equals_full
    }
}

pub fn check_sublattice(l: &Event) -> Result<SublatticeFlags> {
    let space = l.space();
    space.require_binary()?;
    let n = space.len();
    let separates_points = !l.is_empty()
        && (0..n).all(|u| {
            (u + 1..n).all(|v| l.indices().any(|w| (w >> u & 1) != (w >> v & 1)))
        });
    Ok(SublatticeFlags {
        sublattice: is_sublattice(l)?,
        symmetric: l.bar()? == *l,
        separates_points,
        equals_full: l.count() == space.num_configs(),
    })
}

/// Maximal matchings of the complete graph on `n` vertices (perfect when `n`
/// is even, missing one vertex when odd), as lists of pairs.
pub fn complete_pairings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(free: &[usize], current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.len() <= 1 {
            out.push(current.clone());
            return;
        }
        let rest = &free[1..];
        if free.len() % 2 == 1 {
            // the first free vertex may be the one left out
            go(rest, current, out);
        }
        for (i, &v) in rest.iter().enumerate() {
            current.push((free[0], v));
            let remaining: Vec<usize> = rest.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &w)| w).collect();
            go(&remaining, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    let free: Vec<usize> = (0..n).collect();
    go(&free, &mut Vec::new(), &mut out);
    out
}

/// Uniform mixture over maximal matchings, matched pairs in state `{01, 10}`.
pub fn complete_pairing_base(space: &SiteSpace) -> Result<RcrBase> {
    space.require_binary()?;
    let structure = HyperbondStructure::all_pairs(space.clone());
    let index: BTreeMap<(usize, usize), usize> = structure
        .bonds
        .iter()
        .enumerate()
        .map(|(i, b)| ((b[0], b[1]), i))
        .collect();
    let atoms = complete_pairings(space.len())
        .into_iter()
        .map(|matching| {
            let mut states: Vec<Event> = structure.bond_spaces.iter().map(Event::full).collect();
            for pair in matching {
                let b = index[&pair];
                states[b] = Event::from_indices(&structure.bond_spaces[b], [0b01, 0b10]);
            }
            let eta = BondStateAssignment::new(&structure, states)?;
            Ok((eta, BigRational::one()))
        })
        .collect::<Result<Vec<_>>>()?;
    RcrBase::new(structure, atoms)
}

/// Ising model on a simple graph with agreement weights `x_e = e^{2J_e}` and
/// field weights `h_i = e^{2h_i}` on spin `1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsingSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, usize, BigRational)>,
    pub fields: Vec<BigRational>,
}

impl IsingSpec {
    /// Zero-field model.
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize, BigRational)>) -> Result<Self> {
        let fields = vec![BigRational::one(); vertices.len()];
        let spec = Self {
            vertices,
            edges,
            fields,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Vertices named `1..=n`.
    pub fn numbered(n: usize, edges: Vec<(usize, usize, BigRational)>) -> Result<Self> {
        Self::new((1..=n).map(|i| i.to_string()).collect(), edges)
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.fields.len() != n {
            return Err(Error::InvalidParams("one field weight per vertex".into()));
        }
        let mut seen = HashSet::new();
        for (u, v, x) in &self.edges {
            if *u >= n || *v >= n || u == v {
                return Err(Error::InvalidParams(format!("bad edge ({u}, {v})")));
            }
            if !seen.insert((*u.min(v), *u.max(v))) {
                return Err(Error::InvalidParams(format!("repeated edge ({u}, {v})")));
            }
            if *x <= BigRational::zero() {
                return Err(Error::InvalidParams("edge weights must be positive".into()));
            }
        }
        if self.fields.iter().any(|h| *h <= BigRational::zero()) {
            return Err(Error::InvalidParams("field weights must be positive".into()));
        }
        Ok(())
    }

    pub fn space(&self) -> SiteSpace {
        let n = self.vertices.len();
        SiteSpace::new(self.vertices.clone(), vec![vec!["0".into(), "1".into()]; n])
            .expect("vertex names are validated by the caller")
    }

    /// The same graph with every `x_e` squared (doubled coupling).
    pub fn doubled(&self) -> Self {
        Self {
            vertices: self.vertices.clone(),
            edges: self.edges.iter().map(|(u, v, x)| (*u, *v, x * x)).collect(),
            fields: self.fields.iter().map(|h| h * h).collect(),
        }
    }

    pub fn to_json(&self) -> IsingSpecJson {
        let fields = self
            .fields
            .iter()
            .zip(&self.vertices)
            .filter(|(h, _)| !h.is_one())
            .map(|(h, v)| (v.clone(), format_ratio(h)))
            .collect();
        IsingSpecJson {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|(u, v, x)| (self.vertices[*u].clone(), self.vertices[*v].clone(), format_ratio(x)))
                .collect(),
            fields,
        }
    }

    pub fn from_json(json: &IsingSpecJson) -> Result<Self> {
        let lookup = |name: &str| {
            json.vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::Parse(format!("unknown vertex `{name}`")))
        };
        let edges = json
            .edges
            .iter()
            .map(|(u, v, x)| Ok((lookup(u)?, lookup(v)?, parse_ratio(x)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut fields = vec![BigRational::one(); json.vertices.len()];
        for (name, h) in &json.fields {
            fields[lookup(name)?] = parse_ratio(h)?;
        }
        let spec = Self {
            vertices: json.vertices.clone(),
            edges,
            fields,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsingSpecJson {
    pub vertices: Vec<String>,
    /// `[u, v, "x"]` with `x = e^{2J}`.
    pub edges: Vec<(String, String, String)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, String>,
}

/// `P(ω) ∝ ∏_e x_e^{[ω_u = ω_v]} ∏_i h_i^{ω_i}`. Any positive weights.
pub fn ising_measure(spec: &IsingSpec) -> Result<Measure> {
    spec.validate()?;
    let space = spec.space();
    let n = space.len();
    let weights: Vec<BigRational> = (0..space.num_configs())
        .map(|w| {
            let spin = |i: usize| w >> (n - 1 - i) & 1;
            let mut weight = BigRational::one();
            for (u, v, x) in &spec.edges {
                if spin(*u) == spin(*v) {
                    weight *= x;
                }
            }
            for (i, h) in spec.fields.iter().enumerate() {
                if spin(i) == 1 {
                    weight *= h;
                }
            }
            weight
        })
        .collect();
    Measure::normalize(space, &weights)
}

/// A zero-field Ising measure with its random-cluster base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsingModel {
    pub measure: Measure,
    pub base: RcrBase,
    /// `p_e = 1 − 1/x_e` per edge.
    pub bond_probabilities: Vec<BigRational>,
    /// Whether `ν(η)·2^{Cl(η)}` matches the `η`-marginal of the joint measure.
    pub fk_marginal_matches: bool,
}

/// Builds the Ising measure and the product base with `ν_e(diagonal) = p_e`,
/// `ν_e(Ω_e) = 1 − p_e`. Requires zero field and `x_e ≥ 1`.
pub fn ising_build(spec: &IsingSpec) -> Result<IsingModel> {
    spec.validate()?;
    if spec.fields.iter().any(|h| !h.is_one()) {
        return Err(Error::PreconditionFailed(
            "the random-cluster representation needs zero field".into(),
        ));
    }
    if spec.edges.iter().any(|(_, _, x)| *x < BigRational::one()) {
        return Err(Error::PreconditionFailed(
            "the random-cluster representation needs x_e >= 1".into(),
        ));
    }
    if spec.edges.len() > MAX_ISING_EDGES {
        return Err(Error::CapExceeded {
            what: "Ising edges",
            got: spec.edges.len(),
            cap: MAX_ISING_EDGES,
        });
    }
    let measure = ising_measure(spec)?;
    let space = spec.space();
    let structure = HyperbondStructure::new(space, spec.edges.iter().map(|(u, v, _)| vec![*u, *v]).collect())?;
    let probs: Vec<BigRational> = spec
        .edges
        .iter()
        .map(|(_, _, x)| BigRational::one() - x.recip())
        .collect();
    let m = spec.edges.len();
    let mut atoms = Vec::new();
    for open in 0..(1usize << m) {
        let mut weight = BigRational::one();
        let mut states = Vec::with_capacity(m);
        for (e, p) in probs.iter().enumerate() {
            let sub = structure.bond_space(e);
            if open >> e & 1 == 1 {
                weight *= p;
                states.push(Event::from_indices(sub, [0b00, 0b11]));
            } else {
                weight *= BigRational::one() - p;
                states.push(Event::full(sub));
            }
        }
        if !weight.is_zero() {
            atoms.push((BondStateAssignment::new(&structure, states)?, weight));
        }
    }
    let base = RcrBase::new(structure, atoms)?;
    let fk_marginal_matches = fk_marginal(&base) == eta_marginal(&base);
    Ok(IsingModel {
        measure,
        base,
        bond_probabilities: probs,
        fk_marginal_matches,
    })
}

/// `φ(η) ∝ ν(η) · 2^{Cl(η)}`, aligned with the atoms of `ν`.
pub fn fk_marginal(nu: &RcrBase) -> Vec<BigRational> {
    let raw: Vec<BigRational> = nu
        .atoms
        .iter()
        .map(|(eta, w)| w * pow2(cluster_count(&nu.structure, eta)))
        .collect();
    normalized(raw)
}

/// `η`-marginal of the joint measure `Q(η, ω) ∝ ν(η) [η ∼ ω]`.
pub fn eta_marginal(nu: &RcrBase) -> Vec<BigRational> {
    let projections = nu.structure.projections();
    let raw: Vec<BigRational> = nu
        .atoms
        .iter()
        .map(|(eta, w)| {
            let count = projections.iter().filter(|p| eta.compatible_projected(p)).count();
            w * BigRational::from_integer(count.into())
        })
        .collect();
    normalized(raw)
}

fn pow2(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::one() << k)
}

fn normalized(raw: Vec<BigRational>) -> Vec<BigRational> {
    let total: BigRational = raw.iter().sum();
    if total.is_zero() {
        return raw;
    }
    raw.into_iter().map(|w| w / &total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folding::{fold, FoldSpec};
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn edge(space: &SiteSpace) -> HyperbondStructure {
        HyperbondStructure::new(space.clone(), vec![vec![0, 1]]).unwrap()
    }

    fn state(st: &HyperbondStructure, b: usize, configs: &str) -> Event {
        Event::parse_configs(st.bond_space(b), configs).unwrap()
    }

    fn single(st: &HyperbondStructure, configs: &str) -> BondStateAssignment {
        BondStateAssignment::new(st, vec![state(st, 0, configs)]).unwrap()
    }

    fn probs(m: &Measure) -> Vec<BigRational> {
        m.probs()
    }

    fn rats(v: &[(i64, i64)]) -> Vec<BigRational> {
        v.iter().map(|&(n, d)| ratio(n, d)).collect()
    }

    fn two_site_ising_base() -> RcrBase {
        let st = edge(&SiteSpace::binary(2));
        let diag = single(&st, "00,11");
        let free = st.free();
        RcrBase::new(st, vec![(diag, ratio(1, 2)), (free, ratio(1, 2))]).unwrap()
    }

    #[test]
    fn compatibility() {
        let space = SiteSpace::binary(2);
        let st = edge(&space);
        assert!((0..4).all(|w| compatible(&st, &st.free(), w)));
        assert!(!compatible(&st, &single(&st, "00,11"), 0b01));
        assert!(compatible(&st, &single(&st, "01,10"), 0b10));
        assert!(!(0..4).any(|w| compatible(&st, &single(&st, ""), w)));
    }

    #[test]
    fn induced_examples() {
        let p = induced_measure(&two_site_ising_base()).unwrap();
        assert_eq!(probs(&p), rats(&[(1, 3), (1, 6), (1, 6), (1, 3)]));

        let st = edge(&SiteSpace::binary(2));
        let free = RcrBase::point_mass(st.clone(), st.free());
        assert_eq!(induced_measure(&free).unwrap(), Measure::uniform(SiteSpace::binary(2)));

        let diag = RcrBase::point_mass(st.clone(), single(&st, "00,11"));
        assert_eq!(probs(&induced_measure(&diag).unwrap()), rats(&[(1, 2), (0, 1), (0, 1), (1, 2)]));

        let empty = RcrBase::point_mass(st.clone(), single(&st, ""));
        assert!(matches!(induced_measure(&empty), Err(Error::NoCompatiblePair)));
    }

    #[test]
    fn verify_examples() {
        let nu = two_site_ising_base();
        let ising = Measure::from_u64(SiteSpace::binary(2), &[2, 1, 1, 2]).unwrap();
        let check = verify_rcr(&ising, &nu, &ratio(0, 1)).unwrap();
        assert_eq!(check.max_dev, ratio(0, 1));
        assert!(check.ok);

        let st = edge(&SiteSpace::binary(2));
        let free = RcrBase::point_mass(st.clone(), st.free());
        let p = Measure::from_u64(SiteSpace::binary(2), &[4, 1, 2, 3]).unwrap();
        let check = verify_rcr(&p, &free, &ratio(1, 10)).unwrap();
        assert_eq!(check.max_dev, ratio(3, 20));
        assert!(!check.ok);
        assert!(verify_rcr(&p, &free, &ratio(3, 20)).unwrap().ok);

        let other = Measure::uniform(SiteSpace::binary(3));
        assert!(verify_rcr(&other, &free, &ratio(1, 1)).is_err());
    }

    #[test]
    fn cluster_examples() {
        let space = SiteSpace::binary(3);
        let st = HyperbondStructure::new(space, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let full = |b| Event::full(st.bond_space(b));
        let diag = |b| state(&st, b, "00,11");
        let none = BondStateAssignment::new(&st, vec![full(0), full(1)]).unwrap();
        assert_eq!(clusters(&st, &none), vec![vec![0], vec![1], vec![2]]);
        let one = BondStateAssignment::new(&st, vec![diag(0), full(1)]).unwrap();
        assert_eq!(clusters(&st, &one), vec![vec![0, 1], vec![2]]);
        let both = BondStateAssignment::new(&st, vec![diag(0), diag(1)]).unwrap();
        assert_eq!(clusters(&st, &both), vec![vec![0, 1, 2]]);
        assert_eq!(cluster_count(&st, &both), 1);
    }

    #[test]
    fn predicate_examples() {
        let flags = predicates(&two_site_ising_base());
        assert!(flags.symmetric && flags.ferromagnetic && flags.pairwise);
        assert!(!flags.antiferromagnetic);

        let st = edge(&SiteSpace::binary(2));
        let anti = RcrBase::point_mass(st.clone(), single(&st, "01,10"));
        let flags = predicates(&anti);
        assert!(flags.symmetric && flags.antiferromagnetic && flags.isolated_edges && flags.pairwise);
        assert!(!flags.ferromagnetic);

        let space = SiteSpace::binary(3);
        let st = HyperbondStructure::new(space, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let eta = BondStateAssignment::new(&st, vec![state(&st, 0, "01,10"), state(&st, 1, "01,10")]).unwrap();
        assert!(!predicates(&RcrBase::point_mass(st, eta)).isolated_edges);

        let st = HyperbondStructure::new(SiteSpace::binary(3), vec![vec![0, 1, 2]]).unwrap();
        assert!(!predicates(&RcrBase::point_mass(st.clone(), st.free())).pairwise);
    }

    #[test]
    fn construction_examples() {
        let s2 = SiteSpace::binary(2);
        let d = Event::parse_configs(&s2, "00,11").unwrap();
        let nu = construct_uniform_symmetric_rcr(&d).unwrap();
        assert_eq!(nu.atoms()[0].0.states()[0], Event::parse_configs(nu.structure().bond_space(0), "00,11").unwrap());
        assert_eq!(induced_measure(&nu).unwrap(), Measure::uniform_on(&d).unwrap());

        let full = Event::full(&s2);
        let nu = construct_uniform_symmetric_rcr(&full).unwrap();
        assert!(!nu.atoms()[0].0.is_active(0));
        assert_eq!(induced_measure(&nu).unwrap(), Measure::uniform(s2.clone()));

        let s3 = SiteSpace::binary(3);
        let d = Event::parse_configs(&s3, "000,111,110,001").unwrap();
        let nu = construct_uniform_symmetric_rcr(&d).unwrap();
        let active: Vec<usize> = nu.atoms()[0].0.active_bonds().collect();
        assert_eq!(nu.structure().bonds()[active[0]], vec![0, 1]);
        assert_eq!(active.len(), 1);
        assert!(verify_rcr(&Measure::uniform_on(&d).unwrap(), &nu, &ratio(0, 1)).unwrap().ok);

        let asym = Event::parse_configs(&s2, "00,01").unwrap();
        assert!(matches!(construct_uniform_symmetric_rcr(&asym), Err(Error::PreconditionFailed(_))));
        let non_lattice = Event::parse_configs(&s2, "01,10").unwrap();
        assert!(matches!(construct_uniform_symmetric_rcr(&non_lattice), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn construction_exhaustive() {
        for n in 1..=4 {
            let space = SiteSpace::binary(n);
            let size = 1usize << n;
            let mut valid = 0;
            for mask in 1u64..(1u64 << size) {
                let d = Event::from_mask(&space, mask);
                if d.bar().unwrap() != d || !is_sublattice(&d).unwrap() {
                    continue;
                }
                valid += 1;
                let nu = construct_uniform_symmetric_rcr(&d).unwrap();
                let flags = predicates(&nu);
                assert!(flags.symmetric && flags.ferromagnetic);
                assert!(verify_rcr(&Measure::uniform_on(&d).unwrap(), &nu, &ratio(0, 1)).unwrap().ok);
            }
            // symmetric sublattices containing 0..0 correspond to partitions of the sites
            assert_eq!(valid, [1, 2, 5, 15][n - 1]);
        }
    }

    #[test]
    fn sublattice_examples() {
        let s2 = SiteSpace::binary(2);
        let flags = check_sublattice(&Event::parse_configs(&s2, "00,11").unwrap()).unwrap();
        assert!(flags.sublattice && flags.symmetric && !flags.separates_points);
        let flags = check_sublattice(&Event::full(&s2)).unwrap();
        assert!(flags.sublattice && flags.symmetric && flags.separates_points && flags.equals_full);
        for m in 0..=4 {
            let space = SiteSpace::binary(m);
            for mask in 0u64..(1u64 << (1usize << m)) {
                let flags = check_sublattice(&Event::from_mask(&space, mask)).unwrap();
                assert!(flags.conclusion_holds(), "m = {m}, L = {mask:#x}");
            }
        }
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(
            (0..=6).map(|n| complete_pairings(n).len()).collect::<Vec<_>>(),
            vec![1, 1, 1, 3, 3, 15, 15]
        );
        let nu = complete_pairing_base(&SiteSpace::binary(2)).unwrap();
        assert_eq!(nu.atoms().len(), 1);
        let d = Event::parse_configs(nu.space(), "01,10").unwrap();
        assert_eq!(induced_measure(&nu).unwrap(), Measure::uniform_on(&d).unwrap());
        for n in 0..=6 {
            let space = SiteSpace::binary(n);
            let nu = complete_pairing_base(&space).unwrap();
            let flags = predicates(&nu);
            assert!(flags.antiferromagnetic && flags.isolated_edges && flags.symmetric);
            // balanced: 2|ω| is within one of n
            let balanced = Event::from_predicate(&space, |w| (2 * w.count_ones() as i64 - n as i64).abs() <= 1);
            assert_eq!(induced_measure(&nu).unwrap(), Measure::uniform_on(&balanced).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn ising_examples() {
        let spec = IsingSpec::numbered(2, vec![(0, 1, ratio(2, 1))]).unwrap();
        let model = ising_build(&spec).unwrap();
        assert_eq!(probs(&model.measure), rats(&[(1, 3), (1, 6), (1, 6), (1, 3)]));
        assert_eq!(model.bond_probabilities, vec![ratio(1, 2)]);
        let atoms: HashSet<_> = model.base.atoms().iter().cloned().collect();
        let expected: HashSet<_> = two_site_ising_base().atoms().iter().cloned().collect();
        assert_eq!(atoms, expected);
        assert!(model.fk_marginal_matches);

        let spec = IsingSpec::numbered(2, vec![(0, 1, ratio(1, 1))]).unwrap();
        let model = ising_build(&spec).unwrap();
        assert_eq!(model.measure, Measure::uniform(SiteSpace::binary(2)));
        assert_eq!(model.base.atoms().len(), 1);
        assert!(!model.base.atoms()[0].0.is_active(0));

        let triangle = IsingSpec::numbered(3, vec![(0, 1, ratio(2, 1)), (1, 2, ratio(2, 1)), (0, 2, ratio(2, 1))]).unwrap();
        let model = ising_build(&triangle).unwrap();
        assert!(verify_rcr(&model.measure, &model.base, &ratio(0, 1)).unwrap().ok);
        assert!(model.fk_marginal_matches);
        let folded = fold(&model.measure, &FoldSpec::inessential()).unwrap();
        assert_eq!(folded, ising_build(&triangle.doubled()).unwrap().measure);

        let weak = IsingSpec::numbered(2, vec![(0, 1, ratio(1, 2))]).unwrap();
        assert!(matches!(ising_build(&weak), Err(Error::PreconditionFailed(_))));
        assert!(ising_measure(&weak).is_ok());
        let mut field = spec.clone();
        field.fields[0] = ratio(3, 1);
        assert!(matches!(ising_build(&field), Err(Error::PreconditionFailed(_))));
        assert!(IsingSpec::numbered(2, vec![(0, 0, ratio(2, 1))]).is_err());
        assert!(IsingSpec::numbered(2, vec![(0, 1, ratio(2, 1)), (1, 0, ratio(3, 1))]).is_err());
    }

    #[test]
    fn json_round_trips() {
        let nu = complete_pairing_base(&SiteSpace::binary(4)).unwrap();
        assert_eq!(RcrBase::from_json_str(&nu.to_json_string()).unwrap(), nu);
        let text = r#"{"vertices":["a","b","c"],"edges":[["a","b","2"],["b","c","5/2"]],"fields":{"c":"3"}}"#;
        let spec = IsingSpec::from_json_str(text).unwrap();
        assert_eq!(spec.edges[1], (1, 2, ratio(5, 2)));
        assert_eq!(spec.fields[2], ratio(3, 1));
        let back = serde_json::to_string(&spec.to_json()).unwrap();
        assert_eq!(IsingSpec::from_json_str(&back).unwrap(), spec);
    }

    fn symmetric_pair_state() -> impl Strategy<Value = &'static str> {
        prop_oneof![Just("00,11"), Just("01,10"), Just("00,01,10,11")]
    }

    proptest! {
        #[test]
        fn symmetric_bases_induce_symmetric_measures(
            atoms in proptest::collection::vec((proptest::collection::vec(symmetric_pair_state(), 3), 1i64..10), 1..5)
        ) {
            let st = HyperbondStructure::all_pairs(SiteSpace::binary(3));
            let mut seen = HashSet::new();
            let list: Vec<_> = atoms
                .into_iter()
                .filter(|(s, _)| seen.insert(s.clone()))
                .map(|(s, w)| {
                    let states = s.iter().enumerate().map(|(b, c)| state(&st, b, c)).collect();
                    (BondStateAssignment::new(&st, states).unwrap(), ratio(w, 1))
                })
                .collect();
            let nu = RcrBase::new(st, list).unwrap();
            if let Ok(p) = induced_measure(&nu) {
                prop_assert!(p.is_reversal_symmetric());
            }
        }

        #[test]
        fn ferromagnetic_bases_peak_at_top(
            atoms in proptest::collection::vec((proptest::collection::vec(prop_oneof![Just("11"), Just("00,11"), Just("01,11"), Just("00,01,10,11")], 3), 1i64..10), 1..5)
        ) {
            let st = HyperbondStructure::all_pairs(SiteSpace::binary(3));
            let mut seen = HashSet::new();
            let list: Vec<_> = atoms
                .into_iter()
                .filter(|(s, _)| seen.insert(s.clone()))
                .map(|(s, w)| {
                    let states = s.iter().enumerate().map(|(b, c)| state(&st, b, c)).collect();
                    (BondStateAssignment::new(&st, states).unwrap(), ratio(w, 1))
                })
                .collect();
            let nu = RcrBase::new(st, list).unwrap();
            prop_assert!(predicates(&nu).ferromagnetic);
            let p = induced_measure(&nu).unwrap();
            let top = p.mass(7);
            prop_assert!(p.masses().iter().all(|m| m <= top));
        }
    }
}
