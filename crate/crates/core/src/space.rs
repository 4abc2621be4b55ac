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

//! Finite product spaces and configurations over them.
//!
//! A [`SiteSpace`] is an ordered list of sites, each with a finite ordered
//! alphabet. Sites carry a stable [`SiteId`] so that sub-spaces produced by
//! restriction (for example the complement of a folded region) can be
//! recombined with [`concat`]. Configurations are indexed in mixed radix with
//! the first site most significant, so on binary spaces the index of a
//! configuration reads as its bit string.

use std::fmt;

use crate::error::{Error, Result};

pub type SiteId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub id: SiteId,
    pub name: String,
    pub alphabet: Vec<String>,
}

/// An ordered collection of sites sorted by id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteSpace {
    sites: Vec<Site>,
}

impl SiteSpace {
    /// Builds a space, assigning ids `0..n` in the given order.
    pub fn new(names: Vec<String>, alphabets: Vec<Vec<String>>) -> Result<Self> {
        if names.len() != alphabets.len() {
            return Err(Error::Parse(format!(
                "{} sites but {} alphabets",
                names.len(),
                alphabets.len()
            )));
        }
        let sites = names
            .into_iter()
            .zip(alphabets)
            .enumerate()
            .map(|(id, (name, alphabet))| Site {
                id: id as SiteId,
                name,
                alphabet,
            })
            .collect();
        Self::from_sites(sites)
    }

    pub fn from_sites(mut sites: Vec<Site>) -> Result<Self> {
        sites.sort_by_key(|s| s.id);
        for (i, site) in sites.iter().enumerate() {
            if site.alphabet.is_empty() {
                return Err(Error::Parse(format!("site `{}` has an empty alphabet", site.name)));
            }
            for (j, sym) in site.alphabet.iter().enumerate() {
                if site.alphabet[..j].contains(sym) {
                    return Err(Error::Parse(format!(
                        "site `{}` repeats symbol `{sym}`",
                        site.name
                    )));
                }
            }
            if sites[..i].iter().any(|o| o.id == site.id || o.name == site.name) {
                return Err(Error::Parse(format!("duplicate site `{}`", site.name)));
            }
        }
        Ok(Self { sites })
    }

    /// `n` binary sites named `1..=n` with alphabet `{0, 1}`.
    pub fn binary(n: usize) -> Self {
        let names = (1..=n).map(|i| i.to_string()).collect();
        let alphabets = vec![vec!["0".to_string(), "1".to_string()]; n];
        Self::new(names, alphabets).expect("binary space is well formed")
    }

    pub fn empty() -> Self {
        Self { sites: Vec::new() }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn ids(&self) -> Vec<SiteId> {
        self.sites.iter().map(|s| s.id).collect()
    }

    pub fn radix(&self, pos: usize) -> usize {
        self.sites[pos].alphabet.len()
    }

    /// Number of configurations `|Ω|`.
    pub fn num_configs(&self) -> usize {
        self.sites.iter().map(|s| s.alphabet.len()).product()
    }

    /// True when every alphabet has exactly two symbols.
    pub fn is_binary(&self) -> bool {
        self.sites.iter().all(|s| s.alphabet.len() == 2)
    }

    pub fn require_binary(&self) -> Result<()> {
        match self.sites.iter().find(|s| s.alphabet.len() != 2) {
            Some(site) => Err(Error::NonBinaryAlphabet(site.name.clone())),
            None => Ok(()),
        }
    }

    pub fn position(&self, id: SiteId) -> Option<usize> {
        self.sites.binary_search_by_key(&id, |s| s.id).ok()
    }

    pub fn position_of_name(&self, name: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.name == name)
    }

    pub fn require_position_of_name(&self, name: &str) -> Result<usize> {
        self.position_of_name(name)
            .ok_or_else(|| Error::Parse(format!("unknown site `{name}`")))
    }

    /// Sub-space on the given positions (in any order).
    pub fn restrict(&self, positions: &[usize]) -> SiteSpace {
        let mut sites: Vec<Site> = positions.iter().map(|&p| self.sites[p].clone()).collect();
        sites.sort_by_key(|s| s.id);
        SiteSpace { sites }
    }

    /// Sub-space on the positions set in `mask` (bit `p` selects position `p`).
    pub fn restrict_mask(&self, mask: u64) -> SiteSpace {
        let positions: Vec<usize> = (0..self.len()).filter(|p| mask >> p & 1 == 1).collect();
        self.restrict(&positions)
    }

    /// Union of two spaces on disjoint site ids.
    pub fn union(&self, other: &SiteSpace) -> Result<SiteSpace> {
        if self.sites.iter().any(|s| other.position(s.id).is_some()) {
            return Err(Error::OverlappingDomains);
        }
        let mut sites = self.sites.clone();
        sites.extend(other.sites.iter().cloned());
        SiteSpace::from_sites(sites)
    }

    /// Mixed-radix index of a value vector, first site most significant.
    pub fn index_of(&self, values: &[usize]) -> usize {
        debug_assert_eq!(values.len(), self.len());
        values
            .iter()
            .zip(&self.sites)
            .fold(0, |acc, (&v, s)| acc * s.alphabet.len() + v)
    }

    pub fn values_of(&self, mut index: usize) -> Vec<usize> {
        let mut values = vec![0; self.len()];
        for (pos, site) in self.sites.iter().enumerate().rev() {
            let r = site.alphabet.len();
            values[pos] = index % r;
            index /= r;
        }
        values
    }

    pub fn config(&self, index: usize) -> Config {
        Config {
            space: self.clone(),
            values: self.values_of(index),
        }
    }

    pub fn configs(&self) -> impl Iterator<Item = Config> + '_ {
        (0..self.num_configs()).map(move |i| self.config(i))
    }

    /// Parses a configuration written either as concatenated single-character
    /// symbols (`"101"`) or as symbols separated by `.` (`"a.b.c"`).
    pub fn parse_config(&self, text: &str) -> Result<Config> {
        let tokens: Vec<String> = if text.contains('.') {
            text.split('.').map(str::to_string).collect()
        } else {
            text.chars().map(|c| c.to_string()).collect()
        };
        self.config_from_symbols(&tokens)
    }

    pub fn config_from_symbols<S: AsRef<str>>(&self, symbols: &[S]) -> Result<Config> {
        if symbols.len() != self.len() {
            return Err(Error::Parse(format!(
                "expected {} symbols, got {}",
                self.len(),
                symbols.len()
            )));
        }
        let values = symbols
            .iter()
            .zip(&self.sites)
            .map(|(sym, site)| {
                site.alphabet
                    .iter()
                    .position(|a| a == sym.as_ref())
                    .ok_or_else(|| {
                        Error::Parse(format!(
                            "symbol `{}` not in alphabet of site `{}`",
                            sym.as_ref(),
                            site.name
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Config {
            space: self.clone(),
            values,
        })
    }

    /// Bitmask with every position set.
    pub fn full_mask(&self) -> u64 {
        if self.len() >= 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }
}

/// Assignment of one symbol (by alphabet index) to every site of a space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    space: SiteSpace,
    values: Vec<usize>,
}

impl Config {
    pub fn new(space: SiteSpace, values: Vec<usize>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Parse(format!(
                "expected {} values, got {}",
                space.len(),
                values.len()
            )));
        }
        for (v, site) in values.iter().zip(space.sites()) {
            if *v >= site.alphabet.len() {
                return Err(Error::Parse(format!(
                    "value {v} out of range for site `{}`",
                    site.name
                )));
            }
        }
        Ok(Self { space, values })
    }

    /// The empty assignment on the empty space.
    pub fn empty() -> Self {
        Self {
            space: SiteSpace::empty(),
            values: Vec::new(),
        }
    }

    pub fn space(&self) -> &SiteSpace {
        &self.space
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn index(&self) -> usize {
        self.space.index_of(&self.values)
    }

    pub fn value_at(&self, id: SiteId) -> Option<usize> {
        self.space.position(id).map(|p| self.values[p])
    }

    pub fn symbols(&self) -> Vec<String> {
        self.values
            .iter()
            .zip(self.space.sites())
            .map(|(&v, s)| s.alphabet[v].clone())
            .collect()
    }

    /// Restriction to the sites with the given ids.
    pub fn restrict_ids(&self, ids: &[SiteId]) -> Result<Config> {
        let positions = ids
            .iter()
            .map(|&id| {
                self.space
                    .position(id)
                    .ok_or_else(|| Error::SpaceMismatch(format!("site id {id} not in space")))
            })
            .collect::<Result<Vec<_>>>()?;
        let space = self.space.restrict(&positions);
        let values = space
            .sites()
            .iter()
            .map(|s| self.values[self.space.position(s.id).unwrap()])
            .collect();
        Ok(Config { space, values })
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let symbols = self.symbols();
        if symbols.iter().all(|s| s.chars().count() == 1) {
            write!(f, "{}", symbols.concat())
        } else {
            write!(f, "{}", symbols.join("."))
        }
    }
}

/// Concatenation `ω(1)ω(2)` of configurations on disjoint site sets.
pub fn concat(a: &Config, b: &Config) -> Result<Config> {
    let space = a.space.union(&b.space)?;
    let values = space
        .sites()
        .iter()
        .map(|s| a.value_at(s.id).or_else(|| b.value_at(s.id)).unwrap())
        .collect();
    Ok(Config { space, values })
}

/// Two pointwise-distinct configurations on the same space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BetaPair {
    pub first: Config,
    pub second: Config,
}

impl BetaPair {
    pub fn new(first: Config, second: Config) -> Result<Self> {
        if first.space != second.space {
            return Err(Error::SpaceMismatch("beta components on different spaces".into()));
        }
        if let Some(site) = first
            .values
            .iter()
            .zip(&second.values)
            .zip(first.space.sites())
            .find_map(|((a, b), s)| (a == b).then_some(s))
        {
            return Err(Error::MalformedFoldSpec(format!(
                "beta components agree at site `{}`",
                site.name
            )));
        }
        Ok(Self { first, second })
    }

    /// Symbols 0 and 1 at every site; requires alphabets of size at least two.
    pub fn canonical(space: &SiteSpace) -> Result<Self> {
        if let Some(site) = space.sites().iter().find(|s| s.alphabet.len() < 2) {
            return Err(Error::MalformedFoldSpec(format!(
                "site `{}` has a single symbol and cannot be folded",
                site.name
            )));
        }
        Self::new(
            Config::new(space.clone(), vec![0; space.len()])?,
            Config::new(space.clone(), vec![1; space.len()])?,
        )
    }

    /// Whether each coordinate pair is in increasing alphabet order.
    pub fn is_ordered(&self) -> bool {
        self.first.values.iter().zip(&self.second.values).all(|(a, b)| a < b)
    }

    pub fn space(&self) -> &SiteSpace {
        &self.first.space
    }
}

/// Result of the reversal `ω ↦ ω̄^β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reversal {
    Defined(Config),
    /// The sites (by id) where `ω` lies outside `{β_i(1), β_i(2)}`.
    Undefined(Vec<SiteId>),
}

impl Reversal {
    pub fn config(self) -> Option<Config> {
        match self {
            Reversal::Defined(c) => Some(c),
            Reversal::Undefined(_) => None,
        }
    }
}

/// Exchanges `β_i(1)` and `β_i(2)` at every site.
pub fn reverse(omega: &Config, beta: &BetaPair) -> Result<Reversal> {
    if omega.space != *beta.space() {
        return Err(Error::SpaceMismatch("reversal outside beta space".into()));
    }
    let mut undefined = Vec::new();
    let mut values = Vec::with_capacity(omega.values.len());
    for (pos, &v) in omega.values.iter().enumerate() {
        let (b1, b2) = (beta.first.values[pos], beta.second.values[pos]);
        if v == b1 {
            values.push(b2);
        } else if v == b2 {
            values.push(b1);
        } else {
            undefined.push(omega.space.sites()[pos].id);
            values.push(v);
        }
    }
    if undefined.is_empty() {
        Ok(Reversal::Defined(Config {
            space: omega.space.clone(),
            values,
        }))
    } else {
        Ok(Reversal::Undefined(undefined))
    }
}

/// The configuration `ω̂` taking the largest symbol of every alphabet.
pub fn max_config(space: &SiteSpace) -> Config {
    let values = space.sites().iter().map(|s| s.alphabet.len() - 1).collect();
    Config {
        space: space.clone(),
        values,
    }
}
