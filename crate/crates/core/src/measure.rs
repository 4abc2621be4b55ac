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

//! Exact probability measures on finite product spaces.
//!
//! A [`Measure`] stores nonnegative integer masses over a common total, so
//! `P(ω) = mass(ω) / total`. Masses are kept reduced by their gcd. Every
//! comparison the checkers need (orderings of configuration weights,
//! products of event probabilities) reduces to integer arithmetic on masses.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::Event;
use crate::rational::{format_ratio, parse_nonneg_ratio, uint_ratio};
use crate::space::SiteSpace;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Measure {
    space: SiteSpace,
    masses: Vec<BigUint>,
    total: BigUint,
}

impl Measure {
    /// Normalizes nonnegative integer masses.
    pub fn from_masses(space: SiteSpace, mut masses: Vec<BigUint>) -> Result<Self> {
        if masses.len() != space.num_configs() {
            return Err(Error::SpaceMismatch(format!(
                "{} weights for {} configurations",
                masses.len(),
                space.num_configs()
            )));
        }
        let g = masses.iter().fold(BigUint::zero(), |g, m| g.gcd(m));
        if g.is_zero() {
            return Err(Error::AllZero);
        }
        if g != BigUint::from(1u32) {
            for m in &mut masses {
                *m /= &g;
            }
        }
        let total = masses.iter().sum();
        Ok(Self {
            space,
            masses,
            total,
        })
    }

    pub fn from_u64(space: SiteSpace, weights: &[u64]) -> Result<Self> {
        Self::from_masses(space, weights.iter().map(|&w| BigUint::from(w)).collect())
    }

    /// `normalize`: scales nonnegative rational weights to sum to one.
    pub fn normalize(space: SiteSpace, weights: &[BigRational]) -> Result<Self> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidParams("negative weight".into()));
        }
        let lcm = weights
            .iter()
            .fold(BigInt::from(1), |l, w| l.lcm(w.denom()));
        let masses = weights
            .iter()
            .map(|w| {
                (w.numer() * (&lcm / w.denom()))
                    .to_biguint()
                    .expect("nonnegative")
            })
            .collect();
        Self::from_masses(space, masses)
    }

    pub fn uniform(space: SiteSpace) -> Self {
        let n = space.num_configs();
        Self::from_masses(space, vec![BigUint::from(1u32); n]).expect("nonempty space")
    }

    /// Uniform measure on a nonempty event.
    pub fn uniform_on(event: &Event) -> Result<Self> {
        let space = event.space().clone();
        let masses = (0..space.num_configs())
            .map(|i| BigUint::from(event.contains(i) as u32))
            .collect();
        Self::from_masses(space, masses)
    }

    pub fn space(&self) -> &SiteSpace {
        &self.space
    }

    pub fn masses(&self) -> &[BigUint] {
        &self.masses
    }

    pub fn mass(&self, index: usize) -> &BigUint {
        &self.masses[index]
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn prob(&self, index: usize) -> BigRational {
        uint_ratio(&self.masses[index], &self.total)
    }

    pub fn probs(&self) -> Vec<BigRational> {
        (0..self.len()).map(|i| self.prob(i)).collect()
    }

    pub fn mass_of(&self, event: &Event) -> BigUint {
        event.indices().map(|i| &self.masses[i]).sum()
    }

    pub fn prob_of(&self, event: &Event) -> Result<BigRational> {
        if event.space() != &self.space {
            return Err(Error::SpaceMismatch("event and measure spaces differ".into()));
        }
        Ok(uint_ratio(&self.mass_of(event), &self.total))
    }

    pub fn support(&self) -> Event {
        Event::from_predicate(&self.space, |i| !self.masses[i].is_zero())
    }

    /// Largest mass and the set of indices attaining it.
    pub fn argmax(&self) -> (BigUint, Event) {
        let max = self.masses.iter().max().cloned().unwrap_or_default();
        let set = Event::from_predicate(&self.space, |i| self.masses[i] == max);
        (max, set)
    }

    /// `P(ω) = P(ω̄)` for every ω (binary spaces only).
    pub fn is_reversal_symmetric(&self) -> bool {
        if !self.space.is_binary() {
            return false;
        }
        let flip = self.len() - 1;
        (0..self.len()).all(|i| self.masses[i] == self.masses[i ^ flip])
    }

    /// Masses as `u128` when the product of any two event masses fits.
    pub fn small_masses(&self) -> Option<Vec<u128>> {
        if self.total.bits() > 63 {
            return None;
        }
        self.masses.iter().map(|m| m.to_u128()).collect()
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson {
            sites: self.space.sites().iter().map(|s| s.name.clone()).collect(),
            alphabets: self.space.sites().iter().map(|s| s.alphabet.clone()).collect(),
            weights: self.probs().iter().map(format_ratio).collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("measure serializes")
    }

    pub fn from_json(json: &MeasureJson) -> Result<Self> {
        let space = SiteSpace::new(json.sites.clone(), json.alphabets.clone())?;
        let weights = json
            .weights
            .iter()
            .map(|w| parse_nonneg_ratio(w))
            .collect::<Result<Vec<_>>>()?;
        let measure = Self::normalize(space, &weights)?;
        Ok(measure)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: MeasureJson = serde_json::from_str(text)?;
        Self::from_json(&json)
    }
}

/// On-disk measure format; weights in mixed-radix configuration order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub sites: Vec<String>,
    pub alphabets: Vec<Vec<String>>,
    pub weights: Vec<String>,
}

/// `max_ω |P(ω) − Q(ω)|`.
pub fn sup_distance(p: &Measure, q: &Measure) -> Result<BigRational> {
    if p.space != q.space {
        return Err(Error::SpaceMismatch("sup distance between different spaces".into()));
    }
    // |a/s - b/t| = |a t - b s| / (s t)
    let mut best = BigUint::zero();
    for (a, b) in p.masses.iter().zip(&q.masses) {
        let x = a * &q.total;
        let y = b * &p.total;
        let d = if x >= y { x - y } else { y - x };
        if d > best {
            best = d;
        }
    }
    Ok(uint_ratio(&best, &(&p.total * &q.total)))
}
