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

//! Events as bitsets over configuration indices, and increasing-event
//! enumeration on binary spaces.

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::Num;

use crate::error::{Error, Result};
use crate::space::{Config, SiteSpace};

/// Default cap on `|Λ|` for enumerating all increasing events.
pub const DEFAULT_UPSET_CAP: usize = 5;

/// Largest space (in configurations) handled by the `u64` mask fast paths.
pub const MASK_BITS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    space: SiteSpace,
    members: FixedBitSet,
}

impl Event {
    pub fn empty(space: &SiteSpace) -> Self {
        Self {
            space: space.clone(),
            members: FixedBitSet::with_capacity(space.num_configs()),
        }
    }

    pub fn full(space: &SiteSpace) -> Self {
        let mut e = Self::empty(space);
        e.members.insert_range(..);
        e
    }

    pub fn from_predicate(space: &SiteSpace, mut pred: impl FnMut(usize) -> bool) -> Self {
        let mut e = Self::empty(space);
        for i in 0..space.num_configs() {
            if pred(i) {
                e.members.insert(i);
            }
        }
        e
    }

    pub fn from_indices(space: &SiteSpace, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut e = Self::empty(space);
        let n = space.num_configs();
        for i in indices {
            assert!(i < n, "configuration index {i} out of range");
            e.members.insert(i);
        }
        e
    }

    pub fn from_configs<'a>(space: &SiteSpace, configs: impl IntoIterator<Item = &'a Config>) -> Result<Self> {
        let mut e = Self::empty(space);
        for c in configs {
            if c.space() != space {
                return Err(Error::SpaceMismatch("configuration from another space".into()));
            }
            e.members.insert(c.index());
        }
        Ok(e)
    }

    /// Parses comma-separated configurations, e.g. `"00,11"`.
    pub fn parse_configs(space: &SiteSpace, text: &str) -> Result<Self> {
        let configs = text
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| space.parse_config(t))
            .collect::<Result<Vec<_>>>()?;
        Self::from_configs(space, &configs)
    }

    /// Parses a hex bitset where bit `i` marks configuration `i`.
    pub fn parse_hex(space: &SiteSpace, text: &str) -> Result<Self> {
        let digits = text.trim().trim_start_matches("0x");
        let value = BigUint::from_str_radix(if digits.is_empty() { "0" } else { digits }, 16)
            .map_err(|_| Error::Parse(format!("invalid hex bitset `{text}`")))?;
        let n = space.num_configs();
        if value.bits() as usize > n {
            return Err(Error::Parse(format!("hex bitset `{text}` exceeds {n} configurations")));
        }
        Ok(Self::from_predicate(space, |i| value.bit(i as u64)))
    }

    pub fn to_hex(&self) -> String {
        let mut value = BigUint::default();
        for i in self.members.ones() {
            value.set_bit(i as u64, true);
        }
        format!("0x{}", value.to_str_radix(16))
    }

    pub fn from_mask(space: &SiteSpace, mask: u64) -> Self {
        Self::from_predicate(space, |i| mask >> i & 1 == 1)
    }

    /// Member bits as a `u64`, for spaces of at most 64 configurations.
    pub fn mask(&self) -> Option<u64> {
        if self.space.num_configs() > MASK_BITS {
            return None;
        }
        Some(self.members.ones().fold(0u64, |m, i| m | 1 << i))
    }

    pub fn space(&self) -> &SiteSpace {
        &self.space
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.contains(index)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.ones()
    }

    pub fn configs(&self) -> Vec<Config> {
        self.members.ones().map(|i| self.space.config(i)).collect()
    }

    pub fn count(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    fn check_same(&self, other: &Event) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch("events on different spaces".into()));
        }
        Ok(())
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        self.check_same(other)?;
        let mut e = self.clone();
        e.members.union_with(&other.members);
        Ok(e)
    }

    pub fn intersection(&self, other: &Event) -> Result<Event> {
        self.check_same(other)?;
        let mut e = self.clone();
        e.members.intersect_with(&other.members);
        Ok(e)
    }

    pub fn complement(&self) -> Event {
        let mut e = self.clone();
        e.members.toggle_range(..);
        e
    }

    pub fn is_subset(&self, other: &Event) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.members.is_subset(&other.members))
    }

    /// `Ē`: the image of the event under pointwise symbol reversal.
    pub fn bar(&self) -> Result<Event> {
        self.space.require_binary()?;
        let flip = self.space.num_configs() - 1;
        Ok(Self::from_indices(&self.space, self.members.ones().map(|i| i ^ flip)))
    }

    /// Upward closure under the coordinatewise order of alphabet indices.
    pub fn is_increasing(&self) -> bool {
        self.members.ones().all(|i| upper_covers(&self.space, i).into_iter().all(|j| self.contains(j)))
    }

    pub fn is_decreasing(&self) -> bool {
        self.complement().is_increasing()
    }

    /// The cylinder `[ω]_K = { ω' : ω'_K = ω_K }`, `K` given as a position mask.
    pub fn cylinder(space: &SiteSpace, omega: usize, positions: u64) -> Event {
        let values = space.values_of(omega);
        Self::from_predicate(space, |j| {
            let other = space.values_of(j);
            (0..space.len()).all(|p| positions >> p & 1 == 0 || other[p] == values[p])
        })
    }
}

/// Indices obtained by raising one coordinate by one step.
fn upper_covers(space: &SiteSpace, index: usize) -> Vec<usize> {
    let values = space.values_of(index);
    (0..space.len())
        .filter(|&p| values[p] + 1 < space.radix(p))
        .map(|p| {
            let mut up = values.clone();
            up[p] += 1;
            space.index_of(&up)
        })
        .collect()
}

/// All increasing events of a binary space, as `u64` masks, in a fixed order.
pub fn upset_masks(n: usize, cap: usize) -> Result<Vec<u64>> {
    if n > cap {
        return Err(Error::CapExceeded {
            what: "sites for up-set enumeration",
            got: n,
            cap,
        });
    }
    if n > 6 {
        return Err(Error::CapExceeded {
            what: "sites for mask-based up-set enumeration",
            got: n,
            cap: 6,
        });
    }
    let size = 1usize << n;
    let mut out = Vec::new();
    // Indices are visited from the top; every upper cover of `i` has a larger
    // index, so its membership is already fixed when `i` is decided.
    fn go(i: isize, n: usize, included: u64, excluded: u64, out: &mut Vec<u64>) {
        if i < 0 {
            out.push(included);
            return;
        }
        let i = i as usize;
        let forced_out = (0..n).any(|b| i >> b & 1 == 0 && excluded >> (i | 1 << b) & 1 == 1);
        if !forced_out {
            go(i as isize - 1, n, included | 1 << i, excluded, out);
        }
        go(i as isize - 1, n, included, excluded | 1 << i, out);
    }
    go(size as isize - 1, n, 0, 0, &mut out);
    Ok(out)
}

/// All increasing events of a binary space.
pub fn enumerate_upsets(space: &SiteSpace, cap: usize) -> Result<Vec<Event>> {
    space.require_binary()?;
    Ok(upset_masks(space.len(), cap)?
        .into_iter()
        .map(|m| Event::from_mask(space, m))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: scan every subset of Ω for upward closure.
    fn brute_force_upsets(n: usize) -> Vec<u64> {
        let size = 1usize << n;
        let mut out = Vec::new();
        for set in 0u64..(1u64 << size) {
            let closed = (0..size).all(|w| {
                set >> w & 1 == 0 || (0..size).all(|v| v & w != w || set >> v & 1 == 1)
            });
            if closed {
                out.push(set);
            }
        }
        out
    }

    #[test]
    fn upset_counts() {
        assert_eq!(upset_masks(0, 5).unwrap().len(), 2);
        assert_eq!(upset_masks(2, 5).unwrap().len(), 6);
        assert_eq!(upset_masks(3, 5).unwrap().len(), 20);
        assert_eq!(upset_masks(4, 5).unwrap().len(), 168);
        assert_eq!(upset_masks(5, 5).unwrap().len(), 7581);
        assert!(matches!(upset_masks(6, 5), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn upsets_match_brute_force() {
        for n in 0..=4 {
            let mut fast = upset_masks(n, 5).unwrap();
            fast.sort_unstable();
            assert_eq!(fast, brute_force_upsets(n), "n = {n}");
        }
    }

    #[test]
    fn empty_space_upsets() {
        let events = enumerate_upsets(&SiteSpace::empty(), 5).unwrap();
        assert_eq!(events.len(), 2);
        assert!(events.iter().any(|e| e.is_empty()));
        assert!(events.iter().any(|e| e.count() == 1));
    }

    #[test]
    fn every_upset_is_closed() {
        let space = SiteSpace::binary(4);
        for e in enumerate_upsets(&space, 5).unwrap() {
            assert!(e.is_increasing());
            assert!(e.bar().unwrap().is_decreasing());
        }
    }

    #[test]
    fn non_binary_upsets_rejected() {
        let space = SiteSpace::new(vec!["1".into()], vec![vec!["a".into(), "b".into(), "c".into()]]).unwrap();
        assert!(matches!(enumerate_upsets(&space, 5), Err(Error::NonBinaryAlphabet(_))));
        // Boolean algebra still works.
        let e = Event::parse_configs(&space, "a,c").unwrap();
        assert_eq!(e.complement().count(), 1);
        assert!(Event::parse_configs(&space, "b,c").unwrap().is_increasing());
    }

    #[test]
    fn hex_and_cylinders() {
        let space = SiteSpace::binary(2);
        let e = Event::parse_configs(&space, "00,11").unwrap();
        assert_eq!(e.to_hex(), "0x9");
        assert_eq!(Event::parse_hex(&space, "0x9").unwrap(), e);
        assert!(Event::parse_hex(&space, "0x1ff").is_err());
        let cyl = Event::cylinder(&space, 2, 0b01);
        assert_eq!(cyl, Event::parse_configs(&space, "10,11").unwrap());
        assert_eq!(Event::cylinder(&space, 2, 0).count(), 4);
    }

    proptest! {
        #[test]
        fn bar_is_involution_and_flips_monotonicity(mask in 0u64..(1 << 16)) {
            let space = SiteSpace::binary(4);
            let e = Event::from_mask(&space, mask);
            prop_assert_eq!(e.bar().unwrap().bar().unwrap(), e.clone());
            if e.is_increasing() {
                prop_assert!(e.bar().unwrap().is_decreasing());
            }
        }
    }
}
