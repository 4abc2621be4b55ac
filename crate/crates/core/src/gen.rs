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

//! Seeded instance generators.
//!
//! Every generated instance is a function of `(seed, instance)` only: the
//! generator stream is ChaCha8 seeded with `seed` on stream `instance`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::association::{exchangeable_from_levels, is_fkg, is_nfkg, ExchangeableLevels};
use crate::error::{Error, Result};
use crate::event::Event;
use crate::measure::Measure;
use crate::rcr::{ising_measure, IsingSpec};
use crate::space::SiteSpace;

/// Rejection attempts before a generator switches to its fallback family.
pub const RETRY_BUDGET: u64 = 100_000;

/// Largest `|Λ|` for random measures.
pub const MAX_RANDOM_SITES: usize = 6;

/// Raw weights are drawn uniformly from `1..=MAX_WEIGHT`.
pub const MAX_WEIGHT: u64 = 64;

pub fn instance_rng(seed: u64, instance: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance);
    rng
}

/// How a generated measure was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// Drawn directly.
    Direct,
    /// Accepted after this many rejection attempts.
    Rejection(u64),
    /// Budget exhausted; drawn from the fallback family.
    Fallback,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub measure: Measure,
    pub origin: Origin,
}

fn check_sites(n: usize) -> Result<()> {
    if n > MAX_RANDOM_SITES {
        return Err(Error::CapExceeded {
            what: "sites for random measures",
            got: n,
            cap: MAX_RANDOM_SITES,
        });
    }
    Ok(())
}

pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<u64> {
    (0..1usize << n).map(|_| rng.random_range(1..=MAX_WEIGHT)).collect()
}

/// Weights uniform on `1..=64`, normalized.
pub fn random_measure<R: Rng>(rng: &mut R, n: usize) -> Result<Generated> {
    check_sites(n)?;
    let w = random_weights(rng, n);
    Ok(Generated {
        measure: Measure::from_u64(SiteSpace::binary(n), &w)?,
        origin: Origin::Direct,
    })
}

/// Lattice condition on raw weights.
pub fn fkg_weights(w: &[u64]) -> bool {
    let size = w.len();
    (0..size).all(|i| {
        (i + 1..size).all(|j| (w[i | j] as u128) * (w[i & j] as u128) >= (w[i] as u128) * (w[j] as u128))
    })
}

/// Balanced configurations are maxima in every folding of raw weights.
pub fn nfkg_weights(n: usize, w: &[u64]) -> bool {
    let full = (1usize << n) - 1;
    for k in 0..=full {
        let rest = full & !k;
        let m = rest.count_ones() as i64;
        // α runs over submasks of k, ω over submasks of rest
        let mut alpha = 0usize;
        loop {
            let mut min_balanced = u128::MAX;
            let mut max_all = 0u128;
            let mut omega = 0usize;
            loop {
                let v = w[alpha | omega] as u128 * w[alpha | (rest ^ omega)] as u128;
                max_all = max_all.max(v);
                if (2 * omega.count_ones() as i64 - m).abs() <= 1 {
                    min_balanced = min_balanced.min(v);
                }
                if omega == rest {
                    break;
                }
                omega = (omega.wrapping_sub(rest)) & rest;
            }
            if max_all > 0 && min_balanced < max_all {
                return false;
            }
            if alpha == k {
                break;
            }
            alpha = (alpha.wrapping_sub(k)) & k;
        }
    }
    true
}

fn pair_terms(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// `∏ h_i^{ω_i} ∏ c_ij^{ω_i ω_j}` with `h ∈ 1..=8`, `c ∈ 1..=4`.
fn log_supermodular_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<u64> {
    let h: Vec<u64> = (0..n).map(|_| rng.random_range(1..=8)).collect();
    let c: Vec<(usize, usize, u64)> = pair_terms(n).map(|(i, j)| (i, j, rng.random_range(1..=4))).collect();
    (0..1usize << n)
        .map(|w| {
            let singles: u64 = (0..n).filter(|&i| w >> i & 1 == 1).map(|i| h[i]).product();
            let pairs: u64 = c
                .iter()
                .filter(|&&(i, j, _)| w >> i & 1 == 1 && w >> j & 1 == 1)
                .map(|&(_, _, x)| x)
                .product();
            singles * pairs
        })
        .collect()
}

/// `∏ h_i^{ω_i} · d^{k(n−k)}` for `|ω| = k`, with `h ∈ 1..=8`, `d ∈ 1..=4`.
/// The fields cancel in `w(αω) w(αω̄)` and the level part is log-concave,
/// so every folding peaks on balanced configurations.
fn tilted_field_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<u64> {
    let h: Vec<u64> = (0..n).map(|_| rng.random_range(1..=8)).collect();
    let d: u64 = rng.random_range(1..=4);
    (0..1usize << n)
        .map(|w| {
            let singles: u64 = (0..n).filter(|&i| w >> i & 1 == 1).map(|i| h[i]).product();
            let k = w.count_ones();
            singles * d.pow(k * (n as u32 - k))
        })
        .collect()
}

fn reject<R: Rng>(rng: &mut R, n: usize, budget: u64, accept: impl Fn(&[u64]) -> bool) -> Option<(Vec<u64>, u64)> {
    (1..=budget).find_map(|t| {
        let w = random_weights(rng, n);
        accept(&w).then_some((w, t))
    })
}

/// A random FKG measure: rejection from uniform weights, then a random
/// log-supermodular product.
pub fn random_fkg<R: Rng>(rng: &mut R, n: usize, budget: u64) -> Result<Generated> {
    check_sites(n)?;
    let space = SiteSpace::binary(n);
    let (w, origin) = match reject(rng, n, budget, fkg_weights) {
        Some((w, t)) => (w, Origin::Rejection(t)),
        None => (log_supermodular_weights(rng, n), Origin::Fallback),
    };
    let measure = Measure::from_u64(space, &w)?;
    debug_assert!(is_fkg(&measure)?.verdict);
    Ok(Generated { measure, origin })
}

/// A random NFKG measure: rejection from uniform weights, then random
/// external fields on a disagreement-tilted exchangeable base.
pub fn random_nfkg<R: Rng>(rng: &mut R, n: usize, budget: u64) -> Result<Generated> {
    check_sites(n)?;
    let space = SiteSpace::binary(n);
    let (w, origin) = match reject(rng, n, budget, |w| nfkg_weights(n, w)) {
        Some((w, t)) => (w, Origin::Rejection(t)),
        None => (tilted_field_weights(rng, n), Origin::Fallback),
    };
    let measure = Measure::from_u64(space, &w)?;
    debug_assert!(is_nfkg(&measure)?.verdict);
    Ok(Generated { measure, origin })
}

/// Uniform measure on the configurations of `event`.
pub fn uniform_subset(event: &Event) -> Result<Measure> {
    Measure::uniform_on(event)
}

pub fn ising(spec: &IsingSpec) -> Result<Measure> {
    ising_measure(spec)
}

pub fn exchangeable(n: usize, levels: &[u64]) -> Result<Measure> {
    exchangeable_from_levels(&ExchangeableLevels::from_u64(n, levels)?)
}

/// Weights of a measure as machine integers, when they fit.
pub fn weights_u64(p: &Measure) -> Option<Vec<u64>> {
    p.masses().iter().map(|m| u64::try_from(m.clone()).ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::is_na;

    #[test]
    fn raw_predicates_agree_with_measure_checks() {
        let mut rng = instance_rng(11, 0);
        for n in 1..=3 {
            for _ in 0..300 {
                let w: Vec<u64> = (0..1usize << n).map(|_| rng.random_range(1..=4)).collect();
                let p = Measure::from_u64(SiteSpace::binary(n), &w).unwrap();
                assert_eq!(fkg_weights(&w), is_fkg(&p).unwrap().verdict, "{w:?}");
                assert_eq!(nfkg_weights(n, &w), is_nfkg(&p).unwrap().verdict, "{w:?}");
            }
        }
    }

    #[test]
    fn generators_are_deterministic_and_valid() {
        for n in 1..=4 {
            for i in 0..5 {
                let a = random_fkg(&mut instance_rng(3, i), n, 2_000).unwrap();
                let b = random_fkg(&mut instance_rng(3, i), n, 2_000).unwrap();
                assert_eq!(a.measure, b.measure);
                assert!(is_fkg(&a.measure).unwrap().verdict);
                let c = random_nfkg(&mut instance_rng(3, i), n, 2_000).unwrap();
                assert!(is_nfkg(&c.measure).unwrap().verdict);
            }
        }
        assert_ne!(
            random_measure(&mut instance_rng(3, 0), 3).unwrap().measure,
            random_measure(&mut instance_rng(3, 1), 3).unwrap().measure
        );
    }

    #[test]
    fn fallback_families_hold() {
        let mut rng = instance_rng(5, 0);
        for _ in 0..500 {
            assert!(fkg_weights(&log_supermodular_weights(&mut rng, 4)));
            for n in 1..=MAX_RANDOM_SITES {
                let w = tilted_field_weights(&mut rng, n);
                assert!(nfkg_weights(n, &w), "{w:?}");
            }
        }
        let g = random_nfkg(&mut rng, 3, 10).unwrap();
        assert!(is_na(&g.measure).unwrap().verdict);
    }

    #[test]
    fn caps_and_helpers() {
        assert!(random_measure(&mut instance_rng(0, 0), 7).is_err());
        let p = exchangeable(2, &[1, 2, 1]).unwrap();
        assert_eq!(weights_u64(&p).unwrap(), vec![1, 2, 2, 1]);
        let s = SiteSpace::binary(2);
        let u = uniform_subset(&Event::parse_configs(&s, "01,10").unwrap()).unwrap();
        assert!(is_nfkg(&u).unwrap().verdict);
    }
}
