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

//! Helpers for exact rationals and their `"num/den"` text form.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_biguint(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

pub fn uint_ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// Always `"num/den"`, including integers (`"1/1"`, `"0/1"`).
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `"num/den"` or a bare integer.
pub fn parse_ratio(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("invalid rational `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

pub fn parse_nonneg_ratio(text: &str) -> Result<BigRational> {
    let r = parse_ratio(text)?;
    if r.is_negative() {
        return Err(Error::Parse(format!("negative weight `{text}`")));
    }
    Ok(r)
}

/// `base^exp` for a nonnegative exponent.
pub fn pow(base: &BigRational, exp: u64) -> BigRational {
    let mut result = BigRational::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    result
}

/// Serde adapter for a single `BigRational` as `"num/den"`.
pub mod serde_ratio {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        parse_ratio(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        assert_eq!(format_ratio(&ratio(2, 4)), "1/2");
        assert_eq!(format_ratio(&ratio(3, 1)), "3/1");
        assert_eq!(parse_ratio("6/8").unwrap(), ratio(3, 4));
        assert_eq!(parse_ratio("5").unwrap(), ratio(5, 1));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_nonneg_ratio("-1/2").is_err());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let r = ratio(2, 3);
        assert_eq!(pow(&r, 0), ratio(1, 1));
        assert_eq!(pow(&r, 5), ratio(32, 243));
    }
}
