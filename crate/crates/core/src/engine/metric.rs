use super::EngineError;
use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// n! / (n - r)!
pub fn permutations(n: u64, r: u64) -> Result<BigUint, EngineError> {
    if r > n {
        return Err(EngineError::PermutationRange { n, r });
    }
    Ok((n - r + 1..=n).fold(BigUint::one(), |acc, k| acc * k))
}

/// Size of the sequence space before and after staging.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceMetric {
    pub n: u64,
    pub r: u64,
    #[serde(with = "decimal")]
    pub full_space: BigUint,
    pub stage_sizes: Vec<u64>,
    #[serde(with = "decimal")]
    pub reduced_space: BigUint,
}

impl SpaceMetric {
    pub fn from_stage_sizes(stage_sizes: Vec<u64>) -> Self {
        let n: u64 = stage_sizes.iter().sum();
        let reduced_space =
            if stage_sizes.is_empty() { BigUint::one() } else { stage_sizes.iter().map(|&k| factorial(k)).sum() };
        SpaceMetric { n, r: n, full_space: permutations(n, n).expect("r == n"), stage_sizes, reduced_space }
    }
}

mod decimal {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| serde::de::Error::custom(format!("not a number: {s}")))
    }
}
