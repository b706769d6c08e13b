//! Classical families of dense B₂ sets: the quadratic Erdős–Turán sets, the
//! Bose–Chowla sets from GF(p²), Singer perfect difference sets from GF(p³),
//! and the greedy Mian–Chowla sequence.
//!
//! The three prime-parameter families produce k ≈ √N elements of {1,…,N} and
//! are verified on the spot; construction fails loudly if the self-check ever
//! fails. Mian–Chowla is different: its greedy rule keeps sums of *distinct*
//! terms distinct, which is weaker than the distinct-sums convention of
//! [`crate::verify::verify_b2`] (that one also admits equal summands, so
//! 1+3 = 2+2 disqualifies {1,2,3}). Mian–Chowla outputs therefore carry an
//! honest `verified` flag instead of a guarantee; with three or more terms
//! the flag is false.
//!
//! All constructions are deterministic: the field families inherit the
//! canonical modulus/generator choice of [`crate::gf::Field`].

use crate::gf::{self, Field, FieldError};
use crate::model::{B2Set, ModelError};
use crate::verify;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Largest accepted prime parameter for the field-based families.
pub const MAX_CONSTRUCTION_PRIME: u64 = 10_000;

/// Largest accepted term count for the greedy sequence.
pub const MAX_MIAN_CHOWLA_COUNT: u64 = 10_000;

/// The four supported families.
///
/// Variants are declared in name order so the derived `Ord` sorts exactly
/// like the family name strings used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Exponents a ∈ [1, p²−1] with θ^a − θ ∈ GF(p), for θ generating
    /// GF(p²)*: p elements, differences distinct modulo p²−1.
    BoseChowla,
    /// The quadratic set {2pi + (i² mod p) + 1 : 0 ≤ i < p} ⊆ {1,…,2p²}.
    ErdosTuran,
    /// Greedy sequence starting at 1, each term the smallest keeping all
    /// sums of two distinct terms different.
    MianChowla,
    /// Exponents (mod p²+p+1) of the plane span{1, g} in GF(p³)*, shifted
    /// by one: a perfect difference set modulo p²+p+1.
    Singer,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::BoseChowla,
        Family::ErdosTuran,
        Family::MianChowla,
        Family::Singer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::BoseChowla => "bose_chowla",
            Family::ErdosTuran => "erdos_turan",
            Family::MianChowla => "mian_chowla",
            Family::Singer => "singer",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown family {0:?}; expected one of bose_chowla, erdos_turan, mian_chowla, singer")]
pub struct ParseFamilyError(String);

impl FromStr for Family {
    type Err = ParseFamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bose_chowla" => Ok(Family::BoseChowla),
            "erdos_turan" => Ok(Family::ErdosTuran),
            "mian_chowla" => Ok(Family::MianChowla),
            "singer" => Ok(Family::Singer),
            other => Err(ParseFamilyError(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("parameter {value} exceeds the supported maximum {max}")]
    ParameterTooLarge { value: u64, max: u64 },
    #[error("term count must be in [1, {MAX_MIAN_CHOWLA_COUNT}], got {0}")]
    CountOutOfRange(u64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    /// A construction produced something other than what it advertises.
    /// Unreachable for correct code; kept as a loud failure mode.
    #[error("self-check failed for {family}({parameter}): {reason}")]
    FailedSelfCheck {
        family: Family,
        parameter: u64,
        reason: String,
    },
}

/// A constructed set together with what the family advertises about it.
#[derive(Debug, Clone)]
pub struct ConstructionOutput {
    pub set: B2Set,
    pub family: Family,
    /// The prime p, or the term count for Mian–Chowla.
    pub parameter: u64,
    pub advertised_k: u64,
    pub advertised_n: u64,
    /// Modulus for which the set is cyclic Sidon (p²−1, Bose–Chowla) or a
    /// perfect difference set (p²+p+1, Singer); absent otherwise.
    pub cyclic_modulus: Option<u64>,
}

fn check_prime_parameter(p: u64) -> Result<(), ConstructionError> {
    if p > MAX_CONSTRUCTION_PRIME {
        return Err(ConstructionError::ParameterTooLarge {
            value: p,
            max: MAX_CONSTRUCTION_PRIME,
        });
    }
    if !gf::is_prime(p) {
        return Err(ConstructionError::NotPrime(p));
    }
    Ok(())
}

/// Verifies the set, checks the advertised cardinality, and assembles the
/// output. Used by the three families that guarantee the distinct-sums
/// property.
fn finish(
    set: B2Set,
    family: Family,
    parameter: u64,
    advertised_k: u64,
    cyclic_modulus: Option<u64>,
) -> Result<ConstructionOutput, ConstructionError> {
    let advertised_n = set.ambient_bound();
    if set.len() as u64 != advertised_k {
        return Err(ConstructionError::FailedSelfCheck {
            family,
            parameter,
            reason: format!("expected {advertised_k} elements, got {}", set.len()),
        });
    }
    let set = verify::into_verified(set).map_err(|e| ConstructionError::FailedSelfCheck {
        family,
        parameter,
        reason: e.to_string(),
    })?;
    Ok(ConstructionOutput {
        set,
        family,
        parameter,
        advertised_k,
        advertised_n,
        cyclic_modulus,
    })
}

/// Quadratic construction: A = {2pi + (i² mod p) + 1 : 0 ≤ i < p}, p prime.
/// Yields k = p elements of {1,…,2p²}.
pub fn erdos_turan(p: u64) -> Result<ConstructionOutput, ConstructionError> {
    check_prime_parameter(p)?;
    let n = 2 * p * p;
    let elements: Vec<u64> = (0..p).map(|i| 2 * p * i + (i * i) % p + 1).collect();
    let set = B2Set::new(elements, n)?;
    finish(set, Family::ErdosTuran, p, p, None)
}

/// Bose–Chowla construction in GF(p²): with θ the canonical generator of
/// GF(p²)*, take the exponents a ∈ [1, p²−1] with θ^a − θ ∈ GF(p).
///
/// Since θ^a − θ lies in the base field exactly when θ^a and θ share their
/// x-coefficient, membership is a single comparison per power. The p
/// resulting exponents have pairwise distinct differences even modulo
/// p²−1 (cyclic Sidon), recorded in `cyclic_modulus`.
pub fn bose_chowla(p: u64) -> Result<ConstructionOutput, ConstructionError> {
    check_prime_parameter(p)?;
    let field = Field::new(p, 2)?;
    let theta = field.find_generator();
    // θ ∉ GF(p) (its order exceeds p−1), so its x-coefficient is nonzero.
    let theta_x = theta[1];
    let modulus = p * p - 1;
    let span = (p * p) as usize;
    let mut elements = Vec::with_capacity(p as usize);
    for (a, z) in field
        .successive_powers(&theta)?
        .take(span)
        .enumerate()
        .skip(1)
    {
        if z[1] == theta_x {
            elements.push(a as u64);
        }
    }
    let set = B2Set::new(elements, modulus)?;
    finish(set, Family::BoseChowla, p, p, Some(modulus))
}

/// Singer construction in GF(p³): with g the canonical generator of
/// GF(p³)*, the exponents a with g^a in the plane span{1, g} are, modulo
/// v = p²+p+1, a perfect difference set of p+1 elements; shift by one to
/// land in {1,…,v}.
///
/// Membership of z in span{1, g} means (z₁, z₂) is proportional to
/// (g₁, g₂) — the basis vector 1 only feeds the constant coordinate — so
/// the test is the cross-product z₁g₂ ≡ z₂g₁ (mod p). Because g^v spans
/// GF(p)* and the plane is closed under scalar multiples, membership
/// depends on a only through a mod v: scanning a ∈ [0, v−1] suffices and
/// keeps the cost at v field multiplications, with no table.
pub fn singer(p: u64) -> Result<ConstructionOutput, ConstructionError> {
    check_prime_parameter(p)?;
    let field = Field::new(p, 3)?;
    let g = field.find_generator();
    let (g1, g2) = (g[1], g[2]);
    let v = p * p + p + 1;
    let mut elements = Vec::with_capacity(p as usize + 1);
    for (a, z) in field.successive_powers(&g)?.take(v as usize).enumerate() {
        if z[1] * g2 % p == z[2] * g1 % p {
            elements.push(a as u64 + 1);
        }
    }
    let set = B2Set::new(elements, v)?;
    finish(set, Family::Singer, p, p + 1, Some(v))
}

/// Greedy B₂ sequence: start at 1 and repeatedly append the smallest
/// integer keeping every pairwise sum a + b with a ≥ b (repeated summands
/// included) distinct — the lexicographically least sequence with the
/// distinct-sums property. The first terms are 1, 2, 4, 8, 13, 21, 31,
/// 45, 66, 81, …
///
/// The greedy invariant is exactly the property [`verify::verify_b2`]
/// checks, so every output verifies. A popular variant constrains only
/// sums of two *distinct* terms and begins 1, 2, 3, 5, 8, …; that variant
/// tolerates collisions like 1 + 3 = 2 + 2 and is deliberately not what
/// this family produces. Memory grows with the square of `count` (one
/// hash entry per pair sum).
pub fn mian_chowla(count: u64) -> Result<ConstructionOutput, ConstructionError> {
    if count == 0 || count > MAX_MIAN_CHOWLA_COUNT {
        return Err(ConstructionError::CountOutOfRange(count));
    }
    let want = count as usize;
    let mut elements: Vec<u64> = Vec::with_capacity(want);
    let mut pair_sums: HashSet<u64> = HashSet::new();
    elements.push(1);
    pair_sums.insert(2);
    while elements.len() < want {
        let mut candidate = *elements.last().unwrap() + 1;
        'search: loop {
            if pair_sums.contains(&(2 * candidate)) {
                candidate += 1;
                continue 'search;
            }
            for &a in &elements {
                if pair_sums.contains(&(candidate + a)) {
                    candidate += 1;
                    continue 'search;
                }
            }
            break;
        }
        // The fresh sums are pairwise distinct on their own (distinct
        // smaller summands; 2·candidate exceeds candidate + max(A)), so
        // inserting them keeps the invariant.
        for &a in &elements {
            pair_sums.insert(candidate + a);
        }
        pair_sums.insert(2 * candidate);
        elements.push(candidate);
    }
    let n = *elements.last().unwrap();
    let set = B2Set::new(elements, n)?;
    finish(set, Family::MianChowla, count, count, None)
}

/// Dispatch by family; `parameter` is the prime (or the term count for
/// Mian–Chowla).
pub fn construct(family: Family, parameter: u64) -> Result<ConstructionOutput, ConstructionError> {
    match family {
        Family::BoseChowla => bose_chowla(parameter),
        Family::ErdosTuran => erdos_turan(parameter),
        Family::MianChowla => mian_chowla(parameter),
        Family::Singer => singer(parameter),
    }
}
