//! Core counting objects: candidate B₂ sets, residue profiles, difference
//! correlations, and deviation statistics.
//!
//! Everything that can be counted is counted in exact integer arithmetic;
//! floating point enters only at the boundary when a norm is reported. In
//! particular the scaled mean-square identity
//!
//! ```text
//! Σ_x (m·a(x) − S)²  =  m²·Σ_x a(x)²  −  m·S²,      S = Σ_x a(x),
//! ```
//!
//! holds with zero tolerance and is kept in `u128`, so equality tests against
//! it never involve a float.

use thiserror::Error;

/// Errors from constructing the core counting objects.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    /// Elements live in {1,…,N}; zero is outside the universe.
    #[error("element 0 is not allowed; elements live in {{1,…,N}}")]
    ZeroElement,
    #[error("element {value} exceeds the ambient bound {bound}")]
    ElementAboveBound { value: u64, bound: u64 },
    #[error("duplicate element {0}")]
    DuplicateElement(u64),
    #[error("ambient bound must be at least 1")]
    ZeroAmbientBound,
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("a residue profile needs at least one class")]
    EmptyProfile,
}

/// A finite set of distinct positive integers inside the window {1,…,N}.
///
/// The type itself only guarantees "sorted, distinct, in range". Whether the
/// set actually has pairwise-distinct sums is decided by
/// [`crate::verify::verify_b2`]; a successful check is recorded in the
/// [`is_verified`](B2Set::is_verified) flag. All types here are immutable
/// after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct B2Set {
    elements: Vec<u64>,
    ambient_bound: u64,
    verified: bool,
}

impl B2Set {
    /// Builds a set from arbitrary-order input. Sorts, then rejects zeros,
    /// duplicates, and elements above `ambient_bound`.
    pub fn new(mut elements: Vec<u64>, ambient_bound: u64) -> Result<Self, ModelError> {
        if ambient_bound == 0 {
            return Err(ModelError::ZeroAmbientBound);
        }
        elements.sort_unstable();
        for (i, &v) in elements.iter().enumerate() {
            if v == 0 {
                return Err(ModelError::ZeroElement);
            }
            if v > ambient_bound {
                return Err(ModelError::ElementAboveBound {
                    value: v,
                    bound: ambient_bound,
                });
            }
            if i > 0 && elements[i - 1] == v {
                return Err(ModelError::DuplicateElement(v));
            }
        }
        Ok(B2Set {
            elements,
            ambient_bound,
            verified: false,
        })
    }

    /// Elements in ascending order.
    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    /// The window bound N (elements are ≤ N, not necessarily attaining it).
    pub fn ambient_bound(&self) -> u64 {
        self.ambient_bound
    }

    /// k, the number of elements.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Whether a distinct-sums check has succeeded on this value.
    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub(crate) fn mark_verified(&mut self) {
        self.verified = true;
    }
}

/// Residue-class counts a(x) = |{a ∈ A : a ≡ x (mod m)}| for x = 0,…,m−1.
///
/// The modulus is the length of the count vector and the total is Σ_x a(x);
/// both are fixed at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueProfile {
    counts: Vec<u64>,
    total: u64,
}

impl ResidueProfile {
    /// Profile of a set modulo `modulus`. The set may be empty and the
    /// modulus may exceed k or N; there is no restriction at this layer.
    pub fn of_set(set: &B2Set, modulus: u64) -> Result<Self, ModelError> {
        if modulus == 0 {
            return Err(ModelError::ZeroModulus);
        }
        let mut counts = vec![0u64; modulus as usize];
        for &a in set.elements() {
            counts[(a % modulus) as usize] += 1;
        }
        Ok(ResidueProfile {
            total: set.len() as u64,
            counts,
        })
    }

    /// Wraps raw class counts (used for synthetic profiles in tests and
    /// experiments); the modulus is the vector length.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, ModelError> {
        if counts.is_empty() {
            return Err(ModelError::EmptyProfile);
        }
        let total = counts.iter().sum();
        Ok(ResidueProfile { counts, total })
    }

    pub fn modulus(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// S = Σ_x a(x); equals k when the profile came from a set.
    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Cyclic correlation d(j) = Σ_i a(i)·a(i+j mod m) of a residue profile with
/// itself: d(j) counts ordered pairs (a,b) ∈ A×A with a − b ≡ j (mod m).
///
/// Consequences checked in tests: Σ_j d(j) = S², d(j) = d(m−j),
/// max_j d(j) = d(0) (Cauchy–Schwarz), and d(0) ≥ ⌈S²/m⌉.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceCorrelation {
    values: Vec<u64>,
}

impl DifferenceCorrelation {
    pub fn from_profile(profile: &ResidueProfile) -> Self {
        let c = profile.counts();
        let m = c.len();
        let mut values = vec![0u64; m];
        for (j, v) in values.iter_mut().enumerate() {
            let mut acc = 0u64;
            for i in 0..m {
                acc += c[i] * c[(i + j) % m];
            }
            *v = acc;
        }
        DifferenceCorrelation { values }
    }

    pub fn modulus(&self) -> u64 {
        self.values.len() as u64
    }

    /// d(0),…,d(m−1).
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// d(0) = Σ_x a(x)², the autocorrelation peak.
    pub fn d0(&self) -> u64 {
        self.values[0]
    }
}

/// Deviation of a profile from the flat profile S/m in ℓ² and ℓ^∞, together
/// with the exact integer Σ_x (m·a(x) − S)² = m²·(ℓ² deviation)².
///
/// `l2` is recovered from the integer as √(Σ(m·a−S)²)/m, so the float and the
/// integer never disagree beyond one rounding of the square root.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationStats {
    pub l2: f64,
    pub linf: f64,
    pub l2_squared_times_m2: u128,
}

impl DeviationStats {
    pub fn from_profile(profile: &ResidueProfile) -> Self {
        let m = profile.modulus() as i128;
        let s = profile.total() as i128;
        let mut sum_sq: u128 = 0;
        let mut max_abs: u128 = 0;
        for &a in profile.counts() {
            let scaled = m * a as i128 - s;
            sum_sq += (scaled * scaled) as u128;
            max_abs = max_abs.max(scaled.unsigned_abs());
        }
        DeviationStats {
            l2: (sum_sq as f64).sqrt() / m as f64,
            linf: max_abs as f64 / m as f64,
            l2_squared_times_m2: sum_sq,
        }
    }
}
