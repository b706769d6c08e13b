//! B₂ (Sidon) verification with collision witnesses.
//!
//! A set A ⊆ {1,…,N} is B₂ when the k(k+1)/2 sums a+b with a ≥ b are
//! pairwise distinct — equivalently, when all positive differences a−b are
//! distinct. Both routes are implemented; their verdicts must agree on every
//! input, and the differences route doubles as an independent oracle.
//!
//! Failures carry a witness (a,b,c,d) with a+b = c+d. Witnesses are
//! canonical: the sums route reports the smallest colliding sum value and,
//! within it, the two representations with the smallest larger elements,
//! ordered by larger element. This makes failures deterministic and
//! byte-for-byte testable.

use crate::model::B2Set;
use std::fmt;
use thiserror::Error;

/// Default memory budget for the sum bit table (2N+1 bits are needed).
/// Larger windows fall back to a sorted pair scan that is O(k² log k) time
/// and O(k²) memory but independent of N.
pub const DEFAULT_SUM_TABLE_BITS: u64 = 1 << 31;

/// Two distinct pairs with equal sums: a+b = c+d, a ≥ b, c ≥ d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollisionWitness {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl fmt::Display for CollisionWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{} = {}+{}", self.a, self.b, self.c, self.d)
    }
}

/// Outcome of a distinct-sums check; `witness` is present iff `is_b2` is false.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct B2Verdict {
    pub is_b2: bool,
    pub witness: Option<CollisionWitness>,
}

impl B2Verdict {
    fn pass() -> Self {
        B2Verdict {
            is_b2: true,
            witness: None,
        }
    }

    fn fail(witness: CollisionWitness) -> Self {
        B2Verdict {
            is_b2: false,
            witness: Some(witness),
        }
    }
}

/// Returned when a set that must be B₂ is not.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a B2 set: {witness}")]
pub struct NotB2Error {
    pub witness: CollisionWitness,
}

/// Checks the distinct-sums property via a bit table over [2, 2N],
/// O(k²) time. Empty and one-element sets pass vacuously.
pub fn verify_b2(set: &B2Set) -> B2Verdict {
    verify_b2_with_budget(set, DEFAULT_SUM_TABLE_BITS)
}

/// As [`verify_b2`], with an explicit bit budget for the sum table.
pub fn verify_b2_with_budget(set: &B2Set, budget_bits: u64) -> B2Verdict {
    if set.len() < 2 {
        return B2Verdict::pass();
    }
    if 2 * set.ambient_bound() + 2 <= budget_bits {
        verify_sums_bit_table(set.elements())
    } else {
        verify_sums_sorted(set.elements())
    }
}

fn verify_sums_bit_table(elements: &[u64]) -> B2Verdict {
    let max = *elements.last().unwrap();
    let words = (2 * max + 2).div_ceil(64) as usize;
    let mut bits = vec![0u64; words];
    let mut smallest_dup: Option<u64> = None;
    for (i, &hi) in elements.iter().enumerate() {
        for &lo in &elements[..=i] {
            let s = hi + lo;
            let (w, b) = ((s / 64) as usize, s % 64);
            if bits[w] >> b & 1 == 1 {
                smallest_dup = Some(smallest_dup.map_or(s, |cur| cur.min(s)));
            } else {
                bits[w] |= 1 << b;
            }
        }
    }
    match smallest_dup {
        None => B2Verdict::pass(),
        Some(s) => B2Verdict::fail(witness_for_sum(elements, s)),
    }
}

/// Reconstructs the canonical witness for the colliding sum `s`: the two
/// representations (hi, lo) with the smallest larger elements.
fn witness_for_sum(elements: &[u64], s: u64) -> CollisionWitness {
    let mut reps: Vec<(u64, u64)> = Vec::with_capacity(2);
    // Scanning the lower halves descending enumerates hi ascending.
    let cut = elements.partition_point(|&e| 2 * e <= s);
    for &lo in elements[..cut].iter().rev() {
        let hi = s - lo;
        if elements.binary_search(&hi).is_ok() {
            reps.push((hi, lo));
            if reps.len() == 2 {
                break;
            }
        }
    }
    assert_eq!(reps.len(), 2, "colliding sum must have two representations");
    CollisionWitness {
        a: reps[0].0,
        b: reps[0].1,
        c: reps[1].0,
        d: reps[1].1,
    }
}

/// Sorted-pairs fallback for windows whose bit table would not fit in the
/// budget. Produces the same canonical witness as the bit-table path.
fn verify_sums_sorted(elements: &[u64]) -> B2Verdict {
    let k = elements.len();
    let mut sums: Vec<(u64, u64, u64)> = Vec::with_capacity(k * (k + 1) / 2);
    for (i, &hi) in elements.iter().enumerate() {
        for &lo in &elements[..=i] {
            sums.push((hi + lo, hi, lo));
        }
    }
    sums.sort_unstable();
    for pair in sums.windows(2) {
        if pair[0].0 == pair[1].0 {
            return B2Verdict::fail(CollisionWitness {
                a: pair[0].1,
                b: pair[0].2,
                c: pair[1].1,
                d: pair[1].2,
            });
        }
    }
    B2Verdict::pass()
}

/// All positive differences hi − lo (hi > lo), sorted ascending, repeats kept.
/// A set is B₂ exactly when this multiset has no repeats.
pub fn difference_multiset(set: &B2Set) -> Vec<u64> {
    let elements = set.elements();
    let k = elements.len();
    let mut diffs = Vec::with_capacity(k.saturating_sub(1) * k / 2);
    for (i, &hi) in elements.iter().enumerate() {
        for &lo in &elements[..i] {
            diffs.push(hi - lo);
        }
    }
    diffs.sort_unstable();
    diffs
}

/// Independent differences-route check. The verdict always equals
/// [`verify_b2`]'s; a repeated difference a−b = c−d is converted into the sum
/// collision a+d = c+b for the witness.
pub fn verify_b2_by_differences(set: &B2Set) -> B2Verdict {
    let elements = set.elements();
    let k = elements.len();
    if k < 2 {
        return B2Verdict::pass();
    }
    let mut diffs: Vec<(u64, u64, u64)> = Vec::with_capacity(k * (k - 1) / 2);
    for (i, &hi) in elements.iter().enumerate() {
        for &lo in &elements[..i] {
            diffs.push((hi - lo, hi, lo));
        }
    }
    diffs.sort_unstable();
    for pair in diffs.windows(2) {
        if pair[0].0 != pair[1].0 {
            continue;
        }
        let (h1, l1) = (pair[0].1, pair[0].2);
        let (h2, l2) = (pair[1].1, pair[1].2);
        // h1 − l1 = h2 − l2  ⇒  h1 + l2 = h2 + l1
        let p = (h1.max(l2), h1.min(l2));
        let q = (h2.max(l1), h2.min(l1));
        let (first, second) = if p <= q { (p, q) } else { (q, p) };
        return B2Verdict::fail(CollisionWitness {
            a: first.0,
            b: first.1,
            c: second.0,
            d: second.1,
        });
    }
    B2Verdict::pass()
}

/// Runs the verifier if needed and returns the set with its verified flag
/// set, or the collision that disqualifies it.
pub fn into_verified(mut set: B2Set) -> Result<B2Set, NotB2Error> {
    if set.is_verified() {
        return Ok(set);
    }
    let verdict = verify_b2(&set);
    match verdict.witness {
        None => {
            set.mark_verified();
            Ok(set)
        }
        Some(witness) => Err(NotB2Error { witness }),
    }
}
