//! Residue-class analysis of verified B₂ sets.
//!
//! For a set A ⊆ {1,…,N} with k elements and a modulus m, this module
//! reports how far the residue counts a(x) sit from the flat profile k/m,
//! compares the ℓ² deviation against a two-branch reference bound in
//! N, k, m, classifies which uniformity regime the instance falls in, and
//! re-checks — exactly, in integers — the counting identities that connect
//! the deviation to the difference structure of A:
//!
//! ```text
//! d(0) = k + 2·N_m,     Σ_j d(j) = k²,     d(j) ≤ d(0),     d(0) ≥ ⌈k²/m⌉,
//! ```
//!
//! where d(j) counts ordered pairs with a − b ≡ j (mod m) and N_m counts
//! positive differences divisible by m. These hold for every B₂ set; the
//! analysis demands a verified input because the first identity is exactly
//! what distinct differences buy.

use crate::model::{B2Set, DeviationStats, DifferenceCorrelation, ResidueProfile};
use crate::verify::{self, NotB2Error};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("ambient bound must be at least 1")]
    ZeroAmbientBound,
    #[error("modulus must be at least 1")]
    ZeroModulus,
    /// The input failed the distinct-sums check; nothing here applies to it.
    #[error(transparent)]
    NotB2(#[from] NotB2Error),
}

/// The two-branch deviation bound and the finite surrogates of its
/// hypotheses. The absolute constant in front of the bound is deliberately
/// set to 1; callers report the measured ratio instead of assuming one.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: u64,
    pub k: u64,
    pub m: u64,
    /// Density shortfall ℓ = √N − k; negative for sets denser than √N.
    pub ell: f64,
    /// N^{1/4}·√m, the cut between the two branches.
    pub threshold: f64,
    /// 1 when ℓ ≤ threshold (in particular whenever ℓ ≤ 0), else 2.
    pub branch: u8,
    /// N^{3/8}/m^{1/4} on branch 1, N^{1/4}·√ℓ/√m on branch 2.
    pub bound_value: f64,
    /// Exact integer comparison m² < N.
    pub m_squared_below_n: bool,
    /// ℓ/√N: a finite stand-in for "ℓ is small next to √N".
    pub ell_over_sqrt_n: f64,
    /// m/√N: a finite stand-in for "m is small next to √N".
    pub m_over_sqrt_n: f64,
}

/// Evaluates the reference bound for deviation of residue counts from k/m.
pub fn theorem2_bound(n: u64, k: u64, m: u64) -> Result<BoundReport, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::ZeroAmbientBound);
    }
    if m == 0 {
        return Err(AnalysisError::ZeroModulus);
    }
    let nf = n as f64;
    let mf = m as f64;
    let sqrt_n = nf.sqrt();
    let ell = sqrt_n - k as f64;
    let threshold = nf.powf(0.25) * mf.sqrt();
    let (branch, bound_value) = if ell <= threshold {
        (1, nf.powf(0.375) / mf.powf(0.25))
    } else {
        (2, nf.powf(0.25) * ell.sqrt() / mf.sqrt())
    };
    Ok(BoundReport {
        n,
        k,
        m,
        ell,
        threshold,
        branch,
        bound_value,
        m_squared_below_n: m.checked_mul(m).is_some_and(|mm| mm < n),
        ell_over_sqrt_n: ell / sqrt_n,
        m_over_sqrt_n: mf / sqrt_n,
    })
}

/// Which uniformity regime a (N, k, m) instance falls in, with the
/// asymptotic smallness conditions replaced by reported finite ratios
/// (cut at 1 for the boolean verdict — a heuristic, not a guarantee).
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeClassification {
    /// ℓ ≤ N^{1/4}√m — the same comparison that selects branch 1.
    pub case1: bool,
    /// m / N^{1/6}; small values favor uniformity in case 1.
    pub m_vs_n16: f64,
    /// m·ℓ / √N; small values favor uniformity in case 2.
    pub m_vs_halfpower: f64,
    /// The ratio relevant to the active case is below 1.
    pub predicted_uniform: bool,
}

pub fn classify_regime(bound: &BoundReport) -> RegimeClassification {
    let nf = bound.n as f64;
    let mf = bound.m as f64;
    let case1 = bound.branch == 1;
    let m_vs_n16 = mf / nf.powf(1.0 / 6.0);
    let m_vs_halfpower = mf * bound.ell / nf.sqrt();
    let predicted_uniform = if case1 {
        m_vs_n16 < 1.0
    } else {
        m_vs_halfpower < 1.0
    };
    RegimeClassification {
        case1,
        m_vs_n16,
        m_vs_halfpower,
        predicted_uniform,
    }
}

/// Every intermediate quantity of the counting argument for one (A, m),
/// with the identity checks done in exact integer arithmetic.
///
/// The boolean identity fields are provable facts for genuine B₂ sets and
/// must come out true; `dichotomy_holds` is data at finite scale, reported
/// but not guaranteed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofTrace {
    pub m: u64,
    pub k: u64,
    pub n: u64,
    pub d: DifferenceCorrelation,
    /// Number of positive differences divisible by m.
    pub n_m: u64,
    /// d(0) = k + 2·N_m.
    pub identity_d0: bool,
    /// d(0)·m ≥ k², i.e. d(0) ≥ ⌈k²/m⌉.
    pub lower_d0: bool,
    /// max_j d(j) = d(0).
    pub cauchy_schwarz: bool,
    /// Σ_j d(j) = k².
    pub sum_dj: bool,
    /// ε = c·(m·N^{−1/2})^{1/2}.
    pub epsilon: f64,
    /// Largest difference divisible by m; 0 when none is.
    pub lambda_max_div_m: u64,
    /// N ≥ (2−ε)·m·N_m.
    pub dichotomy_holds: bool,
    /// The slack parameter the caller chose for ε.
    pub c: f64,
}

fn ensure_b2(set: &B2Set) -> Result<(), AnalysisError> {
    if set.is_verified() {
        return Ok(());
    }
    match verify::verify_b2(set).witness {
        None => Ok(()),
        Some(witness) => Err(NotB2Error { witness }.into()),
    }
}

/// Computes the full trace for (A, m) with slack parameter `c`.
pub fn proof_trace(set: &B2Set, m: u64, c: f64) -> Result<ProofTrace, AnalysisError> {
    if m == 0 {
        return Err(AnalysisError::ZeroModulus);
    }
    ensure_b2(set)?;
    let k = set.len() as u64;
    let n = set.ambient_bound();
    let diffs = verify::difference_multiset(set);
    let n_m = diffs.iter().filter(|&&d| d % m == 0).count() as u64;
    let lambda_max_div_m = diffs.iter().rfind(|&&d| d % m == 0).copied().unwrap_or(0);
    let profile = ResidueProfile::of_set(set, m).expect("modulus is nonzero");
    let d = DifferenceCorrelation::from_profile(&profile);
    let d0 = d.d0();
    let kk = k as u128 * k as u128;
    let identity_d0 = d0 as u128 == k as u128 + 2 * n_m as u128;
    let lower_d0 = d0 as u128 * m as u128 >= kk;
    let cauchy_schwarz = d.values().iter().all(|&v| v <= d0);
    let sum_dj = d.values().iter().map(|&v| v as u128).sum::<u128>() == kk;
    let epsilon = c * (m as f64 / (n as f64).sqrt()).sqrt();
    let dichotomy_holds = n as f64 >= (2.0 - epsilon) * m as f64 * n_m as f64;
    Ok(ProofTrace {
        m,
        k,
        n,
        d,
        n_m,
        identity_d0,
        lower_d0,
        cauchy_schwarz,
        sum_dj,
        epsilon,
        lambda_max_div_m,
        dichotomy_holds,
        c,
    })
}

/// The composite picture for one (A, m): profile, deviations, bound,
/// regime, trace, and the two headline ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRecord {
    pub profile: ResidueProfile,
    pub deviation: DeviationStats,
    pub bound: BoundReport,
    pub regime: RegimeClassification,
    pub trace: ProofTrace,
    /// dev_l2 / bound_value — the empirical stand-in for the absolute
    /// constant in front of the bound.
    pub ratio_l2: f64,
    /// dev_linf / (k/m); undefined (None) for the empty set.
    pub uniformity: Option<f64>,
}

impl AnalysisRecord {
    /// One flat row (the CSV schema and the JSON object share these names).
    pub fn flat(&self) -> FlatRecord {
        FlatRecord {
            n: self.bound.n,
            k: self.bound.k,
            ell: self.bound.ell,
            m: self.bound.m,
            dev_l2: self.deviation.l2,
            dev_linf: self.deviation.linf,
            bound: self.bound.bound_value,
            branch: self.bound.branch,
            ratio_l2: self.ratio_l2,
            uniformity: self.uniformity,
            n_m: self.trace.n_m,
            d0: self.trace.d.d0(),
            epsilon: self.trace.epsilon,
            dichotomy: self.trace.dichotomy_holds,
        }
    }
}

/// Flat serialization of an [`AnalysisRecord`]: field order here is column
/// order in CSV reports, and the serialized names match the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatRecord {
    #[serde(rename = "N")]
    pub n: u64,
    pub k: u64,
    pub ell: f64,
    pub m: u64,
    pub dev_l2: f64,
    pub dev_linf: f64,
    pub bound: f64,
    pub branch: u8,
    pub ratio_l2: f64,
    pub uniformity: Option<f64>,
    #[serde(rename = "N_m")]
    pub n_m: u64,
    pub d0: u64,
    pub epsilon: f64,
    pub dichotomy: bool,
}

/// Runs the whole analysis for (A, m) with slack parameter `c`.
///
/// The set must pass the distinct-sums check (it is re-checked unless the
/// verified flag is already set); unverified failures are rejected because
/// none of the identities are owed to a non-B₂ set.
pub fn analyze_set(set: &B2Set, m: u64, c: f64) -> Result<AnalysisRecord, AnalysisError> {
    let trace = proof_trace(set, m, c)?;
    let profile = ResidueProfile::of_set(set, m).expect("modulus is nonzero");
    let deviation = DeviationStats::from_profile(&profile);
    let bound = theorem2_bound(set.ambient_bound(), set.len() as u64, m)?;
    let regime = classify_regime(&bound);
    let ratio_l2 = deviation.l2 / bound.bound_value;
    let uniformity = (!set.is_empty()).then(|| deviation.linf * m as f64 / set.len() as f64);
    Ok(AnalysisRecord {
        profile,
        deviation,
        bound,
        regime,
        trace,
        ratio_l2,
        uniformity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{bose_chowla, erdos_turan, singer};

    #[test]
    fn bound_branch1_dense_example() {
        let b = theorem2_bound(50, 5, 5).unwrap();
        assert!((b.ell - 2.071_067_811_865_475_5).abs() < 1e-12);
        assert!((b.threshold - 5.946_035_6).abs() < 1e-6);
        assert_eq!(b.branch, 1);
        assert!((b.bound_value - 2.899_82).abs() < 1e-4);
        assert!(b.m_squared_below_n); // 25 < 50
    }

    #[test]
    fn bound_branch1_negative_ell() {
        let b = theorem2_bound(8, 3, 2).unwrap();
        assert!((b.ell - (8f64.sqrt() - 3.0)).abs() < 1e-15);
        assert!(b.ell < 0.0);
        assert_eq!(b.branch, 1);
        assert!((b.bound_value - 1.834_008_086_409_342_4).abs() < 1e-9);
    }

    #[test]
    fn bound_branch2_sparse_example() {
        let b = theorem2_bound(100, 4, 2).unwrap();
        assert_eq!(b.ell, 6.0);
        assert!((b.threshold - 4.472_135_954_999_58).abs() < 1e-9);
        assert_eq!(b.branch, 2);
        assert!((b.bound_value - 30f64.sqrt()).abs() < 1e-9);
        assert!(b.m_squared_below_n);
    }

    #[test]
    fn bound_rejects_degenerate_inputs() {
        assert_eq!(
            theorem2_bound(0, 1, 1).unwrap_err(),
            AnalysisError::ZeroAmbientBound
        );
        assert_eq!(
            theorem2_bound(10, 1, 0).unwrap_err(),
            AnalysisError::ZeroModulus
        );
    }

    #[test]
    fn regime_agrees_with_branch_and_cuts_at_one() {
        for (n, k, m) in [
            (50u64, 5u64, 5u64),
            (8, 3, 2),
            (100, 4, 2),
            (1_000_000, 900, 2),
        ] {
            let b = theorem2_bound(n, k, m).unwrap();
            let r = classify_regime(&b);
            assert_eq!(r.case1, b.branch == 1);
        }
        // Dense instance, tiny m: case 1 with m below N^{1/6}.
        let b = theorem2_bound(1_000_000, 995, 2).unwrap();
        let r = classify_regime(&b);
        assert!(r.case1 && r.m_vs_n16 < 1.0 && r.predicted_uniform);
        // Sparse instance with small m·ℓ/√N: case 2 prediction.
        let b = theorem2_bound(1_000_000, 900, 2).unwrap();
        let r = classify_regime(&b);
        assert!(!r.case1);
        assert!((r.m_vs_halfpower - 0.2).abs() < 1e-12);
        assert!(r.predicted_uniform);
    }

    #[test]
    fn trace_of_quadratic_set_mod_5() {
        let set = erdos_turan(5).unwrap().set;
        let t = proof_trace(&set, 5, 1.0).unwrap();
        assert_eq!(t.n_m, 2);
        assert_eq!(t.d.values(), &[9, 4, 4, 4, 4]);
        assert_eq!(t.lambda_max_div_m, 30);
        assert!(t.identity_d0 && t.lower_d0 && t.cauchy_schwarz && t.sum_dj);
        assert!((t.epsilon - 0.840_896_415_253_714_5).abs() < 1e-12);
        assert!(t.dichotomy_holds); // 50 ≥ (2−ε)·5·2 ≈ 11.59
    }

    #[test]
    fn trace_of_gf9_set_mod_2() {
        let set = bose_chowla(3).unwrap().set; // {1, 6, 7} in {1,…,8}
        let t = proof_trace(&set, 2, 1.0).unwrap();
        assert_eq!(t.d.d0(), 5);
        assert_eq!(t.n_m, 1); // differences 1, 5, 6 — only 6 is even
        assert!(t.identity_d0); // 5 = 3 + 2·1
        assert_eq!(t.lambda_max_div_m, 6);
    }

    #[test]
    fn trace_modulus_one_is_forced() {
        let set = singer(5).unwrap().set;
        let k = set.len() as u64;
        let t = proof_trace(&set, 1, 1.0).unwrap();
        assert_eq!(t.n_m, k * (k - 1) / 2);
        assert_eq!(t.d.values(), &[k * k]);
        assert!(t.identity_d0 && t.lower_d0 && t.cauchy_schwarz && t.sum_dj);
    }

    #[test]
    fn trace_rejects_non_b2_and_zero_modulus() {
        let bad = B2Set::new(vec![1, 2, 3], 3).unwrap();
        let err = proof_trace(&bad, 2, 1.0).unwrap_err();
        assert!(err.to_string().contains("2+2 = 3+1"));
        let good = B2Set::new(vec![1, 2], 2).unwrap();
        assert_eq!(
            proof_trace(&good, 0, 1.0).unwrap_err(),
            AnalysisError::ZeroModulus
        );
    }

    #[test]
    fn analyze_quadratic_set_mod_5() {
        let set = erdos_turan(5).unwrap().set;
        let rec = analyze_set(&set, 5, 1.0).unwrap();
        assert_eq!(rec.deviation.l2, 2.0);
        assert_eq!(rec.deviation.linf, 1.0);
        assert!((rec.ratio_l2 - 0.6897).abs() < 1e-3);
        assert_eq!(rec.uniformity, Some(1.0));
        let flat = rec.flat();
        assert_eq!((flat.n, flat.k, flat.m), (50, 5, 5));
        assert_eq!((flat.n_m, flat.d0, flat.branch), (2, 9, 1));
        assert!(flat.dichotomy);
    }

    #[test]
    fn analyze_scales_epsilon_with_c() {
        let set = erdos_turan(5).unwrap().set;
        let rec = analyze_set(&set, 5, 2.5).unwrap();
        assert!((rec.trace.epsilon - 2.5 * 0.840_896_415_253_714_5).abs() < 1e-12);
    }

    #[test]
    fn analyze_empty_set_has_no_uniformity_ratio() {
        let empty = B2Set::new(vec![], 5).unwrap();
        let rec = analyze_set(&empty, 2, 1.0).unwrap();
        assert_eq!(rec.uniformity, None);
        assert_eq!(rec.ratio_l2, 0.0);
        assert_eq!(rec.trace.n_m, 0);
    }

    #[test]
    fn analyze_rejects_non_b2() {
        let bad = B2Set::new(vec![1, 2, 3], 3).unwrap();
        assert!(matches!(
            analyze_set(&bad, 2, 1.0),
            Err(AnalysisError::NotB2(_))
        ));
    }

    #[test]
    fn flat_record_serializes_with_report_names() {
        let set = erdos_turan(5).unwrap().set;
        let rec = analyze_set(&set, 5, 1.0).unwrap();
        let json = serde_json::to_value(rec.flat()).unwrap();
        let obj = json.as_object().unwrap();
        for key in [
            "N",
            "k",
            "ell",
            "m",
            "dev_l2",
            "dev_linf",
            "bound",
            "branch",
            "ratio_l2",
            "uniformity",
            "N_m",
            "d0",
            "epsilon",
            "dichotomy",
        ] {
            assert!(obj.contains_key(key), "missing key {key}");
        }
        assert_eq!(obj["N"], 50);
        assert_eq!(obj["N_m"], 2);
    }

    /// Identity checks across all families and a sweep of moduli; these are
    /// provable facts for B₂ sets and must never fail.
    #[test]
    fn identities_hold_across_families_and_moduli() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            for set in [
                erdos_turan(p).unwrap().set,
                bose_chowla(p).unwrap().set,
                singer(p).unwrap().set,
            ] {
                for m in 1..=20 {
                    let t = proof_trace(&set, m, 1.0).unwrap();
                    assert!(
                        t.identity_d0 && t.lower_d0 && t.cauchy_schwarz && t.sum_dj,
                        "identity failed at p={p}, m={m}"
                    );
                }
            }
        }
    }
}
