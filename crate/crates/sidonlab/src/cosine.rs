//! Cosine polynomials c + Σ w_j·cos(λ_j x) with integer frequencies:
//! construction from B₂ sets, fast evaluation on equispaced grids, certified
//! global minimization, and the mod-m frequency filter.
//!
//! A B₂ set A with k elements induces the nonnegative polynomial
//! f(x) = |Σ_{a∈A} e^{iax}|² = k + 2·Σ cos(λ_j x), one term per positive
//! difference λ_j (distinctness of the differences is exactly what makes all
//! weights equal to 2), with f(0) = k².
//!
//! Minimization is a grid scan plus local ternary refinement; the result
//! carries a rigorous lower bound min − L·π/G obtained from the Lipschitz
//! constant L = Σ|w_j|·λ_j, valid regardless of how good the refinement is.
//! The mod-m filter keeps the terms with m | λ_j and divides their
//! frequencies by m; pointwise it equals averaging the polynomial over the
//! m shifted copies x + 2πt/m, which is checked in tests.

use crate::model::B2Set;
use crate::verify::{self, NotB2Error};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Work limit (terms × points) under which the automatic path picks direct
/// summation; larger jobs go through the FFT.
pub const DIRECT_EVAL_WORK_LIMIT: u128 = 1 << 23;

/// Grid cap; denser scans would silently exhaust memory instead of failing.
pub const MAX_GRID_POINTS: usize = 1 << 27;

/// Default grid oversampling for probes (points per unit frequency).
pub const PROBE_GRID_FACTOR: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CosineError {
    #[error("constant term is not finite")]
    NonFiniteConstant,
    #[error("frequencies must be strictly increasing integers ≥ 1")]
    BadFrequencies,
    #[error("weight for frequency {0} is not finite")]
    NonFiniteWeight(u64),
    #[error("grid needs at least one point")]
    EmptyGrid,
    #[error("grid of {got} points is too coarse for top frequency {lambda_max}: need {need}")]
    GridTooSmall {
        got: u64,
        need: u64,
        lambda_max: u64,
    },
    #[error("grid of {got} points exceeds the supported maximum {max}")]
    GridTooLarge { got: u64, max: u64 },
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error(transparent)]
    NotB2(#[from] NotB2Error),
    #[error("no frequencies given")]
    EmptyFrequencies,
    #[error("slack 2 − λ_max/N_terms = {epsilon} is not positive (λ_max = {lambda_max}, N_terms = {n_terms})")]
    NonpositiveSlack {
        lambda_max: u64,
        n_terms: u64,
        epsilon: f64,
    },
    #[error("numeric certification failed: minimum {min_value}, certified bound {certified}")]
    CertificationFailure { min_value: f64, certified: f64 },
}

/// x ↦ constant + Σ_j weight_j · cos(frequency_j · x), frequencies strictly
/// increasing positive integers. Weights are arbitrary finite reals so the
/// same type serves both the weight-2 expansion of a B₂ set and unit-weight
/// probes.
#[derive(Debug, Clone, PartialEq)]
pub struct CosinePolynomial {
    constant: f64,
    terms: Vec<(u64, f64)>,
}

impl CosinePolynomial {
    pub fn new(constant: f64, terms: Vec<(u64, f64)>) -> Result<Self, CosineError> {
        if !constant.is_finite() {
            return Err(CosineError::NonFiniteConstant);
        }
        let mut prev = 0u64;
        for &(lambda, w) in &terms {
            if lambda <= prev {
                return Err(CosineError::BadFrequencies);
            }
            if !w.is_finite() {
                return Err(CosineError::NonFiniteWeight(lambda));
            }
            prev = lambda;
        }
        Ok(CosinePolynomial { constant, terms })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// (frequency, weight) pairs, frequencies ascending.
    pub fn terms(&self) -> &[(u64, f64)] {
        &self.terms
    }

    /// Largest frequency; 0 for a constant polynomial.
    pub fn lambda_max(&self) -> u64 {
        self.terms.last().map_or(0, |&(l, _)| l)
    }

    /// L = Σ|w_j|·λ_j, a global bound on |derivative|.
    pub fn lipschitz_constant(&self) -> f64 {
        self.terms.iter().map(|&(l, w)| w.abs() * l as f64).sum()
    }

    /// Σ|w_j|, the natural scale for evaluation tolerances.
    pub fn weight_l1(&self) -> f64 {
        self.terms.iter().map(|&(_, w)| w.abs()).sum()
    }

    /// Pointwise evaluation with a fixed summation order (term order).
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.constant;
        for &(lambda, w) in &self.terms {
            acc += w * (lambda as f64 * x).cos();
        }
        acc
    }
}

/// The expansion k + 2·Σ cos(λ_j x) of |Σ_{a∈A} e^{iax}|², one term per
/// positive difference of the (verified) set.
pub fn cosine_from_b2(set: &B2Set) -> Result<CosinePolynomial, CosineError> {
    if !set.is_verified() {
        if let Some(witness) = verify::verify_b2(set).witness {
            return Err(NotB2Error { witness }.into());
        }
    }
    let terms = verify::difference_multiset(set)
        .into_iter()
        .map(|d| (d, 2.0))
        .collect();
    CosinePolynomial::new(set.len() as f64, terms)
}

/// How to evaluate on a grid: direct summation, FFT, or pick by work size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    Auto,
    Direct,
    Fft,
}

/// Values at x_t = 2πt/G for t = 0,…,G−1, path chosen automatically.
pub fn evaluate_grid(poly: &CosinePolynomial, grid_size: usize) -> Result<Vec<f64>, CosineError> {
    evaluate_grid_with(poly, grid_size, EvalPath::Auto)
}

/// As [`evaluate_grid`] with an explicit path. Both paths agree within
/// 1e−9·(|constant| + Σ|w_j|) relative scale and are individually
/// deterministic (fixed summation order; no data-dependent parallelism).
pub fn evaluate_grid_with(
    poly: &CosinePolynomial,
    grid_size: usize,
    path: EvalPath,
) -> Result<Vec<f64>, CosineError> {
    if grid_size == 0 {
        return Err(CosineError::EmptyGrid);
    }
    if grid_size > MAX_GRID_POINTS {
        return Err(CosineError::GridTooLarge {
            got: grid_size as u64,
            max: MAX_GRID_POINTS as u64,
        });
    }
    let path = match path {
        EvalPath::Auto => {
            if poly.terms.len() as u128 * grid_size as u128 <= DIRECT_EVAL_WORK_LIMIT {
                EvalPath::Direct
            } else {
                EvalPath::Fft
            }
        }
        chosen => chosen,
    };
    Ok(match path {
        EvalPath::Direct => evaluate_direct(poly, grid_size),
        EvalPath::Fft => evaluate_fft(poly, grid_size),
        EvalPath::Auto => unreachable!("auto resolved above"),
    })
}

/// O(terms·G): one shared cosine table, per-term stride walks. cos(λ·2πt/G)
/// = table[λt mod G] because the grid is exactly the G-th roots of unity.
fn evaluate_direct(poly: &CosinePolynomial, grid_size: usize) -> Vec<f64> {
    let g = grid_size;
    let mut table = Vec::with_capacity(g);
    for t in 0..g {
        table.push((2.0 * PI * t as f64 / g as f64).cos());
    }
    let mut out = vec![poly.constant; g];
    for &(lambda, w) in &poly.terms {
        let stride = (lambda % g as u64) as usize;
        let mut idx = 0usize;
        for v in out.iter_mut() {
            *v += w * table[idx];
            idx += stride;
            if idx >= g {
                idx -= g;
            }
        }
    }
    out
}

/// O(G log G): fold weights into the length-G spectrum (frequency λ lands
/// in bin λ mod G) and apply one unnormalized inverse transform; the real
/// part is the cosine sum.
fn evaluate_fft(poly: &CosinePolynomial, grid_size: usize) -> Vec<f64> {
    let mut buf = vec![Complex::new(0.0f64, 0.0); grid_size];
    for &(lambda, w) in &poly.terms {
        buf[(lambda % grid_size as u64) as usize].re += w;
    }
    FftPlanner::new()
        .plan_fft_inverse(grid_size)
        .process(&mut buf);
    buf.into_iter().map(|z| poly.constant + z.re).collect()
}

/// A certified global minimum: the refined value plus a rigorous lower
/// bound derived from the Lipschitz constant and the grid pitch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizationResult {
    /// Location of the reported minimum in [0, 2π).
    pub argmin_x: f64,
    /// Best value found (never above any grid value).
    pub min_value: f64,
    /// min_value − L·π/G ≤ the true global minimum.
    pub certified_lower_bound: f64,
    pub grid_size: usize,
    pub lipschitz_constant: f64,
}

/// Grid scan plus 60 rounds of ternary refinement on the two grid cells
/// adjacent to the best grid point.
///
/// With terms present the grid must resolve the top frequency:
/// G ≥ max(8·λ_max, 64). The certificate is crude but sound: between grid
/// points the function cannot drop by more than L·(π/G).
pub fn minimize(
    poly: &CosinePolynomial,
    grid_size: usize,
) -> Result<MinimizationResult, CosineError> {
    if grid_size == 0 {
        return Err(CosineError::EmptyGrid);
    }
    let lambda_max = poly.lambda_max();
    if !poly.terms.is_empty() {
        let need = (8 * lambda_max).max(64);
        if (grid_size as u64) < need {
            return Err(CosineError::GridTooSmall {
                got: grid_size as u64,
                need,
                lambda_max,
            });
        }
    }
    let values = evaluate_grid(poly, grid_size)?;
    let mut best_t = 0usize;
    let mut best_v = values[0];
    for (t, &v) in values.iter().enumerate().skip(1) {
        if v < best_v {
            best_v = v;
            best_t = t;
        }
    }
    let h = 2.0 * PI / grid_size as f64;
    let x0 = best_t as f64 * h;
    let (mut lo, mut hi) = (x0 - h, x0 + h);
    for _ in 0..60 {
        let third = (hi - lo) / 3.0;
        let m1 = lo + third;
        let m2 = hi - third;
        if poly.eval(m1) <= poly.eval(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let x_refined = 0.5 * (lo + hi);
    let v_refined = poly.eval(x_refined);
    let (argmin_x, min_value) = if v_refined < best_v {
        (x_refined, v_refined)
    } else {
        (x0, best_v)
    };
    let lipschitz_constant = poly.lipschitz_constant();
    let certified_lower_bound = min_value - lipschitz_constant * PI / grid_size as f64;
    if !(min_value.is_finite()
        && certified_lower_bound.is_finite()
        && certified_lower_bound <= min_value)
    {
        return Err(CosineError::CertificationFailure {
            min_value,
            certified: certified_lower_bound,
        });
    }
    Ok(MinimizationResult {
        argmin_x: argmin_x.rem_euclid(2.0 * PI),
        min_value,
        certified_lower_bound,
        grid_size,
        lipschitz_constant,
    })
}

/// Keeps the terms whose frequency m divides and divides those frequencies
/// by m; the constant rides along unchanged.
///
/// Pointwise this equals the m-fold shift average: writing q(x) =
/// (1/m)·Σ_{t<m} p(x + 2πt/m) (which kills every term with m ∤ λ), the
/// returned r satisfies r(m·x) = q(x); q has period 2π/m, so r sweeps the
/// same values over a full period.
pub fn mod_filter(poly: &CosinePolynomial, m: u64) -> Result<CosinePolynomial, CosineError> {
    if m == 0 {
        return Err(CosineError::ZeroModulus);
    }
    let terms = poly
        .terms
        .iter()
        .filter(|&&(lambda, _)| lambda % m == 0)
        .map(|&(lambda, w)| (lambda / m, w))
        .collect();
    CosinePolynomial::new(poly.constant, terms)
}

/// Empirical probe of the minimum-mass lower bound for unit-weight cosine
/// sums with frequencies in [1, (2−ε)·N_terms].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    #[serde(rename = "N_terms")]
    pub n_terms: u64,
    pub lambda_max: u64,
    /// ε = 2 − λ_max/N_terms; must be positive for the probe to make sense.
    pub epsilon: f64,
    /// −(certified-path minimum of Σ cos λ_j x); positive for any nonempty
    /// frequency set since the sum has mean zero.
    #[serde(rename = "M_star")]
    pub m_star: f64,
    /// M_star / (ε²·N_terms) — the per-instance estimate of the absolute
    /// constant in the lower bound.
    #[serde(rename = "A_empirical")]
    pub a_empirical: f64,
    /// Whether ε > 3/N_terms; small instances fail this floor and the
    /// probe reports them with no claim attached.
    pub epsilon_exceeds_3_over_n: bool,
}

/// Probes a strictly increasing frequency list with the default grid factor.
pub fn theorem1_probe(frequencies: &[u64]) -> Result<ProbeReport, CosineError> {
    probe_with_minimization(frequencies, PROBE_GRID_FACTOR).map(|(report, _)| report)
}

/// As [`theorem1_probe`], also returning the underlying minimization.
/// `grid_factor` is clamped below at 8 so certificates stay meaningful.
pub fn probe_with_minimization(
    frequencies: &[u64],
    grid_factor: usize,
) -> Result<(ProbeReport, MinimizationResult), CosineError> {
    if frequencies.is_empty() {
        return Err(CosineError::EmptyFrequencies);
    }
    let terms: Vec<(u64, f64)> = frequencies.iter().map(|&l| (l, 1.0)).collect();
    let poly = CosinePolynomial::new(0.0, terms)?;
    let n_terms = frequencies.len() as u64;
    let lambda_max = poly.lambda_max();
    let epsilon = 2.0 - lambda_max as f64 / n_terms as f64;
    if lambda_max >= 2 * n_terms {
        return Err(CosineError::NonpositiveSlack {
            lambda_max,
            n_terms,
            epsilon,
        });
    }
    let grid = grid_factor
        .max(8)
        .saturating_mul(lambda_max as usize)
        .max(64);
    let minimization = minimize(&poly, grid)?;
    let m_star = -minimization.min_value;
    let a_empirical = m_star / (epsilon * epsilon * n_terms as f64);
    let report = ProbeReport {
        n_terms,
        lambda_max,
        epsilon,
        m_star,
        a_empirical,
        epsilon_exceeds_3_over_n: epsilon > 3.0 / n_terms as f64,
    };
    Ok((report, minimization))
}
