//! Constructive and numerical tooling for B₂ (Sidon) sets: subsets of
//! {1,…,N} in which every sum a + b with a ≥ b is distinct, or equivalently
//! every positive difference is distinct.
//!
//! The crate builds the four classical dense families (quadratic-residue,
//! finite-field logarithm, projective-plane difference sets, and the greedy
//! sequence), verifies the defining property with canonical collision
//! witnesses, and measures how such sets distribute over residue classes
//! mod m:
//!
//! - [`model`] — core types: validated sets, residue-count profiles,
//!   difference correlations, and scaled-integer deviation statistics whose
//!   central identity is checked exactly in integer arithmetic.
//! - [`verify`] — the distinct-sums check with a canonical witness for
//!   failures, plus the equivalent distinct-differences route.
//! - [`gf`] — arithmetic in GF(p^e) for e ≤ 3 with deterministic modulus
//!   and generator choices, so constructions are reproducible bit-for-bit.
//! - [`constructions`] — the four families with self-checked outputs.
//! - [`analysis`] — the two-branch deviation bound, regime classification,
//!   and the full integer-exact identity trace relating residue deviations,
//!   difference correlations, and the size dichotomy.
//! - [`cosine`] — nonnegative cosine polynomials attached to B₂ sets,
//!   FFT-backed grid evaluation, certified global minimization, and the
//!   mod-m frequency filter.
//! - [`experiment`] — a deterministic batch runner emitting flat CSV/JSON
//!   rows over (family, parameter, modulus) grids.

pub mod analysis;
pub mod constructions;
pub mod cosine;
pub mod experiment;
pub mod gf;
pub mod model;
pub mod verify;

pub use analysis::{
    analyze_set, classify_regime, proof_trace, theorem2_bound, AnalysisError, AnalysisRecord,
    BoundReport, FlatRecord, ProofTrace, RegimeClassification,
};
pub use constructions::{
    bose_chowla, construct, erdos_turan, mian_chowla, singer, ConstructionError,
    ConstructionOutput, Family,
};
pub use cosine::{
    cosine_from_b2, evaluate_grid, minimize, mod_filter, theorem1_probe, CosineError,
    CosinePolynomial, EvalPath, MinimizationResult, ProbeReport,
};
pub use experiment::{
    format_significant, run_experiment, run_to_file, ExperimentConfig, ExperimentError,
    ExperimentRow, ModuliSpec, OutputFormat, RunOutcome, SkipRecord,
};
pub use model::{B2Set, DeviationStats, DifferenceCorrelation, ModelError, ResidueProfile};
pub use verify::{verify_b2, B2Verdict, CollisionWitness, NotB2Error};
