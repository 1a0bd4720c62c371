//! Exact supertropical matrix algebra and factorization into tropical
//! elementary matrices.
//!
//! The scalars form the supertropical semiring: max-plus arithmetic over the
//! rationals, extended by a ghost copy that records when a maximum is
//! attained more than once. On matrices this gives an exact singularity
//! theory — the determinant (a permanent) is tangible precisely when one
//! permutation track dominates — and a constructive factorization theory:
//!
//! - any not strictly singular 2x2 matrix factors into elementary matrices
//!   ([`factor_2x2`]);
//! - 3x3 factorizability is decided by the entry conditions of the normal
//!   form, with an explicit witness when it fails ([`factor_3x3`],
//!   [`is_factorizable_3x3`], [`detect_shift_counterexample`]);
//! - the quasi-inverse `adj(A)/det(A)` is factorizable in every dimension
//!   ([`factor_star`]), and for normal forms it coincides with the Kleene
//!   star and with the stabilized powers `A^k`, `k >= n-1`.
//!
//! All arithmetic is exact rational; there is no floating point anywhere.
//! The [`harness`] module holds reproducible generators, an independent
//! determinant oracle, and named property suites for the identities above.

mod assignment;
pub mod elementary;
pub mod error;
pub mod factor;
pub mod harness;
pub mod matrix;
pub mod perm;
pub mod scalar;

pub use elementary::{
    eval_factors, parse_factorization, push_type3_left, render_factorization, ElementaryMatrix,
    ElementaryOp, Factorization, VerifyMode,
};
pub use error::{Error, Result};
pub use factor::{
    detect_shift_counterexample, entry_conditions, factor_2x2, factor_3x3, factor_invertible,
    factor_star, factor_triangular, invert_monomial, is_factorizable_3x3, normal_form,
    row_recovery_check, EntryConditions, NonFactorizabilityWitness, NormalForm, Relation,
    RowRecovery, StarFactorization,
};
pub use harness::{
    gen_invertible, gen_matrix, gen_normal_form, oracle_determinant, run_property, Counterexample,
    GeneratorConfig, PropertyReport, Rng, SUITE_NAMES,
};
pub use matrix::{DominantTrackReport, Matrix, Mode, SingularityClass, Triangularity};
pub use perm::Permutation;
pub use scalar::Scalar;
