//! Analysis of Hamburger moment sequences.
//!
//! The crate works in exact rational arithmetic wherever the inputs allow it.
//! Hankel positivity, recurrence coefficients and sub-moment decisions are
//! computed on [`Rational`] values; only quantities that genuinely require
//! square roots or complex evaluation (orthonormal polynomials, Weyl circles,
//! quadrature nodes) are converted to `f64`, and always explicitly.
//!
//! Module map:
//!
//! * [`sequence`]: moment sequences, Hankel matrices, Hamburger / Stieltjes /
//!   Hausdorff tests.
//! * [`orthopoly`]: recurrence coefficients, orthonormal polynomials of the
//!   first and second kind, Jacobi matrices and Gauss quadrature.
//! * [`weyl`]: Weyl circles, Nevanlinna partial sums and determinacy
//!   diagnostics.
//! * [`measure`]: finitely atomic measures, pushforwards and transform
//!   identities.
//! * [`submoment`]: extraction masks and sub-moment positivity.
//! * [`completion`]: partial Hankel matrices and their positive completion.
//! * [`io`]: JSON / CSV file formats.

pub mod completion;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod orthopoly;
pub mod poly;
pub mod scalar;
pub mod sequence;
pub mod submoment;
pub mod weyl;

pub use completion::{
    complete_via_pullback, decide_completable, detect_pattern, inheritance_check,
    principal_submatrix, CompletionResult, CompletionStatus, Decision, PartialHankel, Pattern,
};
pub use error::{Error, Result};
pub use measure::DiscreteMeasure;
pub use orthopoly::{
    evaluate_polys, gauss_quadrature, recurrence_coefficients, JacobiMatrix, PolynomialPair,
    RecurrenceCoefficients,
};
pub use scalar::Rational;
pub use sequence::{
    hamburger_test, hankel, hausdorff_test, stieltjes_test, Exactness, Generator, HankelMatrix,
    MomentSequence, PositivityKind, PositivityVerdict,
};
pub use submoment::{extract, mask_universal_check, ExtractionMask, MaskVerdict, UniversalVerdict};
pub use weyl::{
    circle_equation_residual, circle_parametrization, determinacy_diagnostics, nevanlinna_partial,
    nevanlinna_transform, stieltjes_point, weyl_circle, DeterminacyReport, NevanlinnaQuad, Phi,
    WeylCircle,
};
