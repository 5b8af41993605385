//! Weak and strong differentiability of bounded operators with respect to a
//! self-adjoint `D`, computed through band-indexed block matrices.
//!
//! * [`spectral`]: band decomposition of `D`, `e^{itD}`, `|D|`
//! * [`blockspace`]: block matrices `m(a)`, `m(D)`, commutators, truncations, forms
//! * [`derivatives`]: weak derivatives, boundedness verdicts, `|||·|||_n`, ncg norm
//! * [`dynamics`]: `α_t`, Lipschitz constants, continuity moduli, classification
//! * [`torus`]: multiplication operators on the circle as Toeplitz matrices
//! * [`schema`]: JSON ingestion and report emission (`opderiv/1`)

pub mod blockspace;
pub mod derivatives;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod norm;
pub mod operator;
pub mod schema;
pub mod spectral;
pub mod toeplitz;
pub mod torus;

pub use derivatives::{
    higher_derivative, n_norm, weak_derivative, wncg_norm, BoundednessStatus, BoundednessVerdict, DerivativeChain,
    DerivativeOptions,
};
pub use dynamics::{alpha, classify, Classification, ClassifyConfig, DiffReport};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use norm::{operator_norm, LinearOperator, NormOptions};
pub use operator::Operator;
pub use spectral::{abs_operator, band_decompose, unitary_group, BandDecomposition, SelfAdjointModel};
pub use toeplitz::Toeplitz;
