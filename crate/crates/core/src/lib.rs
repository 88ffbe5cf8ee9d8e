//! Exact symbolic computation of the relations between complete, connected
//! and 1PI n-point functions, driven by the coproduct of the graded
//! symmetric algebra over a finite set of field labels.
//!
//! * [`algebra`]: labels, monomials, elements and tensors with Koszul signs
//! * [`coalgebra`]: coproduct, counit, iterated and truncated coproducts
//! * [`functional`]: linear forms, convolution, `exp_⋆` and `log_⋆`
//! * [`tree`]: the R/Q/Λ recursion, tree extraction and σ from τ
//! * [`model`]: JSON toy models and evaluation pipelines
//! * [`oracle`]: brute-force references used by the tests

pub mod algebra;
pub mod coalgebra;
pub mod export;
pub mod functional;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod tree;

pub use algebra::{AlgebraElement, AlgebraError, LabelId, LabelRegistry, Monomial, Parity, TensorElement};
pub use coalgebra::Truncation;
pub use functional::{convolve, star_exp, star_log, Functional, FunctionalError};
pub use model::{load_model, FiniteModel, ModelError, Role};
pub use scalar::Scalar;
pub use tree::{Mode, PropagatorMatrix, PropagatorRole, TreeError, TreeGraph};
