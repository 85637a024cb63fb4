//! Dense multilinear algebra in dimension 8 and the Spin(7) algebra of
//! Cayley 4-forms.
//!
//! Index placement is explicit: tensors store components with the slots
//! they were built with, and every raise or lower goes through a [`Metric`].
//! Brackets `[..]` and `(..)` always mean weight-one averages.

pub mod form;
pub mod io;
pub mod metric;
pub mod perm;
pub mod random;
pub mod spin7;
pub mod tensor;

pub use form::{epsilon8, AltForm, FormError};
pub use metric::{Metric, MetricError};
pub use spin7::{CayleyStructure, Decomposition, FormOperator, IdentityReport, Psi27, Space, Spin7Error};
pub use tensor::{contract, einsum, try_einsum, Tensor, TensorError};

pub const DIM: usize = 8;

pub type Mat8 = nalgebra::SMatrix<f64, 8, 8>;
