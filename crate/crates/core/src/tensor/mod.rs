//! Dense matrices, binary sparse matrices and a reverse-mode tape over them.

mod matrix;
mod sparse;
mod tape;

pub use matrix::Matrix;
pub use sparse::Csr;
pub use tape::{Activation, Gradients, Tape, Var};
