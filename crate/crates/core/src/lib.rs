//! Finite-dimensional experiments around unital completely positive maps:
//! Choi/Kraus/Stinespring calculus, word-closure algebras, a semidefinite
//! search for maps that extend the identity on a generator set, exact Toeplitz
//! arithmetic on `ℓ²(ℕ)`, and Korovkin-type convergence runs.

pub mod cpmaps;
pub mod error;
pub mod fixtures;
pub mod korovkin;
pub mod linalg;
pub mod literal;
pub mod opsys;
pub mod rng;
pub mod toeplitz;
pub mod uep;

pub use cpmaps::{ChoiMatrix, KrausSet, StinespringDilation};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermEig};
pub use num_complex::Complex64;
pub use opsys::{AlgebraBasis, GeneratorSet};
pub use rng::CounterRng;
