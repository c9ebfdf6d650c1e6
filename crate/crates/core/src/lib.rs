pub mod algebra;
pub mod cohomology;
pub mod document;
pub mod error;
pub mod lefschetz;
pub mod linalg;
pub mod massey;
pub mod minmodel;
pub mod models;
pub mod scalar;
pub mod symmetry;
pub mod verify;

pub use algebra::{Algebra, AlgebraMap, AlgebraSpec, Element, GeneratorDecl, Monomial, Term};
pub use error::{Error, Result};
pub use scalar::CycScalar;
pub use cohomology::{Class, CohomologyRing};
pub use document::{Document, Loaded};
