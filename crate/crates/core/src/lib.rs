//! Harmonic immersions of planar domains into 3-space.
//!
//! The library builds surfaces `X = (L + conj(P), h)` from two holomorphic
//! functions and a harmonic height, converts between that representation and
//! the Weierstrass triple `Φ = (φ₁, φ₂, φ₃)`, measures quasiconformal
//! dilatation, classifies rotational members of the family, solves the
//! two-coaxial-circle existence problem with exact root counting, and meshes
//! the results to OBJ.

pub mod cexpr;
pub mod hfield;
pub mod quad;

pub use cexpr::{
    antiderivative, holomorphy_residual, parse, CExpr, EvalError, FuncKind, HoloFn, NoClosedForm,
    ParseError, Route, Singularities,
};
pub use hfield::{laplacian_fd, Domain, DomainError, HarmonicField};
pub use quad::{integrate_path, integrate_path_fn, polygon_loop, QuadError};
