//! Numerical toolkit for `(φ,ψ)`-hyperholomorphic function theory over the
//! Clifford algebra `R_{0,m}`, with a Riemann–Hilbert solver for
//! `(φ,ψ)`-harmonic functions on smooth and prefractal boundaries.

pub mod clifford;
pub mod error;
pub mod field;
pub mod geometry;
pub mod integral;
pub mod kernels;
pub mod operators;
pub mod rh;
pub mod stats;

pub use clifford::{embed_vector, remap_to_frame, validate_structural_set, Frame, Multivector, StructuralSet};
pub use error::{Error, Result};
pub use field::{AnalyticField, Derivatives, SmoothField};
pub use kernels::{eval_k_phipsi, eval_k_psi, sphere_area, KernelContext};
pub use operators::{dirac_fd, dirac_poly, factorization_residual, second_order_apply, MultiIndex, PolyField};
