//! Numerics for a three-state non-Hermitian resonator model.
//!
//! The crate is `no_std` (it needs `alloc`) and covers:
//!
//! - [`model`]: the Hamiltonian, its characteristic polynomial, eigensystems
//!   and the discriminant,
//! - [`ep`]: location of exceptional points in parameter slices and
//!   continuation of exceptional arcs,
//! - [`transport`]: stroboscopic loop transport with biorthogonal parallel
//!   transport, permutations and non-Abelian Berry phase matrices,
//! - [`group`]: permutation algebra on three states (the dihedral group D3),
//! - [`lab`]: a synthetic Green's-function experiment and its inverse fit,
//! - [`scenarios`]: built-in loops.
//!
//! All dimensionless quantities use the hopping convention `kappa = -1`. Site
//! order is always `(B, A, C)`: index 1 is the middle cavity `A`.

#![no_std]

extern crate alloc;

pub mod cubic;
pub mod ep;
mod error;
pub mod group;
pub mod lab;
pub mod linalg;
pub mod model;
pub mod scenarios;
pub mod transport;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use num_complex::Complex64;

pub use group::{D3Label, PermutationElement};
pub use model::{Eigensystem, ParamPoint, PhysicalScale, PolyCoeffs};
