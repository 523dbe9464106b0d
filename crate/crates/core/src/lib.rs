//! Minimal square spectral factors by zero- and pole-flipping.
//!
//! Starting from a reference factor W(z) = C(zI − A)⁻¹B + D, every other
//! minimal square factor of the same spectral density Φ(z) = W(z)Wᵀ(z⁻¹)
//! is obtained by moving a chosen set of zeros and a chosen set of poles to
//! their reciprocal positions. Zero flips are parametrized by the symmetric
//! solutions P of one homogeneous Riccati equation (kernel: a Γᵀ-invariant
//! subspace), pole flips by the solutions Q of another (kernel: an
//! A-invariant subspace), and the combined factor comes from the closed
//! form P_Q = [PP†QPP† + P†]†.
//!
//! The crate is `no_std` + `alloc` with the default `std` feature turned off.
//!
//! ```
//! use specfac_core::{check_admissible, flip_both, FlipSpec, StateSpaceModel, spectra_match};
//!
//! let reference = StateSpaceModel::scalar(0.5, 1.0, 1.0, 1.0).unwrap();
//! let fam = check_admissible(&reference).unwrap();
//! // flip the zero at -0.5 and the pole at 0.5: W(z) = (z + 2)/(z - 2)
//! let flipped = flip_both(&fam, &FlipSpec::flip_all()).unwrap();
//! assert!((flipped.d()[(0, 0)] - 1.0).abs() < 1e-12);
//! assert!(spectra_match(&reference, &flipped, 64) < 1e-10);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x <= tol)` is deliberate throughout: a NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod flip;
pub mod kernel;
pub mod realization;
pub mod riccati;
pub mod verify;

pub use error::{Error, Result};
pub use flip::{enumerate_factors, flip_both, flip_both_dual, flip_poles, flip_zeros, total_flip, FlipSpec};
pub use kernel::{InvariantSubspace, Matrix, SchurStructure};
pub use realization::{check_admissible, random_admissible, ReferenceFamily, StateSpaceModel};
pub use riccati::{RiccatiSolution, SolutionKind};
pub use verify::{full_report, spectra_match, FlipReport, ReportConfig, Verdict};

pub use nalgebra;
pub use num_complex::Complex64;
