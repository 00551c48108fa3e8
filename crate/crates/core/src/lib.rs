//! Numerical laboratory for wave-particle duality in n-path interferometers.
//!
//! A quanton travelling through `n` paths is entangled with a which-path
//! detector. This crate builds those configurations, computes the normalized
//! l1 coherence `C` of the reduced quanton state and the path
//! distinguishability `D_Q` (the upper bound on the success probability of
//! unambiguous discrimination of the detector states), and checks the
//! relations between them:
//!
//! - `C + D_Q = 1` for pure quantons and pure detectors,
//! - `C + D_Q <= 1` for mixed quantons, with an explicit nonnegative slack,
//! - `C' + D_Q' <= 1` when the detector also starts in a mixed state.
//!
//! The [`interference`] module connects `C` to the fringe visibility of a
//! simulated far-field pattern for two and three slits, and [`duality`]
//! runs single evaluations, overlap sweeps and seeded randomized campaigns.
//!
//! ```
//! use duality_lab::{duality, states::{DetectorSet, PureQuanton}};
//!
//! let q = PureQuanton::equal(2).unwrap();
//! let d = DetectorSet::uniform_overlap(2, 0.6).unwrap();
//! let report = duality::evaluate_pure(&q, &d, &Default::default()).unwrap();
//! assert!((report.coherence - 0.6).abs() < 1e-12);
//! assert!((report.distinguishability - 0.4).abs() < 1e-12);
//! assert!(report.passed());
//! ```

#![forbid(unsafe_code)]

pub mod duality;
pub mod error;
pub mod interference;
pub mod linalg;
pub mod measures;
pub mod random;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, DensityMatrix};
pub use num_complex::Complex64;
