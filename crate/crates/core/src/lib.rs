//! Exact linear algebra and semilinear module computations at finite
//! precision: the coefficient ring is always `Z/p^N`, power series are
//! truncated at `u^M`, and every operation either returns an exactly
//! reduced result or reports the precision loss explicitly.
//!
//! The crate is organised bottom-up:
//!
//! * [`chainring`]: canonical-form (Howell) linear algebra over `Z/p^N`;
//!   membership, kernels, intersections and preimages of row spans.
//! * [`series`]: truncated arithmetic in `W[[u]]` and in the divided-power
//!   ring `S`, with Frobenius, the filtration `Fil^i S`, the divided
//!   Frobenii `phi_i` and the derivation `N`.
//! * [`kisin`]: free modules over truncated `W[[u]]` with a semilinear
//!   Frobenius: height checks, tensor/dual/twist, Hodge-Tate weights,
//!   morphisms and exact-sequence verdicts.
//! * [`breuil`]: filtered modules over `S` obtained from Kisin modules:
//!   strong-divisibility and monodromy axiom checkers, filtration-level
//!   exactness, tensor products and exact-complex verification.
//! * [`scenario`]: canned end-to-end computations producing structured
//!   reports.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod breuil;
pub mod chainring;
pub mod kisin;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod series;

pub use breuil::{BreuilModule, BreuilMorphism};
pub use chainring::{ChainContext, ChainMatrix, FpModule, HowellForm};
pub use kisin::{IdealVerdict, IdealWitness, KisinModule, KisinMorphism};
pub use report::{Claim, Report, Verdict};
pub use series::{EisensteinPoly, RingContext, SElem, SigmaElem};
