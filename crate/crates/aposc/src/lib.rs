//! Numerical laboratory for an asymmetric oscillator driven by almost
//! periodic forcing: series arithmetic with weighted norms, small-divisor
//! margins, action-angle reduction, time-2pi section maps with twist
//! expansions, and normal-form transformations, all at finite desk scale with
//! every checkable identity under test.

pub mod apfun;
pub mod dioph;
pub mod config;
pub mod error;
pub mod experiment;
pub mod normalform;
pub mod num;
pub mod oscillator;
pub mod poincare;
pub mod report;

pub use error::{Error, Result};
