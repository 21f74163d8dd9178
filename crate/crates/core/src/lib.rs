//! Simulation of satellite-transition and multiple-quantum MAS experiments
//! on half-integer quadrupolar nuclei.
//!
//! The pieces, bottom up:
//!
//! - [`spin`]: levels, transitions, populations, coherence order.
//! - [`rotations`]: `d^2_00`, `d^4_00` and their zero angles.
//! - [`quadrupolar`]: first/second-order shifts and exact ridge slopes.
//! - [`coherence`]: which pathways survive a phase cycle.
//! - [`pulseprog`]: the `.pp` experiment format.
//! - [`spectrum`]: powder synthesis, 2D transform, shear, metrics, export.
//! - [`simulate`]: the end-to-end pipeline used by the command line.

pub mod coherence;
pub mod error;
pub mod pulseprog;
pub mod quadrupolar;
pub mod rotations;
pub mod simulate;
pub mod spectrum;
pub mod spin;

pub use coherence::{CoherencePathway, CycleSpec, PulseSpec};
pub use error::{Error, Result};
pub use pulseprog::{parse_program, render_program, ParseIssue, ParseIssues, PulseProgram};
pub use quadrupolar::{broadening_ratio, BroadeningRatio, SecondOrderDecomposition};
pub use spectrum::{Interferogram2D, PowderGrid, Projection1D, Spectrum2D};
pub use spin::{Level, Spin, SpinSystem, Transition, TransitionLabel};
