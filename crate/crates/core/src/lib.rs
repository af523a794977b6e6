//! Exact realization of linear dynamical systems by ReLU recurrent networks,
//! and a fixed-length quantized encoding of LTI systems with exponentially
//! decaying impulse responses.
//!
//! - [`signals`]: one-sided sequences, Z-transform, Hardy-norm brackets.
//! - [`rnn`]: network execution and Elman conversion.
//! - [`constructors`]: weight constructions for convolutions, frequency
//!   shifts, time-varying spreading superpositions and rational systems.
//! - [`codec`]: grid quantizer, bitstring code and bit budget.
//! - [`oracles`]: direct-evaluation references.

pub mod codec;
pub mod constructors;
pub mod error;
mod json;
pub mod oracles;
pub mod rnn;
pub mod signals;

pub use codec::{bit_budget_report, decode, encode, quantize, BitBudget, Bitstring, QuantizedFir};
pub use constructors::{
    build_convolution, build_frequency_shift, build_ltv, build_quantized_fir, build_rational,
    InputBound, RationalTf, SpreadingFunction,
};
pub use error::{Error, Result};
pub use json::ComplexRepr;
pub use rnn::{run, run_elman, to_elman, ElmanSpec, RnnSpec, Trajectory};
pub use signals::{
    entropy_main_term, h2_norm, hinf_bracket, system_distance, z_eval, ComplexSequence, FirKernel,
    HardyBracket, ImpulseClass, Sequence,
};
