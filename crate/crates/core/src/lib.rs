//! List-source codes over finite fields, symbol-secrecy profiles, MMSE and
//! error-probability bounds for functions of a hidden source, Boolean Fourier
//! analysis of one-time-pad leakage, and a two-phase block cipher built on
//! top of the codes.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod galois;
pub mod lsc;
pub mod infotheory;
pub mod secrecy;
pub mod bounds;
pub mod boolfourier;
pub mod cipher;
pub mod cli;
