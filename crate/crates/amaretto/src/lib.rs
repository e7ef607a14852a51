//! Software model of a fixed-point quantum-circuit emulation pipeline:
//! OpenQASM 2.0 in, a compact instruction stream in the middle, and a
//! cycle-accurate fixed-point state-vector evaluation at the end, with a
//! double-precision reference simulator and a spherical-distance check to
//! keep the whole thing honest.

pub mod compiler;
pub mod corpus;
pub mod emulator;
pub mod fxp;
pub mod gcd;
pub mod harness;
pub mod isa;
pub mod oracle;
pub mod qasm;
pub mod trig;
