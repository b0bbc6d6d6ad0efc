//! Exact lattice toolkit built around the Systematic Normal Form (SysNF).
//!
//! * [`intlat`]: exact integer lattice algebra (HNF, duals, LLL, nearest plane).
//! * [`sysnf`]: SysNF bases, the finite groups `L_N` and `(NL*)_N`, the
//!   quotient-to-dual bijection and reduction of arbitrary bases to SysNF.
//! * [`dft`]: the lattice DFT on `L_N` as a dense unitary.
//! * [`qcirc`]: statevector simulation of the lattice QFT circuit on `Z_N` registers.
//! * [`sampler`]: exact-amplitude simulation of the quantum lattice sampler.

pub mod error;
pub mod intlat;
pub mod sysnf;
pub mod dft;
pub mod oracle;
pub mod qcirc;
pub mod sampler;
pub mod selftest;

pub use error::{Error, Result};
