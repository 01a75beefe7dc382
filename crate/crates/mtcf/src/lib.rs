//! Non-Markovian multiple-time correlation functions of a small quantum
//! system coupled to a bosonic environment.
//!
//! Four independent computation routes over the same model family
//! H = H_S + λ(L Σ g_n a_n† + L† Σ g_n* a_n) + Σ ω_n a_n† a_n:
//!
//! * [`stochastic`] — Monte-Carlo over coherent-state labels of the
//!   environment, propagating conditioned system states segment by segment.
//! * [`weak_coupling`] — a closed linear system of two-time equations valid
//!   to third order in the coupling scale, with an optional truncation that
//!   reproduces the quantum regression theorem.
//! * [`dephasing`] — closed forms for the solvable pure-dephasing model
//!   L = σ_z, H_S = (ω/2)σ_z.
//! * [`fock`] — brute-force propagation of system plus truncated bosonic
//!   modes, the exact reference the other routes are validated against.
//!
//! [`scenario`] and [`trace`] provide the declarative experiment format and
//! the CSV trace output consumed by the `mtcf` command-line tool.

pub mod bath;
pub mod dephasing;
pub mod error;
pub mod fock;
pub mod operator;
pub mod scenario;
pub mod stochastic;
pub mod trace;
pub mod weak_coupling;

pub use error::{Error, Result};
pub use operator::{C64, Operator, SystemSpec};
