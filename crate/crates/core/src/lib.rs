//! Multi-database private information retrieval (PIR) schemes with exact rate
//! accounting and executable privacy/correctness checks.
//!
//! A user retrieves one of `K` equal-length messages replicated across `N`
//! non-communicating databases without revealing which message it wants to any
//! single database. This crate implements:
//!
//! * a capacity-achieving scheme for arbitrary `K` and `N` built from GF(2)
//!   bit equations ([`scheme`]), whose download rate equals
//!   `(1 + 1/N + … + 1/N^{K-1})^{-1}` exactly;
//! * auxiliary comparison schemes ([`baselines`]): a two-database XOR-mask
//!   scheme, two low-upload variants, and a mod-5 aligned-interference scheme;
//! * checkers for correctness, query privacy, and exact rate ([`verify`]);
//! * a bit-exact wire format for queries and answers ([`wire`]).
//!
//! Everything is deterministic given a seed: schemes draw their permutations,
//! masks, and coins from caller-supplied seeds, never from ambient entropy.
//! Message and database indices are 0-based in code and 1-based in all
//! human-facing output and on the wire.

pub mod baselines;
pub mod model;
pub mod protocol;
pub mod rate;
pub mod registry;
pub mod rng;
pub mod scheme;
pub mod verify;
pub mod wire;

pub use model::{
    AnswerString, BitRef, DatabaseQuery, Equation, MessageStore, ModelError, SchemeParams,
    Transcript,
};
pub use protocol::{Scheme, SchemeError, Trial};
pub use rate::{capacity, ExactRational};
pub use scheme::{build_plan, CapacityScheme, Randomness, SchemePlan};
