//! Auxiliary retrieval schemes, each conforming to the same
//! query/answer/decode contract as the capacity scheme.
//!
//! * [`xor`] — the classic two-database scheme over one-bit messages: mask a
//!   random combination, flip the desired coordinate at the other database.
//! * [`grouped`] — K=2, N=2 over 4-bit messages with the query randomness
//!   reduced to a single coin, so each database only ever sees one of two
//!   queries.
//! * [`asym`] — K=2, N=2 over 2-bit messages with asymmetric downloads (two
//!   bits from one database, one from the other).
//! * [`f5`] — K=3, N=2 over single mod-5 symbols with three possible queries
//!   per database, where the undesired symbols align into one dimension.

pub mod asym;
pub mod f5;
pub mod grouped;
pub mod xor;

pub use asym::{asym_scheme_run, AsymScheme};
pub use f5::{f5_decode, f5_scheme_answers, F5Scheme, F5};
pub use grouped::{grouped_scheme_run, GroupedScheme};
pub use xor::{xor_scheme_run, XorScheme};
