//! Common interface every retrieval scheme implements.
//!
//! The checkers and the CLI drive schemes exclusively through [`Scheme`]:
//! one seeded end-to-end retrieval ([`Scheme::trial`]), serialized queries
//! for privacy analysis (sampled from seeds or enumerated over the scheme's
//! randomness space), and, for plan-based schemes, access to the symbolic
//! plan and its seed-derived randomization.
//!
//! Randomness spaces are uniform: when [`Scheme::randomness_atoms`] returns
//! `Some(count)`, every atom in `0..count` is an equally likely outcome of
//! the production sampling path.

use std::sync::Arc;

use thiserror::Error;

use crate::model::{ModelError, SchemeParams, Transcript};
use crate::scheme::PlanError;
use crate::scheme::{ExecError, Randomness, SchemePlan};
use crate::wire::WireError;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("unknown scheme id {0:?}")]
    UnknownScheme(String),
    #[error("scheme {scheme} cannot run with K={messages}, N={databases}: {reason}")]
    BadParams {
        scheme: &'static str,
        messages: usize,
        databases: usize,
        reason: &'static str,
    },
    #[error("scheme {scheme} requires explicit parameters: {what}")]
    MissingParams {
        scheme: &'static str,
        what: &'static str,
    },
    #[error("desired index {desired} out of range for {messages} messages")]
    DesiredOutOfRange { desired: usize, messages: usize },
    #[error("randomness atom {atom} out of range ({atoms} atoms)")]
    AtomOutOfRange { atom: u64, atoms: u64 },
    #[error("scheme {scheme} does not support {what}")]
    Unsupported {
        scheme: &'static str,
        what: &'static str,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Wire(#[from] WireError),
}

/// Outcome of one full retrieval.
#[derive(Debug, Clone)]
pub struct Trial {
    pub scheme: &'static str,
    pub params: SchemeParams,
    /// 0-based desired message index.
    pub desired: usize,
    pub seed: u64,
    /// Whether the decoded message equals the stored one, bit for bit.
    pub correct: bool,
    /// First mismatching bit (or symbol) index, when incorrect.
    pub first_mismatch: Option<usize>,
    /// Units of the desired message recovered (bits, or field symbols for
    /// symbol-based schemes).
    pub desired_units: u64,
    /// Units downloaded across all databases; same unit as `desired_units`.
    pub downloaded_units: u64,
    /// Serialized query upload cost in bits.
    pub uploaded_bits: u64,
    /// Bit-level transcript, for schemes that produce one.
    pub transcript: Option<Transcript>,
}

/// A retrieval scheme with seed-derived, uniformly distributed randomness.
pub trait Scheme {
    /// Registry identifier, e.g. `"capacity"` or `"xor"`.
    fn id(&self) -> &'static str;

    fn params(&self) -> SchemeParams;

    /// Units (bits or symbols) per message this scheme retrieves.
    fn message_len(&self) -> usize;

    /// One end-to-end retrieval against a fresh store generated from `seed`.
    fn trial(&self, desired: usize, seed: u64) -> Result<Trial, SchemeError>;

    /// Serialized per-database queries for a seeded draw; the production
    /// sampling path.
    fn sample_queries(&self, desired: usize, seed: u64) -> Result<Vec<Vec<u8>>, SchemeError>;

    /// Size of the query-randomness space, when enumerable without overflow.
    fn randomness_atoms(&self) -> Option<u64> {
        None
    }

    /// Serialized per-database queries for one randomness outcome.
    fn queries_at_atom(&self, _desired: usize, _atom: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        Err(SchemeError::Unsupported {
            scheme: self.id(),
            what: "randomness-space enumeration",
        })
    }

    /// Symbolic plan, for plan-based schemes.
    fn plan(&self, _desired: usize) -> Option<Arc<SchemePlan>> {
        None
    }

    /// Seed-derived randomization, for plan-based schemes.
    fn derive_randomness(&self, _desired: usize, _seed: u64) -> Option<Randomness> {
        None
    }

    fn check_desired(&self, desired: usize) -> Result<(), SchemeError> {
        if desired >= self.params().messages {
            return Err(SchemeError::DesiredOutOfRange {
                desired,
                messages: self.params().messages,
            });
        }
        Ok(())
    }
}
