//! Shared data model: messages, bit equations, queries, answers, transcripts.
//!
//! All values are immutable after construction and all operations are pure,
//! so they can be shared freely across concurrent workers.

use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

use crate::rng::{self, Stream};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("message count must be at least 1")]
    NoMessages,
    #[error("database count must be at least 1")]
    NoDatabases,
    #[error("message length must be at least 1 bit")]
    EmptyMessages,
    #[error("messages must all have the same length")]
    UnequalLengths,
    #[error("an equation must reference at least one bit")]
    EmptyEquation,
    #[error("duplicate term: message {message}, bit {bit}")]
    DuplicateTerm { message: usize, bit: usize },
    #[error("bit reference out of range: message {message}, bit {bit}")]
    OutOfRange { message: usize, bit: usize },
    #[error("desired index {desired} out of range for {messages} messages")]
    DesiredOutOfRange { desired: usize, messages: usize },
    #[error("transcript must carry exactly one query and one answer per database")]
    MalformedTranscript,
}

/// Number of messages (K) and databases (N) for one scheme instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SchemeParams {
    pub messages: usize,
    pub databases: usize,
}

impl SchemeParams {
    pub fn new(messages: usize, databases: usize) -> Result<Self, ModelError> {
        if messages == 0 {
            return Err(ModelError::NoMessages);
        }
        if databases == 0 {
            return Err(ModelError::NoDatabases);
        }
        Ok(Self {
            messages,
            databases,
        })
    }

    /// Message length used by the capacity-achieving scheme: N^K bits.
    /// `None` when N^K overflows the address space.
    pub fn scheme_message_len(&self) -> Option<usize> {
        u32::try_from(self.messages)
            .ok()
            .and_then(|k| self.databases.checked_pow(k))
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K={} N={}", self.messages, self.databases)
    }
}

/// K equal-length messages of independent uniform bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageStore {
    len_bits: usize,
    bits: Vec<Vec<bool>>,
}

impl MessageStore {
    pub fn from_bits(bits: Vec<Vec<bool>>) -> Result<Self, ModelError> {
        if bits.is_empty() {
            return Err(ModelError::NoMessages);
        }
        let len_bits = bits[0].len();
        if len_bits == 0 {
            return Err(ModelError::EmptyMessages);
        }
        if bits.iter().any(|m| m.len() != len_bits) {
            return Err(ModelError::UnequalLengths);
        }
        Ok(Self { len_bits, bits })
    }

    /// `params.messages` messages of `len_bits` uniform bits each,
    /// reproducible for a fixed seed. Messages are drawn independently of any
    /// query a scheme might later form.
    pub fn generate(params: SchemeParams, len_bits: usize, seed: u64) -> Result<Self, ModelError> {
        use rand::Rng;
        if len_bits == 0 {
            return Err(ModelError::EmptyMessages);
        }
        let mut rng = rng::stream(seed, Stream::Messages);
        let bits = (0..params.messages)
            .map(|_| (0..len_bits).map(|_| rng.random()).collect())
            .collect();
        Ok(Self { len_bits, bits })
    }

    pub fn message_count(&self) -> usize {
        self.bits.len()
    }

    pub fn len_bits(&self) -> usize {
        self.len_bits
    }

    pub fn message(&self, message: usize) -> Result<&[bool], ModelError> {
        self.bits
            .get(message)
            .map(Vec::as_slice)
            .ok_or(ModelError::OutOfRange { message, bit: 0 })
    }

    pub fn bit(&self, bit_ref: BitRef) -> Result<bool, ModelError> {
        self.bits
            .get(bit_ref.message)
            .and_then(|m| m.get(bit_ref.bit))
            .copied()
            .ok_or(ModelError::OutOfRange {
                message: bit_ref.message,
                bit: bit_ref.bit,
            })
    }
}

/// One bit of one message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitRef {
    pub message: usize,
    pub bit: usize,
}

impl BitRef {
    pub fn new(message: usize, bit: usize) -> Self {
        Self { message, bit }
    }
}

impl fmt::Display for BitRef {
    /// Human-facing form with a 1-based message index and 1-based bit
    /// position, e.g. `w2(5)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}({})", self.message + 1, self.bit + 1)
    }
}

/// GF(2) sum of message bits; the atomic download unit.
///
/// Terms are kept sorted by (message, bit) so equality is structural and the
/// serialized form is canonical; the sum itself is order-invariant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Equation {
    terms: Vec<BitRef>,
}

impl Equation {
    /// A sum of distinct bits. Rejects empty term sets and duplicate
    /// (message, bit) pairs.
    pub fn new(terms: impl IntoIterator<Item = BitRef>) -> Result<Self, ModelError> {
        let mut terms: Vec<BitRef> = terms.into_iter().collect();
        if terms.is_empty() {
            return Err(ModelError::EmptyEquation);
        }
        terms.sort_unstable();
        for pair in terms.windows(2) {
            if pair[0] == pair[1] {
                return Err(ModelError::DuplicateTerm {
                    message: pair[0].message,
                    bit: pair[0].bit,
                });
            }
        }
        Ok(Self { terms })
    }

    /// The empty combination, evaluating to constant zero.
    ///
    /// Mask-style schemes need it to represent an all-zero combining vector;
    /// [`Equation::new`] deliberately rejects empty term sets so it can only
    /// be produced on purpose.
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[BitRef] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Set of message indices appearing among the terms.
    pub fn signature(&self) -> BTreeSet<usize> {
        self.terms.iter().map(|t| t.message).collect()
    }

    /// GF(2) evaluation: XOR of the referenced bits.
    pub fn evaluate(&self, store: &MessageStore) -> Result<bool, ModelError> {
        let mut acc = false;
        for term in &self.terms {
            acc ^= store.bit(*term)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "{term}")?;
        }
        Ok(())
    }
}

/// Ordered equation list addressed to one database.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DatabaseQuery {
    pub database: usize,
    pub equations: Vec<Equation>,
}

impl DatabaseQuery {
    /// The database's deterministic reply: one bit per equation, in order.
    pub fn answer(&self, store: &MessageStore) -> Result<AnswerString, ModelError> {
        let bits = self
            .equations
            .iter()
            .map(|eq| eq.evaluate(store))
            .collect::<Result<Vec<bool>, ModelError>>()?;
        Ok(AnswerString {
            database: self.database,
            bits,
        })
    }
}

/// One bit per equation of the corresponding query.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnswerString {
    pub database: usize,
    pub bits: Vec<bool>,
}

/// Everything one retrieval produced; the object all checkers consume.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub params: SchemeParams,
    pub desired: usize,
    pub queries: Vec<DatabaseQuery>,
    pub answers: Vec<AnswerString>,
    pub seed: u64,
}

impl Transcript {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.desired >= self.params.messages {
            return Err(ModelError::DesiredOutOfRange {
                desired: self.desired,
                messages: self.params.messages,
            });
        }
        let n = self.params.databases;
        if self.queries.len() != n || self.answers.len() != n {
            return Err(ModelError::MalformedTranscript);
        }
        for (query, answer) in self.queries.iter().zip(&self.answers) {
            if query.database != answer.database || query.equations.len() != answer.bits.len() {
                return Err(ModelError::MalformedTranscript);
            }
        }
        Ok(())
    }

    /// Total download cost in bits.
    pub fn downloaded_bits(&self) -> u64 {
        self.answers.iter().map(|a| a.bits.len() as u64).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store_from_str(rows: &[&str]) -> MessageStore {
        let bits = rows
            .iter()
            .map(|r| r.chars().map(|c| c == '1').collect())
            .collect();
        MessageStore::from_bits(bits).unwrap()
    }

    #[test]
    fn params_reject_zero() {
        assert_eq!(SchemeParams::new(0, 2), Err(ModelError::NoMessages));
        assert_eq!(SchemeParams::new(2, 0), Err(ModelError::NoDatabases));
    }

    #[test]
    fn generate_is_deterministic() {
        let params = SchemeParams::new(2, 2).unwrap();
        let a = MessageStore::generate(params, 4, 99).unwrap();
        let b = MessageStore::generate(params, 4, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.message_count(), 2);
        assert_eq!(a.len_bits(), 4);
    }

    #[test]
    fn generate_minimal_case() {
        let params = SchemeParams::new(1, 1).unwrap();
        let store = MessageStore::generate(params, 1, 5).unwrap();
        assert_eq!(store.message_count(), 1);
        assert_eq!(store.len_bits(), 1);
    }

    #[test]
    fn generate_rejects_zero_length() {
        let params = SchemeParams::new(1, 1).unwrap();
        assert_eq!(
            MessageStore::generate(params, 0, 5),
            Err(ModelError::EmptyMessages)
        );
    }

    #[test]
    fn distinct_seeds_distinct_stores() {
        // Direct sampling: 8 bits per message, 3 messages; two distinct seeds
        // collide with probability 2^-24 per pair.
        let params = SchemeParams::new(3, 2).unwrap();
        for pair in 0..100u64 {
            let a = MessageStore::generate(params, 8, pair).unwrap();
            let b = MessageStore::generate(params, 8, pair + 100_000).unwrap();
            assert_ne!(a, b, "seed pair {pair} produced identical stores");
        }
    }

    #[test]
    fn bit_frequencies_near_half() {
        // 10^4 seeded stores; every position must lie within 5 standard
        // deviations of 1/2.
        let params = SchemeParams::new(2, 2).unwrap();
        let len = 16;
        let samples = 10_000u32;
        let mut ones = vec![0u32; 2 * len];
        for seed in 0..samples as u64 {
            let store = MessageStore::generate(params, len, seed).unwrap();
            for m in 0..2 {
                for (b, &bit) in store.message(m).unwrap().iter().enumerate() {
                    if bit {
                        ones[m * len + b] += 1;
                    }
                }
            }
        }
        let sigma = 0.5 * (samples as f64).sqrt();
        for (pos, &count) in ones.iter().enumerate() {
            let dev = (count as f64 - samples as f64 / 2.0).abs();
            assert!(
                dev <= 5.0 * sigma,
                "position {pos}: {count} ones out of {samples}"
            );
        }
    }

    #[test]
    fn evaluate_single_term() {
        let store = store_from_str(&["1000"]);
        let eq = Equation::new([BitRef::new(0, 0)]).unwrap();
        assert_eq!(eq.evaluate(&store), Ok(true));
    }

    #[test]
    fn evaluate_cancelling_pair() {
        let store = store_from_str(&["1000", "1000"]);
        let eq = Equation::new([BitRef::new(0, 0), BitRef::new(1, 0)]).unwrap();
        assert_eq!(eq.evaluate(&store), Ok(false));
    }

    #[test]
    fn evaluate_matches_direct_lookup() {
        let params = SchemeParams::new(3, 2).unwrap();
        let store = MessageStore::generate(params, 8, 1234).unwrap();
        let refs = [BitRef::new(0, 2), BitRef::new(1, 5), BitRef::new(2, 7)];
        let eq = Equation::new(refs).unwrap();
        let expected =
            store.bit(refs[0]).unwrap() ^ store.bit(refs[1]).unwrap() ^ store.bit(refs[2]).unwrap();
        assert_eq!(eq.evaluate(&store), Ok(expected));
    }

    #[test]
    fn evaluate_out_of_range() {
        let store = store_from_str(&["1000"]);
        let eq = Equation::new([BitRef::new(1, 0)]).unwrap();
        assert_eq!(
            eq.evaluate(&store),
            Err(ModelError::OutOfRange { message: 1, bit: 0 })
        );
    }

    #[test]
    fn equation_rejects_empty_and_duplicates() {
        assert_eq!(Equation::new([]), Err(ModelError::EmptyEquation));
        assert_eq!(
            Equation::new([BitRef::new(0, 1), BitRef::new(0, 1)]),
            Err(ModelError::DuplicateTerm { message: 0, bit: 1 })
        );
        assert!(Equation::zero().is_zero());
        assert_eq!(Equation::zero().evaluate(&store_from_str(&["1"])), Ok(false));
    }

    #[test]
    fn equation_terms_are_canonical() {
        let a = Equation::new([BitRef::new(1, 0), BitRef::new(0, 3)]).unwrap();
        let b = Equation::new([BitRef::new(0, 3), BitRef::new(1, 0)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.terms()[0], BitRef::new(0, 3));
    }

    #[test]
    fn evaluation_is_linear_over_disjoint_unions() {
        let params = SchemeParams::new(2, 2).unwrap();
        let store = MessageStore::generate(params, 16, 7).unwrap();
        let left = Equation::new([BitRef::new(0, 1), BitRef::new(1, 2)]).unwrap();
        let right = Equation::new([BitRef::new(0, 9), BitRef::new(1, 14)]).unwrap();
        let both =
            Equation::new(left.terms().iter().chain(right.terms()).copied()).unwrap();
        assert_eq!(
            both.evaluate(&store).unwrap(),
            left.evaluate(&store).unwrap() ^ right.evaluate(&store).unwrap()
        );
    }

    #[test]
    fn transcript_shape_is_checked() {
        let params = SchemeParams::new(2, 2).unwrap();
        let query = DatabaseQuery {
            database: 0,
            equations: vec![Equation::new([BitRef::new(0, 0)]).unwrap()],
        };
        let answer = AnswerString {
            database: 0,
            bits: vec![true],
        };
        let bad = Transcript {
            params,
            desired: 0,
            queries: vec![query],
            answers: vec![answer],
            seed: 0,
        };
        assert_eq!(bad.validate(), Err(ModelError::MalformedTranscript));
    }
}
