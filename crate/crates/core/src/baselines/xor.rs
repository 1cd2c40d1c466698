//! Two-database XOR-mask scheme over one-bit messages.
//!
//! The user draws a uniform K-bit mask, asks database 1 for the masked
//! combination of all message bits and database 2 for the same combination
//! with the desired coordinate flipped. The two answer bits XOR to the
//! desired bit; each database sees a uniformly random combination whatever
//! the desired index. One desired bit per two downloaded bits: rate 1/2.

use crate::model::{BitRef, DatabaseQuery, Equation, MessageStore, SchemeParams, Transcript};
use crate::protocol::{Scheme, SchemeError, Trial};
use crate::rng::{self, Stream};
use crate::wire;

pub struct XorScheme {
    params: SchemeParams,
}

impl XorScheme {
    pub fn new(messages: usize) -> Result<Self, SchemeError> {
        Ok(Self {
            params: SchemeParams::new(messages, 2)?,
        })
    }
}

fn mask_equation(mask: &[bool]) -> Equation {
    let terms: Vec<BitRef> = mask
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(message, _)| BitRef::new(message, 0))
        .collect();
    if terms.is_empty() {
        Equation::zero()
    } else {
        Equation::new(terms).expect("mask terms are distinct")
    }
}

fn queries_for_mask(desired: usize, mask: &[bool]) -> [DatabaseQuery; 2] {
    let mut flipped = mask.to_vec();
    flipped[desired] = !flipped[desired];
    [
        DatabaseQuery {
            database: 0,
            equations: vec![mask_equation(mask)],
        },
        DatabaseQuery {
            database: 1,
            equations: vec![mask_equation(&flipped)],
        },
    ]
}

/// Run one retrieval with an explicit mask (enumeration/test hook).
pub fn xor_run_with_mask(
    desired: usize,
    store: &MessageStore,
    mask: &[bool],
    seed: u64,
) -> Result<(Transcript, bool), SchemeError> {
    let params = SchemeParams::new(store.message_count(), 2)?;
    if store.len_bits() != 1 {
        return Err(SchemeError::BadParams {
            scheme: "xor",
            messages: params.messages,
            databases: 2,
            reason: "messages must be exactly one bit",
        });
    }
    if desired >= params.messages || mask.len() != params.messages {
        return Err(SchemeError::DesiredOutOfRange {
            desired,
            messages: params.messages,
        });
    }
    let queries = queries_for_mask(desired, mask);
    let answers = queries
        .iter()
        .map(|q| q.answer(store))
        .collect::<Result<Vec<_>, _>>()?;
    let decoded = answers[0].bits[0] ^ answers[1].bits[0];
    let transcript = Transcript {
        params,
        desired,
        queries: queries.to_vec(),
        answers,
        seed,
    };
    Ok((transcript, decoded))
}

/// Run one retrieval with the mask drawn from the seed.
pub fn xor_scheme_run(
    desired: usize,
    store: &MessageStore,
    seed: u64,
) -> Result<(Transcript, bool), SchemeError> {
    use rand::Rng;
    let mut rng = rng::stream(seed, Stream::QueryMask);
    let mask: Vec<bool> = (0..store.message_count()).map(|_| rng.random()).collect();
    xor_run_with_mask(desired, store, &mask, seed)
}

impl Scheme for XorScheme {
    fn id(&self) -> &'static str {
        "xor"
    }

    fn params(&self) -> SchemeParams {
        self.params
    }

    fn message_len(&self) -> usize {
        1
    }

    fn trial(&self, desired: usize, seed: u64) -> Result<Trial, SchemeError> {
        self.check_desired(desired)?;
        let store = MessageStore::generate(self.params, 1, seed)?;
        let (transcript, decoded) = xor_scheme_run(desired, &store, seed)?;
        let expected = store.message(desired)?[0];
        let uploaded_bits = transcript
            .queries
            .iter()
            .map(|q| wire::serialize_query(q).map(|b| b.len() as u64 * 8))
            .sum::<Result<u64, _>>()?;
        Ok(Trial {
            scheme: self.id(),
            params: self.params,
            desired,
            seed,
            correct: decoded == expected,
            first_mismatch: (decoded != expected).then_some(0),
            desired_units: 1,
            downloaded_units: 2,
            uploaded_bits,
            transcript: Some(transcript),
        })
    }

    fn sample_queries(&self, desired: usize, seed: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        use rand::Rng;
        self.check_desired(desired)?;
        let mut rng = rng::stream(seed, Stream::QueryMask);
        let mask: Vec<bool> = (0..self.params.messages).map(|_| rng.random()).collect();
        queries_for_mask(desired, &mask)
            .iter()
            .map(|q| wire::serialize_query(q).map_err(SchemeError::from))
            .collect()
    }

    fn randomness_atoms(&self) -> Option<u64> {
        1u64.checked_shl(self.params.messages as u32)
    }

    fn queries_at_atom(&self, desired: usize, atom: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        self.check_desired(desired)?;
        let atoms = self.randomness_atoms().ok_or(SchemeError::Unsupported {
            scheme: self.id(),
            what: "randomness-space enumeration at this size",
        })?;
        if atom >= atoms {
            return Err(SchemeError::AtomOutOfRange { atom, atoms });
        }
        let mask: Vec<bool> = (0..self.params.messages)
            .map(|k| atom >> k & 1 == 1)
            .collect();
        queries_for_mask(desired, &mask)
            .iter()
            .map(|q| wire::serialize_query(q).map_err(SchemeError::from))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit_store(bits: &[bool]) -> MessageStore {
        MessageStore::from_bits(bits.iter().map(|&b| vec![b]).collect()).unwrap()
    }

    #[test]
    fn zero_mask_downloads_the_bit_directly() {
        let store = bit_store(&[true, false]);
        let (transcript, decoded) =
            xor_run_with_mask(0, &store, &[false, false], 0).unwrap();
        assert!(transcript.queries[0].equations[0].is_zero());
        assert_eq!(transcript.answers[0].bits, vec![false]);
        assert_eq!(transcript.answers[1].bits, vec![true]);
        assert!(decoded);
    }

    #[test]
    fn exhaustive_three_messages() {
        // All 8 stores, all 8 masks, all 3 desired indices.
        for pattern in 0..8u32 {
            let store = bit_store(&[pattern & 1 != 0, pattern & 2 != 0, pattern & 4 != 0]);
            for mask_bits in 0..8u32 {
                let mask: Vec<bool> = (0..3).map(|k| mask_bits >> k & 1 == 1).collect();
                for desired in 0..3 {
                    let (_, decoded) = xor_run_with_mask(desired, &store, &mask, 0).unwrap();
                    assert_eq!(decoded, store.message(desired).unwrap()[0]);
                }
            }
        }
    }

    #[test]
    fn seeded_trials_decode_and_account_rate() {
        let scheme = XorScheme::new(4).unwrap();
        for desired in 0..4 {
            for seed in 0..20 {
                let trial = scheme.trial(desired, seed).unwrap();
                assert!(trial.correct);
                assert_eq!(trial.desired_units, 1);
                assert_eq!(trial.downloaded_units, 2);
            }
        }
    }

    #[test]
    fn atoms_enumerate_all_masks() {
        let scheme = XorScheme::new(3).unwrap();
        assert_eq!(scheme.randomness_atoms(), Some(8));
        let mut seen = std::collections::BTreeSet::new();
        for atom in 0..8 {
            seen.insert(scheme.queries_at_atom(0, atom).unwrap());
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn multi_bit_messages_are_rejected() {
        let store = MessageStore::from_bits(vec![vec![true, false]]).unwrap();
        assert!(matches!(
            xor_scheme_run(0, &store, 0),
            Err(SchemeError::BadParams { .. })
        ));
    }
}
