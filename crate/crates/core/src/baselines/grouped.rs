//! Low-upload K=2, N=2 scheme over 4-bit messages.
//!
//! The 4 bits of each message are split into two fixed groups with fixed
//! order, so a single fair coin replaces the bit permutations: each database
//! only ever faces one of two queries, and which one it gets is independent
//! of the desired index. Writing the message bits as `u1..u4` and `v1..v4`:
//!
//! | coin  | DB1              | DB2 (want W1)    | DB2 (want W2)    |
//! |-------|------------------|------------------|------------------|
//! | heads | u1, v1, u2+v2    | u4, v2, u3+v1    | u2, v4, u1+v3    |
//! | tails | u3, v3, u4+v4    | u2, v4, u1+v3    | u4, v2, u3+v1    |
//!
//! Four desired bits per six downloaded: rate 2/3, the capacity of this
//! configuration.

use crate::model::{BitRef, DatabaseQuery, Equation, MessageStore, SchemeParams, Transcript};
use crate::protocol::{Scheme, SchemeError, Trial};
use crate::rng::{self, Stream};
use crate::wire;

pub struct GroupedScheme;

fn u(bit: usize) -> BitRef {
    BitRef::new(0, bit - 1)
}

fn v(bit: usize) -> BitRef {
    BitRef::new(1, bit - 1)
}

fn single(term: BitRef) -> Equation {
    Equation::new([term]).expect("single term")
}

fn pair(a: BitRef, b: BitRef) -> Equation {
    Equation::new([a, b]).expect("distinct terms")
}

fn queries_for(coin: bool, desired: usize) -> [DatabaseQuery; 2] {
    let db1 = if !coin {
        vec![single(u(1)), single(v(1)), pair(u(2), v(2))]
    } else {
        vec![single(u(3)), single(v(3)), pair(u(4), v(4))]
    };
    // (u4, v2, u3+v1) or (u2, v4, u1+v3), arranged so the pairing with DB1
    // always cancels and the choice seen by DB2 is desired-independent.
    let db2_first_pack = vec![single(u(4)), single(v(2)), pair(u(3), v(1))];
    let db2_second_pack = vec![single(u(2)), single(v(4)), pair(u(1), v(3))];
    let db2 = match (coin, desired) {
        (false, 0) => db2_first_pack,
        (false, _) => db2_second_pack,
        (true, 0) => db2_second_pack,
        (true, _) => db2_first_pack,
    };
    [
        DatabaseQuery {
            database: 0,
            equations: db1,
        },
        DatabaseQuery {
            database: 1,
            equations: db2,
        },
    ]
}

/// Decode all four desired bits from the six answer bits.
fn decode(coin: bool, desired: usize, answers: &[Vec<bool>; 2]) -> Vec<bool> {
    let a = |db: usize, pos: usize| answers[db][pos];
    match (coin, desired) {
        // DB1 = u1, v1, u2+v2; DB2 = u4, v2, u3+v1
        (false, 0) => vec![a(0, 0), a(0, 2) ^ a(1, 1), a(1, 2) ^ a(0, 1), a(1, 0)],
        // DB1 = u1, v1, u2+v2; DB2 = u2, v4, u1+v3
        (false, _) => vec![a(0, 1), a(0, 2) ^ a(1, 0), a(1, 2) ^ a(0, 0), a(1, 1)],
        // DB1 = u3, v3, u4+v4; DB2 = u2, v4, u1+v3
        (true, 0) => vec![a(1, 2) ^ a(0, 1), a(1, 0), a(0, 0), a(0, 2) ^ a(1, 1)],
        // DB1 = u3, v3, u4+v4; DB2 = u4, v2, u3+v1
        (true, _) => vec![a(1, 2) ^ a(0, 0), a(1, 1), a(0, 1), a(0, 2) ^ a(1, 0)],
    }
}

/// Run one retrieval with an explicit coin (enumeration/test hook).
pub fn grouped_run_with_coin(
    desired: usize,
    store: &MessageStore,
    coin: bool,
    seed: u64,
) -> Result<(Transcript, Vec<bool>), SchemeError> {
    let params = SchemeParams::new(2, 2)?;
    if store.message_count() != 2 || store.len_bits() != 4 {
        return Err(SchemeError::BadParams {
            scheme: "grouped22",
            messages: store.message_count(),
            databases: 2,
            reason: "needs exactly two 4-bit messages",
        });
    }
    if desired >= 2 {
        return Err(SchemeError::DesiredOutOfRange {
            desired,
            messages: 2,
        });
    }
    let queries = queries_for(coin, desired);
    let answers = queries
        .iter()
        .map(|q| q.answer(store))
        .collect::<Result<Vec<_>, _>>()?;
    let bits = [answers[0].bits.clone(), answers[1].bits.clone()];
    let decoded = decode(coin, desired, &bits);
    let transcript = Transcript {
        params,
        desired,
        queries: queries.to_vec(),
        answers,
        seed,
    };
    Ok((transcript, decoded))
}

/// Run one retrieval with the coin drawn from the seed.
pub fn grouped_scheme_run(
    desired: usize,
    store: &MessageStore,
    seed: u64,
) -> Result<(Transcript, Vec<bool>), SchemeError> {
    use rand::Rng;
    let coin = rng::stream(seed, Stream::Coin).random();
    grouped_run_with_coin(desired, store, coin, seed)
}

impl Scheme for GroupedScheme {
    fn id(&self) -> &'static str {
        "grouped22"
    }

    fn params(&self) -> SchemeParams {
        SchemeParams {
            messages: 2,
            databases: 2,
        }
    }

    fn message_len(&self) -> usize {
        4
    }

    fn trial(&self, desired: usize, seed: u64) -> Result<Trial, SchemeError> {
        let store = MessageStore::generate(self.params(), 4, seed)?;
        let (transcript, decoded) = grouped_scheme_run(desired, &store, seed)?;
        let expected = store.message(desired)?;
        let first_mismatch = decoded
            .iter()
            .zip(expected)
            .position(|(got, want)| got != want);
        let uploaded_bits = transcript
            .queries
            .iter()
            .map(|q| wire::serialize_query(q).map(|b| b.len() as u64 * 8))
            .sum::<Result<u64, _>>()?;
        Ok(Trial {
            scheme: self.id(),
            params: self.params(),
            desired,
            seed,
            correct: first_mismatch.is_none(),
            first_mismatch,
            desired_units: 4,
            downloaded_units: 6,
            uploaded_bits,
            transcript: Some(transcript),
        })
    }

    fn sample_queries(&self, desired: usize, seed: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        use rand::Rng;
        self.check_desired(desired)?;
        let coin = rng::stream(seed, Stream::Coin).random();
        queries_for(coin, desired)
            .iter()
            .map(|q| wire::serialize_query(q).map_err(SchemeError::from))
            .collect()
    }

    fn randomness_atoms(&self) -> Option<u64> {
        Some(2)
    }

    fn queries_at_atom(&self, desired: usize, atom: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        self.check_desired(desired)?;
        if atom >= 2 {
            return Err(SchemeError::AtomOutOfRange { atom, atoms: 2 });
        }
        queries_for(atom == 1, desired)
            .iter()
            .map(|q| wire::serialize_query(q).map_err(SchemeError::from))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store_from_byte(byte: u8) -> MessageStore {
        let bits: Vec<Vec<bool>> = (0..2)
            .map(|m| (0..4).map(|b| byte >> (m * 4 + b) & 1 == 1).collect())
            .collect();
        MessageStore::from_bits(bits).unwrap()
    }

    #[test]
    fn heads_want_first_matches_table() {
        let store = store_from_byte(0b1010_0110);
        let (transcript, _) = grouped_run_with_coin(0, &store, false, 0).unwrap();
        assert_eq!(
            transcript.queries[0].equations,
            vec![single(u(1)), single(v(1)), pair(u(2), v(2))]
        );
        assert_eq!(
            transcript.queries[1].equations,
            vec![single(u(4)), single(v(2)), pair(u(3), v(1))]
        );
    }

    #[test]
    fn exhaustive_decode_over_all_stores() {
        // 256 stores, both coins, both desired indices.
        for byte in 0..=255u8 {
            let store = store_from_byte(byte);
            for coin in [false, true] {
                for desired in 0..2 {
                    let (_, decoded) =
                        grouped_run_with_coin(desired, &store, coin, 0).unwrap();
                    assert_eq!(
                        decoded,
                        store.message(desired).unwrap(),
                        "byte={byte:#010b} coin={coin} desired={desired}"
                    );
                }
            }
        }
    }

    #[test]
    fn query_support_is_desired_independent() {
        let scheme = GroupedScheme;
        for db in 0..2 {
            let mut supports: Vec<std::collections::BTreeSet<Vec<u8>>> = Vec::new();
            for desired in 0..2 {
                let support = (0..2)
                    .map(|atom| scheme.queries_at_atom(desired, atom).unwrap()[db].clone())
                    .collect();
                supports.push(support);
            }
            assert_eq!(supports[0], supports[1], "db {db}");
            assert_eq!(supports[0].len(), 2, "db {db} must see exactly 2 queries");
        }
    }

    #[test]
    fn seeded_trials_decode() {
        let scheme = GroupedScheme;
        for desired in 0..2 {
            for seed in 0..20 {
                let trial = scheme.trial(desired, seed).unwrap();
                assert!(trial.correct);
                assert_eq!((trial.desired_units, trial.downloaded_units), (4, 6));
            }
        }
    }

    #[test]
    fn wrong_store_shape_is_rejected() {
        let store = MessageStore::generate(SchemeParams::new(2, 2).unwrap(), 3, 0).unwrap();
        assert!(matches!(
            grouped_scheme_run(0, &store, 0),
            Err(SchemeError::BadParams { .. })
        ));
    }
}
