//! Asymmetric K=2, N=2 scheme over 2-bit messages.
//!
//! Two bits are downloaded from database 1 and a single mixed bit from
//! database 2; a fair coin picks between two variants so each database's
//! query is desired-independent. Writing the message bits `u1, u2` and
//! `v1, v2`:
//!
//! | coin  | DB1    | DB2 (want W1) | DB2 (want W2) |
//! |-------|--------|---------------|---------------|
//! | heads | u1, v2 | u2+v2         | u1+v1         |
//! | tails | u2, v1 | u1+v1         | u2+v2         |
//!
//! Two desired bits per three downloaded: rate 2/3, so dropping the symmetry
//! requirement shrinks the message size without losing capacity.

use crate::model::{BitRef, DatabaseQuery, Equation, MessageStore, SchemeParams, Transcript};
use crate::protocol::{Scheme, SchemeError, Trial};
use crate::rng::{self, Stream};
use crate::wire;

pub struct AsymScheme;

fn u(bit: usize) -> BitRef {
    BitRef::new(0, bit - 1)
}

fn v(bit: usize) -> BitRef {
    BitRef::new(1, bit - 1)
}

fn queries_for(coin: bool, desired: usize) -> [DatabaseQuery; 2] {
    let single = |t| Equation::new([t]).expect("single term");
    let pair = |a, b| Equation::new([a, b]).expect("distinct terms");
    let db1 = if !coin {
        vec![single(u(1)), single(v(2))]
    } else {
        vec![single(u(2)), single(v(1))]
    };
    let mixed_first = pair(u(1), v(1));
    let mixed_second = pair(u(2), v(2));
    let db2 = match (coin, desired) {
        (false, 0) => mixed_second,
        (false, _) => mixed_first,
        (true, 0) => mixed_first,
        (true, _) => mixed_second,
    };
    [
        DatabaseQuery {
            database: 0,
            equations: db1,
        },
        DatabaseQuery {
            database: 1,
            equations: vec![db2],
        },
    ]
}

fn decode(coin: bool, desired: usize, answers: &[Vec<bool>; 2]) -> Vec<bool> {
    let a = |db: usize, pos: usize| answers[db][pos];
    match (coin, desired) {
        // DB1 = u1, v2; DB2 = u2+v2
        (false, 0) => vec![a(0, 0), a(1, 0) ^ a(0, 1)],
        // DB1 = u1, v2; DB2 = u1+v1
        (false, _) => vec![a(1, 0) ^ a(0, 0), a(0, 1)],
        // DB1 = u2, v1; DB2 = u1+v1
        (true, 0) => vec![a(1, 0) ^ a(0, 1), a(0, 0)],
        // DB1 = u2, v1; DB2 = u2+v2
        (true, _) => vec![a(0, 1), a(1, 0) ^ a(0, 0)],
    }
}

/// Run one retrieval with an explicit coin (enumeration/test hook).
pub fn asym_run_with_coin(
    desired: usize,
    store: &MessageStore,
    coin: bool,
    seed: u64,
) -> Result<(Transcript, Vec<bool>), SchemeError> {
    let params = SchemeParams::new(2, 2)?;
    if store.message_count() != 2 || store.len_bits() != 2 {
        return Err(SchemeError::BadParams {
            scheme: "asym22",
            messages: store.message_count(),
            databases: 2,
            reason: "needs exactly two 2-bit messages",
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
pub fn asym_scheme_run(
    desired: usize,
    store: &MessageStore,
    seed: u64,
) -> Result<(Transcript, Vec<bool>), SchemeError> {
    use rand::Rng;
    let coin = rng::stream(seed, Stream::Coin).random();
    asym_run_with_coin(desired, store, coin, seed)
}

impl Scheme for AsymScheme {
    fn id(&self) -> &'static str {
        "asym22"
    }

    fn params(&self) -> SchemeParams {
        SchemeParams {
            messages: 2,
            databases: 2,
        }
    }

    fn message_len(&self) -> usize {
        2
    }

    fn trial(&self, desired: usize, seed: u64) -> Result<Trial, SchemeError> {
        let store = MessageStore::generate(self.params(), 2, seed)?;
        let (transcript, decoded) = asym_scheme_run(desired, &store, seed)?;
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
            desired_units: 2,
            downloaded_units: 3,
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
