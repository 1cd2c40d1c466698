//! Randomization, answering, and decoding for plan-based schemes.
//!
//! A plan is turned into concrete queries by composing two layers of
//! seed-derived randomness: one uniform bit permutation per message (so a
//! fresh serial never reveals which stored bit it touches) and one uniform
//! order shuffle per database (so the position of an equation never reveals
//! its role). Decoding inverts both layers.

use thiserror::Error;

use crate::model::{
    BitRef, DatabaseQuery, Equation, MessageStore, ModelError, Transcript,
};
use crate::rng::{self, Stream};
use crate::scheme::plan::SchemePlan;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExecError {
    #[error("randomness does not match the plan shape")]
    RandomnessMismatch,
    #[error("store holds {got} bits per message, plan needs {needed}")]
    StoreTooShort { needed: usize, got: usize },
    #[error("transcript does not match the plan: {0}")]
    TranscriptMismatch(&'static str),
    #[error("decode did not cover every desired bit")]
    IncompleteDecode,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Per-message bit permutations plus per-database equation-order shuffles,
/// all derived from one seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Randomness {
    pub seed: u64,
    /// `per_message_perm[m][s]` = concrete bit index backing serial `s + 1`
    /// of message `m`'s slot.
    pub per_message_perm: Vec<Vec<u32>>,
    /// `per_database_shuffle[n][pos]` = plan position presented at `pos`.
    pub per_database_shuffle: Vec<Vec<u32>>,
}

impl Randomness {
    /// Production path: uniform permutations and shuffles from the seed.
    pub fn derive(plan: &SchemePlan, seed: u64) -> Self {
        let mut rng = rng::stream(seed, Stream::SchemeRandomness);
        let per_message_perm = (0..plan.params().messages)
            .map(|_| rng::permutation(&mut rng, plan.message_len()))
            .collect();
        let per_database_shuffle = (0..plan.params().databases)
            .map(|db| rng::permutation(&mut rng, plan.equations(db).len()))
            .collect();
        Self {
            seed,
            per_message_perm,
            per_database_shuffle,
        }
    }

    /// Identity mapping. Test hook: the concrete queries equal the symbolic
    /// plan structurally, so construction details can be asserted directly.
    pub fn identity(plan: &SchemePlan) -> Self {
        Self {
            seed: 0,
            per_message_perm: (0..plan.params().messages)
                .map(|_| (0..plan.message_len() as u32).collect())
                .collect(),
            per_database_shuffle: (0..plan.params().databases)
                .map(|db| (0..plan.equations(db).len() as u32).collect())
                .collect(),
        }
    }

    fn check_shape(&self, plan: &SchemePlan) -> Result<(), ExecError> {
        let params = plan.params();
        if self.per_message_perm.len() != params.messages
            || self.per_database_shuffle.len() != params.databases
            || self
                .per_message_perm
                .iter()
                .any(|p| p.len() != plan.message_len())
            || self
                .per_database_shuffle
                .iter()
                .enumerate()
                .any(|(db, s)| s.len() != plan.equations(db).len())
        {
            return Err(ExecError::RandomnessMismatch);
        }
        Ok(())
    }

    /// True when every permutation and shuffle is a bijection of its range.
    pub fn is_bijective(&self) -> bool {
        fn bijective(table: &[u32]) -> bool {
            let mut seen = vec![false; table.len()];
            table.iter().all(|&x| {
                (x as usize) < seen.len() && !std::mem::replace(&mut seen[x as usize], true)
            })
        }
        self.per_message_perm.iter().all(|p| bijective(p))
            && self.per_database_shuffle.iter().all(|s| bijective(s))
    }
}

/// Concrete queries for the plan under seed-derived randomness.
pub fn randomize(plan: &SchemePlan, seed: u64) -> (Vec<DatabaseQuery>, Randomness) {
    let randomness = Randomness::derive(plan, seed);
    let queries = randomize_with(plan, &randomness)
        .expect("derived randomness always matches its plan");
    (queries, randomness)
}

/// Concrete queries under explicit randomness (test hook; production code
/// uses [`randomize`]).
pub fn randomize_with(
    plan: &SchemePlan,
    randomness: &Randomness,
) -> Result<Vec<DatabaseQuery>, ExecError> {
    randomness.check_shape(plan)?;
    let mut queries = Vec::with_capacity(plan.params().databases);
    for (db, shuffle) in randomness.per_database_shuffle.iter().enumerate() {
        let equations = shuffle
            .iter()
            .map(|&plan_pos| {
                let symbolic = &plan.equations(db)[plan_pos as usize];
                let terms = symbolic.terms().iter().map(|term| {
                    let message = plan.slot_message(term.slot);
                    let bit =
                        randomness.per_message_perm[message][term.serial as usize - 1] as usize;
                    BitRef::new(message, bit)
                });
                Equation::new(terms).expect("slots are distinct messages")
            })
            .collect();
        queries.push(DatabaseQuery {
            database: db,
            equations,
        });
    }
    Ok(queries)
}

/// Answer every query against the store; fails if the store is shorter than
/// the plan's message length.
pub fn answer_queries(
    plan: &SchemePlan,
    queries: &[DatabaseQuery],
    store: &MessageStore,
) -> Result<Vec<crate::model::AnswerString>, ExecError> {
    if store.len_bits() < plan.message_len() {
        return Err(ExecError::StoreTooShort {
            needed: plan.message_len(),
            got: store.len_bits(),
        });
    }
    Ok(queries
        .iter()
        .map(|q| q.answer(store))
        .collect::<Result<_, _>>()?)
}

/// Recover all `message_len` bits of the desired message from a transcript
/// produced by this plan and randomness.
///
/// Block-1 desired bits are read directly; every other desired bit is the
/// answer bit of its mixed equation XOR the answer bit of the routed pure
/// side-information equation. Output is ordered by original bit index, i.e.
/// the bit permutation is inverted.
pub fn decode(
    transcript: &Transcript,
    plan: &SchemePlan,
    randomness: &Randomness,
) -> Result<Vec<bool>, ExecError> {
    randomness.check_shape(plan)?;
    transcript.validate()?;
    if transcript.params != plan.params() || transcript.desired != plan.desired() {
        return Err(ExecError::TranscriptMismatch("parameters or desired index"));
    }
    let n_dbs = plan.params().databases;
    if transcript.queries.len() != n_dbs {
        return Err(ExecError::TranscriptMismatch("database count"));
    }
    for db in 0..n_dbs {
        if transcript.answers[db].bits.len() != plan.equations(db).len() {
            return Err(ExecError::TranscriptMismatch("answer length"));
        }
    }

    // Invert each database's shuffle: where did plan position p end up?
    let mut inverse_shuffle: Vec<Vec<usize>> = Vec::with_capacity(n_dbs);
    for shuffle in &randomness.per_database_shuffle {
        let mut inverse = vec![0usize; shuffle.len()];
        for (pos, &plan_pos) in shuffle.iter().enumerate() {
            inverse[plan_pos as usize] = pos;
        }
        inverse_shuffle.push(inverse);
    }
    let answer_bit = |db: usize, plan_pos: usize| -> bool {
        transcript.answers[db].bits[inverse_shuffle[db][plan_pos]]
    };

    let perm = &randomness.per_message_perm[plan.desired()];
    let mut output = vec![false; plan.message_len()];
    let mut covered = vec![false; plan.message_len()];
    let mut covered_count = 0usize;
    for db in 0..n_dbs {
        for (position, eq) in plan.equations(db).iter().enumerate() {
            let Some(serial) = eq.desired_serial() else {
                continue;
            };
            let mut value = answer_bit(db, position);
            if let Some(source) = plan.routing().get(&crate::scheme::plan::EquationRef {
                database: db,
                position,
            }) {
                value ^= answer_bit(source.database, source.position);
            }
            let bit_index = perm[serial as usize - 1] as usize;
            if !std::mem::replace(&mut covered[bit_index], true) {
                covered_count += 1;
            }
            output[bit_index] = value;
        }
    }
    if covered_count != plan.message_len() {
        return Err(ExecError::IncompleteDecode);
    }
    Ok(output)
}
