//! The capacity-achieving retrieval scheme for arbitrary K and N.
//!
//! [`build_plan`] constructs the symbolic query structure, [`randomize`]
//! turns it into concrete queries under seed-derived permutations, and
//! [`decode`] recovers the desired message from the answers. The achieved
//! rate, [`plan_rate`], equals [`crate::rate::capacity`] exactly for every
//! parameter choice.

mod exec;
mod plan;
mod render;

pub use exec::{answer_queries, decode, randomize, randomize_with, ExecError, Randomness};
pub use plan::{
    build_plan, EquationRef, PlanError, SchemePlan, Slot, SymbolicBit, SymbolicEquation,
};
pub use render::{normalize_table, render_concrete, render_symbolic};

use std::sync::{Arc, OnceLock};

use crate::model::{MessageStore, SchemeParams, Transcript};
use crate::protocol::{Scheme, SchemeError, Trial};
use crate::rate::ExactRational;
use crate::wire;

/// Achieved rate of a plan: distinct desired bits per downloaded bit,
/// as a reduced rational.
pub fn plan_rate(plan: &SchemePlan) -> ExactRational {
    ExactRational::from_counts(plan.desired_bit_count(), plan.total_equations())
        .expect("plans always download at least one bit")
}

/// The capacity-achieving scheme, exposed through the [`Scheme`] interface.
///
/// Plans are built once per desired index and shared; all queries, answers,
/// and decodes derive from them plus per-call seeds.
pub struct CapacityScheme {
    params: SchemeParams,
    plans: Vec<OnceLock<Arc<SchemePlan>>>,
}

impl CapacityScheme {
    pub fn new(params: SchemeParams) -> Result<Self, SchemeError> {
        if params.scheme_message_len().is_none() {
            return Err(SchemeError::BadParams {
                scheme: "capacity",
                messages: params.messages,
                databases: params.databases,
                reason: "message length N^K overflows",
            });
        }
        Ok(Self {
            params,
            plans: (0..params.messages).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn plan_for(&self, desired: usize) -> Result<Arc<SchemePlan>, SchemeError> {
        self.check_desired(desired)?;
        if let Some(plan) = self.plans[desired].get() {
            return Ok(plan.clone());
        }
        let built = Arc::new(plan::build_plan(self.params, desired)?);
        Ok(self.plans[desired].get_or_init(|| built).clone())
    }

    /// Full retrieval against an existing store: randomize, answer, decode.
    pub fn run(
        &self,
        desired: usize,
        store: &MessageStore,
        seed: u64,
    ) -> Result<(Transcript, Vec<bool>), SchemeError> {
        let plan = self.plan_for(desired)?;
        let (queries, randomness) = exec::randomize(&plan, seed);
        let answers = exec::answer_queries(&plan, &queries, store)?;
        let transcript = Transcript {
            params: self.params,
            desired,
            queries,
            answers,
            seed,
        };
        let decoded = exec::decode(&transcript, &plan, &randomness)?;
        Ok((transcript, decoded))
    }
}

impl Scheme for CapacityScheme {
    fn id(&self) -> &'static str {
        "capacity"
    }

    fn params(&self) -> SchemeParams {
        self.params
    }

    fn message_len(&self) -> usize {
        self.params.scheme_message_len().unwrap_or(0)
    }

    fn trial(&self, desired: usize, seed: u64) -> Result<Trial, SchemeError> {
        let plan = self.plan_for(desired)?;
        let store = MessageStore::generate(self.params, plan.message_len(), seed)?;
        let (transcript, decoded) = self.run(desired, &store, seed)?;
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
            params: self.params,
            desired,
            seed,
            correct: first_mismatch.is_none() && decoded.len() == expected.len(),
            first_mismatch,
            desired_units: plan.desired_bit_count(),
            downloaded_units: transcript.downloaded_bits(),
            uploaded_bits,
            transcript: Some(transcript),
        })
    }

    fn sample_queries(&self, desired: usize, seed: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        let plan = self.plan_for(desired)?;
        let (queries, _) = exec::randomize(&plan, seed);
        queries
            .iter()
            .map(|q| wire::serialize_query(q).map_err(SchemeError::from))
            .collect()
    }

    fn randomness_atoms(&self) -> Option<u64> {
        let len = self.params.scheme_message_len()? as u64;
        let mut atoms = 1u64;
        let per_message = checked_factorial(len)?;
        for _ in 0..self.params.messages {
            atoms = atoms.checked_mul(per_message)?;
        }
        // Every database downloads the same number of equations.
        let per_db = (1..=self.params.messages)
            .map(|k| {
                (self.params.databases as u64 - 1).pow(k as u32 - 1)
                    * num_integer::binomial(self.params.messages as u64, k as u64)
            })
            .sum::<u64>();
        let per_shuffle = checked_factorial(per_db)?;
        for _ in 0..self.params.databases {
            atoms = atoms.checked_mul(per_shuffle)?;
        }
        Some(atoms)
    }

    fn queries_at_atom(&self, desired: usize, atom: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        let atoms = self
            .randomness_atoms()
            .ok_or(SchemeError::Unsupported {
                scheme: self.id(),
                what: "randomness-space enumeration at this size",
            })?;
        if atom >= atoms {
            return Err(SchemeError::AtomOutOfRange { atom, atoms });
        }
        let plan = self.plan_for(desired)?;
        let len = plan.message_len();

        // Mixed-radix decomposition: per-message permutations first, then
        // per-database shuffles, least significant last.
        let mut radices: Vec<u64> = Vec::new();
        let perm_radix = checked_factorial(len as u64).expect("checked by randomness_atoms");
        radices.extend(std::iter::repeat_n(perm_radix, self.params.messages));
        for db in 0..self.params.databases {
            let count = plan.equations(db).len() as u64;
            radices.push(checked_factorial(count).expect("checked by randomness_atoms"));
        }
        let mut digits = vec![0u64; radices.len()];
        let mut rest = atom;
        for (slot, radix) in radices.iter().enumerate().rev() {
            digits[slot] = rest % radix;
            rest /= radix;
        }

        let per_message_perm = (0..self.params.messages)
            .map(|m| unrank_permutation(digits[m], len))
            .collect();
        let per_database_shuffle = (0..self.params.databases)
            .map(|db| {
                unrank_permutation(digits[self.params.messages + db], plan.equations(db).len())
            })
            .collect();
        let randomness = Randomness {
            seed: 0,
            per_message_perm,
            per_database_shuffle,
        };
        let queries = exec::randomize_with(&plan, &randomness)?;
        queries
            .iter()
            .map(|q| wire::serialize_query(q).map_err(SchemeError::from))
            .collect()
    }

    fn plan(&self, desired: usize) -> Option<Arc<SchemePlan>> {
        self.plan_for(desired).ok()
    }

    fn derive_randomness(&self, desired: usize, seed: u64) -> Option<Randomness> {
        let plan = self.plan_for(desired).ok()?;
        Some(Randomness::derive(&plan, seed))
    }
}

fn checked_factorial(n: u64) -> Option<u64> {
    let mut out = 1u64;
    for i in 2..=n {
        out = out.checked_mul(i)?;
    }
    Some(out)
}

/// Permutation of `0..len` with the given lexicographic rank.
fn unrank_permutation(mut rank: u64, len: usize) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..len as u32).collect();
    let mut out = Vec::with_capacity(len);
    let mut place = checked_factorial(len.saturating_sub(1) as u64)
        .expect("caller bounds the permutation length");
    for remaining in (1..=len).rev() {
        let index = (rank / place) as usize;
        rank %= place;
        out.push(pool.remove(index));
        if remaining > 2 {
            place /= (remaining - 1) as u64;
        } else {
            place = 1;
        }
    }
    out
}
