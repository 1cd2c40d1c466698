//! String-id dispatch for schemes and checker counterexamples.
//!
//! Real schemes register under [`SCHEME_IDS`]. The [`FIXTURE_IDS`] entries
//! are deliberately broken constructions used to prove the checkers can
//! fail; they are excluded from any claim about achievable rates, since a
//! non-private scheme is not bound by the capacity theorem.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use crate::baselines::{AsymScheme, F5Scheme, GroupedScheme, XorScheme};
use crate::model::{MessageStore, SchemeParams, Transcript};
use crate::protocol::{Scheme, SchemeError, Trial};
use crate::scheme::{
    answer_queries, decode, randomize_with, CapacityScheme, Randomness, SchemePlan, Slot,
    SymbolicBit,
};
use crate::wire;

pub const SCHEME_IDS: &[&str] = &["capacity", "xor", "grouped22", "asym22", "f5-aligned"];
pub const FIXTURE_IDS: &[&str] = &["broken-nomask", "broken-fixedperm"];

pub fn is_fixture(id: &str) -> bool {
    FIXTURE_IDS.contains(&id)
}

/// Build a scheme by id.
///
/// `messages` and `databases` are required for `capacity` and the fixtures;
/// `xor` takes `messages` and runs on two databases; the fixed-size
/// baselines accept missing or matching parameters only.
pub fn make_scheme(
    id: &str,
    messages: Option<usize>,
    databases: Option<usize>,
) -> Result<Box<dyn Scheme>, SchemeError> {
    let fixed = |scheme: &'static str,
                 k: usize,
                 n: usize|
     -> Result<(), SchemeError> {
        if messages.is_some_and(|m| m != k) || databases.is_some_and(|d| d != n) {
            return Err(SchemeError::BadParams {
                scheme,
                messages: messages.unwrap_or(k),
                databases: databases.unwrap_or(n),
                reason: "this scheme has fixed parameters",
            });
        }
        Ok(())
    };
    match id {
        "capacity" => {
            let params = explicit_params("capacity", messages, databases)?;
            Ok(Box::new(CapacityScheme::new(params)?))
        }
        "xor" => {
            let k = messages.ok_or(SchemeError::MissingParams {
                scheme: "xor",
                what: "message count",
            })?;
            if databases.is_some_and(|n| n != 2) {
                return Err(SchemeError::BadParams {
                    scheme: "xor",
                    messages: k,
                    databases: databases.unwrap_or(2),
                    reason: "the XOR-mask scheme runs on exactly two databases",
                });
            }
            Ok(Box::new(XorScheme::new(k)?))
        }
        "grouped22" => {
            fixed("grouped22", 2, 2)?;
            Ok(Box::new(GroupedScheme))
        }
        "asym22" => {
            fixed("asym22", 2, 2)?;
            Ok(Box::new(AsymScheme))
        }
        "f5-aligned" => {
            fixed("f5-aligned", 3, 2)?;
            Ok(Box::new(F5Scheme))
        }
        "broken-nomask" => {
            let params = explicit_params("broken-nomask", messages, databases)?;
            Ok(Box::new(NoMaskFixture::new(params)))
        }
        "broken-fixedperm" => {
            let params = explicit_params("broken-fixedperm", messages, databases)?;
            Ok(Box::new(FixedPermFixture::new(params)?))
        }
        other => Err(SchemeError::UnknownScheme(other.to_string())),
    }
}

fn explicit_params(
    scheme: &'static str,
    messages: Option<usize>,
    databases: Option<usize>,
) -> Result<SchemeParams, SchemeError> {
    let k = messages.ok_or(SchemeError::MissingParams {
        scheme,
        what: "message count",
    })?;
    let n = databases.ok_or(SchemeError::MissingParams {
        scheme,
        what: "database count",
    })?;
    Ok(SchemeParams::new(k, n)?)
}

/// Checker counterexample: downloads one fresh desired bit per database and
/// nothing else. Decodes perfectly at rate 1 but the query structure names
/// the desired message, so privacy checks must fail it.
pub struct NoMaskFixture {
    params: SchemeParams,
    plans: Vec<OnceLock<Arc<SchemePlan>>>,
}

impl NoMaskFixture {
    pub fn new(params: SchemeParams) -> Self {
        Self {
            params,
            plans: (0..params.messages).map(|_| OnceLock::new()).collect(),
        }
    }

    fn plan_for(&self, desired: usize) -> Result<Arc<SchemePlan>, SchemeError> {
        self.check_desired(desired)?;
        let plan = self.plans[desired].get_or_init(|| {
            let n = self.params.databases;
            let per_database = (0..n)
                .map(|db| {
                    vec![crate::scheme::SymbolicEquation::from_terms(vec![SymbolicBit {
                        slot: Slot::Desired,
                        serial: db as u32 + 1,
                    }])]
                })
                .collect();
            let mut bit_budget = vec![0u64; self.params.messages];
            bit_budget[desired] = n as u64;
            Arc::new(SchemePlan::from_parts(
                self.params,
                desired,
                n,
                per_database,
                BTreeMap::new(),
                bit_budget,
            ))
        });
        Ok(plan.clone())
    }
}

impl Scheme for NoMaskFixture {
    fn id(&self) -> &'static str {
        "broken-nomask"
    }

    fn params(&self) -> SchemeParams {
        self.params
    }

    fn message_len(&self) -> usize {
        self.params.databases
    }

    fn trial(&self, desired: usize, seed: u64) -> Result<Trial, SchemeError> {
        let plan = self.plan_for(desired)?;
        let store = MessageStore::generate(self.params, plan.message_len(), seed)?;
        let randomness = Randomness::derive(&plan, seed);
        let queries = randomize_with(&plan, &randomness)?;
        let answers = answer_queries(&plan, &queries, &store)?;
        let transcript = Transcript {
            params: self.params,
            desired,
            queries,
            answers,
            seed,
        };
        let decoded = decode(&transcript, &plan, &randomness)?;
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
            correct: first_mismatch.is_none(),
            first_mismatch,
            desired_units: plan.desired_bit_count(),
            downloaded_units: transcript.downloaded_bits(),
            uploaded_bits,
            transcript: Some(transcript),
        })
    }

    fn sample_queries(&self, desired: usize, seed: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        let plan = self.plan_for(desired)?;
        let randomness = Randomness::derive(&plan, seed);
        let queries = randomize_with(&plan, &randomness)?;
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

/// Checker counterexample: the capacity scheme with its randomization stubbed
/// to the identity. The structure is symmetric across messages, but the
/// concrete query is the same every run, so the first equation always points
/// at bit 1 of the desired message.
pub struct FixedPermFixture {
    inner: CapacityScheme,
}

impl FixedPermFixture {
    pub fn new(params: SchemeParams) -> Result<Self, SchemeError> {
        Ok(Self {
            inner: CapacityScheme::new(params)?,
        })
    }
}

impl Scheme for FixedPermFixture {
    fn id(&self) -> &'static str {
        "broken-fixedperm"
    }

    fn params(&self) -> SchemeParams {
        self.inner.params()
    }

    fn message_len(&self) -> usize {
        self.inner.message_len()
    }

    fn trial(&self, desired: usize, seed: u64) -> Result<Trial, SchemeError> {
        let plan = self.inner.plan_for(desired)?;
        let store = MessageStore::generate(self.params(), plan.message_len(), seed)?;
        let randomness = Randomness::identity(&plan);
        let queries = randomize_with(&plan, &randomness)?;
        let answers = answer_queries(&plan, &queries, &store)?;
        let transcript = Transcript {
            params: self.params(),
            desired,
            queries,
            answers,
            seed,
        };
        let decoded = decode(&transcript, &plan, &randomness)?;
        let expected = store.message(desired)?;
        let first_mismatch = decoded
            .iter()
            .zip(expected)
            .position(|(got, want)| got != want);
        Ok(Trial {
            scheme: self.id(),
            params: self.params(),
            desired,
            seed,
            correct: first_mismatch.is_none(),
            first_mismatch,
            desired_units: plan.desired_bit_count(),
            downloaded_units: transcript.downloaded_bits(),
            uploaded_bits: 0,
            transcript: Some(transcript),
        })
    }

    fn sample_queries(&self, desired: usize, _seed: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        // Identity randomization regardless of seed: the breakage under test.
        self.queries_at_atom(desired, 0)
    }

    fn randomness_atoms(&self) -> Option<u64> {
        Some(1)
    }

    fn queries_at_atom(&self, desired: usize, atom: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        if atom >= 1 {
            return Err(SchemeError::AtomOutOfRange { atom, atoms: 1 });
        }
        let plan = self.inner.plan_for(desired)?;
        let queries = randomize_with(&plan, &Randomness::identity(&plan))?;
        queries
            .iter()
            .map(|q| wire::serialize_query(q).map_err(SchemeError::from))
            .collect()
    }

    fn plan(&self, desired: usize) -> Option<Arc<SchemePlan>> {
        self.inner.plan(desired)
    }

    fn derive_randomness(&self, desired: usize, _seed: u64) -> Option<Randomness> {
        let plan = self.inner.plan_for(desired).ok()?;
        Some(Randomness::identity(&plan))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_dispatch() {
        for &id in SCHEME_IDS {
            let scheme = make_scheme(id, Some(2), Some(2));
            if id == "f5-aligned" {
                assert!(scheme.is_err());
                assert!(make_scheme(id, None, None).is_ok());
            } else {
                assert!(scheme.is_ok(), "{id}");
            }
        }
        assert!(matches!(
            make_scheme("nope", None, None),
            Err(SchemeError::UnknownScheme(_))
        ));
    }

    #[test]
    fn fixture_flagging() {
        assert!(is_fixture("broken-nomask"));
        assert!(is_fixture("broken-fixedperm"));
        assert!(!is_fixture("capacity"));
    }

    #[test]
    fn capacity_requires_both_params() {
        assert!(matches!(
            make_scheme("capacity", Some(2), None),
            Err(SchemeError::MissingParams { .. })
        ));
    }

    #[test]
    fn xor_rejects_other_database_counts() {
        assert!(make_scheme("xor", Some(3), Some(2)).is_ok());
        assert!(matches!(
            make_scheme("xor", Some(3), Some(3)),
            Err(SchemeError::BadParams { .. })
        ));
    }

    #[test]
    fn nomask_decodes_but_names_the_desired_message() {
        let fixture = NoMaskFixture::new(SchemeParams::new(3, 2).unwrap());
        for desired in 0..3 {
            let trial = fixture.trial(desired, 5).unwrap();
            assert!(trial.correct);
            assert_eq!(trial.desired_units, 2);
            assert_eq!(trial.downloaded_units, 2);
            let transcript = trial.transcript.unwrap();
            for query in &transcript.queries {
                assert_eq!(query.equations.len(), 1);
                assert!(query.equations[0]
                    .terms()
                    .iter()
                    .all(|t| t.message == desired));
            }
        }
    }

    #[test]
    fn fixedperm_ignores_the_seed() {
        let fixture = FixedPermFixture::new(SchemeParams::new(2, 2).unwrap()).unwrap();
        let a = fixture.sample_queries(0, 1).unwrap();
        let b = fixture.sample_queries(0, 999).unwrap();
        assert_eq!(a, b);
        assert!(fixture.trial(0, 4).unwrap().correct);
    }
}
