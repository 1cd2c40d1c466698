//! Signature census of queries.
//!
//! The signature of an equation is the set of message indices among its
//! terms. For the capacity scheme, the per-database signature profile is the
//! whole structural content of a query: everything else (which bits, which
//! order) is uniformly randomized. Profiles are therefore the statistic the
//! structural privacy check compares across desired indices.

use std::collections::BTreeMap;

use crate::model::DatabaseQuery;
use crate::scheme::SchemePlan;

/// Multiset of equation signatures in one database's query.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignatureProfile {
    counts: BTreeMap<Vec<usize>, u64>,
}

impl SignatureProfile {
    pub fn counts(&self) -> &BTreeMap<Vec<usize>, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count_of(&self, signature: &[usize]) -> u64 {
        self.counts.get(signature).copied().unwrap_or(0)
    }

    fn add(&mut self, signature: Vec<usize>) {
        *self.counts.entry(signature).or_default() += 1;
    }

    /// First signature whose count differs, with both counts.
    pub fn first_difference(&self, other: &Self) -> Option<(Vec<usize>, u64, u64)> {
        let keys = self.counts.keys().chain(other.counts.keys());
        let mut keys: Vec<&Vec<usize>> = keys.collect();
        keys.sort();
        keys.dedup();
        for key in keys {
            let ours = self.count_of(key);
            let theirs = other.count_of(key);
            if ours != theirs {
                return Some((key.clone(), ours, theirs));
            }
        }
        None
    }
}

/// Human-facing signature rendering with 1-based message indices: `{1,3}`.
pub fn describe_signature(signature: &[usize]) -> String {
    let inner: Vec<String> = signature.iter().map(|m| (m + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

/// Census of a concrete query.
pub fn signature_profile(query: &DatabaseQuery) -> SignatureProfile {
    let mut profile = SignatureProfile::default();
    for eq in &query.equations {
        profile.add(eq.signature().into_iter().collect());
    }
    profile
}

/// Census of one database's symbolic plan column, with slots resolved to
/// message indices.
pub fn symbolic_profile(plan: &SchemePlan, database: usize) -> SignatureProfile {
    let mut profile = SignatureProfile::default();
    for eq in plan.equations(database) {
        let mut signature: Vec<usize> = eq
            .terms()
            .iter()
            .map(|t| plan.slot_message(t.slot))
            .collect();
        signature.sort_unstable();
        profile.add(signature);
    }
    profile
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BitRef, Equation, SchemeParams};
    use crate::scheme::{build_plan, randomize};

    #[test]
    fn capacity_two_by_two_profile() {
        let plan = build_plan(SchemeParams::new(2, 2).unwrap(), 0).unwrap();
        let (queries, _) = randomize(&plan, 9);
        let profile = signature_profile(&queries[0]);
        assert_eq!(profile.count_of(&[0]), 1);
        assert_eq!(profile.count_of(&[1]), 1);
        assert_eq!(profile.count_of(&[0, 1]), 1);
        assert_eq!(profile.total(), 3);
        assert_eq!(profile, symbolic_profile(&plan, 0));
    }

    #[test]
    fn empty_query_has_empty_profile() {
        let query = DatabaseQuery {
            database: 0,
            equations: vec![],
        };
        assert_eq!(signature_profile(&query).total(), 0);
    }

    #[test]
    fn three_by_three_profile_counts() {
        // Singletons once, pairs twice, the full triple four times: the
        // (N-1)^{k-1} pattern for N=3.
        let plan = build_plan(SchemeParams::new(3, 3).unwrap(), 0).unwrap();
        for db in 0..3 {
            let profile = symbolic_profile(&plan, db);
            for m in 0..3 {
                assert_eq!(profile.count_of(&[m]), 1);
            }
            for pair in [[0, 1], [0, 2], [1, 2]] {
                assert_eq!(profile.count_of(&pair), 2);
            }
            assert_eq!(profile.count_of(&[0, 1, 2]), 4);
            assert_eq!(profile.total(), 13);
        }
    }

    #[test]
    fn profiles_diff_with_witness() {
        let query_a = DatabaseQuery {
            database: 0,
            equations: vec![Equation::new([BitRef::new(0, 0)]).unwrap()],
        };
        let query_b = DatabaseQuery {
            database: 0,
            equations: vec![Equation::new([BitRef::new(1, 0)]).unwrap()],
        };
        let diff = signature_profile(&query_a)
            .first_difference(&signature_profile(&query_b))
            .unwrap();
        assert_eq!(diff, (vec![0], 1, 0));
        assert_eq!(describe_signature(&diff.0), "{1}");
    }
}
