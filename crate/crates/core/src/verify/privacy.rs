//! The three privacy checkers.

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use crate::protocol::Scheme;
use crate::rate::ExactRational;
use crate::rng;
use crate::scheme::randomize_with;
use crate::verify::profile::{describe_signature, symbolic_profile};
use crate::verify::{
    chi2, DatabaseVerdict, PrivacyMode, PrivacyReport, Verdict, VerifyError, Witness,
    EXHAUSTIVE_ATOM_LIMIT, HASH_BUCKETS, MIN_SAMPLED_TRIALS, RATE_SEMANTICS, SAMPLED_FAIL_P,
    SAMPLED_PASS_P,
};

/// Seeds probed by the structural checker's applicability test.
const PROBE_SEEDS: [u64; 5] = [0, 1, 0x5EED, 7_777_777, u64::MAX];

fn base_report(scheme: &dyn Scheme, mode: PrivacyMode) -> PrivacyReport {
    PrivacyReport {
        scheme: scheme.id().to_string(),
        params: scheme.params(),
        mode,
        per_database: Vec::new(),
        max_total_variation: None,
        min_p_value: None,
        witness: None,
        note: None,
        rate_semantics: RATE_SEMANTICS,
    }
}

/// Enumerate the scheme's full randomness space per desired index and compare
/// the exact per-database query distributions. Atoms are equally likely, so
/// total-variation distances are exact rationals; privacy holds exactly when
/// every distance is zero.
///
/// Refuses schemes whose randomness space exceeds [`EXHAUSTIVE_ATOM_LIMIT`]
/// atoms or cannot be enumerated at all.
pub fn check_privacy_exhaustive(scheme: &dyn Scheme) -> Result<PrivacyReport, VerifyError> {
    let atoms = scheme
        .randomness_atoms()
        .ok_or(VerifyError::UnknownAtoms(scheme.id()))?;
    if atoms > EXHAUSTIVE_ATOM_LIMIT {
        return Err(VerifyError::TooManyAtoms {
            scheme: scheme.id(),
            atoms,
            limit: EXHAUSTIVE_ATOM_LIMIT,
        });
    }
    let messages = scheme.params().messages;
    let databases = scheme.params().databases;

    // counts[desired][db]: exact occurrence count per serialized query.
    let mut counts: Vec<Vec<BTreeMap<Vec<u8>, u64>>> =
        vec![vec![BTreeMap::new(); databases]; messages];
    for (desired, per_db) in counts.iter_mut().enumerate() {
        for atom in 0..atoms {
            let queries = scheme.queries_at_atom(desired, atom)?;
            for (db, encoding) in queries.into_iter().enumerate() {
                *per_db[db].entry(encoding).or_default() += 1;
            }
        }
    }

    let mut report = base_report(scheme, PrivacyMode::Exhaustive);
    let mut max_tv = ExactRational::zero();
    for db in 0..databases {
        let mut db_tv = ExactRational::zero();
        for i in 0..messages {
            for j in i + 1..messages {
                let keys: BTreeSet<&Vec<u8>> =
                    counts[i][db].keys().chain(counts[j][db].keys()).collect();
                let mut diff_sum = 0u64;
                for key in keys {
                    let a = counts[i][db].get(key).copied().unwrap_or(0);
                    let b = counts[j][db].get(key).copied().unwrap_or(0);
                    let diff = a.abs_diff(b);
                    if diff > 0 && report.witness.is_none() {
                        report.witness = Some(Witness {
                            database: db + 1,
                            description: format!(
                                "query {} appears {a} times for desired index {} but {b} times for {}",
                                describe_encoding(key),
                                i + 1,
                                j + 1
                            ),
                        });
                    }
                    diff_sum += diff;
                }
                let tv = ExactRational::from_counts(diff_sum, 2 * atoms)
                    .expect("atom count is nonzero");
                if tv > db_tv {
                    db_tv = tv.clone();
                }
                if tv > max_tv {
                    max_tv = tv;
                }
            }
        }
        report.per_database.push(DatabaseVerdict {
            database: db + 1,
            verdict: if db_tv.is_zero() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            total_variation: Some(db_tv),
            p_value: None,
        });
    }
    if report.verdict() == Verdict::Pass {
        report.witness = None;
    }
    report.max_total_variation = Some(max_tv);
    Ok(report)
}

fn describe_encoding(encoding: &[u8]) -> String {
    let head: Vec<String> = encoding.iter().take(24).map(|b| format!("{b:02x}")).collect();
    let ellipsis = if encoding.len() > 24 { "…" } else { "" };
    format!("0x{}{}", head.join(""), ellipsis)
}

/// Structural privacy for plan-based schemes.
///
/// Passes when (a) the applicability conditions hold and (b) every database's
/// signature profile is identical across desired indices.
///
/// Soundness of the reduction from profiles to distributions: condition (a)
/// requires that within each database no symbolic bit repeats, that fresh
/// serials are mapped through uniform per-message bit permutations, and that
/// the equation order is uniformly shuffled. Under those conditions the
/// concrete query a database sees is, given its signature profile, a
/// uniformly random assignment of distinct bit labels per message in a
/// uniformly random order — the profile is a sufficient statistic of the
/// query distribution. Equal profiles across desired indices therefore give
/// equal query distributions, which is exact privacy.
///
/// The uniformity of the permutations cannot be observed from a single draw,
/// so the checker probes several seeds and requires valid bijections that
/// actually vary; a scheme with frozen randomization is not certified here
/// but downgraded to the sampled checker (with `fallback_trials` and
/// `seed_base`), and the report notes the downgrade.
pub fn check_privacy_structural(
    scheme: &dyn Scheme,
    fallback_trials: u64,
    seed_base: u64,
) -> Result<PrivacyReport, VerifyError> {
    let params = scheme.params();
    let mut report = base_report(scheme, PrivacyMode::Structural);
    if params.messages == 1 {
        report.per_database = (0..params.databases)
            .map(|db| DatabaseVerdict {
                database: db + 1,
                verdict: Verdict::Pass,
                total_variation: None,
                p_value: None,
            })
            .collect();
        report.note = Some("single desired index: privacy is vacuous".to_string());
        return Ok(report);
    }

    let plans: Vec<_> = (0..params.messages)
        .map(|desired| {
            scheme
                .plan(desired)
                .ok_or(VerifyError::NotPlanBased(scheme.id()))
        })
        .collect::<Result<_, _>>()?;

    // Applicability probe.
    let mut violation: Option<String> = None;
    'probe: for (desired, plan) in plans.iter().enumerate() {
        let mut fingerprints = BTreeSet::new();
        for &seed in &PROBE_SEEDS {
            let Some(randomness) = scheme.derive_randomness(desired, seed) else {
                return Err(VerifyError::NotPlanBased(scheme.id()));
            };
            if !randomness.is_bijective() {
                violation = Some(format!(
                    "randomization for desired index {} is not a bijection",
                    desired + 1
                ));
                break 'probe;
            }
            let Ok(queries) = randomize_with(plan, &randomness) else {
                violation = Some(format!(
                    "randomization for desired index {} does not fit its plan",
                    desired + 1
                ));
                break 'probe;
            };
            for query in &queries {
                let mut seen = BTreeSet::new();
                for eq in &query.equations {
                    for term in eq.terms() {
                        if !seen.insert(*term) {
                            violation = Some(format!(
                                "bit repeats inside database {}'s query",
                                query.database + 1
                            ));
                            break 'probe;
                        }
                    }
                }
            }
            fingerprints.insert((
                randomness.per_message_perm.clone(),
                randomness.per_database_shuffle.clone(),
            ));
        }
        if fingerprints.len() == 1 {
            violation = Some(format!(
                "randomization for desired index {} is constant across seeds",
                desired + 1
            ));
            break 'probe;
        }
    }
    if let Some(reason) = violation {
        let mut fallback = check_privacy_sampled(scheme, fallback_trials, seed_base)?;
        fallback.note = Some(format!(
            "downgraded from structural mode: {reason}; a sampled pass is evidence, not proof"
        ));
        return Ok(fallback);
    }

    // Signature profiles must agree across desired indices, per database.
    for db in 0..params.databases {
        let reference = symbolic_profile(&plans[0], db);
        let mut verdict = Verdict::Pass;
        for (desired, plan) in plans.iter().enumerate().skip(1) {
            let profile = symbolic_profile(plan, db);
            if let Some((signature, want, got)) = reference.first_difference(&profile) {
                verdict = Verdict::Fail;
                if report.witness.is_none() {
                    report.witness = Some(Witness {
                        database: db + 1,
                        description: format!(
                            "signature {} appears {want} times for desired index 1 but {got} times for {}",
                            describe_signature(&signature),
                            desired + 1
                        ),
                    });
                }
                break;
            }
        }
        report.per_database.push(DatabaseVerdict {
            database: db + 1,
            verdict,
            total_variation: None,
            p_value: None,
        });
    }
    if report.verdict() == Verdict::Pass {
        report.note = Some(
            "profiles equal and randomization conditions verified; equal profiles imply equal query distributions"
                .to_string(),
        );
    }
    Ok(report)
}

/// Sampled privacy: draw `trials` seeded queries per desired index (the seed
/// stream is shared across indices), bucket each database's serialized query
/// by hash, and run a chi-squared homogeneity test across desired indices.
///
/// A pass is statistical evidence, not proof. Verdicts use
/// [`SAMPLED_PASS_P`] and [`SAMPLED_FAIL_P`]; p-values in between, or
/// degenerate single-bucket histograms, are inconclusive.
pub fn check_privacy_sampled(
    scheme: &dyn Scheme,
    trials: u64,
    seed_base: u64,
) -> Result<PrivacyReport, VerifyError> {
    if trials < MIN_SAMPLED_TRIALS {
        return Err(VerifyError::TooFewTrials {
            min: MIN_SAMPLED_TRIALS,
            got: trials,
        });
    }
    let params = scheme.params();
    let mut report = base_report(scheme, PrivacyMode::Sampled);
    if params.messages == 1 {
        report.per_database = (0..params.databases)
            .map(|db| DatabaseVerdict {
                database: db + 1,
                verdict: Verdict::Pass,
                total_variation: None,
                p_value: Some(1.0),
            })
            .collect();
        report.min_p_value = Some(1.0);
        report.note = Some("single desired index: privacy is vacuous".to_string());
        return Ok(report);
    }

    let seeds = rng::trial_seeds(seed_base, trials as usize);
    let mut histograms: Vec<Vec<Vec<u64>>> =
        vec![vec![vec![0u64; HASH_BUCKETS]; params.databases]; params.messages];
    for (desired, per_db) in histograms.iter_mut().enumerate() {
        for &seed in &seeds {
            let queries = scheme.sample_queries(desired, seed)?;
            for (db, encoding) in queries.into_iter().enumerate() {
                per_db[db][bucket_of(&encoding)] += 1;
            }
        }
    }

    let mut min_p: Option<f64> = None;
    for db in 0..params.databases {
        let table: Vec<Vec<u64>> = (0..params.messages)
            .map(|desired| histograms[desired][db].clone())
            .collect();
        let (verdict, p_value) = match chi2::homogeneity(&table) {
            None => (Verdict::Inconclusive, None),
            Some(outcome) => {
                let verdict = if outcome.p_value < SAMPLED_FAIL_P {
                    Verdict::Fail
                } else if outcome.p_value > SAMPLED_PASS_P {
                    Verdict::Pass
                } else {
                    Verdict::Inconclusive
                };
                (verdict, Some(outcome.p_value))
            }
        };
        if let Some(p) = p_value {
            min_p = Some(min_p.map_or(p, |m: f64| m.min(p)));
        }
        if verdict == Verdict::Fail && report.witness.is_none() {
            report.witness = Some(Witness {
                database: db + 1,
                description: format!(
                    "query histograms differ across desired indices (p = {:.3e})",
                    p_value.unwrap_or(0.0)
                ),
            });
        }
        report.per_database.push(DatabaseVerdict {
            database: db + 1,
            verdict,
            total_variation: None,
            p_value,
        });
    }
    report.min_p_value = min_p;
    if report.verdict() == Verdict::Pass {
        report.note = Some(format!(
            "chi-squared homogeneity over {trials} trials per index; a pass is evidence, not proof"
        ));
    }
    Ok(report)
}

fn bucket_of(encoding: &[u8]) -> usize {
    let digest = Sha256::digest(encoding);
    let head = u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"));
    (head % HASH_BUCKETS as u64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SchemeParams;
    use crate::protocol::{SchemeError, Trial};
    use crate::registry::make_scheme;

    fn capacity(k: usize, n: usize) -> Box<dyn Scheme> {
        make_scheme("capacity", Some(k), Some(n)).unwrap()
    }

    #[test]
    fn exhaustive_baselines_have_zero_tv() {
        for (id, k) in [("grouped22", None), ("asym22", None), ("f5-aligned", None)] {
            let scheme = make_scheme(id, k, None).unwrap();
            let report = check_privacy_exhaustive(scheme.as_ref()).unwrap();
            assert!(report.passed(), "{id}");
            assert!(report.max_total_variation.unwrap().is_zero(), "{id}");
        }
    }

    #[test]
    fn exhaustive_xor_up_to_k4() {
        for k in 1..=4 {
            let scheme = make_scheme("xor", Some(k), None).unwrap();
            let report = check_privacy_exhaustive(scheme.as_ref()).unwrap();
            assert!(report.passed(), "K={k}");
        }
    }

    #[test]
    fn exhaustive_flags_the_fixed_permutation_fixture() {
        let fixture = make_scheme("broken-fixedperm", Some(2), Some(2)).unwrap();
        let report = check_privacy_exhaustive(fixture.as_ref()).unwrap();
        assert_eq!(report.verdict(), Verdict::Fail);
        assert!(report.witness.is_some());
        assert_eq!(
            report.max_total_variation.unwrap(),
            ExactRational::one()
        );
    }

    #[test]
    fn exhaustive_refuses_oversized_spaces() {
        let scheme = capacity(2, 3);
        assert!(matches!(
            check_privacy_exhaustive(scheme.as_ref()),
            Err(VerifyError::TooManyAtoms { .. }) | Err(VerifyError::UnknownAtoms(_))
        ));
        let scheme = capacity(3, 3);
        assert!(matches!(
            check_privacy_exhaustive(scheme.as_ref()),
            Err(VerifyError::UnknownAtoms(_))
        ));
    }

    #[test]
    fn exhaustive_and_structural_agree_where_both_apply() {
        for (k, n) in [(1, 2), (1, 3), (2, 2)] {
            let scheme = capacity(k, n);
            let exhaustive = check_privacy_exhaustive(scheme.as_ref()).unwrap();
            let structural =
                check_privacy_structural(scheme.as_ref(), MIN_SAMPLED_TRIALS, 0).unwrap();
            assert_eq!(exhaustive.verdict(), structural.verdict(), "K={k} N={n}");
            assert!(exhaustive.passed());
        }
    }

    #[test]
    fn structural_passes_capacity_small_grid() {
        for k in 1..=4 {
            for n in 1..=4 {
                let scheme = capacity(k, n);
                let report =
                    check_privacy_structural(scheme.as_ref(), MIN_SAMPLED_TRIALS, 0).unwrap();
                assert_eq!(report.mode, PrivacyMode::Structural, "K={k} N={n}");
                assert!(report.passed(), "K={k} N={n}");
            }
        }
    }

    #[test]
    fn structural_fails_nomask_with_signature_witness() {
        let fixture = make_scheme("broken-nomask", Some(3), Some(2)).unwrap();
        let report = check_privacy_structural(fixture.as_ref(), MIN_SAMPLED_TRIALS, 0).unwrap();
        assert_eq!(report.verdict(), Verdict::Fail);
        let witness = report.witness.unwrap();
        assert!(
            witness.description.contains("signature {1}"),
            "{}",
            witness.description
        );
    }

    #[test]
    fn structural_downgrades_fixedperm_and_rejects_it() {
        let fixture = make_scheme("broken-fixedperm", Some(2), Some(2)).unwrap();
        let report = check_privacy_structural(fixture.as_ref(), 2_000, 11).unwrap();
        assert_eq!(report.mode, PrivacyMode::Sampled);
        assert!(report.note.as_deref().unwrap().contains("downgraded"));
        assert_eq!(report.verdict(), Verdict::Fail);
    }

    #[test]
    fn structural_refuses_planless_schemes() {
        let scheme = make_scheme("xor", Some(3), None).unwrap();
        assert!(matches!(
            check_privacy_structural(scheme.as_ref(), MIN_SAMPLED_TRIALS, 0),
            Err(VerifyError::NotPlanBased("xor"))
        ));
    }

    #[test]
    fn sampled_passes_capacity_two_by_two() {
        let scheme = capacity(2, 2);
        let report = check_privacy_sampled(scheme.as_ref(), 10_000, 2024).unwrap();
        assert!(report.passed(), "min p = {:?}", report.min_p_value);
        assert!(report.min_p_value.unwrap() > SAMPLED_PASS_P);
    }

    #[test]
    fn sampled_rejects_fixedperm_decisively() {
        let fixture = make_scheme("broken-fixedperm", Some(2), Some(2)).unwrap();
        let report = check_privacy_sampled(fixture.as_ref(), 10_000, 2024).unwrap();
        assert_eq!(report.verdict(), Verdict::Fail);
        assert!(report.min_p_value.unwrap() < SAMPLED_FAIL_P);
    }

    #[test]
    fn sampled_requires_enough_trials() {
        let scheme = capacity(2, 2);
        assert!(matches!(
            check_privacy_sampled(scheme.as_ref(), 10, 0),
            Err(VerifyError::TooFewTrials { min: 1_000, got: 10 })
        ));
    }

    /// A scheme whose query ignores the desired index entirely.
    struct Oblivious;

    impl Scheme for Oblivious {
        fn id(&self) -> &'static str {
            "oblivious-test"
        }
        fn params(&self) -> SchemeParams {
            SchemeParams {
                messages: 3,
                databases: 1,
            }
        }
        fn message_len(&self) -> usize {
            1
        }
        fn trial(&self, _desired: usize, _seed: u64) -> Result<Trial, SchemeError> {
            unimplemented!("privacy-only test scheme")
        }
        fn sample_queries(&self, _desired: usize, seed: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
            Ok(vec![vec![(seed % 7) as u8]])
        }
    }

    #[test]
    fn identical_seed_streams_give_identical_histograms() {
        // Queries ignore the desired index, so the shared seed stream makes
        // the histograms equal cell for cell and the statistic exactly zero.
        let report = check_privacy_sampled(&Oblivious, 1_000, 5).unwrap();
        assert!(report.passed());
        assert_eq!(report.min_p_value, Some(1.0));
    }
}
