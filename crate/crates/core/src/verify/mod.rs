//! Executable semantics for the correctness, privacy, and rate constraints.
//!
//! Privacy is defined over the queries alone: answers are deterministic
//! functions of the query and the store, so query-distribution independence
//! of the desired index already implies answer-distribution independence.
//! The checkers therefore never examine answers.
//!
//! Three privacy checkers with different strength/cost trade-offs:
//!
//! * [`check_privacy_exhaustive`] enumerates the scheme's whole randomness
//!   space and compares exact per-database query distributions; verdicts are
//!   proof-grade within the modeled space.
//! * [`check_privacy_structural`] compares signature profiles of symbolic
//!   plans and machine-checks the conditions under which profile equality
//!   implies distribution equality.
//! * [`check_privacy_sampled`] draws seeded transcripts and runs a
//!   chi-squared homogeneity test over hashed query buckets; a pass is
//!   statistical evidence, not proof, and the report says so.
//!
//! Every scheme here has fixed-length deterministic answers, so a rate is a
//! ratio of unit counts. Entropy-based rates for variable-length or
//! randomized answer encodings are unsupported; reports carry
//! [`RATE_SEMANTICS`] to make that explicit.

pub mod chi2;
mod privacy;
mod profile;

pub use privacy::{check_privacy_exhaustive, check_privacy_sampled, check_privacy_structural};
pub use profile::{signature_profile, symbolic_profile, SignatureProfile};

use serde::Serialize;
use thiserror::Error;

use crate::model::SchemeParams;
use crate::protocol::{Scheme, SchemeError, Trial};
use crate::rate::ExactRational;
use crate::rng;

/// Sampled-mode acceptance threshold: p-values above this pass.
pub const SAMPLED_PASS_P: f64 = 0.01;
/// Sampled-mode rejection threshold: p-values below this fail.
pub const SAMPLED_FAIL_P: f64 = 1e-6;
/// Largest randomness space the exhaustive checker will enumerate.
pub const EXHAUSTIVE_ATOM_LIMIT: u64 = 1 << 20;
/// Minimum trials for the sampled checker.
pub const MIN_SAMPLED_TRIALS: u64 = 1_000;
/// Hash bucket count for sampled-mode histograms.
pub const HASH_BUCKETS: usize = 1024;
/// Rate semantics note attached to reports.
pub const RATE_SEMANTICS: &str =
    "fixed-length deterministic answers; rate = desired units / downloaded units";

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("randomness space of {scheme} holds {atoms} atoms, over the exhaustive limit {limit}; use structural or sampled mode")]
    TooManyAtoms {
        scheme: &'static str,
        atoms: u64,
        limit: u64,
    },
    #[error("randomness space size of {0} is not enumerable; use structural or sampled mode")]
    UnknownAtoms(&'static str),
    #[error("{0} exposes no symbolic plan; structural mode does not apply")]
    NotPlanBased(&'static str),
    #[error("need at least {min} trials, got {got}")]
    TooFewTrials { min: u64, got: u64 },
    #[error("rate measurement needs at least one trial")]
    NoTrials,
    #[error("trials mix schemes or parameters")]
    MixedTrials,
    #[error("rate varies across transcripts; this checker only handles fixed-length schemes")]
    RateNotConstant,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrivacyMode {
    Structural,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Per-database outcome. `database` is 1-based, matching all human-facing
/// output.
#[derive(Debug, Clone, Serialize)]
pub struct DatabaseVerdict {
    pub database: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_variation: Option<ExactRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

/// First distinguishing observation of a failed privacy check.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    /// 1-based database index.
    pub database: usize,
    pub description: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrivacyReport {
    pub scheme: String,
    pub params: SchemeParams,
    pub mode: PrivacyMode,
    pub per_database: Vec<DatabaseVerdict>,
    /// Largest exact total-variation distance seen (exhaustive mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_total_variation: Option<ExactRational>,
    /// Smallest per-database p-value (sampled mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub rate_semantics: &'static str,
}

impl PrivacyReport {
    /// Worst per-database verdict: any fail fails, else any inconclusive.
    pub fn verdict(&self) -> Verdict {
        let mut out = Verdict::Pass;
        for db in &self.per_database {
            match db.verdict {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Pass => {}
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.verdict() == Verdict::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectnessFailure {
    pub seed: u64,
    /// 1-based desired index.
    pub desired: usize,
    pub first_mismatch_bit: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectnessReport {
    pub scheme: String,
    pub params: SchemeParams,
    /// Trials requested per desired index.
    pub trials: u64,
    /// Total retrievals executed.
    pub runs: u64,
    pub failures: Vec<CorrectnessFailure>,
    pub rate_semantics: &'static str,
}

impl CorrectnessReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Decode-versus-store comparison: `trials` fresh seeded stores per desired
/// index, each retrieval compared bit for bit. Failures are data, not
/// errors.
pub fn check_correctness(
    scheme: &dyn Scheme,
    trials: u64,
    seed_base: u64,
) -> Result<CorrectnessReport, VerifyError> {
    if trials == 0 {
        return Err(VerifyError::TooFewTrials { min: 1, got: 0 });
    }
    let seeds = rng::trial_seeds(seed_base, trials as usize);
    let mut failures = Vec::new();
    let mut runs = 0u64;
    for desired in 0..scheme.params().messages {
        for &seed in &seeds {
            let trial = scheme.trial(desired, seed)?;
            runs += 1;
            if !trial.correct {
                failures.push(CorrectnessFailure {
                    seed,
                    desired: desired + 1,
                    first_mismatch_bit: trial.first_mismatch.unwrap_or(0),
                });
            }
        }
    }
    Ok(CorrectnessReport {
        scheme: scheme.id().to_string(),
        params: scheme.params(),
        trials,
        runs,
        failures,
        rate_semantics: RATE_SEMANTICS,
    })
}

/// Achieved rate over a batch of trials from one scheme and parameter set:
/// desired units recovered per downloaded unit, as an exact rational.
/// Fixed-length schemes must show the same ratio in every trial.
pub fn measure_rate(trials: &[Trial]) -> Result<ExactRational, VerifyError> {
    let first = trials.first().ok_or(VerifyError::NoTrials)?;
    let rate_of = |t: &Trial| {
        ExactRational::from_counts(t.desired_units, t.downloaded_units)
            .map_err(|_| VerifyError::RateNotConstant)
    };
    let rate = rate_of(first)?;
    for trial in &trials[1..] {
        if trial.scheme != first.scheme || trial.params != first.params {
            return Err(VerifyError::MixedTrials);
        }
        if rate_of(trial)? != rate {
            return Err(VerifyError::RateNotConstant);
        }
    }
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::XorScheme;
    use crate::registry::make_scheme;
    use crate::scheme::CapacityScheme;

    #[test]
    fn correctness_passes_for_capacity_grid() {
        for k in 1..=3 {
            for n in 1..=3 {
                let scheme =
                    CapacityScheme::new(SchemeParams::new(k, n).unwrap()).unwrap();
                let report = check_correctness(&scheme, 10, 42).unwrap();
                assert!(report.passed(), "K={k} N={n}: {:?}", report.failures);
                assert_eq!(report.runs, 10 * k as u64);
            }
        }
    }

    #[test]
    fn correctness_requires_a_trial() {
        let scheme = XorScheme::new(2).unwrap();
        assert!(matches!(
            check_correctness(&scheme, 0, 0),
            Err(VerifyError::TooFewTrials { .. })
        ));
    }

    #[test]
    fn measured_rates_match_expectations() {
        let cases: [(&str, Option<usize>, Option<usize>, (i64, i64)); 4] = [
            ("capacity", Some(2), Some(3), (3, 4)),
            ("xor", Some(5), None, (1, 2)),
            ("grouped22", None, None, (2, 3)),
            ("f5-aligned", None, None, (1, 2)),
        ];
        for (id, k, n, (num, den)) in cases {
            let scheme = make_scheme(id, k, n).unwrap();
            let trials: Vec<Trial> = (0..5)
                .flat_map(|seed| {
                    (0..scheme.params().messages)
                        .map(move |desired| (desired, seed))
                })
                .map(|(desired, seed)| scheme.trial(desired, seed).unwrap())
                .collect();
            assert_eq!(
                measure_rate(&trials).unwrap(),
                ExactRational::new(num, den).unwrap(),
                "{id}"
            );
        }
    }

    #[test]
    fn capacity_rate_matches_independent_closed_form() {
        // K=5, N=2: 2^4 / (2^5 - 1).
        let scheme = make_scheme("capacity", Some(5), Some(2)).unwrap();
        let trials = vec![scheme.trial(0, 1).unwrap()];
        assert_eq!(
            measure_rate(&trials).unwrap(),
            ExactRational::new(16, 31).unwrap()
        );
    }

    #[test]
    fn mixed_trials_are_rejected() {
        let a = make_scheme("grouped22", None, None)
            .unwrap()
            .trial(0, 1)
            .unwrap();
        let b = make_scheme("asym22", None, None)
            .unwrap()
            .trial(0, 1)
            .unwrap();
        assert!(matches!(
            measure_rate(&[a, b]),
            Err(VerifyError::MixedTrials)
        ));
        assert!(matches!(measure_rate(&[]), Err(VerifyError::NoTrials)));
    }
}
