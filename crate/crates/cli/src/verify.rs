//! Randomized identity suites. Every trial draws its state and instrument
//! from a generator seeded by `(seed, suite, trial)`, so results do not
//! depend on scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use qdiscord::correlation::balance_report;
use qdiscord::measurement::{projective_from_unitary, random_instrument_from_rng, random_rank1_povm_from_rng};
use qdiscord::optimizer::minimize_all_expressions;
use qdiscord::qstate::{haar_unitary, random_density_from_rng, seeded_rng};
use qdiscord::{DensityOperator, KrausInstrument, OptimizerConfig, SubsystemLayout};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::CliError;

/// Tolerance for exact identities at a fixed measurement.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance for agreement of independently minimized expressions.
pub const MINIMUM_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Tradeoff,
    Gaps,
    Rank1,
    Good,
    ProjectiveChain,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Tradeoff, Suite::Gaps, Suite::Rank1, Suite::Good, Suite::ProjectiveChain];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Tradeoff => "tradeoff",
            Suite::Gaps => "gaps",
            Suite::Rank1 => "rank1",
            Suite::Good => "good",
            Suite::ProjectiveChain => "projective_chain",
        }
    }

    /// Residual names checked by this suite, with their tolerances.
    pub fn identities(self) -> &'static [(&'static str, f64)] {
        match self {
            Suite::Tradeoff => &[("tradeoff_local", IDENTITY_TOL), ("tradeoff_whole", IDENTITY_TOL)],
            Suite::Gaps => &[
                ("disturbance_local_two_path", IDENTITY_TOL),
                ("disturbance_whole_two_path", IDENTITY_TOL),
                ("disturbance_gap_two_path", IDENTITY_TOL),
                ("gain_gap_two_path", IDENTITY_TOL),
                ("gain_le_disturbance", IDENTITY_TOL),
                ("disturbance_le_cond", IDENTITY_TOL),
            ],
            Suite::Rank1 => &[("rank1_cond_eq_disturbance", IDENTITY_TOL)],
            Suite::Good => &[("good_gain_eq_disturbance", IDENTITY_TOL), ("good_missing", IDENTITY_TOL)],
            Suite::ProjectiveChain => &[
                ("relent_eq_cond", IDENTITY_TOL),
                ("gain_eq_cond", IDENTITY_TOL),
                ("rank1_cond_eq_disturbance", IDENTITY_TOL),
                ("good_gain_eq_disturbance", IDENTITY_TOL),
                ("coles_decoherence", IDENTITY_TOL),
                ("coles_gain", IDENTITY_TOL),
                ("minimized_spread", MINIMUM_TOL),
            ],
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single suite or all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteSelection {
    One(Suite),
    All,
}

impl SuiteSelection {
    pub fn suites(self) -> Vec<Suite> {
        match self {
            SuiteSelection::One(s) => vec![s],
            SuiteSelection::All => Suite::ALL.to_vec(),
        }
    }
}

impl fmt::Display for SuiteSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuiteSelection::One(s) => s.fmt(f),
            SuiteSelection::All => f.write_str("all"),
        }
    }
}

impl FromStr for SuiteSelection {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s == "all" {
            return Ok(SuiteSelection::All);
        }
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .map(SuiteSelection::One)
            .ok_or_else(|| CliError::Input(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstrumentKind {
    /// Haar-random orthonormal basis.
    Projective,
    /// Canonical square-root realization of a Haar-random rank-1 POVM.
    Rank1Povm,
    /// The same kind of POVM with each Kraus operator split into several.
    Rank1MultiKraus,
    /// Random instrument with several Kraus operators per outcome, generally
    /// not rank-1.
    MultiKraus,
}

pub struct TrialCase {
    pub state: DensityOperator,
    pub instrument: KrausInstrument,
    pub kind: InstrumentKind,
}

fn trial_seed(seed: u64, suite: Suite, index: usize) -> u64 {
    // splitmix64 finalizer over the combined key.
    let mut z = seed ^ suite.tag().rotate_left(48) ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random two-qubit state and instrument on `B` for one trial.
pub fn trial_case(suite: Suite, seed: u64, index: usize) -> Result<TrialCase, CliError> {
    let mut rng = seeded_rng(trial_seed(seed, suite, index));
    let layout = SubsystemLayout::bipartite(("A", 2), ("B", 2))?;
    let rank = rng.random_range(1..=4);
    let state = random_density_from_rng(&mut rng, layout, rank)?;
    let kind = match suite {
        Suite::Tradeoff | Suite::Gaps => {
            [InstrumentKind::Projective, InstrumentKind::Rank1Povm, InstrumentKind::MultiKraus][index % 3]
        }
        Suite::Rank1 => [InstrumentKind::Rank1Povm, InstrumentKind::Rank1MultiKraus][index % 2],
        Suite::Good => [InstrumentKind::Rank1Povm, InstrumentKind::Rank1Povm, InstrumentKind::Projective][index % 3],
        Suite::ProjectiveChain => InstrumentKind::Projective,
    };
    let instrument = match kind {
        InstrumentKind::Projective => projective_from_unitary(&haar_unitary(&mut rng, 2))?,
        InstrumentKind::Rank1Povm => {
            let n = if suite == Suite::Tradeoff || suite == Suite::Gaps { 3 } else { rng.random_range(2..=4) };
            random_rank1_povm_from_rng(&mut rng, 2, n)?
        }
        InstrumentKind::Rank1MultiKraus => {
            let n = rng.random_range(2..=4);
            let povm = random_rank1_povm_from_rng(&mut rng, 2, n)?;
            let parts = rng.random_range(2..=3);
            let raw: Vec<f64> = (0..parts).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mixers: Vec<_> = raw.iter().map(|w| (w / total, haar_unitary(&mut rng, 2))).collect();
            povm.split_kraus(&mixers)?
        }
        InstrumentKind::MultiKraus => {
            let outcomes = rng.random_range(2..=3);
            let counts: Vec<usize> = (0..outcomes).map(|_| rng.random_range(1..=3)).collect();
            let counts = if counts.iter().all(|&k| k == 1) { vec![2; outcomes] } else { counts };
            random_instrument_from_rng(&mut rng, 2, &counts)?
        }
    };
    Ok(TrialCase { state, instrument, kind })
}

/// Residuals of one trial, keyed by identity name.
pub fn trial_residuals(
    suite: Suite,
    case: &TrialCase,
    config: &OptimizerConfig,
) -> Result<BTreeMap<String, f64>, CliError> {
    let report = balance_report(&case.state, "B", &case.instrument)?;
    let mut out = BTreeMap::new();
    for (name, _) in suite.identities() {
        if *name == "minimized_spread" {
            let r = minimize_all_expressions(&case.state, "B", config)?;
            out.insert(name.to_string(), r.residual_spread);
        } else if let Some(v) = report.identity_residuals.get(*name) {
            out.insert(name.to_string(), *v);
        } else {
            return Err(CliError::Internal(format!("{suite} trial lacks residual `{name}`")));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityOutcome {
    pub tolerance: f64,
    pub max_residual: f64,
    pub worst_trial: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub instrument_kinds: BTreeMap<InstrumentKind, usize>,
    pub identities: BTreeMap<String, IdentityOutcome>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
    /// Left out unless requested, since it would break byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64, config: &OptimizerConfig) -> Result<SuiteReport, CliError> {
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let case = trial_case(suite, seed, i)?;
            Ok((case.kind, trial_residuals(suite, &case, config)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut instrument_kinds = BTreeMap::new();
    for (kind, _) in &results {
        *instrument_kinds.entry(*kind).or_insert(0) += 1;
    }
    let identities: BTreeMap<String, IdentityOutcome> = suite
        .identities()
        .iter()
        .map(|&(name, tolerance)| {
            let (worst_trial, max_residual) = results
                .iter()
                .map(|(_, r)| r[name])
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
            let pass = max_residual <= tolerance;
            (name.to_string(), IdentityOutcome { tolerance, max_residual, worst_trial, pass })
        })
        .collect();
    let pass = identities.values().all(|o| o.pass);
    Ok(SuiteReport { suite, trials, instrument_kinds, identities, pass })
}

pub fn run_verification(
    selection: SuiteSelection,
    trials: usize,
    seed: u64,
    config: &OptimizerConfig,
) -> Result<VerificationReport, CliError> {
    if trials == 0 {
        return Err(CliError::Input("trials must be at least 1".into()));
    }
    let suites =
        selection.suites().into_iter().map(|s| run_suite(s, trials, seed, config)).collect::<Result<Vec<_>, _>>()?;
    let pass = suites.iter().all(|s| s.pass);
    Ok(VerificationReport { suite: selection.to_string(), trials, seed, suites, pass, wall_clock_seconds: None })
}
