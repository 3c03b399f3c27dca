//! Measurement rounds that turn a polynomial-coded theory into (theorem, proof) pairs.
//!
//! A theorem is an outcome `m` of measuring `F(N₁,…,N_k)`; its proof is the tuple
//! `(n₁,…,n_k)` read off by measuring the number operators on the collapsed state.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::fock::{make_state, FockError, StateSpec, StateVector};
use crate::measure::{extract_proof, measure, outcome_distribution, MeasureError, OutcomeDistribution};
use crate::poly::{enumerate_range, preimages, NonnegPolynomial, PolyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProverError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("decoder maps theorems {first} and {second} to the same text {text:?}")]
    DecoderNotInjective { first: u64, second: u64, text: String },
}

/// A theory whose theorems are the values of `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalSystem {
    polynomial: NonnegPolynomial,
    label: String,
    decoder: Option<BTreeMap<u64, String>>,
}

impl FormalSystem {
    pub fn new(polynomial: NonnegPolynomial, label: impl Into<String>) -> Self {
        FormalSystem { polynomial, label: label.into(), decoder: None }
    }

    /// Attaches display names for theorems. Names must be distinct across the
    /// theorems up to `display_bound`.
    pub fn with_decoder(mut self, decoder: BTreeMap<u64, String>, display_bound: u64) -> Result<Self, ProverError> {
        let mut owner: BTreeMap<&str, u64> = BTreeMap::new();
        for m in enumerate_range(&self.polynomial, display_bound) {
            if let Some(text) = decoder.get(&m) {
                if let Some(&first) = owner.get(text.as_str()) {
                    return Err(ProverError::DecoderNotInjective { first, second: m, text: text.clone() });
                }
                owner.insert(text, m);
            }
        }
        self.decoder = Some(decoder);
        Ok(self)
    }

    pub fn polynomial(&self) -> &NonnegPolynomial {
        &self.polynomial
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Display text for theorem `m`: the decoder's entry, or the number itself.
    pub fn display(&self, m: &BigUint) -> String {
        u64::try_from(m)
            .ok()
            .and_then(|m| self.decoder.as_ref()?.get(&m).cloned())
            .unwrap_or_else(|| m.to_string())
    }

    /// The theory's polynomial in as many variables as `s` has modes.
    fn polynomial_for(&self, s: &StateVector) -> Result<NonnegPolynomial, ProverError> {
        Ok(self.polynomial.with_arity(s.modes())?)
    }
}

/// Serializes a nonnegative integer as a JSON number when it fits in `u64`,
/// otherwise as a decimal string.
pub(crate) fn serialize_big<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    match u64::try_from(v) {
        Ok(small) => s.serialize_u64(small),
        Err(_) => s.serialize_str(&v.to_string()),
    }
}

/// One proving round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementRecord {
    #[serde(serialize_with = "serialize_big")]
    pub m: BigUint,
    pub proof: Vec<u64>,
    /// Probability of the observed theorem.
    pub p: f64,
    /// Master seed of the run.
    pub seed: u64,
    /// Trial index; `(seed, trial)` determines the round's random stream.
    pub trial: u64,
}

/// Generator seed for trial `index` of a run seeded with `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Measures `F`, then the number operators on the collapsed state. The returned
/// record has already passed the `F(proof) = m` check.
pub fn prove_once(
    sys: &FormalSystem,
    s: &StateVector,
    rng: &mut ChaCha8Rng,
    seed: u64,
    trial: u64,
) -> Result<MeasurementRecord, ProverError> {
    let f = sys.polynomial_for(s)?;
    let out = measure(&f, s, rng)?;
    let proof = extract_proof(&f, &out, rng)?;
    Ok(MeasurementRecord { m: out.outcome, proof, p: out.probability, seed, trial })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub label: String,
    pub seed: u64,
    pub records: Vec<MeasurementRecord>,
    pub empirical: BTreeMap<BigUint, u64>,
    pub theoretical: OutcomeDistribution,
    /// `½ Σ_m |count(m)/N − p(m)|`.
    pub total_variation: f64,
}

impl TrialReport {
    pub fn trials(&self) -> usize {
        self.records.len()
    }

    /// Outcomes with positive probability or at least one observation, ascending.
    pub fn outcome_rows(&self) -> Vec<OutcomeRow> {
        let keys: BTreeSet<&BigUint> = self.theoretical.outcomes().chain(self.empirical.keys()).collect();
        keys.into_iter()
            .map(|m| OutcomeRow {
                m: m.clone(),
                p: self.theoretical.probability(m),
                count: self.empirical.get(m).copied().unwrap_or(0),
            })
            .collect()
    }

    pub fn summary(&self, records_path: Option<String>) -> ReportSummary {
        ReportSummary {
            label: self.label.clone(),
            trials: self.records.len() as u64,
            seed: self.seed,
            total_variation: self.total_variation,
            outcomes: self.outcome_rows(),
            records_path,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRow {
    #[serde(serialize_with = "serialize_big")]
    pub m: BigUint,
    pub p: f64,
    pub count: u64,
}

/// JSON form of a [`TrialReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub label: String,
    pub trials: u64,
    pub seed: u64,
    pub total_variation: f64,
    pub outcomes: Vec<OutcomeRow>,
    pub records_path: Option<String>,
}

/// Runs `trials` independent rounds on fresh copies of the state described by `spec`.
pub fn run_trials(sys: &FormalSystem, spec: &StateSpec, trials: u64, seed: u64) -> Result<TrialReport, ProverError> {
    let state = make_state(spec)?;
    run_trials_on(sys, &state, trials, seed)
}

pub fn run_trials_on(sys: &FormalSystem, state: &StateVector, trials: u64, seed: u64) -> Result<TrialReport, ProverError> {
    if trials == 0 {
        return Err(ProverError::NoTrials);
    }
    let theoretical = outcome_distribution(&sys.polynomial_for(state)?, state)?;
    let mut records = Vec::with_capacity(trials as usize);
    let mut empirical: BTreeMap<BigUint, u64> = BTreeMap::new();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial));
        let record = prove_once(sys, state, &mut rng, seed, trial)?;
        *empirical.entry(record.m.clone()).or_default() += 1;
        records.push(record);
    }
    let total_variation = OutcomeDistribution::from_counts(&empirical).total_variation(&theoretical);
    Ok(TrialReport { label: sys.label.clone(), seed, records, empirical, theoretical, total_variation })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Coverage {
    /// Distinct theorems seen, ascending.
    pub observed: Vec<BigUint>,
    /// Theorems up to the bound that the state can produce but that were not seen.
    pub missing: Vec<u64>,
    /// Observed values that `F` never takes. Empty for every correct run.
    pub spurious: Vec<BigUint>,
}

pub fn coverage_check(sys: &FormalSystem, report: &TrialReport, bound: u64) -> Coverage {
    let observed: Vec<BigUint> = report.empirical.keys().cloned().collect();
    let missing = enumerate_range(&sys.polynomial, bound)
        .into_iter()
        .filter(|&m| {
            let m = BigUint::from(m);
            report.theoretical.probability(&m) > 0.0 && !report.empirical.contains_key(&m)
        })
        .collect();
    let spurious = observed
        .iter()
        .filter(|m| !in_range(sys, report, m))
        .cloned()
        .collect();
    Coverage { observed, missing, spurious }
}

/// Range membership by preimage search; values past `u64` are checked against the
/// proofs recorded for them instead.
fn in_range(sys: &FormalSystem, report: &TrialReport, m: &BigUint) -> bool {
    match u64::try_from(m) {
        Ok(small) => !preimages(&sys.polynomial, small, 1).tuples.is_empty(),
        Err(_) => report.records.iter().filter(|r| &r.m == m).all(|r| {
            let f = sys.polynomial.with_arity(r.proof.len());
            f.ok().and_then(|f| f.eval(&r.proof).ok()).as_ref() == Some(m)
        }),
    }
}
