//! Projective measurement of diagonal observables `F(N₁,…,N_k)`.
//!
//! Outcome probabilities follow the Born rule: `p(m) = Σ_{F(n)=m} |⟨n|Ψ⟩|²`. Sampling is
//! by inverse CDF over outcomes in ascending order, so a seeded generator always
//! yields the same outcome sequence.

mod eigen;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::Rng;
use thiserror::Error;

use crate::fock::{FockError, FockSpace, StateVector};
use crate::poly::{NonnegPolynomial, PolyError};

pub use eigen::{eigen_spectrum, jacobi_eigenvalues, MAX_SWEEPS, OFF_DIAGONAL_TOLERANCE};

/// Largest tolerated `|‖Ψ‖² − 1|` for a state handed to a measurement.
pub const STATE_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("observable has {observable} modes but the state has {state}")]
    Arity { observable: usize, state: usize },
    #[error("state is not normalized (squared norm {norm_sqr})")]
    Unnormalized { norm_sqr: f64 },
    #[error("measured numbers {proof:?} give {value}, not the observed outcome {outcome}")]
    InconsistentProof { outcome: BigUint, proof: Vec<u64>, value: BigUint },
    #[error("scale {0} is not a positive finite number")]
    NonPositiveScale(f64),
    #[error("at least one mode is required")]
    NoModes,
    #[error("matrix is not Hermitian (deviation {deviation})")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Outcome `m` → probability, for outcomes of nonzero probability.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeDistribution {
    probs: BTreeMap<BigUint, f64>,
}

impl OutcomeDistribution {
    pub fn probability(&self, m: &BigUint) -> f64 {
        self.probs.get(m).copied().unwrap_or(0.0)
    }

    /// Outcomes ascending.
    pub fn iter(&self) -> impl Iterator<Item = (&BigUint, f64)> + '_ {
        self.probs.iter().map(|(m, &p)| (m, p))
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &BigUint> + '_ {
        self.probs.keys()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Inverse CDF at `u ∈ [0, 1)`, scaled by the total mass.
    pub fn quantile(&self, u: f64) -> Option<(&BigUint, f64)> {
        let target = u * self.total();
        let mut acc = 0.0;
        let mut last = None;
        for (m, &p) in &self.probs {
            acc += p;
            if target < acc {
                return Some((m, p));
            }
            last = Some((m, p));
        }
        last
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(&BigUint, f64)> {
        self.quantile(rng.gen::<f64>())
    }

    /// `½ Σ_m |p(m) − q(m)|`.
    pub fn total_variation(&self, other: &OutcomeDistribution) -> f64 {
        let mut sum = 0.0;
        for (m, &p) in &self.probs {
            sum += (p - other.probability(m)).abs();
        }
        for (m, &q) in &other.probs {
            if !self.probs.contains_key(m) {
                sum += q;
            }
        }
        0.5 * sum
    }

    /// Empirical distribution of a count table.
    pub fn from_counts(counts: &BTreeMap<BigUint, u64>) -> Self {
        let n: u64 = counts.values().sum();
        let probs = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(m, &c)| (m.clone(), c as f64 / n as f64))
            .collect();
        OutcomeDistribution { probs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub outcome: BigUint,
    /// `C = p(m)`.
    pub probability: f64,
    /// `(1/√C) Σ_{F(n)=m} ⟨n|Ψ⟩ |n⟩`.
    pub collapsed: StateVector,
}

fn check(f: &NonnegPolynomial, s: &StateVector) -> Result<(), MeasureError> {
    if f.arity() != s.modes() {
        return Err(MeasureError::Arity { observable: f.arity(), state: s.modes() });
    }
    check_norm(s)
}

fn check_norm(s: &StateVector) -> Result<(), MeasureError> {
    let norm_sqr = s.norm_sqr();
    if (norm_sqr - 1.0).abs() > STATE_NORM_TOLERANCE {
        return Err(MeasureError::Unnormalized { norm_sqr });
    }
    Ok(())
}

/// `F` at the occupations of basis index `i`.
fn value_at(f: &NonnegPolynomial, space: FockSpace, i: usize) -> BigUint {
    f.eval(&space.occupations(i).0).expect("arity checked against the state")
}

pub fn outcome_distribution(f: &NonnegPolynomial, s: &StateVector) -> Result<OutcomeDistribution, MeasureError> {
    check(f, s)?;
    let space = s.space();
    let mut probs: BTreeMap<BigUint, f64> = BTreeMap::new();
    for (i, c) in s.iter() {
        *probs.entry(value_at(f, space, i)).or_default() += c.norm_sqr();
    }
    probs.retain(|_, p| *p > 0.0);
    Ok(OutcomeDistribution { probs })
}

/// Restriction of `s` to the eigenspace `F(n) = m`, renormalized by `1/√C`.
pub fn collapse(f: &NonnegPolynomial, s: &StateVector, m: &BigUint) -> Result<StateVector, MeasureError> {
    if f.arity() != s.modes() {
        return Err(MeasureError::Arity { observable: f.arity(), state: s.modes() });
    }
    let kept = s.restrict(|n| f.eval(&n.0).map_or(false, |v| &v == m));
    Ok(kept.normalize()?)
}

pub fn measure<R: Rng + ?Sized>(
    f: &NonnegPolynomial,
    s: &StateVector,
    rng: &mut R,
) -> Result<MeasurementOutcome, MeasureError> {
    let dist = outcome_distribution(f, s)?;
    let (m, p) = dist.sample(rng).expect("a normalized state has some outcome");
    let outcome = m.clone();
    let collapsed = collapse(f, s, &outcome)?;
    Ok(MeasurementOutcome { outcome, probability: p, collapsed })
}

/// Simultaneous measurement of `N₁,…,N_k`: a basis state drawn with probability
/// `|⟨n|s⟩|²`, by inverse CDF over basis index order. The post-measurement state
/// is that basis state.
pub fn measure_numbers<R: Rng + ?Sized>(s: &StateVector, rng: &mut R) -> Result<(Vec<u64>, f64), MeasureError> {
    check_norm(s)?;
    let total = s.norm_sqr();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut pick = None;
    for (i, c) in s.iter() {
        let p = c.norm_sqr();
        acc += p;
        pick = Some((i, p));
        if target < acc {
            break;
        }
    }
    let (i, p) = pick.expect("a normalized state has support");
    Ok((s.space().occupations(i).0, p / total))
}

/// Measures the number operators on the collapsed state and checks `F(n) = m`.
pub fn extract_proof<R: Rng + ?Sized>(
    f: &NonnegPolynomial,
    out: &MeasurementOutcome,
    rng: &mut R,
) -> Result<Vec<u64>, MeasureError> {
    let (proof, _) = measure_numbers(&out.collapsed, rng)?;
    let value = f.eval(&proof)?;
    if value != out.outcome {
        return Err(MeasureError::InconsistentProof { outcome: out.outcome.clone(), proof, value });
    }
    Ok(proof)
}

/// The two-step form of the same measurement: measure `N₁,…,N_k` on `s`, then
/// evaluate `F` at the result. Induces the same outcome distribution as [`measure`].
pub fn measure_by_numbers<R: Rng + ?Sized>(
    f: &NonnegPolynomial,
    s: &StateVector,
    rng: &mut R,
) -> Result<(BigUint, Vec<u64>), MeasureError> {
    if f.arity() != s.modes() {
        return Err(MeasureError::Arity { observable: f.arity(), state: s.modes() });
    }
    let (n, _) = measure_numbers(s, rng)?;
    Ok((f.eval(&n)?, n))
}

/// Distinct values of `F` on the box `[0, cutoff)^k`, which is the spectrum of
/// `F(N₁,…,N_k)` on the truncated space.
pub fn spectrum_diagonal(f: &NonnegPolynomial, k: usize, cutoff: usize) -> Result<Vec<BigUint>, MeasureError> {
    let f = f.with_arity(k)?;
    let space = FockSpace::new(k, cutoff)?;
    let mut values: Vec<BigUint> = (0..space.dimension()).map(|i| value_at(&f, space, i)).collect();
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

/// `T(D) = min_i F(D·e_i)`. Any `n` with `F(n) < T(D)` lies inside the box, so below
/// `T(D)` the truncated spectrum and the full range agree. `None` when `k = 0`.
pub fn truncation_threshold(f: &NonnegPolynomial, k: usize, cutoff: usize) -> Result<Option<BigUint>, MeasureError> {
    let f = f.with_arity(k)?;
    let mut best = None;
    for i in 0..k {
        let mut n = vec![0u64; k];
        n[i] = cutoff as u64;
        let v = f.eval(&n)?;
        if best.as_ref().map_or(true, |b| &v < b) {
            best = Some(v);
        }
    }
    Ok(best)
}

/// Distinct energies `Σ_j ε_j (n_j + ½)` over the box, ascending, where `ε_j` is the
/// quantum `ħω_j` of mode `j`.
pub fn harmonic_energies(scales: &[f64], cutoff: usize) -> Result<Vec<f64>, MeasureError> {
    if scales.is_empty() {
        return Err(MeasureError::NoModes);
    }
    if let Some(&bad) = scales.iter().find(|&&e| !(e.is_finite() && e > 0.0)) {
        return Err(MeasureError::NonPositiveScale(bad));
    }
    let space = FockSpace::new(scales.len(), cutoff)?;
    let mut energies: Vec<f64> = space
        .basis()
        .map(|n| n.0.iter().zip(scales).map(|(&nj, &e)| e * (nj as f64 + 0.5)).sum())
        .collect();
    energies.sort_by(f64::total_cmp);
    energies.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    Ok(energies)
}
