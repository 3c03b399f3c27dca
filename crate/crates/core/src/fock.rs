//! Truncated Fock space of `k` bosonic modes.
//!
//! Each mode keeps occupations `0..cutoff`. Basis states are indexed in
//! colexicographic order: `index = Σ_j n_j · cutoff^j`, so mode 1 varies fastest.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::NonnegPolynomial;

/// Upper limit on `cutoff^k`.
pub const MAX_DIMENSION: usize = 1 << 24;

pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error("cutoff^k = {cutoff}^{k} exceeds the supported dimension {MAX_DIMENSION}")]
    DimensionTooLarge { k: usize, cutoff: usize },
    #[error("explicit state lists no amplitudes")]
    EmptySpec,
    #[error("all amplitudes are zero")]
    ZeroState,
    #[error("occupation {occupation} of mode {mode} is not below the cutoff {cutoff}")]
    OccupationOutOfRange { mode: usize, occupation: u64, cutoff: usize },
    #[error("expected {expected} modes, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("mode {mode} does not exist in a {k}-mode space")]
    ModeOutOfRange { mode: usize, k: usize },
    #[error("amplitude is not finite")]
    NonFinite,
}

/// Shape of a truncated space: `k` modes, occupations `0..cutoff` each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    k: usize,
    cutoff: usize,
    dim: usize,
}

impl FockSpace {
    pub fn new(k: usize, cutoff: usize) -> Result<Self, FockError> {
        if cutoff == 0 {
            return Err(FockError::ZeroCutoff);
        }
        let dim = u32::try_from(k)
            .ok()
            .and_then(|k| cutoff.checked_pow(k))
            .filter(|&d| d <= MAX_DIMENSION)
            .ok_or(FockError::DimensionTooLarge { k, cutoff })?;
        Ok(FockSpace { k, cutoff, dim })
    }

    pub fn modes(&self) -> usize {
        self.k
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn index_of(&self, n: &[u64]) -> Result<usize, FockError> {
        if n.len() != self.k {
            return Err(FockError::Arity { expected: self.k, got: n.len() });
        }
        let mut index = 0usize;
        for (mode, &occ) in n.iter().enumerate().rev() {
            if occ >= self.cutoff as u64 {
                return Err(FockError::OccupationOutOfRange { mode, occupation: occ, cutoff: self.cutoff });
            }
            index = index * self.cutoff + occ as usize;
        }
        Ok(index)
    }

    pub fn occupations(&self, mut index: usize) -> FockBasisState {
        let mut n = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            n.push((index % self.cutoff) as u64);
            index /= self.cutoff;
        }
        FockBasisState(n)
    }

    /// All basis states in index order.
    pub fn basis(&self) -> impl Iterator<Item = FockBasisState> + '_ {
        (0..self.dim).map(|i| self.occupations(i))
    }

    fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow(mode as u32)
    }
}

/// Occupation numbers `|n₁,…,n_k⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockBasisState(pub Vec<u64>);

impl FockBasisState {
    pub fn occupations(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Display for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "|{}⟩", parts.join(","))
    }
}

/// Finite superposition over the basis of a [`FockSpace`]. Zero amplitudes are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: FockSpace,
    amps: BTreeMap<usize, Complex64>,
    truncation_loss: f64,
}

impl StateVector {
    pub fn zero(space: FockSpace) -> Self {
        StateVector { space, amps: BTreeMap::new(), truncation_loss: 0.0 }
    }

    pub fn basis(space: FockSpace, n: &[u64]) -> Result<Self, FockError> {
        let mut s = StateVector::zero(space);
        s.amps.insert(space.index_of(n)?, Complex64::one());
        Ok(s)
    }

    pub fn from_amplitudes(
        space: FockSpace,
        entries: impl IntoIterator<Item = (Vec<u64>, Complex64)>,
    ) -> Result<Self, FockError> {
        let mut s = StateVector::zero(space);
        for (n, c) in entries {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(FockError::NonFinite);
            }
            *s.amps.entry(space.index_of(&n)?).or_default() += c;
        }
        s.amps.retain(|_, c| !c.is_zero());
        Ok(s)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn modes(&self) -> usize {
        self.space.k
    }

    pub fn cutoff(&self) -> usize {
        self.space.cutoff
    }

    pub fn amplitude(&self, n: &[u64]) -> Complex64 {
        self.space
            .index_of(n)
            .ok()
            .and_then(|i| self.amps.get(&i).copied())
            .unwrap_or_default()
    }

    pub fn amplitude_at(&self, index: usize) -> Complex64 {
        self.amps.get(&index).copied().unwrap_or_default()
    }

    /// Nonzero components in basis index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.amps.iter().map(|(&i, &c)| (i, c))
    }

    pub fn support(&self) -> impl Iterator<Item = FockBasisState> + '_ {
        self.amps.keys().map(|&i| self.space.occupations(i))
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(Complex64::norm_sqr).sum()
    }

    /// Squared norm pushed past the cutoff by creation operators, accumulated over
    /// every operator application that produced this vector.
    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalize(mut self) -> Result<Self, FockError> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(FockError::ZeroState);
        }
        for c in self.amps.values_mut() {
            *c /= norm;
        }
        Ok(self)
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        if factor.is_zero() {
            self.amps.clear();
        } else {
            for c in self.amps.values_mut() {
                *c *= factor;
            }
        }
        self.truncation_loss *= factor.norm_sqr();
        self
    }

    pub fn add(&mut self, other: &StateVector) {
        debug_assert_eq!(self.space, other.space);
        for (&i, &c) in &other.amps {
            *self.amps.entry(i).or_default() += c;
        }
        self.amps.retain(|_, c| !c.is_zero());
        self.truncation_loss += other.truncation_loss;
    }

    /// Keeps only the components for which `keep` holds. Not renormalized.
    pub fn restrict(&self, mut keep: impl FnMut(&FockBasisState) -> bool) -> Self {
        let amps = self
            .amps
            .iter()
            .filter(|(&i, _)| keep(&self.space.occupations(i)))
            .map(|(&i, &c)| (i, c))
            .collect();
        StateVector { space: self.space, amps, truncation_loss: 0.0 }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .filter_map(|(i, a)| other.amps.get(i).map(|b| a.conj() * b))
            .sum()
    }

    /// Largest componentwise modulus of `self − other`.
    pub fn max_distance(&self, other: &StateVector) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in &self.amps {
            worst = worst.max((a - other.amplitude_at(*i)).norm());
        }
        for (i, b) in &other.amps {
            if !self.amps.contains_key(i) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    pub n: Vec<u64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Recipe for an initial state; the JSON form is tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSpec {
    Explicit { k: usize, cutoff: usize, amplitudes: Vec<AmplitudeEntry> },
    /// Equal amplitude on every basis state.
    Uniform { k: usize, cutoff: usize },
    /// Product of truncated coherent states, one `α` (as `[re, im]`) per mode.
    Coherent { k: usize, cutoff: usize, alpha: Vec<[f64; 2]> },
    /// I.i.d. standard complex Gaussian amplitudes from a seeded generator.
    Random { k: usize, cutoff: usize, seed: u64 },
}

impl StateSpec {
    pub fn space(&self) -> Result<FockSpace, FockError> {
        let (k, cutoff) = match *self {
            StateSpec::Explicit { k, cutoff, .. }
            | StateSpec::Uniform { k, cutoff }
            | StateSpec::Coherent { k, cutoff, .. }
            | StateSpec::Random { k, cutoff, .. } => (k, cutoff),
        };
        FockSpace::new(k, cutoff)
    }
}

/// Builds the normalized state described by `spec`.
pub fn make_state(spec: &StateSpec) -> Result<StateVector, FockError> {
    let space = spec.space()?;
    let raw = match spec {
        StateSpec::Explicit { amplitudes, .. } => {
            if amplitudes.is_empty() {
                return Err(FockError::EmptySpec);
            }
            StateVector::from_amplitudes(
                space,
                amplitudes.iter().map(|a| (a.n.clone(), Complex64::new(a.re, a.im))),
            )?
        }
        StateSpec::Uniform { .. } => {
            let amp = Complex64::new(1.0 / (space.dim as f64).sqrt(), 0.0);
            let amps = (0..space.dim).map(|i| (i, amp)).collect();
            return Ok(StateVector { space, amps, truncation_loss: 0.0 });
        }
        StateSpec::Coherent { k, alpha, .. } => {
            if alpha.len() != *k {
                return Err(FockError::Arity { expected: *k, got: alpha.len() });
            }
            // α^n / √n!, built up one factor α/√n at a time.
            let per_mode: Vec<Vec<Complex64>> = alpha
                .iter()
                .map(|&[re, im]| {
                    let a = Complex64::new(re, im);
                    let mut column = vec![Complex64::one()];
                    for n in 1..space.cutoff {
                        let prev = column[n - 1];
                        column.push(prev * a / (n as f64).sqrt());
                    }
                    column
                })
                .collect();
            let amps = (0..space.dim).map(|i| {
                let n = space.occupations(i);
                let c = n.0.iter().zip(&per_mode).map(|(&nj, col)| col[nj as usize]).product();
                (n.0, c)
            });
            StateVector::from_amplitudes(space, amps)?
        }
        StateSpec::Random { seed, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut s = StateVector::zero(space);
            for i in 0..space.dim {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                s.amps.insert(i, Complex64::new(re, im));
            }
            s.amps.retain(|_, c| !c.is_zero());
            s
        }
    };
    raw.normalize()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadderKind {
    Annihilate,
    Create,
}

/// `a_j` or `a_j†`. Modes are numbered from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub kind: LadderKind,
    pub mode: usize,
}

impl Ladder {
    pub fn annihilate(mode: usize) -> Self {
        Ladder { kind: LadderKind::Annihilate, mode }
    }

    pub fn create(mode: usize) -> Self {
        Ladder { kind: LadderKind::Create, mode }
    }

    pub fn adjoint(self) -> Self {
        let kind = match self.kind {
            LadderKind::Annihilate => LadderKind::Create,
            LadderKind::Create => LadderKind::Annihilate,
        };
        Ladder { kind, mode: self.mode }
    }
}

impl fmt::Display for Ladder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LadderKind::Annihilate => write!(f, "a{}", self.mode + 1),
            LadderKind::Create => write!(f, "a{}†", self.mode + 1),
        }
    }
}

/// `a_j|…,n_j,…⟩ = √n_j |…,n_j−1,…⟩`, `a_j†|…,n_j,…⟩ = √(n_j+1) |…,n_j+1,…⟩`.
///
/// Components raised to `n_j = cutoff` are dropped and their squared norm is added to
/// the result's truncation loss. The result is not renormalized.
pub fn apply_ladder(op: Ladder, s: &StateVector) -> Result<StateVector, FockError> {
    let space = s.space;
    if op.mode >= space.k {
        return Err(FockError::ModeOutOfRange { mode: op.mode, k: space.k });
    }
    let stride = space.stride(op.mode);
    let top = space.cutoff as u64 - 1;
    let mut out = StateVector { space, amps: BTreeMap::new(), truncation_loss: s.truncation_loss };
    for (&i, &c) in &s.amps {
        let n = ((i / stride) % space.cutoff) as u64;
        match op.kind {
            LadderKind::Annihilate if n > 0 => {
                out.amps.insert(i - stride, c * (n as f64).sqrt());
            }
            LadderKind::Annihilate => {}
            LadderKind::Create if n < top => {
                out.amps.insert(i + stride, c * ((n + 1) as f64).sqrt());
            }
            LadderKind::Create => out.truncation_loss += c.norm_sqr() * (n + 1) as f64,
        }
    }
    Ok(out)
}

/// Gaussian rational `p + qi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coefficient {
    pub re: BigRational,
    pub im: BigRational,
}

impl Coefficient {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Coefficient { re, im }
    }

    /// `p/q` as a real coefficient.
    pub fn ratio(p: i64, q: i64) -> Self {
        Coefficient::new(BigRational::new(p.into(), q.into()), BigRational::zero())
    }

    pub fn integer(p: i64) -> Self {
        Coefficient::ratio(p, 1)
    }

    pub fn imaginary(p: i64, q: i64) -> Self {
        Coefficient::new(BigRational::zero(), BigRational::new(p.into(), q.into()))
    }

    pub fn conj(&self) -> Self {
        Coefficient::new(self.re.clone(), -self.im.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl From<BigInt> for Coefficient {
    fn from(v: BigInt) -> Self {
        Coefficient::new(BigRational::from_integer(v), BigRational::zero())
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "({} {} {}i)", self.re, sign, self.im.abs())
            }
        }
    }
}

/// `P(a₁,…,a_k,a₁†,…,a_k†)` as a sum of ordered ladder words with Gaussian rational
/// coefficients. Factor order is kept as written; words act right to left.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneralObservable {
    k: usize,
    monomials: Vec<(Coefficient, Vec<Ladder>)>,
}

impl GeneralObservable {
    pub fn new(k: usize) -> Self {
        GeneralObservable { k, monomials: Vec::new() }
    }

    pub fn term(mut self, coefficient: Coefficient, word: impl IntoIterator<Item = Ladder>) -> Self {
        let word: Vec<Ladder> = word.into_iter().collect();
        assert!(word.iter().all(|l| l.mode < self.k), "ladder mode outside the observable's modes");
        if !coefficient.is_zero() {
            self.monomials.push((coefficient, word));
        }
        self
    }

    /// `N_j = a_j† a_j`.
    pub fn number(k: usize, mode: usize) -> Self {
        GeneralObservable::new(k).term(Coefficient::integer(1), [Ladder::create(mode), Ladder::annihilate(mode)])
    }

    /// `F(N₁,…,N_k)`, each `x_j^e` becoming `(a_j† a_j)^e`.
    pub fn from_polynomial(f: &NonnegPolynomial) -> Self {
        let mut obs = GeneralObservable::new(f.arity());
        for (exps, c) in f.terms() {
            let word: Vec<Ladder> = exps
                .iter()
                .enumerate()
                .flat_map(|(j, &e)| {
                    (0..e).flat_map(move |_| [Ladder::create(j), Ladder::annihilate(j)])
                })
                .collect();
            obs = obs.term(BigInt::from(c.clone()).into(), word);
        }
        obs
    }

    pub fn modes(&self) -> usize {
        self.k
    }

    pub fn monomials(&self) -> &[(Coefficient, Vec<Ladder>)] {
        &self.monomials
    }

    /// Longest ladder word.
    pub fn max_degree(&self) -> usize {
        self.monomials.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    /// Formal adjoint: conjugated coefficients, reversed words with `a ↔ a†`.
    pub fn adjoint(&self) -> Self {
        let monomials = self
            .monomials
            .iter()
            .map(|(c, w)| (c.conj(), w.iter().rev().map(|l| l.adjoint()).collect()))
            .collect();
        GeneralObservable { k: self.k, monomials }
    }

    pub fn plus(mut self, other: &GeneralObservable) -> Self {
        assert_eq!(self.k, other.k, "observables act on different mode counts");
        self.monomials.extend(other.monomials.iter().cloned());
        self
    }
}

impl fmt::Display for GeneralObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .monomials
            .iter()
            .map(|(c, w)| {
                let word: Vec<String> = w.iter().map(Ladder::to_string).collect();
                match (word.is_empty(), c.re.is_one() && c.im.is_zero()) {
                    (true, _) => c.to_string(),
                    (false, true) => word.join(" "),
                    (false, false) => format!("{c} {}", word.join(" ")),
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

pub fn apply_observable(obs: &GeneralObservable, s: &StateVector) -> Result<StateVector, FockError> {
    if obs.k != s.modes() {
        return Err(FockError::Arity { expected: obs.k, got: s.modes() });
    }
    let mut total = StateVector::zero(s.space);
    total.truncation_loss = s.truncation_loss;
    for (coefficient, word) in &obs.monomials {
        let mut v = StateVector { truncation_loss: 0.0, ..s.clone() };
        for &op in word.iter().rev() {
            v = apply_ladder(op, &v)?;
        }
        total.add(&v.scale(coefficient.to_complex()));
    }
    Ok(total)
}

/// Dense square matrix in row-major order over a [`FockSpace`] basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    space: FockSpace,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn from_rows(space: FockSpace, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), space.dim * space.dim, "entry count does not match the space");
        HermitianMatrix { space, entries }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dimension(&self) -> usize {
        self.space.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.space.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Max-norm of `A − A†` over the index pairs accepted by `include`.
    pub fn hermitian_deviation(&self, include: impl Fn(usize) -> bool) -> f64 {
        let n = self.space.dim;
        let mut worst: f64 = 0.0;
        for r in (0..n).filter(|&r| include(r)) {
            for c in (r..n).filter(|&c| include(c)) {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }
}

/// `⟨r|A|c⟩` for every pair of basis states of the truncated space.
pub fn matrix_of(obs: &GeneralObservable, k: usize, cutoff: usize) -> Result<HermitianMatrix, FockError> {
    let space = FockSpace::new(k, cutoff)?;
    let n = space.dim;
    let mut entries = vec![Complex64::zero(); n * n];
    for col in 0..n {
        let mut unit = StateVector::zero(space);
        unit.amps.insert(col, Complex64::one());
        let image = apply_observable(obs, &unit)?;
        for (row, c) in image.iter() {
            entries[row * n + col] = c;
        }
    }
    Ok(HermitianMatrix { space, entries })
}

/// Hermiticity on the block of basis states with every `n_j < cutoff − max_degree`,
/// where truncation cannot affect the matrix elements.
pub fn is_hermitian(obs: &GeneralObservable, k: usize, cutoff: usize) -> Result<bool, FockError> {
    let m = matrix_of(obs, k, cutoff)?;
    let space = m.space;
    let limit = cutoff.saturating_sub(obs.max_degree()) as u64;
    let interior = |i: usize| space.occupations(i).0.iter().all(|&n| n < limit);
    Ok(m.hermitian_deviation(interior) <= NORM_TOLERANCE)
}
