//! Polynomials with nonnegative integer coefficients and their ranges over `ℕ^k`.
//!
//! Text format: a sum of products, each factor an integer or a variable `xI` with an
//! optional `^e`, e.g. `2*x1 + 3*x2 + 1` or `x1^2 + 2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::lexer::{Cursor, TokenKind};
use crate::unary::{parse_literal, LinearForm, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
}

/// `Σ c · x₁^e₁ ⋯ x_k^e_k` with every `c ≥ 1` and distinct exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NonnegPolynomial {
    k: usize,
    terms: BTreeMap<Vec<u32>, BigUint>,
}

impl NonnegPolynomial {
    /// Like terms are merged and zero coefficients discarded. Exponent vectors shorter
    /// than `k` are padded with zeros.
    pub fn new<C: Into<BigUint>>(k: usize, terms: impl IntoIterator<Item = (Vec<u32>, C)>) -> Self {
        let mut map: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
        for (mut exps, c) in terms {
            assert!(exps.len() <= k, "exponent vector longer than arity");
            exps.resize(k, 0);
            *map.entry(exps).or_default() += c.into();
        }
        map.retain(|_, c| !c.is_zero());
        NonnegPolynomial { k, terms: map }
    }

    pub fn constant(k: usize, c: u64) -> Self {
        NonnegPolynomial::new(k, [(vec![], c)])
    }

    /// `a₁x₁ + … + a_k x_k + a`, whose range is exactly the set of the form.
    pub fn from_linear(f: &LinearForm) -> Self {
        let k = f.arity();
        let linear = f.coeffs().iter().enumerate().map(|(i, &c)| {
            let mut e = vec![0; k];
            e[i] = 1;
            (e, c)
        });
        NonnegPolynomial::new(k, linear.chain([(vec![], f.offset())]))
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigUint)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// The same polynomial viewed in `k ≥ self.arity()` variables.
    pub fn with_arity(&self, k: usize) -> Result<Self, PolyError> {
        if k < self.k {
            return Err(PolyError::Arity { expected: self.k, got: k });
        }
        Ok(NonnegPolynomial::new(k, self.terms.iter().map(|(e, c)| (e.clone(), c.clone()))))
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn check_arity(&self, n: &[u64]) -> Result<(), PolyError> {
        if n.len() == self.k {
            Ok(())
        } else {
            Err(PolyError::Arity { expected: self.k, got: n.len() })
        }
    }

    pub fn eval(&self, n: &[u64]) -> Result<BigUint, PolyError> {
        self.check_arity(n)?;
        let mut total = BigUint::zero();
        for (exps, c) in &self.terms {
            let mut term = c.clone();
            for (&x, &e) in n.iter().zip(exps) {
                if e > 0 {
                    term *= BigUint::from(x).pow(e);
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Value at `n`, saturating at `u128::MAX`. Exact whenever the result is below it.
    pub(crate) fn eval_capped(&self, n: &[u64]) -> u128 {
        let mut total: u128 = 0;
        for (exps, c) in &self.terms {
            let mut term = c.to_u128().unwrap_or(u128::MAX);
            for (&x, &e) in n.iter().zip(exps) {
                if e == 0 {
                    continue;
                }
                if x == 0 {
                    term = 0;
                    break;
                }
                let power = (x as u128).checked_pow(e).unwrap_or(u128::MAX);
                term = term.saturating_mul(power);
            }
            total = total.saturating_add(term);
        }
        total
    }

    /// Exclusive per-coordinate limits: if `nᵢ ≥ limits[i]` then either `F(n) > bound`
    /// or no monomial containing `xᵢ` contributes at `n`. Coordinates that occur in no
    /// non-constant monomial get limit 1, pinning them at 0.
    pub fn search_limits(&self, bound: u64) -> Vec<u64> {
        let mut limits = vec![1u64; self.k];
        for (exps, c) in &self.terms {
            let c = c.to_u64().unwrap_or(u64::MAX);
            let quotient = bound / c;
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    // c·n^e > bound  ⟺  n^e > ⌊bound / c⌋
                    let first_over = quotient.nth_root(e) + 1;
                    limits[i] = limits[i].max(first_over);
                }
            }
        }
        limits
    }

    /// Whether every monomial containing `x_i` vanishes at `n`, so that `F` does not
    /// depend on `x_i` near `n`.
    fn coordinate_is_free(&self, i: usize, n: &[u64]) -> bool {
        self.terms.keys().filter(|e| e[i] > 0).all(|e| {
            e.iter().enumerate().any(|(j, &ej)| j != i && ej > 0 && n[j] == 0)
        })
    }
}

impl fmt::Display for NonnegPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (exps, c)) in self.terms.iter().rev().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            let mut factors = Vec::new();
            if !c.is_one() || exps.iter().all(|&e| e == 0) {
                factors.push(c.to_string());
            }
            for (i, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, e)),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

/// Parses the polynomial text format. The arity is the largest variable index used.
pub fn parse_polynomial(text: &str) -> Result<NonnegPolynomial, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut terms: Vec<(BTreeMap<usize, u32>, BigUint)> = Vec::new();
    loop {
        terms.push(parse_product(&mut cur)?);
        if cur.at_end() {
            break;
        }
        if !cur.eat(TokenKind::Plus) {
            return Err(ParseError::syntax(cur.offset(), "expected '+', '*' or end of input"));
        }
    }
    let k = terms.iter().filter_map(|(vars, _)| vars.keys().next_back()).max().map_or(0, |&i| i + 1);
    Ok(NonnegPolynomial::new(
        k,
        terms.into_iter().map(|(vars, c)| {
            let mut exps = vec![0u32; k];
            for (i, e) in vars {
                exps[i] = e;
            }
            (exps, c)
        }),
    ))
}

fn parse_product(cur: &mut Cursor<'_>) -> Result<(BTreeMap<usize, u32>, BigUint), ParseError> {
    let mut coeff = BigUint::one();
    let mut vars: BTreeMap<usize, u32> = BTreeMap::new();
    loop {
        let offset = cur.offset();
        match cur.next().map(|t| t.kind) {
            Some(TokenKind::Int(digits)) => {
                coeff *= digits.parse::<BigUint>().expect("lexer yields ASCII digits");
            }
            Some(TokenKind::Ident(name)) => {
                let index = variable_index(name)
                    .ok_or_else(|| ParseError::syntax(offset, format!("unknown variable {name:?}, expected x1, x2, …")))?;
                let mut exp = 1u32;
                if cur.eat(TokenKind::Caret) {
                    let e_offset = cur.offset();
                    match cur.next().map(|t| t.kind) {
                        Some(TokenKind::Int(d)) => exp = parse_literal(d, e_offset, u32::MAX as u64)? as u32,
                        _ => return Err(ParseError::syntax(e_offset, "expected an exponent after '^'")),
                    }
                }
                let slot = vars.entry(index).or_insert(0);
                *slot = slot
                    .checked_add(exp)
                    .ok_or(ParseError::Overflow { offset, max: u32::MAX as u64 })?;
            }
            _ => return Err(ParseError::syntax(offset, "expected a number or a variable")),
        }
        if !cur.eat(TokenKind::Star) {
            return Ok((vars, coeff));
        }
    }
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse::<usize>().ok().map(|i| i - 1)
}

/// `{F(n) : n ∈ ℕ^k} ∩ [0, bound]`, ascending.
pub fn enumerate_range(f: &NonnegPolynomial, bound: u64) -> Vec<u64> {
    let limits = f.search_limits(bound);
    let mut seen = BTreeSet::new();
    let mut point = vec![0u64; f.k];
    walk_box(f, &limits, bound as u128, &mut point, 0, &mut |point| {
        let v = f.eval_capped(point);
        if v <= bound as u128 {
            seen.insert(v as u64);
        }
    });
    seen.into_iter().collect()
}

/// Visits every point of the search box whose value could still be `≤ cap`, in
/// lexicographic order. Coordinates after `depth` are zero while earlier ones are
/// fixed, which gives a lower bound on `F` by monotonicity.
fn walk_box(
    f: &NonnegPolynomial,
    limits: &[u64],
    cap: u128,
    point: &mut [u64],
    depth: usize,
    visit: &mut dyn FnMut(&[u64]),
) {
    if depth == point.len() {
        visit(point);
        return;
    }
    for v in 0..limits[depth] {
        point[depth] = v;
        if f.eval_capped(point) > cap {
            break;
        }
        walk_box(f, limits, cap, point, depth + 1, visit);
    }
    point[depth] = 0;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preimages {
    /// Solutions in lexicographic order, at most `limit` of them.
    pub tuples: Vec<Vec<u64>>,
    /// Some solution has a coordinate `F` does not depend on there, so the full
    /// solution set in `ℕ^k` is infinite; only its representatives with that
    /// coordinate inside the search box are listed.
    pub infinite: bool,
}

/// Tuples `n` with `F(n) = m`, lexicographically, at most `limit` of them.
pub fn preimages(f: &NonnegPolynomial, m: u64, limit: usize) -> Preimages {
    let limits = f.search_limits(m);
    let mut tuples = Vec::new();
    let mut infinite = false;
    let mut point = vec![0u64; f.k];
    walk_box(f, &limits, m as u128, &mut point, 0, &mut |point| {
        if f.eval_capped(point) != m as u128 {
            return;
        }
        if !infinite {
            infinite = (0..point.len()).any(|i| f.coordinate_is_free(i, point));
        }
        if tuples.len() < limit {
            tuples.push(point.to_vec());
        }
    });
    Preimages { tuples, infinite }
}
