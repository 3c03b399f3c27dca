//! Unary sets built from singletons by sum and Kleene star.
//!
//! Every such set has the shape `{a₁n₁ + … + a_k n_k + a : nᵢ ∈ ℕ}`, held here as a
//! [`LinearForm`]. Sets are written in a small expression language:
//!
//! ```text
//! expr := term ('+' term)*
//! term := atom '*'*
//! atom := '{' digits '}' | '(' expr ')'
//! ```

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::lexer::{Cursor, LexError, TokenKind};

/// Largest residue table built while closing a set under star or computing gaps.
pub const MAX_RESIDUES: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    Singleton(u64),
    Sum(Box<SetExpr>, Box<SetExpr>),
    Star(Box<SetExpr>),
}

impl SetExpr {
    pub fn sum(left: SetExpr, right: SetExpr) -> Self {
        SetExpr::Sum(Box::new(left), Box::new(right))
    }

    pub fn star(child: SetExpr) -> Self {
        SetExpr::Star(Box::new(child))
    }

    pub fn depth(&self) -> usize {
        match self {
            SetExpr::Singleton(_) => 1,
            SetExpr::Sum(l, r) => 1 + l.depth().max(r.depth()),
            SetExpr::Star(c) => 1 + c.depth(),
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Singleton(b) => write!(f, "{{{b}}}"),
            SetExpr::Sum(l, r) => match **r {
                SetExpr::Sum(..) => write!(f, "{l} + ({r})"),
                _ => write!(f, "{l} + {r}"),
            },
            SetExpr::Star(c) => match **c {
                SetExpr::Sum(..) => write!(f, "({c})*"),
                _ => write!(f, "{c}*"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("integer literal at byte {offset} exceeds {max}")]
    Overflow { offset: usize, max: u64 },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Lex(e) => e.offset,
            ParseError::Syntax { offset, .. } | ParseError::Overflow { offset, .. } => *offset,
        }
    }

    pub(crate) fn syntax(offset: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("arithmetic overflow while combining offsets or generators")]
    Overflow,
    #[error("residue table of size {0} exceeds the limit of {MAX_RESIDUES}")]
    TooLarge(u64),
}

pub fn parse_set_expr(text: &str) -> Result<SetExpr, ParseError> {
    let mut cur = Cursor::new(text)?;
    let e = parse_expr(&mut cur)?;
    if !cur.at_end() {
        return Err(ParseError::syntax(cur.offset(), "expected '+' or end of input"));
    }
    Ok(e)
}

fn parse_expr(cur: &mut Cursor<'_>) -> Result<SetExpr, ParseError> {
    let mut left = parse_term(cur)?;
    while cur.eat(TokenKind::Plus) {
        let right = parse_term(cur)?;
        left = SetExpr::sum(left, right);
    }
    Ok(left)
}

fn parse_term(cur: &mut Cursor<'_>) -> Result<SetExpr, ParseError> {
    let mut atom = parse_atom(cur)?;
    while cur.eat(TokenKind::Star) {
        atom = SetExpr::star(atom);
    }
    Ok(atom)
}

fn parse_atom(cur: &mut Cursor<'_>) -> Result<SetExpr, ParseError> {
    let offset = cur.offset();
    match cur.next().map(|t| t.kind) {
        Some(TokenKind::LBrace) => {
            let lit_offset = cur.offset();
            let b = match cur.next().map(|t| t.kind) {
                Some(TokenKind::Int(digits)) => parse_literal(digits, lit_offset, i64::MAX as u64)?,
                _ => return Err(ParseError::syntax(lit_offset, "expected a number after '{'")),
            };
            if !cur.eat(TokenKind::RBrace) {
                return Err(ParseError::syntax(cur.offset(), "expected '}'"));
            }
            Ok(SetExpr::Singleton(b))
        }
        Some(TokenKind::LParen) => {
            let inner = parse_expr(cur)?;
            if !cur.eat(TokenKind::RParen) {
                return Err(ParseError::syntax(cur.offset(), "expected ')'"));
            }
            Ok(inner)
        }
        _ => Err(ParseError::syntax(offset, "expected '{' or '('")),
    }
}

pub(crate) fn parse_literal(digits: &str, offset: usize, max: u64) -> Result<u64, ParseError> {
    match digits.parse::<u64>() {
        Ok(v) if v <= max => Ok(v),
        _ => Err(ParseError::Overflow { offset, max }),
    }
}

/// `{a₁n₁ + … + a_k n_k + a}` with positive, strictly increasing coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearForm {
    coeffs: Vec<u64>,
    offset: u64,
}

impl LinearForm {
    /// Zero coefficients are dropped and duplicates merged.
    pub fn new(coeffs: impl IntoIterator<Item = u64>, offset: u64) -> Self {
        let mut coeffs: Vec<u64> = coeffs.into_iter().filter(|&c| c > 0).collect();
        coeffs.sort_unstable();
        coeffs.dedup();
        LinearForm { coeffs, offset }
    }

    pub fn singleton(b: u64) -> Self {
        LinearForm { coeffs: Vec::new(), offset: b }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    /// Set sum `S + T`.
    pub fn sum(&self, other: &LinearForm) -> Result<LinearForm, SetError> {
        let offset = self.offset.checked_add(other.offset).ok_or(SetError::Overflow)?;
        Ok(LinearForm::new(self.coeffs.iter().chain(&other.coeffs).copied(), offset))
    }

    /// Kleene star `S* = {s₁ + … + s_t : t ≥ 0, sᵢ ∈ S}`.
    ///
    /// With `S = a + ⟨C⟩` and `a > 0` the closure is `{0} ∪ (a + ⟨a, C⟩)`, a monoid whose
    /// elements in residue class `r (mod a)` start at `a + w_r`, `w_r` being the least
    /// element of `⟨a, C⟩` congruent to `r`. It is generated by `a` and those `a + w_r`.
    pub fn star(&self) -> Result<LinearForm, SetError> {
        let a = self.offset;
        if a == 0 {
            return Ok(self.clone());
        }
        let apery = apery_set(a, &self.coeffs)?;
        let mut gens = vec![a];
        for w in apery.into_iter().skip(1) {
            gens.push(a.checked_add(w).ok_or(SetError::Overflow)?);
        }
        Ok(LinearForm::new(gens, 0))
    }

    /// Membership in `⟨coeffs⟩ + offset` for every value in `[0, bound]`.
    fn reachable(&self, bound: u64) -> Vec<bool> {
        let Some(span) = bound.checked_sub(self.offset) else {
            return Vec::new();
        };
        coin_table(&self.coeffs, span as usize)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.coeffs.iter().map(u64::to_string).collect();
        write!(f, "([{}],{})", list.join(","), self.offset)
    }
}

/// `table[v]` is true iff `v` is a nonnegative combination of `coins`.
fn coin_table(coins: &[u64], span: usize) -> Vec<bool> {
    let mut table = vec![false; span + 1];
    table[0] = true;
    for &c in coins {
        let Ok(c) = usize::try_from(c) else { continue };
        for v in c..=span {
            if table[v - c] {
                table[v] = true;
            }
        }
    }
    table
}

/// Least element of `⟨modulus, gens⟩` in each residue class modulo `modulus` that the
/// monoid meets, found by shortest paths over the residues. Class 0 comes first.
fn apery_set(modulus: u64, gens: &[u64]) -> Result<Vec<u64>, SetError> {
    let g = gens.iter().fold(modulus, |acc, &c| acc.gcd(&c));
    let classes = modulus / g;
    if classes > MAX_RESIDUES {
        return Err(SetError::TooLarge(classes));
    }
    // Only multiples of g are reachable, so index residues by r / g.
    let mut best: Vec<Option<u64>> = vec![None; classes as usize];
    best[0] = Some(0);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, 0u64)));
    while let Some(Reverse((d, r))) = heap.pop() {
        if best[(r / g) as usize] != Some(d) {
            continue;
        }
        for &c in gens {
            let nd = d.checked_add(c).ok_or(SetError::Overflow)?;
            let nr = ((r as u128 + c as u128) % modulus as u128) as u64;
            let slot = &mut best[(nr / g) as usize];
            if slot.map_or(true, |old| nd < old) {
                *slot = Some(nd);
                heap.push(Reverse((nd, nr)));
            }
        }
    }
    Ok(best.into_iter().flatten().collect())
}

pub fn canonicalize(e: &SetExpr) -> Result<LinearForm, SetError> {
    match e {
        SetExpr::Singleton(b) => Ok(LinearForm::singleton(*b)),
        SetExpr::Sum(l, r) => canonicalize(l)?.sum(&canonicalize(r)?),
        SetExpr::Star(c) => canonicalize(c)?.star(),
    }
}

/// Members of `f` in `[0, bound]`, ascending.
pub fn enumerate_set(f: &LinearForm, bound: u64) -> Vec<u64> {
    f.reachable(bound)
        .into_iter()
        .enumerate()
        .filter_map(|(v, hit)| hit.then_some(v as u64 + f.offset))
        .collect()
}

/// Lexicographically smallest `(n₁,…,n_k)` with `Σ aᵢnᵢ + a = m`.
pub fn member_with_witness(f: &LinearForm, m: u64) -> Option<Vec<u64>> {
    let target = usize::try_from(m.checked_sub(f.offset)?).ok()?;
    let k = f.coeffs.len();
    // suffix[i][v]: v is representable by coefficients i.. (suffix[k] only hits 0)
    let mut suffix = vec![coin_table(&[], target)];
    for i in (0..k).rev() {
        suffix.push(coin_table(&f.coeffs[i..], target));
    }
    suffix.reverse();
    if !suffix[0][target] {
        return None;
    }
    let mut rest = target;
    let mut witness = Vec::with_capacity(k);
    for (i, &c) in f.coeffs.iter().enumerate() {
        let c = c as usize;
        let n = (0..=rest / c).find(|&n| suffix[i + 1][rest - n * c])?;
        rest -= n * c;
        witness.push(n as u64);
    }
    Some(witness)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gap {
    /// Largest integer `≥ offset` outside the set.
    Largest(u64),
    /// The set contains every integer `≥ offset`.
    CofiniteNone,
    /// Constant set, or generators with a common factor (infinitely many gaps).
    NotApplicable,
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gap::Largest(g) => write!(f, "{g}"),
            Gap::CofiniteNone => f.write_str("cofinite-none"),
            Gap::NotApplicable => f.write_str("not-applicable"),
        }
    }
}

pub fn frobenius_gap(f: &LinearForm) -> Result<Gap, SetError> {
    let Some(&smallest) = f.coeffs.first() else {
        return Ok(Gap::NotApplicable);
    };
    if f.coeffs.iter().fold(0u64, |acc, &c| acc.gcd(&c)) != 1 {
        return Ok(Gap::NotApplicable);
    }
    if smallest == 1 {
        return Ok(Gap::CofiniteNone);
    }
    let apery = apery_set(smallest, &f.coeffs[1..])?;
    let top = apery.into_iter().max().unwrap_or(0);
    let frobenius = top - smallest;
    f.offset.checked_add(frobenius).map(Gap::Largest).ok_or(SetError::Overflow)
}
