//! Oracles shared by the integration suites. None of these call into the code
//! paths they are used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_complex::Complex64;
use qprove::unary::SetExpr;
use rand::Rng;

/// Direct evaluation of a set expression, restricted to `[0, limit]`: singletons,
/// pairwise sums, and star as the fixpoint of adding members.
pub fn brute_set(e: &SetExpr, limit: u64) -> BTreeSet<u64> {
    match e {
        SetExpr::Singleton(b) => [*b].into_iter().filter(|&b| b <= limit).collect(),
        SetExpr::Sum(l, r) => {
            let (l, r) = (brute_set(l, limit), brute_set(r, limit));
            let mut out = BTreeSet::new();
            for x in &l {
                for y in &r {
                    if x + y <= limit {
                        out.insert(x + y);
                    }
                }
            }
            out
        }
        SetExpr::Star(c) => {
            let parts = brute_set(c, limit);
            let mut closed: BTreeSet<u64> = [0].into();
            let mut frontier: Vec<u64> = vec![0];
            while let Some(x) = frontier.pop() {
                for y in &parts {
                    let v = x + y;
                    if v <= limit && closed.insert(v) {
                        frontier.push(v);
                    }
                }
            }
            closed
        }
    }
}

/// Random expression of depth at most `depth` with literals in `0..=max_literal`.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize, max_literal: u64) -> SetExpr {
    if depth <= 1 || rng.gen_bool(0.3) {
        return SetExpr::Singleton(rng.gen_range(0..=max_literal));
    }
    if rng.gen_bool(0.5) {
        SetExpr::sum(random_expr(rng, depth - 1, max_literal), random_expr(rng, depth - 1, max_literal))
    } else {
        SetExpr::star(random_expr(rng, depth - 1, max_literal))
    }
}

/// Eigenvalues of a 2×2 Hermitian matrix (row-major), ascending.
pub fn eigen_2x2(a: &[Complex64]) -> Vec<f64> {
    let (p, q) = (a[0].re, a[3].re);
    let mean = 0.5 * (p + q);
    let radius = (0.25 * (p - q) * (p - q) + a[1].norm_sqr()).sqrt();
    vec![mean - radius, mean + radius]
}

/// Eigenvalues of a 3×3 Hermitian matrix (row-major), ascending, by the
/// trigonometric solution of the characteristic cubic.
pub fn eigen_3x3(a: &[Complex64]) -> Vec<f64> {
    let at = |r: usize, c: usize| a[r * 3 + c];
    let off = at(0, 1).norm_sqr() + at(0, 2).norm_sqr() + at(1, 2).norm_sqr();
    let q = (at(0, 0).re + at(1, 1).re + at(2, 2).re) / 3.0;
    let d: [f64; 3] = [at(0, 0).re - q, at(1, 1).re - q, at(2, 2).re - q];
    let p2 = d.iter().map(|x| x * x).sum::<f64>() + 2.0 * off;
    if p2 == 0.0 {
        return vec![q; 3];
    }
    let p = (p2 / 6.0).sqrt();
    // B = (A − qI) / p, r = det(B) / 2
    let b = |r: usize, c: usize| {
        let v = if r == c { Complex64::new(d[r], 0.0) } else { at(r, c) };
        v / p
    };
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det.re / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut v = vec![e1, e2, e3];
    v.sort_by(f64::total_cmp);
    v
}
