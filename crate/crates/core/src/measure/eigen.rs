//! Cyclic Jacobi eigenvalues for dense Hermitian matrices.

use num_complex::Complex64;
use num_traits::Zero;

use super::MeasureError;
use crate::fock::{HermitianMatrix, NORM_TOLERANCE};

pub const MAX_SWEEPS: usize = 100;

/// Stop once the off-diagonal Frobenius norm is below this times `max(1, ‖A‖_F)`.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-10;

/// All eigenvalues of `m`, with multiplicity, ascending.
pub fn eigen_spectrum(m: &HermitianMatrix) -> Result<Vec<f64>, MeasureError> {
    let deviation = m.hermitian_deviation(|_| true);
    if deviation > NORM_TOLERANCE {
        return Err(MeasureError::NotHermitian { deviation });
    }
    jacobi_eigenvalues(m.dimension(), m.entries().to_vec())
}

/// Eigenvalues of the `n × n` Hermitian matrix stored row-major in `a`.
pub fn jacobi_eigenvalues(n: usize, mut a: Vec<Complex64>) -> Result<Vec<f64>, MeasureError> {
    assert_eq!(a.len(), n * n, "matrix is not {n}×{n}");
    let scale = a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt().max(1.0);
    let tol = OFF_DIAGONAL_TOLERANCE * scale;
    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[p * n + q].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(MeasureError::NoConvergence { sweeps, off_norm: off_norm(&a) });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(n, &mut a, p, q);
            }
        }
        sweeps += 1;
    }

    let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Annihilates `a[p][q]` with the unitary `G = diag(1, e^{-iφ}) · R(θ)` acting on the
/// `(p, q)` plane, where `a[p][q] = r e^{iφ}` and `R(θ)` is the real Jacobi rotation of
/// the resulting real symmetric 2×2 block.
fn rotate(n: usize, a: &mut [Complex64], p: usize, q: usize) {
    let b = a[p * n + q];
    let r = b.norm();
    if r == 0.0 {
        return;
    }
    let phase = (b / r).conj();
    let diff = a[q * n + q].re - a[p * n + p].re;
    let theta = if diff == 0.0 {
        std::f64::consts::FRAC_PI_4
    } else {
        0.5 * (2.0 * r / diff).atan()
    };
    let (s, c) = theta.sin_cos();
    let g00 = Complex64::new(c, 0.0);
    let g01 = Complex64::new(s, 0.0);
    let g10 = phase * -s;
    let g11 = phase * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * g00 + akq * g10;
        a[k * n + q] = akp * g01 + akq * g11;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = g00.conj() * apk + g10.conj() * aqk;
        a[q * n + k] = g01.conj() * apk + g11.conj() * aqk;
    }
    a[p * n + q] = Complex64::zero();
    a[q * n + p] = Complex64::zero();
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
}
