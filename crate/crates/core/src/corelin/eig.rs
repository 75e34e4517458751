//! Dense Hermitian eigensolver (cyclic complex Jacobi) and the functions
//! built on it: unitary evolution and spectral entropies.

use nalgebra::DVector;
use num_complex::Complex64;

use super::{hermiticity_residual, Matrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `M = V diag(values) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, ordered like `values`.
    pub vectors: Matrix,
}

impl HermitianSpectrum {
    /// Rebuild `V f(Λ) V†` for a scalar function applied to the spectrum.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Matrix {
        let d = DVector::from_iterator(self.values.len(), self.values.iter().map(|&l| f(l)));
        let scaled = Matrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| {
            self.vectors[(i, j)] * d[j]
        });
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map(|l| C64::new(l, 0.0))
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigen-decomposition by cyclic Jacobi rotations.
///
/// Input must be Hermitian to within `1e-10` (max-abs).
pub fn hermitian_eig(m: &Matrix) -> Result<HermitianSpectrum> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let dev = hermiticity_residual(m);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.nrows();
    // work on the exactly Hermitian part
    let mut a = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut v = Matrix::identity(n, n);

    let scale = a.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianSpectrum { values, vectors })
}

/// One Jacobi step zeroing `a[p][q]`; accumulates the rotation into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let z = a[(p, q)];
    let r = z.norm();
    if r < 1e-300 {
        return;
    }
    let phase = z / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = 0.5 * (2.0 * r).atan2(aqq - app);
    let (s, c) = theta.sin_cos();
    // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
    let g00 = C64::new(c, 0.0);
    let g01 = C64::new(s, 0.0);
    let g10 = -phase.conj() * s;
    let g11 = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g00 + akq * g10;
        a[(k, q)] = akp * g01 + akq * g11;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
        a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g00 + vkq * g10;
        v[(k, q)] = vkp * g01 + vkq * g11;
    }
}

/// `exp(-i H t)` via the eigen-decomposition of `H`.
pub fn evolve(h: &Matrix, t: f64) -> Result<Matrix> {
    let spec = hermitian_eig(h)?;
    Ok(spec.map(|l| Complex64::from_polar(1.0, -l * t)))
}

/// Shannon entropy (bits) of a probability list; `0·log 0 = 0`.
pub fn shannon_entropy(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.log2())
        .sum()
}

/// Binary entropy function `H(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy([p, 1.0 - p])
}
