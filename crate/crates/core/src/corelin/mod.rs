//! Dense complex linear algebra over ordered tensor products.
//!
//! Subsystems are ordered row-major: the leftmost subsystem is the slowest
//! varying index of the flat amplitude array. Every module in the crate uses
//! this single convention.

mod eig;

pub use eig::{binary_entropy, evolve, hermitian_eig, shannon_entropy, HermitianSpectrum};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical tolerance tiers used for structural checks and equality
/// assertions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub structural: f64,
    pub equality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-10,
            equality: 1e-12,
        }
    }
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Composition of two values over the concatenated subsystem list.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

/// Kronecker product with the left factor as the slow index.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &Vector, b: &Vector) -> Vector {
    a.kronecker(b)
}

impl Tensor for Matrix {
    fn tensor(&self, other: &Self) -> Self {
        kron(self, other)
    }
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entry modulus of a vector.
pub fn vec_max_abs(v: &Vector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_residual(m: &Matrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

/// `‖U†U − I‖_max`.
pub fn unitarity_residual(u: &Matrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &Matrix::identity(n, n))
}

pub fn trace(m: &Matrix) -> C64 {
    m.diagonal().iter().sum()
}

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Row-major strides for the given subsystem dimensions.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Split a flat index into per-subsystem digits.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

pub fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims)
        .fold(0, |acc, (&d, &n)| acc * n + d)
}

fn validate_subsystems(set: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != set.len() {
        return Err(Error::InvalidSubsystems(format!("duplicate entries in {set:?}")));
    }
    if let Some(&bad) = s.iter().find(|&&k| k >= n) {
        return Err(Error::InvalidSubsystems(format!(
            "subsystem {bad} out of range for {n} subsystems"
        )));
    }
    Ok(s)
}

/// Embed an operator acting on `targets` (in the given order) into the full
/// space described by `dims`.
pub fn embed(op: &Matrix, targets: &[usize], dims: &[usize]) -> Result<Matrix> {
    validate_subsystems(targets, dims.len())?;
    let local_dims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let dl = product(&local_dims);
    if op.nrows() != dl || op.ncols() != dl {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, targets span {dl}",
            op.nrows(),
            op.ncols()
        )));
    }
    let d = product(dims);
    let st = strides(dims);
    let mut out = Matrix::zeros(d, d);
    for col in 0..d {
        let dg = digits(col, dims);
        let local_col = flat_index(&targets.iter().map(|&t| dg[t]).collect::<Vec<_>>(), &local_dims);
        let base = col - targets.iter().map(|&t| dg[t] * st[t]).sum::<usize>();
        for local_row in 0..dl {
            let v = op[(local_row, local_col)];
            if v == ZERO {
                continue;
            }
            let ld = digits(local_row, &local_dims);
            let row = base + targets.iter().zip(&ld).map(|(&t, &x)| x * st[t]).sum::<usize>();
            out[(row, col)] = v;
        }
    }
    Ok(out)
}

/// Pure state over an ordered tensor product of finite subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vector,
    dims: Vec<usize>,
}

impl StateVector {
    /// Build from amplitudes; the squared norm must be 1 within `1e-12`.
    pub fn new(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let s = Self::from_vector(Vector::from_vec(amps), dims)?;
        let n2 = s.norm_sqr();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(n2));
        }
        Ok(s)
    }

    /// Build from amplitudes and rescale to unit norm.
    pub fn normalized(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let mut s = Self::from_vector(Vector::from_vec(amps), dims)?;
        let n = s.amps.norm();
        if n < 1e-300 {
            return Err(Error::NotNormalized(0.0));
        }
        s.amps /= real(n);
        Ok(s)
    }

    fn from_vector(amps: Vector, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!("invalid dims {dims:?}")));
        }
        if product(&dims) != amps.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                amps.len()
            )));
        }
        Ok(Self { amps, dims })
    }

    /// `n`-qubit register from amplitudes, normalized to unit norm.
    pub fn qubits(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::DimensionMismatch(format!("{len} is not a qubit register size")));
        }
        Self::normalized(amps, vec![2; len.trailing_zeros() as usize])
    }

    pub fn basis(index: usize, dims: Vec<usize>) -> Result<Self> {
        let d = product(&dims);
        if index >= d {
            return Err(Error::OutOfRange(format!("basis index {index} >= {d}")));
        }
        let mut amps = vec![ZERO; d];
        amps[index] = ONE;
        Self::new(amps, dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Apply a unitary; the result keeps unit norm within `1e-12`.
    pub fn apply(&self, u: &Matrix) -> Result<StateVector> {
        if u.ncols() != self.len() || u.nrows() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "operator {}x{} on state of length {}",
                u.nrows(),
                u.ncols(),
                self.len()
            )));
        }
        let out = StateVector {
            amps: u * &self.amps,
            dims: self.dims.clone(),
        };
        let n2 = out.norm_sqr();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitary((n2 - 1.0).abs()));
        }
        Ok(out)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix {
        let m = &self.amps * self.amps.adjoint();
        DensityMatrix {
            mat: m,
            dims: self.dims.clone(),
        }
    }

    pub fn global_phase_aligned(&self, reference: &StateVector) -> Result<StateVector> {
        let ov = reference.inner(self)?;
        let phase = if ov.norm() > 1e-300 { ov.conj() / ov.norm() } else { ONE };
        Ok(StateVector {
            amps: &self.amps * phase,
            dims: self.dims.clone(),
        })
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        let amps = Vector::from_iterator(
            self.len() * other.len(),
            self.amps
                .iter()
                .flat_map(|a| other.amps.iter().map(move |b| a * b)),
        );
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        StateVector { amps, dims }
    }
}

/// Hermitian, positive-semidefinite, unit-trace matrix over an ordered
/// tensor product.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: Matrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian and unit trace within `1e-12`,
    /// smallest eigenvalue `≥ −1e-10`.
    pub fn new(mat: Matrix, dims: Vec<usize>) -> Result<Self> {
        let rho = Self::from_parts(mat, dims)?;
        let herm = hermiticity_residual(&rho.mat);
        if herm > 1e-12 {
            return Err(Error::NotHermitian(herm));
        }
        let tr = trace(&rho.mat);
        if (tr - ONE).norm() > 1e-12 {
            return Err(Error::NotNormalized(tr.re));
        }
        let min = hermitian_eig(&rho.mat)?.min();
        if min < -1e-10 {
            return Err(Error::OutOfRange(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Shape checks only; used for intermediates whose physical validity is
    /// monitored separately.
    pub(crate) fn from_parts(mat: Matrix, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!("invalid dims {dims:?}")));
        }
        let d = product(&dims);
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims {dims:?}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat, dims })
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d = product(&dims);
        Self {
            mat: Matrix::identity(d, d) / real(d as f64),
            dims,
        }
    }

    /// Probabilistic mixture `Σ p_k |ψ_k⟩⟨ψ_k|`.
    pub fn mixture(parts: &[(f64, &StateVector)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::OutOfRange("empty mixture".into()))?;
        let dims = first.1.dims.clone();
        let d = product(&dims);
        let mut mat = Matrix::zeros(d, d);
        for (p, psi) in parts {
            if psi.dims != dims {
                return Err(Error::DimensionMismatch("mixture components differ in dims".into()));
            }
            mat += psi.density().mat * real(*p);
        }
        Self::new(mat, dims)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        trace(&self.mat)
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.mat * &self.mat)).re
    }

    pub fn expectation(&self, op: &Matrix) -> C64 {
        trace(&(op * &self.mat))
    }

    pub fn spectrum(&self) -> Result<HermitianSpectrum> {
        hermitian_eig(&self.mat)
    }

    /// Reduced state on `keep` (returned in ascending subsystem order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    pub fn partial_transpose(&self, subsystems: &[usize]) -> Result<Matrix> {
        partial_transpose(&self.mat, &self.dims, subsystems)
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            mat: kron(&self.mat, &other.mat),
            dims,
        }
    }
}

/// Trace out every subsystem not listed in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("keep set is empty".into()));
    }
    let keep = validate_subsystems(keep, rho.dims.len())?;
    let dims = &rho.dims;
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk = product(&kdims);
    let dt = product(&tdims);

    // full index for every (kept, traced) pair
    let st = strides(dims);
    let full = |ki: usize, ti: usize| -> usize {
        let kd = digits(ki, &kdims);
        let td = digits(ti, &tdims);
        keep.iter().zip(&kd).map(|(&k, &x)| x * st[k]).sum::<usize>()
            + traced.iter().zip(&td).map(|(&k, &x)| x * st[k]).sum::<usize>()
    };
    let table: Vec<Vec<usize>> = (0..dk).map(|ki| (0..dt).map(|ti| full(ki, ti)).collect()).collect();

    let mut out = Matrix::zeros(dk, dk);
    for ti in 0..dt {
        for r in 0..dk {
            let fr = table[r][ti];
            for c in 0..dk {
                out[(r, c)] += rho.mat[(fr, table[c][ti])];
            }
        }
    }
    DensityMatrix::from_parts(out, kdims)
}

/// Partial transpose of `mat` over the listed subsystems. The result is
/// Hermitian whenever `mat` is.
pub fn partial_transpose(mat: &Matrix, dims: &[usize], subsystems: &[usize]) -> Result<Matrix> {
    let subs = validate_subsystems(subsystems, dims.len())?;
    let d = product(dims);
    if mat.nrows() != d || mat.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for dims {dims:?}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let mut out = Matrix::zeros(d, d);
    for r in 0..d {
        let mut rd = digits(r, dims);
        for c in 0..d {
            let mut cd = digits(c, dims);
            for &s in &subs {
                std::mem::swap(&mut rd[s], &mut cd[s]);
            }
            out[(flat_index(&rd, dims), flat_index(&cd, dims))] = mat[(r, c)];
            for &s in &subs {
                std::mem::swap(&mut rd[s], &mut cd[s]);
            }
        }
    }
    Ok(out)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let spec = rho.spectrum()?;
    Ok(shannon_entropy(spec.values.iter().map(|&l| l.max(0.0))))
}

/// Trace distance `½‖a − b‖₁`.
pub fn trace_distance(a: &Matrix, b: &Matrix) -> Result<f64> {
    let diff = a - b;
    let spec = hermitian_eig(&diff)?;
    Ok(0.5 * spec.values.iter().map(|l| l.abs()).sum::<f64>())
}

/// Pauli matrices `[I, X, Y, Z]`.
pub fn paulis() -> [Matrix; 4] {
    [
        Matrix::identity(2, 2),
        Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Matrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket(amps: &[f64]) -> StateVector {
        StateVector::qubits(amps.iter().map(|&x| real(x)).collect()).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let z = StateVector::basis(0, vec![2]).unwrap();
        let zz = z.tensor(&z);
        assert_eq!(zz.dims(), &[2, 2]);
        assert_eq!(zz.amp(0), ONE);
        assert_eq!(zz.norm_sqr(), 1.0);
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = Matrix::identity(2, 2);
        assert_eq!(i2.tensor(&i2), Matrix::identity(4, 4));
    }

    #[test]
    fn leftmost_subsystem_is_slowest() {
        let one = StateVector::basis(1, vec![2]).unwrap();
        let zero = StateVector::basis(0, vec![3]).unwrap();
        // |1⟩⊗|0⟩ over dims [2,3] sits at index 3
        assert_eq!(one.tensor(&zero).amp(3), ONE);
        assert_eq!(digits(5, &[2, 3]), vec![1, 2]);
        assert_eq!(flat_index(&[1, 2], &[2, 3]), 5);
    }

    #[test]
    fn unnormalized_rejected() {
        assert!(matches!(
            StateVector::new(vec![ONE, ONE], vec![2]),
            Err(Error::NotNormalized(_))
        ));
        assert!(StateVector::new(vec![ONE], vec![2]).is_err());
    }

    #[test]
    fn ghz_reduction_is_classical() {
        let ghz = ket(&[FRAC_1_SQRT_2, 0., 0., 0., 0., 0., 0., FRAC_1_SQRT_2]);
        let r = ghz.density().partial_trace(&[0, 1]).unwrap();
        let mut expect = Matrix::zeros(4, 4);
        expect[(0, 0)] = real(0.5);
        expect[(3, 3)] = real(0.5);
        assert!(max_abs_diff(r.matrix(), &expect) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = ket(&[0.6, 0.8]).density();
        let b = DensityMatrix::maximally_mixed(vec![3]);
        let ab = a.tensor(&b);
        let back = ab.partial_trace(&[0]).unwrap();
        assert!(max_abs_diff(back.matrix(), a.matrix()) < 1e-15);
        let back_b = ab.partial_trace(&[1]).unwrap();
        assert!(max_abs_diff(back_b.matrix(), b.matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2]);
        assert!(rho.partial_trace(&[]).is_err());
        assert!(rho.partial_trace(&[2]).is_err());
        assert!(rho.partial_trace(&[0, 0]).is_err());
    }

    #[test]
    fn psi_plus_partial_transpose_spectrum() {
        let psi = ket(&[0., FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.]);
        let pt = psi.density().partial_transpose(&[0]).unwrap();
        let s = hermitian_eig(&pt).unwrap();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (x, e) in s.values.iter().zip(expect) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_transpose_keeps_spectrum() {
        let a = ket(&[0.6, 0.8]);
        let b = StateVector::qubits(vec![real(0.5), C64::new(0.0, 0.75f64.sqrt())]).unwrap();
        let rho = a.tensor(&b).density();
        let before = rho.spectrum().unwrap().values;
        let after = hermitian_eig(&rho.partial_transpose(&[1]).unwrap()).unwrap().values;
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_cases() {
        let zero = ket(&[1., 0.]);
        let plus = ket(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
        assert!((fidelity(&plus, &plus).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero, &ket(&[1., 0., 0., 0.])).is_err());
    }

    #[test]
    fn entropy_cases() {
        assert!(von_neumann_entropy(&ket(&[0.6, 0.8]).density()).unwrap().abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(vec![2]);
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embed_matches_kron() {
        let [_, x, _, z] = paulis();
        let full = embed(&x, &[1], &[2, 2, 2]).unwrap();
        let expect = Matrix::identity(2, 2).tensor(&x).tensor(&Matrix::identity(2, 2));
        assert!(max_abs_diff(&full, &expect) < 1e-15);
        // reversed target order on a two-site operator
        let xz = x.tensor(&z);
        let a = embed(&xz, &[2, 0], &[2, 2, 2]).unwrap();
        let expect = z.tensor(&Matrix::identity(2, 2)).tensor(&x);
        assert!(max_abs_diff(&a, &expect) < 1e-15);
    }

    #[test]
    fn density_validation() {
        let mut m = Matrix::identity(2, 2);
        assert!(DensityMatrix::new(m.clone(), vec![2]).is_err());
        m[(0, 0)] = real(1.5);
        m[(1, 1)] = real(-0.5);
        assert!(DensityMatrix::new(m, vec![2]).is_err());
    }
}
