//! Named multiparticle states and collective operators on qubit registers.
//!
//! Qubit `0` is the lower level and `1` the upper (excited) level. Position
//! `k` (0-based, leftmost first) is the most significant bit of the basis
//! index.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::corelin::{real, Matrix, StateVector, Tensor, C64, I, ONE, ZERO};
use crate::error::{Error, Result};

/// Default tolerance on `|Σ q_k|` for the zero-sum test.
pub const ZSA_TOL: f64 = 1e-10;

fn bit_index(n: usize, k: usize) -> usize {
    1 << (n - 1 - k)
}

fn check_register(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::OutOfRange(format!("need at least {min} qubits, got {n}")));
    }
    if n > 16 {
        return Err(Error::OutOfRange(format!("{n} qubits exceeds the dense register limit")));
    }
    Ok(())
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Amplitudes `q_k` of a single-excitation state; unit norm within `1e-12`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeProfile {
    q: Vec<C64>,
}

impl AmplitudeProfile {
    pub fn new(q: Vec<C64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::OutOfRange("empty amplitude profile".into()));
        }
        let n2: f64 = q.iter().map(|z| z.norm_sqr()).sum();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { q })
    }

    pub fn real(q: &[f64]) -> Result<Self> {
        Self::new(q.iter().map(|&x| real(x)).collect())
    }

    /// Rescale arbitrary amplitudes to unit norm.
    pub fn normalized(q: Vec<C64>) -> Result<Self> {
        let n = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-300 {
            return Err(Error::NotNormalized(0.0));
        }
        Self::new(q.into_iter().map(|z| z / n).collect())
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn sum(&self) -> C64 {
        self.q.iter().sum()
    }

    pub fn is_zsa(&self, tol: f64) -> bool {
        self.sum().norm() <= tol
    }
}

/// `Σ_k q_k |0…1_k…0⟩`.
pub fn eta_state(q: &AmplitudeProfile) -> Result<StateVector> {
    let n = q.len();
    check_register(n, 1)?;
    let mut amps = vec![ZERO; 1 << n];
    for (k, &qk) in q.amplitudes().iter().enumerate() {
        amps[bit_index(n, k)] = qk;
    }
    StateVector::new(amps, vec![2; n])
}

pub fn is_zsa(q: &AmplitudeProfile, tol: f64) -> bool {
    q.is_zsa(tol)
}

/// Multiparticle W state: one excitation shared equally by `n` qubits.
pub fn w_state(n: usize) -> Result<StateVector> {
    check_register(n, 2)?;
    let a = 1.0 / (n as f64).sqrt();
    eta_state(&AmplitudeProfile::new(vec![real(a); n])?)
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_state(n: usize) -> Result<StateVector> {
    check_register(n, 2)?;
    let mut amps = vec![ZERO; 1 << n];
    amps[0] = real(FRAC_1_SQRT_2);
    amps[(1 << n) - 1] = real(FRAC_1_SQRT_2);
    StateVector::new(amps, vec![2; n])
}

/// Symmetric Dicke state `|m;n⟩`: equal weight on every basis state with
/// `m` excitations.
pub fn dicke_symmetric(m: usize, n: usize) -> Result<StateVector> {
    check_register(n, 1)?;
    if m > n {
        return Err(Error::OutOfRange(format!("m = {m} exceeds n = {n}")));
    }
    let a = real(1.0 / (binomial(n, m) as f64).sqrt());
    let amps = (0..1usize << n)
        .map(|i| if i.count_ones() as usize == m { a } else { ZERO })
        .collect();
    StateVector::new(amps, vec![2; n])
}

/// Singlet `(|01⟩ − |10⟩)/√2`.
pub fn psi_minus() -> StateVector {
    StateVector::qubits(vec![ZERO, ONE, -ONE, ZERO]).expect("fixed state")
}

/// `(|01⟩ + |10⟩)/√2`.
pub fn psi_plus() -> StateVector {
    StateVector::qubits(vec![ZERO, ONE, ONE, ZERO]).expect("fixed state")
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> StateVector {
    StateVector::qubits(vec![ONE, ZERO, ZERO, ONE]).expect("fixed state")
}

/// `(|00⟩ − |11⟩)/√2`.
pub fn phi_minus() -> StateVector {
    StateVector::qubits(vec![ONE, ZERO, ZERO, -ONE]).expect("fixed state")
}

/// The two four-qubit decoherence-free states: the singlet product `Φ₀`
/// and the orthogonal `Ψ₁ = (|0011⟩ + |1100⟩ − Ψ⁺⊗Ψ⁺)/√3`.
pub fn df_states() -> (StateVector, StateVector) {
    let phi0 = psi_minus().tensor(&psi_minus());
    let pp = psi_plus().tensor(&psi_plus());
    let mut amps: Vec<C64> = pp.amplitudes().iter().map(|z| -z).collect();
    amps[0b0011] += ONE;
    amps[0b1100] += ONE;
    let s = 1.0 / 3f64.sqrt();
    let psi1 = StateVector::new(amps.into_iter().map(|z| z * s).collect(), vec![2; 4])
        .expect("Ψ₁ is normalized");
    (phi0, psi1)
}

/// GHZ with every `|x⟩` replaced by `((−1)^x|0⟩ + i|1⟩)/√2`.
pub fn ghz_prime() -> StateVector {
    let map = |x: usize| -> [C64; 2] {
        let s = if x == 0 { 1.0 } else { -1.0 };
        [real(s * FRAC_1_SQRT_2), I * FRAC_1_SQRT_2]
    };
    let branch = |x: usize| -> Vec<C64> {
        let v = map(x);
        (0..8)
            .map(|i| v[(i >> 2) & 1] * v[(i >> 1) & 1] * v[i & 1])
            .collect()
    };
    let b0 = branch(0);
    let b1 = branch(1);
    let amps = b0
        .iter()
        .zip(&b1)
        .map(|(a, b)| (a + b) * FRAC_1_SQRT_2)
        .collect();
    StateVector::new(amps, vec![2; 3]).expect("local unitary image of GHZ")
}

/// Collective operator `S_xy = Σ_a |x⟩_a⟨y|` on `n` qubits.
#[derive(Clone, Debug)]
pub struct CollectiveOperator {
    pub x: u8,
    pub y: u8,
    pub n: usize,
    pub matrix: Matrix,
}

pub fn collective_s(x: u8, y: u8, n: usize) -> Result<CollectiveOperator> {
    if x > 1 || y > 1 {
        return Err(Error::OutOfRange(format!("S_{x}{y}: labels must be bits")));
    }
    check_register(n, 1)?;
    let d = 1usize << n;
    let mut m = Matrix::zeros(d, d);
    for col in 0..d {
        for k in 0..n {
            let b = bit_index(n, k);
            let bit = u8::from(col & b != 0);
            if bit == y {
                let row = if x == 1 { col | b } else { col & !b };
                m[(row, col)] += ONE;
            }
        }
    }
    Ok(CollectiveOperator { x, y, n, matrix: m })
}

/// Collective angular-momentum operators built from `S_xy`.
#[derive(Clone, Debug)]
pub struct AngularOps {
    pub j1: Matrix,
    pub j2: Matrix,
    pub j3: Matrix,
    pub jsq: Matrix,
}

pub fn angular_ops(n: usize) -> Result<AngularOps> {
    let s10 = collective_s(1, 0, n)?.matrix;
    let s01 = collective_s(0, 1, n)?.matrix;
    let s00 = collective_s(0, 0, n)?.matrix;
    let s11 = collective_s(1, 1, n)?.matrix;
    let half = real(0.5);
    let j1 = (&s10 + &s01) * half;
    let j2 = (&s10 - &s01) * (I * 0.5);
    let j3 = (&s00 - &s11) * half;
    let jsq = &j1 * &j1 + &j2 * &j2 + &j3 * &j3;
    Ok(AngularOps { j1, j2, j3, jsq })
}

/// Rayleigh quotient and variance `‖(A − ⟨A⟩)ψ‖²` of a Hermitian operator.
pub fn mean_and_variance(op: &Matrix, psi: &StateVector) -> (f64, f64) {
    let v = psi.amplitudes();
    let av = op * v;
    let mean = v.dotc(&av).re;
    let resid = av - v * real(mean);
    (mean, resid.norm_squared())
}

fn snap_half(x: f64) -> f64 {
    let h = (2.0 * x).round() / 2.0;
    if (x - h).abs() <= 1e-6 {
        h
    } else {
        x
    }
}

/// Dicke quantum numbers `(j, l)` when `ψ` is a joint eigenvector of `J²`
/// and `J₃` (both variances `≤ tol`); `None` otherwise.
pub fn dicke_numbers(psi: &StateVector, tol: f64) -> Result<Option<(f64, f64)>> {
    if psi.dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch("dicke_numbers needs a qubit register".into()));
    }
    let ops = angular_ops(psi.num_subsystems())?;
    let (jsq, vsq) = mean_and_variance(&ops.jsq, psi);
    let (l, v3) = mean_and_variance(&ops.j3, psi);
    if vsq > tol || v3 > tol {
        return Ok(None);
    }
    let j = (-1.0 + (1.0 + 4.0 * jsq).max(0.0).sqrt()) / 2.0;
    Ok(Some((snap_half(j), snap_half(l))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corelin::{fidelity, max_abs_diff, vec_max_abs};

    #[test]
    fn w3_amplitudes() {
        let w = w_state(3).unwrap();
        let a = 1.0 / 3f64.sqrt();
        for i in 0..8 {
            let e = if [4, 2, 1].contains(&i) { a } else { 0.0 };
            assert!((w.amp(i) - real(e)).norm() < 1e-15);
        }
        assert!(w_state(1).is_err());
    }

    #[test]
    fn w2_is_psi_plus_and_ghz2_is_phi_plus() {
        assert!((fidelity(&w_state(2).unwrap(), &psi_plus()).unwrap() - 1.0).abs() < 1e-15);
        assert!((fidelity(&ghz_state(2).unwrap(), &phi_plus()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn w4_has_quarter_amplitudes() {
        let w = w_state(4).unwrap();
        let nz: Vec<_> = w.amplitudes().iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nz.len(), 4);
        assert!(nz.iter().all(|z| (**z - real(0.5)).norm() < 1e-15));
    }

    #[test]
    fn ghz3_and_w3_orthogonal() {
        let g = ghz_state(3).unwrap();
        assert!((g.amp(0) - real(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((g.amp(7) - real(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(fidelity(&g, &w_state(3).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn eta_profiles() {
        let s = 1.0 / 3f64.sqrt();
        let q = AmplitudeProfile::real(&[s, s, s]).unwrap();
        assert!(!q.is_zsa(ZSA_TOL));
        assert!((fidelity(&eta_state(&q).unwrap(), &w_state(3).unwrap()).unwrap() - 1.0).abs() < 1e-15);

        let z = AmplitudeProfile::real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]).unwrap();
        assert!(is_zsa(&z, ZSA_TOL));

        // (1, 1, 1, -3)/√12 sums to zero
        let r = 1.0 / 12f64.sqrt();
        let z4 = AmplitudeProfile::real(&[r, r, r, -3.0 * r]).unwrap();
        assert!(z4.is_zsa(ZSA_TOL));
        assert!(AmplitudeProfile::real(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn dicke_cases() {
        assert!((fidelity(&dicke_symmetric(1, 3).unwrap(), &w_state(3).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(dicke_symmetric(0, 5).unwrap().amp(0), ONE);
        let d = dicke_symmetric(2, 4).unwrap();
        let nz: Vec<_> = d.amplitudes().iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nz.len(), 6);
        assert!(nz.iter().all(|z| (**z - real(1.0 / 6f64.sqrt())).norm() < 1e-15));
        assert!(dicke_symmetric(5, 4).is_err());
    }

    #[test]
    fn raising_powers_build_dicke_states() {
        for n in 1..=6 {
            let s10 = collective_s(1, 0, n).unwrap().matrix;
            let mut v = dicke_symmetric(0, n).unwrap().amplitudes().clone();
            let mut fact = 1.0;
            for m in 1..=n {
                v = &s10 * v;
                fact *= m as f64;
                let expect = dicke_symmetric(m, n).unwrap().amplitudes()
                    * real(fact * (binomial(n, m) as f64).sqrt());
                assert!(vec_max_abs(&(v.clone() - expect)) < 1e-10, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn lowering_annihilates_singlet() {
        let s01 = collective_s(0, 1, 2).unwrap().matrix;
        assert_eq!(vec_max_abs(&(s01 * psi_minus().amplitudes())), 0.0);
    }

    #[test]
    fn completeness_and_adjoint() {
        for n in 1..=4 {
            let s00 = collective_s(0, 0, n).unwrap().matrix;
            let s11 = collective_s(1, 1, n).unwrap().matrix;
            let d = 1 << n;
            assert!(max_abs_diff(&(s00 + s11), &(Matrix::identity(d, d) * real(n as f64))) < 1e-15);
            let s10 = collective_s(1, 0, n).unwrap().matrix;
            let s01 = collective_s(0, 1, n).unwrap().matrix;
            assert!(max_abs_diff(&s10.adjoint(), &s01) < 1e-14);
        }
        assert!(collective_s(2, 0, 3).is_err());
    }

    #[test]
    fn commutators() {
        for n in 1..=6 {
            let o = angular_ops(n).unwrap();
            let c12 = &o.j1 * &o.j2 - &o.j2 * &o.j1;
            let c23 = &o.j2 * &o.j3 - &o.j3 * &o.j2;
            let c31 = &o.j3 * &o.j1 - &o.j1 * &o.j3;
            assert!(max_abs_diff(&c12, &(&o.j3 * I)) < 1e-12);
            assert!(max_abs_diff(&c23, &(&o.j1 * I)) < 1e-12);
            assert!(max_abs_diff(&c31, &(&o.j2 * I)) < 1e-12);
        }
    }

    #[test]
    fn df_state_properties() {
        let (phi0, psi1) = df_states();
        assert!(phi0.inner(&psi1).unwrap().norm() < 1e-15);
        let s01 = collective_s(0, 1, 4).unwrap().matrix;
        assert!(vec_max_abs(&(&s01 * phi0.amplitudes())) < 1e-15);
        assert!(vec_max_abs(&(&s01 * psi1.amplitudes())) < 1e-15);
    }

    #[test]
    fn ghz_prime_normalized() {
        let g = ghz_prime();
        assert!((g.norm_sqr() - 1.0).abs() < 1e-15);
        let rho = g.density();
        let w2 = Matrix::identity(8, 8) * real(0.5) - rho.matrix();
        assert!((rho.expectation(&w2).re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn dicke_numbers_cases() {
        assert_eq!(dicke_numbers(&w_state(4).unwrap(), 1e-12).unwrap(), Some((2.0, 1.0)));
        let h = 0.5;
        let zsa = eta_state(&AmplitudeProfile::real(&[h, -h, h, -h]).unwrap()).unwrap();
        assert_eq!(dicke_numbers(&zsa, 1e-12).unwrap(), Some((1.0, 1.0)));
        assert_eq!(dicke_numbers(&ghz_state(3).unwrap(), 1e-12).unwrap(), None);
    }

    #[test]
    fn ghz3_fails_on_j3_not_jsq() {
        // GHZ lies in the symmetric j = 3/2 sector, so only J₃ has spread
        let o = angular_ops(3).unwrap();
        let g = ghz_state(3).unwrap();
        let (jsq, vsq) = mean_and_variance(&o.jsq, &g);
        let (_, v3) = mean_and_variance(&o.j3, &g);
        assert!((jsq - 3.75).abs() < 1e-12 && vsq < 1e-12);
        assert!((v3 - 2.25).abs() < 1e-12);
    }
}
