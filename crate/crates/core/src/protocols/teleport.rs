//! Teleporting `α|01⟩ + β|10⟩` through a GHZ or W-class channel.
//!
//! Register order is `(1, 2, A, B, C)`: the unknown pair on `(1, 2)`, the
//! channel on `(A, B, C)`. Alice measures `(1, 2, A)` in a basis of
//! Bell-pair ⊗ `σx`-eigenvector products; Bob and Claire recover with
//! local Paulis.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::corelin::{fidelity, kron, paulis, vec_max_abs, real, Matrix, StateVector, Vector, C64, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::states::{ghz_state, phi_minus, phi_plus, psi_minus, psi_plus};

pub const PAULI_NAMES: [&str; 4] = ["I", "X", "Y", "Z"];
const PHASES: [C64; 4] = [ONE, I, C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];

/// Which two of the measured qubits `(1, 2, A)` carry the Bell pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// Bell pair on `(1, 2)`, `σx` eigenvector on `A`.
    OneTwo,
    /// Bell pair on `(1, A)`, `σx` eigenvector on `2`.
    OneA,
    /// Bell pair on `(2, A)`, `σx` eigenvector on `1`.
    TwoA,
}

impl Pairing {
    pub const ALL: [Pairing; 3] = [Pairing::OneTwo, Pairing::OneA, Pairing::TwoA];

    /// Positions (within `(1, 2, A)`) of the Bell pair and the single qubit.
    fn layout(self) -> ([usize; 2], usize) {
        match self {
            Pairing::OneTwo => ([0, 1], 2),
            Pairing::OneA => ([0, 2], 1),
            Pairing::TwoA => ([1, 2], 0),
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::OneTwo => "bell(1,2)+x(A)",
            Pairing::OneA => "bell(1,A)+x(2)",
            Pairing::TwoA => "bell(2,A)+x(1)",
        })
    }
}

pub const BELL_NAMES: [&str; 4] = ["phi+", "phi-", "psi+", "psi-"];

fn bell(k: usize) -> StateVector {
    match k {
        0 => phi_plus(),
        1 => phi_minus(),
        2 => psi_plus(),
        _ => psi_minus(),
    }
}

/// One measurement outcome and the matching correction.
#[derive(Clone, Debug)]
pub struct Branch {
    pub bell: usize,
    /// `+1` or `−1` eigenvector of `σx`.
    pub x_sign: i8,
    pub phase: C64,
    pub pauli_b: usize,
    pub pauli_c: usize,
    /// Phase-adjusted three-qubit measurement vector on `(1, 2, A)`.
    pub phi: StateVector,
}

impl Branch {
    pub fn label(&self) -> String {
        format!(
            "{}{}",
            BELL_NAMES[self.bell],
            if self.x_sign > 0 { "|x+>" } else { "|x->" }
        )
    }

    pub fn correction(&self) -> Matrix {
        let p = paulis();
        kron(&p[self.pauli_b], &p[self.pauli_c])
    }
}

#[derive(Clone, Debug)]
pub struct BellLikeDecomposition {
    pub pairing: Pairing,
    pub branches: Vec<Branch>,
}

fn measurement_vector(pairing: Pairing, b: usize, x_sign: i8) -> StateVector {
    let ([p, q], s) = pairing.layout();
    let bv = bell(b);
    let e = [real(FRAC_1_SQRT_2), real(FRAC_1_SQRT_2 * f64::from(x_sign))];
    let amps = (0..8)
        .map(|i| {
            let bit = |k: usize| i >> (2 - k) & 1;
            bv.amp(bit(p) << 1 | bit(q)) * e[bit(s)]
        })
        .collect();
    StateVector::qubits(amps).expect("product of normalized states")
}

/// `⟨Φ|_{12A} ⊗ 1_{BC}` applied to a five-qubit vector.
fn project(phi: &StateVector, full: &Vector) -> Vector {
    Vector::from_fn(4, |bc, _| {
        (0..8)
            .map(|m| phi.amp(m).conj() * full[m << 2 | bc])
            .sum::<C64>()
    })
}

fn full_state(phi: &StateVector, channel: &StateVector) -> Vector {
    crate::corelin::kron_vec(phi.amplitudes(), channel.amplitudes())
}

fn check_pair(phi: &StateVector) -> Result<()> {
    if phi.dims() != [2, 2] {
        return Err(Error::DimensionMismatch("two-qubit state required".into()));
    }
    let leak = phi.amp(0).norm().max(phi.amp(3).norm());
    if leak > 1e-12 {
        return Err(Error::OutOfRange(format!(
            "state has weight {leak:e} outside span{{|01>, |10>}}"
        )));
    }
    Ok(())
}

/// Fixed generic reference input used to identify the corrections, so that
/// they do not depend on the state being teleported.
fn reference_pair() -> StateVector {
    StateVector::qubits(vec![ZERO, real(0.6), C64::from_polar(0.8, 0.7), ZERO]).expect("normalized")
}

/// Tries every Bell label, `σx` sign, Pauli pair and phase for one pairing.
/// Returns `None` if some outcome has no matching local correction.
pub fn decompose_with(pairing: Pairing) -> Option<BellLikeDecomposition> {
    let r = reference_pair();
    let full = full_state(&r, &ghz_state(3).expect("ghz"));
    let p = paulis();
    let scale = real(1.0 / 8f64.sqrt());
    let mut branches = Vec::with_capacity(8);
    for b in 0..4 {
        for x_sign in [1i8, -1] {
            let raw = measurement_vector(pairing, b, x_sign);
            let chi = project(&raw, &full);
            let found = (0..16).find_map(|k| {
                let (pb, pc) = (k / 4, k % 4);
                let target = kron(&p[pb], &p[pc]) * r.amplitudes() * scale;
                PHASES
                    .iter()
                    .find(|&&c| vec_max_abs(&(&chi - &target * c)) <= 1e-12)
                    .map(|&c| (pb, pc, c))
            })?;
            let (pauli_b, pauli_c, phase) = found;
            let amps = raw.amplitudes().iter().map(|z| z * phase).collect();
            branches.push(Branch {
                bell: b,
                x_sign,
                phase,
                pauli_b,
                pauli_c,
                phi: StateVector::qubits(amps).expect("unit phase"),
            });
        }
    }
    Some(BellLikeDecomposition { pairing, branches })
}

/// Every pairing and whether it admits local corrections.
pub fn pairing_search() -> Vec<(Pairing, bool)> {
    Pairing::ALL
        .iter()
        .map(|&p| (p, decompose_with(p).is_some()))
        .collect()
}

/// The first pairing (in [`Pairing::ALL`] order) that works.
pub fn bell_like_basis() -> Result<BellLikeDecomposition> {
    Pairing::ALL
        .iter()
        .find_map(|&p| decompose_with(p))
        .ok_or_else(|| Error::Decomposition("no pairing admits local corrections".into()))
}

/// The expansion for a specific input, verified to reconstruct it.
pub fn bell_like_decomposition(phi: &StateVector) -> Result<BellLikeDecomposition> {
    let d = bell_like_basis()?;
    let r = d.residual(phi)?;
    if r > 1e-12 {
        return Err(Error::Decomposition(format!("reconstruction residual {r:e}")));
    }
    Ok(d)
}

impl BellLikeDecomposition {
    /// `max |φ⊗GHZ − (1/√8) Σ_x Φ_x ⊗ (B_x⊗C_x) φ|`.
    pub fn residual(&self, phi: &StateVector) -> Result<f64> {
        check_pair(phi)?;
        let lhs = full_state(phi, &ghz_state(3)?);
        let mut rhs = Vector::zeros(32);
        for br in &self.branches {
            let bc = br.correction() * phi.amplitudes() * real(1.0 / 8f64.sqrt());
            rhs += crate::corelin::kron_vec(br.phi.amplitudes(), &bc);
        }
        Ok(vec_max_abs(&(lhs - rhs)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Ghz,
    /// `(1 ⊗ V)|GHZ⟩ = (|001⟩ + |010⟩)/2 + |100⟩/√2`.
    WClass,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Ghz => "ghz",
            Channel::WClass => "w",
        })
    }
}

/// `V = |Ψ⁺⟩⟨00| + |11⟩⟨01| + |Ψ⁻⟩⟨10| + |00⟩⟨11|` on `(B, C)`.
pub fn w_channel_unitary() -> Matrix {
    let h = real(FRAC_1_SQRT_2);
    Matrix::from_row_slice(
        4,
        4,
        &[
            ZERO, ZERO, ZERO, ONE,
            h, ZERO, h, ZERO,
            h, ZERO, -h, ZERO,
            ZERO, ONE, ZERO, ZERO,
        ],
    )
}

impl Channel {
    /// Unitary on `(B, C)` that maps GHZ to this channel.
    pub fn unitary(self) -> Matrix {
        match self {
            Channel::Ghz => Matrix::identity(4, 4),
            Channel::WClass => w_channel_unitary(),
        }
    }

    pub fn state(self) -> StateVector {
        let ghz = ghz_state(3).expect("ghz");
        let u = kron(&Matrix::identity(2, 2), &self.unitary());
        ghz.apply(&u).expect("unitary")
    }
}

pub fn w_channel() -> StateVector {
    Channel::WClass.state()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recovery {
    /// `(B_x ⊗ C_x)† V†`: undo the channel unitary, then the Pauli.
    Inverse,
    /// `V (B_x ⊗ C_x) V†`.
    Conjugated,
    /// No correction (negative control).
    Omitted,
}

#[derive(Clone, Debug)]
pub struct TeleportResult {
    pub channel: Channel,
    pub recovery: Recovery,
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
    pub fidelities: Vec<f64>,
    /// Bits Alice sends: `log2` of the number of outcomes.
    pub classical_bits: u32,
}

impl TeleportResult {
    pub fn min_fidelity(&self) -> f64 {
        self.fidelities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean_fidelity(&self) -> f64 {
        self.probabilities
            .iter()
            .zip(&self.fidelities)
            .map(|(p, f)| p * f)
            .sum::<f64>()
            + 0.0
    }
}

pub fn teleport(phi: &StateVector, channel: Channel, recovery: Recovery) -> Result<TeleportResult> {
    check_pair(phi)?;
    let dec = bell_like_decomposition(phi)?;
    let full = full_state(phi, &channel.state());
    let v = channel.unitary();
    let mut out = TeleportResult {
        channel,
        recovery,
        labels: Vec::new(),
        probabilities: Vec::new(),
        fidelities: Vec::new(),
        classical_bits: dec.branches.len().trailing_zeros(),
    };
    for br in &dec.branches {
        let chi = project(&br.phi, &full);
        let p = chi.norm_squared();
        let pauli = br.correction();
        let r = match recovery {
            Recovery::Inverse => pauli.adjoint() * v.adjoint(),
            Recovery::Conjugated => &v * &pauli * v.adjoint(),
            Recovery::Omitted => Matrix::identity(4, 4),
        };
        let received = StateVector::normalized((r * chi).iter().copied().collect(), vec![2, 2])?;
        out.labels.push(br.label());
        out.probabilities.push(p);
        out.fidelities.push(fidelity(&received, phi)?);
    }
    Ok(out)
}

/// Largest `|⟨ψ_i|ψ_j⟩|` over distinct pairs of `ψ_k = E_k |channel⟩`.
/// Zero means the encodings are perfectly distinguishable.
pub fn dense_coding_overlap(channel: &StateVector, encodings: &[Matrix]) -> Result<f64> {
    let states = encodings
        .iter()
        .map(|e| channel.apply(e))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            worst = worst.max(states[i].inner(&states[j])?.norm());
        }
    }
    Ok(worst)
}

/// Encodings `P ⊗ Q ⊗ 1` for Paulis `P ∈ ops_a`, `Q ∈ ops_b` (indices into
/// `[I, X, Y, Z]`), optionally conjugated on `(B, C)` by `u`.
pub fn local_encodings(ops_a: &[usize], ops_b: &[usize], u: Option<&Matrix>) -> Vec<Matrix> {
    let p = paulis();
    let mut out = Vec::new();
    for &a in ops_a {
        for &b in ops_b {
            let mut bc = kron(&p[b], &p[0]);
            if let Some(u) = u {
                bc = u * bc * u.adjoint();
            }
            out.push(kron(&p[a], &bc));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corelin::unitarity_residual;

    fn pair(a: C64, b: C64) -> StateVector {
        StateVector::normalized(vec![ZERO, a, b, ZERO], vec![2, 2]).unwrap()
    }

    #[test]
    fn channel_amplitudes() {
        assert!(unitarity_residual(&w_channel_unitary()) < 1e-15);
        let w = w_channel();
        let h = FRAC_1_SQRT_2;
        for (i, e) in [(1, 0.5), (2, 0.5), (4, h)] {
            assert!((w.amp(i) - real(e)).norm() < 1e-15);
        }
        assert!((w.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn only_mixed_pairings_work() {
        let s = pairing_search();
        assert_eq!(s, vec![(Pairing::OneTwo, false), (Pairing::OneA, true), (Pairing::TwoA, true)]);
        assert_eq!(bell_like_basis().unwrap().pairing, Pairing::OneA);
    }

    #[test]
    fn decomposition_identity() {
        let d = bell_like_basis().unwrap();
        assert_eq!(d.branches.len(), 8);
        for phi in [pair(ONE, ZERO), pair(ONE, ONE), pair(real(0.3), C64::new(-0.2, 0.9))] {
            assert!(d.residual(&phi).unwrap() < 1e-12);
        }
        let bad = StateVector::qubits(vec![ONE, ZERO, ZERO, ZERO]).unwrap();
        assert!(d.residual(&bad).is_err());
    }

    #[test]
    fn teleportation_fidelity() {
        let phi = pair(real(0.3), C64::new(-0.2, 0.9));
        for ch in [Channel::Ghz, Channel::WClass] {
            let r = teleport(&phi, ch, Recovery::Inverse).unwrap();
            assert_eq!(r.classical_bits, 3);
            assert!((r.min_fidelity() - 1.0).abs() < 1e-12);
            for p in &r.probabilities {
                assert!((p - 0.125).abs() < 1e-12);
            }
        }
        let none = teleport(&phi, Channel::WClass, Recovery::Omitted).unwrap();
        assert!(none.min_fidelity() < 0.99);
        let conj = teleport(&phi, Channel::WClass, Recovery::Conjugated).unwrap();
        assert!(conj.min_fidelity() < 0.99);
    }

    #[test]
    fn dense_coding() {
        let ghz = Channel::Ghz.state();
        let good = local_encodings(&[0, 1, 2, 3], &[0, 1], None);
        assert!(dense_coding_overlap(&ghz, &good).unwrap() < 1e-12);
        let bad = local_encodings(&[0, 3], &[0, 1, 2, 3], None);
        assert!(dense_coding_overlap(&ghz, &bad).unwrap() > 0.99);
        let v = w_channel_unitary();
        let w_enc = local_encodings(&[0, 1, 2, 3], &[0, 1], Some(&v));
        assert!(dense_coding_overlap(&w_channel(), &w_enc).unwrap() < 1e-12);
    }
}
