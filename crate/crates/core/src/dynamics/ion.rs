//! Three trapped ions with levels `S` (index 0) and `D` (index 1) sharing a
//! phonon mode truncated at two quanta. Register dims `[2, 2, 2, 3]`.

use std::f64::consts::PI;
use std::fmt;

use crate::corelin::{
    embed, evolve, flat_index, real, DensityMatrix, Matrix, StateVector, C64, I, ZERO,
};
use crate::error::{Error, Result};

pub const ION_DIMS: [usize; 4] = [2, 2, 2, 3];
const PHONON: usize = 3;

/// Which level transition `σ⁺` denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RaisingConvention {
    /// `σ⁺ = |S⟩⟨D|`.
    SFromD,
    /// `σ⁺ = |D⟩⟨S|`.
    DFromS,
}

impl fmt::Display for RaisingConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RaisingConvention::SFromD => "sigma+ = |S><D|",
            RaisingConvention::DFromS => "sigma+ = |D><S|",
        })
    }
}

/// Reading of the five-pulse listing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseOrder {
    /// Operator product: rightmost pulse acts first.
    Operator,
    /// Leftmost pulse acts first.
    Listed,
}

impl fmt::Display for PulseOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PulseOrder::Operator => "rightmost first",
            PulseOrder::Listed => "leftmost first",
        })
    }
}

fn sigma_plus(conv: RaisingConvention) -> Matrix {
    let mut m = Matrix::zeros(2, 2);
    match conv {
        RaisingConvention::SFromD => m[(0, 1)] = real(1.0),
        RaisingConvention::DFromS => m[(1, 0)] = real(1.0),
    }
    m
}

fn phonon_raise() -> Matrix {
    Matrix::from_fn(PHONON, PHONON, |r, c| {
        if r == c + 1 {
            real((r as f64).sqrt())
        } else {
            ZERO
        }
    })
}

fn check_ion(ion: usize) -> Result<usize> {
    if (1..=3).contains(&ion) {
        Ok(ion - 1)
    } else {
        Err(Error::OutOfRange(format!("ion index {ion} not in 1..=3")))
    }
}

/// `exp[iθ/2 (e^{iφ}σ⁺ + e^{−iφ}σ⁻)]` on one ion (1-based).
pub fn ion_r(theta: f64, phi: f64, ion: usize, conv: RaisingConvention) -> Result<Matrix> {
    let k = check_ion(ion)?;
    let sp = sigma_plus(conv) * C64::from_polar(1.0, phi);
    let g = (&sp + sp.adjoint()) * real(theta / 2.0);
    evolve(&embed(&g, &[k], &ION_DIMS)?, -1.0)
}

/// `exp[iθ/2 (e^{iφ}σ⁺b† + e^{−iφ}σ⁻b)]` on one ion and the phonon mode.
pub fn ion_rplus(theta: f64, phi: f64, ion: usize, conv: RaisingConvention) -> Result<Matrix> {
    let k = check_ion(ion)?;
    let sp = crate::corelin::kron(&sigma_plus(conv), &phonon_raise()) * C64::from_polar(1.0, phi);
    let g = (&sp + sp.adjoint()) * real(theta / 2.0);
    evolve(&embed(&g, &[k, 3], &ION_DIMS)?, -1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseKind {
    Carrier,
    Sideband,
}

/// One addressed laser pulse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub kind: PulseKind,
    pub ion: usize,
    pub theta: f64,
    pub phi: f64,
}

impl Pulse {
    pub fn unitary(&self, conv: RaisingConvention) -> Result<Matrix> {
        match self.kind {
            PulseKind::Carrier => ion_r(self.theta, self.phi, self.ion, conv),
            PulseKind::Sideband => ion_rplus(self.theta, self.phi, self.ion, conv),
        }
    }
}

/// The listing `R⁺₂(2 arccos(1/√3), 0) R₃(π, π) R⁺₃(π/2, π) R₁(π, 0) R⁺₁(π, π)`,
/// left to right.
pub fn w_pulse_listing() -> [Pulse; 5] {
    let p = |kind, ion, theta, phi| Pulse { kind, ion, theta, phi };
    [
        p(PulseKind::Sideband, 2, 2.0 * (1.0 / 3f64.sqrt()).acos(), 0.0),
        p(PulseKind::Carrier, 3, PI, PI),
        p(PulseKind::Sideband, 3, PI / 2.0, PI),
        p(PulseKind::Carrier, 1, PI, 0.0),
        p(PulseKind::Sideband, 1, PI, PI),
    ]
}

fn ket(levels: [usize; 3], phonon: usize) -> usize {
    flat_index(&[levels[0], levels[1], levels[2], phonon], &ION_DIMS)
}

/// `|SSS⟩|0⟩`.
pub fn ion_ground() -> StateVector {
    StateVector::basis(0, ION_DIMS.to_vec()).expect("ground state")
}

/// `(|SSS⟩|0⟩ + i√2 |SDS⟩|1⟩)/√3`.
pub fn expected_first_pulse() -> StateVector {
    let mut amps = vec![ZERO; 24];
    let s = 1.0 / 3f64.sqrt();
    amps[ket([0, 0, 0], 0)] = real(s);
    amps[ket([0, 1, 0], 1)] = I * (2f64.sqrt() * s);
    StateVector::new(amps, ION_DIMS.to_vec()).expect("unit norm")
}

/// `(|DDS⟩ + |DSD⟩ + |SDD⟩)/√3` on the ions.
pub fn expected_ion_w() -> StateVector {
    let mut amps = vec![ZERO; 8];
    let s = real(1.0 / 3f64.sqrt());
    for idx in [0b110, 0b101, 0b011] {
        amps[idx] = s;
    }
    StateVector::new(amps, vec![2; 3]).expect("unit norm")
}

/// Probability of two phonons.
pub fn phonon_leakage(psi: &StateVector) -> f64 {
    (0..psi.len())
        .filter(|i| i % PHONON == 2)
        .map(|i| psi.amp(i).norm_sqr())
        .sum::<f64>()
        + 0.0
}

/// Fidelity `⟨w|U ρ U†|w⟩` maximized over per-ion phases
/// `U = ⊗ diag(1, e^{iφ_k})` by coordinate descent. Returns the fidelity
/// and the phases.
pub fn gauge_optimized_fidelity(rho: &DensityMatrix, target: &StateVector) -> Result<(f64, Vec<f64>)> {
    let n = target.num_subsystems();
    if rho.dims() != target.dims() || target.dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch("gauge fidelity needs matching qubit registers".into()));
    }
    let m = rho.matrix();
    let mut phases = vec![0.0; n];
    let rotated = |ph: &[f64]| -> crate::corelin::Vector {
        // U†|w⟩
        crate::corelin::Vector::from_fn(target.len(), |i, _| {
            let angle: f64 = (0..n)
                .filter(|&k| i >> (n - 1 - k) & 1 == 1)
                .map(|k| ph[k])
                .sum();
            target.amp(i) * C64::from_polar(1.0, -angle)
        })
    };
    let value = |ph: &[f64]| {
        let v = rotated(ph);
        v.dotc(&(m * &v)).re
    };
    let mut best = value(&phases);
    for _ in 0..200 {
        for k in 0..n {
            // split U†|w⟩ = v0 + e^{−iφ_k} v1 by the value of qubit k
            let mut ph = phases.clone();
            ph[k] = 0.0;
            let v = rotated(&ph);
            let bit = 1usize << (n - 1 - k);
            let v0 = v.map_with_location(|i, _, z| if i & bit == 0 { z } else { ZERO });
            let v1 = v.map_with_location(|i, _, z| if i & bit != 0 { z } else { ZERO });
            let c = v0.dotc(&(m * &v1));
            phases[k] = c.arg();
        }
        let next = value(&phases);
        let done = (next - best).abs() < 1e-15;
        best = next;
        if done {
            break;
        }
    }
    Ok((best, phases))
}

/// Full record of one reading of the pulse sequence.
#[derive(Clone, Debug)]
pub struct IonSequenceRun {
    pub order: PulseOrder,
    pub convention: RaisingConvention,
    /// State after each applied pulse.
    pub intermediates: Vec<StateVector>,
    /// Fidelity of the first applied pulse's output with the expected
    /// superposition (global phase free).
    pub first_pulse_fidelity: f64,
    /// Largest two-phonon population over the sequence.
    pub max_leakage: f64,
    /// Fidelity of the ions with the W target, before phase optimization.
    pub final_fidelity: f64,
    pub gauge_fidelity: f64,
    pub gauge_phases: Vec<f64>,
    /// Purity of the ions after tracing out the phonon.
    pub ion_purity: f64,
    /// Largest unitarity residual among the pulses used.
    pub max_unitarity_residual: f64,
}

impl IonSequenceRun {
    pub fn final_state(&self) -> &StateVector {
        self.intermediates.last().expect("five pulses")
    }

    pub fn succeeds(&self, tol: f64) -> bool {
        self.first_pulse_fidelity >= 1.0 - tol && self.gauge_fidelity >= 1.0 - tol
    }
}

pub fn ion_w_sequence(order: PulseOrder, conv: RaisingConvention) -> Result<IonSequenceRun> {
    let mut pulses = w_pulse_listing().to_vec();
    if order == PulseOrder::Operator {
        pulses.reverse();
    }
    let mut psi = ion_ground();
    let mut intermediates = Vec::with_capacity(5);
    let mut max_leakage: f64 = 0.0;
    let mut max_res: f64 = 0.0;
    for p in &pulses {
        let u = p.unitary(conv)?;
        max_res = max_res.max(crate::corelin::unitarity_residual(&u));
        psi = psi.apply(&u)?;
        max_leakage = max_leakage.max(phonon_leakage(&psi));
        intermediates.push(psi.clone());
    }
    let first_pulse_fidelity = crate::corelin::fidelity(&intermediates[0], &expected_first_pulse())?;
    let ions = psi.density().partial_trace(&[0, 1, 2])?;
    let target = expected_ion_w();
    let final_fidelity = ions.expectation(target.density().matrix()).re;
    let (gauge_fidelity, gauge_phases) = gauge_optimized_fidelity(&ions, &target)?;
    Ok(IonSequenceRun {
        order,
        convention: conv,
        intermediates,
        first_pulse_fidelity,
        max_leakage,
        final_fidelity,
        gauge_fidelity,
        gauge_phases,
        ion_purity: ions.purity(),
        max_unitarity_residual: max_res,
    })
}

/// All four readings (both orders, both conventions) and the first that
/// reproduces both the intermediate and the final state within `tol`.
/// Readings are tried operator order first, printed convention first.
#[derive(Clone, Debug)]
pub struct IonSearch {
    pub runs: Vec<IonSequenceRun>,
    pub selected: Option<usize>,
}

impl IonSearch {
    pub fn selected_run(&self) -> Option<&IonSequenceRun> {
        self.selected.map(|i| &self.runs[i])
    }
}

pub fn ion_w_search(tol: f64) -> Result<IonSearch> {
    let mut runs = Vec::with_capacity(4);
    for order in [PulseOrder::Operator, PulseOrder::Listed] {
        for conv in [RaisingConvention::SFromD, RaisingConvention::DFromS] {
            runs.push(ion_w_sequence(order, conv)?);
        }
    }
    let selected = runs.iter().position(|r| r.succeeds(tol));
    Ok(IonSearch { runs, selected })
}
