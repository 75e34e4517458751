//! Collective decay `ρ̇ = −γ({R†R, ρ} − 2RρR†)` with `R = S₀₁`, integrated
//! by fixed-step RK4.

use crate::corelin::{
    hermitian_eig, real, trace, DensityMatrix, Matrix, StateVector, Vector, ZERO,
};
use crate::error::{Error, Result};
use crate::states::{collective_s, CollectiveOperator};

/// Trace drift beyond which integration is rejected.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;
/// Negative eigenvalue beyond which integration is rejected. The generator
/// is traceless, so RK4 keeps the trace even when the step is far too
/// large; loss of positivity is what reveals it.
pub const MAX_NEGATIVITY: f64 = 1e-6;

fn generator(r: &Matrix, gamma: f64) -> impl Fn(&Matrix) -> Matrix + '_ {
    let rd = r.adjoint();
    let rdr = &rd * r;
    move |rho: &Matrix| {
        let anti = &rdr * rho + rho * &rdr;
        let jump = r * rho * &rd * real(2.0);
        (anti - jump) * real(-gamma)
    }
}

#[derive(Clone, Debug)]
pub struct DecaySample {
    pub time: f64,
    pub state: DensityMatrix,
    /// Smallest eigenvalue, to monitor positivity.
    pub min_eigenvalue: f64,
}

/// RK4 trajectory from `rho0` to time `t` in `steps` steps; returns the
/// initial state and the state after every step.
pub fn lindblad_trajectory(rho0: &DensityMatrix, gamma: f64, t: f64, steps: usize) -> Result<Vec<DecaySample>> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::OutOfRange(format!("decay rate {gamma} must be >= 0")));
    }
    if steps == 0 {
        return Err(Error::OutOfRange("at least one step is required".into()));
    }
    if rho0.dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch("collective decay acts on qubits".into()));
    }
    let n = rho0.dims().len();
    let r = collective_s(0, 1, n)?.matrix;
    let l = generator(&r, gamma);
    let dt = t / steps as f64;
    let dims = rho0.dims().to_vec();
    let mut rho = rho0.matrix().clone();
    let sample = |time: f64, m: &Matrix| -> Result<DecaySample> {
        Ok(DecaySample {
            time,
            min_eigenvalue: hermitian_eig(m)?.min(),
            state: DensityMatrix::from_parts(m.clone(), dims.clone())?,
        })
    };
    let mut out = vec![sample(0.0, &rho)?];
    for k in 1..=steps {
        let k1 = l(&rho);
        let k2 = l(&(&rho + &k1 * real(dt / 2.0)));
        let k3 = l(&(&rho + &k2 * real(dt / 2.0)));
        let k4 = l(&(&rho + &k3 * real(dt)));
        rho += (k1 + k2 * real(2.0) + k3 * real(2.0) + k4) * real(dt / 6.0);
        rho = (&rho + rho.adjoint()) * real(0.5);
        let drift = (trace(&rho) - real(1.0)).norm();
        if drift > MAX_TRACE_DRIFT {
            return Err(Error::Integration(format!(
                "trace drift {drift:e} after step {k}; reduce the step size"
            )));
        }
        let smp = sample(dt * k as f64, &rho)?;
        if smp.min_eigenvalue < -MAX_NEGATIVITY {
            return Err(Error::Integration(format!(
                "eigenvalue {:e} after step {k}; reduce the step size",
                smp.min_eigenvalue
            )));
        }
        out.push(smp);
    }
    Ok(out)
}

pub fn lindblad_collective_decay(rho0: &DensityMatrix, gamma: f64, t: f64, steps: usize) -> Result<DensityMatrix> {
    let mut tr = lindblad_trajectory(rho0, gamma, t, steps)?;
    Ok(tr.pop().expect("non-empty trajectory").state)
}

/// Result of applying a collective operator to a qubit state.
#[derive(Clone, Copy, Debug)]
pub struct DfCheck {
    /// `‖Rψ‖`; zero means ψ is annihilated.
    pub residual: f64,
    /// For single-excitation ψ with profile `q`: `Σ q_k` and
    /// `‖Rψ − (Σ q_k)|0…0⟩‖`.
    pub profile_sum: Option<crate::corelin::C64>,
    pub identity_residual: Option<f64>,
}

pub fn df_check(psi: &StateVector, r: &CollectiveOperator) -> Result<DfCheck> {
    if psi.dims().iter().any(|&d| d != 2) || psi.num_subsystems() != r.n {
        return Err(Error::DimensionMismatch(format!(
            "operator on {} qubits, state dims {:?}",
            r.n,
            psi.dims()
        )));
    }
    let v = &r.matrix * psi.amplitudes();
    let residual = v.norm();
    let n = r.n;
    let single = (0..psi.len())
        .filter(|&i| psi.amp(i) != ZERO)
        .all(|i| i.count_ones() == 1);
    let (profile_sum, identity_residual) = if single {
        let q: crate::corelin::C64 = (0..n).map(|k| psi.amp(1 << (n - 1 - k))).sum();
        let mut expected = Vector::from_element(psi.len(), ZERO);
        expected[0] = q;
        (Some(q), Some((v - expected).norm()))
    } else {
        (None, None)
    };
    Ok(DfCheck {
        residual,
        profile_sum,
        identity_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corelin::trace_distance;
    use crate::states::{df_states, eta_state, psi_minus, w_state, AmplitudeProfile};

    fn ket11() -> DensityMatrix {
        StateVector::basis(3, vec![2, 2]).unwrap().density()
    }

    #[test]
    fn singlet_is_stationary() {
        let rho = psi_minus().density();
        let out = lindblad_collective_decay(&rho, 1.0, 10.0, 2000).unwrap();
        assert!(trace_distance(out.matrix(), rho.matrix()).unwrap() < 1e-8);
    }

    #[test]
    fn excited_pair_matches_closed_form() {
        let g = 0.5;
        let tr = lindblad_trajectory(&ket11(), g, 4.0, 800).unwrap();
        let s11 = collective_s(1, 1, 2).unwrap().matrix;
        let mut prev = f64::INFINITY;
        for smp in &tr {
            let x = 4.0 * g * smp.time;
            let p11 = smp.state.matrix()[(3, 3)].re;
            assert!((p11 - (-x).exp()).abs() < 1e-7);
            let e = smp.state.expectation(&s11).re;
            assert!((e - (-x).exp() * (2.0 + x)).abs() < 1e-7);
            assert!(e < prev);
            prev = e;
            assert!(smp.min_eigenvalue > -1e-10);
        }
    }

    #[test]
    fn zero_rate_is_identity() {
        let rho = w_state(3).unwrap().density();
        let out = lindblad_collective_decay(&rho, 0.0, 5.0, 10).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
    }

    #[test]
    fn coarse_steps_are_rejected() {
        assert!(matches!(
            lindblad_collective_decay(&ket11(), 1.0, 10.0, 1),
            Err(Error::Integration(_))
        ));
        assert!(lindblad_collective_decay(&ket11(), -1.0, 1.0, 10).is_err());
    }

    #[test]
    fn df_residuals() {
        let s01 = collective_s(0, 1, 2).unwrap();
        assert!(df_check(&psi_minus(), &s01).unwrap().residual < 1e-12);
        let (phi0, psi1) = df_states();
        let s01_4 = collective_s(0, 1, 4).unwrap();
        assert!(df_check(&phi0, &s01_4).unwrap().residual < 1e-12);
        assert!(df_check(&psi1, &s01_4).unwrap().residual < 1e-12);

        let s01_3 = collective_s(0, 1, 3).unwrap();
        let w = df_check(&w_state(3).unwrap(), &s01_3).unwrap();
        assert!((w.residual - 3f64.sqrt()).abs() < 1e-12);
        assert!(w.identity_residual.unwrap() < 1e-12);
        let zsa = eta_state(&AmplitudeProfile::normalized(vec![real(1.0), real(-2.0), real(1.0)]).unwrap()).unwrap();
        let z = df_check(&zsa, &s01_3).unwrap();
        assert!(z.residual < 1e-12 && z.profile_sum.unwrap().norm() < 1e-12);
    }
}
