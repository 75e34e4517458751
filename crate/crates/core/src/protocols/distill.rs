//! Conversion of `a|100⟩ + b|010⟩ + c|001⟩` into `W₃` with one ancilla.

use crate::corelin::{embed, fidelity, real, Matrix, StateVector, Vector, ZERO};
use crate::error::{Error, Result};
use crate::states::w_state;

/// The two-qubit gate with parameter `v ∈ [0, 1]`, rows/columns in the
/// order `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn distill_gate(v: f64) -> Result<Matrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange(format!("gate parameter {v} outside [0, 1]")));
    }
    let r = (1.0 - v * v).sqrt();
    Ok(Matrix::from_row_slice(
        4,
        4,
        &[
            real(1.0), ZERO, ZERO, ZERO,
            ZERO, real(v), ZERO, real(r),
            ZERO, ZERO, real(-1.0), ZERO,
            ZERO, real(r), ZERO, real(-v),
        ],
    ))
}

/// One way to attach the ancilla.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wiring {
    /// Gate basis order: ancilla first (`true`) or system qubit first.
    pub ancilla_first: bool,
    /// The `c/a` gate acts on qubit 1 and the `c/b` gate on qubit 2
    /// (`false` swaps the targets).
    pub straight: bool,
    /// Ancilla outcome that is kept.
    pub keep: usize,
}

impl Wiring {
    pub const STANDARD: Wiring = Wiring {
        ancilla_first: true,
        straight: true,
        keep: 0,
    };

    pub fn all() -> Vec<Wiring> {
        let mut out = Vec::with_capacity(8);
        for ancilla_first in [true, false] {
            for straight in [true, false] {
                for keep in [0, 1] {
                    out.push(Wiring {
                        ancilla_first,
                        straight,
                        keep,
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct DistillOutcome {
    pub success_probability: f64,
    /// Conditional three-qubit state; `None` if the branch is empty.
    pub output: Option<StateVector>,
    pub fidelity: f64,
    pub failure_probability: f64,
    pub failure_output: Option<StateVector>,
}

/// Normalization slack for coefficients typed with ten decimals.
pub const NORM_TOL: f64 = 1e-9;

fn check_coefficients(a: f64, b: f64, c: f64) -> Result<()> {
    let n2 = a * a + b * b + c * c;
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2));
    }
    if !(c > 0.0 && c <= a && c <= b) {
        return Err(Error::OutOfRange(format!(
            "need 0 < c <= min(a, b), got a={a}, b={b}, c={c}"
        )));
    }
    Ok(())
}

fn branch(full: &Vector, ancilla: usize) -> (f64, Option<StateVector>) {
    // ancilla is the last qubit of the four
    let amps: Vec<_> = (0..8).map(|i| full[(i << 1) | ancilla]).collect();
    let p: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>() + 0.0;
    let state = (p > 1e-15).then(|| StateVector::normalized(amps, vec![2; 3]).expect("nonzero"));
    (p, state)
}

pub fn distill_with(a: f64, b: f64, c: f64, wiring: Wiring) -> Result<DistillOutcome> {
    check_coefficients(a, b, c)?;
    let input = StateVector::normalized(
        vec![ZERO, real(c), real(b), ZERO, real(a), ZERO, ZERO, ZERO],
        vec![2; 3],
    )?;
    // register (q1, q2, q3, ancilla)
    let mut full: Vector = Vector::from_fn(16, |i, _| if i & 1 == 0 { input.amp(i >> 1) } else { ZERO });
    let dims = [2, 2, 2, 2];
    let (first, second) = if wiring.straight { (0, 1) } else { (1, 0) };
    for (q, v) in [(first, c / a), (second, c / b)] {
        let targets = if wiring.ancilla_first { [3, q] } else { [q, 3] };
        full = embed(&distill_gate(v)?, &targets, &dims)? * full;
    }
    let (p, out) = branch(&full, wiring.keep);
    let (pf, fail) = branch(&full, 1 - wiring.keep);
    let w = w_state(3)?;
    let fid = match &out {
        Some(s) => fidelity(s, &w)?,
        None => 0.0,
    };
    Ok(DistillOutcome {
        success_probability: p,
        output: out,
        fidelity: fid,
        failure_probability: pf,
        failure_output: fail,
    })
}

/// Ancilla first in the gate basis, `c/a` gate on qubit 1 then `c/b` gate
/// on qubit 2, keep ancilla `|0⟩`.
pub fn distill_w(a: f64, b: f64, c: f64) -> Result<DistillOutcome> {
    distill_with(a, b, c, Wiring::STANDARD)
}

/// Every wiring with its success probability and output fidelity.
pub fn wiring_search(a: f64, b: f64, c: f64) -> Result<Vec<(Wiring, DistillOutcome)>> {
    Wiring::all()
        .into_iter()
        .map(|w| Ok((w, distill_with(a, b, c, w)?)))
        .collect()
}
