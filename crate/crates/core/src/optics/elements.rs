//! Standard linear-optical elements as mode unitaries. Angles in radians.

use std::f64::consts::PI;

use super::ModeUnitary;
use crate::corelin::{real, Matrix, C64};

fn checked(m: Matrix) -> ModeUnitary {
    ModeUnitary::new(m).expect("element matrices are unitary by construction")
}

/// `[[cos θ, −e^{−iφ} sin θ], [e^{iφ} sin θ, cos θ]]`; θ = π/4 is 50/50.
pub fn beamsplitter(theta: f64, phi: f64) -> ModeUnitary {
    let (s, c) = theta.sin_cos();
    checked(Matrix::from_row_slice(
        2,
        2,
        &[
            real(c),
            -C64::from_polar(s, -phi),
            C64::from_polar(s, phi),
            real(c),
        ],
    ))
}

/// Polarizing beamsplitter on `[p1.H, p1.V, p2.H, p2.V]`: H is
/// transmitted, V is reflected into the other port.
pub fn pbs() -> ModeUnitary {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = real(1.0);
    m[(2, 2)] = real(1.0);
    m[(3, 1)] = real(1.0);
    m[(1, 3)] = real(1.0);
    checked(m)
}

/// Half-wave plate on `[H, V]` with its axis at `angle`.
pub fn hwp(angle: f64) -> ModeUnitary {
    let (s, c) = (2.0 * angle).sin_cos();
    checked(Matrix::from_row_slice(2, 2, &[real(c), real(s), real(s), real(-c)]))
}

/// Quarter-wave plate on `[H, V]` with its fast axis at `angle`.
pub fn qwp(angle: f64) -> ModeUnitary {
    let (s, c) = angle.sin_cos();
    let i = C64::i();
    let off = (real(1.0) - i) * (s * c);
    checked(Matrix::from_row_slice(
        2,
        2,
        &[real(c * c) + i * (s * s), off, off, real(s * s) + i * (c * c)],
    ))
}

/// Couples a V mode to an auxiliary mode: `|V⟩ → t|V⟩ + √(1−t²)|aux⟩`.
/// `t` is clamped to `[−1, 1]`.
pub fn bs_v(t_v: f64) -> ModeUnitary {
    let t = t_v.clamp(-1.0, 1.0);
    let r = (1.0 - t * t).sqrt();
    checked(Matrix::from_row_slice(2, 2, &[real(t), real(-r), real(r), real(t)]))
}

/// Phase shift `e^{iφ}` on one mode.
pub fn phase(phi: f64) -> ModeUnitary {
    checked(Matrix::from_element(1, 1, C64::from_polar(1.0, phi)))
}

/// `u_jk = exp(2πi·jk/n)/√n`.
pub fn multiport_dft(n: usize) -> ModeUnitary {
    let norm = 1.0 / (n as f64).sqrt();
    checked(Matrix::from_fn(n, n, |j, k| {
        C64::from_polar(norm, 2.0 * PI * ((j * k) % n) as f64 / n as f64)
    }))
}
