//! Photon sources and photonic W states.

use super::{FockVector, DEFAULT_N_MAX};
use crate::corelin::{real, C64, ONE};
use crate::error::{Error, Result};

/// One photon shared over `n` modes.
pub fn photonic_w1(n: usize) -> Result<FockVector> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("W_n(1) needs n >= 2, got {n}")));
    }
    let a = real(1.0 / (n as f64).sqrt());
    FockVector::normalized(
        n,
        DEFAULT_N_MAX.max(1),
        (0..n).map(|k| {
            let mut occ = vec![0; n];
            occ[k] = 1;
            (occ, a)
        }),
    )
}

/// `n` singly occupied ports, one V among H's, over `2n` interleaved modes.
pub fn photonic_wv(n: usize) -> Result<FockVector> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("W_n(V) needs n >= 2, got {n}")));
    }
    let a = real(1.0 / (n as f64).sqrt());
    FockVector::normalized(
        2 * n,
        DEFAULT_N_MAX.max(n),
        (0..n).map(|v| {
            let occ = (0..n)
                .flat_map(|p| if p == v { [0, 1] } else { [1, 0] })
                .collect();
            (occ, a)
        }),
    )
}

/// Single photon in `mode` of a `modes`-mode register.
pub fn sps(modes: usize, mode: usize, n_max: usize) -> Result<FockVector> {
    if mode >= modes {
        return Err(Error::InvalidSubsystems(format!("mode {mode} of {modes}")));
    }
    let mut occ = vec![0; modes];
    occ[mode] = 1;
    FockVector::new(modes, n_max, [(occ, ONE)])
}

pub fn fock(occupations: &[usize], n_max: usize) -> Result<FockVector> {
    FockVector::new(occupations.len(), n_max, [(occupations.to_vec(), ONE)])
}

/// `a|4H⟩ + b|4V⟩ + c|2H2V⟩` over the `[H, V]` modes of one port.
pub fn two_crystal(a: C64, b: C64, c: C64) -> Result<FockVector> {
    let n2 = a.norm_sqr() + b.norm_sqr() + c.norm_sqr();
    if (n2 - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized(n2));
    }
    FockVector::new(
        2,
        DEFAULT_N_MAX,
        [(vec![4, 0], a), (vec![0, 4], b), (vec![2, 2], c)],
    )
}

/// `√(2/3)|GHZ⟩ − √(1/3)|EPR⟩|EPR⟩` over `[a.H, a.V, b.H, b.V]`, with
/// `|GHZ⟩ = (|2H⟩_a|2H⟩_b + |2V⟩_a|2V⟩_b)/√2` and
/// `|EPR⟩ = (a_H† b_V† + a_V† b_H†)/√2`. Each component is a normalized Fock
/// state; the sum is renormalized.
pub fn psi4() -> Result<FockVector> {
    let h = 0.5f64.sqrt();
    let ghz = [(vec![2, 0, 2, 0], h), (vec![0, 2, 0, 2], h)];
    // (a_H† b_V† + a_V† b_H†)² |0⟩ = √2·√2|2002⟩ + 2|1111⟩ + √2·√2|0220⟩
    let third = (1.0f64 / 3.0).sqrt();
    let epr2 = [
        (vec![2, 0, 0, 2], third),
        (vec![1, 1, 1, 1], third),
        (vec![0, 2, 2, 0], third),
    ];
    let (wg, we) = ((2.0f64 / 3.0).sqrt(), -third);
    FockVector::normalized(
        4,
        DEFAULT_N_MAX,
        ghz.into_iter()
            .map(|(o, a)| (o, real(wg * a)))
            .chain(epr2.into_iter().map(|(o, a)| (o, real(we * a)))),
    )
}
