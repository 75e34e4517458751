//! Two field modes `a, b` coupled to the symmetric sector of `n` two-level
//! atoms by `H = i(S₁₀B − S₀₁B†)` with `B = f·a†b`.

use crate::corelin::{embed, evolve, real, DensityMatrix, Matrix, Vector, C64, ZERO};
use crate::error::{Error, Result};
use crate::states::dicke_symmetric;

/// Largest atom number handled.
pub const MAX_ATOMS: usize = 12;

/// Amplitudes over `|n_a, n_b⟩ ⊗ |m; n⟩` with `n_a, n_b ∈ 0..=cutoff`,
/// stored row-major with the atomic label fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomFieldState {
    atoms: usize,
    cutoff: usize,
    amps: Vector,
}

impl AtomFieldState {
    fn zeros(atoms: usize, cutoff: usize) -> Self {
        let f = cutoff + 1;
        Self {
            atoms,
            cutoff,
            amps: Vector::from_element(f * f * (atoms + 1), ZERO),
        }
    }

    fn index(&self, na: usize, nb: usize, m: usize) -> usize {
        let f = self.cutoff + 1;
        (na * f + nb) * (self.atoms + 1) + m
    }

    /// `|n_a, n_b⟩ ⊗ |m; n⟩`.
    pub fn basis(na: usize, nb: usize, m: usize, atoms: usize, cutoff: usize) -> Result<Self> {
        if na > cutoff || nb > cutoff || m > atoms {
            return Err(Error::OutOfRange(format!(
                "|{na}{nb}>|{m};{atoms}> outside cutoff {cutoff}"
            )));
        }
        let mut s = Self::zeros(atoms, cutoff);
        let i = s.index(na, nb, m);
        s.amps[i] = real(1.0);
        Ok(s)
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amps
    }

    pub fn amp(&self, na: usize, nb: usize, m: usize) -> C64 {
        if na > self.cutoff || nb > self.cutoff || m > self.atoms {
            return ZERO;
        }
        self.amps[self.index(na, nb, m)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn max_amp_diff(&self, other: &AtomFieldState) -> Result<f64> {
        if (self.atoms, self.cutoff) != (other.atoms, other.cutoff) {
            return Err(Error::DimensionMismatch("different atom-field spaces".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn fidelity(&self, other: &AtomFieldState) -> Result<f64> {
        if (self.atoms, self.cutoff) != (other.atoms, other.cutoff) {
            return Err(Error::DimensionMismatch("different atom-field spaces".into()));
        }
        Ok(self.amps.dotc(&other.amps).norm_sqr())
    }

    /// `⟨b†b − ½(S₀₀ − S₁₁)⟩ = ⟨b†b + S₁₁⟩ − n/2`, conserved by the Raman
    /// coupling.
    pub fn excitation_integral(&self) -> f64 {
        let f = self.cutoff + 1;
        let mut acc = 0.0;
        for na in 0..f {
            for nb in 0..f {
                for m in 0..=self.atoms {
                    acc += self.amp(na, nb, m).norm_sqr() * (nb + m) as f64;
                }
            }
        }
        acc - self.atoms as f64 / 2.0
    }

    /// The atomic state as a density matrix on `n` qubits, field traced out.
    pub fn atomic_density(&self) -> Result<DensityMatrix> {
        let n = self.atoms;
        let d = 1usize << n;
        let dicke = (0..=n)
            .map(|m| dicke_symmetric(m, n).map(|s| s.amplitudes().clone()))
            .collect::<Result<Vec<_>>>()?;
        let f = self.cutoff + 1;
        let mut rho = Matrix::zeros(d, d);
        for na in 0..f {
            for nb in 0..f {
                let mut v = Vector::from_element(d, ZERO);
                for (m, dm) in dicke.iter().enumerate() {
                    v += dm * self.amp(na, nb, m);
                }
                rho += &v * v.adjoint();
            }
        }
        DensityMatrix::new(rho, vec![2; n])
    }
}

fn check_args(alpha: C64, beta: C64, m: usize, n: usize) -> Result<()> {
    if !(1..=MAX_ATOMS).contains(&n) {
        return Err(Error::OutOfRange(format!("atom number {n} outside 1..={MAX_ATOMS}")));
    }
    if m > n {
        return Err(Error::OutOfRange(format!("m = {m} exceeds n = {n}")));
    }
    let n2 = alpha.norm_sqr() + beta.norm_sqr();
    if (n2 - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized(n2));
    }
    Ok(())
}

fn theta(m: isize, n: usize, f: f64, t: f64) -> f64 {
    if m < 0 || m as usize >= n {
        return 0.0;
    }
    let m = m as f64;
    t * f * ((m + 1.0) * (n as f64 - m)).sqrt()
}

/// Closed-form evolution of `(α|01⟩ + β|10⟩)_ab ⊗ |m; n⟩`.
pub fn raman_closed_form(alpha: C64, beta: C64, m: usize, n: usize, f: f64, t: f64) -> Result<AtomFieldState> {
    check_args(alpha, beta, m, n)?;
    let th = theta(m as isize, n, f, t);
    let thp = theta(m as isize - 1, n, f, t);
    let mut s = AtomFieldState::zeros(n, 1);
    let mut add = |na, nb, mm: usize, c: C64| {
        let i = s.index(na, nb, mm);
        s.amps[i] += c;
    };
    add(0, 1, m, alpha * th.cos());
    if m < n {
        add(1, 0, m + 1, alpha * th.sin());
    }
    if m > 0 {
        add(0, 1, m - 1, -beta * thp.sin());
    }
    add(1, 0, m, beta * thp.cos());
    Ok(s)
}

/// Hamiltonian `i f (S₁₀ a†b − S₀₁ b†a)` on the full space with field
/// occupations `0..=cutoff`.
pub fn raman_hamiltonian(n: usize, f: f64, cutoff: usize) -> Matrix {
    let fd = cutoff + 1;
    let lower = Matrix::from_fn(fd, fd, |r, c| {
        if r + 1 == c {
            real((c as f64).sqrt())
        } else {
            ZERO
        }
    });
    let s01 = Matrix::from_fn(n + 1, n + 1, |r, c| {
        // S₀₁|m;n⟩ = √(m(n−m+1)) |m−1;n⟩
        if r + 1 == c {
            real(((c * (n - c + 1)) as f64).sqrt())
        } else {
            ZERO
        }
    });
    let dims = [fd, fd, n + 1];
    let term = |a: &Matrix, b: &Matrix, s: &Matrix| -> Matrix {
        embed(a, &[0], &dims).expect("mode 0")
            * embed(b, &[1], &dims).expect("mode 1")
            * embed(s, &[2], &dims).expect("atoms")
    };
    let raise = lower.adjoint();
    let fwd = term(&raise, &lower, &s01.adjoint());
    let back = term(&lower, &raise, &s01);
    (fwd - back) * C64::new(0.0, f)
}

/// Matrix-exponential evolution `exp(−iHt)` on the space with one photon
/// per mode at most, which contains every state reachable from the input.
pub fn raman_numeric(alpha: C64, beta: C64, m: usize, n: usize, f: f64, t: f64) -> Result<AtomFieldState> {
    check_args(alpha, beta, m, n)?;
    let mut s = AtomFieldState::basis(0, 1, m, n, 1)?;
    s.amps = s.amps * alpha + AtomFieldState::basis(1, 0, m, n, 1)?.amps * beta;
    let u = evolve(&raman_hamiltonian(n, f, 1), t)?;
    s.amps = u * s.amps;
    Ok(s)
}

/// Samples `⟨I⟩` along `raman_numeric` at `steps + 1` equally spaced times.
pub fn excitation_trajectory(alpha: C64, beta: C64, m: usize, n: usize, f: f64, t: f64, steps: usize) -> Result<Vec<f64>> {
    (0..=steps)
        .map(|k| {
            let tk = t * k as f64 / steps.max(1) as f64;
            raman_numeric(alpha, beta, m, n, f, tk).map(|s| s.excitation_integral())
        })
        .collect()
}

/// Fidelity of the atoms with `|W_n⟩` after the `θ₀ = π/2` pulse from
/// `|01⟩|0; n⟩`.
pub fn atomic_w_fidelity(n: usize, f: f64) -> Result<f64> {
    let t = std::f64::consts::FRAC_PI_2 / (f * (n as f64).sqrt());
    let s = raman_closed_form(real(1.0), ZERO, 0, n, f, t)?;
    let w = crate::states::w_state(n)?;
    Ok(s.atomic_density()?.expectation(w.density().matrix()).re)
}
