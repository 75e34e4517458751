//! Entanglement criteria and measures: reduced W states, partial-transpose
//! spectra, negativity, entanglement entropy, persistency and witnesses.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::corelin::{
    hermitian_eig, max_abs_diff, paulis, real, von_neumann_entropy, DensityMatrix, Matrix,
    StateVector, Tensor, Vector, ZERO,
};
use crate::error::{Error, Result};
use crate::states::{eta_state, ghz_prime, w_state, AmplitudeProfile};

/// Largest register the exhaustive persistency search accepts.
pub const PERSISTENCY_MAX_QUBITS: usize = 5;

/// Two complementary, non-empty sets of subsystems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartitionSpec {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl BipartitionSpec {
    pub fn new(side_a: &[usize], num_subsystems: usize) -> Result<Self> {
        let mut a = side_a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.len() != side_a.len() || a.iter().any(|&k| k >= num_subsystems) {
            return Err(Error::InvalidSubsystems(format!(
                "{side_a:?} is not a subset of 0..{num_subsystems}"
            )));
        }
        let b: Vec<usize> = (0..num_subsystems).filter(|k| !a.contains(k)).collect();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidSubsystems("both sides must be non-empty".into()));
        }
        Ok(Self { side_a: a, side_b: b })
    }

    /// First `s` subsystems against the remaining `n − s`.
    pub fn split(s: usize, n: usize) -> Result<Self> {
        Self::new(&(0..s).collect::<Vec<_>>(), n)
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    fn dims(&self, dims: &[usize]) -> (usize, usize) {
        let da = self.side_a.iter().map(|&k| dims[k]).product();
        let db = self.side_b.iter().map(|&k| dims[k]).product();
        (da, db)
    }
}

/// Reduced state of any `s` qubits of `|W_n⟩`:
/// `(s/n)|W_s⟩⟨W_s| + (1 − s/n)|0…0⟩⟨0…0|`.
pub fn reduced_w(n: usize, s: usize) -> Result<DensityMatrix> {
    if s == 0 || s > n {
        return Err(Error::OutOfRange(format!("need 1 <= s <= n, got s={s}, n={n}")));
    }
    let ws = if s == 1 {
        eta_state(&AmplitudeProfile::real(&[1.0])?)?
    } else {
        w_state(s)?
    };
    let vac = StateVector::basis(0, vec![2; s])?;
    let p = s as f64 / n as f64;
    let mut m = ws.density().into_matrix() * real(p);
    m += vac.density().into_matrix() * real(1.0 - p);
    DensityMatrix::new(m, vec![2; s])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PptVerdict {
    /// A negative partial-transpose eigenvalue certifies entanglement.
    NptEntangled,
    /// PPT in a 2×2 or 2×3 space, where PPT is sufficient for separability.
    Separable,
    /// PPT in higher dimensions.
    Inconclusive,
}

impl fmt::Display for PptVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PptVerdict::NptEntangled => "NPT-entangled",
            PptVerdict::Separable => "separable",
            PptVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PptReport {
    /// Ascending spectrum of the partial transpose over side A.
    pub spectrum: Vec<f64>,
    pub verdict: PptVerdict,
}

impl PptReport {
    pub fn min(&self) -> f64 {
        self.spectrum[0]
    }
}

pub fn ppt_spectrum(rho: &DensityMatrix, part: &BipartitionSpec) -> Result<PptReport> {
    ppt_spectrum_with_tol(rho, part, 1e-10)
}

pub fn ppt_spectrum_with_tol(
    rho: &DensityMatrix,
    part: &BipartitionSpec,
    tol: f64,
) -> Result<PptReport> {
    let n = rho.dims().len();
    if part.side_a.iter().chain(&part.side_b).any(|&k| k >= n)
        || part.side_a.len() + part.side_b.len() != n
    {
        return Err(Error::InvalidSubsystems("bipartition does not match the state".into()));
    }
    let pt = rho.partial_transpose(&part.side_a)?;
    let spectrum = hermitian_eig(&pt)?.values;
    let (da, db) = part.dims(rho.dims());
    let small = matches!((da.min(db), da.max(db)), (2, 2) | (2, 3));
    let verdict = if spectrum[0] < -tol {
        PptVerdict::NptEntangled
    } else if small {
        PptVerdict::Separable
    } else {
        PptVerdict::Inconclusive
    };
    Ok(PptReport { spectrum, verdict })
}

/// Closed-form partial-transpose spectrum of the two-qubit reduction of
/// `|W_n⟩`, ascending.
pub fn ppt_closed_form_w(n: usize) -> Result<[f64; 4]> {
    if n < 3 {
        return Err(Error::OutOfRange(format!("closed form needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    let m = nf - 2.0;
    let root = (1.0 + 4.0 / (m * m)).sqrt();
    let lo = m * (1.0 - root) / (2.0 * nf);
    let hi = m * (1.0 + root) / (2.0 * nf);
    let mut out = [lo, 1.0 / nf, 1.0 / nf, hi];
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Sum of the magnitudes of the negative partial-transpose eigenvalues.
pub fn negativity(rho: &DensityMatrix, part: &BipartitionSpec) -> Result<f64> {
    let r = ppt_spectrum(rho, part)?;
    Ok(r.spectrum.iter().map(|&l| (l.abs() - l) / 2.0).sum())
}

/// Entanglement entropy `S(ρ_A)` of a pure state. Fails if `S(ρ_A)` and
/// `S(ρ_B)` disagree beyond `1e-10`.
pub fn ent_entropy(psi: &StateVector, part: &BipartitionSpec) -> Result<f64> {
    let n2 = psi.norm_sqr();
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n2));
    }
    let rho = psi.density();
    let sa = von_neumann_entropy(&rho.partial_trace(part.side_a())?)?;
    let sb = von_neumann_entropy(&rho.partial_trace(part.side_b())?)?;
    if (sa - sb).abs() > 1e-10 {
        return Err(Error::Decomposition(format!(
            "subsystem entropies disagree: {sa} vs {sb}"
        )));
    }
    Ok(sa)
}

/// Project `qubits` of a qubit register onto the computational-basis
/// `outcome`; returns the unnormalized state of the remaining qubits.
fn project_qubits(psi: &StateVector, qubits: &[usize], outcome: usize) -> Vector {
    let n = psi.num_subsystems();
    let rest: Vec<usize> = (0..n).filter(|k| !qubits.contains(k)).collect();
    let mut out = Vector::from_element(1 << rest.len(), ZERO);
    for (i, amp) in psi.amplitudes().iter().enumerate() {
        let bit = |k: usize| (i >> (n - 1 - k)) & 1;
        let matches = qubits
            .iter()
            .enumerate()
            .all(|(j, &q)| bit(q) == (outcome >> (qubits.len() - 1 - j)) & 1);
        if matches {
            let r = rest.iter().fold(0, |acc, &k| (acc << 1) | bit(k));
            out[r] += amp;
        }
    }
    out
}

/// A pure qubit state is fully product iff every bipartition has Schmidt
/// rank one, i.e. every reduced state is pure.
fn is_fully_product(v: &Vector, tol: f64) -> Result<bool> {
    let n = v.len().trailing_zeros() as usize;
    if n <= 1 {
        return Ok(true);
    }
    let psi = StateVector::normalized(v.iter().copied().collect(), vec![2; n])?;
    let rho = psi.density();
    // subsets containing qubit 0 enumerate each bipartition once
    for mask in 1..(1usize << n) - 1 {
        if mask & 1 == 0 {
            continue;
        }
        let side: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        if (rho.partial_trace(&side)?.purity() - 1.0).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..1usize << n)
        .filter(|mask| mask.count_ones() as usize == m)
        .map(|mask| (0..n).filter(|k| mask >> k & 1 == 1).collect())
        .collect()
}

/// Persistency of entanglement: the least `M` such that measuring any `M`
/// qubits in the computational basis leaves a fully product state for
/// every outcome with nonzero probability.
pub fn persistency(psi: &StateVector) -> Result<usize> {
    let n = psi.num_subsystems();
    if psi.dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch("persistency needs a qubit register".into()));
    }
    if n > PERSISTENCY_MAX_QUBITS {
        return Err(Error::OutOfRange(format!(
            "exhaustive persistency search is limited to {PERSISTENCY_MAX_QUBITS} qubits"
        )));
    }
    for m in 0..=n {
        let choices = subsets(n, m);
        let ok = choices
            .par_iter()
            .map(|qubits| -> Result<bool> {
                for outcome in 0..1usize << m {
                    let rest = project_qubits(psi, qubits, outcome);
                    if rest.norm_squared() < 1e-14 {
                        continue;
                    }
                    if !is_fully_product(&rest, 1e-10)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            })
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .all(|b| b);
        if ok {
            return Ok(m);
        }
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessLabel {
    W1,
    W2,
}

/// Three-qubit witness operator.
#[derive(Clone, Debug)]
pub struct WitnessOperator {
    pub label: WitnessLabel,
    pub matrix: Matrix,
}

/// `⅔·I − |W⟩⟨W|`: non-negative on biseparable states.
pub fn witness_w1() -> WitnessOperator {
    let w = w_state(3).expect("W₃");
    WitnessOperator {
        label: WitnessLabel::W1,
        matrix: Matrix::identity(8, 8) * real(2.0 / 3.0) - w.density().matrix(),
    }
}

/// `½·I − |GHZ'⟩⟨GHZ'|`.
pub fn witness_w2() -> WitnessOperator {
    WitnessOperator {
        label: WitnessLabel::W2,
        matrix: Matrix::identity(8, 8) * real(0.5) - ghz_prime().density().matrix(),
    }
}

/// `Tr[w ρ]` for a three-qubit density matrix.
pub fn witness_value(w: &WitnessOperator, rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != [2, 2, 2] {
        return Err(Error::DimensionMismatch(format!(
            "witness acts on three qubits, state has dims {:?}",
            rho.dims()
        )));
    }
    Ok(rho.expectation(&w.matrix).re)
}

/// The W₁ value on the two-particle reduction of W₃: the figure usually
/// quoted alongside the witness, and the value obtained by embedding the
/// reduction as `ρ_W(12) ⊗ |0⟩⟨0|`.
#[derive(Clone, Copy, Debug)]
pub struct ReducedWitnessComparison {
    pub quoted: f64,
    pub embedded: f64,
}

pub fn w1_on_reduced_w() -> Result<ReducedWitnessComparison> {
    let rho12 = reduced_w(3, 2)?;
    let vac = StateVector::basis(0, vec![2])?.density();
    let embedded = witness_value(&witness_w1(), &rho12.tensor(&vac))?;
    Ok(ReducedWitnessComparison {
        quoted: 1.0 / 9.0,
        embedded,
    })
}

/// Real coefficient on a three-letter Pauli word such as `"ZIX"`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub word: String,
}

impl PauliTerm {
    fn new(coefficient: f64, word: &str) -> Self {
        Self {
            coefficient,
            word: word.to_string(),
        }
    }

    pub fn matrix(&self) -> Matrix {
        let p = paulis();
        let pick = |c: char| match c {
            'I' => p[0].clone(),
            'X' => p[1].clone(),
            'Y' => p[2].clone(),
            'Z' => p[3].clone(),
            _ => unreachable!("Pauli words are built internally"),
        };
        let mut chars = self.word.chars();
        let first = pick(chars.next().expect("non-empty word"));
        chars.fold(first, |acc, c| acc.tensor(&pick(c))) * real(self.coefficient)
    }
}

/// Pauli-basis form of the W₁ witness and its agreement with the projector
/// form.
#[derive(Clone, Debug)]
pub struct PauliExpansion {
    /// Explicit terms listed ahead of the four cubes.
    pub leading: Vec<PauliTerm>,
    /// Every term after expanding `(1 + σz ± σx)^⊗3` and `(1 + σz ± σy)^⊗3`,
    /// collected by word, zero coefficients dropped, sorted by word.
    pub expanded: Vec<PauliTerm>,
    /// `max |Σ terms − (⅔I − |W⟩⟨W|)|` elementwise.
    pub deviation: f64,
}

impl PauliExpansion {
    pub fn matrix(&self) -> Matrix {
        self.expanded
            .iter()
            .fold(Matrix::zeros(8, 8), |acc, t| acc + t.matrix())
    }
}

pub fn witness_w1_pauli_expansion() -> PauliExpansion {
    let k = 1.0 / 24.0;
    let mut leading = vec![PauliTerm::new(17.0 * k, "III"), PauliTerm::new(7.0 * k, "ZZZ")];
    for w in ["ZII", "IZI", "IIZ"] {
        leading.push(PauliTerm::new(3.0 * k, w));
    }
    for w in ["ZZI", "ZIZ", "IZZ"] {
        leading.push(PauliTerm::new(5.0 * k, w));
    }

    let mut collected: BTreeMap<String, f64> = BTreeMap::new();
    for t in &leading {
        *collected.entry(t.word.clone()).or_default() += t.coefficient;
    }
    // −(1 + σz + s·σ_p)^⊗3 / 24
    for (p, s) in [('X', 1.0), ('X', -1.0), ('Y', 1.0), ('Y', -1.0)] {
        let factor = [('I', 1.0), ('Z', 1.0), (p, s)];
        for a in factor {
            for b in factor {
                for c in factor {
                    let word: String = [a.0, b.0, c.0].iter().collect();
                    *collected.entry(word).or_default() -= k * a.1 * b.1 * c.1;
                }
            }
        }
    }
    let expanded: Vec<PauliTerm> = collected
        .into_iter()
        .filter(|(_, c)| c.abs() > 1e-15)
        .map(|(w, c)| PauliTerm::new(c, &w))
        .collect();

    let mut out = PauliExpansion {
        leading,
        expanded,
        deviation: 0.0,
    };
    out.deviation = max_abs_diff(&out.matrix(), &witness_w1().matrix);
    out
}
