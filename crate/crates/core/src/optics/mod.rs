//! Sparse multimode Fock-space simulator for linear optics.
//!
//! Polarization is modelled as two modes per spatial port, interleaved
//! `(port0-H, port0-V, port1-H, …)`.

mod elements;
pub mod scheme;
pub mod shipped;
mod sources;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corelin::{unitarity_residual, Matrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

pub use elements::{beamsplitter, bs_v, hwp, multiport_dft, pbs, phase, qwp};
pub use scheme::{run_scheme, trigger_search, with_trigger, OpticalScheme, SchemeReport, TriggerPolarization};
pub use sources::{fock, photonic_w1, photonic_wv, psi4, sps, two_crystal};

/// Total-photon truncation used when none is given.
pub const DEFAULT_N_MAX: usize = 6;

/// Amplitudes below this magnitude are dropped after a transformation.
const PRUNE: f64 = 1e-14;

/// Occupation numbers, one per mode.
pub type Occupation = Vec<usize>;

/// Sparse state: occupation tuple → amplitude, keys in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    modes: usize,
    n_max: usize,
    terms: BTreeMap<Occupation, C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FockText {
    modes: usize,
    n_max: usize,
    terms: Vec<TermText>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermText {
    occupations: Vec<usize>,
    re: f64,
    im: f64,
}

impl FockVector {
    /// Builds a state and checks unit norm within `1e-12`. Repeated
    /// occupations are summed.
    pub fn new(
        modes: usize,
        n_max: usize,
        terms: impl IntoIterator<Item = (Occupation, C64)>,
    ) -> Result<Self> {
        let v = Self::raw(modes, n_max, terms)?;
        let n2 = v.norm_sqr();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(n2));
        }
        Ok(v)
    }

    /// Like [`FockVector::new`] but rescales to unit norm.
    pub fn normalized(
        modes: usize,
        n_max: usize,
        terms: impl IntoIterator<Item = (Occupation, C64)>,
    ) -> Result<Self> {
        let mut v = Self::raw(modes, n_max, terms)?;
        let n2 = v.norm_sqr();
        if n2 < 1e-300 {
            return Err(Error::NotNormalized(n2));
        }
        let s = 1.0 / n2.sqrt();
        v.terms.values_mut().for_each(|a| *a *= s);
        Ok(v)
    }

    fn raw(
        modes: usize,
        n_max: usize,
        terms: impl IntoIterator<Item = (Occupation, C64)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Occupation, C64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != modes {
                return Err(Error::DimensionMismatch(format!(
                    "occupation {occ:?} does not have {modes} modes"
                )));
            }
            let total: usize = occ.iter().sum();
            if total > n_max {
                return Err(Error::Truncation { total, n_max });
            }
            *map.entry(occ).or_insert(ZERO) += amp;
        }
        map.retain(|_, a| a.norm() > 0.0);
        Ok(Self {
            modes,
            n_max,
            terms: map,
        })
    }

    pub fn vacuum(modes: usize, n_max: usize) -> Self {
        Self {
            modes,
            n_max,
            terms: BTreeMap::from([(vec![0; modes], ONE)]),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn amplitude(&self, occ: &[usize]) -> C64 {
        self.terms.get(occ).copied().unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Raises the truncation; fails if the state already exceeds `n_max`.
    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        if let Some(total) = self.terms.keys().map(|o| o.iter().sum()).filter(|&t| t > n_max).max()
        {
            return Err(Error::Truncation { total, n_max });
        }
        self.n_max = n_max;
        Ok(self)
    }

    /// Probability of each total photon number.
    pub fn photon_distribution(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (occ, a) in &self.terms {
            *out.entry(occ.iter().sum()).or_insert(0.0) += a.norm_sqr();
        }
        out
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        if self.modes != other.modes {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} modes",
                self.modes, other.modes
            )));
        }
        Ok(self
            .terms
            .iter()
            .filter_map(|(o, a)| other.terms.get(o).map(|b| a.conj() * b))
            .sum())
    }

    pub fn fidelity(&self, other: &FockVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Places this state's modes at `positions` of a `total`-mode register,
    /// with every other mode empty.
    pub fn embed(&self, total: usize, positions: &[usize]) -> Result<FockVector> {
        check_modes(positions, total)?;
        if positions.len() != self.modes {
            return Err(Error::DimensionMismatch(format!(
                "{} positions for a {}-mode state",
                positions.len(),
                self.modes
            )));
        }
        let terms = self.terms.iter().map(|(occ, &a)| {
            let mut full = vec![0; total];
            for (&p, &n) in positions.iter().zip(occ) {
                full[p] = n;
            }
            (full, a)
        });
        FockVector::raw(total, self.n_max, terms)
    }

    /// Product state on the concatenated mode list `self ⊕ other`.
    pub fn tensor(&self, other: &FockVector) -> Result<FockVector> {
        let n_max = self.n_max.max(other.n_max);
        let terms = self.terms.iter().flat_map(|(o1, a1)| {
            other.terms.iter().map(move |(o2, a2)| {
                let mut occ = o1.clone();
                occ.extend_from_slice(o2);
                (occ, a1 * a2)
            })
        });
        FockVector::raw(self.modes + other.modes, n_max, terms)
    }

    /// Deterministic JSON text: keys in lexicographic occupation order and
    /// shortest round-trip float formatting.
    pub fn to_canonical_text(&self) -> String {
        let text = FockText {
            modes: self.modes,
            n_max: self.n_max,
            terms: self
                .terms
                .iter()
                .map(|(o, a)| TermText {
                    occupations: o.clone(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        };
        serde_json::to_string(&text).expect("plain data serializes")
    }

    pub fn from_canonical_text(s: &str) -> Result<FockVector> {
        let text: FockText = serde_json::from_str(s)
            .map_err(|e| Error::InvalidScheme(format!("Fock state text: {e}")))?;
        FockVector::new(
            text.modes,
            text.n_max,
            text.terms
                .into_iter()
                .map(|t| (t.occupations, C64::new(t.re, t.im))),
        )
    }
}

fn check_modes(modes: &[usize], total: usize) -> Result<()> {
    let mut seen = vec![false; total];
    for &m in modes {
        if m >= total || std::mem::replace(&mut seen[m], true) {
            return Err(Error::InvalidSubsystems(format!(
                "mode list {modes:?} is not distinct within 0..{total}"
            )));
        }
    }
    Ok(())
}

/// Square unitary acting on an ordered subset of modes.
#[derive(Clone, Debug)]
pub struct ModeUnitary {
    matrix: Matrix,
}

impl ModeUnitary {
    /// Checks unitarity within `1e-10`.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "mode unitary must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = unitarity_residual(&matrix);
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: Matrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Applies `a_j† ↦ Σ_k u_kj a_k†` for the listed `modes` (local index `j`
/// of `u` acts on `modes[j]`).
pub fn apply_mode_unitary(
    state: &FockVector,
    u: &ModeUnitary,
    modes: &[usize],
) -> Result<FockVector> {
    check_modes(modes, state.modes)?;
    let k = modes.len();
    if u.dim() != k {
        return Err(Error::DimensionMismatch(format!(
            "{}-mode unitary applied to {k} modes",
            u.dim()
        )));
    }
    let m = u.matrix();
    let mut out: BTreeMap<Occupation, C64> = BTreeMap::new();
    for (occ, &amp) in &state.terms {
        // expand Π_j (Σ_k u_kj a_k†)^{n_j} as a polynomial in the a_k†
        let mut poly: HashMap<Vec<usize>, C64> = HashMap::from([(vec![0; k], ONE)]);
        let mut in_fact = 1.0;
        for (j, &mode) in modes.iter().enumerate() {
            let nj = occ[mode];
            in_fact *= factorial(nj);
            for _ in 0..nj {
                let mut next: HashMap<Vec<usize>, C64> = HashMap::with_capacity(poly.len() * k);
                for (mono, c) in &poly {
                    for row in 0..k {
                        let coef = m[(row, j)];
                        if coef == ZERO {
                            continue;
                        }
                        let mut mono2 = mono.clone();
                        mono2[row] += 1;
                        *next.entry(mono2).or_insert(ZERO) += c * coef;
                    }
                }
                poly = next;
            }
        }
        for (mono, c) in poly {
            let out_fact: f64 = mono.iter().map(|&x| factorial(x)).product();
            let mut full = occ.clone();
            for (&mode, &n) in modes.iter().zip(&mono) {
                full[mode] = n;
            }
            let total: usize = full.iter().sum();
            if total > state.n_max {
                return Err(Error::Truncation {
                    total,
                    n_max: state.n_max,
                });
            }
            *out.entry(full).or_insert(ZERO) += amp * c * (out_fact / in_fact).sqrt();
        }
    }
    out.retain(|_, a| a.norm() > PRUNE);
    Ok(FockVector {
        modes: state.modes,
        n_max: state.n_max,
        terms: out,
    })
}

/// Photon-count requirement on the total occupation of a group of modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Exactly(usize),
    AtLeast(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub modes: Vec<usize>,
    pub count: Count,
}

impl Condition {
    fn holds(&self, occ: &[usize]) -> bool {
        let n: usize = self.modes.iter().map(|&m| occ[m]).sum();
        match self.count {
            Count::Exactly(k) => n == k,
            Count::AtLeast(k) => n >= k,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Postselection {
    /// Renormalized state; `None` when no term matches.
    pub conditional: Option<FockVector>,
    pub probability: f64,
}

/// Keeps the terms satisfying every condition.
pub fn postselect(state: &FockVector, pattern: &[Condition]) -> Result<Postselection> {
    if pattern.is_empty() {
        return Err(Error::InvalidScheme("post-selection pattern is empty".into()));
    }
    for c in pattern {
        if let Some(&m) = c.modes.iter().find(|&&m| m >= state.modes) {
            return Err(Error::InvalidSubsystems(format!(
                "post-selection references mode {m} of {}",
                state.modes
            )));
        }
    }
    let kept: Vec<(Occupation, C64)> = state
        .terms
        .iter()
        .filter(|(o, _)| pattern.iter().all(|c| c.holds(o)))
        .map(|(o, &a)| (o.clone(), a))
        .collect();
    let probability: f64 = kept.iter().map(|(_, a)| a.norm_sqr()).sum();
    let conditional = if probability > 0.0 {
        Some(FockVector::normalized(state.modes, state.n_max, kept)?)
    } else {
        None
    };
    Ok(Postselection {
        conditional,
        probability,
    })
}

/// `⟨t|ρ_S|t⟩` where `ρ_S` is the reduction of `state` to `target_modes`
/// and `target` is a state over exactly those modes, in that order.
pub fn subset_fidelity(state: &FockVector, target: &FockVector, target_modes: &[usize]) -> Result<f64> {
    check_modes(target_modes, state.modes)?;
    if target.modes != target_modes.len() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} modes, {} listed",
            target.modes,
            target_modes.len()
        )));
    }
    let env: Vec<usize> = (0..state.modes).filter(|m| !target_modes.contains(m)).collect();
    // group by environment occupation: ρ_S = Σ_e |ψ_e⟩⟨ψ_e|
    let mut overlaps: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
    for (occ, a) in &state.terms {
        let sub: Vec<usize> = target_modes.iter().map(|&m| occ[m]).collect();
        let t = target.amplitude(&sub);
        if t == ZERO {
            continue;
        }
        let key: Vec<usize> = env.iter().map(|&m| occ[m]).collect();
        *overlaps.entry(key).or_insert(ZERO) += t.conj() * a;
    }
    Ok(overlaps.values().map(|z| z.norm_sqr()).sum())
}

fn lower(occ: &[usize], k: usize) -> Option<(Occupation, f64)> {
    (occ[k] > 0).then(|| {
        let mut o = occ.to_vec();
        o[k] -= 1;
        (o, (occ[k] as f64).sqrt())
    })
}

fn raise(occ: &[usize], k: usize) -> (Occupation, f64) {
    let mut o = occ.to_vec();
    o[k] += 1;
    let f = (o[k] as f64).sqrt();
    (o, f)
}

/// Low-order moments of a state.
#[derive(Clone, Debug)]
pub struct ModeStatistics {
    /// `⟨a_k⟩`.
    pub mean_field: Vec<C64>,
    /// `⟨a_k† a_m⟩`.
    pub correlation: Matrix,
    /// `⟨a_k a_m⟩`.
    pub pair: Matrix,
    /// `⟨n_k n_m⟩`; the diagonal is `⟨n_k²⟩`.
    pub coincidence: Vec<Vec<f64>>,
    /// `(⟨Δn_k²⟩ − ⟨n_k⟩)/⟨n_k⟩`, undefined for an empty mode.
    pub mandel: Vec<Option<f64>>,
}

pub fn mode_statistics(state: &FockVector) -> ModeStatistics {
    let m = state.modes;
    let mut mean_field = vec![ZERO; m];
    let mut correlation = Matrix::zeros(m, m);
    let mut pair = Matrix::zeros(m, m);
    let mut coincidence = vec![vec![0.0; m]; m];
    for (occ, &a) in &state.terms {
        let p = a.norm_sqr();
        for k in 0..m {
            if let Some((o, f)) = lower(occ, k) {
                mean_field[k] += state.amplitude(&o).conj() * a * f;
            }
            for q in 0..m {
                coincidence[k][q] += p * (occ[k] * occ[q]) as f64;
                if let Some((o1, f1)) = lower(occ, q) {
                    let (o2, f2) = raise(&o1, k);
                    correlation[(k, q)] += state.amplitude(&o2).conj() * a * (f1 * f2);
                    if let Some((o2, f2)) = lower(&o1, k) {
                        pair[(k, q)] += state.amplitude(&o2).conj() * a * (f1 * f2);
                    }
                }
            }
        }
    }
    let mandel = (0..m)
        .map(|k| {
            let n = correlation[(k, k)].re;
            (n > 1e-15).then(|| (coincidence[k][k] - n * n - n) / n)
        })
        .collect();
    ModeStatistics {
        mean_field,
        correlation,
        pair,
        coincidence,
        mandel,
    }
}

/// Off-diagonal photon-count correlations of `W_n(1)` compared with the
/// moment `⟨n_k n_m⟩ = 1/n` as usually listed (true only for `k = m`).
#[derive(Clone, Copy, Debug)]
pub struct AntiCorrelationReport {
    pub n: usize,
    /// `1/n`.
    pub listed_coincidence: f64,
    /// `⟨n_k⟩⟨n_m⟩ = 1/n²`.
    pub product_of_means: f64,
    /// Whether `listed_coincidence < product_of_means`, as the comparison
    /// is usually phrased.
    pub listed_comparison_holds: bool,
    /// Computed `⟨n_k n_m⟩` for `k ≠ m`.
    pub offdiagonal_coincidence: f64,
    /// Computed `⟨n_k²⟩`.
    pub diagonal_coincidence: f64,
    pub anticorrelated: bool,
}

pub fn anticorrelation_report(n: usize) -> Result<AntiCorrelationReport> {
    let stats = mode_statistics(&photonic_w1(n)?);
    let nf = n as f64;
    let listed = 1.0 / nf;
    let product = stats.correlation[(0, 0)].re * stats.correlation[(1, 1)].re;
    let off = stats.coincidence[0][1];
    Ok(AntiCorrelationReport {
        n,
        listed_coincidence: listed,
        product_of_means: product,
        listed_comparison_holds: listed < product,
        offdiagonal_coincidence: off,
        diagonal_coincidence: stats.coincidence[0][0],
        anticorrelated: off < product,
    })
}
