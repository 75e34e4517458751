//! Key distribution and secret sharing over a shared `|W₃⟩`.
//!
//! Outcome labels: `z = +1 ↔ |0⟩`, `x = ±1 ↔ (|0⟩ ± |1⟩)/√2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corelin::{binary_entropy, shannon_entropy, real, StateVector, Vector, C64, ZERO};
use crate::error::{Error, Result};
use crate::states::w_state;

/// Reference figures for the two-party EPR protocol: overall success
/// probability and qubits per key bit.
pub const E91_SUCCESS: f64 = 2.0 / 9.0;
pub const E91_QUBITS_PER_BIT: f64 = 9.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Z,
}

/// One party's measurement eigenvector for outcome `+1` (`plus`) or `−1`.
fn eigvec(b: Basis, plus: bool) -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match (b, plus) {
        (Basis::Z, true) => [real(1.0), ZERO],
        (Basis::Z, false) => [ZERO, real(1.0)],
        (Basis::X, true) => [real(h), real(h)],
        (Basis::X, false) => [real(h), real(-h)],
    }
}

/// Born probabilities of the eight joint outcomes of a three-qubit state.
/// Outcome index bit `2 − k` set means party `k` saw `−1`.
pub fn joint_probabilities(psi: &StateVector, bases: [Basis; 3]) -> Result<[f64; 8]> {
    if psi.dims() != [2, 2, 2] {
        return Err(Error::DimensionMismatch("three qubits required".into()));
    }
    let mut out = [0.0; 8];
    for (o, p) in out.iter_mut().enumerate() {
        let vs: Vec<[C64; 2]> = (0..3)
            .map(|k| eigvec(bases[k], o >> (2 - k) & 1 == 0))
            .collect();
        let b = Vector::from_fn(8, |i, _| {
            vs[0][i >> 2 & 1] * vs[1][i >> 1 & 1] * vs[2][i & 1]
        });
        *p = b.dotc(psi.amplitudes()).norm_sqr();
    }
    Ok(out)
}

fn outcome_of(o: usize, k: usize) -> i8 {
    if o >> (2 - k) & 1 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Qkd,
    Qss,
}

/// One protocol round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Round {
    pub bases: [Basis; 3],
    pub outcomes: [i8; 3],
    pub accepted: bool,
    /// Key bit per party (`None` for parties that hold none this round).
    pub key: [Option<i8>; 3],
}

/// Summary fields in a fixed serialization order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptSummary {
    pub rounds: u64,
    pub accepted: u64,
    pub success_rate: f64,
    pub stderr: f64,
    pub qubits_per_key_bit: Option<f64>,
    pub seed: u64,
    pub protocol: Protocol,
    pub exact_success_rate: f64,
    pub qubits_consumed: u64,
    /// Accepted rounds whose key bits disagree (QKD) or whose
    /// reconstruction is wrong (QSS).
    pub errors: u64,
    pub e91_success: f64,
    pub e91_qubits_per_bit: f64,
}

#[derive(Clone, Debug)]
pub struct ProtocolTranscript {
    pub summary: TranscriptSummary,
    pub rounds: Vec<Round>,
}

impl ProtocolTranscript {
    /// Empirical rate within `k` standard errors of the exact rate.
    pub fn within_sigma(&self, k: f64) -> bool {
        let s = &self.summary;
        let p = s.exact_success_rate;
        (s.success_rate - p).abs() <= k * (p * (1.0 - p) / s.rounds as f64).sqrt()
    }
}

fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

fn sample(probs: &[f64; 8], u: f64) -> usize {
    let mut acc = 0.0;
    for (o, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return o;
        }
    }
    // rounding: last outcome with nonzero weight
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(7)
}

type Judge = fn(&[Basis; 3], &[i8; 3]) -> (bool, [Option<i8>; 3], bool);

/// Exactly one `z` measurer who saw `+1`; the two `x` outcomes are the key.
fn judge_qkd(bases: &[Basis; 3], out: &[i8; 3]) -> (bool, [Option<i8>; 3], bool) {
    let zs: Vec<usize> = (0..3).filter(|&k| bases[k] == Basis::Z).collect();
    if zs.len() != 1 || out[zs[0]] != 1 {
        return (false, [None; 3], false);
    }
    let mut key = [None; 3];
    let xs: Vec<usize> = (0..3).filter(|&k| k != zs[0]).collect();
    for &k in &xs {
        key[k] = Some(out[k]);
    }
    (true, key, out[xs[0]] != out[xs[1]])
}

/// All three measure `z`. Bob and Claire infer Alice's outcome: opposite
/// outcomes mean `+1`, equal outcomes mean `−1`.
fn judge_qss(bases: &[Basis; 3], out: &[i8; 3]) -> (bool, [Option<i8>; 3], bool) {
    if bases.iter().any(|&b| b != Basis::Z) {
        return (false, [None; 3], false);
    }
    let inferred = if out[1] != out[2] { 1 } else { -1 };
    (true, [Some(out[0]), Some(inferred), Some(inferred)], inferred != out[0])
}

fn simulate(protocol: Protocol, rounds: u64, seed: u64) -> Result<ProtocolTranscript> {
    if rounds == 0 {
        return Err(Error::OutOfRange("rounds must be >= 1".into()));
    }
    let w = w_state(3)?;
    let mut table = [[0.0; 8]; 8];
    for (pat, row) in table.iter_mut().enumerate() {
        *row = joint_probabilities(&w, pattern(pat))?;
    }
    let judge: Judge = match protocol {
        Protocol::Qkd => judge_qkd,
        Protocol::Qss => judge_qss,
    };
    let records: Vec<(Round, bool)> = (0..rounds)
        .into_par_iter()
        .map(|r| {
            let mut rng = round_rng(seed, r);
            let pat = (0..3).fold(0usize, |acc, _| (acc << 1) | usize::from(rng.random_bool(0.5)));
            let bases = pattern(pat);
            let o = sample(&table[pat], rng.random::<f64>());
            let outcomes = [outcome_of(o, 0), outcome_of(o, 1), outcome_of(o, 2)];
            let (accepted, key, error) = judge(&bases, &outcomes);
            (Round { bases, outcomes, accepted, key }, error)
        })
        .collect();
    let accepted = records.iter().filter(|(r, _)| r.accepted).count() as u64;
    let errors = records.iter().filter(|(_, e)| *e).count() as u64;
    let rate = accepted as f64 / rounds as f64;
    let exact = exact_success_rate(protocol)?;
    let summary = TranscriptSummary {
        rounds,
        accepted,
        success_rate: rate,
        stderr: (rate * (1.0 - rate) / rounds as f64).sqrt(),
        qubits_per_key_bit: (accepted > 0).then(|| 3.0 * rounds as f64 / accepted as f64),
        seed,
        protocol,
        exact_success_rate: exact,
        qubits_consumed: 3 * rounds,
        errors,
        e91_success: E91_SUCCESS,
        e91_qubits_per_bit: E91_QUBITS_PER_BIT,
    };
    Ok(ProtocolTranscript {
        summary,
        rounds: records.into_iter().map(|(r, _)| r).collect(),
    })
}

/// Basis pattern `pat`: bit `2 − k` set means party `k` measures `z`.
fn pattern(pat: usize) -> [Basis; 3] {
    let b = |k: usize| if pat >> (2 - k) & 1 == 1 { Basis::Z } else { Basis::X };
    [b(0), b(1), b(2)]
}

/// Exact per-round acceptance probability by enumeration of basis
/// patterns and Born probabilities.
pub fn exact_success_rate(protocol: Protocol) -> Result<f64> {
    let w = w_state(3)?;
    let judge: Judge = match protocol {
        Protocol::Qkd => judge_qkd,
        Protocol::Qss => judge_qss,
    };
    let mut total = 0.0;
    for pat in 0..8 {
        let bases = pattern(pat);
        let probs = joint_probabilities(&w, bases)?;
        for (o, p) in probs.iter().enumerate() {
            let out = [outcome_of(o, 0), outcome_of(o, 1), outcome_of(o, 2)];
            if judge(&bases, &out).0 {
                total += p / 8.0;
            }
        }
    }
    Ok(total)
}

pub fn qkd_simulate(rounds: u64, seed: u64) -> Result<ProtocolTranscript> {
    simulate(Protocol::Qkd, rounds, seed)
}

pub fn qss_simulate(rounds: u64, seed: u64) -> Result<ProtocolTranscript> {
    simulate(Protocol::Qss, rounds, seed)
}

/// Exhaustive check over the all-`z` outcome distribution: number of
/// outcomes with nonzero probability where the reconstruction is wrong.
pub fn qss_reconstruction_errors() -> Result<usize> {
    let probs = joint_probabilities(&w_state(3)?, [Basis::Z; 3])?;
    Ok((0..8)
        .filter(|&o| probs[o] > 1e-15)
        .filter(|&o| {
            let out = [outcome_of(o, 0), outcome_of(o, 1), outcome_of(o, 2)];
            judge_qss(&[Basis::Z; 3], &out).2
        })
        .count())
}

/// Mutual information (bits) between one party's `z` outcome and Alice's.
pub fn qss_single_party_information() -> Result<f64> {
    let probs = joint_probabilities(&w_state(3)?, [Basis::Z; 3])?;
    // joint distribution of (Alice, Bob)
    let mut joint = [[0.0; 2]; 2];
    for (o, p) in probs.iter().enumerate() {
        joint[o >> 2 & 1][o >> 1 & 1] += p;
    }
    let pa = joint[0][0] + joint[0][1];
    let pb = joint[0][0] + joint[1][0];
    let hj = shannon_entropy(joint.iter().flatten().copied());
    Ok(binary_entropy(pa) + binary_entropy(pb) - hj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_rates() {
        assert!((exact_success_rate(Protocol::Qkd).unwrap() - 0.25).abs() < 1e-15);
        assert!((exact_success_rate(Protocol::Qss).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn z_then_x_branch_is_correlated() {
        let p = joint_probabilities(&w_state(3).unwrap(), [Basis::Z, Basis::X, Basis::X]).unwrap();
        // Alice +1 (|0⟩): Bob and Claire always agree
        assert!(p[0b001] < 1e-15 && p[0b010] < 1e-15);
        assert!((p[0b000] + p[0b011] - 2.0 / 3.0).abs() < 1e-15);
        // Alice −1: four equally likely outcomes
        for o in 0b100..0b1000 {
            assert!((p[o] - 1.0 / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn qkd_statistics() {
        let t = qkd_simulate(20_000, 3).unwrap();
        assert!(t.within_sigma(3.0));
        assert_eq!(t.summary.errors, 0);
        assert_eq!(t.summary.qubits_consumed, 60_000);
        for r in t.rounds.iter().filter(|r| r.accepted) {
            assert_eq!(r.key.iter().filter(|k| k.is_some()).count(), 2);
        }
    }

    #[test]
    fn qss_statistics() {
        let t = qss_simulate(20_000, 3).unwrap();
        assert!(t.within_sigma(3.0));
        assert_eq!(t.summary.errors, 0);
        assert_eq!(qss_reconstruction_errors().unwrap(), 0);
    }

    #[test]
    fn determinism_and_errors() {
        let a = qkd_simulate(500, 11).unwrap();
        let b = qkd_simulate(500, 11).unwrap();
        assert_eq!(a.rounds, b.rounds);
        assert_eq!(a.summary, b.summary);
        assert!(qkd_simulate(0, 1).is_err());
    }

    #[test]
    fn single_party_information() {
        let i = qss_single_party_information().unwrap();
        let expect = 2.0 * binary_entropy(1.0 / 3.0) - 3f64.log2();
        assert!((i - expect).abs() < 1e-12);
    }
}
