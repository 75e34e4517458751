//! Verification suites: each check compares a computed quantity with a
//! published or independently derived value.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corelin::{
    binary_entropy, fidelity, kron, max_abs_diff, real, trace_distance, unitarity_residual, Matrix, StateVector, Tolerances, C64, ZERO,
};
use crate::dynamics::{
    df_check, ion_w_search, lindblad_trajectory, raman_closed_form, raman_numeric,
    PulseOrder, RaisingConvention,
};
use crate::entanglement::{
    ent_entropy, negativity, persistency, ppt_closed_form_w, ppt_spectrum, reduced_w, w1_on_reduced_w,
    witness_value, witness_w1, witness_w1_pauli_expansion, witness_w2, BipartitionSpec, PptVerdict,
};
use crate::error::{Error, Result};
use crate::optics::{
    anticorrelation_report, mode_statistics, photonic_w1, run_scheme, shipped, trigger_search, OpticalScheme,
};
use crate::protocols::{
    bell_like_basis, distill_w, exact_success_rate, pairing_search, qkd_simulate, qss_reconstruction_errors,
    qss_simulate, qss_single_party_information, teleport, w_channel, w_channel_unitary, wiring_search, Channel,
    Pairing, Protocol, Recovery, Wiring,
};
use crate::report::{Check, Environment, Relation, SuiteReport};
use crate::states::{
    collective_s, df_states, dicke_numbers, eta_state, ghz_prime, ghz_state, psi_minus, psi_plus, w_state,
    AmplitudeProfile,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteName {
    States,
    Entanglement,
    Optics,
    Dynamics,
    Protocols,
    All,
}

impl SuiteName {
    pub const MODULES: [SuiteName; 5] = [
        SuiteName::States,
        SuiteName::Entanglement,
        SuiteName::Optics,
        SuiteName::Dynamics,
        SuiteName::Protocols,
    ];

    fn stream(self) -> u64 {
        match self {
            SuiteName::States => 1,
            SuiteName::Entanglement => 2,
            SuiteName::Optics => 3,
            SuiteName::Dynamics => 4,
            SuiteName::Protocols => 5,
            SuiteName::All => 0,
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SuiteName::States => "states",
            SuiteName::Entanglement => "entanglement",
            SuiteName::Optics => "optics",
            SuiteName::Dynamics => "dynamics",
            SuiteName::Protocols => "protocols",
            SuiteName::All => "all",
        })
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "states" => SuiteName::States,
            "entanglement" => SuiteName::Entanglement,
            "optics" => SuiteName::Optics,
            "dynamics" => SuiteName::Dynamics,
            "protocols" => SuiteName::Protocols,
            "all" => SuiteName::All,
            other => {
                return Err(Error::OutOfRange(format!(
                    "unknown suite `{other}` (expected states, entanglement, optics, dynamics, protocols or all)"
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Monte-Carlo rounds for the key-distribution checks.
    pub rounds: u64,
    pub truncation: usize,
    pub tol: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            rounds: 100_000,
            truncation: crate::optics::DEFAULT_N_MAX,
            tol: Tolerances::default(),
        }
    }
}

impl VerifyOptions {
    fn environment(&self) -> Environment {
        Environment {
            seed: self.seed,
            rounds: self.rounds,
            truncation: self.truncation,
            tol_structural: self.tol.structural,
            tol_assert: self.tol.equality,
        }
    }

    fn rng(&self, suite: SuiteName) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(suite.stream());
        rng
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn close(&mut self, id: &str, anchor: &str, expected: f64, observed: f64, tol: f64) -> &mut Check {
        self.push(Check::new(id, anchor, Relation::AbsDiff, expected, observed, tol))
    }

    fn at_most(&mut self, id: &str, anchor: &str, bound: f64, observed: f64) -> &mut Check {
        self.push(Check::new(id, anchor, Relation::AtMost, bound, observed, 0.0))
    }

    fn at_least(&mut self, id: &str, anchor: &str, bound: f64, observed: f64) -> &mut Check {
        self.push(Check::new(id, anchor, Relation::AtLeast, bound, observed, 0.0))
    }

    fn holds(&mut self, id: &str, anchor: &str, cond: bool) -> &mut Check {
        self.close(id, anchor, 1.0, if cond { 1.0 } else { 0.0 }, 0.0)
    }

    fn report(&mut self, id: &str, anchor: &str, expected: f64, observed: f64) -> &mut Check {
        self.push(Check::new(id, anchor, Relation::Report, expected, observed, 0.0))
    }

    fn push(&mut self, c: Check) -> &mut Check {
        self.0.push(c);
        self.0.last_mut().expect("just pushed")
    }
}

trait Note {
    fn note(&mut self, s: impl Into<String>);
}

impl Note for Check {
    fn note(&mut self, s: impl Into<String>) {
        self.note = Some(s.into());
    }
}

pub fn run_suite(name: SuiteName, opts: &VerifyOptions) -> Result<SuiteReport> {
    let suites: Vec<SuiteName> = match name {
        SuiteName::All => SuiteName::MODULES.to_vec(),
        s => vec![s],
    };
    let parts = suites
        .par_iter()
        .map(|&s| module_checks(s, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::new(
        &name.to_string(),
        opts.environment(),
        parts.into_iter().flatten().collect(),
    ))
}

fn module_checks(name: SuiteName, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut c = Checks::default();
    let mut rng = opts.rng(name);
    match name {
        SuiteName::States => states_checks(&mut c, opts, &mut rng)?,
        SuiteName::Entanglement => entanglement_checks(&mut c, opts, &mut rng)?,
        SuiteName::Optics => optics_checks(&mut c, opts)?,
        SuiteName::Dynamics => dynamics_checks(&mut c, opts, &mut rng)?,
        SuiteName::Protocols => protocols_checks(&mut c, opts, &mut rng)?,
        SuiteName::All => unreachable!("expanded by run_suite"),
    }
    Ok(c.0)
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_qubit(rng: &mut ChaCha8Rng) -> StateVector {
    StateVector::normalized(vec![random_c64(rng), random_c64(rng)], vec![2]).expect("nonzero draw")
}

/// Random single-excitation profile with zero sum.
fn random_zsa(n: usize, rng: &mut ChaCha8Rng) -> Result<AmplitudeProfile> {
    let mut q: Vec<C64> = (0..n).map(|_| random_c64(rng)).collect();
    let mean = q.iter().sum::<C64>() / real(n as f64);
    for z in &mut q {
        *z -= mean;
    }
    AmplitudeProfile::normalized(q)
}

fn states_checks(c: &mut Checks, opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<()> {
    let tol = opts.tol;
    let rho12 = w_state(3)?.density().partial_trace(&[0, 1])?;
    let vac = StateVector::basis(0, vec![2, 2])?.density();
    let expected = vac.matrix() * real(1.0 / 3.0) + psi_plus().density().matrix() * real(2.0 / 3.0);
    c.close(
        "states.reduced_w12.elementwise",
        "two-qubit reduction of W3 is 1/3|00><00| + 2/3|Psi+><Psi+|",
        0.0,
        max_abs_diff(rho12.matrix(), &expected),
        tol.equality,
    );
    c.close(
        "states.reduced_w12.closed_form",
        "reduction of W_n to s qubits mixes W_s and vacuum with weights s/n",
        0.0,
        max_abs_diff(rho12.matrix(), reduced_w(3, 2)?.matrix()),
        tol.equality,
    );
    for n in 2..=8 {
        let nf = n as f64;
        let dev = match dicke_numbers(&w_state(n)?, tol.equality)? {
            Some((j, l)) => (j - nf / 2.0).abs().max((l - (nf / 2.0 - 1.0)).abs()),
            None => f64::INFINITY,
        };
        c.close(
            &format!("states.dicke.w.n{n}"),
            "W_n is a Dicke state with (j, l) = (n/2, n/2 - 1)",
            0.0,
            dev,
            tol.equality,
        );
    }
    for n in 3..=8 {
        let nf = n as f64;
        let q = random_zsa(n, rng)?;
        let dev = match dicke_numbers(&eta_state(&q)?, tol.equality)? {
            Some((j, l)) => (j - (nf / 2.0 - 1.0)).abs().max((l - (nf / 2.0 - 1.0)).abs()),
            None => f64::INFINITY,
        };
        c.close(
            &format!("states.dicke.zsa.n{n}"),
            "zero-sum-amplitude states have (j, l) = (n/2 - 1, n/2 - 1)",
            0.0,
            dev,
            tol.equality,
        );
    }
    let mut norm_dev: f64 = 0.0;
    for n in 2..=8 {
        norm_dev = norm_dev
            .max((w_state(n)?.norm_sqr() - 1.0).abs())
            .max((ghz_state(n)?.norm_sqr() - 1.0).abs());
    }
    c.close("states.norms", "W_n and GHZ_n are normalized", 0.0, norm_dev, tol.equality);
    Ok(())
}

fn entanglement_checks(c: &mut Checks, opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<()> {
    let tol = opts.tol;
    let split = BipartitionSpec::split(1, 2)?;
    let mut dev: f64 = 0.0;
    let mut all_negative = true;
    let mut shrinking = true;
    let mut prev = f64::INFINITY;
    for n in 3..=50 {
        let report = ppt_spectrum(&reduced_w(n, 2)?, &split)?;
        let closed = ppt_closed_form_w(n)?;
        for (a, b) in report.spectrum.iter().zip(closed) {
            dev = dev.max((a - b).abs());
        }
        all_negative &= report.min() < 0.0;
        shrinking &= report.min().abs() < prev;
        prev = report.min().abs();
    }
    c.close(
        "entanglement.ppt.closed_form",
        "partial-transpose spectrum of the two-qubit reduction of W_n, n = 3..50",
        0.0,
        dev,
        tol.structural,
    );
    c.holds("entanglement.ppt.negative", "minimum eigenvalue negative for every finite n", all_negative);
    c.holds("entanglement.ppt.shrinking", "negativity of the reduction decreases with n", shrinking);
    let far = ppt_closed_form_w(1_000_000)?[0];
    c.holds("entanglement.ppt.n1e6.negative", "entanglement persists at n = 10^6", far < 0.0);
    c.close(
        "entanglement.ppt.n1e6.vanishing",
        "entanglement of the pair vanishes as n grows",
        0.0,
        far,
        1e-9,
    );

    let ghz12 = ghz_state(3)?.density().partial_trace(&[0, 1])?;
    let ghz_ppt = ppt_spectrum(&ghz12, &split)?;
    c.holds(
        "entanglement.ghz12.separable",
        "two-qubit reduction of GHZ is separable",
        ghz_ppt.verdict == PptVerdict::Separable,
    );
    c.close(
        "entanglement.ghz12.negativity",
        "two-qubit reduction of GHZ has zero negativity",
        0.0,
        negativity(&ghz12, &split)?,
        tol.equality,
    );

    let mut ent_dev: f64 = 0.0;
    let mut peaks = true;
    for n in 2..=8 {
        let w = w_state(n)?;
        let mut values = Vec::with_capacity(n);
        for s in 1..n {
            let e = ent_entropy(&w, &BipartitionSpec::split(s, n)?)?;
            ent_dev = ent_dev.max((e - binary_entropy(s as f64 / n as f64)).abs());
            values.push(e);
        }
        if n % 2 == 0 {
            let max = values.iter().copied().fold(f64::MIN, f64::max);
            peaks &= (values[n / 2 - 1] - max).abs() <= tol.structural;
        }
    }
    c.close(
        "entanglement.entropy.binary",
        "entanglement entropy of W_n across s|(n-s) equals H(s/n)",
        0.0,
        ent_dev,
        tol.structural,
    );
    c.holds("entanglement.entropy.peak", "entropy is maximal at s = n/2 for even n", peaks);

    for (id, psi, expected) in [
        ("entanglement.persistency.ghz3", ghz_state(3)?, 1.0),
        ("entanglement.persistency.w3", w_state(3)?, 2.0),
        ("entanglement.persistency.w4", w_state(4)?, 3.0),
    ] {
        c.close(id, "persistency: GHZ3 = 1, W_n = n - 1", expected, persistency(&psi)? as f64, 0.0);
    }

    let w1 = witness_w1();
    c.close(
        "entanglement.witness.w1_on_w",
        "Tr[W1 |W><W|] = -1/3",
        -1.0 / 3.0,
        witness_value(&w1, &w_state(3)?.density())?,
        tol.equality,
    );
    c.close(
        "entanglement.witness.w2_on_ghz_prime",
        "Tr[W2 |GHZ'><GHZ'|] = -1/2",
        -0.5,
        witness_value(&witness_w2(), &ghz_prime().density())?,
        tol.equality,
    );
    let mut min_product = f64::INFINITY;
    for _ in 0..1000 {
        let (a, b, d) = (random_qubit(rng), random_qubit(rng), random_qubit(rng));
        let amps = kron(
            &kron(&Matrix::from_column_slice(2, 1, a.amplitudes().as_slice()), &Matrix::from_column_slice(2, 1, b.amplitudes().as_slice())),
            &Matrix::from_column_slice(2, 1, d.amplitudes().as_slice()),
        );
        let psi = StateVector::qubits(amps.iter().copied().collect())?;
        min_product = min_product.min(witness_value(&w1, &psi.density())?);
    }
    c.at_least(
        "entanglement.witness.w1_products",
        "W1 is nonnegative on product states (1000 random draws)",
        -tol.structural,
        min_product,
    );
    let expansion = witness_w1_pauli_expansion();
    c.report(
        "entanglement.witness.w1_pauli_expansion",
        "local-measurement expansion of W1 reproduces 2/3 I - |W><W|",
        0.0,
        expansion.deviation,
    )
    .note(format!("{} distinct Pauli words after expanding the cubes", expansion.expanded.len()));
    let reduced = w1_on_reduced_w()?;
    c.report(
        "entanglement.witness.w1_on_reduced_w12",
        "W1 on the two-qubit reduction of W3 quoted as 1/9",
        reduced.quoted,
        reduced.embedded,
    )
    .note("observed value embeds the reduction as rho_12 (x) |0><0|");
    Ok(())
}

fn multiport_scheme(n: usize) -> Result<OpticalScheme> {
    let ports: Vec<String> = (1..=n).map(|k| format!("\"p{k}\"")).collect();
    let ports = ports.join(", ");
    OpticalScheme::parse(&format!(
        r#"{{"name": "multiport_w{n}", "modes": [{ports}], "polarized": false,
            "source": {{"kind": "sps", "mode": "p1"}},
            "elements": [{{"type": "dft", "targets": [{ports}]}}],
            "postselect": [{{"modes": [{ports}], "count": 1}}],
            "target_state": {{"kind": "w1", "modes": [{ports}]}}}}"#
    ))
}

fn optics_checks(c: &mut Checks, opts: &VerifyOptions) -> Result<()> {
    let tol = opts.tol;
    let trunc = Some(opts.truncation);
    for n in 2..=6 {
        let r = run_scheme(&multiport_scheme(n)?, trunc)?;
        c.close(
            &format!("optics.multiport.n{n}.probability"),
            "one photon into an n-port multiport yields W_n(1) with probability 1",
            1.0,
            r.probability,
            tol.equality,
        );
        c.close(
            &format!("optics.multiport.n{n}.fidelity"),
            "multiport output is W_n(1)",
            1.0,
            r.fidelity.unwrap_or(0.0),
            tol.equality,
        );
    }
    let run = |text: &str| -> Result<crate::optics::SchemeReport> { run_scheme(&OpticalScheme::parse(text)?, trunc) };

    let r = run(shipped::MULTIPORT_W4)?;
    c.close("optics.scheme.multiport_w4.probability", "multiport W4(1) with probability 1", 1.0, r.probability, tol.equality);
    c.close("optics.scheme.multiport_w4.fidelity", "multiport W4(1) target", 1.0, r.fidelity.unwrap_or(0.0), tol.equality);

    let r = run(shipped::TRITTER_W3V)?;
    c.close(
        "optics.scheme.tritter_w3v.probability",
        "tritter W3(V) probability 1/9",
        1.0 / 9.0,
        r.probability,
        tol.equality,
    )
    .note("DFT tritter convention");
    c.close("optics.scheme.tritter_w3v.fidelity", "tritter output is W3(V)", 1.0, r.fidelity.unwrap_or(0.0), tol.equality);

    let r = run(shipped::FOURPORT_W4V)?;
    c.close(
        "optics.scheme.fourport_w4v.probability",
        "W4(V) from a 4-port with one photon per port, probability 1/16",
        1.0 / 16.0,
        r.probability,
        tol.equality,
    );
    c.close(
        "optics.scheme.fourport_w4v.fidelity",
        "4-port output is W4(V) after local phase correction",
        1.0,
        r.fidelity.unwrap_or(0.0),
        tol.equality,
    )
    .note("phase pi on p2.V and p4.V; without it the output is a zero-sum-amplitude state");

    let psi4 = OpticalScheme::parse(shipped::PSI4_W3V)?;
    let search = trigger_search(&psi4, "t", trunc)?;
    let (best_pol, best) = search
        .iter()
        .max_by(|a, b| a.1.fidelity.unwrap_or(0.0).total_cmp(&b.1.fidelity.unwrap_or(0.0)))
        .expect("four trigger settings");
    c.report(
        "optics.scheme.psi4_w3v.fidelity",
        "four-photon source split four ways yields W3(V) on a trigger",
        1.0,
        best.fidelity.unwrap_or(0.0),
    )
    .note(format!(
        "best trigger {} with probability {:.15}; the GHZ component is not removed by passive optics",
        best_pol.label(),
        best.probability
    ));

    let mut mandel_dev: f64 = 0.0;
    let mut corr_dev: f64 = 0.0;
    let mut off_coinc: f64 = 0.0;
    let mut listed_holds = true;
    for n in 2..=6 {
        let stats = mode_statistics(&photonic_w1(n)?);
        let inv = 1.0 / n as f64;
        for k in 0..n {
            let xi = stats.mandel[k].unwrap_or(f64::INFINITY);
            mandel_dev = mandel_dev.max((xi + inv).abs());
            for m in 0..n {
                corr_dev = corr_dev.max((stats.correlation[(k, m)] - real(inv)).norm());
            }
        }
        let ac = anticorrelation_report(n)?;
        off_coinc = off_coinc.max(ac.offdiagonal_coincidence.abs());
        listed_holds &= ac.listed_comparison_holds;
    }
    c.close("optics.w1.mandel", "Mandel parameter of W_n(1) is -1/n, n = 2..6", 0.0, mandel_dev, tol.equality);
    c.close("optics.w1.correlation", "<a_k^dag a_m> = 1/n for W_n(1), n = 2..6", 0.0, corr_dev, tol.equality);
    c.close(
        "optics.w1.coincidence_offdiagonal",
        "photons of W_n(1) are anti-correlated",
        0.0,
        off_coinc,
        tol.equality,
    );
    c.report(
        "optics.w1.listed_comparison",
        "listed moments 1/n < 1/n^2 as written",
        1.0,
        if listed_holds { 1.0 } else { 0.0 },
    )
    .note("1/n < 1/n^2 is false; the computed off-diagonal coincidence is 0 < 1/n^2");
    Ok(())
}

fn order_slug(o: PulseOrder) -> &'static str {
    match o {
        PulseOrder::Operator => "operator",
        PulseOrder::Listed => "listed",
    }
}

fn conv_slug(c: RaisingConvention) -> &'static str {
    match c {
        RaisingConvention::SFromD => "s_from_d",
        RaisingConvention::DFromS => "d_from_s",
    }
}

fn dynamics_checks(c: &mut Checks, opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<()> {
    let tol = opts.tol;
    let f = 1.0;
    let mut amp_dev: f64 = 0.0;
    let mut integral_dev: f64 = 0.0;
    for n in 1..=6 {
        for m in 0..=n {
            let alpha = random_c64(rng);
            let beta = random_c64(rng);
            let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
            let (alpha, beta) = (alpha / norm, beta / norm);
            let mut i0 = None;
            for _ in 0..10 {
                let t = rng.random_range(0.0..5.0);
                let closed = raman_closed_form(alpha, beta, m, n, f, t)?;
                let numeric = raman_numeric(alpha, beta, m, n, f, t)?;
                amp_dev = amp_dev.max(closed.max_amp_diff(&numeric)?);
                let i = numeric.excitation_integral();
                let i0 = *i0.get_or_insert(raman_numeric(alpha, beta, m, n, f, 0.0)?.excitation_integral());
                integral_dev = integral_dev.max((i - i0).abs());
            }
        }
    }
    c.close(
        "dynamics.raman.closed_form",
        "closed-form Raman amplitudes match the matrix exponential, m <= n <= 6",
        0.0,
        amp_dev,
        1e-9,
    );
    c.close(
        "dynamics.raman.integral",
        "excitation integral is conserved",
        0.0,
        integral_dev,
        tol.structural,
    );
    let mut w_fid: f64 = 1.0;
    for n in 2..=6 {
        w_fid = w_fid.min(crate::dynamics::raman::atomic_w_fidelity(n, f)?);
    }
    c.close(
        "dynamics.raman.w_pulse",
        "a pi/2 pulse from one photon creates atomic W_n",
        1.0,
        w_fid,
        tol.equality,
    );

    let search = ion_w_search(1e-9)?;
    for run in &search.runs {
        c.report(
            &format!(
                "dynamics.ion.reading.{}.{}",
                order_slug(run.order),
                conv_slug(run.convention)
            ),
            "pulse sequence reading: gauge-optimized W fidelity",
            1.0,
            run.gauge_fidelity,
        )
        .note(format!(
            "{}, {}; first pulse fidelity {:.15}",
            run.order, run.convention, run.first_pulse_fidelity
        ));
    }
    let sel = search.selected_run();
    let reading = sel
        .map(|r| format!("{}, {}", r.order, r.convention))
        .unwrap_or_else(|| "no reading succeeds".into());
    c.close(
        "dynamics.ion.first_pulse",
        "first pulse gives (|SSS>|0> + i sqrt2 |SDS>|1>)/sqrt3",
        1.0,
        sel.map_or(0.0, |r| r.first_pulse_fidelity),
        1e-9,
    )
    .note(reading.clone());
    c.close(
        "dynamics.ion.w_fidelity",
        "pulse sequence results in the W state of ions",
        1.0,
        sel.map_or(0.0, |r| r.gauge_fidelity),
        1e-9,
    )
    .note(reading);
    c.at_most(
        "dynamics.ion.phonon_leakage",
        "phonon stays within one quantum",
        tol.equality,
        sel.map_or(f64::INFINITY, |r| r.max_leakage),
    );

    let (phi0, psi1) = df_states();
    let s01_2 = collective_s(0, 1, 2)?;
    let s01_4 = collective_s(0, 1, 4)?;
    for (id, psi, r) in [
        ("dynamics.df.psi_minus", psi_minus(), &s01_2),
        ("dynamics.df.phi0", phi0, &s01_4),
        ("dynamics.df.psi1", psi1, &s01_4),
    ] {
        c.close(id, "collective lowering annihilates decoherence-free states", 0.0, df_check(&psi, r)?.residual, tol.equality);
    }
    let singlet = psi_minus().density();
    let traj = lindblad_trajectory(&singlet, 1.0, 10.0, 2000)?;
    let last = &traj.last().expect("non-empty").state;
    c.close(
        "dynamics.lindblad.singlet_fixed",
        "singlet is invariant under collective decay up to t = 10/gamma",
        0.0,
        trace_distance(last.matrix(), singlet.matrix())?,
        1e-8,
    );
    let excited = StateVector::basis(3, vec![2, 2])?.density();
    let traj = lindblad_trajectory(&excited, 1.0, 10.0, 2000)?;
    let pops: Vec<f64> = traj.iter().map(|s| s.state.matrix()[(3, 3)].re).collect();
    c.holds(
        "dynamics.lindblad.excited_decays",
        "|11><11| decays monotonically under collective decay",
        pops.windows(2).all(|w| w[1] < w[0]),
    );
    let closed_dev = traj
        .iter()
        .map(|s| (s.state.matrix()[(3, 3)].re - (-4.0 * s.time).exp()).abs())
        .fold(0.0, f64::max);
    c.close(
        "dynamics.lindblad.excited_closed_form",
        "|11> population follows exp(-4 gamma t)",
        0.0,
        closed_dev,
        1e-7,
    );
    Ok(())
}

fn random_pair(rng: &mut ChaCha8Rng) -> Result<StateVector> {
    StateVector::normalized(vec![ZERO, random_c64(rng), random_c64(rng), ZERO], vec![2, 2])
}

fn random_triple(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let mut v = [
        rng.random_range(0.05..1.0),
        rng.random_range(0.05..1.0),
        rng.random_range(0.05..1.0),
    ];
    let norm = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v.sort_by(|a, b| b.total_cmp(a));
    if rng.random_bool(0.5) {
        v.swap(0, 1);
    }
    (v[0], v[1], v[2])
}

fn protocols_checks(c: &mut Checks, opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<()> {
    let tol = opts.tol;
    for (proto, name, exact, qubits) in [(Protocol::Qkd, "qkd", 0.25, 12.0), (Protocol::Qss, "qss", 0.125, 24.0)] {
        let t = match proto {
            Protocol::Qkd => qkd_simulate(opts.rounds, opts.seed)?,
            Protocol::Qss => qss_simulate(opts.rounds, opts.seed)?,
        };
        let s = &t.summary;
        let anchor = match proto {
            Protocol::Qkd => "W-based key distribution accepts 1/4 of rounds (12 qubits per key bit)",
            Protocol::Qss => "W-based secret sharing succeeds with probability 1/8 (24 qubits per key bit)",
        };
        c.close(&format!("protocols.{name}.exact_rate"), anchor, exact, exact_success_rate(proto)?, tol.equality);
        let sigma = (exact * (1.0 - exact) / s.rounds as f64).sqrt();
        c.close(&format!("protocols.{name}.empirical_rate"), anchor, exact, s.success_rate, 3.0 * sigma)
            .note(format!("{} of {} rounds accepted", s.accepted, s.rounds));
        c.close(&format!("protocols.{name}.errors"), "accepted rounds yield consistent key bits", 0.0, s.errors as f64, 0.0);
        c.report(
            &format!("protocols.{name}.qubits_per_key_bit"),
            anchor,
            qubits,
            s.qubits_per_key_bit.unwrap_or(f64::INFINITY),
        );
    }
    c.close(
        "protocols.qss.reconstruction_exhaustive",
        "Bob and Claire jointly deduce Alice's bit on every accepted outcome",
        0.0,
        qss_reconstruction_errors()? as f64,
        0.0,
    );
    c.close(
        "protocols.qss.single_party_information",
        "one party alone holds 2H(1/3) - log2(3) bits about Alice's outcome",
        2.0 * binary_entropy(1.0 / 3.0) - 3f64.log2(),
        qss_single_party_information()?,
        tol.equality,
    );

    let mut p_dev: f64 = 0.0;
    let mut f_min: f64 = 1.0;
    for _ in 0..100 {
        let (a, b, cc) = random_triple(rng);
        let out = distill_w(a, b, cc)?;
        p_dev = p_dev.max((out.success_probability - 3.0 * cc * cc).abs());
        f_min = f_min.min(out.fidelity);
    }
    c.close("protocols.distill.success", "distillation succeeds with probability 3c^2", 0.0, p_dev, tol.equality);
    c.close("protocols.distill.fidelity", "distillation output is W3", 1.0, f_min, tol.equality);
    let b = (1.0f64 - 0.64 - 0.09).sqrt();
    let ideal: Vec<Wiring> = wiring_search(0.8, b, 0.3)?
        .into_iter()
        .filter(|(_, o)| (o.success_probability - 0.27).abs() <= tol.equality && (o.fidelity - 1.0).abs() <= tol.equality)
        .map(|(w, _)| w)
        .collect();
    c.holds(
        "protocols.distill.wiring",
        "ancilla-first wiring reproduces 3c^2 and W3",
        ideal.contains(&Wiring::STANDARD),
    )
    .note(format!("{} of 8 wirings are ideal", ideal.len()));

    let basis = bell_like_basis()?;
    let mut res: f64 = 0.0;
    let mut fid_ghz: f64 = 1.0;
    let mut fid_w: f64 = 1.0;
    let mut prob_dev: f64 = 0.0;
    let mut bits: u32 = 0;
    let mut mean_none: f64 = 0.0;
    let mut conj_min: f64 = 1.0;
    let mut inputs = vec![StateVector::qubits(vec![ZERO, real(1.0), ZERO, ZERO])?, psi_plus()];
    for _ in 0..98 {
        inputs.push(random_pair(rng)?);
    }
    for phi in &inputs {
        res = res.max(basis.residual(phi)?);
        let g = teleport(phi, Channel::Ghz, Recovery::Inverse)?;
        let w = teleport(phi, Channel::WClass, Recovery::Inverse)?;
        fid_ghz = fid_ghz.min(g.min_fidelity());
        fid_w = fid_w.min(w.min_fidelity());
        bits = bits.max(g.classical_bits);
        for p in g.probabilities.iter().chain(&w.probabilities) {
            prob_dev = prob_dev.max((p - 0.125).abs());
        }
        mean_none = mean_none.max(teleport(phi, Channel::WClass, Recovery::Omitted)?.mean_fidelity());
        conj_min = conj_min.min(teleport(phi, Channel::WClass, Recovery::Conjugated)?.min_fidelity());
    }
    c.close(
        "protocols.teleport.decomposition_residual",
        "pair (x) GHZ = (1/sqrt8) sum_x Phi_x (x) (B_x (x) C_x) pair",
        0.0,
        res,
        tol.equality,
    )
    .note(format!("Bell pair placed as {}", basis.pairing));
    let spec_pairing_ok = pairing_search()
        .into_iter()
        .any(|(p, ok)| p == Pairing::OneTwo && ok);
    c.report(
        "protocols.teleport.pairing_12_a",
        "measurement vectors as Bell pair on (1,2) times sigma_x eigenvector on A",
        1.0,
        if spec_pairing_ok { 1.0 } else { 0.0 },
    )
    .note("this placement leaves no local correction; the working placement pairs qubit 1 with A");
    c.close(
        "protocols.teleport.branch_probability",
        "every measurement branch has weight 1/8",
        0.0,
        prob_dev,
        tol.equality,
    );
    c.close("protocols.teleport.classical_bits", "three classical bits per teleported pair", 3.0, f64::from(bits), 0.0);
    c.close("protocols.teleport.ghz.fidelity", "teleportation through GHZ has fidelity 1", 1.0, fid_ghz, tol.equality);
    c.close(
        "protocols.teleport.w.fidelity",
        "teleportation through the W-class channel has fidelity 1",
        1.0,
        fid_w,
        tol.equality,
    )
    .note("recovery (B_x (x) C_x)^dag V^dag");
    c.at_most(
        "protocols.teleport.w.no_recovery",
        "omitting the recovery lowers the mean fidelity",
        1.0 - 1e-3,
        mean_none,
    );
    c.report(
        "protocols.teleport.w.conjugated_recovery",
        "recovery V (B_x (x) C_x) V^dag",
        1.0,
        conj_min,
    )
    .note("leaves V applied to the pair");

    let w = w_channel();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let expect = StateVector::qubits(vec![ZERO, real(0.5), real(0.5), ZERO, real(h), ZERO, ZERO, ZERO])?;
    let amp_dev = (0..8).map(|i| (w.amp(i) - expect.amp(i)).norm()).fold(0.0, f64::max);
    c.close(
        "protocols.w_channel.amplitudes",
        "V on (B,C) of GHZ gives |100>/sqrt2 + (|010> + |001>)/2",
        0.0,
        amp_dev,
        tol.equality,
    );
    c.close("protocols.w_channel.unitary", "V is unitary", 0.0, unitarity_residual(&w_channel_unitary()), tol.equality);
    c.close(
        "protocols.w_channel.fidelity_w_class",
        "channel state lies in the single-excitation sector",
        1.0,
        fidelity(&w, &expect)?,
        tol.equality,
    );
    Ok(())
}
