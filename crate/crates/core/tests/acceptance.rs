//! Acceptance gate: one line per criterion, nonzero exit if any fails.
//! Runs without the libtest harness so the lines always reach stdout.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::process::{Command, ExitCode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wclass::corelin::{hermitian_eig, trace_distance, Matrix, StateVector, C64};
use wclass::dynamics::{df_check, ion_w_search, lindblad_trajectory, raman_closed_form, raman_numeric};
use wclass::entanglement::{
    ent_entropy, negativity, persistency, ppt_closed_form_w, ppt_spectrum, reduced_w, witness_value,
    witness_w1, witness_w1_pauli_expansion, witness_w2, BipartitionSpec, PptVerdict,
};
use wclass::optics::{mode_statistics, photonic_w1, run_scheme, shipped, OpticalScheme};
use wclass::protocols::{
    bell_like_basis, distill_w, qkd_simulate, qss_reconstruction_errors, qss_simulate, teleport, w_channel,
    w_channel_unitary, Channel, Recovery,
};
use wclass::states::{
    collective_s, df_states, dicke_numbers, eta_state, ghz_prime, ghz_state, psi_minus, w_state, AmplitudeProfile,
};

type Outcome = Result<(bool, String), String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn h2(p: f64) -> f64 {
    [p, 1.0 - p]
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn w_amps(n: usize) -> Vec<C64> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    for k in 0..n {
        v[1 << k] = c(1.0 / (n as f64).sqrt(), 0.0);
    }
    v
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Reduction of `|W₃⟩` to qubits 1, 2, traced by hand.
fn criterion_1() -> Outcome {
    let psi = w_amps(3);
    let mut rho = Matrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            for q in 0..2 {
                rho[(i, j)] += psi[2 * i + q] * psi[2 * j + q].conj();
            }
        }
    }
    let mut expected = Matrix::zeros(4, 4);
    expected[(0, 0)] = c(1.0 / 3.0, 0.0);
    for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        expected[(i, j)] = c(1.0 / 3.0, 0.0);
    }
    let lib = w_state(3).map_err(err)?.density().partial_trace(&[0, 1]).map_err(err)?;
    let d1 = (&rho - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d2 = (lib.matrix() - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dev = d1.max(d2);
    Ok((dev <= 1e-12, format!("max elementwise deviation {dev:.3e} (tol 1e-12)")))
}

fn ppt_oracle(n: usize) -> [f64; 4] {
    let nf = n as f64;
    let m = nf - 2.0;
    let r = (1.0 + 4.0 / (m * m)).sqrt();
    let mut v = [1.0 / nf, 1.0 / nf, m * (1.0 + r) / (2.0 * nf), m * (1.0 - r) / (2.0 * nf)];
    v.sort_by(f64::total_cmp);
    v
}

fn criterion_2() -> Outcome {
    let mut dev: f64 = 0.0;
    let mut negative = true;
    let mut shrinking = true;
    let mut prev = f64::INFINITY;
    for n in 3..=50 {
        let p = 2.0 / n as f64;
        // ρ = p|W₂⟩⟨W₂| + (1 − p)|00⟩⟨00|, partially transposed on qubit 1
        let mut pt = Matrix::zeros(4, 4);
        pt[(0, 0)] = c(1.0 - p, 0.0);
        pt[(1, 1)] = c(p / 2.0, 0.0);
        pt[(2, 2)] = c(p / 2.0, 0.0);
        pt[(0, 3)] = c(p / 2.0, 0.0);
        pt[(3, 0)] = c(p / 2.0, 0.0);
        let mut numeric = hermitian_eig(&pt).map_err(err)?.values.clone();
        numeric.sort_by(f64::total_cmp);
        let lib = ppt_spectrum(&reduced_w(n, 2).map_err(err)?, &BipartitionSpec::split(1, 2).map_err(err)?)
            .map_err(err)?;
        let oracle = ppt_oracle(n);
        let closed = ppt_closed_form_w(n).map_err(err)?;
        for k in 0..4 {
            dev = dev
                .max((numeric[k] - oracle[k]).abs())
                .max((lib.spectrum[k] - oracle[k]).abs())
                .max((closed[k] - oracle[k]).abs());
        }
        negative &= oracle[0] < 0.0 && lib.min() < 0.0;
        shrinking &= oracle[0].abs() < prev;
        prev = oracle[0].abs();
    }
    let far = ppt_oracle(1_000_000)[0];
    let far_lib = ppt_closed_form_w(1_000_000).map_err(err)?[0];
    let ok = dev <= 1e-10 && negative && shrinking && far < 0.0 && far.abs() < 1e-9 && (far - far_lib).abs() < 1e-18;
    Ok((
        ok,
        format!("n=3..50 max deviation {dev:.3e} (tol 1e-10); min eigenvalue negative and shrinking: {}; n=1e6 min {far:.3e}", negative && shrinking),
    ))
}

fn criterion_3() -> Outcome {
    let rho = ghz_state(3).map_err(err)?.density().partial_trace(&[0, 1]).map_err(err)?;
    let split = BipartitionSpec::split(1, 2).map_err(err)?;
    let rep = ppt_spectrum(&rho, &split).map_err(err)?;
    let neg = negativity(&rho, &split).map_err(err)?;
    Ok((
        rep.verdict == PptVerdict::Separable && neg.abs() <= 1e-12,
        format!("verdict {}, negativity {neg:.3e}", rep.verdict),
    ))
}

fn criterion_4() -> Outcome {
    let mut dev: f64 = 0.0;
    let mut peak = true;
    for n in 2..=8 {
        let w = w_state(n).map_err(err)?;
        let mut vals = Vec::new();
        for s in 1..n {
            let e = ent_entropy(&w, &BipartitionSpec::split(s, n).map_err(err)?).map_err(err)?;
            dev = dev.max((e - h2(s as f64 / n as f64)).abs());
            vals.push(e);
        }
        if n % 2 == 0 {
            let max = vals.iter().copied().fold(f64::MIN, f64::max);
            peak &= (vals[n / 2 - 1] - max).abs() <= 1e-10;
        }
    }
    Ok((dev <= 1e-10 && peak, format!("max |S - H(s/n)| {dev:.3e} (tol 1e-10); peak at n/2: {peak}")))
}

fn criterion_5() -> Outcome {
    let g = persistency(&ghz_state(3).map_err(err)?).map_err(err)?;
    let w3 = persistency(&w_state(3).map_err(err)?).map_err(err)?;
    let w4 = persistency(&w_state(4).map_err(err)?).map_err(err)?;
    Ok(((g, w3, w4) == (1, 2, 3), format!("GHZ3 {g}, W3 {w3}, W4 {w4}")))
}

fn criterion_6() -> Outcome {
    let w1 = witness_w1();
    let v1 = witness_value(&w1, &w_state(3).map_err(err)?.density()).map_err(err)?;
    let v2 = witness_value(&witness_w2(), &ghz_prime().density()).map_err(err)?;
    let w = w_amps(3);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut min_lib = f64::INFINITY;
    let mut oracle_dev: f64 = 0.0;
    for _ in 0..1000 {
        let q: Vec<[C64; 2]> = (0..3)
            .map(|_| {
                let (a, b) = (rand_c(&mut rng), rand_c(&mut rng));
                let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
                [a / n, b / n]
            })
            .collect();
        let amps: Vec<C64> = (0..8).map(|i| q[0][i >> 2 & 1] * q[1][i >> 1 & 1] * q[2][i & 1]).collect();
        let overlap: C64 = w.iter().zip(&amps).map(|(x, y)| x.conj() * y).sum();
        let oracle = 2.0 / 3.0 - overlap.norm_sqr();
        let psi = StateVector::qubits(amps).map_err(err)?;
        let lib = witness_value(&w1, &psi.density()).map_err(err)?;
        oracle_dev = oracle_dev.max((lib - oracle).abs());
        min_lib = min_lib.min(lib);
    }
    let dev = witness_w1_pauli_expansion().deviation;
    let ok = (v1 + 1.0 / 3.0).abs() <= 1e-12
        && (v2 + 0.5).abs() <= 1e-12
        && min_lib >= -1e-10
        && oracle_dev <= 1e-12
        && dev.is_finite();
    Ok((
        ok,
        format!("W1 on W {v1:.15}, W2 on GHZ' {v2:.15}, min on products {min_lib:.3e}; expansion deviation {dev:.3e} (reported)"),
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = Vec::new();
    for n in 2..=8 {
        let nf = n as f64;
        if dicke_numbers(&w_state(n).map_err(err)?, 1e-12).map_err(err)? != Some((nf / 2.0, nf / 2.0 - 1.0)) {
            bad.push(format!("W{n}"));
        }
        if n < 3 {
            continue;
        }
        for _ in 0..5 {
            let mut q: Vec<C64> = (0..n).map(|_| rand_c(&mut rng)).collect();
            let mean = q.iter().sum::<C64>() / c(nf, 0.0);
            q.iter_mut().for_each(|z| *z -= mean);
            let zsa = eta_state(&AmplitudeProfile::normalized(q).map_err(err)?).map_err(err)?;
            if dicke_numbers(&zsa, 1e-12).map_err(err)? != Some((nf / 2.0 - 1.0, nf / 2.0 - 1.0)) {
                bad.push(format!("ZSA{n}"));
            }
        }
    }
    Ok((bad.is_empty(), format!("W_n n=2..8 and 5 random ZSA states per n=3..8; failures: {bad:?}")))
}

fn criterion_8() -> Outcome {
    let (phi0, psi1) = df_states();
    let r2 = collective_s(0, 1, 2).map_err(err)?;
    let r4 = collective_s(0, 1, 4).map_err(err)?;
    let res = [
        df_check(&psi_minus(), &r2).map_err(err)?.residual,
        df_check(&phi0, &r4).map_err(err)?.residual,
        df_check(&psi1, &r4).map_err(err)?.residual,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let singlet = psi_minus().density();
    let tr = lindblad_trajectory(&singlet, 1.0, 10.0, 2000).map_err(err)?;
    let td = trace_distance(tr.last().unwrap().state.matrix(), singlet.matrix()).map_err(err)?;
    let excited = StateVector::basis(3, vec![2, 2]).map_err(err)?.density();
    let tr = lindblad_trajectory(&excited, 1.0, 10.0, 2000).map_err(err)?;
    let monotone = tr.windows(2).all(|w| w[1].state.matrix()[(3, 3)].re < w[0].state.matrix()[(3, 3)].re);
    Ok((
        res <= 1e-12 && td <= 1e-8 && monotone,
        format!("max S01 residual {res:.3e}; singlet trace distance {td:.3e} at t=10/gamma; |11> decays monotonically: {monotone}"),
    ))
}

fn criterion_9() -> Outcome {
    let mut dev: f64 = 0.0;
    for n in 2..=6 {
        let ports: Vec<String> = (1..=n).map(|k| format!("\"p{k}\"")).collect();
        let p = ports.join(",");
        let text = format!(
            r#"{{"name":"m{n}","modes":[{p}],"polarized":false,"source":{{"kind":"sps","mode":"p1"}},
                "elements":[{{"type":"dft","targets":[{p}]}}],"postselect":[{{"modes":[{p}],"count":1}}],
                "target_state":{{"kind":"w1","modes":[{p}]}}}}"#
        );
        let r = run_scheme(&OpticalScheme::parse(&text).map_err(err)?, None).map_err(err)?;
        dev = dev.max((r.probability - 1.0).abs()).max((r.fidelity.unwrap_or(0.0) - 1.0).abs());
    }
    let tri = run_scheme(&OpticalScheme::parse(shipped::TRITTER_W3V).map_err(err)?, None).map_err(err)?;
    let four = run_scheme(&OpticalScheme::parse(shipped::FOURPORT_W4V).map_err(err)?, None).map_err(err)?;
    let mut stat_dev: f64 = 0.0;
    for n in 2..=6 {
        let s = mode_statistics(&photonic_w1(n).map_err(err)?);
        let inv = 1.0 / n as f64;
        for k in 0..n {
            stat_dev = stat_dev.max((s.mandel[k].unwrap_or(f64::INFINITY) + inv).abs());
            for m in 0..n {
                stat_dev = stat_dev.max((s.correlation[(k, m)] - c(inv, 0.0)).norm());
            }
        }
    }
    let tri_dev = (tri.probability - 1.0 / 9.0).abs();
    let four_dev = (four.probability - 1.0 / 16.0).abs();
    let ok = dev <= 1e-12
        && tri_dev <= 1e-12
        && (tri.fidelity.unwrap_or(0.0) - 1.0).abs() <= 1e-12
        && four_dev <= 1e-12
        && stat_dev <= 1e-12;
    Ok((
        ok,
        format!(
            "multiport dev {dev:.3e}; tritter p={:.15} F={:.15}; 4-port p={:.15} vs claimed 0.0625; moments dev {stat_dev:.3e}",
            tri.probability,
            tri.fidelity.unwrap_or(0.0),
            four.probability
        ),
    ))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut amp_dev: f64 = 0.0;
    let mut int_dev: f64 = 0.0;
    for n in 1..=6 {
        for m in 0..=n {
            let (a, b) = (rand_c(&mut rng), rand_c(&mut rng));
            let nrm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (a, b) = (a / nrm, b / nrm);
            let i0 = raman_numeric(a, b, m, n, 1.0, 0.0).map_err(err)?.excitation_integral();
            for _ in 0..10 {
                let t = rng.random_range(0.0..5.0);
                let cf = raman_closed_form(a, b, m, n, 1.0, t).map_err(err)?;
                let nu = raman_numeric(a, b, m, n, 1.0, t).map_err(err)?;
                amp_dev = amp_dev.max(cf.max_amp_diff(&nu).map_err(err)?);
                int_dev = int_dev.max((nu.excitation_integral() - i0).abs());
            }
        }
    }
    let mut w_dev: f64 = 0.0;
    for n in 2..=6 {
        let t = FRAC_PI_2 / (n as f64).sqrt();
        let s = raman_closed_form(c(1.0, 0.0), c(0.0, 0.0), 0, n, 1.0, t).map_err(err)?;
        let rho = s.atomic_density().map_err(err)?;
        let w = StateVector::qubits(w_amps(n)).map_err(err)?;
        w_dev = w_dev.max((rho.expectation(w.density().matrix()).re - 1.0).abs());
    }
    Ok((
        amp_dev <= 1e-9 && int_dev <= 1e-10 && w_dev <= 1e-12,
        format!("closed form vs expm {amp_dev:.3e} (tol 1e-9); integral drift {int_dev:.3e}; W fidelity dev {w_dev:.3e}"),
    ))
}

/// Index into the `(ion, ion, ion, phonon)` register; `S = 0`, `D = 1`.
fn ion_index(l: [usize; 3], ph: usize) -> usize {
    ((l[0] * 2 + l[1]) * 2 + l[2]) * 3 + ph
}

fn criterion_11() -> Outcome {
    let s3 = 1.0 / 3f64.sqrt();
    let mut first = vec![c(0.0, 0.0); 24];
    first[ion_index([0, 0, 0], 0)] = c(s3, 0.0);
    first[ion_index([0, 1, 0], 1)] = c(0.0, 2f64.sqrt() * s3);
    let search = ion_w_search(1e-9).map_err(err)?;
    let mut lines = Vec::new();
    let mut found = None;
    for run in &search.runs {
        let out = &run.intermediates[0];
        let ov: C64 = first.iter().enumerate().map(|(i, z)| z.conj() * out.amp(i)).sum();
        let f_first = ov.norm_sqr();
        // ions are left pure in the phonon ground state; per-ion phases can
        // align all three W components, so the optimum is (Σ|ψ_k|)²/3
        let fin = run.final_state();
        let mag: f64 = [[1, 1, 0], [1, 0, 1], [0, 1, 1]]
            .iter()
            .map(|&l| fin.amp(ion_index(l, 0)).norm())
            .sum();
        let phonon0: f64 = (0..8).map(|k| fin.amp(k * 3).norm_sqr()).sum();
        let f_gauge = if (phonon0 - 1.0).abs() <= 1e-12 { mag * mag / 3.0 } else { run.gauge_fidelity };
        let ok = (f_first - 1.0).abs() <= 1e-9 && (f_gauge - 1.0).abs() <= 1e-9 && (run.gauge_fidelity - 1.0).abs() <= 1e-9;
        lines.push(format!("[{}, {}: first {f_first:.6} final {:.6}]", run.order, run.convention, run.gauge_fidelity));
        if ok && found.is_none() {
            found = Some(format!("{}, {}", run.order, run.convention));
        }
    }
    let lib_sel = search.selected_run().map(|r| format!("{}, {}", r.order, r.convention));
    Ok((
        found.is_some() && found == lib_sel,
        format!("successful reading: {}; {}", found.unwrap_or_else(|| "none".into()), lines.join(" ")),
    ))
}

fn criterion_12() -> Outcome {
    let rounds = 100_000u64;
    let qkd = qkd_simulate(rounds, 0).map_err(err)?;
    let qss = qss_simulate(rounds, 0).map_err(err)?;
    let within = |rate: f64, p: f64| (rate - p).abs() <= 3.0 * (p * (1.0 - p) / rounds as f64).sqrt();
    let qkd_ok = within(qkd.summary.success_rate, 0.25) && qkd.summary.errors == 0;
    let qss_ok = within(qss.summary.success_rate, 0.125)
        && qss.summary.errors == 0
        && qss_reconstruction_errors().map_err(err)? == 0;

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut d_dev: f64 = 0.0;
    for _ in 0..100 {
        let mut v = [
            rng.random_range(0.05..1.0f64),
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
        ];
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= nrm);
        v.sort_by(|a, b| b.total_cmp(a));
        let (a, b, cc) = (v[0], v[1], v[2]);
        let out = distill_w(a, b, cc).map_err(err)?;
        d_dev = d_dev.max((out.success_probability - 3.0 * cc * cc).abs()).max((out.fidelity - 1.0).abs());
    }

    let basis = bell_like_basis().map_err(err)?;
    let mut res: f64 = 0.0;
    let mut f_dev: f64 = 0.0;
    for k in 0..100 {
        let phi = if k == 0 {
            StateVector::qubits(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).map_err(err)?
        } else {
            StateVector::normalized(
                vec![c(0.0, 0.0), rand_c(&mut rng), rand_c(&mut rng), c(0.0, 0.0)],
                vec![2, 2],
            )
            .map_err(err)?
        };
        res = res.max(basis.residual(&phi).map_err(err)?);
        for ch in [Channel::Ghz, Channel::WClass] {
            let t = teleport(&phi, ch, Recovery::Inverse).map_err(err)?;
            f_dev = f_dev.max((t.min_fidelity() - 1.0).abs());
        }
    }
    let w = w_channel();
    let expect = [(1, 0.5), (2, 0.5), (4, FRAC_1_SQRT_2)];
    let mut ch_dev = (w.norm_sqr() - 1.0).abs();
    for i in 0..8 {
        let e = expect.iter().find(|(k, _)| *k == i).map_or(0.0, |(_, v)| *v);
        ch_dev = ch_dev.max((w.amp(i) - c(e, 0.0)).norm());
    }
    let v = w_channel_unitary();
    let u_dev = (v.adjoint() * &v - Matrix::identity(4, 4)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ok = qkd_ok && qss_ok && d_dev <= 1e-12 && res <= 1e-12 && ch_dev <= 1e-12 && u_dev <= 1e-12 && f_dev <= 1e-12;
    Ok((
        ok,
        format!(
            "QKD rate {:.5} ({:.2} qubits/bit); QSS rate {:.5} ({:.2} qubits/bit), errors {}; distill dev {d_dev:.3e}; decomposition residual {res:.3e}; channel dev {ch_dev:.3e}; teleport fidelity dev {f_dev:.3e}",
            qkd.summary.success_rate,
            qkd.summary.qubits_per_key_bit.unwrap_or(f64::NAN),
            qss.summary.success_rate,
            qss.summary.qubits_per_key_bit.unwrap_or(f64::NAN),
            qss.summary.errors
        ),
    ))
}

fn criterion_13() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut reports = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("run{k}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_wclass"))
            .args(["verify", "all", "--seed", "0", "--json"])
            .arg(&path)
            .output()
            .map_err(err)?;
        if !out.status.success() {
            return Ok((false, format!("verify all exited with {}", out.status)));
        }
        reports.push(std::fs::read(&path).map_err(err)?);
    }
    let same = reports[0] == reports[1];
    Ok((same, format!("two runs of `verify all --seed 0`: {} bytes, identical: {same}", reports[0].len())))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("two-qubit reduction of W3", criterion_1),
        ("PPT spectrum of reduced W_n", criterion_2),
        ("GHZ reduction separable", criterion_3),
        ("entanglement entropy of W_n", criterion_4),
        ("persistency", criterion_5),
        ("witness values", criterion_6),
        ("Dicke quantum numbers", criterion_7),
        ("decoherence-free states", criterion_8),
        ("optical schemes and moments", criterion_9),
        ("Raman dynamics", criterion_10),
        ("trapped-ion W sequence", criterion_11),
        ("protocols", criterion_12),
        ("report determinism", criterion_13),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {title}: {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} of 13 criteria pass", 13 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
