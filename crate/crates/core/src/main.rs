use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use wclass::corelin::{StateVector, Tolerances, C64, ZERO};
use wclass::optics::{run_scheme, OpticalScheme};
use wclass::protocols::{distill_w, qkd_simulate, qss_simulate, teleport, Channel, ProtocolTranscript, Recovery};
use wclass::report::{rounded_json, to_pretty};
use wclass::verify::{run_suite, SuiteName, VerifyOptions};

#[derive(Parser)]
#[command(name = "wclass", version, about = "Verification and simulation of W-class entangled states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo rounds.
    #[arg(long, global = true)]
    rounds: Option<u64>,
    /// Photon-number truncation per mode.
    #[arg(long, global = true, default_value_t = 6)]
    truncation: usize,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_structural: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_assert: f64,
    /// Write the JSON report here.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite: states, entanglement, optics, dynamics, protocols or all.
    Verify { suite: String },
    /// Run an optical scheme file.
    OpticsRun { scheme: PathBuf },
    /// Run a protocol.
    Protocol {
        name: ProtocolName,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = ChannelArg::W)]
        channel: ChannelArg,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolName {
    Qkd,
    Qss,
    Teleport,
    Distill,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Ghz,
    W,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Io(anyhow::Error),
}

type Outcome = Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn write_json(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    if let Some(p) = path {
        std::fs::write(p, text)
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(Failure::Io)?;
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, suite: &str) -> Outcome {
    let name: SuiteName = suite.parse().map_err(|e: wclass::Error| usage(e.to_string()))?;
    let opts = VerifyOptions {
        seed: cli.seed,
        rounds: cli.rounds.unwrap_or(100_000),
        truncation: cli.truncation,
        tol: Tolerances {
            structural: cli.tol_structural,
            equality: cli.tol_assert,
        },
    };
    if opts.rounds == 0 {
        return Err(usage("--rounds must be at least 1"));
    }
    let report = run_suite(name, &opts).map_err(|e| Failure::Io(e.into()))?;
    for c in &report.checks {
        println!("{}", c.line());
    }
    println!(
        "suite {}: {} passed, {} failed",
        report.suite, report.passed, report.failed
    );
    write_json(cli.json.as_deref(), &report.to_json())?;
    Ok(report.passed())
}

fn cmd_optics_run(cli: &Cli, path: &Path) -> Outcome {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Io)?;
    let scheme = OpticalScheme::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let r = run_scheme(&scheme, Some(cli.truncation)).map_err(|e| usage(e.to_string()))?;
    let terms: Vec<_> = r
        .conditional
        .iter()
        .flat_map(|s| s.terms())
        .map(|(occ, a)| json!({"occupations": occ, "re": a.re, "im": a.im}))
        .collect();
    let value = rounded_json(&json!({
        "scheme": r.name,
        "modes": r.mode_names,
        "truncation": cli.truncation,
        "probability": r.probability,
        "fidelity": r.fidelity,
        "conditional_state": terms,
    }));
    println!(
        "{}: probability {:e}, fidelity {}",
        r.name,
        wclass::report::round15(r.probability),
        r.fidelity.map_or("n/a".to_string(), |f| format!("{:e}", wclass::report::round15(f)))
    );
    write_json(cli.json.as_deref(), &to_pretty(&value))?;
    Ok(true)
}

fn transcript_json(t: &ProtocolTranscript) -> serde_json::Value {
    rounded_json(&json!({"summary": t.summary, "rounds": t.rounds}))
}

fn random_pair(rng: &mut ChaCha8Rng) -> StateVector {
    let mut z = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let (a, b) = (z(), z());
    StateVector::normalized(vec![ZERO, a, b, ZERO], vec![2, 2]).expect("nonzero draw")
}

fn cmd_protocol(cli: &Cli, name: ProtocolName, abc: [Option<f64>; 3], channel: ChannelArg, trials: usize) -> Outcome {
    match name {
        ProtocolName::Qkd | ProtocolName::Qss => {
            let rounds = cli.rounds.unwrap_or(100_000);
            let t = match name {
                ProtocolName::Qkd => qkd_simulate(rounds, cli.seed),
                _ => qss_simulate(rounds, cli.seed),
            }
            .map_err(|e| usage(e.to_string()))?;
            let s = &t.summary;
            println!(
                "{} rounds={} accepted={} success_rate={} stderr={:e} qubits_per_key_bit={} seed={} errors={}",
                if matches!(name, ProtocolName::Qkd) { "qkd" } else { "qss" },
                s.rounds,
                s.accepted,
                wclass::report::round15(s.success_rate),
                wclass::report::round15(s.stderr),
                s.qubits_per_key_bit.map_or("n/a".into(), |q| wclass::report::round15(q).to_string()),
                s.seed,
                s.errors
            );
            write_json(cli.json.as_deref(), &to_pretty(&transcript_json(&t)))?;
            Ok(s.errors == 0)
        }
        ProtocolName::Distill => {
            let [Some(a), Some(b), Some(c)] = abc else {
                return Err(usage("distill requires --a, --b and --c"));
            };
            let out = distill_w(a, b, c).map_err(|e| usage(e.to_string()))?;
            let amps: Vec<[f64; 2]> = out
                .output
                .iter()
                .flat_map(|s| s.amplitudes().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
                .collect();
            let value = rounded_json(&json!({
                "a": a, "b": b, "c": c,
                "success_probability": out.success_probability,
                "expected_probability": 3.0 * c * c,
                "fidelity": out.fidelity,
                "failure_probability": out.failure_probability,
                "output": amps,
            }));
            println!(
                "distill success={} fidelity={}",
                wclass::report::round15(out.success_probability),
                wclass::report::round15(out.fidelity)
            );
            write_json(cli.json.as_deref(), &to_pretty(&value))?;
            Ok((out.fidelity - 1.0).abs() <= cli.tol_assert)
        }
        ProtocolName::Teleport => {
            if trials == 0 {
                return Err(usage("--trials must be at least 1"));
            }
            let ch = match channel {
                ChannelArg::Ghz => Channel::Ghz,
                ChannelArg::W => Channel::WClass,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut min_f = f64::INFINITY;
            let mut control: f64 = 0.0;
            let mut bits = 0;
            for _ in 0..trials {
                let phi = random_pair(&mut rng);
                let r = teleport(&phi, ch, Recovery::Inverse).map_err(|e| Failure::Io(e.into()))?;
                min_f = min_f.min(r.min_fidelity());
                bits = r.classical_bits;
                let none = teleport(&phi, ch, Recovery::Omitted).map_err(|e| Failure::Io(e.into()))?;
                control = control.max(none.mean_fidelity());
            }
            let value = rounded_json(&json!({
                "channel": ch.to_string(),
                "trials": trials,
                "seed": cli.seed,
                "classical_bits": bits,
                "min_fidelity": min_f,
                "no_recovery_max_mean_fidelity": control,
            }));
            println!(
                "teleport channel={} trials={} min_fidelity={} classical_bits={}",
                ch,
                trials,
                wclass::report::round15(min_f),
                bits
            );
            write_json(cli.json.as_deref(), &to_pretty(&value))?;
            Ok((min_f - 1.0).abs() <= cli.tol_assert)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Verify { suite } => cmd_verify(&cli, suite),
        Command::OpticsRun { scheme } => cmd_optics_run(&cli, scheme),
        Command::Protocol {
            name,
            a,
            b,
            c,
            channel,
            trials,
        } => cmd_protocol(&cli, *name, [*a, *b, *c], *channel, *trials),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: wclass <verify SUITE | optics-run SCHEME | protocol NAME> [options]; see --help");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
