use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use telephone_core::instruments::EQUIVALENCE_TOL;
use telephone_core::linalg::DEFAULT_TOL;
use telephone_core::nosignal::{standard_alice_battery, telephone_joint, NO_SIGNALING_TOL};
use telephone_core::{
    instrument_distance, jones_vector, marginal_invariance_audit, mutual_information,
    partial_trace, phi_plus, same_label_pairing, simulate_telephone, trace_distance,
    validate_density, worst_case_leak, zeno_cascade, CascadeParams, DensityOperator, OutcomeLabel,
    Party, PolarizationAngle, QuantumInstrument, SignalingProtocol,
};
use thiserror::Error;

use crate::device_spec::{parse_device_spec, DeviceSpecDocument, SpecError};
use crate::report::{emit_report, Format, ReportDocument, Table};

#[derive(Debug, Parser)]
#[command(
    name = "bell-telephone",
    version,
    about = "Verify that the EPR Bell telephone transmits only noise"
)]
pub struct Cli {
    /// Output format
    #[arg(long, value_enum, global = true, default_value = "structured")]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduced polarization state of one photon of the shared pair
    Reduce {
        /// Party traced out
        #[arg(long, value_enum, default_value = "bob")]
        party: PartyArg,
    },
    /// Apply a device to a linearly polarized (or unpolarized) photon
    DeviceRun {
        /// Device description file, or an inline JSON object
        spec: String,
        /// Input polarization angle in degrees
        #[arg(long, conflicts_with = "mixed", required_unless_present = "mixed")]
        alpha_deg: Option<f64>,
        /// Use the maximally mixed input instead
        #[arg(long)]
        mixed: bool,
    },
    /// Distance between two devices, each branch compared up to phase
    DeviceCompare {
        a: String,
        b: String,
        /// Pair outcome A_LABEL with B_LABEL; defaults to pairing equal labels
        #[arg(long = "pair", value_name = "A_LABEL=B_LABEL")]
        pairs: Vec<String>,
        /// Largest distance still counted as equivalent
        #[arg(long, default_value_t = EQUIVALENCE_TOL)]
        tol: f64,
    },
    /// Leak probability of the finite cascade as the number of splitters grows
    CascadeConverge {
        #[arg(long, default_value_t = 45.0)]
        omega_deg: f64,
        /// Comma-separated splitter counts
        #[arg(long, value_delimiter = ',', default_value = "2,3,11,101,1001")]
        n: Vec<usize>,
        /// Input polarization in degrees; defaults to omega + 90 (worst case)
        #[arg(long)]
        alpha_deg: Option<f64>,
    },
    /// Exact no-signaling audit over a battery of Alice settings
    Audit {
        /// Bob's device; defaults to the ideal multiport device at 45°
        #[arg(long)]
        bob: Option<String>,
    },
    /// Monte Carlo run of the telephone
    Telephone {
        #[arg(long, default_value_t = 1_000_000)]
        shots: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Bob's device; defaults to the ideal multiport device at 45°
        #[arg(long)]
        bob: Option<String>,
        /// Alice's device for bit 0; defaults to a PBS at 0°
        #[arg(long)]
        alice0: Option<String>,
        /// Alice's device for bit 1; defaults to a PBS at 45°
        #[arg(long)]
        alice1: Option<String>,
        /// Write every shot as CSV to this file
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PartyArg {
    Alice,
    Bob,
}

impl From<PartyArg> for Party {
    fn from(p: PartyArg) -> Self {
        match p {
            PartyArg::Alice => Party::Alice,
            PartyArg::Bob => Party::Bob,
        }
    }
}

/// Failures that are the caller's fault (exit status 2).
#[derive(Debug, Error)]
pub enum UsageError {
    #[error("{path}: {source}")]
    Spec { path: String, source: SpecError },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write transcript {path}: {source}")]
    Transcript {
        path: String,
        source: std::io::Error,
    },
    #[error("bad --pair `{0}`: {1}")]
    Pair(String, String),
    #[error("{0}")]
    Invalid(String),
}

/// Reads a device from a file, or from the argument itself if it is an
/// inline JSON object.
fn load_device(arg: &str) -> Result<DeviceSpecDocument, UsageError> {
    let (origin, text) = if arg.trim_start().starts_with('{') {
        ("<inline>".to_string(), arg.to_string())
    } else {
        let text = std::fs::read_to_string(arg).map_err(|source| UsageError::Read {
            path: arg.to_string(),
            source,
        })?;
        (arg.to_string(), text)
    };
    parse_device_spec(&text).map_err(|source| UsageError::Spec {
        path: origin,
        source,
    })
}

fn load_or(
    arg: &Option<String>,
    default: DeviceSpecDocument,
) -> Result<DeviceSpecDocument, UsageError> {
    arg.as_deref().map_or(Ok(default), load_device)
}

fn default_bob() -> DeviceSpecDocument {
    DeviceSpecDocument::IdealMichalski { omega_deg: 45.0 }
}

fn spec_value(doc: &DeviceSpecDocument) -> Value {
    serde_json::to_value(doc).expect("plain data")
}

fn matrix_value(rho: &DensityOperator) -> Value {
    let d = rho.dim();
    Value::Array(
        (0..d)
            .map(|r| {
                Value::Array(
                    (0..d)
                        .map(|c| {
                            let z = rho.op().get(r, c);
                            json!({"re": z.re, "im": z.im})
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn distribution_value(entries: &[(OutcomeLabel, f64)]) -> Value {
    Value::Array(
        entries
            .iter()
            .map(|(l, p)| json!({"outcome": l.to_string(), "probability": p}))
            .collect(),
    )
}

fn reduce(party: PartyArg, input: Value) -> ReportDocument {
    let traced = Party::from(party);
    let reduced = partial_trace(phi_plus().density(), traced).expect("valid pair");
    let distance = trace_distance(&reduced, &DensityOperator::maximally_mixed(2)).expect("2x2");
    let validity = validate_density(reduced.op(), DEFAULT_TOL);
    let mut table = Table::new(&["row", "col", "re", "im"]);
    for r in 0..2 {
        for c in 0..2 {
            let z = reduced.op().get(r, c);
            table.push(vec![json!(r), json!(c), json!(z.re), json!(z.im)]);
        }
    }
    let passed = distance <= DEFAULT_TOL && validity.passed();
    ReportDocument::new(
        "reduce",
        input,
        json!({
            "traced_out": traced,
            "reduced_state": matrix_value(&reduced),
            "trace_distance_to_maximally_mixed": distance,
            "validity": validity,
        }),
        passed,
        table,
    )
}

fn device_run(
    spec: &str,
    alpha_deg: Option<f64>,
    mut input: Value,
) -> Result<ReportDocument, UsageError> {
    let doc = load_device(spec)?;
    input["device"] = spec_value(&doc);
    let instr = doc.to_instrument();
    let rho = match alpha_deg {
        Some(a) => DensityOperator::pure(&jones_vector(a.to_radians())),
        None => DensityOperator::maximally_mixed(2),
    };
    let records = instr.apply(&rho);
    let total: f64 = records.iter().map(|r| r.probability).sum();
    let mut table = Table::new(&["outcome", "probability"]);
    let outcomes: Vec<Value> = records
        .iter()
        .map(|r| {
            table.push(vec![json!(r.label.to_string()), json!(r.probability)]);
            json!({
                "outcome": r.label.to_string(),
                "probability": r.probability,
                "post_state": r.post_state.as_ref().map(matrix_value),
            })
        })
        .collect();
    let defect = instr.completeness_defect();
    let passed = (total - 1.0).abs() <= DEFAULT_TOL && defect <= DEFAULT_TOL;
    Ok(ReportDocument::new(
        "device-run",
        input,
        json!({
            "outcomes": outcomes,
            "total_probability": total,
            "completeness_defect": defect,
        }),
        passed,
        table,
    ))
}

fn parse_pairs(
    pairs: &[String],
    a: &QuantumInstrument,
    b: &QuantumInstrument,
) -> Result<Vec<(OutcomeLabel, OutcomeLabel)>, UsageError> {
    if pairs.is_empty() {
        return Ok(same_label_pairing(a, b));
    }
    pairs
        .iter()
        .map(|p| {
            let (l, r) = p
                .split_once('=')
                .ok_or_else(|| UsageError::Pair(p.clone(), "expected A_LABEL=B_LABEL".into()))?;
            let l = l
                .trim()
                .parse()
                .map_err(|e: telephone_core::InstrumentError| {
                    UsageError::Pair(p.clone(), e.to_string())
                })?;
            let r = r
                .trim()
                .parse()
                .map_err(|e: telephone_core::InstrumentError| {
                    UsageError::Pair(p.clone(), e.to_string())
                })?;
            Ok((l, r))
        })
        .collect()
}

fn device_compare(
    a: &str,
    b: &str,
    pairs: &[String],
    tol: f64,
    mut input: Value,
) -> Result<ReportDocument, UsageError> {
    let (da, db) = (load_device(a)?, load_device(b)?);
    input["devices"] = json!([spec_value(&da), spec_value(&db)]);
    let (ia, ib) = (da.to_instrument(), db.to_instrument());
    let pairing = parse_pairs(pairs, &ia, &ib)?;
    let distance =
        instrument_distance(&ia, &ib, &pairing).map_err(|e| UsageError::Invalid(e.to_string()))?;
    let mut table = Table::new(&["metric", "value"]);
    table.push(vec![json!("distance"), json!(distance)]);
    table.push(vec![json!("tolerance"), json!(tol)]);
    Ok(ReportDocument::new(
        "device-compare",
        input,
        json!({
            "pairing": pairing
                .iter()
                .map(|(l, r)| json!([l.to_string(), r.to_string()]))
                .collect::<Vec<_>>(),
            "distance": distance,
            "tolerance": tol,
            "equivalent": distance <= tol,
        }),
        distance <= tol,
        table,
    ))
}

fn cascade_converge(
    omega_deg: f64,
    ns: &[usize],
    alpha_deg: Option<f64>,
    input: Value,
) -> Result<ReportDocument, UsageError> {
    if ns.is_empty() {
        return Err(UsageError::Invalid("--n needs at least one value".into()));
    }
    if let Some(bad) = ns.iter().find(|&&n| n < 2) {
        return Err(UsageError::Invalid(format!("n must be ≥ 2, got {bad}")));
    }
    let omega = PolarizationAngle::from_degrees(omega_deg);
    let alpha = alpha_deg.unwrap_or(omega_deg + 90.0).to_radians();
    let input_state = DensityOperator::pure(&jones_vector(alpha));
    // only the Ω⊥ component enters the cascade
    let weight = (alpha - omega.radians()).sin().powi(2);

    let mut table = Table::new(&["n", "leak_probability"]);
    let mut rows = Vec::new();
    let mut ok = true;
    let mut sorted: Vec<(usize, f64)> = Vec::new();
    for &n in ns {
        let dev = zeno_cascade(CascadeParams::new(n, omega).expect("n checked"));
        let p = dev.probabilities(&input_state);
        let leak: f64 = p
            .entries()
            .iter()
            .filter(|(l, _)| matches!(l, OutcomeLabel::Leak(_)))
            .map(|(_, p)| p)
            .sum();
        let formula = weight * worst_case_leak(n);
        ok &= (leak - formula).abs() <= DEFAULT_TOL;
        ok &= dev.completeness_defect() <= DEFAULT_TOL;
        table.push(vec![json!(n), json!(leak)]);
        rows.push(json!({
            "n": n,
            "leak_probability": leak,
            "product_formula": formula,
            "first_plus_probability": p.get(OutcomeLabel::FirstPlus),
            "last_plus_probability": p.get(OutcomeLabel::LastPlus),
        }));
        sorted.push((n, leak));
    }
    sorted.sort_by_key(|&(n, _)| n);
    let strict = weight > DEFAULT_TOL;
    let monotone = sorted.windows(2).all(|w| {
        w[0].0 == w[1].0
            || if strict {
                w[1].1 < w[0].1
            } else {
                w[1].1 <= w[0].1 + DEFAULT_TOL
            }
    });
    ok &= monotone;
    Ok(ReportDocument::new(
        "cascade-converge",
        input,
        json!({
            "omega_deg": omega_deg,
            "alpha_deg": alpha.to_degrees(),
            "rows": rows,
            "monotone_decreasing": monotone,
        }),
        ok,
        table,
    ))
}

fn audit(bob: &Option<String>, mut input: Value) -> Result<ReportDocument, UsageError> {
    let bob_doc = load_or(bob, default_bob())?;
    input["bob"] = spec_value(&bob_doc);
    let bob = bob_doc.to_instrument();
    let state = phi_plus();
    let battery = standard_alice_battery();
    let settings: Vec<QuantumInstrument> = battery.iter().map(|(_, i)| i.clone()).collect();
    let tv = marginal_invariance_audit(&state, &settings, &bob)
        .map_err(|e| UsageError::Invalid(e.to_string()))?;
    let protocol = SignalingProtocol::new(1, 0).with_bob_device(bob.clone());
    let mi = mutual_information(&telephone_joint(&protocol))
        .map_err(|e| UsageError::Invalid(e.to_string()))?;

    let mut header = vec!["setting".to_string()];
    header.extend(bob.labels().iter().map(|l| l.to_string()));
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    let mut marginals = Vec::new();
    for (name, alice) in &battery {
        let m = telephone_core::nosignal::bob_marginal(&state, alice, &bob);
        let mut row = vec![json!(name)];
        row.extend(m.entries().iter().map(|(_, p)| json!(p)));
        table.push(row);
        marginals.push(json!({"setting": name, "bob_marginal": distribution_value(m.entries())}));
    }
    let passed = tv <= NO_SIGNALING_TOL && mi <= NO_SIGNALING_TOL;
    Ok(ReportDocument::new(
        "audit",
        input,
        json!({
            "max_marginal_tv": tv,
            "analytic_mi_bits": mi,
            "tolerance": NO_SIGNALING_TOL,
            "settings": marginals,
        }),
        passed,
        table,
    ))
}

/// Shot counts 10, 100, … below `shots`, then `shots` itself.
fn checkpoints(shots: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(10u64), |&x| x.checked_mul(10))
        .take_while(|&x| x < shots)
        .collect();
    out.push(shots);
    out
}

#[allow(clippy::too_many_arguments)]
fn telephone(
    shots: u64,
    seed: u64,
    bob: &Option<String>,
    alice0: &Option<String>,
    alice1: &Option<String>,
    transcript: &Option<PathBuf>,
    mut input: Value,
) -> Result<ReportDocument, UsageError> {
    if shots == 0 {
        return Err(UsageError::Invalid("--shots must be at least 1".into()));
    }
    let bob_doc = load_or(bob, default_bob())?;
    let a0 = load_or(alice0, DeviceSpecDocument::Pbs { omega_deg: 0.0 })?;
    let a1 = load_or(alice1, DeviceSpecDocument::Pbs { omega_deg: 45.0 })?;
    input["bob"] = spec_value(&bob_doc);
    input["alice"] = json!([spec_value(&a0), spec_value(&a1)]);
    let protocol = SignalingProtocol::new(shots, seed)
        .with_encoding(a0.to_instrument(), a1.to_instrument())
        .with_bob_device(bob_doc.to_instrument());

    let mut writer = match transcript {
        Some(path) => {
            let file = File::create(path).map_err(|source| UsageError::Transcript {
                path: path.display().to_string(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            writeln!(w, "shot,sent_bit,alice_outcome,bob_outcome").map_err(|source| {
                UsageError::Transcript {
                    path: path.display().to_string(),
                    source,
                }
            })?;
            Some(w)
        }
        None => None,
    };
    let mut write_error = None;
    let run = simulate_telephone(&protocol, &checkpoints(shots), |rec| {
        if let (Some(w), None) = (writer.as_mut(), write_error.as_ref()) {
            if let Err(e) = writeln!(
                w,
                "{},{},{},{}",
                rec.shot, rec.sent_bit, rec.alice_outcome, rec.bob_outcome
            ) {
                write_error = Some(e);
            }
        }
    })
    .map_err(|e| UsageError::Invalid(e.to_string()))?;
    if let Some(w) = writer.as_mut() {
        if let Err(e) = w.flush() {
            write_error.get_or_insert(e);
        }
    }
    if let (Some(source), Some(path)) = (write_error, transcript) {
        return Err(UsageError::Transcript {
            path: path.display().to_string(),
            source,
        });
    }

    let mut table = Table::new(&["shots", "bit_error_rate", "empirical_mi_bits"]);
    for p in &run.curve {
        table.push(vec![
            json!(p.shots),
            json!(p.bit_error_rate),
            json!(p.empirical_mi_bits),
        ]);
    }
    let passed = run.report.verdict.passed();
    let mut doc = ReportDocument::new(
        "telephone",
        input,
        serde_json::to_value(&run).expect("plain data"),
        passed,
        table,
    );
    doc.seed = Some(seed);
    Ok(doc)
}

/// Result of one invocation: exit status and the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line `argv` (program name first).
///
/// Exit status 0 means every physics check passed, 1 means a check failed
/// (the report is still printed), 2 means the invocation itself was bad.
pub fn run_command<I, T>(argv: I) -> CommandOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutput {
                    status: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CommandOutput {
                    status: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let echo: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let input = json!({ "argv": echo });

    let result = match &cli.command {
        Command::Reduce { party } => Ok(reduce(*party, input)),
        Command::DeviceRun {
            spec, alpha_deg, ..
        } => device_run(spec, *alpha_deg, input),
        Command::DeviceCompare { a, b, pairs, tol } => device_compare(a, b, pairs, *tol, input),
        Command::CascadeConverge {
            omega_deg,
            n,
            alpha_deg,
        } => cascade_converge(*omega_deg, n, *alpha_deg, input),
        Command::Audit { bob } => audit(bob, input),
        Command::Telephone {
            shots,
            seed,
            bob,
            alice0,
            alice1,
            transcript,
        } => telephone(*shots, *seed, bob, alice0, alice1, transcript, input),
    };
    match result {
        Ok(doc) => CommandOutput {
            status: if doc.passed() { 0 } else { 1 },
            stdout: emit_report(&doc, cli.format),
            stderr: String::new(),
        },
        Err(e) => CommandOutput {
            status: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
