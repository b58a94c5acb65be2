//! No-signaling audits and the Monte Carlo "Bell telephone".
//!
//! Alice encodes a bit by choosing which instrument to apply to her half of
//! a fresh `Φ+` pair; Bob runs his device and decodes `FIRST_PLUS` (or
//! `PBS_PLUS`) as 0 and `LAST_PLUS` (or `PBS_MINUS`) as 1. Bob's statistics
//! do not depend on Alice's choice, so the decoded bit is a coin flip.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, LN_2};

use serde::Serialize;
use thiserror::Error;

use crate::epr::{joint_statistics, phi_plus, BipartiteState, EprError, JointDistribution};
use crate::instruments::{
    coarse_grain, ideal_michalski, identity_instrument, InstrumentError, OutcomeDistribution,
    OutcomeLabel, QuantumInstrument, COMPLETENESS_TOL,
};
use crate::polarization::{pbs_instrument, PolarizationAngle};
use crate::rng::ShotRng;

/// Tolerance for exact no-signaling checks.
pub const NO_SIGNALING_TOL: f64 = 1e-12;

/// Width of the bit-error-rate acceptance band in binomial standard deviations.
pub const BER_SIGMAS: f64 = 4.0;

/// Tail exponent `x` for the chi-square bound on the plug-in MI estimate;
/// the bound is exceeded with probability at most `e^-x` under independence.
pub const MI_TAIL_EXPONENT: f64 = 20.0;

/// The `1 − ε` success probability claimed for the telephone. Narrative only.
pub const REFUTED_CLAIM_PROBABILITY: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoSignalError {
    #[error("invalid instrument for {role}: {source}")]
    Instrument {
        role: String,
        source: InstrumentError,
    },
    #[error(transparent)]
    Epr(#[from] EprError),
    #[error("at least one Alice setting is required")]
    EmptySettings,
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("distribution sums to {total}, not 1")]
    Unnormalized { total: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_checks(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

fn checked(instr: &QuantumInstrument, role: impl Into<String>) -> Result<(), NoSignalError> {
    instr
        .validate(COMPLETENESS_TOL)
        .map_err(|source| NoSignalError::Instrument {
            role: role.into(),
            source,
        })
}

/// Bob's outcome distribution when Alice applies `alice` to her half.
pub fn bob_marginal(
    state: &BipartiteState,
    alice: &QuantumInstrument,
    bob: &QuantumInstrument,
) -> OutcomeDistribution {
    joint_statistics(state, alice, bob).bob_marginal()
}

/// Largest total-variation distance between Bob's outcome distributions
/// over all pairs of Alice settings.
pub fn marginal_invariance_audit(
    state: &BipartiteState,
    alice_settings: &[QuantumInstrument],
    bob: &QuantumInstrument,
) -> Result<f64, NoSignalError> {
    if alice_settings.is_empty() {
        return Err(NoSignalError::EmptySettings);
    }
    checked(bob, "bob")?;
    for (i, a) in alice_settings.iter().enumerate() {
        checked(a, format!("alice setting {i}"))?;
    }
    let marginals: Vec<_> = alice_settings
        .iter()
        .map(|a| bob_marginal(state, a, bob))
        .collect();
    let mut worst = 0.0_f64;
    for (i, p) in marginals.iter().enumerate() {
        for q in &marginals[i + 1..] {
            worst = worst.max(p.total_variation(q));
        }
    }
    Ok(worst)
}

/// Plug-in mutual information in bits, with `0 log 0 = 0`.
pub fn mutual_information<A, B>(joint: &JointDistribution<A, B>) -> Result<f64, NoSignalError>
where
    A: Clone + PartialEq,
    B: Clone + PartialEq,
{
    let total = joint.total();
    if (total - 1.0).abs() > 1e-9 {
        return Err(NoSignalError::Unnormalized { total });
    }
    let pa = joint.row_marginal();
    let pb = joint.col_marginal();
    let mut mi = 0.0;
    for (r, &a) in pa.iter().enumerate() {
        for (c, &b) in pb.iter().enumerate() {
            let p = joint.at(r, c);
            if p > 0.0 {
                mi += p * (p / (a * b)).log2();
            }
        }
    }
    if mi < 0.0 && mi > -1e-12 {
        mi = 0.0;
    }
    Ok(mi)
}

/// Upper bound on the plug-in MI of `shots` samples from an independent
/// `rows × cols` table, from the Laurent–Massart chi-square tail bound
/// `k + 2√(kx) + 2x` applied to `2N ln2 · I ~ χ²_k`.
pub fn mi_noise_bound(shots: u64, rows: usize, cols: usize) -> f64 {
    let k = ((rows.max(1) - 1) * (cols.max(1) - 1)) as f64;
    let x = MI_TAIL_EXPONENT;
    (k + 2.0 * (k * x).sqrt() + 2.0 * x) / (2.0 * shots as f64 * LN_2)
}

/// `BER_SIGMAS` binomial standard deviations of a fair coin over `n` trials.
pub fn ber_bound(n: u64) -> f64 {
    BER_SIGMAS * 0.5 / (n as f64).sqrt()
}

/// Bob's reading of his device; `None` for outcomes that carry no bit.
pub fn decode_bob(label: OutcomeLabel) -> Option<u8> {
    match label {
        OutcomeLabel::FirstPlus | OutcomeLabel::PbsPlus => Some(0),
        OutcomeLabel::LastPlus | OutcomeLabel::PbsMinus => Some(1),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalingProtocol {
    /// Alice's instrument for bit 0 and bit 1.
    pub encoding: [QuantumInstrument; 2],
    pub bob_device: QuantumInstrument,
    pub shots: u64,
    pub seed: u64,
}

impl SignalingProtocol {
    /// Alice steers with a PBS at 0 or π/4; Bob uses the ideal device at π/4.
    pub fn new(shots: u64, seed: u64) -> Self {
        Self {
            encoding: [
                pbs_instrument(PolarizationAngle::new(0.0)),
                pbs_instrument(PolarizationAngle::new(FRAC_PI_4)),
            ],
            bob_device: ideal_michalski(PolarizationAngle::new(FRAC_PI_4)),
            shots,
            seed,
        }
    }

    pub fn with_encoding(mut self, bit0: QuantumInstrument, bit1: QuantumInstrument) -> Self {
        self.encoding = [bit0, bit1];
        self
    }

    pub fn with_bob_device(mut self, bob: QuantumInstrument) -> Self {
        self.bob_device = bob;
        self
    }

    pub fn validate(&self) -> Result<(), NoSignalError> {
        if self.shots == 0 {
            return Err(NoSignalError::ZeroShots);
        }
        checked(&self.encoding[0], "alice bit 0")?;
        checked(&self.encoding[1], "alice bit 1")?;
        checked(&self.bob_device, "bob")
    }
}

/// Exact joint distribution of Alice's (uniform) bit and Bob's outcome.
pub fn telephone_joint(protocol: &SignalingProtocol) -> JointDistribution<u8, OutcomeLabel> {
    let state = phi_plus();
    let labels = protocol.bob_device.labels();
    let mut table = Vec::with_capacity(2 * labels.len());
    for alice in &protocol.encoding {
        let m = bob_marginal(&state, alice, &protocol.bob_device);
        table.extend(labels.iter().map(|&l| 0.5 * m.get(l)));
    }
    JointDistribution::new(vec![0, 1], labels, table).expect("2 x outcomes")
}

/// Probability that Bob's decoded bit is wrong, given that it decoded.
fn analytic_bit_error_rate(joint: &JointDistribution<u8, OutcomeLabel>) -> f64 {
    let mut wrong = 0.0;
    let mut decoded = 0.0;
    for (r, &bit) in joint.rows().iter().enumerate() {
        for (c, &label) in joint.cols().iter().enumerate() {
            if let Some(guess) = decode_bob(label) {
                decoded += joint.at(r, c);
                if guess != bit {
                    wrong += joint.at(r, c);
                }
            }
        }
    }
    if decoded > 0.0 {
        wrong / decoded
    } else {
        0.5
    }
}

/// Verdict and statistics of one telephone run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub shots: u64,
    pub seed: u64,
    pub max_marginal_tv: f64,
    pub analytic_mi_bits: f64,
    pub analytic_bit_error_rate: f64,
    pub empirical_mi_bits: f64,
    pub empirical_mi_bound: f64,
    /// Errors among shots where Bob's outcome decoded to a bit; 0.5 if none did.
    pub bit_error_rate: f64,
    pub bit_error_rate_bound: f64,
    pub decoded_shots: u64,
    pub refuted_claim_probability: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShotRecord {
    pub shot: u64,
    pub sent_bit: u8,
    pub alice_outcome: OutcomeLabel,
    pub bob_outcome: OutcomeLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub shots: u64,
    pub bit_error_rate: f64,
    pub empirical_mi_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelephoneRun {
    pub report: AuditReport,
    pub curve: Vec<CurvePoint>,
}

/// Index of the first cumulative weight exceeding `u · total`.
fn draw(cumulative: &[f64], u: f64) -> usize {
    let total = *cumulative.last().expect("nonempty");
    let target = u * total;
    cumulative
        .iter()
        .position(|&c| target < c)
        .unwrap_or_else(|| {
            // u·total rounded onto the last boundary; take the last live entry
            let mut i = cumulative.len() - 1;
            while i > 0 && cumulative[i] == cumulative[i - 1] {
                i -= 1;
            }
            i
        })
}

fn cumsum(weights: impl IntoIterator<Item = f64>) -> Vec<f64> {
    weights
        .into_iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

/// Per-bit sampling tables: Alice's outcome, then Bob's outcome given it.
struct Sampler {
    alice_labels: [Vec<OutcomeLabel>; 2],
    alice_cum: [Vec<f64>; 2],
    bob_cum: [Vec<Vec<f64>>; 2],
}

impl Sampler {
    fn new(protocol: &SignalingProtocol) -> Self {
        let state = phi_plus();
        let tables = protocol
            .encoding
            .each_ref()
            .map(|alice| joint_statistics(&state, alice, &protocol.bob_device));
        Self {
            alice_labels: tables.each_ref().map(|t| t.rows().to_vec()),
            alice_cum: tables.each_ref().map(|t| cumsum(t.row_marginal())),
            bob_cum: tables.each_ref().map(|t| {
                (0..t.rows().len())
                    .map(|r| cumsum((0..t.cols().len()).map(|c| t.at(r, c))))
                    .collect()
            }),
        }
    }
}

fn empirical_stats(counts: &[[u64; 2]], labels: &[OutcomeLabel], n: u64) -> (f64, f64, u64) {
    let mut table = Vec::with_capacity(2 * labels.len());
    for bit in 0..2 {
        table.extend(counts.iter().map(|c| c[bit] as f64 / n as f64));
    }
    let joint = JointDistribution::new(vec![0u8, 1], labels.to_vec(), table).expect("shape");
    let mi = mutual_information(&joint).expect("frequencies are normalized");

    let mut wrong = 0;
    let mut decoded = 0;
    for (c, &label) in labels.iter().enumerate() {
        if let Some(guess) = decode_bob(label) {
            decoded += counts[c][0] + counts[c][1];
            wrong += counts[c][1 - guess as usize];
        }
    }
    let ber = if decoded > 0 {
        wrong as f64 / decoded as f64
    } else {
        0.5
    };
    (ber, mi, decoded)
}

/// Runs the telephone shot by shot.
///
/// Each shot consumes exactly three draws from [`ShotRng`]: Alice's bit,
/// then a uniform selecting Alice's outcome, then a uniform selecting Bob's
/// outcome conditioned on Alice's. `on_shot` sees every shot in order;
/// `checkpoints` lists shot counts at which to record a [`CurvePoint`].
pub fn simulate_telephone(
    protocol: &SignalingProtocol,
    checkpoints: &[u64],
    mut on_shot: impl FnMut(&ShotRecord),
) -> Result<TelephoneRun, NoSignalError> {
    protocol.validate()?;
    let bob_labels = protocol.bob_device.labels();
    let sampler = Sampler::new(protocol);
    let mut rng = ShotRng::new(protocol.seed);
    let mut counts = vec![[0u64; 2]; bob_labels.len()];
    let mut curve = Vec::new();

    for shot in 0..protocol.shots {
        let bit = rng.next_bit();
        let b = bit as usize;
        let a_idx = draw(&sampler.alice_cum[b], rng.next_unit());
        let bob_idx = draw(&sampler.bob_cum[b][a_idx], rng.next_unit());
        counts[bob_idx][b] += 1;
        on_shot(&ShotRecord {
            shot,
            sent_bit: bit,
            alice_outcome: sampler.alice_labels[b][a_idx],
            bob_outcome: bob_labels[bob_idx],
        });
        let done = shot + 1;
        if checkpoints.contains(&done) {
            let (ber, mi, _) = empirical_stats(&counts, &bob_labels, done);
            curve.push(CurvePoint {
                shots: done,
                bit_error_rate: ber,
                empirical_mi_bits: mi,
            });
        }
    }

    let joint = telephone_joint(protocol);
    let analytic_mi_bits = mutual_information(&joint)?;
    let max_marginal_tv =
        marginal_invariance_audit(&phi_plus(), &protocol.encoding, &protocol.bob_device)?;
    let (bit_error_rate, empirical_mi_bits, decoded_shots) =
        empirical_stats(&counts, &bob_labels, protocol.shots);
    let empirical_mi_bound = mi_noise_bound(protocol.shots, 2, bob_labels.len());
    let bit_error_rate_bound = ber_bound(decoded_shots.max(1));

    let ok = max_marginal_tv <= NO_SIGNALING_TOL
        && analytic_mi_bits <= NO_SIGNALING_TOL
        && empirical_mi_bits <= empirical_mi_bound
        && (decoded_shots == 0 || (bit_error_rate - 0.5).abs() <= bit_error_rate_bound);

    Ok(TelephoneRun {
        report: AuditReport {
            shots: protocol.shots,
            seed: protocol.seed,
            max_marginal_tv,
            analytic_mi_bits,
            analytic_bit_error_rate: analytic_bit_error_rate(&joint),
            empirical_mi_bits,
            empirical_mi_bound,
            bit_error_rate,
            bit_error_rate_bound,
            decoded_shots,
            refuted_claim_probability: REFUTED_CLAIM_PROBABILITY,
            verdict: Verdict::from_checks(ok),
        },
        curve,
    })
}

pub fn run_telephone(protocol: &SignalingProtocol) -> Result<AuditReport, NoSignalError> {
    simulate_telephone(protocol, &[], |_| {}).map(|run| run.report)
}

/// The Alice settings the CLI audit runs against: a PBS grid from 0 to π/2,
/// no measurement at all, and the coarse-grained multiport device.
pub fn standard_alice_battery() -> Vec<(String, QuantumInstrument)> {
    let mut out: Vec<(String, QuantumInstrument)> = (0..5)
        .map(|i| {
            let theta = i as f64 * FRAC_PI_8;
            (
                format!("pbs({}deg)", theta.to_degrees()),
                pbs_instrument(PolarizationAngle::new(theta)),
            )
        })
        .collect();
    out.push(("identity".to_string(), identity_instrument()));
    out.push((
        "coarse_grained(ideal_michalski(45deg))".to_string(),
        coarse_grain(&ideal_michalski(PolarizationAngle::new(FRAC_PI_4))),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::Branch;
    use crate::linalg::LinearOperator;

    #[test]
    fn mutual_information_examples() {
        let uniform = JointDistribution::new(vec![0u8, 1], vec![0u8, 1], vec![0.25; 4]).unwrap();
        assert_eq!(mutual_information(&uniform).unwrap(), 0.0);

        let correlated =
            JointDistribution::new(vec![0u8, 1], vec![0u8, 1], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&correlated).unwrap() - 1.0).abs() < 1e-15);

        let bad = JointDistribution::new(vec![0u8, 1], vec![0u8, 1], vec![0.5; 4]).unwrap();
        assert!(matches!(
            mutual_information(&bad),
            Err(NoSignalError::Unnormalized { .. })
        ));
    }

    #[test]
    fn telephone_joint_carries_no_information() {
        let joint = telephone_joint(&SignalingProtocol::new(1, 0));
        assert!(mutual_information(&joint).unwrap() <= 1e-12);
        let (pa, pb) = (joint.row_marginal(), joint.col_marginal());
        for (r, a) in pa.iter().enumerate() {
            for (c, b) in pb.iter().enumerate() {
                assert!((joint.at(r, c) - a * b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn audit_over_pbs_grid_and_identity() {
        let state = phi_plus();
        let bob = ideal_michalski(PolarizationAngle::new(FRAC_PI_4));
        let grid: Vec<_> = (0..5)
            .map(|i| pbs_instrument(PolarizationAngle::new(i as f64 * FRAC_PI_8)))
            .collect();
        assert!(marginal_invariance_audit(&state, &grid, &bob).unwrap() <= 1e-12);

        let pair = [
            identity_instrument(),
            pbs_instrument(PolarizationAngle::new(FRAC_PI_4)),
        ];
        assert!(marginal_invariance_audit(&state, &pair, &bob).unwrap() <= 1e-12);
        assert_eq!(
            marginal_invariance_audit(&state, &[], &bob).unwrap_err(),
            NoSignalError::EmptySettings
        );
    }

    #[test]
    fn audit_rejects_trace_decreasing_alice() {
        let broken = QuantumInstrument::new_unchecked(vec![Branch::single(
            OutcomeLabel::PbsPlus,
            LinearOperator::identity(2).scale(crate::linalg::C64::new(0.5, 0.0)),
        )]);
        let err = marginal_invariance_audit(
            &phi_plus(),
            &[identity_instrument(), broken],
            &ideal_michalski(PolarizationAngle::new(0.0)),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            NoSignalError::Instrument {
                source: InstrumentError::Completeness { .. },
                ..
            }
        ));
    }

    #[test]
    fn zero_shots_is_rejected() {
        assert_eq!(
            run_telephone(&SignalingProtocol::new(0, 1)).unwrap_err(),
            NoSignalError::ZeroShots
        );
    }

    #[test]
    fn same_seed_same_report() {
        let p = SignalingProtocol::new(20_000, 7);
        assert_eq!(run_telephone(&p).unwrap(), run_telephone(&p).unwrap());
        let other = run_telephone(&SignalingProtocol::new(20_000, 8)).unwrap();
        assert_ne!(
            run_telephone(&p).unwrap().bit_error_rate,
            other.bit_error_rate
        );
    }

    #[test]
    fn draw_picks_the_right_bucket() {
        let cum = [0.25, 0.25, 1.0];
        assert_eq!(draw(&cum, 0.0), 0);
        assert_eq!(draw(&cum, 0.2499), 0);
        assert_eq!(draw(&cum, 0.25), 2);
        assert_eq!(draw(&cum, 0.9999), 2);
        // mass that falls short of 1 from rounding
        let short = [0.5, 0.999_999_999_999, 0.999_999_999_999];
        assert_eq!(draw(&short, 0.999_999_999_999_9), 1);
    }

    #[test]
    fn decoding() {
        assert_eq!(decode_bob(OutcomeLabel::FirstPlus), Some(0));
        assert_eq!(decode_bob(OutcomeLabel::LastPlus), Some(1));
        assert_eq!(decode_bob(OutcomeLabel::Leak(3)), None);
        assert_eq!(decode_bob(OutcomeLabel::Present), None);
    }

    #[test]
    fn noise_bound_scales_inversely_with_shots() {
        let b = mi_noise_bound(1_000_000, 2, 2);
        assert!(b < 1e-4);
        assert!((mi_noise_bound(2_000_000, 2, 2) - b / 2.0).abs() < 1e-18);
        assert!((ber_bound(1_000_000) - 0.002).abs() < 1e-15);
    }
}
