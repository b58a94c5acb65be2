//! Measurement devices as quantum instruments.
//!
//! An instrument is an ordered list of labeled branches. A branch usually
//! holds one Kraus operator; coarse-grained branches hold several, so that
//! merging outcomes keeps the exact channel action.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{DensityOperator, LinearOperator, DEFAULT_TOL};
use crate::polarization::{jones_vector, linear_state, restoring_plate, PolarizationAngle};

/// Completeness defect above which construction is rejected.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Branches less likely than this carry no post-measurement state.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeLabel {
    /// `+` port of the first beamsplitter.
    FirstPlus,
    /// `+` port of the last beamsplitter.
    LastPlus,
    /// Rejected port of intermediate cascade stage `k` (1-based).
    Leak(u32),
    PbsPlus,
    PbsMinus,
    /// A photon was detected somewhere.
    Present,
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::FirstPlus => f.write_str("FIRST_PLUS"),
            OutcomeLabel::LastPlus => f.write_str("LAST_PLUS"),
            OutcomeLabel::Leak(k) => write!(f, "LEAK_{k}"),
            OutcomeLabel::PbsPlus => f.write_str("PBS_PLUS"),
            OutcomeLabel::PbsMinus => f.write_str("PBS_MINUS"),
            OutcomeLabel::Present => f.write_str("PRESENT"),
        }
    }
}

impl FromStr for OutcomeLabel {
    type Err = InstrumentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let label = match s {
            "FIRST_PLUS" => OutcomeLabel::FirstPlus,
            "LAST_PLUS" => OutcomeLabel::LastPlus,
            "PBS_PLUS" => OutcomeLabel::PbsPlus,
            "PBS_MINUS" => OutcomeLabel::PbsMinus,
            "PRESENT" => OutcomeLabel::Present,
            _ => match s.strip_prefix("LEAK_").and_then(|k| k.parse::<u32>().ok()) {
                Some(k) if k >= 1 => OutcomeLabel::Leak(k),
                _ => return Err(InstrumentError::UnknownLabelName(s.to_string())),
            },
        };
        Ok(label)
    }
}

impl Serialize for OutcomeLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstrumentError {
    #[error("duplicate outcome label {0}")]
    DuplicateLabel(OutcomeLabel),
    #[error("completeness violated: ‖Σ K†K − I‖ = {defect:e}")]
    Completeness { defect: f64 },
    #[error("Kraus operators must be 2x2, got dimension {0}")]
    Dimension(usize),
    #[error("branch {0} has no Kraus operators")]
    EmptyBranch(OutcomeLabel),
    #[error("instrument has no branches")]
    NoBranches,
    #[error("cascade needs at least 2 beamsplitters, got {0}")]
    CascadeTooShort(usize),
    #[error("unknown outcome label `{0}`")]
    UnknownLabelName(String),
    #[error("malformed pairing: {0}")]
    MalformedPairing(String),
}

/// One outcome of an instrument and the Kraus operators realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: OutcomeLabel,
    pub kraus: Vec<LinearOperator>,
}

impl Branch {
    pub fn single(label: OutcomeLabel, kraus: LinearOperator) -> Self {
        Self {
            label,
            kraus: vec![kraus],
        }
    }

    /// Unnormalized post-measurement operator `Σ K ρ K†`.
    fn act(&self, rho: &LinearOperator) -> LinearOperator {
        self.kraus
            .iter()
            .map(|k| k.sandwich(rho).expect("dimension checked at construction"))
            .reduce(|a, b| a.add(&b).expect("same dimension"))
            .unwrap_or_else(|| LinearOperator::zeros(rho.dim()))
    }

    fn effect(&self) -> LinearOperator {
        self.kraus
            .iter()
            .map(|k| k.adjoint().matmul(k).expect("same dimension"))
            .reduce(|a, b| a.add(&b).expect("same dimension"))
            .unwrap_or_else(|| LinearOperator::zeros(2))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumInstrument {
    branches: Vec<Branch>,
}

impl QuantumInstrument {
    /// Builds an instrument with one Kraus operator per outcome.
    pub fn build(branches: Vec<(OutcomeLabel, LinearOperator)>) -> Result<Self, InstrumentError> {
        Self::from_branches(
            branches
                .into_iter()
                .map(|(label, k)| Branch::single(label, k))
                .collect(),
        )
    }

    pub fn from_branches(branches: Vec<Branch>) -> Result<Self, InstrumentError> {
        let instr = Self { branches };
        instr.validate(COMPLETENESS_TOL)?;
        Ok(instr)
    }

    /// Skips validation. Intended for test fixtures that model faulty
    /// devices; consumers such as the no-signaling audit re-validate.
    pub fn new_unchecked(branches: Vec<Branch>) -> Self {
        Self { branches }
    }

    pub fn validate(&self, tol: f64) -> Result<(), InstrumentError> {
        if self.branches.is_empty() {
            return Err(InstrumentError::NoBranches);
        }
        let mut seen = HashSet::new();
        for b in &self.branches {
            if !seen.insert(b.label) {
                return Err(InstrumentError::DuplicateLabel(b.label));
            }
            if b.kraus.is_empty() {
                return Err(InstrumentError::EmptyBranch(b.label));
            }
            if let Some(k) = b.kraus.iter().find(|k| k.dim() != 2) {
                return Err(InstrumentError::Dimension(k.dim()));
            }
        }
        let defect = self.completeness_defect();
        if defect > tol {
            return Err(InstrumentError::Completeness { defect });
        }
        Ok(())
    }

    /// `‖Σ K†K − I‖` in operator norm.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .branches
            .iter()
            .map(Branch::effect)
            .fold(LinearOperator::zeros(2), |acc, e| {
                acc.add(&e).expect("same dimension")
            });
        sum.sub(&LinearOperator::identity(2))
            .expect("same dimension")
            .operator_norm()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, label: OutcomeLabel) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == label)
    }

    pub fn labels(&self) -> Vec<OutcomeLabel> {
        self.branches.iter().map(|b| b.label).collect()
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn apply(&self, rho: &DensityOperator) -> Vec<OutcomeRecord> {
        self.branches
            .iter()
            .map(|b| {
                let out = b.act(rho.op());
                let probability = out.trace().re.max(0.0);
                let post_state = (probability >= PROBABILITY_FLOOR)
                    .then(|| DensityOperator::from_positive(&out));
                OutcomeRecord {
                    label: b.label,
                    probability,
                    post_state,
                }
            })
            .collect()
    }

    pub fn probabilities(&self, rho: &DensityOperator) -> OutcomeDistribution {
        OutcomeDistribution::new(
            self.branches
                .iter()
                .map(|b| (b.label, b.act(rho.op()).trace().re.max(0.0)))
                .collect(),
        )
    }

    /// The non-selective channel `ρ ↦ Σ_all K ρ K†`.
    pub fn channel(&self, rho: &DensityOperator) -> DensityOperator {
        let total = self
            .branches
            .iter()
            .map(|b| b.act(rho.op()))
            .fold(LinearOperator::zeros(2), |acc, o| {
                acc.add(&o).expect("same dimension")
            });
        DensityOperator::from_positive(&total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    pub label: OutcomeLabel,
    pub probability: f64,
    pub post_state: Option<DensityOperator>,
}

/// Probabilities over the outcomes of one instrument, in branch order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OutcomeDistribution {
    entries: Vec<(OutcomeLabel, f64)>,
}

impl OutcomeDistribution {
    pub fn new(entries: Vec<(OutcomeLabel, f64)>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[(OutcomeLabel, f64)] {
        &self.entries
    }

    /// Probability of `label`; zero if the instrument has no such outcome.
    pub fn get(&self, label: OutcomeLabel) -> f64 {
        self.entries
            .iter()
            .find(|(l, _)| *l == label)
            .map_or(0.0, |(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// Half the L1 distance, over the union of both label sets.
    pub fn total_variation(&self, other: &OutcomeDistribution) -> f64 {
        let mut labels: Vec<OutcomeLabel> = self.entries.iter().map(|e| e.0).collect();
        for (l, _) in &other.entries {
            if !labels.contains(l) {
                labels.push(*l);
            }
        }
        0.5 * labels
            .iter()
            .map(|&l| (self.get(l) - other.get(l)).abs())
            .sum::<f64>()
    }
}

pub fn apply_instrument(instr: &QuantumInstrument, rho: &DensityOperator) -> Vec<OutcomeRecord> {
    instr.apply(rho)
}

/// The single-outcome "do nothing but notice the photon" instrument.
pub fn identity_instrument() -> QuantumInstrument {
    QuantumInstrument::build(vec![(OutcomeLabel::Present, LinearOperator::identity(2))])
        .expect("identity is complete")
}

/// The multiport device in its many-stage limit.
///
/// Both branches emit the same ray `Ψ₊ = |Ω⟩`: `|Ω⟩⟨Ω|` for the first
/// beamsplitter and `|Ω⟩⟨Ω⊥|` for the last.
pub fn ideal_michalski(omega: PolarizationAngle) -> QuantumInstrument {
    let exit = linear_state(omega);
    let perp = linear_state(omega.orthogonal());
    QuantumInstrument::build(vec![
        (OutcomeLabel::FirstPlus, LinearOperator::outer(&exit, &exit)),
        (OutcomeLabel::LastPlus, LinearOperator::outer(&exit, &perp)),
    ])
    .expect("orthonormal basis")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeParams {
    n: usize,
    omega: PolarizationAngle,
}

impl CascadeParams {
    pub fn new(n: usize, omega: PolarizationAngle) -> Result<Self, InstrumentError> {
        if n < 2 {
            return Err(InstrumentError::CascadeTooShort(n));
        }
        Ok(Self { n, omega })
    }

    /// Number of beamsplitters.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> PolarizationAngle {
        self.omega
    }

    /// Stages after the first beamsplitter.
    pub fn stages(&self) -> usize {
        self.n - 1
    }

    /// Rotation per stage, `(π/2)/(n−1)`.
    pub fn step(&self) -> f64 {
        FRAC_PI_2 / self.stages() as f64
    }
}

/// A finite cascade of `n` beamsplitters approximating [`ideal_michalski`].
///
/// Beamsplitter 1 sits at Ω; its `+` port is `FIRST_PLUS`. The reflected
/// beam, on ray `Ω + π/2`, then meets `m = n − 1` beamsplitters whose
/// transmission axes step toward Ω by `δ = (π/2)/m`, so stage `k` passes the
/// ray `Ω + π/2 − kδ`. What a stage rejects leaves through `LEAK_k`; what
/// survives all `m` stages is on ray Ω and leaves through `LAST_PLUS`.
///
/// The stage operators are multiplied out explicitly. The resulting
/// amplitudes are `cos^(k−1)δ · sin δ` for `LEAK_k` and `cos^m δ` for
/// `LAST_PLUS`, which sum in square to one.
pub fn zeno_cascade(params: CascadeParams) -> QuantumInstrument {
    let omega = params.omega().radians();
    let step = params.step();
    let exit = jones_vector(omega);

    let mut branches = vec![Branch::single(
        OutcomeLabel::FirstPlus,
        LinearOperator::outer(&exit, &exit),
    )];
    let mut beam = jones_vector(omega + FRAC_PI_2).projector();
    for k in 1..=params.stages() {
        let axis = if k == params.stages() {
            omega
        } else {
            omega + FRAC_PI_2 - k as f64 * step
        };
        let rejected = jones_vector(axis + FRAC_PI_2).projector();
        let leak = rejected.matmul(&beam).expect("2x2");
        beam = jones_vector(axis).projector().matmul(&beam).expect("2x2");
        branches.push(Branch::single(OutcomeLabel::Leak(k as u32), leak));
    }
    branches.push(Branch::single(OutcomeLabel::LastPlus, beam));
    QuantumInstrument::from_branches(branches).expect("cascade is lossless")
}

/// Single beamsplitter at Ω with a half-wave plate on its `−` port that
/// turns `Ω⊥` back into Ω.
pub fn simplified_analyzer(omega: PolarizationAngle) -> QuantumInstrument {
    let pass = linear_state(omega);
    let perp = linear_state(omega.orthogonal());
    let reflected = restoring_plate(omega)
        .matmul(&perp.projector())
        .expect("2x2");
    QuantumInstrument::build(vec![
        (OutcomeLabel::FirstPlus, pass.projector()),
        (OutcomeLabel::LastPlus, reflected),
    ])
    .expect("unitary after a complete projective measurement")
}

/// Forgets which outcome occurred: one `PRESENT` branch holding every
/// Kraus operator of `instr`.
pub fn coarse_grain(instr: &QuantumInstrument) -> QuantumInstrument {
    let kraus = instr
        .branches()
        .iter()
        .flat_map(|b| b.kraus.iter().cloned())
        .collect();
    QuantumInstrument::new_unchecked(vec![Branch {
        label: OutcomeLabel::Present,
        kraus,
    }])
}

/// Pairs branch labels of one instrument with those of another.
pub type Pairing = Vec<(OutcomeLabel, OutcomeLabel)>;

/// Pairs every label of `a` that `b` also has with itself.
pub fn same_label_pairing(a: &QuantumInstrument, b: &QuantumInstrument) -> Pairing {
    a.labels()
        .into_iter()
        .filter(|l| b.branch(*l).is_some())
        .map(|l| (l, l))
        .collect()
}

/// Every partial one-to-one pairing between the labels of `a` and `b`,
/// including the empty one.
pub fn all_pairings(a: &QuantumInstrument, b: &QuantumInstrument) -> Vec<Pairing> {
    fn extend(
        a: &[OutcomeLabel],
        b: &[OutcomeLabel],
        used: &mut Vec<bool>,
        current: &mut Pairing,
        out: &mut Vec<Pairing>,
    ) {
        let Some((&first, rest)) = a.split_first() else {
            out.push(current.clone());
            return;
        };
        extend(rest, b, used, current, out);
        for (j, &lb) in b.iter().enumerate() {
            if !used[j] {
                used[j] = true;
                current.push((first, lb));
                extend(rest, b, used, current, out);
                current.pop();
                used[j] = false;
            }
        }
    }
    let (la, lb) = (a.labels(), b.labels());
    let mut out = Vec::new();
    extend(
        &la,
        &lb,
        &mut vec![false; lb.len()],
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// `min_φ ‖x − e^{iφ} y‖` in operator norm.
fn phase_aligned_distance(x: &LinearOperator, y: &LinearOperator) -> f64 {
    let dist = |phi: f64| {
        x.sub(&y.scale(crate::linalg::C64::from_polar(1.0, phi)))
            .expect("same dimension")
            .operator_norm()
    };
    // The Frobenius-optimal phase is a good seed; a grid guards against
    // it not being the operator-norm optimum.
    let overlap: crate::linalg::C64 = y
        .entries()
        .iter()
        .zip(x.entries())
        .map(|(b, a)| b.conj() * a)
        .sum();
    const GRID: usize = 256;
    let step = TAU / GRID as f64;
    let mut best = (overlap.arg(), dist(overlap.arg()));
    for i in 0..GRID {
        let phi = i as f64 * step;
        let d = dist(phi);
        if d < best.1 {
            best = (phi, d);
        }
    }
    // golden-section refinement around the best grid point
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if dist(m1) < dist(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.1.min(dist(0.5 * (lo + hi)))
}

fn branch_distance(xs: &[LinearOperator], ys: &[LinearOperator]) -> f64 {
    let zero = LinearOperator::zeros(2);
    (0..xs.len().max(ys.len()))
        .map(|i| {
            let x = xs.get(i).unwrap_or(&zero);
            let y = ys.get(i).unwrap_or(&zero);
            phase_aligned_distance(x, y)
        })
        .fold(0.0, f64::max)
}

/// Largest per-branch operator-norm distance between two instruments, each
/// branch compared up to its own global phase.
///
/// Branches left out of `pairing` are compared against the zero operator.
/// Multi-Kraus branches are compared operator by operator in order, the
/// shorter list padded with zeros.
pub fn instrument_distance(
    a: &QuantumInstrument,
    b: &QuantumInstrument,
    pairing: &[(OutcomeLabel, OutcomeLabel)],
) -> Result<f64, InstrumentError> {
    let mut used_a = HashSet::new();
    let mut used_b = HashSet::new();
    for &(la, lb) in pairing {
        if a.branch(la).is_none() {
            return Err(InstrumentError::MalformedPairing(format!(
                "{la} is not an outcome of the first instrument"
            )));
        }
        if b.branch(lb).is_none() {
            return Err(InstrumentError::MalformedPairing(format!(
                "{lb} is not an outcome of the second instrument"
            )));
        }
        if !used_a.insert(la) {
            return Err(InstrumentError::MalformedPairing(format!(
                "{la} paired twice"
            )));
        }
        if !used_b.insert(lb) {
            return Err(InstrumentError::MalformedPairing(format!(
                "{lb} paired twice"
            )));
        }
    }

    let mut worst = 0.0_f64;
    for &(la, lb) in pairing {
        let (ba, bb) = (a.branch(la).unwrap(), b.branch(lb).unwrap());
        worst = worst.max(branch_distance(&ba.kraus, &bb.kraus));
    }
    for br in a.branches().iter().filter(|br| !used_a.contains(&br.label)) {
        worst = worst.max(branch_distance(&br.kraus, &[]));
    }
    for br in b.branches().iter().filter(|br| !used_b.contains(&br.label)) {
        worst = worst.max(branch_distance(&[], &br.kraus));
    }
    Ok(worst)
}

/// Worst-case leak probability of a cascade, from the closed-form product
/// `1 − cos^(2m)(π/(2m))`, `m = n − 1`.
pub fn worst_case_leak(n: usize) -> f64 {
    let m = (n - 1) as f64;
    1.0 - (FRAC_PI_2 / m).cos().powf(2.0 * m)
}

/// Tolerance used when comparing instruments that should coincide.
pub const EQUIVALENCE_TOL: f64 = DEFAULT_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{trace_distance, StateVector};
    use crate::polarization::pbs_instrument;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn angle(theta: f64) -> PolarizationAngle {
        PolarizationAngle::new(theta)
    }

    fn pure(theta: f64) -> DensityOperator {
        DensityOperator::pure(&jones_vector(theta))
    }

    fn grid() -> impl Iterator<Item = f64> {
        (0..9).map(|i| i as f64 * PI / 8.0)
    }

    #[test]
    fn build_examples() {
        let h = jones_vector(0.0).projector();
        let v = jones_vector(FRAC_PI_2).projector();
        assert!(QuantumInstrument::build(vec![
            (OutcomeLabel::PbsPlus, h.clone()),
            (OutcomeLabel::PbsMinus, v.clone()),
        ])
        .is_ok());
        assert!(QuantumInstrument::build(vec![(
            OutcomeLabel::Present,
            LinearOperator::identity(2)
        )])
        .is_ok());
        let err = QuantumInstrument::build(vec![(OutcomeLabel::PbsPlus, h.clone())]).unwrap_err();
        match err {
            InstrumentError::Completeness { defect } => assert!((defect - 1.0).abs() < 1e-12),
            e => panic!("{e}"),
        }
        assert_eq!(
            QuantumInstrument::build(vec![
                (OutcomeLabel::PbsPlus, h.clone()),
                (OutcomeLabel::PbsPlus, v),
            ])
            .unwrap_err(),
            InstrumentError::DuplicateLabel(OutcomeLabel::PbsPlus)
        );
        assert_eq!(
            QuantumInstrument::build(vec![(OutcomeLabel::Present, LinearOperator::identity(4))])
                .unwrap_err(),
            InstrumentError::Dimension(4)
        );
    }

    #[test]
    fn labels_round_trip_through_text() {
        for l in [
            OutcomeLabel::FirstPlus,
            OutcomeLabel::LastPlus,
            OutcomeLabel::Leak(17),
            OutcomeLabel::PbsPlus,
            OutcomeLabel::PbsMinus,
            OutcomeLabel::Present,
        ] {
            assert_eq!(l.to_string().parse::<OutcomeLabel>().unwrap(), l);
        }
        assert!("LEAK_0".parse::<OutcomeLabel>().is_err());
        assert!("FIRST".parse::<OutcomeLabel>().is_err());
    }

    #[test]
    fn ideal_device_discriminates_diagonal_states() {
        let dev = ideal_michalski(angle(FRAC_PI_4));
        let psi_plus = jones_vector(FRAC_PI_4);

        let rec = dev.apply(&pure(FRAC_PI_4));
        assert!((rec[0].probability - 1.0).abs() < 1e-12);
        assert!(rec[1].probability < 1e-12);
        assert!(rec[1].post_state.is_none());
        let post = rec[0].post_state.as_ref().unwrap();
        assert!(trace_distance(post, &psi_plus.to_density()).unwrap() < 1e-12);

        let rec = dev.apply(&pure(0.0));
        for r in &rec {
            assert!((r.probability - 0.5).abs() < 1e-12);
            let post = r.post_state.as_ref().unwrap();
            assert!(trace_distance(post, &psi_plus.to_density()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn ideal_device_exit_ports() {
        for omega in grid() {
            let dev = ideal_michalski(angle(omega));
            let p = dev.probabilities(&pure(omega));
            assert!((p.get(OutcomeLabel::FirstPlus) - 1.0).abs() < 1e-12);
            let p = dev.probabilities(&pure(omega + FRAC_PI_2));
            assert!((p.get(OutcomeLabel::LastPlus) - 1.0).abs() < 1e-12);
            for alpha in grid() {
                let p = dev.probabilities(&pure(alpha));
                let oracle = jones_vector(alpha)
                    .inner(&jones_vector(omega))
                    .unwrap()
                    .norm_sqr();
                assert!((p.get(OutcomeLabel::FirstPlus) - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cascade_rejects_single_splitter() {
        assert_eq!(
            CascadeParams::new(1, angle(0.0)).unwrap_err(),
            InstrumentError::CascadeTooShort(1)
        );
    }

    #[test]
    fn cascade_branch_amplitudes_follow_product_formula() {
        let params = CascadeParams::new(11, angle(0.3)).unwrap();
        let dev = zeno_cascade(params);
        let (c, s) = (params.step().cos(), params.step().sin());
        let perp = jones_vector(0.3 + FRAC_PI_2);
        for (k, b) in dev.branches()[1..11].iter().enumerate() {
            assert_eq!(b.label, OutcomeLabel::Leak(k as u32 + 1));
            let norm = b.kraus[0].operator_norm();
            assert!((norm - c.powi(k as i32) * s).abs() < 1e-12);
            // the leak only responds to the Ω⊥ component
            let out = b.kraus[0].apply(&jones_vector(0.3)).unwrap();
            assert!(out.iter().all(|z| z.norm() < 1e-12));
            let out = b.kraus[0].apply(&perp).unwrap();
            let amp = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((amp - norm).abs() < 1e-12);
        }
        let last = dev.branch(OutcomeLabel::LastPlus).unwrap();
        assert!((last.kraus[0].operator_norm() - c.powi(10)).abs() < 1e-12);
    }

    #[test]
    fn cascade_last_port_emits_exit_ray() {
        let dev = zeno_cascade(CascadeParams::new(101, angle(FRAC_PI_4)).unwrap());
        let rec = dev.apply(&pure(3.0 * FRAC_PI_4));
        let last = rec
            .iter()
            .find(|r| r.label == OutcomeLabel::LastPlus)
            .unwrap();
        let post = last.post_state.as_ref().unwrap();
        assert!(trace_distance(post, &jones_vector(FRAC_PI_4).to_density()).unwrap() < 1e-12);
    }

    #[test]
    fn simplified_matches_ideal() {
        for omega in grid() {
            let a = simplified_analyzer(angle(omega));
            let b = ideal_michalski(angle(omega));
            let d = instrument_distance(&a, &b, &same_label_pairing(&a, &b)).unwrap();
            assert!(d <= 1e-12, "Ω = {omega}: {d}");
        }
    }

    #[test]
    fn distance_sees_phases_as_equal_and_signs_too() {
        let a = ideal_michalski(angle(0.2));
        let negated = QuantumInstrument::new_unchecked(
            a.branches()
                .iter()
                .map(|b| Branch {
                    label: b.label,
                    kraus: b
                        .kraus
                        .iter()
                        .map(|k| k.scale(crate::linalg::C64::from_polar(1.0, 2.1)))
                        .collect(),
                })
                .collect(),
        );
        let d = instrument_distance(&a, &negated, &same_label_pairing(&a, &negated)).unwrap();
        assert!(d < 1e-12, "{d}");
        assert_eq!(
            instrument_distance(&a, &a, &same_label_pairing(&a, &a)).unwrap(),
            0.0
        );
    }

    #[test]
    fn distance_rejects_malformed_pairings() {
        let a = ideal_michalski(angle(0.0));
        let b = pbs_instrument(angle(0.0));
        assert!(
            instrument_distance(&a, &b, &[(OutcomeLabel::PbsPlus, OutcomeLabel::PbsPlus)]).is_err()
        );
        assert!(instrument_distance(
            &a,
            &b,
            &[
                (OutcomeLabel::FirstPlus, OutcomeLabel::PbsPlus),
                (OutcomeLabel::LastPlus, OutcomeLabel::PbsPlus)
            ]
        )
        .is_err());
    }

    #[test]
    fn coarse_graining_keeps_only_presence() {
        let dev = ideal_michalski(angle(FRAC_PI_4));
        let cg = coarse_grain(&dev);
        assert_eq!(cg.labels(), vec![OutcomeLabel::Present]);
        assert!(cg.completeness_defect() < 1e-12);
        let exit = jones_vector(FRAC_PI_4).to_density();
        for alpha in grid() {
            let rec = cg.apply(&pure(alpha));
            assert!((rec[0].probability - 1.0).abs() < 1e-12);
            let post = rec[0].post_state.as_ref().unwrap();
            assert!(trace_distance(post, &exit).unwrap() < 1e-12);
        }
    }

    #[test]
    fn coarse_grained_pbs_dephases() {
        let cg = coarse_grain(&pbs_instrument(angle(0.0)));
        let h = pure(0.0);
        let out = cg.channel(&h);
        assert!(trace_distance(&out, &h).unwrap() < 1e-12);
        let d = pure(FRAC_PI_4);
        let out = cg.channel(&d);
        assert!(trace_distance(&out, &DensityOperator::maximally_mixed(2)).unwrap() < 1e-12);
    }

    #[test]
    fn coarse_graining_is_distinguishable_from_the_real_device() {
        let dev = ideal_michalski(angle(FRAC_PI_4));
        let cg = coarse_grain(&dev);
        let pairings = all_pairings(&dev, &cg);
        assert_eq!(pairings.len(), 3);
        for p in pairings {
            assert!(instrument_distance(&dev, &cg, &p).unwrap() >= 0.5);
        }
    }

    #[test]
    fn pairings_enumerate_partial_matchings() {
        let a = ideal_michalski(angle(0.0));
        let b = pbs_instrument(angle(0.0));
        // empty, 2 singletons per a-label, 2 full matchings
        assert_eq!(all_pairings(&a, &b).len(), 7);
    }

    #[test]
    fn identity_instrument_leaves_state_alone() {
        let rho = DensityOperator::pure(&StateVector::from_real(&[0.6, 0.8]).unwrap());
        let rec = identity_instrument().apply(&rho);
        assert!(trace_distance(rec[0].post_state.as_ref().unwrap(), &rho).unwrap() < 1e-12);
    }

    #[test]
    fn worst_case_leak_matches_hand_values() {
        assert!((worst_case_leak(2) - 1.0).abs() < 1e-15);
        // cos²(π/4)² = 1/4
        assert!((worst_case_leak(3) - 0.75).abs() < 1e-15);
    }
}
