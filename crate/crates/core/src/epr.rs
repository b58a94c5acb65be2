//! The shared polarization-entangled pair and joint Alice–Bob statistics.
//!
//! Alice's instrument acts as `K ⊗ I`, Bob's as `I ⊗ L`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Display;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::instruments::{OutcomeDistribution, OutcomeLabel, QuantumInstrument, PROBABILITY_FLOOR};
use crate::linalg::{
    partial_trace, partial_trace_op, validate_density, DensityOperator, LinalgError,
    LinearOperator, Party, StateVector, C64, DEFAULT_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EprError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("bipartite state must be 4-dimensional, got {0}")]
    NotBipartite(usize),
    #[error("{0} is not an outcome of the instrument")]
    UnknownOutcome(OutcomeLabel),
    #[error("conditional state undefined: P({label}) = {probability:e}")]
    UndefinedConditional {
        label: OutcomeLabel,
        probability: f64,
    },
    #[error("table has {got} entries for {rows}x{cols} labels")]
    TableShape {
        rows: usize,
        cols: usize,
        got: usize,
    },
}

/// A two-photon state with Alice in the first slot.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    rho: DensityOperator,
}

impl BipartiteState {
    pub fn new(rho: DensityOperator) -> Result<Self, EprError> {
        if rho.dim() != 4 {
            return Err(EprError::NotBipartite(rho.dim()));
        }
        for party in [Party::Alice, Party::Bob] {
            let reduced = partial_trace(&rho, party)?;
            let report = validate_density(reduced.op(), DEFAULT_TOL);
            if !report.passed() {
                return Err(LinalgError::InvalidDensity(report).into());
            }
        }
        Ok(Self { rho })
    }

    pub fn from_pure(state: &StateVector) -> Result<Self, EprError> {
        Self::new(state.to_density())
    }

    pub fn density(&self) -> &DensityOperator {
        &self.rho
    }

    /// State of the party that remains after tracing out `traced_out`.
    pub fn reduced(&self, traced_out: Party) -> DensityOperator {
        partial_trace(&self.rho, traced_out).expect("validated at construction")
    }
}

/// Amplitudes of `(|HH⟩ + |VV⟩)/√2`.
pub fn phi_plus_vector() -> StateVector {
    StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).expect("normalized")
}

pub fn phi_plus() -> BipartiteState {
    BipartiteState::from_pure(&phi_plus_vector()).expect("valid pure state")
}

/// A probability table indexed by a row label and a column label.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<A = OutcomeLabel, B = OutcomeLabel> {
    rows: Vec<A>,
    cols: Vec<B>,
    table: Vec<f64>,
}

impl<A: Clone + PartialEq, B: Clone + PartialEq> JointDistribution<A, B> {
    /// `table` is row-major, `rows.len() × cols.len()`.
    pub fn new(rows: Vec<A>, cols: Vec<B>, table: Vec<f64>) -> Result<Self, EprError> {
        if table.len() != rows.len() * cols.len() {
            return Err(EprError::TableShape {
                rows: rows.len(),
                cols: cols.len(),
                got: table.len(),
            });
        }
        Ok(Self { rows, cols, table })
    }

    pub fn rows(&self) -> &[A] {
        &self.rows
    }

    pub fn cols(&self) -> &[B] {
        &self.cols
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.table[row * self.cols.len() + col]
    }

    pub fn get(&self, row: &A, col: &B) -> f64 {
        let r = self.rows.iter().position(|x| x == row);
        let c = self.cols.iter().position(|x| x == col);
        match (r, c) {
            (Some(r), Some(c)) => self.at(r, c),
            _ => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.table.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        (0..self.rows.len())
            .map(|r| (0..self.cols.len()).map(|c| self.at(r, c)).sum())
            .collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.cols.len())
            .map(|c| (0..self.rows.len()).map(|r| self.at(r, c)).sum())
            .collect()
    }
}

impl<A: Clone + PartialEq> JointDistribution<A, OutcomeLabel> {
    /// Bob's outcome distribution, summed over Alice.
    pub fn bob_marginal(&self) -> OutcomeDistribution {
        OutcomeDistribution::new(self.cols.iter().copied().zip(self.col_marginal()).collect())
    }
}

impl<B: Clone + PartialEq> JointDistribution<OutcomeLabel, B> {
    pub fn alice_marginal(&self) -> OutcomeDistribution {
        OutcomeDistribution::new(self.rows.iter().copied().zip(self.row_marginal()).collect())
    }
}

impl<A: Display, B: Display> Serialize for JointDistribution<A, B> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Cell {
            alice: String,
            bob: String,
            probability: f64,
        }
        let mut seq = serializer.serialize_seq(Some(self.table.len()))?;
        for (r, a) in self.rows.iter().enumerate() {
            for (c, b) in self.cols.iter().enumerate() {
                seq.serialize_element(&Cell {
                    alice: a.to_string(),
                    bob: b.to_string(),
                    probability: self.table[r * self.cols.len() + c],
                })?;
            }
        }
        seq.end()
    }
}

fn lift(k: &LinearOperator, party: Party) -> LinearOperator {
    let id = LinearOperator::identity(2);
    match party {
        Party::Alice => k.tensor(&id),
        Party::Bob => id.tensor(k),
    }
}

/// `P(a, b) = Σ tr[(K ⊗ L) ρ (K ⊗ L)†]` over the Kraus operators of each branch.
pub fn joint_statistics(
    state: &BipartiteState,
    alice: &QuantumInstrument,
    bob: &QuantumInstrument,
) -> JointDistribution {
    let rho = state.density().op();
    let mut table = Vec::with_capacity(alice.len() * bob.len());
    for a in alice.branches() {
        for b in bob.branches() {
            let mut p = 0.0;
            for k in &a.kraus {
                for l in &b.kraus {
                    p += k.tensor(l).sandwich(rho).expect("4x4").trace().re;
                }
            }
            table.push(p.max(0.0));
        }
    }
    JointDistribution::new(alice.labels(), bob.labels(), table).expect("shape by construction")
}

/// Probability of Alice's `outcome` and Bob's state given that outcome.
pub fn conditional_bob_state(
    state: &BipartiteState,
    alice: &QuantumInstrument,
    outcome: OutcomeLabel,
) -> Result<(f64, DensityOperator), EprError> {
    let branch = alice
        .branch(outcome)
        .ok_or(EprError::UnknownOutcome(outcome))?;
    let rho = state.density().op();
    let mut unnormalized = LinearOperator::zeros(2);
    for k in &branch.kraus {
        let post = lift(k, Party::Alice).sandwich(rho)?;
        unnormalized = unnormalized.add(&partial_trace_op(&post, Party::Alice)?)?;
    }
    let probability = unnormalized.trace().re;
    if probability < PROBABILITY_FLOOR {
        return Err(EprError::UndefinedConditional {
            label: outcome,
            probability,
        });
    }
    Ok((probability, DensityOperator::from_positive(&unnormalized)))
}

/// `Σ_a p(a) ρ_B|a` over every outcome of Alice's instrument with nonzero
/// probability.
pub fn bob_outcome_mixture(
    state: &BipartiteState,
    alice: &QuantumInstrument,
) -> Result<DensityOperator, EprError> {
    let mut mix = LinearOperator::zeros(2);
    for label in alice.labels() {
        match conditional_bob_state(state, alice, label) {
            Ok((p, rho)) => mix = mix.add(&rho.op().scale(C64::new(p, 0.0)))?,
            Err(EprError::UndefinedConditional { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(DensityOperator::with_tolerance(mix, 1e-10)?)
}
