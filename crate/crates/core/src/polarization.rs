//! Jones-calculus elements for linear polarization.
//!
//! Angles are radians here; degree conversion happens only at the CLI
//! boundary.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use serde::Serialize;

use crate::instruments::{OutcomeLabel, QuantumInstrument};
use crate::linalg::{LinearOperator, StateVector, C64};

/// A Jones vector in the `{H, V}` basis. Always two-dimensional.
pub type JonesVector = StateVector;

/// Direction of linear polarization, stored modulo π in `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct PolarizationAngle(f64);

impl PolarizationAngle {
    pub fn new(radians: f64) -> Self {
        let mut theta = radians.rem_euclid(PI);
        // rem_euclid can round up to exactly π for tiny negative inputs
        if theta >= PI {
            theta = 0.0;
        }
        Self(theta)
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self::new(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// The orthogonal direction, `θ + π/2`.
    pub fn orthogonal(self) -> Self {
        Self::new(self.0 + FRAC_PI_2)
    }

    /// `self + delta`.
    pub fn offset(self, delta: f64) -> Self {
        Self::new(self.0 + delta)
    }
}

impl fmt::Display for PolarizationAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.degrees())
    }
}

/// `cos θ |H⟩ + sin θ |V⟩` for a raw angle, without reducing modulo π.
///
/// Reducing would flip the sign of the vector for angles past π; use this
/// where a continuous family of vectors is needed.
pub fn jones_vector(theta: f64) -> JonesVector {
    StateVector::new(vec![C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)])
        .expect("unit vector")
}

pub fn linear_state(theta: PolarizationAngle) -> JonesVector {
    jones_vector(theta.radians())
}

/// `[[cos δ, −sin δ], [sin δ, cos δ]]`, mapping polarization φ to φ + δ.
pub fn rotation_operator(delta: f64) -> LinearOperator {
    let (s, c) = delta.sin_cos();
    LinearOperator::from_real_rows([[c, -s], [s, c]]).expect("2x2")
}

/// Half-wave plate with fast axis at `axis`: reflects polarization φ to 2·axis − φ.
pub fn half_wave_plate(axis: PolarizationAngle) -> LinearOperator {
    let (s, c) = (2.0 * axis.radians()).sin_cos();
    LinearOperator::from_real_rows([[c, s], [s, -c]]).expect("2x2")
}

/// The half-wave plate that turns the `Ω⊥` ray back into `Ω`.
pub fn restoring_plate(omega: PolarizationAngle) -> LinearOperator {
    half_wave_plate(omega.offset(FRAC_PI_4))
}

/// Polarizing beamsplitter at `omega` as a projective two-outcome instrument.
pub fn pbs_instrument(omega: PolarizationAngle) -> QuantumInstrument {
    QuantumInstrument::build(vec![
        (OutcomeLabel::PbsPlus, linear_state(omega).projector()),
        (
            OutcomeLabel::PbsMinus,
            linear_state(omega.orthogonal()).projector(),
        ),
    ])
    .expect("projectors onto an orthonormal basis are complete")
}
