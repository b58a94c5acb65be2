//! Small-dimension complex linear algebra.
//!
//! Everything here works on one or two polarization qubits, so matrices are
//! at most 4×4 and stored densely in row-major order. The single-qubit basis
//! order is `H, V`; two-qubit objects are Alice-slot-major, giving the basis
//! order `HH, HV, VH, VV`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Complex amplitude type used throughout the crate.
pub type C64 = Complex64;

/// Default tolerance for exact-algebra assertions.
pub const DEFAULT_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("cannot take the tensor product of a state vector with an operator")]
    KindMismatch,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("unsupported dimension {0} (expected 2 or 4)")]
    UnsupportedDimension(usize),
    #[error("expected {expected} entries, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("non-finite entry")]
    NonFinite,
    #[error("zero vector cannot be normalized")]
    ZeroNorm,
    #[error("invalid density operator: {0}")]
    InvalidDensity(DensityReport),
}

fn check_dim(dim: usize) -> Result<(), LinalgError> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(LinalgError::UnsupportedDimension(d)),
    }
}

fn check_finite(values: &[C64]) -> Result<(), LinalgError> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// A normalized pure state of one (dim 2) or two (dim 4) qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Builds a state from amplitudes, normalizing them.
    pub fn new(amps: Vec<C64>) -> Result<Self, LinalgError> {
        check_dim(amps.len())?;
        check_finite(&amps)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(LinalgError::ZeroNorm);
        }
        Ok(Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    /// Builds a state from real amplitudes, normalizing them.
    pub fn from_real(amps: &[f64]) -> Result<Self, LinalgError> {
        Self::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Computational basis vector `index` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self, LinalgError> {
        check_dim(dim)?;
        if index >= dim {
            return Err(LinalgError::WrongLength {
                expected: dim,
                got: index + 1,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64, LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Magnitude of the overlap, `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &StateVector) -> Result<f64, LinalgError> {
        self.inner(other).map(|z| z.norm())
    }

    /// Equality up to a global phase.
    pub fn same_ray(&self, other: &StateVector, tol: f64) -> bool {
        self.overlap(other)
            .map(|o| (o - 1.0).abs() <= tol)
            .unwrap_or(false)
    }

    /// The projector `|self⟩⟨self|`.
    pub fn projector(&self) -> LinearOperator {
        LinearOperator::outer(self, self)
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            op: self.projector(),
        }
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }
}

/// A square complex matrix of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl LinearOperator {
    /// Builds an operator from row-major entries.
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self, LinalgError> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(LinalgError::WrongLength {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        check_finite(&entries)?;
        Ok(Self { dim, entries })
    }

    /// Builds a real operator from its rows.
    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Result<Self, LinalgError> {
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::from_entries(N, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    /// The outer product `|ket⟩⟨bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Self {
        let dim = ket.dim();
        debug_assert_eq!(dim, bra.dim());
        let mut entries = Vec::with_capacity(dim * dim);
        for k in ket.amplitudes() {
            for b in bra.amplitudes() {
                entries.push(k * b.conj());
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    fn same_dim(&self, other: &Self) -> Result<(), LinalgError> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(LinalgError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self { dim: d, entries }
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_dim(other)?;
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * other.entries[k * d + c];
                }
            }
        }
        Ok(Self { dim: d, entries })
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&a| a * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `self · |v⟩`, left unnormalized.
    pub fn apply(&self, v: &StateVector) -> Result<Vec<C64>, LinalgError> {
        if v.dim() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                left: self.dim,
                right: v.dim(),
            });
        }
        let d = self.dim;
        Ok((0..d)
            .map(|r| (0..d).map(|c| self.get(r, c) * v.amplitudes()[c]).sum())
            .collect())
    }

    /// `self · rho · self†`.
    pub fn sandwich(&self, rho: &Self) -> Result<Self, LinalgError> {
        self.matmul(rho)?.matmul(&self.adjoint())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut entries = vec![ZERO; d * d];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.get(ar, ac);
                for br in 0..db {
                    for bc in 0..db {
                        entries[(ar * db + br) * d + ac * db + bc] = a * other.get(br, bc);
                    }
                }
            }
        }
        Self { dim: d, entries }
    }

    /// Largest entrywise deviation from `self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for r in 0..d {
            for c in 0..d {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint())
            .expect("same dimension")
            .scale(C64::new(0.5, 0.0))
    }

    /// Eigenvalues of the Hermitian part of `self`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = self.hermitian_part();
        if h.dim == 2 {
            let a = h.get(0, 0).re;
            let d = h.get(1, 1).re;
            let b = h.get(0, 1);
            let mean = 0.5 * (a + d);
            let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            return vec![mean - radius, mean + radius];
        }
        // A + iB Hermitian embeds as the real symmetric [[A, -B], [B, A]],
        // whose spectrum is that of A + iB with every eigenvalue doubled.
        let n = h.dim;
        let m = 2 * n;
        let mut real = vec![0.0; m * m];
        for r in 0..n {
            for c in 0..n {
                let z = h.get(r, c);
                real[r * m + c] = z.re;
                real[(r + n) * m + c + n] = z.re;
                real[r * m + c + n] = -z.im;
                real[(r + n) * m + c] = z.im;
            }
        }
        let mut eig = symmetric_jacobi_eigenvalues(real, m);
        eig.sort_by(f64::total_cmp);
        eig.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    }

    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        let gram = self.adjoint().matmul(self).expect("same dimension");
        gram.hermitian_eigenvalues()
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, LinalgError> {
        self.same_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Cyclic Jacobi rotations on a real symmetric matrix; returns the diagonal.
fn symmetric_jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c] * a[r * n + c])
            .sum();
        if off < 1e-60 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Either kind of object accepted by [`tensor_product`].
#[derive(Debug, Clone, PartialEq)]
pub enum LinearObject {
    Vector(StateVector),
    Operator(LinearOperator),
}

/// Kronecker product of two vectors or two operators, Alice slot first.
pub fn tensor_product(a: &LinearObject, b: &LinearObject) -> Result<LinearObject, LinalgError> {
    match (a, b) {
        (LinearObject::Vector(x), LinearObject::Vector(y)) => {
            if x.dim() * y.dim() > 4 {
                return Err(LinalgError::UnsupportedDimension(x.dim() * y.dim()));
            }
            Ok(LinearObject::Vector(x.tensor(y)))
        }
        (LinearObject::Operator(x), LinearObject::Operator(y)) => {
            if x.dim() * y.dim() > 4 {
                return Err(LinalgError::UnsupportedDimension(x.dim() * y.dim()));
            }
            Ok(LinearObject::Operator(x.tensor(y)))
        }
        _ => Err(LinalgError::KindMismatch),
    }
}

/// The two slots of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

/// Result of checking an operator against the density-operator axioms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub trace_defect: f64,
    pub tol: f64,
}

impl DensityReport {
    pub fn hermitian(&self) -> bool {
        self.hermiticity_defect <= self.tol
    }

    pub fn positive(&self) -> bool {
        self.min_eigenvalue >= -self.tol
    }

    pub fn unit_trace(&self) -> bool {
        self.trace_defect <= self.tol
    }

    pub fn passed(&self) -> bool {
        self.hermitian() && self.positive() && self.unit_trace()
    }
}

impl fmt::Display for DensityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hermiticity defect {:e}, min eigenvalue {:e}, trace defect {:e} (tol {:e})",
            self.hermiticity_defect, self.min_eigenvalue, self.trace_defect, self.tol
        )
    }
}

pub fn validate_density(op: &LinearOperator, tol: f64) -> DensityReport {
    let eig = op.hermitian_eigenvalues();
    let tr = op.trace();
    DensityReport {
        hermiticity_defect: op.hermiticity_defect(),
        min_eigenvalue: eig.first().copied().unwrap_or(0.0),
        trace_defect: (tr - ONE).norm(),
        tol,
    }
}

/// A Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: LinearOperator,
}

impl DensityOperator {
    pub fn new(op: LinearOperator) -> Result<Self, LinalgError> {
        Self::with_tolerance(op, DEFAULT_TOL)
    }

    pub fn with_tolerance(op: LinearOperator, tol: f64) -> Result<Self, LinalgError> {
        let report = validate_density(&op, tol);
        if report.passed() {
            Ok(Self { op })
        } else {
            Err(LinalgError::InvalidDensity(report))
        }
    }

    /// Normalizes a nonzero positive operator to unit trace.
    ///
    /// Only for operators that are positive by construction, such as
    /// `K ρ K†`; no validation is performed beyond symmetrization.
    pub(crate) fn from_positive(op: &LinearOperator) -> Self {
        let h = op.hermitian_part();
        let tr = h.trace().re;
        Self {
            op: h.scale(C64::new(1.0 / tr, 0.0)),
        }
    }

    pub fn pure(state: &StateVector) -> Self {
        state.to_density()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: LinearOperator::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &LinearOperator {
        &self.op
    }

    pub fn into_op(self) -> LinearOperator {
        self.op
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.op.matmul(&self.op).expect("same dimension").trace().re
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            op: self.op.tensor(&other.op),
        }
    }
}

/// Contracts the `traced_out` slot of a 4×4 operator.
pub fn partial_trace_op(
    op: &LinearOperator,
    traced_out: Party,
) -> Result<LinearOperator, LinalgError> {
    if op.dim() != 4 {
        return Err(LinalgError::DimensionMismatch {
            left: op.dim(),
            right: 4,
        });
    }
    let mut out = LinearOperator::zeros(2);
    for r in 0..2 {
        for c in 0..2 {
            let mut acc = ZERO;
            for k in 0..2 {
                acc += match traced_out {
                    // index = alice * 2 + bob
                    Party::Bob => op.get(r * 2 + k, c * 2 + k),
                    Party::Alice => op.get(k * 2 + r, k * 2 + c),
                };
            }
            out.entries[r * 2 + c] = acc;
        }
    }
    Ok(out)
}

/// Reduced state of the party that is *not* `traced_out`.
pub fn partial_trace(
    rho: &DensityOperator,
    traced_out: Party,
) -> Result<DensityOperator, LinalgError> {
    let report = validate_density(rho.op(), DEFAULT_TOL);
    if !report.passed() {
        return Err(LinalgError::InvalidDensity(report));
    }
    Ok(DensityOperator {
        op: partial_trace_op(rho.op(), traced_out)?,
    })
}

/// Half the trace norm of `rho - sigma`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64, LinalgError> {
    let diff = rho.op().sub(sigma.op())?;
    let d: f64 = diff.hermitian_eigenvalues().iter().map(|e| e.abs()).sum();
    Ok((0.5 * d).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket_h() -> StateVector {
        StateVector::basis(2, 0).unwrap()
    }

    fn ket_v() -> StateVector {
        StateVector::basis(2, 1).unwrap()
    }

    fn ket_d() -> StateVector {
        StateVector::from_real(&[1.0, 1.0]).unwrap()
    }

    fn phi_plus_density() -> DensityOperator {
        StateVector::from_real(&[1.0, 0.0, 0.0, 1.0])
            .unwrap()
            .to_density()
    }

    #[test]
    fn kron_of_basis_vectors_follows_alice_major_order() {
        let hh = tensor_product(
            &LinearObject::Vector(ket_h()),
            &LinearObject::Vector(ket_h()),
        )
        .unwrap();
        let LinearObject::Vector(v) = hh else {
            panic!()
        };
        assert_eq!(v.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);

        let LinearObject::Vector(v) = tensor_product(
            &LinearObject::Vector(ket_d()),
            &LinearObject::Vector(ket_h()),
        )
        .unwrap() else {
            panic!()
        };
        let expected = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0];
        for (a, e) in v.amplitudes().iter().zip(expected) {
            assert!((a - C64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = LinearObject::Operator(LinearOperator::identity(2));
        assert_eq!(
            tensor_product(&i2, &i2).unwrap(),
            LinearObject::Operator(LinearOperator::identity(4))
        );
    }

    #[test]
    fn kron_rejects_mixed_kinds() {
        let err = tensor_product(
            &LinearObject::Vector(ket_h()),
            &LinearObject::Operator(LinearOperator::identity(2)),
        )
        .unwrap_err();
        assert_eq!(err, LinalgError::KindMismatch);
    }

    #[test]
    fn reduced_phi_plus_is_maximally_mixed() {
        let half = DensityOperator::maximally_mixed(2);
        for party in [Party::Alice, Party::Bob] {
            let r = partial_trace(&phi_plus_density(), party).unwrap();
            assert!(trace_distance(&r, &half).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_invalid_input() {
        let bad = DensityOperator {
            op: LinearOperator::identity(4),
        };
        assert!(matches!(
            partial_trace(&bad, Party::Bob),
            Err(LinalgError::InvalidDensity(_))
        ));
    }

    #[test]
    fn trace_distance_examples() {
        let h = ket_h().to_density();
        let v = ket_v().to_density();
        let d = ket_d().to_density();
        assert!(trace_distance(&h, &h).unwrap() < 1e-15);
        assert!((trace_distance(&h, &v).unwrap() - 1.0).abs() < 1e-15);
        // eigenvalues of |H⟩⟨H| - |D⟩⟨D| are ±sqrt(1/4 + 1/4)
        assert!((trace_distance(&h, &d).unwrap() - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!(trace_distance(&h, &phi_plus_density()).is_err());
    }

    #[test]
    fn validation_reports_each_defect() {
        let half = LinearOperator::identity(2).scale(C64::new(0.5, 0.0));
        assert!(validate_density(&half, DEFAULT_TOL).passed());

        let skew = LinearOperator::from_real_rows([[0.5, 1.0], [0.0, 0.5]]).unwrap();
        let r = validate_density(&skew, DEFAULT_TOL);
        assert!(!r.hermitian());
        assert!(!r.passed());

        let r = validate_density(&LinearOperator::identity(2), DEFAULT_TOL);
        assert!(r.hermitian() && r.positive());
        assert!((r.trace_defect - 1.0).abs() < 1e-15);
        assert!(!r.passed());

        let negative = LinearOperator::from_real_rows([[1.5, 0.0], [0.0, -0.5]]).unwrap();
        assert!(!validate_density(&negative, DEFAULT_TOL).positive());
    }

    #[test]
    fn four_dim_eigenvalues_match_known_spectrum() {
        let rho = phi_plus_density();
        let eig = rho.op().hermitian_eigenvalues();
        let expected = [0.0, 0.0, 0.0, 1.0];
        for (e, x) in eig.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12, "{eig:?}");
        }
    }

    #[test]
    fn constructors_reject_bad_shapes() {
        assert!(matches!(
            StateVector::from_real(&[1.0, 0.0, 0.0]),
            Err(LinalgError::UnsupportedDimension(3))
        ));
        assert!(matches!(
            StateVector::from_real(&[0.0, 0.0]),
            Err(LinalgError::ZeroNorm)
        ));
        assert!(matches!(
            LinearOperator::from_entries(2, vec![ZERO; 3]),
            Err(LinalgError::WrongLength { .. })
        ));
        assert!(matches!(
            StateVector::from_real(&[f64::NAN, 1.0]),
            Err(LinalgError::NonFinite)
        ));
    }

    #[test]
    fn states_compare_up_to_global_phase() {
        let a = ket_d();
        let b = StateVector::new(vec![C64::new(0.0, 1.0), C64::new(0.0, 1.0)]).unwrap();
        assert!(a.same_ray(&b, 1e-12));
        assert!(!a.same_ray(&ket_h(), 1e-12));
    }
}
