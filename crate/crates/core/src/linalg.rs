//! Dense complex linear algebra for one- and two-qubit operators.
//!
//! Matrices are fixed-capacity (at most 4×4) and `Copy`, so the hot loops in
//! the discord minimizer and the equilibrium scan never allocate. Two-qubit
//! operators use the basis ordering |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩: subsystem A is the
//! left Kronecker factor.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Hermiticity tolerance on the max-norm of `M − M†`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `|Tr ρ − 1|`.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semi-definite.
pub const PSD_TOL: f64 = -1e-10;
/// Off-diagonal Frobenius norm at which the Jacobi sweep stops.
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("unsupported matrix dimension {0} (expected 2 or 4)")]
    BadDimension(usize),
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}x{expected}, got {got}x{got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (max |M - M†| = {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0} (expected 1)")]
    NotUnitTrace(f64),
    #[error("density matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("measurement angle {0} outside [0, 2π]")]
    AngleOutOfRange(f64),
}

/// A 2×2 or 4×4 complex matrix stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [C64; 16],
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * self.dim + j]
    }
}

fn check_dim(dim: usize) -> Result<(), LinalgError> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(LinalgError::BadDimension(d)),
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self, LinalgError> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            data: [ZERO; 16],
        })
    }

    pub fn identity(dim: usize) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        Ok(m)
    }

    /// Builds a matrix from `dim*dim` row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self, LinalgError> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(LinalgError::EntryCount {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let mut data = [ZERO; 16];
        data[..entries.len()].copy_from_slice(entries);
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        Ok(m)
    }

    /// Outer product |v⟩⟨v| of a 2- or 4-component ket.
    pub fn outer(ket: &[C64]) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(ket.len())?;
        for i in 0..ket.len() {
            for j in 0..ket.len() {
                m[(i, j)] = ket[i] * ket[j].conj();
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut out = *self;
        out.data.iter_mut().for_each(|z| *z *= k);
        out
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_dim(other)?;
        let mut out = *self;
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_dim(other)?;
        let mut out = *self;
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_dim(other)?;
        let n = self.dim;
        let mut out = Self {
            dim: n,
            data: [ZERO; 16],
        };
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64, LinalgError> {
        self.same_dim(other)?;
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        Ok(acc)
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    fn same_dim(&self, other: &Self) -> Result<(), LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    /// Reduced operator on `keep` of a 4×4 two-qubit operator.
    pub fn partial_trace(&self, keep: Subsystem) -> Result<Self, LinalgError> {
        if self.dim != 4 {
            return Err(LinalgError::DimensionMismatch {
                expected: 4,
                got: self.dim,
            });
        }
        let mut out = Self {
            dim: 2,
            data: [ZERO; 16],
        };
        for r in 0..2 {
            for c in 0..2 {
                out[(r, c)] = match keep {
                    Subsystem::A => (0..2).map(|j| self[(2 * r + j, 2 * c + j)]).sum(),
                    Subsystem::B => (0..2).map(|i| self[(2 * i + r, 2 * i + c)]).sum(),
                };
            }
        }
        Ok(out)
    }

    /// Exchanges the two qubits of a 4×4 operator (SWAP · M · SWAP).
    pub fn swap_subsystems(&self) -> Result<Self, LinalgError> {
        if self.dim != 4 {
            return Err(LinalgError::DimensionMismatch {
                expected: 4,
                got: self.dim,
            });
        }
        const PERM: [usize; 4] = [0, 2, 1, 3];
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out[(PERM[i], PERM[j])] = self[(i, j)];
            }
        }
        Ok(out)
    }
}

/// Kronecker product `a ⊗ b` of two 2×2 matrices; `a` acts on subsystem A.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(LinalgError::DimensionMismatch {
                expected: 2,
                got: m.dim,
            });
        }
    }
    let mut out = ComplexMatrix {
        dim: 4,
        data: [ZERO; 16],
    };
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: PauliAxis) -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    let entries = match axis {
        PauliAxis::X => [ZERO, ONE, ONE, ZERO],
        PauliAxis::Y => [ZERO, -i, i, ZERO],
        PauliAxis::Z => [ONE, ZERO, ZERO, -ONE],
    };
    ComplexMatrix::from_row_major(2, &entries).expect("2x2 literal")
}

/// Polar angle on the Bloch sphere with the azimuth fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MeasurementAngle(f64);

impl MeasurementAngle {
    pub fn new(theta: f64) -> Result<Self, LinalgError> {
        if theta.is_finite() && (0.0..=TAU).contains(&theta) {
            Ok(Self(theta))
        } else {
            Err(LinalgError::AngleOutOfRange(theta))
        }
    }

    /// Maps any finite angle onto `[0, 2π)`.
    pub fn wrapped(theta: f64) -> Self {
        let t = theta.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        Self(if t >= TAU { 0.0 } else { t })
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Spin measurement outcome; `Up` ↔ σ = +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Up,
    Down,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Up, Outcome::Down];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Up => 1.0,
            Outcome::Down => -1.0,
        }
    }

    pub fn from_sign(sigma: i32) -> Option<Self> {
        match sigma {
            1 => Some(Outcome::Up),
            -1 => Some(Outcome::Down),
            _ => None,
        }
    }
}

/// Π_{σ|θ} = ½(𝟙 + σ(sin θ σx + cos θ σz)).
pub fn bloch_projector(theta: MeasurementAngle, sigma: Outcome) -> ComplexMatrix {
    bloch_projector_azimuthal(theta.radians(), 0.0, sigma)
}

/// Projector along n = (sin θ cos φ, sin θ sin φ, cos θ). Only the discord
/// optimizer's optional azimuthal scan uses a nonzero φ.
pub fn bloch_projector_azimuthal(theta: f64, phi: f64, sigma: Outcome) -> ComplexMatrix {
    let s = sigma.sign();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let off = C64::new(st * cp, -st * sp) * (0.5 * s);
    let entries = [
        C64::new(0.5 * (1.0 + s * ct), 0.0),
        off,
        off.conj(),
        C64::new(0.5 * (1.0 - s * ct), 0.0),
    ];
    ComplexMatrix::from_row_major(2, &entries).expect("2x2 projector")
}

/// Real eigenvalues of a Hermitian matrix in ascending order.
pub fn eigenvalues_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    let defect = m.hermiticity_defect();
    if defect.is_nan() || defect > HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian(defect));
    }
    Ok(match m.dim() {
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + m[(0, 1)].norm_sqr()).sqrt();
            vec![mid - rad, mid + rad]
        }
        _ => jacobi_hermitian(m),
    })
}

/// Diagonalizes the real symmetric embedding [[Re, −Im], [Im, Re]] with cyclic
/// Jacobi rotations. Each eigenvalue of `m` appears twice in the embedding.
#[allow(clippy::needless_range_loop)]
fn jacobi_hermitian(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let size = 2 * n;
    let mut a = [[0.0f64; 8]; 8];
    for i in 0..n {
        for j in 0..n {
            // symmetrize so round-off in the input cannot stall convergence
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..size)
            .flat_map(|p| (0..size).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_TOL {
            break;
        }
        for p in 0..size {
            for q in (p + 1)..size {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..size {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..size {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut diag: Vec<f64> = (0..size).map(|i| a[i][i]).collect();
    diag.sort_by(|x, y| x.total_cmp(y));
    diag.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

/// A validated density matrix: Hermitian, unit trace, positive semi-definite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, LinalgError> {
        let defect = m.hermiticity_defect();
        if defect.is_nan() || defect > HERMITIAN_TOL {
            return Err(LinalgError::NotHermitian(defect));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(LinalgError::NotUnitTrace(tr.re));
        }
        let min = eigenvalues_hermitian(&m)?[0];
        if min < PSD_TOL {
            return Err(LinalgError::NotPositive(min));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix derived from an already valid state, such as a reduced
    /// or conditional state: keeps the Hermitian part and rescales the trace
    /// to 1, without the PSD check.
    pub fn from_derived(m: &ComplexMatrix) -> Result<Self, LinalgError> {
        let herm = m.add(&m.adjoint())?.scale_real(0.5);
        let tr = herm.trace().re;
        if !tr.is_finite() || tr <= 0.0 {
            return Err(LinalgError::NotUnitTrace(tr));
        }
        Ok(Self(herm.scale_real(1.0 / tr)))
    }

    /// 𝟙/dim.
    pub fn maximally_mixed(dim: usize) -> Result<Self, LinalgError> {
        Ok(Self(ComplexMatrix::identity(dim)?.scale_real(1.0 / dim as f64)))
    }

    pub fn from_pure(ket: &[C64]) -> Result<Self, LinalgError> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        Self::new(ComplexMatrix::outer(ket)?.scale_real(1.0 / norm))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues_hermitian(&self.0).expect("validated Hermitian")
    }

    pub fn partial_trace(&self, keep: Subsystem) -> Result<DensityMatrix, LinalgError> {
        partial_trace(self, keep)
    }

    pub fn swap_subsystems(&self) -> Result<DensityMatrix, LinalgError> {
        Ok(Self(self.0.swap_subsystems()?))
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix, LinalgError> {
    DensityMatrix::from_derived(&rho.matrix().partial_trace(keep)?)
}

/// −Σ λ ln λ over eigenvalues clamped to [0, 1], with 0·ln 0 = 0.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy_bits(rho: &DensityMatrix) -> f64 {
    von_neumann_entropy(rho) / std::f64::consts::LN_2
}
