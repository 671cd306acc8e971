//! Mutual information, measurement-conditioned entropy and quantum discord of
//! two-qubit states.
//!
//! The measured qubit is B unless [`DiscordOptions::measured`] says otherwise;
//! measuring A is implemented by swapping the qubits first.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::linalg::{
    bloch_projector_azimuthal, partial_trace, tensor_product, von_neumann_entropy, ComplexMatrix,
    DensityMatrix, LinalgError, MeasurementAngle, Outcome, Subsystem,
};

/// Branch probabilities at or below this are treated as impossible outcomes.
pub const ZERO_BRANCH_TOL: f64 = 1e-12;
/// Discord values below this are reported as exactly zero.
pub const DISCORD_FLOOR: f64 = 1e-8;

const COARSE_SAMPLES: usize = 721;
const GOLDEN_TOL: f64 = 1e-9;
const AZIMUTH_SAMPLES: usize = 121;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscordError {
    #[error("expected a two-qubit (4x4) state, got dimension {0}")]
    NotTwoQubit(usize),
    #[error("measurement branch has probability {0:e}; conditional state undefined")]
    ZeroProbabilityBranch(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordOptions {
    pub measured: Subsystem,
    /// Also optimize over the azimuthal angle φ (2-D scan).
    pub azimuthal_scan: bool,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self {
            measured: Subsystem::B,
            azimuthal_scan: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordResult {
    pub discord: f64,
    pub optimal_theta: MeasurementAngle,
    /// Zero unless the azimuthal scan was enabled.
    pub optimal_phi: f64,
    pub mutual_information: f64,
    pub j_value: f64,
    pub measured: Subsystem,
}

fn two_qubit(rho: &DensityMatrix) -> Result<(), DiscordError> {
    if rho.dim() != 4 {
        return Err(DiscordError::NotTwoQubit(rho.dim()));
    }
    Ok(())
}

/// I(ρ) = S(ρA) + S(ρB) − S(ρ).
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64, DiscordError> {
    two_qubit(rho)?;
    let sa = von_neumann_entropy(&partial_trace(rho, Subsystem::A)?);
    let sb = von_neumann_entropy(&partial_trace(rho, Subsystem::B)?);
    Ok(sa + sb - von_neumann_entropy(rho))
}

/// Outcome probability and conditional state of A after measuring B along
/// (θ, φ) with result σ.
fn measure_b(
    rho: &DensityMatrix,
    theta: f64,
    phi: f64,
    sigma: Outcome,
) -> Result<(f64, Option<DensityMatrix>), DiscordError> {
    let proj = bloch_projector_azimuthal(theta, phi, sigma);
    let lift = tensor_product(&ComplexMatrix::identity(2)?, &proj)?;
    let post = lift.mul(rho.matrix())?.mul(&lift)?;
    let p = post.trace().re;
    if p <= ZERO_BRANCH_TOL {
        return Ok((p.max(0.0), None));
    }
    Ok((p, Some(DensityMatrix::from_derived(&post.partial_trace(Subsystem::A)?)?)))
}

fn oriented(rho: &DensityMatrix, measured: Subsystem) -> Result<DensityMatrix, DiscordError> {
    two_qubit(rho)?;
    Ok(match measured {
        Subsystem::B => *rho,
        Subsystem::A => rho.swap_subsystems()?,
    })
}

/// Probability p_σ = Tr[(𝟙 ⊗ Π_{σ|θ}) ρ] and the conditional state of A.
///
/// Fails with [`DiscordError::ZeroProbabilityBranch`] when p_σ ≤ 1e-12.
pub fn post_measurement_state(
    rho: &DensityMatrix,
    theta: MeasurementAngle,
    sigma: Outcome,
) -> Result<(f64, DensityMatrix), DiscordError> {
    two_qubit(rho)?;
    match measure_b(rho, theta.radians(), 0.0, sigma)? {
        (p, Some(state)) => Ok((p, state)),
        (p, None) => Err(DiscordError::ZeroProbabilityBranch(p)),
    }
}

fn conditional_entropy_at(rho: &DensityMatrix, theta: f64, phi: f64) -> Result<f64, DiscordError> {
    let mut total = 0.0;
    for sigma in Outcome::BOTH {
        // impossible branches contribute nothing
        if let (p, Some(state)) = measure_b(rho, theta, phi, sigma)? {
            total += p * von_neumann_entropy(&state);
        }
    }
    Ok(total)
}

/// Σ_σ p_σ S(ρ^{A|σ}) for a measurement of B at polar angle θ.
pub fn conditional_entropy(rho: &DensityMatrix, theta: MeasurementAngle) -> Result<f64, DiscordError> {
    two_qubit(rho)?;
    conditional_entropy_at(rho, theta.radians(), 0.0)
}

/// J_B = S(ρA) − conditional_entropy.
pub fn j_post_measurement(rho: &DensityMatrix, theta: MeasurementAngle) -> Result<f64, DiscordError> {
    two_qubit(rho)?;
    let sa = von_neumann_entropy(&partial_trace(rho, Subsystem::A)?);
    Ok(sa - conditional_entropy_at(rho, theta.radians(), 0.0)?)
}

fn golden_section<F>(mut lo: f64, mut hi: f64, tol: f64, mut f: F) -> Result<(f64, f64), DiscordError>
where
    F: FnMut(f64) -> Result<f64, DiscordError>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Discord with measurement on B and the azimuth fixed at zero.
pub fn discord(rho: &DensityMatrix) -> Result<DiscordResult, DiscordError> {
    discord_with(rho, &DiscordOptions::default())
}

pub fn discord_with(rho: &DensityMatrix, opts: &DiscordOptions) -> Result<DiscordResult, DiscordError> {
    let state = oriented(rho, opts.measured)?;
    let mutual = mutual_information(&state)?;
    let s_a = von_neumann_entropy(&partial_trace(&state, Subsystem::A)?);

    let step = TAU / (COARSE_SAMPLES - 1) as f64;
    let (theta, phi, cond) = if opts.azimuthal_scan {
        minimize_2d(&state)?
    } else {
        let mut best = (0.0, f64::INFINITY);
        for k in 0..COARSE_SAMPLES {
            let t = k as f64 * step;
            let v = conditional_entropy_at(&state, t, 0.0)?;
            if v < best.1 {
                best = (t, v);
            }
        }
        let (t, v) = golden_section(best.0 - step, best.0 + step, GOLDEN_TOL, |t| {
            conditional_entropy_at(&state, t, 0.0)
        })?;
        if v < best.1 {
            (t, 0.0, v)
        } else {
            (best.0, 0.0, best.1)
        }
    };

    let j_value = s_a - cond;
    let raw = mutual - j_value;
    let discord = if raw < DISCORD_FLOOR { 0.0 } else { raw };
    Ok(DiscordResult {
        discord,
        optimal_theta: MeasurementAngle::wrapped(theta),
        optimal_phi: phi.rem_euclid(TAU),
        mutual_information: mutual,
        j_value,
        measured: opts.measured,
    })
}

/// Coarse (θ, φ) grid followed by alternating golden-section refinement.
fn minimize_2d(state: &DensityMatrix) -> Result<(f64, f64, f64), DiscordError> {
    let n = AZIMUTH_SAMPLES;
    let dt = std::f64::consts::PI / (n - 1) as f64;
    let dp = TAU / (n - 1) as f64;
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..n {
        for j in 0..n {
            let (t, p) = (i as f64 * dt, j as f64 * dp);
            let v = conditional_entropy_at(state, t, p)?;
            if v < best.2 {
                best = (t, p, v);
            }
        }
    }
    let (mut t, mut p, mut v) = best;
    let (mut wt, mut wp) = (dt, dp);
    for _ in 0..8 {
        let (nt, vt) = golden_section(t - wt, t + wt, GOLDEN_TOL, |x| conditional_entropy_at(state, x, p))?;
        if vt <= v {
            t = nt;
            v = vt;
        }
        let (np, vp) = golden_section(p - wp, p + wp, GOLDEN_TOL, |y| conditional_entropy_at(state, t, y))?;
        if vp <= v {
            p = np;
            v = vp;
        }
        wt *= 0.5;
        wp *= 0.5;
    }
    Ok((t, p, v))
}
