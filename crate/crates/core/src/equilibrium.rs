//! Saddle-point search for pure-strategy Nash equilibria.
//!
//! In a constant-sum game U_A = C + f and U_B = C − f, so an equilibrium is a
//! profile where f is maximal in Alice's angles (θa, θa′) and minimal in Bob's
//! (θb, θb′). The search follows five steps: build f, take its Jacobian, find
//! Jacobian roots on the 4-torus, evaluate the Hessian there, and read the
//! equilibrium type off the signs of its diagonal.
//!
//! Every candidate is then checked by brute-force unilateral deviations. A
//! candidate whose Hessian diagonal sits entirely in the zero band but which
//! survives that check and couples Alice's and Bob's angles (nonzero mixed
//! block) is a genuine minimax saddle of a curved surface and is reported as
//! strict; without coupling it stays weak.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::game::{trig, GameInstance, PayoffSurface, Player, Quantity, StrategyProfile, Trig};

/// Central-difference step for the Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-4;
/// Central-difference step for second derivatives.
pub const HESSIAN_STEP: f64 = 1e-3;
/// ‖J‖∞ below which a refined point counts as stationary.
pub const STATIONARY_TOL: f64 = 1e-8;
/// |H_kk| at or below this is treated as zero curvature.
pub const HESSIAN_ZERO_BAND: f64 = 1e-6;
/// max |f| on the probe grid below which the surface is flat.
pub const FLAT_TOL: f64 = 1e-10;
pub const FLAT_PROBE_RESOLUTION: usize = 11;
/// Per-coordinate torus distance under which two points are the same.
pub const DEDUP_TOL: f64 = 1e-4;
/// 41⁴ ≈ 2.83 million grid points.
pub const DEFAULT_GRID: usize = 41;
/// Deviations probed per coordinate when verifying a candidate.
pub const PROBE_COUNT: usize = 360;
/// Payoff improvement tolerated before a deviation counts as profitable.
pub const NASH_SLACK: f64 = 1e-9;
pub const MIN_RESOLUTION: usize = 5;

const MAX_REFINE_ITERS: usize = 200;
/// Refinement keeps going past STATIONARY_TOL until ‖J‖∞ reaches this.
const REFINE_TARGET: f64 = 1e-12;
/// Seeds must have ‖J‖∞ at most this fraction of the grid maximum.
const SEED_FRACTION: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("Hessian diagonal contains NaN")]
    NanHessian,
    #[error("grid resolution {0} below minimum {MIN_RESOLUTION}")]
    ResolutionTooSmall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NashClass {
    StrictNash,
    WeakNash,
    NotNash,
}

impl NashClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NashClass::StrictNash => "strict_nash",
            NashClass::WeakNash => "weak_nash",
            NashClass::NotNash => "not_nash",
        }
    }
}

impl fmt::Display for NashClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    StrictNashFound,
    /// f is constant: every profile is a weak equilibrium.
    WeakNashFlat,
    /// Verified equilibria exist on a curved surface, none of them strict.
    WeakNashFound,
    None,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::StrictNashFound => "strict_nash_found",
            Verdict::WeakNashFlat => "weak_nash_flat",
            Verdict::WeakNashFound => "weak_nash_found",
            Verdict::None => "none",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub profile: StrategyProfile,
    pub jacobian_norm: f64,
    pub hessian_diag: [f64; 4],
    /// Full Hessian; diagnostics and saddle detection only.
    pub hessian: [[f64; 4]; 4],
    /// Label from the diagonal sign rule alone.
    pub hessian_class: NashClass,
    /// Final label after best-response verification.
    pub classification: NashClass,
    /// `None` when the point was never a candidate.
    pub verified: Option<bool>,
    pub payoff_a: f64,
    pub payoff_b: f64,
}

impl CriticalPoint {
    pub fn angles(&self) -> [f64; 4] {
        self.profile.angles()
    }

    /// Largest |∂²f/∂θi∂θj| with i Alice's and j Bob's coordinate.
    pub fn coupling(&self) -> f64 {
        let h = &self.hessian;
        [h[0][2], h[0][3], h[1][2], h[1][3]]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryScan {
    pub points: Vec<CriticalPoint>,
    /// Every grid point already had a vanishing Jacobian.
    pub flat: bool,
    pub grid_points: usize,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub description: String,
    pub resolution: usize,
    pub grid_points: usize,
    pub seeds: usize,
    pub critical_points: Vec<CriticalPoint>,
    pub verdict: Verdict,
    pub flat_surface: bool,
}

impl EquilibriumReport {
    pub fn strict_points(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.critical_points
            .iter()
            .filter(|p| p.classification == NashClass::StrictNash)
    }

    pub fn nash_points(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.critical_points
            .iter()
            .filter(|p| p.classification != NashClass::NotNash)
    }
}

fn shifted(t: Trig, step: Trig) -> Trig {
    // sin(θ + h), cos(θ + h) from the angle-addition formulas
    [t[0] * step[1] + t[1] * step[0], t[1] * step[1] - t[0] * step[0]]
}

fn jacobian_trig(surface: &PayoffSurface, t: &[Trig; 4], h: f64) -> [f64; 4] {
    let plus = trig(h);
    let minus = trig(-h);
    let mut out = [0.0; 4];
    for k in 0..4 {
        let mut tp = *t;
        let mut tm = *t;
        tp[k] = shifted(t[k], plus);
        tm[k] = shifted(t[k], minus);
        out[k] = (surface.eval_trig(Quantity::F, &tp) - surface.eval_trig(Quantity::F, &tm)) / (2.0 * h);
    }
    out
}

/// Central-difference gradient of f at `angles` with step `h`.
pub fn jacobian_with_step(surface: &PayoffSurface, angles: &[f64; 4], h: f64) -> [f64; 4] {
    jacobian_trig(surface, &angles.map(trig), h)
}

/// (∂f/∂θa, ∂f/∂θa′, ∂f/∂θb, ∂f/∂θb′) with step [`JACOBIAN_STEP`].
pub fn jacobian(game: &GameInstance, profile: &StrategyProfile) -> [f64; 4] {
    jacobian_with_step(&game.surface(), &profile.angles(), JACOBIAN_STEP)
}

fn hessian_full_at(surface: &PayoffSurface, x: &[f64; 4], h: f64) -> [[f64; 4]; 4] {
    let f = |p: &[f64; 4]| surface.f(p);
    let f0 = f(x);
    let mut hess = [[0.0; 4]; 4];
    for i in 0..4 {
        let mut xp = *x;
        let mut xm = *x;
        xp[i] += h;
        xm[i] -= h;
        hess[i][i] = (f(&xp) - 2.0 * f0 + f(&xm)) / (h * h);
        for j in (i + 1)..4 {
            let mut pp = *x;
            let mut pm = *x;
            let mut mp = *x;
            let mut mm = *x;
            pp[i] += h;
            pp[j] += h;
            pm[i] += h;
            pm[j] -= h;
            mp[i] -= h;
            mp[j] += h;
            mm[i] -= h;
            mm[j] -= h;
            let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Full finite-difference Hessian of f.
pub fn hessian_full(surface: &PayoffSurface, angles: &[f64; 4]) -> [[f64; 4]; 4] {
    hessian_full_at(surface, angles, HESSIAN_STEP)
}

/// Central second differences ∂²g/∂xk² of any function of four angles.
pub fn second_differences<G: Fn(&[f64; 4]) -> f64>(g: G, x: &[f64; 4], h: f64) -> [f64; 4] {
    let g0 = g(x);
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        *slot = (g(&xp) - 2.0 * g0 + g(&xm)) / (h * h);
    }
    out
}

/// The four second partials ∂²f/∂θk² by central second differences.
pub fn hessian_diag_at(surface: &PayoffSurface, angles: &[f64; 4]) -> [f64; 4] {
    second_differences(|x| surface.f(x), angles, HESSIAN_STEP)
}

pub fn hessian_diag(game: &GameInstance, profile: &StrategyProfile) -> [f64; 4] {
    hessian_diag_at(&game.surface(), &profile.angles())
}

/// Diagonal sign rule with the default zero band.
pub fn classify(hessian_diag: &[f64; 4]) -> Result<NashClass, EquilibriumError> {
    classify_with_band(hessian_diag, HESSIAN_ZERO_BAND)
}

/// Alice's two entries must be ≤ 0 and Bob's two ≥ 0 (up to `band`); strict
/// when all four clear the band.
pub fn classify_with_band(d: &[f64; 4], band: f64) -> Result<NashClass, EquilibriumError> {
    if d.iter().any(|v| v.is_nan()) {
        return Err(EquilibriumError::NanHessian);
    }
    let alice = &d[..2];
    let bob = &d[2..];
    if alice.iter().any(|&v| v > band) || bob.iter().any(|&v| v < -band) {
        return Ok(NashClass::NotNash);
    }
    if alice.iter().all(|&v| v < -band) && bob.iter().all(|&v| v > band) {
        Ok(NashClass::StrictNash)
    } else {
        Ok(NashClass::WeakNash)
    }
}

fn probe_trig(probe_count: usize) -> Vec<Trig> {
    (0..probe_count)
        .map(|j| trig(TAU * j as f64 / probe_count as f64))
        .collect()
}

/// Largest payoff gain either player can obtain by moving one of their own
/// angles to one of `probe_count` evenly spaced values.
pub fn best_deviation_gain(surface: &PayoffSurface, angles: &[f64; 4], probe_count: usize) -> f64 {
    deviation_gain_with(surface, angles, &probe_trig(probe_count))
}

fn deviation_gain_with(surface: &PayoffSurface, angles: &[f64; 4], probes: &[Trig]) -> f64 {
    let base = angles.map(trig);
    let mut best = f64::NEG_INFINITY;
    for k in 0..4 {
        let q: Quantity = if k < 2 { Player::A.into() } else { Player::B.into() };
        let current = surface.eval_trig(q, &base);
        for p in probes {
            let mut t = base;
            t[k] = *p;
            best = best.max(surface.eval_trig(q, &t) - current);
        }
    }
    best
}

/// Checks U_A ≥ U_A(deviation) for Alice's two angles and likewise for Bob,
/// over `probe_count` evenly spaced alternatives per angle, with slack 1e-9.
pub fn verify_nash_inequalities(game: &GameInstance, profile: &StrategyProfile, probe_count: usize) -> bool {
    best_deviation_gain(&game.surface(), &profile.angles(), probe_count) <= NASH_SLACK
}

fn inf_norm(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn two_norm_sq(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Solves a 4×4 system by Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..4 {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *dst -= factor * src;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = ((row + 1)..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Drives the Jacobian to zero from `seed`: Levenberg-damped Newton steps on
/// J(θ) = 0, then coordinate descent on ‖J‖² if those stall above tolerance.
fn refine(surface: &PayoffSurface, seed: [f64; 4]) -> Option<([f64; 4], f64)> {
    let jac = |x: &[f64; 4]| jacobian_with_step(surface, x, JACOBIAN_STEP);
    let mut x = seed;
    let mut j = jac(&x);
    let mut lambda = 1e-8;
    let mut iters = 0;

    while iters < MAX_REFINE_ITERS && inf_norm(&j) > REFINE_TARGET {
        iters += 1;
        let h = hessian_full(surface, &x);
        let mut normal = [[0.0; 4]; 4];
        let mut rhs = [0.0; 4];
        for r in 0..4 {
            for c in 0..4 {
                normal[r][c] = (0..4).map(|k| h[k][r] * h[k][c]).sum();
            }
            rhs[r] = -(0..4).map(|k| h[k][r] * j[k]).sum::<f64>();
        }
        let scale = (0..4).map(|i| normal[i][i]).fold(0.0f64, f64::max).max(1e-30);
        let mut accepted = false;
        while lambda < 1e8 {
            let mut damped = normal;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * scale;
            }
            if let Some(step) = solve4(damped, rhs) {
                let candidate = [x[0] + step[0], x[1] + step[1], x[2] + step[2], x[3] + step[3]];
                let jc = jac(&candidate);
                if two_norm_sq(&jc) < two_norm_sq(&j) {
                    x = candidate;
                    j = jc;
                    lambda = (lambda * 0.1).max(1e-12);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }

    if inf_norm(&j) >= STATIONARY_TOL {
        let (cx, cj) = coordinate_descent(surface, x, MAX_REFINE_ITERS.saturating_sub(iters).max(20));
        x = cx;
        j = cj;
    }
    let norm = inf_norm(&j);
    (norm < STATIONARY_TOL).then(|| (x.map(|t| t.rem_euclid(TAU)), norm))
}

fn coordinate_descent(surface: &PayoffSurface, mut x: [f64; 4], rounds: usize) -> ([f64; 4], [f64; 4]) {
    let jac = |p: &[f64; 4]| jacobian_with_step(surface, p, JACOBIAN_STEP);
    let mut j = jac(&x);
    let mut step = 1e-2;
    for _ in 0..rounds {
        if inf_norm(&j) < REFINE_TARGET || step < 1e-16 {
            break;
        }
        let mut improved = false;
        for k in 0..4 {
            for dir in [1.0, -1.0] {
                let mut c = x;
                c[k] += dir * step;
                let jc = jac(&c);
                if two_norm_sq(&jc) < two_norm_sq(&j) {
                    x = c;
                    j = jc;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, j)
}

fn torus_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Collapses points closer than [`DEDUP_TOL`] in every coordinate (torus
/// metric), keeping the first occurrence.
pub fn deduplicate(points: Vec<([f64; 4], f64)>) -> Vec<([f64; 4], f64)> {
    let cells = (TAU / DEDUP_TOL).ceil() as i64;
    let cell_of = |t: f64| ((t.rem_euclid(TAU) / DEDUP_TOL).floor() as i64).rem_euclid(cells);
    let mut buckets: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
    let mut kept: Vec<([f64; 4], f64)> = Vec::new();

    'outer: for (x, norm) in points {
        let key = x.map(cell_of);
        for d in 0..81usize {
            let off = [(d % 3) as i64 - 1, (d / 3 % 3) as i64 - 1, (d / 9 % 3) as i64 - 1, (d / 27) as i64 - 1];
            let probe = [
                (key[0] + off[0]).rem_euclid(cells),
                (key[1] + off[1]).rem_euclid(cells),
                (key[2] + off[2]).rem_euclid(cells),
                (key[3] + off[3]).rem_euclid(cells),
            ];
            if let Some(ids) = buckets.get(&probe) {
                for &i in ids {
                    let y = kept[i].0;
                    if (0..4).all(|k| torus_distance(x[k], y[k]) <= DEDUP_TOL) {
                        continue 'outer;
                    }
                }
            }
        }
        buckets.entry(key).or_default().push(kept.len());
        kept.push((x, norm));
    }
    kept
}

fn make_point(surface: &PayoffSurface, x: [f64; 4], norm: f64) -> CriticalPoint {
    let hessian = hessian_full(surface, &x);
    let diag = hessian_diag_at(surface, &x);
    let class = classify(&diag).unwrap_or(NashClass::NotNash);
    CriticalPoint {
        profile: StrategyProfile::wrapped(x),
        jacobian_norm: norm,
        hessian_diag: diag,
        hessian,
        hessian_class: class,
        classification: class,
        verified: None,
        payoff_a: surface.payoff(Player::A, &x),
        payoff_b: surface.payoff(Player::B, &x),
    }
}

/// Scans the resolution⁴ grid over [0, 2π)⁴, seeds root refinement from grid
/// points whose ‖J‖∞ is a local minimum over their 80 torus neighbours, and
/// returns the deduplicated stationary points with their Hessian labels.
pub fn find_stationary_points(game: &GameInstance, resolution: usize) -> Result<StationaryScan, EquilibriumError> {
    scan_surface(&game.surface(), resolution)
}

fn scan_surface(surface: &PayoffSurface, resolution: usize) -> Result<StationaryScan, EquilibriumError> {
    if resolution < MIN_RESOLUTION {
        return Err(EquilibriumError::ResolutionTooSmall(resolution));
    }
    let n = resolution;
    let total = n.pow(4);
    let grid: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    let grid_trig: Vec<Trig> = grid.iter().map(|&t| trig(t)).collect();
    let unflatten = |idx: usize| [idx / (n * n * n), idx / (n * n) % n, idx / n % n, idx % n];

    let norms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let ix = unflatten(idx);
            let t = ix.map(|i| grid_trig[i]);
            inf_norm(&jacobian_trig(surface, &t, JACOBIAN_STEP))
        })
        .collect();

    let max_norm = norms.par_iter().copied().reduce(|| 0.0, f64::max);
    if max_norm < STATIONARY_TOL {
        return Ok(StationaryScan {
            points: Vec::new(),
            flat: true,
            grid_points: total,
            seeds: 0,
        });
    }
    let threshold = SEED_FRACTION * max_norm;

    let seeds: Vec<usize> = (0..total)
        .into_par_iter()
        .filter(|&idx| {
            let v = norms[idx];
            if v > threshold {
                return false;
            }
            let ix = unflatten(idx);
            (1..81usize).all(|d| {
                let off = [d / 27, d / 9 % 3, d / 3 % 3, d % 3];
                let mut flat = 0;
                for k in 0..4 {
                    // offsets 0, 1, 2 map to -1, 0, +1 with wraparound
                    let i = (ix[k] + n + off[k] - 1) % n;
                    flat = flat * n + i;
                }
                flat == idx || norms[flat] >= v
            })
        })
        .collect();

    let refined: Vec<([f64; 4], f64)> = seeds
        .par_iter()
        .filter_map(|&idx| refine(surface, unflatten(idx).map(|i| grid[i])))
        .collect();
    let unique = deduplicate(refined);

    let points: Vec<CriticalPoint> = unique
        .into_par_iter()
        .map(|(x, norm)| make_point(surface, x, norm))
        .collect();

    Ok(StationaryScan {
        points,
        flat: false,
        grid_points: total,
        seeds: seeds.len(),
    })
}

/// max |f| over the [`FLAT_PROBE_RESOLUTION`]⁴ probe grid.
pub fn max_abs_f_on_probe_grid(surface: &PayoffSurface) -> f64 {
    let n = FLAT_PROBE_RESOLUTION;
    let t: Vec<Trig> = (0..n).map(|i| trig(TAU * i as f64 / n as f64)).collect();
    (0..n.pow(4))
        .map(|idx| {
            let q = [&t[idx / (n * n * n)], &t[idx / (n * n) % n], &t[idx / n % n], &t[idx % n]];
            surface.eval_trig(Quantity::F, &q.map(|x| *x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Full search: flat-surface shortcut, stationary-point scan, Hessian
/// classification and best-response verification of every candidate.
pub fn find_nash_equilibria(game: &GameInstance, resolution: usize) -> Result<EquilibriumReport, EquilibriumError> {
    if resolution < MIN_RESOLUTION {
        return Err(EquilibriumError::ResolutionTooSmall(resolution));
    }
    let surface = game.surface();
    let description = game.label.clone();

    if max_abs_f_on_probe_grid(&surface) < FLAT_TOL {
        return Ok(EquilibriumReport {
            description,
            resolution,
            grid_points: 0,
            seeds: 0,
            critical_points: Vec::new(),
            verdict: Verdict::WeakNashFlat,
            flat_surface: true,
        });
    }

    let scan = scan_surface(&surface, resolution)?;
    if scan.flat {
        return Ok(EquilibriumReport {
            description,
            resolution,
            grid_points: scan.grid_points,
            seeds: 0,
            critical_points: Vec::new(),
            verdict: Verdict::WeakNashFlat,
            flat_surface: true,
        });
    }

    let probes = probe_trig(PROBE_COUNT);
    let points: Vec<CriticalPoint> = scan
        .points
        .into_par_iter()
        .map(|mut p| {
            if p.hessian_class != NashClass::NotNash {
                let ok = deviation_gain_with(&surface, &p.angles(), &probes) <= NASH_SLACK;
                p.verified = Some(ok);
                p.classification = match (ok, p.hessian_class) {
                    (false, _) => NashClass::NotNash,
                    (true, NashClass::StrictNash) => NashClass::StrictNash,
                    (true, _) if p.coupling() > HESSIAN_ZERO_BAND => NashClass::StrictNash,
                    (true, _) => NashClass::WeakNash,
                };
            }
            p
        })
        .collect();

    let verdict = if points.iter().any(|p| p.classification == NashClass::StrictNash) {
        Verdict::StrictNashFound
    } else if points.iter().any(|p| p.classification == NashClass::WeakNash) {
        Verdict::WeakNashFound
    } else {
        Verdict::None
    };

    Ok(EquilibriumReport {
        description,
        resolution,
        grid_points: scan.grid_points,
        seeds: scan.seeds,
        critical_points: points,
        verdict,
        flat_surface: false,
    })
}
