//! Independent reference implementations built on nalgebra. Nothing here calls
//! into the crate's linear algebra, payoff or discord code.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use qnash::linalg::DensityMatrix;

pub type M2 = Matrix2<Complex64>;
pub type M4 = Matrix4<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn to_na(rho: &DensityMatrix) -> M4 {
    M4::from_row_slice(rho.matrix().entries())
}

/// ½(𝟙 + σ(sin θ X + cos θ Z)) written out entrywise.
pub fn projector(theta: f64, sigma: f64) -> M2 {
    let (s, co) = theta.sin_cos();
    M2::new(
        c(0.5 * (1.0 + sigma * co)),
        c(0.5 * sigma * s),
        c(0.5 * sigma * s),
        c(0.5 * (1.0 - sigma * co)),
    )
}

pub fn kron(a: &M2, b: &M2) -> M4 {
    a.kronecker(b)
}

pub fn prob(rho: &M4, ta: f64, tb: f64, s: f64, sp: f64) -> f64 {
    (kron(&projector(ta, s), &projector(tb, sp)) * rho).trace().re
}

pub fn eigenvalues(m: &M4) -> Vec<f64> {
    let mut v: Vec<f64> = (*m).symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn eigenvalues2(m: &M2) -> Vec<f64> {
    let mut v: Vec<f64> = (*m).symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn entropy_of(ev: &[f64]) -> f64 {
    ev.iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}

pub fn entropy4(m: &M4) -> f64 {
    entropy_of(&eigenvalues(m))
}

pub fn entropy2(m: &M2) -> f64 {
    entropy_of(&eigenvalues2(m))
}

/// Tr_B, keeping the left factor.
pub fn reduce_to_a(m: &M4) -> M2 {
    let mut r = M2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            r[(i, j)] = m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)];
        }
    }
    r
}

/// Tr_A, keeping the right factor.
pub fn reduce_to_b(m: &M4) -> M2 {
    let mut r = M2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            r[(i, j)] = m[(i, j)] + m[(2 + i, 2 + j)];
        }
    }
    r
}

pub fn mutual_information(rho: &M4) -> f64 {
    entropy2(&reduce_to_a(rho)) + entropy2(&reduce_to_b(rho)) - entropy4(rho)
}

/// S(ρA) − Σ_σ p_σ S(ρ_{A|σ}) for a measurement on B at polar angle θ.
pub fn j_measure_b(rho: &M4, theta: f64) -> f64 {
    let id = M2::identity();
    let mut cond = 0.0;
    for sigma in [1.0, -1.0] {
        let op = kron(&id, &projector(theta, sigma));
        let branch = reduce_to_a(&(op * rho * op));
        let p = branch.trace().re;
        if p > 1e-12 {
            cond += p * entropy2(&(branch / c(p)));
        }
    }
    entropy2(&reduce_to_a(rho)) - cond
}

/// Brute-force discord: 10,001-point θ scan over [0, 2π] then a bracketed
/// ternary search around the best sample.
pub fn discord_brute(rho: &M4) -> f64 {
    const N: usize = 10_001;
    let step = std::f64::consts::TAU / (N - 1) as f64;
    let (mut best_t, mut best_j) = (0.0, f64::NEG_INFINITY);
    for i in 0..N {
        let t = i as f64 * step;
        let j = j_measure_b(rho, t);
        if j > best_j {
            best_j = j;
            best_t = t;
        }
    }
    let (mut lo, mut hi) = (best_t - step, best_t + step);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if j_measure_b(rho, m1) < j_measure_b(rho, m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best_j = best_j.max(j_measure_b(rho, 0.5 * (lo + hi)));
    mutual_information(rho) - best_j
}

/// Swap A and B: ρ → SWAP ρ SWAP.
pub fn swap(rho: &M4) -> M4 {
    let perm = [0usize, 2, 1, 3];
    M4::from_fn(|i, j| rho[(perm[i], perm[j])])
}

/// Alice wins (payoff 1 to A, 0 to B) when outcomes agree, except for the
/// (a′, b′) pair where she wins on disagreement.
pub fn standard_entry(alice_prime: bool, bob_prime: bool, s: f64, sp: f64) -> (f64, f64) {
    let agree = s == sp;
    if agree != (alice_prime && bob_prime) {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    }
}

/// Standard table with Alice's (a, b, ↓, ↓) reward raised to 2 and Bob's
/// lowered to −1.
pub fn biased_entry(alice_prime: bool, bob_prime: bool, s: f64, sp: f64) -> (f64, f64) {
    if !alice_prime && !bob_prime && s < 0.0 && sp < 0.0 {
        (2.0, -1.0)
    } else {
        standard_entry(alice_prime, bob_prime, s, sp)
    }
}

/// 16-term expected payoff with uniform priors, by direct trace.
pub fn payoffs(rho: &M4, angles: [f64; 4], entry: fn(bool, bool, f64, f64) -> (f64, f64)) -> (f64, f64) {
    let (mut ua, mut ub) = (0.0, 0.0);
    for (ap, ta) in [(false, angles[0]), (true, angles[1])] {
        for (bp, tb) in [(false, angles[2]), (true, angles[3])] {
            for s in [1.0, -1.0] {
                for sp in [1.0, -1.0] {
                    let p = prob(rho, ta, tb, s, sp) * 0.25;
                    let (a, b) = entry(ap, bp, s, sp);
                    ua += a * p;
                    ub += b * p;
                }
            }
        }
    }
    (ua, ub)
}
