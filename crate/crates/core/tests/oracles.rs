mod common;

use std::f64::consts::{FRAC_PI_2, LN_2, PI, TAU};

use qnash::discord::{discord, discord_with, j_post_measurement, mutual_information, DiscordOptions};
use qnash::equilibrium::{
    find_nash_equilibria, find_stationary_points, hessian_diag, hessian_diag_at, jacobian, jacobian_with_step,
    second_differences, verify_nash_inequalities, NashClass, JACOBIAN_STEP, PROBE_COUNT,
};
use qnash::game::{
    biased_payoffs, conditional_prob, expected_payoff, standard_payoffs, GameInstance, PayoffTensor, Player, Priors,
    StrategyProfile,
};
use qnash::linalg::{partial_trace, von_neumann_entropy, MeasurementAngle, Outcome, Subsystem};
use qnash::states::{self, d1, d2, product, werner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn zoo() -> Vec<(String, qnash::linalg::DensityMatrix)> {
    let mut v = Vec::new();
    for eta in [0.0, 0.1, 1.0 / 3.0, 0.6, 1.0] {
        v.push((format!("werner:{eta}"), werner(eta).unwrap().rho));
    }
    for x in [0.0, 0.7, FRAC_PI_2, PI, 4.0, TAU] {
        v.push((format!("d1:{x}"), d1(x).unwrap().rho));
        v.push((format!("d2:{x}"), d2(x).unwrap().rho));
    }
    v.push(("product".into(), product(0.4, 2.2).unwrap().rho));
    v
}

fn game(tensor: PayoffTensor, rho: qnash::linalg::DensityMatrix) -> GameInstance {
    GameInstance::new(tensor, Priors::uniform(), rho).unwrap()
}

fn random_profile(rng: &mut ChaCha8Rng) -> [f64; 4] {
    [0; 4].map(|_| rng.random_range(0.0..TAU))
}

#[test]
fn eigenvalues_and_entropy_match_nalgebra() {
    for (name, rho) in zoo() {
        let mine = {
            let mut v = rho.eigenvalues();
            v.sort_by(f64::total_cmp);
            v
        };
        let oracle = common::eigenvalues(&common::to_na(&rho));
        for (a, b) in mine.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{name}: {mine:?} vs {oracle:?}");
        }
        let s = von_neumann_entropy(&rho);
        assert!((s - common::entropy4(&common::to_na(&rho))).abs() < 1e-10, "{name}");
        let ra = partial_trace(&rho, Subsystem::A).unwrap();
        let oracle_ra = common::reduce_to_a(&common::to_na(&rho));
        assert!((von_neumann_entropy(&ra) - common::entropy2(&oracle_ra)).abs() < 1e-12, "{name}");
    }
}

#[test]
fn conditional_prob_matches_direct_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, rho) in zoo() {
        let na = common::to_na(&rho);
        for _ in 0..100 {
            let ta = rng.random_range(0.0..TAU);
            let tb = rng.random_range(0.0..TAU);
            for s in Outcome::BOTH {
                for sp in Outcome::BOTH {
                    let p = conditional_prob(
                        &rho,
                        MeasurementAngle::new(ta).unwrap(),
                        MeasurementAngle::new(tb).unwrap(),
                        s,
                        sp,
                    )
                    .unwrap();
                    let q = common::prob(&na, ta, tb, s.sign(), sp.sign());
                    assert!((p - q).abs() < 1e-12, "{name}");
                }
            }
        }
    }
}

#[test]
fn expected_payoffs_match_sixteen_term_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (tensor, entry) in [
        (standard_payoffs(), common::standard_entry as fn(bool, bool, f64, f64) -> (f64, f64)),
        (biased_payoffs(), common::biased_entry),
    ] {
        for (name, rho) in zoo() {
            let na = common::to_na(&rho);
            let g = game(tensor, rho);
            let surface = g.surface();
            for _ in 0..40 {
                let a = random_profile(&mut rng);
                let p = StrategyProfile::new(a).unwrap();
                let (ua, ub) = common::payoffs(&na, a, entry);
                assert!((expected_payoff(&g, &p, Player::A).unwrap() - ua).abs() < 1e-12, "{name}");
                assert!((expected_payoff(&g, &p, Player::B).unwrap() - ub).abs() < 1e-12, "{name}");
                assert!((surface.payoff(Player::A, &a) - ua).abs() < 1e-12, "{name}");
                assert!((surface.payoff(Player::B, &a) - ub).abs() < 1e-12, "{name}");
            }
        }
    }
}

#[test]
fn discord_matches_brute_force_scan() {
    let mut cases = zoo();
    cases.push(("d1:pi/3".into(), d1(PI / 3.0).unwrap().rho));
    cases.push(("d2:2.5".into(), d2(2.5).unwrap().rho));
    for (name, rho) in cases {
        let na = common::to_na(&rho);
        let oracle = common::discord_brute(&na);
        let d = discord(&rho).unwrap();
        let expect = if oracle < 1e-8 { 0.0 } else { oracle };
        assert!((d.discord - expect).abs() < 1e-8, "{name}: {} vs {oracle}", d.discord);
        assert!((d.mutual_information - common::mutual_information(&na)).abs() < 1e-10, "{name}");

        let swapped = common::swap(&na);
        let oracle_a = common::discord_brute(&swapped);
        let da = discord_with(
            &rho,
            &DiscordOptions {
                measured: Subsystem::A,
                azimuthal_scan: false,
            },
        )
        .unwrap();
        let expect_a = if oracle_a < 1e-8 { 0.0 } else { oracle_a };
        assert!((da.discord - expect_a).abs() < 1e-8, "{name} (A): {} vs {oracle_a}", da.discord);
    }
}

#[test]
fn werner_endpoints_against_oracle() {
    let w1 = werner(1.0).unwrap().rho;
    let oracle = common::discord_brute(&common::to_na(&w1));
    assert!((oracle - LN_2).abs() < 1e-9);
    assert!((discord(&w1).unwrap().discord - LN_2).abs() < 1e-6);
    assert_eq!(discord(&werner(0.0).unwrap().rho).unwrap().discord, 0.0);
}

#[test]
fn j_matches_oracle_pointwise() {
    let rho = d1(1.1).unwrap().rho;
    let na = common::to_na(&rho);
    for k in 0..50 {
        let t = TAU * k as f64 / 49.0;
        let j = j_post_measurement(&rho, MeasurementAngle::new(t).unwrap()).unwrap();
        assert!((j - common::j_measure_b(&na, t)).abs() < 1e-12);
    }
    assert!((mutual_information(&rho).unwrap() - common::mutual_information(&na)).abs() < 1e-12);
}

#[test]
fn jacobian_matches_analytic_derivative_of_oracle() {
    // finite difference of the independent payoff oracle with a much smaller step
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let rho = werner(1.0).unwrap().rho;
    let na = common::to_na(&rho);
    let g = game(standard_payoffs(), rho);
    let f = |a: [f64; 4]| {
        let (ua, ub) = common::payoffs(&na, a, common::standard_entry);
        0.5 * (ua - ub)
    };
    for _ in 0..20 {
        let a = [0; 4].map(|_| rng.random_range(0.1..TAU - 0.1));
        let j = jacobian(&g, &StrategyProfile::new(a).unwrap());
        for k in 0..4 {
            let h = 1e-6;
            let mut ap = a;
            let mut am = a;
            ap[k] += h;
            am[k] -= h;
            let oracle = (f(ap) - f(am)) / (2.0 * h);
            assert!((j[k] - oracle).abs() < 1e-6, "{k}: {} vs {oracle}", j[k]);
        }
    }
}

#[test]
fn jacobian_richardson_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let g = game(standard_payoffs(), werner(1.0).unwrap().rho);
    let surface = g.surface();
    for _ in 0..100 {
        let a = random_profile(&mut rng);
        let coarse = jacobian_with_step(&surface, &a, JACOBIAN_STEP);
        let fine = jacobian_with_step(&surface, &a, JACOBIAN_STEP / 2.0);
        for k in 0..4 {
            // f is R cos(θk − φ) + c along each axis with R ≤ 1, so the
            // central-difference error is at most R h²/6 and halving h cuts it by 4
            let h = JACOBIAN_STEP;
            let expected = 0.75 * h * h / 6.0;
            let diff = (coarse[k] - fine[k]).abs();
            assert!(diff <= 4.0 * expected + 1e-11, "{diff}");
            let fd = |step: f64| jacobian_with_step(&surface, &a, step)[k];
            let d_next = (fine[k] - fd(h / 4.0)).abs();
            if diff > 1e-10 {
                let ratio = diff / d_next;
                assert!((3.0..5.0).contains(&ratio), "shrink ratio {ratio}");
            }
        }
    }
}

#[test]
fn flat_games_have_zero_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for rho in [werner(0.0).unwrap().rho, d2(0.0).unwrap().rho] {
        let g = game(standard_payoffs(), rho);
        for _ in 0..20 {
            let p = StrategyProfile::new(random_profile(&mut rng)).unwrap();
            assert!(jacobian(&g, &p).iter().all(|v| v.abs() < 1e-12));
            assert!(hessian_diag(&g, &p).iter().all(|v| v.abs() < 1e-9));
            assert!(verify_nash_inequalities(&g, &p, PROBE_COUNT));
        }
    }
}

#[test]
fn synthetic_second_difference() {
    let d = second_differences(|x| x[0].cos(), &[0.0; 4], 1e-3);
    assert!((d[0] + 1.0).abs() < 1e-5);
    assert!(d[1..].iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn d1_saddle_has_expected_diagonal_signs() {
    let g = game(standard_payoffs(), d1(0.0).unwrap().rho);
    let report = find_nash_equilibria(&g, 21).unwrap();
    let p = report
        .strict_points()
        .find(|p| (p.angles()[1] - FRAC_PI_2).abs() < 0.05 && (p.angles()[3] - FRAC_PI_2).abs() < 0.05)
        .expect("saddle near the fixed pair");
    let diag = hessian_diag_at(&g.surface(), &p.angles());
    // Alice's entries non-positive, Bob's non-negative, up to the zero band
    assert!(diag[0] <= 1e-6 && diag[1] <= 1e-6 && diag[2] >= -1e-6 && diag[3] >= -1e-6, "{diag:?}");
    assert!(verify_nash_inequalities(&g, &p.profile, PROBE_COUNT));
}

#[test]
fn random_werner_profile_is_not_equilibrium() {
    let g = game(standard_payoffs(), werner(1.0).unwrap().rho);
    let p = StrategyProfile::new([0.3, 1.9, 2.6, 4.4]).unwrap();
    assert!(jacobian(&g, &p).iter().any(|v| v.abs() > 1e-3));
    assert!(!verify_nash_inequalities(&g, &p, PROBE_COUNT));
}

#[test]
fn not_nash_points_admit_a_profitable_probe() {
    // independent probe: evaluate payoffs with the oracle, not the surface
    for (name, rho) in [
        ("werner:0.5", werner(0.5).unwrap().rho),
        ("d1:pi/2", d1(FRAC_PI_2).unwrap().rho),
        ("d2:pi/2", d2(FRAC_PI_2).unwrap().rho),
    ] {
        let na = common::to_na(&rho);
        let g = game(standard_payoffs(), rho);
        let scan = find_stationary_points(&g, 11).unwrap();
        for p in scan.points.iter().filter(|p| p.hessian_class == NashClass::NotNash) {
            let base = p.angles();
            let (ua, ub) = common::payoffs(&na, base, common::standard_entry);
            let mut gain = f64::NEG_INFINITY;
            for k in 0..4 {
                for j in 0..PROBE_COUNT {
                    let mut a = base;
                    a[k] = TAU * j as f64 / PROBE_COUNT as f64;
                    let (va, vb) = common::payoffs(&na, a, common::standard_entry);
                    gain = gain.max(if k < 2 { va - ua } else { vb - ub });
                }
            }
            assert!(gain > 1e-9, "{name}: {base:?}");
        }
    }
}

#[test]
fn d2_marginals_and_state_sanity() {
    let rho = states::d2(FRAC_PI_2).unwrap().rho;
    let na = common::to_na(&rho);
    let ra = common::reduce_to_a(&na);
    assert!((ra[(0, 0)].re - 0.5).abs() < 1e-15 && ra[(0, 1)].norm() < 1e-15);
}
