//! Acceptance suite: one PASS/FAIL line per criterion at the pinned
//! tolerances. Exits non-zero if any criterion fails.
//!
//! ```text
//! cargo test --release -p qnash --test acceptance
//! ```

mod common;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, PI, TAU};
use std::time::{Duration, Instant};

use qnash::discord::{discord, discord_with, DiscordOptions};
use qnash::equilibrium::{
    find_nash_equilibria, jacobian_with_step, max_abs_f_on_probe_grid, verify_nash_inequalities, EquilibriumReport,
    Verdict, JACOBIAN_STEP, PROBE_COUNT,
};
use qnash::game::{
    biased_payoffs, conditional_prob, expected_payoff, standard_payoffs, AngleName, GameInstance, PayoffTensor,
    Player, Priors, Quantity, StrategyProfile,
};
use qnash::linalg::{DensityMatrix, MeasurementAngle, Outcome, Subsystem};
use qnash::output::SurfaceGrid;
use qnash::states::{d1, d2, product, werner, StateSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Check {
    Check {
        passed,
        detail: detail.into(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Table {
    Standard,
    Biased,
}

impl Table {
    fn tensor(self) -> PayoffTensor {
        match self {
            Table::Standard => standard_payoffs(),
            Table::Biased => biased_payoffs(),
        }
    }
}

type Key = (&'static str, Table, usize);
type Criterion = Box<dyn FnOnce(&mut Runs) -> Check>;

/// Equilibrium reports for every figure scenario, computed once.
struct Runs {
    reports: BTreeMap<Key, (EquilibriumReport, Duration)>,
}

impl Runs {
    fn game(spec: &str, table: Table) -> GameInstance {
        let rho = StateSpec::parse(spec).unwrap().build().unwrap().rho;
        GameInstance::new(table.tensor(), Priors::uniform(), rho).unwrap()
    }

    fn get(&mut self, spec: &'static str, table: Table, res: usize) -> &(EquilibriumReport, Duration) {
        self.reports.entry((spec, table, res)).or_insert_with(|| {
            let g = Self::game(spec, table);
            let t = Instant::now();
            let r = find_nash_equilibria(&g, res).unwrap();
            (r, t.elapsed())
        })
    }

    fn verdict(&mut self, spec: &'static str, table: Table, res: usize) -> Verdict {
        self.get(spec, table, res).0.verdict
    }

    fn stable(&mut self, spec: &'static str, table: Table) -> bool {
        let v = self.verdict(spec, table, 21);
        [31, 41].iter().all(|&r| self.verdict(spec, table, r) == v)
    }
}

fn ma(t: f64) -> MeasurementAngle {
    MeasurementAngle::new(t).unwrap()
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w0 = werner(0.0).unwrap().rho;
    let mut worst_w = 0.0f64;
    for _ in 0..1000 {
        let ta = rng.random_range(0.0..TAU);
        let tb = rng.random_range(0.0..TAU);
        let s = if rng.random_bool(0.5) { Outcome::Up } else { Outcome::Down };
        let sp = if rng.random_bool(0.5) { Outcome::Up } else { Outcome::Down };
        worst_w = worst_w.max((conditional_prob(&w0, ma(ta), ma(tb), s, sp).unwrap() - 0.25).abs());
    }
    let grid: Vec<f64> = (0..50).map(|k| TAU * k as f64 / 49.0).collect();
    let (r0, rpi) = (d2(0.0).unwrap().rho, d2(PI).unwrap().rho);
    let (mut worst_c1, mut worst_c2) = (0.0f64, 0.0f64);
    for &ta in &grid {
        for &tb in &grid {
            for s in Outcome::BOTH {
                for sp in Outcome::BOTH {
                    let c1 = 0.25 * (1.0 + sp.sign() * tb.cos());
                    let c2 = 0.25 * (1.0 + s.sign() * sp.sign() * ta.cos() * tb.cos());
                    worst_c1 = worst_c1.max((conditional_prob(&r0, ma(ta), ma(tb), s, sp).unwrap() - c1).abs());
                    worst_c2 = worst_c2.max((conditional_prob(&rpi, ma(ta), ma(tb), s, sp).unwrap() - c2).abs());
                }
            }
        }
    }
    check(
        worst_w <= 1e-12 && worst_c1 <= 1e-12 && worst_c2 <= 1e-12,
        format!("werner(0) |P-1/4| {worst_w:.1e}; d2(0) {worst_c1:.1e}; d2(pi) {worst_c2:.1e} (tol 1e-12)"),
    )
}

fn criterion_2() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("custom.txt");
    // werner(0.3) written out by hand
    let (a, b) = (0.7 / 4.0, 0.7 / 4.0 + 0.15);
    std::fs::write(&path, format!("{a} 0 0 0\n0 {b} -0.15 0\n0 -0.15 {b} 0\n0 0 0 {a}\n")).unwrap();
    let families: Vec<(&str, DensityMatrix)> = vec![
        ("werner", werner(0.37).unwrap().rho),
        ("d1", d1(1.1).unwrap().rho),
        ("d2", d2(2.3).unwrap().rho),
        ("product", product(0.4, 5.1).unwrap().rho),
        (
            "custom",
            StateSpec::parse(&format!("custom:{}", path.display()))
                .unwrap()
                .build()
                .unwrap()
                .rho,
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let profiles: Vec<StrategyProfile> = (0..1000)
        .map(|_| StrategyProfile::new([0; 4].map(|_| rng.random_range(0.0..TAU))).unwrap())
        .collect();
    let mut worst = 0.0f64;
    for table in [Table::Standard, Table::Biased] {
        for (_, rho) in &families {
            let g = GameInstance::new(table.tensor(), Priors::uniform(), *rho).unwrap();
            for p in &profiles {
                let s = expected_payoff(&g, p, Player::A).unwrap() + expected_payoff(&g, p, Player::B).unwrap();
                worst = worst.max((s - 1.0).abs());
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("max |U_A + U_B - 1| = {worst:.1e} over 2 tables x 5 families x 1000 profiles (tol 1e-12)"),
    )
}

fn criterion_3(runs: &mut Runs) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (spec, want) in [
        ("werner:0", Verdict::WeakNashFlat),
        ("werner:0.1", Verdict::None),
        ("werner:0.5", Verdict::None),
        ("werner:1", Verdict::None),
    ] {
        let v = runs.verdict(spec, Table::Standard, 21);
        let stable = runs.stable(spec, Table::Standard);
        ok &= v == want && stable;
        parts.push(format!("{spec}={v}{}", if stable { "" } else { " (unstable)" }));
    }
    let slow41 = runs
        .reports
        .iter()
        .filter(|(k, _)| k.2 == 41)
        .map(|(_, v)| v.1)
        .max()
        .unwrap_or_default();
    let slow21 = runs
        .reports
        .iter()
        .filter(|(k, _)| k.2 == 21)
        .map(|(_, v)| v.1)
        .max()
        .unwrap_or_default();
    ok &= slow41 < Duration::from_secs(600) && slow21 < Duration::from_secs(60);
    check(
        ok,
        format!(
            "{}; stable at 21/31/41; slowest run {:.2}s @21, {:.2}s @41",
            parts.join(", "),
            slow21.as_secs_f64(),
            slow41.as_secs_f64()
        ),
    )
}

fn has_strict_near(r: &EquilibriumReport, a_prime: f64, b_prime: f64) -> bool {
    r.strict_points().any(|p| {
        let a = p.angles();
        (a[1] - a_prime).abs() < 0.05 && (a[3] - b_prime).abs() < 0.05
    })
}

fn criterion_4(runs: &mut Runs) -> Check {
    let r = &runs.get("d1:0", Table::Standard, 21).0;
    let strict = r.verdict == Verdict::StrictNashFound;
    let near = has_strict_near(r, FRAC_PI_2, FRAC_PI_2);
    let v_q = runs.verdict("d1:pi/2", Table::Standard, 21);
    let stable = runs.stable("d1:0", Table::Standard) && runs.stable("d1:pi/2", Table::Standard);
    check(
        strict && near && v_q == Verdict::None && stable,
        format!(
            "d1(0)={} with strict point at (a',b')~(pi/2,pi/2): {near}; d1(pi/2)={v_q}; stable: {stable}",
            if strict { "strict_nash_found" } else { "other" }
        ),
    )
}

fn criterion_5(runs: &mut Runs) -> Check {
    let v0 = runs.verdict("d2:0", Table::Standard, 21);
    let r = &runs.get("d2:pi/2", Table::Standard, 21).0;
    let vq = r.verdict;
    let near = has_strict_near(r, FRAC_PI_2, FRAC_PI_4);
    let stable = runs.stable("d2:0", Table::Standard) && runs.stable("d2:pi/2", Table::Standard);
    check(
        v0 == Verdict::WeakNashFlat && vq == Verdict::StrictNashFound && near && stable,
        format!("d2(0)={v0}; d2(pi/2)={vq} with strict point at (a',b')~(pi/2,pi/4): {near}; stable: {stable}"),
    )
}

fn criterion_6(runs: &mut Runs) -> Check {
    let rho = d2(0.0).unwrap().rho;
    let biased = GameInstance::new(biased_payoffs(), Priors::uniform(), rho).unwrap();
    let standard = GameInstance::new(standard_payoffs(), Priors::uniform(), rho).unwrap();
    let fixed = [(AngleName::ThetaA, FRAC_PI_2), (AngleName::ThetaAPrime, FRAC_PI_2)];
    let grid = SurfaceGrid::compute(
        &biased,
        Quantity::PayoffB,
        (AngleName::ThetaB, AngleName::ThetaBPrime),
        fixed,
        101,
    );
    let (lo, hi) = grid.min_max();
    let flat = max_abs_f_on_probe_grid(&standard.surface());
    let v0 = runs.verdict("d2:0", Table::Biased, 21);
    let vq = runs.verdict("d2:pi/2", Table::Biased, 21);
    let stable = runs.stable("d2:0", Table::Biased) && runs.stable("d2:pi/2", Table::Biased);
    check(
        hi - lo > 0.01 && flat < 1e-10 && v0 != Verdict::None && vq != Verdict::None && stable,
        format!(
            "biased d2(0) U_B range over theta_b sweep {:.4} (> 0.01); standard max|f| {flat:.1e} (< 1e-10); \
             biased verdicts d2(0)={v0}, d2(pi/2)={vq}; stable: {stable}",
            hi - lo
        ),
    )
}

fn criterion_7() -> Check {
    let t = Instant::now();
    let d_w0 = discord(&werner(0.0).unwrap().rho).unwrap().discord;
    let w1 = werner(1.0).unwrap().rho;
    let d_w1 = discord(&w1).unwrap().discord;
    let oracle_w1 = common::discord_brute(&common::to_na(&w1));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut d_prod = 0.0f64;
    for _ in 0..20 {
        let rho = product(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)).unwrap().rho;
        d_prod = d_prod.max(discord(&rho).unwrap().discord.abs());
    }
    let r2 = d2(FRAC_PI_2).unwrap().rho;
    let d2_b = discord(&r2).unwrap().discord;
    let d2_a = discord_with(
        &r2,
        &DiscordOptions {
            measured: Subsystem::A,
            azimuthal_scan: false,
        },
    )
    .unwrap()
    .discord;
    let elapsed = t.elapsed();
    let ok = d_w0.abs() <= 1e-8
        && (d_w1 - LN_2).abs() <= 1e-6
        && (d_w1 - oracle_w1).abs() <= 1e-6
        && d_prod <= 1e-9
        && d2_b > 0.01
        && d2_a.abs() <= 1e-6
        && elapsed < Duration::from_secs(30);
    check(
        ok,
        format!(
            "werner(0) {d_w0:.1e}; werner(1) {d_w1:.9} vs ln2 (oracle {oracle_w1:.9}); product max {d_prod:.1e}; \
             d2(pi/2) measure_B {d2_b:.4}, measure_A {d2_a:.1e}; {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_8(runs: &mut Runs) -> Check {
    let rho = werner(1.0).unwrap().rho;
    let g = GameInstance::new(standard_payoffs(), Priors::uniform(), rho).unwrap();
    let surface = g.surface();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = JACOBIAN_STEP;
    let bound = 4.0 * 0.75 * h * h / 6.0 + 1e-11;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = [0; 4].map(|_| rng.random_range(0.0..TAU));
        let coarse = jacobian_with_step(&surface, &a, h);
        let fine = jacobian_with_step(&surface, &a, h / 2.0);
        for k in 0..4 {
            worst = worst.max((coarse[k] - fine[k]).abs());
        }
    }
    let mut strict_total = 0;
    let mut strict_failed = 0;
    let keys: Vec<Key> = runs.reports.keys().copied().collect();
    for key in keys {
        let game = Runs::game(key.0, key.1);
        for p in runs.reports[&key].0.strict_points() {
            strict_total += 1;
            if !verify_nash_inequalities(&game, &p.profile, PROBE_COUNT) {
                strict_failed += 1;
            }
        }
    }
    check(
        worst <= bound && strict_failed == 0 && strict_total > 0,
        format!(
            "Richardson |J_h - J_h/2| max {worst:.2e} (bound {bound:.2e}); \
             {strict_total} strict points, {strict_failed} fail {PROBE_COUNT}-probe verification"
        ),
    )
}

fn criterion_9(runs: &mut Runs) -> Check {
    let (r41, t41) = runs.get("d1:0", Table::Standard, 41).clone();
    let v21 = runs.verdict("d1:0", Table::Standard, 21);
    check(
        r41.grid_points == 2_825_761 && r41.verdict == v21,
        format!(
            "d1(0) standard at 41^4 = {} grid points: {} in {:.2}s; resolution 21: {v21}",
            r41.grid_points,
            r41.verdict,
            t41.as_secs_f64()
        ),
    )
}

fn main() {
    let mut runs = Runs {
        reports: BTreeMap::new(),
    };
    let criteria: Vec<(&str, Criterion)> = vec![
        ("closed-form conditional probabilities", Box::new(|_| criterion_1())),
        ("constant-sum identity", Box::new(|_| criterion_2())),
        ("werner verdicts", Box::new(criterion_3)),
        ("d1 verdicts", Box::new(criterion_4)),
        ("d2 verdicts", Box::new(criterion_5)),
        ("biased game", Box::new(criterion_6)),
        ("discord endpoints", Box::new(|_| criterion_7())),
        ("numerical-derivative soundness", Box::new(criterion_8)),
        ("resolution-41 grid run", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let o = run(&mut runs);
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {name}: {} ({:.2}s)",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
