//! The two-player Bayesian constant-sum measurement game.
//!
//! Alice's detector type is `a` or `a′`, Bob's `b` or `b′`; each type carries a
//! polar measurement angle chosen by its owner. Payoffs are indexed by
//! (Alice type, Bob type, σ, σ′, player) with σ = +1 ↔ ↑.
//!
//! Two evaluation routes exist. [`conditional_prob`] and [`expected_payoff`]
//! trace 4×4 operators against ρ directly; [`PayoffSurface`] compiles the game
//! into a handful of correlation coefficients and is what the equilibrium scan
//! calls millions of times. Tests hold the two routes to 1e-12 of each other.

use std::fmt;

use thiserror::Error;

use crate::linalg::{
    bloch_projector, pauli, tensor_product, ComplexMatrix, DensityMatrix, LinalgError, MeasurementAngle, Outcome,
    PauliAxis,
};

/// Probabilities are clamped to [0, 1] after this much round-off slack.
pub const PROB_TOL: f64 = 1e-12;
const CONSTANT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("payoff entries must be finite")]
    NonFinitePayoff,
    #[error("payoff tensor is not constant-sum: cell sums range over [{min}, {max}]")]
    NotConstantSum { min: f64, max: f64 },
    #[error("priors must lie in [0, 1] and sum to 1 (sum = {0})")]
    BadPriors(f64),
    #[error("expected a two-qubit state, got dimension {0}")]
    NotTwoQubit(usize),
    #[error("trace probability {0:e} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    A,
    B,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::A => "A",
            Player::B => "B",
        })
    }
}

/// Alice's detector type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AliceType {
    A,
    APrime,
}

/// Bob's detector type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BobType {
    B,
    BPrime,
}

impl AliceType {
    pub const ALL: [AliceType; 2] = [AliceType::A, AliceType::APrime];
    fn index(self) -> usize {
        self as usize
    }
}

impl BobType {
    pub const ALL: [BobType; 2] = [BobType::B, BobType::BPrime];
    fn index(self) -> usize {
        self as usize
    }
}

fn outcome_index(o: Outcome) -> usize {
    match o {
        Outcome::Up => 0,
        Outcome::Down => 1,
    }
}

fn player_index(p: Player) -> usize {
    match p {
        Player::A => 0,
        Player::B => 1,
    }
}

/// Payoff for every (Alice type, Bob type, σ, σ′, player).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffTensor {
    // [alpha][beta][sigma][sigma'][player]
    entries: [[[[[f64; 2]; 2]; 2]; 2]; 2],
    cell_sum: f64,
}

impl PayoffTensor {
    /// Builds a tensor from `(alice, bob)` pairs ordered by (α, β, σ, σ′) with
    /// `a`/`b` before the primed types and ↑ before ↓.
    pub fn from_pairs(pairs: &[(f64, f64); 16]) -> Result<Self, GameError> {
        let mut entries = [[[[[0.0; 2]; 2]; 2]; 2]; 2];
        for (k, &(ua, ub)) in pairs.iter().enumerate() {
            if !ua.is_finite() || !ub.is_finite() {
                return Err(GameError::NonFinitePayoff);
            }
            let (al, be, s, sp) = (k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1);
            entries[al][be][s][sp] = [ua, ub];
        }
        let sums: Vec<f64> = pairs.iter().map(|(a, b)| a + b).collect();
        let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
        let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max - min > CONSTANT_SUM_TOL {
            return Err(GameError::NotConstantSum { min, max });
        }
        Ok(Self {
            entries,
            cell_sum: 0.5 * (min + max),
        })
    }

    pub fn entry(&self, alpha: AliceType, beta: BobType, sigma: Outcome, sigma_prime: Outcome, player: Player) -> f64 {
        self.entries[alpha.index()][beta.index()][outcome_index(sigma)][outcome_index(sigma_prime)]
            [player_index(player)]
    }

    /// The common value of `U_A + U_B` in every cell.
    pub fn cell_sum(&self) -> f64 {
        self.cell_sum
    }

    pub fn to_pairs(&self) -> [(f64, f64); 16] {
        let mut out = [(0.0, 0.0); 16];
        for (k, slot) in out.iter_mut().enumerate() {
            let e = self.entries[k >> 3 & 1][k >> 2 & 1][k >> 1 & 1][k & 1];
            *slot = (e[0], e[1]);
        }
        out
    }
}

/// Alice wins on matched outcomes except in block (a′, b′), where she wins on
/// mismatched ones; Bob takes the complement.
pub fn standard_payoffs() -> PayoffTensor {
    let mut pairs = [(0.0, 0.0); 16];
    for (k, slot) in pairs.iter_mut().enumerate() {
        let anti = (k >> 3 & 1) == 1 && (k >> 2 & 1) == 1;
        let matched = (k >> 1 & 1) == (k & 1);
        *slot = if matched != anti { (1.0, 0.0) } else { (0.0, 1.0) };
    }
    PayoffTensor::from_pairs(&pairs).expect("standard tensor is constant-sum")
}

/// [`standard_payoffs`] with cell (a, b, ↓, ↓) changed to (2, −1).
pub fn biased_payoffs() -> PayoffTensor {
    let mut pairs = standard_payoffs().to_pairs();
    // (a, b, ↓, ↓) is index 0b0011
    pairs[3] = (2.0, -1.0);
    PayoffTensor::from_pairs(&pairs).expect("biased tensor is constant-sum")
}

/// Prior weight of each (Alice type, Bob type) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    p: [[f64; 2]; 2],
}

impl Priors {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self, GameError> {
        let sum: f64 = p.iter().flatten().sum();
        let in_range = p.iter().flatten().all(|v| (0.0..=1.0).contains(v));
        if !in_range || (sum - 1.0).abs() > 1e-12 {
            return Err(GameError::BadPriors(sum));
        }
        Ok(Self { p })
    }

    pub fn uniform() -> Self {
        Self { p: [[0.25; 2]; 2] }
    }

    pub fn get(&self, alpha: AliceType, beta: BobType) -> f64 {
        self.p[alpha.index()][beta.index()]
    }

    pub fn table(&self) -> [[f64; 2]; 2] {
        self.p
    }
}

impl Default for Priors {
    fn default() -> Self {
        Self::uniform()
    }
}

/// Index of each angle in `[θa, θa′, θb, θb′]` arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AngleName {
    ThetaA,
    ThetaAPrime,
    ThetaB,
    ThetaBPrime,
}

impl AngleName {
    pub const ALL: [AngleName; 4] = [
        AngleName::ThetaA,
        AngleName::ThetaAPrime,
        AngleName::ThetaB,
        AngleName::ThetaBPrime,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn owner(self) -> Player {
        match self {
            AngleName::ThetaA | AngleName::ThetaAPrime => Player::A,
            AngleName::ThetaB | AngleName::ThetaBPrime => Player::B,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AngleName::ThetaA => "theta_a",
            AngleName::ThetaAPrime => "theta_a_prime",
            AngleName::ThetaB => "theta_b",
            AngleName::ThetaBPrime => "theta_b_prime",
        }
    }

    /// Accepts `theta_a`, `a`, `theta_a'`, `a'`, `theta_a_prime`, `ap`, ...
    pub fn parse(s: &str) -> Option<Self> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix("theta_").or_else(|| t.strip_prefix("theta")).unwrap_or(&t);
        Some(match t {
            "a" => AngleName::ThetaA,
            "a'" | "a_prime" | "ap" | "aprime" => AngleName::ThetaAPrime,
            "b" => AngleName::ThetaB,
            "b'" | "b_prime" | "bp" | "bprime" => AngleName::ThetaBPrime,
            _ => return None,
        })
    }
}

impl fmt::Display for AngleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A pure strategy profile: one polar angle per detector type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyProfile {
    pub theta_a: MeasurementAngle,
    pub theta_a_prime: MeasurementAngle,
    pub theta_b: MeasurementAngle,
    pub theta_b_prime: MeasurementAngle,
}

impl StrategyProfile {
    pub fn new(angles: [f64; 4]) -> Result<Self, LinalgError> {
        Ok(Self {
            theta_a: MeasurementAngle::new(angles[0])?,
            theta_a_prime: MeasurementAngle::new(angles[1])?,
            theta_b: MeasurementAngle::new(angles[2])?,
            theta_b_prime: MeasurementAngle::new(angles[3])?,
        })
    }

    /// Wraps every angle onto [0, 2π).
    pub fn wrapped(angles: [f64; 4]) -> Self {
        Self {
            theta_a: MeasurementAngle::wrapped(angles[0]),
            theta_a_prime: MeasurementAngle::wrapped(angles[1]),
            theta_b: MeasurementAngle::wrapped(angles[2]),
            theta_b_prime: MeasurementAngle::wrapped(angles[3]),
        }
    }

    pub fn angles(&self) -> [f64; 4] {
        [
            self.theta_a.radians(),
            self.theta_a_prime.radians(),
            self.theta_b.radians(),
            self.theta_b_prime.radians(),
        ]
    }

    pub fn alice(&self, alpha: AliceType) -> MeasurementAngle {
        match alpha {
            AliceType::A => self.theta_a,
            AliceType::APrime => self.theta_a_prime,
        }
    }

    pub fn bob(&self, beta: BobType) -> MeasurementAngle {
        match beta {
            BobType::B => self.theta_b,
            BobType::BPrime => self.theta_b_prime,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    pub payoffs: PayoffTensor,
    pub priors: Priors,
    pub state: DensityMatrix,
    /// Free-form label carried into reports.
    pub label: String,
}

impl GameInstance {
    pub fn new(payoffs: PayoffTensor, priors: Priors, state: DensityMatrix) -> Result<Self, GameError> {
        if state.dim() != 4 {
            return Err(GameError::NotTwoQubit(state.dim()));
        }
        Ok(Self {
            payoffs,
            priors,
            state,
            label: String::new(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn surface(&self) -> PayoffSurface {
        PayoffSurface::new(self)
    }
}

/// P(σ, σ′ | θα, θβ) = Tr[(Π_{σ|θα} ⊗ Π_{σ′|θβ}) ρ], clamped to [0, 1].
pub fn conditional_prob(
    state: &DensityMatrix,
    theta_alpha: MeasurementAngle,
    theta_beta: MeasurementAngle,
    sigma: Outcome,
    sigma_prime: Outcome,
) -> Result<f64, GameError> {
    if state.dim() != 4 {
        return Err(GameError::NotTwoQubit(state.dim()));
    }
    let op = tensor_product(&bloch_projector(theta_alpha, sigma), &bloch_projector(theta_beta, sigma_prime))?;
    let p = op.trace_product(state.matrix())?.re;
    if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
        return Err(GameError::ProbabilityOutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Σ_{α,β} Σ_{σ,σ′} U^{α,β}_{σ,σ′,i} P(σ,σ′|α,β) P(α,β).
pub fn expected_payoff(game: &GameInstance, profile: &StrategyProfile, player: Player) -> Result<f64, GameError> {
    let mut total = 0.0;
    for alpha in AliceType::ALL {
        for beta in BobType::ALL {
            let prior = game.priors.get(alpha, beta);
            for sigma in Outcome::BOTH {
                for sigma_prime in Outcome::BOTH {
                    let u = game.payoffs.entry(alpha, beta, sigma, sigma_prime, player);
                    let p = conditional_prob(&game.state, profile.alice(alpha), profile.bob(beta), sigma, sigma_prime)?;
                    total += u * p * prior;
                }
            }
        }
    }
    Ok(total)
}

/// f = U_A − C with C = (U_A + U_B)/2, so that U_A = C + f and U_B = C − f.
pub fn f_function(game: &GameInstance, profile: &StrategyProfile) -> Result<f64, GameError> {
    let ua = expected_payoff(game, profile, Player::A)?;
    let ub = expected_payoff(game, profile, Player::B)?;
    Ok(ua - 0.5 * (ua + ub))
}

/// Tr[((Π_{σ|θα} − Π_{σ|θα*}) ⊗ Π_{σ′|θβ}) ρ]: the change in P(σ, σ′) when
/// Alice moves her detector from θα* to θα.
pub fn deviation_gap(
    state: &DensityMatrix,
    theta_alpha: MeasurementAngle,
    theta_alpha_star: MeasurementAngle,
    theta_beta: MeasurementAngle,
    sigma: Outcome,
    sigma_prime: Outcome,
) -> Result<f64, GameError> {
    if state.dim() != 4 {
        return Err(GameError::NotTwoQubit(state.dim()));
    }
    let diff = bloch_projector(theta_alpha, sigma).sub(&bloch_projector(theta_alpha_star, sigma))?;
    let op = tensor_product(&diff, &bloch_projector(theta_beta, sigma_prime))?;
    Ok(op.trace_product(state.matrix())?.re.clamp(-1.0, 1.0))
}

/// Which scalar a surface evaluation returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    PayoffA,
    PayoffB,
    F,
}

impl Quantity {
    fn index(self) -> usize {
        match self {
            Quantity::PayoffA => 0,
            Quantity::PayoffB => 1,
            Quantity::F => 2,
        }
    }
}

impl From<Player> for Quantity {
    fn from(p: Player) -> Self {
        match p {
            Player::A => Quantity::PayoffA,
            Player::B => Quantity::PayoffB,
        }
    }
}

/// Payoff moments of one (α, β) block, prior and the ¼ already folded in:
/// constant, σ-odd, σ′-odd and σσ′ parts.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    constant: f64,
    alice: f64,
    bob: f64,
    joint: f64,
}

/// The game compiled against a fixed state.
///
/// With ρ's Pauli correlations T_{μν} = Tr[(σμ ⊗ σν)ρ] the block sums reduce to
/// ¼[m₀T_II + m_σ′ (sβ T_IX + cβ T_IZ) + m_σ (sα T_XI + cα T_ZI) + m_σσ′ (...)],
/// which is all the equilibrium scan needs.
#[derive(Debug, Clone)]
pub struct PayoffSurface {
    // rows/cols: I, X, Z (Y never appears with zero azimuth)
    corr: [[f64; 3]; 3],
    // [quantity][alpha][beta]
    moments: [[[Moments; 2]; 2]; 3],
    constant: f64,
}

/// (sin θ, cos θ).
pub type Trig = [f64; 2];

pub fn trig(theta: f64) -> Trig {
    let (s, c) = theta.sin_cos();
    [s, c]
}

impl PayoffSurface {
    pub fn new(game: &GameInstance) -> Self {
        let basis = [
            ComplexMatrix::identity(2).expect("2x2"),
            pauli(PauliAxis::X),
            pauli(PauliAxis::Z),
        ];
        let mut corr = [[0.0; 3]; 3];
        for (mu, pm) in basis.iter().enumerate() {
            for (nu, pn) in basis.iter().enumerate() {
                let op = tensor_product(pm, pn).expect("2x2 factors");
                corr[mu][nu] = op.trace_product(game.state.matrix()).expect("4x4").re;
            }
        }

        let mut moments = [[[Moments::default(); 2]; 2]; 3];
        for alpha in AliceType::ALL {
            for beta in BobType::ALL {
                let w = 0.25 * game.priors.get(alpha, beta);
                for q in [Quantity::PayoffA, Quantity::PayoffB, Quantity::F] {
                    let m = &mut moments[q.index()][alpha.index()][beta.index()];
                    for sigma in Outcome::BOTH {
                        for sigma_prime in Outcome::BOTH {
                            let ua = game.payoffs.entry(alpha, beta, sigma, sigma_prime, Player::A);
                            let ub = game.payoffs.entry(alpha, beta, sigma, sigma_prime, Player::B);
                            let u = match q {
                                Quantity::PayoffA => ua,
                                Quantity::PayoffB => ub,
                                Quantity::F => 0.5 * (ua - ub),
                            };
                            let (s, sp) = (sigma.sign(), sigma_prime.sign());
                            m.constant += w * u;
                            m.alice += w * s * u;
                            m.bob += w * sp * u;
                            m.joint += w * s * sp * u;
                        }
                    }
                }
            }
        }
        let total_prior: f64 = game.priors.table().iter().flatten().sum();
        Self {
            corr,
            moments,
            constant: 0.5 * game.payoffs.cell_sum() * total_prior,
        }
    }

    /// The game constant C (half the common payoff sum).
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Pauli correlation entry T_{μν} with μ, ν ∈ {0: I, 1: X, 2: Z}.
    pub fn correlation(&self, mu: usize, nu: usize) -> f64 {
        self.corr[mu][nu]
    }

    #[inline]
    pub fn eval_trig(&self, q: Quantity, t: &[Trig; 4]) -> f64 {
        let c = &self.corr;
        let m = &self.moments[q.index()];
        let mut total = 0.0;
        for (ai, ta) in [t[0], t[1]].iter().enumerate() {
            let local_a = ta[0] * c[1][0] + ta[1] * c[2][0];
            for (bi, tb) in [t[2], t[3]].iter().enumerate() {
                let local_b = tb[0] * c[0][1] + tb[1] * c[0][2];
                let joint = ta[0] * (tb[0] * c[1][1] + tb[1] * c[1][2]) + ta[1] * (tb[0] * c[2][1] + tb[1] * c[2][2]);
                let mm = &m[ai][bi];
                total += mm.constant * c[0][0] + mm.alice * local_a + mm.bob * local_b + mm.joint * joint;
            }
        }
        total
    }

    pub fn eval(&self, q: Quantity, angles: &[f64; 4]) -> f64 {
        self.eval_trig(q, &angles.map(trig))
    }

    pub fn f(&self, angles: &[f64; 4]) -> f64 {
        self.eval(Quantity::F, angles)
    }

    pub fn payoff(&self, player: Player, angles: &[f64; 4]) -> f64 {
        self.eval(player.into(), angles)
    }
}
