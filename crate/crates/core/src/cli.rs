//! `qnash` command-line driver.
//!
//! Exit codes: 0 success, 1 verification failure, 2 argument or spec error,
//! 3 I/O error.

use std::ffi::OsString;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::config::{named_payoffs, ConfigError, GameConfig};
use crate::discord::{discord, discord_with, DiscordOptions};
use crate::equilibrium::{find_nash_equilibria, DEFAULT_GRID};
use crate::game::{
    biased_payoffs, conditional_prob, expected_payoff, standard_payoffs, AngleName, GameInstance, PayoffSurface,
    Player, Priors, Quantity, StrategyProfile,
};
use crate::linalg::{DensityMatrix, MeasurementAngle, Outcome, Subsystem};
use crate::output::{discord_to_toml, report_to_toml, SurfaceGrid};
use crate::states::{self, load_custom_matrix, parse_angle, StateError, StateSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

const CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        match e {
            StateError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::State(s) => s.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qnash", version, about = "Nash equilibria and discord in two-qubit Bayesian games")]
pub struct Cli {
    /// Worker threads for the grid scan (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export a two-angle payoff surface as CSV.
    Surface(SurfaceArgs),
    /// Search for pure-strategy Nash equilibria.
    Equilibria(EquilibriaArgs),
    /// Quantum discord of a state.
    Discord(DiscordArgs),
    /// Run the built-in closed-form check suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// werner:<eta> | d1:<x> | d2:<x> | product:<ta>,<tb> | custom:<path>
    #[arg(long)]
    pub state: Option<String>,
    /// standard | biased
    #[arg(long)]
    pub payoffs: Option<String>,
    /// TOML game config; --state and --payoffs override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlayerArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
    #[value(name = "f", alias = "F")]
    F,
}

impl From<PlayerArg> for Quantity {
    fn from(p: PlayerArg) -> Self {
        match p {
            PlayerArg::A => Quantity::PayoffA,
            PlayerArg::B => Quantity::PayoffB,
            PlayerArg::F => Quantity::F,
        }
    }
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, value_enum, default_value = "A")]
    pub player: PlayerArg,
    /// Two swept angles, e.g. `theta_a,theta_b`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Two fixed angles, e.g. `theta_a_prime=pi/2,theta_b_prime=pi/2`.
    #[arg(long)]
    pub fixed: Option<String>,
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Grid points per angle axis.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Orientation {
    #[value(name = "measure_B")]
    MeasureB,
    #[value(name = "measure_A")]
    MeasureA,
}

impl Orientation {
    fn as_str(self) -> &'static str {
        match self {
            Orientation::MeasureB => "measure_B",
            Orientation::MeasureA => "measure_A",
        }
    }

    fn subsystem(self) -> Subsystem {
        match self {
            Orientation::MeasureB => Subsystem::B,
            Orientation::MeasureA => Subsystem::A,
        }
    }
}

#[derive(Debug, Args)]
pub struct DiscordArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long, value_enum, default_value = "measure_B")]
    pub orientation: Orientation,
    /// Also optimize the measurement azimuth.
    #[arg(long)]
    pub azimuthal: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Extra state to include in the suite.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a pool configured earlier in the same process stays in effect
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Surface(a) => cmd_surface(a),
        Command::Equilibria(a) => cmd_equilibria(a),
        Command::Discord(a) => cmd_discord(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("writing stdout: {e}")))
        }
    }
}

/// Builds the game from `--config`, `--state` and `--payoffs`.
pub fn resolve_game(args: &GameArgs) -> Result<GameInstance, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            GameConfig::from_toml(&text)?
        }
        None => GameConfig {
            state: String::new(),
            payoffs: "standard".into(),
            entries: None,
            priors: None,
            label: None,
        },
    };
    if let Some(state) = &args.state {
        config.state = state.clone();
    }
    if let Some(payoffs) = &args.payoffs {
        named_payoffs(payoffs)?;
        config.payoffs = payoffs.clone();
        config.entries = None;
    }
    if config.state.is_empty() {
        return Err(CliError::Usage("no state given (use --state or --config)".into()));
    }
    Ok(config.build()?)
}

fn parse_angle_name(token: &str) -> Result<AngleName, CliError> {
    AngleName::parse(token).ok_or_else(|| CliError::Usage(format!("unknown angle `{token}`")))
}

fn parse_fixed_value(token: &str) -> Result<f64, CliError> {
    let v = parse_angle(token)?;
    if !(0.0..=TAU).contains(&v) {
        return Err(CliError::Usage(format!("angle {token} outside [0, 2π]")));
    }
    Ok(v)
}

/// Swept pair and fixed (angle, value) pairs of a surface.
pub type SurfaceAxes = ((AngleName, AngleName), [(AngleName, f64); 2]);

/// Resolves `--sweep` and `--fixed` into two swept and two fixed angles.
pub fn resolve_axes(sweep: Option<&str>, fixed: Option<&str>) -> Result<SurfaceAxes, CliError> {
    let sweep: Option<Vec<AngleName>> = sweep
        .map(|s| s.split(',').map(|t| parse_angle_name(t.trim())).collect())
        .transpose()?;
    let fixed: Option<Vec<(AngleName, f64)>> = fixed
        .map(|s| {
            s.split(',')
                .map(|kv| {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| CliError::Usage(format!("expected angle=value, got `{kv}`")))?;
                    Ok((parse_angle_name(k.trim())?, parse_fixed_value(v.trim())?))
                })
                .collect::<Result<_, CliError>>()
        })
        .transpose()?;

    let complement = |names: &[AngleName]| -> Vec<AngleName> {
        AngleName::ALL.into_iter().filter(|n| !names.contains(n)).collect()
    };
    let (sweep, fixed) = match (sweep, fixed) {
        (None, None) => (
            vec![AngleName::ThetaA, AngleName::ThetaB],
            vec![(AngleName::ThetaAPrime, FRAC_PI_2), (AngleName::ThetaBPrime, FRAC_PI_2)],
        ),
        (Some(s), None) => {
            let f = complement(&s).into_iter().map(|n| (n, FRAC_PI_2)).collect();
            (s, f)
        }
        (None, Some(f)) => {
            let names: Vec<AngleName> = f.iter().map(|p| p.0).collect();
            (complement(&names), f)
        }
        (Some(s), Some(f)) => (s, f),
    };

    let mut all: Vec<AngleName> = sweep.iter().copied().chain(fixed.iter().map(|p| p.0)).collect();
    all.sort_by_key(|n| n.index());
    all.dedup();
    if sweep.len() != 2 || fixed.len() != 2 || all.len() != 4 {
        return Err(CliError::Usage(
            "--sweep and --fixed must name two angles each, together covering all four".into(),
        ));
    }
    Ok(((sweep[0], sweep[1]), [fixed[0], fixed[1]]))
}

fn cmd_surface(a: &SurfaceArgs) -> Result<(), CliError> {
    if a.resolution < 2 {
        return Err(CliError::Usage("--resolution must be at least 2".into()));
    }
    let (axes, fixed) = resolve_axes(a.sweep.as_deref(), a.fixed.as_deref())?;
    let game = resolve_game(&a.game)?;
    let grid = SurfaceGrid::compute(&game, a.player.into(), axes, fixed, a.resolution);
    let mut buf = Vec::new();
    grid.write_csv(&mut buf)
        .map_err(|e| CliError::Io(format!("encoding CSV: {e}")))?;
    emit(a.out.as_deref(), &String::from_utf8_lossy(&buf))
}

fn cmd_equilibria(a: &EquilibriaArgs) -> Result<(), CliError> {
    let game = resolve_game(&a.game)?;
    let report = find_nash_equilibria(&game, a.grid).map_err(|e| CliError::Usage(e.to_string()))?;
    emit(a.out.as_deref(), &report_to_toml(&report))
}

fn cmd_discord(a: &DiscordArgs) -> Result<(), CliError> {
    let spec = StateSpec::parse(&a.state)?;
    let family = spec.build()?;
    let opts = DiscordOptions {
        measured: a.orientation.subsystem(),
        azimuthal_scan: a.azimuthal,
    };
    let result = discord_with(&family.rho, &opts).map_err(|e| CliError::Usage(e.to_string()))?;
    emit(a.out.as_deref(), &discord_to_toml(&a.state, a.orientation.as_str(), &result))
}

/// One line of the verify suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn shipped_states() -> Vec<(String, DensityMatrix)> {
    let specs = [
        "werner:0",
        "werner:0.1",
        "werner:0.3333333333333333",
        "werner:0.5",
        "werner:1",
        "d1:0",
        "d1:pi/2",
        "d1:pi",
        "d2:0",
        "d2:pi/2",
        "d2:pi",
        "product:pi/3,3pi/4",
    ];
    specs
        .iter()
        .map(|s| {
            let rho = StateSpec::parse(s).and_then(|sp| sp.build()).expect("shipped spec").rho;
            (s.to_string(), rho)
        })
        .collect()
}

fn angle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

fn max_prob_error(rho: &DensityMatrix, n: usize, expected: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
    let grid = angle_grid(n);
    let mut worst = 0.0f64;
    for &ta in &grid {
        for &tb in &grid {
            for s in Outcome::BOTH {
                for sp in Outcome::BOTH {
                    let p = conditional_prob(rho, MeasurementAngle::wrapped(ta), MeasurementAngle::wrapped(tb), s, sp)
                        .unwrap_or(f64::NAN);
                    let err = (p - expected(ta, tb, s.sign(), sp.sign())).abs();
                    worst = if err.is_nan() { f64::INFINITY } else { worst.max(err) };
                }
            }
        }
    }
    worst
}

fn outcome(name: &'static str, worst: f64, what: &str) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= CHECK_TOL,
        detail: format!("{what}; max deviation {worst:.3e}"),
    }
}

/// The closed-form agreement suite. `extra` is an additional state: a label
/// and either its validated density matrix or the reason it failed validation.
pub fn run_checks(extra: Option<(String, Result<DensityMatrix, String>)>) -> Vec<CheckOutcome> {
    let mut states = shipped_states();
    let mut checks = Vec::new();

    let mut density = CheckOutcome {
        name: "density_matrix",
        passed: true,
        detail: format!("{} shipped states valid", states.len()),
    };
    for (label, rho) in &states {
        if let Err(e) = DensityMatrix::new(*rho.matrix()) {
            density.passed = false;
            density.detail = format!("{label}: {e}");
        }
    }
    if let Some((label, result)) = extra {
        match result {
            Ok(rho) => {
                density.detail.push_str(&format!(", plus {label}"));
                states.push((label, rho));
            }
            Err(reason) => {
                density.passed = false;
                density.detail = format!("{label}: {reason}");
            }
        }
    }
    checks.push(density);

    let w0 = states::werner(0.0).expect("werner(0)").rho;
    checks.push(outcome(
        "p_quarter",
        max_prob_error(&w0, 24, |_, _, _, _| 0.25),
        "werner(0): P = 1/4",
    ));
    let d2_0 = states::d2(0.0).expect("d2(0)").rho;
    checks.push(outcome(
        "cancel1",
        max_prob_error(&d2_0, 50, |_, tb, _, sp| 0.25 * (1.0 + sp * tb.cos())),
        "d2(0): P = (1 + σ′cos θβ)/4",
    ));
    let d2_pi = states::d2(PI).expect("d2(π)").rho;
    checks.push(outcome(
        "cancel2",
        max_prob_error(&d2_pi, 50, |ta, tb, s, sp| 0.25 * (1.0 + s * sp * ta.cos() * tb.cos())),
        "d2(π): P = (1 + σσ′cos θα cos θβ)/4",
    ));

    let grid = angle_grid(12);
    let mut worst = 0.0f64;
    for (_, rho) in &states {
        for &ta in &grid {
            for &tb in &grid {
                let total: f64 = Outcome::BOTH
                    .iter()
                    .flat_map(|&s| Outcome::BOTH.map(move |sp| (s, sp)))
                    .map(|(s, sp)| {
                        conditional_prob(rho, MeasurementAngle::wrapped(ta), MeasurementAngle::wrapped(tb), s, sp)
                            .unwrap_or(f64::NAN)
                    })
                    .sum();
                worst = worst.max((total - 1.0).abs()).max(if total.is_nan() { f64::INFINITY } else { 0.0 });
            }
        }
    }
    checks.push(outcome(
        "normalization",
        worst,
        &format!("Σ P = 1 over {} states", states.len()),
    ));

    let profiles: Vec<StrategyProfile> = {
        let g = angle_grid(5);
        let mut v = Vec::new();
        for &a in &g {
            for &ap in &g {
                for &b in &g {
                    for &bp in &g {
                        v.push(StrategyProfile::wrapped([a, ap, b, bp]));
                    }
                }
            }
        }
        v
    };
    let mut sum_worst = 0.0f64;
    let mut route_worst = 0.0f64;
    for tensor in [standard_payoffs(), biased_payoffs()] {
        let constant = tensor.cell_sum();
        for (_, rho) in &states {
            let game = GameInstance::new(tensor, Priors::uniform(), *rho).expect("two-qubit state");
            let surface = PayoffSurface::new(&game);
            for p in &profiles {
                let ua = expected_payoff(&game, p, Player::A).unwrap_or(f64::NAN);
                let ub = expected_payoff(&game, p, Player::B).unwrap_or(f64::NAN);
                let dev = (ua + ub - constant).abs();
                sum_worst = if dev.is_nan() { f64::INFINITY } else { sum_worst.max(dev) };
                let fast = surface.payoff(Player::A, &p.angles());
                route_worst = route_worst.max((fast - ua).abs());
            }
        }
    }
    checks.push(outcome(
        "constant_sum",
        sum_worst,
        "U_A + U_B = C for both payoff tables",
    ));
    checks.push(outcome(
        "surface_agreement",
        route_worst,
        "correlation route matches direct trace",
    ));

    let zero_states = [
        ("werner:0", w0),
        ("product:pi/3,3pi/4", states::product(PI / 3.0, 0.75 * PI).expect("product").rho),
    ];
    let mut worst = 0.0f64;
    for (_, rho) in &zero_states {
        worst = worst.max(discord(rho).map(|r| r.discord).unwrap_or(f64::INFINITY));
    }
    checks.push(CheckOutcome {
        name: "classical_discord",
        passed: worst <= 1e-8,
        detail: format!("discord of classical and product states; max {worst:.3e}"),
    });

    checks
}

fn load_extra(spec: &str) -> Result<(String, Result<DensityMatrix, String>), CliError> {
    let parsed = StateSpec::parse(spec)?;
    let result = match &parsed {
        StateSpec::Custom { path } => {
            let m = load_custom_matrix(path)?;
            DensityMatrix::new(m).map_err(|e| e.to_string())
        }
        other => other.build().map(|f| f.rho).map_err(|e| match e {
            StateError::Invalid(inner) => inner.to_string(),
            e => e.to_string(),
        }),
    };
    if let (Err(reason), false) = (&result, matches!(parsed, StateSpec::Custom { .. })) {
        return Err(CliError::Usage(reason.clone()));
    }
    Ok((spec.to_string(), result))
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let extra = a.state.as_deref().map(load_extra).transpose()?;
    let checks = run_checks(extra);
    let mut text = String::new();
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(text, "{tag} {}: {}", c.name, c.detail);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let _ = writeln!(text, "{}/{} checks passed", checks.len() - failed.len(), checks.len());
    emit(a.out.as_deref(), &text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
