//! Exemplar two-qubit states and the state-spec grammar used by the CLI,
//! config files and the C API.
//!
//! ```text
//! werner:<eta>            eta in [0, 1]
//! d1:<x> | d2:<x>         x in [0, 2π]; accepts `pi`, `pi/2`, `3pi/4`, ...
//! product:<ta>,<tb>       pure product of Bloch kets
//! custom:<path>           16 whitespace-separated `re+imj` entries, row-major
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::linalg::{tensor_product, ComplexMatrix, DensityMatrix, LinalgError, C64};

#[derive(Debug, Error)]
pub enum StateError {
    #[error("werner parameter eta={0} outside [0, 1]")]
    EtaOutOfRange(f64),
    #[error("state parameter x={0} outside [0, 2π]")]
    XOutOfRange(f64),
    #[error("malformed state spec `{0}`")]
    BadSpec(String),
    #[error("cannot parse angle `{0}`")]
    BadAngle(String),
    #[error("cannot parse complex entry `{0}`")]
    BadComplex(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no documented correlation regime for {0} states")]
    NoRegime(&'static str),
    #[error(transparent)]
    Invalid(#[from] LinalgError),
}

/// Parses a radian angle; accepts plain decimals and multiples/fractions of `pi`.
pub fn parse_angle(token: &str) -> Result<f64, StateError> {
    let t = token.trim();
    let bad = || StateError::BadAngle(token.to_string());
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    }
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, t),
    };
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (t, None),
    };
    let pos = num.find("pi").ok_or_else(bad)?;
    let coeff = num[..pos].trim().trim_end_matches('*').trim();
    if !num[pos + 2..].trim().is_empty() {
        return Err(bad());
    }
    let coeff = if coeff.is_empty() {
        1.0
    } else {
        coeff.parse::<f64>().map_err(|_| bad())?
    };
    let den = match den {
        Some(d) => d.parse::<f64>().map_err(|_| bad())?,
        None => 1.0,
    };
    if den == 0.0 {
        return Err(bad());
    }
    let v = coeff * PI / den;
    Ok(if neg { -v } else { v })
}

/// Parses `re+imj`, `re-imj`, `re`, `imj` (exponents allowed).
pub fn parse_complex(token: &str) -> Result<C64, StateError> {
    let bad = || StateError::BadComplex(token.to_string());
    let t = token.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['j', 'i']) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // the real/imag split is the last sign not following an exponent marker
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "+" | "" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

/// Reads 16 complex entries without checking density-matrix invariants.
pub fn load_custom_matrix(path: &Path) -> Result<ComplexMatrix, StateError> {
    let text = std::fs::read_to_string(path).map_err(|source| StateError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let entries = text
        .split_whitespace()
        .map(parse_complex)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ComplexMatrix::from_row_major(4, &entries)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Werner { eta: f64 },
    D1 { x: f64 },
    D2 { x: f64 },
    Product { theta_a: f64, theta_b: f64 },
    Custom { path: PathBuf },
}

impl StateSpec {
    pub fn parse(spec: &str) -> Result<Self, StateError> {
        let bad = || StateError::BadSpec(spec.to_string());
        let (kind, arg) = spec.trim().split_once(':').ok_or_else(bad)?;
        let arg = arg.trim();
        Ok(match kind.trim().to_ascii_lowercase().as_str() {
            "werner" => StateSpec::Werner {
                eta: arg.parse::<f64>().map_err(|_| bad())?,
            },
            "d1" => StateSpec::D1 { x: parse_angle(arg)? },
            "d2" => StateSpec::D2 { x: parse_angle(arg)? },
            "product" => {
                let (a, b) = arg.split_once(',').ok_or_else(bad)?;
                StateSpec::Product {
                    theta_a: parse_angle(a)?,
                    theta_b: parse_angle(b)?,
                }
            }
            "custom" if !arg.is_empty() => StateSpec::Custom {
                path: PathBuf::from(arg),
            },
            _ => return Err(bad()),
        })
    }

    pub fn build(&self) -> Result<StateFamily, StateError> {
        match self {
            StateSpec::Werner { eta } => werner(*eta),
            StateSpec::D1 { x } => d1(*x),
            StateSpec::D2 { x } => d2(*x),
            StateSpec::Product { theta_a, theta_b } => product(*theta_a, *theta_b),
            StateSpec::Custom { path } => custom(path),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            StateSpec::Werner { .. } => "werner",
            StateSpec::D1 { .. } => "d1",
            StateSpec::D2 { .. } => "d2",
            StateSpec::Product { .. } => "product",
            StateSpec::Custom { .. } => "custom",
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Werner { eta } => write!(f, "werner:{eta}"),
            StateSpec::D1 { x } => write!(f, "d1:{x}"),
            StateSpec::D2 { x } => write!(f, "d2:{x}"),
            StateSpec::Product { theta_a, theta_b } => write!(f, "product:{theta_a},{theta_b}"),
            StateSpec::Custom { path } => write!(f, "custom:{}", path.display()),
        }
    }
}

/// A named state together with its validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFamily {
    pub spec: StateSpec,
    pub rho: DensityMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Classical,
    DiscordedSeparable,
    Entangled,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Classical => "classical",
            Regime::DiscordedSeparable => "discorded_separable",
            Regime::Entangled => "entangled",
        })
    }
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// cos(x/2)|↑⟩ + sin(x/2)|↓⟩.
pub fn bloch_ket(x: f64) -> [C64; 2] {
    let (s, c) = (0.5 * x).sin_cos();
    [real(c), real(s)]
}

fn ket_projector(x: f64) -> ComplexMatrix {
    ComplexMatrix::outer(&bloch_ket(x)).expect("2-component ket")
}

fn check_x(x: f64) -> Result<(), StateError> {
    if x.is_finite() && (0.0..=TAU).contains(&x) {
        Ok(())
    } else {
        Err(StateError::XOutOfRange(x))
    }
}

/// (1 − η)𝟙/4 + η|ψ−⟩⟨ψ−| with |ψ−⟩ = (|↑↓⟩ − |↓↑⟩)/√2.
pub fn werner(eta: f64) -> Result<StateFamily, StateError> {
    if !(eta.is_finite() && (0.0..=1.0).contains(&eta)) {
        return Err(StateError::EtaOutOfRange(eta));
    }
    let singlet = ComplexMatrix::outer(&[
        real(0.0),
        real(FRAC_1_SQRT_2),
        real(-FRAC_1_SQRT_2),
        real(0.0),
    ])?;
    let m = ComplexMatrix::identity(4)?
        .scale_real((1.0 - eta) / 4.0)
        .add(&singlet.scale_real(eta))?;
    Ok(StateFamily {
        spec: StateSpec::Werner { eta },
        rho: DensityMatrix::new(m)?,
    })
}

/// ½[|↑↑⟩⟨↑↑| + |x⟩⟨x| ⊗ |x⟩⟨x|].
pub fn d1(x: f64) -> Result<StateFamily, StateError> {
    check_x(x)?;
    let up = ket_projector(0.0);
    let px = ket_projector(x);
    let m = tensor_product(&up, &up)?
        .add(&tensor_product(&px, &px)?)?
        .scale_real(0.5);
    Ok(StateFamily {
        spec: StateSpec::D1 { x },
        rho: DensityMatrix::new(m)?,
    })
}

/// ½[|↑↑⟩⟨↑↑| + |↓⟩⟨↓| ⊗ |x⟩⟨x|]; classical on A, quantum on B.
pub fn d2(x: f64) -> Result<StateFamily, StateError> {
    check_x(x)?;
    let up = ket_projector(0.0);
    let down = ket_projector(PI);
    let m = tensor_product(&up, &up)?
        .add(&tensor_product(&down, &ket_projector(x))?)?
        .scale_real(0.5);
    Ok(StateFamily {
        spec: StateSpec::D2 { x },
        rho: DensityMatrix::new(m)?,
    })
}

/// |θA⟩⟨θA| ⊗ |θB⟩⟨θB|.
pub fn product(theta_a: f64, theta_b: f64) -> Result<StateFamily, StateError> {
    if !theta_a.is_finite() || !theta_b.is_finite() {
        return Err(StateError::BadAngle(format!("{theta_a},{theta_b}")));
    }
    let m = tensor_product(&ket_projector(theta_a), &ket_projector(theta_b))?;
    Ok(StateFamily {
        spec: StateSpec::Product { theta_a, theta_b },
        rho: DensityMatrix::new(m)?,
    })
}

pub fn custom(path: &Path) -> Result<StateFamily, StateError> {
    let m = load_custom_matrix(path)?;
    Ok(StateFamily {
        spec: StateSpec::Custom {
            path: path.to_path_buf(),
        },
        rho: DensityMatrix::new(m)?,
    })
}

const REGIME_TOL: f64 = 1e-12;

/// Correlation regime by parameter range.
pub fn regime(family: &StateFamily) -> Result<Regime, StateError> {
    let near = |x: f64, target: f64| (x - target).abs() <= REGIME_TOL;
    match family.spec {
        StateSpec::Werner { eta } => Ok(if eta <= REGIME_TOL {
            Regime::Classical
        } else if eta <= 1.0 / 3.0 + REGIME_TOL {
            Regime::DiscordedSeparable
        } else {
            Regime::Entangled
        }),
        StateSpec::D1 { x } | StateSpec::D2 { x } => {
            Ok(if near(x, 0.0) || near(x, PI) || near(x, TAU) {
                Regime::Classical
            } else {
                Regime::DiscordedSeparable
            })
        }
        StateSpec::Product { .. } => Err(StateError::NoRegime("product")),
        StateSpec::Custom { .. } => Err(StateError::NoRegime("custom")),
    }
}
