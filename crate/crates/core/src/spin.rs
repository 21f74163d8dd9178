//! Quadrupolar spin systems: levels, single-quantum transitions, thermal
//! populations and the phase a coherence picks up under a z-rotation.
//!
//! Spin quantum numbers and level z-components are stored doubled so that
//! half-integer values stay exact.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Planck constant, J s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Total nuclear spin `S`, held as the integer `2S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    /// Any spin with `S >= 1`.
    pub fn from_twice(twice: u32) -> Result<Self> {
        let spin = Spin { twice };
        if twice < 2 {
            return Err(Error::UnsupportedSpin(spin));
        }
        Ok(spin)
    }

    /// Half-integer spin with `S >= 3/2`, the satellite-transition regime.
    pub fn half_integer(twice: u32) -> Result<Self> {
        let spin = Self::from_twice(twice)?;
        if !spin.is_half_integer() {
            return Err(Error::NotHalfInteger(spin));
        }
        Ok(spin)
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub fn is_half_integer(self) -> bool {
        self.twice % 2 == 1
    }

    /// Largest coherence order the system supports, `2S`.
    pub fn max_order(self) -> i32 {
        self.twice as i32
    }

    /// `{-S, -S+1, ..., +S}` in ascending order.
    pub fn levels(self) -> Vec<Level> {
        let s = self.twice as i32;
        (0..=s).map(|k| Level::from_twice(-s + 2 * k)).collect()
    }

    pub fn contains(self, level: Level) -> bool {
        let s = self.twice as i32;
        level.twice.abs() <= s && (level.twice - s) % 2 == 0
    }

    pub(crate) fn check_level(self, level: Level) -> Result<()> {
        if self.contains(level) {
            Ok(())
        } else {
            Err(Error::LevelOutOfRange { level, spin: self })
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseSpinError(pub String);

impl fmt::Display for ParseSpinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse spin from {:?}; expected e.g. 5/2", self.0)
    }
}

impl std::error::Error for ParseSpinError {}

impl FromStr for Spin {
    type Err = ParseSpinError;

    /// Accepts `p/2` or a bare integer. Range checks are left to the
    /// constructors so callers can report them separately.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let err = || ParseSpinError(s.to_string());
        let s = s.trim();
        let twice = match s.split_once('/') {
            Some((num, den)) => {
                if den.trim() != "2" {
                    return Err(err());
                }
                num.trim().parse::<u32>().map_err(|_| err())?
            }
            None => s
                .parse::<u32>()
                .map_err(|_| err())?
                .checked_mul(2)
                .ok_or_else(err)?,
        };
        Ok(Spin { twice })
    }
}

/// Magnetic quantum number `m` of a Zeeman level, held as `2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    twice: i32,
}

impl Level {
    pub const fn from_twice(twice: i32) -> Self {
        Level { twice }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Coherence order `p = m - n` of the density-matrix element `|m><n|`.
pub fn coherence_order(m: Level, n: Level) -> i32 {
    (m.twice - n.twice) / 2
}

/// Phase acquired by an order-`p` coherence under a z-rotation by `phi`:
/// `exp(-i p phi)`.
pub fn z_rotation_phase_factor(order: i32, phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, -f64::from(order) * phi)
}

/// Single-quantum transition name: `CT` for `+1/2 <-> -1/2`, `STk` for the
/// k-th satellite pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionLabel {
    Central,
    Satellite(u32),
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Central => write!(f, "CT"),
            TransitionLabel::Satellite(k) => write!(f, "ST{k}"),
        }
    }
}

impl FromStr for TransitionLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "CT" {
            return Ok(TransitionLabel::Central);
        }
        s.strip_prefix("ST")
            .and_then(|k| k.parse::<u32>().ok())
            .filter(|&k| k >= 1 && !s[2..].starts_with('+'))
            .map(TransitionLabel::Satellite)
            .ok_or_else(|| format!("unknown transition label {s:?}; expected CT or STk"))
    }
}

/// A single-quantum transition between adjacent levels, `m = n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    pub m: Level,
    pub n: Level,
    pub label: TransitionLabel,
}

impl Transition {
    /// Label of the adjacent pair `(n + 1, n)`.
    fn for_lower(n: Level) -> Transition {
        let m = Level::from_twice(n.twice + 2);
        let outer = m.twice.abs().max(n.twice.abs());
        let label = if outer == 1 {
            TransitionLabel::Central
        } else if outer % 2 == 1 {
            TransitionLabel::Satellite(((outer - 1) / 2) as u32)
        } else {
            // Integer spins have no central transition; the pair touching
            // |m| = k is numbered k.
            TransitionLabel::Satellite((outer / 2) as u32)
        };
        Transition { m, n, label }
    }

    /// The member of a labelled pair with `m > 0` (for the CT, `(+1/2, -1/2)`).
    /// Both members share every even-in-swap quantity used here.
    pub fn canonical(spin: Spin, label: TransitionLabel) -> Result<Transition> {
        transitions(spin)
            .into_iter()
            .find(|t| t.label == label && t.m.twice > 0)
            .ok_or_else(|| Error::UnknownTransition {
                label: label.to_string(),
                spin,
            })
    }

    pub fn coherence_order(&self) -> i32 {
        coherence_order(self.m, self.n)
    }
}

/// All `2S` single-quantum transitions, CT first, then each satellite pair
/// with the positive member leading.
pub fn transitions(spin: Spin) -> Vec<Transition> {
    let levels = spin.levels();
    let mut out: Vec<Transition> = levels[..levels.len() - 1]
        .iter()
        .map(|&n| Transition::for_lower(n))
        .collect();
    out.sort_by_key(|t| (t.label, std::cmp::Reverse(t.m.twice)));
    out
}

/// Quadrupolar spin system with axially symmetric field gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSystem {
    spin: Spin,
    larmor_hz: f64,
    nuq_hz: f64,
}

impl SpinSystem {
    pub fn new(spin: Spin, larmor_hz: f64, nuq_hz: f64) -> Result<Self> {
        Spin::from_twice(spin.twice)?;
        if !(larmor_hz.is_finite() && larmor_hz > 0.0) {
            return Err(Error::OutOfRange {
                name: "Larmor frequency",
                requirement: "finite and > 0 Hz",
                value: larmor_hz,
            });
        }
        if !(nuq_hz.is_finite() && nuq_hz >= 0.0) {
            return Err(Error::OutOfRange {
                name: "quadrupolar frequency",
                requirement: "finite and >= 0 Hz",
                value: nuq_hz,
            });
        }
        Ok(SpinSystem {
            spin,
            larmor_hz,
            nuq_hz,
        })
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn larmor_hz(&self) -> f64 {
        self.larmor_hz
    }

    pub fn nuq_hz(&self) -> f64 {
        self.nuq_hz
    }

    /// Asymmetry parameter; always zero.
    pub fn eta(&self) -> f64 {
        0.0
    }

    pub fn levels(&self) -> Vec<Level> {
        self.spin.levels()
    }

    pub fn transitions(&self) -> Vec<Transition> {
        transitions(self.spin)
    }

    /// Thermal populations over Zeeman energies `E_m = -m h nu0`.
    pub fn boltzmann_populations(&self, temperature_k: f64) -> Result<PopulationVector> {
        if !(temperature_k.is_finite() && temperature_k > 0.0) {
            return Err(Error::OutOfRange {
                name: "temperature",
                requirement: "finite and > 0 K",
                value: temperature_k,
            });
        }
        let levels = self.levels();
        let x = PLANCK * self.larmor_hz / (BOLTZMANN * temperature_k);
        // Shift exponents by the largest one; normalization removes it.
        let top = self.spin.value() * x;
        let unnorm: Vec<f64> = levels.iter().map(|m| (m.value() * x - top).exp()).collect();
        let total: f64 = unnorm.iter().sum();
        Ok(PopulationVector {
            levels,
            populations: unnorm.into_iter().map(|p| p / total).collect(),
        })
    }
}

/// Occupation probabilities, one per level in ascending `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector {
    levels: Vec<Level>,
    populations: Vec<f64>,
}

impl PopulationVector {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.populations
    }

    pub fn get(&self, level: Level) -> Option<f64> {
        self.levels
            .iter()
            .position(|&l| l == level)
            .map(|i| self.populations[i])
    }
}
