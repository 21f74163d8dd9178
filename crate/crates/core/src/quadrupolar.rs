//! First- and second-order quadrupolar shifts of a transition `m <-> n` for an
//! axially symmetric gradient, and the exact rank-4 broadening ratios that
//! set ridge slopes in satellite/multiple-quantum 2D spectra.
//!
//! Floating-point evaluation follows the printed perturbation formulas term by
//! term. The rank coefficients are also available as exact rationals: with
//! `m = a/2` and `S = s/2`, each bracket is an integer over 8.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::rotations::{d2_00, d4_00};
use crate::spin::{Level, Spin, SpinSystem, Transition};

/// First-order shift `nuQ (m^2 - n^2)/4 (3 cos^2 betaR - 1) d2_00(chi)`, Hz.
pub fn first_order_shift(
    sys: &SpinSystem,
    m: Level,
    n: Level,
    beta_r: f64,
    chi: f64,
) -> Result<f64> {
    sys.spin().check_level(m)?;
    sys.spin().check_level(n)?;
    let (mv, nv) = (m.value(), n.value());
    let orient = 3.0 * beta_r.cos().powi(2) - 1.0;
    Ok(sys.nuq_hz() * (mv * mv - nv * nv) / 4.0 * orient * d2_00(chi))
}

/// Integer weights of the rank-0, rank-2 and rank-4 brackets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BracketWeights {
    pub rank0: f64,
    pub rank2: f64,
    pub rank4: f64,
}

pub(crate) const PRINTED_WEIGHTS: BracketWeights = BracketWeights {
    rank0: -168.0,
    rank2: -60.0,
    rank4: 36.0,
};

/// Common prefactor of the second-order term, `nuQ^2 / (5040 nu0)`, Hz.
pub fn second_order_prefactor(sys: &SpinSystem) -> f64 {
    sys.nuq_hz() * sys.nuq_hz() / (5040.0 * sys.larmor_hz())
}

/// Second-order shift of `m <-> n` for PAS-to-rotor angle `beta_r` and
/// rotor-to-field angle `chi`, Hz.
pub fn second_order_shift(
    sys: &SpinSystem,
    m: Level,
    n: Level,
    beta_r: f64,
    chi: f64,
) -> Result<f64> {
    second_order_shift_weighted(sys, m, n, beta_r, chi, PRINTED_WEIGHTS)
}

pub(crate) fn second_order_shift_weighted(
    sys: &SpinSystem,
    m: Level,
    n: Level,
    beta_r: f64,
    chi: f64,
    w: BracketWeights,
) -> Result<f64> {
    let spin = sys.spin();
    spin.check_level(m)?;
    spin.check_level(n)?;
    let ss = spin.value() * (spin.value() + 1.0);
    let (m, n) = (m.value(), n.value());
    let rank0 = m * (ss - 3.0 * m * m) - n * (ss - 3.0 * n * n);
    let rank2 = m * (8.0 * ss - 12.0 * m * m - 3.0) - n * (8.0 * ss - 12.0 * n * n - 3.0);
    let rank4 = m * (18.0 * ss - 34.0 * m * m - 5.0) - n * (18.0 * ss - 34.0 * n * n - 5.0);
    Ok(second_order_prefactor(sys)
        * (w.rank0 * rank0
            + w.rank2 * rank2 * d2_00(chi) * d2_00(beta_r)
            + w.rank4 * rank4 * d4_00(chi) * d4_00(beta_r)))
}

/// Exact bracket values for one level, scaled by 8.
fn brackets_x8(spin: Spin, level: Level) -> [i64; 3] {
    let s = i64::from(spin.twice());
    let ss4 = s * (s + 2); // 4 S(S+1)
    let a = i64::from(level.twice());
    [
        a * (ss4 - 3 * a * a),
        4 * a * (2 * ss4 - 3 * a * a - 3),
        a * (18 * ss4 - 34 * a * a - 20),
    ]
}

fn weighted_difference(spin: Spin, m: Level, n: Level) -> Result<[Rational64; 3]> {
    spin.check_level(m)?;
    spin.check_level(n)?;
    let bm = brackets_x8(spin, m);
    let bn = brackets_x8(spin, n);
    let weights = [-168i64, -60, 36];
    Ok([0, 1, 2].map(|k| Rational64::new(weights[k] * (bm[k] - bn[k]), 8)))
}

/// Rank-4 coefficient `36 [f(m) - f(n)]` with `f(x) = x(18S(S+1) - 34x^2 - 5)`,
/// in units of `nuQ^2 / (5040 nu0)`.
pub fn rank4_coefficient(spin: Spin, m: Level, n: Level) -> Result<Rational64> {
    Ok(weighted_difference(spin, m, n)?[2])
}

/// Second-order shift split by rank: `rank0 + rank2 d2(chi) d2(betaR) +
/// rank4 d4(chi) d4(betaR)`, all in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderDecomposition {
    pub rank0: f64,
    pub rank2: f64,
    pub rank4: f64,
}

impl SecondOrderDecomposition {
    pub fn new(sys: &SpinSystem, m: Level, n: Level) -> Result<Self> {
        let [r0, r2, r4] = weighted_difference(sys.spin(), m, n)?;
        let pref = second_order_prefactor(sys);
        let hz = |r: Rational64| pref * (*r.numer() as f64) / (*r.denom() as f64);
        Ok(SecondOrderDecomposition {
            rank0: hz(r0),
            rank2: hz(r2),
            rank4: hz(r4),
        })
    }

    pub fn evaluate(&self, beta_r: f64, chi: f64) -> f64 {
        self.rank0
            + self.rank2 * d2_00(chi) * d2_00(beta_r)
            + self.rank4 * d4_00(chi) * d4_00(beta_r)
    }
}

/// Exact rational ridge slope, always in lowest terms with a positive
/// denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BroadeningRatio(Rational64);

impl BroadeningRatio {
    pub const ZERO: BroadeningRatio = BroadeningRatio(Rational64::new_raw(0, 1));

    pub fn new(numerator: i64, denominator: i64) -> Option<Self> {
        (denominator != 0).then(|| BroadeningRatio(Rational64::new(numerator, denominator)))
    }

    pub fn numerator(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }

    pub fn as_rational(&self) -> Rational64 {
        self.0
    }
}

impl std::ops::Neg for BroadeningRatio {
    type Output = BroadeningRatio;

    fn neg(self) -> Self::Output {
        BroadeningRatio(-self.0)
    }
}

impl fmt::Display for BroadeningRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator() == 1 {
            write!(f, "{}", self.numerator())
        } else {
            write!(f, "{}/{}", self.numerator(), self.denominator())
        }
    }
}

impl FromStr for BroadeningRatio {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let bad = || format!("invalid ratio {s:?}; expected p/q or an integer");
        let (num, den) = match s.trim().split_once('/') {
            Some((p, q)) => (
                p.trim().parse::<i64>().map_err(|_| bad())?,
                q.trim().parse::<i64>().map_err(|_| bad())?,
            ),
            None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
        };
        BroadeningRatio::new(num, den).ok_or_else(bad)
    }
}

/// `R = rank4(t1) / rank4(t2)`, computed in integer arithmetic.
pub fn broadening_ratio(spin: Spin, t1: &Transition, t2: &Transition) -> Result<BroadeningRatio> {
    let num = rank4_coefficient(spin, t1.m, t1.n)?;
    let den = rank4_coefficient(spin, t2.m, t2.n)?;
    if *den.numer() == 0 {
        return Err(Error::ZeroRank4Coefficient(t2.label.to_string()));
    }
    Ok(BroadeningRatio(num / den))
}
