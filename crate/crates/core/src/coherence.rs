//! Phase-cycle selection of coherence transfer pathways.
//!
//! Pulse `i` is stepped through `N_i` uniform phases `2 pi k / N_i` and the
//! receiver follows `phi_R = -sum(dp_i phi_i)` for the desired pathway. A
//! pathway then survives the summed cycle exactly when every `dp_i` is
//! congruent to the desired change modulo `N_i`; everything else cancels.
//! Survival is decided in integer arithmetic.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spin::{Spin, TransitionLabel};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PulseSpec {
    pub id: String,
    pub n_phases: u32,
    pub dp_desired: i32,
    /// The pulse cannot change coherence order at all (`dp = 0` on every
    /// pathway), independent of its phase cycle.
    pub holds_order: bool,
}

impl PulseSpec {
    pub fn new(id: impl Into<String>, n_phases: u32, dp_desired: i32) -> Self {
        PulseSpec {
            id: id.into(),
            n_phases,
            dp_desired,
            holds_order: false,
        }
    }

    pub fn holding_order(mut self) -> Self {
        self.holds_order = true;
        self
    }

    /// Phase of step `k`, radians.
    pub fn phase(&self, k: u32) -> f64 {
        TAU * f64::from(k % self.n_phases) / f64::from(self.n_phases)
    }

    /// Whether the phase cycle of this pulse passes a change `dp`.
    pub fn admits(&self, dp: i32) -> bool {
        if self.holds_order && dp != 0 {
            return false;
        }
        (dp - self.dp_desired).rem_euclid(self.n_phases as i32) == 0
    }
}

/// Ordered pulses of one phase cycle plus the coherence order detected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleSpec {
    pulses: Vec<PulseSpec>,
    acquisition_order: i32,
}

impl CycleSpec {
    pub fn new(pulses: Vec<PulseSpec>, acquisition_order: i32) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::InvalidCycle(
                "a cycle needs at least one pulse".into(),
            ));
        }
        if let Some(p) = pulses.iter().find(|p| p.n_phases == 0) {
            return Err(Error::InvalidCycle(format!(
                "pulse {} has zero phases",
                p.id
            )));
        }
        if let Some(p) = pulses.iter().find(|p| p.holds_order && p.dp_desired != 0) {
            return Err(Error::InvalidCycle(format!(
                "pulse {} holds the coherence order but desires dp={}",
                p.id, p.dp_desired
            )));
        }
        Ok(CycleSpec {
            pulses,
            acquisition_order,
        })
    }

    pub fn pulses(&self) -> &[PulseSpec] {
        &self.pulses
    }

    pub fn acquisition_order(&self) -> i32 {
        self.acquisition_order
    }

    pub fn desired_dp(&self) -> Vec<i32> {
        self.pulses.iter().map(|p| p.dp_desired).collect()
    }

    pub fn with_phase_count(mut self, pulse: usize, n_phases: u32) -> Self {
        self.pulses[pulse].n_phases = n_phases;
        self
    }
}

/// A coherence transfer pathway: one order change per pulse, the transition
/// that evolves during `t1`, and the weight the pathway carries.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherencePathway {
    pub dp: Vec<i32>,
    pub t1_branch: Option<TransitionLabel>,
    pub amplitude: Complex64,
}

impl CoherencePathway {
    pub fn unit(dp: Vec<i32>) -> Self {
        CoherencePathway {
            dp,
            t1_branch: None,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    /// Coherence order after each pulse, starting from 0.
    pub fn orders(&self) -> Vec<i32> {
        self.dp
            .iter()
            .scan(0, |p, &d| {
                *p += d;
                Some(*p)
            })
            .collect()
    }
}

/// `{dp : dp == desired (mod N)}` within `[p_min, p_max]`, ascending.
pub fn selected_order_set(dp_desired: i32, n_phases: u32, bounds: (i32, i32)) -> Vec<i32> {
    let (lo, hi) = bounds;
    if n_phases == 0 || lo > hi {
        return Vec::new();
    }
    let n = n_phases as i32;
    let first = lo + (dp_desired - lo).rem_euclid(n);
    (first..=hi).step_by(n as usize).collect()
}

/// Receiver phase `-sum(dp_i phi_i)` reduced to `[0, 2 pi)`.
pub fn receiver_phase(dp: &[i32], phases: &[f64]) -> Result<f64> {
    if dp.len() != phases.len() {
        return Err(Error::LengthMismatch {
            expected: dp.len(),
            found: phases.len(),
        });
    }
    let total: f64 = dp
        .iter()
        .zip(phases)
        .map(|(&d, &phi)| f64::from(d) * phi)
        .sum();
    let r = (-total).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    Ok(if r >= TAU { 0.0 } else { r })
}

/// Whether `dp` passes every pulse's phase cycle.
pub fn survives(dp: &[i32], cycle: &CycleSpec) -> Result<bool> {
    if dp.len() != cycle.pulses.len() {
        return Err(Error::LengthMismatch {
            expected: cycle.pulses.len(),
            found: dp.len(),
        });
    }
    Ok(cycle
        .pulses
        .iter()
        .zip(dp)
        .all(|(p, &d)| (d - p.dp_desired).rem_euclid(p.n_phases as i32) == 0))
}

/// Normalized magnitude of the pathway's summed contribution over the full
/// cycle with receiver phase following the desired pathway: 1 or 0.
pub fn pathway_survival(pathway: &CoherencePathway, cycle: &CycleSpec) -> Result<f64> {
    Ok(if survives(&pathway.dp, cycle)? {
        1.0
    } else {
        0.0
    })
}

/// `prod N_i`.
pub fn acquisitions_per_cycle(cycle: &CycleSpec) -> u64 {
    cycle.pulses.iter().map(|p| u64::from(p.n_phases)).product()
}

/// Every pathway from order 0 to the acquisition order that the cycle
/// admits, with `|p| <= 2S` after every pulse. Lexicographic order of `dp`.
pub fn enumerate_surviving_pathways(cycle: &CycleSpec, spin: Spin) -> Vec<CoherencePathway> {
    enumerate_with_bound(cycle, spin.max_order())
}

/// As [`enumerate_surviving_pathways`] with an explicit order bound.
pub fn enumerate_with_bound(cycle: &CycleSpec, max_order: i32) -> Vec<CoherencePathway> {
    let mut out = Vec::new();
    if max_order < 0 || cycle.acquisition_order.abs() > max_order {
        return out;
    }
    let mut dp = Vec::with_capacity(cycle.pulses.len());
    extend(cycle, max_order, 0, &mut dp, &mut out);
    out
}

fn extend(
    cycle: &CycleSpec,
    max_order: i32,
    order: i32,
    dp: &mut Vec<i32>,
    out: &mut Vec<CoherencePathway>,
) {
    let idx = dp.len();
    if idx == cycle.pulses.len() {
        if order == cycle.acquisition_order {
            out.push(CoherencePathway::unit(dp.clone()));
        }
        return;
    }
    let pulse = &cycle.pulses[idx];
    let candidates = if pulse.holds_order {
        if pulse.admits(0) {
            vec![0]
        } else {
            vec![]
        }
    } else {
        selected_order_set(
            pulse.dp_desired,
            pulse.n_phases,
            (-max_order - order, max_order - order),
        )
    };
    let last = idx + 1 == cycle.pulses.len();
    for d in candidates {
        if last && order + d != cycle.acquisition_order {
            continue;
        }
        dp.push(d);
        extend(cycle, max_order, order + d, dp, out);
        dp.pop();
    }
}
