use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::coherence::CoherencePathway;
use crate::error::{Error, Result};
use crate::pulseprog::Acquisition;
use crate::quadrupolar::{first_order_shift, second_order_shift};
use crate::spectrum::powder::PowderGrid;
use crate::spin::{SpinSystem, Transition, TransitionLabel};

/// Complex time-domain signal `s(t1, t2)`, row-major with one row per `t1`
/// increment.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram2D {
    pub(crate) data: Vec<Complex64>,
    pub(crate) td_f1: usize,
    pub(crate) td_f2: usize,
    pub(crate) dwell_f1: f64,
    pub(crate) dwell_f2: f64,
}

impl Interferogram2D {
    pub fn zeros(td_f1: usize, td_f2: usize, dwell_f1: f64, dwell_f2: f64) -> Self {
        Interferogram2D {
            data: vec![Complex64::new(0.0, 0.0); td_f1 * td_f2],
            td_f1,
            td_f2,
            dwell_f1,
            dwell_f2,
        }
    }

    /// Wraps row-major samples; `data.len()` must equal `td_f1 * td_f2`.
    pub fn from_samples(
        data: Vec<Complex64>,
        td_f1: usize,
        td_f2: usize,
        dwell_f1: f64,
        dwell_f2: f64,
    ) -> Result<Self> {
        if data.len() != td_f1 * td_f2 {
            return Err(Error::LengthMismatch {
                expected: td_f1 * td_f2,
                found: data.len(),
            });
        }
        Ok(Interferogram2D {
            data,
            td_f1,
            td_f2,
            dwell_f1,
            dwell_f2,
        })
    }

    pub fn for_acquisition(acq: &Acquisition) -> Self {
        Self::zeros(acq.td_f1, acq.td_f2, acq.dwell_f1(), acq.dwell_f2())
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn td_f1(&self) -> usize {
        self.td_f1
    }

    pub fn td_f2(&self) -> usize {
        self.td_f2
    }

    pub fn dwell_f1(&self) -> f64 {
        self.dwell_f1
    }

    pub fn dwell_f2(&self) -> f64 {
        self.dwell_f2
    }

    pub fn at(&self, t1: usize, t2: usize) -> Complex64 {
        self.data[t1 * self.td_f2 + t2]
    }

    /// Signal summed over `count` identical noiseless acquisitions.
    pub fn accumulated(&self, count: u64) -> Self {
        let k = count as f64;
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= k);
        out
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Total first- plus second-order shift of a transition, Hz.
pub fn transition_frequency(sys: &SpinSystem, t: &Transition, beta_r: f64, chi: f64) -> f64 {
    // Levels come from the system's own catalog, so these cannot fail.
    first_order_shift(sys, t.m, t.n, beta_r, chi).unwrap()
        + second_order_shift(sys, t.m, t.n, beta_r, chi).unwrap()
}

/// Powder-averaged `s(t1, t2) = sum_routes amp sum_beta w exp(-2 pi i nu_t1 t1)
/// exp(-2 pi i nu_CT t2)`, with `nu_t1` the shift of the route's `t1` branch.
///
/// Routes must already be gated by the phase cycle; zero-amplitude routes are
/// skipped. Accumulation runs route by route, orientation by orientation, so
/// repeated runs are bit-identical.
pub fn synthesize_interferogram(
    sys: &SpinSystem,
    acq: &Acquisition,
    routes: &[CoherencePathway],
    grid: &PowderGrid,
    chi: f64,
) -> Result<Interferogram2D> {
    let mut fid = Interferogram2D::for_acquisition(acq);
    let ct = Transition::canonical(sys.spin(), TransitionLabel::Central)?;
    let mut row1 = vec![Complex64::new(0.0, 0.0); fid.td_f1];
    let mut row2 = vec![Complex64::new(0.0, 0.0); fid.td_f2];
    for route in routes {
        let branch = route.t1_branch.unwrap_or(TransitionLabel::Central);
        let t1_transition = Transition::canonical(sys.spin(), branch)?;
        if route.amplitude == Complex64::new(0.0, 0.0) {
            continue;
        }
        for o in grid.orientations() {
            let nu1 = transition_frequency(sys, &t1_transition, o.beta_r, chi);
            let nu2 = transition_frequency(sys, &ct, o.beta_r, chi);
            fill_phasor(&mut row1, nu1, fid.dwell_f1);
            fill_phasor(&mut row2, nu2, fid.dwell_f2);
            let scale = route.amplitude * o.weight;
            for (k, &e1) in row1.iter().enumerate() {
                let a = scale * e1;
                let row = &mut fid.data[k * fid.td_f2..(k + 1) * fid.td_f2];
                for (z, &e2) in row.iter_mut().zip(&row2) {
                    *z += a * e2;
                }
            }
        }
    }
    Ok(fid)
}

fn fill_phasor(out: &mut [Complex64], nu: f64, dwell: f64) {
    for (j, z) in out.iter_mut().enumerate() {
        *z = Complex64::from_polar(1.0, -TAU * nu * dwell * j as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::powder::powder_orientations;
    use crate::spin::Spin;
    use std::num::NonZeroUsize;

    fn acq(td_f1: usize, td_f2: usize) -> Acquisition {
        Acquisition {
            sw_f2_hz: 100e3,
            sw_f1_hz: 10e3,
            td_f2,
            td_f1,
            ref_hz: 81.312792e6,
            spin_rate_hz: 10e3,
        }
    }

    fn route(branch: TransitionLabel, amp: f64) -> CoherencePathway {
        CoherencePathway {
            dp: vec![1, -1, 0, 0, -1],
            t1_branch: Some(branch),
            amplitude: amp.into(),
        }
    }

    fn sys(nuq: f64) -> SpinSystem {
        SpinSystem::new(Spin::from_twice(5).unwrap(), 81.312792e6, nuq).unwrap()
    }

    fn grid(n: usize) -> PowderGrid {
        powder_orientations(NonZeroUsize::new(n).unwrap())
    }

    #[test]
    fn no_routes_gives_zeros() {
        let fid = synthesize_interferogram(&sys(1e6), &acq(8, 16), &[], &grid(8), 0.9553).unwrap();
        assert!(fid.data().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn zero_coupling_is_constant() {
        let fid = synthesize_interferogram(
            &sys(0.0),
            &acq(8, 16),
            &[route(TransitionLabel::Central, 1.0)],
            &grid(16),
            0.9553,
        )
        .unwrap();
        for z in fid.data() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn doubling_amplitudes_doubles_samples_exactly() {
        let s = sys(1e6);
        let a = acq(8, 32);
        let g = grid(32);
        let one = synthesize_interferogram(
            &s,
            &a,
            &[
                route(TransitionLabel::Satellite(1), 0.5),
                route(TransitionLabel::Central, 0.1),
            ],
            &g,
            0.9553,
        )
        .unwrap();
        let two = synthesize_interferogram(
            &s,
            &a,
            &[
                route(TransitionLabel::Satellite(1), 1.0),
                route(TransitionLabel::Central, 0.2),
            ],
            &g,
            0.9553,
        )
        .unwrap();
        for (x, y) in one.data().iter().zip(two.data()) {
            assert_eq!(*x * 2.0, *y);
        }
    }

    #[test]
    fn unknown_branch_is_an_error() {
        let err = synthesize_interferogram(
            &sys(1e6),
            &acq(4, 4),
            &[route(TransitionLabel::Satellite(3), 1.0)],
            &grid(4),
            0.9553,
        );
        assert!(matches!(err, Err(Error::UnknownTransition { .. })));
    }

    #[test]
    fn masked_route_matches_omitted_route_bitwise() {
        let s = sys(1e6);
        let a = acq(8, 16);
        let g = grid(16);
        let kept = [route(TransitionLabel::Satellite(1), 1.0)];
        let masked = [
            route(TransitionLabel::Satellite(1), 1.0),
            route(TransitionLabel::Central, 0.0),
        ];
        let x = synthesize_interferogram(&s, &a, &kept, &g, 0.9553).unwrap();
        let y = synthesize_interferogram(&s, &a, &masked, &g, 0.9553).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn accumulation_scales_exactly() {
        let fid = synthesize_interferogram(
            &sys(1e6),
            &acq(4, 8),
            &[route(TransitionLabel::Satellite(1), 1.0)],
            &grid(8),
            0.9553,
        )
        .unwrap();
        let acc = fid.accumulated(64);
        for (x, y) in fid.data().iter().zip(acc.data()) {
            assert_eq!(*x * 64.0, *y);
        }
    }
}
