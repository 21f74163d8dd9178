//! Apodization, 2D transform and shearing.
//!
//! Signals evolve as `exp(-2 pi i nu t)`, so transforms use the
//! `exp(+2 pi i f t)` kernel and a component at `nu` lands at `+nu`. Each
//! dimension is scaled by `1/sqrt(N)`, which makes the transform unitary.
//! Zero frequency sits at index `N/2` (rounded down) after centering.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::quadrupolar::BroadeningRatio;
use crate::spectrum::synth::Interferogram2D;

/// How complex spectral points become the real values that are displayed
/// and measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisplayMode {
    #[default]
    Magnitude,
    /// Real part; the absorption lineshape for signals with zero phase.
    Absorption,
}

impl DisplayMode {
    fn apply(self, z: Complex64) -> f64 {
        match self {
            DisplayMode::Magnitude => z.norm(),
            DisplayMode::Absorption => z.re,
        }
    }
}

/// Centered frequency axis for `n` points at spectral width `sw`, Hz.
pub fn frequency_axis(n: usize, sw: f64) -> Vec<f64> {
    let half = (n / 2) as f64;
    (0..n).map(|k| (k as f64 - half) * sw / n as f64).collect()
}

/// Exponential line broadening: decay `exp(-pi lb t)` gives a Lorentzian
/// of `lb` Hz full width.
pub fn apodization(n: usize, dwell: f64, lb_hz: f64) -> Vec<f64> {
    (0..n)
        .map(|k| (-PI * lb_hz * dwell * k as f64).exp())
        .collect()
}

/// In-place unitary transform of a strided lane, then centered.
struct Transformer {
    planner: FftPlanner<f64>,
}

impl Transformer {
    fn new() -> Self {
        Transformer {
            planner: FftPlanner::new(),
        }
    }

    fn lane(&mut self, buf: &mut [Complex64]) {
        let n = buf.len();
        let fft = self.planner.plan_fft(n, FftDirection::Inverse);
        fft.process(buf);
        let scale = 1.0 / (n as f64).sqrt();
        buf.iter_mut().for_each(|z| *z *= scale);
        buf.rotate_left(n - n / 2);
    }
}

/// Spectrum after the `t2` transform only: rows are `t1` increments,
/// columns are `F2` frequencies. Shearing happens here.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedDomain2D {
    data: Vec<Complex64>,
    td_f1: usize,
    n_f2: usize,
    dwell_f1: f64,
    f2_axis: Vec<f64>,
    lb_f1: f64,
}

impl MixedDomain2D {
    /// Apodizes both dimensions and transforms along `t2`.
    pub fn from_interferogram(fid: &Interferogram2D, lb_f2: f64, lb_f1: f64) -> Self {
        let (n1, n2) = (fid.td_f1(), fid.td_f2());
        let w2 = apodization(n2, fid.dwell_f2(), lb_f2);
        let mut data = fid.data().to_vec();
        let mut tf = Transformer::new();
        for row in data.chunks_mut(n2) {
            row.iter_mut().zip(&w2).for_each(|(z, &w)| *z *= w);
            tf.lane(row);
        }
        MixedDomain2D {
            data,
            td_f1: n1,
            n_f2: n2,
            dwell_f1: fid.dwell_f1(),
            f2_axis: frequency_axis(n2, 1.0 / fid.dwell_f2()),
            lb_f1,
        }
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn f2_axis(&self) -> &[f64] {
        &self.f2_axis
    }

    /// Multiplies each `(t1, f2)` sample by `exp(+2 pi i R f2 t1)`: a ridge
    /// `F1 = R F2 + c` becomes the line `F1 = c`.
    pub fn shear(&self, ratio: BroadeningRatio) -> Self {
        let r = ratio.to_f64();
        let mut out = self.clone();
        for (k, row) in out.data.chunks_mut(self.n_f2).enumerate() {
            let t1 = k as f64 * self.dwell_f1;
            for (z, &f2) in row.iter_mut().zip(&self.f2_axis) {
                *z *= Complex64::from_polar(1.0, TAU * r * f2 * t1);
            }
        }
        out
    }

    /// Apodizes and transforms along `t1`, keeping complex points.
    pub fn to_complex_spectrum(&self) -> (Vec<Complex64>, Vec<f64>) {
        let (n1, n2) = (self.td_f1, self.n_f2);
        let w1 = apodization(n1, self.dwell_f1, self.lb_f1);
        let mut out = self.data.clone();
        let mut lane = vec![Complex64::new(0.0, 0.0); n1];
        let mut tf = Transformer::new();
        for j in 0..n2 {
            for k in 0..n1 {
                lane[k] = out[k * n2 + j] * w1[k];
            }
            tf.lane(&mut lane);
            for k in 0..n1 {
                out[k * n2 + j] = lane[k];
            }
        }
        (out, frequency_axis(n1, 1.0 / self.dwell_f1))
    }

    pub fn to_spectrum(&self, mode: DisplayMode, ref_freq: f64) -> Spectrum2D {
        let (complex, f1_axis) = self.to_complex_spectrum();
        Spectrum2D {
            data: complex.into_iter().map(|z| mode.apply(z)).collect(),
            f1_axis,
            f2_axis: self.f2_axis.clone(),
            ref_freq,
        }
    }
}

/// Real 2D spectrum, rows along `F1`, columns along `F2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    pub(crate) data: Vec<f64>,
    pub(crate) f1_axis: Vec<f64>,
    pub(crate) f2_axis: Vec<f64>,
    pub(crate) ref_freq: f64,
}

impl Spectrum2D {
    pub fn from_grid(data: Vec<f64>, f1_axis: Vec<f64>, f2_axis: Vec<f64>, ref_freq: f64) -> Self {
        assert_eq!(data.len(), f1_axis.len() * f2_axis.len());
        Spectrum2D {
            data,
            f1_axis,
            f2_axis,
            ref_freq,
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn f1_axis(&self) -> &[f64] {
        &self.f1_axis
    }

    pub fn f2_axis(&self) -> &[f64] {
        &self.f2_axis
    }

    pub fn ref_freq(&self) -> f64 {
        self.ref_freq
    }

    pub fn n_f1(&self) -> usize {
        self.f1_axis.len()
    }

    pub fn n_f2(&self) -> usize {
        self.f2_axis.len()
    }

    pub fn at(&self, f1: usize, f2: usize) -> f64 {
        self.data[f1 * self.n_f2() + f2]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n_f2())
    }

    /// Bin index closest to `hz` on the F1 axis, wrapping aliased values.
    pub fn f1_bin(&self, hz: f64) -> usize {
        nearest_bin(&self.f1_axis, hz)
    }

    pub fn f2_bin(&self, hz: f64) -> usize {
        nearest_bin(&self.f2_axis, hz)
    }
}

fn nearest_bin(axis: &[f64], hz: f64) -> usize {
    let n = axis.len() as f64;
    let width = axis.get(1).map_or(1.0, |x| x - axis[0]);
    let k = ((hz - axis[0]) / width).round().rem_euclid(n);
    k as usize
}

pub fn ppm(hz: f64, ref_freq: f64) -> f64 {
    hz / ref_freq * 1e6
}

/// Magnitude spectrum of an interferogram with exponential line broadening.
pub fn spectrum_from_interferogram(
    fid: &Interferogram2D,
    lb_f2: f64,
    lb_f1: f64,
    ref_freq: f64,
) -> Spectrum2D {
    MixedDomain2D::from_interferogram(fid, lb_f2, lb_f1)
        .to_spectrum(DisplayMode::Magnitude, ref_freq)
}

/// As [`spectrum_from_interferogram`] with a shear by `ratio` between the
/// two transforms.
pub fn shear_spectrum(
    fid: &Interferogram2D,
    lb_f2: f64,
    lb_f1: f64,
    ratio: BroadeningRatio,
    ref_freq: f64,
) -> Spectrum2D {
    MixedDomain2D::from_interferogram(fid, lb_f2, lb_f1)
        .shear(ratio)
        .to_spectrum(DisplayMode::Magnitude, ref_freq)
}

/// One-dimensional counterpart: apodize, transform, center.
pub fn transform_1d(
    fid: &[Complex64],
    dwell: f64,
    lb_hz: f64,
    mode: DisplayMode,
    ref_freq: f64,
) -> super::Projection1D {
    let w = apodization(fid.len(), dwell, lb_hz);
    let mut buf: Vec<Complex64> = fid.iter().zip(&w).map(|(z, &w)| z * w).collect();
    Transformer::new().lane(&mut buf);
    super::Projection1D::new(
        buf.into_iter().map(|z| mode.apply(z)).collect(),
        frequency_axis(fid.len(), 1.0 / dwell),
        ref_freq,
    )
}
