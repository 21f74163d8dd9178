use crate::error::{Error, Result};
use crate::spectrum::process::{ppm, Spectrum2D};

/// Real 1D trace on a uniform frequency axis, Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection1D {
    values: Vec<f64>,
    axis: Vec<f64>,
    ref_freq: f64,
}

impl Projection1D {
    pub fn new(values: Vec<f64>, axis: Vec<f64>, ref_freq: f64) -> Self {
        assert_eq!(
            values.len(),
            axis.len(),
            "projection and axis lengths differ"
        );
        Projection1D {
            values,
            axis,
            ref_freq,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn ref_freq(&self) -> f64 {
        self.ref_freq
    }

    pub fn bin_width(&self) -> f64 {
        match self.axis.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// The axis a 2D spectrum is projected onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    F1,
    F2,
}

/// Sum of the displayed values along the other axis.
pub fn axis_projection(spec: &Spectrum2D, axis: Axis) -> Projection1D {
    match axis {
        Axis::F2 => {
            let mut values = vec![0.0; spec.n_f2()];
            for row in spec.rows() {
                values.iter_mut().zip(row).for_each(|(v, &x)| *v += x);
            }
            Projection1D::new(values, spec.f2_axis().to_vec(), spec.ref_freq())
        }
        Axis::F1 => Projection1D::new(
            spec.rows().map(|row| row.iter().sum()).collect(),
            spec.f1_axis().to_vec(),
            spec.ref_freq(),
        ),
    }
}

/// Sum over all bins, unit bin measure.
pub fn integral_2d(spec: &Spectrum2D) -> f64 {
    spec.data().iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fwhm {
    pub hz: f64,
    pub ppm: f64,
    /// Fractional bin positions of the two half-maximum crossings.
    pub left: f64,
    pub right: f64,
}

/// Full width at half maximum of the highest peak. Half-height crossings are
/// found by walking outward from the maximum and interpolating linearly
/// between the bracketing bins.
pub fn fwhm_of_projection(proj: &Projection1D) -> Result<Fwhm> {
    let v = proj.values();
    let (imax, &vmax) = v
        .iter()
        .enumerate()
        .reduce(|a, b| if b.1 > a.1 { b } else { a })
        .ok_or(Error::NoPeak("projection is empty"))?;
    if vmax.is_nan() || vmax <= 0.0 {
        return Err(Error::NoPeak("maximum is not positive"));
    }
    let half = vmax / 2.0;
    let left = (0..imax)
        .rev()
        .find(|&i| v[i] <= half)
        .map(|i| i as f64 + (half - v[i]) / (v[i + 1] - v[i]))
        .ok_or(Error::NoPeak("no half-maximum crossing below the peak"))?;
    let right = (imax + 1..v.len())
        .find(|&i| v[i] <= half)
        .map(|i| i as f64 - (half - v[i]) / (v[i - 1] - v[i]))
        .ok_or(Error::NoPeak("no half-maximum crossing above the peak"))?;
    let hz = (right - left) * proj.bin_width();
    Ok(Fwhm {
        hz,
        ppm: ppm(hz, proj.ref_freq()),
        left,
        right,
    })
}
