//! Powder-averaged 2D signal synthesis, transforms, shearing and the
//! integral/width metrics.

mod export;
mod metrics;
mod powder;
mod process;
mod synth;

pub use export::{ascii_contour, write_projection_csv, write_spectrum_csv};
pub use metrics::{axis_projection, fwhm_of_projection, integral_2d, Axis, Fwhm, Projection1D};
pub use powder::{powder_orientations, Orientation, PowderGrid};
pub use process::{
    apodization, frequency_axis, ppm, shear_spectrum, spectrum_from_interferogram, transform_1d,
    DisplayMode, MixedDomain2D, Spectrum2D,
};
pub use synth::{synthesize_interferogram, transition_frequency, Interferogram2D};
