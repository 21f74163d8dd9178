//! End-to-end pipeline: gate the program's routes through its phase cycle,
//! synthesize the powder signal, transform, optionally shear, and measure.

use std::num::NonZeroUsize;

use crate::coherence::{acquisitions_per_cycle, enumerate_surviving_pathways, CoherencePathway};
use crate::error::{Error, Result};
use crate::pulseprog::PulseProgram;
use crate::quadrupolar::{broadening_ratio, BroadeningRatio};
use crate::rotations::magic_angle;
use crate::spectrum::{
    axis_projection, fwhm_of_projection, integral_2d, powder_orientations,
    synthesize_interferogram, transition_frequency, Axis, DisplayMode, Fwhm, Interferogram2D,
    MixedDomain2D, Projection1D, Spectrum2D,
};
use crate::spin::{SpinSystem, Transition, TransitionLabel};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ShearSetting {
    #[default]
    None,
    Ratio(BroadeningRatio),
    /// The ST1/CT ratio of the program's spin.
    Auto,
}

impl ShearSetting {
    pub fn resolve(self, prog: &PulseProgram) -> Result<Option<BroadeningRatio>> {
        match self {
            ShearSetting::None => Ok(None),
            ShearSetting::Ratio(r) => Ok(Some(r)),
            ShearSetting::Auto => Ok(Some(auto_shear(prog)?)),
        }
    }
}

/// ST1/CT ridge slope for the program's spin.
pub fn auto_shear(prog: &PulseProgram) -> Result<BroadeningRatio> {
    let st1 = Transition::canonical(prog.spin, TransitionLabel::Satellite(1))?;
    let ct = Transition::canonical(prog.spin, TransitionLabel::Central)?;
    broadening_ratio(prog.spin, &st1, &ct)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub powder_n: NonZeroUsize,
    pub lb_f2: f64,
    pub lb_f1: f64,
    pub shear: ShearSetting,
    /// Rotor angle, radians.
    pub chi: f64,
    /// Complete phase cycles summed into the signal.
    pub cycles: u64,
    pub mode: DisplayMode,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            powder_n: NonZeroUsize::new(256).unwrap(),
            lb_f2: 50.0,
            lb_f1: 10.0,
            shear: ShearSetting::None,
            chi: magic_angle(),
            cycles: 1,
            mode: DisplayMode::Magnitude,
        }
    }
}

/// A route after gating, with whether the cycle lets it through.
#[derive(Debug, Clone, PartialEq)]
pub struct GatedRoute {
    pub name: String,
    pub pathway: CoherencePathway,
    pub survives: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub system: SpinSystem,
    pub surviving: Vec<CoherencePathway>,
    pub routes: Vec<GatedRoute>,
    /// Acquisitions summed: complete cycles times steps per cycle.
    pub scans: u64,
    pub shear: Option<BroadeningRatio>,
    pub fid: Interferogram2D,
    pub spectrum: Spectrum2D,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub integral: f64,
    pub fwhm_f1: Fwhm,
    pub fwhm_f2: Fwhm,
}

impl Simulation {
    /// Profile along F1, summed over F2.
    pub fn f1_projection(&self) -> Projection1D {
        axis_projection(&self.spectrum, Axis::F1)
    }

    pub fn f2_projection(&self) -> Projection1D {
        axis_projection(&self.spectrum, Axis::F2)
    }

    pub fn integral(&self) -> f64 {
        integral_2d(&self.spectrum)
    }

    pub fn metrics(&self) -> Result<Metrics> {
        Ok(Metrics {
            integral: self.integral(),
            fwhm_f1: fwhm_of_projection(&self.f1_projection())?,
            fwhm_f2: fwhm_of_projection(&self.f2_projection())?,
        })
    }
}

/// Routes whose `dp` is not among the cycle's surviving pathways get
/// survival 0 and are left out of the signal entirely.
pub fn gate_routes(prog: &PulseProgram) -> Result<(Vec<CoherencePathway>, Vec<GatedRoute>)> {
    let surviving = enumerate_surviving_pathways(&prog.cycle, prog.spin);
    if surviving.is_empty() {
        return Err(Error::InvalidCycle(format!(
            "acquisition order {} is unreachable",
            prog.cycle.acquisition_order()
        )));
    }
    let routes = prog
        .routes
        .iter()
        .map(|r| GatedRoute {
            name: r.name.clone(),
            pathway: r.pathway(),
            survives: surviving.iter().any(|p| p.dp == r.dp),
        })
        .collect();
    Ok((surviving, routes))
}

pub fn simulate(prog: &PulseProgram, cfg: &SimulationConfig) -> Result<Simulation> {
    if !(cfg.lb_f1 >= 0.0 && cfg.lb_f2 >= 0.0) {
        return Err(Error::OutOfRange {
            name: "line broadening",
            requirement: ">= 0",
            value: cfg.lb_f1.min(cfg.lb_f2),
        });
    }
    let system = prog.system()?;
    let (surviving, routes) = gate_routes(prog)?;
    let shear = cfg.shear.resolve(prog)?;
    let live: Vec<CoherencePathway> = routes
        .iter()
        .filter(|r| r.survives)
        .map(|r| r.pathway.clone())
        .collect();
    let grid = powder_orientations(cfg.powder_n);
    let scans = cfg.cycles * acquisitions_per_cycle(&prog.cycle);
    let fid = synthesize_interferogram(&system, &prog.acquisition, &live, &grid, cfg.chi)?
        .accumulated(scans);
    let mut mixed = MixedDomain2D::from_interferogram(&fid, cfg.lb_f2, cfg.lb_f1);
    if let Some(r) = shear {
        mixed = mixed.shear(r);
    }
    let spectrum = mixed.to_spectrum(cfg.mode, prog.acquisition.ref_hz);
    Ok(Simulation {
        system,
        surviving,
        routes,
        scans,
        shear,
        fid,
        spectrum,
    })
}

/// Bins of a (possibly sheared) spectrum that a branch's powder ridge
/// passes through, widened by `half_width` bins along F1.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeMask {
    n_f1: usize,
    n_f2: usize,
    cells: Vec<bool>,
}

impl RidgeMask {
    /// Traces `(nu_CT, nu_branch - R nu_CT)` over `samples` orientations
    /// uniform in `cos beta`. F1 positions wrap like the spectrum does.
    pub fn trace(
        spec: &Spectrum2D,
        system: &SpinSystem,
        branch: TransitionLabel,
        shear: Option<BroadeningRatio>,
        chi: f64,
        samples: usize,
        half_width: usize,
    ) -> Result<Self> {
        let ct = Transition::canonical(system.spin(), TransitionLabel::Central)?;
        let t1 = Transition::canonical(system.spin(), branch)?;
        let r = shear.map_or(0.0, |r| r.to_f64());
        let (n_f1, n_f2) = (spec.n_f1(), spec.n_f2());
        let mut cells = vec![false; n_f1 * n_f2];
        for k in 0..samples {
            let cos_beta = (k as f64 + 0.5) / samples as f64;
            let beta = cos_beta.acos();
            let nu2 = transition_frequency(system, &ct, beta, chi);
            let nu1 = transition_frequency(system, &t1, beta, chi) - r * nu2;
            let (i, j) = (spec.f1_bin(nu1), spec.f2_bin(nu2));
            let hw = half_width as isize;
            for d in -hw..=hw {
                let row = (i as isize + d).rem_euclid(n_f1 as isize) as usize;
                cells[row * n_f2 + j] = true;
            }
        }
        Ok(RidgeMask { n_f1, n_f2, cells })
    }

    pub fn contains(&self, f1: usize, f2: usize) -> bool {
        self.cells[f1 * self.n_f2 + f2]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Cells in `self` but not in `other`.
    pub fn without(&self, other: &RidgeMask) -> RidgeMask {
        assert_eq!((self.n_f1, self.n_f2), (other.n_f1, other.n_f2));
        RidgeMask {
            n_f1: self.n_f1,
            n_f2: self.n_f2,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(&a, &b)| a && !b)
                .collect(),
        }
    }

    pub fn union(&self, other: &RidgeMask) -> RidgeMask {
        assert_eq!((self.n_f1, self.n_f2), (other.n_f1, other.n_f2));
        RidgeMask {
            n_f1: self.n_f1,
            n_f2: self.n_f2,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(&a, &b)| a || b)
                .collect(),
        }
    }

    /// Sum of the spectrum over the masked bins.
    pub fn integral(&self, spec: &Spectrum2D) -> f64 {
        (0..self.n_f1)
            .flat_map(|i| (0..self.n_f2).map(move |j| (i, j)))
            .filter(|&(i, j)| self.contains(i, j))
            .map(|(i, j)| spec.at(i, j))
            .sum()
    }

    /// Ridge area above a local baseline. In each F2 column every run of
    /// masked F1 bins is flanked by `flank` bins on either side; a quadratic
    /// through the flank bins (least squares; a line when `flank` is 1) is
    /// subtracted across the run. Runs whose span including flanks touches
    /// `exclude`, or does not fit in the column, are skipped.
    pub fn baseline_integral(
        &self,
        spec: &Spectrum2D,
        exclude: &RidgeMask,
        flank: usize,
    ) -> BaselineIntegral {
        let n = self.n_f1;
        let mut out = BaselineIntegral::default();
        for j in 0..self.n_f2 {
            let Some(start) = (0..n).find(|&i| !self.contains(i, j)) else {
                out.skipped += 1;
                continue;
            };
            let mut k = 0;
            while k < n {
                let i = (start + k) % n;
                if !self.contains(i, j) {
                    k += 1;
                    continue;
                }
                let len = (k..n)
                    .take_while(|&q| self.contains((start + q) % n, j))
                    .count();
                k += len;
                let span = len + 2 * flank;
                let lo = (i + n * span - flank) % n;
                if flank == 0 || span > n || (0..span).any(|q| exclude.contains((lo + q) % n, j)) {
                    out.skipped += 1;
                    continue;
                }
                let flanks: Vec<(f64, f64)> = (0..flank)
                    .chain(flank + len..span)
                    .map(|q| (q as f64, spec.at((lo + q) % n, j)))
                    .collect();
                let base = fit_baseline(&flanks, flank > 1);
                for q in flank..flank + len {
                    out.value += spec.at((lo + q) % n, j) - base(q as f64);
                }
                out.runs += 1;
            }
        }
        out
    }
}

/// Least-squares polynomial of degree 1 or 2 through `points`.
fn fit_baseline(points: &[(f64, f64)], quadratic: bool) -> impl Fn(f64) -> f64 {
    let deg = if quadratic { 2 } else { 1 };
    let mut a = [[0.0; 4]; 3];
    for &(x, y) in points {
        let pw = [1.0, x, x * x];
        for r in 0..=deg {
            for c in 0..=deg {
                a[r][c] += pw[r] * pw[c];
            }
            a[r][3] += pw[r] * y;
        }
    }
    // Gauss-Jordan on the (deg+1)-square normal equations.
    for p in 0..=deg {
        let piv = a[p][p];
        a[p].iter_mut().for_each(|v| *v /= piv);
        let row = a[p];
        for (r, other) in a.iter_mut().enumerate().take(deg + 1) {
            if r != p {
                let f = other[p];
                other.iter_mut().zip(&row).for_each(|(v, &q)| *v -= f * q);
            }
        }
    }
    let coef = [a[0][3], a[1][3], if quadratic { a[2][3] } else { 0.0 }];
    move |x| coef[0] + coef[1] * x + coef[2] * x * x
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BaselineIntegral {
    pub value: f64,
    pub runs: usize,
    pub skipped: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::CycleSpec;
    use crate::pulseprog::Route;
    use crate::spectrum::frequency_axis;

    fn small_program() -> PulseProgram {
        let mut prog = PulseProgram::shipped();
        prog.acquisition.td_f1 = 16;
        prog.acquisition.td_f2 = 64;
        prog
    }

    fn quick() -> SimulationConfig {
        SimulationConfig {
            powder_n: NonZeroUsize::new(16).unwrap(),
            ..Default::default()
        }
    }

    #[test]
    fn shipped_cycle_blocks_the_leak() {
        let (_, routes) = gate_routes(&PulseProgram::shipped()).unwrap();
        let by_name = |n: &str| routes.iter().find(|r| r.name == n).unwrap().survives;
        assert!(by_name("desired") && by_name("st2") && !by_name("ct_leak"));
        let mut prog = PulseProgram::shipped();
        prog.cycle = prog.cycle.with_phase_count(1, 2);
        let (_, routes) = gate_routes(&prog).unwrap();
        assert!(routes.iter().all(|r| r.survives));
    }

    #[test]
    fn gated_route_contributes_nothing() {
        let with = simulate(&small_program(), &quick()).unwrap();
        let mut prog = small_program();
        prog.routes.retain(|r| r.name != "ct_leak");
        let without = simulate(&prog, &quick()).unwrap();
        assert_eq!(with.fid, without.fid);
        assert_eq!(with.spectrum, without.spectrum);
    }

    #[test]
    fn unreachable_acquisition_is_an_error() {
        let mut prog = small_program();
        prog.cycle = CycleSpec::new(prog.cycle.pulses().to_vec(), 9).unwrap();
        assert!(matches!(
            simulate(&prog, &quick()),
            Err(Error::InvalidCycle(_))
        ));
    }

    #[test]
    fn scans_follow_cycle_length() {
        let sim = simulate(
            &small_program(),
            &SimulationConfig {
                cycles: 3,
                ..quick()
            },
        )
        .unwrap();
        assert_eq!(sim.scans, 3 * 64);
        let one = simulate(&small_program(), &quick()).unwrap();
        assert!((sim.integral() / one.integral() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn auto_shear_is_st1_ratio() {
        assert_eq!(
            auto_shear(&PulseProgram::shipped()).unwrap(),
            BroadeningRatio::new(7, 24).unwrap()
        );
        let sim = simulate(
            &small_program(),
            &SimulationConfig {
                shear: ShearSetting::Auto,
                ..quick()
            },
        )
        .unwrap();
        assert_eq!(sim.shear.unwrap().to_string(), "7/24");
    }

    #[test]
    fn zero_signal_has_no_width() {
        let mut prog = small_program();
        prog.routes = vec![Route {
            name: "off".into(),
            dp: vec![1, -1, 0, 0, -1],
            t1_branch: TransitionLabel::Central,
            amplitude: 0.0,
        }];
        let sim = simulate(&prog, &quick()).unwrap();
        assert_eq!(sim.integral(), 0.0);
        assert!(sim.metrics().is_err());
    }

    fn grid(n1: usize, n2: usize, f: impl Fn(usize, usize) -> f64) -> Spectrum2D {
        let data = (0..n1)
            .flat_map(|i| (0..n2).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Spectrum2D::from_grid(data, frequency_axis(n1, 1.0), frequency_axis(n2, 1.0), 1.0)
    }

    fn mask(n1: usize, n2: usize, rows: &[usize]) -> RidgeMask {
        let mut cells = vec![false; n1 * n2];
        for &i in rows {
            for j in 0..n2 {
                cells[i * n2 + j] = true;
            }
        }
        RidgeMask {
            n_f1: n1,
            n_f2: n2,
            cells,
        }
    }

    #[test]
    fn baseline_removes_quadratic_background() {
        let bg = |i: usize| 3.0 + 0.5 * i as f64 - 0.02 * (i * i) as f64;
        let spec = grid(32, 4, |i, _| {
            bg(i) + if i == 10 || i == 11 { 2.0 } else { 0.0 }
        });
        let target = mask(32, 4, &[10, 11]);
        let none = mask(32, 4, &[]);
        let r = target.baseline_integral(&spec, &none, 3);
        assert_eq!((r.runs, r.skipped), (4, 0));
        assert!((r.value - 16.0).abs() < 1e-9, "{}", r.value);
        // Linear baseline on a straight background.
        let spec = grid(32, 4, |i, _| {
            1.0 + 0.25 * i as f64 + if i == 5 { 1.0 } else { 0.0 }
        });
        let r = mask(32, 4, &[5]).baseline_integral(&spec, &none, 1);
        assert!((r.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn baseline_skips_excluded_and_wraps() {
        let spec = grid(16, 2, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let target = mask(16, 2, &[15, 0]);
        let r = target.baseline_integral(&spec, &mask(16, 2, &[]), 2);
        assert_eq!(r.runs, 2);
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = target.baseline_integral(&spec, &mask(16, 2, &[13]), 2);
        assert_eq!((r.runs, r.skipped, r.value), (0, 2, 0.0));
    }

    #[test]
    fn ridge_mask_finds_single_crystallite_line() {
        let mut prog = small_program();
        prog.acquisition.td_f1 = 32;
        let cfg = SimulationConfig {
            powder_n: NonZeroUsize::new(1).unwrap(),
            ..quick()
        };
        let sim = simulate(&prog, &cfg).unwrap();
        let m = RidgeMask::trace(
            &sim.spectrum,
            &sim.system,
            TransitionLabel::Satellite(1),
            None,
            cfg.chi,
            256,
            0,
        )
        .unwrap();
        assert!(m.count() > 0);
        // The strongest bin is on the ST1 line, the only amplitude-1 route.
        let peak = (0..sim.spectrum.data().len())
            .max_by(|&a, &b| sim.spectrum.data()[a].total_cmp(&sim.spectrum.data()[b]))
            .unwrap();
        let n2 = sim.spectrum.n_f2();
        assert!(m.contains(peak / n2, peak % n2));
    }
}
