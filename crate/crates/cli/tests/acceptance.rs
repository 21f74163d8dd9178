//! Acceptance suite. Prints one PASS/FAIL line per criterion with the
//! measured value, the pinned tolerance and the runtime against its budget.
//! Exits non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use stmas_cli::{run, EXIT_USAGE};
use stmas_core::coherence::{acquisitions_per_cycle, survives};
use stmas_core::pulseprog::{Acquisition, Route};
use stmas_core::rotations::{characteristic_angles, d2_00, d4_00};
use stmas_core::simulate::{simulate, RidgeMask, ShearSetting, SimulationConfig};
use stmas_core::spectrum::{
    axis_projection, fwhm_of_projection, transform_1d, Axis, DisplayMode, MixedDomain2D,
};
use stmas_core::{
    broadening_ratio, parse_program, render_program, BroadeningRatio, CycleSpec, Interferogram2D,
    PulseProgram, PulseSpec, Spin, Transition, TransitionLabel,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn shipped_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/programs/stmas_1q.pp")
}

fn shipped() -> PulseProgram {
    parse_program(&fs::read_to_string(shipped_path()).unwrap()).unwrap()
}

fn exact_ratios() -> Verdict {
    let out = Command::new(env!("CARGO_BIN_EXE_stmas"))
        .args(["ratios", "5/2"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let want = "CT-CT 1\nST1-CT 7/24\nST2-CT -11/6\n";
    let spin = Spin::from_twice(5).unwrap();
    let ct = Transition::canonical(spin, TransitionLabel::Central).unwrap();
    let rational = |k| {
        let t = Transition::canonical(spin, TransitionLabel::Satellite(k)).unwrap();
        broadening_ratio(spin, &t, &ct).unwrap()
    };
    let exact = rational(1) == BroadeningRatio::new(7, 24).unwrap()
        && rational(2) == BroadeningRatio::new(-11, 6).unwrap()
        && broadening_ratio(spin, &ct, &ct).unwrap() == BroadeningRatio::new(1, 1).unwrap();
    verdict(
        out.status.success() && stdout == want && exact,
        format!(
            "output {:?}, exact rationals {exact}",
            stdout.trim_end().replace('\n', "; ")
        ),
    )
}

fn angle_zeros() -> Verdict {
    let a = characteristic_angles();
    let deg = f64::to_degrees;
    let worst = [
        d2_00(a.magic),
        d4_00(a.rank4_zero_low),
        d4_00(a.rank4_zero_high),
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()));
    let magic_err = (deg(a.magic) - 54.7356).abs();
    let low_err = (deg(a.rank4_zero_low) - 30.556).abs();
    let high_err = (deg(a.rank4_zero_high) - 70.124).abs();
    verdict(
        worst < 1e-12 && magic_err <= 1e-4 && low_err <= 1e-3 && high_err <= 1e-3,
        format!(
            "max |d| at zeros {worst:.1e} (< 1e-12); magic {:.6} deg (54.7356 +- 1e-4); \
             rank-4 {:.4}, {:.4} deg (30.556, 70.124 +- 1e-3)",
            deg(a.magic),
            deg(a.rank4_zero_low),
            deg(a.rank4_zero_high)
        ),
    )
}

/// Normalized magnitude of the explicit sum over every phase combination of
/// `exp(-i sum (dp_i - d_i) phi_i)`. Only the residues `dp_i mod N_i` enter.
fn phase_sum(offsets: &[i32], ns: &[u32]) -> f64 {
    let tables: Vec<Vec<Complex64>> = offsets
        .iter()
        .zip(ns)
        .map(|(&o, &n)| {
            (0..n)
                .map(|k| {
                    Complex64::from_polar(1.0, -f64::from(o) * TAU * f64::from(k) / f64::from(n))
                })
                .collect()
        })
        .collect();
    fn nest(tables: &[Vec<Complex64>], acc: Complex64) -> Complex64 {
        match tables.split_first() {
            None => acc,
            Some((t, rest)) => t.iter().map(|&z| nest(rest, acc * z)).sum(),
        }
    }
    let count: u32 = ns.iter().product();
    nest(&tables, Complex64::new(1.0, 0.0)).norm() / f64::from(count)
}

fn selection_rule_oracle() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5e1ec7);
    let (mut cycles, mut pathways, mut mismatches) = (0, 0u64, 0u64);
    while cycles < 500 {
        let twice: u32 = if rng.random_range(0..2) == 0 { 3 } else { 5 };
        let pmax = twice as i32;
        let n_pulses = rng.random_range(1..=5usize);
        let pulses: Vec<PulseSpec> = (0..n_pulses)
            .map(|i| {
                let n = rng.random_range(1..=8u32);
                if rng.random_range(0..4) == 0 {
                    PulseSpec::new(format!("p{i}"), n, 0).holding_order()
                } else {
                    PulseSpec::new(format!("p{i}"), n, rng.random_range(-pmax..=pmax))
                }
            })
            .collect();
        let acq = rng.random_range(-pmax..=pmax);
        let cycle = CycleSpec::new(pulses, acq).unwrap();
        let ns: Vec<u32> = cycle.pulses().iter().map(|p| p.n_phases).collect();
        let desired = cycle.desired_dp();
        let mut memo = std::collections::HashMap::new();
        // Every order walk from 0 to the acquisition order within |p| <= 2S.
        let mut orders = vec![0i32; n_pulses + 1];
        let mut digits = vec![0i32; n_pulses.saturating_sub(1)];
        loop {
            for (i, d) in digits.iter().enumerate() {
                orders[i + 1] = d - pmax;
            }
            orders[n_pulses] = acq;
            let dp: Vec<i32> = orders.windows(2).map(|w| w[1] - w[0]).collect();
            let residues: Vec<i32> = dp
                .iter()
                .zip(&desired)
                .zip(&ns)
                .map(|((&d, &want), &n)| (d - want).rem_euclid(n as i32))
                .collect();
            let brute = *memo
                .entry(residues.clone())
                .or_insert_with(|| phase_sum(&residues, &ns));
            let predicate = survives(&dp, &cycle).unwrap();
            let brute_pass = brute > 0.5;
            if brute_pass != predicate || !(brute < 1e-9 || (brute - 1.0).abs() < 1e-9) {
                mismatches += 1;
            }
            pathways += 1;
            let mut i = 0;
            while i < digits.len() {
                digits[i] += 1;
                if digits[i] <= 2 * pmax {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
        cycles += 1;
    }
    verdict(
        mismatches == 0,
        format!("{cycles} cycles, {pathways} in-bounds pathways, {mismatches} mismatches (need 0)"),
    )
}

fn four_cubed() -> Verdict {
    let ns: Vec<u32> = shipped()
        .cycle
        .pulses()
        .iter()
        .map(|p| p.n_phases)
        .collect();
    let got = acquisitions_per_cycle(&shipped().cycle);
    verdict(
        ns == [4, 4, 1, 1, 4] && got == 64,
        format!("N = {ns:?}, acquisitions per cycle {got} (need 64)"),
    )
}

fn integral_trend() -> Verdict {
    let cfg = SimulationConfig {
        powder_n: NonZeroUsize::new(64).unwrap(),
        cycles: 32,
        ..SimulationConfig::default()
    };
    let base = shipped();
    assert_eq!((base.acquisition.td_f1, base.acquisition.td_f2), (64, 512));
    let mut doubled = base.clone();
    doubled.cycle = doubled.cycle.with_phase_count(4, 8);
    let a = simulate(&base, &cfg).unwrap();
    let b = simulate(&doubled, &cfg).unwrap();
    let ratio = b.integral() / a.integral();
    verdict(
        (ratio - 2.0).abs() <= 1e-9,
        format!(
            "scans {} -> {}, integral ratio {ratio:.12} (2 +- 1e-9)",
            a.scans, b.scans
        ),
    )
}

fn refocusing() -> Verdict {
    let prog = shipped();
    let cfg = SimulationConfig::default();
    let plain = simulate(&prog, &cfg).unwrap();
    let sheared = simulate(
        &prog,
        &SimulationConfig {
            shear: ShearSetting::Ratio(BroadeningRatio::new(7, 24).unwrap()),
            ..cfg
        },
    )
    .unwrap();
    let before = fwhm_of_projection(&plain.f1_projection()).unwrap().hz;
    let after = fwhm_of_projection(&sheared.f1_projection()).unwrap().hz;
    let ratio = after / before;
    verdict(
        ratio <= 0.2,
        format!(
            "F1 FWHM unsheared {before:.1} Hz, sheared {after:.1} Hz, ratio {ratio:.3} (<= 0.2)"
        ),
    )
}

/// CT ridge over ST1 ridge in the sheared spectrum, each measured above a
/// local quadratic baseline with the other branches' ridges excluded.
fn leak_fraction(n2: u32) -> (f64, usize, usize) {
    let mut prog = shipped();
    prog.cycle = prog.cycle.with_phase_count(1, n2);
    prog.acquisition.td_f1 = 256;
    prog.acquisition.td_f2 = 2048;
    let cfg = SimulationConfig {
        lb_f1: 20.0,
        shear: ShearSetting::Auto,
        ..SimulationConfig::default()
    };
    let sim = simulate(&prog, &cfg).unwrap();
    let mask = |branch, hw| {
        RidgeMask::trace(
            &sim.spectrum,
            &sim.system,
            branch,
            sim.shear,
            cfg.chi,
            8192,
            hw,
        )
        .unwrap()
    };
    let (ct, st1) = (
        mask(TransitionLabel::Central, 0),
        mask(TransitionLabel::Satellite(1), 0),
    );
    let wide = |b| mask(b, 3);
    let st2 = wide(TransitionLabel::Satellite(2));
    let ct_ex = wide(TransitionLabel::Satellite(1)).union(&st2);
    let st1_ex = wide(TransitionLabel::Central).union(&st2);
    let ct_int = ct.baseline_integral(&sim.spectrum, &ct_ex, 3);
    let st1_int = st1.baseline_integral(&sim.spectrum, &st1_ex, 3);
    (ct_int.value / st1_int.value, ct_int.runs, st1_int.runs)
}

fn ct_gating() -> Verdict {
    let mut detail = Vec::new();
    let mut pass = true;
    for (n2, blocked) in [(4, true), (2, false), (1, false)] {
        let (frac, ct_runs, st1_runs) = leak_fraction(n2);
        let ok = if blocked { frac < 0.01 } else { frac > 0.10 };
        pass &= ok && ct_runs > 0 && st1_runs > 0;
        detail.push(format!(
            "N2={n2}: CT/ST1 {frac:+.4} ({} 0.{})",
            if blocked { "<" } else { ">" },
            if blocked { "01" } else { "10" }
        ));
    }
    verdict(pass, detail.join("; "))
}

fn lineshape() -> Verdict {
    let (n, sw) = (8192, 100_000.0);
    let dwell = 1.0 / sw;
    let bin = sw / n as f64;
    let nu = 1024.0 * bin;
    let fid: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -TAU * nu * k as f64 * dwell))
        .collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for tau in [5e-3, 10e-3, 20e-3] {
        let want = 1.0 / (PI * tau);
        let proj = transform_1d(&fid, dwell, want, DisplayMode::Absorption, 1.0);
        let got = fwhm_of_projection(&proj).unwrap().hz;
        let bins = (got - want).abs() / bin;
        pass &= bins <= 2.0;
        detail.push(format!(
            "tau {} ms: {got:.2} Hz vs {want:.2} ({bins:.2} bins)",
            tau * 1e3
        ));
    }
    verdict(pass, format!("{} (<= 2 bins)", detail.join("; ")))
}

fn random_program(rng: &mut StdRng) -> PulseProgram {
    let twice = [3u32, 5, 7, 9][rng.random_range(0..4)];
    let log = |rng: &mut StdRng, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    let n_pulses = rng.random_range(1..=6usize);
    let pulses: Vec<PulseSpec> = (0..n_pulses)
        .map(|i| {
            let n = rng.random_range(1..=8u32);
            if rng.random_range(0..3) == 0 {
                PulseSpec::new(format!("p{i}"), n, 0).holding_order()
            } else {
                PulseSpec::new(format!("p{i}"), n, rng.random_range(-3..=3))
            }
        })
        .collect();
    let acq = rng.random_range(-(twice as i32)..=twice as i32);
    let routes = (0..rng.random_range(0..5))
        .map(|r| {
            let k = rng.random_range(0..=(twice - 1) / 2);
            Route {
                name: format!("r{r}_{}", rng.random_range(0..1000)),
                dp: (0..n_pulses).map(|_| rng.random_range(-5..=5)).collect(),
                t1_branch: if k == 0 {
                    TransitionLabel::Central
                } else {
                    TransitionLabel::Satellite(k)
                },
                amplitude: rng.random_range(-1.0..=1.0),
            }
        })
        .collect();
    PulseProgram {
        spin: Spin::from_twice(twice).unwrap(),
        larmor_hz: log(rng, 6.0, 9.0),
        nuq_hz: rng.random_range(0.0..1e7),
        acquisition: Acquisition {
            sw_f2_hz: log(rng, 0.0, 6.0),
            sw_f1_hz: log(rng, 0.0, 6.0),
            td_f2: rng.random_range(2..4096),
            td_f1: rng.random_range(2..4096),
            ref_hz: log(rng, 6.0, 9.0),
            spin_rate_hz: rng.random_range(0.0..1e5),
        },
        cycle: CycleSpec::new(pulses, acq).unwrap(),
        routes,
    }
}

fn parser() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x9a55e7);
    let mut round_trip_failures = 0;
    for _ in 0..200 {
        let prog = random_program(&mut rng);
        let text = render_program(&prog);
        if parse_program(&text).ok().as_ref() != Some(&prog) {
            round_trip_failures += 1;
        }
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/malformed");
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pp"))
        .collect();
    files.sort();
    let mut corpus_failures = Vec::new();
    for path in &files {
        let text = fs::read_to_string(path).unwrap();
        let expect = text
            .lines()
            .find_map(|l| l.strip_prefix("# expect: "))
            .unwrap_or_default();
        let want = expect.replace("line=", "line ").replace(" kind=", ": ") + ":";
        let out = run(["stmas", "pathways", path.to_str().unwrap()]);
        let first = out.stderr.lines().next().unwrap_or_default();
        if out.exit_code != EXIT_USAGE || !first.contains(&want) {
            corpus_failures.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    verdict(
        round_trip_failures == 0 && files.len() == 20 && corpus_failures.is_empty(),
        format!(
            "round trip 200 programs, {round_trip_failures} failures; malformed corpus {} files, \
             failures {corpus_failures:?} (need 0, exit 2 with expected line and kind)",
            files.len()
        ),
    )
}

fn shear_invariance() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x54ea5);
    let (mut proj_worst, mut restore_worst) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let (n1, n2) = (rng.random_range(8..64usize), rng.random_range(8..128usize));
        let data = (0..n1 * n2)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let fid = Interferogram2D::from_samples(data, n1, n2, 1e-4, 1e-5).unwrap();
        let r = BroadeningRatio::new(rng.random_range(-60..=60), rng.random_range(1..=48)).unwrap();
        let mixed = MixedDomain2D::from_interferogram(&fid, 0.0, 0.0);
        let sheared = mixed.shear(r);
        let before = axis_projection(&mixed.to_spectrum(DisplayMode::Magnitude, 1.0), Axis::F2);
        let after = axis_projection(&sheared.to_spectrum(DisplayMode::Magnitude, 1.0), Axis::F2);
        let scale = before.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dev = before
            .values()
            .iter()
            .zip(after.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        proj_worst = proj_worst.max(dev / scale);
        let (orig, _) = mixed.to_complex_spectrum();
        let (back, _) = sheared.shear(-r).to_complex_spectrum();
        let scale = orig.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let dev = orig
            .iter()
            .zip(&back)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        restore_worst = restore_worst.max(dev / scale);
    }
    verdict(
        proj_worst <= 1e-9 && restore_worst <= 1e-9,
        format!(
            "50 random spectra: F2 projection change {proj_worst:.2e}, \
             shear(R) then shear(-R) error {restore_worst:.2e} (each <= 1e-9 relative)"
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, u64, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        ("exact ratios", 1, exact_ratios),
        ("angle zeros", 1, angle_zeros),
        ("selection-rule oracle", 60, selection_rule_oracle),
        ("4^3 bookkeeping", 1, four_cubed),
        ("integral trend", 30, integral_trend),
        ("refocusing", 120, refocusing),
        ("CT-CT gating", 240, ct_gating),
        ("lineshape calibration", 10, lineshape),
        ("parser round trip", 10, parser),
        ("shear invariance", 30, shear_invariance),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {} {name}: {} [{:.2} s of {budget} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
