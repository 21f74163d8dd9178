use std::fmt::Write as _;
use std::io::{self, Write};

use crate::spectrum::metrics::Projection1D;
use crate::spectrum::process::Spectrum2D;

fn join(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 12);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

/// `# f2_hz: ...` and `# f1_hz: ...` headers, then one comma-separated row
/// per F1 point. Values use the shortest representation that round-trips.
pub fn write_spectrum_csv<W: Write>(spec: &Spectrum2D, mut out: W) -> io::Result<()> {
    writeln!(out, "# f2_hz: {}", join(spec.f2_axis()))?;
    writeln!(out, "# f1_hz: {}", join(spec.f1_axis()))?;
    for row in spec.rows() {
        writeln!(out, "{}", join(row))?;
    }
    Ok(())
}

/// Two columns, `hz,value`, with a header line.
pub fn write_projection_csv<W: Write>(proj: &Projection1D, mut out: W) -> io::Result<()> {
    writeln!(out, "hz,value")?;
    for (hz, v) in proj.axis().iter().zip(proj.values()) {
        writeln!(out, "{hz},{v}")?;
    }
    Ok(())
}

const RAMP: [char; 8] = [' ', '.', ':', '-', '=', '+', '*', '#'];

/// Coarse contour map, highest F1 at the top, F2 increasing left to right.
/// Each cell shows the maximum of the bins it covers on an 8-level ramp.
pub fn ascii_contour(spec: &Spectrum2D, width: usize, height: usize) -> String {
    let (n1, n2) = (spec.n_f1(), spec.n_f2());
    let width = width.clamp(1, n2.max(1));
    let height = height.clamp(1, n1.max(1));
    let peak = spec.data().iter().cloned().fold(0.0, f64::max);
    let mut s = String::with_capacity((width + 1) * height);
    for r in (0..height).rev() {
        let (i0, i1) = (
            r * n1 / height,
            ((r + 1) * n1 / height).max(r * n1 / height + 1),
        );
        for c in 0..width {
            let (j0, j1) = (
                c * n2 / width,
                ((c + 1) * n2 / width).max(c * n2 / width + 1),
            );
            let mut m: f64 = 0.0;
            for i in i0..i1 {
                for j in j0..j1 {
                    m = m.max(spec.at(i, j));
                }
            }
            let level = if peak > 0.0 {
                ((m / peak) * (RAMP.len() - 1) as f64).round() as usize
            } else {
                0
            };
            s.push(RAMP[level.min(RAMP.len() - 1)]);
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Spectrum2D {
        Spectrum2D::from_grid(
            vec![0.0, 0.25, 1.0, 0.1, 0.5, 0.125],
            vec![-50.0, 0.0],
            vec![-100.0, 0.0, 100.0],
            1e8,
        )
    }

    #[test]
    fn spectrum_csv_layout() {
        let mut buf = Vec::new();
        write_spectrum_csv(&small(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# f2_hz: -100,0,100\n# f1_hz: -50,0\n0,0.25,1\n0.1,0.5,0.125\n"
        );
    }

    #[test]
    fn csv_values_round_trip() {
        let v = 0.1 + 0.2;
        let s = Spectrum2D::from_grid(vec![v], vec![0.0], vec![0.0], 1.0);
        let mut buf = Vec::new();
        write_spectrum_csv(&s, &mut buf).unwrap();
        let last = String::from_utf8(buf)
            .unwrap()
            .lines()
            .last()
            .unwrap()
            .to_string();
        assert_eq!(last.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn projection_csv_layout() {
        let p = Projection1D::new(vec![1.5, 2.0], vec![-10.0, 10.0], 1e8);
        let mut buf = Vec::new();
        write_projection_csv(&p, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "hz,value\n-10,1.5\n10,2\n");
    }

    #[test]
    fn ascii_contour_marks_peak() {
        let art = ascii_contour(&small(), 3, 2);
        assert_eq!(art, ".=.\n :#\n");
    }
}
