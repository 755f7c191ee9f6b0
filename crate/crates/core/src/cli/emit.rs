//! Table and plot writers.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::geometry::BoundaryClosure;
use crate::resonance::{ResonanceCandidate, ResonanceSet};

pub const CSV_HEADER: &str = "mode_k,closure,re_lambda,im_lambda,re_zeta,im_zeta,residual,match_error,grid_N";

fn csv_fields(c: &ResonanceCandidate) -> String {
    format!(
        "{},{},{},{},{},{},{:e},{:e},{}",
        c.mode_k,
        c.closure,
        c.lambda.re,
        c.lambda.im,
        c.zeta.re,
        c.zeta.im,
        c.residual,
        c.match_error,
        c.grid_n
    )
}

pub fn csv(set: &ResonanceSet) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in &set.candidates {
        out.push_str(&csv_fields(c));
        out.push('\n');
    }
    out
}

/// One step of a parameter sweep.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct SweepStep {
    pub param_value: f64,
    pub status: String,
    pub set: Option<ResonanceSet>,
}

pub fn sweep_csv(steps: &[SweepStep]) -> String {
    let mut out = format!("param_value,{CSV_HEADER},status\n");
    for s in steps {
        match &s.set {
            Some(set) => {
                for c in &set.candidates {
                    let _ = writeln!(out, "{},{},{}", s.param_value, csv_fields(c), s.status);
                }
            }
            None => {
                let _ = writeln!(out, "{},,,,,,,,,,{}", s.param_value, s.status);
            }
        }
    }
    out
}

pub fn json<T: serde::Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Plot frame mapping `zeta` coordinates to pixels.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, n_half: f64) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (n_half, n_half, 0.0f64, 0.0f64);
        for (x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let pad = |lo: f64, hi: f64| {
            let p = 0.05 * (hi - lo).max(1.0);
            (lo - p, hi + p)
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn open(&self, title: &str, n_half: f64) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, "<title>{}</title>", escape(title));
        let (l, r, t, b) = (self.px(self.x0), self.px(self.x1), self.py(self.y1), self.py(self.y0));
        let _ = writeln!(
            s,
            r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        let xl = self.px(n_half);
        let _ = writeln!(
            s,
            r#"<line class="continuous-spectrum" x1="{xl:.2}" y1="{t:.2}" x2="{xl:.2}" y2="{b:.2}" stroke="gray" stroke-dasharray="6 4"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif">Re zeta = {n_half}</text>"#,
            xl + 4.0,
            t + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif" text-anchor="middle">Re zeta  [{:.3}, {:.3}]</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            self.x0,
            self.x1
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.2}" font-size="12" font-family="sans-serif" transform="rotate(-90 14 {:.2})" text-anchor="middle">Im zeta  [{:.3}, {:.3}]</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            self.y0,
            self.y1
        );
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn closure_color(c: BoundaryClosure) -> &'static str {
    match c {
        BoundaryClosure::Dirichlet => "#1f77b4",
        BoundaryClosure::Neumann => "#d62728",
    }
}

/// Scatter of the candidates in the `zeta` plane, `n` the dimension.
pub fn svg(set: &ResonanceSet, n: u32) -> String {
    let n_half = f64::from(n) / 2.0;
    let frame = Frame::fit(set.candidates.iter().map(|c| (c.zeta.re, c.zeta.im)), n_half);
    let mut s = frame.open("resonances in the zeta plane", n_half);
    for c in &set.candidates {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"><title>k={} {} lambda={}</title></circle>"#,
            frame.px(c.zeta.re),
            frame.py(c.zeta.im),
            closure_color(c.closure),
            c.mode_k,
            c.closure,
            c.lambda
        );
    }
    for (i, cl) in BoundaryClosure::ALL.iter().enumerate() {
        let y = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{y:.2}" r="3" fill="{}"/><text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif">{cl}</text>"#,
            WIDTH - MARGIN - 80.0,
            closure_color(*cl),
            WIDTH - MARGIN - 72.0,
            y + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Blue-to-red ramp for `t` in `[0, 1]`.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * t).round() as u8;
    let b = (240.0 - 200.0 * t).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

/// Points colored by parameter value, with segments joining each candidate
/// to its nearest neighbour (same mode and closure) in the next step.
pub fn sweep_svg(steps: &[SweepStep], n: u32, link_radius: f64) -> String {
    let n_half = f64::from(n) / 2.0;
    let sets: Vec<(f64, &ResonanceSet)> = steps
        .iter()
        .filter_map(|s| s.set.as_ref().map(|set| (s.param_value, set)))
        .collect();
    let frame = Frame::fit(
        sets.iter().flat_map(|(_, set)| set.candidates.iter().map(|c| (c.zeta.re, c.zeta.im))),
        n_half,
    );
    let (p0, p1) = match (steps.first(), steps.last()) {
        (Some(a), Some(b)) => (a.param_value, b.param_value),
        _ => (0.0, 1.0),
    };
    let t = |p: f64| if p1 == p0 { 0.0 } else { (p - p0) / (p1 - p0) };
    let mut s = frame.open("resonance trajectories in the zeta plane", n_half);
    for pair in sets.windows(2) {
        let (pa, a) = pair[0];
        let (_, b) = pair[1];
        for c in &a.candidates {
            let next = b
                .candidates
                .iter()
                .filter(|d| d.mode_k == c.mode_k && d.closure == c.closure)
                .min_by(|x, y| (x.zeta - c.zeta).norm().total_cmp(&(y.zeta - c.zeta).norm()));
            if let Some(d) = next.filter(|d| (d.zeta - c.zeta).norm() <= link_radius) {
                let _ = writeln!(
                    s,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1"/>"#,
                    frame.px(c.zeta.re),
                    frame.py(c.zeta.im),
                    frame.px(d.zeta.re),
                    frame.py(d.zeta.im),
                    ramp(t(pa))
                );
            }
        }
    }
    for (p, set) in &sets {
        for c in &set.candidates {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"><title>param={p} k={} {} lambda={}</title></circle>"#,
                frame.px(c.zeta.re),
                frame.py(c.zeta.im),
                ramp(t(*p)),
                c.mode_k,
                c.closure,
                c.lambda
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif" fill="{}">param {p0}</text>"#,
        WIDTH - MARGIN - 110.0,
        MARGIN + 4.0,
        ramp(0.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif" fill="{}">param {p1}</text>"#,
        WIDTH - MARGIN - 110.0,
        MARGIN + 20.0,
        ramp(1.0)
    );
    s.push_str("</svg>\n");
    s
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::{lambda_to_zeta, PipelineConfig, Window};
    use num_complex::Complex64;

    fn sample() -> ResonanceSet {
        let lambda = Complex64::new(1.0, -0.5);
        ResonanceSet {
            candidates: vec![ResonanceCandidate {
                lambda,
                zeta: lambda_to_zeta(lambda, 1),
                mode_k: 1,
                residual: 1e-12,
                match_error: 3e-13,
                closure: BoundaryClosure::Neumann,
                grid_n: 160,
            }],
            window: Window::new(-4.0, 4.0, -3.0, 0.5),
            config: PipelineConfig::default(),
            warnings: vec!["note".into()],
            problems: 2,
            failed_problems: 0,
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let text = csv(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "1,Neumann,1,-0.5,0,-1,1e-12,3e-13,160");
    }

    #[test]
    fn json_round_trips() {
        let set = sample();
        let back: ResonanceSet = serde_json::from_str(&json(&set).unwrap()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn svg_draws_the_continuous_spectrum_line() {
        let text = svg(&sample(), 1);
        assert!(text.starts_with("<svg"));
        assert!(text.contains("continuous-spectrum"));
        assert_eq!(text.matches("<circle").count(), 3);
        assert!(text.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn sweep_rows_and_failed_steps() {
        let steps = vec![
            SweepStep {
                param_value: 1.0,
                status: "ok".into(),
                set: Some(sample()),
            },
            SweepStep {
                param_value: 2.0,
                status: "failed".into(),
                set: None,
            },
        ];
        let text = sweep_csv(&steps);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("param_value,{CSV_HEADER},status"));
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.split(',').count() == 11));
        assert!(sweep_svg(&steps, 1, 1.0).contains("param 2"));
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
