//! Output formats: CSV tables, SVG plots and the binary per-step log.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::StepEvent;
use crate::sim::Simulation;
use crate::weights::TrajectoryPoint;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(i64::from(x))
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(i64::from(x))
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Floats carry 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => f.write_str(&format_float(*x)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// A rectangular table with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric view of a column; text cells read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[idx] {
                    Cell::Int(i) => *i as f64,
                    Cell::Float(x) => *x,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

/// Writes `# key = value` metadata lines, the header row, then the rows.
pub fn write_csv<W: Write>(mut out: W, table: &Table, metadata: &[(String, String)]) -> std::io::Result<()> {
    writeln!(out, "# moran {}", crate::VERSION)?;
    for (k, v) in metadata {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "{}", table.columns.join(","))?;
    let mut line = String::new();
    for row in &table.rows {
        line.clear();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "{cell}");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn csv_string(table: &Table, metadata: &[(String, String)]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, table, metadata).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn emit_csv(path: &Path, table: &Table, metadata: &[(String, String)]) -> Result<()> {
    let with_path = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(with_path)?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, table, metadata).map_err(with_path)?;
    w.flush().map_err(with_path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStyle {
    Line,
    Points,
    Dashed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub color: String,
    pub style: SeriesStyle,
    /// Only the first series sharing a name gets a legend entry.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

/// Static SVG line/scatter plot. Identical specs give identical bytes.
pub fn render_svg(spec: &PlotSpec) -> Result<String> {
    if spec.series.is_empty() {
        return Err(Error::Plot("no series to draw".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &spec.series {
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::Plot(format!("non-finite point in series {}", s.name)));
            }
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.is_empty() {
        return Err(Error::Plot("all series are empty".into()));
    }
    let (x0, x1) = padded_range(&xs);
    let (y0, y1) = padded_range(&ys);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        MARGIN_L + pw / 2.0,
        escape(&spec.title)
    );
    // axes and ticks
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_T + ph,
            MARGIN_T + ph + 4.0,
            MARGIN_T + ph + 16.0,
            tick_label(xv)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_L}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 4.0,
            MARGIN_L - 6.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 10.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(&spec.y_label)
    );

    let mut legend: Vec<&Series> = Vec::new();
    for s in &spec.series {
        let color = escape(&s.color);
        match s.style {
            SeriesStyle::Points => {
                for &(x, y) in &s.points {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                        sx(x),
                        sy(y)
                    );
                }
            }
            SeriesStyle::Line | SeriesStyle::Dashed => {
                let pts: Vec<String> = s
                    .points
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                let dash = if s.style == SeriesStyle::Dashed {
                    r#" stroke-dasharray="5,3""#
                } else {
                    ""
                };
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.2"{dash} points="{}"/>"#,
                    pts.join(" ")
                );
            }
        }
        if !legend.iter().any(|l| l.name == s.name) {
            legend.push(s);
        }
    }
    for (i, s) in legend.iter().enumerate() {
        let y = MARGIN_T + 10.0 + 16.0 * i as f64;
        let x = WIDTH - MARGIN_R + 10.0;
        let color = escape(&s.color);
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 18.0,
            x + 22.0,
            y + 4.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_svg(path: &Path, spec: &PlotSpec) -> Result<()> {
    let svg = render_svg(spec)?;
    std::fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn padded_range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// One record of the binary step log.
///
/// Fixed 48-byte little-endian layout:
///
/// | offset | type | field                         |
/// |--------|------|-------------------------------|
/// | 0      | u64  | step index after the event    |
/// | 8      | u32  | mother site                   |
/// | 12     | u32  | father site                   |
/// | 16     | u32  | killed site                   |
/// | 20     | u32  | reserved, zero                |
/// | 24     | f64  | y = Y/N                       |
/// | 32     | f64  | u = U/N                       |
/// | 40     | f64  | v = V/N                       |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub event: StepEvent,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

pub const STEP_RECORD_LEN: usize = 48;

impl StepRecord {
    pub fn new(event: StepEvent, point: &TrajectoryPoint) -> Self {
        StepRecord {
            step: point.step,
            event,
            y: point.y,
            u: point.u,
            v: point.v,
        }
    }

    pub fn to_bytes(&self) -> [u8; STEP_RECORD_LEN] {
        let mut b = [0u8; STEP_RECORD_LEN];
        b[0..8].copy_from_slice(&self.step.to_le_bytes());
        b[8..12].copy_from_slice(&(self.event.mother as u32).to_le_bytes());
        b[12..16].copy_from_slice(&(self.event.father as u32).to_le_bytes());
        b[16..20].copy_from_slice(&(self.event.killed as u32).to_le_bytes());
        b[24..32].copy_from_slice(&self.y.to_le_bytes());
        b[32..40].copy_from_slice(&self.u.to_le_bytes());
        b[40..48].copy_from_slice(&self.v.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; STEP_RECORD_LEN]) -> Result<Self> {
        let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(b[o..o + 8].try_into().unwrap());
        if u32_at(20) != 0 {
            return Err(Error::StepLog("reserved field is not zero".into()));
        }
        Ok(StepRecord {
            step: u64::from_le_bytes(b[0..8].try_into().unwrap()),
            event: StepEvent::new(u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize),
            y: f64_at(24),
            u: f64_at(32),
            v: f64_at(40),
        })
    }
}

pub struct StepLogWriter<W: Write> {
    out: W,
}

impl<W: Write> StepLogWriter<W> {
    pub fn new(out: W) -> Self {
        StepLogWriter { out }
    }

    pub fn write(&mut self, rec: &StepRecord) -> std::io::Result<()> {
        self.out.write_all(&rec.to_bytes())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn read_step_log<R: Read>(mut input: R) -> Result<Vec<StepRecord>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % STEP_RECORD_LEN != 0 {
        return Err(Error::StepLog(format!(
            "length {} is not a multiple of {STEP_RECORD_LEN}",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(STEP_RECORD_LEN)
        .map(|c| StepRecord::from_bytes(c.try_into().unwrap()))
        .collect()
}

/// Re-applies recorded events to `sim` and checks that every recomputed
/// point matches its record bit for bit.
pub fn replay(sim: &mut Simulation, records: &[StepRecord]) -> Result<Vec<TrajectoryPoint>> {
    let n = sim.n();
    let mut out = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let ev = rec.event;
        if ev.mother >= n || ev.father >= n || ev.killed >= n {
            return Err(Error::StepLog(format!("record {i}: site out of range for N = {n}")));
        }
        sim.apply(&ev);
        let z = sim.point();
        if z.step != rec.step
            || z.y.to_bits() != rec.y.to_bits()
            || z.u.to_bits() != rec.u.to_bits()
            || z.v.to_bits() != rec.v.to_bits()
        {
            return Err(Error::StepLog(format!(
                "record {i} (step {}) does not match the replayed state",
                rec.step
            )));
        }
        out.push(z);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["t", "rep", "name"]);
        t.push(vec![0.25.into(), 3u32.into(), "x".into()]);
        let s = csv_string(&t, &[("seed".into(), "7".into())]);
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# moran "));
        assert_eq!(lines[1], "# seed = 7");
        assert_eq!(lines[2], "t,rep,name");
        assert_eq!(lines[3], "2.5000000000000000e-1,3,x");
    }

    #[test]
    fn svg_single_point_and_errors() {
        let spec = PlotSpec {
            title: "one".into(),
            series: vec![Series {
                name: "p".into(),
                color: "red".into(),
                style: SeriesStyle::Points,
                points: vec![(1.0, 1.0)],
            }],
            ..Default::default()
        };
        let svg = render_svg(&spec).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg, render_svg(&spec).unwrap());
        assert!(render_svg(&PlotSpec::default()).is_err());
        let mut bad = spec.clone();
        bad.series[0].points.push((f64::NAN, 0.0));
        assert!(render_svg(&bad).is_err());
    }

    #[test]
    fn step_record_roundtrip() {
        let rec = StepRecord {
            step: 12,
            event: StepEvent::new(3, 1, 4),
            y: 0.4,
            u: 0.3,
            v: 0.125,
        };
        let mut w = StepLogWriter::new(Vec::new());
        w.write(&rec).unwrap();
        w.write(&rec).unwrap();
        let bytes = w.into_inner();
        assert_eq!(bytes.len(), 2 * STEP_RECORD_LEN);
        let back = read_step_log(&bytes[..]).unwrap();
        assert_eq!(back, vec![rec, rec]);
        assert!(read_step_log(&bytes[..47]).is_err());
    }

    #[test]
    fn replay_reproduces_run() {
        use crate::model::{Horizon, PopulationState};
        let start = || Simulation::new(PopulationState::new(30, 1.0, 6).unwrap());
        let mut sim = start();
        let mut log = StepLogWriter::new(Vec::new());
        let mut g = crate::rng::from_seed(4);
        sim.run(Horizon::Steps(500), &mut g, |ev, z| {
            log.write(&StepRecord::new(*ev, z)).unwrap();
        });
        let records = read_step_log(&log.into_inner()[..]).unwrap();
        let points = replay(&mut start(), &records).unwrap();
        assert_eq!(points.last().unwrap(), &sim.point());

        let mut tampered = records.clone();
        tampered[100].event.killed = (tampered[100].event.killed + 1) % 30;
        assert!(replay(&mut start(), &tampered).is_err());
    }
}
