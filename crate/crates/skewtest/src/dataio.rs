//! Data plumbing: CSV column ingestion, robust MAD outlier detection, and
//! deterministic SVG emission for curve and boxplot figures.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::Dataset;
use crate::simulation::BoxStats;

/// Normal-consistency factor for the median absolute deviation.
pub const MAD_CONSISTENCY: f64 = 1.4826;

/// Default flagging threshold in scaled-MAD units.
pub const DEFAULT_MAD_THRESHOLD: f64 = 3.0;

/// Column selector for CSV ingestion: by header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSpec {
    Name(String),
    Index(usize),
}

impl ColumnSpec {
    /// A purely numeric selector is an index; anything else is a name.
    pub fn parse(s: &str) -> ColumnSpec {
        match s.parse::<usize>() {
            Ok(i) => ColumnSpec::Index(i),
            Err(_) => ColumnSpec::Name(s.to_string()),
        }
    }
}

fn is_numeric(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

/// Read one numeric column from a delimited text file.
///
/// The first row is treated as a header when any of its fields fails to
/// parse as a number; a column referenced by name requires such a header.
/// Blank records (for example a trailing newline) are ignored. Every value
/// must be finite, and the resulting dataset must hold at least 3 values.
pub fn load_column(path: &Path, column: &ColumnSpec, delimiter: u8) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} contains no records",
            path.display()
        )));
    }
    let has_header = records[0].iter().any(|f| !is_numeric(f));
    let col = match column {
        ColumnSpec::Index(i) => *i,
        ColumnSpec::Name(name) => {
            if !has_header {
                return Err(Error::SchemaError(format!(
                    "column '{name}' requested but the file has no header row"
                )));
            }
            records[0]
                .iter()
                .position(|f| f.trim() == name)
                .ok_or_else(|| {
                    Error::SchemaError(format!(
                        "column '{name}' not found in header [{}]",
                        records[0].iter().collect::<Vec<_>>().join(", ")
                    ))
                })?
        }
    };
    let label = if has_header {
        records[0]
            .get(col)
            .map(|f| f.trim().to_string())
            .unwrap_or_default()
    } else {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let start = usize::from(has_header);
    let mut values = Vec::with_capacity(records.len() - start);
    for (idx, rec) in records.iter().enumerate().skip(start) {
        let row = idx + 1;
        let field = rec.get(col).ok_or_else(|| {
            Error::SchemaError(format!(
                "row {row} has only {} fields, column {col} requested",
                rec.len()
            ))
        })?;
        let v: f64 = field.trim().parse().map_err(|_| Error::ParseError {
            row,
            message: format!("'{field}' is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::ParseError {
                row,
                message: format!("non-finite value '{field}'"),
            });
        }
        values.push(v);
    }
    Dataset::new(values, label)
}

/// Write a dataset as a one-column CSV with the label as header.
/// Values round-trip exactly through `load_column`.
pub fn write_dataset_csv<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    let label = if data.label.is_empty() {
        "value"
    } else {
        &data.label
    };
    writeln!(out, "{label}")?;
    for v in data.values() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

/// Robust outlier report: flagged indices and the statistics behind them.
#[derive(Debug, Clone, Serialize)]
pub struct OutlierReport {
    pub indices: Vec<usize>,
    pub threshold: f64,
    pub median: f64,
    pub mad_scaled: f64,
    pub flagged_values: Vec<f64>,
}

fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Flag observations whose absolute deviation from the median exceeds
/// `threshold` scaled median-absolute-deviations (scale factor 1.4826).
/// A zero MAD (more than half the sample tied) is reported as degenerate.
pub fn mad_outliers(data: &Dataset, threshold: f64) -> Result<OutlierReport> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(
            "the outlier threshold must be positive".into(),
        ));
    }
    let values = data.values();
    let median = median_of(values);
    let deviations: Vec<f64> = values.iter().map(|v| (v - median).abs()).collect();
    let mad_scaled = MAD_CONSISTENCY * median_of(&deviations);
    if !(mad_scaled > 0.0) {
        return Err(Error::DegenerateSpread);
    }
    let mut indices = Vec::new();
    let mut flagged_values = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if (v - median).abs() / mad_scaled > threshold {
            indices.push(i);
            flagged_values.push(v);
        }
    }
    Ok(OutlierReport {
        indices,
        threshold,
        median,
        mad_scaled,
        flagged_values,
    })
}

/// The dataset with the report's flagged observations removed.
pub fn remove_outliers(data: &Dataset, report: &OutlierReport) -> Result<Dataset> {
    let values: Vec<f64> = data
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| !report.indices.contains(i))
        .map(|(_, &v)| v)
        .collect();
    Dataset::new(values, format!("{}-cleaned", data.label))
}

/// One named line of a curve plot.
#[derive(Debug, Clone, Serialize)]
pub struct CurveSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// One named box of a boxplot.
#[derive(Debug, Clone, Serialize)]
pub struct BoxGroup {
    pub name: String,
    pub stats: BoxStats,
}

/// Plot input consumed by the SVG emitter.
#[derive(Debug, Clone, Serialize)]
pub enum PlotData {
    Curve {
        x_label: String,
        y_label: String,
        series: Vec<CurveSeries>,
    },
    Box {
        x_label: String,
        y_label: String,
        groups: Vec<BoxGroup>,
    },
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Scale {
        // Guard a flat range so the map stays finite.
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Scale { lo, hi, px_lo, px_hi }
    }
    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0)
            .collect()
    }
}

fn svg_header(out: &mut String) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>\n"
    ));
}

fn svg_axes(out: &mut String, x_label: &str, y_label: &str, ys: &Scale) {
    let x0 = MARGIN_L;
    let x1 = SVG_W - MARGIN_R;
    let y0 = SVG_H - MARGIN_B;
    let y1 = MARGIN_T;
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for t in ys.ticks() {
        let py = ys.map(t);
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            fmt_num(t)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>\n",
        (x0 + x1) / 2.0,
        SVG_H - 12.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));
}

fn emit_curve_svg(x_label: &str, y_label: &str, series: &[CurveSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::SchemaError("curve plot has no series".into()));
    }
    for s in series {
        if s.points.len() < 2 {
            return Err(Error::SchemaError(format!(
                "series '{}' needs at least two points",
                s.name
            )));
        }
        if s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::SchemaError(format!(
                "series '{}' contains non-finite coordinates",
                s.name
            )));
        }
    }
    let xs_all: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let ys_all: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let fold = |v: &[f64], init: f64, f: fn(f64, f64) -> f64| v.iter().copied().fold(init, f);
    let xs = Scale::new(
        fold(&xs_all, f64::INFINITY, f64::min),
        fold(&xs_all, f64::NEG_INFINITY, f64::max),
        MARGIN_L,
        SVG_W - MARGIN_R,
    );
    let ys = Scale::new(
        fold(&ys_all, f64::INFINITY, f64::min),
        fold(&ys_all, f64::NEG_INFINITY, f64::max),
        SVG_H - MARGIN_B,
        MARGIN_T,
    );
    let mut out = String::new();
    svg_header(&mut out);
    svg_axes(&mut out, x_label, y_label, &ys);
    for t in xs.ticks() {
        let px = xs.map(t);
        let y0 = SVG_H - MARGIN_B;
        out.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{y0}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
             <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 5.0,
            y0 + 18.0,
            fmt_num(t)
        ));
    }
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", xs.map(*x), ys.map(*y)))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\">{}</text>\n",
            SVG_W - MARGIN_R - 150.0,
            MARGIN_T + 16.0 * (k as f64 + 1.0),
            s.name
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn emit_box_svg(x_label: &str, y_label: &str, groups: &[BoxGroup]) -> Result<String> {
    if groups.is_empty() {
        return Err(Error::SchemaError("boxplot has no groups".into()));
    }
    for g in groups {
        let s = &g.stats;
        let vals = [s.lo_whisker, s.q1, s.median, s.q3, s.hi_whisker];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::SchemaError(format!(
                "box '{}' contains non-finite statistics",
                g.name
            )));
        }
        if !(s.lo_whisker <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.hi_whisker)
        {
            return Err(Error::SchemaError(format!(
                "box '{}' statistics are not ordered",
                g.name
            )));
        }
    }
    let lo = groups.iter().map(|g| g.stats.lo_whisker).fold(f64::INFINITY, f64::min);
    let hi = groups
        .iter()
        .map(|g| g.stats.hi_whisker)
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo).max(1e-12);
    let ys = Scale::new(lo - pad, hi + pad, SVG_H - MARGIN_B, MARGIN_T);
    let mut out = String::new();
    svg_header(&mut out);
    svg_axes(&mut out, x_label, y_label, &ys);
    let m = groups.len() as f64;
    let span = SVG_W - MARGIN_L - MARGIN_R;
    let slot = span / m;
    let box_w = (0.5 * slot).min(80.0);
    for (k, g) in groups.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let cx = MARGIN_L + slot * (k as f64 + 0.5);
        let s = &g.stats;
        let (y_lo, y_q1, y_med, y_q3, y_hi) = (
            ys.map(s.lo_whisker),
            ys.map(s.q1),
            ys.map(s.median),
            ys.map(s.q3),
            ys.map(s.hi_whisker),
        );
        let half = box_w / 2.0;
        out.push_str(&format!("<g class=\"box\" data-name=\"{}\">\n", g.name));
        out.push_str(&format!(
            "<line x1=\"{cx:.2}\" y1=\"{y_lo:.2}\" x2=\"{cx:.2}\" y2=\"{y_q1:.2}\" stroke=\"black\"/>\n\
             <line x1=\"{cx:.2}\" y1=\"{y_q3:.2}\" x2=\"{cx:.2}\" y2=\"{y_hi:.2}\" stroke=\"black\"/>\n\
             <line x1=\"{:.2}\" y1=\"{y_lo:.2}\" x2=\"{:.2}\" y2=\"{y_lo:.2}\" stroke=\"black\"/>\n\
             <line x1=\"{:.2}\" y1=\"{y_hi:.2}\" x2=\"{:.2}\" y2=\"{y_hi:.2}\" stroke=\"black\"/>\n",
            cx - half / 2.0,
            cx + half / 2.0,
            cx - half / 2.0,
            cx + half / 2.0
        ));
        out.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{y_q3:.2}\" width=\"{box_w:.2}\" height=\"{:.2}\" \
             fill=\"{color}\" fill-opacity=\"0.35\" stroke=\"black\"/>\n",
            cx - half,
            (y_q1 - y_q3).abs()
        ));
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y_med:.2}\" x2=\"{:.2}\" y2=\"{y_med:.2}\" \
             stroke=\"black\" stroke-width=\"2\"/>\n",
            cx - half,
            cx + half
        ));
        out.push_str(&format!(
            "<text x=\"{cx:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            SVG_H - MARGIN_B + 18.0,
            g.name
        ));
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Render a plot to a self-contained SVG document.
pub fn emit_plot(plot: &PlotData) -> Result<String> {
    match plot {
        PlotData::Curve {
            x_label,
            y_label,
            series,
        } => emit_curve_svg(x_label, y_label, series),
        PlotData::Box {
            x_label,
            y_label,
            groups,
        } => emit_box_svg(x_label, y_label, groups),
    }
}

/// Render a plot and write it to `path`.
pub fn write_plot(plot: &PlotData, path: &Path) -> Result<()> {
    let svg = emit_plot(plot)?;
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_named_column_with_header() {
        let f = write_temp("id,bmi\n1,21.5\n2,22.0\n3,23.5\n");
        let d = load_column(f.path(), &ColumnSpec::Name("bmi".into()), b',').unwrap();
        assert_eq!(d.values(), &[21.5, 22.0, 23.5]);
        assert_eq!(d.label, "bmi");
    }

    #[test]
    fn loads_indexed_column_without_header() {
        let f = write_temp("1.5,10\n2.5,20\n3.5,30\n");
        let d = load_column(f.path(), &ColumnSpec::Index(1), b',').unwrap();
        assert_eq!(d.values(), &[10.0, 20.0, 30.0]);
    }

    #[test]
    fn trailing_blank_line_changes_nothing() {
        let a = write_temp("bmi\n21.5\n22.0\n23.5\n");
        let b = write_temp("bmi\n21.5\n22.0\n23.5\n\n");
        let da = load_column(a.path(), &ColumnSpec::Index(0), b',').unwrap();
        let db = load_column(b.path(), &ColumnSpec::Index(0), b',').unwrap();
        assert_eq!(da.values(), db.values());
    }

    #[test]
    fn two_values_are_insufficient() {
        let f = write_temp("bmi\n21.5\n22.0\n");
        assert!(matches!(
            load_column(f.path(), &ColumnSpec::Name("bmi".into()), b','),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let f = write_temp("bmi\n21.5\n22.0\n23.0\n");
        assert!(matches!(
            load_column(f.path(), &ColumnSpec::Name("weight".into()), b','),
            Err(Error::SchemaError(_))
        ));
    }

    #[test]
    fn non_numeric_cell_reports_its_row() {
        let f = write_temp("bmi\n21.5\noops\n23.0\n");
        match load_column(f.path(), &ColumnSpec::Name("bmi".into()), b',') {
            Err(Error::ParseError { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn ais_file_has_one_hundred_rows() {
        let path = std::path::Path::new(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/ais_female_bmi.csv"
        ));
        let d = load_column(path, &ColumnSpec::Name("bmi".into()), b',').unwrap();
        assert_eq!(d.len(), 100);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let values = vec![21.5, -0.1234567890123456, 1e-8, 3.0, 9871.25];
        let d = Dataset::new(values.clone(), "col").unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&d, &mut buf).unwrap();
        let f = write_temp(std::str::from_utf8(&buf).unwrap());
        let d2 = load_column(f.path(), &ColumnSpec::Name("col".into()), b',').unwrap();
        assert_eq!(d2.values(), values.as_slice());
    }

    #[test]
    fn no_outliers_in_a_tight_sample() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], "t").unwrap();
        let r = mad_outliers(&d, DEFAULT_MAD_THRESHOLD).unwrap();
        assert!(r.indices.is_empty());
        assert_eq!(r.median, 3.0);
    }

    #[test]
    fn zero_mad_is_degenerate() {
        let mut v = vec![0.0; 20];
        v.push(100.0);
        let d = Dataset::new(v, "deg").unwrap();
        assert!(matches!(
            mad_outliers(&d, 3.0),
            Err(Error::DegenerateSpread)
        ));
    }

    #[test]
    fn ais_has_exactly_one_outlier_above_thirty() {
        let path = std::path::Path::new(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/ais_female_bmi.csv"
        ));
        let d = load_column(path, &ColumnSpec::Name("bmi".into()), b',').unwrap();
        let r = mad_outliers(&d, DEFAULT_MAD_THRESHOLD).unwrap();
        assert_eq!(r.indices.len(), 1);
        assert!(r.flagged_values[0] > 30.0);
        let cleaned = remove_outliers(&d, &r).unwrap();
        assert_eq!(cleaned.len(), 99);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mad_flags_are_affine_invariant(
            mut values in proptest::collection::vec(-50.0f64..50.0, 5..40),
            scale in prop_oneof![(-4.0f64..-0.2), (0.2f64..4.0)],
            shift in -30.0f64..30.0,
        ) {
            values[0] += 300.0; // ensure a spread-out sample with a likely flag
            let d = Dataset::new(values.clone(), "a").unwrap();
            let base = match mad_outliers(&d, 3.0) {
                Ok(r) => r,
                Err(_) => return Ok(()), // degenerate spread: nothing to compare
            };
            let mapped: Vec<f64> = values.iter().map(|v| scale * v + shift).collect();
            let d2 = Dataset::new(mapped, "b").unwrap();
            let r2 = mad_outliers(&d2, 3.0).unwrap();
            prop_assert_eq!(base.indices, r2.indices);
        }

        #[test]
        fn mad_flagged_set_is_permutation_invariant(
            values in proptest::collection::vec(-50.0f64..50.0, 5..30),
        ) {
            let d = Dataset::new(values.clone(), "a").unwrap();
            let base = match mad_outliers(&d, 2.0) {
                Ok(r) => r,
                Err(_) => return Ok(()),
            };
            let mut rev = values.clone();
            rev.reverse();
            let d2 = Dataset::new(rev.clone(), "b").unwrap();
            let r2 = mad_outliers(&d2, 2.0).unwrap();
            let mut a: Vec<f64> = base.flagged_values.clone();
            let mut b: Vec<f64> = r2.flagged_values.clone();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn curve_svg_has_one_polyline_per_series() {
        let plot = PlotData::Curve {
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![
                CurveSeries {
                    name: "a".into(),
                    points: (0..100).map(|i| (i as f64, (i as f64).sin())).collect(),
                },
                CurveSeries {
                    name: "b".into(),
                    points: (0..100).map(|i| (i as f64, (i as f64).cos())).collect(),
                },
            ],
        };
        let svg = emit_plot(&plot).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn boxplot_svg_has_one_group_per_box() {
        let stats = BoxStats {
            lo_whisker: 0.1,
            q1: 0.3,
            median: 0.5,
            q3: 0.7,
            hi_whisker: 0.9,
        };
        let plot = PlotData::Box {
            x_label: "prior".into(),
            y_label: "posterior probability".into(),
            groups: vec![
                BoxGroup { name: "jeffreys_t".into(), stats: stats.clone() },
                BoxGroup { name: "moomin_approx".into(), stats: stats.clone() },
                BoxGroup { name: "dimom".into(), stats },
            ],
        };
        let svg = emit_plot(&plot).unwrap();
        assert_eq!(svg.matches("<g class=\"box\"").count(), 3);
    }

    #[test]
    fn empty_tables_are_schema_errors() {
        let plot = PlotData::Curve {
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![],
        };
        assert!(matches!(emit_plot(&plot), Err(Error::SchemaError(_))));
        let plot = PlotData::Box {
            x_label: "x".into(),
            y_label: "y".into(),
            groups: vec![],
        };
        assert!(matches!(emit_plot(&plot), Err(Error::SchemaError(_))));
    }

    #[test]
    fn plot_emission_is_deterministic() {
        let plot = PlotData::Curve {
            x_label: "shape".into(),
            y_label: "density".into(),
            series: vec![CurveSeries {
                name: "prior".into(),
                points: (0..50).map(|i| (i as f64 / 10.0, (i as f64 / 10.0).exp())).collect(),
            }],
        };
        assert_eq!(emit_plot(&plot).unwrap(), emit_plot(&plot).unwrap());
    }
}
