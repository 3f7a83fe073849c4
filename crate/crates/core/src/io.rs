//! CSV datasets, index lists and SVG scatterplots.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{normalize_points, LabeledDataset, SampleIndexSet};
use crate::error::{Error, Result};
use crate::rng::Seed;

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Reads an `x,y,label` file. Labels are arbitrary strings mapped to class
/// ids in order of first appearance; coordinates are min-max normalized.
pub fn load_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_csv(&text, path)
}

fn parse_csv(text: &str, path: &Path) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(parse_err(path, 1, "empty file"));
    }
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| parse_err(path, 1, format!("missing column `{name}`")))
    };
    let (cx, cy, cl) = (col("x")?, col("y")?, col("label")?);

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, u32> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |c: usize, name: &str| {
            rec.get(c)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| parse_err(path, line, format!("missing `{name}` value")))
        };
        let num = |c: usize, name: &str| -> Result<f64> {
            let s = field(c, name)?;
            let v: f64 = s
                .parse()
                .map_err(|_| parse_err(path, line, format!("`{name}` is not a number: {s:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, format!("`{name}` is not finite")));
            }
            Ok(v)
        };
        xs.push(num(cx, "x")?);
        ys.push(num(cy, "y")?);
        let label = field(cl, "label")?;
        let id = *ids.entry(label.to_string()).or_insert_with(|| {
            names.push(label.to_string());
            (names.len() - 1) as u32
        });
        labels.push(id);
    }
    if xs.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    LabeledDataset::new(normalize_points(&xs, &ys)?, labels)?.with_class_names(names)
}

/// Writes `ds` (or the rows in `subset`) as `x,y,label`, using the stored
/// class names when there are any.
pub fn write_csv(path: impl AsRef<Path>, ds: &LabeledDataset, subset: Option<&SampleIndexSet>) -> Result<()> {
    fs::write(path, csv_string(ds, subset)?)?;
    Ok(())
}

pub fn csv_string(ds: &LabeledDataset, subset: Option<&SampleIndexSet>) -> Result<String> {
    if let Some(s) = subset {
        if let Some(&last) = s.as_slice().last() {
            if last >= ds.len() {
                return Err(Error::IndexOutOfRange { index: last, len: ds.len() });
            }
        }
    }
    let mut out = String::from("x,y,label\n");
    let mut row = |i: usize| {
        let [x, y] = ds.points().point(i);
        let l = ds.label(i);
        match ds.class_names().get(l) {
            Some(name) => writeln!(out, "{x},{y},{}", quote(name)),
            None => writeln!(out, "{x},{y},{l}"),
        }
        .expect("writing to a String");
    };
    match subset {
        Some(s) => s.iter().for_each(&mut row),
        None => (0..ds.len()).for_each(&mut row),
    }
    Ok(out)
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.trim() != s {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One index per line.
pub fn write_indices(path: impl AsRef<Path>, set: &SampleIndexSet) -> Result<()> {
    let mut out = String::with_capacity(set.len() * 6);
    for i in set.iter() {
        writeln!(out, "{i}").expect("writing to a String");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads an index list written by [`write_indices`]. Blank lines are
/// skipped.
pub fn read_indices(path: impl AsRef<Path>, universe: usize) -> Result<SampleIndexSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut idx = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        idx.push(
            t.parse::<usize>()
                .map_err(|_| parse_err(path, n + 1, format!("not an index: {t:?}")))?,
        );
    }
    SampleIndexSet::new(idx, universe)
}

/// Boynton's eleven basic colours minus white and black.
pub const BOYNTON: [&str; 9] = [
    "#0000FF", "#FF0000", "#00FF00", "#FFFF00", "#FF00FF", "#FF8080", "#808080", "#800000", "#FF8000",
];

pub const MONOCHROME_FILL: &str = "#404040";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub canvas_px: u32,
    pub point_radius_px: u32,
    pub monochrome: bool,
    pub palette: Vec<String>,
    pub draw_order_seed: Seed,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            canvas_px: 1000,
            point_radius_px: 3,
            monochrome: false,
            palette: BOYNTON.iter().map(|c| c.to_string()).collect(),
            draw_order_seed: Seed(0),
        }
    }
}

/// SVG scatterplot of `sample` (all points when `None`), drawn in a seeded
/// random order with opaque circles.
pub fn render_svg(ds: &LabeledDataset, sample: Option<&SampleIndexSet>, opts: &RenderOptions) -> Result<String> {
    let r = opts.point_radius_px;
    if opts.canvas_px < 2 * r || opts.canvas_px == 0 {
        return Err(Error::invalid(format!(
            "canvas of {} px cannot hold points of radius {r}",
            opts.canvas_px
        )));
    }
    if !opts.monochrome && ds.num_classes() > opts.palette.len() {
        return Err(Error::invalid(format!(
            "{} classes but only {} palette colours",
            ds.num_classes(),
            opts.palette.len()
        )));
    }
    let mut order: Vec<usize> = match sample {
        Some(s) => {
            if let Some(&last) = s.as_slice().last() {
                if last >= ds.len() {
                    return Err(Error::IndexOutOfRange { index: last, len: ds.len() });
                }
            }
            s.as_slice().to_vec()
        }
        None => (0..ds.len()).collect(),
    };
    order.shuffle(&mut opts.draw_order_seed.rng());

    let c = opts.canvas_px;
    let span = (c - 2 * r) as f64;
    let mut svg = String::with_capacity(64 + order.len() * 64);
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#
    )
    .unwrap();
    writeln!(svg, r##"<rect width="{c}" height="{c}" fill="#FFFFFF"/>"##).unwrap();
    for i in order {
        let [x, y] = ds.points().point(i);
        let px = x * span + r as f64;
        let py = (1.0 - y) * span + r as f64;
        let fill = if opts.monochrome {
            MONOCHROME_FILL
        } else {
            opts.palette[ds.label(i)].as_str()
        };
        writeln!(svg, r#"<circle cx="{px:.2}" cy="{py:.2}" r="{r}" fill="{fill}"/>"#).unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PointSet;

    fn load(text: &str) -> Result<LabeledDataset> {
        parse_csv(text, Path::new("mem.csv"))
    }

    #[test]
    fn first_appearance_labels() {
        let ds = load("x,y,label\n0,0,cat\n1,2,dog\n2,1,cat\n").unwrap();
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.class_names(), &["cat".to_string(), "dog".to_string()]);
        assert_eq!(ds.points().point(1), [0.5, 1.0]);
    }

    #[test]
    fn errors_name_the_line() {
        let err = load("x,y,label\n0,0,a\n1,,b\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = load("x,y,label\n0,zz,a\n").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("not a number"), "{err}");
        assert!(load("x,label\n0,a\n").unwrap_err().to_string().contains("missing column `y`"));
        assert!(load("").is_err());
        assert!(load("x,y,label\n").is_err());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ds = load("x,y,label\n0,0,a\n3,1,\"b,c\"\n1,4,a\n2,2,d\n").unwrap();
        write_csv(&path, &ds, None).unwrap();
        assert_eq!(load_csv(&path).unwrap(), ds);

        let idx = SampleIndexSet::new(vec![3, 0], 4).unwrap();
        write_indices(dir.path().join("i.txt"), &idx).unwrap();
        assert_eq!(read_indices(dir.path().join("i.txt"), 4).unwrap(), idx);
        assert!(read_indices(dir.path().join("i.txt"), 2).is_err());
    }

    fn three_class() -> LabeledDataset {
        let ps = PointSet::new(vec![0.0, 0.5, 1.0, 0.2], vec![0.0, 0.5, 1.0, 0.8]).unwrap();
        LabeledDataset::new(ps, vec![0, 1, 2, 1]).unwrap()
    }

    #[test]
    fn svg_basics() {
        let ds = three_class();
        let opts = RenderOptions::default();
        let svg = render_svg(&ds, None, &opts).unwrap();
        assert_eq!(svg.matches("<circle").count(), 4);
        assert_eq!(svg.matches(r#"r="3""#).count(), 4);
        assert!(svg.contains(r#"cx="3.00" cy="997.00""#));
        assert!(svg.contains(r#"cx="997.00" cy="3.00""#));
        assert!(!svg.contains("opacity"));
        assert_eq!(svg, render_svg(&ds, None, &opts).unwrap());

        let empty = render_svg(&ds, Some(&SampleIndexSet::default()), &opts).unwrap();
        assert!(empty.starts_with("<svg") && empty.trim_end().ends_with("</svg>"));
        assert_eq!(empty.matches("<circle").count(), 0);
    }

    #[test]
    fn svg_monochrome_and_palette_limits() {
        let ds = three_class();
        let mono = RenderOptions { monochrome: true, ..Default::default() };
        let svg = render_svg(&ds, None, &mono).unwrap();
        assert_eq!(svg.matches(MONOCHROME_FILL).count(), 4);
        let short = RenderOptions { palette: vec!["#000000".into()], ..Default::default() };
        assert!(render_svg(&ds, None, &short).is_err());
        let short_mono = RenderOptions { monochrome: true, ..short };
        assert!(render_svg(&ds, None, &short_mono).is_ok());
    }
}
