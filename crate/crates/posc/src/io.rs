//! File formats shared by the library and the command line tool.
//!
//! - 1-D fields: CSV with an `x,value` header; the cell spacing is inferred
//!   from the coordinates on read.
//! - 2-D fields: CSV grid, row-major, with a geometry header line
//!   `# h=<h> rows=<lo>:<hi> cols=<lo>:<hi>`.
//! - Images and 2-D masks: ASCII PGM (P2), with a JSON sidecar `<file>.json`
//!   recording grid geometry and, for fields, the linear value scaling, so a
//!   read/write round trip is byte-exact.
//! - 1-D regions: run-length CSV with a `start,end` header (inclusive index
//!   runs).
//! - Problems, reports, and run manifests: JSON with a fixed field order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{dilate, Lattice, Region};
use crate::oscillation::OscParams;
use crate::solver::DirichletProblem;

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes a 1-D field as `x,value` rows.
pub fn write_field_csv_1d(u: &ScalarField, path: &Path) -> Result<()> {
    if u.lattice().dim() != 1 {
        return Err(Error::InvalidParameter("x,value CSV is for 1-D fields".into()));
    }
    let mut out = String::from("x,value\n");
    for (c, v) in u.iter() {
        let [x, _] = u.lattice().coord(c);
        writeln!(out, "{x},{v}").unwrap();
    }
    write_string(path, &out)
}

/// Reads a 1-D field from `x,value` rows, inferring the cell spacing as the
/// smallest coordinate gap. Coordinates must sit on that grid to within one
/// part in 10^6 of h.
pub fn read_field_csv_1d(path: &Path) -> Result<ScalarField> {
    let text = read_to_string(path)?;
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with('x')) {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(xs), Some(vs), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(path, format!("line {}: expected `x,value`", lineno + 1)));
        };
        let x: f64 = xs.trim().parse().map_err(|_| {
            Error::parse(path, format!("line {}: bad coordinate {xs:?}", lineno + 1))
        })?;
        let v: f64 = vs.trim().parse().map_err(|_| {
            Error::parse(path, format!("line {}: bad value {vs:?}", lineno + 1))
        })?;
        pairs.push((x, v));
    }
    if pairs.len() < 2 {
        return Err(Error::parse(path, "need at least two samples to infer the spacing"));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let h0 = pairs
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !h0.is_finite() {
        return Err(Error::parse(path, "duplicate coordinates; cannot infer spacing"));
    }
    // refine the single-gap estimate over the whole span, so that rounding
    // noise in individual coordinates does not shift the grid
    let span_cells = ((pairs.last().unwrap().0 - pairs[0].0) / h0).round();
    let h = (pairs.last().unwrap().0 - pairs[0].0) / span_cells;
    let mut cells = Vec::with_capacity(pairs.len());
    for &(x, _) in &pairs {
        let i = (x / h).round();
        if (x - i * h).abs() > 1e-6 * h {
            return Err(Error::parse(path, format!("coordinate {x} is off the inferred grid h = {h}")));
        }
        cells.push([i as i64, 0]);
    }
    let lo = cells.iter().map(|c| c[0]).min().unwrap();
    let hi = cells.iter().map(|c| c[0]).max().unwrap();
    let lat = Lattice::line(h, lo, hi)?;
    let support = Region::from_cells(&lat, cells.iter().copied())?;
    if support.count() != pairs.len() {
        return Err(Error::parse(path, "coordinates collide on the inferred grid"));
    }
    // from_values expects raster order; pairs are sorted by x already
    ScalarField::from_values(&support, pairs.iter().map(|&(_, v)| v))
}

/// Bounding box of a region's cells; errors when the region does not fill it.
fn full_rectangle(support: &Region) -> Result<((i64, i64), (i64, i64))> {
    let rows_lo = support.cells().map(|c| c[0]).min();
    let rows_hi = support.cells().map(|c| c[0]).max();
    let cols_lo = support.cells().map(|c| c[1]).min();
    let cols_hi = support.cells().map(|c| c[1]).max();
    let (Some(a), Some(b), Some(c), Some(d)) = (rows_lo, rows_hi, cols_lo, cols_hi) else {
        return Err(Error::InvalidParameter("empty support".into()));
    };
    let rect = ((b - a + 1) * (d - c + 1)) as usize;
    if rect != support.count() {
        return Err(Error::InvalidParameter(
            "grid serialization needs a full rectangular support".into(),
        ));
    }
    Ok(((a, b), (c, d)))
}

/// Writes a 2-D field as a row-major value grid with a geometry header.
pub fn write_field_csv_2d(u: &ScalarField, path: &Path) -> Result<()> {
    if u.lattice().dim() != 2 {
        return Err(Error::InvalidParameter("grid CSV is for 2-D fields".into()));
    }
    let (rows, cols) = full_rectangle(u.support())?;
    let h = u.lattice().h();
    let mut out = format!("# h={h} rows={}:{} cols={}:{}\n", rows.0, rows.1, cols.0, cols.1);
    for i in rows.0..=rows.1 {
        let mut first = true;
        for j in cols.0..=cols.1 {
            if !first {
                out.push(',');
            }
            write!(out, "{}", u.value([i, j])?).unwrap();
            first = false;
        }
        out.push('\n');
    }
    write_string(path, &out)
}

fn parse_range(path: &Path, token: &str, key: &str) -> Result<(i64, i64)> {
    let body = token.strip_prefix(key).and_then(|t| t.strip_prefix('='));
    let Some(body) = body else {
        return Err(Error::parse(path, format!("header: expected `{key}=<lo>:<hi>`, got {token:?}")));
    };
    let mut it = body.split(':');
    let (Some(lo), Some(hi), None) = (it.next(), it.next(), it.next()) else {
        return Err(Error::parse(path, format!("header: bad range in {token:?}")));
    };
    match (lo.parse(), hi.parse()) {
        (Ok(lo), Ok(hi)) => Ok((lo, hi)),
        _ => Err(Error::parse(path, format!("header: bad range in {token:?}"))),
    }
}

/// Reads a 2-D field written by [`write_field_csv_2d`].
pub fn read_field_csv_2d(path: &Path) -> Result<ScalarField> {
    let text = read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let tokens: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
    let [h_tok, rows_tok, cols_tok] = tokens.as_slice() else {
        return Err(Error::parse(path, "first line must be `# h=<h> rows=<lo>:<hi> cols=<lo>:<hi>`"));
    };
    let h: f64 = h_tok
        .strip_prefix("h=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(path, format!("header: bad spacing in {h_tok:?}")))?;
    let rows = parse_range(path, rows_tok, "rows")?;
    let cols = parse_range(path, cols_tok, "cols")?;
    let lat = Lattice::grid(h, rows, cols)?;
    let mut values = Vec::with_capacity(lat.len());
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split(',') {
            let v: f64 = tok.trim().parse().map_err(|_| {
                Error::parse(path, format!("line {}: bad value {tok:?}", lineno + 2))
            })?;
            values.push(v);
        }
    }
    if values.len() != lat.len() {
        return Err(Error::parse(
            path,
            format!("expected {} values for the declared extents, found {}", lat.len(), values.len()),
        ));
    }
    ScalarField::from_values(&Region::full(&lat), values)
}

/// Grid geometry and value scaling recorded next to every PGM file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PgmMeta {
    pub h: f64,
    pub rows: (i64, i64),
    pub cols: (i64, i64),
    /// Value scaling for fields: gray g maps to
    /// `vmin + g * (vmax - vmin) / maxval`. Absent for masks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vmin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vmax: Option<f64>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

fn write_pgm_raw(path: &Path, width: usize, height: usize, maxval: u32, grays: &[u32]) -> Result<()> {
    let mut out = format!("P2\n{width} {height}\n{maxval}\n");
    for row in grays.chunks(width) {
        let mut first = true;
        for &g in row {
            if !first {
                out.push(' ');
            }
            write!(out, "{g}").unwrap();
            first = false;
        }
        out.push('\n');
    }
    write_string(path, &out)
}

fn read_pgm_raw(path: &Path) -> Result<(usize, usize, u32, Vec<u32>)> {
    let text = read_to_string(path)?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace().map(str::to_owned))
        .collect::<Vec<_>>()
        .into_iter();
    if tokens.next().as_deref() != Some("P2") {
        return Err(Error::parse(path, "not an ASCII PGM (missing P2 magic)"));
    }
    let mut next_int = |what: &str| -> Result<u32> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(path, format!("missing or bad {what}")))
    };
    let width = next_int("width")? as usize;
    let height = next_int("height")? as usize;
    let maxval = next_int("maxval")?;
    let mut grays = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        grays.push(next_int("pixel")?);
    }
    if tokens.next().is_some() {
        return Err(Error::parse(path, "trailing data after pixel raster"));
    }
    Ok((width, height, maxval, grays))
}

fn read_sidecar(path: &Path) -> Result<PgmMeta> {
    let sp = sidecar_path(path);
    let text = read_to_string(&sp)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(&sp, e.to_string()))
}

/// Writes a 2-D region as a 0/255 PGM mask over its lattice extents, plus a
/// geometry sidecar.
pub fn write_region_pgm(region: &Region, path: &Path) -> Result<()> {
    let lat = region.lattice();
    if lat.dim() != 2 {
        return Err(Error::InvalidParameter("PGM masks are for 2-D regions".into()));
    }
    let [rows, cols] = lat.extents();
    let width = (cols.1 - cols.0 + 1) as usize;
    let height = (rows.1 - rows.0 + 1) as usize;
    let grays: Vec<u32> = lat.cells().map(|c| if region.contains(c) { 255 } else { 0 }).collect();
    write_pgm_raw(path, width, height, 255, &grays)?;
    let meta = PgmMeta { h: lat.h(), rows, cols, vmin: None, vmax: None };
    write_json(&meta, &sidecar_path(path))
}

/// Reads a 2-D region mask written by [`write_region_pgm`]: pixels above
/// half of maxval are in the region.
pub fn read_region_pgm(path: &Path) -> Result<Region> {
    let (width, height, maxval, grays) = read_pgm_raw(path)?;
    let meta = read_sidecar(path)?;
    let lat = Lattice::grid(meta.h, meta.rows, meta.cols)?;
    if lat.len() != width * height {
        return Err(Error::parse(path, "sidecar extents do not match the pixel raster"));
    }
    let cells: Vec<_> = lat
        .cells()
        .enumerate()
        .filter(|&(i, _)| 2 * grays[i] > maxval)
        .map(|(_, c)| c)
        .collect();
    Region::from_cells(&lat, cells)
}

/// Writes a 2-D field as a PGM image: values linearly scaled to `0..=maxval`,
/// with the scaling recorded in the sidecar. The support must be a full
/// rectangle.
pub fn write_field_pgm(u: &ScalarField, path: &Path, maxval: u32) -> Result<()> {
    if u.lattice().dim() != 2 {
        return Err(Error::InvalidParameter("PGM images are for 2-D fields".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::InvalidParameter(format!("PGM maxval must be in 1..=65535, got {maxval}")));
    }
    let (rows, cols) = full_rectangle(u.support())?;
    let vmin = u.min();
    let vmax = u.max();
    let scale = if vmax > vmin { maxval as f64 / (vmax - vmin) } else { 0.0 };
    let width = (cols.1 - cols.0 + 1) as usize;
    let height = (rows.1 - rows.0 + 1) as usize;
    let mut grays = Vec::with_capacity(width * height);
    for i in rows.0..=rows.1 {
        for j in cols.0..=cols.1 {
            grays.push(((u.value([i, j])? - vmin) * scale).round() as u32);
        }
    }
    write_pgm_raw(path, width, height, maxval, &grays)?;
    let meta = PgmMeta { h: u.lattice().h(), rows, cols, vmin: Some(vmin), vmax: Some(vmax) };
    write_json(&meta, &sidecar_path(path))
}

/// Reads a 2-D field written by [`write_field_pgm`], mapping gray levels back
/// through the sidecar scaling.
pub fn read_field_pgm(path: &Path) -> Result<ScalarField> {
    let (width, height, maxval, grays) = read_pgm_raw(path)?;
    let meta = read_sidecar(path)?;
    let (vmin, vmax) = match (meta.vmin, meta.vmax) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::parse(path, "sidecar lacks the vmin/vmax value scaling")),
    };
    let lat = Lattice::grid(meta.h, meta.rows, meta.cols)?;
    if lat.len() != width * height {
        return Err(Error::parse(path, "sidecar extents do not match the pixel raster"));
    }
    let span = vmax - vmin;
    ScalarField::from_values(
        &Region::full(&lat),
        grays.iter().map(|&g| vmin + g as f64 * span / maxval as f64),
    )
}

/// Writes a 1-D region as inclusive `start,end` index runs.
pub fn write_region_rle_csv(region: &Region, path: &Path) -> Result<()> {
    if region.lattice().dim() != 1 {
        return Err(Error::InvalidParameter("run-length CSV is for 1-D regions".into()));
    }
    let mut out = String::from("start,end\n");
    let mut current: Option<(i64, i64)> = None;
    for c in region.cells() {
        match current {
            Some((s, e)) if c[0] == e + 1 => current = Some((s, c[0])),
            Some((s, e)) => {
                writeln!(out, "{s},{e}").unwrap();
                current = Some((c[0], c[0]));
            }
            None => current = Some((c[0], c[0])),
        }
    }
    if let Some((s, e)) = current {
        writeln!(out, "{s},{e}").unwrap();
    }
    write_string(path, &out)
}

/// Reads inclusive `start,end` index runs into a region on `lattice`.
pub fn read_region_rle_csv(path: &Path, lattice: &Lattice) -> Result<Region> {
    if lattice.dim() != 1 {
        return Err(Error::InvalidParameter("run-length CSV is for 1-D regions".into()));
    }
    let text = read_to_string(path)?;
    let mut cells = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with("start")) {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(ss), Some(es), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(path, format!("line {}: expected `start,end`", lineno + 1)));
        };
        let (Ok(s), Ok(e)) = (ss.trim().parse::<i64>(), es.trim().parse::<i64>()) else {
            return Err(Error::parse(path, format!("line {}: bad run indices", lineno + 1)));
        };
        if s > e {
            return Err(Error::parse(path, format!("line {}: run {s}..{e} is empty", lineno + 1)));
        }
        cells.extend((s..=e).map(|i| [i, 0]));
    }
    Region::from_cells(lattice, cells)
}

/// Domain of a Dirichlet problem, in physical coordinates or as a mask file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum DomainSpec {
    /// Open interval `(a, b)` on a 1-D lattice.
    Interval { a: f64, b: f64 },
    /// Open disk on a 2-D lattice.
    Disk { cx: f64, cy: f64, radius: f64 },
    /// PGM mask path, relative to the problem file.
    MaskPgm { path: String },
}

/// A Dirichlet problem on disk: geometry, parameters, and the path to the
/// boundary data field (CSV in 1-D, CSV grid or PGM in 2-D).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dim: usize,
    pub h: f64,
    pub r: f64,
    pub p: f64,
    pub domain: DomainSpec,
    /// Path to the data field, relative to the problem file.
    pub data: String,
}

pub fn read_problem_spec(path: &Path) -> Result<ProblemSpec> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

/// Reads a field by extension: `.pgm` via the sidecar scaling, anything else
/// as CSV of the given dimension.
pub fn read_field_auto(path: &Path, dim: usize) -> Result<ScalarField> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
        read_field_pgm(path)
    } else if dim == 1 {
        read_field_csv_1d(path)
    } else {
        read_field_csv_2d(path)
    }
}

/// Assembles the in-memory problem: loads the data field, builds the domain
/// region on its lattice, and restricts the data to `Ω ⊕ B_r`.
pub fn build_problem(spec: &ProblemSpec, base: &Path) -> Result<DirichletProblem> {
    let data = read_field_auto(&base.join(&spec.data), spec.dim)?;
    let lat = data.lattice().clone();
    if lat.dim() != spec.dim {
        return Err(Error::InvalidParameter(format!(
            "data field is {}-dimensional but the problem declares dim = {}",
            lat.dim(),
            spec.dim
        )));
    }
    if (lat.h() - spec.h).abs() > 1e-9 * spec.h {
        return Err(Error::InvalidParameter(format!(
            "data field spacing {} does not match the declared h = {}",
            lat.h(),
            spec.h
        )));
    }
    let omega = match &spec.domain {
        DomainSpec::Interval { a, b } => Region::interval(&lat, *a, *b)?,
        DomainSpec::Disk { cx, cy, radius } => Region::disk(&lat, *cx, *cy, *radius)?,
        DomainSpec::MaskPgm { path } => {
            let mask = read_region_pgm(&base.join(path))?;
            if mask.lattice() != &lat {
                return Err(Error::InvalidParameter(
                    "mask lattice does not match the data field lattice".into(),
                ));
            }
            mask
        }
    };
    let params = OscParams::new(spec.r, spec.p, spec.h, spec.dim)?;
    let dilated = dilate(&omega, params.stencil())?;
    let trimmed = data.restrict(&dilated.intersection(data.support()))?;
    DirichletProblem::new(omega, trimmed, params)
}

/// Summary of a solve, serialized next to the result field. Wall time is
/// deliberately excluded so identical runs produce identical bytes.
#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub final_energy: f64,
    pub iterations: usize,
    pub termination: crate::solver::Termination,
    pub energy_trace: Vec<f64>,
}

/// Everything needed to reproduce a run, serialized alongside every output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

/// Pretty-printed JSON with a trailing newline; field order fixed by the
/// struct definitions, so output is deterministic.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    text.push('\n');
    write_string(path, &text)
}
