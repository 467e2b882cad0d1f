//! CSV writers and readers. Floats carry 17 significant digits so that a
//! written value parses back to the same `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::ConfluenceSeries;
use crate::mesh::{Mesh, ScalarField};
use crate::sensitivity::{ActiveSubspaceResult, MethodComparison, SobolResult, SobolStudy};
use crate::stepper::{FieldState, TrajectoryRecord};

pub const TRAJECTORY_HEADER: &str = "t,confluence,energy,mass,gs_iterations";
pub const VELOCITY_HEADER: &str = "cell_index,centroid_x,centroid_y,vx,vy,p";
pub const SOBOL_HEADER: &str = "parameter,S_i,S_Ti";
pub const ACTIVITY_HEADER: &str = "parameter,activity,relative_activity";

/// Shortest round-trip-safe fixed layout: 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct Table {
    out: csv::Writer<BufWriter<File>>,
    path: std::path::PathBuf,
}

impl Table {
    fn create(path: &Path, header: &str) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut t = Self {
            out: csv::WriterBuilder::new().from_writer(BufWriter::new(file)),
            path: path.to_path_buf(),
        };
        t.row(header.split(','))?;
        Ok(t)
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.out.write_record(fields).map_err(|e| self.csv_error(e))
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }

    fn csv_error(&self, e: csv::Error) -> Error {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(&self.path, io),
            other => Error::Parse {
                path: self.path.clone(),
                message: format!("{other:?}"),
            },
        }
    }
}

pub fn write_trajectory(records: &[TrajectoryRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::create(path.as_ref(), TRAJECTORY_HEADER)?;
    for r in records {
        t.row([
            format_float(r.t),
            format_float(r.confluence),
            format_float(r.energy),
            format_float(r.mass),
            r.gs_iterations.to_string(),
        ])?;
    }
    t.finish()
}

fn snapshot_header(dim: usize) -> &'static str {
    if dim == 2 {
        "vertex_index,x,y,value"
    } else {
        "vertex_index,x,value"
    }
}

/// Nodal values of `field`, one row per vertex in index order.
pub fn write_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let mesh = field.mesh();
    let dim = mesh.dim();
    let mut t = Table::create(path.as_ref(), snapshot_header(dim))?;
    for (i, (x, v)) in mesh.vertices().iter().zip(field.values()).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(x[..dim].iter().map(|c| format_float(*c)));
        row.push(format_float(*v));
        t.row(row)?;
    }
    t.finish()
}

/// Tumor volume fraction of `state`.
pub fn write_snapshot(state: &FieldState, path: impl AsRef<Path>) -> Result<()> {
    write_field(&state.phi_t, path)
}

/// Per-cell velocity mean and pressure.
pub fn write_velocity(state: &FieldState, path: impl AsRef<Path>) -> Result<()> {
    let mesh = state.mesh();
    let mut t = Table::create(path.as_ref(), VELOCITY_HEADER)?;
    let p = state.pressure.values();
    for c in 0..mesh.n_cells() {
        let x = mesh.cell_centroid(c);
        let v = state.velocity.cell_mean(c);
        t.row([
            c.to_string(),
            format_float(x[0]),
            format_float(x[1]),
            format_float(v[0]),
            format_float(v[1]),
            format_float(p[c]),
        ])?;
    }
    t.finish()
}

/// A snapshot read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub coordinates: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

impl Snapshot {
    /// The values as a field on `mesh`, which must have the same vertices.
    pub fn into_field(self, mesh: std::sync::Arc<Mesh>) -> Result<ScalarField> {
        if mesh.vertices().len() != self.coordinates.len()
            || mesh.vertices().iter().zip(&self.coordinates).any(|(a, b)| a != b)
        {
            return Err(Error::Dimension("snapshot vertices differ from the mesh".into()));
        }
        ScalarField::new(mesh, self.values)
    }
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Reader::from_reader(file))
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut r = open(path)?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| parse_error(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| parse_error(path, e.to_string()))?;
    Ok((header, rows))
}

fn number(path: &Path, row: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| parse_error(path, format!("line {}: {field:?} is not a number", row + 2)))
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    let (header, rows) = read_rows(path)?;
    let dim = match header.join(",").as_str() {
        h if h == snapshot_header(1) => 1,
        h if h == snapshot_header(2) => 2,
        h => return Err(parse_error(path, format!("unexpected snapshot header {h:?}"))),
    };
    let mut snap = Snapshot {
        coordinates: Vec::with_capacity(rows.len()),
        values: Vec::with_capacity(rows.len()),
    };
    for (i, row) in rows.iter().enumerate() {
        if row.get(0).and_then(|s| s.parse::<usize>().ok()) != Some(i) {
            return Err(parse_error(path, format!("line {}: vertex indices must be 0, 1, 2, ...", i + 2)));
        }
        let mut x = [0.0; 2];
        for (k, xk) in x.iter_mut().enumerate().take(dim) {
            *xk = number(path, i, &row[1 + k])?;
        }
        snap.coordinates.push(x);
        snap.values.push(number(path, i, &row[1 + dim])?);
    }
    Ok(snap)
}

pub fn write_sobol(names: &[&str], result: &SobolResult, path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::create(path.as_ref(), SOBOL_HEADER)?;
    for (i, name) in names.iter().enumerate() {
        t.row([name.to_string(), format_float(result.first_order[i]), format_float(result.total[i])])?;
    }
    t.finish()
}

/// Per-day indices; days without output variance are skipped.
pub fn write_sobol_per_time(names: &[&str], study: &SobolStudy, path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::create(path.as_ref(), "day,parameter,S_i,S_Ti")?;
    for (day, result) in study.days.iter().zip(&study.per_time) {
        let Some(r) = result else { continue };
        for (i, name) in names.iter().enumerate() {
            t.row([
                format_float(*day),
                name.to_string(),
                format_float(r.first_order[i]),
                format_float(r.total[i]),
            ])?;
        }
    }
    t.finish()
}

/// Reads `parameter,S_i,S_Ti` back as `(names, first_order, total)`.
pub fn read_sobol(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<f64>, Vec<f64>)> {
    let path = path.as_ref();
    let (header, rows) = read_rows(path)?;
    if header.join(",") != SOBOL_HEADER {
        return Err(parse_error(path, format!("expected header {SOBOL_HEADER:?}")));
    }
    let mut out = (Vec::new(), Vec::new(), Vec::new());
    for (i, row) in rows.iter().enumerate() {
        out.0.push(row[0].to_string());
        out.1.push(number(path, i, &row[1])?);
        out.2.push(number(path, i, &row[2])?);
    }
    Ok(out)
}

pub fn write_activity(names: &[&str], result: &ActiveSubspaceResult, path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::create(path.as_ref(), ACTIVITY_HEADER)?;
    let rel = result.relative_activity();
    for (i, name) in names.iter().enumerate() {
        t.row([name.to_string(), format_float(result.activity[i]), format_float(rel[i])])?;
    }
    t.finish()
}

/// Reads `parameter,activity,relative_activity` back as `(names, activity)`.
pub fn read_activity(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<f64>)> {
    let path = path.as_ref();
    let (header, rows) = read_rows(path)?;
    if header.join(",") != ACTIVITY_HEADER {
        return Err(parse_error(path, format!("expected header {ACTIVITY_HEADER:?}")));
    }
    let mut out = (Vec::new(), Vec::new());
    for (i, row) in rows.iter().enumerate() {
        out.0.push(row[0].to_string());
        out.1.push(number(path, i, &row[1])?);
    }
    Ok(out)
}

/// One row per eigenpair, largest eigenvalue first.
pub fn write_eigenpairs(names: &[&str], result: &ActiveSubspaceResult, path: impl AsRef<Path>) -> Result<()> {
    let header = format!("index,eigenvalue,{}", names.join(","));
    let mut t = Table::create(path.as_ref(), &header)?;
    for (j, (lambda, w)) in result.eigenvalues.iter().zip(&result.eigenvectors).enumerate() {
        let mut row = vec![j.to_string(), format_float(*lambda)];
        row.extend(w.iter().map(|x| format_float(*x)));
        t.row(row)?;
    }
    t.finish()
}

pub fn write_comparison(cmp: &MethodComparison, path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::create(
        path.as_ref(),
        "parameter,variance_based,activity,variance_rank,activity_rank",
    )?;
    for (i, name) in cmp.names.iter().enumerate() {
        t.row([
            name.clone(),
            format_float(cmp.variance_based[i]),
            format_float(cmp.activity[i]),
            (MethodComparison::rank_of(&cmp.variance_ranking, i) + 1).to_string(),
            (MethodComparison::rank_of(&cmp.activity_ranking, i) + 1).to_string(),
        ])?;
    }
    t.finish()
}

/// Observed and predicted confluence per series and day.
pub fn write_fit(series: &[ConfluenceSeries], predictions: &[Vec<f64>], path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::create(path.as_ref(), "initial_confluence,day,observed,predicted")?;
    for (s, q) in series.iter().zip(predictions) {
        for ((day, d), q) in s.observations.iter().zip(q) {
            t.row([
                format_float(s.initial_confluence),
                format_float(*day),
                format_float(*d),
                format_float(*q),
            ])?;
        }
    }
    t.finish()
}

/// `t,value` pairs, e.g. a shape metric over time.
pub fn write_series(header: &str, rows: &[(f64, f64)], path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::create(path.as_ref(), header)?;
    for (a, b) in rows {
        t.row([format_float(*a), format_float(*b)])?;
    }
    t.finish()
}

/// Writes plain text (reports, serialized configs) creating parent
/// directories.
pub fn write_text(text: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
