//! Plain-text meshes.
//!
//! ```text
//! # comment lines start with '#'
//! tumorsim-mesh <dim> <measure_exponent> <n_vertices> <n_cells>
//! x [y]              one line per vertex
//! i j [k]            one line per cell, 0-based vertex indices
//! ```
//!
//! Boundary vertices are recovered from the connectivity: in 2D the
//! endpoints of edges owned by one triangle, in 1D the endpoints owned by
//! one cell, except the symmetry centre `x = 0` of a radial mesh.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::tables::{format_float, write_text};
use crate::mesh::Mesh;

const MAGIC: &str = "tumorsim-mesh";

pub fn mesh_to_text(mesh: &Mesh) -> String {
    let dim = mesh.dim();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{MAGIC} {dim} {} {} {}",
        mesh.measure_exponent(),
        mesh.n_vertices(),
        mesh.n_cells()
    );
    for x in mesh.vertices() {
        let coords: Vec<String> = x[..dim].iter().map(|c| format_float(*c)).collect();
        let _ = writeln!(s, "{}", coords.join(" "));
    }
    for cell in mesh.cells() {
        let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    write_text(&mesh_to_text(mesh), path)
}

pub fn mesh_from_text(text: &str, origin: &Path) -> Result<Mesh> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        message: format!("line {line}: {msg}"),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hl, header) = lines.next().ok_or_else(|| err(1, "empty mesh file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != MAGIC {
        return Err(err(hl, format!("expected \"{MAGIC} <dim> <measure_exponent> <n_vertices> <n_cells>\"")));
    }
    let int = |s: &str| s.parse::<usize>().map_err(|_| err(hl, format!("{s:?} is not a count")));
    let (dim, exponent, nv, nc) = (int(fields[1])?, int(fields[2])?, int(fields[3])?, int(fields[4])?);
    if dim != 1 && dim != 2 {
        return Err(err(hl, format!("unsupported dimension {dim}")));
    }

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| err(hl, "fewer vertex lines than declared".into()))?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(ln, format!("{t:?} is not a coordinate"))))
            .collect::<Result<_>>()?;
        if xs.len() != dim {
            return Err(err(ln, format!("expected {dim} coordinates")));
        }
        vertices.push([xs[0], if dim == 2 { xs[1] } else { 0.0 }]);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = lines.next().ok_or_else(|| err(hl, "fewer cell lines than declared".into()))?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| err(ln, format!("{t:?} is not a vertex index"))))
            .collect::<Result<_>>()?;
        if ids.len() != dim + 1 || ids.iter().any(|&i| i >= nv) {
            return Err(err(ln, format!("a cell needs {} vertex indices below {nv}", dim + 1)));
        }
        cells.push(ids);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after the declared cells".into()));
    }

    let boundary = boundary_from_cells(dim, &vertices, &cells, exponent as u32);
    Mesh::from_parts(dim, vertices, cells, boundary, exponent as u32)
}

fn boundary_from_cells(dim: usize, vertices: &[[f64; 2]], cells: &[Vec<usize>], exponent: u32) -> Vec<bool> {
    let mut boundary = vec![false; vertices.len()];
    if dim == 1 {
        let mut count = vec![0usize; vertices.len()];
        for c in cells {
            for &v in c {
                count[v] += 1;
            }
        }
        for (v, &k) in count.iter().enumerate() {
            boundary[v] = k == 1 && !(exponent > 0 && vertices[v][0] == 0.0);
        }
    } else {
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for c in cells {
            for (a, b) in [(c[0], c[1]), (c[1], c[2]), (c[2], c[0])] {
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        for ((a, b), k) in edges {
            if k == 1 {
                boundary[a] = true;
                boundary[b] = true;
            }
        }
    }
    boundary
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    mesh_from_text(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_disk_mesh, build_radial_mesh, build_radial_mesh_with_exponent};

    fn round_trip(mesh: &Mesh) -> Mesh {
        mesh_from_text(&mesh_to_text(mesh), Path::new("m.txt")).unwrap()
    }

    fn same(a: &Mesh, b: &Mesh) {
        assert_eq!(a.dim(), b.dim());
        assert_eq!(a.measure_exponent(), b.measure_exponent());
        assert_eq!(a.vertices(), b.vertices());
        assert!(a.cells().eq(b.cells()));
        assert_eq!(a.boundary_flags(), b.boundary_flags());
    }

    #[test]
    fn meshes_round_trip() {
        for m in [
            build_radial_mesh(20, 0.32).unwrap(),
            build_radial_mesh_with_exponent(9, 0.32, 0).unwrap(),
            Mesh::interval(7, -1.0, 2.0, 0).unwrap(),
            build_disk_mesh(0.06, 0.32).unwrap(),
        ] {
            same(&m, &round_trip(&m));
        }
    }

    #[test]
    fn comments_and_header() {
        let text = "# two triangles\ntumorsim-mesh 2 0 4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n";
        let m = mesh_from_text(text, Path::new("sq.txt")).unwrap();
        assert_eq!(m.n_cells(), 2);
        assert!(m.boundary_flags().iter().all(|&b| b));
        assert!((m.total_measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_input_names_the_line() {
        let cases = [
            ("tumorsim-mesh 2 0 3 1\n0 0\n1 0\n0 1\n0 1 5\n", "line 5"),
            ("tumorsim-mesh 1 0 2 1\n0\nx\n0 1\n", "line 3"),
            ("mesh 1 0 2 1\n", "line 1"),
            ("tumorsim-mesh 1 0 2 1\n0\n1\n0 1\n0 1\n", "line 5"),
        ];
        for (text, line) in cases {
            let e = mesh_from_text(text, Path::new("bad.txt")).unwrap_err();
            assert!(e.to_string().contains(line), "{e}");
        }
    }
}
