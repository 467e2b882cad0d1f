//! Level-set geometry of P1 fields on triangle meshes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::ScalarField;

/// Length of the level contour and area of the superlevel set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourMetrics {
    pub perimeter: f64,
    pub area: f64,
}

impl ContourMetrics {
    /// `perimeter^2 / (4 pi area)`; 1 for a disk, larger otherwise.
    pub fn isoperimetric_ratio(&self) -> f64 {
        self.perimeter * self.perimeter / (4.0 * PI * self.area)
    }
}

/// Marching triangles on the piecewise-linear interpolant: the contour is
/// the union of straight segments between edge crossings and the area is
/// that of `{field >= level}`, both exact for the interpolant.
pub fn contour_metrics(field: &ScalarField, level: f64) -> Result<ContourMetrics> {
    let mesh = field.mesh();
    if mesh.dim() != 2 {
        return Err(Error::Dimension("contours need a 2D mesh".into()));
    }
    let v = field.values();
    let mut out = ContourMetrics { perimeter: 0.0, area: 0.0 };
    for cell in mesh.cells() {
        let p: Vec<[f64; 2]> = cell.iter().map(|&i| mesh.vertex(i)).collect();
        let f: Vec<f64> = cell.iter().map(|&i| v[i] - level).collect();
        let mut polygon = Vec::with_capacity(4);
        let mut crossings = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (k, (k + 1) % 3);
            if f[a] >= 0.0 {
                polygon.push(p[a]);
            }
            if (f[a] >= 0.0) != (f[b] >= 0.0) {
                let t = f[a] / (f[a] - f[b]);
                let x = [p[a][0] + t * (p[b][0] - p[a][0]), p[a][1] + t * (p[b][1] - p[a][1])];
                polygon.push(x);
                crossings.push(x);
            }
        }
        out.area += shoelace(&polygon);
        if let [a, b] = crossings[..] {
            out.perimeter += (b[0] - a[0]).hypot(b[1] - a[1]);
        }
    }
    Ok(out)
}

/// Isoperimetric ratio of the `0.5` contour.
pub fn isoperimetric_ratio(field: &ScalarField) -> Result<f64> {
    let m = contour_metrics(field, 0.5)?;
    if !(m.area > 0.0) {
        return Err(Error::Domain("the 0.5 superlevel set is empty".into()));
    }
    Ok(m.isoperimetric_ratio())
}

fn shoelace(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    0.5 * twice.abs()
}
