use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::interp::cubic;
use crate::pde::{EllipticSolution, Grid1D};

/// Monotone increasing map `y(ξ)` of `[0, 1]` onto itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CoordinateMap {
    Identity,
    /// `y = ξ³`
    Cubic,
    /// `y = ξ + a sin(πξ) / π`, monotone for `|a| < 1`.
    Sine { amplitude: f64 },
    /// Numerical inverse of another map, by bisection.
    Inverse { of: Box<CoordinateMap> },
}

impl CoordinateMap {
    /// `(y(ξ), y'(ξ))`
    pub fn eval(&self, xi: f64) -> (f64, f64) {
        match self {
            CoordinateMap::Identity => (xi, 1.0),
            CoordinateMap::Cubic => (xi * xi * xi, 3.0 * xi * xi),
            CoordinateMap::Sine { amplitude } => {
                let s = std::f64::consts::PI * xi;
                (xi + amplitude * s.sin() / std::f64::consts::PI, 1.0 + amplitude * s.cos())
            }
            CoordinateMap::Inverse { of: inner } => {
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if inner.eval(mid).0 < xi {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let s = 0.5 * (lo + hi);
                (s, 1.0 / inner.eval(s).1)
            }
        }
    }

    pub fn inverse(&self) -> CoordinateMap {
        match self {
            CoordinateMap::Identity => CoordinateMap::Identity,
            CoordinateMap::Inverse { of } => (**of).clone(),
            other => CoordinateMap::Inverse { of: Box::new(other.clone()) },
        }
    }

    /// Samples at the nodes and cell faces of a grid on `[0, 1]`.
    pub fn sample(&self, grid: &Grid1D) -> Result<MapSamples> {
        if let CoordinateMap::Sine { amplitude } = self {
            if !(amplitude.abs() < 1.0) {
                return Err(Error::NonMonotoneMap);
            }
        }
        let eval_all = |xs: &[f64]| -> (Vec<f64>, Vec<f64>) { xs.iter().map(|&x| self.eval(x)).unzip() };
        let xi = grid.points();
        let xi_faces = face_points(grid);
        let (y, dy) = eval_all(&xi);
        let (y_faces, dy_faces) = eval_all(&xi_faces);
        let samples = MapSamples { xi, y, dy, xi_faces, y_faces, dy_faces };
        samples.check()?;
        Ok(samples)
    }
}

fn face_points(grid: &Grid1D) -> Vec<f64> {
    let dx = grid.dx();
    (0..grid.nx - 1).map(|i| grid.point(i) + dx / 2.0).collect()
}

/// A coordinate map sampled on a grid: nodes `ξ_i` and faces `ξ_{i+1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSamples {
    pub xi: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    pub xi_faces: Vec<f64>,
    pub y_faces: Vec<f64>,
    pub dy_faces: Vec<f64>,
}

impl MapSamples {
    /// Strictly increasing node values, fixed endpoints, positive finite
    /// derivative at every face.
    pub fn check(&self) -> Result<()> {
        let n = self.y.len();
        let increasing = self.y.windows(2).all(|w| w[1] > w[0]);
        let ends = n >= 2 && self.y[0].abs() <= 1e-12 && (self.y[n - 1] - 1.0).abs() <= 1e-12;
        let faces = self.dy_faces.iter().all(|d| *d > 0.0 && d.is_finite());
        if increasing && ends && faces {
            Ok(())
        } else {
            Err(Error::NonMonotoneMap)
        }
    }
}

/// Four-point Lagrange interpolation on increasing nodes, extrapolating from
/// the end stencils outside the node range.
fn lagrange4(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    let i = nodes.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
    let start = i.saturating_sub(1).min(n.saturating_sub(4));
    let end = (start + 4).min(n);
    let mut acc = 0.0;
    for j in start..end {
        let mut w = 1.0;
        for m in start..end {
            if m != j {
                w *= (x - nodes[m]) / (nodes[j] - nodes[m]);
            }
        }
        acc += w * values[j];
    }
    acc
}

/// Rewrites `(a u')' = f` on `[0, 1]` in the coordinate `ξ` with `x = y(ξ)`.
///
/// With `J = y'(ξ)` the transformed problem is `(a' u'_ξ)_ξ = f'` where
/// `a'(ξ) = a(y(ξ)) / J`, `f'(ξ) = f(y(ξ)) J` and `u'(ξ) = u(y(ξ))`. The
/// coefficient is evaluated at cell faces, where `J > 0` even for maps whose
/// derivative vanishes at an endpoint. Source entries at the two boundary
/// nodes, which the solver never reads, are set to zero when `J` is not
/// finite there.
pub fn gcda_transform(solution: &EllipticSolution, map: &CoordinateMap) -> Result<EllipticSolution> {
    let grid = &solution.grid;
    if grid.periodic || grid.x_min != 0.0 || grid.x_max != 1.0 {
        return Err(Error::InvalidConfig("coordinate maps act on a bounded [0, 1] grid".into()));
    }
    let s = map.sample(grid)?;
    let faces = face_points(grid);
    let a_faces = s
        .y_faces
        .iter()
        .zip(&s.dy_faces)
        .map(|(&y, &j)| lagrange4(&faces, &solution.a_faces, y) / j)
        .collect();
    let f = s
        .y
        .iter()
        .zip(&s.dy)
        .map(|(&y, &j)| {
            let v = cubic(grid, &solution.f, y) * j;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        })
        .collect();
    let u = s.y.iter().map(|&y| cubic(grid, &solution.u, y)).collect();
    Ok(EllipticSolution { grid: grid.clone(), a_faces, f, u })
}
