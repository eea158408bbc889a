//! Interpolation on uniform grids.

use crate::pde::grid::Grid1D;

/// Four-point Lagrange weights for nodes at offsets -1, 0, 1, 2 evaluated
/// at fractional position `s` in `[0, 1]`.
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

/// Cubic Lagrange interpolation of grid samples at physical position `x`.
///
/// Periodic grids wrap; bounded grids shift the stencil inward near the ends
/// and clamp `x` into the domain.
pub fn cubic(grid: &Grid1D, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let pos = (x - grid.x_min) / grid.dx();
    if grid.periodic {
        let base = pos.floor();
        let s = pos - base;
        let w = cubic_weights(s);
        let j = base as i64;
        let n_i = n as i64;
        (0..4)
            .map(|o| values[(j - 1 + o as i64).rem_euclid(n_i) as usize] * w[o])
            .sum()
    } else {
        let pos = pos.clamp(0.0, (n - 1) as f64);
        let base = (pos.floor() as usize).min(n - 2);
        // stencil start, kept inside [0, n - 4]
        let start = base.saturating_sub(1).min(n - 4);
        let s = pos - (start + 1) as f64;
        let w = cubic_weights(s);
        (0..4).map(|o| values[start + o] * w[o]).sum()
    }
}

/// Linear interpolation between neighbouring samples (bounded, clamped).
pub fn linear(grid: &Grid1D, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let pos = ((x - grid.x_min) / grid.dx()).clamp(0.0, (n - 1) as f64);
    let i = (pos.floor() as usize).min(n - 2);
    let s = pos - i as f64;
    values[i] * (1.0 - s) + values[i + 1] * s
}

/// Linear interpolation on strictly increasing, possibly non-uniform nodes.
pub fn linear_nonuniform(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    if x <= nodes[0] {
        return values[0];
    }
    if x >= nodes[n - 1] {
        return values[n - 1];
    }
    let i = nodes.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
    let s = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
    values[i] * (1.0 - s) + values[i + 1] * s
}

/// Cubic Lagrange interpolation on strictly increasing non-uniform nodes.
pub fn cubic_nonuniform(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    if n < 4 {
        return linear_nonuniform(nodes, values, x);
    }
    let x = x.clamp(nodes[0], nodes[n - 1]);
    let i = nodes.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
    let start = i.saturating_sub(1).min(n - 4);
    let xs = &nodes[start..start + 4];
    let mut acc = 0.0;
    for j in 0..4 {
        let mut w = 1.0;
        for m in 0..4 {
            if m != j {
                w *= (x - xs[m]) / (xs[j] - xs[m]);
            }
        }
        acc += w * values[start + j];
    }
    acc
}
