use crate::error::{shape_err, Error, Result};
use crate::pde::grid::Grid1D;
use crate::pde::trajectory::EllipticSolution;

/// Solves `(a u')' = f` with `u = 0` at both ends of a bounded grid.
///
/// `a_faces` holds the coefficient at the `nx - 1` cell midpoints and `f` the
/// source at the `nx` nodes; boundary entries of `f` are ignored. The
/// three-point conservative stencil is second-order accurate.
pub fn solve_elliptic_1d(a_faces: &[f64], f: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    grid.validate()?;
    if grid.periodic {
        return Err(Error::InvalidConfig("elliptic solver needs a bounded grid".into()));
    }
    let n = grid.nx;
    if a_faces.len() != n - 1 || f.len() != n {
        return Err(shape_err(format!(
            "expected {} face coefficients and {n} source values, got {} and {}",
            n - 1,
            a_faces.len(),
            f.len()
        )));
    }
    if let Some(bad) = a_faces.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(Error::SingularSystem(format!("coefficient must be positive and finite, got {bad}")));
    }

    let h2 = grid.dx() * grid.dx();
    let m = n - 2;
    // Tridiagonal system for interior nodes 1..=m:
    //   a_{i-1/2} u_{i-1} - (a_{i-1/2} + a_{i+1/2}) u_i + a_{i+1/2} u_{i+1} = h² f_i
    let lower: Vec<f64> = (0..m).map(|j| a_faces[j]).collect();
    let diag: Vec<f64> = (0..m).map(|j| -(a_faces[j] + a_faces[j + 1])).collect();
    let upper: Vec<f64> = (0..m).map(|j| a_faces[j + 1]).collect();
    let rhs: Vec<f64> = (0..m).map(|j| h2 * f[j + 1]).collect();
    let interior = thomas(&lower, &diag, &upper, &rhs)?;

    let mut u = vec![0.0; n];
    u[1..n - 1].copy_from_slice(&interior);
    Ok(u)
}

/// Builds the full solution triple from coefficient and source samples.
pub fn elliptic_solution(a_faces: Vec<f64>, f: Vec<f64>, grid: &Grid1D) -> Result<EllipticSolution> {
    let u = solve_elliptic_1d(&a_faces, &f, grid)?;
    Ok(EllipticSolution { grid: grid.clone(), a_faces, f, u })
}

/// Thomas algorithm; `lower[0]` and `upper[m - 1]` are unused.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::SingularSystem("zero pivot".into()));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..m {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::SingularSystem("zero pivot".into()));
        }
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn homogeneous_problem_is_zero() {
        let g = Grid1D::bounded(0.0, 1.0, 17).unwrap();
        let u = solve_elliptic_1d(&[2.0; 16], &[0.0; 17], &g).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_positive_coefficient_is_singular() {
        let g = Grid1D::bounded(0.0, 1.0, 9).unwrap();
        let mut a = vec![1.0; 8];
        a[3] = 0.0;
        assert!(matches!(solve_elliptic_1d(&a, &[1.0; 9], &g), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn manufactured_sine() {
        let g = Grid1D::bounded(0.0, 1.0, 65).unwrap();
        let f: Vec<f64> = g.points().iter().map(|x| -PI * PI * (PI * x).sin()).collect();
        let u = solve_elliptic_1d(&vec![1.0; 64], &f, &g).unwrap();
        let err = g
            .points()
            .iter()
            .zip(&u)
            .map(|(x, v)| (v - (PI * x).sin()).abs())
            .fold(0.0, f64::max);
        // h² π⁴ / 12 bound on the truncation error
        assert!(err < 1e-3, "err = {err}");
    }
}
