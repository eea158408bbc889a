use crate::error::{Error, Result};
use crate::pde::{PdeTag, Trajectory1D};

/// Second-order central differences on a periodic slice.
struct Stencil<'a> {
    u: &'a [f64],
    dx: f64,
}

impl Stencil<'_> {
    fn at(&self, i: isize) -> f64 {
        let n = self.u.len() as isize;
        self.u[i.rem_euclid(n) as usize]
    }

    fn d1(&self, i: isize) -> f64 {
        (self.at(i + 1) - self.at(i - 1)) / (2.0 * self.dx)
    }

    fn d2(&self, i: isize) -> f64 {
        (self.at(i + 1) - 2.0 * self.at(i) + self.at(i - 1)) / (self.dx * self.dx)
    }

    fn d3(&self, i: isize) -> f64 {
        (self.at(i + 2) - 2.0 * self.at(i + 1) + 2.0 * self.at(i - 1) - self.at(i - 2))
            / (2.0 * self.dx.powi(3))
    }
}

/// RMS over interior time levels of a pointwise residual built from
/// `(u, u_t, u_x, u_xx, u_xxx)`.
fn residual_rms(traj: &Trajectory1D, r: impl Fn(f64, f64, f64, f64, f64) -> f64) -> Result<f64> {
    if !traj.grid.periodic {
        return Err(Error::InvalidConfig("residual oracle needs a periodic grid".into()));
    }
    if traj.nt() < 3 {
        return Err(Error::InvalidConfig("residual oracle needs at least 3 time levels".into()));
    }
    let (dx, dt) = (traj.grid.dx(), traj.times.dt());
    let nx = traj.nx();
    let mut sq = 0.0;
    for it in 1..traj.nt() - 1 {
        let (prev, next) = (traj.slice(it - 1), traj.slice(it + 1));
        let s = Stencil { u: traj.slice(it), dx };
        for i in 0..nx {
            let ut = (next[i] - prev[i]) / (2.0 * dt);
            let ii = i as isize;
            let v = r(s.u[i], ut, s.d1(ii), s.d2(ii), s.d3(ii));
            sq += v * v;
        }
    }
    Ok((sq / ((traj.nt() - 2) * nx) as f64).sqrt())
}

/// Finite-difference residual of `u_t + u u_x + u_xxx`.
pub fn kdv_residual(traj: &Trajectory1D) -> Result<f64> {
    residual_rms(traj, |u, ut, ux, _, uxxx| ut + u * ux + uxxx)
}

/// Finite-difference residual of `u_t + u u_x − ν u_xx`.
pub fn burgers_residual(traj: &Trajectory1D, nu: f64) -> Result<f64> {
    residual_rms(traj, |u, ut, ux, uxx, _| ut + u * ux - nu * uxx)
}

/// Residual of whichever equation the trajectory is tagged with.
pub fn pde_residual(traj: &Trajectory1D) -> Result<f64> {
    match traj.pde {
        PdeTag::Kdv => kdv_residual(traj),
        PdeTag::Burgers { nu, .. } => burgers_residual(traj, nu),
        PdeTag::Advection { speed } => residual_rms(traj, |_, ut, ux, _, _| ut + speed * ux),
        _ => Err(Error::InvalidConfig(format!("no residual oracle for {}", traj.pde.scheme()))),
    }
}
