use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::spectral::fourier_shift;
use crate::pde::{PdeTag, Trajectory1D};

/// One-parameter symmetry groups.
///
/// For KdV `u_t + u u_x + u_xxx = 0`:
/// - `G1`: `t → t + ε`
/// - `G2`: `x → x + ε`
/// - `G3`: `(x, t, u) → (x + εt, t, u + ε)`
/// - `G4`: `(x, t, u) → (e^ε x, e^{3ε} t, e^{−2ε} u)`
///
/// `G1`–`G3` also hold for viscous Burgers, whose scaling group is
/// `BurgersScaling`: `(x, t, u) → (λx, λ²t, u/λ)` with `λ = e^ε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LieKind {
    G1,
    G2,
    G3,
    G4,
    BurgersScaling,
}

impl LieKind {
    fn supports(self, pde: &PdeTag) -> bool {
        match (self, pde) {
            (LieKind::G4, PdeTag::Kdv) => true,
            (LieKind::BurgersScaling, PdeTag::Burgers { .. }) => true,
            (LieKind::G1 | LieKind::G2 | LieKind::G3, PdeTag::Kdv | PdeTag::Burgers { .. }) => true,
            _ => false,
        }
    }
}

/// Applies one symmetry with magnitude `eps`.
///
/// Translations in time and both scalings relabel the grid and time axis
/// exactly, so the output may live on a different window than the input.
/// Space translation and the Galilean boost shift each slice on the same
/// periodic grid: by whole cells when the shift is a multiple of `dx`, by a
/// band-limited Fourier shift otherwise.
pub fn lie_transform(traj: &Trajectory1D, kind: LieKind, eps: f64) -> Result<Trajectory1D> {
    if !eps.is_finite() {
        return Err(Error::InvalidConfig(format!("symmetry magnitude must be finite, got {eps}")));
    }
    if !kind.supports(&traj.pde) {
        return Err(Error::InvalidConfig(format!("{kind:?} is not a symmetry of {}", traj.pde.scheme())));
    }
    if eps == 0.0 {
        return Ok(traj.clone());
    }
    let out = match kind {
        LieKind::G1 => {
            let times = traj.times.starting_at(traj.times.t_start + eps);
            Trajectory1D { times, ..traj.clone() }
        }
        LieKind::G2 => {
            require_periodic(traj)?;
            let u = (0..traj.nt()).flat_map(|it| shift_slice(traj, it, eps)).collect();
            Trajectory1D { u, ..traj.clone() }
        }
        LieKind::G3 => {
            require_periodic(traj)?;
            let u = (0..traj.nt())
                .flat_map(|it| {
                    let t = traj.times.time(it);
                    shift_slice(traj, it, eps * t).into_iter().map(move |v| v + eps)
                })
                .collect();
            Trajectory1D { u, ..traj.clone() }
        }
        LieKind::G4 => scale(traj, eps.exp(), (3.0 * eps).exp(), (-2.0 * eps).exp())?,
        LieKind::BurgersScaling => {
            let lambda = eps.exp();
            scale(traj, lambda, lambda * lambda, 1.0 / lambda)?
        }
    };
    if out.times.validate().is_err() {
        return Err(Error::EmptyResult);
    }
    Ok(out)
}

fn require_periodic(traj: &Trajectory1D) -> Result<()> {
    if !traj.grid.periodic {
        return Err(Error::InvalidConfig("spatial shifts need a periodic grid".into()));
    }
    Ok(())
}

/// Slice `it` evaluated at `x − shift`.
fn shift_slice(traj: &Trajectory1D, it: usize, shift: f64) -> Vec<f64> {
    let slice = traj.slice(it);
    let n = slice.len();
    let cells = shift / traj.grid.dx();
    let whole = cells.round();
    if (cells - whole).abs() <= 1e-12 * cells.abs().max(1.0) {
        let r = (whole as i64).rem_euclid(n as i64) as usize;
        let mut out = slice.to_vec();
        out.rotate_right(r);
        out
    } else {
        fourier_shift(slice, shift, traj.grid.length())
    }
}

fn scale(traj: &Trajectory1D, x_factor: f64, t_factor: f64, u_factor: f64) -> Result<Trajectory1D> {
    let grid = traj.grid.scaled(x_factor).map_err(|_| Error::EmptyResult)?;
    let times = traj.times.scaled(t_factor);
    let u = traj.u.iter().map(|v| v * u_factor).collect();
    Trajectory1D::new(grid, times, u, traj.pde.clone())
}

/// Which symmetries to compose and the half-widths of their magnitude
/// ranges; each magnitude is drawn from `U(−r, r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LieParams {
    pub enabled: Vec<LieKind>,
    pub time_shift: f64,
    pub space_shift: f64,
    pub galilean: f64,
    pub scaling: f64,
}

impl Default for LieParams {
    fn default() -> Self {
        Self {
            enabled: vec![LieKind::G1, LieKind::G2, LieKind::G3, LieKind::G4],
            time_shift: 0.1,
            space_shift: 0.1,
            galilean: 0.1,
            scaling: 0.2,
        }
    }
}

impl LieParams {
    pub const MAX_SCALING: f64 = 0.5;

    /// Default ranges with the groups that apply to `pde`.
    pub fn for_pde(pde: &PdeTag) -> Self {
        let enabled = match pde {
            PdeTag::Burgers { .. } => {
                vec![LieKind::G1, LieKind::G2, LieKind::G3, LieKind::BurgersScaling]
            }
            _ => vec![LieKind::G1, LieKind::G2, LieKind::G3, LieKind::G4],
        };
        Self { enabled, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [self.time_shift, self.space_shift, self.galilean, self.scaling];
        if ranges.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidConfig("symmetry ranges must be finite and >= 0".into()));
        }
        if self.scaling > Self::MAX_SCALING {
            return Err(Error::InvalidConfig(format!(
                "scaling range {} exceeds {}",
                self.scaling,
                Self::MAX_SCALING
            )));
        }
        Ok(())
    }

    fn range(&self, kind: LieKind) -> f64 {
        match kind {
            LieKind::G1 => self.time_shift,
            LieKind::G2 => self.space_shift,
            LieKind::G3 => self.galilean,
            LieKind::G4 | LieKind::BurgersScaling => self.scaling,
        }
    }
}

/// Applies the enabled groups in the order g1, g2, g3, then scaling, with
/// seeded random magnitudes. Returns the result and the magnitudes used.
pub fn compose_lie(
    traj: &Trajectory1D,
    params: &LieParams,
    seed: u64,
) -> Result<(Trajectory1D, Vec<(LieKind, f64)>)> {
    params.validate()?;
    let mut kinds = params.enabled.clone();
    kinds.sort();
    kinds.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = traj.clone();
    let mut used = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let r = params.range(kind);
        let eps = if r == 0.0 { 0.0 } else { rng.random_range(-r..=r) };
        out = lie_transform(&out, kind, eps)?;
        used.push((kind, eps));
    }
    Ok((out, used))
}
