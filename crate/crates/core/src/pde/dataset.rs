use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{shape_err, Error, Result};
use crate::pde::trajectory::{EllipticSolution, Trajectory1D, Trajectory2D};
use crate::surrogate::{NormStats, QuantityRange};

/// Shape of a solution sampled on a tensor-product grid, as the metrics see
/// it: `slices` time levels of `space` points each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldLayout {
    pub slices: usize,
    pub space: usize,
    /// Spatial boundary flags, one per point in a slice.
    pub boundary: Vec<bool>,
    /// Measure of one spatial cell (Δx or ΔxΔy).
    pub cell_measure: f64,
}

impl FieldLayout {
    pub fn len(&self) -> usize {
        self.slices * self.space
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A reference solution that can be enumerated sample by sample.
///
/// Sample `i` corresponds to slice `i / space`, spatial point `i % space`.
pub trait SampledSolution {
    fn input_names(&self) -> Vec<String>;
    fn output_names(&self) -> Vec<String>;
    fn layout(&self) -> FieldLayout;
    /// Writes the physical coordinates and target values of sample `index`.
    fn sample(&self, index: usize, coords: &mut [f64], targets: &mut [f64]);
    /// Physical extent of each input dimension.
    fn input_ranges(&self) -> Vec<(f64, f64)>;
    /// Grid spacing along each input dimension.
    fn spacing(&self) -> Vec<f64>;
    /// Which input dimensions are spatial (and hence perturbable).
    fn spatial_mask(&self) -> Vec<bool>;
    /// Output values, channel-major: `values[channel][sample]`.
    fn channels(&self) -> Vec<&[f64]>;

    fn num_samples(&self) -> usize {
        self.layout().len()
    }

    /// Min/max statistics for every input and output quantity.
    fn norm_stats(&self) -> NormStats {
        let inputs = self
            .input_names()
            .into_iter()
            .zip(self.input_ranges())
            .map(|(name, (min, max))| QuantityRange { name, min, max })
            .collect();
        let outputs = self
            .output_names()
            .into_iter()
            .zip(self.channels())
            .map(|(name, values)| {
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                QuantityRange { name, min, max }
            })
            .collect();
        NormStats { inputs, outputs }
    }

    /// Every sample as `(coords, targets)` matrices in physical units.
    fn all_samples(&self) -> (Tensor, Tensor) {
        let indices: Vec<usize> = (0..self.num_samples()).collect();
        gather(self, &indices)
    }
}

fn gather<S: SampledSolution + ?Sized>(solution: &S, indices: &[usize]) -> (Tensor, Tensor) {
    let din = solution.input_names().len();
    let dout = solution.output_names().len();
    let mut coords = vec![0.0; indices.len() * din];
    let mut targets = vec![0.0; indices.len() * dout];
    for (row, &i) in indices.iter().enumerate() {
        solution.sample(
            i,
            &mut coords[row * din..(row + 1) * din],
            &mut targets[row * dout..(row + 1) * dout],
        );
    }
    (
        Tensor::matrix(indices.len(), din, coords).expect("sized above"),
        Tensor::matrix(indices.len(), dout, targets).expect("sized above"),
    )
}

impl SampledSolution for Trajectory1D {
    fn input_names(&self) -> Vec<String> {
        vec!["x".into(), "t".into()]
    }

    fn output_names(&self) -> Vec<String> {
        vec!["u".into()]
    }

    fn layout(&self) -> FieldLayout {
        let nx = self.grid.nx;
        let mut boundary = vec![false; nx];
        boundary[0] = true;
        boundary[nx - 1] = true;
        FieldLayout { slices: self.times.nt, space: nx, boundary, cell_measure: self.grid.dx() }
    }

    fn sample(&self, index: usize, coords: &mut [f64], targets: &mut [f64]) {
        let nx = self.grid.nx;
        let (it, ix) = (index / nx, index % nx);
        coords[0] = self.grid.point(ix);
        coords[1] = self.times.time(it);
        targets[0] = self.u[index];
    }

    fn input_ranges(&self) -> Vec<(f64, f64)> {
        vec![(self.grid.x_min, self.grid.x_max), (self.times.t_start, self.times.t_end)]
    }

    fn spacing(&self) -> Vec<f64> {
        vec![self.grid.dx(), self.times.dt()]
    }

    fn spatial_mask(&self) -> Vec<bool> {
        vec![true, false]
    }

    fn channels(&self) -> Vec<&[f64]> {
        vec![&self.u]
    }
}

impl SampledSolution for Trajectory2D {
    fn input_names(&self) -> Vec<String> {
        vec!["x".into(), "y".into(), "t".into()]
    }

    fn output_names(&self) -> Vec<String> {
        vec!["u".into(), "v".into(), "p".into()]
    }

    fn layout(&self) -> FieldLayout {
        let (nx, ny) = (self.grid.x.nx, self.grid.y.nx);
        let boundary = (0..nx * ny)
            .map(|i| {
                let (iy, ix) = (i / nx, i % nx);
                ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1
            })
            .collect();
        FieldLayout {
            slices: self.times.nt,
            space: nx * ny,
            boundary,
            cell_measure: self.grid.cell_area(),
        }
    }

    fn sample(&self, index: usize, coords: &mut [f64], targets: &mut [f64]) {
        let nx = self.grid.x.nx;
        let per_slice = self.slice_len();
        let (it, rem) = (index / per_slice, index % per_slice);
        let (iy, ix) = (rem / nx, rem % nx);
        coords[0] = self.grid.x.point(ix);
        coords[1] = self.grid.y.point(iy);
        coords[2] = self.times.time(it);
        targets[0] = self.u[index];
        targets[1] = self.v[index];
        targets[2] = self.p[index];
    }

    fn input_ranges(&self) -> Vec<(f64, f64)> {
        vec![
            (self.grid.x.x_min, self.grid.x.x_max),
            (self.grid.y.x_min, self.grid.y.x_max),
            (self.times.t_start, self.times.t_end),
        ]
    }

    fn spacing(&self) -> Vec<f64> {
        vec![self.grid.x.dx(), self.grid.y.dx(), self.times.dt()]
    }

    fn spatial_mask(&self) -> Vec<bool> {
        vec![true, true, false]
    }

    fn channels(&self) -> Vec<&[f64]> {
        vec![&self.u, &self.v, &self.p]
    }
}

impl SampledSolution for EllipticSolution {
    fn input_names(&self) -> Vec<String> {
        vec!["x".into()]
    }

    fn output_names(&self) -> Vec<String> {
        vec!["u".into()]
    }

    fn layout(&self) -> FieldLayout {
        let nx = self.grid.nx;
        let mut boundary = vec![false; nx];
        boundary[0] = true;
        boundary[nx - 1] = true;
        FieldLayout { slices: 1, space: nx, boundary, cell_measure: self.grid.dx() }
    }

    fn sample(&self, index: usize, coords: &mut [f64], targets: &mut [f64]) {
        coords[0] = self.grid.point(index);
        targets[0] = self.u[index];
    }

    fn input_ranges(&self) -> Vec<(f64, f64)> {
        vec![(self.grid.x_min, self.grid.x_max)]
    }

    fn spacing(&self) -> Vec<f64> {
        vec![self.grid.dx()]
    }

    fn spatial_mask(&self) -> Vec<bool> {
        vec![true]
    }

    fn channels(&self) -> Vec<&[f64]> {
        vec![&self.u]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Sampling {
    /// Distinct grid samples drawn uniformly without replacement.
    UniformRandom,
    /// Every `stride`-th sample in storage order.
    GridSubsample { stride: usize },
}

/// Supervised pairs in physical units, plus what is needed to normalise them
/// and to size the attack budget.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    /// `(n, input_dim)`
    pub coords: Tensor,
    /// `(n, output_dim)`
    pub targets: Tensor,
    pub stats: NormStats,
    /// Grid spacing per input dimension, physical units.
    pub spacing: Vec<f64>,
    pub spatial_mask: Vec<bool>,
    /// Index of each sample in the source solution's storage order.
    pub source_indices: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.coords.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.coords.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.targets.cols()
    }

    /// Coordinates and targets mapped into `[0, 1]` by the min–max stats.
    pub fn normalized(&self) -> Result<(Tensor, Tensor)> {
        Ok((self.stats.normalize_inputs(&self.coords)?, self.stats.normalize_outputs(&self.targets)?))
    }

    /// Coordinates and targets normalised with another dataset's stats.
    pub fn normalized_with(&self, stats: &NormStats) -> Result<(Tensor, Tensor)> {
        Ok((stats.normalize_inputs(&self.coords)?, stats.normalize_outputs(&self.targets)?))
    }

    /// Grid spacing expressed in normalised units.
    pub fn normalized_spacing(&self) -> Result<Vec<f64>> {
        self.spacing
            .iter()
            .zip(&self.stats.inputs)
            .map(|(dx, q)| Ok(dx / q.span()?))
            .collect()
    }

    /// Appends another dataset with identical columns, keeping these stats.
    pub fn extend(&mut self, other: &Dataset) -> Result<()> {
        if other.input_names != self.input_names || other.output_names != self.output_names {
            return Err(shape_err("datasets have different columns"));
        }
        self.coords = self.coords.vstack(&other.coords)?;
        self.targets = self.targets.vstack(&other.targets)?;
        self.source_indices.extend_from_slice(&other.source_indices);
        Ok(())
    }
}

/// Draws `n_points` supervised pairs from a reference solution.
pub fn generate_dataset<S: SampledSolution + ?Sized>(
    solution: &S,
    n_points: usize,
    sampling: Sampling,
    seed: u64,
) -> Result<Dataset> {
    let available = solution.num_samples();
    let indices: Vec<usize> = match sampling {
        Sampling::UniformRandom => {
            if n_points > available {
                return Err(Error::InsufficientData { requested: n_points, available });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, available, n_points).into_vec();
            idx.sort_unstable();
            idx
        }
        Sampling::GridSubsample { stride } => {
            if stride == 0 {
                return Err(Error::InvalidConfig("subsample stride must be >= 1".into()));
            }
            let reachable = available.div_ceil(stride);
            if n_points > reachable {
                return Err(Error::InsufficientData { requested: n_points, available: reachable });
            }
            (0..n_points).map(|i| i * stride).collect()
        }
    };
    Ok(dataset_from_indices(solution, &indices))
}

/// Dataset made of the listed samples of `solution`.
pub fn dataset_from_indices<S: SampledSolution + ?Sized>(solution: &S, indices: &[usize]) -> Dataset {
    let (coords, targets) = gather(solution, indices);
    Dataset {
        input_names: solution.input_names(),
        output_names: solution.output_names(),
        coords,
        targets,
        stats: solution.norm_stats(),
        spacing: solution.spacing(),
        spatial_mask: solution.spatial_mask(),
        source_indices: indices.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::grid::{Grid1D, TimeAxis};
    use crate::pde::trajectory::PdeTag;

    fn traj() -> Trajectory1D {
        let g = Grid1D::periodic(0.0, 1.0, 8).unwrap();
        let t = TimeAxis::new(1.0, 3).unwrap();
        let u = (0..24).map(|i| i as f64).collect();
        Trajectory1D::new(g, t, u, PdeTag::Kdv).unwrap()
    }

    #[test]
    fn stride_one_enumerates_everything() {
        let tr = traj();
        let ds = generate_dataset(&tr, 24, Sampling::GridSubsample { stride: 1 }, 0).unwrap();
        assert_eq!(ds.source_indices, (0..24).collect::<Vec<_>>());
        assert_eq!(ds.targets.data(), tr.u.as_slice());
    }

    #[test]
    fn too_many_points() {
        let tr = traj();
        assert!(matches!(
            generate_dataset(&tr, 25, Sampling::UniformRandom, 0),
            Err(Error::InsufficientData { requested: 25, available: 24 })
        ));
        assert!(generate_dataset(&tr, 13, Sampling::GridSubsample { stride: 2 }, 0).is_err());
    }

    #[test]
    fn seeded_sampling_repeats() {
        let tr = traj();
        let a = generate_dataset(&tr, 10, Sampling::UniformRandom, 5).unwrap();
        let b = generate_dataset(&tr, 10, Sampling::UniformRandom, 5).unwrap();
        assert_eq!(a, b);
        let mut sorted = a.source_indices.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
    }

    #[test]
    fn coordinates_match_grid() {
        let tr = traj();
        let (c, t) = tr.all_samples();
        // sample 9 = slice 1, point 1
        assert_eq!(c.row(9), &[0.125, 0.5]);
        assert_eq!(t.row(9), &[9.0]);
    }
}
