//! Experiment configs and the commands behind the `smartpde` binary.
//!
//! One TOML file describes an experiment: the task and solver settings, the
//! training-set sizes, methods and seeds to sweep, and the training and
//! attack settings. Every file written under `output_dir` is a pure function
//! of the config and the seeds.
//!
//! ```
//! use smartpde::experiment::{ExperimentConfig, Task};
//!
//! let cfg = ExperimentConfig::from_toml_str(r#"
//!     task = "burgers1d"
//!     sizes = [32]
//!     seeds = [0]
//!     methods = ["standard", "smart"]
//! "#).unwrap();
//! assert_eq!(cfg.task, Task::Burgers1d);
//! assert_eq!(cfg.solver_settings().nx, 128);
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adversarial::{generate_adversarial, random_perturbation, AttackConfig, AttackSettings};
use crate::augmentation::{compose_lie, gcda_transform, CoordinateMap, LieParams};
use crate::error::{shape_err, Error, Result};
use crate::io::{self, Solution};
use crate::metrics::{gain, median, MetricsRecord, METRIC_NAMES};
use crate::pde::initial::{random_elliptic_data, random_fourier, random_vorticity};
use crate::pde::{
    advection_max_step, burgers_max_step, dataset_from_indices, elliptic_solution, generate_dataset,
    kdv_max_step, ns_max_step, solve_advection_1d, solve_burgers_1d, solve_kdv_1d, solve_ns_2d, Boundary,
    Dataset, Grid1D, Grid2D, PdeTag, Sampling, TimeAxis,
};
use crate::surrogate::{per_sample_loss, ModelParams, NormStats};
use crate::training::{evaluate, train_smart, train_standard, TrainConfig, TrainHistory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Burgers1d,
    Advection1d,
    Kdv1d,
    Elliptic1d,
    Ns2d,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Burgers1d => "burgers1d",
            Task::Advection1d => "advection1d",
            Task::Kdv1d => "kdv1d",
            Task::Elliptic1d => "elliptic1d",
            Task::Ns2d => "ns2d",
        }
    }

    /// Default solver settings.
    pub fn default_solver(self) -> SolverSettings {
        let base = SolverSettings {
            nx: 128,
            nt: 51,
            t_end: 1.0,
            length: 1.0,
            nu: 0.01,
            speed: 1.0,
            modes: 4,
            amplitude: 0.5,
            substeps: None,
        };
        match self {
            Task::Burgers1d | Task::Advection1d => base,
            Task::Kdv1d => SolverSettings { length: 32.0, t_end: 5.0, ..base },
            Task::Elliptic1d => SolverSettings { nx: 65, nt: 1, modes: 3, ..base },
            Task::Ns2d => SolverSettings {
                nx: 32,
                nt: 11,
                length: 2.0 * std::f64::consts::PI,
                modes: 2,
                amplitude: 1.0,
                ..base
            },
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "standard")]
    Standard,
    #[serde(rename = "smart")]
    Smart,
    #[serde(rename = "lpsda")]
    Lpsda,
    #[serde(rename = "gcda")]
    Gcda,
    #[serde(rename = "lpsda+smart")]
    LpsdaSmart,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Standard, Method::Smart, Method::Lpsda, Method::Gcda, Method::LpsdaSmart];

    pub fn label(self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::Smart => "smart",
            Method::Lpsda => "lpsda",
            Method::Gcda => "gcda",
            Method::LpsdaSmart => "lpsda+smart",
        }
    }

    /// File-name friendly label.
    pub fn slug(self) -> &'static str {
        match self {
            Method::LpsdaSmart => "lpsda_smart",
            m => m.label(),
        }
    }

    pub fn adversarial(self) -> bool {
        matches!(self, Method::Smart | Method::LpsdaSmart)
    }

    pub fn valid_for(self, task: Task) -> bool {
        match self {
            Method::Gcda => task == Task::Elliptic1d,
            Method::Lpsda | Method::LpsdaSmart => matches!(task, Task::Kdv1d | Task::Burgers1d),
            Method::Standard | Method::Smart => true,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s || m.slug() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

/// Solver and initial-condition settings after task defaults are applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Grid points per spatial axis.
    pub nx: usize,
    /// Stored time levels.
    pub nt: usize,
    pub t_end: f64,
    /// Domain length per spatial axis, starting at 0.
    pub length: f64,
    pub nu: f64,
    /// Advection speed.
    pub speed: f64,
    /// Fourier modes in the random initial condition or source.
    pub modes: usize,
    pub amplitude: f64,
    /// Internal steps per stored step; chosen from the stability bound when
    /// absent.
    pub substeps: Option<usize>,
}

/// `[solver]` table: any field left out takes the task default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub t_end: Option<f64>,
    pub length: Option<f64>,
    pub nu: Option<f64>,
    pub speed: Option<f64>,
    pub modes: Option<usize>,
    pub amplitude: Option<f64>,
    pub substeps: Option<usize>,
}

impl SolverConfig {
    pub fn resolve(&self, task: Task) -> SolverSettings {
        let d = task.default_solver();
        SolverSettings {
            nx: self.nx.unwrap_or(d.nx),
            nt: self.nt.unwrap_or(d.nt),
            t_end: self.t_end.unwrap_or(d.t_end),
            length: self.length.unwrap_or(d.length),
            nu: self.nu.unwrap_or(d.nu),
            speed: self.speed.unwrap_or(d.speed),
            modes: self.modes.unwrap_or(d.modes),
            amplitude: self.amplitude.unwrap_or(d.amplitude),
            substeps: self.substeps.or(d.substeps),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackEvalConfig {
    pub kappas: Vec<f64>,
}

impl Default for AttackEvalConfig {
    fn default() -> Self {
        Self { kappas: vec![0.0, 0.02, 0.04, 0.08, 0.16, 0.32] }
    }
}

fn default_sizes() -> Vec<usize> {
    vec![32, 64, 128, 256, 512]
}

fn default_methods() -> Vec<Method> {
    vec![Method::Standard, Method::Smart]
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_sampling() -> Sampling {
    Sampling::UniformRandom
}

fn default_map() -> CoordinateMap {
    CoordinateMap::Cubic
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_sampling")]
    pub sampling: Sampling,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub attack: AttackSettings,
    #[serde(default)]
    pub attack_eval: AttackEvalConfig,
    /// Symmetry groups and ranges for `lpsda`; task defaults when absent.
    #[serde(default)]
    pub lie: Option<LieParams>,
    /// Coordinate map for `gcda`.
    #[serde(default = "default_map")]
    pub gcda_map: CoordinateMap,
}

fn config_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Config { path: path.to_path_buf(), reason: reason.into() }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config; every failure maps to [`Error::Config`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| config_err(path, e.to_string()))?;
        Self::from_toml_str(&text).map_err(|e| config_err(path, e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be a non-empty list of positive counts".into());
        }
        if self.seeds.is_empty() || self.methods.is_empty() {
            return bad("seeds and methods must be non-empty".into());
        }
        if let Some(m) = self.methods.iter().find(|m| !m.valid_for(self.task)) {
            return bad(format!("method `{m}` does not apply to task `{}`", self.task));
        }
        self.train.validate()?;
        if self.train.attack != AttackSettings::default() {
            return bad("attack settings belong in the top-level [attack] table".into());
        }
        self.lie_params().validate()?;
        if self.methods.iter().any(|m| m.adversarial()) && !(self.attack.kappa > 0.0 && self.attack.kappa < 1.0) {
            return bad(format!("kappa must lie in (0, 1), got {}", self.attack.kappa));
        }
        if self.attack_eval.kappas.iter().any(|k| !(0.0..1.0).contains(k)) {
            return bad("attack_eval.kappas must lie in [0, 1)".into());
        }
        let s = self.solver_settings();
        if s.nt < 2 && self.task != Task::Elliptic1d {
            return bad("solver.nt must be >= 2".into());
        }
        if !(s.length > 0.0) || !(s.t_end > 0.0) || !(s.nu >= 0.0) {
            return bad("solver lengths and times must be positive, nu >= 0".into());
        }
        if self.task == Task::Elliptic1d && s.length != 1.0 {
            return bad("elliptic1d lives on [0, 1]".into());
        }
        Ok(())
    }

    pub fn solver_settings(&self) -> SolverSettings {
        self.solver.resolve(self.task)
    }

    pub fn lie_params(&self) -> LieParams {
        match &self.lie {
            Some(p) => p.clone(),
            None if self.task == Task::Burgers1d => LieParams::for_pde(&PdeTag::Burgers {
                nu: 0.0,
                boundary: Boundary::Periodic,
            }),
            None => LieParams::default(),
        }
    }

    /// Training settings for one run.
    pub fn train_config(&self, seed: u64, deterministic: bool) -> TrainConfig {
        TrainConfig {
            seed,
            attack: self.attack.clone(),
            record_wall_clock: !deterministic || self.train.record_wall_clock,
            ..self.train.clone()
        }
    }

    pub fn trajectory_path(&self, seed: u64) -> PathBuf {
        self.output_dir.join("data").join(format!("{}_seed{seed}_solution.bin", self.task))
    }

    pub fn dataset_path(&self, size: usize, seed: u64) -> PathBuf {
        self.output_dir.join("data").join(format!("{}_n{size}_seed{seed}.bin", self.task))
    }

    pub fn run_dir(&self, method: Method, size: usize, seed: u64) -> PathBuf {
        self.output_dir.join("runs").join(format!("{}_n{size}_seed{seed}", method.slug()))
    }

    pub fn checkpoint_path(&self, method: Method, size: usize, seed: u64) -> PathBuf {
        self.run_dir(method, size, seed).join("model.ckpt")
    }

    pub fn history_path(&self, method: Method, size: usize, seed: u64) -> PathBuf {
        self.run_dir(method, size, seed).join("history.csv")
    }

    pub fn metrics_path(&self, method: Method, size: usize, seed: u64) -> PathBuf {
        self.run_dir(method, size, seed).join("metrics.csv")
    }

    pub fn attack_path(&self, method: Method, size: usize, seed: u64) -> PathBuf {
        self.output_dir.join("attack").join(format!("{}_n{size}_seed{seed}.csv", method.slug()))
    }

    pub fn compare_dir(&self) -> PathBuf {
        self.output_dir.join("compare")
    }
}

fn checked_substeps(settings: &SolverSettings, times: &TimeAxis, max_step: f64) -> Result<TimeAxis> {
    let substeps = match settings.substeps {
        Some(s) => s,
        None if max_step.is_finite() => times.substeps_for(max_step),
        None => 1,
    };
    times.clone().with_substeps(substeps)
}

/// Solves the task's reference problem with the initial condition (or
/// elliptic data) drawn from `seed`.
pub fn solve_task(task: Task, s: &SolverSettings, seed: u64) -> Result<Solution> {
    let times = || TimeAxis::new(s.t_end, s.nt);
    match task {
        Task::Burgers1d => {
            let grid = Grid1D::periodic(0.0, s.length, s.nx)?;
            let h = random_fourier(&grid, s.modes, s.amplitude, seed);
            let t = checked_substeps(s, &times()?, 0.9 * burgers_max_step(&h, s.nu, grid.dx()))?;
            Ok(Solution::Trajectory1D(solve_burgers_1d(&h, s.nu, &grid, &t, Boundary::Periodic)?))
        }
        Task::Advection1d => {
            let grid = Grid1D::periodic(0.0, s.length, s.nx)?;
            let h = random_fourier(&grid, s.modes, s.amplitude, seed);
            let t = checked_substeps(s, &times()?, 0.9 * advection_max_step(s.speed, grid.dx()))?;
            Ok(Solution::Trajectory1D(solve_advection_1d(&h, s.speed, &grid, &t)?))
        }
        Task::Kdv1d => {
            let grid = Grid1D::periodic(0.0, s.length, s.nx)?;
            let h = random_fourier(&grid, s.modes, s.amplitude, seed);
            let t = checked_substeps(s, &times()?, 0.5 * kdv_max_step(&h, &grid))?;
            Ok(Solution::Trajectory1D(solve_kdv_1d(&h, &grid, &t)?))
        }
        Task::Elliptic1d => {
            let grid = Grid1D::bounded(0.0, s.length, s.nx)?;
            let (a, f) = random_elliptic_data(&grid, s.modes, seed);
            Ok(Solution::Elliptic(elliptic_solution(a, f, &grid)?))
        }
        Task::Ns2d => {
            let grid = Grid2D::periodic_square(s.length, s.nx)?;
            let w = random_vorticity(&grid, s.modes, s.amplitude, seed);
            let t = checked_substeps(s, &times()?, 0.5 * ns_max_step(&w, &grid))?;
            Ok(Solution::Trajectory2D(solve_ns_2d(&w, s.nu, &grid, &t)?))
        }
    }
}

fn provenance(cfg: &ExperimentConfig, seed: u64) -> Value {
    let s = cfg.solver_settings();
    let ic = match cfg.task {
        Task::Elliptic1d => "coefficient 1 + 0.5 c sin(pi x + phi), random sine-series source".to_string(),
        Task::Ns2d => format!("random vorticity, {} modes per axis, amplitude {}", s.modes, s.amplitude),
        _ => format!("random Fourier series, {} modes, amplitude {}", s.modes, s.amplitude),
    };
    json!({ "task": cfg.task.name(), "seed": seed, "solver": s, "initial_condition": ic })
}

/// Solves one reference problem per seed and samples one dataset per
/// (size, seed). Returns the written paths.
pub fn gen_data(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for &seed in &cfg.seeds {
        let sol = solve_task(cfg.task, &cfg.solver_settings(), seed)?;
        let prov = provenance(cfg, seed);
        let path = cfg.trajectory_path(seed);
        io::write_solution(&path, &sol, prov.clone())?;
        log::info!("wrote {}", path.display());
        written.push(path);
        for &size in &cfg.sizes {
            let ds = generate_dataset(sol.as_sampled(), size, cfg.sampling, seed)?;
            let path = cfg.dataset_path(size, seed);
            let mut p = prov.clone();
            p["num_points"] = json!(size);
            p["sampling"] = json!(cfg.sampling);
            io::write_dataset(&path, &ds, p)?;
            log::info!("wrote {}", path.display());
            written.push(path);
        }
    }
    Ok(written)
}

/// Training data for `method`: the sampled dataset, plus the same sample
/// positions taken from a transformed solution for the augmentation
/// baselines. Returns the dataset and a description of the transform.
pub fn training_dataset(
    cfg: &ExperimentConfig,
    method: Method,
    dataset: &Dataset,
    solution: &Solution,
    seed: u64,
) -> Result<(Dataset, Value)> {
    let mut out = dataset.clone();
    let extra = match (method, solution) {
        (Method::Lpsda | Method::LpsdaSmart, Solution::Trajectory1D(t)) => {
            let (aug, used) = compose_lie(t, &cfg.lie_params(), seed)?;
            Some((dataset_from_indices(&aug, &dataset.source_indices), json!({ "lie": used })))
        }
        (Method::Gcda, Solution::Elliptic(e)) => {
            let aug = gcda_transform(e, &cfg.gcda_map)?;
            Some((dataset_from_indices(&aug, &dataset.source_indices), json!({ "gcda": cfg.gcda_map })))
        }
        (Method::Standard | Method::Smart, _) => None,
        _ => return Err(Error::InvalidConfig(format!("method `{method}` does not apply to this solution"))),
    };
    match extra {
        Some((aug, desc)) => {
            out.extend(&aug)?;
            Ok((out, desc))
        }
        None => Ok((out, Value::Null)),
    }
}

/// Outcome of one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub params: ModelParams,
    pub stats: NormStats,
    pub history: TrainHistory,
    pub metrics: MetricsRecord,
}

/// Trains one (method, size, seed) run, evaluates it on the full reference
/// grid and writes checkpoint, history and metrics.
pub fn train_run(
    cfg: &ExperimentConfig,
    method: Method,
    size: usize,
    seed: u64,
    deterministic: bool,
) -> Result<RunOutput> {
    if !method.valid_for(cfg.task) {
        return Err(Error::InvalidConfig(format!("method `{method}` does not apply to `{}`", cfg.task)));
    }
    let (dataset, _) = io::read_dataset(cfg.dataset_path(size, seed))?;
    let solution = io::read_solution(cfg.trajectory_path(seed))?;
    let (train_set, augmentation) = training_dataset(cfg, method, &dataset, &solution, seed)?;
    let tc = cfg.train_config(seed, deterministic);
    if !method.adversarial() {
        log::info!("method `{method}` trains without attacks; the attack settings are ignored");
    }
    let (params, history) = if method.adversarial() {
        train_smart(&train_set, &tc)?
    } else {
        train_standard(&train_set, &tc)?
    };
    let errors = evaluate(&params, &dataset.stats, solution.as_sampled())?;
    let metrics = MetricsRecord::new(cfg.task.name(), method.label(), size, seed, errors);

    let run = json!({
        "task": cfg.task.name(), "method": method.label(), "num_points": size, "seed": seed,
        "train": tc, "augmentation": augmentation,
    });
    io::write_checkpoint(cfg.checkpoint_path(method, size, seed), &params, &dataset.stats, run)?;
    io::write_csv(cfg.history_path(method, size, seed), &history.epochs)?;
    io::write_csv(cfg.metrics_path(method, size, seed), std::slice::from_ref(&metrics))?;
    log::info!(
        "{} n={size} seed={seed}: rmse {:.4e}, final loss {:.4e}",
        method,
        metrics.rmse,
        history.final_loss().unwrap_or(f64::NAN)
    );
    Ok(RunOutput { params, stats: dataset.stats, history, metrics })
}

/// Re-evaluates a stored checkpoint against its reference solution.
pub fn evaluate_checkpoint(cfg: &ExperimentConfig, method: Method, size: usize, seed: u64) -> Result<MetricsRecord> {
    let (params, meta) = io::read_checkpoint(cfg.checkpoint_path(method, size, seed))?;
    let solution = io::read_solution(cfg.trajectory_path(seed))?;
    let errors = evaluate(&params, &meta.stats, solution.as_sampled())?;
    Ok(MetricsRecord::new(cfg.task.name(), method.label(), size, seed, errors))
}

/// One row of the attack report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackRow {
    pub epsilon: f64,
    pub kappa: f64,
    pub loss_clean: f64,
    pub loss_random: f64,
    pub loss_adv: f64,
    pub seed: u64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

/// Clean, random-noise and adversarial batch-mean losses of a model on a
/// dataset, for each budget `κ · Δx`.
pub fn attack_report(
    params: &ModelParams,
    stats: &NormStats,
    dataset: &Dataset,
    settings: &AttackSettings,
    kappas: &[f64],
    seed: u64,
) -> Result<Vec<AttackRow>> {
    if dataset.input_dim() != params.config.input_dim || dataset.output_dim() != params.config.output_dim {
        return Err(shape_err(format!(
            "model maps {} -> {} values, dataset has {} -> {}",
            params.config.input_dim,
            params.config.output_dim,
            dataset.input_dim(),
            dataset.output_dim()
        )));
    }
    let (x, y) = dataset.normalized_with(stats)?;
    let loss_clean = mean(&per_sample_loss(&params.predict(&x)?, &y)?);
    kappas
        .iter()
        .map(|&kappa| {
            let attack = AttackConfig::for_dataset_with_kappa(settings, kappa, dataset)?;
            let noisy = random_perturbation(&x, &attack, seed)?;
            let loss_random = mean(&per_sample_loss(&params.predict(&noisy)?, &y)?);
            let adv = generate_adversarial(params, &x, &y, &attack)?;
            adv.verify(&attack)?;
            Ok(AttackRow {
                epsilon: attack.epsilon,
                kappa,
                loss_clean,
                loss_random,
                loss_adv: adv.mean_loss_after(),
                seed,
            })
        })
        .collect()
}

/// Attacks a trained checkpoint on its training dataset and writes the
/// report CSV (to `out` when given).
pub fn attack_eval(
    cfg: &ExperimentConfig,
    method: Method,
    size: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(PathBuf, Vec<AttackRow>)> {
    let (params, meta) = io::read_checkpoint(cfg.checkpoint_path(method, size, seed))?;
    let (dataset, _) = io::read_dataset(cfg.dataset_path(size, seed))?;
    let rows = attack_report(&params, &meta.stats, &dataset, &cfg.attack, &cfg.attack_eval.kappas, seed)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.attack_path(method, size, seed));
    io::write_csv(&path, &rows)?;
    log::info!("wrote {}", path.display());
    Ok((path, rows))
}

/// Per-size, per-metric medians over seeds and gains against `standard`.
#[derive(Clone, Debug, PartialEq)]
pub struct GainTable {
    pub methods: Vec<Method>,
    pub rows: Vec<GainRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainRow {
    pub num_points: usize,
    pub metric: String,
    /// Median over seeds, one per method in table order.
    pub medians: Vec<f64>,
    /// Gain of each non-standard method; `None` without a standard baseline
    /// or when the baseline error is zero.
    pub gains: Vec<(Method, Option<f64>)>,
}

pub fn gain_table(records: &[MetricsRecord], methods: &[Method], sizes: &[usize]) -> Result<GainTable> {
    let mut rows = Vec::new();
    for &size in sizes {
        for metric in METRIC_NAMES {
            let medians = methods
                .iter()
                .map(|m| {
                    let values: Vec<f64> = records
                        .iter()
                        .filter(|r| r.method == m.label() && r.num_points == size)
                        .filter_map(|r| r.errors().get(metric))
                        .collect();
                    median(&values).ok_or(Error::EmptyResult)
                })
                .collect::<Result<Vec<_>>>()?;
            let base = methods.iter().position(|&m| m == Method::Standard).map(|i| medians[i]);
            let gains = methods
                .iter()
                .zip(&medians)
                .filter(|(m, _)| **m != Method::Standard)
                .map(|(&m, &v)| (m, base.and_then(|b| gain(v, b).ok())))
                .collect();
            rows.push(GainRow { num_points: size, metric: metric.to_string(), medians, gains });
        }
    }
    Ok(GainTable { methods: methods.to_vec(), rows })
}

fn write_gain_csv(path: &Path, table: &GainTable) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["num_points".to_string(), "metric".to_string()];
    header.extend(table.methods.iter().map(|m| format!("{}_median", m.slug())));
    if let Some(first) = table.rows.first() {
        header.extend(first.gains.iter().map(|(m, _)| format!("gain_{}", m.slug())));
    }
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec = vec![row.num_points.to_string(), row.metric.clone()];
        rec.extend(row.medians.iter().map(|v| v.to_string()));
        rec.extend(row.gains.iter().map(|(_, g)| g.map(|g| g.to_string()).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn plot_err(e: impl fmt::Display) -> Error {
    Error::Io(std::io::Error::other(format!("plot rendering failed: {e}")))
}

/// Median metric against training-set size, one line per method.
fn plot_metric(path: &Path, table: &GainTable, metric: &str) -> Result<()> {
    use plotters::prelude::*;

    let rows: Vec<&GainRow> = table.rows.iter().filter(|r| r.metric == metric).collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.num_points as f64).collect();
    let ys: Vec<f64> = rows.iter().flat_map(|r| r.medians.iter().copied()).collect();
    let (x_lo, x_hi) = (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(0.0, f64::max));
    let (x_lo, x_hi) = if x_lo == x_hi { (x_lo / 2.0, x_hi * 2.0) } else { (x_lo, x_hi) };
    let y_hi = ys.iter().copied().fold(0.0, f64::max);
    let y_hi = if y_hi > 0.0 { y_hi * 1.1 } else { 1.0 };

    let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(metric, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d((x_lo..x_hi).log_scale(), 0.0..y_hi)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("training points").y_desc(metric).draw().map_err(plot_err)?;
    for (i, m) in table.methods.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.num_points as f64, r.medians[i])).collect();
        chart
            .draw_series(LineSeries::new(points, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(m.label())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Collects every run's metrics, writes `metrics.csv`, `gains.csv` and one
/// SVG plot per metric under `compare/`.
pub fn compare(cfg: &ExperimentConfig) -> Result<GainTable> {
    let mut records = Vec::new();
    for &method in &cfg.methods {
        for &size in &cfg.sizes {
            for &seed in &cfg.seeds {
                let rows: Vec<MetricsRecord> = io::read_csv(cfg.metrics_path(method, size, seed))?;
                let row = rows
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::MissingRun(cfg.metrics_path(method, size, seed)))?;
                records.push(row);
            }
        }
    }
    let dir = cfg.compare_dir();
    io::write_csv(dir.join("metrics.csv"), &records)?;
    let table = gain_table(&records, &cfg.methods, &cfg.sizes)?;
    write_gain_csv(&dir.join("gains.csv"), &table)?;
    for metric in METRIC_NAMES {
        plot_metric(&dir.join(format!("{metric}.svg")), &table, metric)?;
    }
    log::info!("wrote comparison to {}", dir.display());
    Ok(table)
}

/// Data generation, every training run and the comparison, in order.
pub fn run_all(cfg: &ExperimentConfig, deterministic: bool) -> Result<GainTable> {
    gen_data(cfg)?;
    for &method in &cfg.methods {
        for &size in &cfg.sizes {
            for &seed in &cfg.seeds {
                train_run(cfg, method, size, seed, deterministic)?;
            }
        }
    }
    compare(cfg)
}
