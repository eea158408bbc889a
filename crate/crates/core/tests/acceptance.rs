//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.
//!
//! The training sweep behind criteria 3 to 6 uses the default training
//! settings (4x64 tanh MLP, 2000 epochs, Adam 1e-3, kappa 0.08, k = 5,
//! adv_ratio 0.5) on the default Burgers problem (nu = 0.01) with seeds 0, 1, 2.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smartpde::adversarial::{generate_adversarial, input_gradient, AttackConfig, AttackSettings};
use smartpde::augmentation::{compose_lie, gcda_transform, kdv_residual, lie_transform, CoordinateMap, LieKind, LieParams};
use smartpde::autodiff::Tensor;
use smartpde::experiment::{self, attack_report, solve_task, ExperimentConfig, Method, RunOutput, Task};
use smartpde::io::Solution;
use smartpde::metrics::{gain, max_error, median, n_rmse, rmse, rmse_boundary, rmse_conserved};
use smartpde::pde::initial::random_fourier;
use smartpde::pde::{
    advection_max_step, burgers_max_step, divergence, elliptic_solution, generate_dataset, ns_max_step,
    solve_advection_1d, solve_burgers_1d, solve_ns_2d, Boundary, Dataset, FieldLayout, Grid1D, Grid2D, Sampling,
    TimeAxis,
};
use smartpde::surrogate::{per_sample_loss, LossKind, MlpConfig, ModelParams};
use smartpde::training::{coverage, coverage_with_adversarial, training_attack};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

// 1. Input gradients against central finite differences.
fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let cfg = MlpConfig::with_default_hidden(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (h, mut worst, mut checked) = (1e-6, 0.0_f64, 0);
    for pair in 0..100 {
        let params = ModelParams::init(&cfg, pair).unwrap();
        let rows = 4;
        let x = Tensor::matrix(rows, 2, (0..2 * rows).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
        let y = Tensor::matrix(rows, 1, (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let loss = |x: &Tensor| {
            let l = per_sample_loss(&params.predict(x).unwrap(), &y).unwrap();
            l.iter().sum::<f64>() / l.len() as f64
        };
        let g = input_gradient(&params, &x, &y, LossKind::Scalar).unwrap();
        for i in 0..x.len() {
            let gi = g.data()[i];
            if gi.abs() <= 1e-8 {
                continue;
            }
            let (mut p, mut m) = (x.clone(), x.clone());
            p.data_mut()[i] += h;
            m.data_mut()[i] -= h;
            let fd = (loss(&p) - loss(&m)) / (2.0 * h);
            worst = worst.max((gi - fd).abs() / gi.abs());
            checked += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-5 && within(t, 60),
        format!("max relative error {worst:.2e} over {checked} components (<= 1e-5), {:.1}s", t.as_secs_f64()),
    )
}

// 2. Budget, domain and frozen-time invariants over 1000 adversarial samples.
fn attack_invariants() -> Outcome {
    let start = Instant::now();
    let small = |task: Task| {
        let mut s = task.default_solver();
        match task {
            Task::Ns2d => s.nx = 16,
            Task::Elliptic1d => s.nx = 257,
            _ => {}
        }
        s
    };
    let mut total = 0;
    let mut violations = 0;
    for (i, task) in [Task::Burgers1d, Task::Kdv1d, Task::Elliptic1d, Task::Ns2d].into_iter().enumerate() {
        let sol = solve_task(task, &small(task), i as u64).unwrap();
        let ds = generate_dataset(sol.as_sampled(), 250, Sampling::UniformRandom, i as u64).unwrap();
        let (x, y) = ds.normalized().unwrap();
        let mlp = MlpConfig::new(ds.input_dim(), vec![32, 32], ds.output_dim()).unwrap();
        let params = ModelParams::init(&mlp, 10 + i as u64).unwrap();
        let attack = AttackConfig::for_dataset(&AttackSettings::default(), &ds).unwrap();
        let adv = generate_adversarial(&params, &x, &y, &attack).unwrap();
        let d = x.cols();
        for r in 0..x.rows() {
            total += 1;
            let ok = (0..d).all(|j| {
                let (o, p) = (x.get(r, j), adv.perturbed.get(r, j));
                if !ds.spatial_mask[j] {
                    return o.to_bits() == p.to_bits();
                }
                let budget = (p - o).abs() <= attack.epsilon + 4.0 * f64::EPSILON * o.abs().max(1.0);
                budget && (0.0..=1.0).contains(&p)
            });
            if !ok {
                violations += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        violations == 0 && total == 1000 && within(t, 60),
        format!("{violations} violations in {total} samples over 4 tasks, {:.1}s", t.as_secs_f64()),
    )
}

/// Trained Burgers models shared by criteria 3 to 6.
struct Sweep {
    config: ExperimentConfig,
    runs: BTreeMap<(&'static str, usize, u64), RunOutput>,
    /// Training time per (method, size) over all seeds.
    times: BTreeMap<(&'static str, usize), Duration>,
    elapsed: Duration,
}

impl Sweep {
    fn run(dir: &Path) -> Sweep {
        let start = Instant::now();
        let config = ExperimentConfig::from_toml_str(&format!(
            "task = \"burgers1d\"\nsizes = [32, 64, 128, 512]\nseeds = [0, 1, 2]\noutput_dir = \"{}\"",
            dir.display()
        ))
        .unwrap();
        experiment::gen_data(&config).unwrap();
        let mut runs = BTreeMap::new();
        let mut times = BTreeMap::new();
        let plan = [
            (Method::Standard, 32),
            (Method::Smart, 32),
            (Method::Standard, 64),
            (Method::Smart, 64),
            (Method::Standard, 128),
            (Method::Standard, 512),
            (Method::Smart, 512),
        ];
        for (method, size) in plan {
            let t = Instant::now();
            for &seed in &config.seeds {
                let out = experiment::train_run(&config, method, size, seed, true).unwrap();
                println!(
                    "  trained {:<8} n={size:<3} seed={seed}: rmse {:.4e} [{:.0}s]",
                    method.label(),
                    out.metrics.rmse,
                    start.elapsed().as_secs_f64()
                );
                runs.insert((method.label(), size, seed), out);
            }
            times.insert((method.label(), size), t.elapsed());
        }
        Sweep { config, runs, times, elapsed: start.elapsed() }
    }

    fn median_rmse(&self, method: Method, size: usize) -> f64 {
        let v: Vec<f64> = self.config.seeds.iter().map(|&s| self.runs[&(method.label(), size, s)].metrics.rmse).collect();
        median(&v).unwrap()
    }

    fn rmse_gain(&self, size: usize) -> f64 {
        gain(self.median_rmse(Method::Smart, size), self.median_rmse(Method::Standard, size)).unwrap()
    }

    fn dataset(&self, size: usize, seed: u64) -> Dataset {
        smartpde::io::read_dataset(self.config.dataset_path(size, seed)).unwrap().0
    }
}

// 3. Adversarial loss against random noise of the same budget.
fn adversarial_beats_random(sweep: &Sweep) -> Outcome {
    let start = Instant::now();
    let mut ratios = Vec::new();
    for &seed in &sweep.config.seeds {
        let run = &sweep.runs[&("standard", 128, seed)];
        let ds = sweep.dataset(128, seed);
        let rows = attack_report(&run.params, &run.stats, &ds, &AttackSettings::default(), &[0.08], seed).unwrap();
        ratios.push(rows[0].loss_adv / rows[0].loss_random);
    }
    let m = median(&ratios).unwrap();
    let t = start.elapsed() + sweep.times[&("standard", 128)];
    outcome(
        m >= 1.2 && within(t, 600),
        format!(
            "median adv/random loss ratio {m:.3} (>= 1.2), per seed {ratios:.3?}, {:.0}s with training",
            t.as_secs_f64()
        ),
    )
}

// 4. SMART gain at 32 and 64 points.
fn sparse_data_gain(sweep: &Sweep) -> Outcome {
    let (g32, g64) = (sweep.rmse_gain(32), sweep.rmse_gain(64));
    outcome(
        g32 >= 10.0 && g64 >= 10.0 && within(sweep.elapsed, 1800),
        format!(
            "median RMSE gain {g32:.2}% at 32, {g64:.2}% at 64 (>= 10%); standard {:.4e}/{:.4e}, smart {:.4e}/{:.4e}; sweep {:.0}s",
            sweep.median_rmse(Method::Standard, 32),
            sweep.median_rmse(Method::Standard, 64),
            sweep.median_rmse(Method::Smart, 32),
            sweep.median_rmse(Method::Smart, 64),
            sweep.elapsed.as_secs_f64()
        ),
    )
}

// 5. Gain shrinks with more data.
fn diminishing_gain(sweep: &Sweep) -> Outcome {
    let (g32, g512) = (sweep.rmse_gain(32), sweep.rmse_gain(512));
    outcome(g32 > g512, format!("median RMSE gain {g32:.2}% at 32 vs {g512:.2}% at 512"))
}

// 6. Coverage of SMART on S ∪ S_adv against Standard on S.
fn coverage_direction(sweep: &Sweep) -> Outcome {
    let (mut smart, mut standard) = (Vec::new(), Vec::new());
    for &seed in &sweep.config.seeds {
        let ds = sweep.dataset(32, seed);
        let std_run = &sweep.runs[&("standard", 32, seed)];
        standard.push(coverage(&std_run.params, &ds).unwrap());
        let smart_run = &sweep.runs[&("smart", 32, seed)];
        let attack = training_attack(&sweep.config.attack, &ds).unwrap();
        let (x, y) = ds.normalized().unwrap();
        let adv = generate_adversarial(&smart_run.params, &x, &y, &attack).unwrap();
        smart.push(coverage_with_adversarial(&smart_run.params, &ds, &adv.perturbed).unwrap());
    }
    let (s, b) = (median(&smart).unwrap(), median(&standard).unwrap());
    outcome(s <= b, format!("median C(smart, S + S_adv) {s:.4e} vs C(standard, S) {b:.4e}"))
}

// 7. Lie transforms keep KdV solutions.
fn symmetry_preservation() -> Outcome {
    let start = Instant::now();
    let Solution::Trajectory1D(traj) = solve_task(Task::Kdv1d, &Task::Kdv1d.default_solver(), 0).unwrap() else {
        unreachable!()
    };
    let base = kdv_residual(&traj).unwrap();
    let params = LieParams::default();
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let (t, _) = compose_lie(&traj, &params, seed).unwrap();
        worst = worst.max(kdv_residual(&t).unwrap() / base);
    }
    let identity = [LieKind::G1, LieKind::G2, LieKind::G3, LieKind::G4]
        .into_iter()
        .all(|k| lie_transform(&traj, k, 0.0).unwrap() == traj);
    let t = start.elapsed();
    outcome(
        worst <= 5.0 && identity && within(t, 300),
        format!(
            "worst residual ratio {worst:.3} (<= 5) over 50 transforms, base residual {base:.3e}, eps = 0 identity {identity}, {:.1}s",
            t.as_secs_f64()
        ),
    )
}

// 8. Coordinate-transformed elliptic problems.
fn covariance_transform() -> Outcome {
    // (a u')' = f with a = 1 + x and u = sin(pi x).
    let grid = Grid1D::bounded(0.0, 1.0, 65).unwrap();
    let dx = grid.dx();
    let a: Vec<f64> = (0..grid.nx - 1).map(|i| 1.0 + grid.point(i) + dx / 2.0).collect();
    let f: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| PI * (PI * x).cos() - (1.0 + x) * PI * PI * (PI * x).sin())
        .collect();
    let sol = elliptic_solution(a, f, &grid).unwrap();
    let original = grid
        .points()
        .iter()
        .zip(&sol.u)
        .map(|(&x, u)| (u - (PI * x).sin()).abs())
        .fold(0.0, f64::max);

    let mapped = gcda_transform(&sol, &CoordinateMap::Cubic).unwrap();
    let resolved = elliptic_solution(mapped.a_faces.clone(), mapped.f.clone(), &grid).unwrap();
    let transformed = resolved.u.iter().zip(&mapped.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let id = gcda_transform(&sol, &CoordinateMap::Identity).unwrap();
    let id_err = [(&id.u, &sol.u), (&id.f, &sol.f), (&id.a_faces, &sol.a_faces)]
        .iter()
        .flat_map(|(p, q)| p.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    outcome(
        transformed <= 10.0 * original && id_err <= 1e-10,
        format!(
            "cubic map re-solve error {transformed:.3e} vs original discretization error {original:.3e} (ratio {:.2}, <= 10); identity error {id_err:.1e}",
            transformed / original
        ),
    )
}

// 9. Reference solvers against exact behaviour.
fn solver_oracles() -> Outcome {
    // Advection of sin(2 pi x) for half a period.
    let grid = Grid1D::periodic(0.0, 1.0, 256).unwrap();
    let h: Vec<f64> = grid.points().iter().map(|x| (2.0 * PI * x).sin()).collect();
    let times = TimeAxis::new(0.5, 2).unwrap();
    let times = times.clone().with_substeps(times.substeps_for(0.9 * advection_max_step(1.0, grid.dx()))).unwrap();
    let adv = solve_advection_1d(&h, 1.0, &grid, &times).unwrap();
    let l2 = (grid
        .points()
        .iter()
        .zip(adv.slice(1))
        .map(|(x, u)| (u - (2.0 * PI * (x - 0.5)).sin()).powi(2))
        .sum::<f64>()
        * grid.dx())
    .sqrt();

    // Manufactured elliptic solution at three resolutions.
    let elliptic_err = |nx: usize| {
        let g = Grid1D::bounded(0.0, 1.0, nx).unwrap();
        let d = g.dx();
        let a = (0..nx - 1).map(|i| 1.0 + g.point(i) + d / 2.0).collect();
        let f = g.points().iter().map(|&x| PI * (PI * x).cos() - (1.0 + x) * PI * PI * (PI * x).sin()).collect();
        let s = elliptic_solution(a, f, &g).unwrap();
        g.points().iter().zip(&s.u).map(|(&x, u)| (u - (PI * x).sin()).abs()).fold(0.0, f64::max)
    };
    let errs = [elliptic_err(33), elliptic_err(65), elliptic_err(129)];
    let orders = [(errs[0] / errs[1]).log2(), (errs[1] / errs[2]).log2()];
    let second_order = orders.iter().all(|p| (1.9..=2.1).contains(p));

    // Burgers mass per stored step.
    let grid = Grid1D::periodic(0.0, 1.0, 128).unwrap();
    let h = random_fourier(&grid, 4, 0.5, 3);
    let times = TimeAxis::new(1.0, 101).unwrap();
    let times = times.clone().with_substeps(times.substeps_for(0.9 * burgers_max_step(&h, 0.01, grid.dx()))).unwrap();
    let b = solve_burgers_1d(&h, 0.01, &grid, &times, Boundary::Periodic).unwrap();
    let mass = |it: usize| b.slice(it).iter().sum::<f64>() * grid.dx();
    let drift = (1..b.nt()).map(|it| (mass(it) - mass(it - 1)).abs()).fold(0.0, f64::max);

    // NS divergence.
    let g2 = Grid2D::periodic_square(2.0 * PI, 32).unwrap();
    let w = smartpde::pde::initial::random_vorticity(&g2, 2, 1.0, 0);
    let times = TimeAxis::new(1.0, 11).unwrap();
    let times = times.clone().with_substeps(times.substeps_for(0.5 * ns_max_step(&w, &g2))).unwrap();
    let ns = solve_ns_2d(&w, 0.01, &g2, &times).unwrap();
    let n = g2.len();
    let div = (0..ns.nt())
        .flat_map(|it| divergence(&g2, &ns.u[it * n..(it + 1) * n], &ns.v[it * n..(it + 1) * n]))
        .fold(0.0, |m: f64, d| m.max(d.abs()));

    outcome(
        l2 < 1e-2 && second_order && drift <= 1e-10 && div < 1e-6,
        format!(
            "advection L2 {l2:.2e} (< 1e-2); elliptic orders {:.3}, {:.3}; Burgers mass drift per step {drift:.1e} (<= 1e-10); NS max divergence {div:.1e} (< 1e-6)",
            orders[0], orders[1]
        ),
    )
}

// 10. Metric examples.
fn metric_suite() -> Outcome {
    let layout = |slices, space, boundary: Vec<bool>| FieldLayout { slices, space, boundary, cell_measure: 0.25 };
    let ends = vec![true, false, false, true];
    let truth = [1.0, 2.0, 3.0, 4.0, -1.0, 0.5, 2.0, 1.5];
    let shifted: Vec<f64> = truth.iter().map(|v| v + 0.5).collect();
    let doubled: Vec<f64> = truth.iter().map(|v| 2.0 * v).collect();
    let l = layout(2, 4, ends.clone());
    let mut interior = truth;
    interior[1] += 3.0;
    interior[6] -= 2.0;
    let mut boundary = truth;
    for i in [0, 3, 4, 7] {
        boundary[i] += 0.5;
    }
    let mut one_slice = truth;
    for v in &mut one_slice[4..] {
        *v += 0.5;
    }
    let checks: Vec<(&str, bool)> = vec![
        ("rmse identical", rmse(&truth, &truth).unwrap() == 0.0),
        ("rmse constant offset", rmse(&shifted, &truth).unwrap() == 0.5),
        ("rmse (1,2) vs (0,0)", rmse(&[1.0, 2.0], &[0.0, 0.0]).unwrap() == 2.5_f64.sqrt()),
        ("n_rmse identical", n_rmse(&truth, &truth).unwrap() == 0.0),
        ("n_rmse doubled", n_rmse(&doubled, &truth).unwrap() == 1.0),
        ("n_rmse zero truth", n_rmse(&[1.0], &[0.0]).is_err()),
        ("rmse_c identical", rmse_conserved(&truth, &truth, &l).unwrap() == 0.0),
        ("rmse_c offset", rmse_conserved(&shifted, &truth, &l).unwrap() == 0.5),
        ("rmse_b identical", rmse_boundary(&truth, &truth, &l).unwrap() == 0.0),
        ("rmse_b interior error", rmse_boundary(&interior, &truth, &l).unwrap() == 0.0),
        ("rmse_b boundary error", rmse_boundary(&boundary, &truth, &l).unwrap() == 0.5),
        ("max_error identical", max_error(&truth, &truth, &l).unwrap() == 0.0),
        ("max_error one slice", max_error(&one_slice, &truth, &l).unwrap() == 0.5),
        ("gain paper row", (gain(0.00284, 0.00506).unwrap() - 43.87).abs() <= 0.01),
        ("gain equal", gain(0.1, 0.1).unwrap() == 0.0),
        ("gain zero error", gain(0.0, 0.1).unwrap() == 100.0),
        ("gain zero baseline", gain(0.1, 0.0).is_err()),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    outcome(
        failed.is_empty(),
        format!(
            "{}/{} examples, gain(0.00284, 0.00506) = {:.4}%{}",
            checks.len() - failed.len(),
            checks.len(),
            gain(0.00284, 0.00506).unwrap(),
            if failed.is_empty() { String::new() } else { format!("; failed: {failed:?}") }
        ),
    )
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

// 11. Byte-identical outputs across two runs.
fn reproducibility() -> Outcome {
    let run = |dir: &Path| {
        let cfg = ExperimentConfig::from_toml_str(&format!(
            r#"
            task = "burgers1d"
            sizes = [32]
            seeds = [0, 1]
            methods = ["standard", "smart", "lpsda+smart"]
            output_dir = "{}"
            [train]
            epochs = 200
            "#,
            dir.display()
        ))
        .unwrap();
        experiment::run_all(&cfg, true).unwrap();
        for &m in &cfg.methods {
            experiment::attack_eval(&cfg, m, 32, 0, None).unwrap();
        }
        read_tree(dir)
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ta, tb) = (run(a.path()), run(b.path()));
    let differing: Vec<&String> = ta.iter().filter(|(k, v)| tb.get(*k) != Some(v)).map(|(k, _)| k).collect();
    let has = |ext: &str| ta.keys().filter(|k| k.ends_with(ext)).count();
    outcome(
        differing.is_empty() && ta.len() == tb.len() && has(".bin") > 0 && has(".ckpt") > 0,
        format!(
            "{} files ({} .bin, {} .ckpt, {} .csv, {} .svg), {} differ",
            ta.len(),
            has(".bin"),
            has(".ckpt"),
            has(".csv"),
            has(".svg"),
            differing.len()
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |n: usize, name: &'static str, o: Outcome| {
        println!("criterion {n:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    record(1, "gradient correctness", gradient_correctness());
    record(2, "attack invariants", attack_invariants());
    record(7, "symmetry preservation", symmetry_preservation());
    record(8, "covariance transform", covariance_transform());
    record(9, "reference solver oracles", solver_oracles());
    record(10, "metric unit suite", metric_suite());
    record(11, "reproducibility", reproducibility());

    let dir = tempfile::tempdir().unwrap();
    let sweep = Sweep::run(dir.path());
    record(3, "adversarial loss exceeds random", adversarial_beats_random(&sweep));
    record(4, "sparse-data gain", sparse_data_gain(&sweep));
    record(5, "diminishing gain", diminishing_gain(&sweep));
    record(6, "coverage inequality", coverage_direction(&sweep));

    results.sort_by_key(|r| r.0);
    println!();
    for (n, name, o) in &results {
        println!("criterion {n:>2}: {} ({name})", if o.pass { "PASS" } else { "FAIL" });
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
