use std::f64::consts::PI;

use smartpde::pde::initial::{kdv_soliton, random_fourier, taylor_green_vorticity};
use smartpde::pde::{
    burgers_max_step, divergence, elliptic_solution, kdv_max_step, ns_max_step, solve_burgers_1d, solve_kdv_1d,
    solve_ns_2d, Boundary, Grid1D, Grid2D, TimeAxis,
};
use smartpde::Error;

#[test]
fn taylor_green_decays_at_the_viscous_rate() {
    let (k, nu, t_end) = (1.0, 0.05, 1.0);
    let grid = Grid2D::periodic_square(2.0 * PI, 32).unwrap();
    let w = taylor_green_vorticity(&grid, k);
    let times = TimeAxis::new(t_end, 5).unwrap();
    let times = times.clone().with_substeps(times.substeps_for(0.5 * ns_max_step(&w, &grid))).unwrap();
    let traj = solve_ns_2d(&w, nu, &grid, &times).unwrap();
    let n = grid.len();
    for it in 0..traj.nt() {
        let decay = (-2.0 * nu * k * k * times.time(it)).exp();
        let mut err: f64 = 0.0;
        for (j, &y) in grid.y.points().iter().enumerate() {
            for (i, &x) in grid.x.points().iter().enumerate() {
                let exact = (k * x).sin() * (k * y).cos() * decay;
                err = err.max((traj.u[it * n + j * grid.x.nx + i] - exact).abs());
            }
        }
        assert!(err < 1e-6, "t = {}: {err}", times.time(it));
    }
}

#[test]
fn kdv_soliton_travels_at_its_speed() {
    let (c, length, t_end) = (1.0, 40.0, 4.0);
    let grid = Grid1D::periodic(0.0, length, 256).unwrap();
    let h = kdv_soliton(&grid, c, 10.0);
    let times = TimeAxis::new(t_end, 2).unwrap();
    let times = times.clone().with_substeps(times.substeps_for(0.5 * kdv_max_step(&h, &grid))).unwrap();
    let traj = solve_kdv_1d(&h, &grid, &times).unwrap();
    let last = traj.slice(1);
    // Peak location refined by a parabola through the three largest samples.
    let i = (0..grid.nx).max_by(|&a, &b| last[a].total_cmp(&last[b])).unwrap();
    let (l, m, r) = (last[i - 1], last[i], last[i + 1]);
    let peak = grid.point(i) + 0.5 * grid.dx() * (l - r) / (l - 2.0 * m + r);
    let speed = (peak - 10.0) / t_end;
    assert!((speed - c).abs() <= 0.02 * c, "speed {speed}");
    let mean0: f64 = h.iter().sum::<f64>() / h.len() as f64;
    let mean1: f64 = last.iter().sum::<f64>() / last.len() as f64;
    assert!((mean0 - mean1).abs() < 1e-10);
}

#[test]
fn burgers_rejects_unstable_steps() {
    let grid = Grid1D::periodic(0.0, 1.0, 256).unwrap();
    let h = random_fourier(&grid, 4, 0.5, 0);
    let max = burgers_max_step(&h, 0.1, grid.dx());
    let times = TimeAxis::new(10.0 * max, 2).unwrap();
    assert!(matches!(
        solve_burgers_1d(&h, 0.1, &grid, &times, Boundary::Periodic),
        Err(Error::UnstableConfig(_))
    ));
}

#[test]
fn ns_stays_divergence_free_from_random_data() {
    let grid = Grid2D::periodic_square(2.0 * PI, 32).unwrap();
    let w = smartpde::pde::initial::random_vorticity(&grid, 3, 1.0, 7);
    let times = TimeAxis::new(1.0, 6).unwrap();
    let times = times.clone().with_substeps(times.substeps_for(0.5 * ns_max_step(&w, &grid))).unwrap();
    let traj = solve_ns_2d(&w, 0.01, &grid, &times).unwrap();
    let n = grid.len();
    for it in 0..traj.nt() {
        let div = divergence(&grid, &traj.u[it * n..(it + 1) * n], &traj.v[it * n..(it + 1) * n]);
        assert!(div.iter().all(|d| d.abs() < 1e-6));
    }
}

#[test]
fn elliptic_constant_coefficient_is_exact_for_quadratics() {
    // u = x (1 - x) solves u'' = -2; the three-point stencil is exact.
    let grid = Grid1D::bounded(0.0, 1.0, 17).unwrap();
    let sol = elliptic_solution(vec![1.0; 16], vec![-2.0; 17], &grid).unwrap();
    for (x, u) in grid.points().iter().zip(&sol.u) {
        assert!((u - x * (1.0 - x)).abs() < 1e-13);
    }
}
