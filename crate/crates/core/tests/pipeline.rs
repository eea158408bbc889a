use std::fs;

use smartpde::experiment::{self, ExperimentConfig, Method, Task};
use smartpde::metrics::METRIC_NAMES;
use smartpde::Error;

fn config(task: &str, methods: &str, dir: &std::path::Path) -> ExperimentConfig {
    let text = format!(
        r#"
        task = "{task}"
        sizes = [16, 32]
        seeds = [0, 1]
        methods = [{methods}]
        output_dir = "{}"
        [solver]
        nx = 32
        nt = 6
        [train]
        hidden = [8, 8]
        epochs = 20
        batch_size = 16
        [attack_eval]
        kappas = [0.0, 0.1]
        "#,
        dir.display()
    );
    ExperimentConfig::from_toml_str(&text).unwrap()
}

#[test]
fn full_pipeline_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("burgers1d", r#""standard", "smart", "lpsda+smart""#, dir.path());
    let table = experiment::run_all(&cfg, true).unwrap();
    assert_eq!(table.rows.len(), 2 * METRIC_NAMES.len());
    for row in &table.rows {
        assert_eq!(row.gains.len(), 2);
        assert!(row.gains.iter().all(|(_, g)| g.is_some()));
    }
    let gains = fs::read_to_string(cfg.compare_dir().join("gains.csv")).unwrap();
    assert!(gains.starts_with("num_points,metric,standard_median,smart_median,lpsda_smart_median,gain_smart,gain_lpsda_smart"));
    for metric in METRIC_NAMES {
        let svg = fs::read_to_string(cfg.compare_dir().join(format!("{metric}.svg"))).unwrap();
        assert!(svg.contains("<svg"));
    }
    let metrics = fs::read_to_string(cfg.metrics_path(Method::Smart, 32, 1)).unwrap();
    assert!(metrics.starts_with("task,method,num_points,seed,rmse,n_rmse,rmse_c,rmse_b,max_error\n"));

    let (path, rows) = experiment::attack_eval(&cfg, Method::Smart, 32, 1, None).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].loss_adv, rows[0].loss_clean);
    assert!(rows[1].loss_adv >= rows[1].loss_clean);
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("epsilon,kappa,loss_clean,loss_random,loss_adv,seed\n"));

    let again = experiment::evaluate_checkpoint(&cfg, Method::Smart, 32, 1).unwrap();
    let stored: Vec<smartpde::metrics::MetricsRecord> = smartpde::io::read_csv(cfg.metrics_path(Method::Smart, 32, 1)).unwrap();
    assert_eq!(again, stored[0]);
}

#[test]
fn every_task_trains() {
    for (task, methods) in [
        ("advection1d", r#""standard""#),
        ("kdv1d", r#""lpsda""#),
        ("elliptic1d", r#""gcda", "smart""#),
        ("ns2d", r#""smart""#),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(task, methods, dir.path());
        if cfg.task == Task::Ns2d {
            cfg.solver.nx = Some(16);
        }
        if cfg.task == Task::Elliptic1d {
            cfg.solver.nx = Some(33);
        }
        experiment::gen_data(&cfg).unwrap();
        for &m in &cfg.methods {
            let run = experiment::train_run(&cfg, m, 32, 0, true).unwrap();
            assert!(run.metrics.is_valid(), "{task} {m}: {:?}", run.metrics);
        }
    }
}

#[test]
fn compare_reports_missing_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("advection1d", r#""standard""#, dir.path());
    assert!(matches!(experiment::compare(&cfg), Err(Error::MissingRun(_))));
}

#[test]
fn plots_have_labels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("advection1d", r#""standard", "smart""#, dir.path());
    experiment::run_all(&cfg, true).unwrap();
    let svg = fs::read_to_string(cfg.compare_dir().join("rmse.svg")).unwrap();
    assert!(svg.contains("<text"), "{svg}");
    assert!(svg.contains("training points"));
    assert!(svg.contains("smart"));
}

#[test]
fn gen_data_writes_one_file_per_seed_and_size() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("burgers1d", r#""standard""#, dir.path());
    cfg.sizes = vec![32];
    cfg.seeds = vec![0];
    let written = experiment::gen_data(&cfg).unwrap();
    assert_eq!(written.len(), 2);
    assert_eq!(fs::read_dir(dir.path().join("data")).unwrap().count(), 2);
    for path in &written {
        let header = smartpde::io::audit_file(path).unwrap();
        let bytes = fs::read(path).unwrap();
        let values: usize = header.arrays.iter().map(|a| a.shape.iter().product::<usize>()).sum();
        assert_eq!(bytes.len() - header.payload_offset, 8 * values);
    }
}

#[test]
fn history_has_one_row_per_epoch_and_gains_are_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("advection1d", r#""standard", "smart""#, dir.path());
    experiment::run_all(&cfg, true).unwrap();
    let history = fs::read_to_string(cfg.history_path(Method::Smart, 16, 0)).unwrap();
    assert_eq!(history.lines().count(), 1 + cfg.train.epochs);

    let mut reader = csv::Reader::from_path(cfg.compare_dir().join("gains.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let base: f64 = rec[col("standard_median")].parse().unwrap();
        let ours: f64 = rec[col("smart_median")].parse().unwrap();
        let emitted: f64 = rec[col("gain_smart")].parse().unwrap();
        assert!(((1.0 - ours / base) * 100.0 - emitted).abs() < 0.01);
        rows += 1;
    }
    assert_eq!(rows, cfg.sizes.len() * METRIC_NAMES.len());
}

#[test]
fn identical_checkpoints_give_zero_gain() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("advection1d", r#""standard", "smart""#, dir.path());
    cfg.train.adv_ratio = 0.0;
    let table = experiment::run_all(&cfg, true).unwrap();
    assert!(table.rows.iter().all(|r| r.gains[0].1 == Some(0.0)));
}
