use std::fs;
use std::path::Path;
use std::process::Command;

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let text = format!("output_dir = \"{}\"\nsizes = [16]\nseeds = [0]\n{body}", dir.join("out").display());
    fs::write(&path, text).unwrap();
    path
}

const SMALL: &str = "[solver]\nnx = 16\nnt = 4\n[train]\nhidden = [8]\nepochs = 10\n";

fn smartpde(args: &[&str], config: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_smartpde"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn full_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!("task = \"burgers1d\"\nmethods = [\"standard\", \"smart\"]\n{SMALL}"),
    );
    assert_eq!(smartpde(&["gen-data"], &cfg).0, 0);
    assert_eq!(smartpde(&["train", "--method", "smart", "--size", "16", "--seed", "0"], &cfg).0, 0);
    assert_eq!(smartpde(&["compare"], &cfg).0, 6);
    assert_eq!(smartpde(&["train", "--method", "standard"], &cfg).0, 0);
    assert_eq!(smartpde(&["attack-eval", "--method", "smart"], &cfg).0, 0);
    assert_eq!(smartpde(&["compare"], &cfg).0, 0);
    let attack = fs::read_to_string(dir.path().join("out/attack/smart_n16_seed0.csv")).unwrap();
    assert!(attack.starts_with("epsilon,kappa,loss_clean,loss_random,loss_adv,seed\n"));
    assert!(dir.path().join("out/compare/gains.csv").exists());
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "task = \"burgers1d\"\nepochs = 3\n");
    assert_eq!(smartpde(&["gen-data"], &cfg).0, 2);
    let cfg = write_config(dir.path(), "d.toml", "task = \"burgers1d\"\n");
    assert_eq!(smartpde(&["train", "--method", "gcda"], &cfg).0, 2);
    assert_eq!(smartpde(&["gen-data"], &dir.path().join("missing.toml")).0, 2);
}

#[test]
fn unstable_solver_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "task = \"burgers1d\"\n[solver]\nnx = 256\nnt = 3\nnu = 0.1\nsubsteps = 1\n",
    );
    assert_eq!(smartpde(&["gen-data"], &cfg).0, 3);
}

#[test]
fn diverged_training_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "task = \"burgers1d\"\n[solver]\nnx = 16\nnt = 4\n[train]\nhidden = [8]\nepochs = 50\n[train.optimizer]\nlr = 1e300\n",
    );
    assert_eq!(smartpde(&["gen-data"], &cfg).0, 0);
    let (code, stderr) = smartpde(&["train"], &cfg);
    assert_eq!(code, 4, "{stderr}");
}

#[test]
fn mismatched_checkpoint_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let ns = write_config(dir.path(), "ns.toml", &format!("task = \"ns2d\"\nmethods = [\"smart\"]\n{SMALL}"));
    assert_eq!(smartpde(&["gen-data"], &ns).0, 0);
    assert_eq!(smartpde(&["train"], &ns).0, 0);
    let burgers = write_config(dir.path(), "b.toml", &format!("task = \"burgers1d\"\nmethods = [\"smart\"]\n{SMALL}"));
    assert_eq!(smartpde(&["gen-data"], &burgers).0, 0);
    assert_eq!(smartpde(&["attack-eval"], &burgers).0, 5);
}

#[test]
fn missing_inputs_exit_6() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("task = \"advection1d\"\n{SMALL}"));
    assert_eq!(smartpde(&["train"], &cfg).0, 6);
    assert_eq!(smartpde(&["compare"], &cfg).0, 6);
}
