use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_femtoreuse"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn validate_ok_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate"], dir.path());
    assert!(out.status.success());

    let out = run(&["validate", "--set", "n_trials=0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_trials"));

    let out = run(&["validate", "--set", "nonsense=1"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(
        dir.path().join("bad.cfg"),
        "seed = 1\nfemto_fraction = lots\n",
    )
    .unwrap();
    let out = run(&["validate", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = run(&["validate", "--config", "missing.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_trials_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "run",
            "--experiment",
            "fig5",
            "--set",
            "n_trials=0",
            "--out",
            "fig5.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn printed_config_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let small = [
        "--set",
        "n_trials=5000",
        "--set",
        "femto_count=300",
        "--seed",
        "9",
    ];
    let printed = run(&[&["print-config"], &small[..]].concat(), dir.path());
    assert!(printed.status.success());
    std::fs::write(dir.path().join("effective.cfg"), &printed.stdout).unwrap();

    let a = run(
        &[
            &["run", "--experiment", "fig5", "--out", "a.csv"],
            &small[..],
        ]
        .concat(),
        dir.path(),
    );
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(
        &[
            "run",
            "--experiment",
            "fig5",
            "--config",
            "effective.cfg",
            "--out",
            "b.csv",
            "--workers",
            "1",
        ],
        dir.path(),
    );
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.contains("# seed = 9"));
    assert_eq!(a.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn default_output_name() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "run",
            "--experiment",
            "son-ablation",
            "--set",
            "n_trials=1000",
            "--set",
            "femto_count=100",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("son-ablation.csv")).unwrap();
    assert!(text.contains("dynamic+random,100,"));
}
