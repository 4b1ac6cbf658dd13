use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dlcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlcomm"))
        .args(args)
        .output()
        .expect("run dlcomm")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn train_small(dir: &Path) -> String {
    let ckpt = dir.join("m4.ckpt");
    let o = dlcomm(&[
        "train",
        "-M",
        "4",
        "-m",
        "1",
        "--snr-db",
        "10",
        "--epochs",
        "3",
        "--train-samples",
        "900",
        "--seed",
        "5",
        "--checkpoint",
        ckpt.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    ckpt.to_str().unwrap().to_string()
}

#[test]
fn figure_list_names_every_recipe() {
    let o = dlcomm(&["figure", "--list"]);
    assert!(o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    for name in dlcomm::harness::recipe_names() {
        assert!(
            out.lines().any(|l| l.split('\t').next() == Some(name)),
            "missing {name}"
        );
    }
}

#[test]
fn evaluate_writes_one_row_per_point_and_replays_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = train_small(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = dlcomm(&[
            "evaluate",
            "--checkpoint",
            &ckpt,
            "--ebn0",
            "-2:10:1",
            "--blocks",
            "300",
            "--seed",
            "4",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read_to_string(out).unwrap()
    };
    let first = run("a.csv");
    let second = run("b.csv");
    assert_eq!(data_rows(&first).len(), 13);
    assert!(first.starts_with("# version: "));
    let header = first.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("ebn0_db,sigma2,scheme,M,m,n,rate_bits_per_use"));
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.contains("output"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&first), strip(&second));
    assert!(dir.path().join("a.manifest.toml").exists());
}

#[test]
fn missing_checkpoint_reports_io_error_line() {
    let o = dlcomm(&["evaluate", "--checkpoint", "/nonexistent/x.ckpt", "--ebn0", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    let line = err.lines().last().unwrap();
    assert!(line.starts_with("error kind=io message="), "{line}");
}

#[test]
fn bad_config_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "scheme = \"onehot\"\n[training]\nepochs = \"many\"\n").unwrap();
    let o = dlcomm(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--checkpoint",
        "/tmp/unused.ckpt",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let line = stderr(&o).lines().last().unwrap().to_string();
    assert!(line.starts_with("error kind=config"), "{line}");
    assert!(line.contains("training.epochs"), "{line}");
}

#[test]
fn unknown_figure_lists_alternatives() {
    let o = dlcomm(&["figure", "fig99"]);
    assert_eq!(o.status.code(), Some(1));
    let line = stderr(&o).lines().last().unwrap().to_string();
    assert!(line.starts_with("error kind=unknown_recipe"), "{line}");
    assert!(line.contains("fig3"));
}

#[test]
fn baseline_sweep_prints_all_schemes() {
    let o = dlcomm(&["baseline", "--ebn0", "0:2:1", "--blocks", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 9);
    for scheme in ["hamming_hd", "hamming_ml", "uncoded_bpsk"] {
        assert_eq!(rows.iter().filter(|r| r.contains(scheme)).count(), 3, "{scheme}");
    }
}

#[test]
fn analyze_mse_reports_region_columns() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = train_small(dir.path());
    let out = dir.path().join("mse.csv");
    let o = dlcomm(&[
        "analyze",
        "mse",
        "--checkpoint",
        &ckpt,
        "--sigma2",
        "0.01,0.1",
        "--samples",
        "2000",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    for col in [
        "sigma2",
        "signal_term",
        "noise_term",
        "simulated_mse",
        "active_fraction",
        "region_fraction",
    ] {
        assert!(header.split(',').any(|c| c == col), "missing {col} in {header}");
    }
    assert_eq!(data_rows(&csv).len(), 2);
}

#[test]
fn analyze_rate_matches_library() {
    let o = dlcomm(&["analyze", "rate", "-M", "16", "-m", "6", "--ebn0", "0,10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 2);
    let expected = dlcomm::analysis::achievable_rate(16, 6, 7, 10.0).unwrap();
    let header: Vec<&str> = out.lines().find(|l| !l.starts_with('#')).unwrap().split(',').collect();
    let col = header.iter().position(|c| c.contains("rate")).unwrap();
    let got: f64 = rows[1].split(',').nth(col).unwrap().parse().unwrap();
    assert!(
        (got - expected).abs() <= 1e-9 * expected.abs().max(1.0),
        "{got} vs {expected}"
    );
}
