use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ptmetric(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptmetric"))
        .args(args)
        .current_dir(dir)
        .env("RAYON_NUM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn point_kernel_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = ptmetric(dir.path(), &["kernel", "eta1", "--x", "2", "--y", "1.5"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0+0.5i");
    let out = ptmetric(dir.path(), &["kernel", "h2", "--x", "1.5", "--y", "0.5"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.125+0i");
}

#[test]
fn kernel_grid_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = ptmetric(dir.path(), &["kernel", "P", "--grid", "-2,2,5", "--out", "p.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(csv.lines().count(), 26);
    assert!(csv.starts_with("x,y,re,im\n"));
    assert_eq!(manifest(&dir.path().join("p.json"))["quantity"], "P");
}

#[test]
fn figure_five_mass_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = ptmetric(dir.path(), &["figures", "--fig", "5", "--out", "meff.csv"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("meff.csv")).unwrap();
    let (x, m) = (column(&csv, "x"), column(&csv, "m_eff"));
    assert_eq!(x.len(), 1001);
    for (x, m) in x.iter().zip(&m) {
        if x.abs() >= 3.0 {
            assert_eq!(*m, 0.5);
        }
    }
    assert!(m.iter().any(|v| (v - 0.5).abs() > 1e-3));
    let doc = manifest(&dir.path().join("meff.json"));
    assert_eq!(doc["config"]["params"]["zeta"], 1.0 / 3.0);
    assert!(doc["quantity"].as_str().unwrap().starts_with("fig5"));
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = ptmetric(dir.path(), &["coeffs", "--grid", "-4,4,41", "--out", name]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let header = String::from_utf8_lossy(&a).lines().next().unwrap().to_string();
    assert!(header.starts_with("x,re_w0,im_w0,") && header.ends_with("a0,a1,a2,alpha0,alpha1,alpha2"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ptmetric(dir.path(), &["kernel", "eta1", "--bogus"]).status.code(), Some(2));
    assert_eq!(ptmetric(dir.path(), &["--m", "-1", "kernel", "eta1", "--x", "1", "--y", "0"]).status.code(), Some(2));
    assert_eq!(ptmetric(dir.path(), &["evolve", "--dt", "0"]).status.code(), Some(2));
    assert_eq!(ptmetric(dir.path(), &["figures", "--fig", "7"]).status.code(), Some(2));
    assert_eq!(ptmetric(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn spectral_check_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let ok = ptmetric(dir.path(), &["spectral-check", "--pairs", "20", "--tol", "1e-3"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let doc = manifest(&dir.path().join("spectral_check.json"));
    assert_eq!(doc["diagnostics"]["pairs"], 20);
    let strict = ptmetric(dir.path(), &["spectral-check", "--pairs", "2", "--tol", "1e-12", "--out", "s.csv"]);
    assert_eq!(strict.status.code(), Some(3));
    assert!(dir.path().join("s.csv").exists());
}

#[test]
fn config_file_sets_defaults() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "zeta = 0.25\n[evolve]\nt_end = 0.5\nhalf_width = 30\nper_unit = 10\n").unwrap();
    let out = ptmetric(dir.path(), &["--config", "run.toml", "evolve", "--out", "e.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = manifest(&dir.path().join("e.json"));
    assert_eq!(doc["config"]["params"]["zeta"], 0.25);
    assert_eq!(doc["config"]["command"]["Evolve"]["t_end"], 0.5);
    // Z = m L² zeta / 2hbar² equals zeta at m = 1/2, L = 2
    assert_eq!(doc["diagnostics"]["z"], 0.25);
    let csv = fs::read_to_string(dir.path().join("e.csv")).unwrap();
    let t = column(&csv, "t");
    assert!((t.last().unwrap() - 0.5).abs() < 1e-12);

    let out = ptmetric(dir.path(), &["--config", "run.toml", "--zeta", "0.2", "evolve", "--out", "f.csv"]);
    assert!(out.status.success());
    assert_eq!(manifest(&dir.path().join("f.json"))["config"]["params"]["zeta"], 0.2);
}

#[test]
fn density_of_a_sampled_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x,re,im\n");
    for j in 0..=400 {
        let x = -10.0 + 0.05 * j as f64;
        text.push_str(&format!("{x},{},0\n", (-(x - 0.3) * (x - 0.3) / 2.0).exp()));
    }
    fs::write(dir.path().join("psi.csv"), text).unwrap();
    let out = ptmetric(dir.path(), &["density", "--state", "psi.csv", "--out", "rho.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("rho.csv")).unwrap();
    let rho = column(&csv, "rho");
    let integral: f64 = rho.iter().sum::<f64>() * 0.05 - 0.025 * (rho[0] + rho[rho.len() - 1]);
    assert!((integral - 1.0).abs() < 1e-12);

    fs::write(dir.path().join("bad.csv"), "x,re,im\n0,1,0\n0.1,1,0\n0.3,1,0\n").unwrap();
    assert_eq!(ptmetric(dir.path(), &["density", "--state", "bad.csv"]).status.code(), Some(2));
}

#[test]
fn localized_state_is_imaginary() {
    let dir = tempfile::tempdir().unwrap();
    let out = ptmetric(dir.path(), &["localized", "--center", "-0.5", "--grid", "-4,4,81", "--out", "xi.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("xi.csv")).unwrap();
    assert!(column(&csv, "re").iter().all(|v| *v == 0.0));
    assert!(column(&csv, "im").iter().any(|v| v.abs() > 1e-3));
}
