use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rabi(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabi"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = rabi(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn decoupled_point_gives_both_energies() {
    let dir = TempDir::new().unwrap();
    let line = ok(
        dir.path(),
        &[
            "solve", "--omega", "0.1", "--Omega", "1", "--g", "0", "--method", "both",
        ],
    );
    assert!(line.starts_with("omega=0.1"));
    let v = json(&dir.path().join("solve.json"));
    let var = v["variational"]["observables"]["energy"].as_f64().unwrap();
    let ed = v["ed"]["energy"].as_f64().unwrap();
    assert!((var + 0.5).abs() < 1e-12 && (ed + 0.5).abs() < 1e-12);
    assert!(v["variational"]["observables"]["gamma"].is_null());
    assert!(dir.path().join("solve.manifest.json").exists());
}

#[test]
fn changeover_point_agrees_with_exact() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "solve", "--omega", "0.1", "--Omega", "1", "--g", "0.192", "--method", "both",
        ],
    );
    let v = json(&dir.path().join("solve.json"));
    assert!(v["energy_gap"].as_f64().unwrap().abs() <= 1e-3);
    assert!((v["derived"]["gc"].as_f64().unwrap() - 0.1921609).abs() < 1e-7);
}

#[test]
fn excited_level_record() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["solve", "--omega", "0.1", "--Omega", "1", "--g", "0.1", "--level", "3"],
    );
    let v = json(&dir.path().join("solve.json"));
    assert_eq!(v["level"], 3);
    assert_eq!(v["variational"]["level"], 3);
    assert_eq!(v["params"]["parity"], "positive");
}

#[test]
fn self_consistent_method_below_gc_is_invalid() {
    let dir = TempDir::new().unwrap();
    let o = rabi(
        dir.path(),
        &["solve", "--omega", "0.1", "--g", "0.1", "--method", "self-consistent"],
    );
    assert_eq!(o.status.code(), Some(2));
    ok(
        dir.path(),
        &["solve", "--omega", "0.01", "--g", "0.1", "--method", "self-consistent"],
    );
    let v = json(&dir.path().join("solve.json"));
    assert!(v["self_consistent"]["observables"]["energy"].as_f64().unwrap() < -0.5);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["solve", "--omega", "0.1"][..],
        &["solve", "--omega", "0.1", "--g", "0.1", "--method", "dense"],
        &["solve", "--omega", "-1", "--g", "0.1"],
        &["sweep", "--omega-ratio", "0.1", "--g-points", "0"],
        &["multimode", "--modes", "0.1"],
        &["--tol-energy", "0", "solve", "--omega", "0.1", "--g", "0"],
        &["frobnicate"],
    ] {
        assert_eq!(rabi(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sweep_carries_both_methods() {
    let dir = TempDir::new().unwrap();
    let args = [
        "sweep",
        "--omega-ratio",
        "0.1",
        "--g-min",
        "0.05",
        "--g-max",
        "2",
        "--g-points",
        "40",
        "--relative",
        "--with-ed",
    ];
    ok(dir.path(), &args);
    let (header, rows) = csv_rows(&dir.path().join("sweep.csv"));
    let expected: Vec<&str> = rabi_core::diagram::CELL_HEADER
        .iter()
        .chain(rabi_core::diagram::ED_HEADER.iter())
        .copied()
        .collect();
    assert_eq!(header, expected);
    assert_eq!(rows.len(), 40);
    let var = column(&header, &rows, "energy");
    let ed = column(&header, &rows, "ed_energy");
    let gap = var.iter().zip(&ed).map(|(v, e)| (v - e).abs()).fold(0.0, f64::max);
    assert!(gap <= 1e-3, "{gap}");
    let script = fs::read_to_string(dir.path().join("sweep.gp")).unwrap();
    assert!(script.contains("'sweep.csv' using 'g':'ed_energy'"));
}

#[test]
fn default_diagram_is_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    ok(a.path(), &["diagram"]);
    ok(b.path(), &["--threads", "2", "diagram"]);
    for f in ["diagram_cells.csv", "diagram_boundaries.csv", "diagram.gp"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let (header, rows) = csv_rows(&a.path().join("diagram_cells.csv"));
    assert_eq!(rows.len(), 400);
    assert_eq!(header, rabi_core::diagram::CELL_HEADER);
}

#[test]
fn rerun_from_manifest_reproduces_outputs() {
    let (a, c) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    ok(
        a.path(),
        &[
            "diagram",
            "--ratio-points",
            "3",
            "--ratio-min",
            "0.05",
            "--ratio-max",
            "0.5",
            "--g-points",
            "4",
        ],
    );
    let manifest = a.path().join("diagram.manifest.json");
    ok(c.path(), &["rerun", "--manifest", manifest.to_str().unwrap()]);
    let m = json(&manifest);
    let files: Vec<&str> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(files, ["diagram_cells.csv", "diagram_boundaries.csv", "diagram.gp"]);
    for f in files.iter().chain(&["diagram.manifest.json"]) {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(c.path().join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(csv_rows(&a.path().join("diagram_cells.csv")).1.len(), 12);
}

#[test]
fn json_format_replaces_the_csv() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["--format", "json", "sweep", "--omega-ratio", "0.5", "--g-points", "3"],
    );
    assert!(!dir.path().join("sweep.csv").exists());
    let v = json(&dir.path().join("sweep.json"));
    assert_eq!(v.as_array().unwrap().len(), 3);
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rabi"))
        .env("RABI_OUT_DIR", dir.path())
        .args(["ed", "--omega", "0.7", "--g", "0", "--levels", "4"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let (header, rows) = csv_rows(&dir.path().join("ed_spectrum.csv"));
    assert_eq!(header, ["level", "energy", "parity"]);
    let e = column(&header, &rows, "energy");
    for (x, y) in e.iter().zip([-0.5, 0.2, 0.5, 0.9]) {
        assert!((x - y).abs() < 1e-12);
    }
    assert_eq!(rows[0][2], "negative");
}

#[test]
fn potential_and_wavefunction_files() {
    let dir = TempDir::new().unwrap();
    let point = [
        "--omega",
        "0.2",
        "--g",
        "0.3",
        "--x-min",
        "-4",
        "--x-max",
        "4",
        "--x-points",
        "801",
    ];
    ok(dir.path(), &[&["potential", "--source", "ed"][..], &point].concat());
    let (header, rows) = csv_rows(&dir.path().join("potential.csv"));
    assert_eq!(header, ["x", "v_bare", "v_delta", "v_total", "psi_up", "psi_down"]);
    assert_eq!(rows.len(), 801);
    ok(
        dir.path(),
        &["wavefunction", "--with-ed", "--omega", "0.2", "--g", "0.3"],
    );
    let (header, rows) = csv_rows(&dir.path().join("wavefunction.csv"));
    let x = column(&header, &rows, "x");
    let h = x[1] - x[0];
    // Both sources put norm ½ in each spin component and nearly coincide.
    for (a, b) in [("psi_up", "ed_psi_up"), ("psi_down", "ed_psi_down")] {
        let (u, v) = (column(&header, &rows, a), column(&header, &rows, b));
        let norm: f64 = u.iter().map(|x| x * x).sum::<f64>() * h;
        let overlap: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() * h;
        assert!((norm - 0.5).abs() < 1e-6, "{a}: {norm}");
        assert!(overlap > 0.499, "{a}: {overlap}");
    }
}

#[test]
fn multimode_inline_and_file_modes_agree() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("modes.csv");
    fs::write(&file, "omega,g\n0.1,0.1\n0.01,0.025\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&a, &["multimode", "--modes", "0.1:0.1,0.01:0.025", "--with-ed"]);
    ok(&b, &["multimode", "--modes-file", file.to_str().unwrap(), "--with-ed"]);
    assert_eq!(
        fs::read(a.join("multimode.csv")).unwrap(),
        fs::read(b.join("multimode.csv")).unwrap()
    );
    let m = json(&b.join("multimode.manifest.json"));
    assert_eq!(m["command"]["modes"], serde_json::json!(["0.1:0.1", "0.01:0.025"]));
    let (header, rows) = csv_rows(&a.join("multimode.csv"));
    assert!(column(&header, &rows, "ed_gap")[0].abs() <= 1e-3);
    assert_eq!(header.iter().filter(|h| h.starts_with("photon_number_")).count(), 2);
}
