use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qexpander::construction::random_base;
use qexpander::{Complex64, MixedUnitaryEnsemble};
use qexpander_cli::{read_ensemble, read_file, write_ensemble, Encoding, EnsembleFile};
use tempfile::TempDir;

fn qexpander(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qexpander"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, g: &MixedUnitaryEnsemble) -> PathBuf {
    let path = dir.path().join(name);
    write_ensemble(g, &path, Encoding::Binary).unwrap();
    path
}

#[test]
fn gen_base_is_deterministic_and_loadable() {
    let dir = TempDir::new().unwrap();
    for name in ["a.qmix", "b.qmix"] {
        let o = qexpander(
            dir.path(),
            &["--seed", "9", "gen-base", "--n", "4", "--d", "3", "--out", name],
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(dir.path().join("a.qmix")).unwrap();
    let b = std::fs::read(dir.path().join("b.qmix")).unwrap();
    assert_eq!(a, b);
    let g = read_ensemble(&dir.path().join("a.qmix")).unwrap();
    let expected = random_base(4, 3, 9).unwrap();
    assert_eq!(g, expected);
}

#[test]
fn json_report_is_byte_identical_for_same_seed() {
    let dir = TempDir::new().unwrap();
    write(&dir, "g.qmix", &random_base(5, 2, 1).unwrap());
    let mut reports = Vec::new();
    for name in ["r1.json", "r2.json"] {
        let o = qexpander(
            dir.path(),
            &[
                "lambda", "--in", "g.qmix", "--method", "power", "--seed", "3", "--report", name,
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        reports.push(std::fs::read_to_string(dir.path().join(name)).unwrap());
    }
    // The echo differs only in the report path.
    assert_eq!(reports[0].replace("r1.json", "r2.json"), reports[1]);
    let v: serde_json::Value = serde_json::from_str(&reports[0]).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["rows"][0]["lambda"]["method"], "power");
}

#[test]
fn missing_seed_is_generated_and_reported() {
    let dir = TempDir::new().unwrap();
    let o = qexpander(dir.path(), &["gen-base", "--n", "2", "--d", "2", "--report", "r.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("(generated)"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(v["seed"].is_u64());
    assert_eq!(v["seed_generated"], true);
}

#[test]
fn lambda_of_pauli_is_zero() {
    let dir = TempDir::new().unwrap();
    write(&dir, "pauli.qmix", &MixedUnitaryEnsemble::pauli());
    let o = qexpander(
        dir.path(),
        &[
            "lambda",
            "--in",
            "pauli.qmix",
            "--method",
            "exact",
            "--report",
            "r.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let lambda = v["rows"][0]["lambda"]["value"].as_f64().unwrap();
    assert!(lambda <= 1e-12, "{lambda}");
    assert_eq!(v["rows"][0]["lambda"]["method"], "exact");
}

#[test]
fn zigzag_rejects_irregular_inputs() {
    let dir = TempDir::new().unwrap();
    write(&dir, "a.qmix", &random_base(4, 3, 1).unwrap());
    write(&dir, "b.qmix", &random_base(2, 2, 2).unwrap());
    let o = qexpander(dir.path(), &["zigzag", "--g1", "a.qmix", "--g2", "b.qmix"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("regular"), "{}", stderr(&o));
}

#[test]
fn zigzag_output_has_expected_shape() {
    let dir = TempDir::new().unwrap();
    write(&dir, "a.qmix", &random_base(4, 2, 1).unwrap());
    write(&dir, "b.qmix", &random_base(2, 2, 2).unwrap());
    let o = qexpander(
        dir.path(),
        &[
            "zigzag",
            "--g1",
            "a.qmix",
            "--g2",
            "b.qmix",
            "--measure",
            "--out",
            "z.qmix",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let z = read_ensemble(&dir.path().join("z.qmix")).unwrap();
    assert_eq!((z.dim(), z.degree()), (8, 4));
    assert!(stdout(&o).contains("cert"));
}

#[test]
fn construct_reports_certified_rows() {
    let dir = TempDir::new().unwrap();
    // dim = degree^8 with degree 1 keeps this tiny.
    write(&dir, "h.qmix", &MixedUnitaryEnsemble::identity(1));
    let o = qexpander(
        dir.path(),
        &["construct", "--base", "h.qmix", "--t", "2", "--report", "r.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let ops: Vec<&str> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["operation"].as_str().unwrap())
        .collect();
    assert!(ops.contains(&"G_1 bound") && ops.contains(&"G_2 bound"), "{ops:?}");
}

#[test]
fn construct_rejects_wrong_base_shape() {
    let dir = TempDir::new().unwrap();
    write(&dir, "h.qmix", &random_base(4, 2, 1).unwrap());
    let o = qexpander(dir.path(), &["construct", "--base", "h.qmix", "--t", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degree^8"), "{}", stderr(&o));
}

#[test]
fn verify_passes_on_valid_and_fails_on_perturbed_file() {
    let dir = TempDir::new().unwrap();
    let g = random_base(4, 3, 5).unwrap();
    write(&dir, "ok.qmix", &g);
    let o = qexpander(dir.path(), &["--seed", "1", "verify", "--in", "ok.qmix"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));

    let mut file = EnsembleFile::from_ensemble(&g, Encoding::Binary);
    let mut m = file.payload[1].clone();
    m[(2, 3)] += Complex64::new(1e-4, 0.0);
    file.payload[1] = m;
    std::fs::write(dir.path().join("bad.qmix"), file.encode()).unwrap();
    let o = qexpander(dir.path(), &["--seed", "1", "verify", "--in", "bad.qmix"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL] unitary 1"), "{}", stdout(&o));
}

#[test]
fn loading_a_perturbed_file_names_the_matrix() {
    let dir = TempDir::new().unwrap();
    let g = random_base(3, 2, 5).unwrap();
    let mut file = EnsembleFile::from_ensemble(&g, Encoding::Text);
    let mut m = file.payload[1].clone();
    m[(0, 0)] += Complex64::new(0.0, 1e-3);
    file.payload[1] = m;
    let path = dir.path().join("bad.json");
    std::fs::write(&path, file.encode()).unwrap();
    assert!(read_file(&path).is_ok());
    let err = read_ensemble(&path).unwrap_err().to_string();
    assert!(err.contains("unitary 1") && err.contains("bad.json"), "{err}");
}

#[test]
fn corrupted_magic_names_the_path() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "g.qmix", &MixedUnitaryEnsemble::pauli());
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    std::fs::write(&path, bytes).unwrap();
    let o = qexpander(dir.path(), &["lambda", "--in", "g.qmix"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("g.qmix"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(qexpander(dir.path(), &["lambda"]).status.code(), Some(2));
    assert_eq!(
        qexpander(dir.path(), &["lambda", "--in", "missing.qmix"]).status.code(),
        Some(2)
    );
}

#[test]
fn exact_cap_error_suggests_power_method() {
    let dir = TempDir::new().unwrap();
    write(&dir, "big.qmix", &MixedUnitaryEnsemble::identity(65));
    let o = qexpander(dir.path(), &["lambda", "--in", "big.qmix", "--method", "exact"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--method power"), "{}", stderr(&o));
}

#[test]
fn net_search_writes_an_ensemble() {
    let dir = TempDir::new().unwrap();
    let o = qexpander(
        dir.path(),
        &[
            "net-search",
            "--max-word-length",
            "2",
            "--accuracy",
            "0.5",
            "--d",
            "2",
            "--out",
            "n.qmix",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let g = read_ensemble(&dir.path().join("n.qmix")).unwrap();
    assert_eq!((g.dim(), g.degree()), (2, 2));
}

#[test]
fn text_and_binary_outputs_agree() {
    let dir = TempDir::new().unwrap();
    write(&dir, "a.qmix", &random_base(3, 2, 4).unwrap());
    for (enc, name) in [("text", "s.json"), ("binary", "s.qmix")] {
        let o = qexpander(
            dir.path(),
            &["square", "--in", "a.qmix", "--encoding", enc, "--out", name],
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let t = read_file(&dir.path().join("s.json")).unwrap();
    let b = read_file(&dir.path().join("s.qmix")).unwrap();
    assert_eq!(t.encoding, Encoding::Text);
    assert_eq!(t.payload, b.payload);
}
