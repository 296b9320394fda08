use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex;

fn blochlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blochlab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn run_without_recipe_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "empty.cfg");
    fs::write(&cfg, "# nothing\n").unwrap();
    let o = blochlab(&["run", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("recipe"));

    let o = blochlab(&["run", "--recipe", "no-such-recipe"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&blochlab(&["construct", "riesz"])), 2);
}

#[test]
fn atom_dump_transforms_close_to_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let m = path(dir.path(), "atom.json");
    let pts = path(dir.path(), "pts.csv");
    let out = path(dir.path(), "h.csv");
    assert_eq!(code(&blochlab(&["construct", "atom", "--depth", "16", "--out", &m])), 0);
    fs::write(&pts, "re,im\n0.5,0\n0,-0.6\n-0.3,0.3\n").unwrap();
    let o = blochlab(&["transform", "--measure", &m, "--kind", "H", "--points", &pts, "--out", &out, "--extend-uniform"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re_z,im_z,re_val,im_val,err_bound"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    let one = Complex::new(1.0, 0.0);
    for r in rows {
        let z = Complex::new(r[0], r[1]);
        let exact = (one + z) / (one - z);
        // the dump spreads the atom over an arc of length 2^-16
        assert!((Complex::new(r[2], r[3]) - exact).norm() <= 1e-3 * exact.norm(), "{r:?}");
    }
}

#[test]
fn checks_write_reports_and_report_status() {
    let dir = tempfile::tempdir().unwrap();
    let riesz = path(dir.path(), "riesz.json");
    let nomoc = path(dir.path(), "nomoc.json");
    let out_dir = dir.path().display().to_string();
    assert_eq!(code(&blochlab(&["construct", "riesz", "--depth", "10", "--out", &riesz])), 0);
    assert_eq!(code(&blochlab(&["construct", "nomoc", "--levels", "2", "--depth", "10", "--out", &nomoc])), 0);

    let o = blochlab(&["check", "zygmund", "--measure", &riesz, "--depth", "8", "--out-dir", &out_dir]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("zygmund.csv").exists());
    let printed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let written: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("zygmund.json")).unwrap()).unwrap();
    assert_eq!(printed, written);

    let o = blochlab(&["check", "moc", "--measure", &nomoc, "--majorant", "power:1/2", "--depth", "10", "--out-dir", &out_dir]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // the atom has no modulus-of-continuity bound
    let atom = path(dir.path(), "atom.json");
    assert_eq!(code(&blochlab(&["construct", "atom", "--depth", "10", "--out", &atom])), 0);
    let o = blochlab(&["check", "moc", "--measure", &atom, "--majorant", "power:1/2", "--depth", "10", "--out-dir", &out_dir]);
    assert_eq!(code(&o), 1);
}

#[test]
fn recipe_exit_codes_follow_their_checks() {
    let dir = tempfile::tempdir().unwrap();
    let atom_dir = path(dir.path(), "atom");
    let o = blochlab(&["run", "--recipe", "atom-baseline", "--depth", "8", "--points", "5", "--out-dir", &atom_dir]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["summary.json", "comparison.csv", "w1_report.json"] {
        assert!(Path::new(&atom_dir).join(f).exists(), "{f}");
    }

    // flags override the config file; the default extra-level budget is too small for a witness
    let riesz_dir = path(dir.path(), "riesz");
    let cfg = path(dir.path(), "riesz.cfg");
    fs::write(&cfg, format!("recipe = riesz-lemma53\ndepth = 9\nout-dir = {riesz_dir}\n")).unwrap();
    let o = blochlab(&["run", "--config", &cfg, "--depth", "4"]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(Path::new(&riesz_dir).join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["params"]["depth"], 4);
}
