use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypman"))
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Data rows of a CSV written by the tool: comment lines and the header
/// are skipped.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn read_pgm(path: &Path) -> (usize, usize, Vec<u8>, String) {
    let bytes = std::fs::read(path).unwrap();
    let mut pos = 0;
    let mut fields = Vec::new();
    let mut comments = String::new();
    while fields.len() < 4 {
        let end = pos + bytes[pos..].iter().position(|&b| b == b'\n').unwrap();
        let line = std::str::from_utf8(&bytes[pos..end]).unwrap();
        if let Some(c) = line.strip_prefix('#') {
            comments.push_str(c);
        } else {
            fields.extend(line.split_whitespace().map(str::to_string));
        }
        pos = end + 1;
    }
    assert_eq!(fields[0], "P5");
    let (w, h) = (fields[1].parse().unwrap(), fields[2].parse().unwrap());
    (w, h, bytes[pos..].to_vec(), comments)
}

#[test]
fn verify_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify"], &default_config(), dir.path());
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{out}");
    assert!(out.lines().count() >= 10 && !out.contains("FAIL"));
}

#[test]
fn verify_rejects_large_delta_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"manifold": {"delta_target": 10}}"#);
    let o = run(&["verify"], &cfg, dir.path());
    assert_eq!(code(&o), 1);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().any(|l| l.starts_with("graphtransform normalization") && l.contains("FAIL")));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["", "{}", "not json", r#"{"manifold": {"tol": -1}}"#] {
        let cfg = write_config(dir.path(), "c.json", text);
        assert_eq!(code(&run(&["verify"], &cfg, dir.path())), 64, "{text:?}");
    }
    let o = bin().arg("manifold").output().unwrap();
    assert_eq!(code(&o), 64);
}

#[test]
fn manifold_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["manifold"], &default_config(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("unstable.csv")).unwrap();
    assert!(text.starts_with("# {\"manifold\""));
    assert!(text.contains("\nx1,x2\r\n"));
    // least-squares fit x2 = c x1^2 near the origin
    let pts: Vec<(f64, f64)> = csv_rows(&dir.path().join("unstable.csv"))
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .filter(|p: &(f64, f64)| p.0.abs() <= 0.01)
        .collect();
    assert!(pts.len() > 10);
    let c = pts.iter().map(|p| p.0 * p.0 * p.1).sum::<f64>() / pts.iter().map(|p| p.0.powi(4)).sum::<f64>();
    assert!((c - 1.0 / 7.0).abs() < 1e-3, "{c}");
    // contraction of successive iterates
    for r in csv_rows(&dir.path().join("convergence.csv")) {
        let it: usize = r[1].parse().unwrap();
        if it > 2 && !r[4].is_empty() {
            assert!(r[4].parse::<f64>().unwrap() <= 1.0 / 3.0);
        }
    }
    let svg = std::fs::read_to_string(dir.path().join("manifold.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.matches("<polyline").count() == 2 && svg.contains("<!-- {"));
}

#[test]
fn linear_map_gives_segments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"manifold": {"map": {"kind": "linear", "matrix": [[2, 0], [0, 0.5]]}}}"#,
    );
    assert_eq!(code(&run(&["manifold"], &cfg, dir.path())), 0);
    for r in csv_rows(&dir.path().join("unstable.csv")) {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0);
    }
    for r in csv_rows(&dir.path().join("stable.csv")) {
        assert_eq!(r[0].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn manifold_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"manifold": {"map": {"kind": "linear", "matrix": [[1, 1], [0, 1]]}}}"#,
    );
    assert_eq!(code(&run(&["manifold"], &cfg, dir.path())), 2);
    let cfg = write_config(dir.path(), "c.json", r#"{"manifold": {"max_iter": 2}}"#);
    assert_eq!(code(&run(&["manifold"], &cfg, dir.path())), 3);
}

#[test]
fn global_manifolds_of_the_cat_map() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"manifold": {"map": {"kind": "perturbed_cat", "eps": 0.3}, "orbit": {"point": [0.5, 0.5], "period": 3}, "global_iterations": 3}}"#,
    );
    let o = run(&["manifold"], &cfg, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(csv_rows(&dir.path().join("global_unstable.csv")).len() > 50);
    assert!(csv_rows(&dir.path().join("global_stable.csv")).len() > 50);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"billiard": {"resolution": 96, "n_max": 2}}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run(&["billiard", "--threads", "1"], &cfg, &a)), 0);
    assert_eq!(code(&run(&["billiard", "--threads", "3"], &cfg, &b)), 0);
    for f in ["trapped.pgm", "trapped.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    assert_eq!(code(&run(&["manifold"], &default_config(), &a)), 0);
    assert_eq!(code(&run(&["manifold"], &default_config(), &b)), 0);
    for f in ["unstable.csv", "stable.csv", "convergence.csv", "manifold.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn dynchar_frames_are_nested() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"dynchar": {"n_max": 5, "resolution": 64}}"#);
    assert_eq!(code(&run(&["dynchar"], &cfg, dir.path())), 0);
    let mut prev: Option<Vec<u8>> = None;
    for n in 0..=5 {
        let (w, h, px, comment) = read_pgm(&dir.path().join(format!("dynchar_{n:02}.pgm")));
        assert_eq!((w, h), (64, 64));
        assert!(comment.contains("\"dynchar\""));
        if n == 0 {
            assert!(px.iter().all(|&b| b == 255));
        }
        if let Some(p) = &prev {
            assert!(px.iter().zip(p).all(|(&now, &before)| now <= before));
        }
        prev = Some(px);
    }
    // lit pixels of frame 5 lie within (2/3)^5 * 2 of W_u
    let rows = csv_rows(&dir.path().join("dynchar.csv"));
    let last = &rows[5];
    let (d, bound): (f64, f64) = (last[2].parse().unwrap(), last[3].parse().unwrap());
    assert!(d <= bound && (bound - (2.0f64 / 3.0).powi(5) * 2.0).abs() < 1e-12);
}

#[test]
fn billiard_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "u.json",
        r#"{"billiard": {"mode": "map", "table": {"kind": "unit_disk"}, "bounces": 4}}"#,
    );
    let o = run(&["billiard"], &cfg, dir.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains("closes after 2 bounces"));
    assert_eq!(csv_rows(&dir.path().join("billiard_map.csv")).len(), 5);

    let cfg = write_config(
        dir.path(),
        "p.json",
        r#"{"billiard": {"table": {"kind": "disks", "disks": [{"center": [0, 0], "radius": 1}, {"center": [4, 0], "radius": 1}]}}}"#,
    );
    let o = run(&["billiard", "period2"], &cfg, dir.path());
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("trace = 3.4000000000000000e1") && out.contains("hyperbolic = true"));

    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"billiard": {"table": {"kind": "disks", "disks": [{"center": [-2, 0], "radius": 0.5}, {"center": [2, 0], "radius": 0.5}, {"center": [0, 0.3], "radius": 0.5}]}}}"#,
    );
    assert_eq!(code(&run(&["billiard", "trapped"], &cfg, dir.path())), 4);
}

#[test]
fn trapped_mask_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"billiard": {"resolution": 128, "n_max": 1}}"#);
    assert_eq!(code(&run(&["billiard", "trapped"], &cfg, dir.path())), 0);
    let (w, h, px, _) = read_pgm(&dir.path().join("trapped.pgm"));
    assert_eq!((w, h, px.len()), (128, 128, 128 * 128));
    assert!(px.iter().any(|&b| b == 255));
    for r in 0..h {
        for c in 0..w {
            assert_eq!(px[r * w + c], px[(h - 1 - r) * w + (w - 1 - c)]);
        }
    }
    let side = std::fs::read_to_string(dir.path().join("trapped.txt")).unwrap();
    assert!(side.contains("n_theta = 128") && side.starts_with("# {"));
}

#[test]
fn geodesic_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["geodesic", "cones"], &default_config(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("cones.csv"));
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| r[8] == "true"));

    let o = run(&["geodesic", "directions"], &default_config(), dir.path());
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&dir.path().join("directions.csv"));
    let last: Vec<f64> = rows.last().unwrap().iter().map(|v| v.parse().unwrap()).collect();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((last[1] - r).abs() < 1e-6 && (last[2] + r).abs() < 1e-6);
    assert!((last[3] - r).abs() < 1e-6 && (last[4] - r).abs() < 1e-6);

    let o = run(&["geodesic", "flow"], &default_config(), dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&dir.path().join("geodesic_flow.csv")).len(), 3001);

    let cfg = write_config(dir.path(), "f.json", r#"{"geodesic": {"surface": {"kind": "flat"}, "start": [0, 0, 0]}}"#);
    assert_eq!(code(&run(&["geodesic", "cones"], &cfg, dir.path())), 5);
}
