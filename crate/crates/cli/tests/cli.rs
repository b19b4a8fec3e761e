use std::process::{Command, Output};

fn tprabi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tprabi")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = tprabi(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data lines split into fields, header row first.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn col(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn zero_coupling_levels_sit_at_shifted_integers() {
    let csv = stdout(&["spectrum", "--delta", "0.5", "--r", "0.3", "--g-range", "0:0:1", "--e-range=-1:4.5:2", "--q", "1/4"]);
    let rows = rows(&csv);
    let (kind, e) = (col(&rows, "kind"), col(&rows, "E"));
    let mut levels: Vec<f64> = rows[1..].iter().filter(|r| r[kind] == "level").map(|r| r[e].parse().unwrap()).collect();
    levels.sort_by(f64::total_cmp);
    // |↓,0⟩ at -Δ/2, then pairs (2n ± Δ/2) for q = 1/4
    let expected = [-0.25, 0.25, 1.75, 2.25, 3.75, 4.25];
    assert_eq!(levels.len(), expected.len(), "{levels:?}");
    for (a, b) in levels.iter().zip(expected) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn levels_agree_with_exact_diagonalization() {
    let csv = stdout(&[
        "spectrum", "--delta", "0.7", "--r", "0.4", "--g-range", "0.15:0.45:3", "--e-range=-1:2.5:2", "--ed", "true",
        "--dim", "400", "--q", "3/4",
    ]);
    let rows = rows(&csv);
    let (kind, g, e) = (col(&rows, "kind"), col(&rows, "g"), col(&rows, "E"));
    for gv in [0.15, 0.3, 0.45] {
        let pick = |k: &str| {
            let mut v: Vec<f64> = rows[1..]
                .iter()
                .filter(|r| r[kind] == k && (r[g].parse::<f64>().unwrap() - gv).abs() < 1e-12)
                .map(|r| r[e].parse().unwrap())
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let (lv, ed) = (pick("level"), pick("ed"));
        assert!(!lv.is_empty());
        for x in &lv {
            let d = ed.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8, "g={gv}: level {x} has no ED partner ({d})");
        }
    }
}

#[test]
fn empty_g_range_is_rejected() {
    for range in ["0.3:0.1:5", "0:0.2:0"] {
        let out = tprabi(&["spectrum", "--g-range", range]);
        assert!(!out.status.success());
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("g_range"), "{err}");
    }
    let out = tprabi(&["spectrum"]);
    assert!(!out.status.success());
}

#[test]
fn coupling_beyond_collapse_is_rejected() {
    let out = tprabi(&["gcurve", "--r", "0.25", "--g", "0.8"]);
    assert!(!out.status.success());
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["degenerate", "--r", "0.25", "--delta-range", "0.4:0.8:3", "--n", "0,1"];
    assert_eq!(stdout(&args), stdout(&args));
    let args = ["gcurve", "--e-range=-1:3:41", "--threads", "1"];
    let one = stdout(&args);
    let many = stdout(&["gcurve", "--e-range=-1:3:41", "--threads", "4"]);
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("# threads")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&one), strip(&many));
}

#[test]
fn csv_header_echoes_the_configuration() {
    let csv = stdout(&["ed", "--g", "0.1", "--states", "2", "--dim", "100"]);
    let header: Vec<&str> = csv.lines().take_while(|l| l.starts_with('#')).collect();
    for key in ["# command=ed", "# g=0.1", "# dim=100", "# states=2", "# version="] {
        assert!(header.iter().any(|l| l.starts_with(key)), "missing {key}");
    }
    let rows = rows(&csv);
    assert_eq!(rows[0][0], "q");
    assert_eq!(rows.len(), 1 + 4);
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
}

#[test]
fn json_document_shape() {
    let text = stdout(&["coeffs", "--energy", "0.3", "--trunc", "10", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config"]["command"], "coeffs");
    let cols = v["columns"].as_array().unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2 * 11);
    assert!(rows.iter().all(|r| r.as_array().unwrap().len() == cols.len()));
    // ξ_0 = 1 for the rescaled series
    let xi = cols.iter().position(|c| c == "xi").unwrap();
    assert_eq!(rows[0][xi], 1.0);
}

#[test]
fn collapse_at_the_lower_critical_splitting_has_no_states() {
    // Δc1 = (1 - r)/(1 + r) = 0.6 at r = 0.25
    let csv = stdout(&["collapse", "--r", "0.25", "--delta", "0.6"]);
    let rows = rows(&csv);
    assert_eq!(rows.len(), 2);
    let r = &rows[1];
    assert_eq!(r[col(&rows, "kind")], "none");
    assert_eq!(r[col(&rows, "count_class")], "none");
    assert_eq!(r[col(&rows, "I2_sign")], "0");
    assert_eq!(r[col(&rows, "kappa4")], "");
}

#[test]
fn collapse_requires_anisotropy() {
    let out = tprabi(&["collapse", "--r", "0"]);
    assert!(!out.status.success());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "# test\ng = 0.1\nstates = 2\ndim = 100\nq = 1/4\n").unwrap();
    let p = path.to_str().unwrap();
    let from_file = stdout(&["ed", "--config", p]);
    assert!(from_file.contains("# g=0.1\n") && from_file.contains("# states=2\n"));
    let overridden = stdout(&["ed", "--config", p, "--g", "0.2"]);
    assert!(overridden.contains("# g=0.2\n") && overridden.contains("# states=2\n"));

    std::fs::write(&path, "bogus = 3\n").unwrap();
    assert!(!tprabi(&["ed", "--config", p]).status.success());
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = tprabi(&["ed", "--g", "0.1", "--dim", "100", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("q,index,E"));
}
