use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pseudophase::formats::parse_mfile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pseudophase"))
}

fn netlist(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("netlists").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn demos_succeed() {
    for name in ["product", "ghz", "w", "shor15"] {
        let o = run(&["demo", name]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", name, stdout(&o));
        assert!(stdout(&o).contains("matches the expected pattern"));
    }
}

#[test]
fn demo_ghz_renders_expected_matrix() {
    let o = run(&["demo", "ghz"]);
    let text = stdout(&o);
    let start = text.find("# sequences").unwrap();
    let end = text.find("terms (").unwrap();
    let m = parse_mfile(&text[start..end]).unwrap().to_matrix();
    let want = parse_mfile(&fs::read_to_string(netlist("ghz.m")).unwrap()).unwrap().to_matrix();
    assert_eq!(m, want);
    assert!(text.contains("terms (2):\n000"));
}

#[test]
fn demo_shor15_reports_reference_period() {
    let text = stdout(&run(&["demo", "shor15"]));
    assert!(text.contains("period of the reference result state: r = 4"));
    assert!(text.contains("period from the reconstructed terms (msb first): r = 11"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["demo", "ghz", "--theta", "1.5"],
        vec!["demo", "ghz", "--epsilon-flat", "0"],
        vec!["demo", "ghz", "--mu", "-1"],
        vec!["demo", "ghz", "--tau-slot", "0"],
        vec!["demo", "ghz", "--ids", "1,1,2"],
        vec!["demo", "ghz", "--ids", "1,2"],
        vec!["demo", "ghz", "--samples-per-slot", "0"],
        vec!["demo", "bell"],
        vec!["frobnicate"],
        vec!["demo", "ghz", "--bit-order", "middle"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{:?}: {}", args, stderr(&o));
        assert!(o.stdout.is_empty(), "{:?}", args);
    }
}

#[test]
fn missing_file_exits_2() {
    let o = run(&["run", "/nonexistent/x.net"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/x.net"));
}

#[test]
fn run_with_expect() {
    for (net, m) in [("product.net", "product.m"), ("ghz.net", "ghz.m"), ("w.net", "w.m"), ("shor15.net", "shor15.m")] {
        let o = bin().arg("run").arg(netlist(net)).arg("--expect").arg(netlist(m)).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}: {}{}", net, stdout(&o), stderr(&o));
    }
}

#[test]
fn mismatch_exits_1_with_diff() {
    let o = bin()
        .arg("run")
        .arg(netlist("ghz.net"))
        .arg("--expect")
        .arg(netlist("w.m"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("MISMATCH"));
    assert!(text.contains("row 1 (E1), sequence 3: expected (0,1), got 0"), "{}", text);
    assert!(text.contains("--- expected") && text.contains("+++ actual"));
}

#[test]
fn lo_flag_overrides_expect_header() {
    let o = bin()
        .arg("run")
        .arg(netlist("ghz.net"))
        .arg("--expect")
        .arg(netlist("ghz.m"))
        .args(["--lo", "3,2,1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("# sequences: 3 2 1"));
}

#[test]
fn run_without_expect_scans_whole_family() {
    let o = bin().arg("run").arg(netlist("ghz.net")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# sequences: 0 1 2 3 4 5 6 7"));
}

#[test]
fn dump_fields_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg(netlist("product.net"))
        .arg("--dump-fields")
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("fields.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "field,slot,mode,re,im");
    assert_eq!(lines.len(), 1 + 3 * 8 * 2);
    assert!(lines[1].starts_with("E1,0,up,"));
}

#[test]
fn traces_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["demo", "ghz", "--traces", "--samples-per-slot", "4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    // 3 fields x 2 modes x 3 LOs x 8 slots x 4 samples.
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 3 * 8 * 4);
    let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(&row[..6], &["E1", "up", "1", "0", "1", "0.375"]);
}

#[test]
fn bundle_is_deterministic_and_complete() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = bin()
            .args(["demo", "shor15", "--dump-fields", "--traces", "--out"])
            .arg(d.path())
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
    }
    let fa = read_dir_sorted(a.path());
    assert_eq!(fa, read_dir_sorted(b.path()));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "config.json",
            "correlation.csv",
            "correlation.jsonl",
            "fields.csv",
            "m_matrix.json",
            "m_matrix.txt",
            "period.json",
            "reconstruction.json",
            "reconstruction.txt",
            "scenario.json",
            "traces.csv",
        ]
    );
    let config: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(config["theta"], 0.5);
    assert_eq!(config["bit_order"], "msb");
    assert_eq!(config["sequence_ids"], serde_json::json!([1, 2, 3, 4, 5, 6, 7, 8]));
    let period: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("period.json")).unwrap()).unwrap();
    assert_eq!(period["reference"]["r"], 4);
    assert_eq!(period["reference"]["f_values"], serde_json::json!([1, 4, 7, 13]));
    let jsonl = fs::read_to_string(a.path().join("correlation.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 8 * 2 * 8);
    let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(first["field"], "E1");
    assert_eq!(first["mode"], "up");
    assert_eq!(first["lo"], 1);
}

#[test]
fn stdout_is_deterministic() {
    let a = run(&["demo", "w", "--bit-order", "lsb"]);
    let b = run(&["demo", "w", "--bit-order", "lsb"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn written_m_matrix_is_a_valid_expect_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["demo", "w", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = bin()
        .arg("run")
        .arg(netlist("w.net"))
        .arg("--expect")
        .arg(dir.path().join("m_matrix.txt"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn check_family_default_passes() {
    let o = run(&["check-family"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("balance: ok"));
    assert!(text.contains("pairwise agreement: ok (4 slots for every pair)"));
    assert!(text.contains("closure under XOR: ok"));
}

#[test]
fn check_family_flags_a_flipped_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fam.txt");
    // Builtin family with the first code of λ1 flipped.
    fs::write(
        &path,
        "0,0,0,0,0,0,0,0\n0,0,0,1,0,1,1,0\n1,1,0,0,1,0,1,0\n1,1,1,0,0,1,0,0\n\
         0,1,1,1,0,0,1,0\n1,0,1,1,1,0,0,0\n0,1,0,1,1,1,0,0\n0,0,1,0,1,1,1,0\n",
    )
    .unwrap();
    let o = bin().arg("check-family").arg("--family").arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("balance: FAIL (unbalanced: 1)"), "{}", text);
    assert!(text.contains("closure under XOR: FAIL"));
}

#[test]
fn family_with_unequal_lines_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fam.txt");
    fs::write(&path, "0,1,0,1\n1,0,1\n").unwrap();
    let o = bin().arg("check-family").arg("--family").arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("{}:2:1: error:", path.display())));
}

fn write_family(dir: &Path, nonzero: u8) -> PathBuf {
    let rows = ["00000000", "10010110", "11001010", "11100100"];
    let text: String = rows
        .iter()
        .map(|r| {
            let codes: Vec<String> = r.bytes().map(|b| if b == b'1' { nonzero } else { 0 }.to_string()).collect();
            codes.join(",") + "\n"
        })
        .collect();
    let path = dir.join(format!("fam{}.txt", nonzero));
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn custom_family_drives_demo() {
    let dir = tempfile::tempdir().unwrap();
    // Three quarter turns differ from zero by the same cos² contrast as one.
    let o = bin().args(["demo", "ghz", "--family"]).arg(write_family(dir.path(), 3)).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn half_turn_codes_are_invisible_to_the_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["demo", "ghz", "--family"]).arg(write_family(dir.path(), 2)).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("terms (0):"));
}

#[test]
fn sequences_lists_family() {
    let text = stdout(&run(&["sequences"]));
    assert_eq!(text.lines().count(), 8);
    assert_eq!(text.lines().nth(1).unwrap(), "  1  1 0 0 1 0 1 1 0");
}

#[test]
fn reconstruct_command() {
    let o = bin().arg("reconstruct").arg(netlist("ghz.m")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2 terms\n000  sequences: 1 2 3\n111  sequences: 2 3 1\n"));

    let o = bin()
        .arg("reconstruct")
        .arg(netlist("shor15.m"))
        .args(["--x-fields", "4", "--bit-order", "lsb"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("156 terms"));
    assert!(stdout(&o).contains("period (lsb first): r = 11"));

    let o = bin()
        .arg("reconstruct")
        .arg(netlist("ghz.m"))
        .args(["--x-fields", "3"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_m_file_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.m");
    fs::write(&path, "(1,0) 0\n0 (1,2)\n").unwrap();
    let o = bin().arg("reconstruct").arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with(&format!("{}:2:3: error:", path.display())));
}

#[test]
fn help_exits_0() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("check-family"));
}
