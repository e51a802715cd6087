use std::process::{Command, Output};

fn mgchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgchain")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows as `(label, key, value)` plus the full header JSON.
fn parse(text: &str) -> (serde_json::Value, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().strip_prefix("# ").unwrap();
    assert!(lines.next().unwrap().starts_with("# generated_unix_seconds: "));
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let rows = rdr.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect();
    (serde_json::from_str(header).unwrap(), rows)
}

fn value(rows: &[Vec<String>], label: &str) -> f64 {
    rows.iter().find(|r| r[7] == label).unwrap_or_else(|| panic!("no {label} row"))[9].parse().unwrap()
}

fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("# generated_unix_seconds")).collect::<Vec<_>>().join("\n")
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["ground", "--n", "10", "--boundary", "open,periodic", "--h-range", "0:2:0.5", "--levels", "2"];
    let a = mgchain(&args);
    let b = mgchain(&args);
    assert!(a.status.success());
    assert_eq!(without_timestamp(&stdout(&a)), without_timestamp(&stdout(&b)));

    let q = ["quench-small", "--n", "8", "--boundary", "periodic", "--h-range", "0.5:1.5:0.5"];
    assert_eq!(without_timestamp(&stdout(&mgchain(&q))), without_timestamp(&stdout(&mgchain(&q))));
}

#[test]
fn zero_field_open_chain_is_exact_dimer_state() {
    let o = mgchain(&["ground", "--n", "12", "--h", "0", "--sectors", "0"]);
    assert!(o.status.success());
    let (_, rows) = parse(&stdout(&o));
    assert!(value(&rows, "eq5_l_not_field").abs() < 1e-10);
    assert!(value(&rows, "eq6_d_singlet").abs() < 1e-10);
    assert!((value(&rows, "sector_energy") + 4.5).abs() < 1e-10);
}

#[test]
fn cell_count_matches_axes() {
    let o = mgchain(&["ground", "--n", "8", "--nprime", "2,3", "--boundary", "periodic", "--h", "0,1"]);
    let (header, rows) = parse(&stdout(&o));
    let product: u64 = header["axes"].as_array().unwrap().iter().map(|a| a["length"].as_u64().unwrap()).product();
    assert_eq!(header["cells"].as_u64().unwrap(), product);
    let mut cells: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    cells.dedup();
    assert_eq!(cells.len() as u64, product);
    // periodic even chains report the covering distances
    assert!(rows.iter().any(|r| r[7] == "eq9_d_cover"));
    assert!(rows.iter().all(|r| r[7] != "error"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n = 6\nh_range = 0:1:0.5\nsectors = 0\n").unwrap();
    let out = dir.path().join("run.csv");
    let o = mgchain(&["ground", "--config", cfg.to_str().unwrap(), "--h", "0.25", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let (header, rows) = parse(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(header["resolved"]["h"], serde_json::json!([0.25]));
    assert_eq!(header["resolved"]["n"], serde_json::json!([6]));
    assert_eq!(header["config"]["h"], "0.25");
    assert!(header["config"].get("h-range").is_none());
    assert!(rows.iter().all(|r| r[4] == "0.25"));
}

#[test]
fn exit_codes() {
    assert_eq!(mgchain(&["ground", "--n", "9"]).status.code(), Some(1));
    assert_eq!(mgchain(&["ground", "--h-range", "1:0:0.1"]).status.code(), Some(1));
    assert_eq!(mgchain(&["ground", "--frobnicate"]).status.code(), Some(1));
    assert_eq!(mgchain(&["quench-large", "--n", "10", "--h", "1"]).status.code(), Some(1));
    assert_eq!(mgchain(&["selftest"]).status.code(), Some(0));
}

#[test]
fn capacity_failure_becomes_error_row() {
    // full spectrum of the N=24 half-filled sector is far beyond the dense limit
    let o = mgchain(&["quench-small", "--n", "24", "--boundary", "periodic", "--h", "1", "--sectors", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let (_, rows) = parse(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][7], "error");
    assert_eq!(rows[0][8], "capacity");
    assert_eq!(rows[0][1], "24");
}

#[test]
fn entmap_of_dimer_state() {
    let o = mgchain(&["entmap", "--n", "8", "--boundary", "periodic", "--mg-state"]);
    let (_, rows) = parse(&stdout(&o));
    for r in rows.iter().filter(|r| r[7] == "eq20_entmap_raw") {
        let (i, j) = r[8].split_once(':').unwrap();
        let (i, j): (usize, usize) = (i.parse().unwrap(), j.parse().unwrap());
        let v: f64 = r[9].parse().unwrap();
        let expected = if i == j { 0.0 } else if i / 2 == j / 2 { 2.0 } else { 0.0 };
        assert!((v - expected).abs() < 1e-12, "{i}:{j} {v}");
    }
}

#[test]
fn labels_come_from_the_closed_set() {
    let known: Vec<&str> = mgchain_cli::Label::ALL.iter().map(|l| l.as_str()).collect();
    let o = mgchain(&["j2sweep", "--n", "8", "--boundary", "periodic", "--j2", "0.4,0.5", "--h", "0.5,1"]);
    let (header, rows) = parse(&stdout(&o));
    assert_eq!(header["extra_cells"], 2);
    assert!(rows.iter().all(|r| known.contains(&r[7].as_str())));
    assert!(rows.iter().any(|r| r[7] == "eq14_log10_d_av0"));
    assert!(rows.iter().any(|r| r[7] == "gap_level"));
}
