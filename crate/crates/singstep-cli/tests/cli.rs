use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_singstep"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("singstep-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `(kappa, L, T, N) -> order` for one scheme.
fn orders(csv: &str, scheme: &str) -> Vec<(String, String, String, usize, String)> {
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("scheme,alpha,kappa,L,lambda1,T,M,N,final_error,order,exp_term,alg_term,predicted_order")
    );
    lines
        .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
        .filter(|f| f[0] == scheme)
        .map(|f| (f[2].clone(), f[3].clone(), f[5].clone(), f[7].parse().unwrap(), f[9].clone()))
        .collect()
}

#[test]
fn empty_scheme_list_names_key() {
    let dir = scratch("empty");
    let cfg = dir.join("c.cfg");
    std::fs::write(&cfg, "alpha = 0.5\nkappa = -1\nT = 1\nN = 64\n").unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`scheme`"), "{}", stderr(&o));
    assert!(!dir.join("out").exists());
}

#[test]
fn parse_error_reports_line_and_key() {
    let dir = scratch("parse");
    let cfg = dir.join("c.cfg");
    std::fs::write(&cfg, "scheme = IE\nalpha = 0.5\nkappa = minus one\n").unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("line 3") && e.contains("kappa"), "{e}");
}

#[test]
fn unknown_preset_lists_names() {
    let o = run(&["preset", "table4", "--out", scratch("unknown").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("table4") && e.contains("table3") && e.contains("kink-ode"), "{e}");
}

#[test]
fn mlf_prints_value_and_derivative() {
    let o = run(&["mlf", "--alpha", "0.5", "--z", "-2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let get = |key: &str| -> f64 {
        out.lines()
            .find_map(|l| l.strip_prefix(key))
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or_else(|| panic!("{key} missing in {out}"))
    };
    // e^{4} erfc(2)
    assert!((get("E = ") - 0.255_395_676_310_506).abs() < 1e-12);
    // E' > 0 on the negative axis
    assert!(get("dE = ") > 0.0);
    let o = run(&["mlf", "--alpha", "1.5", "--z", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn doc_check_passes_in_hypothesis() {
    let o = run(&["doc-check", "--n", "200", "--kappa-tau", "-0.2"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("bound = pass"));
    let o = run(&["doc-check", "--n", "20", "--kappa-tau", "-0.4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("bound = skipped"));
}

#[test]
fn table3_preset_csv() {
    let dir = scratch("table3");
    let a = dir.join("a");
    let b = dir.join("b");
    let o = run(&["preset", "table3", "--out", a.to_str().unwrap(), "--jobs", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["preset", "table3", "--out", b.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(a.join("table.csv")).unwrap();
    assert_eq!(csv, std::fs::read_to_string(b.join("table.csv")).unwrap(), "output depends on --jobs");
    assert_eq!(csv.lines().count(), 1 + 3 * 5 * 5);
    let ie: Vec<_> = orders(&csv, "IE").into_iter().filter(|r| r.0 == "-20").collect();
    for n in [256, 512, 1024, 2048] {
        let row = ie.iter().find(|r| r.3 == n).unwrap();
        assert_eq!(row.4, "1.00", "IE kappa=-20 N={n}");
    }
    for f in ["table_raw.csv", "bounds.csv", "metadata.txt", "failures.txt", "config.txt"] {
        assert!(a.join(f).exists(), "{f}");
    }
    assert!(!a.join("kinkscan.csv").exists());
    let meta = std::fs::read_to_string(a.join("metadata.txt")).unwrap();
    assert!(meta.contains("alpha = 0.5") && meta.contains("timestamp_unix"));
}

#[test]
fn table1_preset_first_order_column() {
    let dir = scratch("table1");
    let o = run(&["preset", "table1", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.join("table.csv")).unwrap();
    let rows: Vec<_> = orders(&csv, "L1")
        .into_iter()
        .filter(|r| r.0 == "1" && r.1.starts_with("3.14159"))
        .collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.4 == "1.00"), "{rows:?}");
    let meta = std::fs::read_to_string(dir.join("metadata.txt")).unwrap();
    assert!(meta.contains("M = 2000") && meta.contains("20000"));
}

#[test]
fn markdown_and_partial_failure_exit() {
    let dir = scratch("partial");
    let cfg = dir.join("c.cfg");
    // kappa tau = 1.5 at N/2 = 128: the BDF2 start step refuses it
    std::fs::write(
        &cfg,
        "scheme = BDF2\nscheme = IE\nalpha = 0.5\nkappa = 200\nT = 1\nN = 256\nN = 512\nformat = markdown\n",
    )
    .unwrap();
    let out = dir.join("out");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("table.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let fails = std::fs::read_to_string(out.join("failures.txt")).unwrap();
    assert!(fails.contains("FAIL BDF2") && fails.contains("N=256"), "{fails}");
    let md = std::fs::read_to_string(out.join("table.md")).unwrap();
    assert!(md.contains("### BDF2") && md.contains("| 256 | — |"), "{md}");
}

#[test]
fn kink_ode_scan_parseable() {
    let dir = scratch("kink");
    let o = run(&["preset", "kink-ode", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let scan = std::fs::read_to_string(dir.join("kinkscan.csv")).unwrap();
    let mut lines = scan.lines();
    assert_eq!(lines.next(), Some("scheme,alpha,kappa,L,T,M,N,final_error,order"));
    let mut negative = 0;
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 9);
        let err: f64 = f[7].parse().unwrap();
        let order: f64 = f[8].parse().unwrap();
        assert!(err > 0.0);
        if f[0] == "CN" && order < 0.0 {
            negative += 1;
        }
    }
    assert!(negative > 0);
}
