use std::fs;
use std::process::{Command, Output};

fn ssk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssk"))
        .args(args)
        .env_remove("SSK_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const TABLE_ROWS: [(&str, &str); 15] = [
    ("00", "00001"),
    ("01", "00010"),
    ("100", "00100"),
    ("101", "01000"),
    ("110", "10000"),
    ("111000", "00111"),
    ("111001", "01011"),
    ("111010", "10011"),
    ("111011", "01101"),
    ("111100", "10101"),
    ("111101", "11001"),
    ("1111100", "01110"),
    ("1111101", "10110"),
    ("1111110", "11010"),
    ("1111111", "11100"),
];

#[test]
fn table_reproduces_five_antenna_three_chain_codebook() {
    let o = ssk(&["table", "--nt", "5", "--max-rf", "3", "--rate", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("source_bits,symbol,weight,prior,achieved"));
    let rows: Vec<(String, String)> = lines
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].to_string(), c[1].to_string())
        })
        .collect();
    let want: Vec<(String, String)> = TABLE_ROWS.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    assert_eq!(rows, want);
}

#[test]
fn table_alphabet_layout_parses_back() {
    let o = ssk(&[
        "table", "--nt", "5", "--max-rf", "3", "--rate", "3", "--layout", "alphabet",
    ]);
    assert!(o.status.success());
    let a = ssk_core::Alphabet::from_table(&stdout(&o)).unwrap();
    assert_eq!(a.len(), 15);
    assert!((a.avg_power() - 1.25).abs() < 1e-12);
}

#[test]
fn design_prints_solution_and_curve_endpoints() {
    let o = ssk(&[
        "design", "--nt", "7", "--dmin", "2", "--max-rf", "7", "--rate", "4", "--locus", "10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("rate binding    true"));
    let csv: Vec<&str> = out.lines().skip_while(|l| *l != "beta,rate_bits,avg_power").collect();
    assert!(csv.len() == 12, "{out}");
    assert!(csv[1].starts_with("0+,2.807354922,1.000000000"));
    assert_eq!(*csv.last().unwrap(), "1,6.000000000,3.500000000");
}

#[test]
fn design_locus_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("locus.csv");
    let o = ssk(&[
        "design",
        "--nt",
        "5",
        "--rate",
        "4",
        "--locus",
        "4",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(!stdout(&o).contains("beta,rate_bits"));
}

#[test]
fn infeasible_rate_exits_with_two() {
    let o = ssk(&["design", "--nt", "7", "--rate", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rate infeasible"));
    let o = ssk(&["table", "--nt", "4", "--rate", "3", "--scheme", "ssk"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ssk(&["verify", "--nt", "12", "--ntx", "6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pep_prints_one_value() {
    let o = ssk(&[
        "pep", "--d", "2", "--L", "0", "--snr-db", "10", "--nt", "5", "--nr", "5", "--bound",
    ]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 1.0 / 486.0).abs() < 1e-12);
    let o = ssk(&[
        "pep", "--d", "2", "--L", "-0.5", "--snr-db", "10", "--nt", "5", "--nr", "5", "--exact",
    ]);
    assert!(o.status.success());
    let exact: f64 = stdout(&o).trim().parse().unwrap();
    assert!(exact > 0.0 && exact < 0.5);
    let o = ssk(&[
        "pep", "--d", "2", "--L", "-0.5", "--snr-db", "10", "--nt", "5", "--nr", "5", "--bound",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ser_estimate_csv() {
    let o = ssk(&[
        "ser-estimate",
        "--scheme",
        "gssk",
        "--nt",
        "5",
        "--rate",
        "3",
        "--nr",
        "5",
        "--snr-db",
        "0:10:5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(out.lines().next(), Some("snr_db,estimate,union_bound"));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r[1] <= r[2]);
    }
    assert!(rows[0][1] > rows[2][1]);
}

fn write_config(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("sim.cfg");
    fs::write(
        &path,
        "# quick run\nscheme = gssk\nnt = 5\nrate = 3\nebn0 = 0\nmin_frame_errors = 10\nmax_frames = 2000\nseed = 4\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_from_config_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir);
    let a = ssk(&["simulate", "--config", &cfg]);
    let b = ssk(&["simulate", "--config", &cfg]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("ebn0_db,ser,ser_ci,fer,fer_ci,symbols,frames\n"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir);
    let o = ssk(&["simulate", "--config", &cfg, "--ebn0", "1,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let grid: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(grid, ["1", "2"]);
}

#[test]
fn seed_environment_variable_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir);
    let run = |env_seed: Option<&str>, flag: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_ssk"));
        c.args(["simulate", "--config", &cfg, "--seed", flag]);
        match env_seed {
            Some(s) => c.env("SSK_SEED", s),
            None => c.env_remove("SSK_SEED"),
        };
        let o = c.output().unwrap();
        assert!(o.status.success());
        (stdout(&o), stderr(&o))
    };
    let (with_env, log) = run(Some("77"), "5");
    assert!(log.contains("seed 77"));
    let (flag_77, _) = run(None, "77");
    assert_eq!(with_env, flag_77);
    let (flag_5, _) = run(None, "5");
    assert_ne!(with_env, flag_5);
}

#[test]
fn frame_cap_exits_with_three_after_writing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let o = ssk(&[
        "simulate",
        "--scheme",
        "gssk",
        "--nt",
        "5",
        "--rate",
        "3",
        "--ebn0",
        "20",
        "--max-frames",
        "10",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(fs::read_to_string(out).unwrap().lines().count(), 2);
}

#[test]
fn simulate_modes_parse() {
    let o = ssk(&[
        "simulate",
        "--scheme",
        "ee-hssk",
        "--nt",
        "5",
        "--max-rf",
        "3",
        "--rate",
        "3",
        "--ebn0=-2",
        "--min-frame-errors",
        "5",
        "--arq",
        "real",
        "--block-fading",
        "--metric",
        "eq5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let log = stderr(&o);
    assert!(log.contains("arq real") && log.contains("per-frame"), "{log}");
}

#[test]
fn sweep_contains_curve_endpoints() {
    let o = ssk(&[
        "sweep-power-rate",
        "--nt",
        "7",
        "--max-rf",
        "7",
        "--rates",
        "2:4:1",
        "--locus-points",
        "20",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("scheme,rate_bits,avg_power,theoretical_power"));
    assert!(out.contains("optimum-m7,2.807354922,1.000000000,1.000000000"));
    assert!(out.contains("optimum-m7,6.000000000,3.500000000,3.500000000"));
    // SSK cannot carry 3 bits on 7 antennas.
    assert!(stderr(&o).contains("ssk at 3 bits"));
}

#[test]
fn verify_reports_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bounds.csv");
    let o = ssk(&["verify", "--nt", "6", "--rate", "3", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("min distance 2 certified"));
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("n_t,weight,class_size,exact4,bound4,exact6,bound6\n"));
    assert!(text.contains("\n6,3,20,4,5,2,2\n"), "{text}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "nt = 5\nbogus = 1\n").unwrap();
    let o = ssk(&["design", "--config", path.to_str().unwrap(), "--rate", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"));
}
