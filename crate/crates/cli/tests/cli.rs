use std::process::{Command, Output};

fn dengue(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dengue"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_defaults_to_outbreak_without_control() {
    let out = dengue(&["simulate"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,S_h,E_h,I_h,R_h,A_m,S_m,E_m,I_m,c"));
    assert_eq!(lines.next(), Some("0,479350,216,434,0,1440000,2880000,0,0,0"));
    // 8400 steps at the default stride of 10, plus the initial row.
    assert_eq!(text.lines().count(), 1 + 841);
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("schedule=zero") && summary.contains("insecticide_amount=0"));
}

#[test]
fn simulate_constant_control_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = dengue(&[
        "simulate",
        "--schedule",
        "constant:0.084",
        "--horizon",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0.084")));
    assert!(text.lines().last().unwrap().starts_with("10,"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(&cfg, "# weekly\nschedule = pulsed:7:1:1\nhorizon = 20\n").unwrap();
    let out = dengue(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "horizon=3",
        "--stride",
        "100",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap().rsplit(',').next(), Some("1"));
    assert!(text.lines().last().unwrap().starts_with("3,"));
}

#[test]
fn sweep_table() {
    let out = dengue(&["sweep"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(
        text.lines().next(),
        Some("period,insecticide_amount,peak_I_h,t_peak_I_h,peak_I_m,cumulative_infections,feasible")
    );
    let amounts: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(amounts.len(), 6);
    assert_eq!(&amounts[..5], ["12", "8", "7", "6", "3"]);
    let reference: f64 = amounts[5].parse().unwrap();
    assert!((reference - 7.056).abs() <= 1e-9);
    assert!(text.lines().last().unwrap().starts_with("constant_0.084,"));
}

#[test]
fn sweep_single_period() {
    let out = dengue(&["sweep", "--periods", "7"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(dengue(&["sweep", "--periods", "7,x"]).status.code(), Some(2));
    assert_eq!(
        dengue(&["simulate", "--set", "E_h0=300000", "--set", "I_h0=300000"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dengue(&["simulate", "--set", "K=3"]).status.code(), Some(2));
    assert_eq!(dengue(&["simulate", "--schedule", "weekly"]).status.code(), Some(2));
    assert_eq!(dengue(&["bogus"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_one() {
    let out = dengue(&["find-period", "--lo", "25", "--hi", "30"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().filter(|l| l.starts_with("schedule=pulsed:")).count(), 6);
}

#[test]
fn find_period() {
    let out = dengue(&["find-period"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(row[0] == "11" || row[0] == "12");
    let amount: f64 = row[1].parse().unwrap();
    assert!((7.0..=8.0).contains(&amount));
}

#[test]
fn r0_table_and_threshold() {
    let out = dengue(&["r0", "--c", "0,0.084", "--threshold"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "c,R0");
    let r0 = |line: &str| line.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert!(r0(lines[1]) > 1.0);
    assert!(r0(lines[2]) < 1.0);
    assert_eq!(lines[3], "c_star,R0");
    let c_star: f64 = lines[4].split(',').next().unwrap().parse().unwrap();
    assert!((0.080..=0.085).contains(&c_star));
}

#[test]
fn plot_script_mentions_csv() {
    let out = dengue(&["plot-script", "--csv", "run.csv"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("'run.csv'"));
}
