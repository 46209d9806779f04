use std::process::Command;

fn loolsm(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_loolsm")).args(args).env("RUST_LOG", "warn").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn oracle_prints_references() {
    let (code, out, _) = loolsm(&["oracle", "--case", "bestof", "--key", "90"]);
    assert_eq!(code, 0);
    assert!(out.contains("bermudan 8.075") && out.contains("analytic european 6.655"), "{out}");
}

#[test]
fn price_reports_estimate() {
    let (code, out, _) = loolsm(&["price", "--case", "put", "--mode", "lsm", "--strike", "110", "--paths", "4000"]);
    assert_eq!(code, 0);
    let price: f64 = out.split_whitespace().skip_while(|w| *w != "price").nth(1).unwrap().parse().unwrap();
    assert!((price - 12.486).abs() < 0.3, "{out}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let (code, _, err) = loolsm(&["price", "--case", "basket", "--basis-m", "7", "--paths", "100"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = loolsm(&["price", "--case", "swaption"]);
    assert_eq!(code, 2);

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "case = \"put\"\npool_size = 1000\nn_mc_list = [3]\n").unwrap();
    let (code, _, err) = loolsm(&["experiment2", "--config", config.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.toml") && err.contains("divisible"), "{err}");
}

#[test]
fn experiment_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("e1.toml");
    let out = dir.path().join("e1.csv");
    std::fs::write(
        &config,
        "case = \"put\"\nkeys = [90.0]\npaths = 1000\nn_mc = 2\nestimators = [\"LSM\", \"LOOLSM\"]\n",
    )
    .unwrap();
    let args = ["experiment1", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"];
    let (code, _, err) = loolsm(&args);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(2).unwrap().starts_with("put,90.00000000,LOOLSM,5,1000,2,"));
    let (_, again, _) = loolsm(&args[..3]);
    assert_eq!(again, text);
}
