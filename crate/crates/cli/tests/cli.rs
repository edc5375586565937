use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hjortic(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjortic"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .current_dir(dir)
        .env_remove("HJORTIC_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let o = hjortic(dir, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (h, rows)
}

fn ar2_data(dir: &Path) {
    ok(
        dir,
        &[
            "--seed", "7", "synth", "--model", "ar2", "--n", "154", "--name", "z",
        ],
    );
}

#[test]
fn synth_then_select_is_reproducible() {
    let d = TempDir::new().unwrap();
    ar2_data(d.path());
    let (h, rows) = csv_rows(&d.path().join("synth.csv"));
    assert_eq!(h, ["year", "z"]);
    assert_eq!(rows.len(), 154);
    assert_eq!(rows[0][0], "1859");

    let args = [
        "select",
        "--input",
        "synth.csv",
        "--response",
        "z",
        "--wide",
        "ar2+trend",
    ];
    ok(d.path(), &args);
    let first = fs::read(d.path().join("select.json")).unwrap();
    let js: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(js["command"], "select");
    assert_eq!(js["config_echo"]["data"]["response"], "z");
    let table = js["table"].as_array().unwrap();
    assert_eq!(table.len(), 6);
    let (_, rows) = csv_rows(&d.path().join("select.csv"));
    assert_eq!(rows.len(), 6);

    ok(d.path(), &args);
    assert_eq!(first, fs::read(d.path().join("select.json")).unwrap());
}

#[test]
fn synth_is_seed_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    ar2_data(a.path());
    ar2_data(b.path());
    assert_eq!(
        fs::read(a.path().join("synth.csv")).unwrap(),
        fs::read(b.path().join("synth.csv")).unwrap()
    );
}

#[test]
fn model_commands_write_outputs() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ar2_data(p);
    let data = ["--input", "synth.csv", "--response", "z"];
    let with = |cmd: &[&str]| -> Vec<String> {
        let mut v: Vec<String> = vec![cmd[0].into()];
        v.extend(data.iter().map(|s| s.to_string()));
        v.extend(cmd[1..].iter().map(|s| s.to_string()));
        v
    };
    let runs: [&[&str]; 9] = [
        &[
            "fit",
            "--ar-order",
            "2",
            "--focus",
            "thresh:2014,2015",
            "--threshold",
            "5",
        ],
        &["forecast", "--ar-order", "2", "--horizon", "3"],
        &["fic", "--wide", "ar2+trend", "--focus", "pred:1"],
        &["monitor", "--ar-order", "2", "--start", "1950"],
        &["bridge", "--ar-order", "2"],
        &["adf"],
        &["rollsd"],
        &["tvar", "--bandwidth", "0.3"],
        &["reconstruct", "--ar-order", "2"],
    ];
    for r in runs {
        let args = with(r);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(p, &refs);
        let js = read_json(&p.join(format!("{}.json", r[0])));
        assert_eq!(js["command"], r[0]);
        assert!(js["config_echo"].is_object());
        if r[0] != "fit" {
            assert!(
                p.join(format!("{}.csv", r[0])).exists(),
                "{} csv missing",
                r[0]
            );
        }
    }
    for f in [
        "fit_cd.json",
        "fit_cd.csv",
        "fit_residuals.csv",
        "fic_table.csv",
    ] {
        assert!(p.join(f).exists(), "{f} missing");
    }
    let fc = read_json(&p.join("forecast.json"));
    assert_eq!(fc["config_echo"]["horizon"], 3);
    let (_, rows) = csv_rows(&p.join("forecast.csv"));
    assert_eq!(rows.len(), 3);
}

#[test]
fn fit_cd_round_trips_through_combine() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ar2_data(p);
    ok(
        p,
        &[
            "fit",
            "--input",
            "synth.csv",
            "--response",
            "z",
            "--ar-order",
            "2",
            "--focus",
            "pred:1",
        ],
    );
    ok(
        p,
        &["combine", "--cd", "fit_cd.json", "--cd", "fit_cd.json"],
    );
    let single = read_json(&p.join("fit_cd.json"));
    let both = read_json(&p.join("combine.json"));
    let c1 = single["center"].as_f64().unwrap();
    let c2 = both["combined"]["center"].as_f64().unwrap();
    assert!((c1 - c2).abs() < 1e-9);
    let s1 = single["spread"].as_f64().unwrap();
    let s2 = both["combined"]["spread"].as_f64().unwrap();
    assert!((s2 - s1 / 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn combine_four_intervals() {
    let d = TempDir::new().unwrap();
    // four normal intervals whose precision-weighted pool is known in closed form
    let ivs = [(3.0, 5.0), (2.5, 4.5), (3.5, 6.5), (2.0, 5.2)];
    let mut args = vec!["combine".to_string()];
    let (mut wsum, mut wmu) = (0.0f64, 0.0f64);
    for (lo, hi) in ivs {
        args.push("--interval".into());
        args.push(format!("{lo},{hi}"));
        let sd = (hi - lo) / (2.0 * 1.959963984540054);
        wsum += 1.0 / (sd * sd);
        wmu += (lo + hi) / 2.0 / (sd * sd);
    }
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ok(d.path(), &refs);
    let js = read_json(&d.path().join("combine.json"));
    let mu = wmu / wsum;
    let half = 1.959963984540054 / wsum.sqrt();
    let iv = &js["combined"]["interval"];
    assert!((iv[0].as_f64().unwrap() - (mu - half)).abs() < 1e-6);
    assert!((iv[1].as_f64().unwrap() - (mu + half)).abs() < 1e-6);
    let (h, rows) = csv_rows(&d.path().join("combine.csv"));
    assert_eq!(h, ["theta", "C", "cc"]);
    assert_eq!(rows.len(), 401);
}

#[test]
fn copula_simulate_matches_summary() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(
        p,
        &[
            "--seed",
            "11",
            "copula",
            "simulate",
            "--params",
            "9.2,4.0,9.0,0.25,0.86",
            "--n-fish",
            "100",
            "--n-reps",
            "400",
        ],
    );
    let js = read_json(&p.join("copula_simulate.json"));
    let (h, rows) = csv_rows(&p.join("copula_simulate.csv"));
    assert_eq!(h, ["rep", "hsi_ind", "hsi_bulk"]);
    assert_eq!(rows.len(), 400);
    let ind: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let mean = ind.iter().sum::<f64>() / ind.len() as f64;
    assert!((mean - js["summary"]["mean_ind"].as_f64().unwrap()).abs() < 1e-8);
}

#[test]
fn copula_fit_feeds_simulate() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(
        p,
        &[
            "--seed",
            "3",
            "synth",
            "--model",
            "copula",
            "--params",
            "9.2,4.0,9.0,0.25,0.86",
            "--n",
            "800",
        ],
    );
    ok(p, &["copula", "fit", "--pairs", "synth.csv"]);
    let fit = read_json(&p.join("copula_fit.json"));
    let rho = fit["model"]["rho"].as_f64().unwrap();
    assert!(rho > 0.7 && rho < 0.95, "rho {rho}");
    ok(
        p,
        &[
            "copula",
            "translate",
            "--model",
            "copula_fit.json",
            "--n-fish",
            "50",
            "--n-reps",
            "200",
        ],
    );
    let tr = read_json(&p.join("copula_translate.json"));
    assert!(tr["line"]["slope"].as_f64().unwrap() > 0.0);
    let (h, _) = csv_rows(&p.join("copula_translate.csv"));
    assert_eq!(h, ["rep", "hsi_ind", "hsi_bulk", "fitted_bulk"]);
}

#[test]
fn kola_winter_means() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let mut text = String::from("year,month,temp\n");
    for y in 2000..2003 {
        for m in 1..=12 {
            if (y, m) == (2001, 11) {
                continue;
            }
            text.push_str(&format!("{y},{m},{}\n", (y - 2000) * 12 + m));
        }
    }
    fs::write(p.join("monthly.csv"), text).unwrap();
    ok(p, &["kola-winter", "--input", "monthly.csv"]);
    let (h, rows) = csv_rows(&p.join("kola_winter.csv"));
    assert_eq!(h, ["year", "kola_winter"]);
    assert_eq!(rows.len(), 2);
    // 2001 winter: Oct-Dec 2000 (10,11,12) and Jan-Mar 2001 (13,14,15)
    assert_eq!(rows[0], ["2001", "12.5"]);
    assert_eq!(rows[1][0], "2002");
    assert!(rows[1][1].is_empty() || rows[1][1] == "NA");
    let js = read_json(&p.join("kola_winter.json"));
    assert_eq!(js["incomplete_winters"][0], 2002);
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    assert_eq!(hjortic(p, &["no-such-command"]).status.code(), Some(2));
    assert_eq!(hjortic(p, &["--help"]).status.code(), Some(0));
    assert_eq!(
        hjortic(p, &["adf", "--input", "missing.csv", "--response", "z"])
            .status
            .code(),
        Some(1)
    );
    ar2_data(p);
    let bad_focus = hjortic(
        p,
        &[
            "fit",
            "--input",
            "synth.csv",
            "--response",
            "z",
            "--focus",
            "bogus",
        ],
    );
    assert_eq!(bad_focus.status.code(), Some(2));
    assert_eq!(
        hjortic(p, &["synth", "--model", "ar3", "--n", "50"])
            .status
            .code(),
        Some(2)
    );
    let threads = Command::new(env!("CARGO_BIN_EXE_hjortic"))
        .args(["--out"])
        .arg(p)
        .args(["adf", "--input", "synth.csv", "--response", "z"])
        .current_dir(p)
        .env("HJORTIC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_results() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_hjortic"))
            .arg("--out")
            .arg(p)
            .args([
                "--seed",
                "5",
                "copula",
                "simulate",
                "--params",
                "9.2,4.0,9.0,0.25,0.86",
            ])
            .args(["--n-fish", "60", "--n-reps", "64"])
            .env("HJORTIC_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        fs::read(p.join("copula_simulate.csv")).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}
