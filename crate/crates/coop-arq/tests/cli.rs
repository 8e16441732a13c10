//! End-to-end checks of the command-line interface and CSV determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coop-arq"))
}

#[test]
fn spectra_subcommand_emits_table_values() {
    let out = bin().args(["spectra", "rate-1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("code,d_sq,omega_per_info_symbol"));
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("rate-1,1.0000000000e1,"), "{first}");
}

#[test]
fn thresholds_subcommand_both_methods() {
    for method in ["alg1", "logscale"] {
        let out = bin()
            .args([
                "thresholds",
                "--method",
                method,
                "--rho-db",
                "20,30",
                "--code",
                "rate-1",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{method} failed");
        let text = String::from_utf8(out.stdout).unwrap();
        // Header plus 2 rho points x 3 hops.
        assert_eq!(text.lines().count(), 7, "{method}: {text}");
    }
}

#[test]
fn run_scenario_is_byte_deterministic() {
    let dir = std::env::temp_dir().join(format!("coop-arq-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("saf.cfg");
    std::fs::write(
        &cfg_path,
        "rho_db = 8, 12\ntrials = 20000\nm = 1\nlambda = 1.5\n",
    )
    .unwrap();
    let out_a = dir.join("a.csv");
    let out_b = dir.join("b.csv");
    for out in [&out_a, &out_b] {
        let st = bin()
            .args([
                "run",
                "saf-outage",
                "--config",
                cfg_path.to_str().unwrap(),
                "--seed",
                "9",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(st.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "same config + seed must give byte-identical CSV");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn analytic_and_mc_columns_agree_in_scenario_output() {
    let dir = std::env::temp_dir().join(format!("coop-arq-agree-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("saf.cfg");
    std::fs::write(
        &cfg_path,
        "rho_db = 10\ntrials = 400000\nm = 1\nlambda = 1.5\n",
    )
    .unwrap();
    let out = dir.join("o.csv");
    let st = bin()
        .args([
            "run",
            "saf-outage",
            "--config",
            cfg_path.to_str().unwrap(),
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&out).unwrap();
    // Collect (n -> value) for analytic and mc rows and compare within ci.
    let mut analytic = std::collections::HashMap::new();
    let mut mc = std::collections::HashMap::new();
    for line in text.lines().skip_while(|l| l.starts_with('#')).skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let n: usize = cols[4].parse().unwrap();
        let v: f64 = cols[5].parse().unwrap();
        if cols[7] == "analytic" {
            analytic.insert(n, v);
        } else if cols[7].starts_with("mc") {
            let ci: f64 = cols[6].parse().unwrap();
            mc.insert(n, (v, ci));
        }
    }
    for n in 0..=3 {
        let a = analytic[&n];
        let (m, ci) = mc[&n];
        assert!(
            (a - m).abs() <= ci.max(5e-4),
            "n={n}: analytic {a} vs mc {m} (ci {ci})"
        );
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_scenario_exits_with_config_code() {
    let out = bin().args(["run", "no-such-scenario"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
