//! End-to-end runs of the binary: exit codes, file formats, cache resume,
//! config precedence, and cross-method agreement.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twistzeros"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn sample_csv_is_deterministic_with_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let r = run(&[
            "sample-ensemble", "--group", "U", "--n", "6", "--count", "5",
            "--seed", "1", "--out", out.to_str().unwrap(),
        ]);
        assert_ok(&r);
    }
    let fa = read(&a.join("samples_U_6.csv"));
    let fb = read(&b.join("samples_U_6.csv"));
    assert_eq!(fa, fb, "same seed must give identical bytes");
    assert!(fa.starts_with("group,n,seed,draw,theta_min,lambda_at_one\n"));
    assert_eq!(fa.lines().count(), 6);

    let c = dir.path().join("c");
    let r = run(&[
        "sample-ensemble", "--group", "U", "--n", "6", "--count", "5",
        "--seed", "2", "--out", c.to_str().unwrap(),
    ]);
    assert_ok(&r);
    assert_ne!(fa, read(&c.join("samples_U_6.csv")));
}

#[test]
fn full_phase_dump_has_all_phases() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&[
        "sample-ensemble", "--group", "USp", "--n", "4", "--count", "3",
        "--full-phases", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_ok(&r);
    let phases = read(&dir.path().join("phases_USp_4.csv"));
    assert_eq!(phases.lines().count(), 1 + 3 * 4);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["sample-ensemble", "--group", "SO", "--n", "51", "--out", out],
        vec!["sample-ensemble", "--group", "SU", "--n", "4", "--out", out],
        vec!["compute-zeros", "--label", "99.9.z.z", "--x-max", "50", "--out", out],
        vec!["central-values", "--label", "13.2.e.a", "--x-max", "100", "--method", "kz", "--out", out],
        vec!["central-values", "--label", "11.2.a.a", "--x-max", "100", "--method", "kz", "--out", out],
        vec!["central-values", "--label", "7.4.a.a", "--x-max", "100", "--method", "sideways", "--out", out],
        vec!["estimate-cutoff", "--label", "13.2.e.a", "--x-max", "200", "--grid", "1.0", "--out", out],
        vec!["compute-zeros", "--x-max", "50", "--out", out],
    ] {
        let r = run(&args);
        assert_eq!(r.status.code(), Some(2), "args {args:?}\nstderr: {}", String::from_utf8_lossy(&r.stderr));
    }
}

#[test]
fn zero_cache_resumes_to_identical_file() {
    let dir = tempfile::tempdir().unwrap();
    let resumed = dir.path().join("resumed");
    let fresh = dir.path().join("fresh");
    // partial run, then the full range against the same cache
    for x in ["60", "100"] {
        let r = run(&[
            "compute-zeros", "--label", "3.8.a.a", "--x-max", x,
            "--out", resumed.to_str().unwrap(),
        ]);
        assert_ok(&r);
    }
    let r = run(&[
        "compute-zeros", "--label", "3.8.a.a", "--x-max", "100",
        "--out", fresh.to_str().unwrap(),
    ]);
    assert_ok(&r);
    let a = read(&resumed.join("zeros_3_8_a_a.csv"));
    let b = read(&fresh.join("zeros_3_8_a_a.csv"));
    assert_eq!(a, b, "cache resume must reproduce the direct run");
    // admissibility: level 3 principal family admits exactly kron(d,3) = 1
    for line in a.lines().skip(1) {
        let d: i64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(d.rem_euclid(3), 1, "D = {d} not admissible");
    }
}

#[test]
fn central_value_methods_agree_on_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for method in ["direct", "kz"] {
        let r = run(&[
            "central-values", "--label", "7.4.a.a", "--x-max", "120",
            "--method", method, "--out", out,
        ]);
        assert_ok(&r);
    }
    let parse = |name: &str| -> Vec<(i64, f64)> {
        read(&dir.path().join(name))
            .lines()
            .skip(1)
            .map(|l| {
                let p: Vec<&str> = l.split(',').collect();
                (p[1].parse().unwrap(), p[2].parse().unwrap())
            })
            .collect()
    };
    let direct = parse("values_7_4_a_a_direct.csv");
    let kz = parse("values_7_4_a_a_kz.csv");
    assert_eq!(direct.len(), kz.len());
    assert!(direct.len() >= 10);
    for ((d1, v1), (d2, v2)) in direct.iter().zip(&kz) {
        assert_eq!(d1, d2);
        if v2.abs() > 1e-10 {
            assert!((v1 - v2).abs() / v2.abs() < 1e-4, "D = {d1}: {v1} vs {v2}");
        } else {
            assert!(v1.abs() < 1e-8, "D = {d1}: direct {v1} should vanish");
        }
    }
    let manifest = read(&dir.path().join("manifest-central-values.json"));
    assert!(manifest.contains("\"kappa\""));
    assert!(manifest.contains("\"reference_d\""));
}

#[test]
fn config_file_yields_to_explicit_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "label = 3.8.a.a\nx-max = 100\nseed = 9\n").unwrap();
    let r = run(&[
        "compute-zeros", "--config", conf.to_str().unwrap(), "--seed", "1",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_ok(&r);
    let manifest = read(&dir.path().join("manifest-compute-zeros.json"));
    assert!(manifest.contains("\"seed\": 1"), "flag must beat config:\n{manifest}");
    assert!(manifest.contains("\"x_max\": 100"), "config must beat default:\n{manifest}");

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "sede = 9\n").unwrap();
    let r = run(&[
        "compute-zeros", "--config", bad.to_str().unwrap(),
        "--label", "3.8.a.a", "--x-max", "50", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn cutoff_curve_lists_every_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&[
        "estimate-cutoff", "--label", "3.8.a.a", "--x-max", "300",
        "--grid", "0.5,1.0,2.0", "--mode", "values", "--matrices", "200",
        "--min-kept", "10", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_ok(&r);
    let curve = read(&dir.path().join("cutoff_curve_3_8_a_a.csv"));
    assert!(curve.starts_with("c_candidate,discrepancy\n"));
    assert_eq!(curve.lines().count(), 4);

    // a single-candidate grid trivially wins
    let single = dir.path().join("single");
    let r = run(&[
        "estimate-cutoff", "--label", "3.8.a.a", "--x-max", "300",
        "--grid", "1.7", "--mode", "values", "--matrices", "200",
        "--min-kept", "10", "--out", single.to_str().unwrap(),
        "--cache-dir", dir.path().join("cache").to_str().unwrap(),
    ]);
    assert_ok(&r);
    let manifest = read(&single.join("manifest-estimate-cutoff.json"));
    assert!(manifest.contains("\"argmin_c_std\": 1.7"), "{manifest}");
}

#[test]
fn compare_normalizes_both_sides_to_unit_mean() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&[
        "compare", "--label", "3.8.a.a", "--x-max", "300", "--matrices", "50",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_ok(&r);
    let mean_of = |name: &str| {
        let rows: Vec<f64> = read(&dir.path().join(name))
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
            .collect();
        rows.iter().sum::<f64>() / rows.len() as f64
    };
    assert!((mean_of("compare_3_8_a_a_zeros.csv") - 1.0).abs() < 1e-12);
    assert!((mean_of("compare_3_8_a_a_phases.csv") - 1.0).abs() < 1e-12);

    let split = read(&dir.path().join("compare_3_8_a_a_split.csv"));
    assert!(split.contains("small,") && split.contains("large,"));

    let gp = read(&dir.path().join("compare_3_8_a_a.gp"));
    assert!(gp.contains("plot"));
    assert!(gp.contains("compare_3_8_a_a_zero_density.csv"));
    assert!(gp.contains("compare_3_8_a_a_phase_density.csv"));
}

#[test]
fn exhausted_coefficient_table_exits_4() {
    // the bundled non-self-dual table holds 42,000 coefficients; pick a
    // discriminant bound that needs more than that
    let mut x = 1000;
    while twistzeros::lfunc::TwistFamily::required_terms(13, 2, x, 0.0) <= 42_000 {
        x *= 2;
    }
    let dir = tempfile::tempdir().unwrap();
    let r = run(&[
        "central-values", "--label", "13.2.e.a", "--x-max", &x.to_string(),
        "--method", "direct", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        r.status.code(),
        Some(4),
        "stderr: {}",
        String::from_utf8_lossy(&r.stderr)
    );
}
