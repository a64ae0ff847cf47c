use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn cvdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvdyn"))
        .args(args)
        .output()
        .unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn meta(dir: &Path, stem: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(format!("{stem}.meta.json"))).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Header and rows of a numeric CSV.
fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn figure_three_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvdyn(&[
        "--mode",
        "figure",
        "--figure",
        "fig3",
        "--output",
        &path(dir.path(), "out.csv"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let p = &meta(dir.path(), "out")["parameters"];
    assert_eq!(p["spectra"], serde_json::json!(["superohmic"]));
    assert_eq!(p["temperature"]["regime"], "zero");
    assert_eq!(p["x"], 0.3);
    assert_eq!(p["r"][0], 0.01);
    assert_eq!(p["alpha"], 0.1);
}

#[test]
fn missing_x_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvdyn(&[
        "--mode",
        "trajectory",
        "--spectrum",
        "ohmic",
        "--temperature",
        "high:100",
        "--r",
        "1",
        "--output",
        &path(dir.path(), "a.csv"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("x: required"), "{}", stderr(&o));
    assert!(!dir.path().join("a.csv").exists());
}

#[test]
fn every_problem_is_reported() {
    let o = cvdyn(&[
        "--mode",
        "trajectory",
        "--spectrum",
        "metallic",
        "--alpha",
        "2",
        "--format",
        "xml",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    for key in [
        "spectrum:",
        "x:",
        "temperature:",
        "r:",
        "output:",
        "format:",
    ] {
        assert!(err.contains(key), "{key} missing from\n{err}");
    }
    assert_eq!(cvdyn(&["--bogus", "1"]).status.code(), Some(1));
    assert_eq!(cvdyn(&["--help"]).status.code(), Some(0));
}

#[test]
fn strong_coupling_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvdyn(&[
        "--mode",
        "trajectory",
        "--spectrum",
        "ohmic",
        "--x",
        "1",
        "--alpha",
        "0.3",
        "--temperature",
        "high:100",
        "--r",
        "0.5",
        "--tau-max",
        "2",
        "--steps",
        "200",
        "--output",
        &path(dir.path(), "t.csv"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = meta(dir.path(), "t");
    assert_eq!(m["weak_coupling_warning"], true);
    assert!(m["warnings"][0].as_str().unwrap().contains("alpha"));
    assert!(m["units"].as_str().unwrap().contains("nats"));
    assert!(m["timestamp"].is_string());
    assert_eq!(m["software"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn coefficient_dump_starts_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = cvdyn(&[
        "--mode",
        "coeffs-dump",
        "--spectrum",
        "subohmic",
        "--x",
        "0.3",
        "--temperature",
        "high:100",
        "--tau-max",
        "3",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&out);
    assert_eq!(header[0], "tau");
    assert!(rows[0].iter().all(|&v| v == 0.0));
    assert!(rows[1][1] > 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let o = cvdyn(&[
            "--mode",
            "figure",
            "--figure",
            "fig4b",
            "--output",
            &path(dir.path(), name),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    };
    run("a.csv");
    run("b.csv");
    for family in ["ohmic", "subohmic", "superohmic"] {
        let a = std::fs::read(dir.path().join(format!("a_{family}.csv"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b_{family}.csv"))).unwrap();
        assert_eq!(a, b, "{family}");
    }
    let (mut ma, mut mb) = (meta(dir.path(), "a"), meta(dir.path(), "b"));
    for m in [&mut ma, &mut mb] {
        m["timestamp"] = Value::Null;
        for r in m["results"].as_array_mut().unwrap() {
            r["file"] = Value::Null;
        }
    }
    assert_eq!(ma, mb);
}

#[test]
fn csv_round_trips_against_json() {
    let dir = tempfile::tempdir().unwrap();
    let common = [
        "--mode",
        "trajectory",
        "--spectrum",
        "superohmic",
        "--x",
        "0.3",
        "--temperature",
        "zero",
        "--r",
        "1",
        "--tau-max",
        "3",
        "--steps",
        "300",
    ];
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("t.json");
    for (out, fmt) in [(&csv, "csv"), (&json, "json")] {
        let mut args = common.to_vec();
        args.extend(["--format", fmt, "--output", out.to_str().unwrap()]);
        assert_eq!(cvdyn(&args).status.code(), Some(0));
    }
    let (header, rows) = read_csv(&csv);
    let j: Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    for (k, name) in header.iter().enumerate().take(5) {
        let col = j[name.as_str()].as_array().unwrap();
        assert_eq!(col.len(), rows.len());
        for (row, v) in rows.iter().zip(col) {
            assert_eq!(row[k], v.as_f64().unwrap(), "{name}");
        }
    }
}

#[test]
fn figure_six_shows_revivals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig6.csv");
    let o = cvdyn(&[
        "--mode",
        "figure",
        "--figure",
        "fig6",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&out);
    let k = header.iter().position(|h| h == "eof_exact").unwrap();
    let e: Vec<f64> = rows.iter().map(|r| r[k]).collect();
    let eps = (1e-3 * e[0]).max(1e-6);
    let upward = e.windows(2).filter(|w| w[0] < eps && w[1] >= eps).count();
    assert!(upward >= 1);
    let m = meta(dir.path(), "fig6");
    let revivals = m["results"][0]["events"]["exact"]["revival_times"]
        .as_array()
        .unwrap();
    assert_eq!(revivals.len(), upward);
}

#[test]
fn file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "# sweep over two spectra\nmode=sweep\nspectrum=ohmic,subohmic\nx=1\ntemperature=high:100\nr=0.5,1\ntau_max=2\nsteps=100\noutput={}\n",
            path(dir.path(), "from_file.csv")
        ),
    )
    .unwrap();
    let out = dir.path().join("s.csv");
    let o = cvdyn(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!dir.path().join("from_file.csv").exists());
    let text = std::fs::read_to_string(&out).unwrap();
    let keys: Vec<(String, String)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse::<f64>().unwrap().to_string())
        })
        .collect();
    let want = [
        ("ohmic", "0.5"),
        ("ohmic", "1"),
        ("subohmic", "0.5"),
        ("subohmic", "1"),
    ];
    assert_eq!(keys, want.map(|(a, b)| (a.to_string(), b.to_string())));

    std::fs::write(&cfg, "colour=blue\n").unwrap();
    assert_eq!(
        cvdyn(&["--config", cfg.to_str().unwrap()]).status.code(),
        Some(1)
    );
    let missing = dir.path().join("absent.conf");
    assert_eq!(
        cvdyn(&["--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no/such/dir/t.csv");
    let o = cvdyn(&[
        "--mode",
        "figure",
        "--figure",
        "fig3",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("error"));
}

#[test]
fn every_preset_finishes_within_a_minute_single_threaded() {
    let dir = tempfile::tempdir().unwrap();
    for id in [
        "fig1a", "fig1b", "fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6",
        "fig7", "fig8",
    ] {
        let start = Instant::now();
        let o = cvdyn(&[
            "--mode",
            "figure",
            "--figure",
            id,
            "--threads",
            "1",
            "--output",
            &path(dir.path(), &format!("{id}.csv")),
        ]);
        assert_eq!(o.status.code(), Some(0), "{id}: {}", stderr(&o));
        assert!(start.elapsed() < Duration::from_secs(60), "{id}");
    }
}
