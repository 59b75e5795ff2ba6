use aerobot_core::scenario::load_preset;
use std::path::Path;
use std::process::{Command, Output};

fn aerobot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aerobot")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Nevada preset cut to `t_end` seconds with a coarse table, written as a bundle.
fn short_nevada(dir: &Path, t_end: f64) -> String {
    let mut s = load_preset("nevada-flight2").unwrap();
    s.t_end_s = t_end;
    s.table_grid = (8, 12);
    let bundle = dir.join("bundle");
    s.write_bundle(&bundle).unwrap();
    bundle.to_str().unwrap().to_string()
}

#[test]
fn coarse_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = aerobot(&["shapetable", "--spec", "preset:nevada-flight2", "--out", out.to_str().unwrap(), "--grid", "2x2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("minimum 4"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn shapetable_default_grid_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = aerobot(&["shapetable", "--spec", "preset:nevada-flight2", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("rho_diff,fill_frac,volume_m3,a_top_m2,a_side_m2,beta_rad,z_p0_m,tension_n,flag")
    );
    assert_eq!(lines.count(), 16 * 32);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn bad_spec_exits_one_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(&cfg, "name = \"x\"\nplanet = \"mars\"\n").unwrap();
    let out = dir.path().join("t.csv");
    let o = aerobot(&["shapetable", "--spec", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).is_empty());

    let o = aerobot(&["simulate", "--scenario", "preset:nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope"), "{}", stderr(&o));
}

#[test]
fn simulate_then_replay_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = short_nevada(dir.path(), 1200.0);
    let run = dir.path().join("run");
    let o = aerobot(&["simulate", "--scenario", &bundle, "--out", run.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = std::fs::read_to_string(run.join("summary.txt")).unwrap();
    assert!(summary.contains("float_altitude_m:"), "{summary}");
    assert!(summary.contains("fault: none"), "{summary}");
    let traj = std::fs::read_to_string(run.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().last().unwrap().split(',').next(), Some("1200"));
    assert!(run.join("scenario").join("scenario.cfg").exists());

    // The echoed bundle reproduces the run exactly.
    let rep = dir.path().join("rep");
    let o = aerobot(&[
        "replay",
        "--scenario",
        run.join("scenario").to_str().unwrap(),
        "--telemetry",
        run.join("trajectory.csv").to_str().unwrap(),
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = std::fs::read_to_string(rep.join("summary.txt")).unwrap();
    for key in ["max_abs_alt_error_m: 0\n", "accumulated_p_sp_error_pa: 0\n", "temperature_rms_error_k: 0\n"] {
        assert!(summary.contains(key), "missing {key:?} in {summary}");
    }
    let cmp = std::fs::read_to_string(rep.join("comparison.csv")).unwrap();
    assert!(cmp.starts_with("t_s,d_alt_m,"));
}

#[test]
fn replay_rejects_gappy_telemetry() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = short_nevada(dir.path(), 60.0);
    let tele = dir.path().join("tele.csv");
    std::fs::write(&tele, "t_s,alt_m\n0,1300\n100,1400\n").unwrap();
    let o = aerobot(&[
        "replay",
        "--scenario",
        &bundle,
        "--telemetry",
        tele.to_str().unwrap(),
        "--out",
        dir.path().join("rep").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gaps"), "{}", stderr(&o));
}

#[test]
fn short_venus_run_writes_ground_track() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("venus");
    let o = aerobot(&["venus", "--preset", "b2", "--days", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let track = std::fs::read_to_string(out.join("ground_track.csv")).unwrap();
    let mut lines = track.lines();
    assert_eq!(lines.next(), Some("t_s,lat_deg,lon_deg,alt_m,lst_h,daylight"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 43_200.0);
    // Retrograde zonal wind carries the vehicle west.
    assert!(last[2] < 0.0);
    assert!(out.join("trajectory.csv").exists());
    assert!(std::fs::read_to_string(out.join("summary.txt")).unwrap().contains("days: 0.5"));
}

#[test]
fn busy_port_exits_one() {
    let holder = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = holder.local_addr().unwrap().port().to_string();
    let o = aerobot(&["serve", "--scenario", "preset:nevada-flight2", "--port", &port]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot listen"), "{}", stderr(&o));
}
