mod common;

use aerobot_core::atmosphere::WindTable;
use aerobot_core::scenario::{load_scenario, replay, venus_preset_run, Entry, ScenarioError, Telemetry};
use common::*;

#[test]
fn nevada_preset_matches_the_flight_configuration() {
    let s = nevada();
    assert_eq!(s.config.fill.free_lift_kg, Some(0.32));
    let b = s.mass_budget.expect("mass budget");
    assert_eq!((b.balloon_system_kg, b.bcm_kg, b.gondola_kg), (21.3, 19.5, 7.0));
    let films = s.config.envelope.zp_film_mass_kg + s.config.envelope.sp_film_mass_kg;
    assert!((films - b.balloon_system_kg).abs() < 1e-9);
    assert!((s.config.payload_kg - (b.bcm_kg + b.gondola_kg)).abs() < 1e-9);
    assert_eq!(s.config.envelope.zp_upper_diameter_m, 5.0);
}

#[test]
fn venus_preset_sits_in_the_cloud_band() {
    let s = venus();
    assert_eq!(s.config.envelope.zp_upper_diameter_m, 12.5);
    assert_eq!(s.config.payload_kg, 100.0);
    let (lo, hi) = s.profile.altitude_band();
    assert!(lo <= 52_000.0 && hi >= 62_000.0, "band {lo}..{hi}");
}

#[test]
fn missing_table_file_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    nevada().write_bundle(dir.path()).unwrap();
    std::fs::remove_file(dir.path().join("winds.csv")).unwrap();
    let err = load_scenario(dir.path()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("atmosphere.winds") && msg.contains("winds.csv"), "{msg}");
}

#[test]
fn unknown_keys_are_rejected_at_their_path() {
    let dir = tempfile::tempdir().unwrap();
    nevada().write_bundle(dir.path()).unwrap();
    let cfg = dir.path().join("scenario.cfg");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("[launch]", "[launch]\nlatitude = 3.0");
    std::fs::write(&cfg, text).unwrap();
    match load_scenario(dir.path()).unwrap_err() {
        ScenarioError::Field { path, .. } => assert!(path.starts_with("launch"), "{path}"),
        e => panic!("{e}"),
    }
}

#[test]
fn bundles_round_trip() {
    for s in [nevada(), venus()] {
        let dir = tempfile::tempdir().unwrap();
        s.write_bundle(dir.path()).unwrap();
        let back = load_scenario(dir.path()).unwrap();
        assert_eq!(back.to_toml(), s.normalized().to_toml());
        assert_eq!(back.profile, s.profile);
        assert_eq!(back.radiation, s.radiation);
        assert_eq!(back.timeline, s.timeline);
        assert_eq!(back.config, s.config);
    }
}

#[test]
fn biased_altitude_telemetry_shows_the_bias() {
    let mut s = nevada();
    // Through the first vent and pump intervals.
    s.t_end_s = 9000.0;
    let table = nevada_table();
    let rec = s.simulate(Some(table.clone())).unwrap();
    assert!(rec.fault.is_none());
    let mut tel = Telemetry::from_trajectory(&rec.rows);
    for r in &mut tel.rows {
        r.compared[0] = r.compared[0].map(|a| a + 100.0);
    }
    let rep = replay(&s, &tel, Some(table)).unwrap();
    let vmax = rec.rows.iter().map(|r| r.vz.abs()).fold(0.0, f64::max);
    let err = rep.summary.max_abs_alt_m;
    assert!((err - 100.0).abs() <= s.dt_s * vmax + 1e-6, "max |d alt| {err}");
    for r in &rep.rows {
        assert!((r.d[0].unwrap() + 100.0).abs() <= s.dt_s * vmax + 1e-6);
    }
    assert!(rep.summary.intervals >= 2, "{}", rep.summary.intervals);
    assert_eq!(rep.summary.sign_agreement, Some(1.0));
}

#[test]
fn telemetry_gaps_are_refused() {
    let text = "t_s,alt_m,p_sp_pa\n0,1300,90000\n30,1310,\n60,1320,\n90,1330,\n120,1340,90100\n";
    let tel = Telemetry::parse_csv(text).unwrap();
    let err = replay(&nevada(), &tel, Some(nevada_table())).unwrap_err();
    assert!(matches!(&err, ScenarioError::Gaps { .. }), "{err}");
    assert!(err.to_string().contains("p_sp_pa"), "{err}");
}

#[test]
fn calm_venus_air_keeps_longitude_fixed() {
    let mut s = venus();
    s.profile = s.profile.clone().with_winds(WindTable::calm());
    let run = venus_preset_run(&s, Entry { lat_deg: 5.0, local_solar_time_h: 9.0 }, 0.5, Some(venus_table())).unwrap();
    for r in &run.track {
        assert!(r.lon_deg.abs() < 1e-9, "t {} lon {}", r.t, r.lon_deg);
    }
}

#[test]
fn superrotation_carries_b2_westward() {
    let s = venus();
    let run = venus_preset_run(&s, Entry { lat_deg: 5.0, local_solar_time_h: 9.0 }, 1.0, Some(venus_table())).unwrap();
    assert!(run.record.fault.is_none(), "{:?}", run.record.fault);
    for w in run.track.windows(2) {
        assert!(w[1].lon_deg < w[0].lon_deg, "{:?}", w);
    }
}
