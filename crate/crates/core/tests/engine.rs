mod common;

use aerobot_core::atmosphere::{AtmosphereSample, RadChannel, RadParam, RadiationEnvironment, WindTable};
use aerobot_core::constants::STEFAN_BOLTZMANN;
use aerobot_core::dynamics::net_vertical_force;
use aerobot_core::gastransfer::TransferAction;
use aerobot_core::scenario::Scenario;
use common::*;

fn calm(density: f64) -> AtmosphereSample {
    AtmosphereSample { pressure: 80_000.0, temperature: 275.0, density, wind: [0.0; 3] }
}

#[test]
fn net_force_examples() {
    let atm = calm(1.05);
    let m = 45.0;
    let neutral = net_vertical_force(m / atm.density, m, 0.0, &atm, G);
    assert!(neutral.abs() < 1e-12 * m * G, "{neutral}");

    let lifted = net_vertical_force((m + 0.32) / atm.density, m, 0.0, &atm, G);
    assert!((lifted - 3.1392).abs() < 1e-9, "{lifted}");

    let v = 50.0;
    assert!(net_vertical_force(0.5 * v, m, 0.0, &atm, G) < net_vertical_force(v, m, 0.0, &atm, G));
    // Drag opposing an ascent lowers the net force one for one.
    assert!((net_vertical_force(v, m, -2.0, &atm, G) - (net_vertical_force(v, m, 0.0, &atm, G) - 2.0)).abs() < 1e-12);
}

#[test]
fn launch_state_carries_the_configured_free_lift() {
    let s = nevada();
    let e = s.engine(nevada_table()).unwrap();
    let lift = e.net_vertical_force().unwrap() / G;
    assert!((lift - 0.32).abs() < 1e-3, "free lift {lift} kg");
    assert!(e.state().events.iter().any(|ev| ev == "init"), "{:?}", e.state().events);
}

/// Nevada vehicle with no free lift in calm air, with sky and ground radiating at
/// the local air temperature so nothing drives heat flow.
fn isothermal_neutral(alt: f64) -> Scenario {
    let mut s = nevada();
    let knots: Vec<(f64, f64)> = (0..=40)
        .map(|i| {
            let z = 1000.0 + 100.0 * i as f64;
            let t = s.profile.pressure_temperature(z).unwrap().1;
            (z, STEFAN_BOLTZMANN * t.powi(4))
        })
        .collect();
    s.radiation = RadiationEnvironment::dark()
        .with_channel(RadChannel::UpIr, RadParam::Altitude, knots.clone())
        .unwrap()
        .with_channel(RadChannel::DownIr, RadParam::Altitude, knots)
        .unwrap();
    s.profile = s.profile.clone().with_winds(WindTable::calm());
    s.ground_alt_m = None;
    s.launch.altitude_m = alt;
    s.config.fill.free_lift_kg = Some(0.0);
    s.config.fill.m_zp_kg = None;
    s.timeline = Default::default();
    s
}

#[test]
fn neutral_float_stays_put() {
    let s = isothermal_neutral(2000.0);
    let mut e = s.engine(nevada_table()).unwrap();
    let mut alt = e.state().altitude();
    for _ in 0..200 {
        e.step().unwrap();
        let a = e.state().altitude();
        assert!((a - alt).abs() < 1e-3, "step {}: moved {} m", e.state().step, a - alt);
        alt = a;
    }
}

#[test]
fn free_lift_climbs_from_rest_to_terminal_velocity() {
    let s = nevada();
    let mut e = s.engine(nevada_table()).unwrap();
    let mut prev_alt = e.state().altitude();
    let mut best = (0.0f64, None);
    for k in 0..2400 {
        e.step().unwrap();
        let st = e.state();
        if k < 200 {
            assert!(st.altitude() > prev_alt, "altitude fell at step {k}");
        }
        prev_alt = st.altitude();
        if st.velocity[2] > best.0 {
            best = (st.velocity[2], Some(st.clone()));
        }
    }
    let (vz, st) = best;
    let st = st.unwrap();
    assert!(vz > 0.5, "peak ascent rate {vz}");
    // At the velocity peak the acceleration vanishes: drag balances net static lift.
    let atm = s.profile.sample(st.altitude()).unwrap();
    let lift = net_vertical_force(st.displaced_volume(), e.total_mass(), 0.0, &atm, G);
    let c = s.config.aero;
    let oracle = (2.0 * lift / (atm.density * c.cd_top * st.shape.a_top)).sqrt();
    assert!(((vz - oracle) / oracle).abs() < 0.01, "vz {vz} vs oracle {oracle}");
}

#[test]
fn zero_duration_run_records_only_the_initial_state() {
    let s = nevada();
    let mut e = s.engine(nevada_table()).unwrap();
    let rec = e.run(0.0, 1.0);
    assert_eq!(rec.rows.len(), 1);
    assert_eq!(rec.rows[0].t, 0.0);
    assert!(rec.fault.is_none());
}

#[test]
fn queued_command_applies_at_the_next_step_boundary() {
    let s = isothermal_neutral(2000.0);
    let mut e = s.engine(nevada_table()).unwrap();
    for _ in 0..3 {
        e.step().unwrap();
    }
    let tx = e.command_sender();
    tx.send(TransferAction::VentOpen).unwrap();
    assert!(!e.state().devices.vent);
    let m_sp = e.state().sp.m;
    e.step().unwrap();
    assert!(e.state().devices.vent);
    assert_eq!(e.state().events, vec!["vent_open".to_string()]);
    assert!(e.state().sp.m < m_sp);
    let he = e.state().helium();
    let total0 = s.config.fill.m_sp_kg + e.state().zp.m + (m_sp - s.config.fill.m_sp_kg) + (e.state().sp.m - m_sp);
    assert!((he.total() - total0).abs() < 1e-12);
}

#[test]
fn heavy_vehicle_settles_on_the_ground() {
    let mut s = nevada();
    s.config.fill.free_lift_kg = Some(-1.0);
    s.launch.altitude_m = 1350.0;
    let mut e = s.engine(nevada_table()).unwrap();
    let rec = e.run(600.0, 10.0);
    assert!(rec.fault.is_none(), "{:?}", rec.fault);
    let contact: Vec<_> = rec.rows.iter().filter(|r| r.event.contains("ground-contact")).collect();
    assert_eq!(contact.len(), 1);
    let last = rec.last().unwrap();
    assert_eq!(last.alt, 1300.0);
    assert_eq!(last.vz, 0.0);
}

#[test]
fn wind_carries_the_vehicle_downwind() {
    let mut s = isothermal_neutral(2000.0);
    s.profile = s.profile.clone().with_winds(WindTable::uniform(5.0, -2.0));
    let mut e = s.engine(nevada_table()).unwrap();
    let rec = e.run(1800.0, 60.0);
    let last = rec.last().unwrap();
    // Drag relaxes the horizontal velocity onto the wind.
    let st = e.state();
    assert!((st.velocity[0] - 5.0).abs() < 0.05 && (st.velocity[1] + 2.0).abs() < 0.05, "{:?}", st.velocity);
    assert!(last.east > 0.0 && last.north < 0.0);
}
