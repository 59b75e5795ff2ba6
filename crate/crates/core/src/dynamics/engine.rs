use super::{AerobotConfig, DynamicsError, Environment, TrajectoryRecord, TrajectoryRow};
use crate::aero::{drag_force, drag_matrix, virtual_mass, AeroCoefficients};
use crate::atmosphere::AtmosphereSample;
use crate::constants::HELIUM_MOLAR_MASS;
use crate::gastransfer::{
    apply_transfer, poppet_flow, pump_flow, vent_flow, ClampEvent, HeliumLedger, TransferAction,
    TransferCommand, Timeline,
};
use crate::heat::{assemble_node_heats, HeatInputs};
use crate::ode::rk4_step;
use crate::shape::{
    solve_shape, EnvelopeSpec, ShapeLoad, ShapeSummary, ShapeTable, SolveOptions, TableGrid,
    TableLoad, VolumeRequest,
};
use crate::thermo::{
    node_temp_rate, pump_enthalpy, sp_temp_rate, zp_pressure_following_rates, zp_temp_rate,
    Chamber, GasChamberState, GasProperties, ZpMode,
};
use nalgebra::{Matrix3, Vector3};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;

/// Pressure band [Pa] below ambient that a taut ZP must drop to before going slack.
pub const HYSTERESIS_PA: f64 = 10.0;
/// Plausible temperature range [K]; leaving it is a fault.
pub const SANITY_BAND_K: (f64, f64) = (100.0, 800.0);

const HE: GasProperties = GasProperties::HELIUM;

/// Actuator status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeviceState {
    pub pump: bool,
    pub vent: bool,
    pub poppet: bool,
}

impl DeviceState {
    fn apply(&mut self, a: TransferAction) {
        match a {
            TransferAction::PumpOn => self.pump = true,
            TransferAction::PumpOff => self.pump = false,
            TransferAction::VentOpen => self.vent = true,
            TransferAction::VentClose => self.vent = false,
            TransferAction::PoppetOpen => self.poppet = true,
        }
    }
}

/// Envelope node temperatures, gas temperatures and node properties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    /// [node 1, node 2, node 3, node 4, SP gas, ZP gas] [K].
    pub temps: [f64; 6],
    /// Node heat capacities m_i c_i [J/K].
    pub capacity: [f64; 4],
    pub node_areas: [f64; 4],
}

/// Running energy totals for both gas chambers [J].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub heat_sp: f64,
    pub heat_zp: f64,
    pub work_zp: f64,
    pub enthalpy_sp: f64,
    pub enthalpy_zp: f64,
    /// Σ of absolute heat, work and enthalpy flows: the throughput scale.
    pub gross: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub step: u64,
    /// East, north, altitude [m].
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub lat: f64,
    pub lon: f64,
    pub sp: GasChamberState,
    pub zp: GasChamberState,
    pub m_lost: f64,
    pub thermal: ThermalState,
    pub shape: ShapeSummary,
    pub mode: ZpMode,
    pub devices: DeviceState,
    pub energy: EnergyLedger,
    pub on_ground: bool,
    /// Events raised during the most recent step.
    pub events: Vec<String>,
}

impl SimState {
    pub fn altitude(&self) -> f64 {
        self.position[2]
    }

    pub fn helium(&self) -> HeliumLedger {
        HeliumLedger { m_sp: self.sp.m, m_zp: self.zp.m, m_lost: self.m_lost }
    }

    /// Internal energy of both chambers [J].
    pub fn internal_energy(&self) -> f64 {
        HE.cv * (self.sp.m * self.sp.t + self.zp.m * self.zp.t)
    }

    /// Total displaced volume, SP included [m³].
    pub fn displaced_volume(&self) -> f64 {
        self.sp.v + self.zp.v
    }
}

/// Buoyancy minus weight minus vertical drag [N].
pub fn net_vertical_force(displaced_volume: f64, total_mass: f64, drag_z: f64, atm: &AtmosphereSample, g: f64) -> f64 {
    atm.density * displaced_volume * g - total_mass * g + drag_z
}

/// ZP helium mass that gives `free_lift` [kg] at rest with gas at ambient temperature.
pub fn initial_zp_mass(
    cfg: &AerobotConfig,
    spec: &EnvelopeSpec,
    atm: &AtmosphereSample,
    p_ref: f64,
    free_lift: f64,
) -> f64 {
    let displaced_per_kg = atm.density * HE.r * atm.temperature / p_ref;
    (free_lift + cfg.dry_mass() + cfg.fill.m_sp_kg - atm.density * spec.sp_volume())
        / (displaced_per_kg - 1.0)
}

/// Builds the shape table spanning the density differences met inside the
/// atmosphere's valid band.
pub fn build_table(
    cfg: &AerobotConfig,
    env: &Environment,
    grid: Option<(usize, usize)>,
) -> Result<ShapeTable, DynamicsError> {
    let spec = cfg.envelope.build()?;
    let atm = &env.atmosphere;
    let (lo, hi) = atm.altitude_band();
    let kappa = HELIUM_MOLAR_MASS / atm.gas.molar_mass();
    let rho_top = atm.sample(hi)?.density;
    let rho_bottom = atm.sample(lo)?.density;
    let rho_lo = 0.7 * rho_top * (1.0 - kappa);
    let rho_hi = 1.3 * rho_bottom * (1.0 - kappa);
    let (n_rho, n_fill) = grid.unwrap_or((16, 32));
    let grid = TableGrid::spanning(rho_lo, rho_hi, n_rho, n_fill)?;
    let load = TableLoad {
        m_payload: cfg.payload_kg,
        m_sp_gas: cfg.fill.m_sp_kg,
        gravity: env.gravity(),
        helium_ratio: kappa,
    };
    Ok(ShapeTable::build(&spec, grid, load))
}

// State vector layout for the integrator.
const POS: usize = 0;
const VEL: usize = 3;
const LAT: usize = 6;
const LON: usize = 7;
const TN: usize = 8;
const TSP: usize = 12;
const TZP: usize = 13;
const MSP: usize = 14;
const MZP: usize = 15;
const MLOST: usize = 16;
const E_QSP: usize = 17;
const E_QZP: usize = 18;
const E_W: usize = 19;
const E_HSP: usize = 20;
const E_HZP: usize = 21;
const E_GROSS: usize = 22;
const NY: usize = 23;

/// Quantities held fixed across the stages of one step.
struct Frozen {
    mode: ZpMode,
    devices: DeviceState,
    shape: ShapeSummary,
    capacity: [f64; 4],
    node_areas: [f64; 4],
    cd: Matrix3<f64>,
    on_ground: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct StageFlows {
    pump: f64,
    vent: f64,
    poppet: f64,
}

/// Time-stepped aerobot simulation.
pub struct Engine {
    cfg: AerobotConfig,
    spec: EnvelopeSpec,
    aero: AeroCoefficients,
    env: Arc<Environment>,
    table: Arc<ShapeTable>,
    dt: f64,
    state: SimState,
    timeline: Vec<TransferCommand>,
    next_command: usize,
    queue_rx: Receiver<TransferAction>,
    queue_tx: Sender<TransferAction>,
    floors: (f64, f64),
    v_gas_max: f64,
    film_mass: [f64; 2],
}

impl Engine {
    /// Sets up the initial state at `altitude` and `(lat, lon)` [rad], at rest
    /// relative to the local wind.
    pub fn new(
        cfg: AerobotConfig,
        env: Arc<Environment>,
        table: Arc<ShapeTable>,
        timeline: &Timeline,
        dt: f64,
        launch: [f64; 3],
    ) -> Result<Self, DynamicsError> {
        cfg.validate()?;
        if !(dt > 0.0 && dt <= 5.0) {
            return Err(DynamicsError::Config(format!("dt must lie in (0, 5] s, got {dt}")));
        }
        let spec = cfg.envelope.build()?;
        let aero = cfg.resolved_aero(&spec);
        let [alt, lat, lon] = launch;
        let atm = env.atmosphere.sample_at(alt, 0.0)?;
        let v_gas_max = spec.inflated_volume() - spec.sp_volume();
        let (tx, rx) = channel();

        // z_p0 and the ZP fill depend on each other through the reference pressure;
        // a few fixed-point passes settle them.
        let mut z_p0 = 0.0;
        let mut m_zp = cfg.fill.m_zp_kg.unwrap_or(0.0);
        let mut p_ref = atm.pressure;
        for _ in 0..4 {
            p_ref = env.atmosphere.pressure_temperature(alt + z_p0)?.0;
            if cfg.fill.m_zp_kg.is_none() {
                m_zp = initial_zp_mass(&cfg, &spec, &atm, p_ref, cfg.fill.free_lift_kg.unwrap_or(0.0));
            }
            let v = spec.sp_volume() + (m_zp * HE.r * atm.temperature / p_ref).min(v_gas_max);
            let rho_zp = m_zp / (v - spec.sp_volume());
            z_p0 = table.lookup(atm.density - rho_zp, v).z_p0;
        }
        if !(m_zp > 0.0) {
            return Err(DynamicsError::Config(format!(
                "initial ZP helium mass {m_zp} kg is not positive; free lift cannot be reached"
            )));
        }
        if let (Some(m), Some(fl)) = (cfg.fill.m_zp_kg, cfg.fill.free_lift_kg) {
            let implied = initial_zp_mass(&cfg, &spec, &atm, p_ref, fl);
            let lift_error = (m - implied) * (atm.density * HE.r * atm.temperature / p_ref - 1.0);
            if lift_error.abs() > 1e-3 {
                return Err(DynamicsError::Config(format!(
                    "free lift {fl} kg disagrees with m_zp {m} kg by {:.4} kg",
                    lift_error
                )));
            }
        }
        let t0 = atm.temperature;
        let m_sp = cfg.fill.m_sp_kg;
        let v_try = m_zp * HE.r * t0 / p_ref;
        let mode = if v_try >= v_gas_max { ZpMode::FullyInflated } else { ZpMode::Slack };
        let zp = close_zp(mode, m_zp, t0, p_ref, v_gas_max);
        let sp = GasChamberState {
            chamber: Chamber::Sp,
            m: m_sp,
            t: t0,
            v: spec.sp_volume(),
            p: m_sp * HE.r * t0 / spec.sp_volume(),
        };
        let load = ShapeLoad {
            m_payload: cfg.payload_kg,
            m_sp_gas: m_sp,
            rho_zp: zp.m / zp.v,
            gravity: env.gravity(),
        };
        let v_total = sp.v + zp.v;
        let rho_diff = atm.density - zp.m / zp.v;
        let mut events = vec!["init".to_string()];
        let shape = exact_or_table(&spec, &table, rho_diff, v_total, &load, &mut events);
        let film_mass = [cfg.envelope.zp_film_mass_kg, cfg.envelope.sp_film_mass_kg];
        let (node_areas, capacity) = node_properties(&shape, film_mass, &cfg);
        let state = SimState {
            t: 0.0,
            step: 0,
            position: [0.0, 0.0, alt],
            velocity: [atm.wind[0], atm.wind[1], 0.0],
            lat,
            lon,
            sp,
            zp,
            m_lost: 0.0,
            thermal: ThermalState { temps: [t0; 6], capacity, node_areas },
            shape,
            mode,
            devices: DeviceState::default(),
            energy: EnergyLedger::default(),
            on_ground: env.ground_alt.is_some_and(|g| alt <= g),
            events,
        };
        let f = cfg.mass_floor_fraction;
        Ok(Self {
            floors: (f * m_sp, f * m_zp),
            cfg,
            spec,
            aero,
            env,
            table,
            dt,
            state,
            timeline: timeline.commands().to_vec(),
            next_command: 0,
            queue_rx: rx,
            queue_tx: tx,
            v_gas_max,
            film_mass,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn spec(&self) -> &EnvelopeSpec {
        &self.spec
    }

    pub fn config(&self) -> &AerobotConfig {
        &self.cfg
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    /// Producer end of the live command queue; commands apply at the next step
    /// boundary.
    pub fn command_sender(&self) -> Sender<TransferAction> {
        self.queue_tx.clone()
    }

    pub fn total_mass(&self) -> f64 {
        self.cfg.dry_mass() + self.state.sp.m + self.state.zp.m
    }

    /// Net vertical force at the current state [N].
    pub fn net_vertical_force(&self) -> Result<f64, DynamicsError> {
        let s = &self.state;
        let atm = self.env.atmosphere.sample_at(s.altitude(), s.t)?;
        let v = Vector3::from(s.velocity) - Vector3::from(atm.wind);
        let cd = drag_matrix(&self.aero, s.shape.a_top, s.shape.a_side);
        let drag = drag_force(atm.density, &self.aero, &cd, v);
        Ok(net_vertical_force(s.displaced_volume(), self.total_mass(), drag.z, &atm, self.env.gravity()))
    }

    /// Net static lift [N] if the vehicle were moved to `alt` with its current gas
    /// inventory and temperatures.
    pub fn static_lift_at(&self, alt: f64) -> Result<f64, DynamicsError> {
        let s = &self.state;
        let atm = self.env.atmosphere.sample_at(alt, s.t)?;
        let p_ref = self.env.atmosphere.pressure_temperature(alt + s.shape.z_p0)?.0;
        let v_gas = (s.zp.m * HE.r * s.zp.t / p_ref).min(self.v_gas_max);
        let v = s.sp.v + v_gas;
        Ok(net_vertical_force(v, self.total_mass(), 0.0, &atm, self.env.gravity()))
    }

    fn apply_due_commands(&mut self) -> Vec<String> {
        let mut events = Vec::new();
        let t = self.state.t;
        while let Some(c) = self.timeline.get(self.next_command) {
            // Step boundaries are n·dt; allow for rounding in the command time.
            if c.t > t + 1e-9 * self.dt {
                break;
            }
            self.state.devices.apply(c.action);
            events.push(c.action.as_str().to_string());
            self.next_command += 1;
        }
        while let Ok(a) = self.queue_rx.try_recv() {
            self.state.devices.apply(a);
            events.push(a.as_str().to_string());
        }
        events
    }

    fn pack(&self) -> Vec<f64> {
        let s = &self.state;
        let mut y = vec![0.0; NY];
        y[POS..POS + 3].copy_from_slice(&s.position);
        y[VEL..VEL + 3].copy_from_slice(&s.velocity);
        y[LAT] = s.lat;
        y[LON] = s.lon;
        y[TN..TN + 4].copy_from_slice(&s.thermal.temps[..4]);
        y[TSP] = s.thermal.temps[4];
        y[TZP] = s.thermal.temps[5];
        y[MSP] = s.sp.m;
        y[MZP] = s.zp.m;
        y[MLOST] = s.m_lost;
        let e = &s.energy;
        y[E_QSP] = e.heat_sp;
        y[E_QZP] = e.heat_zp;
        y[E_W] = e.work_zp;
        y[E_HSP] = e.enthalpy_sp;
        y[E_HZP] = e.enthalpy_zp;
        y[E_GROSS] = e.gross;
        y
    }

    fn rates(&self, fz: &Frozen, t: f64, y: &[f64], dy: &mut [f64]) -> Result<StageFlows, DynamicsError> {
        let env = &*self.env;
        let atmp = &env.atmosphere;
        let g = env.gravity();
        let alt = y[POS + 2];
        let atm = atmp.sample_at(alt, t)?;
        let z_ref = alt + fz.shape.z_p0;
        let p_ref = atmp.pressure_temperature(z_ref)?.0;
        let vz = y[VEL + 2];
        let pdot_ref = atmp.pressure_gradient(z_ref)? * vz;

        let (m_sp, m_zp) = (y[MSP], y[MZP]);
        let (t_sp, t_zp) = (y[TSP], y[TZP]);
        let v_sp = self.spec.sp_volume();
        let p_sp = m_sp * HE.r * t_sp / v_sp;
        let (v_gas, p_zp) = match fz.mode {
            ZpMode::Slack => (m_zp * HE.r * t_zp / p_ref, p_ref),
            ZpMode::FullyInflated => (self.v_gas_max, m_zp * HE.r * t_zp / self.v_gas_max),
        };
        let rho_sp = m_sp / v_sp;
        let rho_zp = m_zp / v_gas;

        let d = fz.devices;
        let dev = &self.cfg.devices;
        let pump = pump_flow(rho_zp, dev, d.pump);
        let vent = if d.vent { vent_flow(rho_sp, p_sp, p_zp, dev) } else { 0.0 };
        let poppet = if d.poppet {
            let rho_diff = atm.density - rho_zp;
            let dp = g * rho_diff * (fz.shape.height - fz.shape.z_p0) + (p_zp - p_ref);
            poppet_flow(rho_zp, dp, dev)
        } else {
            0.0
        };

        // Enthalpy carried by each stream [W].
        let mut h_sp = 0.0;
        let mut h_zp = 0.0;
        if pump > 0.0 {
            let ratio_p = p_sp.max(atm.pressure);
            let pe = pump_enthalpy(pump, t_zp, ratio_p, atm.pressure, &HE);
            h_sp += pe.h_out;
            h_zp -= pe.h_in;
        }
        let h_vent = vent * HE.cp * t_sp;
        h_sp -= h_vent;
        h_zp += h_vent;
        if self.cfg.poppet_enthalpy {
            h_zp -= poppet * HE.cp * t_zp;
        }
        let mdot_sp = pump - vent;
        let mdot_zp = vent - pump - poppet;

        let mut temps = [0.0; 6];
        temps[..4].copy_from_slice(&y[TN..TN + 4]);
        temps[4] = t_sp;
        temps[5] = t_zp;
        let vel = Vector3::new(y[VEL], y[VEL + 1], y[VEL + 2]);
        let v_rel = vel - Vector3::from(atm.wind);
        let (lat, lon) = (y[LAT], y[LON]);
        let fluxes = env.radiation.fluxes(alt, t, env.zenith(lat, lon, t))?;
        let heats = assemble_node_heats(
            &self.cfg.heat,
            &HeatInputs {
                temps,
                node_areas: fz.node_areas,
                v_sp,
                v_zp_gas: v_gas,
                p_sp,
                p_zp,
                sp_diameter: 2.0 * self.spec.r_sp,
                bubble_diameter: fz.shape.bubble_diameter.max(1e-3),
                height: fz.shape.height,
                fluxes,
                t_atm: atm.temperature,
                rho_atm: atm.density,
                ambient: atmp.gas,
                relative_speed: v_rel.norm(),
                gravity: g,
            },
        )?;
        for i in 0..4 {
            dy[TN + i] = node_temp_rate(heats.q[i], fz.capacity[i]);
        }
        let (q_sp, q_zp) = (heats.q[4], heats.q[5]);
        dy[TSP] = sp_temp_rate(m_sp, t_sp, mdot_sp, q_sp, h_sp, &HE);
        let vdot = match fz.mode {
            ZpMode::Slack => {
                let (tdot, vdot) =
                    zp_pressure_following_rates(m_zp, t_zp, v_gas, p_ref, pdot_ref, mdot_zp, q_zp, h_zp, &HE);
                dy[TZP] = tdot;
                vdot
            }
            ZpMode::FullyInflated => {
                dy[TZP] = zp_temp_rate(m_zp, t_zp, mdot_zp, q_zp, p_zp, 0.0, h_zp, &HE);
                0.0
            }
        };
        dy[MSP] = mdot_sp;
        dy[MZP] = mdot_zp;
        dy[MLOST] = poppet;
        dy[E_QSP] = q_sp;
        dy[E_QZP] = q_zp;
        dy[E_W] = p_zp * vdot;
        dy[E_HSP] = h_sp;
        dy[E_HZP] = h_zp;
        dy[E_GROSS] = q_sp.abs() + q_zp.abs() + (p_zp * vdot).abs() + h_sp.abs() + h_zp.abs();

        let v_total = v_sp + v_gas;
        let m_total = self.cfg.dry_mass() + m_sp + m_zp;
        let inertia = m_total + virtual_mass(self.aero.c_m, atm.density, v_total);
        let drag = drag_force(atm.density, &self.aero, &fz.cd, v_rel);
        let fz_net = net_vertical_force(v_total, m_total, drag.z, &atm, g);
        let mut acc = Vector3::new(drag.x / inertia, drag.y / inertia, fz_net / inertia);
        let mut vel_out = vel;
        if fz.on_ground && acc.z <= 0.0 && vz <= 0.0 {
            // Resting on the ground.
            acc = Vector3::zeros();
            vel_out = Vector3::zeros();
        }
        let r = env.planet_radius + alt;
        dy[POS] = vel_out.x;
        dy[POS + 1] = vel_out.y;
        dy[POS + 2] = vel_out.z;
        dy[VEL] = acc.x;
        dy[VEL + 1] = acc.y;
        dy[VEL + 2] = acc.z;
        dy[LAT] = dy[POS + 1] / r;
        dy[LON] = dy[POS] / (r * lat.cos());
        Ok(StageFlows { pump, vent, poppet })
    }

    /// Advances one step. On error the state is left at the start of the step.
    pub fn step(&mut self) -> Result<(), DynamicsError> {
        let mut events = self.apply_due_commands();
        let s = &self.state;
        let fz = Frozen {
            mode: s.mode,
            devices: s.devices,
            shape: s.shape,
            capacity: s.thermal.capacity,
            node_areas: s.thermal.node_areas,
            cd: drag_matrix(&self.aero, s.shape.a_top, s.shape.a_side),
            on_ground: s.on_ground,
        };
        let y0 = self.pack();
        let mut stages: Vec<StageFlows> = Vec::with_capacity(4);
        let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<(), DynamicsError> {
            let f = self.rates(&fz, t, y, dy)?;
            stages.push(f);
            Ok(())
        };
        let dt = self.dt;
        let y1 = rk4_step(&mut rhs, s.t, &y0, dt)?;
        let w = [1.0, 2.0, 2.0, 1.0];
        let mut avg = StageFlows::default();
        for (k, f) in stages.iter().enumerate() {
            avg.pump += w[k] * f.pump / 6.0;
            avg.vent += w[k] * f.vent / 6.0;
            avg.poppet += w[k] * f.poppet / 6.0;
        }
        let (ledger, _, clamp) =
            apply_transfer(self.state.helium(), avg.pump, avg.vent, avg.poppet, dt, self.floors)?;
        if let Some(c) = clamp {
            events.push(match c {
                ClampEvent::Sp => "clamp-sp".into(),
                ClampEvent::Zp => "clamp-zp".into(),
            });
        }
        let step = self.state.step + 1;
        let t1 = step as f64 * dt;
        self.finish_step(y1, ledger, step, t1, events)
    }

    fn finish_step(
        &mut self,
        y: Vec<f64>,
        ledger: HeliumLedger,
        step: u64,
        t: f64,
        mut events: Vec<String>,
    ) -> Result<(), DynamicsError> {
        let env = self.env.clone();
        let atmp = &env.atmosphere;
        let mut position = [y[POS], y[POS + 1], y[POS + 2]];
        let mut velocity = [y[VEL], y[VEL + 1], y[VEL + 2]];
        let mut on_ground = false;
        if let Some(ground) = env.ground_alt {
            if position[2] <= ground {
                position[2] = ground;
                velocity = [0.0; 3];
                on_ground = true;
                if !self.state.on_ground {
                    events.push("ground-contact".into());
                }
            }
        }
        let mut temps = [0.0; 6];
        temps[..4].copy_from_slice(&y[TN..TN + 4]);
        temps[4] = y[TSP];
        temps[5] = y[TZP];
        if let Some(bad) = temps.iter().find(|t| !(**t > SANITY_BAND_K.0 && **t < SANITY_BAND_K.1)) {
            return Err(DynamicsError::Fault {
                t,
                reason: format!("temperature {bad:.1} K left the sanity band"),
            });
        }

        let alt = position[2];
        let atm = atmp.sample_at(alt, t)?;
        let (t_sp, t_zp) = (temps[4], temps[5]);
        let p_ref = atmp.pressure_temperature(alt + self.state.shape.z_p0)?.0;
        let mut mode = self.state.mode;
        match mode {
            ZpMode::Slack if ledger.m_zp * HE.r * t_zp / p_ref >= self.v_gas_max => {
                mode = ZpMode::FullyInflated;
                events.push("zp-full".into());
            }
            ZpMode::FullyInflated if ledger.m_zp * HE.r * t_zp / self.v_gas_max < p_ref - HYSTERESIS_PA => {
                mode = ZpMode::Slack;
                events.push("zp-slack".into());
            }
            _ => {}
        }
        let zp = close_zp(mode, ledger.m_zp, t_zp, p_ref, self.v_gas_max);
        let v_sp = self.spec.sp_volume();
        let sp = GasChamberState {
            chamber: Chamber::Sp,
            m: ledger.m_sp,
            t: t_sp,
            v: v_sp,
            p: ledger.m_sp * HE.r * t_sp / v_sp,
        };
        let rho_diff = atm.density - zp.m / zp.v;
        let v_total = v_sp + zp.v;
        let shape = if mode != self.state.mode {
            let load = ShapeLoad {
                m_payload: self.cfg.payload_kg,
                m_sp_gas: sp.m,
                rho_zp: zp.m / zp.v,
                gravity: env.gravity(),
            };
            exact_or_table(&self.spec, &self.table, rho_diff, v_total, &load, &mut events)
        } else {
            self.table.lookup(rho_diff, v_total)
        };
        let (node_areas, capacity) = node_properties(&shape, self.film_mass, &self.cfg);
        self.state = SimState {
            t,
            step,
            position,
            velocity,
            lat: y[LAT],
            lon: y[LON],
            sp,
            zp,
            m_lost: ledger.m_lost,
            thermal: ThermalState { temps, capacity, node_areas },
            shape,
            mode,
            devices: self.state.devices,
            energy: EnergyLedger {
                heat_sp: y[E_QSP],
                heat_zp: y[E_QZP],
                work_zp: y[E_W],
                enthalpy_sp: y[E_HSP],
                enthalpy_zp: y[E_HZP],
                gross: y[E_GROSS],
            },
            on_ground,
            events,
        };
        Ok(())
    }

    pub fn row(&self) -> TrajectoryRow {
        let s = &self.state;
        TrajectoryRow {
            t: s.t,
            east: s.position[0],
            north: s.position[1],
            alt: s.position[2],
            vz: s.velocity[2],
            m_sp: s.sp.m,
            m_zp: s.zp.m,
            p_sp: s.sp.p,
            p_zp: s.zp.p,
            t_sp: s.sp.t,
            t_zp: s.zp.t,
            t_nodes: [s.thermal.temps[0], s.thermal.temps[1], s.thermal.temps[2], s.thermal.temps[3]],
            v_zp: s.displaced_volume(),
            mode: s.mode.as_str().to_string(),
            event: s.events.join(";"),
            lat: s.lat,
            lon: s.lon,
        }
    }

    /// Runs until `t_end`, recording a row every `record_interval` seconds and at
    /// every step that raised an event. A failing step ends the run with the
    /// partial record and the fault reason.
    pub fn run(&mut self, t_end: f64, record_interval: f64) -> TrajectoryRecord {
        let mut rec = TrajectoryRecord::default();
        rec.rows.push(self.row());
        let n_steps = (t_end / self.dt - 1e-9).ceil().max(0.0) as u64;
        let every = record_interval.max(self.dt);
        while self.state.step < n_steps {
            let before = (self.state.t / every + 1e-9).floor();
            if let Err(e) = self.step() {
                rec.fault = Some(e.to_string());
                return rec;
            }
            let after = (self.state.t / every + 1e-9).floor();
            if after > before || !self.state.events.is_empty() || self.state.step == n_steps {
                rec.rows.push(self.row());
            }
        }
        rec
    }
}

fn close_zp(mode: ZpMode, m: f64, t: f64, p_ref: f64, v_max: f64) -> GasChamberState {
    let (v, p) = match mode {
        ZpMode::Slack => (m * HE.r * t / p_ref, p_ref),
        ZpMode::FullyInflated => (v_max, m * HE.r * t / v_max),
    };
    GasChamberState { chamber: Chamber::Zp, m, t, v, p }
}

/// Exact shape solve, falling back to the table (with an event) if it fails.
fn exact_or_table(
    spec: &EnvelopeSpec,
    table: &ShapeTable,
    rho_diff: f64,
    v_total: f64,
    load: &ShapeLoad,
    events: &mut Vec<String>,
) -> ShapeSummary {
    let v = v_total.clamp(spec.sp_volume(), spec.inflated_volume());
    match solve_shape(spec, rho_diff, VolumeRequest::Total(v), load, &SolveOptions::default()) {
        Ok(sol) => {
            let mut s = sol.summary;
            s.volume = v_total;
            s
        }
        Err(e) => {
            events.push(format!("shape-table-fallback({e})"));
            table.lookup(rho_diff, v_total)
        }
    }
}

/// Node areas (floored at 1e-3 of their total) and heat capacities from the film
/// mass shares.
fn node_properties(shape: &ShapeSummary, film_mass: [f64; 2], cfg: &AerobotConfig) -> ([f64; 4], [f64; 4]) {
    let total: f64 = shape.node_areas.iter().sum();
    let a = shape.node_areas.map(|x| x.max(1e-3 * total));
    let zp_area = a[0] + a[2] + a[3];
    let sp_area = a[0] + a[1];
    let (czp, csp) = (film_mass[0] * cfg.film.zp_cp, film_mass[1] * cfg.film.sp_cp);
    let cap = [
        czp * a[0] / zp_area + csp * a[0] / sp_area,
        csp * a[1] / sp_area,
        czp * a[2] / zp_area,
        czp * a[3] / zp_area,
    ];
    (a, cap)
}
