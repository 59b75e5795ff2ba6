//! Live piloting sessions over WebSocket.
//!
//! Each connection gets its own engine thread. The engine never waits on the
//! network: commands arrive through the engine's command queue and state frames
//! leave through a bounded channel that drops frames when the client falls behind.

use aerobot_core::dynamics::Engine;
use aerobot_core::gastransfer::TransferAction;
use aerobot_core::scenario::ScenarioError;
use aerobot_core::{Scenario, ShapeTable};
use serde::{Deserialize, Serialize};
use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, SyncSender};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};
use tungstenite::{Message, WebSocket};

/// Frames buffered per client before new ones are dropped.
const FRAME_BACKLOG: usize = 1024;
/// How long a connection thread waits for client input before flushing frames.
const POLL: Duration = Duration::from_millis(5);

/// One state snapshot, serialized with the keys in protocol order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub t: f64,
    pub alt: f64,
    pub vz: f64,
    pub p_sp: f64,
    pub p_zp: f64,
    pub t_zp: f64,
    pub t_sp: f64,
    pub m_sp: f64,
    pub m_zp: f64,
    pub pump: bool,
    pub vent: bool,
    pub mode: String,
    pub event: Option<String>,
}

impl StateFrame {
    fn snapshot(engine: &Engine, events: &[String]) -> Self {
        let s = engine.state();
        Self {
            t: s.t,
            alt: s.altitude(),
            vz: s.velocity[2],
            p_sp: s.sp.p,
            p_zp: s.zp.p,
            t_zp: s.zp.t,
            t_sp: s.sp.t,
            m_sp: s.sp.m,
            m_zp: s.zp.m,
            pump: s.devices.pump,
            vent: s.devices.vent,
            mode: s.mode.as_str().to_string(),
            event: (!events.is_empty()).then(|| events.join(";")),
        }
    }

    /// One protocol line, newline included.
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("state frames always serialize");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
struct ErrorFrame<'a> {
    error: &'a str,
}

pub fn error_line(message: &str) -> String {
    let mut s = serde_json::to_string(&ErrorFrame { error: message }).expect("error frames always serialize");
    s.push('\n');
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CommandFrame {
    cmd: String,
}

/// Parses one command line such as `{"cmd":"vent_open"}`.
pub fn parse_command(line: &str) -> Result<TransferAction, String> {
    let frame: CommandFrame =
        serde_json::from_str(line.trim()).map_err(|e| format!("malformed command frame: {e}"))?;
    TransferAction::parse(&frame.cmd).ok_or_else(|| format!("unknown command '{}'", frame.cmd))
}

/// Session pacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pacing {
    /// Simulated seconds per wall-clock second; infinite runs unpaced.
    pub speed: f64,
    /// Simulated seconds between periodic state frames.
    pub frame_interval: f64,
}

impl Default for Pacing {
    fn default() -> Self {
        Self { speed: 1.0, frame_interval: 1.0 }
    }
}

type FrameSink = Arc<Mutex<Option<SyncSender<String>>>>;

/// A running engine thread.
pub struct Session {
    commands: Sender<TransferAction>,
    sink: FrameSink,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl Session {
    /// Starts the engine at the scenario's launch point. It advances whether
    /// or not anyone is listening, until the scenario end time or a fault.
    pub fn start(scenario: &Scenario, table: Arc<ShapeTable>, pacing: Pacing) -> Result<Self, ScenarioError> {
        let engine = scenario.engine(table)?;
        let commands = engine.command_sender();
        let sink: FrameSink = Arc::new(Mutex::new(None));
        let stop = Arc::new(AtomicBool::new(false));
        let t_end = scenario.t_end_s;
        let handle = {
            let sink = sink.clone();
            let stop = stop.clone();
            thread::spawn(move || run_engine(engine, t_end, pacing, &sink, &stop))
        };
        Ok(Self { commands, sink, stop, handle: Some(handle) })
    }

    /// Routes frames to a new receiver, replacing any previous one.
    pub fn attach(&self) -> Receiver<String> {
        let (tx, rx) = mpsc::sync_channel(FRAME_BACKLOG);
        *self.sink.lock().expect("frame sink poisoned") = Some(tx);
        rx
    }

    pub fn command(&self, action: TransferAction) {
        // The engine only goes away after the session is stopped or finished;
        // a late command has nothing left to act on.
        let _ = self.commands.send(action);
    }

    pub fn is_finished(&self) -> bool {
        self.handle.as_ref().map_or(true, |h| h.is_finished())
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn publish(sink: &FrameSink, line: String) {
    if let Some(tx) = sink.lock().expect("frame sink poisoned").as_ref() {
        // Full or closed: the frame is dropped, never waited on.
        let _ = tx.try_send(line);
    }
}

fn run_engine(mut engine: Engine, t_end: f64, pacing: Pacing, sink: &FrameSink, stop: &AtomicBool) {
    let dt = engine.dt();
    let every = pacing.frame_interval.max(dt);
    let n_steps = (t_end / dt - 1e-9).ceil().max(0.0) as u64;
    let wall0 = Instant::now();
    let mut pending: Vec<String> = engine.state().events.clone();
    publish(sink, StateFrame::snapshot(&engine, &pending).to_line());
    pending.clear();
    while engine.state().step < n_steps && !stop.load(Ordering::Relaxed) {
        let before = (engine.state().t / every + 1e-9).floor();
        if let Err(e) = engine.step() {
            publish(sink, error_line(&format!("engine fault: {e}")));
            return;
        }
        let s = engine.state();
        pending.extend(s.events.iter().cloned());
        let after = (s.t / every + 1e-9).floor();
        // Event steps are sent at once so a command shows up on the very next frame.
        if after > before || !s.events.is_empty() || s.step == n_steps {
            publish(sink, StateFrame::snapshot(&engine, &pending).to_line());
            pending.clear();
        }
        if pacing.speed.is_finite() && pacing.speed > 0.0 {
            let due = Duration::from_secs_f64(engine.state().t / pacing.speed);
            let elapsed = wall0.elapsed();
            if due > elapsed {
                thread::sleep(due - elapsed);
            }
        }
    }
}

/// Accepts connections and gives each its own session.
///
/// A standby session is kept running between connections, so the simulation
/// advances even while no client is connected; the next client to connect
/// takes it over and a fresh standby is started.
pub struct Server {
    listener: TcpListener,
    scenario: Arc<Scenario>,
    table: Arc<ShapeTable>,
    pacing: Pacing,
}

impl Server {
    pub fn bind(
        addr: impl ToSocketAddrs,
        scenario: Scenario,
        table: Arc<ShapeTable>,
        pacing: Pacing,
    ) -> io::Result<Self> {
        Ok(Self::new(TcpListener::bind(addr)?, scenario, table, pacing))
    }

    pub fn new(listener: TcpListener, scenario: Scenario, table: Arc<ShapeTable>, pacing: Pacing) -> Self {
        Self { listener, scenario: Arc::new(scenario), table, pacing }
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves forever.
    pub fn run(self) -> Result<(), ScenarioError> {
        let mut standby = Some(Session::start(&self.scenario, self.table.clone(), self.pacing)?);
        for stream in self.listener.incoming() {
            let Ok(stream) = stream else { continue };
            let session = match standby.take() {
                Some(s) if !s.is_finished() => s,
                _ => Session::start(&self.scenario, self.table.clone(), self.pacing)?,
            };
            thread::spawn(move || {
                if let Err(e) = handle_connection(stream, session) {
                    eprintln!("session ended: {e}");
                }
            });
            standby = Some(Session::start(&self.scenario, self.table.clone(), self.pacing)?);
        }
        Ok(())
    }
}

fn handle_connection(stream: TcpStream, session: Session) -> Result<(), tungstenite::Error> {
    let mut ws = tungstenite::accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(f) => f,
        tungstenite::HandshakeError::Interrupted(_) => {
            tungstenite::Error::Io(io::Error::new(io::ErrorKind::WouldBlock, "handshake interrupted"))
        }
    })?;
    ws.get_ref().set_read_timeout(Some(POLL))?;
    let frames = session.attach();
    loop {
        // Checked before draining so the final frames are flushed before closing.
        let finished = session.is_finished();
        while let Ok(line) = frames.try_recv() {
            ws.write(Message::text(line))?;
        }
        ws.flush()?;
        if finished {
            let _ = ws.close(None);
            let _ = ws.flush();
            return Ok(());
        }
        match ws.read() {
            Ok(Message::Text(text)) => handle_input(&mut ws, &session, text.as_str())?,
            Ok(Message::Binary(_)) => ws.write(Message::text(error_line("binary frames are not accepted")))?,
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(e),
        }
    }
}

fn handle_input(ws: &mut WebSocket<TcpStream>, session: &Session, text: &str) -> Result<(), tungstenite::Error> {
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        match parse_command(line) {
            Ok(action) => session.command(action),
            Err(msg) => ws.write(Message::text(error_line(&msg)))?,
        }
    }
    Ok(())
}
