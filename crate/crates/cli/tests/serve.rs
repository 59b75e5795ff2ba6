use aerobot_cli::session::{Pacing, Server, StateFrame};
use aerobot_core::scenario::load_preset;
use std::net::TcpStream;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

fn start_server(speed: f64) -> String {
    let mut s = load_preset("nevada-flight2").unwrap();
    s.table_grid = (8, 12);
    // No scheduled commands, so every actuator change comes from the client.
    s.timeline = Default::default();
    s.commands_file = None;
    let table = Arc::new(s.build_table().unwrap());
    let server = Server::bind("127.0.0.1:0", s, table, Pacing { speed, frame_interval: 1.0 }).unwrap();
    let addr = server.local_addr().unwrap();
    thread::spawn(move || server.run().unwrap());
    format!("ws://{addr}")
}

fn connect(url: &str) -> Client {
    let (ws, _) = tungstenite::connect(url).unwrap();
    if let MaybeTlsStream::Plain(s) = ws.get_ref() {
        s.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
    }
    ws
}

fn next_line(ws: &mut Client) -> String {
    loop {
        match ws.read().expect("frame before timeout") {
            Message::Text(t) => return t.to_string(),
            Message::Close(_) => panic!("server closed the session"),
            _ => {}
        }
    }
}

fn next_state(ws: &mut Client) -> StateFrame {
    let line = next_line(ws);
    assert!(line.ends_with('\n'), "frames are newline terminated: {line:?}");
    serde_json::from_str(&line).unwrap_or_else(|e| panic!("{e}: {line}"))
}

fn send(ws: &mut Client, text: &str) {
    ws.send(Message::text(text)).unwrap();
}

#[test]
fn vent_command_is_reflected_and_drains_the_superpressure_chamber() {
    let url = start_server(20.0);
    let mut ws = connect(&url);
    let first = next_state(&mut ws);
    assert!(!first.vent && !first.pump);
    send(&mut ws, "{\"cmd\":\"vent_open\"}\n");

    let deadline = Instant::now() + Duration::from_secs(20);
    let opened = loop {
        assert!(Instant::now() < deadline, "vent never reported open");
        let f = next_state(&mut ws);
        if f.vent {
            break f;
        }
    };
    assert!(opened.event.as_deref().unwrap_or("").contains("vent_open"), "{opened:?}");
    let later = next_state(&mut ws);
    let latest = next_state(&mut ws);
    assert!(later.vent && latest.vent);
    assert!(later.m_sp < opened.m_sp && latest.m_sp < later.m_sp, "{opened:?} {later:?} {latest:?}");
    assert!(latest.t > later.t && later.t > opened.t);
    // Venting moves helium between chambers without losing any.
    let total = |f: &StateFrame| f.m_sp + f.m_zp;
    assert!((total(&latest) - total(&opened)).abs() < 1e-9 * total(&opened));

    send(&mut ws, "{\"cmd\":\"vent_close\"}");
    loop {
        assert!(Instant::now() < deadline, "vent never reported closed");
        if !next_state(&mut ws).vent {
            break;
        }
    }
}

#[test]
fn malformed_commands_get_error_frames_and_the_session_continues() {
    let url = start_server(20.0);
    let mut ws = connect(&url);
    let first = next_state(&mut ws);
    send(&mut ws, "open the vent please");
    send(&mut ws, "{\"cmd\":\"vent_ajar\"}");
    let mut errors = Vec::new();
    let mut last_t = first.t;
    let deadline = Instant::now() + Duration::from_secs(20);
    while errors.len() < 2 {
        assert!(Instant::now() < deadline, "no error frames");
        let line = next_line(&mut ws);
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        match v.get("error") {
            Some(e) => errors.push(e.as_str().unwrap().to_string()),
            None => last_t = v["t"].as_f64().unwrap(),
        }
    }
    assert!(errors[0].contains("malformed"), "{errors:?}");
    assert!(errors[1].contains("unknown command"), "{errors:?}");
    let f = next_state(&mut ws);
    assert!(f.t > last_t && !f.vent);
}

#[test]
fn simulation_advances_with_no_client_connected() {
    let url = start_server(200.0);
    thread::sleep(Duration::from_millis(500));
    let mut ws = connect(&url);
    let f = next_state(&mut ws);
    assert!(f.t >= 20.0, "t = {}", f.t);
}

#[test]
fn each_connection_gets_its_own_session() {
    let url = start_server(20.0);
    let mut a = connect(&url);
    let mut b = connect(&url);
    let fa = next_state(&mut a);
    next_state(&mut b);
    send(&mut a, "{\"cmd\":\"vent_open\"}");
    let deadline = Instant::now() + Duration::from_secs(20);
    while !next_state(&mut a).vent {
        assert!(Instant::now() < deadline);
    }
    for _ in 0..5 {
        assert!(!next_state(&mut b).vent);
    }
    assert!(fa.t >= 0.0);
}
