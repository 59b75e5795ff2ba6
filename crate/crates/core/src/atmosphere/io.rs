//! CSV ingestion and serialisation of atmosphere, wind and radiation tables.
//!
//! Floats are written with Rust's shortest round-trip formatting so that
//! `load(serialize(x)) == x` holds bit for bit. Profile metadata (ambient gas and
//! surface gravity) rides in leading `# key=value` comment lines.

use super::{
    AmbientGas, AtmRow, AtmosphereError, AtmosphereProfile, RadChannel, RadParam,
    RadiationEnvironment, WindParam, WindRow, WindTable,
};
use crate::constants::EARTH_GRAVITY;
use std::io::Read;

/// Supported ingestion formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileFormat {
    /// `alt_m,pressure_pa,temp_k,density_kgm3`
    AtmosphereCsv,
}

const ATM_HEADER: [&str; 4] = ["alt_m", "pressure_pa", "temp_k", "density_kgm3"];
pub(crate) const WIND_COLUMNS: [&str; 3] = ["east_ms", "north_ms", "up_ms"];

struct Parsed {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    /// (1-based line number, fields)
    records: Vec<(usize, Vec<String>)>,
}

fn read_all(mut source: impl Read) -> Result<String, AtmosphereError> {
    let mut s = String::new();
    source
        .read_to_string(&mut s)
        .map_err(|e| AtmosphereError::Parse {
            row: 0,
            message: e.to_string(),
        })?;
    Ok(s)
}

fn parse_table(text: &str) -> Result<Parsed, AtmosphereError> {
    let mut meta = Vec::new();
    for line in text.lines() {
        let Some(rest) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        if let Some((k, v)) = rest.split_once('=') {
            meta.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| AtmosphereError::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(AtmosphereError::Parse {
            row: 1,
            message: "empty file".into(),
        });
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| AtmosphereError::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec.iter().map(str::to_string).collect()));
    }
    if records.is_empty() {
        return Err(AtmosphereError::Parse {
            row: 2,
            message: "no data rows".into(),
        });
    }
    Ok(Parsed {
        meta,
        header,
        records,
    })
}

fn num(row: usize, field: &str, col: &str) -> Result<f64, AtmosphereError> {
    field.parse::<f64>().map_err(|_| AtmosphereError::Parse {
        row,
        message: format!("column {col}: '{field}' is not a number"),
    })
}

fn expect_header(p: &Parsed, want: &[&str]) -> Result<(), AtmosphereError> {
    if p.header.len() != want.len() || p.header.iter().zip(want).any(|(a, b)| a != b) {
        return Err(AtmosphereError::Parse {
            row: 1,
            message: format!("expected header '{}', found '{}'", want.join(","), p.header.join(",")),
        });
    }
    Ok(())
}

/// Parses an atmosphere table and validates it.
pub fn load_profile(
    source: impl Read,
    format: ProfileFormat,
) -> Result<AtmosphereProfile, AtmosphereError> {
    match format {
        ProfileFormat::AtmosphereCsv => parse_atmosphere_csv(&read_all(source)?),
    }
}

pub fn parse_atmosphere_csv(text: &str) -> Result<AtmosphereProfile, AtmosphereError> {
    let p = parse_table(text)?;
    expect_header(&p, &ATM_HEADER)?;
    let mut gas = AmbientGas::Air;
    let mut gravity = EARTH_GRAVITY;
    for (k, v) in &p.meta {
        match k.as_str() {
            "gas" => {
                gas = AmbientGas::from_name(v).ok_or_else(|| AtmosphereError::Parse {
                    row: 0,
                    message: format!("unknown gas '{v}'"),
                })?
            }
            "gravity" => gravity = num(0, v, "gravity")?,
            _ => {}
        }
    }
    let mut rows = Vec::with_capacity(p.records.len());
    for (line, f) in &p.records {
        if f.len() != 4 {
            return Err(AtmosphereError::Parse {
                row: *line,
                message: format!("expected 4 fields, found {}", f.len()),
            });
        }
        rows.push(AtmRow {
            alt_m: num(*line, &f[0], ATM_HEADER[0])?,
            pressure_pa: num(*line, &f[1], ATM_HEADER[1])?,
            temp_k: num(*line, &f[2], ATM_HEADER[2])?,
            density_kgm3: num(*line, &f[3], ATM_HEADER[3])?,
        });
    }
    AtmosphereProfile::new(rows, WindTable::calm(), gravity, gas)
}

/// Serialises the thermodynamic table and its metadata (winds are a separate file).
pub fn serialize_profile(p: &AtmosphereProfile) -> String {
    let mut s = format!(
        "# gas={}\n# gravity={}\n{}\n",
        p.gas.name(),
        p.surface_gravity,
        ATM_HEADER.join(",")
    );
    for r in p.rows() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.alt_m, r.pressure_pa, r.temp_k, r.density_kgm3
        ));
    }
    s
}

/// Parses `alt_m,east_ms,north_ms,up_ms` (or `t_s,...` for a time-keyed table).
pub fn parse_winds_csv(text: &str) -> Result<WindTable, AtmosphereError> {
    let p = parse_table(text)?;
    let param = match p.header.first().map(String::as_str) {
        Some("alt_m") => WindParam::Altitude,
        Some("t_s") => WindParam::Time,
        _ => {
            return Err(AtmosphereError::Parse {
                row: 1,
                message: "wind table must start with alt_m or t_s".into(),
            })
        }
    };
    let mut want = vec![p.header[0].as_str()];
    want.extend(WIND_COLUMNS);
    expect_header(&p, &want)?;
    let mut rows = Vec::new();
    for (line, f) in &p.records {
        if f.len() != 4 {
            return Err(AtmosphereError::Parse {
                row: *line,
                message: format!("expected 4 fields, found {}", f.len()),
            });
        }
        rows.push(WindRow {
            key: num(*line, &f[0], want[0])?,
            east: num(*line, &f[1], want[1])?,
            north: num(*line, &f[2], want[2])?,
            up: num(*line, &f[3], want[3])?,
        });
    }
    WindTable::new(param, rows)
}

pub fn serialize_winds(w: &WindTable) -> String {
    let key = match w.param {
        WindParam::Altitude => "alt_m",
        WindParam::Time => "t_s",
    };
    let mut s = format!("{key},{}\n", WIND_COLUMNS.join(","));
    for r in w.rows() {
        s.push_str(&format!("{},{},{},{}\n", r.key, r.east, r.north, r.up));
    }
    s
}

/// Parses `key,param,value` rows, where `param` is `alt_m=<x>`, `t_s=<x>` or
/// `zenith_deg=<x>`. Rows of one channel must share a parameterisation.
pub fn parse_radiation_csv(text: &str) -> Result<RadiationEnvironment, AtmosphereError> {
    let p = parse_table(text)?;
    expect_header(&p, &["key", "param", "value"])?;
    let mut grouped: Vec<(RadChannel, RadParam, Vec<(f64, f64)>)> = Vec::new();
    for (line, f) in &p.records {
        if f.len() != 3 {
            return Err(AtmosphereError::Parse {
                row: *line,
                message: format!("expected 3 fields, found {}", f.len()),
            });
        }
        let channel = RadChannel::from_key(&f[0]).ok_or_else(|| AtmosphereError::Parse {
            row: *line,
            message: format!("unknown radiation key '{}'", f[0]),
        })?;
        let (prefix, x) = f[1].split_once('=').ok_or_else(|| AtmosphereError::Parse {
            row: *line,
            message: format!("param '{}' must look like alt_m=<value>", f[1]),
        })?;
        let param = RadParam::from_prefix(prefix).ok_or_else(|| AtmosphereError::Parse {
            row: *line,
            message: format!("unknown parameter '{prefix}'"),
        })?;
        let x = num(*line, x, "param")?;
        let v = num(*line, &f[2], "value")?;
        match grouped.iter_mut().find(|g| g.0 == channel) {
            Some(g) if g.1 != param => {
                return Err(AtmosphereError::Parse {
                    row: *line,
                    message: format!("channel {} mixes parameterisations", channel.key()),
                })
            }
            Some(g) => g.2.push((x, v)),
            None => grouped.push((channel, param, vec![(x, v)])),
        }
    }
    let mut env = RadiationEnvironment::dark();
    for (c, param, pts) in grouped {
        env.set_channel(c, param, pts)?;
    }
    Ok(env)
}

pub fn serialize_radiation(env: &RadiationEnvironment) -> String {
    let mut s = String::from("key,param,value\n");
    for (c, t) in env.channels() {
        for (x, v) in &t.points {
            s.push_str(&format!("{},{}={},{}\n", c.key(), t.param.prefix(), x, v));
        }
    }
    s
}
