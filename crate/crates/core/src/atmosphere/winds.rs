//! Wind tables parameterised by altitude or by mission time.

use super::AtmosphereError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindParam {
    Altitude,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindRow {
    /// Altitude [m] or time [s] depending on the table parameterisation.
    pub key: f64,
    pub east: f64,
    pub north: f64,
    pub up: f64,
}

/// Piecewise-linear wind field, held constant beyond the first and last rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WindTable {
    pub param: WindParam,
    rows: Vec<WindRow>,
}

impl WindTable {
    pub fn calm() -> Self {
        Self {
            param: WindParam::Altitude,
            rows: Vec::new(),
        }
    }

    pub fn uniform(east: f64, north: f64) -> Self {
        Self {
            param: WindParam::Altitude,
            rows: vec![WindRow {
                key: 0.0,
                east,
                north,
                up: 0.0,
            }],
        }
    }

    pub fn new(param: WindParam, rows: Vec<WindRow>) -> Result<Self, AtmosphereError> {
        for (i, w) in rows.windows(2).enumerate() {
            if !(w[1].key > w[0].key) {
                return Err(AtmosphereError::Validation(format!(
                    "wind keys strictly increasing (rows {} and {})",
                    i + 1,
                    i + 2
                )));
            }
        }
        if rows
            .iter()
            .any(|r| !(r.east.is_finite() && r.north.is_finite() && r.up.is_finite()))
        {
            return Err(AtmosphereError::Validation("wind components finite".into()));
        }
        Ok(Self { param, rows })
    }

    pub fn rows(&self) -> &[WindRow] {
        &self.rows
    }

    /// (east, north, up) wind [m/s].
    pub fn wind(&self, altitude: f64, t: f64) -> [f64; 3] {
        let key = match self.param {
            WindParam::Altitude => altitude,
            WindParam::Time => t,
        };
        let n = self.rows.len();
        match n {
            0 => [0.0; 3],
            1 => {
                let r = self.rows[0];
                [r.east, r.north, r.up]
            }
            _ => {
                if key <= self.rows[0].key {
                    let r = self.rows[0];
                    return [r.east, r.north, r.up];
                }
                if key >= self.rows[n - 1].key {
                    let r = self.rows[n - 1];
                    return [r.east, r.north, r.up];
                }
                let i = self.rows.partition_point(|r| r.key <= key).clamp(1, n - 1);
                let (a, b) = (self.rows[i - 1], self.rows[i]);
                let u = (key - a.key) / (b.key - a.key);
                [
                    a.east + u * (b.east - a.east),
                    a.north + u * (b.north - a.north),
                    a.up + u * (b.up - a.up),
                ]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_clamps() {
        let t = WindTable::new(
            WindParam::Altitude,
            vec![
                WindRow { key: 0.0, east: 0.0, north: 2.0, up: 0.0 },
                WindRow { key: 100.0, east: 10.0, north: 0.0, up: 0.0 },
            ],
        )
        .unwrap();
        assert_eq!(t.wind(50.0, 0.0), [5.0, 1.0, 0.0]);
        assert_eq!(t.wind(-10.0, 0.0), [0.0, 2.0, 0.0]);
        assert_eq!(t.wind(500.0, 0.0), [10.0, 0.0, 0.0]);
    }

    #[test]
    fn time_parameterised() {
        let t = WindTable::new(
            WindParam::Time,
            vec![
                WindRow { key: 0.0, east: 0.0, north: 0.0, up: 0.0 },
                WindRow { key: 10.0, east: 4.0, north: 0.0, up: 0.0 },
            ],
        )
        .unwrap();
        assert_eq!(t.wind(1e6, 5.0)[0], 2.0);
    }
}
