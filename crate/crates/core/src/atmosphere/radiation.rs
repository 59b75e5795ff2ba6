//! Radiative environment: solar and infrared irradiance channels, each tabulated
//! against altitude, mission time or solar zenith angle.

use super::AtmosphereError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RadChannel {
    UpSolar,
    SideSolar,
    DownSolar,
    UpIr,
    DownIr,
}

impl RadChannel {
    pub const ALL: [RadChannel; 5] = [
        RadChannel::UpSolar,
        RadChannel::SideSolar,
        RadChannel::DownSolar,
        RadChannel::UpIr,
        RadChannel::DownIr,
    ];

    pub fn key(self) -> &'static str {
        match self {
            RadChannel::UpSolar => "e_up_solar",
            RadChannel::SideSolar => "e_side_solar",
            RadChannel::DownSolar => "e_down_solar",
            RadChannel::UpIr => "e_up_ir",
            RadChannel::DownIr => "e_down_ir",
        }
    }

    pub fn from_key(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.key() == s)
    }

    pub fn is_solar(self) -> bool {
        matches!(
            self,
            RadChannel::UpSolar | RadChannel::SideSolar | RadChannel::DownSolar
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadParam {
    /// Altitude [m].
    Altitude,
    /// Mission time [s].
    Time,
    /// Solar zenith angle [deg].
    Zenith,
}

impl RadParam {
    pub fn prefix(self) -> &'static str {
        match self {
            RadParam::Altitude => "alt_m",
            RadParam::Time => "t_s",
            RadParam::Zenith => "zenith_deg",
        }
    }

    pub fn from_prefix(s: &str) -> Option<Self> {
        match s {
            "alt_m" => Some(RadParam::Altitude),
            "t_s" => Some(RadParam::Time),
            "zenith_deg" => Some(RadParam::Zenith),
            _ => None,
        }
    }
}

/// One irradiance channel: a piecewise-linear table, clamped at its ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable {
    pub param: RadParam,
    pub points: Vec<(f64, f64)>,
}

impl ChannelTable {
    fn eval(&self, x: f64) -> f64 {
        let p = &self.points;
        let n = p.len();
        if x <= p[0].0 {
            return p[0].1;
        }
        if x >= p[n - 1].0 {
            return p[n - 1].1;
        }
        let i = p.partition_point(|q| q.0 <= x).clamp(1, n - 1);
        let (a, b) = (p[i - 1], p[i]);
        a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1)
    }
}

/// Irradiances seen by the envelope at one instant [W/m²].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Fluxes {
    pub up_solar: f64,
    pub side_solar: f64,
    pub down_solar: f64,
    pub up_ir: f64,
    pub down_ir: f64,
}

impl Fluxes {
    /// Infrared reaching the side node; the horizontal view sees half sky, half ground.
    pub fn side_ir(&self) -> f64 {
        0.5 * (self.up_ir + self.down_ir)
    }

    /// Direct solar magnitude derived from the three solar channels.
    pub fn direct_solar(&self) -> f64 {
        direct_solar(self.side_solar, self.up_solar, self.down_solar).unwrap_or(0.0)
    }
}

/// Set of irradiance channels. Missing channels read as zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadiationEnvironment {
    channels: Vec<(RadChannel, ChannelTable)>,
}

impl RadiationEnvironment {
    pub fn dark() -> Self {
        Self::default()
    }

    pub fn channels(&self) -> impl Iterator<Item = (RadChannel, &ChannelTable)> {
        self.channels.iter().map(|(c, t)| (*c, t))
    }

    pub fn channel(&self, c: RadChannel) -> Option<&ChannelTable> {
        self.channels.iter().find(|(k, _)| *k == c).map(|(_, t)| t)
    }

    /// Adds or replaces a channel after checking monotone keys and non-negative values.
    pub fn set_channel(
        &mut self,
        channel: RadChannel,
        param: RadParam,
        points: Vec<(f64, f64)>,
    ) -> Result<(), AtmosphereError> {
        if points.is_empty() {
            return Err(AtmosphereError::Validation(format!(
                "radiation channel {} has no points",
                channel.key()
            )));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(AtmosphereError::Validation(format!(
                "radiation channel {} parameter strictly increasing",
                channel.key()
            )));
        }
        if points.iter().any(|p| !(p.1 >= 0.0) || !p.1.is_finite()) {
            return Err(AtmosphereError::Validation(format!(
                "irradiance >= 0 in channel {}",
                channel.key()
            )));
        }
        let table = ChannelTable { param, points };
        match self.channels.iter_mut().find(|(k, _)| *k == channel) {
            Some(slot) => slot.1 = table,
            None => {
                self.channels.push((channel, table));
                self.channels.sort_by_key(|(k, _)| *k);
            }
        }
        Ok(())
    }

    pub fn with_channel(
        mut self,
        channel: RadChannel,
        param: RadParam,
        points: Vec<(f64, f64)>,
    ) -> Result<Self, AtmosphereError> {
        self.set_channel(channel, param, points)?;
        Ok(self)
    }

    /// Whether any channel needs a solar zenith angle to evaluate.
    pub fn needs_zenith(&self) -> bool {
        self.channels.iter().any(|(_, t)| t.param == RadParam::Zenith)
    }

    /// Evaluates all channels. `zenith_rad` is the solar zenith angle when solar
    /// geometry is known; solar channels read zero when it exceeds 90°.
    pub fn fluxes(
        &self,
        altitude: f64,
        t: f64,
        zenith_rad: Option<f64>,
    ) -> Result<Fluxes, AtmosphereError> {
        let night = zenith_rad.is_some_and(|z| z > std::f64::consts::FRAC_PI_2);
        let mut out = Fluxes::default();
        for (c, table) in &self.channels {
            if night && c.is_solar() {
                continue;
            }
            let x = match table.param {
                RadParam::Altitude => altitude,
                RadParam::Time => t,
                RadParam::Zenith => zenith_rad
                    .ok_or(AtmosphereError::NoZenith(c.key()))?
                    .to_degrees(),
            };
            let v = table.eval(x);
            match c {
                RadChannel::UpSolar => out.up_solar = v,
                RadChannel::SideSolar => out.side_solar = v,
                RadChannel::DownSolar => out.down_solar = v,
                RadChannel::UpIr => out.up_ir = v,
                RadChannel::DownIr => out.down_ir = v,
            }
        }
        Ok(out)
    }
}

/// Direct solar irradiance from the welling components: the hypotenuse of the net
/// horizontal flux (sidewelling less half the upwelling, clamped at zero) and the
/// downwelling flux.
pub fn direct_solar(e_side: f64, e_up: f64, e_down: f64) -> Result<f64, AtmosphereError> {
    if !(e_side >= 0.0 && e_up >= 0.0 && e_down >= 0.0) {
        return Err(AtmosphereError::Domain(format!(
            "irradiances must be non-negative (side {e_side}, up {e_up}, down {e_down})"
        )));
    }
    let horizontal = (e_side - 0.5 * e_up).max(0.0);
    Ok(horizontal.hypot(e_down))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_solar_examples() {
        assert_eq!(direct_solar(500.0, 200.0, 0.0).unwrap(), 400.0);
        assert_eq!(direct_solar(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(direct_solar(100.0, 200.0, 0.0).unwrap(), 0.0);
        assert!(direct_solar(-1.0, 0.0, 0.0).is_err());
        assert_eq!(direct_solar(123.25, 0.0, 0.0).unwrap(), 123.25);
        assert!((direct_solar(300.0, 0.0, 400.0).unwrap() - 500.0).abs() < 1e-12);
    }

    #[test]
    fn night_zeroes_solar_keeps_ir() {
        let env = RadiationEnvironment::dark()
            .with_channel(RadChannel::DownSolar, RadParam::Zenith, vec![(0.0, 1000.0), (90.0, 0.0)])
            .unwrap()
            .with_channel(RadChannel::UpIr, RadParam::Altitude, vec![(0.0, 150.0)])
            .unwrap();
        let day = env.fluxes(0.0, 0.0, Some(0.0)).unwrap();
        assert_eq!(day.down_solar, 1000.0);
        let mid = env.fluxes(0.0, 0.0, Some(45f64.to_radians())).unwrap();
        assert!((mid.down_solar - 500.0).abs() < 1e-9);
        let night = env.fluxes(0.0, 0.0, Some(100f64.to_radians())).unwrap();
        assert_eq!(night.down_solar, 0.0);
        assert_eq!(night.up_ir, 150.0);
        assert!(env.fluxes(0.0, 0.0, None).is_err());
    }

    #[test]
    fn negative_irradiance_rejected() {
        let r = RadiationEnvironment::dark().with_channel(
            RadChannel::UpIr,
            RadParam::Altitude,
            vec![(0.0, -1.0)],
        );
        assert!(r.is_err());
    }
}
