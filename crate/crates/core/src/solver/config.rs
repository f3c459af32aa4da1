use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Time step: a fixed value or chosen from the stability bound each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dt {
    Fixed(f64),
    Auto,
}

impl Serialize for Dt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dt::Fixed(v) => s.serialize_f64(*v),
            Dt::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for Dt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Dt::Fixed(v)),
            Raw::Text(t) if t == "auto" => Ok(Dt::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "dt must be a number or \"auto\", got {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Crank–Nicolson on the stiff part, Heun on the rest.
    #[default]
    ImexCnRk2,
    /// Third-order exponential time differencing (Cox–Matthews).
    ImexEtdRk3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeStepperConfig {
    pub dt: Dt,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    pub t_end: f64,
    #[serde(default = "default_snapshot")]
    pub snapshot_interval: f64,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_snapshot() -> f64 {
    0.1
}

impl TimeStepperConfig {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self {
            dt: Dt::Fixed(dt),
            scheme: Scheme::ImexCnRk2,
            cfl_safety: default_cfl(),
            t_end,
            snapshot_interval: default_snapshot(),
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_snapshots(mut self, interval: f64) -> Self {
        self.snapshot_interval = interval;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::Validation(format!(
                "cfl_safety must lie in (0, 1), got {}",
                self.cfl_safety
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Validation(format!(
                "t_end must be finite and nonnegative, got {}",
                self.t_end
            )));
        }
        if !(self.snapshot_interval.is_finite() && self.snapshot_interval > 0.0) {
            return Err(Error::Validation(format!(
                "snapshot_interval must be positive, got {}",
                self.snapshot_interval
            )));
        }
        if let Dt::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Validation(format!("dt must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    /// Fixed step shrunk so that an integer number of steps reaches `t_end`.
    pub(crate) fn uniform_dt(&self) -> Option<(f64, usize)> {
        match self.dt {
            Dt::Fixed(dt) if self.t_end > 0.0 => {
                let steps = (self.t_end / dt - 1e-9).ceil().max(1.0) as usize;
                Some((self.t_end / steps as f64, steps))
            }
            Dt::Fixed(_) => Some((0.0, 0)),
            Dt::Auto => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Deserialize)]
    struct Wrap {
        s: TimeStepperConfig,
    }

    #[test]
    fn parse_dt_forms() {
        let w: Wrap = toml::from_str("[s]\ndt = \"auto\"\nt_end = 1.0\n").unwrap();
        assert_eq!(w.s.dt, Dt::Auto);
        let w: Wrap =
            toml::from_str("[s]\ndt = 1e-3\nt_end = 1.0\nscheme = \"imex_etd_rk3\"\n").unwrap();
        assert_eq!(w.s.dt, Dt::Fixed(1e-3));
        assert_eq!(w.s.scheme, Scheme::ImexEtdRk3);
        assert!(toml::from_str::<Wrap>("[s]\ndt = \"fast\"\nt_end = 1.0\n").is_err());
    }

    #[test]
    fn uniform_dt_lands_on_t_end() {
        let c = TimeStepperConfig::fixed(0.3, 1.0);
        let (dt, n) = c.uniform_dt().unwrap();
        assert_eq!(n, 4);
        assert!((dt * n as f64 - 1.0).abs() < 1e-15);
        let (dt, n) = TimeStepperConfig::fixed(1e-3, 1.0).uniform_dt().unwrap();
        assert_eq!(n, 1000);
        assert_eq!(dt, 1e-3);
        assert!(TimeStepperConfig {
            cfl_safety: 1.0,
            ..TimeStepperConfig::fixed(0.1, 1.0)
        }
        .validate()
        .is_err());
    }
}
