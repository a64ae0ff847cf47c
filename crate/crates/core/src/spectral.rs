//! Reservoir description in dimensionless units.
//!
//! Units are fixed throughout the crate: `ħ = k_B = ω_c = 1`. Times are
//! `τ = ω_c t`, the oscillator frequency is `ω₀ = 1/x` and the temperature
//! is `θ = k_B T / ħω_c`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coupling strength above which the weak-coupling treatment is flagged.
pub const ALPHA_WARN: f64 = 0.2;
/// Largest accepted coupling strength.
pub const ALPHA_MAX: f64 = 0.5;
/// Smallest temperature accepted by the high-temperature expansion.
pub const THETA_MIN: f64 = 10.0;

/// Spectral family `J_s(ω) = ω^s e^{-ω}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ohmic,
    SubOhmic,
    SuperOhmic,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Ohmic, Family::SubOhmic, Family::SuperOhmic];

    /// Exponent `s` of the low-frequency power law.
    pub fn exponent(self) -> f64 {
        match self {
            Family::Ohmic => 1.0,
            Family::SubOhmic => 0.5,
            Family::SuperOhmic => 3.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Ohmic => "ohmic",
            Family::SubOhmic => "subohmic",
            Family::SuperOhmic => "superohmic",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ohmic" => Ok(Family::Ohmic),
            "subohmic" => Ok(Family::SubOhmic),
            "superohmic" => Ok(Family::SuperOhmic),
            _ => Err(Error::Domain(format!(
                "unknown spectrum '{s}' (expected ohmic, subohmic or superohmic)"
            ))),
        }
    }
}

/// Temperature regime of the reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Temperature {
    /// `2N(ω)+1 ≈ 2θ/ω`.
    High { theta: f64 },
    /// `2N(ω)+1 = 1`.
    Zero,
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Temperature::High { theta } => write!(f, "high:{theta}"),
            Temperature::Zero => f.write_str("zero"),
        }
    }
}

impl FromStr for Temperature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("zero") {
            return Ok(Temperature::Zero);
        }
        if let Some(rest) = s.strip_prefix("high:") {
            let theta: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad temperature value '{rest}'")))?;
            return Ok(Temperature::High { theta });
        }
        Err(Error::Domain(format!(
            "temperature must be 'zero' or 'high:<theta>', got '{s}'"
        )))
    }
}

/// Full reservoir description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub family: Family,
    /// Cutoff ratio `ω_c/ω₀`.
    pub x: f64,
    pub alpha: f64,
    pub temp: Temperature,
}

impl ReservoirSpec {
    /// Validated constructor.
    pub fn new(family: Family, x: f64, alpha: f64, temp: Temperature) -> Result<Self> {
        let spec = Self {
            family,
            x,
            alpha,
            temp,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.x > 0.0) {
            return Err(Error::Domain(format!("x must be positive, got {}", self.x)));
        }
        if !(self.alpha > 0.0 && self.alpha <= ALPHA_MAX) {
            return Err(Error::Domain(format!(
                "alpha must lie in (0, {ALPHA_MAX}], got {}",
                self.alpha
            )));
        }
        if let Temperature::High { theta } = self.temp {
            if !(theta.is_finite() && theta >= THETA_MIN) {
                return Err(Error::Domain(format!(
                    "high-temperature expansion needs theta >= {THETA_MIN}, got {theta}"
                )));
            }
        }
        Ok(())
    }

    /// Oscillator frequency `ω₀ = 1/x` in units of `ω_c`.
    pub fn omega0(&self) -> f64 {
        1.0 / self.x
    }

    /// True when `alpha` exceeds the weak-coupling comfort zone.
    pub fn weak_coupling_warning(&self) -> bool {
        self.alpha > ALPHA_WARN
    }

    /// `θ·x = k_B T/ħω₀`, or `None` at zero temperature.
    pub fn theta_x(&self) -> Option<f64> {
        match self.temp {
            Temperature::High { theta } => Some(theta * self.x),
            Temperature::Zero => None,
        }
    }
}

/// `J_s(ω) = ω^s e^{-ω}` with `ω` in units of `ω_c`.
pub fn spectral_density(spec: &ReservoirSpec, w: f64) -> Result<f64> {
    spectral_density_s(spec.family.exponent(), w)
}

/// Spectral density for an arbitrary exponent `s > 0`.
pub fn spectral_density_s(s: f64, w: f64) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(Error::Domain(format!(
            "frequency must be non-negative, got {w}"
        )));
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    Ok(w.powf(s) * (-w).exp())
}

/// `2N(ω)+1` in the selected temperature limit.
pub fn thermal_factor(spec: &ReservoirSpec, w: f64) -> Result<f64> {
    match spec.temp {
        Temperature::Zero => Ok(1.0),
        Temperature::High { theta } => {
            if !(w > 0.0) {
                return Err(Error::Domain(format!(
                    "high-temperature factor diverges at w = {w}"
                )));
            }
            Ok(2.0 * theta / w)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ohmic_high() -> ReservoirSpec {
        ReservoirSpec::new(Family::Ohmic, 10.0, 0.1, Temperature::High { theta: 100.0 }).unwrap()
    }

    #[test]
    fn density_values() {
        let s = ohmic_high();
        assert!((spectral_density(&s, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        for f in Family::ALL {
            let s = ReservoirSpec { family: f, ..s };
            assert_eq!(spectral_density(&s, 0.0).unwrap(), 0.0);
        }
        assert!(spectral_density(&s, -1.0).is_err());
    }

    #[test]
    fn super_ohmic_peak_at_three() {
        let s = ReservoirSpec {
            family: Family::SuperOhmic,
            ..ohmic_high()
        };
        let (mut best, mut arg) = (0.0, 0.0);
        for k in 1..60_000 {
            let w = k as f64 * 1e-4;
            let v = spectral_density(&s, w).unwrap();
            if v > best {
                best = v;
                arg = w;
            }
        }
        assert!((arg - 3.0).abs() < 2e-4);
    }

    #[test]
    fn thermal_values() {
        let s = ohmic_high();
        assert_eq!(thermal_factor(&s, 1.0).unwrap(), 200.0);
        assert_eq!(thermal_factor(&s, 0.5).unwrap(), 400.0);
        assert!(thermal_factor(&s, 0.0).is_err());
        let z = ReservoirSpec {
            temp: Temperature::Zero,
            ..s
        };
        assert_eq!(thermal_factor(&z, 123.0).unwrap(), 1.0);
    }

    #[test]
    fn validation() {
        assert!(ReservoirSpec::new(Family::Ohmic, 0.0, 0.1, Temperature::Zero).is_err());
        assert!(ReservoirSpec::new(Family::Ohmic, 1.0, 0.6, Temperature::Zero).is_err());
        assert!(
            ReservoirSpec::new(Family::Ohmic, 1.0, 0.1, Temperature::High { theta: 5.0 }).is_err()
        );
        let s = ReservoirSpec::new(Family::Ohmic, 1.0, 0.3, Temperature::Zero).unwrap();
        assert!(s.weak_coupling_warning());
    }

    #[test]
    fn parsing() {
        assert_eq!("sub-ohmic".parse::<Family>().unwrap(), Family::SubOhmic);
        assert_eq!(
            "high:100".parse::<Temperature>().unwrap(),
            Temperature::High { theta: 100.0 }
        );
        assert_eq!("zero".parse::<Temperature>().unwrap(), Temperature::Zero);
        assert!("warm".parse::<Temperature>().is_err());
    }
}
