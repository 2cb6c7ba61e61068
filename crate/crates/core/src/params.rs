use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical-layer constants of the transmitter, channel, and receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Mean photon number per pulse.
    pub mu: f64,
    /// Detector efficiency.
    pub eta: f64,
    /// Dark-count probability per pulse.
    pub dark_rate: f64,
    /// Interference visibility of the receiver.
    pub visibility: f64,
    /// Fiber attenuation in dB/km.
    pub alpha_db_per_km: f64,
    /// Source repetition rate in pulses per second; only scales absolute rates.
    pub pulse_rate: f64,
}

impl Default for SystemParams {
    /// Typical telecom-band system: mu = 0.40, eta = 0.1, dark rate 1e-5,
    /// visibility 0.98, 0.25 dB/km fiber, 1 GHz source.
    fn default() -> Self {
        SystemParams {
            mu: 0.40,
            eta: 0.1,
            dark_rate: 1e-5,
            visibility: 0.98,
            alpha_db_per_km: 0.25,
            pulse_rate: 1e9,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        check(self.mu, "mu", Positive)?;
        check(self.eta, "eta", UnitInterval)?;
        check(self.dark_rate, "dark_rate", NonNegative)?;
        check(self.visibility, "visibility", UnitInterval)?;
        check(self.alpha_db_per_km, "alpha_db_per_km", NonNegative)?;
        check(self.pulse_rate, "pulse_rate", Positive)?;
        Ok(())
    }
}

/// Network geometry: n_users reached through a 1 x n1 split at the central
/// office followed, after the feeder, by a 1 x n2 split in the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyPlan {
    pub n_users: u32,
    /// Central-office split ratio. This split happens before launch, so it
    /// costs feeder fiber but no photons.
    pub n1: u32,
    /// Field split ratio; the quantum channel pays 1/n2 in transmission.
    pub n2: u32,
    /// Feeder length in km, central office to field splitter.
    pub l1_km: f64,
    /// Drop length in km, field splitter to user.
    pub l2_km: f64,
}

impl TopologyPlan {
    /// Builds a plan from the user count and the central-office ratio; the
    /// field ratio is the cofactor, so n1 must divide n_users.
    pub fn new(n_users: u32, n1: u32, l1_km: f64, l2_km: f64) -> Result<Self> {
        if n_users == 0 {
            return Err(Error::InvalidParam {
                name: "n_users",
                value: 0.0,
                constraint: "at least one user is required",
            });
        }
        if n1 == 0 || n1 > n_users || !n_users.is_multiple_of(n1) {
            return Err(Error::SplitMismatch {
                n_users,
                n1,
                n2: n_users.checked_div(n1).unwrap_or(0),
            });
        }
        let plan = TopologyPlan {
            n_users,
            n1,
            n2: n_users / n1,
            l1_km,
            l2_km,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 || self.n1 as u64 * self.n2 as u64 != self.n_users as u64 {
            return Err(Error::SplitMismatch {
                n_users: self.n_users,
                n1: self.n1,
                n2: self.n2,
            });
        }
        check(self.l1_km, "l1_km", NonNegative)?;
        check(self.l2_km, "l2_km", NonNegative)?;
        Ok(())
    }
}

use Constraint::*;

enum Constraint {
    Positive,
    NonNegative,
    UnitInterval,
}

fn check(value: f64, name: &'static str, constraint: Constraint) -> Result<()> {
    let ok = match constraint {
        Positive => value > 0.0 && value.is_finite(),
        NonNegative => value >= 0.0 && value.is_finite(),
        UnitInterval => value > 0.0 && value <= 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name,
            value,
            constraint: match constraint {
                Positive => "must be positive and finite",
                NonNegative => "must be nonnegative and finite",
                UnitInterval => "must lie in (0, 1]",
            },
        })
    }
}
