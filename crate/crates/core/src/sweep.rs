use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::key_metrics;
use crate::optimizer::{select_discrete, Scenario};
use crate::params::SystemParams;

/// Which scenario field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Feeder length, with the total span held fixed (the drop shrinks).
    L1Km,
    /// User count; values must be powers of 2.
    NUsers,
    /// Mean photon number.
    Mu,
    /// Dark-count rate.
    DarkRate,
    /// Central-office ratio itself; points are evaluated directly instead of
    /// optimized.
    N1,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::L1Km => "l1_km",
            SweepVariable::NUsers => "n_users",
            SweepVariable::Mu => "mu",
            SweepVariable::DarkRate => "dark_rate",
            SweepVariable::N1 => "n1",
        }
    }
}

/// A one-dimensional sweep: a base scenario plus the values one field walks
/// through.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub base: Scenario,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.values.is_empty() {
            return Err(Error::InvalidSweep {
                reason: "no sweep values given".into(),
            });
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSweep {
                reason: "sweep values must be finite".into(),
            });
        }
        let increasing = self.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        if self.values.len() > 1 && !increasing && !decreasing {
            return Err(Error::InvalidSweep {
                reason: "sweep values must be strictly monotone".into(),
            });
        }
        let span = self.base.l1_km + self.base.l2_km;
        for &value in &self.values {
            match self.variable {
                SweepVariable::L1Km => {
                    if value < 0.0 || value > span {
                        return Err(Error::InvalidSweep {
                            reason: format!(
                                "feeder length {value} must lie within the {span} km span"
                            ),
                        });
                    }
                }
                SweepVariable::NUsers => {
                    if value.fract() != 0.0 || value < 2.0 || value > u32::MAX as f64 {
                        return Err(Error::InvalidSweep {
                            reason: format!("user count {value} must be an integer of at least 2"),
                        });
                    }
                    if !(value as u32).is_power_of_two() {
                        return Err(Error::InvalidSweep {
                            reason: format!("user count {value} must be a power of 2"),
                        });
                    }
                }
                SweepVariable::Mu => {
                    if value.is_nan() || value <= 0.0 {
                        return Err(Error::InvalidSweep {
                            reason: format!("mean photon number {value} must be positive"),
                        });
                    }
                }
                SweepVariable::DarkRate => {
                    if value < 0.0 {
                        return Err(Error::InvalidSweep {
                            reason: format!("dark rate {value} must be nonnegative"),
                        });
                    }
                }
                SweepVariable::N1 => {
                    if value.fract() != 0.0
                        || value < 1.0
                        || value > self.base.n_users as f64
                        || !self.base.n_users.is_multiple_of(value as u32)
                    {
                        return Err(Error::InvalidSweep {
                            reason: format!(
                                "split ratio {value} must be an integer divisor of {}",
                                self.base.n_users
                            ),
                        });
                    }
                }
            }
        }
        // every variable except n1 runs the optimizer, which needs 1x2^I plans
        if self.variable != SweepVariable::N1
            && self.variable != SweepVariable::NUsers
            && !self.base.n_users.is_power_of_two()
        {
            return Err(Error::NotPowerOfTwo {
                n_users: self.base.n_users,
            });
        }
        Ok(())
    }

    /// The scenario at one sweep point.
    fn scenario_at(&self, value: f64) -> Scenario {
        let mut scenario = self.base;
        match self.variable {
            SweepVariable::L1Km => {
                let span = self.base.l1_km + self.base.l2_km;
                scenario.l1_km = value;
                scenario.l2_km = span - value;
            }
            SweepVariable::NUsers => scenario.n_users = value as u32,
            SweepVariable::Mu => scenario.params.mu = value,
            SweepVariable::DarkRate => scenario.params.dark_rate = value,
            SweepVariable::N1 => {}
        }
        scenario
    }
}

/// One sweep point, evaluated at its optimal (or, for n1 sweeps, its given)
/// split ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    /// Name of the swept field.
    pub variable: &'static str,
    /// The swept value itself.
    pub value: f64,
    pub n1_opt: u32,
    pub n2_opt: u32,
    pub log2_n1_opt: f64,
    pub qber: f64,
    pub secure_fraction: f64,
    pub fom: f64,
    pub feasible: bool,
}

/// Runs a sweep. Point order follows the spec; infeasible points are recorded
/// rather than raised. Output is a pure function of the spec.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let variable = spec.variable.name();
    let mut records = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let scenario = spec.scenario_at(value);
        let record = if spec.variable == SweepVariable::N1 {
            let n1 = value as u32;
            let plan = scenario.plan(n1)?;
            match key_metrics(&scenario.params, &plan) {
                Ok(m) => SweepRecord {
                    variable,
                    value,
                    n1_opt: n1,
                    n2_opt: plan.n2,
                    log2_n1_opt: (n1 as f64).log2(),
                    qber: m.qber,
                    secure_fraction: m.secure_fraction,
                    fom: m.fom,
                    feasible: m.is_feasible(),
                },
                Err(Error::QberAboveHalf { qber }) => SweepRecord {
                    variable,
                    value,
                    n1_opt: n1,
                    n2_opt: plan.n2,
                    log2_n1_opt: (n1 as f64).log2(),
                    qber,
                    secure_fraction: f64::NAN,
                    fom: f64::NAN,
                    feasible: false,
                },
                Err(other) => return Err(other),
            }
        } else {
            let result = select_discrete(&scenario)?;
            SweepRecord {
                variable,
                value,
                n1_opt: result.n1_discrete,
                n2_opt: result.n2_discrete,
                log2_n1_opt: (result.n1_discrete as f64).log2(),
                qber: result.metrics.qber,
                secure_fraction: result.metrics.secure_fraction,
                fom: result.metrics.fom,
                feasible: result.feasible,
            }
        };
        records.push(record);
    }
    Ok(records)
}

/// The four canned studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    /// Figure of merit across every split ratio, per user count.
    Fig3,
    /// Optimal ratio versus feeder length, per user count.
    Fig4,
    /// QBER and secure fraction of the optimal plan versus feeder length,
    /// per dark-count rate, at 64 users.
    Fig5,
    /// Optimal ratio and secure fraction versus feeder length, per photon
    /// number, at 64 users.
    Fig6,
}

impl std::str::FromStr for FigurePreset {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        match name {
            "fig3" => Ok(FigurePreset::Fig3),
            "fig4" => Ok(FigurePreset::Fig4),
            "fig5" => Ok(FigurePreset::Fig5),
            "fig6" => Ok(FigurePreset::Fig6),
            other => Err(Error::UnknownPreset { name: other.into() }),
        }
    }
}

/// Knobs on the preset grids; `Default` reproduces the canned studies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresetOptions {
    /// Feeder grid step in km. None keeps the per-preset default: 1 km for
    /// the optimum-versus-feeder studies, 0.5 km for the QBER envelope so
    /// the single-feeder corner at the far end of the span is reached.
    pub l1_step_km: Option<f64>,
    /// Dark-rate family for the envelope study (default 1e-5 and 1e-6).
    pub dark_rates: Option<Vec<f64>>,
    /// Photon-number family for the mu study (default 0.2 through 0.5).
    pub mu_values: Option<Vec<f64>>,
}

/// A sweep labeled with the family member it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSweep {
    pub label: String,
    pub spec: SweepSpec,
}

const USER_FAMILY: [u32; 4] = [16, 32, 64, 128];

/// Returns the fully populated sweeps behind one preset name, in a stable
/// order.
pub fn figure_preset(preset: FigurePreset, options: &PresetOptions) -> Result<Vec<LabeledSweep>> {
    let base = Scenario {
        params: SystemParams::default(),
        n_users: 64,
        l1_km: 15.0,
        l2_km: 5.0,
    };
    let step = |default: f64| options.l1_step_km.unwrap_or(default);

    let sweeps: Vec<LabeledSweep> = match preset {
        FigurePreset::Fig3 => USER_FAMILY
            .iter()
            .map(|&n| LabeledSweep {
                label: format!("n_users={n}"),
                spec: SweepSpec {
                    base: Scenario { n_users: n, ..base },
                    variable: SweepVariable::N1,
                    values: power_of_two_values(n),
                },
            })
            .collect(),
        FigurePreset::Fig4 => USER_FAMILY
            .iter()
            .map(|&n| {
                Ok(LabeledSweep {
                    label: format!("n_users={n}"),
                    spec: SweepSpec {
                        base: Scenario { n_users: n, ..base },
                        variable: SweepVariable::L1Km,
                        values: feeder_grid(20.0, step(1.0))?,
                    },
                })
            })
            .collect::<Result<_>>()?,
        FigurePreset::Fig5 => {
            let rates = options
                .dark_rates
                .clone()
                .unwrap_or_else(|| vec![1e-5, 1e-6]);
            rates
                .iter()
                .map(|&dark_rate| {
                    Ok(LabeledSweep {
                        label: format!("dark_rate={dark_rate:e}"),
                        spec: SweepSpec {
                            base: Scenario {
                                params: SystemParams {
                                    dark_rate,
                                    ..base.params
                                },
                                ..base
                            },
                            variable: SweepVariable::L1Km,
                            values: feeder_grid(20.0, step(0.5))?,
                        },
                    })
                })
                .collect::<Result<_>>()?
        }
        FigurePreset::Fig6 => {
            let mus = options
                .mu_values
                .clone()
                .unwrap_or_else(|| vec![0.2, 0.3, 0.4, 0.5]);
            mus.iter()
                .map(|&mu| {
                    Ok(LabeledSweep {
                        label: format!("mu={mu}"),
                        spec: SweepSpec {
                            base: Scenario {
                                params: SystemParams { mu, ..base.params },
                                ..base
                            },
                            variable: SweepVariable::L1Km,
                            values: feeder_grid(20.0, step(1.0))?,
                        },
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    for sweep in &sweeps {
        sweep.spec.validate()?;
    }
    Ok(sweeps)
}

/// Feeder grid {step, 2 step, ...} keeping at least one step of drop fiber.
fn feeder_grid(span_km: f64, step_km: f64) -> Result<Vec<f64>> {
    if !step_km.is_finite() || step_km <= 0.0 || step_km >= span_km {
        return Err(Error::InvalidSweep {
            reason: format!("feeder step {step_km} must lie in (0, {span_km})"),
        });
    }
    let limit = span_km - step_km + step_km * 1e-9;
    let mut values = Vec::new();
    let mut k = 1u32;
    while k as f64 * step_km <= limit {
        values.push(k as f64 * step_km);
        k += 1;
    }
    Ok(values)
}

fn power_of_two_values(n: u32) -> Vec<f64> {
    let mut values = Vec::new();
    let mut n1 = 1u32;
    loop {
        values.push(n1 as f64);
        if n1 >= n {
            break;
        }
        n1 *= 2;
    }
    values
}

/// Fixed-column CSV for sweep records; computed floats carry 12 significant
/// digits, the swept value keeps its shortest exact form.
pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.variable,
            r.value,
            r.n1_opt,
            r.n2_opt,
            r.log2_n1_opt,
            sig12(r.qber),
            sig12(r.secure_fraction),
            sig12(r.fom),
            r.feasible
        );
    }
    out
}

pub const CSV_HEADER: &str =
    "variable,value,n1_opt,n2_opt,log2_n1_opt,qber,secure_fraction,fom,feasible";

/// Scientific notation with 12 significant digits; NaN and infinities keep
/// their display names.
pub fn sig12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}
