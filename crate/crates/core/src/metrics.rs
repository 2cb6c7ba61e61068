use serde::Serialize;

use crate::entropy::binary_entropy;
use crate::error::{Error, Result};
use crate::link::{fiber_transmission, link_budget};
use crate::params::{SystemParams, TopologyPlan};

/// Key-rate figures for one plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyMetrics {
    /// Quantum bit error rate of the sifted key.
    pub qber: f64,
    /// Post-processing survival factor e^{-mu} (1 - h(Q)) - h(Q). Negative
    /// once error correction and privacy amplification cost more than the
    /// sifted key carries; reported as-is so threshold crossings stay visible.
    pub secure_fraction: f64,
    /// Sifted key rate in bits/s.
    pub sifted_rate: f64,
    /// Secure key rate in bits/s: sifted_rate x secure_fraction.
    pub secure_rate: f64,
    /// Figure of merit: secure fraction per km of deployed fiber.
    pub fom: f64,
}

impl KeyMetrics {
    /// A plan is worth deploying only if some secure key survives.
    pub fn is_feasible(&self) -> bool {
        self.secure_fraction > 0.0
    }
}

/// Constant QBER floor set by imperfect interference: (1 - V) / 2.
pub fn visibility_qber(params: &SystemParams) -> f64 {
    (1.0 - params.visibility) / 2.0
}

/// Dark-count QBER contribution at a given full-path transmission:
/// d_B / (2 mu eta t_total).
pub fn dark_count_qber(params: &SystemParams, t_total: f64) -> Result<f64> {
    let signal = 2.0 * params.mu * params.eta * t_total;
    if signal.is_nan() || signal <= 0.0 {
        return Err(Error::OpaquePath);
    }
    Ok(params.dark_rate / signal)
}

/// QBER of a plan: the visibility floor plus a dark-count term that grows
/// with the user count and shrinks as splitting moves to the central office.
pub fn qber(params: &SystemParams, plan: &TopologyPlan) -> Result<f64> {
    let t_fiber = fiber_transmission(params, plan);
    let signal = 2.0 * params.mu * params.eta * t_fiber * plan.n1 as f64;
    if signal.is_nan() || signal <= 0.0 {
        return Err(Error::OpaquePath);
    }
    Ok(visibility_qber(params) + params.dark_rate * plan.n_users as f64 / signal)
}

/// Fraction of the sifted key surviving error correction and privacy
/// amplification: e^{-mu} (1 - h(q)) - h(q).
pub fn secure_fraction(mu: f64, q: f64) -> Result<f64> {
    if q < 0.0 || q.is_nan() {
        return Err(Error::ProbabilityOutOfRange { value: q });
    }
    if q >= 0.5 {
        return Err(Error::QberAboveHalf { qber: q });
    }
    let h = binary_entropy(q)?;
    Ok((-mu).exp() * (1.0 - h) - h)
}

/// Full metric chain for a plan.
pub fn key_metrics(params: &SystemParams, plan: &TopologyPlan) -> Result<KeyMetrics> {
    let budget = link_budget(params, plan);
    if budget.fiber_total_km.is_nan() || budget.fiber_total_km <= 0.0 {
        return Err(Error::InvalidParam {
            name: "fiber_total_km",
            value: budget.fiber_total_km,
            constraint: "deployed fiber must be positive for a figure of merit",
        });
    }
    let q = qber(params, plan)?;
    let fraction = secure_fraction(params.mu, q)?;
    let sifted_rate = params.pulse_rate * params.mu * budget.t_fiber * params.eta / plan.n2 as f64;
    Ok(KeyMetrics {
        qber: q,
        secure_fraction: fraction,
        sifted_rate,
        secure_rate: sifted_rate * fraction,
        fom: fraction / budget.fiber_total_km,
    })
}
