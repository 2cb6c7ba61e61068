use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{SystemParams, TopologyPlan};

/// Transmission and fiber-plant figures for one plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    /// End-to-end fiber transmission, attenuation only.
    pub t_fiber: f64,
    /// Full path transmission including the field splitter: t_fiber / n2.
    pub t_total: f64,
    /// Total path loss in dB.
    pub loss_db: f64,
    /// Deployed fiber in km: n1 feeder runs plus one drop per user.
    pub fiber_total_km: f64,
}

/// Fraction of light surviving l1 + l2 km of fiber at the given attenuation.
pub fn fiber_transmission(params: &SystemParams, plan: &TopologyPlan) -> f64 {
    10f64.powf(-params.alpha_db_per_km * (plan.l1_km + plan.l2_km) / 10.0)
}

/// Assembles the link budget. Only the field splitter attenuates the quantum
/// channel; the central-office split is upstream of the transmitter, so it
/// multiplies deployed fiber instead.
pub fn link_budget(params: &SystemParams, plan: &TopologyPlan) -> LinkBudget {
    let t_fiber = fiber_transmission(params, plan);
    let t_total = t_fiber / plan.n2 as f64;
    LinkBudget {
        t_fiber,
        t_total,
        loss_db: -10.0 * t_total.log10(),
        fiber_total_km: plan.n1 as f64 * plan.l1_km + plan.n_users as f64 * plan.l2_km,
    }
}

/// Fiber length with the same loss as a 1 x ratio splitter.
pub fn splitter_loss_equivalent_km(ratio: u32, alpha_db_per_km: f64) -> Result<f64> {
    if ratio < 1 {
        return Err(Error::InvalidParam {
            name: "ratio",
            value: ratio as f64,
            constraint: "split ratio must be at least 1",
        });
    }
    if !(alpha_db_per_km > 0.0 && alpha_db_per_km.is_finite()) {
        return Err(Error::ZeroAttenuation);
    }
    Ok(10.0 * (ratio as f64).log10() / alpha_db_per_km)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    #[test]
    fn transmission_matches_db_arithmetic() {
        let plan = TopologyPlan::new(64, 4, 15.0, 5.0).unwrap();
        // 0.25 dB/km over 20 km is 5 dB
        assert_relative_eq!(
            fiber_transmission(&params(), &plan),
            0.31622776601683794,
            max_relative = 1e-15
        );
        let lossless = SystemParams {
            alpha_db_per_km: 0.0,
            ..params()
        };
        assert_eq!(fiber_transmission(&lossless, &plan), 1.0);
        let sparse = SystemParams {
            alpha_db_per_km: 0.2,
            ..params()
        };
        assert_relative_eq!(
            fiber_transmission(&sparse, &plan),
            0.3981071705534972,
            max_relative = 1e-15
        );
    }

    #[test]
    fn budget_at_the_default_plan() {
        let plan = TopologyPlan::new(64, 4, 15.0, 5.0).unwrap();
        let budget = link_budget(&params(), &plan);
        assert_relative_eq!(budget.t_total, 0.01976423537605237, max_relative = 1e-15);
        assert_relative_eq!(budget.loss_db, 17.041199826559247, max_relative = 1e-12);
        assert_eq!(budget.fiber_total_km, 380.0);
    }

    #[test]
    fn budget_extremes_collapse_to_single_stage_forms() {
        let single_feeder = TopologyPlan::new(64, 1, 15.0, 5.0).unwrap();
        let budget = link_budget(&params(), &single_feeder);
        assert_eq!(budget.t_total, budget.t_fiber / 64.0);
        assert_eq!(budget.fiber_total_km, 15.0 + 64.0 * 5.0);

        let all_office = TopologyPlan::new(64, 64, 15.0, 5.0).unwrap();
        let budget = link_budget(&params(), &all_office);
        assert_eq!(budget.t_total, budget.t_fiber);
        assert_eq!(budget.fiber_total_km, 64.0 * 20.0);
    }

    #[test]
    fn splitter_equivalents() {
        assert_eq!(splitter_loss_equivalent_km(1, 0.25).unwrap(), 0.0);
        assert_relative_eq!(
            splitter_loss_equivalent_km(32, 0.2).unwrap(),
            75.2574989159953,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            splitter_loss_equivalent_km(16, 0.25).unwrap(),
            48.16479930623699,
            max_relative = 1e-12
        );
        assert_eq!(
            splitter_loss_equivalent_km(16, 0.0),
            Err(Error::ZeroAttenuation)
        );
        assert!(splitter_loss_equivalent_km(0, 0.25).is_err());
    }
}
