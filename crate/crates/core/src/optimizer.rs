use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{key_metrics, KeyMetrics};
use crate::params::{SystemParams, TopologyPlan};

/// A network to plan: physics, user count, and span lengths. The split ratio
/// is the free variable the optimizer chooses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub params: SystemParams,
    pub n_users: u32,
    pub l1_km: f64,
    pub l2_km: f64,
}

impl Scenario {
    pub fn new(params: SystemParams, n_users: u32, l1_km: f64, l2_km: f64) -> Result<Self> {
        let scenario = Scenario {
            params,
            n_users,
            l1_km,
            l2_km,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_users < 2 {
            return Err(Error::InvalidParam {
                name: "n_users",
                value: self.n_users as f64,
                constraint: "a splitting tree needs at least 2 users",
            });
        }
        if !(self.l1_km >= 0.0 && self.l1_km.is_finite()) {
            return Err(Error::InvalidParam {
                name: "l1_km",
                value: self.l1_km,
                constraint: "must be nonnegative and finite",
            });
        }
        if !(self.l2_km >= 0.0 && self.l2_km.is_finite()) {
            return Err(Error::InvalidParam {
                name: "l2_km",
                value: self.l2_km,
                constraint: "must be nonnegative and finite",
            });
        }
        if self.l1_km + self.l2_km <= 0.0 {
            return Err(Error::InvalidParam {
                name: "l1_km + l2_km",
                value: 0.0,
                constraint: "total span must be positive",
            });
        }
        Ok(())
    }

    /// Concrete plan with the central-office ratio fixed.
    pub fn plan(&self, n1: u32) -> Result<TopologyPlan> {
        TopologyPlan::new(self.n_users, n1, self.l1_km, self.l2_km)
    }

    fn t_fiber(&self) -> f64 {
        10f64.powf(-self.params.alpha_db_per_km * (self.l1_km + self.l2_km) / 10.0)
    }

    /// QBER with the split ratio treated as a real number.
    fn qber_at(&self, n1: f64) -> Result<f64> {
        let p = &self.params;
        let signal = 2.0 * p.mu * p.eta * self.t_fiber() * n1;
        if signal.is_nan() || signal <= 0.0 {
            return Err(Error::OpaquePath);
        }
        Ok((1.0 - p.visibility) / 2.0 + p.dark_rate * self.n_users as f64 / signal)
    }

    fn fiber_km(&self, n1: f64) -> f64 {
        n1 * self.l1_km + self.n_users as f64 * self.l2_km
    }
}

/// Where the continuous objective peaks on [1, N].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ContinuousSolution {
    /// The optimality condition changes sign and a root was bracketed.
    Interior { n1: f64 },
    /// Constant-sign condition: the objective is monotone over the scan grid
    /// and the better endpoint is reported instead.
    Boundary { n1: f64 },
}

impl ContinuousSolution {
    /// The interior root, when one exists.
    pub fn interior(self) -> Option<f64> {
        match self {
            ContinuousSolution::Interior { n1 } => Some(n1),
            ContinuousSolution::Boundary { .. } => None,
        }
    }

    /// Location of the maximum regardless of kind.
    pub fn location(self) -> f64 {
        match self {
            ContinuousSolution::Interior { n1 } | ContinuousSolution::Boundary { n1 } => n1,
        }
    }
}

/// One evaluated split ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub n1: u32,
    pub n2: u32,
    pub qber: f64,
    /// NaN when the QBER reaches 0.5 and the entropy bound breaks down.
    pub secure_fraction: f64,
    pub fom: f64,
    pub feasible: bool,
}

/// Outcome of the discrete split-ratio search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    /// Interior root of the stationarity condition, when one exists; a
    /// diagnostic, not the deliverable.
    pub n1_continuous: Option<f64>,
    /// Chosen power-of-2 central-office ratio.
    pub n1_discrete: u32,
    pub n2_discrete: u32,
    /// Metrics at the chosen plan.
    pub metrics: KeyMetrics,
    /// True when the chosen plan keeps a positive secure fraction.
    pub feasible: bool,
    /// Every ratio evaluated, in ascending n1 order.
    pub candidates: Vec<Candidate>,
}

/// Figure of merit with the split ratio continuous and the entropy replaced
/// by its low-QBER approximation h(q) ~ (q - q ln q) / ln 2.
///
/// This is the objective whose derivative [`stationarity_residual`] is; the
/// two must be paired when cross-checking. Discrete selection uses the exact
/// entropy instead.
pub fn continuous_objective(scenario: &Scenario, n1: f64) -> Result<f64> {
    let q = scenario.qber_at(n1)?;
    if q >= 1.0 {
        return Err(Error::ProbabilityOutOfRange { value: q });
    }
    let h_approx = if q == 0.0 {
        0.0
    } else {
        (q - q * q.ln()) / LN_2
    };
    let emu = (-scenario.params.mu).exp();
    Ok((emu * (1.0 - h_approx) - h_approx) / scenario.fiber_km(n1))
}

/// Left-hand side of the first-order optimality condition for the continuous
/// objective, arranged so that a sign change brackets the interior maximum.
/// The residual is positive where the objective is locally decreasing in n1.
pub fn stationarity_residual(scenario: &Scenario, n1: f64) -> Result<f64> {
    if !(n1 > 0.0 && n1.is_finite()) {
        return Err(Error::InvalidParam {
            name: "n1",
            value: n1,
            constraint: "must be positive and finite",
        });
    }
    let q = scenario.qber_at(n1)?;
    if q <= 0.0 || q >= 1.0 {
        return Err(Error::InvalidParam {
            name: "qber",
            value: q,
            constraint: "the stationarity condition needs 0 < Q < 1",
        });
    }
    let p = &scenario.params;
    let n = scenario.n_users as f64;
    let emu = (-p.mu).exp();
    let dark_term = n * p.dark_rate * scenario.fiber_km(n1) * (1.0 + emu)
        / (2.0 * p.mu * p.eta * scenario.t_fiber())
        * q.ln();
    let length_term = n1 * n1 * scenario.l1_km * (emu * LN_2 + (1.0 + emu) * (q * q.ln() - q));
    Ok(dark_term + length_term)
}

/// Solves the optimality condition on [1, N] to 1e-10 relative tolerance.
///
/// The residual is scanned over the power-of-2 grid (plus N itself); the
/// first sign change is driven to a root by Brent's method. Without a sign
/// change there is no interior optimum and the endpoint with the better
/// continuous objective is reported.
pub fn solve_continuous(scenario: &Scenario) -> Result<ContinuousSolution> {
    scenario.validate()?;
    let n = scenario.n_users as f64;

    let mut grid: Vec<f64> = Vec::new();
    let mut point = 1u64;
    while (point as f64) < n {
        grid.push(point as f64);
        point *= 2;
    }
    grid.push(n);

    let residuals: Vec<f64> = grid
        .iter()
        .map(|&x| stationarity_residual(scenario, x))
        .collect::<Result<_>>()?;

    for (i, window) in residuals.windows(2).enumerate() {
        if window[0] == 0.0 {
            return Ok(ContinuousSolution::Interior { n1: grid[i] });
        }
        if window[0] * window[1] < 0.0 {
            let root = brent_root(
                |x| stationarity_residual(scenario, x),
                grid[i],
                grid[i + 1],
                1e-10,
            )?;
            return Ok(ContinuousSolution::Interior { n1: root });
        }
    }
    if *residuals.last().unwrap() == 0.0 {
        return Ok(ContinuousSolution::Interior { n1: n });
    }

    let at_lo = continuous_objective(scenario, 1.0)?;
    let at_hi = continuous_objective(scenario, n)?;
    Ok(ContinuousSolution::Boundary {
        n1: if at_lo >= at_hi { 1.0 } else { n },
    })
}

/// Evaluates every power-of-2 split ratio and returns the best feasible plan.
///
/// Selection uses the exact entropy, not the approximation behind the
/// continuous condition, and ties break toward smaller n1 (less fiber).
/// Ratios that push the QBER to 0.5 or beyond stay in the candidate list
/// with NaN fractions. When no candidate is feasible the least-bad one is
/// still chosen and reported with `feasible` unset, so threshold crossings
/// remain visible to callers.
pub fn select_discrete(scenario: &Scenario) -> Result<OptimizationResult> {
    scenario.validate()?;
    if !scenario.n_users.is_power_of_two() {
        return Err(Error::NotPowerOfTwo {
            n_users: scenario.n_users,
        });
    }

    let mut candidates = Vec::new();
    let mut n1 = 1u32;
    while n1 <= scenario.n_users {
        let plan = scenario.plan(n1)?;
        match key_metrics(&scenario.params, &plan) {
            Ok(m) => candidates.push(Candidate {
                n1,
                n2: plan.n2,
                qber: m.qber,
                secure_fraction: m.secure_fraction,
                fom: m.fom,
                feasible: m.is_feasible(),
            }),
            Err(Error::QberAboveHalf { qber }) => candidates.push(Candidate {
                n1,
                n2: plan.n2,
                qber,
                secure_fraction: f64::NAN,
                fom: f64::NAN,
                feasible: false,
            }),
            Err(other) => return Err(other),
        }
        if n1 == scenario.n_users {
            break;
        }
        n1 *= 2;
    }

    let chosen = best_by_fom(candidates.iter().filter(|c| c.feasible))
        .or_else(|| best_by_fom(candidates.iter().filter(|c| c.fom.is_finite())))
        .ok_or(Error::AllCandidatesDegenerate)?;
    let (n1_discrete, n2_discrete, feasible) = (chosen.n1, chosen.n2, chosen.feasible);
    let metrics = key_metrics(&scenario.params, &scenario.plan(n1_discrete)?)?;

    // The continuous diagnostic is unavailable exactly when Q degenerates
    // (e.g. perfect visibility with no dark counts); the discrete answer
    // stands on its own there.
    let n1_continuous = solve_continuous(scenario)
        .ok()
        .and_then(ContinuousSolution::interior);

    Ok(OptimizationResult {
        n1_continuous,
        n1_discrete,
        n2_discrete,
        metrics,
        feasible,
        candidates,
    })
}

/// First strict maximum by figure of merit; iteration order makes ties land
/// on the smallest n1.
fn best_by_fom<'a>(candidates: impl Iterator<Item = &'a Candidate>) -> Option<&'a Candidate> {
    let mut best: Option<&Candidate> = None;
    for candidate in candidates {
        match best {
            Some(current) if candidate.fom <= current.fom => {}
            _ => best = Some(candidate),
        }
    }
    best
}

/// Brent's bracketing root finder; f(a) and f(b) must straddle zero.
fn brent_root(f: impl Fn(f64) -> Result<f64>, x1: f64, x2: f64, rel_tol: f64) -> Result<f64> {
    let (mut a, mut b) = (x1, x2);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    debug_assert!(fa * fb <= 0.0, "brent_root needs a bracketing interval");
    let (mut c, mut fc) = (a, fa);
    let (mut d, mut e) = (b - a, b - a);

    for _ in 0..200 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rel_tol * b.abs();
        let mid = 0.5 * (c - b);
        if mid.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // interpolation step: secant, or inverse quadratic with three points
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * mid * s, 1.0 - s)
            } else {
                let r0 = fa / fc;
                let r1 = fb / fc;
                (
                    s * (2.0 * mid * r0 * (r0 - r1) - (b - a) * (r1 - 1.0)),
                    (r0 - 1.0) * (r1 - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * mid * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = mid;
                e = d;
            }
        } else {
            d = mid;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol * mid.signum() };
        fb = f(b)?;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn defaults(n_users: u32) -> Scenario {
        Scenario::new(SystemParams::default(), n_users, 15.0, 5.0).unwrap()
    }

    #[test]
    fn residual_changes_sign_exactly_once_at_defaults() {
        let scenario = defaults(64);
        let signs: Vec<bool> = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
            .iter()
            .map(|&x| stationarity_residual(&scenario, x).unwrap() > 0.0)
            .collect();
        assert_eq!(signs, [false, false, true, true, true, true, true]);
    }

    #[test]
    fn residual_known_values() {
        let scenario = defaults(64);
        assert_relative_eq!(
            stationarity_residual(&scenario, 1.0).unwrap(),
            -44.208173180508346,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            stationarity_residual(&scenario, 4.0).unwrap(),
            11.960231977569947,
            max_relative = 1e-12
        );
    }

    #[test]
    fn residual_without_dark_counts_keeps_only_the_length_term() {
        let params = SystemParams {
            dark_rate: 0.0,
            ..SystemParams::default()
        };
        let scenario = Scenario::new(params, 64, 15.0, 5.0).unwrap();
        // Q is the constant visibility floor, so the term is positive and
        // scales as n1^2 l1: no interior optimum exists.
        let at_1 = stationarity_residual(&scenario, 1.0).unwrap();
        let at_2 = stationarity_residual(&scenario, 2.0).unwrap();
        assert!(at_1 > 0.0);
        assert_relative_eq!(at_2, 4.0 * at_1, max_relative = 1e-12);
    }

    #[test]
    fn continuous_root_at_defaults() {
        let scenario = defaults(64);
        let root = solve_continuous(&scenario).unwrap().interior().unwrap();
        assert_relative_eq!(root, 3.663082749071691, max_relative = 1e-9);
        let residual = stationarity_residual(&scenario, root).unwrap();
        assert!(residual.abs() < 1e-6, "residual at root: {residual}");
    }

    #[test]
    fn no_feeder_pushes_the_optimum_to_full_office_splitting() {
        let scenario = Scenario::new(SystemParams::default(), 64, 0.0, 20.0).unwrap();
        // with l1 = 0, fiber is constant and QBER falls in n1
        assert_eq!(
            solve_continuous(&scenario).unwrap(),
            ContinuousSolution::Boundary { n1: 64.0 }
        );
        let result = select_discrete(&scenario).unwrap();
        assert_eq!(result.n1_discrete, 64);
        assert_eq!(result.n1_continuous, None);
    }

    #[test]
    fn no_dark_counts_pushes_the_optimum_to_a_single_feeder() {
        let params = SystemParams {
            dark_rate: 0.0,
            ..SystemParams::default()
        };
        let scenario = Scenario::new(params, 64, 15.0, 5.0).unwrap();
        assert_eq!(
            solve_continuous(&scenario).unwrap(),
            ContinuousSolution::Boundary { n1: 1.0 }
        );
        assert_eq!(select_discrete(&scenario).unwrap().n1_discrete, 1);
    }

    #[test]
    fn discrete_selection_at_defaults() {
        for (n, want, fom) in [
            (16u32, 1u32, 0.004941306881737663),
            (32, 2, 0.0024706534408688316),
            (64, 4, 0.0012353267204344158),
            (128, 8, 0.0006176633602172079),
        ] {
            let result = select_discrete(&defaults(n)).unwrap();
            assert_eq!(result.n1_discrete, want, "N = {n}");
            assert_eq!(result.n2_discrete, n / want);
            assert!(result.feasible);
            assert_relative_eq!(result.metrics.fom, fom, max_relative = 1e-14);
            assert_eq!(result.candidates.len(), (n.ilog2() + 1) as usize);
            // the winner dominates every feasible candidate
            for candidate in &result.candidates {
                if candidate.feasible {
                    assert!(result.metrics.fom >= candidate.fom);
                }
            }
        }
    }

    #[test]
    fn continuous_root_is_reported_alongside_the_discrete_answer() {
        let result = select_discrete(&defaults(64)).unwrap();
        let root = result.n1_continuous.unwrap();
        assert!(
            root > 2.0 && root < 4.0,
            "root {root} should sit between the neighbors"
        );
    }

    #[test]
    fn ties_break_toward_less_fiber() {
        // no dark counts and no feeder: every ratio scores identically
        let params = SystemParams {
            dark_rate: 0.0,
            ..SystemParams::default()
        };
        let scenario = Scenario::new(params, 64, 0.0, 20.0).unwrap();
        let result = select_discrete(&scenario).unwrap();
        let foms: Vec<f64> = result.candidates.iter().map(|c| c.fom).collect();
        assert!(foms.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(result.n1_discrete, 1);
    }

    #[test]
    fn infeasible_scenarios_still_report_the_least_bad_plan() {
        // dark counts heavy enough that even full office splitting loses key
        let params = SystemParams {
            dark_rate: 2e-3,
            ..SystemParams::default()
        };
        let scenario = Scenario::new(params, 128, 15.0, 5.0).unwrap();
        let result = select_discrete(&scenario).unwrap();
        assert!(!result.feasible);
        assert_eq!(result.n1_discrete, 128);
        assert!(result.metrics.secure_fraction < 0.0);
        // small ratios push the QBER past 0.5 and surface as NaN candidates
        assert!(result.candidates.iter().any(|c| c.secure_fraction.is_nan()));
        assert!(result.candidates.iter().all(|c| !c.feasible));
    }

    #[test]
    fn fully_degenerate_scenarios_error_out() {
        let params = SystemParams {
            dark_rate: 0.9,
            ..SystemParams::default()
        };
        let scenario = Scenario::new(params, 64, 15.0, 5.0).unwrap();
        assert_eq!(
            select_discrete(&scenario),
            Err(Error::AllCandidatesDegenerate)
        );
    }

    #[test]
    fn non_power_of_two_user_counts_are_rejected() {
        let scenario = Scenario::new(SystemParams::default(), 48, 15.0, 5.0).unwrap();
        assert_eq!(
            select_discrete(&scenario),
            Err(Error::NotPowerOfTwo { n_users: 48 })
        );
    }

    #[test]
    fn scaling_geometry_and_attenuation_together_preserves_the_argmax() {
        for scale in [0.5, 2.0, 10.0] {
            let params = SystemParams {
                alpha_db_per_km: 0.25 / scale,
                ..SystemParams::default()
            };
            let scenario = Scenario::new(params, 64, 15.0 * scale, 5.0 * scale).unwrap();
            let scaled = select_discrete(&scenario).unwrap();
            assert_eq!(scaled.n1_discrete, 4, "scale = {scale}");
            assert_relative_eq!(
                scaled.metrics.fom * scale,
                0.0012353267204344158,
                max_relative = 1e-12
            );
        }
    }
}
