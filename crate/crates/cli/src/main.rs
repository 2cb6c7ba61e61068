//! Command-line surface over the splitter-tree planning library.
//!
//! Every run resolves its inputs from the command line, then an optional
//! JSON config, then built-in defaults; emits one report in JSON, CSV, or
//! human form; and exits 0 on success, 1 on invalid input, or 2 when the
//! requested network cannot carry a positive secure-key rate.

mod args;
mod config;
mod output;

use std::path::Path;

use clap::Parser;
use serde_json::{json, Map, Value};

use args::{
    Cli, Command, EvaluateArgs, Format, MuOptArgs, OptimizeArgs, PresetArgs, SimModeArg,
    SimulateArgs, SweepArgs, SweepVar,
};
use config::Resolved;
use output::{emit, round_floats, sig4, yes_no};
use qkd_pon_core::sweep::sig12;
use qkd_pon_core::{
    figure_preset, key_metrics, link_budget, optimal_mu, records_to_csv, run_sweep,
    select_discrete, simulate_qber, Error, FigurePreset, KeyMetrics, LinkBudget,
    OptimizationResult, PresetOptions, Scenario, SimConfig, SimMode, SimResult, SweepRecord,
    SweepSpec, SweepVariable, TopologyPlan,
};

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version go to stdout with success; usage errors exit 1
            let code = i32::from(err.use_stderr());
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Evaluate(args) => evaluate(args),
        Command::Optimize(args) => optimize(args),
        Command::Sweep(args) => sweep_points(args),
        Command::Preset(args) => preset_family(args),
        Command::Simulate(args) => simulate(args),
        Command::MuOpt(args) => mu_opt(args),
    }
}

/// A run that cannot emit a report: what to tell the user and how to exit.
struct Failure {
    message: String,
    code: i32,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Failure {
        let code = match err {
            // the physics says no: a plan, not the request, is at fault
            Error::QberAboveHalf { .. }
            | Error::AllCandidatesDegenerate
            | Error::NoClicks
            | Error::NoPositiveMu { .. } => 2,
            _ => 1,
        };
        Failure {
            message: err.to_string(),
            code,
        }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Failure {
        Failure { message, code: 1 }
    }
}

/// One finished report in all three renderings.
struct Report {
    json: Value,
    csv: String,
    human: String,
}

fn render(report: Report, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let text = match format {
        Format::Json => {
            let mut value = report.json;
            round_floats(&mut value);
            let mut text =
                serde_json::to_string_pretty(&value).expect("reports are valid JSON trees");
            text.push('\n');
            text
        }
        Format::Csv => report.csv,
        Format::Human => report.human,
    };
    emit(&text, out)?;
    Ok(())
}

/// The resolved parameter block every JSON report echoes back.
fn inputs_json(resolved: &Resolved) -> Map<String, Value> {
    let mut map = Map::new();
    map.insert("users".into(), json!(resolved.n_users));
    map.insert("l1".into(), json!(resolved.l1_km));
    map.insert("l2".into(), json!(resolved.l2_km));
    map.insert("mu".into(), json!(resolved.params.mu));
    map.insert("eta".into(), json!(resolved.params.eta));
    map.insert("dark".into(), json!(resolved.params.dark_rate));
    map.insert("visibility".into(), json!(resolved.params.visibility));
    map.insert(
        "alpha_db_per_km".into(),
        json!(resolved.params.alpha_db_per_km),
    );
    map.insert("pulse_rate".into(), json!(resolved.params.pulse_rate));
    map
}

fn evaluate(args: EvaluateArgs) -> Result<i32, Failure> {
    let resolved = Resolved::from_args(&args.common, args.n1)?;
    resolved.params.validate()?;
    let n1 = resolved.require_n1("evaluate")?;
    let plan = TopologyPlan::new(resolved.n_users, n1, resolved.l1_km, resolved.l2_km)?;
    let metrics = key_metrics(&resolved.params, &plan)?;
    let budget = link_budget(&resolved.params, &plan);

    let mut inputs = inputs_json(&resolved);
    inputs.insert("n1".into(), json!(n1));
    let report = Report {
        json: json!({
            "inputs": inputs,
            "result": {
                "plan": plan,
                "budget": budget,
                "metrics": metrics,
                "feasible": metrics.is_feasible(),
            }
        }),
        csv: evaluate_csv(&plan, &budget, &metrics),
        human: evaluate_human(&plan, &budget, &metrics),
    };
    render(report, resolved.format, resolved.out.as_deref())?;
    Ok(if metrics.is_feasible() { 0 } else { 2 })
}

fn evaluate_csv(plan: &TopologyPlan, budget: &LinkBudget, metrics: &KeyMetrics) -> String {
    let mut out = String::from(
        "n1,n2,qber,secure_fraction,sifted_rate,secure_rate,fom,\
         t_fiber,t_total,loss_db,fiber_total_km,feasible\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
        plan.n1,
        plan.n2,
        sig12(metrics.qber),
        sig12(metrics.secure_fraction),
        sig12(metrics.sifted_rate),
        sig12(metrics.secure_rate),
        sig12(metrics.fom),
        sig12(budget.t_fiber),
        sig12(budget.t_total),
        sig12(budget.loss_db),
        sig12(budget.fiber_total_km),
        metrics.is_feasible(),
    ));
    out
}

fn evaluate_human(plan: &TopologyPlan, budget: &LinkBudget, metrics: &KeyMetrics) -> String {
    format!(
        "plan: {} users = {} (central office) x {} (field), feeder {} km, drop {} km\n\
         loss: {} dB end to end (transmission {}), fiber plant {} km\n\
         qber: {}\n\
         secure fraction: {}\n\
         sifted {} bit/s, secure {} bit/s\n\
         merit: {} per km\n\
         feasible: {}\n",
        plan.n_users,
        plan.n1,
        plan.n2,
        sig4(plan.l1_km),
        sig4(plan.l2_km),
        sig4(budget.loss_db),
        sig4(budget.t_total),
        sig4(budget.fiber_total_km),
        sig4(metrics.qber),
        sig4(metrics.secure_fraction),
        sig4(metrics.sifted_rate),
        sig4(metrics.secure_rate),
        sig4(metrics.fom),
        yes_no(metrics.is_feasible()),
    )
}

fn optimize(args: OptimizeArgs) -> Result<i32, Failure> {
    let resolved = Resolved::from_args(&args.common, None)?;
    let scenario = Scenario::new(
        resolved.params,
        resolved.n_users,
        resolved.l1_km,
        resolved.l2_km,
    )?;
    let result = select_discrete(&scenario)?;

    let report = Report {
        json: json!({
            "inputs": inputs_json(&resolved),
            "result": {
                "n1_continuous": result.n1_continuous,
                "n1": result.n1_discrete,
                "n2": result.n2_discrete,
                "metrics": result.metrics,
                "feasible": result.feasible,
                "candidates": result.candidates,
            }
        }),
        csv: optimize_csv(&result),
        human: optimize_human(&result, resolved.n_users),
    };
    let code = if result.feasible { 0 } else { 2 };
    render(report, resolved.format, resolved.out.as_deref())?;
    Ok(code)
}

fn optimize_csv(result: &OptimizationResult) -> String {
    let root = match result.n1_continuous {
        Some(n1) => sig12(n1),
        None => "none".to_string(),
    };
    let mut out = format!("# n1_continuous={root}\n");
    out.push_str("selected,n1,n2,qber,secure_fraction,fom,feasible\n");
    for candidate in &result.candidates {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            candidate.n1 == result.n1_discrete,
            candidate.n1,
            candidate.n2,
            sig12(candidate.qber),
            sig12(candidate.secure_fraction),
            sig12(candidate.fom),
            candidate.feasible,
        ));
    }
    out
}

fn optimize_human(result: &OptimizationResult, n_users: u32) -> String {
    let root = match result.n1_continuous {
        Some(n1) => format!("interior stationary point at n1 = {}", sig4(n1)),
        None => "no interior stationary point (boundary optimum)".to_string(),
    };
    let mut out = format!(
        "optimal split for {} users: n1 = {} (central office) x n2 = {} (field)\n\
         {root}\n\
         qber {}, secure fraction {}, merit {} per km, feasible: {}\n\
         candidates:\n      n1     n2        qber      secure       merit  feasible\n",
        n_users,
        result.n1_discrete,
        result.n2_discrete,
        sig4(result.metrics.qber),
        sig4(result.metrics.secure_fraction),
        sig4(result.metrics.fom),
        yes_no(result.feasible),
    );
    for candidate in &result.candidates {
        let marker = if candidate.n1 == result.n1_discrete {
            '*'
        } else {
            ' '
        };
        out.push_str(&format!(
            "  {marker} {:>5} {:>6} {:>11} {:>11} {:>11}  {}\n",
            candidate.n1,
            candidate.n2,
            sig4(candidate.qber),
            sig4(candidate.secure_fraction),
            sig4(candidate.fom),
            yes_no(candidate.feasible),
        ));
    }
    out
}

fn sweep_points(args: SweepArgs) -> Result<i32, Failure> {
    let resolved = Resolved::from_args(&args.common, None)?;
    let variable = match args.var {
        SweepVar::L1 => SweepVariable::L1Km,
        SweepVar::Users => SweepVariable::NUsers,
        SweepVar::Mu => SweepVariable::Mu,
        SweepVar::Dark => SweepVariable::DarkRate,
        SweepVar::N1 => SweepVariable::N1,
    };
    let spec = SweepSpec {
        base: Scenario::new(
            resolved.params,
            resolved.n_users,
            resolved.l1_km,
            resolved.l2_km,
        )?,
        variable,
        values: walk(args.from, args.to, args.step)?,
    };
    let records = run_sweep(&spec)?;

    let mut inputs = inputs_json(&resolved);
    inputs.insert("var".into(), json!(variable.name()));
    inputs.insert("from".into(), json!(args.from));
    inputs.insert("to".into(), json!(args.to));
    inputs.insert("step".into(), json!(args.step));
    let report = Report {
        json: json!({ "inputs": inputs, "records": records }),
        csv: records_to_csv(&records),
        human: records_human(&records),
    };
    render(report, resolved.format, resolved.out.as_deref())?;
    Ok(0)
}

/// Inclusive arithmetic walk from --from to --to.
fn walk(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !from.is_finite() || !to.is_finite() || !step.is_finite() || step == 0.0 {
        return Err("sweep bounds and step must be finite, with a nonzero step"
            .to_string()
            .into());
    }
    if (to - from) * step < 0.0 {
        return Err("the step must point from --from toward --to"
            .to_string()
            .into());
    }
    let tolerance = step.abs() * 1e-9;
    let mut values = Vec::new();
    for k in 0..=1_000_000u64 {
        let value = from + k as f64 * step;
        if (step > 0.0 && value > to + tolerance) || (step < 0.0 && value < to - tolerance) {
            return Ok(values);
        }
        values.push(value);
    }
    Err("sweep exceeds 1e6 points".to_string().into())
}

fn preset_family(args: PresetArgs) -> Result<i32, Failure> {
    reject_physics_flags(&args.common)?;
    let resolved = Resolved::from_args(&args.common, None)?;
    let preset: FigurePreset = args.name.parse()?;
    let options = PresetOptions {
        l1_step_km: args.step,
        dark_rates: args.dark_values.clone(),
        mu_values: args.mu_values.clone(),
    };
    let sweeps = figure_preset(preset, &options)?;
    let mut series = Vec::with_capacity(sweeps.len());
    for sweep in &sweeps {
        series.push((sweep.label.clone(), run_sweep(&sweep.spec)?));
    }

    let mut inputs = Map::new();
    inputs.insert("preset".into(), json!(args.name));
    inputs.insert("step".into(), json!(args.step));
    inputs.insert("dark_values".into(), json!(args.dark_values));
    inputs.insert("mu_values".into(), json!(args.mu_values));
    let mut flat = Vec::new();
    for (label, records) in &series {
        for record in records {
            let mut value = serde_json::to_value(record).expect("records serialize");
            value
                .as_object_mut()
                .expect("records are objects")
                .insert("series".into(), json!(label));
            flat.push(value);
        }
    }
    let report = Report {
        json: json!({ "inputs": inputs, "records": flat }),
        csv: preset_csv(&series),
        human: preset_human(&series),
    };
    render(report, resolved.format, resolved.out.as_deref())?;
    Ok(0)
}

/// Preset studies fix the physical parameter set; accepting overrides here
/// would silently produce a different study than the name claims.
fn reject_physics_flags(common: &args::CommonArgs) -> Result<(), Failure> {
    let fixed = [
        ("--users", common.users.is_some()),
        ("--l1", common.l1.is_some()),
        ("--l2", common.l2.is_some()),
        ("--mu", common.mu.is_some()),
        ("--eta", common.eta.is_some()),
        ("--dark", common.dark.is_some()),
        ("--visibility", common.visibility.is_some()),
        ("--alpha-db-per-km", common.alpha_db_per_km.is_some()),
        ("--pulse-rate", common.pulse_rate.is_some()),
    ];
    for (flag, given) in fixed {
        if given {
            return Err(format!(
                "presets fix the physical parameters; {flag} is not allowed \
                 (use the sweep subcommand for custom studies)"
            )
            .into());
        }
    }
    Ok(())
}

fn preset_csv(series: &[(String, Vec<SweepRecord>)]) -> String {
    let mut out = String::new();
    for (index, (label, records)) in series.iter().enumerate() {
        if index > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# {label}\n"));
        out.push_str(&records_to_csv(records));
    }
    out
}

fn preset_human(series: &[(String, Vec<SweepRecord>)]) -> String {
    let mut out = String::new();
    for (index, (label, records)) in series.iter().enumerate() {
        if index > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{label}\n"));
        out.push_str(&records_human(records));
    }
    out
}

fn records_human(records: &[SweepRecord]) -> String {
    let mut out = String::from(
        "variable       value    n1    n2        qber      secure       merit  feasible\n",
    );
    for r in records {
        out.push_str(&format!(
            "{:<9} {:>10} {:>5} {:>5} {:>11} {:>11} {:>11}  {}\n",
            r.variable,
            sig4(r.value),
            r.n1_opt,
            r.n2_opt,
            sig4(r.qber),
            sig4(r.secure_fraction),
            sig4(r.fom),
            yes_no(r.feasible),
        ));
    }
    out
}

fn simulate(args: SimulateArgs) -> Result<i32, Failure> {
    let resolved = Resolved::from_args(&args.common, args.n1)?;
    let n1 = resolved.require_n1("simulate")?;
    let plan = TopologyPlan::new(resolved.n_users, n1, resolved.l1_km, resolved.l2_km)?;
    let mode = match args.mode {
        SimModeArg::PerPulse => SimMode::PerPulse,
        SimModeArg::Aggregate => SimMode::Aggregate,
    };
    let config = SimConfig {
        pulses: args
            .pulses
            .or(resolved.pulses)
            .unwrap_or_else(|| mode.default_pulses()),
        seed: args.seed.unwrap_or(resolved.seed),
        mode,
        partitions: args.partitions.unwrap_or(resolved.partitions),
    };
    let result = simulate_qber(&resolved.params, &plan, &config)?;

    let mut inputs = inputs_json(&resolved);
    inputs.insert("n1".into(), json!(n1));
    inputs.insert("pulses".into(), json!(config.pulses));
    inputs.insert("seed".into(), json!(config.seed));
    inputs.insert("mode".into(), json!(config.mode));
    inputs.insert("partitions".into(), json!(config.partitions));
    let report = Report {
        json: json!({ "inputs": inputs, "result": result }),
        csv: simulate_csv(&result),
        human: simulate_human(&config, &result),
    };
    render(report, resolved.format, resolved.out.as_deref())?;
    Ok(0)
}

fn simulate_csv(result: &SimResult) -> String {
    format!(
        "clicks,errors,q_est,q_stderr,sift_fraction,q_expected_full\n{},{},{},{},{},{}\n",
        result.clicks,
        result.errors,
        sig12(result.q_est),
        sig12(result.q_stderr),
        sig12(result.sift_fraction),
        sig12(result.q_expected_full),
    )
}

fn simulate_human(config: &SimConfig, result: &SimResult) -> String {
    let mode = match config.mode {
        SimMode::PerPulse => "per-pulse",
        SimMode::Aggregate => "aggregate",
    };
    format!(
        "simulated {} pulses (seed {}, {mode} mode, {} partitions)\n\
         clicks {} (sift fraction {}), errors {}\n\
         q_est {} +/- {} (one standard error)\n\
         closed-form expectation {}\n",
        config.pulses,
        config.seed,
        config.partitions,
        result.clicks,
        sig4(result.sift_fraction),
        result.errors,
        sig4(result.q_est),
        sig4(result.q_stderr),
        sig4(result.q_expected_full),
    )
}

fn mu_opt(args: MuOptArgs) -> Result<i32, Failure> {
    let resolved = Resolved::from_args(&args.common, None)?;
    let mu = optimal_mu(args.qber)?;

    let mut inputs = inputs_json(&resolved);
    inputs.insert("qber".into(), json!(args.qber));
    let report = Report {
        json: json!({
            "inputs": inputs,
            "result": { "qber_baseline": args.qber, "mu_opt": mu }
        }),
        csv: format!("qber_baseline,mu_opt\n{},{}\n", sig12(args.qber), sig12(mu)),
        human: format!(
            "baseline qber {} -> optimal mu {}\n",
            sig4(args.qber),
            sig4(mu)
        ),
    };
    render(report, resolved.format, resolved.out.as_deref())?;
    Ok(0)
}
