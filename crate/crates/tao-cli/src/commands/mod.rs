//! Subcommand implementations and the plumbing they share.

mod compare;
mod replicate;
mod simulate;
mod solve_alpha;

pub use compare::cmd_compare;
pub use replicate::cmd_replicate;
pub use simulate::cmd_simulate;
pub use solve_alpha::cmd_solve_alpha;

use std::collections::BTreeMap;

use tao_core::chance::solve_alpha;
use tao_core::model::{DeviceId, RequestSource};
use tao_core::{AlphaSolution64, RunResult64, Strategy64};

use crate::config::{AlphaSpec, Experiment, StrategySpec};
use crate::error::{CliError, CliResult};
use crate::table::{num, Table};

/// Solve the chance-constrained program for every device, in scenario order.
pub fn solve_all(exp: &Experiment) -> CliResult<Vec<AlphaSolution64>> {
    let rates = match &exp.scenario.source {
        RequestSource::Poisson(rates) => rates,
        RequestSource::Explicit(_) => {
            return Err(CliError::config(
                "solving alpha needs a scenario with poisson arrival rates \
                 (this one lists explicit requests)",
            ))
        }
    };
    exp.scenario
        .devices
        .iter()
        .map(|dev| {
            let rate = rates.get(&dev.id).copied().unwrap_or(0.0);
            solve_alpha(
                dev,
                rate,
                &exp.policy,
                exp.scenario.horizon_s,
                exp.scenario.temp_limit_c,
            )
            .map_err(CliError::from)
        })
        .collect()
}

/// One row per device: α*, binding constraint and all three margins.
pub fn alpha_table(exp: &Experiment, solutions: &[AlphaSolution64]) -> Table {
    let mut t = Table::new(&[
        "device",
        "alpha",
        "binding",
        "margin_power",
        "margin_battery",
        "margin_temperature",
        "omega",
        "mode",
    ]);
    for s in solutions {
        t.push(vec![
            s.device.to_string(),
            num(s.alpha),
            s.binding.as_str().to_string(),
            num(s.margins.power),
            num(s.margins.battery),
            num(s.margins.temperature),
            num(exp.policy.omega),
            exp.policy.mode.as_str().to_string(),
        ]);
    }
    t
}

/// A configured strategy made concrete (alphas resolved), with a unique label
/// for file names and table rows.
#[derive(Debug)]
pub struct ResolvedStrategy {
    pub label: String,
    pub strategy: Strategy64,
}

/// Resolve every configured strategy; `tao` entries with `alpha = "solve"`
/// share one solver pass.
pub fn resolve_strategies(exp: &Experiment) -> CliResult<Vec<ResolvedStrategy>> {
    let mut solved: Option<BTreeMap<DeviceId, f64>> = None;
    let mut out = Vec::with_capacity(exp.strategies.len());
    for spec in &exp.strategies {
        let strategy = match spec {
            StrategySpec::Tao {
                alpha,
                guard,
                rng_seed,
            } => {
                let map = match alpha {
                    AlphaSpec::Solve => {
                        if solved.is_none() {
                            let solutions = solve_all(exp)?;
                            solved = Some(
                                solutions
                                    .into_iter()
                                    .map(|s| (s.device.clone(), s.alpha))
                                    .collect(),
                            );
                        }
                        solved.clone().expect("just solved")
                    }
                    AlphaSpec::Fixed(by_name) => fixed_alpha_map(exp, by_name)?,
                };
                Strategy64::tao(map, *guard, *rng_seed)
            }
            StrategySpec::Sota => Strategy64::sota(),
            StrategySpec::AlwaysOffload => Strategy64::always_offload(),
            StrategySpec::AlwaysLocal => Strategy64::always_local(),
            StrategySpec::Oracle => Strategy64::oracle(),
        };
        out.push(ResolvedStrategy {
            label: spec.name().to_string(),
            strategy,
        });
    }
    // keep labels unique when a strategy appears twice
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for r in &mut out {
        let n = seen.entry(r.label.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            r.label = format!("{}_{n}", r.label);
        }
    }
    Ok(out)
}

fn fixed_alpha_map(
    exp: &Experiment,
    by_name: &BTreeMap<String, f64>,
) -> CliResult<BTreeMap<DeviceId, f64>> {
    let mut map = BTreeMap::new();
    for dev in &exp.scenario.devices {
        let a = by_name.get(dev.id.as_str()).copied().ok_or_else(|| {
            CliError::config(format!(
                "strategy `tao`: no alpha given for device `{}`",
                dev.id
            ))
        })?;
        map.insert(dev.id.clone(), a);
    }
    for name in by_name.keys() {
        if !map.contains_key(&DeviceId::from(name.as_str())) {
            return Err(CliError::config(format!(
                "strategy `tao`: alpha names unknown device `{name}`"
            )));
        }
    }
    Ok(map)
}

/// Per-device trace table: `time_s,power_w,temp_c,battery_j,cost`,
/// downsampled to the export grid.
pub fn trace_table(exp: &Experiment, result: &RunResult64, device: &DeviceId) -> CliResult<Table> {
    let dev = result.device(device)?;
    let every = (exp.trace_dt_out_s / exp.scenario.dt_s).round() as usize;
    let power = dev.traces.power.downsample(every);
    let temp = dev.traces.temperature.downsample(every);
    let battery = dev.traces.battery.downsample(every);
    let cost = dev.traces.cumulative_cost.downsample(every);
    let mut t = Table::new(&["time_s", "power_w", "temp_c", "battery_j", "cost"]);
    for i in 0..power.len() {
        t.push(vec![
            num(power.time_at(i)),
            num(power.samples()[i]),
            num(temp.samples()[i]),
            num(battery.samples()[i]),
            num(cost.samples()[i]),
        ]);
    }
    Ok(t)
}

pub fn summary_headers() -> Vec<&'static str> {
    vec![
        "strategy",
        "device",
        "n_local",
        "n_offloaded",
        "total_cost",
        "max_power_w",
        "max_temp_c",
        "temp_violation_fraction",
        "final_battery_j",
        "violated_power",
        "violated_battery",
        "violated_temperature",
    ]
}

/// Append per-device rows plus an `all` roll-up row for one run.
pub fn push_summary_rows(t: &mut Table, label: &str, result: &RunResult64) {
    for d in &result.per_device {
        let m = &d.metrics;
        t.push(vec![
            label.to_string(),
            d.device.to_string(),
            m.n_local.to_string(),
            m.n_offloaded.to_string(),
            num(m.total_cost),
            num(m.max_power_w),
            num(m.max_temp_c),
            num(m.temp_violation_fraction),
            num(m.final_battery_j),
            m.violated_power.to_string(),
            m.violated_battery.to_string(),
            m.violated_temperature.to_string(),
        ]);
    }
    t.push(vec![
        label.to_string(),
        "all".to_string(),
        result.total_local().to_string(),
        result.total_offloaded().to_string(),
        num(result.total_cost()),
        num(result
            .per_device
            .iter()
            .map(|d| d.metrics.max_power_w)
            .fold(f64::NEG_INFINITY, f64::max)),
        num(result.max_temp_c()),
        num(result.pooled_temp_violation_fraction()),
        num(result.total_final_battery_j()),
        result
            .per_device
            .iter()
            .any(|d| d.metrics.violated_power)
            .to_string(),
        result
            .per_device
            .iter()
            .any(|d| d.metrics.violated_battery)
            .to_string(),
        result.any_temperature_violation().to_string(),
    ]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;
    use std::path::{Path, PathBuf};

    pub(crate) fn fixture_experiment(dir: &Path, extra: &str) -> Experiment {
        let scenario = r#"
horizon_s = 600.0
dt_s = 0.5

[[devices]]
id = "glass"
tdp_watts = 2.0
battery_joules = 50000.0
request_power_watts = 0.6
request_duration_s = 65.0
ambient_temp_c = 25.0

[devices.thermal]
kind = "parametric"
stages = [{ r_th_c_per_w = 8.0, theta_s = 80.0 }]
truncation_horizon_s = 560.0

[poisson]
rate_per_s = { glass = 0.00833 }
"#;
        std::fs::write(dir.join("test.scenario"), scenario).unwrap();
        let cfg = format!("scenario = \"test.scenario\"\n{extra}");
        let cfg_path: PathBuf = dir.join("exp.toml");
        std::fs::write(&cfg_path, cfg).unwrap();
        crate::config::load_experiment(&cfg_path, &Overrides::default()).unwrap()
    }

    #[test]
    fn solve_all_covers_every_device() {
        let dir = tempfile::tempdir().unwrap();
        let mut exp = fixture_experiment(dir.path(), "[policy]\nmc_runs = 60\nmc_dt_s = 0.5\n");
        exp.policy.mc_dt_s = 0.5;
        let sols = solve_all(&exp).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].device.as_str(), "glass");
        assert!(sols[0].alpha > 0.0 && sols[0].alpha <= 1.0);
        let t = alpha_table(&exp, &sols);
        assert_eq!(t.rows.len(), 1);
    }

    #[test]
    fn duplicate_strategies_get_distinct_labels() {
        let dir = tempfile::tempdir().unwrap();
        let mut exp = fixture_experiment(dir.path(), "");
        exp.strategies = vec![StrategySpec::Sota, StrategySpec::Sota];
        let resolved = resolve_strategies(&exp).unwrap();
        assert_eq!(resolved[0].label, "sota");
        assert_eq!(resolved[1].label, "sota_2");
    }

    #[test]
    fn fixed_alpha_must_cover_all_devices() {
        let dir = tempfile::tempdir().unwrap();
        let mut exp = fixture_experiment(dir.path(), "");
        exp.strategies = vec![StrategySpec::Tao {
            alpha: AlphaSpec::Fixed([("watch".to_string(), 0.5)].into_iter().collect()),
            guard: false,
            rng_seed: 0,
        }];
        let err = resolve_strategies(&exp).unwrap_err();
        assert!(err.to_string().contains("glass"));
    }

    #[test]
    fn trace_table_downsamples_to_the_export_grid() {
        let dir = tempfile::tempdir().unwrap();
        let mut exp = fixture_experiment(dir.path(), "");
        exp.strategies = vec![StrategySpec::AlwaysOffload];
        let resolved = resolve_strategies(&exp).unwrap();
        let result = tao_core::sim::run(&exp.scenario, &resolved[0].strategy, 1).unwrap();
        let t = trace_table(&exp, &result, &DeviceId::from("glass")).unwrap();
        // 600 s at dt_out 1 s -> 601 data rows
        assert_eq!(t.rows.len(), 601);
        assert_eq!(t.rows[0][0], "0");
        assert_eq!(t.rows[600][0], "600");
    }
}
