//! Experiment configuration: one TOML file plus command-line overrides.
//!
//! ```toml
//! scenario = "scenarios/replication.scenario"  # path, or an inline [scenario] table
//! out_dir = "out/replication"
//! seed = 7
//! runs = 200
//! plots = true
//!
//! [policy]
//! omega = 0.95
//! mode = "busy_server"   # or "paper"
//! mc_runs = 1000
//! mc_seed = 11
//! mc_dt_s = 0.1
//!
//! [[strategies]]
//! name = "tao"
//! alpha = "solve"        # or per-device: { glass = 0.2, hololens = 1.0 }
//! guard = false
//! rng_seed = 0
//!
//! [[strategies]]
//! name = "always_offload"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use tao_core::chance::LoadMode;
use tao_core::scenario::{load_scenario, parse_scenario};
use tao_core::{ConfidencePolicy64, Scenario64};

use crate::error::{CliError, CliResult};

/// Values a command-line flag may override.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub omega: Option<f64>,
    pub mode: Option<String>,
    pub strategy: Option<String>,
    pub plots: Option<bool>,
}

/// How a `tao` strategy gets its per-device probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    /// Solve the chance-constrained program for each device.
    Solve,
    /// Fixed per-device probabilities, keyed by device id.
    Fixed(BTreeMap<String, f64>),
}

/// A strategy as configured (before any alpha solving).
#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpec {
    Tao {
        alpha: AlphaSpec,
        guard: bool,
        rng_seed: u64,
    },
    Sota,
    AlwaysOffload,
    AlwaysLocal,
    Oracle,
}

impl StrategySpec {
    pub fn name(&self) -> &'static str {
        match self {
            StrategySpec::Tao { .. } => "tao",
            StrategySpec::Sota => "sota",
            StrategySpec::AlwaysOffload => "always_offload",
            StrategySpec::AlwaysLocal => "always_local",
            StrategySpec::Oracle => "oracle",
        }
    }
}

/// Fully resolved experiment: scenario loaded, defaults filled, flags applied.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub scenario: Scenario64,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub runs: usize,
    pub plots: bool,
    /// Trace-export grid step (simulation runs at the scenario's finer dt).
    pub trace_dt_out_s: f64,
    pub histogram_bins: usize,
    pub policy: ConfidencePolicy64,
    pub strategies: Vec<StrategySpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: toml::Value,
    out_dir: Option<String>,
    seed: Option<u64>,
    runs: Option<usize>,
    plots: Option<bool>,
    trace_dt_out_s: Option<f64>,
    histogram_bins: Option<usize>,
    #[serde(default)]
    policy: PolicyFile,
    #[serde(default)]
    strategies: Vec<StrategyFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    omega: Option<f64>,
    mode: Option<String>,
    mc_runs: Option<usize>,
    mc_seed: Option<u64>,
    mc_dt_s: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyFile {
    name: String,
    alpha: Option<AlphaFile>,
    guard: Option<bool>,
    rng_seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AlphaFile {
    Keyword(String),
    PerDevice(BTreeMap<String, f64>),
}

/// Parse `paper` / `busy_server` (hyphen spelling accepted).
pub fn parse_mode(s: &str) -> CliResult<LoadMode> {
    match s.replace('-', "_").as_str() {
        "paper" => Ok(LoadMode::Paper),
        "busy_server" => Ok(LoadMode::BusyServer),
        other => Err(CliError::config(format!(
            "unknown load mode `{other}` (expected `paper` or `busy-server`)"
        ))),
    }
}

/// Load the experiment config at `path` and apply flag overrides.
pub fn load_experiment(path: &Path, ov: &Overrides) -> CliResult<Experiment> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let file: ConfigFile = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));

    let scenario: Scenario64 = match &file.scenario {
        toml::Value::String(rel) => load_scenario(base_dir.join(rel))?,
        toml::Value::Table(_) => {
            let inline = toml::to_string(&file.scenario)
                .map_err(|e| CliError::config(format!("inline scenario: {e}")))?;
            parse_scenario(&inline, base_dir)?
        }
        _ => {
            return Err(CliError::config(
                "`scenario` must be a file path or an inline scenario table",
            ))
        }
    };

    let mut policy = ConfidencePolicy64::default();
    if let Some(omega) = file.policy.omega {
        policy.omega = omega;
    }
    if let Some(mode) = &file.policy.mode {
        policy.mode = parse_mode(mode)?;
    }
    if let Some(n) = file.policy.mc_runs {
        policy.mc_runs = n;
    }
    if let Some(s) = file.policy.mc_seed {
        policy.mc_seed = s;
    }
    if let Some(dt) = file.policy.mc_dt_s {
        policy.mc_dt_s = dt;
    }
    if let Some(omega) = ov.omega {
        policy.omega = omega;
    }
    if let Some(mode) = &ov.mode {
        policy.mode = parse_mode(mode)?;
    }
    policy
        .validate()
        .map_err(|e| CliError::config(e.to_string()))?;

    let strategies = match &ov.strategy {
        Some(list) => list
            .split(',')
            .map(|name| strategy_from_name(name.trim()))
            .collect::<CliResult<Vec<_>>>()?,
        None if file.strategies.is_empty() => vec![
            StrategySpec::Tao {
                alpha: AlphaSpec::Solve,
                guard: false,
                rng_seed: 0,
            },
            StrategySpec::Sota,
            StrategySpec::AlwaysOffload,
        ],
        None => file
            .strategies
            .iter()
            .map(strategy_from_file)
            .collect::<CliResult<Vec<_>>>()?,
    };
    if strategies.is_empty() {
        return Err(CliError::config("no strategies configured"));
    }

    let trace_dt_out_s = file.trace_dt_out_s.unwrap_or(1.0);
    let ratio = trace_dt_out_s / scenario.dt_s;
    if !(trace_dt_out_s > 0.0) || (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9 {
        return Err(CliError::config(format!(
            "trace_dt_out_s = {trace_dt_out_s} must be a whole multiple of the scenario dt {}",
            scenario.dt_s
        )));
    }

    let runs = ov.runs.or(file.runs).unwrap_or(100);
    if runs == 0 {
        return Err(CliError::config("runs must be at least 1"));
    }
    let histogram_bins = file.histogram_bins.unwrap_or(40);
    if histogram_bins == 0 {
        return Err(CliError::config("histogram_bins must be at least 1"));
    }

    Ok(Experiment {
        scenario,
        out_dir: ov
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(file.out_dir.as_deref().unwrap_or("out"))),
        seed: ov.seed.or(file.seed).unwrap_or(0),
        runs,
        plots: ov.plots.or(file.plots).unwrap_or(true),
        trace_dt_out_s,
        histogram_bins,
        policy,
        strategies,
    })
}

fn strategy_from_name(name: &str) -> CliResult<StrategySpec> {
    match name.replace('-', "_").as_str() {
        "tao" => Ok(StrategySpec::Tao {
            alpha: AlphaSpec::Solve,
            guard: false,
            rng_seed: 0,
        }),
        "sota" => Ok(StrategySpec::Sota),
        "always_offload" => Ok(StrategySpec::AlwaysOffload),
        "always_local" => Ok(StrategySpec::AlwaysLocal),
        "oracle" => Ok(StrategySpec::Oracle),
        other => Err(CliError::config(format!(
            "unknown strategy `{other}` (expected tao, sota, always_offload, always_local or oracle)"
        ))),
    }
}

fn strategy_from_file(s: &StrategyFile) -> CliResult<StrategySpec> {
    let base = strategy_from_name(&s.name)?;
    match base {
        StrategySpec::Tao { .. } => {
            let alpha = match &s.alpha {
                None => AlphaSpec::Solve,
                Some(AlphaFile::Keyword(kw)) if kw == "solve" => AlphaSpec::Solve,
                Some(AlphaFile::Keyword(kw)) => {
                    return Err(CliError::config(format!(
                        "strategy `tao`: alpha must be \"solve\" or a per-device table, got \"{kw}\""
                    )))
                }
                Some(AlphaFile::PerDevice(map)) => AlphaSpec::Fixed(map.clone()),
            };
            Ok(StrategySpec::Tao {
                alpha,
                guard: s.guard.unwrap_or(false),
                rng_seed: s.rng_seed.unwrap_or(0),
            })
        }
        other => {
            if s.alpha.is_some() || s.guard.is_some() || s.rng_seed.is_some() {
                return Err(CliError::config(format!(
                    "strategy `{}` takes no alpha/guard/rng_seed parameters",
                    s.name
                )));
            }
            Ok(other)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn scenario_toml() -> &'static str {
        r#"
horizon_s = 600.0
dt_s = 0.5

[[devices]]
id = "glass"
tdp_watts = 2.0
battery_joules = 7560.0
request_power_watts = 0.6
request_duration_s = 65.0
ambient_temp_c = 25.0

[devices.thermal]
kind = "parametric"
stages = [{ r_th_c_per_w = 8.0, theta_s = 80.0 }]
truncation_horizon_s = 560.0

[poisson]
rate_per_s = { glass = 0.00277 }
"#
    }

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let scen_path = dir.join("test.scenario");
        std::fs::write(&scen_path, scenario_toml()).unwrap();
        let cfg_path = dir.join("exp.toml");
        let mut f = std::fs::File::create(&cfg_path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        cfg_path
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), "scenario = \"test.scenario\"\n");
        let exp = load_experiment(&cfg, &Overrides::default()).unwrap();
        assert_eq!(exp.seed, 0);
        assert_eq!(exp.runs, 100);
        assert!(exp.plots);
        assert_eq!(exp.trace_dt_out_s, 1.0);
        assert_eq!(exp.policy.omega, 0.95);
        assert_eq!(exp.strategies.len(), 3);
        assert_eq!(exp.strategies[0].name(), "tao");
        assert_eq!(exp.scenario.devices.len(), 1);
    }

    #[test]
    fn inline_scenario_table_is_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let body = r#"
seed = 3

[scenario]
horizon_s = 600.0
dt_s = 0.5

[[scenario.devices]]
id = "glass"
tdp_watts = 2.0
battery_joules = 7560.0
request_power_watts = 0.6
request_duration_s = 65.0
ambient_temp_c = 25.0

[scenario.devices.thermal]
kind = "parametric"
stages = [{ r_th_c_per_w = 8.0, theta_s = 80.0 }]
truncation_horizon_s = 560.0

[scenario.poisson]
rate_per_s = { glass = 0.00277 }
"#;
        let cfg_path = dir.path().join("exp.toml");
        std::fs::write(&cfg_path, body).unwrap();
        let exp = load_experiment(&cfg_path, &Overrides::default()).unwrap();
        assert_eq!(exp.seed, 3);
        assert_eq!(exp.scenario.horizon_s, 600.0);
        assert_eq!(exp.scenario.devices[0].id.as_str(), "glass");
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "scenario = \"test.scenario\"\nseed = 1\nruns = 5\n[policy]\nomega = 0.9\n",
        );
        let ov = Overrides {
            seed: Some(9),
            runs: Some(7),
            omega: Some(0.99),
            mode: Some("busy-server".into()),
            strategy: Some("sota,always-offload".into()),
            plots: Some(false),
            out: Some(PathBuf::from("elsewhere")),
        };
        let exp = load_experiment(&cfg, &ov).unwrap();
        assert_eq!(exp.seed, 9);
        assert_eq!(exp.runs, 7);
        assert_eq!(exp.policy.omega, 0.99);
        assert_eq!(exp.policy.mode, LoadMode::BusyServer);
        assert!(!exp.plots);
        assert_eq!(exp.out_dir, PathBuf::from("elsewhere"));
        assert_eq!(
            exp.strategies,
            vec![StrategySpec::Sota, StrategySpec::AlwaysOffload]
        );
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), "scenario = \"test.scenario\"\nbanana = 1\n");
        let err = load_experiment(&cfg, &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("banana"));

        let cfg = write_config(dir.path(), "scenario = \"missing.scenario\"\n");
        assert_eq!(
            load_experiment(&cfg, &Overrides::default())
                .unwrap_err()
                .exit_code(),
            2
        );

        let cfg = write_config(
            dir.path(),
            "scenario = \"test.scenario\"\n[[strategies]]\nname = \"magic\"\n",
        );
        let err = load_experiment(&cfg, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("magic"));

        let cfg = write_config(
            dir.path(),
            "scenario = \"test.scenario\"\n[[strategies]]\nname = \"sota\"\nguard = true\n",
        );
        assert!(load_experiment(&cfg, &Overrides::default()).is_err());

        let cfg = write_config(
            dir.path(),
            "scenario = \"test.scenario\"\ntrace_dt_out_s = 0.75\n",
        );
        let err = load_experiment(&cfg, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("whole multiple"));
    }

    #[test]
    fn tao_alpha_forms_parse() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(
            dir.path(),
            "scenario = \"test.scenario\"\n[[strategies]]\nname = \"tao\"\nalpha = { glass = 0.25 }\nguard = true\n",
        );
        let exp = load_experiment(&cfg, &Overrides::default()).unwrap();
        match &exp.strategies[0] {
            StrategySpec::Tao { alpha: AlphaSpec::Fixed(map), guard: true, .. } => {
                assert_eq!(map["glass"], 0.25);
            }
            other => panic!("unexpected strategy {other:?}"),
        }

        let cfg = write_config(
            dir.path(),
            "scenario = \"test.scenario\"\n[[strategies]]\nname = \"tao\"\nalpha = \"guess\"\n",
        );
        assert!(load_experiment(&cfg, &Overrides::default()).is_err());
    }

    #[test]
    fn bad_mode_is_rejected() {
        assert!(parse_mode("paper").is_ok());
        assert_eq!(parse_mode("busy-server").unwrap(), LoadMode::BusyServer);
        assert_eq!(parse_mode("busy_server").unwrap(), LoadMode::BusyServer);
        assert!(parse_mode("quantum").is_err());
    }
}
