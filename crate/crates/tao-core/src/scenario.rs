//! Scenario files: a TOML document with sections `horizon_s`, `dt_s`,
//! `[limits]`, `[cost]`, `[[devices]]` and exactly one request source —
//! an explicit `[[requests]]` list or a `[poisson]` rate table. All units
//! are SI (seconds, watts, joules, degC).
//!
//! ```toml
//! horizon_s = 3600.0
//! dt_s = 0.1
//!
//! [limits]
//! temperature_c = 43.0        # optional, default 43
//!
//! [cost]
//! offload_unit = 1.0          # optional, default 1
//!
//! [[devices]]
//! id = "glass"
//! tdp_watts = 2.0
//! battery_joules = 7560.0
//! request_power_watts = 0.6
//! request_duration_s = 65.0
//! ambient_temp_c = 25.0
//! idle_power_watts = 0.0      # optional, default 0
//!
//! [devices.thermal]
//! kind = "parametric"
//! truncation_horizon_s = 3500.0
//! stages = [{ r_th_c_per_w = 22.0, theta_s = 50.0 }]
//!
//! [poisson]
//! rate_per_s = { glass = 0.002777777777777778 }
//! ```
//!
//! A device's thermal model may instead point at a CSV tabulation
//! (`kind = "csv"`, `path` relative to the scenario file) or carry inline
//! samples (`kind = "tabulated"`).

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{DeviceSpec, Request, RequestSource, Scenario};
use crate::scalar::{cast, Scalar};
use crate::thermal::csv::load_impulse_csv;
use crate::thermal::{ImpulseResponse, Stage};

pub const DEFAULT_TEMP_LIMIT_C: f64 = 43.0;
pub const DEFAULT_OFFLOAD_UNIT_COST: f64 = 1.0;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    horizon_s: f64,
    dt_s: f64,
    #[serde(default)]
    limits: LimitsFile,
    #[serde(default)]
    cost: CostFile,
    devices: Vec<DeviceFile>,
    requests: Option<Vec<RequestFile>>,
    poisson: Option<PoissonFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitsFile {
    temperature_c: f64,
}

impl Default for LimitsFile {
    fn default() -> Self {
        Self {
            temperature_c: DEFAULT_TEMP_LIMIT_C,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostFile {
    offload_unit: f64,
}

impl Default for CostFile {
    fn default() -> Self {
        Self {
            offload_unit: DEFAULT_OFFLOAD_UNIT_COST,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceFile {
    id: String,
    tdp_watts: f64,
    battery_joules: f64,
    request_power_watts: f64,
    request_duration_s: f64,
    ambient_temp_c: f64,
    #[serde(default)]
    idle_power_watts: f64,
    thermal: ThermalFile,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ThermalFile {
    Parametric {
        stages: Vec<StageFile>,
        truncation_horizon_s: f64,
    },
    Csv {
        path: String,
    },
    Tabulated {
        dt_s: f64,
        samples: Vec<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageFile {
    r_th_c_per_w: f64,
    theta_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestFile {
    id: String,
    device: String,
    arrival_s: f64,
    /// Defaults to the device's `request_duration_s`.
    duration_s: Option<f64>,
    /// Defaults to the device's `request_power_watts`.
    power_watts: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoissonFile {
    rate_per_s: BTreeMap<String, f64>,
}

/// Load and validate a scenario file. Relative thermal CSV paths resolve
/// against the scenario file's directory.
pub fn load_scenario<T: Scalar>(path: impl AsRef<Path>) -> Result<Scenario<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_scenario(&text, base)
        .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))
}

/// Parse scenario TOML; `base_dir` anchors relative thermal CSV paths.
pub fn parse_scenario<T: Scalar>(text: &str, base_dir: &Path) -> Result<Scenario<T>> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| Error::Scenario(e.message().to_string()))?;

    let mut devices = Vec::with_capacity(file.devices.len());
    for dev in &file.devices {
        devices.push(build_device::<T>(dev, base_dir)?);
    }

    let source = match (&file.requests, &file.poisson) {
        (Some(_), Some(_)) => {
            return Err(Error::Scenario(
                "give either [[requests]] or [poisson], not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Scenario(
                "missing request source: add [[requests]] or [poisson]".into(),
            ))
        }
        (Some(requests), None) => {
            let mut out = Vec::with_capacity(requests.len());
            for r in requests {
                let dev = file
                    .devices
                    .iter()
                    .find(|d| d.id == r.device)
                    .ok_or_else(|| Error::UnknownDevice(r.device.clone()))?;
                out.push(Request {
                    id: r.id.as_str().into(),
                    device: r.device.as_str().into(),
                    arrival_s: cast(r.arrival_s),
                    duration_s: cast(r.duration_s.unwrap_or(dev.request_duration_s)),
                    power_watts: cast(r.power_watts.unwrap_or(dev.request_power_watts)),
                });
            }
            RequestSource::Explicit(out)
        }
        (None, Some(poisson)) => {
            let mut rates = BTreeMap::new();
            for (device, rate) in &poisson.rate_per_s {
                rates.insert(device.as_str().into(), cast(*rate));
            }
            RequestSource::Poisson(rates)
        }
    };

    let scenario = Scenario {
        horizon_s: cast(file.horizon_s),
        dt_s: cast(file.dt_s),
        temp_limit_c: cast(file.limits.temperature_c),
        offload_unit_cost: cast(file.cost.offload_unit),
        devices,
        source,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn build_device<T: Scalar>(dev: &DeviceFile, base_dir: &Path) -> Result<DeviceSpec<T>> {
    let thermal = match &dev.thermal {
        ThermalFile::Parametric {
            stages,
            truncation_horizon_s,
        } => ImpulseResponse::parametric(
            stages
                .iter()
                .map(|s| Stage {
                    r_th_c_per_w: cast(s.r_th_c_per_w),
                    theta_s: cast(s.theta_s),
                })
                .collect(),
            cast(*truncation_horizon_s),
        )?,
        ThermalFile::Csv { path } => {
            let p = Path::new(path);
            let resolved = if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            };
            load_impulse_csv(&resolved)?
        }
        ThermalFile::Tabulated { dt_s, samples } => ImpulseResponse::tabulated(
            cast(*dt_s),
            samples.iter().map(|&h| cast(h)).collect(),
        )?,
    };
    Ok(DeviceSpec {
        id: dev.id.as_str().into(),
        tdp_watts: cast(dev.tdp_watts),
        battery_joules: cast(dev.battery_joules),
        request_power_watts: cast(dev.request_power_watts),
        request_duration_s: cast(dev.request_duration_s),
        thermal,
        ambient_temp_c: cast(dev.ambient_temp_c),
        idle_power_watts: cast(dev.idle_power_watts),
    })
}
