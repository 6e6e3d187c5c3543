//! `tao replicate`: the one-shot artifact pipeline. Solves α for the bundled
//! scenario, runs the tao / sota / always-offload trio on a fixed seed, runs
//! Monte-Carlo ensembles for the cost headline, and writes every figure with
//! its underlying CSV next to it.

use std::collections::BTreeMap;

use tao_core::model::DeviceId;
use tao_core::sim::{histogram_with_range, monte_carlo, run_with_context, SimContext};
use tao_core::thermal::{tabulate, ImpulseResponse};
use tao_core::{RunResult64, Strategy64};

use crate::config::Experiment;
use crate::error::CliResult;
use crate::plot::{HistogramChart, LineChart};
use crate::table::{fixed, num, Table};

use super::{alpha_table, push_summary_rows, solve_all, summary_headers};

pub fn cmd_replicate(exp: &Experiment) -> CliResult<()> {
    // -- 1. the policy: solve alpha* per device ---------------------------
    let solutions = solve_all(exp)?;
    let alpha_t = alpha_table(exp, &solutions);
    print!("{}", alpha_t.render());
    alpha_t.write_csv(&exp.out_dir.join("alpha_solutions.csv"))?;
    let alpha: BTreeMap<DeviceId, f64> = solutions
        .iter()
        .map(|s| (s.device.clone(), s.alpha))
        .collect();

    // tao runs with the TDP guard on: the stationary coin flip alone may
    // admit a request the power cap cannot physically host (most visible when
    // one request draws the whole TDP), and a device would refuse that
    // admission rather than overdraw.
    let trio = [
        ("tao", Strategy64::tao(alpha, true, 0)),
        ("sota", Strategy64::sota()),
        ("always_offload", Strategy64::always_offload()),
    ];

    // -- 2. one fixed-seed run per strategy, sharing the thermal engines --
    let ctx = SimContext::new(&exp.scenario)?;
    let mut runs: Vec<(&str, RunResult64)> = Vec::new();
    for (label, strategy) in &trio {
        runs.push((
            label,
            run_with_context(&ctx, &exp.scenario, strategy, exp.seed)?,
        ));
    }

    let mut summary = Table::new(&summary_headers());
    for (label, result) in &runs {
        push_summary_rows(&mut summary, label, result);
    }
    print!("{}", summary.render());
    summary.write_csv(&exp.out_dir.join("summary.csv"))?;

    // -- 3. figures, each with its sibling CSV ----------------------------
    write_impulse_responses(exp)?;
    for dev in &exp.scenario.devices {
        write_temperature(exp, &runs, &dev.id)?;
    }
    write_battery(exp, &runs)?;
    write_cost(exp, &runs)?;
    write_histogram(exp, &runs)?;

    // -- 4. ensembles for the cost-reduction headline ----------------------
    let mut ens = Table::new(&[
        "strategy",
        "runs",
        "mean_cost",
        "cost_reduction_vs_always_offload_pct",
        "temp_violation_run_fraction",
        "mean_temp_violation_fraction",
        "mean_final_battery_j",
        "min_final_battery_j",
    ]);
    let mut mean_costs: BTreeMap<&str, f64> = BTreeMap::new();
    let mut summaries = Vec::new();
    for (label, strategy) in &trio {
        let s = monte_carlo(&exp.scenario, strategy, exp.runs, exp.seed)?;
        mean_costs.insert(label, s.mean_total_cost);
        summaries.push((*label, s));
    }
    let base = mean_costs["always_offload"];
    for (label, s) in &summaries {
        let min_battery = s
            .rows
            .iter()
            .map(|r| r.total_final_battery_j)
            .fold(f64::INFINITY, f64::min);
        ens.push(vec![
            label.to_string(),
            exp.runs.to_string(),
            num(s.mean_total_cost),
            if base > 0.0 {
                fixed(100.0 * (base - s.mean_total_cost) / base, 2)
            } else {
                String::new()
            },
            num(s.temp_violation_run_fraction),
            num(s.mean_temp_violation_fraction),
            num(s.mean_total_final_battery_j),
            num(min_battery),
        ]);
    }
    print!("{}", ens.render());
    ens.write_csv(&exp.out_dir.join("ensemble.csv"))?;
    if base > 0.0 {
        println!(
            "tao mean cost {} vs always-offload {} over {} runs: {}% reduction",
            fixed(mean_costs["tao"], 3),
            fixed(base, 3),
            exp.runs,
            fixed(100.0 * (base - mean_costs["tao"]) / base, 1),
        );
    }
    println!("artifacts in {}", exp.out_dir.display());
    Ok(())
}

/// Tabulate every device kernel on the export grid; shorter kernels leave
/// blank trailing cells.
fn write_impulse_responses(exp: &Experiment) -> CliResult<()> {
    let dt = exp.trace_dt_out_s;
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for dev in &exp.scenario.devices {
        let tab = tabulate(&dev.thermal, dt)?;
        let ImpulseResponse::Tabulated { samples, .. } = tab else {
            unreachable!("tabulate always yields samples");
        };
        columns.push((dev.id.to_string(), samples));
    }
    let rows = columns.iter().map(|(_, s)| s.len()).max().unwrap_or(0);

    let mut headers = vec!["time_s".to_string()];
    headers.extend(columns.iter().map(|(id, _)| format!("h_{id}_c_per_j")));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new(&header_refs);
    for i in 0..rows {
        let mut row = vec![num(dt * i as f64)];
        for (_, samples) in &columns {
            row.push(samples.get(i).map(|&h| num(h)).unwrap_or_default());
        }
        t.push(row);
    }
    t.write_csv(&exp.out_dir.join("impulse_responses.csv"))?;

    if exp.plots {
        let chart = LineChart {
            title: "Thermal impulse responses".to_string(),
            x_label: "time (s)".to_string(),
            y_label: "h (degC/J)".to_string(),
            series: columns
                .iter()
                .map(|(id, s)| {
                    (
                        id.clone(),
                        s.iter()
                            .enumerate()
                            .map(|(i, &h)| (dt * i as f64, h))
                            .collect(),
                    )
                })
                .collect(),
            h_line: None,
            v_markers: vec![],
            include_y: Some(0.0),
        };
        chart.write(&exp.out_dir.join("impulse_responses.svg"))?;
    }
    Ok(())
}

/// Temperature traces for one device under tao and sota, with the limit line
/// and that device's request arrivals marked.
fn write_temperature(
    exp: &Experiment,
    runs: &[(&str, RunResult64)],
    device: &DeviceId,
) -> CliResult<()> {
    let every = (exp.trace_dt_out_s / exp.scenario.dt_s).round() as usize;
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (label, result) in runs.iter().filter(|(l, _)| *l != "always_offload") {
        let trace = result.device(device)?.traces.temperature.downsample(every);
        series.push((
            label.to_string(),
            (0..trace.len())
                .map(|i| (trace.time_at(i), trace.samples()[i]))
                .collect(),
        ));
    }
    let arrivals: Vec<f64> = runs[0]
        .1
        .requests
        .iter()
        .filter(|r| &r.device == device)
        .map(|r| r.arrival_s)
        .collect();

    let mut headers = vec!["time_s".to_string()];
    headers.extend(series.iter().map(|(l, _)| format!("temp_{l}_c")));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new(&header_refs);
    for i in 0..series[0].1.len() {
        let mut row = vec![num(series[0].1[i].0)];
        for (_, pts) in &series {
            row.push(num(pts[i].1));
        }
        t.push(row);
    }
    t.write_csv(&exp.out_dir.join(format!("temperature_{device}.csv")))?;

    if exp.plots {
        let limit = exp.scenario.temp_limit_c;
        let chart = LineChart {
            title: format!("{device} temperature"),
            x_label: "time (s)".to_string(),
            y_label: "temperature (degC)".to_string(),
            series,
            h_line: Some((limit, format!("limit {limit} degC"))),
            v_markers: arrivals,
            include_y: None,
        };
        chart.write(&exp.out_dir.join(format!("temperature_{device}.svg")))?;
    }
    Ok(())
}

/// Battery evolution per device under tao and sota.
fn write_battery(exp: &Experiment, runs: &[(&str, RunResult64)]) -> CliResult<()> {
    let every = (exp.trace_dt_out_s / exp.scenario.dt_s).round() as usize;
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for dev in &exp.scenario.devices {
        for (label, result) in runs.iter().filter(|(l, _)| *l != "always_offload") {
            let trace = result.device(&dev.id)?.traces.battery.downsample(every);
            series.push((
                format!("{} {label}", dev.id),
                (0..trace.len())
                    .map(|i| (trace.time_at(i), trace.samples()[i]))
                    .collect(),
            ));
        }
    }

    let mut headers = vec!["time_s".to_string()];
    headers.extend(
        series
            .iter()
            .map(|(l, _)| format!("battery_{}_j", l.replace(' ', "_"))),
    );
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new(&header_refs);
    for i in 0..series[0].1.len() {
        let mut row = vec![num(series[0].1[i].0)];
        for (_, pts) in &series {
            row.push(num(pts[i].1));
        }
        t.push(row);
    }
    t.write_csv(&exp.out_dir.join("battery.csv"))?;

    if exp.plots {
        let chart = LineChart {
            title: "Battery evolution".to_string(),
            x_label: "time (s)".to_string(),
            y_label: "battery (J)".to_string(),
            series,
            h_line: None,
            v_markers: vec![],
            include_y: Some(0.0),
        };
        chart.write(&exp.out_dir.join("battery.svg"))?;
    }
    Ok(())
}

/// Total cumulative offload cost (summed over devices) per strategy.
fn write_cost(exp: &Experiment, runs: &[(&str, RunResult64)]) -> CliResult<()> {
    let every = (exp.trace_dt_out_s / exp.scenario.dt_s).round() as usize;
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (label, result) in runs {
        let mut total: Vec<(f64, f64)> = Vec::new();
        for dev in &exp.scenario.devices {
            let trace = result
                .device(&dev.id)?
                .traces
                .cumulative_cost
                .downsample(every);
            if total.is_empty() {
                total = (0..trace.len())
                    .map(|i| (trace.time_at(i), trace.samples()[i]))
                    .collect();
            } else {
                for (i, p) in total.iter_mut().enumerate() {
                    p.1 += trace.samples()[i];
                }
            }
        }
        series.push((label.to_string(), total));
    }

    let mut headers = vec!["time_s".to_string()];
    headers.extend(series.iter().map(|(l, _)| format!("cost_{l}")));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new(&header_refs);
    for i in 0..series[0].1.len() {
        let mut row = vec![num(series[0].1[i].0)];
        for (_, pts) in &series {
            row.push(num(pts[i].1));
        }
        t.push(row);
    }
    t.write_csv(&exp.out_dir.join("cost.csv"))?;

    if exp.plots {
        let chart = LineChart {
            title: "Cumulative offload cost".to_string(),
            x_label: "time (s)".to_string(),
            y_label: "cost (units)".to_string(),
            series,
            h_line: None,
            v_markers: vec![],
            include_y: Some(0.0),
        };
        chart.write(&exp.out_dir.join("cost.svg"))?;
    }
    Ok(())
}

/// Pooled temperature-sample histogram for tao vs sota over shared bin edges.
fn write_histogram(exp: &Experiment, runs: &[(&str, RunResult64)]) -> CliResult<()> {
    let limit = exp.scenario.temp_limit_c;
    let lo = exp
        .scenario
        .devices
        .iter()
        .map(|d| d.ambient_temp_c)
        .fold(f64::INFINITY, f64::min);
    let compared: Vec<&(&str, RunResult64)> = runs
        .iter()
        .filter(|(l, _)| *l != "always_offload")
        .collect();
    let mut hi = lo;
    let mut pooled: Vec<(&str, Vec<f64>)> = Vec::new();
    for (label, result) in &compared {
        let mut samples = Vec::new();
        for d in &result.per_device {
            samples.extend_from_slice(d.traces.temperature.samples());
        }
        hi = hi.max(samples.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        pooled.push((label, samples));
    }

    let mut edges: Vec<f64> = Vec::new();
    let mut masses: Vec<(String, Vec<f64>)> = Vec::new();
    for (label, samples) in &pooled {
        let h = histogram_with_range(samples, lo, hi, limit, exp.histogram_bins)?;
        edges = h.edges.clone();
        masses.push((label.to_string(), h.mass.clone()));
    }

    let mut headers = vec!["bin_lo_c".to_string(), "bin_hi_c".to_string()];
    headers.extend(masses.iter().map(|(l, _)| format!("mass_{l}")));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new(&header_refs);
    for i in 0..exp.histogram_bins {
        let mut row = vec![num(edges[i]), num(edges[i + 1])];
        for (_, mass) in &masses {
            row.push(num(mass[i]));
        }
        t.push(row);
    }
    t.write_csv(&exp.out_dir.join("temperature_histogram.csv"))?;

    if exp.plots {
        let chart = HistogramChart {
            title: "Temperature distribution".to_string(),
            x_label: "temperature (degC)".to_string(),
            y_label: "fraction of time".to_string(),
            edges,
            series: masses,
            v_line: Some((limit, format!("limit {limit} degC"))),
        };
        chart.write(&exp.out_dir.join("temperature_histogram.svg"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commands::tests::fixture_experiment;

    #[test]
    fn emits_the_full_artifact_set_and_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let mut exp = fixture_experiment(
            dir.path(),
            "runs = 4\n[policy]\nmc_runs = 50\nmc_dt_s = 0.5\n",
        );
        exp.out_dir = dir.path().join("out");
        cmd_replicate(&exp).unwrap();

        let files = [
            "alpha_solutions.csv",
            "summary.csv",
            "impulse_responses.csv",
            "impulse_responses.svg",
            "temperature_glass.csv",
            "temperature_glass.svg",
            "battery.csv",
            "battery.svg",
            "cost.csv",
            "cost.svg",
            "temperature_histogram.csv",
            "temperature_histogram.svg",
            "ensemble.csv",
        ];
        let mut first = Vec::new();
        for f in files {
            first.push(std::fs::read(exp.out_dir.join(f)).unwrap());
        }
        // trace CSV row count: horizon 600 s at dt_out 1 s -> 601 + header
        let temp = std::fs::read_to_string(exp.out_dir.join("temperature_glass.csv")).unwrap();
        assert_eq!(temp.lines().count(), 602);

        cmd_replicate(&exp).unwrap();
        for (f, bytes) in files.iter().zip(&first) {
            let again = std::fs::read(exp.out_dir.join(f)).unwrap();
            assert_eq!(&again, bytes, "{f} changed between identical runs");
        }
    }

    #[test]
    fn plots_off_suppresses_svg_but_not_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut exp = fixture_experiment(
            dir.path(),
            "runs = 2\nplots = false\n[policy]\nmc_runs = 50\nmc_dt_s = 0.5\n",
        );
        exp.out_dir = dir.path().join("out");
        cmd_replicate(&exp).unwrap();
        assert!(exp.out_dir.join("cost.csv").exists());
        assert!(!exp.out_dir.join("cost.svg").exists());
    }
}
