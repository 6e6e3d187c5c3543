//! `tao compare`: Monte-Carlo ensembles for every configured strategy and a
//! pairwise cost-reduction matrix.

use tao_core::sim::monte_carlo;

use crate::config::Experiment;
use crate::error::{CliError, CliResult};
use crate::table::{fixed, num, Table};

use super::{resolve_strategies, ResolvedStrategy};

pub fn cmd_compare(exp: &Experiment) -> CliResult<()> {
    let strategies = resolve_strategies(exp)?;
    if strategies.len() < 2 {
        return Err(CliError::config(
            "compare needs at least two strategies (use --strategy or [[strategies]])",
        ));
    }

    let mut summaries = Vec::with_capacity(strategies.len());
    for rs in &strategies {
        let s = monte_carlo(&exp.scenario, &rs.strategy, exp.runs, exp.seed)?;
        summaries.push(s);
    }

    let mut table = Table::new(&[
        "strategy",
        "runs",
        "mean_cost",
        "mean_local",
        "mean_offloaded",
        "mean_final_battery_j",
        "mean_max_temp_c",
        "max_max_temp_c",
        "temp_violation_run_fraction",
        "any_violation_run_fraction",
        "thermally_safe",
    ]);
    for (rs, s) in strategies.iter().zip(&summaries) {
        table.push(vec![
            rs.label.clone(),
            exp.runs.to_string(),
            num(s.mean_total_cost),
            num(s.mean_total_local),
            num(s.mean_total_offloaded),
            num(s.mean_total_final_battery_j),
            num(s.mean_max_temp_c),
            num(s.max_max_temp_c),
            num(s.temp_violation_run_fraction),
            num(s.any_violation_run_fraction),
            if s.temp_violation_run_fraction > 0.0 {
                "no (!)".to_string()
            } else {
                "yes".to_string()
            },
        ]);
    }
    print!("{}", table.render());
    table.write_csv(&exp.out_dir.join("compare.csv"))?;

    let deltas = cost_delta_table(&strategies, &summaries);
    print!("{}", deltas.render());
    let path = exp.out_dir.join("cost_deltas.csv");
    deltas.write_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// `cell[s][b]` = percent cost reduction of strategy `s` relative to baseline
/// `b`; blank when the baseline spends nothing.
fn cost_delta_table(
    strategies: &[ResolvedStrategy],
    summaries: &[tao_core::sim::EnsembleSummary<f64>],
) -> Table {
    let mut headers = vec!["strategy".to_string()];
    headers.extend(strategies.iter().map(|r| format!("vs_{}", r.label)));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new(&header_refs);
    for (rs, s) in strategies.iter().zip(summaries) {
        let mut row = vec![rs.label.clone()];
        for base in summaries {
            if base.mean_total_cost <= 0.0 {
                row.push(String::new());
            } else {
                let pct = 100.0 * (base.mean_total_cost - s.mean_total_cost)
                    / base.mean_total_cost;
                row.push(fixed(pct, 2));
            }
        }
        t.push(row);
    }
    t
}
