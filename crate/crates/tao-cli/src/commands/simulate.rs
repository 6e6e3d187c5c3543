//! `tao simulate`: one deterministic run per configured strategy, with full
//! trace exports.

use tao_core::sim::{run_with_context, SimContext};

use crate::config::Experiment;
use crate::error::CliResult;
use crate::table::Table;

use super::{push_summary_rows, resolve_strategies, summary_headers, trace_table};

pub fn cmd_simulate(exp: &Experiment) -> CliResult<()> {
    let strategies = resolve_strategies(exp)?;
    let ctx = SimContext::new(&exp.scenario)?;
    let mut summary = Table::new(&summary_headers());
    for rs in &strategies {
        let result = run_with_context(&ctx, &exp.scenario, &rs.strategy, exp.seed)?;
        push_summary_rows(&mut summary, &rs.label, &result);
        for dev in &exp.scenario.devices {
            let t = trace_table(exp, &result, &dev.id)?;
            let path = exp
                .out_dir
                .join(format!("trace_{}_{}.csv", rs.label, dev.id));
            t.write_csv(&path)?;
        }
    }
    print!("{}", summary.render());
    let path = exp.out_dir.join("summary.csv");
    summary.write_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
