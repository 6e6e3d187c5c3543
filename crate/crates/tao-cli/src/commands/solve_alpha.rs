//! `tao solve-alpha`: solve the per-device local-serve probability and report
//! which constraint binds it.

use crate::config::Experiment;
use crate::error::CliResult;

use super::{alpha_table, solve_all};

pub fn cmd_solve_alpha(exp: &Experiment) -> CliResult<()> {
    let solutions = solve_all(exp)?;
    let table = alpha_table(exp, &solutions);
    print!("{}", table.render());
    let path = exp.out_dir.join("alpha_solutions.csv");
    table.write_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
