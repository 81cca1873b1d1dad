//! Parallel experiment driver and the CSV emitters.
//!
//! Replication tasks are mapped through rayon with an order-preserving
//! collect, so the row stream and every aggregate are byte-identical to the
//! serial engine regardless of worker count.

use std::io::Write;
use std::path::Path;

use ordr2_core::gof::PenaltySpec;
use ordr2_core::sim::{aggregate, replication_tasks, run_task, AggRow, SimConfig, SimRow};
use rayon::prelude::*;

use crate::error::CliError;
use crate::table::fmt_float;

pub fn run_experiment_parallel(config: &SimConfig) -> Result<(Vec<SimRow>, Vec<AggRow>), CliError> {
    config.validate()?;
    let tasks = replication_tasks(config);
    let per_task: Result<Vec<Vec<SimRow>>, ordr2_core::Error> =
        tasks.par_iter().map(|task| run_task(config, task)).collect();
    let rows: Vec<SimRow> = per_task?.into_iter().flatten().collect();
    let aggs = aggregate(&rows);
    Ok((rows, aggs))
}

pub const ROWS_HEADER: &str = "setting,n,sigma,r,rep,measure,value,flag";
pub const AGG_HEADER: &str = "setting,n,sigma,r,measure,mean,sd,count";
pub const PENALTY_HEADER: &str = "penalty,r,value";

pub fn write_rows_csv(path: &Path, rows: &[SimRow]) -> Result<(), CliError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(CliError::io(path))?);
    write_rows(&mut out, rows).map_err(CliError::io(path))
}

fn write_rows<W: Write>(out: &mut W, rows: &[SimRow]) -> std::io::Result<()> {
    writeln!(out, "{ROWS_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.setting,
            row.n,
            fmt_float(row.sigma),
            row.r,
            row.rep,
            row.measure,
            fmt_float(row.value),
            row.flag.as_str()
        )?;
    }
    out.flush()
}

pub fn write_agg_csv(path: Option<&Path>, aggs: &[AggRow]) -> Result<(), CliError> {
    match path {
        Some(path) => {
            let mut out =
                std::io::BufWriter::new(std::fs::File::create(path).map_err(CliError::io(path))?);
            write_aggs(&mut out, aggs).map_err(CliError::io(path))
        }
        None => {
            let stdout = std::io::stdout();
            write_aggs(&mut stdout.lock(), aggs).map_err(CliError::io("<stdout>"))
        }
    }
}

fn write_aggs<W: Write>(out: &mut W, aggs: &[AggRow]) -> std::io::Result<()> {
    writeln!(out, "{AGG_HEADER}")?;
    for agg in aggs {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            agg.setting,
            agg.n,
            fmt_float(agg.sigma),
            agg.r,
            agg.measure,
            fmt_float(agg.mean),
            fmt_float(agg.sd),
            agg.count
        )?;
    }
    out.flush()
}

/// Penalty curves for r = 2..=r_max, all six candidates.
pub fn penalty_curves(r_max: u32) -> Vec<(String, u32, f64)> {
    let ids = ["l1", "l2", "l3", "l4", "l5", "l6"];
    let specs = PenaltySpec::CANDIDATES;
    let mut rows = Vec::new();
    for (id, spec) in ids.iter().zip(specs) {
        for r in 2..=r_max {
            rows.push(((*id).to_owned(), r, spec.evaluate(r).expect("r >= 2")));
        }
    }
    rows
}

pub fn write_penalty_csv(path: Option<&Path>, r_max: u32) -> Result<(), CliError> {
    let rows = penalty_curves(r_max);
    let emit = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(out, "{PENALTY_HEADER}")?;
        for (id, r, value) in &rows {
            writeln!(out, "{id},{r},{}", fmt_float(*value))?;
        }
        out.flush()
    };
    match path {
        Some(path) => {
            let mut out =
                std::io::BufWriter::new(std::fs::File::create(path).map_err(CliError::io(path))?);
            emit(&mut out).map_err(CliError::io(path))
        }
        None => {
            let stdout = std::io::stdout();
            emit(&mut stdout.lock()).map_err(CliError::io("<stdout>"))
        }
    }
}
