//! CSV, JSON and plain-text rendering of solved designs and tables.
//!
//! CSV files open with a versioned `#` comment line so golden files can
//! detect schema drift; the JSON forms carry the same schema tag. Floats
//! are written in Rust's shortest round-trip form unless the two-decimal
//! display convention is requested.

use armalloc_core::{
    OptimalRatioReport, ReductionRow, SimEstimate, StageDesign, SweepTable,
};
use serde_json::json;
use std::io::{self, Write};

pub const SWEEP_SCHEMA: &str = "armalloc.sweep.v1";
pub const DESIGN_SCHEMA: &str = "armalloc.design.v1";
pub const REDUCTION_SCHEMA: &str = "armalloc.reduction.v1";

/// Two-decimal proportions when set, shortest round-trip otherwise.
#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub paper_format: bool,
}

impl Style {
    fn prop(&self, x: f64) -> String {
        if self.paper_format {
            format!("{x:.2}")
        } else {
            format!("{x}")
        }
    }
}

pub fn write_design_text(
    out: &mut dyn Write,
    design: &StageDesign,
    style: &Style,
) -> io::Result<()> {
    let (n_label, extra) = match design {
        StageDesign::Single(_) => ("per-arm n", String::new()),
        StageDesign::TwoStage(_) => ("per-arm n (per stage)", " per stage".to_string()),
    };
    writeln!(out, "critical value C = {:.6}", design.critical_value())?;
    writeln!(out, "{n_label} = {}", design.per_arm_n())?;
    writeln!(out, "control n{extra} = {}", design.control_n())?;
    writeln!(out, "total N = {}", design.total_n())?;
    writeln!(out, "achieved alpha = {}", style.prop(design.achieved_alpha()))?;
    writeln!(out, "achieved power = {}", style.prop(design.achieved_power()))
}

pub fn design_json(design: &StageDesign) -> serde_json::Value {
    json!({
        "schema": DESIGN_SCHEMA,
        "critical_value": design.critical_value(),
        "per_arm_n": design.per_arm_n(),
        "control_n": design.control_n(),
        "total_n": design.total_n(),
        "achieved_alpha": design.achieved_alpha(),
        "achieved_power": design.achieved_power(),
    })
}

pub fn write_design_csv(
    out: &mut dyn Write,
    design: &StageDesign,
    style: &Style,
) -> io::Result<()> {
    writeln!(out, "# {DESIGN_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["C", "n", "control_n", "N", "achieved_alpha", "achieved_power"])?;
    w.write_record([
        format!("{}", design.critical_value()),
        design.per_arm_n().to_string(),
        design.control_n().to_string(),
        design.total_n().to_string(),
        style.prop(design.achieved_alpha()),
        style.prop(design.achieved_power()),
    ])?;
    w.flush()
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "R",
    "C",
    "n",
    "control_n",
    "N",
    "N_minus_baseline",
    "N_over_baseline",
    "n_reduction",
    "n_over_baseline",
];

pub fn write_sweep_csv(
    out: &mut dyn Write,
    table: &SweepTable,
    style: &Style,
) -> io::Result<()> {
    writeln!(out, "# {SWEEP_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for row in &table.rows {
        w.write_record([
            format!("{:.1}", row.ratio),
            format!("{}", row.design.critical_value()),
            row.design.per_arm_n().to_string(),
            row.design.control_n().to_string(),
            row.design.total_n().to_string(),
            row.n_vs_baseline.to_string(),
            style.prop(row.proportion_vs_baseline),
            row.per_arm_reduction.to_string(),
            style.prop(row.per_arm_proportion),
        ])?;
    }
    w.flush()
}

pub fn sweep_json(table: &SweepTable) -> serde_json::Value {
    json!({
        "schema": SWEEP_SCHEMA,
        "baseline_total_n": table.baseline.total_n(),
        "rows": table.rows.iter().map(|row| json!({
            "R": row.ratio,
            "C": row.design.critical_value(),
            "n": row.design.per_arm_n(),
            "control_n": row.design.control_n(),
            "N": row.design.total_n(),
            "N_minus_baseline": row.n_vs_baseline,
            "N_over_baseline": row.proportion_vs_baseline,
            "n_reduction": row.per_arm_reduction,
            "n_over_baseline": row.per_arm_proportion,
        })).collect::<Vec<_>>(),
    })
}

/// Plot-ready (R, N) curve for external plotting tools.
pub fn write_plot_csv(out: &mut dyn Write, table: &SweepTable) -> io::Result<()> {
    writeln!(out, "# {SWEEP_SCHEMA}.plot")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["R", "N"])?;
    for row in &table.rows {
        w.write_record([format!("{:.1}", row.ratio), row.design.total_n().to_string()])?;
    }
    w.flush()
}

pub fn write_rop_text(out: &mut dyn Write, report: &OptimalRatioReport) -> io::Result<()> {
    if report.r_op_low == report.r_op_high {
        writeln!(out, "R_OP = {:.1}", report.r_op_low)?;
    } else {
        writeln!(out, "R_OP = {:.1}-{:.1}", report.r_op_low, report.r_op_high)?;
    }
    writeln!(out, "minimal total N = {}", report.min_total_n)
}

pub fn rop_json(report: &OptimalRatioReport) -> serde_json::Value {
    json!({
        "r_op_low": report.r_op_low,
        "r_op_high": report.r_op_high,
        "min_total_n": report.min_total_n,
    })
}

pub fn write_reduction_csv(
    out: &mut dyn Write,
    rows: &[ReductionRow],
    style: &Style,
) -> io::Result<()> {
    writeln!(out, "# {REDUCTION_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["R", "n", "N", "n_reduction", "n_over_baseline", "exceeds_budget"])?;
    for row in rows {
        w.write_record([
            format!("{:.1}", row.ratio),
            row.per_arm_n.to_string(),
            row.total_n.to_string(),
            row.reduction.to_string(),
            style.prop(row.proportion),
            row.exceeds_budget.to_string(),
        ])?;
    }
    w.flush()
}

pub fn write_reduction_text(
    out: &mut dyn Write,
    rows: &[ReductionRow],
    style: &Style,
) -> io::Result<()> {
    for row in rows {
        let star = if row.exceeds_budget { " (*)" } else { "" };
        writeln!(
            out,
            "R = {:.1}: n = {}, N = {}, reduction {} ({}){star}",
            row.ratio,
            row.per_arm_n,
            row.total_n,
            row.reduction,
            style.prop(row.proportion),
        )?;
    }
    Ok(())
}

pub fn reduction_json(rows: &[ReductionRow]) -> serde_json::Value {
    json!({
        "schema": REDUCTION_SCHEMA,
        "rows": rows,
    })
}

pub fn write_sim_text(out: &mut dyn Write, est: &SimEstimate) -> io::Result<()> {
    writeln!(out, "estimate = {}", est.estimate)?;
    writeln!(out, "std error = {}", est.std_error)?;
    writeln!(out, "replicates = {}", est.replicates)?;
    writeln!(out, "seed = {}", est.seed)
}
