//! One-parameter sweeps written as CSV.

use std::io::Write;

use qdiscord::optimizer::{brute_force_oracle, minimize_all_expressions, MeasurementParams};
use qdiscord::{Expression, OptimizerConfig};
use rayon::prelude::*;

use crate::families::StateFamilySpec;
use crate::{format_number, CliError};

pub const HEADER: [&str; 8] =
    ["param", "cond_entropy", "disturbance_gap", "gain_gap", "relent_gap", "theta", "phi", "oracle"];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: StateFamilySpec,
    pub vary: String,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    /// Oracle grid resolution, if the oracle column is wanted.
    pub oracle: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub cond_entropy: f64,
    pub disturbance_gap: f64,
    pub gain_gap: f64,
    pub relent_gap: f64,
    pub angles: Option<(f64, f64)>,
    pub oracle: Option<f64>,
    pub converged: bool,
}

impl SweepSpec {
    /// Parameter values `from + i·step` up to `to`, allowing for rounding in
    /// the last step.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.step.is_nan()
            || self.step <= 0.0
            || !self.from.is_finite()
            || !self.to.is_finite()
            || self.to < self.from
        {
            return Err(CliError::Input(format!("invalid range {}..{} with step {}", self.from, self.to, self.step)));
        }
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        if n > 100_000 {
            return Err(CliError::Input(format!("range produces {n} rows")));
        }
        Ok((0..n).map(|i| self.from + i as f64 * self.step).collect())
    }
}

pub fn run_sweep(spec: &SweepSpec, config: &OptimizerConfig) -> Result<Vec<SweepRow>, CliError> {
    if !spec.base.params.contains_key(&spec.vary) {
        return Err(CliError::Input(format!("family `{}` has no parameter `{}`", spec.base.family, spec.vary)));
    }
    spec.values()?
        .into_par_iter()
        .map(|value| {
            let rho = spec.base.with_param(&spec.vary, value)?.build()?;
            let r = minimize_all_expressions(&rho, "B", config)?;
            let angles = match r.argmin {
                MeasurementParams::Angles { theta, phi } => Some((theta, phi)),
                _ => None,
            };
            let oracle = spec.oracle.map(|res| brute_force_oracle(&rho, "B", res)).transpose()?;
            Ok(SweepRow {
                param: value,
                cond_entropy: r.per_expression[&Expression::CondEntropy],
                disturbance_gap: r.per_expression[&Expression::DisturbanceGap],
                gain_gap: r.per_expression[&Expression::GainGap],
                relent_gap: r.per_expression[&Expression::RelentGap],
                angles,
                oracle,
                converged: r.converged,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for r in rows {
        let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
        w.write_record([
            format_number(r.param),
            format_number(r.cond_entropy),
            format_number(r.disturbance_gap),
            format_number(r.gain_gap),
            format_number(r.relent_gap),
            opt(r.angles.map(|a| a.0)),
            opt(r.angles.map(|a| a.1)),
            opt(r.oracle),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
