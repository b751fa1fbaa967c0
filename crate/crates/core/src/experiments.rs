//! Reproducible experiment drivers: two tables of optimal capped layers and
//! two parameter sweeps, each with a CSV writer.
//!
//! All floats are written with six significant digits.

use std::io;

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::objectives::{minimize, ObjectiveId, OptimizeResult};
use crate::risk_measures::var;
use crate::scenario::{Dependence, Scenario};
use crate::search::SearchConfig;

/// `(reinsurer level, insurer 1 level, insurer 2 level)` of the three
/// symmetric-marginal cases.
pub const TABLE1_CASES: [(f64, f64, f64); 3] = [(0.95, 0.9, 0.85), (0.9, 0.95, 0.85), (0.85, 0.95, 0.9)];

/// Insurer levels of the asymmetric-marginal table; the reinsurer level is
/// [`TABLE2_LEVEL`].
pub const TABLE2_ROWS: [(f64, f64); 5] = [(0.97, 0.99), (0.98, 0.99), (0.99, 0.99), (0.99, 0.98), (0.99, 0.97)];
pub const TABLE2_LEVEL: f64 = 0.9;

/// Level of both insurers in the reinsurer-level sweep, and of the
/// reinsurer in the insurer-level sweep.
pub const SWEEP_FIXED_LEVEL: f64 = 0.9;

/// Annotation of the two table rows whose published quantile labels do not
/// match their stated levels.
pub const INCONSISTENT_ROW: &str = "paper-inconsistent";

pub fn base_marginal() -> Distribution {
    Distribution::Lomax { shape: 9.0, scale: 8.0 }
}

pub fn second_marginal() -> Distribution {
    Distribution::Lomax { shape: 6.0, scale: 5.0 }
}

pub fn table1_scenario(case: usize, regime: Dependence) -> Result<Scenario> {
    let &(p, p1, p2) =
        TABLE1_CASES.get(case.wrapping_sub(1)).ok_or_else(|| Error::Config(format!("case {case} outside 1..=3")))?;
    Scenario::var(vec![base_marginal(), base_marginal()], &[p1, p2], p, regime)
}

pub fn table2_scenario(p1: f64, p2: f64) -> Result<Scenario> {
    Scenario::var(vec![base_marginal(), second_marginal()], &[p1, p2], TABLE2_LEVEL, Dependence::WorstCase)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub case: usize,
    pub regime: Dependence,
    pub result: OptimizeResult,
}

pub fn table1(cfg: &SearchConfig) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::with_capacity(9);
    for case in 1..=TABLE1_CASES.len() {
        for regime in Dependence::ALL {
            let result = minimize(ObjectiveId::K, &table1_scenario(case, regime)?, cfg)?;
            rows.push(Table1Row { case, regime, result });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub alpha1: f64,
    pub alpha2: f64,
    pub result: OptimizeResult,
    pub annotation: Option<String>,
}

pub fn table2(cfg: &SearchConfig) -> Result<Vec<Table2Row>> {
    TABLE2_ROWS
        .iter()
        .enumerate()
        .map(|(k, &(p1, p2))| {
            let result = minimize(ObjectiveId::K, &table2_scenario(p1, p2)?, cfg)?;
            let annotation = (k == 0 || k == TABLE2_ROWS.len() - 1).then(|| INCONSISTENT_ROW.to_string());
            Ok(Table2Row { alpha1: p1, alpha2: p2, result, annotation })
        })
        .collect()
}

/// Levels `0.505, 0.510, …, 0.995`.
pub fn sweep_values() -> Vec<f64> {
    (0..99).map(|k| (505 + 5 * k) as f64 / 1000.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub sweep_value: f64,
    pub regime: Dependence,
    pub objective: f64,
    /// No-reinsurance value minus the optimum. With caps at the insurers'
    /// VaRs this equals the insurers' summed ceded VaRs minus the
    /// reinsurer's risk of the ceded sum.
    pub benefit: f64,
}

fn sweep(cfg: &SearchConfig, scenario: impl Fn(f64, Dependence) -> Result<Scenario>) -> Result<Vec<FigureRow>> {
    let cfg = SearchConfig { flat_intervals: false, ..cfg.clone() };
    let mut rows = Vec::new();
    for regime in Dependence::ALL {
        for x in sweep_values() {
            let s = scenario(x, regime)?;
            let none: f64 =
                s.marginals.iter().enumerate().map(|(i, d)| var(d, s.insurer_prob(i))).sum::<Result<f64>>()?;
            let r = minimize(ObjectiveId::K, &s, &cfg)?;
            rows.push(FigureRow { sweep_value: x, regime, objective: r.objective, benefit: none - r.objective });
        }
    }
    Ok(rows)
}

/// Optimal objective against the reinsurer's level, insurers fixed at 0.9.
pub fn figure2(cfg: &SearchConfig) -> Result<Vec<FigureRow>> {
    sweep(cfg, |x, regime| Scenario::var(vec![base_marginal(), base_marginal()], &[SWEEP_FIXED_LEVEL; 2], x, regime))
}

/// Optimal objective against the insurers' common level, reinsurer fixed at
/// 0.9.
pub fn figure3(cfg: &SearchConfig) -> Result<Vec<FigureRow>> {
    sweep(cfg, |x, regime| Scenario::var(vec![base_marginal(), base_marginal()], &[x, x], SWEEP_FIXED_LEVEL, regime))
}

/// Six significant digits; `inf` for infinity.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    let mut magnitude = x.abs().log10().floor() as i32;
    // rounding can carry into a new leading digit, e.g. 9.9999996 -> 10.0000
    if format!("{:.5e}", x.abs()).ends_with(&format!("e{}", magnitude + 1)) {
        magnitude += 1;
    }
    let decimals = 5 - magnitude;
    if (0..=15).contains(&decimals) {
        format!("{x:.prec$}", prec = decimals as usize)
    } else {
        format!("{x:.5e}")
    }
}

fn interval(v: [f64; 2]) -> String {
    format!("[{}, {}]", sig6(v[0]), sig6(v[1]))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("CSV output: {e}"))
}

fn t_cell(r: &OptimizeResult) -> String {
    r.witness.t().map(sig6).unwrap_or_default()
}

pub const TABLE1_HEADER: [&str; 12] =
    ["case", "regime", "objective", "a1_lo", "a1_hi", "a2_lo", "a2_hi", "t_star", "a1", "a2", "b1", "b2"];

pub fn write_table1<W: io::Write>(rows: &[Table1Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE1_HEADER).map_err(csv_error)?;
    for row in rows {
        let r = &row.result;
        let (f1, f2) = (r.flat_intervals[0][0], r.flat_intervals[1][0]);
        w.write_record([
            row.case.to_string(),
            row.regime.to_string(),
            sig6(r.objective),
            sig6(f1[0]),
            sig6(f1[1]),
            sig6(f2[0]),
            sig6(f2[1]),
            t_cell(r),
            sig6(r.params[0][0]),
            sig6(r.params[1][0]),
            sig6(r.params[0][1]),
            sig6(r.params[1][1]),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Config(format!("CSV output: {e}")))
}

pub const TABLE2_HEADER: [&str; 7] =
    ["alpha1", "alpha2", "objective", "a1_interval", "a2_interval", "t_star", "annotation"];

pub fn write_table2<W: io::Write>(rows: &[Table2Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE2_HEADER).map_err(csv_error)?;
    for row in rows {
        let r = &row.result;
        w.write_record([
            sig6(row.alpha1),
            sig6(row.alpha2),
            sig6(r.objective),
            interval(r.flat_intervals[0][0]),
            interval(r.flat_intervals[1][0]),
            t_cell(r),
            row.annotation.clone().unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Config(format!("CSV output: {e}")))
}

pub const FIGURE_HEADER: [&str; 4] = ["sweep_value", "regime", "objective", "benefit"];

pub fn write_figure<W: io::Write>(rows: &[FigureRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIGURE_HEADER).map_err(csv_error)?;
    for row in rows {
        w.write_record([sig6(row.sweep_value), row.regime.to_string(), sig6(row.objective), sig6(row.benefit)])
            .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Config(format!("CSV output: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_examples() {
        assert_eq!(sig6(4.20960123), "4.20960");
        assert_eq!(sig6(0.052), "0.0520000");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(6.3944), "6.39440");
        assert_eq!(sig6(9.9999996), "10.0000");
        assert_eq!(sig6(-1.5), "-1.50000");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(f64::INFINITY), "inf");
    }

    #[test]
    fn sweep_grid() {
        let v = sweep_values();
        assert_eq!(v.len(), 99);
        assert_eq!(v[0], 0.505);
        assert_eq!(v[98], 0.995);
        assert_eq!(v[79], 0.9);
    }

    #[test]
    fn scenarios_build() {
        let s = table1_scenario(2, Dependence::IID).unwrap();
        assert_eq!(s.reinsurer_prob(), 0.9);
        assert!(table1_scenario(4, Dependence::IID).is_err());
        assert_eq!(table2_scenario(0.98, 0.99).unwrap().insurer_prob(1), 0.99);
    }
}
