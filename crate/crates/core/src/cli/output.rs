//! CSV and text artifacts. Every number is written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::{ConvergenceTable, DeltaSweep, ScanResult};
use crate::evolution::{BreakdownDump, PicardOutcome, Trajectory};
use crate::model::Grid;

use super::config::RunConfig;

/// Writing to `path` failed.
#[derive(Debug, thiserror::Error)]
#[error("cannot write {}: {source}", .path.display())]
pub struct IoFailure {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV file opened for writing; rows are written as they come.
pub struct Csv {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Csv {
    pub fn create(dir: &Path, name: &str, header: &str) -> Result<Self, IoFailure> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|source| IoFailure {
            path: path.clone(),
            source,
        })?;
        let mut csv = Csv {
            path,
            out: BufWriter::new(file),
        };
        csv.line(header)?;
        Ok(csv)
    }

    pub fn line(&mut self, line: &str) -> Result<(), IoFailure> {
        writeln!(self.out, "{line}").map_err(|source| IoFailure {
            path: self.path.clone(),
            source,
        })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), IoFailure> {
        self.line(&fields.join(","))
    }

    pub fn finish(mut self) -> Result<PathBuf, IoFailure> {
        self.out.flush().map_err(|source| IoFailure {
            path: self.path.clone(),
            source,
        })?;
        Ok(self.path)
    }
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, IoFailure> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| IoFailure {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn create_dir(dir: &Path) -> Result<(), IoFailure> {
    std::fs::create_dir_all(dir).map_err(|source| IoFailure {
        path: dir.to_path_buf(),
        source,
    })
}

/// `config.resolved.json`: the configuration with every default filled in.
pub fn write_config_echo(dir: &Path, config: &RunConfig) -> Result<PathBuf, IoFailure> {
    let text = serde_json::to_string_pretty(config).expect("config serializes") + "\n";
    write_text(dir, "config.resolved.json", &text)
}

/// `snapshots.csv`, `series.csv` and `bounds.csv` for one trajectory.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<Vec<PathBuf>, IoFailure> {
    let grid = traj.grid;
    let mut snapshots = Csv::create(dir, "snapshots.csv", "t,x,A,v")?;
    for state in &traj.states {
        for (i, (a, v)) in state.area.iter().zip(&state.flow.v).enumerate() {
            snapshots.row(&[num(state.t), num(grid.node(i)), num(*a), num(*v)])?;
        }
    }
    let mut series = Csv::create(dir, "series.csv", "t,Q,mass,minA,maxA,E_running,worst_margin")?;
    for r in &traj.series {
        series.row(&[
            num(r.t),
            num(r.q),
            num(r.mass),
            num(r.min_area),
            num(r.max_area),
            num(r.energy),
            num(r.worst_margin),
        ])?;
    }
    let mut bounds = Csv::create(dir, "bounds.csv", "t,check,bound,observed,margin,pass")?;
    for report in &traj.diagnostics {
        for c in &report.checks {
            bounds.row(&[
                num(report.t),
                c.name.to_string(),
                num(c.bound),
                num(c.observed),
                num(c.margin),
                c.pass.to_string(),
            ])?;
        }
    }
    Ok(vec![snapshots.finish()?, series.finish()?, bounds.finish()?])
}

/// `breakdown.csv`: the last good slice next to the offending one.
pub fn write_breakdown(dir: &Path, grid: &Grid, dump: &BreakdownDump) -> Result<PathBuf, IoFailure> {
    let mut csv = Csv::create(dir, "breakdown.csv", "x,A_last,v_last,A_next")?;
    for (i, a) in dump.last_state.area.iter().enumerate() {
        csv.row(&[
            num(grid.node(i)),
            num(*a),
            num(dump.last_state.flow.v[i]),
            num(dump.offending_area[i]),
        ])?;
    }
    csv.finish()
}

pub fn write_iterates(dir: &Path, outcome: &PicardOutcome) -> Result<PathBuf, IoFailure> {
    let mut csv = Csv::create(
        dir,
        "iterates.csv",
        "k,difference,energy,time_derivative_norm,q_at_delta,minA,maxA,in_set",
    )?;
    for it in &outcome.iterates {
        csv.row(&[
            it.index.to_string(),
            num(it.difference),
            num(it.energy.energy),
            num(it.energy.time_derivative_norm),
            num(it.q_at_delta),
            num(it.min_area),
            num(it.max_area),
            it.in_set().to_string(),
        ])?;
    }
    csv.finish()
}

pub fn write_scan(dir: &Path, scan: &ScanResult) -> Result<PathBuf, IoFailure> {
    let mut csv = Csv::create(dir, "scan.csv", "D,growth_rate,period,fit_residual")?;
    for e in &scan.entries {
        csv.row(&[
            num(e.draw_ratio),
            num(e.growth_rate),
            num(e.period.unwrap_or(f64::NAN)),
            num(e.fit_residual),
        ])?;
    }
    csv.finish()
}

pub fn write_sweep(dir: &Path, sweep: &DeltaSweep) -> Result<PathBuf, IoFailure> {
    let mut csv = Csv::create(
        dir,
        "sweep.csv",
        "delta_a,delta_b,distance,layer_distance,outer_distance,t_max",
    )?;
    for p in &sweep.pairs {
        csv.row(&[
            num(p.delta_a),
            num(p.delta_b),
            num(p.distance),
            num(p.layer_distance),
            num(p.outer_distance),
            num(p.t_max),
        ])?;
    }
    csv.finish()
}

pub fn write_convergence(dir: &Path, tables: &[(&str, &ConvergenceTable)]) -> Result<PathBuf, IoFailure> {
    let mut csv = Csv::create(dir, "convergence.csv", "study,N,error,order")?;
    for (name, table) in tables {
        for r in &table.rows {
            csv.row(&[
                name.to_string(),
                r.cells.to_string(),
                num(r.error),
                num(r.order.unwrap_or(f64::NAN)),
            ])?;
        }
    }
    csv.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        for x in [std::f64::consts::PI, 1e-300, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
