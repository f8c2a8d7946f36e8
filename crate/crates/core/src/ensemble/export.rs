use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::stats::EnsembleStats;
use super::trajectory::TrajectoryRecord;
use crate::error::Result;

/// Columns: `outcome,count,frequency`.
pub fn write_outcomes_csv(stats: &EnsembleStats, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["outcome", "count", "frequency"])?;
    for (k, o) in &stats.outcomes {
        w.write_record([k.clone(), o.count.to_string(), o.frequency.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns: `bin,t_lo,t_hi,count`.
pub fn write_histogram_csv(stats: &EnsembleStats, path: impl AsRef<Path>) -> Result<()> {
    let h = &stats.histogram;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin", "t_lo", "t_hi", "count"])?;
    for (i, c) in h.counts.iter().enumerate() {
        w.write_record([i.to_string(), h.edges[i].to_string(), h.edges[i + 1].to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_json(stats: &EnsembleStats, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, stats)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Long-format trace. Columns: `t,component,modulus,current,hazard`.
pub fn write_trace_csv(record: &TrajectoryRecord, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "component", "modulus", "current", "hazard"])?;
    for p in &record.trace {
        for (i, (m, j)) in p.moduli.iter().zip(&p.currents).enumerate() {
            w.write_record([p.t.to_string(), i.to_string(), m.to_string(), j.to_string(), p.hazard.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
