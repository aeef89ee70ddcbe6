//! Time series, mesh snapshots and JSON reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::flow::StepRecord;
use crate::grid::GridAtlas;

pub const SERIES_HEADER: &str = "t,dt,W,area,rho_sup,el_residual_sup,gb_defect";

/// One CSV row; `{:.16e}` prints the 17 significant digits needed to round-trip an f64.
pub fn series_row(record: &StepRecord) -> String {
    let r = &record.report;
    [r.t, record.dt, r.willmore, r.area, r.rho_sup, r.el_residual_sup, r.gb_defect]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Appends rows to `series.csv`, flushing after each.
pub struct SeriesWriter {
    out: BufWriter<File>,
}

impl SeriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{SERIES_HEADER}")?;
        Ok(Self { out })
    }

    pub fn push(&mut self, record: &StepRecord) -> Result<()> {
        writeln!(self.out, "{}", series_row(record))?;
        self.out.flush()?;
        Ok(())
    }
}

pub fn mesh_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("mesh_{step}.obj"))
}

/// Write the graph surface `p + rho(p) nu(p)` as OBJ.
///
/// Each point appears once, from the chart that owns it for output. Faces are the
/// triangulated grid cells whose four corners are all owned by the same chart, so
/// the overlap between caps of the sphere shows as a seam.
pub fn write_obj(atlas: &GridAtlas, rho: &[f64], path: &Path) -> Result<usize> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut index = vec![0usize; atlas.len()];
    let mut count = 0;
    for (k, geo) in atlas.geometry().iter().enumerate() {
        if !atlas.is_output_owner(k) {
            continue;
        }
        count += 1;
        index[k] = count;
        let p: Vec<f64> = (0..3).map(|c| geo.position[c] + rho[k] * geo.normal[c]).collect();
        writeln!(out, "v {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2])?;
    }
    for g in &atlas.grids {
        let [nu, nv] = g.n;
        let (cu, cv) = if g.periodic { (nu, nv) } else { (nu - 1, nv - 1) };
        for i in 0..cu {
            for j in 0..cv {
                let corner = |a: usize, b: usize| index[g.global(a % nu, b % nv)];
                let q = [corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)];
                if q.contains(&0) {
                    continue;
                }
                writeln!(out, "f {} {} {}", q[0], q[1], q[2])?;
                writeln!(out, "f {} {} {}", q[0], q[2], q[3])?;
            }
        }
    }
    out.flush()?;
    Ok(count)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyReport;
    use crate::grid::build_grids;
    use crate::surface::make_torus;

    #[test]
    fn rows_round_trip() {
        let report = EnergyReport { t: 0.1, willmore: 4.0 * std::f64::consts::PI, area: 1.0 / 3.0, gb_defect: -1e-300, rho_sup: 0.0, el_residual_sup: 2.5e-9 };
        let row = series_row(&StepRecord { step: 3, dt: 1e-4, report });
        let parsed: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed, vec![0.1, 1e-4, report.willmore, report.area, 0.0, 2.5e-9, -1e-300]);
        assert_eq!(SERIES_HEADER.split(',').count(), parsed.len());
    }

    #[test]
    fn torus_obj_is_closed() {
        let atlas = build_grids(&make_torus(2.0, 1.0).unwrap(), 16).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = mesh_path(dir.path(), 0);
        let n = write_obj(&atlas, &vec![0.0; atlas.len()], &path).unwrap();
        assert_eq!(n, atlas.len());
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * atlas.len());
    }
}
