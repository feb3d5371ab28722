//! Reconstruction and compression metrics.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::VoxelGrid;
use crate::par::{map_ordered, Execution};
use crate::rle::CompressionReport;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IoUResult {
    pub intersection: u64,
    pub union: u64,
    pub iou: f64,
    /// Both grids were empty; `iou` is reported as 1.0.
    pub both_empty: bool,
}

/// Intersection over union of the full cells of two grids.
pub fn iou(a: &VoxelGrid, b: &VoxelGrid) -> Result<IoUResult> {
    if a.dims() != b.dims() {
        return Err(Error::InvalidArgument(format!(
            "cannot compare grids of dims {} and {}",
            a.dims(),
            b.dims()
        )));
    }
    let (mut intersection, mut union) = (0u64, 0u64);
    for (x, y) in a.words().iter().zip(b.words()) {
        intersection += (x & y).count_ones() as u64;
        union += (x | y).count_ones() as u64;
    }
    let both_empty = union == 0;
    Ok(IoUResult {
        intersection,
        union,
        iou: if both_empty { 1.0 } else { intersection as f64 / union as f64 },
        both_empty,
    })
}

pub fn batch_iou(pairs: &[(VoxelGrid, VoxelGrid)], exec: Execution) -> Result<Vec<IoUResult>> {
    map_ordered(pairs, exec, |(a, b)| iou(a, b)).into_iter().collect()
}

/// Averages for one category, or the overall row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub category: String,
    pub object_count: u64,
    pub mean_rle_bytes: f64,
    pub mean_cf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsTable {
    pub rows: Vec<CategoryStats>,
    /// Unweighted mean of the category rows.
    pub overall: CategoryStats,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

pub const OVERALL: &str = "overall";

/// Per-category means in order of first appearance, plus an overall row that
/// averages the category means.
pub fn corpus_stats(reports: &[(String, CompressionReport)]) -> Result<StatsTable> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&CompressionReport>> = HashMap::new();
    let mut warnings = Vec::new();
    for (i, (category, report)) in reports.iter().enumerate() {
        if category.trim().is_empty() {
            warnings.push(format!("report {i} has no category and was skipped"));
            continue;
        }
        groups
            .entry(category.as_str())
            .or_insert_with(|| {
                order.push(category.as_str());
                Vec::new()
            })
            .push(report);
    }
    if order.is_empty() {
        return Err(Error::InvalidArgument("no categorized reports to summarize".into()));
    }

    let rows: Vec<CategoryStats> = order
        .iter()
        .map(|&category| {
            let group = &groups[category];
            let n = group.len() as f64;
            CategoryStats {
                category: category.to_string(),
                object_count: group.len() as u64,
                mean_rle_bytes: group.iter().map(|r| r.rle_bytes as f64).sum::<f64>() / n,
                mean_cf: group.iter().map(|r| r.cf).sum::<f64>() / n,
            }
        })
        .collect();
    let n = rows.len() as f64;
    let overall = CategoryStats {
        category: OVERALL.to_string(),
        object_count: rows.iter().map(|r| r.object_count).sum(),
        mean_rle_bytes: rows.iter().map(|r| r.mean_rle_bytes).sum::<f64>() / n,
        mean_cf: rows.iter().map(|r| r.mean_cf).sum::<f64>() / n,
    };
    Ok(StatsTable {
        rows,
        overall,
        warnings,
    })
}

impl StatsTable {
    /// `category,object_count,mean_rle_bytes,mean_cf`, category rows then `overall`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["category", "object_count", "mean_rle_bytes", "mean_cf"])?;
        for row in self.rows.iter().chain([&self.overall]) {
            w.write_record([
                row.category.clone(),
                row.object_count.to_string(),
                row.mean_rle_bytes.to_string(),
                row.mean_cf.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_json(&self, mut out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n").map_err(serde_json::Error::io)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, Dims};

    fn grid_with(cells: &[(usize, usize, usize)]) -> VoxelGrid {
        let mut g = VoxelGrid::new(Dims::cube(2).unwrap()).unwrap();
        for &(x, y, z) in cells {
            g.set(x, y, z, Cell::Full).unwrap();
        }
        g
    }

    #[test]
    fn iou_cases() {
        let a = grid_with(&[(0, 0, 0), (0, 0, 1)]);
        let b = grid_with(&[(0, 0, 1), (0, 1, 0)]);
        let r = iou(&a, &b).unwrap();
        assert_eq!((r.intersection, r.union), (1, 3));
        assert_eq!(r.iou, 1.0 / 3.0);
        assert_eq!(iou(&a, &a).unwrap().iou, 1.0);
        let c = grid_with(&[(1, 1, 1)]);
        assert_eq!(iou(&a, &c).unwrap().iou, 0.0);
        let empty = grid_with(&[]);
        let r = iou(&empty, &empty).unwrap();
        assert!(r.both_empty);
        assert_eq!(r.iou, 1.0);
        assert!(!iou(&a, &b).unwrap().both_empty);
        let other = VoxelGrid::new(Dims::cube(3).unwrap()).unwrap();
        assert!(matches!(iou(&a, &other), Err(Error::InvalidArgument(_))));
    }

    fn report(bytes: u64) -> CompressionReport {
        CompressionReport::new(bytes, 32768).unwrap()
    }

    #[test]
    fn stats_means() {
        let t = corpus_stats(&[("a".into(), report(100))]).unwrap();
        assert_eq!(t.rows[0].mean_rle_bytes, 100.0);
        assert_eq!(t.rows[0].mean_cf, 100.0 / 32768.0);

        let t = corpus_stats(&[("a".into(), report(100)), ("a".into(), report(300))]).unwrap();
        assert_eq!(t.rows[0].mean_rle_bytes, 200.0);
        assert_eq!(t.rows[0].object_count, 2);
    }

    #[test]
    fn overall_is_mean_of_means() {
        let t = corpus_stats(&[
            ("a".into(), report(100)),
            ("a".into(), report(300)),
            ("b".into(), report(1000)),
            ("".into(), report(5)),
        ])
        .unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.overall.mean_rle_bytes, 600.0);
        assert_eq!(t.overall.object_count, 3);
        assert_eq!(t.warnings.len(), 1);
        assert!(corpus_stats(&[]).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = corpus_stats(&[("chair".into(), report(64)), ("car".into(), report(128))]).unwrap();
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "category,object_count,mean_rle_bytes,mean_cf\nchair,1,64,0.001953125\ncar,1,128,0.00390625\noverall,2,96,0.0029296875\n"
        );
    }
}
