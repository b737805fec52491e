//! Surrogate read from precomputed (mean, std) values on a regular tensor
//! grid, evaluated by multilinear interpolation.
//!
//! CSV layout: header `x1,…,xn,mean,std`, one row per grid node in row-major
//! order (last coordinate varies fastest).

use super::{Prediction, ProbabilisticSurrogate};
use crate::error::{Result, UqError};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug)]
pub struct GridSurrogate {
    axes: Vec<Vec<f64>>,
    mean: Vec<f64>,
    std: Vec<f64>,
    clamped: AtomicU64,
    source: String,
}

impl GridSurrogate {
    pub fn new(axes: Vec<Vec<f64>>, mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(UqError::Grid("grid needs at least one axis".into()));
        }
        for (d, axis) in axes.iter().enumerate() {
            if axis.is_empty() || axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(UqError::Grid(format!(
                    "axis {} must be strictly increasing",
                    d + 1
                )));
            }
        }
        let count: usize = axes.iter().map(Vec::len).product();
        if mean.len() != count || std.len() != count {
            return Err(UqError::Grid(format!(
                "expected {count} grid values, got {} means and {} stds",
                mean.len(),
                std.len()
            )));
        }
        if std.iter().any(|s| !(*s >= 0.0)) || mean.iter().any(|v| !v.is_finite()) {
            return Err(UqError::Grid(
                "means must be finite and stds non-negative".into(),
            ));
        }
        Ok(Self {
            axes,
            mean,
            std,
            clamped: AtomicU64::new(0),
            source: "in-memory grid".into(),
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        let mut grid = Self::from_reader(file)?;
        grid.source = path.display().to_string();
        Ok(grid)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| UqError::Grid(e.to_string()))?
            .clone();
        let cols = header.len();
        if cols < 3 || &header[cols - 2] != "mean" || &header[cols - 1] != "std" {
            return Err(UqError::Grid("header must be x1,…,xn,mean,std".into()));
        }
        let n = cols - 2;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| UqError::Grid(e.to_string()))?;
            let vals = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| UqError::Grid(format!("row {}: {e}", line + 2)))?;
            rows.push(vals);
        }
        let mut axes: Vec<Vec<f64>> = (0..n)
            .map(|d| {
                let mut v: Vec<f64> = rows.iter().map(|r| r[d]).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            })
            .collect();
        axes.iter_mut().for_each(|a| a.shrink_to_fit());
        let count: usize = axes.iter().map(Vec::len).product();
        if count != rows.len() {
            return Err(UqError::Grid(format!(
                "{} rows do not form a regular grid ({} nodes expected from the axis values)",
                rows.len(),
                count
            )));
        }
        // rows must enumerate the grid in row-major order
        let mut counter = vec![0usize; n];
        for (j, row) in rows.iter().enumerate() {
            for d in 0..n {
                if row[d] != axes[d][counter[d]] {
                    return Err(UqError::Grid(format!(
                        "row {} is out of row-major grid order",
                        j + 2
                    )));
                }
            }
            for d in (0..n).rev() {
                counter[d] += 1;
                if counter[d] < axes[d].len() {
                    break;
                }
                counter[d] = 0;
            }
        }
        let mean = rows.iter().map(|r| r[n]).collect();
        let std = rows.iter().map(|r| r[n + 1]).collect();
        Self::new(axes, mean, std)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.axes.len();
        let header: Vec<String> = (1..=n)
            .map(|d| format!("x{d}"))
            .chain(["mean".into(), "std".into()])
            .collect();
        writeln!(out, "{}", header.join(","))?;
        let mut counter = vec![0usize; n];
        for j in 0..self.mean.len() {
            let mut fields: Vec<String> = (0..n)
                .map(|d| format!("{:.16e}", self.axes[d][counter[d]]))
                .collect();
            fields.push(format!("{:.16e}", self.mean[j]));
            fields.push(format!("{:.16e}", self.std[j]));
            writeln!(out, "{}", fields.join(","))?;
            for d in (0..n).rev() {
                counter[d] += 1;
                if counter[d] < self.axes[d].len() {
                    break;
                }
                counter[d] = 0;
            }
        }
        Ok(())
    }

    /// Number of queries that fell outside the grid and were clamped to it.
    pub fn clamped_queries(&self) -> u64 {
        self.clamped.load(Ordering::Relaxed)
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (i, a)| acc * a.len() + i)
    }
}

impl ProbabilisticSurrogate for GridSurrogate {
    fn dim(&self) -> usize {
        self.axes.len()
    }

    fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let n = self.axes.len();
        if x.len() != n {
            return Err(UqError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let mut lower = vec![0usize; n];
        let mut frac = vec![0.0; n];
        let mut clamped = false;
        for d in 0..n {
            let axis = &self.axes[d];
            let last = axis.len() - 1;
            let v = x[d];
            if v < axis[0] || v > axis[last] {
                clamped = true;
            }
            if last == 0 {
                continue;
            }
            let v = v.clamp(axis[0], axis[last]);
            let i = axis
                .partition_point(|a| *a <= v)
                .saturating_sub(1)
                .min(last - 1);
            lower[d] = i;
            frac[d] = (v - axis[i]) / (axis[i + 1] - axis[i]);
        }
        if clamped {
            self.clamped.fetch_add(1, Ordering::Relaxed);
        }
        let (mut mean, mut std) = (0.0, 0.0);
        let mut idx = vec![0usize; n];
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            for d in 0..n {
                let upper = (corner >> d) & 1 == 1;
                if self.axes[d].len() == 1 {
                    if upper {
                        w = 0.0;
                    }
                    idx[d] = 0;
                    continue;
                }
                idx[d] = lower[d] + upper as usize;
                w *= if upper { frac[d] } else { 1.0 - frac[d] };
            }
            if w == 0.0 {
                continue;
            }
            let k = self.flat_index(&idx);
            mean += w * self.mean[k];
            std += w * self.std[k];
        }
        Ok(Prediction {
            mean,
            std: std.max(0.0),
        })
    }

    fn describe(&self) -> String {
        let shape: Vec<usize> = self.axes.iter().map(Vec::len).collect();
        format!("tabulated grid {shape:?} from {}", self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bilinear() -> GridSurrogate {
        let axes = vec![vec![0.0, 1.0, 2.0], vec![0.0, 10.0]];
        // mean = x + y/10, std = 0.5
        let mut mean = Vec::new();
        for x in &axes[0] {
            for y in &axes[1] {
                mean.push(x + y / 10.0);
            }
        }
        GridSurrogate::new(axes, mean, vec![0.5; 6]).unwrap()
    }

    #[test]
    fn reproduces_affine_functions() {
        let g = bilinear();
        let p = g.predict(&[1.3, 4.0]).unwrap();
        assert_relative_eq!(p.mean, 1.7, epsilon = 1e-14);
        assert_relative_eq!(p.std, 0.5, epsilon = 1e-14);
        assert_eq!(g.clamped_queries(), 0);
    }

    #[test]
    fn clamps_outside_queries() {
        let g = bilinear();
        let p = g.predict(&[5.0, -3.0]).unwrap();
        assert_relative_eq!(p.mean, 2.0, epsilon = 1e-14);
        assert_eq!(g.clamped_queries(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let g = bilinear();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = GridSurrogate::from_reader(&buf[..]).unwrap();
        assert_eq!(back.axes(), g.axes());
        assert_eq!(
            back.predict(&[0.4, 7.0]).unwrap(),
            g.predict(&[0.4, 7.0]).unwrap()
        );
    }

    #[test]
    fn rejects_irregular_grids() {
        let missing = "x1,x2,mean,std\n0,0,1,0\n0,1,1,0\n1,0,1,0\n";
        assert!(matches!(
            GridSurrogate::from_reader(missing.as_bytes()),
            Err(UqError::Grid(_))
        ));
        let unordered = "x1,x2,mean,std\n0,1,1,0\n0,0,1,0\n1,0,1,0\n1,1,1,0\n";
        assert!(GridSurrogate::from_reader(unordered.as_bytes()).is_err());
        let bad_header = "x1,x2,m,s\n0,0,1,0\n";
        assert!(GridSurrogate::from_reader(bad_header.as_bytes()).is_err());
        let negative = "x1,mean,std\n0,1,-1\n1,1,0\n";
        assert!(GridSurrogate::from_reader(negative.as_bytes()).is_err());
    }
}
