use std::io::{self, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::PhasePoint;

/// Square midpoint grid of `(2n+1)²` points, `n = ⌊R/h⌋`, around `center`.
///
/// Points are stored row-major with the row index running over `Im α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    center: PhasePoint,
    half_extent: f64,
    step: f64,
    n: usize,
}

impl PhaseGrid {
    pub fn new(center: PhasePoint, half_extent: f64, step: f64) -> Result<Self> {
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::InvalidParameter {
                name: "radius",
                value: half_extent,
                reason: "must be positive and finite",
            });
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter { name: "step", value: step, reason: "must be positive and finite" });
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter { name: "center", value: f64::NAN, reason: "not finite" });
        }
        let ratio = half_extent / step;
        // 5/0.1 is 49.999…; snap ratios that are integers up to rounding
        let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) { ratio.round() } else { ratio.floor() };
        if n > 5000.0 {
            return Err(Error::InvalidParameter { name: "step", value: step, reason: "grid too fine" });
        }
        Ok(PhaseGrid { center, half_extent, step, n: n as usize })
    }

    /// Grid centered at the origin.
    pub fn centered(half_extent: f64, step: f64) -> Result<Self> {
        PhaseGrid::new(PhasePoint::ORIGIN, half_extent, step)
    }

    pub fn center(&self) -> PhasePoint {
        self.center
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Quadrature weight of a single point.
    pub fn weight(&self) -> f64 {
        self.step * self.step
    }

    /// Points per row (and per column).
    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Offset of index `i` from the center, `(i − n)·h`.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - self.n as f64) * self.step
    }

    pub fn point(&self, row: usize, col: usize) -> PhasePoint {
        PhasePoint::new(self.center.re + self.coordinate(col), self.center.im + self.coordinate(row))
    }

    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        let side = self.side();
        (0..side).flat_map(move |r| (0..side).map(move |c| self.point(r, c)))
    }

    pub fn is_boundary(&self, row: usize, col: usize) -> bool {
        let last = self.side() - 1;
        row == 0 || col == 0 || row == last || col == last
    }

    pub fn boundary_points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        let side = self.side();
        (0..side)
            .flat_map(move |r| (0..side).map(move |c| (r, c)))
            .filter(move |&(r, c)| self.is_boundary(r, c))
            .map(move |(r, c)| self.point(r, c))
    }
}

/// Samples of an s-symbol on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolField {
    pub grid: PhaseGrid,
    pub s: f64,
    pub values: Vec<C64>,
}

impl SymbolField {
    pub fn new(grid: PhaseGrid, s: f64, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { left: values.len(), right: grid.len() });
        }
        Ok(SymbolField { grid, s, values })
    }

    pub fn value(&self, row: usize, col: usize) -> C64 {
        self.values[row * self.grid.side() + col]
    }

    /// `Σ h² 𝔓 / π`, which approximates `Tr ρ`.
    pub fn normalization(&self) -> C64 {
        self.values.iter().sum::<C64>() * (self.grid.weight() / std::f64::consts::PI)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Largest boundary magnitude divided by the largest magnitude overall.
    pub fn boundary_ratio(&self) -> f64 {
        let side = self.grid.side();
        let mut edge = 0.0f64;
        for r in 0..side {
            for c in 0..side {
                if self.grid.is_boundary(r, c) {
                    edge = edge.max(self.value(r, c).norm());
                }
            }
        }
        let peak = self.max_abs();
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }

    /// CSV with header `re_alpha,im_alpha,re_value,im_value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"re_alpha,im_alpha,re_value,im_value\n")?;
        let side = self.grid.side();
        for r in 0..side {
            for c in 0..side {
                let a = self.grid.point(r, c);
                let v = self.value(r, c);
                writeln!(out, "{},{},{},{}", g17(a.re), g17(a.im), g17(v.re), g17(v.im))?;
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// 17 significant digits in scientific notation.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_count_and_symmetry() {
        let g = PhaseGrid::centered(5.0, 0.1).unwrap();
        assert_eq!(g.side(), 101);
        assert_eq!(g.len(), 101 * 101);
        let first = g.point(0, 0);
        let last = g.point(100, 100);
        assert!((first.re + 5.0).abs() < 1e-12 && (last.im - 5.0).abs() < 1e-12);
        assert_eq!(g.point(50, 50), PhasePoint::ORIGIN);
    }

    #[test]
    fn rows_run_over_imaginary_part() {
        let g = PhaseGrid::centered(1.0, 0.5).unwrap();
        let pts: Vec<_> = g.points().collect();
        assert_eq!(pts[1].im, pts[0].im);
        assert!(pts[1].re > pts[0].re);
        assert!(pts[g.side()].im > pts[0].im);
    }

    #[test]
    fn non_integer_ratio_floors() {
        let g = PhaseGrid::centered(1.05, 0.5).unwrap();
        assert_eq!(g.side(), 5);
    }

    #[test]
    fn boundary_count() {
        let g = PhaseGrid::centered(2.0, 1.0).unwrap();
        assert_eq!(g.boundary_points().count(), 16);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PhaseGrid::centered(0.0, 0.1).is_err());
        assert!(PhaseGrid::centered(1.0, -0.1).is_err());
        assert!(PhaseGrid::centered(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = PhaseGrid::centered(0.5, 0.5).unwrap();
        let field = SymbolField::new(g, 0.0, vec![C64::new(1.0, -0.0); 9]).unwrap();
        let csv = field.to_csv();
        let lines: Vec<_> = csv.split('\n').collect();
        assert_eq!(lines[0], "re_alpha,im_alpha,re_value,im_value");
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[10], "");
        assert_eq!(lines[1], "-5.0000000000000000e-1,-5.0000000000000000e-1,1.0000000000000000e0,-0.0000000000000000e0");
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn field_length_is_checked() {
        let g = PhaseGrid::centered(0.5, 0.5).unwrap();
        assert!(SymbolField::new(g, 0.0, vec![]).is_err());
    }
}
