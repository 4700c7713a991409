use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned sampling rectangle with square cells of side `resolution`.
///
/// Cells are indexed row-major with row 0 at the bottom (smallest imaginary part).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: Complex64,
    pub half_width: f64,
    pub half_height: f64,
    pub resolution: f64,
}

impl Window {
    pub fn new(center: Complex64, half_width: f64, half_height: f64, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0) || !(half_width >= 10.0 * resolution) || !(half_height >= 10.0 * resolution) {
            return Err(Error::Precondition(format!(
                "window half sizes ({half_width}, {half_height}) must be at least 10 cells of {resolution}"
            )));
        }
        Ok(Window {
            center,
            half_width,
            half_height,
            resolution,
        })
    }

    pub fn square(half: f64, resolution: f64) -> Result<Self> {
        Window::new(Complex64::new(0.0, 0.0), half, half, resolution)
    }

    pub fn columns(&self) -> usize {
        (2.0 * self.half_width / self.resolution).round() as usize
    }

    pub fn rows(&self) -> usize {
        (2.0 * self.half_height / self.resolution).round() as usize
    }

    pub fn cell_count(&self) -> usize {
        self.columns() * self.rows()
    }

    pub fn min_corner(&self) -> Complex64 {
        self.center - Complex64::new(self.half_width, self.half_height)
    }

    pub fn cell_center(&self, index: usize) -> Complex64 {
        let (col, row) = (index % self.columns(), index / self.columns());
        self.min_corner()
            + Complex64::new(
                (col as f64 + 0.5) * self.resolution,
                (row as f64 + 0.5) * self.resolution,
            )
    }

    /// Cell containing `z`, if inside the window.
    pub fn cell_of(&self, z: Complex64) -> Option<usize> {
        let d = (z - self.min_corner()) / self.resolution;
        if d.re < 0.0 || d.im < 0.0 {
            return None;
        }
        let (col, row) = (d.re.floor() as usize, d.im.floor() as usize);
        (col < self.columns() && row < self.rows()).then(|| row * self.columns() + col)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let d = z - self.center;
        d.re.abs() <= self.half_width && d.im.abs() <= self.half_height
    }

    pub fn on_border(&self, index: usize) -> bool {
        let (col, row) = (index % self.columns(), index / self.columns());
        col == 0 || row == 0 || col + 1 == self.columns() || row + 1 == self.rows()
    }

    /// Evaluate `f` at every cell center; rows are filled in parallel and
    /// returned in index order.
    pub fn sample<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Complex64) -> T + Sync,
    {
        let cols = self.columns();
        (0..self.rows())
            .into_par_iter()
            .flat_map_iter(|row| (0..cols).map(move |col| row * cols + col))
            .map(|i| f(self.cell_center(i)))
            .collect()
    }

    /// 8-neighborhood of a cell, clipped to the window.
    pub(crate) fn neighbors8(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let (cols, rows) = (self.columns() as i64, self.rows() as i64);
        let (col, row) = ((index as i64) % cols, (index as i64) / cols);
        (-1..=1i64)
            .flat_map(|dr| (-1..=1i64).map(move |dc| (dc, dr)))
            .filter(|&d| d != (0, 0))
            .filter_map(move |(dc, dr)| {
                let (c, r) = (col + dc, row + dr);
                (c >= 0 && r >= 0 && c < cols && r < rows).then(|| (r * cols + c) as usize)
            })
    }
}
