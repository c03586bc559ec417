use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{GeoError, Point, CONTAINS_TOL};
use crate::math;

/// Gridded population density (people/km²), row-major with row 0 at the
/// southern edge and column 0 at the western edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationRaster {
    pub origin: Point,
    #[serde(rename = "cell_size_km")]
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<f64>,
    #[serde(skip)]
    rho_max: f64,
}

impl PopulationRaster {
    pub fn new(
        origin: Point,
        cell_size: f64,
        rows: usize,
        cols: usize,
        cells: Vec<f64>,
    ) -> Result<Self, GeoError> {
        let mut raster = PopulationRaster {
            origin,
            cell_size,
            rows,
            cols,
            cells,
            rho_max: 0.0,
        };
        raster.validate("raster")?;
        Ok(raster)
    }

    pub fn uniform(origin: Point, cell_size: f64, rows: usize, cols: usize, value: f64) -> Self {
        PopulationRaster::new(origin, cell_size, rows, cols, alloc::vec![value; rows * cols])
            .expect("uniform raster with valid shape")
    }

    /// Checks shape and values and refreshes the cached maximum.
    pub(crate) fn validate(&mut self, path: &str) -> Result<(), GeoError> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(GeoError::validation(
                format!("{path}.cell_size_km"),
                "must be positive",
            ));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(GeoError::validation(
                format!("{path}.rows"),
                "raster must have at least one row and column",
            ));
        }
        if self.cells.len() != self.rows * self.cols {
            return Err(GeoError::validation(
                format!("{path}.cells"),
                format!(
                    "expected {} values (rows x cols), found {}",
                    self.rows * self.cols,
                    self.cells.len()
                ),
            ));
        }
        if !self.origin.is_finite() {
            return Err(GeoError::validation(format!("{path}.origin"), "not finite"));
        }
        let mut max = 0.0f64;
        for (i, &v) in self.cells.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(GeoError::validation(
                    format!("{path}.cells[{i}]"),
                    format!("density must be finite and >= 0, found {v}"),
                ));
            }
            max = max.max(v);
        }
        self.rho_max = max;
        Ok(())
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn max_x(&self) -> f64 {
        self.origin.x + self.cols as f64 * self.cell_size
    }

    pub fn max_y(&self) -> f64 {
        self.origin.y + self.rows as f64 * self.cell_size
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.cols + col]
    }

    /// `(row, col)` of the cell containing `p` by the floor rule. Points on
    /// the outer north/east edge belong to the last row/column.
    pub fn cell_of(&self, p: Point) -> Result<(usize, usize), GeoError> {
        let fx = (p.x - self.origin.x) / self.cell_size;
        let fy = (p.y - self.origin.y) / self.cell_size;
        let tol = CONTAINS_TOL / self.cell_size;
        let (cols, rows) = (self.cols as f64, self.rows as f64);
        if !(fx >= -tol && fy >= -tol && fx <= cols + tol && fy <= rows + tol) {
            return Err(GeoError::OutOfExtent { x: p.x, y: p.y });
        }
        let col = (math::floor(fx).max(0.0) as usize).min(self.cols - 1);
        let row = (math::floor(fy).max(0.0) as usize).min(self.rows - 1);
        Ok((row, col))
    }

    /// Density of the cell containing `p` (nearest cell, no interpolation).
    pub fn density_at(&self, p: Point) -> Result<f64, GeoError> {
        let (r, c) = self.cell_of(p)?;
        Ok(self.value(r, c))
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Point {
        Point::new(
            self.origin.x + (col as f64 + 0.5) * self.cell_size,
            self.origin.y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Row-major indices of cells with positive density.
    pub fn positive_cells(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn cell_center_by_index(&self, index: usize) -> Point {
        self.cell_center(index / self.cols, index % self.cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_by_two() -> PopulationRaster {
        // row 0: 1, 2 ; row 1: 3, 4
        PopulationRaster::new(Point::new(0.0, 0.0), 1.0, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn origin_reads_cell_zero() {
        assert_eq!(two_by_two().density_at(Point::new(0.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn uniform_field_is_constant() {
        let r = PopulationRaster::uniform(Point::new(-1.0, -1.0), 0.5, 4, 4, 500.0);
        assert_eq!(r.density_at(Point::new(0.3, 0.7)).unwrap(), 500.0);
        assert_eq!(r.rho_max(), 500.0);
    }

    #[test]
    fn interior_boundary_goes_to_upper_cell_by_floor() {
        // x = 1.0 is the boundary between col 0 and col 1; floor(1.0) = 1.
        let r = two_by_two();
        assert_eq!(r.density_at(Point::new(1.0, 0.5)).unwrap(), 2.0);
        // y = 1.0 similarly selects row 1.
        assert_eq!(r.density_at(Point::new(0.5, 1.0)).unwrap(), 3.0);
        // Just below the boundary stays in the lower-index cell.
        assert_eq!(r.density_at(Point::new(0.999, 0.5)).unwrap(), 1.0);
    }

    #[test]
    fn far_edge_belongs_to_last_cell() {
        assert_eq!(two_by_two().density_at(Point::new(2.0, 2.0)).unwrap(), 4.0);
    }

    #[test]
    fn outside_extent_is_an_error() {
        assert!(matches!(
            two_by_two().density_at(Point::new(2.5, 0.0)),
            Err(GeoError::OutOfExtent { .. })
        ));
    }

    #[test]
    fn negative_cell_rejected_with_path() {
        let err = PopulationRaster::new(Point::new(0.0, 0.0), 1.0, 1, 2, vec![1.0, -2.0]).unwrap_err();
        match err {
            GeoError::Validation { path, .. } => assert_eq!(path, "raster.cells[1]"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
