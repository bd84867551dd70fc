//! Uniform 2-D structured grid with four named boundary patches.
//!
//! Cells are addressed by `(i, j)` with `i` the x index in `0..nx` and `j`
//! the y index in `0..ny`. The flat cell index is `i * ny + j`, the layout
//! the explicit heat stencil sweeps over.

use alloc::format;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::field::FieldBuffer;

/// Boundary side of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Patch {
    Left,
    Right,
    Bottom,
    Top,
}

impl Patch {
    /// Order in which patches are written when seeding boundary cells. Later
    /// patches win on shared corner cells.
    pub const SEED_ORDER: [Patch; 4] = [Patch::Left, Patch::Bottom, Patch::Right, Patch::Top];

    pub fn name(self) -> &'static str {
        match self {
            Patch::Left => "left",
            Patch::Right => "right",
            Patch::Bottom => "bottom",
            Patch::Top => "top",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "left" => Some(Patch::Left),
            "right" => Some(Patch::Right),
            "bottom" => Some(Patch::Bottom),
            "top" => Some(Patch::Top),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredGrid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

/// Relative tolerance used when checking that cells are square.
const SQUARE_TOL: f64 = 1e-12;

pub fn make_grid(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<StructuredGrid, CoreError> {
    if nx == 0 || ny == 0 {
        return Err(CoreError::InvalidParameter(format!(
            "cell counts must be positive, got {nx}x{ny}"
        )));
    }
    if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "extents must be positive and finite, got {lx} x {ly}"
        )));
    }
    let dx = lx / nx as f64;
    let dy = ly / ny as f64;
    if (dx - dy).abs() > SQUARE_TOL * dx.max(dy) {
        return Err(CoreError::InvalidParameter(format!(
            "cells must be square, got dx = {dx}, dy = {dy}"
        )));
    }
    Ok(StructuredGrid { nx, ny, lx, ly })
}

impl StructuredGrid {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn cell_centre(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx(), (j as f64 + 0.5) * self.dy())
    }

    pub fn patch_len(&self, patch: Patch) -> usize {
        match patch {
            Patch::Left | Patch::Right => self.ny,
            Patch::Bottom | Patch::Top => self.nx,
        }
    }

    /// Flat indices of the cells adjacent to `patch`, in face order.
    pub fn patch_cells(&self, patch: Patch) -> Vec<usize> {
        let (nx, ny) = (self.nx, self.ny);
        match patch {
            Patch::Left => (0..ny).map(|j| self.cell_index(0, j)).collect(),
            Patch::Right => (0..ny).map(|j| self.cell_index(nx - 1, j)).collect(),
            Patch::Bottom => (0..nx).map(|i| self.cell_index(i, 0)).collect(),
            Patch::Top => (0..nx).map(|i| self.cell_index(i, ny - 1)).collect(),
        }
    }

    /// Face-centre coordinates `(x, y, 0)` of `patch`, ordered by increasing
    /// x (bottom, top) or increasing y (left, right).
    pub fn patch_face_centres(&self, patch: Patch) -> FieldBuffer {
        let (dx, dy) = (self.dx(), self.dy());
        let mut data = Vec::with_capacity(self.patch_len(patch) * 3);
        match patch {
            Patch::Left | Patch::Right => {
                let x = if patch == Patch::Left { 0.0 } else { self.lx };
                for j in 0..self.ny {
                    data.extend_from_slice(&[x, (j as f64 + 0.5) * dy, 0.0]);
                }
            }
            Patch::Bottom | Patch::Top => {
                let y = if patch == Patch::Bottom { 0.0 } else { self.ly };
                for i in 0..self.nx {
                    data.extend_from_slice(&[(i as f64 + 0.5) * dx, y, 0.0]);
                }
            }
        }
        FieldBuffer::new(3, data).expect("three components per face centre")
    }

    /// Whether `(i, j)` touches the boundary.
    pub fn is_boundary_cell(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_sized_grid_has_five_millimetre_cells() {
        let g = make_grid(20, 20, 0.1, 0.1).unwrap();
        assert!((g.dx() - 0.005).abs() < 1e-15);
        assert!((g.dy() - 0.005).abs() < 1e-15);
        assert_eq!(g.n_cells(), 400);
    }

    #[test]
    fn single_cell_grid() {
        let g = make_grid(1, 1, 1.0, 1.0).unwrap();
        for p in Patch::SEED_ORDER {
            assert_eq!(g.patch_cells(p), [0]);
            assert_eq!(g.patch_face_centres(p).n_elements(), 1);
        }
        assert_eq!(
            g.patch_face_centres(Patch::Top).as_slice(),
            &[0.5, 1.0, 0.0]
        );
    }

    #[test]
    fn top_face_centres_are_midpoints() {
        let g = make_grid(4, 4, 0.1, 0.1).unwrap();
        let fc = g.patch_face_centres(Patch::Top);
        let xs: Vec<f64> = fc.rows().map(|r| r[0]).collect();
        let expected = [0.0125, 0.0375, 0.0625, 0.0875];
        for (x, e) in xs.iter().zip(expected) {
            assert!((x - e).abs() < 1e-15, "{x} vs {e}");
        }
        assert!(fc.rows().all(|r| r[1] == 0.1 && r[2] == 0.0));
    }

    #[test]
    fn rejects_non_square_cells_and_degenerate_input() {
        assert!(make_grid(10, 20, 0.1, 0.1).is_err());
        assert!(make_grid(0, 1, 1.0, 1.0).is_err());
        assert!(make_grid(1, 1, -1.0, -1.0).is_err());
        assert!(make_grid(10, 20, 0.1, 0.2).is_ok());
    }

    #[test]
    fn face_centres_are_interior_and_monotone() {
        let g = make_grid(7, 3, 0.7, 0.3).unwrap();
        for p in Patch::SEED_ORDER {
            let fc = g.patch_face_centres(p);
            assert_eq!(fc.n_elements(), g.patch_len(p));
            let along: Vec<f64> = match p {
                Patch::Left | Patch::Right => fc.rows().map(|r| r[1]).collect(),
                _ => fc.rows().map(|r| r[0]).collect(),
            };
            let extent = match p {
                Patch::Left | Patch::Right => g.ly(),
                _ => g.lx(),
            };
            assert!(along.iter().all(|v| *v > 0.0 && *v < extent));
            assert!(along.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn patch_cells_follow_flat_layout() {
        let g = make_grid(3, 3, 3.0, 3.0).unwrap();
        assert_eq!(g.patch_cells(Patch::Left), [0, 1, 2]);
        assert_eq!(g.patch_cells(Patch::Right), [6, 7, 8]);
        assert_eq!(g.patch_cells(Patch::Bottom), [0, 3, 6]);
        assert_eq!(g.patch_cells(Patch::Top), [2, 5, 8]);
        assert!(!g.is_boundary_cell(1, 1));
    }

    #[test]
    fn patch_names_round_trip() {
        for p in Patch::SEED_ORDER {
            assert_eq!(Patch::from_name(p.name()), Some(p));
        }
        assert_eq!(Patch::from_name("front"), None);
    }
}
