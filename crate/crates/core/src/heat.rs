//! Explicit finite-difference steady heat conduction on a [`StructuredGrid`].
//!
//! Boundary conditions are imposed by overwriting the cells adjacent to each
//! patch with the patch value before every sweep; those cells then act as the
//! Dirichlet nodes of the five-point stencil applied to the interior.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{shape, CoreError};
use crate::field::FieldBuffer;
use crate::grid::{Patch, StructuredGrid};

/// Largest stencil coefficient for which the explicit sweep is stable.
pub const MAX_STABLE_GAMMA: f64 = 0.25;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// Stencil coefficient `diffusivity * dt / dx^2`.
pub fn compute_gamma(diffusivity: f64, dt: f64, dx: f64) -> f64 {
    diffusivity * dt / (dx * dx)
}

/// Dirichlet value(s) of one patch, in kelvin.
#[derive(Debug, Clone, PartialEq)]
pub enum PatchBc {
    Uniform(f64),
    /// One value per patch face, in face order.
    Faces(Vec<f64>),
}

impl PatchBc {
    fn value(&self, face: usize) -> f64 {
        match self {
            PatchBc::Uniform(v) => *v,
            PatchBc::Faces(v) => v[face],
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match self {
            PatchBc::Uniform(v) => (*v, *v),
            PatchBc::Faces(v) => v
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(*x), hi.max(*x))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditions {
    pub left: PatchBc,
    pub bottom: PatchBc,
    pub right: PatchBc,
    pub top: PatchBc,
}

impl BoundaryConditions {
    pub fn uniform(left: f64, bottom: f64, right: f64, top: f64) -> Self {
        Self {
            left: PatchBc::Uniform(left),
            bottom: PatchBc::Uniform(bottom),
            right: PatchBc::Uniform(right),
            top: PatchBc::Uniform(top),
        }
    }

    pub fn get(&self, patch: Patch) -> &PatchBc {
        match patch {
            Patch::Left => &self.left,
            Patch::Bottom => &self.bottom,
            Patch::Right => &self.right,
            Patch::Top => &self.top,
        }
    }

    pub fn get_mut(&mut self, patch: Patch) -> &mut PatchBc {
        match patch {
            Patch::Left => &mut self.left,
            Patch::Bottom => &mut self.bottom,
            Patch::Right => &mut self.right,
            Patch::Top => &mut self.top,
        }
    }

    /// Smallest and largest Dirichlet value over all patches.
    pub fn bounds(&self) -> (f64, f64) {
        Patch::SEED_ORDER
            .iter()
            .map(|p| self.get(*p).bounds())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
                (lo.min(a), hi.max(b))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatConfig {
    pub grid: StructuredGrid,
    /// Thermal diffusivity, m^2/s.
    pub diffusivity: f64,
    /// Pseudo-time step, s.
    pub dt: f64,
    pub bc: BoundaryConditions,
    /// Convergence threshold on the largest per-cell change of one sweep, K.
    pub tol: f64,
    pub max_iters: usize,
    /// Value every cell starts from before the first boundary seeding, K.
    pub initial_temperature: f64,
}

impl HeatConfig {
    /// Config with the default tolerance and iteration cap. Cells start at the
    /// midpoint of the boundary value range.
    pub fn new(grid: StructuredGrid, diffusivity: f64, dt: f64, bc: BoundaryConditions) -> Self {
        let (lo, hi) = bc.bounds();
        Self {
            grid,
            diffusivity,
            dt,
            bc,
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            initial_temperature: 0.5 * (lo + hi),
        }
    }

    /// Validated stencil coefficient.
    pub fn gamma(&self) -> Result<f64, CoreError> {
        if !(self.diffusivity > 0.0 && self.dt > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "diffusivity and time step must be positive, got {} and {}",
                self.diffusivity, self.dt
            )));
        }
        let gamma = compute_gamma(self.diffusivity, self.dt, self.grid.dx());
        if !(gamma <= MAX_STABLE_GAMMA) {
            return Err(CoreError::InvalidParameter(format!(
                "gamma = {gamma} exceeds the explicit stability limit {MAX_STABLE_GAMMA}"
            )));
        }
        Ok(gamma)
    }

    pub fn validate(&self) -> Result<f64, CoreError> {
        let gamma = self.gamma()?;
        for p in Patch::SEED_ORDER {
            if let PatchBc::Faces(v) = self.bc.get(p) {
                shape("patch face values", self.grid.patch_len(p), v.len())?;
            }
        }
        if !(self.tol > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(gamma)
    }
}

fn check_temperature(t: &FieldBuffer, grid: &StructuredGrid) -> Result<(), CoreError> {
    t.expect_components("temperature components", 1)?;
    shape("temperature cell count", grid.n_cells(), t.n_elements())
}

/// Writes each patch value into its adjacent cells, patches in
/// [`Patch::SEED_ORDER`].
pub fn seed_boundary_cells(
    t: &mut FieldBuffer,
    grid: &StructuredGrid,
    bc: &BoundaryConditions,
) -> Result<(), CoreError> {
    check_temperature(t, grid)?;
    let values = t.as_mut_slice();
    for patch in Patch::SEED_ORDER {
        let patch_bc = bc.get(patch);
        if let PatchBc::Faces(v) = patch_bc {
            shape("patch face values", grid.patch_len(patch), v.len())?;
        }
        for (face, cell) in grid.patch_cells(patch).into_iter().enumerate() {
            values[cell] = patch_bc.value(face);
        }
    }
    Ok(())
}

/// One in-place sweep of the explicit stencil over the interior cells.
///
/// Cells are visited with `i` outer and `j` inner, so a cell sees the already
/// updated values of its `(i - 1, j)` and `(i, j - 1)` neighbours. Boundary
/// cells are left as they are.
pub fn native_fd_step(
    t: &mut FieldBuffer,
    gamma: f64,
    grid: &StructuredGrid,
) -> Result<(), CoreError> {
    check_temperature(t, grid)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let t = t.as_mut_slice();
    for i in 1..nx.saturating_sub(1) {
        for j in 1..ny.saturating_sub(1) {
            let c = i * ny + j;
            t[c] = gamma * (t[c + 1] + t[c - 1] + t[c + ny] + t[c - ny] - 4.0 * t[c]) + t[c];
        }
    }
    Ok(())
}

/// Jacobi variant of [`native_fd_step`]: every interior update reads the
/// previous sweep only. Shares the fixed point of the in-place sweep.
pub fn jacobi_fd_step(
    t: &mut FieldBuffer,
    gamma: f64,
    grid: &StructuredGrid,
) -> Result<(), CoreError> {
    check_temperature(t, grid)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let old = t.as_slice().to_vec();
    let t = t.as_mut_slice();
    for i in 1..nx.saturating_sub(1) {
        for j in 1..ny.saturating_sub(1) {
            let c = i * ny + j;
            t[c] = gamma * (old[c + 1] + old[c - 1] + old[c + ny] + old[c - ny] - 4.0 * old[c])
                + old[c];
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub temperature: FieldBuffer,
    pub iterations: usize,
    /// Largest per-cell change of each sweep.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl SolveReport {
    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    /// Temperature at the grid centre: the mean of the one, two or four cells
    /// that straddle it.
    pub fn centre_value(&self, grid: &StructuredGrid) -> f64 {
        let is = centre_indices(grid.nx());
        let js = centre_indices(grid.ny());
        let t = self.temperature.as_slice();
        let mut sum = 0.0;
        let mut count = 0.0;
        for i in is.iter().flatten() {
            for j in js.iter().flatten() {
                sum += t[grid.cell_index(*i, *j)];
                count += 1.0;
            }
        }
        sum / count
    }

    /// Profile along the vertical line through the grid centre, bottom to
    /// top, as `(y, T)` pairs at the cell-centre heights.
    pub fn centre_line(&self, grid: &StructuredGrid) -> Vec<(f64, f64)> {
        let is = centre_indices(grid.nx());
        let t = self.temperature.as_slice();
        (0..grid.ny())
            .map(|j| {
                let cols: Vec<f64> = is
                    .iter()
                    .flatten()
                    .map(|i| t[grid.cell_index(*i, j)])
                    .collect();
                let y = grid.cell_centre(0, j).1;
                (y, cols.iter().sum::<f64>() / cols.len() as f64)
            })
            .collect()
    }
}

fn centre_indices(n: usize) -> [Option<usize>; 2] {
    if n % 2 == 1 {
        [Some(n / 2), None]
    } else {
        [Some(n / 2 - 1), Some(n / 2)]
    }
}

/// Seeds and sweeps until the largest per-cell change drops below
/// `config.tol` or `config.max_iters` sweeps have run.
///
/// `step` performs one sweep in place given the validated gamma.
pub fn solve_steady<E, S>(config: &HeatConfig, step: S) -> Result<SolveReport, E>
where
    E: From<CoreError>,
    S: FnMut(&mut FieldBuffer, f64) -> Result<(), E>,
{
    solve_with_boundary_updates(config, step, |_, _, _| Ok(()))
}

/// [`solve_steady`] with a hook that may rewrite the boundary conditions
/// before each sweep; it receives the sweep number and the pseudo time.
pub fn solve_with_boundary_updates<E, S, U>(
    config: &HeatConfig,
    mut step: S,
    mut update: U,
) -> Result<SolveReport, E>
where
    E: From<CoreError>,
    S: FnMut(&mut FieldBuffer, f64) -> Result<(), E>,
    U: FnMut(usize, f64, &mut BoundaryConditions) -> Result<(), E>,
{
    let gamma = config.validate()?;
    let grid = &config.grid;
    let mut t = FieldBuffer::filled(grid.n_cells(), 1, config.initial_temperature)?;
    let mut before = t.clone();
    let mut bc = config.bc.clone();
    let mut residual_history = Vec::new();
    let mut converged = false;

    for iteration in 0..config.max_iters {
        update(iteration, iteration as f64 * config.dt, &mut bc)?;
        seed_boundary_cells(&mut t, grid, &bc)?;
        before.as_mut_slice().copy_from_slice(t.as_slice());
        step(&mut t, gamma)?;
        check_temperature(&t, grid)?;
        let residual = t
            .as_slice()
            .iter()
            .zip(before.as_slice())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        residual_history.push(residual);
        if residual < config.tol {
            converged = true;
            break;
        }
    }

    Ok(SolveReport {
        temperature: t,
        iterations: residual_history.len(),
        residual_history,
        converged,
    })
}
