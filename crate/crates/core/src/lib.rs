//! Numerical kernels shared by the `fieldbridge` host.
//!
//! Everything in this crate is allocation-only: no IO, no clocks, no guest
//! runtime. That keeps the native oracles (the Hooke law, the explicit heat
//! stencil, the lid profile) usable from `no_std` targets and lets the host
//! crate compare its scripted paths against them without sharing code paths.
//!
//! Field data is stored row-major in [`FieldBuffer`]: element `i`, component
//! `j` lives at flat index `i * n_components + j`.
#![no_std]
#![forbid(unsafe_code)]
// Parameter checks are written as `!(x > 0.0)` so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod constitutive;
pub mod error;
pub mod field;
pub mod grid;
pub mod heat;
pub mod profile;

pub use constitutive::{
    build_exact_nn_weights, hooke_native, lame_from_engineering, synth_strain_field, LameParams,
    MinMaxScaler, WeightBundle, HIDDEN_WIDTH,
};
pub use error::CoreError;
pub use field::{error_norms, symmetrize_gradient, ErrorNorms, FieldBuffer, SymmTensor};
pub use grid::{make_grid, Patch, StructuredGrid};
pub use heat::{
    compute_gamma, jacobi_fd_step, native_fd_step, seed_boundary_cells, solve_steady,
    solve_with_boundary_updates, BoundaryConditions, HeatConfig, PatchBc, SolveReport,
    MAX_STABLE_GAMMA,
};
