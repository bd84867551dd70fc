//! Field containers, symmetric tensor packing and comparison norms.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{shape, CoreError};

/// Component indices of a packed symmetric 3x3 tensor.
///
/// Diagonal terms come first, shear terms last: `[xx, yy, zz, xy, yz, zx]`.
/// This is the order the guest constitutive laws index with, and it is not
/// the `(xx, xy, xz, yy, yz, zz)` order some finite-volume codes use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmTensor {
    Xx = 0,
    Yy = 1,
    Zz = 2,
    Xy = 3,
    Yz = 4,
    Zx = 5,
}

impl SymmTensor {
    pub const COMPONENTS: usize = 6;
    pub const DIAGONAL: [SymmTensor; 3] = [SymmTensor::Xx, SymmTensor::Yy, SymmTensor::Zz];
    pub const SHEAR: [SymmTensor; 3] = [SymmTensor::Xy, SymmTensor::Yz, SymmTensor::Zx];

    pub const fn index(self) -> usize {
        self as usize
    }
}

/// Contiguous row-major buffer of `n_elements x n_components` doubles.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FieldBuffer {
    data: Vec<f64>,
    n_components: usize,
}

fn check_components(n_components: usize) -> Result<(), CoreError> {
    match n_components {
        1 | 3 | 6 | 9 => Ok(()),
        other => Err(CoreError::InvalidComponentCount(other)),
    }
}

impl FieldBuffer {
    /// Wraps `data`, whose length must be a multiple of `n_components`.
    pub fn new(n_components: usize, data: Vec<f64>) -> Result<Self, CoreError> {
        check_components(n_components)?;
        if data.len() % n_components != 0 {
            return Err(CoreError::ShapeMismatch {
                what: "flat length (multiple of component count)",
                expected: (data.len() / n_components + 1) * n_components,
                found: data.len(),
            });
        }
        Ok(Self { data, n_components })
    }

    pub fn zeros(n_elements: usize, n_components: usize) -> Result<Self, CoreError> {
        Self::filled(n_elements, n_components, 0.0)
    }

    pub fn filled(n_elements: usize, n_components: usize, value: f64) -> Result<Self, CoreError> {
        check_components(n_components)?;
        Ok(Self {
            data: vec![value; n_elements * n_components],
            n_components,
        })
    }

    /// Builds a scalar field (one component per element).
    pub fn scalar(data: Vec<f64>) -> Self {
        Self {
            data,
            n_components: 1,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.data.len() / self.n_components
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_elements(), self.n_components)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, element: usize, component: usize) -> Option<f64> {
        if component >= self.n_components {
            return None;
        }
        self.data
            .get(element * self.n_components + component)
            .copied()
    }

    pub fn row(&self, element: usize) -> &[f64] {
        let c = self.n_components;
        &self.data[element * c..(element + 1) * c]
    }

    pub fn row_mut(&mut self, element: usize) -> &mut [f64] {
        let c = self.n_components;
        &mut self.data[element * c..(element + 1) * c]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n_components)
    }

    pub fn rows_mut(&mut self) -> core::slice::ChunksExactMut<'_, f64> {
        self.data.chunks_exact_mut(self.n_components)
    }

    /// Largest absolute value over all components, 0 for an empty field.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub(crate) fn expect_components(&self, what: &'static str, c: usize) -> Result<(), CoreError> {
        shape(what, c, self.n_components)
    }
}

/// Symmetric part of a displacement gradient field.
///
/// Input rows are full 3x3 tensors in row-major order
/// `(xx, xy, xz, yx, yy, yz, zx, zy, zz)`; output rows use [`SymmTensor`]
/// packing.
pub fn symmetrize_gradient(grad: &FieldBuffer) -> Result<FieldBuffer, CoreError> {
    grad.expect_components("displacement gradient components", 9)?;
    let mut data = Vec::with_capacity(grad.n_elements() * 6);
    for g in grad.rows() {
        data.extend_from_slice(&[
            g[0],
            g[4],
            g[8],
            0.5 * (g[1] + g[3]),
            0.5 * (g[5] + g[7]),
            0.5 * (g[6] + g[2]),
        ]);
    }
    FieldBuffer::new(6, data)
}

/// Expands packed symmetric tensors back to full row-major 3x3 form.
pub fn expand_symmetric(tensor: &FieldBuffer) -> Result<FieldBuffer, CoreError> {
    tensor.expect_components("symmetric tensor components", 6)?;
    let mut data = Vec::with_capacity(tensor.n_elements() * 9);
    for s in tensor.rows() {
        let [xx, yy, zz, xy, yz, zx] = [s[0], s[1], s[2], s[3], s[4], s[5]];
        data.extend_from_slice(&[xx, xy, zx, xy, yy, yz, zx, yz, zz]);
    }
    FieldBuffer::new(9, data)
}

/// Difference norms between two fields of identical shape.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorNorms {
    /// Mean over elements of the per-element Euclidean norm of the difference.
    pub l2_mean: f64,
    /// Largest absolute component difference.
    pub linf: f64,
}

pub fn error_norms(a: &FieldBuffer, b: &FieldBuffer) -> Result<ErrorNorms, CoreError> {
    shape("component count", a.n_components(), b.n_components())?;
    shape("element count", a.n_elements(), b.n_elements())?;
    let n = a.n_elements();
    if n == 0 {
        return Ok(ErrorNorms::default());
    }
    let mut linf = 0.0_f64;
    let mut l2_sum = 0.0_f64;
    for (ra, rb) in a.rows().zip(b.rows()) {
        let mut sq = 0.0;
        for (x, y) in ra.iter().zip(rb) {
            let d = (x - y).abs();
            linf = linf.max(d);
            sq += d * d;
        }
        l2_sum += libm::sqrt(sq);
    }
    Ok(ErrorNorms {
        l2_mean: l2_sum / n as f64,
        linf,
    })
}
