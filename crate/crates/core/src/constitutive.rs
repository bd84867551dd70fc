//! Linear isotropic elasticity and its exact two-layer network surrogate.
//!
//! Stress and strain fields use [`SymmTensor`](crate::SymmTensor) packing:
//! diagonal terms at indices 0..3, shear terms at 3..6.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::CoreError;
use crate::field::FieldBuffer;

/// Width of the ReLU hidden layer of the surrogate network.
pub const HIDDEN_WIDTH: usize = 20;
/// Components of a packed symmetric tensor.
pub const TENSOR: usize = 6;

/// Lamé parameters, both in Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LameParams {
    pub lambda: f64,
    pub mu: f64,
}

impl LameParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self, CoreError> {
        if !(mu > 0.0 && 3.0 * lambda + 2.0 * mu > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "Lame parameters must satisfy mu > 0 and 3 lambda + 2 mu > 0, got lambda = {lambda}, mu = {mu}"
            )));
        }
        Ok(Self { lambda, mu })
    }

    /// The 6x6 matrix `C` with `sigma = C eps` in packed form.
    pub fn stiffness(&self) -> [[f64; TENSOR]; TENSOR] {
        let mut c = [[0.0; TENSOR]; TENSOR];
        for (k, row) in c.iter_mut().enumerate() {
            row[k] = 2.0 * self.mu;
            if k < 3 {
                for entry in row.iter_mut().take(3) {
                    *entry += self.lambda;
                }
            }
        }
        c
    }
}

/// Converts Young's modulus and Poisson's ratio to Lamé parameters.
pub fn lame_from_engineering(youngs: f64, poisson: f64) -> Result<LameParams, CoreError> {
    if !(youngs > 0.0) || !(poisson > -1.0 && poisson < 0.5) {
        return Err(CoreError::InvalidParameter(format!(
            "need E > 0 and -1 < nu < 0.5, got E = {youngs}, nu = {poisson}"
        )));
    }
    let mu = youngs / (2.0 * (1.0 + poisson));
    let lambda = youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    LameParams::new(lambda, mu)
}

/// Hooke's law `sigma = 2 mu eps + lambda tr(eps) I`, row by row.
pub fn hooke_native(strain: &FieldBuffer, params: &LameParams) -> Result<FieldBuffer, CoreError> {
    strain.expect_components("strain components", TENSOR)?;
    let two_mu = 2.0 * params.mu;
    let lambda = params.lambda;
    let mut data = Vec::with_capacity(strain.as_slice().len());
    for e in strain.rows() {
        let trace = lambda * (e[0] + e[1] + e[2]);
        data.extend_from_slice(&[
            two_mu * e[0] + trace,
            two_mu * e[1] + trace,
            two_mu * e[2] + trace,
            two_mu * e[3],
            two_mu * e[4],
            two_mu * e[5],
        ]);
    }
    FieldBuffer::new(TENSOR, data)
}

/// Per-component affine map of `[min, max]` onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinMaxScaler {
    pub min: [f64; TENSOR],
    pub max: [f64; TENSOR],
}

impl MinMaxScaler {
    pub fn new(min: [f64; TENSOR], max: [f64; TENSOR]) -> Result<Self, CoreError> {
        let s = Self { min, max };
        s.validate()?;
        Ok(s)
    }

    /// Same `[-half_width, half_width]` range on every component.
    pub fn symmetric(half_width: f64) -> Result<Self, CoreError> {
        Self::new([-half_width; TENSOR], [half_width; TENSOR])
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        for k in 0..TENSOR {
            let (lo, hi) = (self.min[k], self.max[k]);
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(CoreError::InvalidParameter(format!(
                    "scaler component {k} needs finite min < max, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn span(&self, k: usize) -> f64 {
        self.max[k] - self.min[k]
    }

    pub fn transform(&self, row: &[f64], out: &mut [f64]) {
        for k in 0..TENSOR {
            out[k] = (row[k] - self.min[k]) / self.span(k);
        }
    }

    pub fn inverse_transform(&self, row: &[f64], out: &mut [f64]) {
        for k in 0..TENSOR {
            out[k] = row[k] * self.span(k) + self.min[k];
        }
    }

    pub fn contains(&self, row: &[f64]) -> bool {
        row.iter()
            .enumerate()
            .all(|(k, v)| *v >= self.min[k] && *v <= self.max[k])
    }
}

/// Weights of the 6 -> 20 (ReLU) -> 6 (linear) network plus its scalers.
///
/// Matrices are stored row-major with the input index first, so a layer is
/// `out = in . w + b`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightBundle {
    pub w0: [[f64; HIDDEN_WIDTH]; TENSOR],
    pub b0: [f64; HIDDEN_WIDTH],
    pub w1: [[f64; TENSOR]; HIDDEN_WIDTH],
    pub b1: [f64; TENSOR],
    pub x_scaler: MinMaxScaler,
    pub y_scaler: MinMaxScaler,
}

impl WeightBundle {
    pub fn validate(&self) -> Result<(), CoreError> {
        self.x_scaler.validate()?;
        self.y_scaler.validate()
    }

    /// Number of trainable parameters (weights and biases).
    pub const fn parameter_count() -> usize {
        TENSOR * HIDDEN_WIDTH + HIDDEN_WIDTH + HIDDEN_WIDTH * TENSOR + TENSOR
    }

    /// Scale, dense + ReLU, dense, unscale; one row of strain.
    pub fn predict_row(&self, strain: &[f64], stress: &mut [f64]) {
        let mut x = [0.0; TENSOR];
        self.x_scaler.transform(strain, &mut x);
        let mut hidden = self.b0;
        for (xi, w_row) in x.iter().zip(&self.w0) {
            for (h, w) in hidden.iter_mut().zip(w_row) {
                *h += xi * w;
            }
        }
        let mut out = self.b1;
        for (h, w_row) in hidden.iter().zip(&self.w1) {
            let h = h.max(0.0);
            for (o, w) in out.iter_mut().zip(w_row) {
                *o += h * w;
            }
        }
        self.y_scaler.inverse_transform(&out, stress);
    }

    pub fn predict(&self, strain: &FieldBuffer) -> Result<FieldBuffer, CoreError> {
        strain.expect_components("strain components", TENSOR)?;
        let mut stress = FieldBuffer::zeros(strain.n_elements(), TENSOR)?;
        for (e, s) in strain.rows().zip(stress.rows_mut()) {
            self.predict_row(e, s);
        }
        Ok(stress)
    }
}

/// Builds network weights that reproduce Hooke's law on `strain_range`.
///
/// Scaled inputs lie in `[0, 1]`, so routing them through six hidden units
/// with unit weight and zero bias makes the ReLU layer an identity. The output
/// layer then carries the affine map from scaled strain to scaled stress. The
/// stress scaler spans the image of the strain box under the law; the other
/// fourteen hidden units are inert.
pub fn build_exact_nn_weights(
    params: &LameParams,
    strain_range: &MinMaxScaler,
) -> Result<WeightBundle, CoreError> {
    strain_range.validate()?;
    let c = params.stiffness();

    let mut y_min = [0.0; TENSOR];
    let mut y_max = [0.0; TENSOR];
    for k in 0..TENSOR {
        for j in 0..TENSOR {
            let a = c[k][j] * strain_range.min[j];
            let b = c[k][j] * strain_range.max[j];
            y_min[k] += a.min(b);
            y_max[k] += a.max(b);
        }
    }
    let y_scaler = MinMaxScaler::new(y_min, y_max)?;

    let mut w0 = [[0.0; HIDDEN_WIDTH]; TENSOR];
    for (j, row) in w0.iter_mut().enumerate() {
        row[j] = 1.0;
    }

    let mut w1 = [[0.0; TENSOR]; HIDDEN_WIDTH];
    let mut b1 = [0.0; TENSOR];
    for k in 0..TENSOR {
        let dy = y_scaler.span(k);
        let mut offset = -y_min[k];
        for j in 0..TENSOR {
            w1[j][k] = c[k][j] * strain_range.span(j) / dy;
            offset += c[k][j] * strain_range.min[j];
        }
        b1[k] = offset / dy;
    }

    Ok(WeightBundle {
        w0,
        b0: [0.0; HIDDEN_WIDTH],
        w1,
        b1,
        x_scaler: *strain_range,
        y_scaler,
    })
}

/// Deterministic strain field, uniform per component within `range`.
pub fn synth_strain_field(n: usize, seed: u64, range: &MinMaxScaler) -> FieldBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * TENSOR);
    for _ in 0..n {
        for k in 0..TENSOR {
            data.push(range.min[k] + unit_f64(&mut rng) * range.span(k));
        }
    }
    FieldBuffer::new(TENSOR, data).expect("six components")
}

/// Uniform draw from `[0, 1)` using the top 53 bits.
fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
