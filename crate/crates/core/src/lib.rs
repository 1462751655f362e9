//! Shared types for planar power-law N-body computations: the exponent,
//! cluster bookkeeping, the potential family and 2x2 complex blocks.

mod alpha;
mod cluster;
mod mat2;

pub use alpha::Alpha;
pub use cluster::{center_of_mass_project, ClusterConfig, ClusterIndex};
pub use mat2::{apply_j, rotate, rotate_sc, Mat2C};
pub use num_complex::Complex64;

pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("potential evaluated at non-positive distance {0}")]
    NonPositiveRadius(f64),
    #[error("index {index} out of range for {len} bodies")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid cluster sizes: {0}")]
    InvalidClusterSizes(String),
    #[error("invalid exponent alpha: {0} (need alpha >= 1)")]
    InvalidAlpha(String),
    #[error("masses must be positive and finite, got {0}")]
    InvalidMass(f64),
}

/// `phi_alpha(r)`.
pub fn phi(r: f64, alpha: Alpha) -> Result<f64, CoreError> {
    if !(r > 0.0) {
        return Err(CoreError::NonPositiveRadius(r));
    }
    Ok(alpha.phi(r))
}

/// `phi_alpha'(r) = -r^-alpha`.
pub fn dphi(r: f64, alpha: Alpha) -> Result<f64, CoreError> {
    if !(r > 0.0) {
        return Err(CoreError::NonPositiveRadius(r));
    }
    Ok(alpha.dphi(r))
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn norm2(a: Vec2) -> f64 {
    a[0] * a[0] + a[1] * a[1]
}
