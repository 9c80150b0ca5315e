//! Scalar field abstraction.
//!
//! The spectral and block kernels are generic over the matrix entry type:
//! `f64` for real representations and `Complex<f64>` for complex ones.
//! Eigenvalue magnitudes, determinant magnitudes and tolerances are always
//! `f64`.

use nalgebra::ComplexField;
use num_complex::Complex;

/// Matrix entry type: `f64` or `Complex<f64>`.
pub trait Field: ComplexField<RealField = f64> + Copy {
    /// Embeds the entry into `Complex<f64>`.
    fn to_c64(self) -> Complex<f64>;
}

impl Field for f64 {
    fn to_c64(self) -> Complex<f64> {
        Complex::new(self, 0.0)
    }
}

impl Field for Complex<f64> {
    fn to_c64(self) -> Complex<f64> {
        self
    }
}
