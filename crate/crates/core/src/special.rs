//! Special functions: sinc and the error-function family.

use errorfunctions::{ComplexErrorFunctions, RealErrorFunctions};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Documented box for [`erf_complex`]: |Re z|, |Im z| <= this.
pub const ERF_RANGE: f64 = 30.0;

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

pub fn erf(x: f64) -> f64 {
    RealErrorFunctions::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    RealErrorFunctions::erfc(x)
}

/// Scaled complementary error function e^{x^2} erfc(x).
pub fn erfcx(x: f64) -> f64 {
    x.erfcx()
}

/// Error function of a complex argument.
///
/// Values whose magnitude exceeds `f64::MAX` (|Im z| above ~26.6 near the
/// imaginary axis) come back as infinities; they are inside the box but
/// not representable.
pub fn erf_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.abs() <= ERF_RANGE && z.im.abs() <= ERF_RANGE) {
        return Err(Error::OutOfRange(format!("{z}")));
    }
    Ok(z.erf())
}

/// e^{z^2} erfc(z) for complex z. Bounded for Re z >= 0, which is how the
/// Fock and coherent rates use it.
pub fn erfcx_complex(z: Complex64) -> Complex64 {
    z.erfcx()
}
