use num_complex::Complex64;

use super::CMatrix;

/// Matrix exponential (nalgebra's scaling-and-squaring Padé); non-finite input
/// yields an all-NaN matrix instead of looping.
pub fn matrix_exp(m: &CMatrix) -> CMatrix {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        let n = m.nrows();
        return CMatrix::from_element(n, n, Complex64::new(f64::NAN, f64::NAN));
    }
    m.exp()
}
