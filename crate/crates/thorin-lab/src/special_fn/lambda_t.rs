//! The order-t angular distribution function on ratios: for t in (0,1),
//!
//!   lambda_t(y) = 1 - theta / (pi t),  theta = atan2(sin(pi t), cos(pi t) + y)
//!
//! maps [0, inf] monotonically onto [0, 1]. It converts ratios of clipped
//! negative moments (or of dual density values) into distribution-function
//! values during mixing-law recovery, and lambda_t_inv undoes it.

use crate::error::{Error, Result};

pub fn lambda_t(t: f64, y: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain(format!("lambda_t needs t in (0,1), got {t}")));
    }
    if y.is_nan() {
        return Err(Error::domain("lambda_t: ratio is NaN"));
    }
    if y < 0.0 {
        return Err(Error::domain(format!("lambda_t needs y >= 0, got {y}")));
    }
    if y.is_infinite() {
        return Ok(1.0);
    }
    let pit = std::f64::consts::PI * t;
    // theta in (0, pi): the angle of the point (cos(pi t) + y, sin(pi t))
    let theta = pit.sin().atan2(pit.cos() + y);
    Ok(1.0 - theta / pit)
}

/// Inverse on (0,1): lambda_t_inv(x) = sin(pi t x) / sin(pi t (1 - x)).
pub fn lambda_t_inv(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain(format!("lambda_t_inv needs t in (0,1), got {t}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("lambda_t_inv needs x in [0,1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(f64::INFINITY);
    }
    let pit = std::f64::consts::PI * t;
    Ok((pit * x).sin() / (pit * (1.0 - x)).sin())
}
