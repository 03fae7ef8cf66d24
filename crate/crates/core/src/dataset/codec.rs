use crate::geometry::wrap_degrees;
use crate::{Error, Result};

const AMBIGUOUS_EPS: f64 = 1e-12;

/// sin/cos representation of an angle given in degrees.
pub fn encode_angle(theta: Option<f64>) -> Result<(f64, f64)> {
    let theta = theta.ok_or(Error::UndefinedAngle)?;
    if !theta.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    let (s, c) = theta.to_radians().sin_cos();
    Ok((s, c))
}

/// Recovers an angle in (−180, 180] from a possibly unnormalized sin/cos pair.
pub fn decode_angle(s: f64, c: f64) -> Result<f64> {
    if !s.is_finite() || !c.is_finite() {
        return Err(Error::NonFinite("sin/cos pair"));
    }
    if s.abs() < AMBIGUOUS_EPS && c.abs() < AMBIGUOUS_EPS {
        return Err(Error::AmbiguousAngle { sin: s, cos: c });
    }
    Ok(wrap_degrees(s.atan2(c).to_degrees()))
}

/// Stateless pairing of [`encode_angle`] and [`decode_angle`].
#[derive(Debug, Clone, Copy, Default)]
pub struct AngleCodec;

impl AngleCodec {
    pub fn encode(&self, theta: Option<f64>) -> Result<(f64, f64)> {
        encode_angle(theta)
    }

    pub fn decode(&self, s: f64, c: f64) -> Result<f64> {
        decode_angle(s, c)
    }
}
