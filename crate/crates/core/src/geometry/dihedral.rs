use crate::{Error, Result};

pub type Vec3 = [f64; 3];

const DEGENERATE_EPS: f64 = 1e-9;

#[inline]
pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub(crate) fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

/// Maps any finite angle in degrees onto (−180, 180].
pub fn wrap_degrees(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// Signed dihedral angle p1-p2-p3-p4 in degrees, IUPAC sign convention
/// (cis = 0, trans = 180). The result lies in (−180, 180].
pub fn dihedral(p1: Vec3, p2: Vec3, p3: Vec3, p4: Vec3) -> Result<f64> {
    if [p1, p2, p3, p4].iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dihedral input"));
    }
    let b1 = sub(p2, p1);
    let b2 = sub(p3, p2);
    let b3 = sub(p4, p3);

    let b2_len = norm(b2);
    if b2_len < DEGENERATE_EPS {
        return Err(Error::DegenerateGeometry("central bond has zero length"));
    }
    let n1 = cross(b1, b2);
    let n2 = cross(b2, b3);
    if norm(n1) < DEGENERATE_EPS || norm(n2) < DEGENERATE_EPS {
        return Err(Error::DegenerateGeometry("collinear atoms"));
    }

    let y = dot(cross(n1, n2), b2) / b2_len;
    let x = dot(n1, n2);
    let angle = y.atan2(x).to_degrees();
    Ok(if angle <= -180.0 { angle + 360.0 } else { angle })
}
