//! Minimal 3-vector helpers over `[f64; 3]`.

pub type V3 = [f64; 3];

#[inline]
pub fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn normalize(a: V3) -> V3 {
    scale(a, 1.0 / norm(a))
}

#[inline]
pub fn det3(a: V3, b: V3, c: V3) -> f64 {
    dot(a, cross(b, c))
}

#[inline]
pub fn neg(a: V3) -> V3 {
    [-a[0], -a[1], -a[2]]
}

/// Oriented orthonormal frame `(a, b)` of the tangent plane of the unit sphere at `u`,
/// with `det(u, a, b) = +1`.
pub fn sphere_frame(u: V3) -> (V3, V3) {
    let reference = if u[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let a = normalize(cross(u, reference));
    let b = cross(u, a);
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_positively_oriented() {
        for u in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], normalize([1.0, -2.0, 0.3])] {
            let (a, b) = sphere_frame(u);
            assert!((det3(u, a, b) - 1.0).abs() < 1e-14);
            assert!(dot(u, a).abs() < 1e-14 && dot(a, b).abs() < 1e-14);
        }
    }
}
