//! Small fixed-size vector helpers. Positions are in millimetres; 2D networks
//! keep `z = 0`.

pub type Point = [f64; 3];

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Unit vector along `a`, or `None` for a (near) zero vector.
pub fn normalize(a: Point) -> Option<Point> {
    let n = norm(a);
    if n > 1e-12 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

/// Rotates `v` about the z axis. Uses `libm` so results do not depend on the
/// platform's math library.
pub fn rotate_z(v: Point, angle: f64) -> Point {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

/// Rodrigues rotation of `v` about the unit `axis`.
pub fn rotate_about(v: Point, axis: Point, angle: f64) -> Point {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    let term1 = scale(v, c);
    let term2 = scale(cross(axis, v), s);
    let term3 = scale(axis, dot(axis, v) * (1.0 - c));
    add(add(term1, term2), term3)
}

/// Some unit vector perpendicular to the unit vector `v`.
pub fn any_perpendicular(v: Point) -> Point {
    let helper = if v[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    normalize(cross(v, helper)).unwrap_or([0.0, 0.0, 1.0])
}
