//! Row-major 2×2 real matrices and the one-parameter subgroups of SL₂(ℝ)
//! used throughout the crate.

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[inline]
pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

#[inline]
pub fn apply(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

#[inline]
pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Inverse of a matrix; `None` when singular.
pub fn inverse(a: &Mat2) -> Option<Mat2> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

/// Matrix whose columns are `c0` and `c1`.
#[inline]
pub fn from_columns(c0: [f64; 2], c1: [f64; 2]) -> Mat2 {
    [[c0[0], c1[0]], [c0[1], c1[1]]]
}

#[inline]
pub fn column(a: &Mat2, j: usize) -> [f64; 2] {
    [a[0][j], a[1][j]]
}

/// `a_s = diag(e^s, e^{-s})`.
pub fn diagonal_flow(s: f64) -> Mat2 {
    [[s.exp(), 0.0], [0.0, (-s).exp()]]
}

/// `u_x = [[1, x], [0, 1]]`.
pub fn upper_unipotent(x: f64) -> Mat2 {
    [[1.0, x], [0.0, 1.0]]
}

/// `w_y = [[1, 0], [y, 1]]`.
pub fn lower_unipotent(y: f64) -> Mat2 {
    [[1.0, 0.0], [y, 1.0]]
}

/// Counterclockwise rotation by `theta`.
pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

pub fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut m = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}
