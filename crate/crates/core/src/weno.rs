//! Fifth-order WENO reconstruction of face values and face derivatives from
//! cell averages, and the linear cell-average to center-value conversion.

/// Which face of the center cell is reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The face at x_{i-1/2}.
    Left,
    /// The face at x_{i+1/2}.
    Right,
}

/// Five consecutive cell averages v_{i-2}..v_{i+2} with spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil5 {
    pub values: [f64; 5],
    pub h: f64,
}

impl Stencil5 {
    pub fn new(values: [f64; 5], h: f64) -> Self {
        debug_assert!(h > 0.0);
        Stencil5 { values, h }
    }

    fn oriented(&self, side: Side) -> [f64; 5] {
        match side {
            Side::Right => self.values,
            Side::Left => {
                let v = self.values;
                [v[4], v[3], v[2], v[1], v[0]]
            }
        }
    }
}

/// Smoothness-weight regularization and exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WenoParams {
    pub epsilon: f64,
    pub exponent: i32,
}

impl WenoParams {
    /// Exponent 0 makes the nonlinear weights equal the linear ones.
    pub fn linear() -> Self {
        WenoParams { epsilon: 1e-6, exponent: 0 }
    }
}

impl Default for WenoParams {
    fn default() -> Self {
        WenoParams { epsilon: 1e-6, exponent: 2 }
    }
}

const LINEAR_WEIGHTS: [f64; 3] = [0.1, 0.6, 0.3];

#[inline]
fn smoothness(v: &[f64; 5]) -> [f64; 3] {
    let sq = |a: f64| a * a;
    [
        13.0 / 12.0 * sq(v[0] - 2.0 * v[1] + v[2]) + 0.25 * sq(v[0] - 4.0 * v[1] + 3.0 * v[2]),
        13.0 / 12.0 * sq(v[1] - 2.0 * v[2] + v[3]) + 0.25 * sq(v[1] - v[3]),
        13.0 / 12.0 * sq(v[2] - 2.0 * v[3] + v[4]) + 0.25 * sq(3.0 * v[2] - 4.0 * v[3] + v[4]),
    ]
}

#[inline]
fn weights_from(beta: [f64; 3], params: &WenoParams) -> [f64; 3] {
    let mut alpha = [0.0; 3];
    for k in 0..3 {
        let b = params.epsilon + beta[k];
        let denom = match params.exponent {
            0 => 1.0,
            2 => b * b,
            p => b.powi(p),
        };
        alpha[k] = LINEAR_WEIGHTS[k] / denom;
    }
    let s = alpha[0] + alpha[1] + alpha[2];
    [alpha[0] / s, alpha[1] / s, alpha[2] / s]
}

/// Nonlinear weights for the right face of the center cell.
#[inline]
pub fn nonlinear_weights(v: &[f64; 5], params: &WenoParams) -> [f64; 3] {
    weights_from(smoothness(v), params)
}

#[inline]
fn candidate_values(v: &[f64; 5]) -> [f64; 3] {
    [
        (2.0 * v[0] - 7.0 * v[1] + 11.0 * v[2]) / 6.0,
        (-v[1] + 5.0 * v[2] + 2.0 * v[3]) / 6.0,
        (2.0 * v[2] + 5.0 * v[3] - v[4]) / 6.0,
    ]
}

/// Candidate derivatives at the right face, times h.
#[inline]
fn candidate_slopes(v: &[f64; 5]) -> [f64; 3] {
    let d12 = v[3] - v[2];
    [v[0] - 3.0 * v[1] + 2.0 * v[2], d12, d12]
}

/// Degree-4 derivative at the right face, times h.
#[inline]
fn quartic_slope(v: &[f64; 5]) -> f64 {
    (v[1] - 15.0 * v[2] + 15.0 * v[3] - v[4]) / 12.0
}

#[inline]
fn right_value(v: &[f64; 5], w: &[f64; 3]) -> f64 {
    let q = candidate_values(v);
    q[1] + w[0] * (q[0] - q[1]) + w[2] * (q[2] - q[1])
}

#[inline]
fn right_slope(v: &[f64; 5], w: &[f64; 3]) -> f64 {
    let s = candidate_slopes(v);
    let weighted = s[1] + w[0] * (s[0] - s[1]) + w[2] * (s[2] - s[1]);
    let linear = LINEAR_WEIGHTS[0] * s[0] + LINEAR_WEIGHTS[1] * s[1] + LINEAR_WEIGHTS[2] * s[2];
    weighted + (quartic_slope(v) - linear)
}

/// Reconstructed point value at the chosen face.
pub fn weno5_face_value(stencil: &Stencil5, side: Side) -> f64 {
    weno5_face_value_with(stencil, side, &WenoParams::default())
}

pub fn weno5_face_value_with(stencil: &Stencil5, side: Side, params: &WenoParams) -> f64 {
    let v = stencil.oriented(side);
    let w = nonlinear_weights(&v, params);
    right_value(&v, &w)
}

/// Reconstructed derivative along the axis at the chosen face. The three
/// candidate slopes are combined with the nonlinear weights and shifted by
/// the difference between the degree-4 slope and the linearly weighted one,
/// so smooth data gets the degree-4 result.
pub fn weno5_face_derivative(stencil: &Stencil5, side: Side) -> f64 {
    weno5_face_derivative_with(stencil, side, &WenoParams::default())
}

pub fn weno5_face_derivative_with(stencil: &Stencil5, side: Side, params: &WenoParams) -> f64 {
    weno5_face_with(stencil, side, params).1
}

/// Value and derivative at the chosen face sharing one set of weights.
#[inline]
pub fn weno5_face_with(stencil: &Stencil5, side: Side, params: &WenoParams) -> (f64, f64) {
    let v = stencil.oriented(side);
    let w = nonlinear_weights(&v, params);
    let slope = right_slope(&v, &w) / stencil.h;
    let sign = match side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    (right_value(&v, &w), sign * slope)
}

/// (value, derivative) at the left and the right face of the center cell,
/// sharing the smoothness indicators between both faces.
#[inline]
pub fn weno5_cell_faces(stencil: &Stencil5, params: &WenoParams) -> [(f64, f64); 2] {
    let v = stencil.values;
    let beta = smoothness(&v);
    let w_right = weights_from(beta, params);
    let w_left = weights_from([beta[2], beta[1], beta[0]], params);
    let m = [v[4], v[3], v[2], v[1], v[0]];
    [
        (right_value(&m, &w_left), -right_slope(&m, &w_left) / stencil.h),
        (right_value(&v, &w_right), right_slope(&v, &w_right) / stencil.h),
    ]
}

/// Value at the center of the middle cell of the degree-4 polynomial whose
/// cell averages match the stencil.
#[inline]
pub fn center_point_value(v: &[f64; 5]) -> f64 {
    let c = v[2];
    c + 3.0 / 640.0 * (v[0] + v[4] - 2.0 * c) - 29.0 / 480.0 * (v[1] + v[3] - 2.0 * c)
}
