//! Minimal SO(3) algebra on row-major 3x3 arrays.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Skew-symmetric matrix with `hat(a) b = a x b`.
#[inline]
pub fn hat(a: Vec3) -> Mat3 {
    [[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]]
}

#[inline]
pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

#[inline]
pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

#[inline]
pub fn transpose(m: &Mat3) -> Mat3 {
    [[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]]
}

/// `(sin θ / θ, (1 − cos θ) / θ², (θ − sin θ) / θ³)` with series near zero.
fn rodrigues_coeffs(theta2: f64) -> (f64, f64, f64) {
    if theta2 < 1e-8 {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0, 1.0 / 6.0 - theta2 / 120.0)
    } else {
        let th = theta2.sqrt();
        let (s, c) = th.sin_cos();
        (s / th, (1.0 - c) / theta2, (th - s) / (theta2 * th))
    }
}

/// Exponential map of a rotation vector (Rodrigues).
pub fn exp(phi: Vec3) -> Mat3 {
    let (a, b, _) = rodrigues_coeffs(dot(phi, phi));
    let k = hat(phi);
    let k2 = mat_mul(&k, &k);
    let mut r = IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] += a * k[i][j] + b * k2[i][j];
        }
    }
    r
}

/// Left Jacobian: `d/dε exp(φ + ε) ≈ hat(J_l(φ) ε) exp(φ)`.
pub fn left_jacobian(phi: Vec3) -> Mat3 {
    let (_, b, c) = rodrigues_coeffs(dot(phi, phi));
    let k = hat(phi);
    let k2 = mat_mul(&k, &k);
    let mut j = IDENTITY;
    for r in 0..3 {
        for s in 0..3 {
            j[r][s] += b * k[r][s] + c * k2[r][s];
        }
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| (a[i][j] - b[i][j]).abs() < tol))
    }

    #[test]
    fn exp_about_z() {
        let r = exp([0.0, 0.0, std::f64::consts::FRAC_PI_2]);
        let v = mat_vec(&r, [1.0, 0.0, 0.0]);
        assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_is_orthonormal() {
        let r = exp([0.3, -1.2, 0.7]);
        assert!(close(&mat_mul(&r, &transpose(&r)), &IDENTITY, 1e-14));
    }

    #[test]
    fn left_jacobian_matches_finite_difference() {
        let phi = [0.4, -0.2, 0.9];
        let jl = left_jacobian(phi);
        let h = 1e-6;
        for k in 0..3 {
            let mut p = phi;
            p[k] += h;
            let mut m = phi;
            m[k] -= h;
            let d = mat_mul(&exp(p), &transpose(&exp(m)));
            // d ≈ I + hat(2h J_l e_k)
            let w = [(d[2][1] - d[1][2]) / (4.0 * h), (d[0][2] - d[2][0]) / (4.0 * h), (d[1][0] - d[0][1]) / (4.0 * h)];
            for i in 0..3 {
                assert!((w[i] - jl[i][k]).abs() < 1e-8, "{k} {i}");
            }
        }
    }
}
