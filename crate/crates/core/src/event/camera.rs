use crate::error::DataError;

/// Pinhole intrinsics with radial-tangential distortion `(k1, k2, p1, p2, k3)`.
///
/// Undistorted normalized coordinates of every integral pixel are cached in a
/// lookup table at construction.
#[derive(Debug, Clone)]
pub struct CameraGeometry {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub dist: [f64; 5],
    lut: Vec<[f64; 2]>,
}

impl PartialEq for CameraGeometry {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.fx == other.fx
            && self.fy == other.fy
            && self.cx == other.cx
            && self.cy == other.cy
            && self.dist == other.dist
    }
}

impl CameraGeometry {
    #[allow(clippy::too_many_arguments)]
    pub fn new(width: usize, height: usize, fx: f64, fy: f64, cx: f64, cy: f64, dist: [f64; 5]) -> Result<Self, DataError> {
        if width == 0 || height == 0 {
            return Err(DataError::Geometry("sensor size must be positive".into()));
        }
        if !(fx > 0.0 && fy > 0.0) {
            return Err(DataError::Geometry(format!("focal lengths must be positive (fx={fx}, fy={fy})")));
        }
        if !(0.0..width as f64).contains(&cx) || !(0.0..height as f64).contains(&cy) {
            return Err(DataError::Geometry(format!("principal point ({cx}, {cy}) outside the sensor")));
        }
        if dist.iter().any(|d| !d.is_finite()) {
            return Err(DataError::Geometry("distortion coefficients must be finite".into()));
        }
        let mut cam = Self { width, height, fx, fy, cx, cy, dist, lut: Vec::new() };
        let mut lut = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                lut.push(cam.undistort_iterative(x as f64, y as f64));
            }
        }
        cam.lut = lut;
        Ok(cam)
    }

    /// Distortion-free camera with the principal point at the image center.
    pub fn pinhole(width: usize, height: usize, f: f64) -> Self {
        Self::new(width, height, f, f, (width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0, [0.0; 5]).expect("valid pinhole geometry")
    }

    pub fn is_distortion_free(&self) -> bool {
        self.dist.iter().all(|&d| d == 0.0)
    }

    /// Whether `(x, y)` rounds to a pixel of the sensor; pixel centres sit
    /// at integer coordinates.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= -0.5 && y >= -0.5 && x < self.width as f64 - 0.5 && y < self.height as f64 - 0.5
    }

    /// Apply the distortion model to normalized coordinates.
    pub fn distort_normalized(&self, x: f64, y: f64) -> [f64; 2] {
        let [k1, k2, p1, p2, k3] = self.dist;
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
        [x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x), y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y]
    }

    /// Normalized undistorted coordinates to (distorted) pixel coordinates.
    pub fn distort(&self, xn: f64, yn: f64) -> [f64; 2] {
        let [xd, yd] = self.distort_normalized(xn, yn);
        [self.fx * xd + self.cx, self.fy * yd + self.cy]
    }

    /// Pinhole projection of normalized coordinates, no distortion.
    pub fn project_undistorted(&self, xn: f64, yn: f64) -> [f64; 2] {
        [self.fx * xn + self.cx, self.fy * yn + self.cy]
    }

    /// Pixel coordinates to normalized undistorted coordinates. Integral
    /// in-bounds pixels hit the lookup table.
    pub fn undistort(&self, x: f64, y: f64) -> [f64; 2] {
        if self.is_distortion_free() {
            return [(x - self.cx) / self.fx, (y - self.cy) / self.fy];
        }
        if x.fract() == 0.0 && y.fract() == 0.0 && self.contains(x, y) {
            return self.lut[y as usize * self.width + x as usize];
        }
        self.undistort_iterative(x, y)
    }

    fn undistort_iterative(&self, x: f64, y: f64) -> [f64; 2] {
        let xd = (x - self.cx) / self.fx;
        let yd = (y - self.cy) / self.fy;
        if self.is_distortion_free() {
            return [xd, yd];
        }
        // Newton on distort_normalized(u) = d, with a numerical Jacobian.
        let (mut u, mut v) = (xd, yd);
        for _ in 0..50 {
            let [fx, fy] = self.distort_normalized(u, v);
            let (rx, ry) = (fx - xd, fy - yd);
            if rx.abs() < 1e-14 && ry.abs() < 1e-14 {
                break;
            }
            let h = 1e-7;
            let [ax, ay] = self.distort_normalized(u + h, v);
            let [bx, by] = self.distort_normalized(u, v + h);
            let (j00, j10, j01, j11) = ((ax - fx) / h, (ay - fy) / h, (bx - fx) / h, (by - fy) / h);
            let det = j00 * j11 - j01 * j10;
            if det.abs() < 1e-12 {
                break;
            }
            u -= (j11 * rx - j01 * ry) / det;
            v -= (-j10 * rx + j00 * ry) / det;
        }
        [u, v]
    }
}
