//! Dense row-major images and their PGM/PFM serialization.

use std::io::{self, Write};
use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

/// Row-major `width x height` grid of scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> ImageGrid<T> {
    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::zero())
    }

    pub fn filled(width: usize, height: usize, v: T) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self { width, height, data: vec![v; width * height] }
    }

    /// # Panics
    /// If `data.len() != width * height` or a dimension is zero.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        assert_eq!(data.len(), width * height, "data length does not match dimensions");
        Self { width, height, data }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_vec(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    /// Value with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert!(self.same_shape(other), "image shapes differ");
        Self { width: self.width, height: self.height, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    pub fn mean(&self) -> T {
        self.sum() / T::from_usize_lossy(self.len())
    }

    pub fn min(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.data.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Convert to another scalar type.
    pub fn cast<U: Scalar>(&self) -> ImageGrid<U> {
        ImageGrid { width: self.width, height: self.height, data: self.data.iter().map(|v| U::lit(v.as_f64())).collect() }
    }

    /// Binary PGM (`P5`), min–max scaled to `2^bits − 1`; `bits` is 8 or 16.
    pub fn write_pgm<W: Write>(&self, mut w: W, bits: u8) -> io::Result<()> {
        let maxval: u32 = if bits == 16 { 65535 } else { 255 };
        let (lo, hi) = (self.min().as_f64(), self.max().as_f64());
        let span = if hi > lo { hi - lo } else { 1.0 };
        write!(w, "P5\n{} {}\n{}\n", self.width, self.height, maxval)?;
        let mut buf = Vec::with_capacity(self.len() * if bits == 16 { 2 } else { 1 });
        for &v in &self.data {
            let q = (((v.as_f64() - lo) / span) * maxval as f64).round().clamp(0.0, maxval as f64) as u32;
            if bits == 16 {
                buf.extend_from_slice(&(q as u16).to_be_bytes());
            } else {
                buf.push(q as u8);
            }
        }
        w.write_all(&buf)?;
        w.flush()
    }

    /// Grayscale little-endian PFM (`Pf`, scale −1), bottom row first.
    pub fn write_pfm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "Pf\n{} {}\n-1.0\n", self.width, self.height)?;
        let mut buf = Vec::with_capacity(self.len() * 4);
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                buf.extend_from_slice(&(self.get(x, y).as_f64() as f32).to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        w.flush()
    }
}

impl ImageGrid<f32> {
    /// Parse a grayscale PFM written by [`ImageGrid::write_pfm`] or any
    /// conforming writer.
    pub fn read_pfm(bytes: &[u8]) -> io::Result<Self> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated PFM header"));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII header"))?);
        }
        pos += 1;
        if fields[0] != "Pf" {
            return Err(bad("only grayscale PFM is supported"));
        }
        let width: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
        let height: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
        let scale: f64 = fields[3].parse().map_err(|_| bad("bad scale"))?;
        let body = bytes.get(pos..pos + width * height * 4).ok_or_else(|| bad("truncated PFM data"))?;
        let mut img = ImageGrid::zeros(width, height);
        for (i, chunk) in body.chunks_exact(4).enumerate() {
            let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
            let v = if scale < 0.0 { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
            let (x, row) = (i % width, i / width);
            img[(x, height - 1 - row)] = v;
        }
        Ok(img)
    }
}

impl<T> Index<(usize, usize)> for ImageGrid<T> {
    type Output = T;

    #[inline]
    fn index(&self, (x, y): (usize, usize)) -> &T {
        &self.data[y * self.width + x]
    }
}

impl<T> IndexMut<(usize, usize)> for ImageGrid<T> {
    #[inline]
    fn index_mut(&mut self, (x, y): (usize, usize)) -> &mut T {
        &mut self.data[y * self.width + x]
    }
}
