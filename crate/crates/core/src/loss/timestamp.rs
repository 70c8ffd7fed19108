use crate::error::LossError;
use crate::iwe::TimestampImage;
use crate::scalar::Scalar;

/// Variance of the per-pixel mean timestamp over occupied pixels.
pub fn mean_timestamp_loss<T: Scalar>(ts: &TimestampImage<T>) -> Result<T, LossError> {
    let occupied: Vec<T> = ts.mean_t.as_slice().iter().zip(ts.count.as_slice()).filter(|(_, &c)| c > T::zero()).map(|(&m, _)| m).collect();
    if occupied.is_empty() {
        return Err(LossError::EmptySupport);
    }
    let n = T::from_usize_lossy(occupied.len());
    let mu = occupied.iter().copied().sum::<T>() / n;
    Ok(occupied.iter().map(|&m| (m - mu) * (m - mu)).sum::<T>() / n)
}
