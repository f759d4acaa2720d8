use nalgebra::DMatrix;

use super::GeometryError;

/// Largest size accepted by the direct permutation sum (8! terms).
pub const MAX_PFAFFIAN_SIZE: usize = 8;

/// `Pf(A) = 1/(n! 2ⁿ) Σ_σ sgn(σ) Πᵢ a_{σ(2i−1), σ(2i)}` for a `2n × 2n`
/// matrix with `Aᵀ = −A` exactly.
pub fn pfaffian(a: &DMatrix<f64>) -> Result<f64, GeometryError> {
    let size = a.nrows();
    if a.ncols() != size {
        return Err(GeometryError::Dimension { expected: size, got: a.ncols() });
    }
    if size % 2 == 1 {
        return Err(GeometryError::OddDimension(size));
    }
    if size > MAX_PFAFFIAN_SIZE {
        return Err(GeometryError::TooLarge { size, max: MAX_PFAFFIAN_SIZE });
    }
    for i in 0..size {
        for j in 0..=i {
            if a[(i, j)] != -a[(j, i)] {
                return Err(GeometryError::NotSkew(i, j));
            }
        }
    }
    let n = size / 2;
    let mut total = 0.0;
    let mut perm: Vec<usize> = (0..size).collect();
    let term = |perm: &[usize]| (0..n).map(|i| a[(perm[2 * i], perm[2 * i + 1])]).product::<f64>();
    // Heap's algorithm; every swap flips the sign.
    let mut sign = 1.0;
    let mut counters = vec![0usize; size];
    total += term(&perm);
    let mut i = 1;
    while i < size {
        if counters[i] < i {
            let j = if i % 2 == 0 { 0 } else { counters[i] };
            perm.swap(j, i);
            sign = -sign;
            total += sign * term(&perm);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    let norm: f64 = (1..=n).map(|k| k as f64).product::<f64>() * 2f64.powi(n as i32);
    Ok(total / norm)
}
