//! Complex matrix exponential via scaling and squaring with a degree-13
//! diagonal Padé approximant (Higham 2005).
//!
//! The regime chains handled here are small (a handful of states), so the
//! simple dense algorithm is more than adequate: scale `A` by `2^{−s}` until
//! its 1-norm is below the Padé-13 threshold `θ₁₃ ≈ 5.37`, evaluate the
//! [13/13] approximant through a partial-pivoting linear solve, and square
//! the result `s` times.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::Complex;

/// Padé-13 numerator coefficients `b_0 … b_13` (Higham 2005, Table 10.4).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold below which the [13/13] approximant is accurate to
/// double precision.
const THETA13: f64 = 5.371920351148152;

/// Cap on the number of squarings; beyond this the exponential overflows
/// double precision anyway.
const MAX_SQUARINGS: u32 = 64;

fn one_norm(a: &Array2<Complex>) -> f64 {
    let mut best = 0.0_f64;
    for j in 0..a.ncols() {
        let col: f64 = (0..a.nrows()).map(|i| a[(i, j)].norm()).sum();
        best = best.max(col);
    }
    best
}

fn matmul(a: &Array2<Complex>, b: &Array2<Complex>) -> Array2<Complex> {
    a.dot(b)
}

/// Solves `A X = B` in place by Gaussian elimination with partial pivoting.
fn solve(mut a: Array2<Complex>, mut b: Array2<Complex>) -> Result<Array2<Complex>> {
    let n = a.nrows();
    for k in 0..n {
        let mut pivot = k;
        let mut best = a[(k, k)].norm();
        for i in k + 1..n {
            let mag = a[(i, k)].norm();
            if mag > best {
                best = mag;
                pivot = i;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::MatrixExpOverflow);
        }
        if pivot != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(pivot, j)];
                a[(pivot, j)] = tmp;
            }
            for j in 0..b.ncols() {
                let tmp = b[(k, j)];
                b[(k, j)] = b[(pivot, j)];
                b[(pivot, j)] = tmp;
            }
        }
        for i in k + 1..n {
            let factor = a[(i, k)] / a[(k, k)];
            if factor.norm() > 0.0 {
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= factor * akj;
                }
                for j in 0..b.ncols() {
                    let bkj = b[(k, j)];
                    b[(i, j)] -= factor * bkj;
                }
            }
            a[(i, k)] = Complex::new(0.0, 0.0);
        }
    }
    for k in (0..n).rev() {
        for j in 0..b.ncols() {
            let mut acc = b[(k, j)];
            for i in k + 1..n {
                acc -= a[(k, i)] * b[(i, j)];
            }
            b[(k, j)] = acc / a[(k, k)];
        }
    }
    Ok(b)
}

/// Matrix exponential `e^A` of a square complex matrix.
///
/// Errors with [`Error::MatrixExpOverflow`] when the input norm is so large
/// that the required squarings would overflow, or when the result contains
/// non-finite entries.
pub fn expm(a: &Array2<Complex>) -> Result<Array2<Complex>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Ok(Array2::eye(0));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::MatrixExpOverflow);
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    if squarings > MAX_SQUARINGS {
        return Err(Error::MatrixExpOverflow);
    }
    let scaled = a.mapv(|v| v / Complex::new(2.0_f64.powi(squarings as i32), 0.0));

    let eye: Array2<Complex> = Array2::eye(n);
    let a2 = matmul(&scaled, &scaled);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a2, &a4);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let inner_u = a6.mapv(|v| v * PADE13[13]) + a4.mapv(|v| v * PADE13[11]) + a2.mapv(|v| v * PADE13[9]);
    let u_poly = matmul(&a6, &inner_u)
        + a6.mapv(|v| v * PADE13[7])
        + a4.mapv(|v| v * PADE13[5])
        + a2.mapv(|v| v * PADE13[3])
        + eye.mapv(|v| v * PADE13[1]);
    let u = matmul(&scaled, &u_poly);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let inner_v = a6.mapv(|v| v * PADE13[12]) + a4.mapv(|v| v * PADE13[10]) + a2.mapv(|v| v * PADE13[8]);
    let v = matmul(&a6, &inner_v)
        + a6.mapv(|v| v * PADE13[6])
        + a4.mapv(|v| v * PADE13[4])
        + a2.mapv(|v| v * PADE13[2])
        + eye.mapv(|v| v * PADE13[0]);

    // (V − U) X = (V + U)
    let mut result = solve(&v - &u, &v + &u)?;
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    if result.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::MatrixExpOverflow);
    }
    Ok(result)
}
