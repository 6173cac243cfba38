//! Small dense-vector helpers. Dimensions in this crate are tiny, so plain
//! slices beat pulling in a matrix library.

use crate::scalar::Scalar;

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm_sq<S: Scalar>(a: &[S]) -> S {
    dot(a, a)
}

#[inline]
pub fn norm<S: Scalar>(a: &[S]) -> S {
    norm_sq(a).sqrt()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<S: Scalar>(a: &[S], k: S) -> Vec<S> {
    a.iter().map(|&x| x * k).collect()
}

/// `y += k * x`
pub fn axpy<S: Scalar>(y: &mut [S], k: S, x: &[S]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + k * xi;
    }
}

pub fn dist<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<S>()
        .sqrt()
}

/// Convex (or affine) combination `sum_i w_i p_i`.
pub fn combine<S: Scalar>(weights: &[S], points: &[Vec<S>]) -> Vec<S> {
    let n = points.first().map_or(0, Vec::len);
    let mut out = vec![S::zero(); n];
    for (&w, p) in weights.iter().zip(points) {
        if w != S::zero() {
            axpy(&mut out, w, p);
        }
    }
    out
}

pub fn all_finite<S: Scalar>(a: &[S]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Solves `A x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `pivot_tol` times the largest
/// absolute entry of `A`.
pub fn solve_dense<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>, pivot_tol: S) -> Option<Vec<S>> {
    let k = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(S::zero(), |m, &v| m.max(v.abs()));
    if scale == S::zero() {
        return None;
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].abs() <= pivot_tol * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            if f != S::zero() {
                for c in col..k {
                    let v = a[col][c];
                    a[row][c] = a[row][c] - f * v;
                }
                let bc = b[col];
                b[row] = b[row] - f * bc;
            }
        }
    }
    let mut x = vec![S::zero(); k];
    for row in (0..k).rev() {
        let mut acc = b[row];
        for c in row + 1..k {
            acc = acc - a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a: Vec<Vec<f64>> = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_dense(a, vec![3.0, 5.0], 1e-14).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(a, vec![1.0, 2.0], 1e-12).is_none());
    }
}
