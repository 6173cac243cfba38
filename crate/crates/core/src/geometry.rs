//! Finite-dimensional convex geometry on polytopes given by generator lists:
//! nearest points of convex hulls, support points and Hausdorff distances.
//!
//! The workhorse is Wolfe's active-set ("corral") method for the minimum-norm
//! point of a polytope. Projection of an arbitrary point `q` reduces to the
//! min-norm point of the shifted generators `g_i - q`. Every result carries
//! its barycentric weights and is checked against the variational
//! inequality `<p - q, g_i - p> >= 0` before it is returned.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, combine, dist, dot, norm, norm_sq, solve_dense, sub};
use crate::scalar::Scalar;

/// Entries below this (in absolute value) are treated as zero weights.
const WEIGHT_CLAMP: f64 = 1e-12;
/// Allowed deviation of the weight sum from one.
const WEIGHT_SUM_TOL: f64 = 1e-10;
/// Relative tolerance of the optimality certificate.
pub const CERTIFICATE_TOL: f64 = 1e-8;
/// Wolfe's optimality test `|x|^2 - min_j <x, p_j> <= Z * max_j |p_j|^2`.
const WOLFE_GAP_TOL: f64 = 1e-12;
/// Relative tie tolerance for support points.
const SUPPORT_TIE_TOL: f64 = 1e-10;

/// Barycentric coordinates on the unit simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexWeights<S>(Vec<S>);

impl<S: Scalar> SimplexWeights<S> {
    /// Validates raw weights: entries down to `-1e-12` are clamped to zero,
    /// then the vector is renormalized. The sum must already be within
    /// `1e-10` of one.
    pub fn new(raw: Vec<S>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        let clamp = S::tol(WEIGHT_CLAMP);
        if raw.iter().any(|w| !w.is_finite() || *w < -clamp) {
            return Err(Error::InvalidInput(format!(
                "weights must be nonnegative, got {raw:?}"
            )));
        }
        let sum: S = raw.iter().copied().sum();
        if (sum - S::one()).abs() > S::tol(WEIGHT_SUM_TOL) {
            return Err(Error::InvalidInput(format!(
                "weights must sum to one, sum is {sum}"
            )));
        }
        Ok(Self::normalized(raw))
    }

    /// Clamps tiny negatives and rescales to unit sum without validation.
    fn normalized(mut raw: Vec<S>) -> Self {
        let clamp = S::tol(WEIGHT_CLAMP);
        for w in raw.iter_mut() {
            if *w <= clamp {
                *w = S::zero();
            }
        }
        let sum: S = raw.iter().copied().sum();
        if sum > S::zero() {
            for w in raw.iter_mut() {
                *w = *w / sum;
            }
        }
        Self(raw)
    }

    /// Vertex of the simplex.
    pub fn vertex(m: usize, i: usize) -> Self {
        let mut w = vec![S::zero(); m];
        w[i] = S::one();
        Self(w)
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<S> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A point of a convex hull together with the weights that certify
/// membership.
#[derive(Clone, Debug, PartialEq)]
pub struct HullProjection<S> {
    pub point: Vec<S>,
    pub weights: SimplexWeights<S>,
    /// Distance between the solver's iterate and the reconstruction
    /// `sum_i w_i g_i` stored in `point`.
    pub residual_norm: S,
}

impl<S: Scalar> HullProjection<S> {
    pub fn norm(&self) -> S {
        norm(&self.point)
    }

    /// Largest violation of `<p - q, g_i - p> >= 0` over the generators.
    /// Zero means `point` is certified as the projection of `q`.
    pub fn certificate_violation(&self, q: &[S], generators: &[Vec<S>]) -> S {
        let pq = sub(&self.point, q);
        generators
            .iter()
            .map(|g| -dot(&pq, &sub(g, &self.point)))
            .fold(S::zero(), S::max)
    }
}

/// Result of [`support_point`]: every maximizing generator index and the
/// min-norm point of the face they span.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportPoint<S> {
    pub indices: Vec<usize>,
    pub projection: HullProjection<S>,
}

fn validate<S: Scalar>(generators: &[Vec<S>]) -> Result<usize> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidInput("generator list is empty".into()))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::InvalidInput(
            "generators must have dimension >= 1".into(),
        ));
    }
    for (i, g) in generators.iter().enumerate() {
        if g.len() != n {
            return Err(Error::InvalidInput(format!(
                "generator {i} has dimension {}, expected {n}",
                g.len()
            )));
        }
        if !all_finite(g) {
            return Err(Error::InvalidInput(format!("generator {i} is not finite")));
        }
    }
    Ok(n)
}

/// Minimum-norm point of `conv(generators)`.
pub fn min_norm_point<S: Scalar>(generators: &[Vec<S>]) -> Result<HullProjection<S>> {
    let n = validate(generators)?;
    project_validated(&vec![S::zero(); n], generators)
}

/// Euclidean projection of `q` onto `conv(generators)`.
pub fn project_onto_hull<S: Scalar>(q: &[S], generators: &[Vec<S>]) -> Result<HullProjection<S>> {
    let n = validate(generators)?;
    if q.len() != n {
        return Err(Error::InvalidInput(format!(
            "query has dimension {}, generators have {n}",
            q.len()
        )));
    }
    if !all_finite(q) {
        return Err(Error::InvalidInput("query point is not finite".into()));
    }
    project_validated(q, generators)
}

/// Distance from `q` to `conv(generators)`.
pub fn distance_to_hull<S: Scalar>(q: &[S], generators: &[Vec<S>]) -> Result<S> {
    let p = project_onto_hull(q, generators)?;
    Ok(dist(&p.point, q))
}

fn project_validated<S: Scalar>(q: &[S], generators: &[Vec<S>]) -> Result<HullProjection<S>> {
    let shifted: Vec<Vec<S>> = generators.iter().map(|g| sub(g, q)).collect();
    let outcome = match shifted.len() {
        1 => Corral::singleton(&shifted),
        2 => Corral::segment(&shifted),
        _ => Corral::wolfe(&shifted),
    };
    let weights = SimplexWeights::normalized(outcome.weights);
    let point = combine(weights.as_slice(), generators);
    let iterate: Vec<S> = outcome.x.iter().zip(q).map(|(&a, &b)| a + b).collect();
    let residual_norm = dist(&iterate, &point);
    let projection = HullProjection {
        point,
        weights,
        residual_norm,
    };

    let scale = shifted.iter().map(|p| norm_sq(p)).fold(S::zero(), S::max);
    let violation = projection.certificate_violation(q, generators);
    if violation > S::tol(CERTIFICATE_TOL) * scale {
        return Err(Error::NoConvergence {
            iterations: outcome.iterations,
            violation: violation.as_f64(),
            best_point: projection.point.iter().map(|v| v.as_f64()).collect(),
            best_weights: projection
                .weights
                .as_slice()
                .iter()
                .map(|v| v.as_f64())
                .collect(),
        });
    }
    Ok(projection)
}

/// Internal solver state: weights over all generators and the iterate.
struct Corral<S> {
    weights: Vec<S>,
    x: Vec<S>,
    iterations: usize,
}

impl<S: Scalar> Corral<S> {
    fn singleton(p: &[Vec<S>]) -> Self {
        Corral {
            weights: vec![S::one()],
            x: p[0].clone(),
            iterations: 0,
        }
    }

    /// Closed form for two generators: minimize |p2 + theta (p1 - p2)|.
    fn segment(p: &[Vec<S>]) -> Self {
        let d = sub(&p[0], &p[1]);
        let dd = norm_sq(&d);
        let theta = if dd > S::zero() {
            (-dot(&p[1], &d) / dd).max(S::zero()).min(S::one())
        } else {
            S::one()
        };
        let weights = vec![theta, S::one() - theta];
        let x = combine(&weights, p);
        Corral {
            weights,
            x,
            iterations: 1,
        }
    }

    /// Wolfe's min-norm-point algorithm on the points `p`.
    fn wolfe(p: &[Vec<S>]) -> Self {
        let m = p.len();
        let sq: Vec<S> = p.iter().map(|v| norm_sq(v)).collect();
        let max_sq = sq.iter().copied().fold(S::zero(), S::max);
        let gap_tol = S::tol(WOLFE_GAP_TOL) * max_sq;
        let zero_tol = S::tol(WEIGHT_CLAMP);
        let cap = 50 * m;

        let start = argmin(&sq);
        let mut active = vec![start];
        let mut w = vec![S::one()];
        let mut x = p[start].clone();
        let mut iterations = 0;

        'major: while iterations < cap {
            iterations += 1;
            let xx = norm_sq(&x);
            let scores: Vec<S> = p.iter().map(|pj| dot(&x, pj)).collect();
            let j = argmin(&scores);
            if xx - scores[j] <= gap_tol || active.contains(&j) {
                break;
            }
            active.push(j);
            w.push(S::zero());

            loop {
                if iterations >= cap {
                    break 'major;
                }
                iterations += 1;
                let Some(v) = affine_minimizer(&active, p) else {
                    // affinely dependent corral: the newcomer cannot help
                    active.pop();
                    w.pop();
                    break 'major;
                };
                if v.iter().all(|&vi| vi > zero_tol) {
                    w = v;
                    x = corral_point(&active, &w, p);
                    break;
                }
                // With only round-off sized entries there is no blocking
                // index and the step is the full one.
                let mut theta = S::one();
                let mut blocking = None;
                for (k, (&wk, &vk)) in w.iter().zip(&v).enumerate() {
                    if vk <= zero_tol && wk > vk {
                        let t = wk / (wk - vk);
                        if t < theta {
                            theta = t;
                            blocking = Some(k);
                        }
                    }
                }
                for (wk, &vk) in w.iter_mut().zip(&v) {
                    *wk = (S::one() - theta) * *wk + theta * vk;
                }
                if let Some(k) = blocking {
                    w[k] = S::zero();
                }
                let mut k = 0;
                while k < active.len() {
                    if w[k] <= zero_tol {
                        active.remove(k);
                        w.remove(k);
                    } else {
                        k += 1;
                    }
                }
                let sum: S = w.iter().copied().sum();
                for wk in w.iter_mut() {
                    *wk = *wk / sum;
                }
                x = corral_point(&active, &w, p);
            }
        }

        let mut weights = vec![S::zero(); m];
        for (&i, &wi) in active.iter().zip(&w) {
            weights[i] = wi;
        }
        Corral {
            weights,
            x,
            iterations,
        }
    }
}

fn argmin<S: Scalar>(v: &[S]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

fn corral_point<S: Scalar>(active: &[usize], w: &[S], p: &[Vec<S>]) -> Vec<S> {
    let mut x = vec![S::zero(); p[0].len()];
    for (&i, &wi) in active.iter().zip(w) {
        crate::linalg::axpy(&mut x, wi, &p[i]);
    }
    x
}

/// Weights of the min-norm point of the affine hull of `p[active]`, from
/// the KKT system `[G 1; 1^T 0] [v; mu] = [0; 1]`. The constraint row is
/// scaled to the Gram matrix magnitude to keep pivoting meaningful.
fn affine_minimizer<S: Scalar>(active: &[usize], p: &[Vec<S>]) -> Option<Vec<S>> {
    let k = active.len();
    let mut gram = vec![vec![S::zero(); k + 1]; k + 1];
    let mut scale = S::zero();
    for a in 0..k {
        for b in a..k {
            let v = dot(&p[active[a]], &p[active[b]]);
            gram[a][b] = v;
            gram[b][a] = v;
            scale = scale.max(v.abs());
        }
    }
    if scale == S::zero() {
        scale = S::one();
    }
    for row in gram.iter_mut().take(k) {
        row[k] = scale;
    }
    for c in 0..k {
        gram[k][c] = scale;
    }
    let mut rhs = vec![S::zero(); k + 1];
    rhs[k] = scale;
    let sol = solve_dense(gram, rhs, S::tol(1e-13))?;
    let v: Vec<S> = sol[..k].to_vec();
    let sum: S = v.iter().copied().sum();
    if !sum.is_finite() || (sum - S::one()).abs() > S::lit(1e-6) {
        return None;
    }
    Some(v.into_iter().map(|vi| vi / sum).collect())
}

/// Maximizer of `<direction, y>` over the hull. When several generators
/// attain the maximum (within a relative `1e-10`), the min-norm point of
/// their face is returned together with all tied indices.
pub fn support_point<S: Scalar>(direction: &[S], generators: &[Vec<S>]) -> Result<SupportPoint<S>> {
    let n = validate(generators)?;
    if direction.len() != n || !all_finite(direction) {
        return Err(Error::InvalidInput(
            "support direction must be finite with the generators' dimension".into(),
        ));
    }
    let scores: Vec<S> = generators.iter().map(|g| dot(direction, g)).collect();
    let best = scores.iter().copied().fold(S::neg_infinity(), S::max);
    let max_g = generators.iter().map(|g| norm(g)).fold(S::zero(), S::max);
    let tie = S::lit(SUPPORT_TIE_TOL) * (norm(direction) * max_g).max(best.abs());
    let indices: Vec<usize> = (0..generators.len())
        .filter(|&i| scores[i] >= best - tie)
        .collect();

    let projection = if indices.len() == 1 {
        let i = indices[0];
        HullProjection {
            point: generators[i].clone(),
            weights: SimplexWeights::vertex(generators.len(), i),
            residual_norm: S::zero(),
        }
    } else {
        let face: Vec<Vec<S>> = indices.iter().map(|&i| generators[i].clone()).collect();
        let local = min_norm_point(&face)?;
        let mut weights = vec![S::zero(); generators.len()];
        for (&i, &w) in indices.iter().zip(local.weights.as_slice()) {
            weights[i] = w;
        }
        HullProjection {
            point: local.point,
            weights: SimplexWeights(weights),
            residual_norm: local.residual_norm,
        }
    };
    Ok(SupportPoint {
        indices,
        projection,
    })
}

/// Hausdorff distance between `conv(a)` and `conv(b)`.
///
/// The distance to a convex set is a convex function, so each one-sided
/// excess is attained at a vertex of the other polytope.
pub fn hausdorff_hull_distance<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> Result<S> {
    let na = validate(a)?;
    let nb = validate(b)?;
    if na != nb {
        return Err(Error::InvalidInput(format!(
            "hulls live in different dimensions ({na} vs {nb})"
        )));
    }
    Ok(excess(a, b)?.max(excess(b, a)?))
}

/// One-sided excess `sup_{x in conv(a)} d(x, conv(b))`.
pub fn excess<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> Result<S> {
    let mut e = S::zero();
    for v in a {
        e = e.max(distance_to_hull(v, b)?);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn singleton_hull() {
        let p = min_norm_point(&[vec![3.0, 4.0]]).unwrap();
        assert_eq!(p.point, vec![3.0, 4.0]);
        assert_eq!(p.weights.as_slice(), &[1.0]);
    }

    #[test]
    fn origin_inside_segment() {
        let p = min_norm_point(&[vec![2.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(close(&p.point, &[0.0, 0.0], 1e-15));
        assert!(close(p.weights.as_slice(), &[1.0 / 3.0, 2.0 / 3.0], 1e-15));
    }

    #[test]
    fn symmetric_pair_against_theta_grid() {
        let g = [vec![3.0, 1.0], vec![1.0, 3.0]];
        // independent check: scan theta with step 1e-4
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=10_000 {
            let t = k as f64 * 1e-4;
            let v = [3.0 * t + (1.0 - t), t + 3.0 * (1.0 - t)];
            let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
            if nv < best.0 {
                best = (nv, t);
            }
        }
        assert!((best.1 - 0.5).abs() < 1e-12);
        let p = min_norm_point(&g).unwrap();
        assert!(close(&p.point, &[2.0, 2.0], 1e-12));
        assert!(close(p.weights.as_slice(), &[0.5, 0.5], 1e-12));
        assert!((p.norm() - best.0).abs() < 1e-12);
    }

    #[test]
    fn interior_query_is_fixed() {
        let g = [
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ];
        let p = project_onto_hull(&[0.5, 0.5], &g).unwrap();
        assert!(close(&p.point, &[0.5, 0.5], 1e-12));
    }

    #[test]
    fn nearest_endpoint_of_segment() {
        let p = project_onto_hull(&[2.0, 0.0], &[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(close(&p.point, &[1.0, 0.0], 1e-15));
    }

    #[test]
    fn segment_projection_against_brute_force() {
        let g = [vec![2.0, 0.0], vec![0.0, 1.0]];
        let q = [0.0, 2.0];
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for k in 0..=100_000 {
            let t = k as f64 * 1e-5;
            let v = [2.0 * t, 1.0 - t];
            let d = ((v[0] - q[0]).powi(2) + (v[1] - q[1]).powi(2)).sqrt();
            if d < best.0 {
                best = (d, v);
            }
        }
        // the unconstrained quadratic optimum theta = -1/5 clamps to theta = 0
        assert!(close(&best.1, &[0.0, 1.0], 1e-12));
        let p = project_onto_hull(&q, &g).unwrap();
        assert!(close(&p.point, &[0.0, 1.0], 1e-12));
    }

    #[test]
    fn support_point_examples() {
        let g = [vec![2.0, 0.0], vec![-1.0, 0.0]];
        let s = support_point(&[1.0, 0.0], &g).unwrap();
        assert_eq!(s.indices, vec![0]);
        assert_eq!(s.projection.point, vec![2.0, 0.0]);

        let s = support_point(&[0.0, 0.0], &g).unwrap();
        assert_eq!(s.indices, vec![0, 1]);
        let mn = min_norm_point(&g).unwrap();
        assert!(close(&s.projection.point, &mn.point, 1e-15));

        let g = [vec![3.0, 1.0], vec![1.0, 3.0]];
        let s = support_point(&[1.0, 1.0], &g).unwrap();
        assert_eq!(s.indices, vec![0, 1]);
        assert!(close(&s.projection.point, &[2.0, 2.0], 1e-12));
    }

    #[test]
    fn hausdorff_examples() {
        let a: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert_eq!(hausdorff_hull_distance(&a, &a).unwrap(), 0.0);
        let b = vec![vec![0.0, 1.0], vec![1.0, 1.0]];
        assert!((hausdorff_hull_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let d: f64 = hausdorff_hull_distance(&[vec![0.0, 0.0]], &[vec![3.0, 4.0]]).unwrap();
        assert!((d - 5.0).abs() < 1e-15);
    }

    #[test]
    fn duplicates_and_rank_deficiency() {
        let g = vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![2.0, 2.0, 0.0],
            vec![1.0, -1.0, 0.0],
            vec![1.0, -1.0, 0.0],
        ];
        let p = min_norm_point(&g).unwrap();
        assert!(close(&p.point, &[1.0, 0.0, 0.0], 1e-12));
        let s: f64 = p.weights.as_slice().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn query_on_an_edge_does_not_cycle() {
        // The affine step leaves a 1e-16 weight on a vertex of the corral;
        // it used to knock out a live vertex instead and loop to the cap.
        let g = vec![
            vec![3.7756423871343694, 0.0],
            vec![3.3518535749607836, -2.6568693214301313],
            vec![0.0, 4.555758598151623],
            vec![0.6787013402156781, -4.376744674326632],
        ];
        let q = [4.054067823132849, -1.665089892204108];
        let p = project_onto_hull(&q, &g).unwrap();
        let again = project_onto_hull(&p.point, &g).unwrap();
        assert!(close(&again.point, &p.point, 1e-12));
        assert!(again.weights.as_slice()[2] == 0.0 && again.weights.as_slice()[3] == 0.0);
    }

    #[test]
    fn origin_in_interior_of_simplex() {
        let g = vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        let p = min_norm_point(&g).unwrap();
        assert!(p.norm() < 1e-14);
        let w = p.weights.as_slice();
        assert!(close(w, &[0.5, 0.25, 0.25], 1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            min_norm_point::<f64>(&[]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            min_norm_point(&[vec![f64::NAN, 0.0]]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            min_norm_point(&[vec![1.0, 0.0], vec![1.0]]),
            Err(Error::InvalidInput(_))
        ));
        assert!(project_onto_hull(&[1.0], &[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn simplex_weights_validation() {
        let w = SimplexWeights::new(vec![0.5, 0.5 + 1e-11, -1e-13]).unwrap();
        assert_eq!(w.as_slice()[2], 0.0);
        assert!(SimplexWeights::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexWeights::new(vec![1.1, -0.1]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let g = vec![vec![3.0f32, 1.0], vec![1.0, 3.0], vec![4.0, 4.0]];
        let p = min_norm_point(&g).unwrap();
        assert!((p.point[0] - 2.0).abs() < 1e-5 && (p.point[1] - 2.0).abs() < 1e-5);
    }
}
