//! Multiobjective problems: value/gradient oracles plus the metadata the
//! convergence bounds need (Lipschitz constants, lower bounds, strong
//! convexity moduli, a region box and a regional gradient bound).
//!
//! Built-in problems are defined analytically. User problems are assembled
//! from closures with [`ProblemBuilder`].

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, norm};
use crate::scalar::Scalar;

pub type ValueFn<S> = Arc<dyn Fn(&[S]) -> Vec<S> + Send + Sync>;
pub type GradientFn<S> = Arc<dyn Fn(&[S]) -> Vec<Vec<S>> + Send + Sync>;
pub type LevelSetFn<S> = Arc<dyn Fn(&[S]) -> LevelSetBound<S> + Send + Sync>;
pub type BoxBoundFn<S> = Arc<dyn Fn(&BoxRegion<S>) -> S + Send + Sync>;

/// Names of the shipped problems, in CLI order.
pub const BUILTIN_NAMES: [&str; 4] = ["p1", "p2", "p3", "p4"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClass {
    Convex,
    StronglyConvex,
    Nonconvex,
}

impl ConvexityClass {
    pub fn is_convex(self) -> bool {
        !matches!(self, ConvexityClass::Nonconvex)
    }
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxRegion<S> {
    pub lower: Vec<S>,
    pub upper: Vec<S>,
}

impl<S: Scalar> BoxRegion<S> {
    pub fn new(lower: Vec<S>, upper: Vec<S>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidInput(
                "box bounds must have equal, nonzero length".into(),
            ));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidInput(
                "box lower bound exceeds upper bound".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[S]) -> bool {
        self.excess(x) == S::zero()
    }

    /// Euclidean distance from `x` to the box.
    pub fn excess(&self, x: &[S]) -> S {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| {
                let d = (l - v).max(v - u).max(S::zero());
                d * d
            })
            .sum::<S>()
            .sqrt()
    }

    pub fn diameter(&self) -> S {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| (u - l) * (u - l))
            .sum::<S>()
            .sqrt()
    }

    /// Largest Euclidean norm of a point of the box.
    pub fn max_norm(&self) -> S {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| {
                let m = l.abs().max(u.abs());
                m * m
            })
            .sum::<S>()
            .sqrt()
    }

    pub fn center(&self) -> Vec<S> {
        let half = S::lit(0.5);
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| half * (l + u))
            .collect()
    }

    /// Intersection; empty intersections (from rounding) collapse to the
    /// midpoint of the crossed bounds.
    pub fn intersect(&self, other: &Self) -> Self {
        let half = S::lit(0.5);
        let mut lower = Vec::with_capacity(self.dim());
        let mut upper = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let l = self.lower[j].max(other.lower[j]);
            let u = self.upper[j].min(other.upper[j]);
            if l <= u {
                lower.push(l);
                upper.push(u);
            } else {
                let mid = half * (l + u);
                lower.push(mid);
                upper.push(mid);
            }
        }
        Self { lower, upper }
    }

    /// Uniform sample from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<S> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| {
                let t = S::lit(rng.gen::<f64>());
                l + t * (u - l)
            })
            .collect()
    }
}

/// Over-approximation of the sublevel set `{x : f(x) <= a}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetBound<S> {
    pub level: Vec<S>,
    /// Bound on `sup ||x||` over the level set.
    pub radius: S,
    pub bounds: BoxRegion<S>,
}

/// A smooth multiobjective problem `min (f_1, ..., f_m)` over `R^n`.
#[derive(Clone)]
pub struct Problem<S> {
    pub name: String,
    pub dim: usize,
    pub objectives: usize,
    value: ValueFn<S>,
    gradient: GradientFn<S>,
    /// `L_i`, valid on `region`.
    pub lipschitz: Vec<S>,
    /// `inf f_i` (over the region when not global).
    pub lower_bounds: Vec<S>,
    pub strong_convexity: Option<Vec<S>>,
    pub class: ConvexityClass,
    /// Box containing `L(f, f(x0))` for every shipped start point.
    pub region: BoxRegion<S>,
    /// `M` with `||grad f_i(x)|| <= M` on `region`.
    pub gradient_bound: S,
    pub start_points: Vec<Vec<S>>,
    level_set: LevelSetFn<S>,
    box_gradient_bound: BoxBoundFn<S>,
}

impl<S> fmt::Debug for Problem<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("objectives", &self.objectives)
            .field("class", &self.class)
            .finish_non_exhaustive()
    }
}

impl<S: Scalar> Problem<S> {
    fn check_point(&self, x: &[S]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "{}: point has dimension {}, expected {}",
                self.name,
                x.len(),
                self.dim
            )));
        }
        if !all_finite(x) {
            return Err(Error::InvalidInput(format!(
                "{}: point is not finite",
                self.name
            )));
        }
        Ok(())
    }

    /// Objective values `f(x)`.
    pub fn evaluate(&self, x: &[S]) -> Result<Vec<S>> {
        self.check_point(x)?;
        let v = (self.value)(x);
        if v.len() != self.objectives || !all_finite(&v) {
            return Err(Error::NumericDomain(format!(
                "{}: objective values not finite at {x:?}",
                self.name
            )));
        }
        Ok(v)
    }

    /// Gradients `grad f_i(x)`, one vector per objective.
    pub fn gradients(&self, x: &[S]) -> Result<Vec<Vec<S>>> {
        self.check_point(x)?;
        let g = (self.gradient)(x);
        if g.len() != self.objectives || g.iter().any(|gi| gi.len() != self.dim || !all_finite(gi))
        {
            return Err(Error::NumericDomain(format!(
                "{}: gradients not finite at {x:?}",
                self.name
            )));
        }
        Ok(g)
    }

    /// Certified over-approximation of `L(f, a)`.
    pub fn level_set_bound(&self, a: &[S]) -> Result<LevelSetBound<S>> {
        if a.len() != self.objectives || !all_finite(a) {
            return Err(Error::InvalidInput(format!(
                "{}: level vector must have {} finite entries",
                self.name, self.objectives
            )));
        }
        Ok((self.level_set)(a))
    }

    /// Upper bound of `max_i ||grad f_i||` over `b`.
    pub fn gradient_bound_on(&self, b: &BoxRegion<S>) -> S {
        (self.box_gradient_bound)(b)
    }

    pub fn lipschitz_max(&self) -> S {
        self.lipschitz.iter().copied().fold(S::zero(), S::max)
    }

    /// `min_i mu_i`, when strong convexity moduli are declared.
    pub fn mu(&self) -> Option<S> {
        self.strong_convexity
            .as_ref()
            .map(|m| m.iter().copied().fold(S::infinity(), S::min))
    }

    /// `min_i (f_i(x) - inf f_i)`.
    pub fn min_gap(&self, x: &[S]) -> Result<S> {
        let f = self.evaluate(x)?;
        Ok(f.iter()
            .zip(&self.lower_bounds)
            .map(|(&fi, &li)| fi - li)
            .fold(S::infinity(), S::min))
    }
}

/// Assembles a user-defined [`Problem`] from closures and metadata.
pub struct ProblemBuilder<S> {
    name: String,
    dim: usize,
    objectives: usize,
    value: ValueFn<S>,
    gradient: GradientFn<S>,
    lipschitz: Vec<S>,
    lower_bounds: Vec<S>,
    strong_convexity: Option<Vec<S>>,
    class: ConvexityClass,
    region: BoxRegion<S>,
    gradient_bound: S,
    start_points: Vec<Vec<S>>,
    level_set: Option<LevelSetFn<S>>,
    box_gradient_bound: Option<BoxBoundFn<S>>,
}

impl<S: Scalar> ProblemBuilder<S> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        objectives: usize,
        value: impl Fn(&[S]) -> Vec<S> + Send + Sync + 'static,
        gradient: impl Fn(&[S]) -> Vec<Vec<S>> + Send + Sync + 'static,
        region: BoxRegion<S>,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            objectives,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            lipschitz: vec![S::one(); objectives],
            lower_bounds: vec![S::zero(); objectives],
            strong_convexity: None,
            class: ConvexityClass::Nonconvex,
            region,
            gradient_bound: S::one(),
            start_points: Vec::new(),
            level_set: None,
            box_gradient_bound: None,
        }
    }

    pub fn lipschitz(mut self, l: Vec<S>) -> Self {
        self.lipschitz = l;
        self
    }

    pub fn lower_bounds(mut self, b: Vec<S>) -> Self {
        self.lower_bounds = b;
        self
    }

    pub fn strong_convexity(mut self, mu: Vec<S>) -> Self {
        self.strong_convexity = Some(mu);
        self
    }

    pub fn class(mut self, class: ConvexityClass) -> Self {
        self.class = class;
        self
    }

    pub fn gradient_bound(mut self, m: S) -> Self {
        self.gradient_bound = m;
        self
    }

    pub fn start_point(mut self, x0: Vec<S>) -> Self {
        self.start_points.push(x0);
        self
    }

    pub fn level_set(
        mut self,
        f: impl Fn(&[S]) -> LevelSetBound<S> + Send + Sync + 'static,
    ) -> Self {
        self.level_set = Some(Arc::new(f));
        self
    }

    pub fn box_gradient_bound(
        mut self,
        f: impl Fn(&BoxRegion<S>) -> S + Send + Sync + 'static,
    ) -> Self {
        self.box_gradient_bound = Some(Arc::new(f));
        self
    }

    /// Without an explicit level-set oracle the region box itself is used,
    /// which is valid only for levels attained inside the region.
    pub fn build(self) -> Result<Problem<S>> {
        let m = self.objectives;
        if self.dim == 0 || m == 0 {
            return Err(Error::InvalidInput(
                "problem needs n >= 1 and m >= 1".into(),
            ));
        }
        if self.region.dim() != self.dim {
            return Err(Error::InvalidInput("region dimension mismatch".into()));
        }
        if self.lipschitz.len() != m || self.lipschitz.iter().any(|&l| !(l > S::zero())) {
            return Err(Error::InvalidInput(
                "need m positive Lipschitz constants".into(),
            ));
        }
        if self.lower_bounds.len() != m {
            return Err(Error::InvalidInput("need m lower bounds".into()));
        }
        if let Some(mu) = &self.strong_convexity {
            if mu.len() != m || mu.iter().any(|&v| v < S::zero()) {
                return Err(Error::InvalidInput(
                    "need m nonnegative convexity moduli".into(),
                ));
            }
        }
        let region = self.region.clone();
        let level_set = self.level_set.unwrap_or_else(|| {
            let region = region.clone();
            Arc::new(move |a: &[S]| LevelSetBound {
                level: a.to_vec(),
                radius: region.max_norm(),
                bounds: region.clone(),
            })
        });
        let bound = self.gradient_bound;
        let box_gradient_bound = self
            .box_gradient_bound
            .unwrap_or_else(|| Arc::new(move |_: &BoxRegion<S>| bound));
        Ok(Problem {
            name: self.name,
            dim: self.dim,
            objectives: m,
            value: self.value,
            gradient: self.gradient,
            lipschitz: self.lipschitz,
            lower_bounds: self.lower_bounds,
            strong_convexity: self.strong_convexity,
            class: self.class,
            region: self.region,
            gradient_bound: self.gradient_bound,
            start_points: self.start_points,
            level_set,
            box_gradient_bound,
        })
    }
}

/// Looks up a shipped problem by its CLI name.
pub fn builtin<S: Scalar>(name: &str) -> Option<Problem<S>> {
    match name.to_ascii_lowercase().as_str() {
        "p1" | "unbalanced-convex" => Some(unbalanced_convex()),
        "p2" | "strongly-convex" => Some(strongly_convex()),
        "p3" | "nonconvex-bounded-grad" => Some(nonconvex_bounded_grad()),
        "p4" | "scalar-pair" => Some(scalar_pair()),
        _ => None,
    }
}

/// Long name of a shipped problem.
pub fn builtin_title(name: &str) -> Option<&'static str> {
    match name {
        "p1" => Some("unbalanced-convex"),
        "p2" => Some("strongly-convex"),
        "p3" => Some("nonconvex-bounded-grad"),
        "p4" => Some("scalar-pair"),
        _ => None,
    }
}

/// Objectives `f_i(x) = 1/2 sum_j h_ij (x_j - c_ij)^2` with diagonal
/// curvatures `h_ij > 0`. Sublevel sets are axis-aligned ellipsoids, so the
/// level-set box and radius are analytic.
#[derive(Clone, Debug)]
pub struct SeparableQuadratic<S> {
    pub curvature: Vec<Vec<S>>,
    pub centers: Vec<Vec<S>>,
}

impl<S: Scalar> SeparableQuadratic<S> {
    pub fn values(&self, x: &[S]) -> Vec<S> {
        let half = S::lit(0.5);
        self.curvature
            .iter()
            .zip(&self.centers)
            .map(|(h, c)| {
                half * x
                    .iter()
                    .zip(h.iter().zip(c))
                    .map(|(&xj, (&hj, &cj))| hj * (xj - cj) * (xj - cj))
                    .sum::<S>()
            })
            .collect()
    }

    pub fn gradients(&self, x: &[S]) -> Vec<Vec<S>> {
        self.curvature
            .iter()
            .zip(&self.centers)
            .map(|(h, c)| {
                x.iter()
                    .zip(h.iter().zip(c))
                    .map(|(&xj, (&hj, &cj))| hj * (xj - cj))
                    .collect()
            })
            .collect()
    }

    pub fn lipschitz(&self) -> Vec<S> {
        self.curvature
            .iter()
            .map(|h| h.iter().copied().fold(S::zero(), S::max))
            .collect()
    }

    pub fn moduli(&self) -> Vec<S> {
        self.curvature
            .iter()
            .map(|h| h.iter().copied().fold(S::infinity(), S::min))
            .collect()
    }

    pub fn level_set(&self, a: &[S]) -> LevelSetBound<S> {
        let two = S::lit(2.0);
        let n = self.centers[0].len();
        let mut bounds: Option<BoxRegion<S>> = None;
        let mut radius = S::infinity();
        for ((h, c), &ai) in self.curvature.iter().zip(&self.centers).zip(a) {
            let ai = ai.max(S::zero());
            let mut lower = Vec::with_capacity(n);
            let mut upper = Vec::with_capacity(n);
            for (&hj, &cj) in h.iter().zip(c) {
                let half_width = (two * ai / hj).sqrt();
                lower.push(cj - half_width);
                upper.push(cj + half_width);
            }
            let mu = h.iter().copied().fold(S::infinity(), S::min);
            radius = radius.min(norm(c) + (two * ai / mu).sqrt());
            let b = BoxRegion { lower, upper };
            bounds = Some(match bounds {
                None => b,
                Some(prev) => prev.intersect(&b),
            });
        }
        let bounds = pad(bounds.expect("at least one objective"));
        LevelSetBound {
            level: a.to_vec(),
            radius: radius.min(bounds.max_norm()),
            bounds,
        }
    }

    /// Exact `max_i max_{x in b} ||grad f_i(x)||`; the squared gradient norm
    /// is separable, so each coordinate is maximized at an endpoint.
    pub fn box_gradient_bound(&self, b: &BoxRegion<S>) -> S {
        self.curvature
            .iter()
            .zip(&self.centers)
            .map(|(h, c)| {
                (0..b.dim())
                    .map(|j| {
                        let d = (b.lower[j] - c[j]).abs().max((b.upper[j] - c[j]).abs());
                        (h[j] * d) * (h[j] * d)
                    })
                    .sum::<S>()
                    .sqrt()
            })
            .fold(S::zero(), S::max)
    }

    fn into_problem(
        self,
        name: &str,
        class: ConvexityClass,
        region: BoxRegion<S>,
        starts: Vec<Vec<S>>,
    ) -> Problem<S> {
        let m = self.centers.len();
        let n = self.centers[0].len();
        let gradient_bound = self.box_gradient_bound(&region);
        let q = Arc::new(self);
        let (qv, qg, ql, qb) = (q.clone(), q.clone(), q.clone(), q.clone());
        let mut builder = ProblemBuilder::new(
            name,
            n,
            m,
            move |x: &[S]| qv.values(x),
            move |x: &[S]| qg.gradients(x),
            region,
        )
        .lipschitz(q.lipschitz())
        .lower_bounds(vec![S::zero(); m])
        .strong_convexity(q.moduli())
        .class(class)
        .gradient_bound(gradient_bound)
        .level_set(move |a: &[S]| ql.level_set(a))
        .box_gradient_bound(move |b: &BoxRegion<S>| qb.box_gradient_bound(b));
        for s in starts {
            builder = builder.start_point(s);
        }
        builder.build().expect("shipped problem metadata is valid")
    }
}

/// Widens a box by a relative `1e-12` so rounding cannot exclude boundary
/// points of the level set.
fn pad<S: Scalar>(b: BoxRegion<S>) -> BoxRegion<S> {
    let eps = S::tol(1e-12);
    let lower = b
        .lower
        .iter()
        .map(|&l| l - eps * (S::one() + l.abs()))
        .collect();
    let upper = b
        .upper
        .iter()
        .map(|&u| u + eps * (S::one() + u.abs()))
        .collect();
    BoxRegion { lower, upper }
}

fn v<S: Scalar>(xs: &[f64]) -> Vec<S> {
    xs.iter().map(|&x| S::lit(x)).collect()
}

/// P1 "unbalanced-convex": `f1 = (100 x1^2 + x2^2)/2`, `f2 = |x - (1,1)|^2 / 2`.
/// Gradient magnitudes differ by two orders of magnitude around `(1, 1)`.
pub fn unbalanced_convex<S: Scalar>() -> Problem<S> {
    SeparableQuadratic {
        curvature: vec![v(&[100.0, 1.0]), v(&[1.0, 1.0])],
        centers: vec![v(&[0.0, 0.0]), v(&[1.0, 1.0])],
    }
    .into_problem(
        "p1",
        ConvexityClass::Convex,
        BoxRegion {
            lower: v(&[-1.5, -1.5]),
            upper: v(&[1.5, 3.5]),
        },
        vec![v(&[1.0, 1.0]), v(&[0.5, -1.0])],
    )
}

/// P2 "strongly-convex": `f_i = |x - c_i|^2 / 2`, `c1 = (0,0)`, `c2 = (2,0)`.
pub fn strongly_convex<S: Scalar>() -> Problem<S> {
    SeparableQuadratic {
        curvature: vec![v(&[1.0, 1.0]), v(&[1.0, 1.0])],
        centers: vec![v(&[0.0, 0.0]), v(&[2.0, 0.0])],
    }
    .into_problem(
        "p2",
        ConvexityClass::StronglyConvex,
        BoxRegion {
            lower: v(&[-2.0, -2.5]),
            upper: v(&[4.0, 2.5]),
        },
        vec![v(&[0.5, 1.5]), v(&[3.0, 1.0])],
    )
}

/// P4 "scalar-pair": `f1 = (x+1)^2`, `f2 = (x-1)^2`; Pareto set `[-1, 1]`.
pub fn scalar_pair<S: Scalar>() -> Problem<S> {
    SeparableQuadratic {
        curvature: vec![v(&[2.0]), v(&[2.0])],
        centers: vec![v(&[-1.0]), v(&[1.0])],
    }
    .into_problem(
        "p4",
        ConvexityClass::StronglyConvex,
        BoxRegion {
            lower: v(&[-4.0]),
            upper: v(&[4.0]),
        },
        vec![v(&[2.0]), v(&[-3.0]), v(&[0.0])],
    )
}

/// Coordinate profile of P3: `g(u) = sqrt(1+u^2) + 0.4 cos u`. Its minimum
/// is `g(0) = 1.4`, `|g'| < 1.4` and `|g''| <= 0.6`; `g''` changes sign.
pub mod ripple {
    use crate::scalar::Scalar;

    pub const AMPLITUDE: f64 = 0.4;
    /// `inf g`, attained at `u = 0`.
    pub const FLOOR: f64 = 1.4;
    /// `sup |g''|`, attained at `u = 0`.
    pub const CURVATURE_BOUND: f64 = 0.6;
    /// `sup |g'|` (approached as `|u| -> inf`).
    pub const SLOPE_BOUND: f64 = 1.4;

    pub fn value<S: Scalar>(u: S) -> S {
        (S::one() + u * u).sqrt() + S::lit(AMPLITUDE) * u.cos()
    }

    pub fn slope<S: Scalar>(u: S) -> S {
        u / (S::one() + u * u).sqrt() - S::lit(AMPLITUDE) * u.sin()
    }

    /// Largest `|u|` with `g(u) - FLOOR <= a`, from `g(u) >= sqrt(1+u^2) - 0.4`.
    pub fn sublevel_half_width<S: Scalar>(a: S) -> S {
        let r = a.max(S::zero()) + S::lit(FLOOR + AMPLITUDE);
        (r * r - S::one()).max(S::zero()).sqrt()
    }
}

/// P3 "nonconvex-bounded-grad": `f_i(x) = sum_j [g(x_j - c_ij) - 1.4]` with
/// the ripple profile `g`, `c1 = (-1, 0)`, `c2 = (1, 0)`. Lower bounded by 0,
/// nonconvex, with globally bounded gradients. The two centers differ, so
/// no point is stationary for both objectives.
pub fn nonconvex_bounded_grad<S: Scalar>() -> Problem<S> {
    let centers: Vec<Vec<S>> = vec![v(&[-1.0, 0.0]), v(&[1.0, 0.0])];
    let floor = S::lit(ripple::FLOOR);
    let (cv, cg, cl) = (centers.clone(), centers.clone(), centers.clone());
    let m_global = S::lit(ripple::SLOPE_BOUND) * S::lit(2.0).sqrt();
    let region = BoxRegion {
        lower: v(&[-4.0, -4.0]),
        upper: v(&[4.0, 4.0]),
    };
    ProblemBuilder::new(
        "p3",
        2,
        2,
        move |x: &[S]| {
            cv.iter()
                .map(|c| {
                    x.iter()
                        .zip(c)
                        .map(|(&xj, &cj)| ripple::value(xj - cj) - floor)
                        .sum()
                })
                .collect()
        },
        move |x: &[S]| {
            cg.iter()
                .map(|c| {
                    x.iter()
                        .zip(c)
                        .map(|(&xj, &cj)| ripple::slope(xj - cj))
                        .collect()
                })
                .collect()
        },
        region,
    )
    .lipschitz(v(&[ripple::CURVATURE_BOUND, ripple::CURVATURE_BOUND]))
    .lower_bounds(v(&[0.0, 0.0]))
    .class(ConvexityClass::Nonconvex)
    .gradient_bound(m_global)
    .level_set(move |a: &[S]| {
        let mut bounds: Option<BoxRegion<S>> = None;
        for (c, &ai) in cl.iter().zip(a) {
            let w = ripple::sublevel_half_width(ai);
            let b = BoxRegion {
                lower: c.iter().map(|&cj| cj - w).collect(),
                upper: c.iter().map(|&cj| cj + w).collect(),
            };
            bounds = Some(match bounds {
                None => b,
                Some(prev) => prev.intersect(&b),
            });
        }
        let bounds = pad(bounds.expect("two objectives"));
        LevelSetBound {
            level: a.to_vec(),
            radius: bounds.max_norm(),
            bounds,
        }
    })
    .start_point(v(&[0.5, 2.0]))
    .start_point(v(&[-2.0, 1.5]))
    .build()
    .expect("shipped problem metadata is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_values_and_gradients() {
        let p = unbalanced_convex::<f64>();
        assert_eq!(p.evaluate(&[0.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        let g = p.gradients(&[1.0, 1.0]).unwrap();
        assert_eq!(g[0], vec![100.0, 1.0]);
        assert_eq!(g[1], vec![0.0, 0.0]);
    }

    #[test]
    fn p2_minimizer_is_stationary() {
        let p = strongly_convex::<f64>();
        assert_eq!(p.evaluate(&[0.0, 0.0]).unwrap()[0], 0.0);
        assert_eq!(p.gradients(&[0.0, 0.0]).unwrap()[0], vec![0.0, 0.0]);
    }

    #[test]
    fn evaluation_is_pure() {
        for name in BUILTIN_NAMES {
            let p = builtin::<f64>(name).unwrap();
            let x = p.region.center();
            assert_eq!(p.evaluate(&x).unwrap(), p.evaluate(&x).unwrap());
            assert_eq!(p.gradients(&x).unwrap(), p.gradients(&x).unwrap());
        }
    }

    #[test]
    fn unit_ball_level_set() {
        let q = SeparableQuadratic::<f64> {
            curvature: vec![vec![1.0, 1.0]],
            centers: vec![vec![0.0, 0.0]],
        };
        let b = q.level_set(&[2.0]);
        assert!((b.radius - 2.0).abs() < 1e-15);
        assert!((b.bounds.upper[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn level_set_shrinks_with_level() {
        let p = unbalanced_convex::<f64>();
        let f0 = p.evaluate(&[0.5, -1.0]).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..10 {
            let s = 1.0 - 0.1 * k as f64;
            let a: Vec<f64> = f0.iter().map(|f| f * s).collect();
            let r = p.level_set_bound(&a).unwrap().radius;
            assert!(r <= last);
            last = r;
        }
    }

    #[test]
    fn degenerate_level_set_contains_the_point() {
        let p = scalar_pair::<f64>();
        for &x in &[0.3, -1.0, 1.0, 0.0] {
            let b = p.level_set_bound(&p.evaluate(&[x]).unwrap()).unwrap();
            assert!(b.bounds.contains(&[x]), "x = {x}, box = {:?}", b.bounds);
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let p = strongly_convex::<f64>();
        assert!(matches!(
            p.evaluate(&[f64::NAN, 0.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(p.evaluate(&[0.0]).is_err());
    }

    #[test]
    fn non_finite_output_is_numeric_domain() {
        let p = ProblemBuilder::new(
            "log",
            1,
            1,
            |x: &[f64]| vec![x[0].ln()],
            |x: &[f64]| vec![vec![1.0 / x[0]]],
            BoxRegion::new(vec![0.0], vec![1.0]).unwrap(),
        )
        .build()
        .unwrap();
        assert!(matches!(p.evaluate(&[-1.0]), Err(Error::NumericDomain(_))));
    }

    #[test]
    fn ripple_profile_constants() {
        assert!((ripple::value(0.0f64) - ripple::FLOOR).abs() < 1e-15);
        assert_eq!(ripple::slope(0.0f64), 0.0);
        // curvature changes sign: positive at 0, negative near 2 pi
        let g2 = |u: f64| (1.0 + u * u).powf(-1.5) - 0.4 * u.cos();
        assert!(g2(0.0) > 0.0 && g2(2.0 * std::f64::consts::PI) < 0.0);
    }

    #[test]
    fn lookup_by_name() {
        for name in BUILTIN_NAMES {
            assert_eq!(builtin::<f64>(name).unwrap().name, name);
        }
        assert!(builtin::<f64>("p9").is_none());
        assert!(builtin::<f32>("p2").is_some());
    }
}
