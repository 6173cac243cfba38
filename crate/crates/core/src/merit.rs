//! The merit function `u0(x) = sup_z min_i (f_i(x) - f_i(z))`, criticality
//! measures, rate-bound checks and Lyapunov monitors.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{FlowMode, Trajectory};
use crate::geometry::min_norm_point;
use crate::linalg::{axpy, dist, norm, norm_sq, scale};
use crate::problems::{BoxRegion, Problem};
use crate::scalar::Scalar;
use crate::scaling::{divide, ScalingRule};

/// Evaluation budget of [`u0_certified`].
pub const DEFAULT_BUDGET: u64 = 20_000_000;
/// Relative slack of the monotonicity monitors.
pub const MONITOR_SLACK: f64 = 1e-6;
/// Slack on every rate bound.
pub const RATE_SLACK: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct MeritEstimate<S> {
    pub value: S,
    /// `sup <= value + certified_error`; zero for heuristic estimates.
    pub certified_error: S,
    pub heuristic: bool,
    /// Point attaining `value`.
    pub witness: Vec<S>,
    pub evaluations: u64,
}

struct Cell<S> {
    lower: Vec<S>,
    upper: Vec<S>,
    ub: f64,
    seq: u64,
}

impl<S> PartialEq for Cell<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S> Eq for Cell<S> {}
impl<S> PartialOrd for Cell<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S> Ord for Cell<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub
            .total_cmp(&other.ub)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn gap<S: Scalar>(fx: &[S], fz: &[S]) -> S {
    fx.iter()
        .zip(fz)
        .map(|(&a, &b)| a - b)
        .fold(S::infinity(), S::min)
}

/// `u0(x)` by Lipschitz branch-and-bound over `bx`, which must contain
/// `L(f, f(x))`. The result is certified as for a grid of spacing `h`:
/// `value <= u0(x) <= value + M h sqrt(n) / 2` with `M` the gradient bound
/// on `bx`.
pub fn u0_certified<S: Scalar>(
    p: &Problem<S>,
    x: &[S],
    bx: &BoxRegion<S>,
    h: S,
) -> Result<MeritEstimate<S>> {
    u0_certified_with_budget(p, x, bx, h, DEFAULT_BUDGET)
}

pub fn u0_certified_with_budget<S: Scalar>(
    p: &Problem<S>,
    x: &[S],
    bx: &BoxRegion<S>,
    h: S,
    budget: u64,
) -> Result<MeritEstimate<S>> {
    if !(h > S::zero()) || !h.is_finite() {
        return Err(Error::OutOfRange {
            key: "h".into(),
            reason: "grid spacing must be positive".into(),
        });
    }
    if bx.dim() != p.dim {
        return Err(Error::InvalidInput("merit: box dimension mismatch".into()));
    }
    let fx = p.evaluate(x)?;
    let n = S::lit(p.dim as f64);
    let half = S::lit(0.5);
    let m_box = p.gradient_bound_on(bx);
    let error = m_box * h * n.sqrt() * half;
    let curvature_ok = bx
        .lower
        .iter()
        .zip(&bx.upper)
        .zip(p.region.lower.iter().zip(&p.region.upper))
        .all(|((&l, &u), (&rl, &ru))| l >= rl && u <= ru);

    let mut best = S::zero();
    let mut witness = x.to_vec();
    let mut evaluations = 1u64;
    let mut seq = 0u64;

    let mut bound = |lower: Vec<S>,
                     upper: Vec<S>,
                     best: &mut S,
                     witness: &mut Vec<S>,
                     evals: &mut u64|
     -> Result<Cell<S>> {
        *evals += 1;
        let c: Vec<S> = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| half * (l + u))
            .collect();
        let delta = half * dist(&lower, &upper);
        let fc = p.evaluate(&c)?;
        let phi = gap(&fx, &fc);
        if phi > *best {
            *best = phi;
            witness.clone_from(&c);
        }
        let cell_box = BoxRegion {
            lower: lower.clone(),
            upper: upper.clone(),
        };
        let m_cell = p.gradient_bound_on(&cell_box);
        let mut ub = S::infinity();
        let grads = if curvature_ok {
            Some(p.gradients(&c)?)
        } else {
            None
        };
        for i in 0..fx.len() {
            let mut slope = m_cell * delta;
            if let Some(g) = &grads {
                slope = slope.min(norm(&g[i]) * delta + half * p.lipschitz[i] * delta * delta);
            }
            ub = ub.min(fx[i] - fc[i] + slope);
        }
        seq += 1;
        Ok(Cell {
            lower,
            upper,
            ub: ub.as_f64(),
            seq,
        })
    };

    let mut heap = BinaryHeap::new();
    heap.push(bound(
        bx.lower.clone(),
        bx.upper.clone(),
        &mut best,
        &mut witness,
        &mut evaluations,
    )?);
    let err = error.as_f64();
    while let Some(cell) = heap.pop() {
        if cell.ub <= best.as_f64() + err {
            break;
        }
        let (axis, width) = cell
            .lower
            .iter()
            .zip(&cell.upper)
            .map(|(&l, &u)| u - l)
            .enumerate()
            .fold(
                (0, S::zero()),
                |acc, (j, w)| if w > acc.1 { (j, w) } else { acc },
            );
        if width <= h {
            continue;
        }
        if evaluations + 2 > budget {
            let needed = bx
                .lower
                .iter()
                .zip(&bx.upper)
                .map(|(&l, &u)| ((u - l) / h).as_f64().ceil() + 1.0)
                .product::<f64>();
            return Err(Error::Budget {
                needed: needed.min(u64::MAX as f64) as u64,
                budget,
            });
        }
        let mid = half * (cell.lower[axis] + cell.upper[axis]);
        let mut left_upper = cell.upper.clone();
        left_upper[axis] = mid;
        let mut right_lower = cell.lower.clone();
        right_lower[axis] = mid;
        heap.push(bound(
            cell.lower.clone(),
            left_upper,
            &mut best,
            &mut witness,
            &mut evaluations,
        )?);
        heap.push(bound(
            right_lower,
            cell.upper,
            &mut best,
            &mut witness,
            &mut evaluations,
        )?);
    }

    Ok(MeritEstimate {
        value: best,
        certified_error: error,
        heuristic: false,
        witness,
        evaluations,
    })
}

/// `u0(x)` with the box from the problem's level-set bound at `f(x)`.
pub fn u0_certified_auto<S: Scalar>(p: &Problem<S>, x: &[S], h: S) -> Result<MeritEstimate<S>> {
    let f = p.evaluate(x)?;
    let b = p.level_set_bound(&f)?;
    u0_certified(p, x, &b.bounds, h)
}

/// Heuristic `u0(x)` for convex problems: best of `starts` runs of
/// epsilon-active steepest descent on `z -> max_i (f_i(z) - f_i(x))`. The
/// first run starts at `x`, the rest uniformly in the level-set box.
pub fn u0_ascent<S: Scalar, R: Rng + ?Sized>(
    p: &Problem<S>,
    x: &[S],
    starts: usize,
    rng: &mut R,
) -> Result<MeritEstimate<S>> {
    if !p.class.is_convex() {
        return Err(Error::InvalidInput(format!(
            "merit: ascent estimator needs a convex problem, `{}` is not",
            p.name
        )));
    }
    let fx = p.evaluate(x)?;
    let bx = p.level_set_bound(&fx)?.bounds;
    let mut best = S::zero();
    let mut witness = x.to_vec();
    let mut evaluations = 1u64;
    for s in 0..starts.max(1) {
        let z0 = if s == 0 { x.to_vec() } else { bx.sample(rng) };
        let (z, value, evals) = descend_max_gap(p, &fx, z0)?;
        evaluations += evals;
        if value > best {
            best = value;
            witness = z;
        }
    }
    Ok(MeritEstimate {
        value: best,
        certified_error: S::zero(),
        heuristic: true,
        witness,
        evaluations,
    })
}

/// Minimizes `psi(z) = max_i (f_i(z) - fx_i)`; returns `(z, -psi(z), evals)`.
fn descend_max_gap<S: Scalar>(p: &Problem<S>, fx: &[S], mut z: Vec<S>) -> Result<(Vec<S>, S, u64)> {
    let psi = |fz: &[S]| -> S {
        fz.iter()
            .zip(fx)
            .map(|(&a, &b)| a - b)
            .fold(S::neg_infinity(), S::max)
    };
    let eps_floor = S::tol(1e-15);
    let mut fz = p.evaluate(&z)?;
    let mut cur = psi(&fz);
    let scale_f = S::one() + fx.iter().fold(S::zero(), |a, &b| a.max(b.abs()));
    let mut eps = S::lit(1e-2) * scale_f;
    let mut step = S::one();
    let mut evals = 1u64;
    for _ in 0..20_000 {
        let g = p.gradients(&z)?;
        let active: Vec<Vec<S>> = fz
            .iter()
            .zip(fx)
            .zip(g)
            .filter(|((&a, &b), _)| a - b >= cur - eps)
            .map(|(_, gi)| gi)
            .collect();
        let d = scale(&min_norm_point(&active)?.point, -S::one());
        let dn = norm_sq(&d);
        if dn <= S::tol(1e-24) * scale_f {
            if eps <= eps_floor * scale_f {
                break;
            }
            eps = eps * S::lit(0.1);
            continue;
        }
        let mut tau = step;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = z.clone();
            axpy(&mut trial, tau, &d);
            let ft = p.evaluate(&trial)?;
            evals += 1;
            let next = psi(&ft);
            if next <= cur - S::lit(1e-4) * tau * dn {
                z = trial;
                fz = ft;
                cur = next;
                accepted = true;
                break;
            }
            tau = tau * half();
        }
        if accepted {
            step = (tau * S::lit(2.0)).min(S::lit(1e6));
            eps = (eps * S::lit(2.0)).min(S::lit(1e-2) * scale_f);
        } else {
            if eps <= eps_floor * scale_f {
                break;
            }
            eps = eps * S::lit(0.1);
        }
    }
    Ok((z, -cur, evals))
}

fn half<S: Scalar>() -> S {
    S::lit(0.5)
}

/// Norms of the min-norm point of the raw and of the scaled gradient hull.
#[derive(Debug)]
pub struct Criticality<S> {
    pub unscaled: S,
    /// Scaling failures only affect this figure.
    pub scaled: Result<S>,
}

pub fn criticality<S: Scalar>(
    p: &Problem<S>,
    rule: &ScalingRule<S>,
    x: &[S],
    t: S,
) -> Result<Criticality<S>> {
    let raw = p.gradients(x)?;
    let unscaled = min_norm_point(&raw)?.norm();
    let scaled = rule
        .evaluate_with_gradients(&raw, t)
        .and_then(|alpha| Ok(min_norm_point(&divide(&raw, &alpha))?.norm()));
    Ok(Criticality { unscaled, scaled })
}

/// Time dependence of a rate bound `constant * shape(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BoundShape {
    /// `1 / t`.
    InverseTime,
    /// `exp(-rate t)`.
    Exponential { rate: f64 },
    /// `1 / sqrt(t)`.
    InverseSqrtTime,
    /// `1 / (t + shift)^2`.
    InverseSquareShifted { shift: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateBound {
    pub name: String,
    pub constant: f64,
    pub shape: BoundShape,
    /// Compare the running minimum of the series rather than the series.
    pub running_min: bool,
    pub slack: f64,
}

impl RateBound {
    pub fn new(name: impl Into<String>, constant: f64, shape: BoundShape) -> Self {
        Self {
            name: name.into(),
            constant,
            shape,
            running_min: false,
            slack: RATE_SLACK,
        }
    }

    pub fn running_min(mut self) -> Self {
        self.running_min = true;
        self
    }

    pub fn at(&self, t: f64) -> f64 {
        let c = self.constant;
        match self.shape {
            BoundShape::InverseTime => c / t,
            BoundShape::Exponential { rate } => c * (-rate * t).exp(),
            BoundShape::InverseSqrtTime => c / t.sqrt(),
            BoundShape::InverseSquareShifted { shift } => c / ((t + shift) * (t + shift)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub name: String,
    pub constant: f64,
    /// `sup_t value(t) / bound(t)`.
    pub observed: f64,
    /// Time of the worst ratio.
    pub worst_at: f64,
    pub slack: f64,
    pub pass: bool,
    /// Least-squares slope of `log value` against `log t` over the final
    /// decade, skipping the first tenth of the horizon.
    pub slope: Option<f64>,
}

/// Compares a `(t, value)` series with `bound`. Points where the bound is
/// not finite are skipped.
pub fn check_bound(series: &[(f64, f64)], bound: &RateBound) -> RateReport {
    let mut values: Vec<(f64, f64)> = series.to_vec();
    if bound.running_min {
        let mut m = f64::INFINITY;
        for v in &mut values {
            m = m.min(v.1);
            v.1 = m;
        }
    }
    let mut observed = f64::NEG_INFINITY;
    let mut worst_at = f64::NAN;
    for &(t, v) in &values {
        let b = bound.at(t);
        if !b.is_finite() {
            continue;
        }
        let ratio = if b > 0.0 {
            v / b
        } else if v <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > observed || ratio.is_nan() {
            observed = ratio;
            worst_at = t;
        }
    }
    if observed == f64::NEG_INFINITY {
        observed = 0.0;
    }
    RateReport {
        name: bound.name.clone(),
        constant: bound.constant,
        observed,
        worst_at,
        slack: bound.slack,
        pass: observed <= 1.0 + bound.slack,
        slope: fit_slope(&values),
    }
}

/// Log-log least-squares slope over the final decade of the horizon,
/// excluding the first 10%.
pub fn fit_slope(series: &[(f64, f64)]) -> Option<f64> {
    let (t0, t1) = match (series.first(), series.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return None,
    };
    let from = (t1 / 10.0).max(t0 + 0.1 * (t1 - t0));
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, v)| *t >= from && *t > 0.0 && *v > 0.0)
        .map(|&(t, v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Lyapunov-type quantities evaluated on a recorded trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monitor {
    /// `h_z = |x - z|^2 / 2`.
    Distance,
    /// `(s / alpha_max) min_i (f_i - f_i(z)) + |x - z|^2 / 2`.
    ConvexEnergy,
    /// `exp(t / alpha_max) [min_i (f_i - f_i(z)) + |x - z|^2 / 2]`.
    StronglyConvexEnergy,
    /// `min_i (t+theta)^2 (f_i - f_i(z)) / alpha_i + |2 (x - z) + (t+theta) x'|^2 / 2`.
    AcceleratedEnergy,
    /// Each `W_i = f_i + alpha_i |x'|^2 / 2`, with slack per unit time.
    MechanicalEnergy,
}

impl Monitor {
    pub fn name(self) -> &'static str {
        match self {
            Self::Distance => "distance",
            Self::ConvexEnergy => "convex-energy",
            Self::StronglyConvexEnergy => "strongly-convex-energy",
            Self::AcceleratedEnergy => "accelerated-energy",
            Self::MechanicalEnergy => "mechanical-energy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorReport {
    pub name: String,
    pub records: usize,
    /// Largest increase between consecutive records, relative to the
    /// allowed slack (values at most 1 pass).
    pub worst: f64,
    pub violations: usize,
    pub pass: bool,
}

/// Checks a series for non-increase with slack `1e-6 (1 + |v|)` per record.
pub fn check_nonincreasing(name: &str, values: &[f64]) -> MonitorReport {
    let mut worst = 0f64;
    let mut violations = 0;
    for w in values.windows(2) {
        let slack = MONITOR_SLACK * (1.0 + w[0].abs());
        let r = (w[1] - w[0]) / slack;
        worst = worst.max(r);
        if r > 1.0 || r.is_nan() {
            violations += 1;
        }
    }
    MonitorReport {
        name: name.into(),
        records: values.len(),
        worst,
        violations,
        pass: violations == 0,
    }
}

/// Evaluates the requested monitors along `traj` against the reference
/// point `z`, which should lie in `L(f, f(final state))`.
pub fn lyapunov_monitors<S: Scalar>(
    p: &Problem<S>,
    traj: &Trajectory<S>,
    which: &[Monitor],
    z: &[S],
) -> Result<Vec<MonitorReport>> {
    let fz = p.evaluate(z)?;
    let alpha_max = traj
        .records
        .iter()
        .flat_map(|r| r.alpha.iter().copied())
        .fold(S::zero(), S::max)
        .as_f64();
    let theta = match traj.mode {
        FlowMode::Accelerated { theta, .. } => Some(theta.as_f64()),
        FlowMode::FirstOrder => None,
    };
    let mut out = Vec::with_capacity(which.len());
    for &m in which {
        let report = match m {
            Monitor::MechanicalEnergy => {
                let rows: Vec<(f64, Vec<f64>)> = traj
                    .records
                    .iter()
                    .map(|r| {
                        let e = r.energies.as_ref().ok_or_else(|| {
                            Error::InvalidInput(
                                "merit: energies need an accelerated trajectory".into(),
                            )
                        })?;
                        Ok((r.t.as_f64(), e.iter().map(|v| v.as_f64()).collect()))
                    })
                    .collect::<Result<_>>()?;
                mechanical_report(&rows)
            }
            _ => {
                let mut values = Vec::with_capacity(traj.records.len());
                for r in &traj.records {
                    let t = r.t.as_f64();
                    let g = gap(&r.f, &fz).as_f64();
                    let d2 = norm_sq(&r.x.iter().zip(z).map(|(&a, &b)| a - b).collect::<Vec<_>>())
                        .as_f64();
                    let v = match m {
                        Monitor::Distance => 0.5 * d2,
                        Monitor::ConvexEnergy => t / alpha_max * g + 0.5 * d2,
                        Monitor::StronglyConvexEnergy => (t / alpha_max).exp() * (g + 0.5 * d2),
                        Monitor::AcceleratedEnergy => {
                            let theta = theta.ok_or_else(|| {
                                Error::InvalidInput(
                                    "merit: accelerated energy needs an accelerated trajectory"
                                        .into(),
                                )
                            })?;
                            let v = r.v.as_ref().expect("accelerated records carry velocities");
                            let s = t + theta;
                            let weighted =
                                r.f.iter()
                                    .zip(&fz)
                                    .zip(&r.alpha)
                                    .map(|((&a, &b), &al)| ((a - b) / al).as_f64())
                                    .fold(f64::INFINITY, f64::min);
                            let mut w = 0.0;
                            for j in 0..z.len() {
                                let c = 2.0 * (r.x[j] - z[j]).as_f64() + s * v[j].as_f64();
                                w += c * c;
                            }
                            s * s * weighted + 0.5 * w
                        }
                        Monitor::MechanicalEnergy => unreachable!(),
                    };
                    values.push(v);
                }
                check_nonincreasing(m.name(), &values)
            }
        };
        out.push(report);
    }
    Ok(out)
}

/// Each `W_i` may grow by at most `1e-7` per unit time between records.
fn mechanical_report(rows: &[(f64, Vec<f64>)]) -> MonitorReport {
    let mut worst = 0f64;
    let mut violations = 0;
    for w in rows.windows(2) {
        let allowed = crate::flow::ENERGY_SLACK_RATE * (w[1].0 - w[0].0);
        for (a, b) in w[0].1.iter().zip(&w[1].1) {
            let r = (b - a) / allowed;
            worst = worst.max(r);
            if r > 1.0 || r.is_nan() {
                violations += 1;
            }
        }
    }
    MonitorReport {
        name: Monitor::MechanicalEnergy.name().into(),
        records: rows.len(),
        worst,
        violations,
        pass: violations == 0,
    }
}

/// `R^2 alpha_max`, the constant of the `1/t` bound for convex problems,
/// with `R` from the level-set bound at `f(x0)`.
pub fn convex_rate_constant<S: Scalar>(p: &Problem<S>, x0: &[S], alpha_max: S) -> Result<f64> {
    let r = p.level_set_bound(&p.evaluate(x0)?)?.radius;
    Ok((r * r * alpha_max).as_f64())
}

/// `exp(t0/alpha_max) (min_i (f_i(x0) - inf f_i) + R^2)`.
pub fn strongly_convex_constant<S: Scalar>(
    p: &Problem<S>,
    x0: &[S],
    alpha_max: S,
    t0: S,
) -> Result<f64> {
    let r = p.level_set_bound(&p.evaluate(x0)?)?.radius;
    Ok(((t0 / alpha_max).exp() * (p.min_gap(x0)? + r * r)).as_f64())
}

/// `sqrt(min_i (f_i(x0) - inf f_i)) / sqrt(eta)`.
pub fn nonconvex_constant<S: Scalar>(p: &Problem<S>, x0: &[S], eta: S) -> Result<f64> {
    Ok((p.min_gap(x0)?.sqrt() / eta.sqrt()).as_f64())
}

/// `alpha_max [(t0+theta)^2 min_i (f_i(x0) - inf f_i)/alpha_i + 2 D^2]`:
/// the initial value of the accelerated Lyapunov function with zero initial
/// velocity, maximized over reference points `z` in the level-set box at
/// `f(x0)` (`D` is the largest distance from `x0` to that box).
pub fn accelerated_constant<S: Scalar>(
    p: &Problem<S>,
    x0: &[S],
    alpha: &[S],
    theta: S,
    t0: S,
) -> Result<f64> {
    let f0 = p.evaluate(x0)?;
    let b = p.level_set_bound(&f0)?.bounds;
    let d2 = x0
        .iter()
        .zip(b.lower.iter().zip(&b.upper))
        .map(|(&xj, (&l, &u))| {
            let w = (xj - l).abs().max((u - xj).abs());
            w * w
        })
        .fold(S::zero(), |a, b| a + b);
    let weighted = f0
        .iter()
        .zip(&p.lower_bounds)
        .zip(alpha)
        .map(|((&fi, &li), &ai)| (fi - li) / ai)
        .fold(S::infinity(), S::min);
    let alpha_max = alpha.iter().copied().fold(S::zero(), S::max);
    let s = t0 + theta;
    Ok((alpha_max * (s * s * weighted + S::lit(2.0) * d2)).as_f64())
}

/// `(alpha_max / s_min) R^2`, the constant of the `1/k` bound.
pub fn discrete_constant<S: Scalar>(
    p: &Problem<S>,
    x0: &[S],
    alpha_max: S,
    s_min: S,
) -> Result<f64> {
    let r = p.level_set_bound(&p.evaluate(x0)?)?.radius;
    Ok((alpha_max / s_min * r * r).as_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{scalar_pair, strongly_convex, unbalanced_convex, ProblemBuilder};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half_square() -> Problem<f64> {
        ProblemBuilder::new(
            "half-square",
            1,
            1,
            |x: &[f64]| vec![0.5 * x[0] * x[0]],
            |x: &[f64]| vec![vec![x[0]]],
            BoxRegion::new(vec![-3.0], vec![3.0]).unwrap(),
        )
        .lipschitz(vec![1.0])
        .class(crate::problems::ConvexityClass::StronglyConvex)
        .build()
        .unwrap()
    }

    /// `u0` for the scalar pair by direct optimization over a fine grid.
    fn scalar_pair_brute(x: f64, h: f64) -> f64 {
        let f = |z: f64| ((z + 1.0).powi(2), (z - 1.0).powi(2));
        let fx = f(x);
        let n = (8.0 / h) as i64;
        (0..=n)
            .map(|k| {
                let fz = f(-4.0 + k as f64 * h);
                (fx.0 - fz.0).min(fx.1 - fz.1)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn certified_scalar_examples() {
        let p = half_square();
        let bx = BoxRegion::new(vec![-3.0], vec![3.0]).unwrap();
        let e = u0_certified(&p, &[2.0], &bx, 1e-3).unwrap();
        assert!((e.value - 2.0).abs() <= e.certified_error);
        assert!(e.certified_error > 0.0);

        let q = scalar_pair::<f64>();
        let e = u0_certified_auto(&q, &[0.0], 1e-6).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.witness, vec![0.0]);

        // f(2) = (9, 1): the second objective caps the gain at 1, reached at z = 1.
        let e = u0_certified_auto(&q, &[2.0], 1e-6).unwrap();
        let brute = scalar_pair_brute(2.0, 1e-5);
        assert!((brute - 1.0).abs() < 1e-8);
        assert!(e.value <= 1.0 + 1e-12 && 1.0 <= e.value + e.certified_error);
        let fz = q.evaluate(&e.witness).unwrap();
        let fx = q.evaluate(&[2.0]).unwrap();
        assert!((gap(&fx, &fz) - e.value).abs() < 1e-9);
    }

    #[test]
    fn scalar_pair_outside_pareto_set_is_squared_distance() {
        let q = scalar_pair::<f64>();
        for &x in &[-2.0, -1.5, -1.002, 1.01, 1.7] {
            let e = u0_certified_auto(&q, &[x], 1e-7).unwrap();
            let exact = (f64::abs(x) - 1.0).powi(2);
            assert!(
                e.value <= exact + 1e-12 && exact <= e.value + e.certified_error,
                "{x}"
            );
        }
    }

    #[test]
    fn budget_is_enforced() {
        let p = unbalanced_convex::<f64>();
        let r = u0_certified_with_budget(&p, &[0.5, -1.0], &p.region, 1e-9, 100);
        assert!(matches!(r, Err(Error::Budget { budget: 100, .. })));
    }

    #[test]
    fn ascent_matches_certified_on_convex_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [unbalanced_convex::<f64>(), strongly_convex::<f64>()] {
            for _ in 0..10 {
                let x = p.region.sample(&mut rng);
                let c = u0_certified_auto(&p, &x, 1e-5).unwrap();
                let a = u0_ascent(&p, &x, 3, &mut rng).unwrap();
                assert!(a.heuristic);
                let tol = c.certified_error + 1e-6;
                assert!(
                    (a.value - c.value).abs() <= tol,
                    "{} at {x:?}: ascent {} certified {} +- {}",
                    p.name,
                    a.value,
                    c.value,
                    c.certified_error
                );
            }
        }
    }

    #[test]
    fn ascent_rejects_nonconvex() {
        let p = crate::problems::nonconvex_bounded_grad::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(u0_ascent(&p, &[0.0, 0.0], 2, &mut rng).is_err());
    }

    #[test]
    fn criticality_examples() {
        let q = scalar_pair::<f64>();
        let c = criticality(&q, &ScalingRule::unit(), &[0.0], 0.0).unwrap();
        assert_eq!(c.unscaled, 0.0);
        let c = criticality(&q, &ScalingRule::unit(), &[2.0], 0.0).unwrap();
        assert!((c.unscaled - 2.0).abs() < 1e-12);
        let zero_eta = ScalingRule::gradnorm(0.0).unwrap();
        let c = criticality(&q, &zero_eta, &[1.0], 0.0).unwrap();
        assert_eq!(c.unscaled, 0.0);
        assert!(matches!(c.scaled, Err(Error::DegenerateScaling { .. })));
    }

    #[test]
    fn bound_checks() {
        let b = RateBound::new("inv", 3.0, BoundShape::InverseTime);
        let series: Vec<(f64, f64)> = (1..=100).map(|k| (k as f64, 3.0 / k as f64)).collect();
        let r = check_bound(&series, &b);
        assert!((r.observed - 1.0).abs() < 1e-12 && r.pass);
        assert!((r.slope.unwrap() + 1.0).abs() < 1e-9);
        let worse: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t, 1.1 * v)).collect();
        assert!(!check_bound(&worse, &b).pass);

        // running minimum forgives transient bumps
        let bumpy = vec![(1.0, 1.0), (4.0, 0.2), (9.0, 0.4)];
        let b = RateBound::new("sqrt", 1.0, BoundShape::InverseSqrtTime);
        assert!(!check_bound(&bumpy, &b).pass);
        assert!(check_bound(&bumpy, &b.running_min()).pass);
    }

    #[test]
    fn nonincreasing_check() {
        assert!(check_nonincreasing("a", &[3.0, 2.0, 2.0, 1.0]).pass);
        let r = check_nonincreasing("b", &[1.0, 1.0 + 1e-7, 2.0]);
        assert_eq!(r.violations, 1);
    }
}
