//! Fixed-step RK4 integration of the balanced gradient flow
//!
//! ```text
//! x'(t) = -proj_{C_alpha(x, t)}(0)
//! ```
//!
//! and of its accelerated second-order counterpart
//!
//! ```text
//! x'' + r/(t + theta) x' + proj_{C_alpha(x)}(-x'') = 0,
//! ```
//!
//! with diagnostics recorded along the way. The right-hand sides are only
//! piecewise smooth (the active face of the projection changes), so the
//! step is fixed and accuracy is judged by halving `dt`.
//!
//! The accelerated flow also has a proximal scheme, implicit in the
//! velocity. The acceleration term is the subdifferential of the hull's
//! support function, so one step is a proximal step
//! `v' = argmin_u h sigma_C(u) + |u - v|^2/2 + h beta |u|^2/2`. Each `W_i`
//! then decreases exactly while `h L_i <= 2 alpha_i r/(t+theta)`. RK4
//! chatters across the switching surface where the exposed face changes,
//! and drifts along it.
//!
//! The implicit acceleration is solved in closed form: with
//! `b = r/(t+theta) v` and `c*` the support point of the hull in direction
//! `b`, `x'' = -(b + c*)` satisfies `proj(-x'') = c*` because
//! `<b, y - c*> <= 0` for every hull point `y`.

use crate::error::{Error, Result};
use crate::geometry::{min_norm_point, project_onto_hull, support_point, HullProjection};
use crate::linalg::{add, axpy, dot, norm, norm_sq, scale, sub};
use crate::problems::Problem;
use crate::scalar::Scalar;
use crate::scaling::{divide, ScalingRule};

/// Per-step slack of the level-set nesting check, relative to `1 + |f_i|`.
pub const NESTING_SLACK: f64 = 1e-9;
/// Slack of the integrated descent inequality, relative to `1 + |x'|^2`.
pub const DESCENT_SLACK: f64 = 1e-6;
/// Slack of the accelerated projection inequality, relative to `1 + |x'|^2`.
pub const PROJECTION_SLACK: f64 = 1e-8;
/// Allowed energy increase per unit time in accelerated mode.
pub const ENERGY_SLACK_RATE: f64 = 1e-7;
/// A state farther than this fraction of the region diameter outside the
/// region aborts the run.
pub const DIVERGENCE_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub enum FlowMode<S> {
    FirstOrder,
    /// Damping `r / (t + theta)`.
    Accelerated {
        r: S,
        theta: S,
    },
}

/// Time stepping of the accelerated flow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AccelScheme {
    #[default]
    Rk4,
    /// Semi-implicit Euler with a proximal velocity update.
    Proximal,
}

impl std::fmt::Display for AccelScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Rk4 => "rk4",
            Self::Proximal => "proximal",
        })
    }
}

impl std::str::FromStr for AccelScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rk4" => Ok(Self::Rk4),
            "proximal" => Ok(Self::Proximal),
            other => Err(Error::OutOfRange {
                key: "scheme".into(),
                reason: format!("unknown scheme {other:?} (expected rk4 or proximal)"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig<S> {
    pub t0: S,
    pub t_end: S,
    pub dt: S,
    pub mode: FlowMode<S>,
    pub record_every: usize,
    /// Initial velocity (accelerated only); defaults to zero.
    pub v0: Option<Vec<S>>,
    /// Permits `r < 3` in accelerated mode.
    pub allow_weak_damping: bool,
    /// Ignored in first-order mode.
    pub scheme: AccelScheme,
}

impl<S: Scalar> FlowConfig<S> {
    pub fn first_order(t_end: S, dt: S) -> Self {
        Self {
            t0: S::zero(),
            t_end,
            dt,
            mode: FlowMode::FirstOrder,
            record_every: 1,
            v0: None,
            allow_weak_damping: false,
            scheme: AccelScheme::Rk4,
        }
    }

    pub fn accelerated(t_end: S, dt: S, r: S, theta: S) -> Self {
        Self {
            mode: FlowMode::Accelerated { r, theta },
            ..Self::first_order(t_end, dt)
        }
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn with_scheme(mut self, scheme: AccelScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(Error::OutOfRange {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if !self.t0.is_finite() || !self.t_end.is_finite() || !(self.t_end > self.t0) {
            return bad("t_end", "must be finite and exceed t0");
        }
        if !(self.dt > S::zero()) || !self.dt.is_finite() {
            return bad("dt", "must be positive");
        }
        if self.record_every == 0 {
            return bad("record_every", "must be >= 1");
        }
        if let FlowMode::Accelerated { r, theta } = self.mode {
            if !(theta >= S::zero()) {
                return bad("theta", "must be >= 0");
            }
            if !(self.t0 + theta > S::zero()) {
                return bad("theta", "t0 + theta must be positive");
            }
            if !(r > S::zero()) || (!self.allow_weak_damping && r < S::lit(3.0)) {
                return bad("r", "must be >= 3");
            }
        }
        Ok(())
    }
}

/// One recorded sample of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Record<S> {
    pub t: S,
    pub x: Vec<S>,
    /// Velocity (accelerated mode only).
    pub v: Option<Vec<S>>,
    pub f: Vec<S>,
    /// `||x'(t)||`.
    pub speed: S,
    /// `||proj_{C(x)}(0)||` over the raw gradients.
    pub crit_unscaled: S,
    /// `||proj_{C_alpha(x,t)}(0)||`.
    pub crit_scaled: S,
    /// `W_i = f_i + alpha_i/2 ||x'||^2` (accelerated mode only).
    pub energies: Option<Vec<S>>,
    /// Simplex weights of the projection driving the dynamics.
    pub weights: Vec<S>,
    pub alpha: Vec<S>,
    /// Running integral of `t ||x'(t)||^2` from `t0`.
    pub weighted_kinetic: S,
}

/// Worst per-step slack usage; `*_excess` is the largest amount by which a
/// check exceeded its slack (zero when it never did).
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct StepMonitors {
    pub steps: usize,
    pub nesting_violations: usize,
    pub nesting_excess: f64,
    pub descent_violations: usize,
    pub descent_excess: f64,
    /// Largest value of `max_i (Delta f_i + int min_i alpha_i |x'|^2) / dt`
    /// relative to its slack scale; negative means comfortably satisfied.
    pub descent_worst: f64,
    pub projection_violations: usize,
    pub projection_excess: f64,
    pub energy_violations: usize,
    pub energy_excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    pub problem: String,
    pub mode: FlowMode<S>,
    pub records: Vec<Record<S>>,
    pub monitors: StepMonitors,
}

impl<S: Scalar> Trajectory<S> {
    pub fn times(&self) -> Vec<S> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn states(&self) -> Vec<Vec<S>> {
        self.records.iter().map(|r| r.x.clone()).collect()
    }

    pub fn last(&self) -> &Record<S> {
        self.records
            .last()
            .expect("trajectories hold at least one record")
    }

    pub fn is_accelerated(&self) -> bool {
        matches!(self.mode, FlowMode::Accelerated { .. })
    }
}

/// `x'' = -(b + c*)` with `c*` the support point of `conv(generators)` in
/// direction `b`.
pub fn solve_implicit_acceleration<S: Scalar>(generators: &[Vec<S>], b: &[S]) -> Result<Vec<S>> {
    Ok(implicit_acceleration(generators, b)?.0)
}

fn implicit_acceleration<S: Scalar>(
    generators: &[Vec<S>],
    b: &[S],
) -> Result<(Vec<S>, HullProjection<S>)> {
    let s = support_point(b, generators)?;
    let a = scale(&add(b, &s.projection.point), -S::one());
    Ok((a, s.projection))
}

/// Everything the integrators need at one `(x, t)`.
struct Eval<S> {
    f: Vec<S>,
    raw: Vec<Vec<S>>,
    generators: Vec<Vec<S>>,
    alpha: Vec<S>,
}

fn eval_at<S: Scalar>(p: &Problem<S>, rule: &ScalingRule<S>, x: &[S], t: S) -> Result<Eval<S>> {
    let raw = p.gradients(x)?;
    let alpha = rule.evaluate_with_gradients(&raw, t)?;
    let generators = divide(&raw, &alpha);
    let f = p.evaluate(x)?;
    Ok(Eval {
        f,
        raw,
        generators,
        alpha,
    })
}

fn check_region<S: Scalar>(p: &Problem<S>, x: &[S], t: S) -> Result<()> {
    let excess = p.region.excess(x);
    if !excess.is_finite() || excess > S::lit(DIVERGENCE_FRACTION) * p.region.diameter() {
        return Err(Error::Divergence {
            time: t.as_f64(),
            excess: excess.as_f64(),
        });
    }
    Ok(())
}

fn step_schedule<S: Scalar>(cfg: &FlowConfig<S>) -> usize {
    let span = ((cfg.t_end - cfg.t0) / cfg.dt).as_f64();
    ((span - 1e-9).ceil().max(1.0)) as usize
}

fn time_at<S: Scalar>(cfg: &FlowConfig<S>, k: usize, steps: usize) -> S {
    if k >= steps {
        cfg.t_end
    } else {
        cfg.t0 + S::lit(k as f64) * cfg.dt
    }
}

fn min_alpha<S: Scalar>(alpha: &[S]) -> S {
    alpha.iter().copied().fold(S::infinity(), S::min)
}

/// Integrates `x' = -proj_{C_alpha(x,t)}(0)` from `x0`.
pub fn integrate_first_order<S: Scalar>(
    p: &Problem<S>,
    rule: &ScalingRule<S>,
    x0: &[S],
    cfg: &FlowConfig<S>,
) -> Result<Trajectory<S>> {
    cfg.validate()?;
    if cfg.mode != FlowMode::FirstOrder {
        return Err(Error::InvalidInput(
            "integrate_first_order needs first-order mode".into(),
        ));
    }
    check_region(p, x0, cfg.t0)?;

    let velocity = |x: &[S], t: S| -> Result<(Vec<S>, Eval<S>, HullProjection<S>)> {
        let e = eval_at(p, rule, x, t)?;
        let proj = min_norm_point(&e.generators)?;
        Ok((scale(&proj.point, -S::one()), e, proj))
    };

    let steps = step_schedule(cfg);
    let half = S::lit(0.5);
    let sixth = S::one() / S::lit(6.0);
    let mut monitors = StepMonitors::default();
    let mut records = Vec::new();

    let mut x = x0.to_vec();
    let mut t = cfg.t0;
    let (mut xdot, mut e, mut proj) = velocity(&x, t)?;
    let mut kinetic = S::zero();
    records.push(first_order_record(t, &x, &xdot, &e, &proj, kinetic)?);

    for k in 0..steps {
        let t_next = time_at(cfg, k + 1, steps);
        let h = t_next - t;

        let k1 = xdot.clone();
        let mut y = x.clone();
        axpy(&mut y, half * h, &k1);
        let k2 = velocity(&y, t + half * h)?.0;
        let mut y = x.clone();
        axpy(&mut y, half * h, &k2);
        let k3 = velocity(&y, t + half * h)?.0;
        let mut y = x.clone();
        axpy(&mut y, h, &k3);
        let k4 = velocity(&y, t_next)?.0;

        let mut x_next = x.clone();
        for j in 0..x.len() {
            x_next[j] = x[j] + h * sixth * (k1[j] + S::lit(2.0) * (k2[j] + k3[j]) + k4[j]);
        }
        check_region(p, &x_next, t_next)?;
        let (xdot_next, e_next, proj_next) = velocity(&x_next, t_next)?;

        // Hermite midpoint for Simpson's rule on min_i alpha_i |x'|^2
        let mut x_mid = Vec::with_capacity(x.len());
        for j in 0..x.len() {
            x_mid.push(half * (x[j] + x_next[j]) + h / S::lit(8.0) * (xdot[j] - xdot_next[j]));
        }
        let (xdot_mid, e_mid, _) = velocity(&x_mid, t + half * h)?;
        let q0 = min_alpha(&e.alpha) * norm_sq(&xdot);
        let qm = min_alpha(&e_mid.alpha) * norm_sq(&xdot_mid);
        let q1 = min_alpha(&e_next.alpha) * norm_sq(&xdot_next);
        let dissipated = h * sixth * (q0 + S::lit(4.0) * qm + q1);
        let speed_sq = norm_sq(&xdot).max(norm_sq(&xdot_next));
        let descent_scale = S::lit(DESCENT_SLACK) * (S::one() + speed_sq);

        for i in 0..p.objectives {
            let df = e_next.f[i] - e.f[i];
            let nest_slack = S::lit(NESTING_SLACK) * (S::one() + e.f[i].abs());
            if df > nest_slack {
                monitors.nesting_violations += 1;
                monitors.nesting_excess = monitors.nesting_excess.max((df - nest_slack).as_f64());
            }
            let lhs = (df + dissipated) / h;
            monitors.descent_worst = monitors
                .descent_worst
                .max((lhs / (S::one() + speed_sq)).as_f64());
            if lhs > descent_scale {
                monitors.descent_violations += 1;
                monitors.descent_excess =
                    monitors.descent_excess.max((lhs - descent_scale).as_f64());
            }
        }

        let tw0 = t * norm_sq(&xdot);
        let tw1 = t_next * norm_sq(&xdot_next);
        kinetic = kinetic + half * h * (tw0 + tw1);

        x = x_next;
        t = t_next;
        xdot = xdot_next;
        e = e_next;
        proj = proj_next;
        monitors.steps += 1;

        if (k + 1) % cfg.record_every == 0 || k + 1 == steps {
            records.push(first_order_record(t, &x, &xdot, &e, &proj, kinetic)?);
        }
    }
    if monitors.steps == 0 {
        monitors.descent_worst = f64::NEG_INFINITY;
    }

    Ok(Trajectory {
        problem: p.name.clone(),
        mode: FlowMode::FirstOrder,
        records,
        monitors,
    })
}

fn first_order_record<S: Scalar>(
    t: S,
    x: &[S],
    xdot: &[S],
    e: &Eval<S>,
    proj: &HullProjection<S>,
    kinetic: S,
) -> Result<Record<S>> {
    let crit_unscaled = min_norm_point(&e.raw)?.norm();
    Ok(Record {
        t,
        x: x.to_vec(),
        v: None,
        f: e.f.clone(),
        speed: norm(xdot),
        crit_unscaled,
        crit_scaled: proj.norm(),
        energies: None,
        weights: proj.weights.as_slice().to_vec(),
        alpha: e.alpha.clone(),
        weighted_kinetic: kinetic,
    })
}

/// Integrates the accelerated flow as a first-order system in `(x, v)`.
/// Only constant scalings are supported.
pub fn integrate_accelerated<S: Scalar>(
    p: &Problem<S>,
    rule: &ScalingRule<S>,
    x0: &[S],
    cfg: &FlowConfig<S>,
) -> Result<Trajectory<S>> {
    cfg.validate()?;
    let FlowMode::Accelerated { r, theta } = cfg.mode else {
        return Err(Error::InvalidInput(
            "integrate_accelerated needs accelerated mode".into(),
        ));
    };
    let alpha = rule.constant_values(p.objectives)?.ok_or_else(|| {
        Error::InvalidInput("the accelerated flow supports constant scalings only".into())
    })?;
    check_region(p, x0, cfg.t0)?;
    let v0 = match &cfg.v0 {
        Some(v) if v.len() == p.dim => v.clone(),
        Some(_) => return Err(Error::InvalidInput("v0 has the wrong dimension".into())),
        None => vec![S::zero(); p.dim],
    };

    let mut projection_violations = 0usize;
    let mut projection_excess = 0f64;
    let mut accel = |x: &[S], v: &[S], t: S| -> Result<(Vec<S>, Vec<Vec<S>>, HullProjection<S>)> {
        let raw = p.gradients(x)?;
        let generators = divide(&raw, &alpha);
        let b = scale(v, r / (t + theta));
        let (a, proj) = implicit_acceleration(&generators, &b)?;
        let slack = S::lit(PROJECTION_SLACK) * (S::one() + norm_sq(v));
        for g in &generators {
            let mut w = add(g, &b);
            axpy(&mut w, S::one(), &a);
            let lhs = dot(&w, v);
            if lhs > slack {
                projection_violations += 1;
                projection_excess = projection_excess.max((lhs - slack).as_f64());
            }
        }
        Ok((a, raw, proj))
    };

    let steps = step_schedule(cfg);
    let half = S::lit(0.5);
    let sixth = S::one() / S::lit(6.0);
    let mut monitors = StepMonitors::default();
    let mut records = Vec::new();

    let mut x = x0.to_vec();
    let mut v = v0;
    let mut t = cfg.t0;
    let mut kinetic = S::zero();
    let (mut a, raw, proj) = accel(&x, &v, t)?;
    let mut f = p.evaluate(&x)?;
    let mut energy = energies(&f, &alpha, &v);
    records.push(accelerated_record(
        t, &x, &v, &f, &raw, &alpha, &proj, kinetic,
    )?);

    for k in 0..steps {
        let t_next = time_at(cfg, k + 1, steps);
        let h = t_next - t;

        let (x_next, v_next) = match cfg.scheme {
            AccelScheme::Rk4 => {
                let (kx1, kv1) = (v.clone(), a.clone());
                let x2: Vec<S> = x
                    .iter()
                    .zip(&kx1)
                    .map(|(&xi, &d)| xi + half * h * d)
                    .collect();
                let v2: Vec<S> = v
                    .iter()
                    .zip(&kv1)
                    .map(|(&vi, &d)| vi + half * h * d)
                    .collect();
                let kv2 = accel(&x2, &v2, t + half * h)?.0;
                let kx2 = v2;
                let x3: Vec<S> = x
                    .iter()
                    .zip(&kx2)
                    .map(|(&xi, &d)| xi + half * h * d)
                    .collect();
                let v3: Vec<S> = v
                    .iter()
                    .zip(&kv2)
                    .map(|(&vi, &d)| vi + half * h * d)
                    .collect();
                let kv3 = accel(&x3, &v3, t + half * h)?.0;
                let kx3 = v3;
                let x4: Vec<S> = x.iter().zip(&kx3).map(|(&xi, &d)| xi + h * d).collect();
                let v4: Vec<S> = v.iter().zip(&kv3).map(|(&vi, &d)| vi + h * d).collect();
                let kv4 = accel(&x4, &v4, t_next)?.0;
                let kx4 = v4;

                let two = S::lit(2.0);
                let mut x_next = x.clone();
                let mut v_next = v.clone();
                for j in 0..x.len() {
                    x_next[j] = x[j] + h * sixth * (kx1[j] + two * (kx2[j] + kx3[j]) + kx4[j]);
                    v_next[j] = v[j] + h * sixth * (kv1[j] + two * (kv2[j] + kv3[j]) + kv4[j]);
                }
                (x_next, v_next)
            }
            AccelScheme::Proximal => {
                let step = proximal_step(p, &alpha, &x, &v, h, r / (t_next + theta))?;
                let slack = S::lit(PROJECTION_SLACK) * (S::one() + norm_sq(&step.1));
                for g in &step.2 {
                    let lhs = dot(&sub(g, &step.3), &step.1);
                    if lhs > slack {
                        monitors.projection_violations += 1;
                        monitors.projection_excess =
                            monitors.projection_excess.max((lhs - slack).as_f64());
                    }
                }
                (step.0, step.1)
            }
        };
        check_region(p, &x_next, t_next)?;
        let (a_next, raw_next, proj_next) = accel(&x_next, &v_next, t_next)?;
        let f_next = p.evaluate(&x_next)?;
        let energy_next = energies(&f_next, &alpha, &v_next);
        let slack = S::lit(ENERGY_SLACK_RATE) * h;
        for (w0, w1) in energy.iter().zip(&energy_next) {
            if *w1 - *w0 > slack {
                monitors.energy_violations += 1;
                monitors.energy_excess = monitors.energy_excess.max((*w1 - *w0 - slack).as_f64());
            }
        }

        kinetic = kinetic + half * h * (t * norm_sq(&v) + t_next * norm_sq(&v_next));
        x = x_next;
        v = v_next;
        a = a_next;
        t = t_next;
        f = f_next;
        energy = energy_next;
        monitors.steps += 1;

        if (k + 1) % cfg.record_every == 0 || k + 1 == steps {
            records.push(accelerated_record(
                t, &x, &v, &f, &raw_next, &alpha, &proj_next, kinetic,
            )?);
        }
    }
    monitors.projection_violations += projection_violations;
    monitors.projection_excess = monitors.projection_excess.max(projection_excess);
    monitors.descent_worst = f64::NEG_INFINITY;

    Ok(Trajectory {
        problem: p.name.clone(),
        mode: cfg.mode.clone(),
        records,
        monitors,
    })
}

/// One proximal step with damping `beta` taken at the end of the step.
/// Returns the new state, velocity, the scaled generators at `x` and the
/// hull point `c` with `v' = (v - h c) / (1 + h beta)`, so that
/// `<g_i - c, v'> <= 0` for every generator.
#[allow(clippy::type_complexity)]
fn proximal_step<S: Scalar>(
    p: &Problem<S>,
    alpha: &[S],
    x: &[S],
    v: &[S],
    h: S,
    beta: S,
) -> Result<(Vec<S>, Vec<S>, Vec<Vec<S>>, Vec<S>)> {
    let generators = divide(&p.gradients(x)?, alpha);
    let shrink = S::one() / (S::one() + h * beta);
    let tau = h * shrink;
    let w = scale(v, shrink);
    // prox of tau sigma_C at w is w - tau proj_C(w / tau)
    let c = project_onto_hull(&scale(&w, S::one() / tau), &generators)?.point;
    let mut v_next = w;
    axpy(&mut v_next, -tau, &c);
    let mut x_next = x.to_vec();
    axpy(&mut x_next, h, &v_next);
    Ok((x_next, v_next, generators, c))
}

fn energies<S: Scalar>(f: &[S], alpha: &[S], v: &[S]) -> Vec<S> {
    let kin = S::lit(0.5) * norm_sq(v);
    f.iter()
        .zip(alpha)
        .map(|(&fi, &ai)| fi + ai * kin)
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn accelerated_record<S: Scalar>(
    t: S,
    x: &[S],
    v: &[S],
    f: &[S],
    raw: &[Vec<S>],
    alpha: &[S],
    proj: &HullProjection<S>,
    kinetic: S,
) -> Result<Record<S>> {
    let crit_unscaled = min_norm_point(raw)?.norm();
    let crit_scaled = min_norm_point(&divide(raw, alpha))?.norm();
    Ok(Record {
        t,
        x: x.to_vec(),
        v: Some(v.to_vec()),
        f: f.to_vec(),
        speed: norm(v),
        crit_unscaled,
        crit_scaled,
        energies: Some(energies(f, alpha, v)),
        weights: proj.weights.as_slice().to_vec(),
        alpha: alpha.to_vec(),
        weighted_kinetic: kinetic,
    })
}
