//! The explicit scheme `x_{k+1} = x_k - s_k proj_{C_alpha(x_k, k)}(0)` and
//! its per-iterate monitors.

use crate::error::{Error, Result};
use crate::geometry::min_norm_point;
use crate::linalg::{all_finite, axpy, dist};
use crate::problems::Problem;
use crate::scalar::Scalar;
use crate::scaling::{divide, ScalingRule};

/// Relative slack when comparing consecutive objective values.
pub const DECREASE_SLACK: f64 = 1e-12;
/// Absolute slack on the increase of the auxiliary function.
pub const ENERGY_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule<S> {
    Fixed(S),
    /// `s_k = safety * 2 alpha_min / L_max` for every `k`.
    CurvatureScaled {
        safety: S,
    },
}

impl<S: Scalar> Default for StepRule<S> {
    fn default() -> Self {
        Self::CurvatureScaled {
            safety: S::lit(0.99),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteConfig<S> {
    pub max_iters: usize,
    pub step: StepRule<S>,
    /// Stop once the scaled criticality is at most this value.
    pub tolerance: S,
}

impl<S: Scalar> Default for DiscreteConfig<S> {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            step: StepRule::default(),
            tolerance: S::zero(),
        }
    }
}

impl<S: Scalar> DiscreteConfig<S> {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(Error::OutOfRange {
                key: key.into(),
                reason: reason.into(),
            })
        };
        match self.step {
            StepRule::Fixed(s) if !(s > S::zero()) || !s.is_finite() => {
                return bad("step", "must be positive")
            }
            StepRule::CurvatureScaled { safety } if !(safety > S::zero() && safety <= S::one()) => {
                return bad("safety", "must lie in (0, 1]")
            }
            _ => {}
        }
        if !(self.tolerance >= S::zero()) {
            return bad("tolerance", "must be >= 0");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Iterate<S> {
    pub k: usize,
    pub x: Vec<S>,
    pub f: Vec<S>,
    /// Step taken from this iterate; zero for the last one.
    pub step: S,
    pub crit_unscaled: S,
    pub crit_scaled: S,
    pub alpha: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteRun<S> {
    pub problem: String,
    pub iterates: Vec<Iterate<S>>,
    /// Smallest step the rule can take.
    pub s_min: S,
    /// Declared upper bound of the scalings on the region.
    pub alpha_max: S,
    /// Whether the criticality tolerance was reached before `max_iters`.
    pub converged: bool,
}

impl<S: Scalar> DiscreteRun<S> {
    pub fn last(&self) -> &Iterate<S> {
        self.iterates
            .last()
            .expect("runs hold at least one iterate")
    }
}

fn step_size<S: Scalar>(p: &Problem<S>, rule: &ScalingRule<S>, step: StepRule<S>) -> Result<S> {
    match step {
        StepRule::Fixed(s) => Ok(s),
        StepRule::CurvatureScaled { safety } => {
            let b = rule.bounds(p);
            let l = p.lipschitz_max();
            if !(b.alpha_min > S::zero()) || !(l > S::zero()) {
                return Err(Error::InvalidInput(
                    "the default step needs alpha_min > 0 and L_max > 0".into(),
                ));
            }
            Ok(safety * S::lit(2.0) * b.alpha_min / l)
        }
    }
}

/// Runs the scheme from `x0`, passing `t = k` to the scaling rule.
pub fn run_discrete<S: Scalar>(
    p: &Problem<S>,
    rule: &ScalingRule<S>,
    x0: &[S],
    cfg: &DiscreteConfig<S>,
) -> Result<DiscreteRun<S>> {
    cfg.validate()?;
    if !p.region.contains(x0) {
        return Err(Error::InvalidInput(format!(
            "{}: start point lies outside the region",
            p.name
        )));
    }
    let s = step_size(p, rule, cfg.step)?;
    let mut iterates = Vec::with_capacity(cfg.max_iters.min(1 << 16) + 1);
    let mut x = x0.to_vec();
    let mut converged = false;

    for k in 0..=cfg.max_iters {
        let raw = p.gradients(&x)?;
        let alpha = rule.evaluate_with_gradients(&raw, S::lit(k as f64))?;
        let proj = min_norm_point(&divide(&raw, &alpha))?;
        let crit_scaled = proj.norm();
        let f = p.evaluate(&x)?;
        let stop = crit_scaled <= cfg.tolerance || k == cfg.max_iters;
        converged = crit_scaled <= cfg.tolerance;
        iterates.push(Iterate {
            k,
            x: x.clone(),
            f,
            step: if stop { S::zero() } else { s },
            crit_unscaled: min_norm_point(&raw)?.norm(),
            crit_scaled,
            alpha,
        });
        if stop {
            break;
        }
        axpy(&mut x, -s, &proj.point);
        if !all_finite(&x) {
            return Err(Error::NumericDomain(format!(
                "discrete: iterate {} is not finite",
                k + 1
            )));
        }
    }

    Ok(DiscreteRun {
        problem: p.name.clone(),
        iterates,
        s_min: s,
        alpha_max: rule.bounds(p).alpha_max,
        converged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorRecord<S> {
    pub k: usize,
    /// `f_i(x_k) - f_i(x_{k+1})`; empty for the last iterate.
    pub decrease: Vec<S>,
    /// `E(k) = k min_i (f_i(x_k) - f_i(z)) + alpha_max/(2 s_min) |x_k - z|^2`.
    pub energy: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMonitors<S> {
    pub records: Vec<MonitorRecord<S>>,
    /// Every `f_i` was nonincreasing at every step.
    pub monotone: bool,
    /// `E(k+1) <= E(k) + 1e-9` at every step.
    pub energy_nonincreasing: bool,
    /// Smallest decrease over all steps and objectives.
    pub min_decrease: S,
    /// Largest `E(k+1) - E(k)`.
    pub max_energy_increase: S,
}

/// Evaluates the decrease and auxiliary-function monitors against the
/// reference `z`, which defaults to the final iterate.
pub fn discrete_monitors<S: Scalar>(
    p: &Problem<S>,
    run: &DiscreteRun<S>,
    z: Option<&[S]>,
) -> Result<DiscreteMonitors<S>> {
    let last = run.last();
    let z = z.unwrap_or(&last.x);
    let fz = p.evaluate(z)?;
    let weight = run.alpha_max / (S::lit(2.0) * run.s_min);

    let mut records = Vec::with_capacity(run.iterates.len());
    let mut monotone = true;
    let mut energy_ok = true;
    let mut min_decrease = S::infinity();
    let mut max_increase = S::neg_infinity();
    for (idx, it) in run.iterates.iter().enumerate() {
        let gap =
            it.f.iter()
                .zip(&fz)
                .map(|(&a, &b)| a - b)
                .fold(S::infinity(), S::min);
        let d = dist(&it.x, z);
        let energy = S::lit(it.k as f64) * gap + weight * d * d;
        let decrease = match run.iterates.get(idx + 1) {
            Some(next) => it.f.iter().zip(&next.f).map(|(&a, &b)| a - b).collect(),
            None => Vec::new(),
        };
        for (&dec, &fi) in decrease.iter().zip(&it.f) {
            min_decrease = min_decrease.min(dec);
            if dec < -S::lit(DECREASE_SLACK) * (S::one() + fi.abs()) {
                monotone = false;
            }
        }
        if let Some(prev) = records.last() {
            let prev: &MonitorRecord<S> = prev;
            let inc = energy - prev.energy;
            max_increase = max_increase.max(inc);
            if inc > S::lit(ENERGY_SLACK) {
                energy_ok = false;
            }
        }
        records.push(MonitorRecord {
            k: it.k,
            decrease,
            energy,
        });
    }
    Ok(DiscreteMonitors {
        records,
        monotone,
        energy_nonincreasing: energy_ok,
        min_decrease,
        max_energy_increase: max_increase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{scalar_pair, strongly_convex, BoxRegion, ProblemBuilder};

    fn half_square() -> Problem<f64> {
        ProblemBuilder::new(
            "half-square",
            1,
            1,
            |x: &[f64]| vec![0.5 * x[0] * x[0]],
            |x: &[f64]| vec![vec![x[0]]],
            BoxRegion::new(vec![-2.0], vec![2.0]).unwrap(),
        )
        .lipschitz(vec![1.0])
        .build()
        .unwrap()
    }

    fn cfg(iters: usize, safety: f64) -> DiscreteConfig<f64> {
        DiscreteConfig {
            max_iters: iters,
            step: StepRule::CurvatureScaled { safety },
            tolerance: 0.0,
        }
    }

    #[test]
    fn boundary_step_oscillates_without_decrease() {
        let p = half_square();
        let run = run_discrete(&p, &ScalingRule::unit(), &[1.0], &cfg(6, 1.0)).unwrap();
        assert_eq!(run.s_min, 2.0);
        for (k, it) in run.iterates.iter().enumerate() {
            assert_eq!(it.x[0], if k % 2 == 0 { 1.0 } else { -1.0 });
        }
        let m = discrete_monitors(&p, &run, None).unwrap();
        assert!(m.monotone);
        assert_eq!(m.min_decrease, 0.0);
    }

    #[test]
    fn half_safety_lands_on_minimizer() {
        let p = half_square();
        let c = DiscreteConfig {
            tolerance: 1e-14,
            ..cfg(10, 0.5)
        };
        let run = run_discrete(&p, &ScalingRule::unit(), &[1.0], &c).unwrap();
        assert_eq!(run.iterates[1].x, vec![0.0]);
        assert!(run.converged);
        assert_eq!(run.iterates.len(), 2);
    }

    #[test]
    fn critical_start_is_fixed() {
        let p = scalar_pair::<f64>();
        let run = run_discrete(&p, &ScalingRule::unit(), &[0.0], &cfg(20, 0.99)).unwrap();
        assert!(run.iterates.iter().all(|it| it.x == vec![0.0]));
    }

    #[test]
    fn strongly_convex_monitors() {
        let p = strongly_convex::<f64>();
        for x0 in &p.start_points {
            let run = run_discrete(&p, &ScalingRule::unit(), x0, &cfg(500, 0.5)).unwrap();
            let m = discrete_monitors(&p, &run, None).unwrap();
            assert!(m.monotone && m.energy_nonincreasing, "{x0:?}: {m:?}");
            assert!(m.min_decrease >= 0.0);
        }
        // Above s = alpha/L the iterates overshoot the Pareto segment: the
        // objectives still decrease but the auxiliary function does not.
        let run = run_discrete(&p, &ScalingRule::unit(), &[0.5, 1.5], &cfg(500, 0.99)).unwrap();
        let m = discrete_monitors(&p, &run, None).unwrap();
        assert!(m.monotone);
        assert!(!m.energy_nonincreasing);
        assert!(m.records[1].energy > m.records[0].energy);
    }

    #[test]
    fn rejects_bad_configs() {
        let p = half_square();
        assert!(run_discrete(&p, &ScalingRule::unit(), &[1.0], &cfg(5, 1.5)).is_err());
        assert!(run_discrete(&p, &ScalingRule::unit(), &[3.0], &cfg(5, 0.5)).is_err());
        let zero_eta = ScalingRule::gradnorm(0.0).unwrap();
        assert!(run_discrete(&p, &zero_eta, &[1.0], &cfg(5, 0.5)).is_err());
    }
}
