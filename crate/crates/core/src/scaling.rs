//! Per-objective scalings `alpha_i(x, t)` that define the balanced hull
//! `C_alpha(x, t) = conv{ grad f_i(x) / alpha_i(x, t) }`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{norm, scale};
use crate::problems::Problem;
use crate::scalar::Scalar;

/// Below this gradient norm an `eta = 0` normalization is undefined.
const VANISHING_GRADIENT: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub enum ScalingRule<S> {
    /// Fixed `alpha_i`; a single value is broadcast to every objective.
    Constant(Vec<S>),
    /// `alpha_i = ||grad f_i|| + eta`.
    GradNorm { eta: S },
    /// `clamp(||grad f_i|| + eta, min, max)`.
    GradNormClamped { eta: S, min: S, max: S },
}

/// Declared envelope of a rule on a problem's region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingBounds<S> {
    pub alpha_min: S,
    pub alpha_max: S,
    /// Lipschitz constant of `(x, t) -> alpha_i(x, t)` on the region.
    pub lipschitz: S,
}

impl<S: Scalar> ScalingRule<S> {
    pub fn constant(values: Vec<S>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|&a| !(a > S::zero()) || !a.is_finite()) {
            return Err(Error::InvalidInput(
                "constant scaling needs positive finite values".into(),
            ));
        }
        Ok(Self::Constant(values))
    }

    pub fn gradnorm(eta: S) -> Result<Self> {
        if !(eta >= S::zero()) || !eta.is_finite() {
            return Err(Error::InvalidInput("eta must be finite and >= 0".into()));
        }
        Ok(Self::GradNorm { eta })
    }

    pub fn gradnorm_clamped(eta: S, min: S, max: S) -> Result<Self> {
        Self::gradnorm(eta)?;
        if !(min > S::zero()) || !(max >= min) || !max.is_finite() {
            return Err(Error::InvalidInput(
                "clamped scaling needs 0 < min <= max < inf".into(),
            ));
        }
        Ok(Self::GradNormClamped { eta, min, max })
    }

    pub fn unit() -> Self {
        Self::Constant(vec![S::one()])
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    /// Constant values broadcast to `m` objectives.
    pub fn constant_values(&self, m: usize) -> Result<Option<Vec<S>>> {
        match self {
            Self::Constant(v) if v.len() == 1 => Ok(Some(vec![v[0]; m])),
            Self::Constant(v) if v.len() == m => Ok(Some(v.clone())),
            Self::Constant(v) => Err(Error::InvalidInput(format!(
                "constant scaling has {} values for {m} objectives",
                v.len()
            ))),
            _ => Ok(None),
        }
    }

    /// `alpha_min`, `alpha_max` and `L_alpha` on the problem's region. For
    /// the gradient-norm rules `L_alpha` is the largest `L_i`, since the
    /// norm of an `L`-Lipschitz map is `L`-Lipschitz and clamping is
    /// 1-Lipschitz.
    pub fn bounds(&self, p: &Problem<S>) -> ScalingBounds<S> {
        match self {
            Self::Constant(v) => ScalingBounds {
                alpha_min: v.iter().copied().fold(S::infinity(), S::min),
                alpha_max: v.iter().copied().fold(S::zero(), S::max),
                lipschitz: S::zero(),
            },
            Self::GradNorm { eta } => ScalingBounds {
                alpha_min: *eta,
                alpha_max: p.gradient_bound + *eta,
                lipschitz: p.lipschitz_max(),
            },
            Self::GradNormClamped { min, max, .. } => ScalingBounds {
                alpha_min: *min,
                alpha_max: *max,
                lipschitz: p.lipschitz_max(),
            },
        }
    }

    /// Scalings from precomputed gradients. `t` is accepted for the
    /// time-dependent interface; no shipped rule depends on it.
    pub fn evaluate_with_gradients(&self, gradients: &[Vec<S>], _t: S) -> Result<Vec<S>> {
        let m = gradients.len();
        if let Some(v) = self.constant_values(m)? {
            return Ok(v);
        }
        let mut out = Vec::with_capacity(m);
        for (i, g) in gradients.iter().enumerate() {
            let gn = norm(g);
            let a = match self {
                Self::GradNorm { eta } => {
                    if *eta == S::zero() && gn < S::lit(VANISHING_GRADIENT) {
                        return Err(Error::DegenerateScaling { objective: i });
                    }
                    gn + *eta
                }
                Self::GradNormClamped { eta, min, max } => (gn + *eta).max(*min).min(*max),
                Self::Constant(_) => unreachable!(),
            };
            out.push(a);
        }
        Ok(out)
    }
}

/// `alpha(x, t)` for every objective.
pub fn evaluate_scaling<S: Scalar>(
    rule: &ScalingRule<S>,
    p: &Problem<S>,
    x: &[S],
    t: S,
) -> Result<Vec<S>> {
    let g = p.gradients(x)?;
    rule.evaluate_with_gradients(&g, t)
}

/// Generators `grad f_i(x) / alpha_i(x, t)` of the balanced hull.
pub fn scaled_hull_generators<S: Scalar>(
    rule: &ScalingRule<S>,
    p: &Problem<S>,
    x: &[S],
    t: S,
) -> Result<Vec<Vec<S>>> {
    let g = p.gradients(x)?;
    let alpha = rule.evaluate_with_gradients(&g, t)?;
    Ok(divide(&g, &alpha))
}

pub(crate) fn divide<S: Scalar>(g: &[Vec<S>], alpha: &[S]) -> Vec<Vec<S>> {
    g.iter()
        .zip(alpha)
        .map(|(gi, &a)| scale(gi, S::one() / a))
        .collect()
}

impl<S: Scalar> fmt::Display for ScalingRule<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => {
                let parts: Vec<String> = v.iter().map(|a| format!("{a}")).collect();
                write!(f, "const:{}", parts.join(","))
            }
            Self::GradNorm { eta } => write!(f, "gradnorm:eta={eta}"),
            Self::GradNormClamped { eta, min, max } => {
                write!(f, "gradnorm:eta={eta},min={min},max={max}")
            }
        }
    }
}

impl<S: Scalar> FromStr for ScalingRule<S> {
    type Err = Error;

    /// Parses `const:1,1`, `gradnorm:eta=0.1` or
    /// `gradnorm:eta=0.1,min=0.5,max=10`.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = |why: &str| Error::OutOfRange {
            key: "scaling".into(),
            reason: format!("{why} in `{spec}`"),
        };
        let num = |s: &str| -> Result<S> {
            s.trim()
                .parse::<f64>()
                .map(S::lit)
                .map_err(|_| bad(&format!("malformed number `{s}`")))
        };
        let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        match kind.trim() {
            "const" => {
                let values = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Self::constant(values).map_err(|_| bad("values must be positive"))
            }
            "gradnorm" => {
                let (mut eta, mut min, mut max) = (None, None, None);
                for item in rest.split(',') {
                    let (k, val) = item
                        .split_once('=')
                        .ok_or_else(|| bad("expected key=value"))?;
                    let val = num(val)?;
                    match k.trim() {
                        "eta" => eta = Some(val),
                        "min" => min = Some(val),
                        "max" => max = Some(val),
                        other => return Err(bad(&format!("unknown parameter `{other}`"))),
                    }
                }
                let eta = eta.ok_or_else(|| bad("missing eta"))?;
                match (min, max) {
                    (None, None) => Self::gradnorm(eta).map_err(|e| bad(&e.to_string())),
                    (Some(lo), Some(hi)) => {
                        Self::gradnorm_clamped(eta, lo, hi).map_err(|e| bad(&e.to_string()))
                    }
                    _ => Err(bad("min and max must be given together")),
                }
            }
            other => Err(bad(&format!("unknown scaling kind `{other}`"))),
        }
    }
}
