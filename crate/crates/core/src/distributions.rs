//! Parametric input distributions and their weak-derivative decompositions.
//!
//! Each family designates one sensitivity parameter θ: the mean of an
//! exponential, the scale of a gamma or Erlang, and the mean of a Gaussian.
//! For the exponential, gamma and Gaussian families the derivative of the
//! density in θ splits as `∂f/∂θ = c(θ)·(f⁺ − f⁻)` with `f⁺`, `f⁻` proper
//! densities; [`DecompositionTriple`] carries that split.
//!
//! Sampling consumes a fixed number of uniforms per draw except for the
//! gamma family (rejection sampler):
//!
//! | family      | uniforms per draw |
//! |-------------|-------------------|
//! | exponential | 1                 |
//! | erlang(k)   | k                 |
//! | gaussian    | 2                 |
//! | weibull     | 1                 |
//! | gamma       | variable          |
//!
//! Every sampler is a location/scale transform of θ-free randomness, so the
//! same uniforms drive draws at θ and θ ± h.

use std::f64::consts::{LN_2, PI, TAU};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::rng::UniformStream;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Raw family parameters, as they appear in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Family {
    Exponential {
        mean: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    Gaussian {
        mean: f64,
        stddev: f64,
    },
    Erlang {
        stages: u32,
        scale: f64,
    },
    /// Weibull with shape 2: density `2λt·exp(−λt²)` for `t ≥ 0`, where
    /// `t = x − location`, or `t = location − x` when reflected.
    Weibull {
        rate: f64,
        #[serde(default)]
        location: f64,
        #[serde(default)]
        reflected: bool,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Exponential { .. } => "exponential",
            Family::Gamma { .. } => "gamma",
            Family::Gaussian { .. } => "gaussian",
            Family::Erlang { .. } => "erlang",
            Family::Weibull { .. } => "weibull",
        }
    }
}

/// A validated distribution instance.
///
/// Only constructible through the checked constructors (or deserialization,
/// which runs the same checks), so parameters are always admissible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct ParametricDistribution {
    family: Family,
    /// Log of the normalizing constant, cached for `ln_density`.
    ln_norm: f64,
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be finite, got {v}")))
    }
}

impl TryFrom<Family> for ParametricDistribution {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        let ln_norm = match family {
            Family::Exponential { mean } => -positive("mean", mean)?.ln(),
            Family::Gamma { shape, scale } => {
                let shape = positive("shape", shape)?;
                let scale = positive("scale", scale)?;
                -shape * scale.ln() - ln_gamma(shape)
            }
            Family::Gaussian { mean, stddev } => {
                finite("mean", mean)?;
                -positive("stddev", stddev)?.ln() - LN_SQRT_2PI
            }
            Family::Erlang { stages, scale } => {
                if stages == 0 {
                    return Err(invalid("stages", "must be at least 1"));
                }
                let scale = positive("scale", scale)?;
                let k = f64::from(stages);
                -k * scale.ln() - ln_gamma(k)
            }
            Family::Weibull { rate, location, .. } => {
                finite("location", location)?;
                LN_2 + positive("rate", rate)?.ln()
            }
        };
        Ok(Self { family, ln_norm })
    }
}

impl From<ParametricDistribution> for Family {
    fn from(d: ParametricDistribution) -> Self {
        d.family
    }
}

impl ParametricDistribution {
    pub fn exponential(mean: f64) -> Result<Self> {
        Family::Exponential { mean }.try_into()
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Family::Gamma { shape, scale }.try_into()
    }

    pub fn gaussian(mean: f64, stddev: f64) -> Result<Self> {
        Family::Gaussian { mean, stddev }.try_into()
    }

    pub fn erlang(stages: u32, scale: f64) -> Result<Self> {
        Family::Erlang { stages, scale }.try_into()
    }

    /// Weibull with shape 2 and the given rate, supported on `[0, ∞)`.
    pub fn weibull2(rate: f64) -> Result<Self> {
        Self::shifted_weibull2(rate, 0.0, false)
    }

    /// `location ± W` with `W ~ Weibull(2, rate)`; the minus sign when
    /// `reflected`.
    pub fn shifted_weibull2(rate: f64, location: f64, reflected: bool) -> Result<Self> {
        Family::Weibull {
            rate,
            location,
            reflected,
        }
        .try_into()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    /// The designated sensitivity parameter, if the family has one.
    pub fn theta(&self) -> Option<f64> {
        match self.family {
            Family::Exponential { mean } => Some(mean),
            Family::Gamma { scale, .. } => Some(scale),
            Family::Gaussian { mean, .. } => Some(mean),
            Family::Erlang { scale, .. } => Some(scale),
            Family::Weibull { .. } => None,
        }
    }

    /// Same family with the sensitivity parameter replaced.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        let family = match self.family {
            Family::Exponential { .. } => Family::Exponential { mean: theta },
            Family::Gamma { shape, .. } => Family::Gamma {
                shape,
                scale: theta,
            },
            Family::Gaussian { stddev, .. } => Family::Gaussian {
                mean: theta,
                stddev,
            },
            Family::Erlang { stages, .. } => Family::Erlang {
                stages,
                scale: theta,
            },
            Family::Weibull { .. } => {
                return Err(Error::NotImplemented {
                    operation: "sensitivity parameter",
                    family: self.name(),
                })
            }
        };
        family.try_into()
    }

    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Exponential { mean } => mean,
            Family::Gamma { shape, scale } => shape * scale,
            Family::Gaussian { mean, .. } => mean,
            Family::Erlang { stages, scale } => f64::from(stages) * scale,
            Family::Weibull {
                rate,
                location,
                reflected,
            } => {
                let m = (PI / (4.0 * rate)).sqrt();
                if reflected {
                    location - m
                } else {
                    location + m
                }
            }
        }
    }

    /// True when every draw is strictly positive.
    pub fn has_positive_support(&self) -> bool {
        match self.family {
            Family::Exponential { .. } | Family::Gamma { .. } | Family::Erlang { .. } => true,
            Family::Gaussian { .. } => false,
            Family::Weibull {
                location,
                reflected,
                ..
            } => !reflected && location >= 0.0,
        }
    }

    /// `ln f(x)`; `-inf` outside the support.
    pub fn ln_density(&self, x: f64) -> f64 {
        match self.family {
            Family::Exponential { mean } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    self.ln_norm - x / mean
                }
            }
            Family::Gamma { shape, scale } => self.ln_gamma_kernel(shape, scale, x),
            Family::Erlang { stages, scale } => self.ln_gamma_kernel(f64::from(stages), scale, x),
            Family::Gaussian { mean, stddev } => {
                let z = (x - mean) / stddev;
                self.ln_norm - 0.5 * z * z
            }
            Family::Weibull {
                rate,
                location,
                reflected,
            } => {
                let t = if reflected { location - x } else { x - location };
                if t <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    self.ln_norm + t.ln() - rate * t * t
                }
            }
        }
    }

    fn ln_gamma_kernel(&self, shape: f64, scale: f64, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        if x == 0.0 {
            return if shape == 1.0 {
                self.ln_norm
            } else if shape < 1.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
        }
        self.ln_norm + (shape - 1.0) * x.ln() - x / scale
    }

    /// `f(x)`; 0 outside the support.
    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    /// `∂ ln f(x; θ) / ∂θ` for the designated sensitivity parameter.
    pub fn score(&self, x: f64) -> Result<f64> {
        let domain = || Error::Domain {
            family: self.name(),
            x,
        };
        if !x.is_finite() {
            return Err(domain());
        }
        match self.family {
            Family::Exponential { mean } => {
                if x < 0.0 {
                    return Err(domain());
                }
                Ok((x - mean) / (mean * mean))
            }
            Family::Gamma { shape, scale } => {
                if x < 0.0 {
                    return Err(domain());
                }
                Ok((x - shape * scale) / (scale * scale))
            }
            Family::Erlang { stages, scale } => {
                if x < 0.0 {
                    return Err(domain());
                }
                Ok((x - f64::from(stages) * scale) / (scale * scale))
            }
            Family::Gaussian { mean, stddev } => Ok((x - mean) / (stddev * stddev)),
            Family::Weibull { .. } => Err(Error::NotImplemented {
                operation: "score",
                family: self.name(),
            }),
        }
    }

    /// The weak-derivative triple `(c, f⁺, f⁻)` with respect to θ.
    pub fn decomposition(&self) -> Result<DecompositionTriple> {
        match self.family {
            Family::Exponential { mean } => Ok(DecompositionTriple {
                c: 1.0 / mean,
                plus: Self::erlang(2, mean)?,
                minus: *self,
            }),
            Family::Gamma { shape, scale } => Ok(DecompositionTriple {
                c: shape / scale,
                plus: Self::gamma(shape + 1.0, scale)?,
                minus: *self,
            }),
            Family::Gaussian { mean, stddev } => {
                let rate = 1.0 / (2.0 * stddev * stddev);
                Ok(DecompositionTriple {
                    c: 1.0 / (stddev * TAU.sqrt()),
                    plus: Self::shifted_weibull2(rate, mean, false)?,
                    minus: Self::shifted_weibull2(rate, mean, true)?,
                })
            }
            Family::Erlang { .. } | Family::Weibull { .. } => Err(Error::NotImplemented {
                operation: "weak-derivative decomposition",
                family: self.name(),
            }),
        }
    }

    /// `c(θ)·(f⁺(x) − f⁻(x)) / f(x)`, the single-run importance weight.
    pub fn likelihood_ratio_weight(&self, x: f64) -> Result<f64> {
        self.decomposition()?.likelihood_ratio_weight(self, x)
    }

    /// Draws one variate; see the module docs for the uniform budget.
    pub fn sample(&self, u: &mut UniformStream) -> f64 {
        match self.family {
            Family::Exponential { mean } => -mean * u.next_uniform().ln(),
            Family::Erlang { stages, scale } => {
                let mut s = 0.0;
                for _ in 0..stages {
                    s -= u.next_uniform().ln();
                }
                scale * s
            }
            Family::Gamma { shape, scale } => scale * standard_gamma(shape, u),
            Family::Gaussian { mean, stddev } => mean + stddev * standard_normal(u),
            Family::Weibull {
                rate,
                location,
                reflected,
            } => {
                let w = (-u.next_uniform().ln() / rate).sqrt();
                if reflected {
                    location - w
                } else {
                    location + w
                }
            }
        }
    }
}

/// Box–Muller, cosine branch only; two uniforms per draw.
fn standard_normal(u: &mut UniformStream) -> f64 {
    let r = (-2.0 * u.next_uniform().ln()).sqrt();
    r * (TAU * u.next_uniform()).cos()
}

/// Marsaglia–Tsang squeeze/rejection for unit-scale gamma variates, with the
/// `U^{1/α}` boost for `α < 1`.
fn standard_gamma(shape: f64, u: &mut UniformStream) -> f64 {
    if shape < 1.0 {
        let g = standard_gamma(shape + 1.0, u);
        return g * u.next_uniform().powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z = standard_normal(u);
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let w = u.next_uniform();
        let z2 = z * z;
        if w < 1.0 - 0.0331 * z2 * z2 || w.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// `∂f/∂θ = c·(f⁺ − f⁻)` with `f⁺`, `f⁻` proper densities and `c > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionTriple {
    pub c: f64,
    pub plus: ParametricDistribution,
    pub minus: ParametricDistribution,
}

impl DecompositionTriple {
    /// Precomputes the density ratios against `nominal` for repeated
    /// weighting.
    pub fn weight_kernel(&self, nominal: &ParametricDistribution) -> WeightKernel {
        WeightKernel {
            c: self.c,
            up: DensityRatio::new(self.plus, *nominal),
            down: DensityRatio::new(self.minus, *nominal),
        }
    }

    /// `c·(f⁺(x) − f⁻(x)) / f(x)` against the nominal density `f`.
    pub fn likelihood_ratio_weight(&self, nominal: &ParametricDistribution, x: f64) -> Result<f64> {
        self.weight_kernel(nominal)
            .weight(x)
            .ok_or(Error::SupportViolation { coordinate: 0, x })
    }
}

/// `x ↦ c·(f⁺(x)/f(x) − f⁻(x)/f(x))` with both ratios precomputed.
#[derive(Debug, Clone, Copy)]
pub struct WeightKernel {
    c: f64,
    up: DensityRatio,
    down: DensityRatio,
}

impl WeightKernel {
    /// `None` where the nominal density vanishes.
    #[inline]
    pub fn weight(&self, x: f64) -> Option<f64> {
        let w = self.c * (self.up.eval(x)? - self.down.eval(x)?);
        w.is_finite().then_some(w)
    }
}

/// The ratio `g(x) / f(x)` of two densities.
///
/// Pairs sharing the gamma kernel `x^(α−1)·exp(−x/θ)` reduce to
/// `k·x^(α_g − α_f)·exp(−x·(1/θ_g − 1/θ_f))` with `k` folded in up front;
/// other pairs go through log-densities.
#[derive(Debug, Clone, Copy)]
pub struct DensityRatio {
    num: ParametricDistribution,
    den: ParametricDistribution,
    form: RatioForm,
}

#[derive(Debug, Clone, Copy)]
enum RatioForm {
    Identical,
    GammaKernel {
        coef: f64,
        power: f64,
        rate_gap: f64,
    },
    General,
}

/// `(shape, scale)` of families in the gamma kernel.
fn gamma_kernel(d: &ParametricDistribution) -> Option<(f64, f64)> {
    match d.family {
        Family::Exponential { mean } => Some((1.0, mean)),
        Family::Gamma { shape, scale } => Some((shape, scale)),
        Family::Erlang { stages, scale } => Some((f64::from(stages), scale)),
        _ => None,
    }
}

impl DensityRatio {
    pub fn new(num: ParametricDistribution, den: ParametricDistribution) -> Self {
        let form = if num == den {
            RatioForm::Identical
        } else if let (Some((a_num, s_num)), Some((a_den, s_den))) =
            (gamma_kernel(&num), gamma_kernel(&den))
        {
            RatioForm::GammaKernel {
                coef: (num.ln_norm - den.ln_norm).exp(),
                power: a_num - a_den,
                rate_gap: 1.0 / s_num - 1.0 / s_den,
            }
        } else {
            RatioForm::General
        };
        Self { num, den, form }
    }

    /// `None` where the denominator density vanishes.
    #[inline]
    pub fn eval(&self, x: f64) -> Option<f64> {
        match self.form {
            RatioForm::Identical => (self.den.ln_density(x) > f64::NEG_INFINITY).then_some(1.0),
            RatioForm::GammaKernel {
                coef,
                power,
                rate_gap,
            } if x > 0.0 && x.is_finite() => {
                let mut r = coef;
                if power == 1.0 {
                    r *= x;
                } else if power != 0.0 {
                    r *= x.powf(power);
                }
                if rate_gap != 0.0 {
                    r *= (-x * rate_gap).exp();
                }
                Some(r)
            }
            _ => {
                let ln_den = self.den.ln_density(x);
                if ln_den == f64::NEG_INFINITY || ln_den.is_nan() {
                    return None;
                }
                let r = (self.num.ln_density(x) - ln_den).exp();
                (!r.is_nan()).then_some(r)
            }
        }
    }
}
