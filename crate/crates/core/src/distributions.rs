//! Nonnegative distribution families for uptimes, downtimes and processing
//! times.
//!
//! | Family | Parameters | Mean |
//! |---|---|---|
//! | Exponential | rate | 1/rate |
//! | Uniform | lo, hi | (lo+hi)/2 |
//! | Gamma | shape, scale | shape·scale |
//! | Weibull | shape, scale | scale·Γ(1+1/shape) |
//! | LogNormal | log_mean, log_sd | exp(log_mean + log_sd²/2) |
//! | Deterministic | value | value |
//!
//! Parameters are checked once, in [`DistributionSpec::new`]. Every other
//! method assumes a valid spec.

use std::fmt;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Parameterized family. Field names double as scenario-file keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Family {
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Gamma { shape: f64, scale: f64 },
    Weibull { shape: f64, scale: f64 },
    LogNormal { log_mean: f64, log_sd: f64 },
    Deterministic { value: f64 },
}

/// A validated distribution on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct DistributionSpec(Family);

impl TryFrom<Family> for DistributionSpec {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        Self::new(family)
    }
}

impl From<DistributionSpec> for Family {
    fn from(spec: DistributionSpec) -> Family {
        spec.0
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

/// Standard normal CDF.
fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal survival function.
fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

impl DistributionSpec {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::Exponential { rate } => positive("rate", rate)?,
            Family::Uniform { lo, hi } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                if lo < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "lo must be >= 0, got {lo}"
                    )));
                }
                if hi <= lo {
                    return Err(Error::InvalidParameter(format!(
                        "hi must exceed lo, got lo={lo} hi={hi}"
                    )));
                }
            }
            Family::Gamma { shape, scale } | Family::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
            }
            Family::LogNormal { log_mean, log_sd } => {
                finite("log_mean", log_mean)?;
                positive("log_sd", log_sd)?;
            }
            Family::Deterministic { value } => {
                finite("value", value)?;
                if value < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "value must be >= 0, got {value}"
                    )));
                }
            }
        }
        Ok(Self(family))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Family::Uniform { lo, hi })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Gamma { shape, scale })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Weibull { shape, scale })
    }

    pub fn lognormal(log_mean: f64, log_sd: f64) -> Result<Self> {
        Self::new(Family::LogNormal { log_mean, log_sd })
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        Self::new(Family::Deterministic { value })
    }

    pub fn family(&self) -> &Family {
        &self.0
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.0, Family::Deterministic { .. })
    }

    /// The atom of a deterministic law.
    pub fn atom(&self) -> Option<f64> {
        match self.0 {
            Family::Deterministic { value } => Some(value),
            _ => None,
        }
    }

    /// Law of `s·X` for `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        positive("scale factor", s)?;
        Self::new(match self.0 {
            Family::Exponential { rate } => Family::Exponential { rate: rate / s },
            Family::Uniform { lo, hi } => Family::Uniform {
                lo: lo * s,
                hi: hi * s,
            },
            Family::Gamma { shape, scale } => Family::Gamma {
                shape,
                scale: scale * s,
            },
            Family::Weibull { shape, scale } => Family::Weibull {
                shape,
                scale: scale * s,
            },
            Family::LogNormal { log_mean, log_sd } => Family::LogNormal {
                log_mean: log_mean + s.ln(),
                log_sd,
            },
            Family::Deterministic { value } => Family::Deterministic { value: value * s },
        })
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if self.is_deterministic() {
            return Err(Error::UnsupportedForDeterministic("pdf"));
        }
        finite("x", x)?;
        Ok(self.density(x))
    }

    /// Density of a continuous law; 0 for a deterministic one.
    pub(crate) fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.0 {
            Family::Exponential { rate } => rate * (-rate * x).exp(),
            Family::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            Family::Gamma { shape, scale } => {
                if x == 0.0 {
                    return if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        1.0 / scale
                    } else {
                        0.0
                    };
                }
                let z = x / scale;
                ((shape - 1.0) * z.ln() - z - ln_gamma(shape)).exp() / scale
            }
            Family::Weibull { shape, scale } => {
                if x == 0.0 {
                    return if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        1.0 / scale
                    } else {
                        0.0
                    };
                }
                let z = x / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            }
            Family::LogNormal { log_mean, log_sd } => {
                if x == 0.0 {
                    return 0.0;
                }
                let z = (x.ln() - log_mean) / log_sd;
                (-0.5 * z * z).exp() / (x * log_sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            Family::Deterministic { .. } => 0.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.0 {
            Family::Exponential { rate } => -(-rate * x).exp_m1(),
            Family::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::Gamma { shape, scale } => gamma_lr(shape, x / scale),
            Family::Weibull { shape, scale } => -(-(x / scale).powf(shape)).exp_m1(),
            Family::LogNormal { log_mean, log_sd } => {
                if x == 0.0 {
                    0.0
                } else {
                    norm_cdf((x.ln() - log_mean) / log_sd)
                }
            }
            Family::Deterministic { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `P{X > x}`, computed as `1 - cdf(x)` so the two always sum to one.
    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// `P{X > x}` evaluated directly in the tail, without the cancellation
    /// of `1 - cdf(x)`. Used by the quadrature integrands.
    pub(crate) fn tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match self.0 {
            Family::Exponential { rate } => (-rate * x).exp(),
            Family::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            Family::Gamma { shape, scale } => gamma_ur(shape, x / scale),
            Family::Weibull { shape, scale } => (-(x / scale).powf(shape)).exp(),
            Family::LogNormal { log_mean, log_sd } => {
                if x == 0.0 {
                    1.0
                } else {
                    norm_sf((x.ln() - log_mean) / log_sd)
                }
            }
            Family::Deterministic { value } => {
                if x >= value {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// `P{X < x}`: differs from `cdf` only at a deterministic atom.
    pub(crate) fn cdf_strict(&self, x: f64) -> f64 {
        match self.0 {
            Family::Deterministic { value } => {
                if x > value {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.cdf(x),
        }
    }

    /// `E[X^k]` for `k ∈ {1, 2}`.
    pub fn raw_moment(&self, k: u32) -> Result<f64> {
        if !(1..=2).contains(&k) {
            return Err(Error::InvalidParameter(format!(
                "moment order must be 1 or 2, got {k}"
            )));
        }
        let k = f64::from(k);
        Ok(match self.0 {
            Family::Exponential { rate } => gamma(k + 1.0) / rate.powf(k),
            Family::Uniform { lo, hi } => {
                (hi.powf(k + 1.0) - lo.powf(k + 1.0)) / ((k + 1.0) * (hi - lo))
            }
            Family::Gamma { shape, scale } => {
                // shape·(shape+1)·…, k factors
                let rising = if k == 1.0 {
                    shape
                } else {
                    shape * (shape + 1.0)
                };
                rising * scale.powf(k)
            }
            Family::Weibull { shape, scale } => scale.powf(k) * gamma(1.0 + k / shape),
            Family::LogNormal { log_mean, log_sd } => {
                (k * log_mean + 0.5 * k * k * log_sd * log_sd).exp()
            }
            Family::Deterministic { value } => value.powf(k),
        })
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1).expect("order 1 is valid")
    }

    pub fn second_moment(&self) -> f64 {
        self.raw_moment(2).expect("order 2 is valid")
    }

    /// Partial moment `E[X^k ; X ≤ x]`, evaluated in closed form.
    pub fn partial_moment_below(&self, k: u32, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let kf = f64::from(k);
        match self.0 {
            Family::Exponential { rate } => lower_gamma_int(k + 1, rate * x) / rate.powf(kf),
            Family::Uniform { lo, hi } => {
                let x = x.clamp(lo, hi);
                (x.powf(kf + 1.0) - lo.powf(kf + 1.0)) / ((kf + 1.0) * (hi - lo))
            }
            Family::Gamma { shape, scale } => {
                self.raw_moment(k).unwrap_or(f64::NAN) * gamma_lr(shape + kf, x / scale)
            }
            Family::Weibull { shape, scale } => {
                let a = 1.0 + kf / shape;
                scale.powf(kf) * gamma(a) * gamma_lr(a, (x / scale).powf(shape))
            }
            Family::LogNormal { log_mean, log_sd } => {
                if x == 0.0 {
                    return 0.0;
                }
                let m = (kf * log_mean + 0.5 * kf * kf * log_sd * log_sd).exp();
                m * norm_cdf((x.ln() - log_mean - kf * log_sd * log_sd) / log_sd)
            }
            Family::Deterministic { value } => {
                if value <= x {
                    value.powf(kf)
                } else {
                    0.0
                }
            }
        }
    }

    /// Smallest `x` with `P{X > x} ≤ tail_mass`.
    pub fn upper_quantile(&self, tail_mass: f64) -> f64 {
        debug_assert!(tail_mass > 0.0 && tail_mass < 1.0);
        match self.0 {
            Family::Exponential { rate } => -tail_mass.ln() / rate,
            Family::Uniform { lo, hi } => hi - tail_mass * (hi - lo),
            Family::Weibull { shape, scale } => scale * (-tail_mass.ln()).powf(1.0 / shape),
            Family::LogNormal { log_mean, log_sd } => {
                let z = std::f64::consts::SQRT_2 * erfc_inv(2.0 * tail_mass);
                (log_mean + log_sd * z).exp()
            }
            Family::Deterministic { value } => value,
            Family::Gamma { .. } => {
                let mut hi = self.mean().max(f64::MIN_POSITIVE);
                while self.tail(hi) > tail_mass {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.tail(mid) > tail_mass {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * hi {
                        break;
                    }
                }
                hi
            }
        }
    }

    /// Endpoints where the density is not smooth, useful as quadrature
    /// breakpoints.
    pub(crate) fn kinks(&self) -> Vec<f64> {
        match self.0 {
            Family::Uniform { lo, hi } => vec![lo, hi],
            Family::Deterministic { value } => vec![value],
            _ => Vec::new(),
        }
    }

    /// Draws one value. Exponential, Uniform and Weibull use one uniform
    /// variate through the closed-form quantile; Gamma uses Marsaglia–Tsang
    /// and LogNormal exponentiates a ziggurat normal. Deterministic consumes
    /// no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.0 {
            Family::Exponential { rate } => {
                let u: f64 = rng.random();
                -(-u).ln_1p() / rate
            }
            Family::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                lo + u * (hi - lo)
            }
            Family::Weibull { shape, scale } => {
                let u: f64 = rng.random();
                scale * (-(-u).ln_1p()).powf(1.0 / shape)
            }
            Family::Gamma { shape, scale } => rand_distr::Gamma::new(shape, scale)
                .expect("validated parameters")
                .sample(rng),
            Family::LogNormal { log_mean, log_sd } => rand_distr::LogNormal::new(log_mean, log_sd)
                .expect("validated parameters")
                .sample(rng),
            Family::Deterministic { value } => value,
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Family::Exponential { rate } => write!(f, "Exponential(rate={rate})"),
            Family::Uniform { lo, hi } => write!(f, "Uniform({lo}, {hi})"),
            Family::Gamma { shape, scale } => write!(f, "Gamma(shape={shape}, scale={scale})"),
            Family::Weibull { shape, scale } => write!(f, "Weibull(shape={shape}, scale={scale})"),
            Family::LogNormal { log_mean, log_sd } => {
                write!(f, "LogNormal(log_mean={log_mean}, log_sd={log_sd})")
            }
            Family::Deterministic { value } => write!(f, "Deterministic({value})"),
        }
    }
}

/// Lower incomplete gamma `γ(n, x) = ∫₀ˣ s^{n-1} e^{-s} ds` for integer `n ≥ 1`.
///
/// The alternating series is used for small `x`, where the closed form
/// `(n-1)!·(1 - e^{-x} Σ_{j<n} x^j/j!)` cancels catastrophically.
pub(crate) fn lower_gamma_int(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let nf = f64::from(n);
    if x < 1.0 {
        // Σ_j (-1)^j x^{n+j} / (j! (n+j))
        let mut term = x.powi(n as i32);
        let mut sum = term / nf;
        for j in 1..60 {
            term *= -x / f64::from(j);
            let add = term / (nf + f64::from(j));
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let mut partial = 0.0;
        let mut term = 1.0;
        let mut fact = 1.0;
        for j in 0..n {
            if j > 0 {
                term *= x / f64::from(j);
                fact *= f64::from(j);
            }
            partial += term;
        }
        fact * (1.0 - (-x).exp() * partial)
    }
}
