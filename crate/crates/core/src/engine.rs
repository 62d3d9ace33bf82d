//! Closed-form moments of the completion time `R`.
//!
//! With `g = q/(1-q)` the expected number of interrupted attempts,
//!
//! ```text
//! E[R]  = a + (b + μ)·g
//! E[R²] = c + (2ab + 2μa + 2μb + d + ν)·g + 2(μ + b)²·g²
//! ```
//!
//! where `μ`, `ν` are the first two raw moments of the downtime. The mean
//! needs only `μ`.

use serde::{Deserialize, Serialize};

use crate::conditional::{conditional_stats_with, ConditionalMoments, ConditionalOptions, Method};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};

/// Above this `q` the geometric factor `q/(1-q)` exceeds 10¹² and reports
/// carry a [`Warning::NearDegenerate`].
pub const NEAR_DEGENERATE_Q: f64 = 1.0 - 1e-12;

/// Relative slack below zero tolerated in `E[R²] - E[R]²` before it is
/// reported as inconsistent.
pub const VARIANCE_SLACK: f64 = 1e-9;

/// Uptime, downtime and processing-time laws of one job on one machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentScenario {
    pub uptime: DistributionSpec,
    pub downtime: DistributionSpec,
    pub proc: DistributionSpec,
}

/// Moments of the downtime law, as consumed by the engine.
pub trait DowntimeMoments {
    fn first_moment(&self) -> f64;
    fn second_moment(&self) -> f64;
}

impl DowntimeMoments for DistributionSpec {
    fn first_moment(&self) -> f64 {
        self.mean()
    }

    fn second_moment(&self) -> f64 {
        DistributionSpec::second_moment(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    NearDegenerate { q: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub q: f64,
    pub e_r: f64,
    pub e_r2: f64,
    pub var_r: f64,
    pub cm: ConditionalMoments,
    pub method_notes: Vec<String>,
    pub warnings: Vec<Warning>,
}

fn check_downtime(mu: f64) -> Result<()> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "downtime mean must be finite and >= 0, got {mu}"
        )))
    }
}

/// Expected number of interrupted attempts before the successful one.
fn retries(cm: &ConditionalMoments) -> Result<f64> {
    let q = cm.q;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in [0, 1], got {q}"
        )));
    }
    if q >= 1.0 || cm.one_minus_q <= 0.0 {
        return Err(Error::NeverCompletes);
    }
    Ok(q / cm.one_minus_q)
}

pub fn expected_completion(cm: &ConditionalMoments, mu: f64) -> Result<f64> {
    check_downtime(mu)?;
    let g = retries(cm)?;
    let a = cm.a.ok_or(Error::UndefinedMoment("a"))?;
    if cm.q == 0.0 {
        return Ok(a);
    }
    let b = cm.b.ok_or(Error::UndefinedMoment("b"))?;
    Ok(a + (b + mu) * g)
}

pub fn second_moment(cm: &ConditionalMoments, mu: f64, nu: f64) -> Result<f64> {
    check_downtime(mu)?;
    if !nu.is_finite() || nu < mu * mu * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "downtime second moment {nu} is below the squared mean {}",
            mu * mu
        )));
    }
    let g = retries(cm)?;
    let c = cm.c.ok_or(Error::UndefinedMoment("c"))?;
    if cm.q == 0.0 {
        return Ok(c);
    }
    let a = cm.a.ok_or(Error::UndefinedMoment("a"))?;
    let b = cm.b.ok_or(Error::UndefinedMoment("b"))?;
    let d = cm.d.ok_or(Error::UndefinedMoment("d"))?;
    let linear = 2.0 * a * b + 2.0 * mu * a + 2.0 * mu * b + d + nu;
    Ok(c + linear * g + 2.0 * (mu + b).powi(2) * g * g)
}

/// `E[R²] - E[R]²`, clamped to zero when it is negative only by
/// [`VARIANCE_SLACK`] relative to `E[R²]`.
pub fn completion_variance(e_r: f64, e_r2: f64) -> Result<f64> {
    let var = e_r2 - e_r * e_r;
    if var >= 0.0 {
        Ok(var)
    } else if var >= -VARIANCE_SLACK * e_r2.abs() {
        Ok(0.0)
    } else {
        Err(Error::InconsistentMoments(var))
    }
}

/// `(1/λ + μ)(e^{λt} - 1)`: mean completion time for exponential uptimes and
/// a fixed processing time `t`.
pub fn exponential_uptime_closed_form(lambda: f64, t: f64, mu: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    check_downtime(mu)?;
    Ok((1.0 / lambda + mu) * (lambda * t).exp_m1())
}

/// Both moments with zero-length breakdowns (`μ = ν = 0`).
pub fn instantaneous_approximation(cm: &ConditionalMoments) -> Result<(f64, f64)> {
    Ok((expected_completion(cm, 0.0)?, second_moment(cm, 0.0, 0.0)?))
}

/// `E[R]` straight from the laws. Only the downtime mean is read.
pub fn mean_completion<D: DowntimeMoments + ?Sized>(
    uptime: &DistributionSpec,
    downtime: &D,
    proc: &DistributionSpec,
) -> Result<f64> {
    let cm = conditional_stats_with(uptime, proc, &ConditionalOptions::default())?;
    expected_completion(&cm, downtime.first_moment())
}

pub fn analyze(scenario: &EnvironmentScenario) -> Result<MomentReport> {
    analyze_with(scenario, &ConditionalOptions::default())
}

pub fn analyze_with(
    scenario: &EnvironmentScenario,
    opts: &ConditionalOptions,
) -> Result<MomentReport> {
    let cm = conditional_stats_with(&scenario.uptime, &scenario.proc, opts)?;
    let mu = scenario.downtime.first_moment();
    let nu = scenario.downtime.second_moment();
    let e_r = expected_completion(&cm, mu)?;
    let e_r2 = second_moment(&cm, mu, nu)?;
    let var_r = completion_variance(e_r, e_r2)?;

    let mut method_notes = vec![match cm.method {
        Method::ClosedForm => "q, a, b, c, d: closed form".to_string(),
        Method::Quadrature => format!(
            "q, a, b, c, d: adaptive Gauss-Kronrod quadrature (est. abs error {:.3e})",
            cm.est_abs_error
        ),
    }];
    if cm.q == 0.0 {
        method_notes.push("q = 0: no interruptions, R = p".to_string());
    } else {
        method_notes.push("e_r: a + (b + mu) q/(1-q)".to_string());
        method_notes.push(
            "e_r2: c + (2ab + 2 mu a + 2 mu b + d + nu) q/(1-q) + 2 (mu + b)^2 (q/(1-q))^2"
                .to_string(),
        );
    }
    method_notes.push("var_r: e_r2 - e_r^2".to_string());

    let mut warnings = Vec::new();
    if cm.q > NEAR_DEGENERATE_Q {
        warnings.push(Warning::NearDegenerate { q: cm.q });
    }

    Ok(MomentReport {
        q: cm.q,
        e_r,
        e_r2,
        var_r,
        cm,
        method_notes,
        warnings,
    })
}
