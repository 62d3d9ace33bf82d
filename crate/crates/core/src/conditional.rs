//! Failure probability and conditional moments of a single attempt.
//!
//! For independent uptime `U` and processing time `p`:
//!
//! ```text
//! q = P{U < p}                = ∫ F_U(t) dF_p(t)
//! a = E[p  | U ≥ p]           = ∫ t  S_U(t) dF_p(t) / (1 - q)
//! c = E[p² | U ≥ p]           = ∫ t² S_U(t) dF_p(t) / (1 - q)
//! b = E[U  | U < p]           = ∫ u  S_p(u) dF_U(u) / q
//! d = E[U² | U < p]           = ∫ u² S_p(u) dF_U(u) / q
//! ```
//!
//! `S_U(t)` is `P{U ≥ t}`, so a tie `U = p` counts as a completed attempt.
//! Closed forms cover the pairs (Exponential, Exponential), (Exponential,
//! Deterministic), (Deterministic, continuous) and (continuous,
//! Deterministic); everything else goes through [`crate::quadrature`].

use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Integral, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

/// `(q, a, b, c, d)` for one attempt. `a`, `c` are `None` when `q = 1` and
/// `b`, `d` are `None` when `q = 0`: the conditioning event is null there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMoments {
    pub q: f64,
    /// `1 - q`, evaluated in the tail rather than by subtraction so that
    /// `q/(1-q)` keeps its precision as `q → 1`.
    pub one_minus_q: f64,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub method: Method,
    pub est_abs_error: f64,
}

impl ConditionalMoments {
    /// Builds a record from raw values, e.g. for plugging in hand-computed
    /// moments. Only the `q` range is checked.
    pub fn from_parts(
        q: f64,
        a: Option<f64>,
        b: Option<f64>,
        c: Option<f64>,
        d: Option<f64>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!(
                "q must lie in [0, 1], got {q}"
            )));
        }
        Ok(Self::closed(q, 1.0 - q, a, b, c, d))
    }

    fn closed(
        q: f64,
        one_minus_q: f64,
        a: Option<f64>,
        b: Option<f64>,
        c: Option<f64>,
        d: Option<f64>,
    ) -> Self {
        let (a, c) = if q >= 1.0 { (None, None) } else { (a, c) };
        let (b, d) = if q <= 0.0 { (None, None) } else { (b, d) };
        Self {
            q,
            one_minus_q,
            a,
            b,
            c,
            d,
            method: Method::ClosedForm,
            est_abs_error: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalOptions {
    /// Skip closed forms even where one exists.
    pub force_quadrature: bool,
    pub tolerance: Tolerance,
    /// Integrals over continuous laws are truncated at the larger
    /// `1 - tail_mass` quantile.
    pub tail_mass: f64,
}

impl Default for ConditionalOptions {
    fn default() -> Self {
        Self {
            force_quadrature: false,
            tolerance: Tolerance::default(),
            tail_mass: 1e-12,
        }
    }
}

/// `q = P{U < p}`, the probability that an attempt is interrupted.
pub fn success_probability(uptime: &DistributionSpec, proc: &DistributionSpec) -> Result<f64> {
    conditional_stats(uptime, proc).map(|cm| cm.q)
}

pub fn conditional_stats(
    uptime: &DistributionSpec,
    proc: &DistributionSpec,
) -> Result<ConditionalMoments> {
    conditional_stats_with(uptime, proc, &ConditionalOptions::default())
}

pub fn conditional_stats_with(
    uptime: &DistributionSpec,
    proc: &DistributionSpec,
    opts: &ConditionalOptions,
) -> Result<ConditionalMoments> {
    if let (Some(u), Some(t)) = (uptime.atom(), proc.atom()) {
        return deterministic_pair(u, t);
    }
    if opts.force_quadrature {
        return by_quadrature(uptime, proc, opts);
    }
    match (uptime.family(), proc.family()) {
        (&Family::Exponential { rate: lambda }, &Family::Exponential { rate: theta }) => {
            let r = lambda + theta;
            Ok(ConditionalMoments::closed(
                lambda / r,
                theta / r,
                Some(1.0 / r),
                Some(1.0 / r),
                Some(2.0 / (r * r)),
                Some(2.0 / (r * r)),
            ))
        }
        (&Family::Exponential { rate }, &Family::Deterministic { value }) => {
            Ok(exponential_deterministic(rate, value))
        }
        (_, &Family::Deterministic { value: t }) => {
            // success iff U ≥ t
            let q = uptime.cdf_strict(t);
            let b = uptime.partial_moment_below(1, t) / q;
            let d = uptime.partial_moment_below(2, t) / q;
            Ok(ConditionalMoments::closed(
                q,
                uptime.tail(t),
                Some(t),
                Some(b),
                Some(t * t),
                Some(d),
            ))
        }
        (&Family::Deterministic { value: u }, _) => {
            // success iff p ≤ u
            let done = proc.cdf(u);
            let q = proc.tail(u);
            let a = proc.partial_moment_below(1, u) / done;
            let c = proc.partial_moment_below(2, u) / done;
            Ok(ConditionalMoments::closed(
                q,
                done,
                Some(a),
                Some(u),
                Some(c),
                Some(u * u),
            ))
        }
        _ => by_quadrature(uptime, proc, opts),
    }
}

fn deterministic_pair(u: f64, t: f64) -> Result<ConditionalMoments> {
    if u == t {
        return Err(Error::AtomCollision(u));
    }
    let q = if u < t { 1.0 } else { 0.0 };
    Ok(ConditionalMoments::closed(
        q,
        1.0 - q,
        Some(t),
        Some(u),
        Some(t * t),
        Some(u * u),
    ))
}

/// `1 - x/(e^x - 1)`, with a series near zero.
fn one_minus_x_over_expm1(x: f64) -> f64 {
    if x < 1e-2 {
        let x2 = x * x;
        x / 2.0 - x2 / 12.0 + x2 * x2 / 720.0 - x2 * x2 * x2 / 30240.0
    } else {
        1.0 - x / x.exp_m1()
    }
}

/// Exponential(λ) uptime against a fixed processing time `t`:
/// `q = 1 - e^{-λt}`, `a = t`, `b = 1/λ - t/(e^{λt} - 1)`.
fn exponential_deterministic(lambda: f64, t: f64) -> ConditionalMoments {
    let x = lambda * t;
    let q = -(-x).exp_m1();
    let b = one_minus_x_over_expm1(x) / lambda;
    let d = crate::distributions::lower_gamma_int(3, x) / (lambda * lambda * q);
    ConditionalMoments::closed(q, (-x).exp(), Some(t), Some(b), Some(t * t), Some(d))
}

fn ratio(num: &Integral, den: &Integral) -> (f64, f64) {
    let v = num.value / den.value;
    let err = (num.abs_error + v.abs() * den.abs_error) / den.value;
    (v, err)
}

struct Masses {
    fail: Integral,
    done: Integral,
    a_num: Integral,
    c_num: Integral,
    /// Interrupted mass integrated against the uptime density; the
    /// denominator for `b` and `d`.
    fail_b: Integral,
    b_num: Integral,
    d_num: Integral,
}

fn scaled(i: &Integral, s: f64) -> Integral {
    Integral {
        value: s * i.value,
        abs_error: s * i.abs_error,
        intervals: 0,
    }
}

/// All seven integrals, with continuous laws truncated at their
/// `1 - tail_mass` quantile.
fn masses(
    uptime: &DistributionSpec,
    proc: &DistributionSpec,
    tol: Tolerance,
    tail_mass: f64,
) -> Result<Masses> {
    let upper = |d: &DistributionSpec| d.upper_quantile(tail_mass);
    // Cut-off for an integral over [x, ∞) of a law's density: its own tail
    // beyond x scales the truncated mass.
    let upper_from = |d: &DistributionSpec, x: f64| {
        let beyond = d.tail(x);
        if beyond > 0.0 {
            d.upper_quantile((tail_mass * beyond).max(f64::MIN_POSITIVE))
                .max(x)
        } else {
            x
        }
    };
    let mut kinks = uptime.kinks();
    kinks.extend(proc.kinks());

    match (uptime.atom(), proc.atom()) {
        (None, Some(t)) => {
            let top = upper_from(uptime, t);
            let f = |x: f64| uptime.density(x);
            let fail = integrate(f, 0.0, t, &kinks, tol)?;
            let done = integrate(f, t, top, &kinks, tol)?;
            Ok(Masses {
                b_num: integrate(|x| x * f(x), 0.0, t, &kinks, tol)?,
                d_num: integrate(|x| x * x * f(x), 0.0, t, &kinks, tol)?,
                a_num: scaled(&done, t),
                c_num: scaled(&done, t * t),
                fail_b: fail,
                fail,
                done,
            })
        }
        (Some(u), None) => {
            let top = upper_from(proc, u);
            let f = |x: f64| proc.density(x);
            let done = integrate(f, 0.0, u, &kinks, tol)?;
            let fail = integrate(f, u, top, &kinks, tol)?;
            Ok(Masses {
                a_num: integrate(|x| x * f(x), 0.0, u, &kinks, tol)?,
                c_num: integrate(|x| x * x * f(x), 0.0, u, &kinks, tol)?,
                b_num: scaled(&fail, u),
                d_num: scaled(&fail, u * u),
                fail_b: fail,
                fail,
                done,
            })
        }
        (None, None) => {
            let top = upper(uptime).max(upper(proc));
            let fp = |t: f64| proc.density(t);
            let fu = |u: f64| uptime.density(u);
            Ok(Masses {
                fail: integrate(|t| uptime.cdf(t) * fp(t), 0.0, top, &kinks, tol)?,
                done: integrate(|t| uptime.tail(t) * fp(t), 0.0, top, &kinks, tol)?,
                a_num: integrate(|t| t * uptime.tail(t) * fp(t), 0.0, top, &kinks, tol)?,
                c_num: integrate(|t| t * t * uptime.tail(t) * fp(t), 0.0, top, &kinks, tol)?,
                fail_b: integrate(|u| proc.tail(u) * fu(u), 0.0, top, &kinks, tol)?,
                b_num: integrate(|u| u * proc.tail(u) * fu(u), 0.0, top, &kinks, tol)?,
                d_num: integrate(|u| u * u * proc.tail(u) * fu(u), 0.0, top, &kinks, tol)?,
            })
        }
        (Some(u), Some(t)) => Err(deterministic_pair(u, t)
            .err()
            .unwrap_or(Error::AtomCollision(u))),
    }
}

fn by_quadrature(
    uptime: &DistributionSpec,
    proc: &DistributionSpec,
    opts: &ConditionalOptions,
) -> Result<ConditionalMoments> {
    let mut m = masses(uptime, proc, opts.tolerance, opts.tail_mass)?;
    // The truncated tail is absolute mass; when one side is small, push the
    // cut-off out so that it stays small relative to that side.
    let smaller = m.fail.value.min(m.done.value).min(m.fail_b.value);
    if smaller > 0.0 && smaller < 1.0 {
        let tail = (opts.tail_mass * smaller).max(1e-300);
        m = masses(uptime, proc, opts.tolerance, tail)?;
    }
    let Masses {
        fail,
        done,
        a_num,
        c_num,
        fail_b,
        b_num,
        d_num,
    } = m;

    let total = fail.value + done.value;
    let q = fail.value / total;
    let mut err = (fail.abs_error + done.abs_error) / total;

    let (a, c) = if done.value > 0.0 {
        let (a, ea) = ratio(&a_num, &done);
        let (c, ec) = ratio(&c_num, &done);
        err = err.max(ea).max(ec);
        (Some(a), Some(c))
    } else {
        (None, None)
    };
    let (b, d) = if fail.value > 0.0 && fail_b.value > 0.0 {
        let (b, eb) = ratio(&b_num, &fail_b);
        let (d, ed) = ratio(&d_num, &fail_b);
        err = err.max(eb).max(ed);
        (Some(b), Some(d))
    } else {
        (None, None)
    };
    let (q, one_minus_q) = if a.is_none() {
        (1.0, 0.0)
    } else if b.is_none() {
        (0.0, 1.0)
    } else {
        (q, done.value / total)
    };

    Ok(ConditionalMoments {
        q,
        one_minus_q,
        a,
        b,
        c,
        d,
        method: Method::Quadrature,
        est_abs_error: err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn exp(r: f64) -> DistributionSpec {
        DistributionSpec::exponential(r).unwrap()
    }

    fn det(v: f64) -> DistributionSpec {
        DistributionSpec::deterministic(v).unwrap()
    }

    fn forced() -> ConditionalOptions {
        ConditionalOptions {
            force_quadrature: true,
            ..Default::default()
        }
    }

    #[test]
    fn success_probability_examples() {
        assert!((success_probability(&exp(1.0), &det(LN_2)).unwrap() - 0.5).abs() < 1e-15);
        assert!((success_probability(&exp(1.0), &exp(1.0)).unwrap() - 0.5).abs() < 1e-15);
        let u01 = DistributionSpec::uniform(0.0, 1.0).unwrap();
        assert_eq!(success_probability(&u01, &det(2.0)).unwrap(), 1.0);
    }

    #[test]
    fn exp_exp_all_half() {
        let cm = conditional_stats(&exp(1.0), &exp(1.0)).unwrap();
        for v in [
            cm.q,
            cm.a.unwrap(),
            cm.b.unwrap(),
            cm.c.unwrap(),
            cm.d.unwrap(),
        ] {
            assert!((v - 0.5).abs() < 1e-15);
        }
        assert_eq!(cm.method, Method::ClosedForm);
        assert_eq!(cm.est_abs_error, 0.0);
    }

    #[test]
    fn exponential_deterministic_values() {
        let cm = conditional_stats(&exp(1.0), &det(LN_2)).unwrap();
        assert!((cm.q - 0.5).abs() < 1e-15);
        assert!((cm.a.unwrap() - LN_2).abs() < 1e-15);
        assert!((cm.c.unwrap() - LN_2 * LN_2).abs() < 1e-15);
        assert!((cm.b.unwrap() - (1.0 - LN_2)).abs() < 1e-14);
        // mpmath: ∫₀^{ln2} u² e^{-u} du / 0.5
        assert!((cm.d.unwrap() - 0.133_252_624_961_907_96).abs() < 1e-14);
    }

    #[test]
    fn sure_interruption_leaves_a_c_undefined() {
        let u01 = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let cm = conditional_stats(&u01, &det(2.0)).unwrap();
        assert_eq!(cm.q, 1.0);
        assert_eq!(cm.a, None);
        assert_eq!(cm.c, None);
        assert!((cm.b.unwrap() - 0.5).abs() < 1e-15);
        assert!((cm.d.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_pairs() {
        assert!(matches!(
            conditional_stats(&det(1.0), &det(1.0)),
            Err(Error::AtomCollision(_))
        ));
        let cm = conditional_stats(&det(2.0), &det(1.0)).unwrap();
        assert_eq!((cm.q, cm.a, cm.b), (0.0, Some(1.0), None));
        let cm = conditional_stats(&det(1.0), &det(2.0)).unwrap();
        assert_eq!((cm.q, cm.a, cm.b), (1.0, None, Some(1.0)));
    }

    #[test]
    fn deterministic_uptime_beyond_support_gives_q_zero() {
        let u01 = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let cm = conditional_stats(&det(5.0), &u01).unwrap();
        assert_eq!(cm.q, 0.0);
        assert_eq!(cm.b, None);
        assert!((cm.a.unwrap() - 0.5).abs() < 1e-15);
        let cm = conditional_stats_with(&det(5.0), &u01, &forced()).unwrap();
        assert_eq!(cm.q, 0.0);
        assert_eq!(cm.b, None);
    }

    #[test]
    fn disjoint_uniform_supports() {
        let low = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let high = DistributionSpec::uniform(2.0, 3.0).unwrap();
        let cm = conditional_stats(&low, &high).unwrap();
        assert_eq!(cm.q, 1.0);
        assert_eq!(cm.a, None);
        assert!((cm.b.unwrap() - 0.5).abs() < 1e-12);
        let cm = conditional_stats(&high, &low).unwrap();
        assert_eq!(cm.q, 0.0);
        assert_eq!(cm.d, None);
        assert!((cm.c.unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn forced_quadrature_matches_closed_forms() {
        let pairs = [
            (exp(1.3), exp(0.4)),
            (exp(0.7), det(1.9)),
            (det(1.2), DistributionSpec::gamma(2.0, 0.5).unwrap()),
            (DistributionSpec::weibull(1.7, 2.0).unwrap(), det(0.8)),
            (det(2.5), DistributionSpec::lognormal(0.1, 0.6).unwrap()),
        ];
        for (u, p) in pairs {
            let cf = conditional_stats(&u, &p).unwrap();
            let qd = conditional_stats_with(&u, &p, &forced()).unwrap();
            assert_eq!(qd.method, Method::Quadrature);
            let pairs = [
                (cf.q, qd.q),
                (cf.a.unwrap(), qd.a.unwrap()),
                (cf.b.unwrap(), qd.b.unwrap()),
                (cf.c.unwrap(), qd.c.unwrap()),
                (cf.d.unwrap(), qd.d.unwrap()),
            ];
            for (x, y) in pairs {
                assert!(((x - y) / x).abs() < 1e-8, "{u} / {p}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn far_tail_interruption_stays_defined() {
        // q = P{p > u} is about 2e-17 here
        let u = det(1.274_860_049_587_907_4);
        let p =
            DistributionSpec::lognormal(-0.610_778_773_838_396_6, 0.101_352_238_118_711).unwrap();
        let cf = conditional_stats(&u, &p).unwrap();
        let qd = conditional_stats_with(&u, &p, &forced()).unwrap();
        assert!(cf.q > 0.0 && cf.q < 1e-15);
        assert!(qd.q > 0.0);
        assert_eq!(cf.b, Some(u.atom().unwrap()));
        assert_eq!(qd.b, cf.b);
        assert!(((qd.q - cf.q) / cf.q).abs() < 1e-6);
    }

    #[test]
    fn small_rate_time_product_keeps_precision() {
        // b → t/2 and d → t²/3 as λt → 0
        let t = 1e-6;
        let cm = conditional_stats(&exp(1.0), &det(t)).unwrap();
        assert!((cm.b.unwrap() / (t / 2.0) - 1.0).abs() < 1e-6);
        assert!((cm.d.unwrap() / (t * t / 3.0) - 1.0).abs() < 1e-6);
    }
}
