use preempt::{
    analyze, conditional_stats, expected_completion, exponential_uptime_closed_form, second_moment,
    DistributionSpec, EnvironmentScenario, Error,
};

fn exp(r: f64) -> DistributionSpec {
    DistributionSpec::exponential(r).unwrap()
}

fn det(v: f64) -> DistributionSpec {
    DistributionSpec::deterministic(v).unwrap()
}

#[test]
fn closed_form_grid_matches_generic_path() {
    for &lambda in &[0.3, 0.5, 1.0, 2.0, 4.0, 8.0] {
        for &t in &[0.01, 0.1, 0.5, 1.0, 2.0, 4.0] {
            for &mu in &[0.0, 0.1, 0.5, 2.0] {
                let cm = conditional_stats(&exp(lambda), &det(t)).unwrap();
                let generic = expected_completion(&cm, mu).unwrap();
                let closed = exponential_uptime_closed_form(lambda, t, mu).unwrap();
                assert!(
                    ((generic - closed) / closed).abs() <= 1e-9,
                    "λ={lambda} t={t} μ={mu}: {generic} vs {closed}"
                );
            }
        }
    }
}

#[test]
fn q_to_zero_recovers_processing_moments() {
    // Exponential uptime with a tiny rate: q = 1 - e^{-λt} ≈ 1e-6
    let t = 1.7;
    let lambda = 1e-6 / t;
    let s = EnvironmentScenario {
        uptime: exp(lambda),
        downtime: exp(2.0),
        proc: det(t),
    };
    let r = analyze(&s).unwrap();
    assert!((r.q - 1e-6).abs() < 1e-11);
    assert!(((r.e_r - t) / t).abs() < 1e-4);
    assert!(((r.e_r2 - t * t) / (t * t)).abs() < 1e-4);

    // Weibull proc against a long deterministic uptime
    let p = DistributionSpec::weibull(3.0, 1.0).unwrap();
    let u = p.upper_quantile(1e-6);
    let s = EnvironmentScenario {
        uptime: det(u),
        downtime: det(0.3),
        proc: p,
    };
    let r = analyze(&s).unwrap();
    assert!((r.q - 1e-6).abs() < 1e-9);
    assert!(((r.e_r - p.mean()) / p.mean()).abs() < 1e-4);
    assert!(((r.e_r2 - p.second_moment()) / p.second_moment()).abs() < 1e-4);
}

#[test]
fn q_zero_is_exact() {
    let p = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let s = EnvironmentScenario {
        uptime: det(5.0),
        downtime: exp(1.0),
        proc: p,
    };
    let r = analyze(&s).unwrap();
    assert_eq!(r.q, 0.0);
    assert_eq!(r.e_r, p.mean());
    assert_eq!(r.e_r2, p.second_moment());
    assert_eq!(r.cm.b, None);
}

#[test]
fn q_one_never_completes() {
    let s = EnvironmentScenario {
        uptime: det(1.0),
        downtime: det(1.0),
        proc: det(2.0),
    };
    assert_eq!(analyze(&s), Err(Error::NeverCompletes));
    let s = EnvironmentScenario {
        uptime: DistributionSpec::uniform(0.0, 1.0).unwrap(),
        downtime: det(1.0),
        proc: det(2.0),
    };
    assert_eq!(analyze(&s), Err(Error::NeverCompletes));
}

#[test]
fn atom_collision_surfaces() {
    let s = EnvironmentScenario {
        uptime: det(1.0),
        downtime: det(1.0),
        proc: det(1.0),
    };
    assert_eq!(analyze(&s), Err(Error::AtomCollision(1.0)));
}

#[test]
fn near_degenerate_warning() {
    // q = 1 - e^{-30} > 1 - 1e-12
    let s = EnvironmentScenario {
        uptime: exp(1.0),
        downtime: det(0.0),
        proc: det(30.0),
    };
    let r = analyze(&s).unwrap();
    assert_eq!(r.warnings.len(), 1);
    assert!(r.e_r > 1e12);
    let s = EnvironmentScenario {
        uptime: exp(1.0),
        downtime: det(0.0),
        proc: det(3.0),
    };
    assert!(analyze(&s).unwrap().warnings.is_empty());
}

#[test]
fn report_is_internally_consistent() {
    let s = EnvironmentScenario {
        uptime: DistributionSpec::gamma(2.0, 1.5).unwrap(),
        downtime: DistributionSpec::uniform(0.2, 1.0).unwrap(),
        proc: DistributionSpec::uniform(0.5, 2.5).unwrap(),
    };
    let r = analyze(&s).unwrap();
    let mu = s.downtime.mean();
    let nu = s.downtime.second_moment();
    assert_eq!(r.e_r, expected_completion(&r.cm, mu).unwrap());
    assert_eq!(r.e_r2, second_moment(&r.cm, mu, nu).unwrap());
    assert_eq!(r.var_r, r.e_r2 - r.e_r * r.e_r);
    assert!(r.var_r > 0.0);
    assert!(r.method_notes[0].contains("quadrature"));
}
