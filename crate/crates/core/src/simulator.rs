//! Monte Carlo oracle for the completion time.
//!
//! Each attempt draws, in this order, the processing requirement `p`, the
//! uptime `U`, and (only if `U < p`) the downtime `D`. The downtime of the
//! successful attempt is never drawn. Path `i` of a run seeded with `s` uses
//! ChaCha8 seeded from `s` on stream `i`, so results do not depend on how
//! paths are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::EnvironmentScenario;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// Environment variable read by the CLI to size the worker pool.
pub const WORKERS_ENV: &str = "PREEMPT_WORKERS";

/// Paths per aggregation block. Fixed so that summation order is the same
/// for any worker count.
const BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub r: f64,
    pub attempts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationEstimate {
    pub n: u64,
    pub mean_r: f64,
    pub mean_r2: f64,
    pub se_mean: f64,
    pub se_mean2: f64,
    pub mean_attempts: f64,
    pub max_attempts_hit: u64,
    pub max_attempts: u64,
    pub seed: u64,
    /// `attempt_counts[k - 1]` paths finished on attempt `k`.
    pub attempt_counts: Vec<u64>,
}

/// Generator for path `index` of a run seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn cap_error(max_attempts: u64) -> Error {
    Error::AttemptCapExceeded {
        failed: 1,
        total: 1,
        max_attempts,
    }
}

/// One realization of `R = p_N + Σ_{k<N} (U_k + D_k)`.
pub fn simulate_completion<R: rand::Rng + ?Sized>(
    scenario: &EnvironmentScenario,
    rng: &mut R,
    max_attempts: u64,
) -> Result<Completion> {
    let mut elapsed = 0.0;
    for attempt in 1..=max_attempts {
        let p = scenario.proc.sample(rng);
        let u = scenario.uptime.sample(rng);
        if u >= p {
            return Ok(Completion {
                r: elapsed + p,
                attempts: attempt,
            });
        }
        let d = scenario.downtime.sample(rng);
        elapsed = elapsed + u + d;
    }
    Err(cap_error(max_attempts))
}

#[derive(Debug, Clone, Copy)]
enum MachineState {
    /// Up since `since`, will fail at `since + uptime`; the job needs `work`
    /// uninterrupted time units.
    Up {
        since: f64,
        uptime: f64,
        work: f64,
    },
    Down {
        until: f64,
    },
}

/// Walks the machine timeline phase by phase. Work done in an up-phase is
/// discarded at the breakdown that ends it. Consumes the generator in the
/// same order as [`simulate_completion`], so the two agree bit for bit.
pub fn event_driven_replay<R: rand::Rng + ?Sized>(
    scenario: &EnvironmentScenario,
    rng: &mut R,
    max_attempts: u64,
) -> Result<Completion> {
    if max_attempts == 0 {
        return Err(cap_error(0));
    }
    let mut attempts = 1;
    let work = scenario.proc.sample(rng);
    let uptime = scenario.uptime.sample(rng);
    let mut state = MachineState::Up {
        since: 0.0,
        uptime,
        work,
    };
    loop {
        state = match state {
            MachineState::Up {
                since,
                uptime,
                work,
            } => {
                if work <= uptime {
                    return Ok(Completion {
                        r: since + work,
                        attempts,
                    });
                }
                let failed_at = since + uptime;
                let repair = scenario.downtime.sample(rng);
                MachineState::Down {
                    until: failed_at + repair,
                }
            }
            MachineState::Down { until } => {
                if attempts == max_attempts {
                    return Err(cap_error(max_attempts));
                }
                attempts += 1;
                let work = scenario.proc.sample(rng);
                let uptime = scenario.uptime.sample(rng);
                MachineState::Up {
                    since: until,
                    uptime,
                    work,
                }
            }
        };
    }
}

/// Running moments of `R` and `R²` for a block of paths.
#[derive(Debug, Clone, Default)]
struct Summary {
    count: u64,
    mean_r: f64,
    m2_r: f64,
    mean_r2: f64,
    m2_r2: f64,
    attempts: u64,
    failed: u64,
    hist: Vec<u64>,
}

impl Summary {
    fn push(&mut self, c: Completion) {
        self.count += 1;
        let n = self.count as f64;
        let x = c.r;
        let delta = x - self.mean_r;
        self.mean_r += delta / n;
        self.m2_r += delta * (x - self.mean_r);
        let x2 = x * x;
        let delta = x2 - self.mean_r2;
        self.mean_r2 += delta / n;
        self.m2_r2 += delta * (x2 - self.mean_r2);
        self.attempts += c.attempts;
        let k = c.attempts as usize;
        if self.hist.len() < k {
            self.hist.resize(k, 0);
        }
        self.hist[k - 1] += 1;
    }

    fn merge(mut self, other: Summary) -> Summary {
        if other.count > 0 {
            let (na, nb) = (self.count as f64, other.count as f64);
            let n = na + nb;
            let d = other.mean_r - self.mean_r;
            self.mean_r += d * nb / n;
            self.m2_r += other.m2_r + d * d * na * nb / n;
            let d = other.mean_r2 - self.mean_r2;
            self.mean_r2 += d * nb / n;
            self.m2_r2 += other.m2_r2 + d * d * na * nb / n;
            self.count += other.count;
            self.attempts += other.attempts;
        }
        self.failed += other.failed;
        if self.hist.len() < other.hist.len() {
            self.hist.resize(other.hist.len(), 0);
        }
        for (h, o) in self.hist.iter_mut().zip(other.hist) {
            *h += o;
        }
        self
    }
}

fn run_block(
    scenario: &EnvironmentScenario,
    seed: u64,
    start: u64,
    end: u64,
    max_attempts: u64,
) -> Summary {
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = Summary::default();
    for i in start..end {
        let mut rng = base.clone();
        rng.set_stream(i);
        match simulate_completion(scenario, &mut rng, max_attempts) {
            Ok(c) => summary.push(c),
            Err(_) => summary.failed += 1,
        }
    }
    summary
}

/// Runs `n` independent paths. `workers = None` uses rayon's global pool.
/// The result is bit-identical for every worker count.
pub fn estimate_moments(
    scenario: &EnvironmentScenario,
    n: u64,
    seed: u64,
    max_attempts: u64,
    workers: Option<usize>,
) -> Result<SimulationEstimate> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be ≥ 2".to_string()));
    }
    if max_attempts < 1 {
        return Err(Error::InvalidParameter(
            "max_attempts must be ≥ 1".to_string(),
        ));
    }
    let blocks = n.div_ceil(BLOCK);
    let work = || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                run_block(
                    scenario,
                    seed,
                    b * BLOCK,
                    ((b + 1) * BLOCK).min(n),
                    max_attempts,
                )
            })
            .collect::<Vec<_>>()
    };
    let parts = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    let total = parts.into_iter().fold(Summary::default(), Summary::merge);

    if total.failed > 0 {
        return Err(Error::AttemptCapExceeded {
            failed: total.failed,
            total: n,
            max_attempts,
        });
    }
    let nf = n as f64;
    let se = |m2: f64| (m2 / (nf - 1.0)).sqrt() / nf.sqrt();
    Ok(SimulationEstimate {
        n,
        mean_r: total.mean_r,
        mean_r2: total.mean_r2,
        se_mean: se(total.m2_r),
        se_mean2: se(total.m2_r2),
        mean_attempts: total.attempts as f64 / nf,
        max_attempts_hit: 0,
        max_attempts,
        seed,
        attempt_counts: total.hist,
    })
}
