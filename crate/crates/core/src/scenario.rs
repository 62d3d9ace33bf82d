//! Scenario files and JSON report output.
//!
//! A scenario is one JSON object:
//!
//! ```json
//! {
//!   "name": "exp-uptime-fixed-job",
//!   "uptime":   { "family": "exponential", "rate": 1.0 },
//!   "downtime": { "family": "deterministic", "value": 0.5 },
//!   "proc":     { "family": "deterministic", "value": 0.6931471805599453 },
//!   "simulation": { "n": 1000000, "seed": 7, "max_attempts": 1000000 }
//! }
//! ```
//!
//! Distribution records are tagged by `family` and carry exactly the
//! parameter names of [`Family`](crate::distributions::Family). The
//! `simulation` block and each of its keys are optional.

use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::distributions::DistributionSpec;
use crate::engine::EnvironmentScenario;
use crate::simulator::DEFAULT_MAX_ATTEMPTS;

pub const DEFAULT_SIM_N: u64 = 100_000;
pub const DEFAULT_SIM_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSimulation")]
pub struct SimulationBlock {
    pub n: u64,
    pub seed: u64,
    pub max_attempts: u64,
}

impl Default for SimulationBlock {
    fn default() -> Self {
        Self {
            n: DEFAULT_SIM_N,
            seed: DEFAULT_SIM_SEED,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

impl SimulationBlock {
    pub fn new(n: u64, seed: u64, max_attempts: u64) -> Result<Self, String> {
        if n < 2 {
            return Err("n must be ≥ 2".to_string());
        }
        if max_attempts < 1 {
            return Err("max_attempts must be ≥ 1".to_string());
        }
        Ok(Self {
            n,
            seed,
            max_attempts,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    n: Option<u64>,
    seed: Option<u64>,
    max_attempts: Option<u64>,
}

impl TryFrom<RawSimulation> for SimulationBlock {
    type Error = String;

    fn try_from(raw: RawSimulation) -> Result<Self, String> {
        let d = SimulationBlock::default();
        SimulationBlock::new(
            raw.n.unwrap_or(d.n),
            raw.seed.unwrap_or(d.seed),
            raw.max_attempts.unwrap_or(d.max_attempts),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub uptime: DistributionSpec,
    pub downtime: DistributionSpec,
    pub proc: DistributionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationBlock>,
}

impl ScenarioFile {
    pub fn environment(&self) -> EnvironmentScenario {
        EnvironmentScenario {
            uptime: self.uptime,
            downtime: self.downtime,
            proc: self.proc,
        }
    }

    pub fn simulation_or_default(&self) -> SimulationBlock {
        self.simulation.unwrap_or_default()
    }
}

/// A scenario that failed to parse or validate, anchored to its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ScenarioError {}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        // serde_json appends its own " at line L column C"
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        ScenarioError {
            line: e.line(),
            column: e.column(),
            message,
        }
    })
}

/// Pretty JSON with every float written to 17 significant digits.
struct SeventeenDigits<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SeventeenDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let fmt = SeventeenDigits {
        inner: PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
    value
        .serialize(&mut ser)
        .expect("report types always serialize");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}
