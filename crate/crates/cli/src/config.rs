//! Run configuration: flat `key = value` text with `#` comments,
//! unknown keys rejected, paper parameters as defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use mzchaos_core::chaos::ViscosityExpansion;
use mzchaos_core::timestep::step_count;

/// Run mode selected by `scenario`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Full,
    ReducedMarkov,
    ReducedMemory,
    QuadOracle,
    Mc,
    LinDecay,
    SelectMemory,
    Tensor,
    Compare,
}

impl Scenario {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "full" => Some(Self::Full),
            "reduced-markov" => Some(Self::ReducedMarkov),
            "reduced-memory" => Some(Self::ReducedMemory),
            "quad-oracle" => Some(Self::QuadOracle),
            "mc" => Some(Self::Mc),
            "lindecay" => Some(Self::LinDecay),
            "select-memory" => Some(Self::SelectMemory),
            "tensor" => Some(Self::Tensor),
            "compare" => Some(Self::Compare),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::ReducedMarkov => "reduced-markov",
            Self::ReducedMemory => "reduced-memory",
            Self::QuadOracle => "quad-oracle",
            Self::Mc => "mc",
            Self::LinDecay => "lindecay",
            Self::SelectMemory => "select-memory",
            Self::Tensor => "tensor",
            Self::Compare => "compare",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Configuration error with the offending key and source line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config key `{}` (line {}): {}", self.key, line, self.message),
            None => write!(f, "config key `{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Fully validated run configuration. Defaults are the published
/// experiment parameters; `T = 2.0` and the `sin x` initial condition
/// are this tool's defaults (flagged in the output header).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub m: usize,
    pub lambda: usize,
    pub nu0: f64,
    pub nu1: f64,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub n0: usize,
    pub n1: usize,
    pub seed: u64,
    pub samples: Option<usize>,
    /// Initial condition as `(k, Re, Im)` triples.
    pub ic: Vec<(i64, f64, f64)>,
    pub out: Option<PathBuf>,
    pub zero_unpaired_mode: bool,
    pub compare_a: Option<PathBuf>,
    pub compare_b: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Full,
            n: 96,
            m: 7,
            lambda: 1,
            nu0: 0.1,
            nu1: 0.07,
            dt: 0.001,
            t_end: 2.0,
            stride: 1,
            t0: None,
            t1: None,
            n0: 1,
            n1: 1,
            seed: 0,
            samples: None,
            ic: default_ic(),
            out: None,
            zero_unpaired_mode: true,
        compare_a: None,
            compare_b: None,
        }
    }
}

/// `sin x`: `u_1 = -i/2`, `u_{-1} = i/2`.
pub fn default_ic() -> Vec<(i64, f64, f64)> {
    vec![(1, 0.0, -0.5), (-1, 0.0, 0.5)]
}

/// Monte Carlo draw count when `samples` is unset.
pub const DEFAULT_MC_SAMPLES: usize = 2000;
/// Quadrature node count when `samples` is unset for `quad-oracle`.
pub const DEFAULT_QUAD_NODES: usize = 16;

impl RunConfig {
    /// Parses `key = value` text. `#` starts a comment, blank lines are
    /// skipped, unknown and duplicate keys are rejected with their line
    /// number, and the assembled configuration is validated.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    key: line.to_string(),
                    line: Some(line_no),
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if let Some(prev) = seen.insert(key.to_string(), line_no) {
                return Err(ConfigError {
                    key: key.to_string(),
                    line: Some(line_no),
                    message: format!("duplicate key (first set on line {prev})"),
                });
            }
            cfg.apply(key, value, line_no)?;
        }
        cfg.validate(&seen)?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let err = |message: String| ConfigError {
            key: key.to_string(),
            line: Some(line),
            message,
        };
        match key {
            "scenario" => {
                self.scenario = Scenario::parse(value).ok_or_else(|| {
                    err(format!(
                        "unknown scenario `{value}` (expected one of full, reduced-markov, \
                         reduced-memory, quad-oracle, mc, lindecay, select-memory, tensor, compare)"
                    ))
                })?;
            }
            "N" => self.n = parse_num(value).map_err(err)?,
            "M" => self.m = parse_num(value).map_err(err)?,
            "lambda" => self.lambda = parse_num(value).map_err(err)?,
            "nu0" => self.nu0 = parse_num(value).map_err(err)?,
            "nu1" => self.nu1 = parse_num(value).map_err(err)?,
            "dt" => self.dt = parse_num(value).map_err(err)?,
            "T" => self.t_end = parse_num(value).map_err(err)?,
            "stride" => self.stride = parse_num(value).map_err(err)?,
            "t0" => self.t0 = Some(parse_num(value).map_err(err)?),
            "t1" => self.t1 = Some(parse_num(value).map_err(err)?),
            "n0" => self.n0 = parse_num(value).map_err(err)?,
            "n1" => self.n1 = parse_num(value).map_err(err)?,
            "seed" => self.seed = parse_num(value).map_err(err)?,
            "samples" => self.samples = Some(parse_num(value).map_err(err)?),
            "ic" => self.ic = parse_ic(value).map_err(err)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "zero_unpaired_mode" => {
                self.zero_unpaired_mode = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(err(format!("expected true or false, got `{value}`"))),
                }
            }
            "compare_a" => self.compare_a = Some(PathBuf::from(value)),
            "compare_b" => self.compare_b = Some(PathBuf::from(value)),
            _ => {
                return Err(ConfigError {
                    key: key.to_string(),
                    line: Some(line),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    /// Cross-field validation against the solver preconditions.
    fn validate(&self, seen: &BTreeMap<String, usize>) -> Result<(), ConfigError> {
        let at = |key: &str| seen.get(key).copied();
        let fail = |key: &str, message: String| {
            Err(ConfigError {
                key: key.to_string(),
                line: at(key),
                message,
            })
        };

        if self.n < 4 || self.n % 2 != 0 {
            return fail("N", format!("mode count must be even and >= 4 (got {})", self.n));
        }
        if self.m < 1 {
            return fail("M", "polynomial count must be >= 1".into());
        }
        if self.scenario == Scenario::LinDecay && self.m < 2 {
            return fail("M", "the lindecay scenario needs M >= 2".into());
        }
        if self.lambda != 1 {
            return fail(
                "lambda",
                format!("reduced models support lambda = 1 only (got {})", self.lambda),
            );
        }
        if ViscosityExpansion::new(self.nu0, self.nu1).is_err() {
            let key = if self.nu1 < 0.0 || at("nu1").is_some() { "nu1" } else { "nu0" };
            return fail(
                key,
                format!(
                    "viscosity must satisfy nu1 >= 0 and nu0 - nu1 > 0 \
                     (got nu0 = {}, nu1 = {})",
                    self.nu0, self.nu1
                ),
            );
        }
        if self.dt <= 0.0 {
            return fail("dt", format!("step size must be positive (got {})", self.dt));
        }
        let steps = match step_count(self.dt, self.t_end) {
            Ok(s) => s,
            Err(e) => return fail("T", e.to_string()),
        };
        if self.stride == 0 || (steps > 0 && steps % self.stride != 0) {
            return fail(
                "stride",
                format!("stride {} must divide the step count {steps}", self.stride),
            );
        }
        match (self.t0, self.t1) {
            (Some(t0), Some(t1)) => {
                if t0 <= 0.0 || t1 <= 0.0 {
                    return fail("t0", "memory lengths must be positive".into());
                }
                if t1 > t0 {
                    return fail("t1", format!("t1 = {t1} must not exceed t0 = {t0}"));
                }
            }
            (None, None) => {}
            _ => {
                return fail(
                    "t0",
                    "set both t0 and t1, or neither (auto-selection)".into(),
                )
            }
        }
        if self.n0 == 0 || self.n1 == 0 {
            return fail("n0", "subinterval counts must be >= 1".into());
        }
        if self.n0 != self.n1 {
            return fail(
                "n1",
                format!(
                    "the hierarchy couples levels subinterval-by-subinterval; \
                     n0 = {} and n1 = {} must be equal",
                    self.n0, self.n1
                ),
            );
        }
        if self.samples == Some(0) {
            return fail("samples", "needs samples >= 1".into());
        }
        for &(k, _, _) in &self.ic {
            let half = (self.n / 2) as i64;
            if k < -half || k > half - 1 {
                return fail(
                    "ic",
                    format!("wavenumber {k} outside F = [{}, {}]", -half, half - 1),
                );
            }
        }
        if self.scenario == Scenario::Compare && (self.compare_a.is_none() || self.compare_b.is_none())
        {
            return fail(
                "compare_a",
                "the compare scenario needs compare_a and compare_b paths".into(),
            );
        }
        Ok(())
    }

    /// Effective Monte Carlo sample count.
    pub fn effective_samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_MC_SAMPLES)
    }

    /// Effective node count for the quadrature oracle.
    pub fn effective_quad_nodes(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_QUAD_NODES)
    }

    /// Serializes the initial condition back to config syntax with
    /// round-trip-exact floats.
    pub fn ic_string(&self) -> String {
        self.ic
            .iter()
            .map(|(k, re, im)| format!("{k}:{re:.16e}:{im:.16e}"))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("cannot parse `{value}`: {e}"))
}

/// Parses `k:re:im` triples separated by `;`.
fn parse_ic(value: &str) -> Result<Vec<(i64, f64, f64)>, String> {
    let mut modes = Vec::new();
    for part in value.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let fields: Vec<&str> = part.split(':').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(format!("expected `k:re:im`, got `{part}`"));
        }
        let k = parse_num::<i64>(fields[0])?;
        let re = parse_num::<f64>(fields[1])?;
        let im = parse_num::<f64>(fields[2])?;
        modes.push((k, re, im));
    }
    if modes.is_empty() {
        return Err("initial condition must list at least one mode".into());
    }
    Ok(modes)
}
