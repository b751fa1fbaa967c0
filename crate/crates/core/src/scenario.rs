//! Problem description shared by the objective and asymptotic solvers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::risk_measures::RiskLevels;

/// Whether participants evaluate risk with RVaR windows or plain VaR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    RVaR,
    VaR,
}

/// Dependence regime for the aggregate ceded loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dependence {
    WorstCase,
    Comonotonic,
    IID,
}

impl Dependence {
    pub const ALL: [Dependence; 3] = [Dependence::WorstCase, Dependence::Comonotonic, Dependence::IID];

    pub fn name(self) -> &'static str {
        match self {
            Self::WorstCase => "WorstCase",
            Self::Comonotonic => "Comonotonic",
            Self::IID => "IID",
        }
    }
}

impl fmt::Display for Dependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dependence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "worstcase" | "worst_case" | "worst-case" => Ok(Self::WorstCase),
            "comonotonic" => Ok(Self::Comonotonic),
            "iid" => Ok(Self::IID),
            _ => Err(Error::Config(format!("unknown dependence regime {s:?}"))),
        }
    }
}

/// Marginal loss laws of the insurers, their risk windows, the reinsurer's
/// window and the dependence regime.
///
/// In VaR mode every window has zero length: insurer `i` uses `VaR_{p_i}`
/// stored as `RiskLevels::var(p_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioSpec", into = "ScenarioSpec")]
pub struct Scenario {
    pub marginals: Vec<Distribution>,
    pub insurer_levels: Vec<RiskLevels>,
    pub reinsurer_levels: RiskLevels,
    pub mode: Mode,
    pub dependence: Dependence,
}

impl Scenario {
    pub fn new(
        marginals: Vec<Distribution>,
        insurer_levels: Vec<RiskLevels>,
        reinsurer_levels: RiskLevels,
        mode: Mode,
        dependence: Dependence,
    ) -> Result<Self> {
        let s = Self { marginals, insurer_levels, reinsurer_levels, mode, dependence };
        s.validate()?;
        Ok(s)
    }

    /// VaR-mode scenario from probability levels.
    pub fn var(
        marginals: Vec<Distribution>,
        insurer_probs: &[f64],
        reinsurer_prob: f64,
        dependence: Dependence,
    ) -> Result<Self> {
        let levels = insurer_probs.iter().map(|&p| RiskLevels::var(p)).collect::<Result<Vec<_>>>()?;
        Self::new(marginals, levels, RiskLevels::var(reinsurer_prob)?, Mode::VaR, dependence)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.marginals.len();
        if n == 0 {
            return Err(Error::Config("scenario needs at least one insurer".into()));
        }
        if self.insurer_levels.len() != n {
            return Err(Error::Config(format!("{n} marginals but {} insurer levels", self.insurer_levels.len())));
        }
        if self.mode == Mode::VaR {
            let all = self.insurer_levels.iter().chain(std::iter::once(&self.reinsurer_levels));
            if all.clone().any(|l| !l.is_var()) {
                return Err(Error::Config("VaR mode needs zero-length windows".into()));
            }
            if all.into_iter().any(|l| l.upper() >= 1.0) {
                return Err(Error::Config("VaR levels must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.marginals.len()
    }

    /// VaR level `p_i` of insurer `i` (the upper end of its window).
    pub fn insurer_prob(&self, i: usize) -> f64 {
        self.insurer_levels[i].upper()
    }

    /// VaR level of the reinsurer (the upper end of its window).
    pub fn reinsurer_prob(&self) -> f64 {
        self.reinsurer_levels.upper()
    }

    pub(crate) fn require_mode(&self, mode: Mode, what: &str) -> Result<()> {
        if self.mode != mode {
            return Err(Error::Config(format!("{what} needs a {mode:?}-mode scenario")));
        }
        Ok(())
    }

    pub(crate) fn require_n(&self, n: usize, what: &str) -> Result<()> {
        if self.n() != n {
            return Err(Error::Config(format!("{what} needs exactly {n} insurers, got {}", self.n())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LevelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    alpha: f64,
}

impl LevelSpec {
    fn resolve(&self, mode: Mode) -> Result<RiskLevels> {
        match mode {
            Mode::VaR => RiskLevels::var(self.alpha),
            Mode::RVaR => RiskLevels::new(self.beta.unwrap_or(0.0), self.alpha),
        }
        .map_err(|e| Error::Config(e.to_string()))
    }

    fn from_levels(l: RiskLevels, mode: Mode) -> Self {
        match mode {
            Mode::VaR => Self { beta: None, alpha: l.upper() },
            Mode::RVaR => Self { beta: Some(l.beta), alpha: l.alpha },
        }
    }
}

fn default_mode() -> Mode {
    Mode::RVaR
}

fn default_dependence() -> Dependence {
    Dependence::WorstCase
}

/// Wire form of [`Scenario`]. In VaR mode `alpha` is the probability level
/// and `beta` is ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScenarioSpec {
    #[serde(default)]
    n: Option<usize>,
    marginals: Vec<Distribution>,
    insurer_levels: Vec<LevelSpec>,
    reinsurer_levels: LevelSpec,
    #[serde(default = "default_mode")]
    mode: Mode,
    #[serde(default = "default_dependence")]
    dependence: Dependence,
}

impl TryFrom<ScenarioSpec> for Scenario {
    type Error = Error;

    fn try_from(spec: ScenarioSpec) -> Result<Self> {
        if let Some(n) = spec.n {
            if n != spec.marginals.len() {
                return Err(Error::Config(format!("n = {n} but {} marginals given", spec.marginals.len())));
            }
        }
        let insurer_levels = spec.insurer_levels.iter().map(|l| l.resolve(spec.mode)).collect::<Result<Vec<_>>>()?;
        let reinsurer_levels = spec.reinsurer_levels.resolve(spec.mode)?;
        Scenario::new(spec.marginals, insurer_levels, reinsurer_levels, spec.mode, spec.dependence)
    }
}

impl From<Scenario> for ScenarioSpec {
    fn from(s: Scenario) -> Self {
        Self {
            n: Some(s.n()),
            insurer_levels: s.insurer_levels.iter().map(|&l| LevelSpec::from_levels(l, s.mode)).collect(),
            reinsurer_levels: LevelSpec::from_levels(s.reinsurer_levels, s.mode),
            marginals: s.marginals,
            mode: s.mode,
            dependence: s.dependence,
        }
    }
}
