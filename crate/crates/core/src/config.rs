//! Run configuration: a single TOML file with one table per pipeline stage.
//!
//! ```toml
//! [gate]
//! n = 2
//! lambda = [-0.7853981633974483]
//! phi = [3.141592653589793, 0.0]
//!
//! [game]
//! rstp = [3.0, 0.0, 5.0, 1.0]
//! ```
//!
//! Schema violations are reported with the dotted path of the offending
//! field, and no command produces partial output on a config error.

use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};
use crate::game::GameDefinition;
use crate::gate::GateParams;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gate: GateSection,
    #[serde(default)]
    pub game: Option<GameSection>,
    #[serde(default)]
    pub entangle: EntangleSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub nash: NashSection,
    #[serde(default)]
    pub counter: CounterSection,
    /// Default RNG seed; the --seed flag overrides it.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub n: usize,
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    #[serde(default)]
    pub mu: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub phi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    #[serde(default)]
    pub payoff_a: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub payoff_b: Option<Vec<Vec<f64>>>,
    /// Two-strategy shortcut (r, s, t, p); mutually exclusive with payoff_a.
    #[serde(default)]
    pub rstp: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangleSection {
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

impl Default for EntangleSection {
    fn default() -> Self {
        Self {
            seeds: default_seeds(),
            budget: default_budget(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<SweepAxis>,
    /// Append the payoff pairs of every classical profile to each row.
    #[serde(default)]
    pub payoff_table: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Which gate parameter to sweep: `lambda[k]`, `mu[k][l]` or `phi[k]`.
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NashSection {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

impl Default for NashSection {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            samples: default_samples(),
            gap_tol: default_gap_tol(),
            budget: default_budget(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterSection {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

impl Default for CounterSection {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            budget: default_budget(),
        }
    }
}

fn default_seeds() -> usize {
    32
}

fn default_budget() -> usize {
    2000
}

fn default_mode() -> String {
    "classical".into()
}

fn default_samples() -> usize {
    100
}

fn default_gap_tol() -> f64 {
    1e-6
}

fn default_trials() -> usize {
    100
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            // toml reports the dotted key path in its message
            Error::Config {
                path: "config".into(),
                message: e.message().to_string(),
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if let Some(sweep) = &self.sweep {
            if sweep.axes.is_empty() {
                return Err(Error::Config {
                    path: "sweep.axes".into(),
                    message: "at least one sweep axis is required".into(),
                });
            }
            if sweep.axes.len() > 2 {
                return Err(Error::Config {
                    path: "sweep.axes".into(),
                    message: format!("at most 2 axes are supported, got {}", sweep.axes.len()),
                });
            }
        }
        if !self.nash.gap_tol.is_finite() || self.nash.gap_tol <= 0.0 {
            return Err(Error::Config {
                path: "nash.gap_tol".into(),
                message: format!("must be positive, got {}", self.nash.gap_tol),
            });
        }
        Ok(())
    }

    /// Builds and validates the gate parameters from the `[gate]` table.
    pub fn gate_params(&self) -> Result<GateParams> {
        let n = self.gate.n;
        if n < 2 {
            return Err(Error::Config {
                path: "gate.n".into(),
                message: format!("need at least 2 strategies, got {n}"),
            });
        }
        let lambda = self.gate.lambda.clone().unwrap_or_else(|| vec![0.0; n - 1]);
        let mu = self
            .gate
            .mu
            .clone()
            .unwrap_or_else(|| vec![vec![0.0; n - 1]; n - 1]);
        let phi = self.gate.phi.clone().unwrap_or_else(|| vec![0.0; n]);
        GateParams::new(n, lambda, mu, phi).map_err(|e| match e {
            Error::Config { path, message } => Error::Config { path, message },
            other => Error::Config {
                path: "gate".into(),
                message: other.to_string(),
            },
        })
    }

    /// Builds the game definition from `[game]` and `[gate]`.
    pub fn game(&self) -> Result<GameDefinition> {
        let gate = self.gate_params()?;
        let n = self.gate.n;
        let section = self.game.as_ref().ok_or_else(|| Error::Config {
            path: "game".into(),
            message: "this command needs a [game] table".into(),
        })?;
        match (&section.payoff_a, &section.rstp) {
            (Some(_), Some(_)) => Err(Error::Config {
                path: "game.rstp".into(),
                message: "give either payoff_a or rstp, not both".into(),
            }),
            (None, Some(rstp)) => {
                if n != 2 {
                    return Err(Error::Config {
                        path: "game.rstp".into(),
                        message: format!("rstp is a 2-strategy shortcut, but gate.n = {n}"),
                    });
                }
                if rstp.len() != 4 {
                    return Err(Error::Config {
                        path: "game.rstp".into(),
                        message: format!("expected 4 values (r, s, t, p), got {}", rstp.len()),
                    });
                }
                GameDefinition::from_rstp(rstp[0], rstp[1], rstp[2], rstp[3], gate)
            }
            (Some(payoff_a), None) => match &section.payoff_b {
                Some(payoff_b) => {
                    GameDefinition::new(n, payoff_a.clone(), payoff_b.clone(), gate)
                }
                None => GameDefinition::symmetric(n, payoff_a.clone(), gate),
            },
            (None, None) => Err(Error::Config {
                path: "game.payoff_a".into(),
                message: "a payoff matrix (payoff_a or rstp) is required".into(),
            }),
        }
    }

    /// Effective seed: the flag wins over the config, and commands that use
    /// randomness fail without one.
    pub fn require_seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.seed).ok_or_else(|| Error::Config {
            path: "seed".into(),
            message: "this command uses randomness; pass --seed or set `seed` in the config".into(),
        })
    }
}

/// A parsed sweep-axis target inside the gate parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisTarget {
    Lambda(usize),
    Mu(usize, usize),
    Phi(usize),
}

impl AxisTarget {
    /// Parses `lambda[k]`, `mu[k][l]` or `phi[k]`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |message: String| Error::Config {
            path: format!("sweep.axes.param = \"{text}\""),
            message,
        };
        let (name, rest) = match text.find('[') {
            Some(idx) => (&text[..idx], &text[idx..]),
            None => return Err(bad("expected an index, e.g. lambda[0]".into())),
        };
        let indices: Vec<usize> = rest
            .split(['[', ']'])
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| bad(format!("invalid index `{s}`")))
            })
            .collect::<Result<_>>()?;
        match (name, indices.as_slice()) {
            ("lambda", [k]) => Ok(Self::Lambda(*k)),
            ("phi", [k]) => Ok(Self::Phi(*k)),
            ("mu", [k, l]) => {
                if k == l {
                    Err(bad("mu diagonal entries are fixed to zero".into()))
                } else {
                    Ok(Self::Mu(*k, *l))
                }
            }
            _ => Err(bad(
                "expected lambda[k], mu[k][l] or phi[k] with in-range indices".into(),
            )),
        }
    }

    /// Returns a copy of `base` with this component set to `value`.
    pub fn apply(&self, base: &GateParams, value: f64) -> Result<GateParams> {
        let n = base.n();
        let mut lambda = base.lambda().to_vec();
        let mut mu = base.mu_rows();
        let mut phi = base.phi().to_vec();
        let oob = |what: &str, idx: String| Error::Config {
            path: format!("sweep.axes.param = \"{what}{idx}\""),
            message: "index out of range for this gate".into(),
        };
        match *self {
            AxisTarget::Lambda(k) => {
                if k >= lambda.len() {
                    return Err(oob("lambda", format!("[{k}]")));
                }
                lambda[k] = value;
            }
            AxisTarget::Mu(k, l) => {
                if k >= n - 1 || l >= n - 1 {
                    return Err(oob("mu", format!("[{k}][{l}]")));
                }
                mu[k][l] = value;
                mu[l][k] = value;
            }
            AxisTarget::Phi(k) => {
                if k >= phi.len() {
                    return Err(oob("phi", format!("[{k}]")));
                }
                phi[k] = value;
            }
        }
        GateParams::new(n, lambda, mu, phi)
    }
}

/// The grid values of one axis: evenly spaced, inclusive of both ends.
pub fn axis_values(axis: &SweepAxis) -> Vec<f64> {
    match axis.points {
        0 => Vec::new(),
        1 => vec![axis.start],
        points => (0..points)
            .map(|i| {
                axis.start + (axis.stop - axis.start) * i as f64 / (points as f64 - 1.0)
            })
            .collect(),
    }
}
