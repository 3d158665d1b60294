//! Run configuration: flat key–value file merged with command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Deserialize;

use crate::afa::{s1_afa, s2_afa};
use crate::closedforms::{eval_closed, ClosedFormId};
use crate::distributions::{PhotonDensity, TailPolicy, DEFAULT_TAIL_TOL};
use crate::dynamics::{make_tlm_state, uniform_grid, Engine, ObservableKind, ObservableSeries, S2Pairing, Scenario};
use crate::error::{Error, Result};

/// How a series is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Exact,
    Afa,
    Closed,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Afa => "afa",
            Method::Closed => "closed",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Method::Exact),
            "afa" => Ok(Method::Afa),
            "closed" => Ok(Method::Closed),
            other => Err(Error::Config(format!("unknown method `{other}` (exact|afa|closed)"))),
        }
    }
}

/// Every configurable key, all optional. Used both as the config-file schema
/// and as the flag set of `tavis run`.
#[derive(Debug, Clone, Default, Args, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigKeys {
    /// s1 | s2 | s4 | ee
    #[arg(long)]
    pub observable: Option<String>,
    /// exact | afa | closed
    #[arg(long)]
    pub method: Option<String>,
    /// all_up | all_down | one_up_specified | one_up_dicke | two_up_specified | half_up | dicke:m
    #[arg(long)]
    pub scenario: Option<String>,
    /// Number of molecules N.
    #[arg(long = "n-tlm", visible_alias = "n")]
    pub n_tlm: Option<u32>,
    /// fock:n0 | coherent:nbar | thermal:nbar
    #[arg(long)]
    pub distribution: Option<String>,
    /// Dimensionless detuning β (exclusive with --delta).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Detuning parameter Δ = β²/4 (exclusive with --beta).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "tau-max")]
    pub tau_max: Option<f64>,
    /// Number of grid points including τ = 0.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Maximum discarded photon probability.
    #[arg(long = "tail-tol")]
    pub tail_tol: Option<f64>,
    /// Explicit photon truncation (must still meet --tail-tol).
    #[arg(long = "n-trunc")]
    pub n_trunc: Option<u64>,
    /// Worker threads (default: all cores). Does not affect the output.
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional SVG rendering of the CSV.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// S₂ pairing: consistent | printed
    #[arg(long)]
    pub pairing: Option<String>,
}

impl ConfigKeys {
    /// Parses a flat `key = value` file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config file: {}", e.message())))
    }

    /// Keys set in `self` win over those in `base`.
    pub fn over(self, base: ConfigKeys) -> ConfigKeys {
        ConfigKeys {
            observable: self.observable.or(base.observable),
            method: self.method.or(base.method),
            scenario: self.scenario.or(base.scenario),
            n_tlm: self.n_tlm.or(base.n_tlm),
            distribution: self.distribution.or(base.distribution),
            // β and Δ are one setting: a flag for either replaces both from the file.
            beta: if self.beta.is_some() || self.delta.is_some() { self.beta } else { base.beta },
            delta: if self.beta.is_some() || self.delta.is_some() { self.delta } else { base.delta },
            tau_max: self.tau_max.or(base.tau_max),
            steps: self.steps.or(base.steps),
            tail_tol: self.tail_tol.or(base.tail_tol),
            n_trunc: self.n_trunc.or(base.n_trunc),
            threads: self.threads.or(base.threads),
            output: self.output.or(base.output),
            svg: self.svg.or(base.svg),
            pairing: self.pairing.or(base.pairing),
        }
    }
}

/// A fully resolved and validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub observable: ObservableKind,
    pub method: Method,
    pub scenario: Scenario,
    pub n_tlm: u32,
    pub distribution: String,
    pub beta: f64,
    /// Set when the detuning was given as Δ.
    pub delta: Option<f64>,
    pub tau_max: f64,
    pub steps: usize,
    pub tail_tol: f64,
    pub n_trunc: Option<u64>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub pairing: S2Pairing,
}

impl RunConfig {
    pub fn resolve(keys: ConfigKeys) -> Result<Self> {
        let observable = match &keys.observable {
            Some(s) => s.parse()?,
            None => ObservableKind::S1,
        };
        let method = match &keys.method {
            Some(s) => s.parse()?,
            None => Method::Exact,
        };
        let scenario = match &keys.scenario {
            Some(s) => s.parse()?,
            None if observable == ObservableKind::S4 => Scenario::AllDown,
            None => Scenario::AllUp,
        };
        let n_tlm = keys.n_tlm.ok_or_else(|| Error::Config("missing key n_tlm".into()))?;
        if n_tlm == 0 {
            return Err(Error::Config("n_tlm must be at least 1".into()));
        }
        let distribution = keys.distribution.ok_or_else(|| Error::Config("missing key distribution".into()))?;
        let (beta, delta) = match (keys.beta, keys.delta) {
            (Some(_), Some(_)) => return Err(Error::Config("beta and delta are mutually exclusive".into())),
            (Some(b), None) if b.is_finite() => (b, None),
            (None, Some(d)) if d.is_finite() && d >= 0.0 => (2.0 * d.sqrt(), Some(d)),
            (None, None) => (0.0, None),
            _ => return Err(Error::Config("detuning must be finite (and delta ≥ 0)".into())),
        };
        let tau_max = keys.tau_max.unwrap_or(20.0);
        if !(tau_max > 0.0 && tau_max.is_finite()) {
            return Err(Error::Config("tau_max must be positive".into()));
        }
        let steps = keys.steps.unwrap_or(2001);
        if steps < 2 {
            return Err(Error::Config("steps must be at least 2".into()));
        }
        let tail_tol = keys.tail_tol.unwrap_or(DEFAULT_TAIL_TOL);
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::Config("tail_tol must lie in (0, 1)".into()));
        }
        if keys.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let pairing = match &keys.pairing {
            Some(s) => s.parse()?,
            None => S2Pairing::default(),
        };
        Ok(Self {
            observable,
            method,
            scenario,
            n_tlm,
            distribution,
            beta,
            delta,
            tau_max,
            steps,
            tail_tol,
            n_trunc: keys.n_trunc,
            threads: keys.threads,
            output: keys.output,
            svg: keys.svg,
            pairing,
        })
    }

    /// The resolved physics settings as `key = value` lines (re-readable as a
    /// config file). Thread count and output paths are deliberately omitted:
    /// they never change the numbers.
    pub fn header_lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("observable = \"{}\"", self.observable),
            format!("method = \"{}\"", self.method),
            format!("scenario = \"{}\"", self.scenario),
            format!("n_tlm = {}", self.n_tlm),
            format!("distribution = \"{}\"", self.distribution),
        ];
        match self.delta {
            Some(d) => v.push(format!("delta = {d:?}")),
            None => v.push(format!("beta = {:?}", self.beta)),
        }
        v.push(format!("tau_max = {:?}", self.tau_max));
        v.push(format!("steps = {}", self.steps));
        v.push(format!("tail_tol = {:?}", self.tail_tol));
        if let Some(n) = self.n_trunc {
            v.push(format!("n_trunc = {n}"));
        }
        if self.observable == ObservableKind::S2 && self.method == Method::Exact {
            v.push(format!("pairing = \"{}\"", self.pairing));
        }
        v
    }

    pub fn density(&self) -> Result<PhotonDensity> {
        PhotonDensity::from_spec(&self.distribution, TailPolicy { tail_tol: self.tail_tol, n_trunc: self.n_trunc })
    }
}

/// Lines describing the truncation actually used.
pub fn truncation_lines(d: &PhotonDensity) -> Vec<String> {
    vec![format!("truncation: n_trunc_used = {}, tail_mass = {:.3e}", d.n_trunc, d.tail_mass)]
}

/// Computes the series a configuration describes.
pub fn compute(cfg: &RunConfig, engine: &Engine, density: &PhotonDensity) -> Result<ObservableSeries> {
    let taus = uniform_grid(cfg.tau_max, cfg.steps)?;
    let n = cfg.n_tlm;
    let need = |want: Scenario| -> Result<()> {
        if cfg.scenario != want {
            return Err(Error::Config(format!(
                "observable {} is defined for scenario {want}; use observable ee for {}",
                cfg.observable, cfg.scenario
            )));
        }
        Ok(())
    };
    match cfg.method {
        Method::Exact => match cfg.observable {
            ObservableKind::S1 => {
                need(Scenario::AllUp)?;
                engine.s1_all_up(n, cfg.beta, density, &taus)
            }
            ObservableKind::S2 => {
                need(Scenario::AllUp)?;
                engine.clone().with_pairing(cfg.pairing).s2_all_up(n, cfg.beta, density, &taus)
            }
            ObservableKind::S4 => {
                need(Scenario::AllDown)?;
                engine.s4_all_down(n, cfg.beta, density, &taus)
            }
            ObservableKind::Ee => {
                let state = make_tlm_state(cfg.scenario, n)?;
                engine.ee_general(n, cfg.beta, density, &state, &taus)
            }
        },
        Method::Afa => match cfg.observable {
            ObservableKind::S1 => {
                need(Scenario::AllUp)?;
                s1_afa(n, cfg.beta, density, &taus)
            }
            ObservableKind::S2 => {
                need(Scenario::AllUp)?;
                s2_afa(n, cfg.beta, density, &taus)
            }
            other => Err(Error::Config(format!("the AFA provides s1 and s2 only, not {other}"))),
        },
        Method::Closed => {
            let id = closed_form_for(cfg)?;
            eval_closed(id, density, cfg.beta, &taus)
        }
    }
}

fn closed_form_for(cfg: &RunConfig) -> Result<ClosedFormId> {
    let n = cfg.n_tlm;
    let id = match (cfg.observable, cfg.scenario) {
        (ObservableKind::Ee, Scenario::OneUpSpecified) => Some(ClosedFormId::OneUp { n_tlm: n, dicke: false }),
        (ObservableKind::Ee, Scenario::OneUpDicke) => Some(ClosedFormId::OneUp { n_tlm: n, dicke: true }),
        (ObservableKind::Ee, Scenario::TwoUpSpecified) => Some(ClosedFormId::TwoUp { n_tlm: n }),
        (ObservableKind::Ee, Scenario::AllUp) => match n {
            1 => Some(ClosedFormId::SpontN1),
            2 => Some(ClosedFormId::SpontN2),
            3 => Some(ClosedFormId::SpontN3),
            _ => None,
        },
        (ObservableKind::S1 | ObservableKind::S2, Scenario::AllUp) | (ObservableKind::S4, Scenario::AllDown) => {
            ClosedFormId::for_observable(cfg.observable, n, cfg.beta)
        }
        _ => None,
    };
    id.ok_or_else(|| {
        Error::Config(format!(
            "no closed form for observable {} with scenario {}, N = {n}, beta = {}",
            cfg.observable, cfg.scenario, cfg.beta
        ))
    })
}
