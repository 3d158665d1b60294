//! Figure-reproduction presets.

use std::fmt;
use std::str::FromStr;

use crate::afa::{coefficient_sums, q_difference_table};
use crate::dynamics::{Engine, ObservableKind, Scenario};
use crate::error::{Error, Result};

use super::config::{compute, truncation_lines, Method, RunConfig};
use super::output::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    FigE1,
    FigE2,
    FigF1,
    FigB1,
    FigB2,
    FigB3,
    FigB4,
    CollapseRevival,
}

impl Preset {
    pub const ALL: [Preset; 10] = [
        Preset::Fig1,
        Preset::Fig2,
        Preset::FigE1,
        Preset::FigE2,
        Preset::FigF1,
        Preset::FigB1,
        Preset::FigB2,
        Preset::FigB3,
        Preset::FigB4,
        Preset::CollapseRevival,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::FigE1 => "figE1",
            Preset::FigE2 => "figE2",
            Preset::FigF1 => "figF1",
            Preset::FigB1 => "figB1",
            Preset::FigB2 => "figB2",
            Preset::FigB3 => "figB3",
            Preset::FigB4 => "figB4",
            Preset::CollapseRevival => "collapse_revival",
        }
    }

    /// Human-readable description of the figure reproduced.
    pub fn figure(self) -> &'static str {
        match self {
            Preset::Fig1 => "Figure 1: S1 for 4 TLMs, coherent nbar = 100; resonant and Delta = 25; exact and AFA",
            Preset::Fig2 => "Figure 2: S1 for 4 TLMs, thermal nbar = 30, Delta = 100; exact and AFA",
            Preset::FigE1 => "Figure E1: spontaneous emission of 50 TLMs, all up, empty field, resonance",
            Preset::FigE2 => "Figure E2: 50 TLMs in the half-up Dicke state, empty field (decay and revival of oscillation)",
            Preset::FigF1 => "Figure F1: 10 TLMs, fock(4) and coherent(4); all up and all down",
            Preset::FigB1 => "Figure B1: q differences within one block for 4 TLMs",
            Preset::FigB2 => "Figure B2: q differences between adjacent blocks (S2) for 4 TLMs",
            Preset::FigB3 => "Figure B3: S1 coefficient sums by eigenvector gap for 4 TLMs",
            Preset::FigB4 => "Figure B4: S2 coefficient sums for gaps 0 and 1, 10 TLMs, beta = 10",
            Preset::CollapseRevival => "Collapse and revival: 1 TLM, coherent nbar = 100, resonance",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            Error::Config(format!("unknown preset `{s}` (one of {})", names.join(", ")))
        })
    }
}

/// The detuning used for a preset's non-resonant curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detuning {
    pub beta: f64,
    pub delta: Option<f64>,
}

impl Detuning {
    pub fn from_delta(delta: f64) -> Self {
        Self { beta: 2.0 * delta.sqrt(), delta: Some(delta) }
    }

    fn label(&self) -> String {
        match self.delta {
            Some(d) => format!("delta{d}"),
            None => format!("beta{}", self.beta),
        }
    }
}

struct Curve {
    label: String,
    cfg: RunConfig,
}

#[allow(clippy::too_many_arguments)]
fn curve(
    label: impl Into<String>,
    observable: ObservableKind,
    method: Method,
    scenario: Scenario,
    n_tlm: u32,
    distribution: &str,
    det: Detuning,
    tau_max: f64,
    steps: usize,
) -> Curve {
    Curve {
        label: label.into(),
        cfg: RunConfig {
            observable,
            method,
            scenario,
            n_tlm,
            distribution: distribution.to_string(),
            beta: det.beta,
            delta: det.delta,
            tau_max,
            steps,
            tail_tol: crate::distributions::DEFAULT_TAIL_TOL,
            n_trunc: None,
            threads: None,
            output: None,
            svg: None,
            pairing: Default::default(),
        },
    }
}

const RESONANT: Detuning = Detuning { beta: 0.0, delta: None };

/// Builds the preset's table. `detuning` overrides the default non-resonant
/// setting where the preset has one.
pub fn run_preset(preset: Preset, detuning: Option<Detuning>, engine: &Engine) -> Result<Table> {
    use Method::{Afa, Exact};
    use ObservableKind::{Ee, S1};
    use Scenario::{AllDown, AllUp, HalfUp};
    let mut meta = vec![format!("preset = {}", preset.name()), format!("figure: {}", preset.figure())];
    let curves = match preset {
        Preset::Fig1 => {
            let off = detuning.unwrap_or(Detuning::from_delta(25.0));
            let d = "coherent:100";
            vec![
                curve("exact_resonant", S1, Exact, AllUp, 4, d, RESONANT, 40.0, 2001),
                curve("afa_resonant", S1, Afa, AllUp, 4, d, RESONANT, 40.0, 2001),
                curve(format!("exact_{}", off.label()), S1, Exact, AllUp, 4, d, off, 40.0, 2001),
                curve(format!("afa_{}", off.label()), S1, Afa, AllUp, 4, d, off, 40.0, 2001),
            ]
        }
        Preset::Fig2 => {
            let off = detuning.unwrap_or(Detuning::from_delta(100.0));
            let d = "thermal:30";
            vec![
                curve("exact", S1, Exact, AllUp, 4, d, off, 40.0, 2001),
                curve("afa", S1, Afa, AllUp, 4, d, off, 40.0, 2001),
            ]
        }
        Preset::FigE1 => vec![curve("ee", Ee, Exact, AllUp, 50, "fock:0", RESONANT, 2.0, 2001)],
        Preset::FigE2 => vec![curve("ee", Ee, Exact, HalfUp, 50, "fock:0", RESONANT, 4.0, 2001)],
        Preset::FigF1 => {
            let mut v = Vec::new();
            for d in ["fock:4", "coherent:4"] {
                for sc in [AllUp, AllDown] {
                    let label = format!("{}_{}", d.replace(':', ""), sc);
                    v.push(curve(label, Ee, Exact, sc, 10, d, RESONANT, 20.0, 2001));
                }
            }
            v
        }
        Preset::CollapseRevival => vec![curve("s1", S1, Exact, AllUp, 1, "coherent:100", RESONANT, 100.0, 4001)],
        Preset::FigB1 | Preset::FigB2 | Preset::FigB3 => {
            let off = detuning.unwrap_or(Detuning::from_delta(25.0));
            meta.push(format!("non-resonant curves use {} (beta = {:?}); override with --beta/--delta", off.label(), off.beta));
            return spectral_preset(preset, meta, &[RESONANT, off], 4, engine);
        }
        Preset::FigB4 => {
            let det = detuning.unwrap_or(Detuning { beta: 10.0, delta: None });
            return spectral_preset(preset, meta, &[det], 10, engine);
        }
    };
    time_preset(meta, curves, engine)
}

fn time_preset(mut meta: Vec<String>, curves: Vec<Curve>, engine: &Engine) -> Result<Table> {
    let mut columns = vec!["tau".to_string()];
    let mut data: Vec<Vec<f64>> = Vec::new();
    let mut taus = Vec::new();
    for c in &curves {
        let density = c.cfg.density()?;
        let s = compute(&c.cfg, engine, &density)?;
        meta.push(format!("curve {}: {}", c.label, c.cfg.header_lines().join("; ")));
        meta.push(format!("curve {}: {}", c.label, truncation_lines(&density).join("; ")));
        if taus.is_empty() {
            taus = s.tau.clone();
        } else if taus != s.tau {
            return Err(Error::Config("preset curves must share one time grid".into()));
        }
        if s.is_complex() {
            columns.push(format!("{}_re", c.label));
            columns.push(format!("{}_im", c.label));
            data.push(s.re());
            data.push(s.im());
        } else {
            columns.push(c.label.clone());
            data.push(s.re());
        }
    }
    let mut t = Table::new(meta, columns);
    t.rows = taus
        .iter()
        .enumerate()
        .map(|(i, &tau)| std::iter::once(tau).chain(data.iter().map(|col| col[i])).collect())
        .collect();
    Ok(t)
}

const B_PHOTONS: u64 = 100;

fn spectral_preset(preset: Preset, mut meta: Vec<String>, dets: &[Detuning], n_tlm: u32, engine: &Engine) -> Result<Table> {
    meta.push(format!("n_tlm = {n_tlm}"));
    meta.push(format!("photons n = 0..={B_PHOTONS}"));
    let cache = engine.cache();
    let mut columns = vec!["n".to_string()];
    let mut data: Vec<Vec<f64>> = Vec::new();
    for det in dets {
        let tag = if det.beta == 0.0 { "res".to_string() } else { det.label() };
        match preset {
            Preset::FigB1 | Preset::FigB2 => {
                for k in 1..=n_tlm {
                    let rows = q_difference_table(cache, n_tlm, det.beta, 0..=B_PHOTONS, k)?;
                    for j in 0..=(n_tlm - k) as usize {
                        columns.push(format!("{tag}_k{k}_j{j}"));
                        data.push(
                            rows.iter()
                                .map(|r| if preset == Preset::FigB1 { r.same_block[j] } else { r.adjacent[j] })
                                .collect(),
                        );
                    }
                    columns.push(format!("{tag}_k{k}_afa"));
                    data.push(rows.iter().map(|r| r.afa).collect());
                }
            }
            Preset::FigB3 => {
                for k in 1..=n_tlm as i32 {
                    let sums = sums_over_n(engine, n_tlm, det.beta, k)?;
                    columns.push(format!("{tag}_k{k}"));
                    data.push(sums.iter().map(|s| s.s1_sum.unwrap_or(f64::NAN)).collect());
                    columns.push(format!("{tag}_k{k}_afa"));
                    data.push(sums.iter().map(|s| s.s1_afa).collect());
                }
            }
            Preset::FigB4 => {
                for k in [0, 1] {
                    let sums = sums_over_n(engine, n_tlm, det.beta, k)?;
                    columns.push(format!("{tag}_k{k}"));
                    data.push(sums.iter().map(|s| s.s2_sum).collect());
                    columns.push(format!("{tag}_k{k}_afa"));
                    data.push(sums.iter().map(|s| s.s2_afa).collect());
                }
            }
            _ => unreachable!("not a spectral preset"),
        }
    }
    let mut t = Table::new(meta, columns);
    t.rows = (0..=B_PHOTONS as usize)
        .map(|i| std::iter::once(i as f64).chain(data.iter().map(|col| col[i])).collect())
        .collect();
    Ok(t)
}

fn sums_over_n(engine: &Engine, n_tlm: u32, beta: f64, k: i32) -> Result<Vec<crate::afa::CoefficientSums>> {
    use rayon::prelude::*;
    (0..=B_PHOTONS)
        .into_par_iter()
        .map(|n| coefficient_sums(engine.cache(), n_tlm, beta, n, k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("fig9".parse::<Preset>().is_err());
    }

    #[test]
    fn b4_is_well_formed() {
        let t = run_preset(Preset::FigB4, None, &Engine::new()).unwrap();
        assert_eq!(t.columns, ["n", "beta10_k0", "beta10_k0_afa", "beta10_k1", "beta10_k1_afa"]);
        assert_eq!(t.rows.len(), B_PHOTONS as usize + 1);
        assert!(t.meta.iter().any(|m| m.starts_with("figure: Figure B4")));
    }
}
