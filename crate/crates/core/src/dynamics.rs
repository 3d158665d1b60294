//! Exact time evolution of the field observables.
//!
//! Each initial product state `|k photons⟩ ⊗ |r, m⟩` lives in a single
//! `(r, c = k + m)` block, so every observable reduces to sums over block
//! eigensystems. With `A` the eigenvectors and `q` the effective
//! eigenvalues, the expected change of any photon-number offset `o_p` from
//! initial basis index `p0` is
//!
//! ```text
//! ⟨o⟩(τ) = −4 Σ_{j<j'} sin²((q_j − q_j')τ/2) · A_{p0 j} A_{p0 j'} · Σ_p o_p A_{p j} A_{p j'}
//! ```
//!
//! which vanishes at `τ = 0` exactly and makes each eigenvector appear an
//! even number of times, so outputs do not depend on eigenvector signs.
//!
//! Determinism: per-`τ` values are accumulated over blocks in ascending
//! photon order with compensated summation; parallelism is only across
//! independent `τ` points and independent block solves, so the result is
//! bit-identical for any thread count.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::PhotonDensity;
use crate::error::{Error, Result};
use crate::model::{block_for, check_cooperation, HalfInt};
use crate::numeric::{sin2, Kahan, KahanComplex};
use crate::spectral::{BlockEigensystem, SpectralCache};

/// Which quantity a series holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    /// Photon gain with all molecules initially up: `⟨E⁻E⁺⟩ = n̄ + S₁`.
    S1,
    /// Slowly varying complex amplitude of `⟨E⁻⟩`.
    S2,
    /// Photon loss with all molecules initially down: `⟨E⁻E⁺⟩ = n̄ − S₄`.
    S4,
    /// `⟨E⁻E⁺⟩` for a general diagonal molecular state.
    Ee,
}

impl fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObservableKind::S1 => "s1",
            ObservableKind::S2 => "s2",
            ObservableKind::S4 => "s4",
            ObservableKind::Ee => "ee",
        })
    }
}

impl FromStr for ObservableKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "s1" => Ok(ObservableKind::S1),
            "s2" => Ok(ObservableKind::S2),
            "s4" => Ok(ObservableKind::S4),
            "ee" => Ok(ObservableKind::Ee),
            other => Err(Error::Config(format!("unknown observable `{other}` (expected s1|s2|s4|ee)"))),
        }
    }
}

/// Real or complex sample values.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesValues {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// An observable sampled on a strictly increasing dimensionless time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub tau: Vec<f64>,
    pub values: SeriesValues,
    pub kind: ObservableKind,
}

impl ObservableSeries {
    pub fn real(kind: ObservableKind, tau: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(tau.len(), values.len());
        Self { tau, values: SeriesValues::Real(values), kind }
    }

    pub fn complex(kind: ObservableKind, tau: Vec<f64>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(tau.len(), values.len());
        Self { tau, values: SeriesValues::Complex(values), kind }
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.values, SeriesValues::Complex(_))
    }

    /// Real parts of the samples.
    pub fn re(&self) -> Vec<f64> {
        match &self.values {
            SeriesValues::Real(v) => v.clone(),
            SeriesValues::Complex(v) => v.iter().map(|z| z.re).collect(),
        }
    }

    /// Imaginary parts (zeros for a real series).
    pub fn im(&self) -> Vec<f64> {
        match &self.values {
            SeriesValues::Real(v) => vec![0.0; v.len()],
            SeriesValues::Complex(v) => v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn at(&self, i: usize) -> Complex64 {
        match &self.values {
            SeriesValues::Real(v) => Complex64::new(v[i], 0.0),
            SeriesValues::Complex(v) => v[i],
        }
    }

    /// Largest pointwise modulus of the difference to `other` (same grid).
    pub fn max_abs_diff(&self, other: &ObservableSeries) -> f64 {
        assert_eq!(self.len(), other.len(), "series lengths differ");
        (0..self.len()).map(|i| (self.at(i) - other.at(i)).norm()).fold(0.0, f64::max)
    }
}

/// Uniform grid of `points` samples on `[0, tau_max]`.
pub fn uniform_grid(tau_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(tau_max > 0.0) || !tau_max.is_finite() {
        return Err(Error::param("tau_max must be positive and finite"));
    }
    if points < 2 {
        return Err(Error::param("a time grid needs at least two points"));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| tau_max * (i as f64 / last)).collect())
}

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("time grid contains non-finite values"));
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("time grid must be strictly increasing"));
    }
    Ok(())
}

fn check_density(d: &PhotonDensity) -> Result<()> {
    if d.diag.len() as u64 != d.n_trunc + 1 || d.superdiag.len() as u64 != d.n_trunc {
        return Err(Error::Truncation(format!(
            "density arrays do not cover the truncation range 0..={}",
            d.n_trunc
        )));
    }
    if d.diag.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::param("density diagonal must be non-negative"));
    }
    let mass = d.total_mass();
    if mass < 1.0 - d.tail_mass.max(0.0) - 1e-9 {
        return Err(Error::Truncation(format!(
            "density retains mass {mass:.15} but reports tail mass {:.3e}",
            d.tail_mass
        )));
    }
    Ok(())
}

/// One component `(r, m, weight)` of a diagonal molecular state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlmComponent {
    pub r: HalfInt,
    pub m: HalfInt,
    pub weight: f64,
}

/// A diagonal mixture of Dicke states `|r, m⟩` with degeneracy-inclusive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlmInitialState {
    n_tlm: u32,
    entries: Vec<TlmComponent>,
}

impl TlmInitialState {
    pub fn new(n_tlm: u32, entries: Vec<TlmComponent>) -> Result<Self> {
        if n_tlm == 0 {
            return Err(Error::param("N must be at least 1"));
        }
        let mut total = Kahan::new();
        for e in &entries {
            check_cooperation(n_tlm, e.r)?;
            if e.m.twice().abs() > e.r.twice() || (e.r - e.m).twice() % 2 != 0 {
                return Err(Error::param(format!("m={} is out of range for r={}", e.m, e.r)));
            }
            if !(e.weight >= 0.0) || !e.weight.is_finite() {
                return Err(Error::param("state weights must be finite and non-negative"));
            }
            total.add(e.weight);
        }
        if (total.value() - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("state weights sum to {}, not 1", total.value())));
        }
        Ok(Self { n_tlm, entries })
    }

    pub fn n_tlm(&self) -> u32 {
        self.n_tlm
    }

    pub fn entries(&self) -> &[TlmComponent] {
        &self.entries
    }
}

/// Named initial molecular states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    AllUp,
    AllDown,
    /// Symmetric Dicke state `|N/2, m⟩`.
    Dicke(HalfInt),
    /// One specified molecule up, the rest down.
    OneUpSpecified,
    /// The symmetric one-excitation Dicke state.
    OneUpDicke,
    /// Two specified molecules up, the rest down (`N ≥ 3`).
    TwoUpSpecified,
    /// Dicke state with `m = 0` (even `N`) or `m = ½` (odd `N`).
    HalfUp,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::AllUp => f.write_str("all_up"),
            Scenario::AllDown => f.write_str("all_down"),
            Scenario::Dicke(m) => write!(f, "dicke:{}", m.as_f64()),
            Scenario::OneUpSpecified => f.write_str("one_up_specified"),
            Scenario::OneUpDicke => f.write_str("one_up_dicke"),
            Scenario::TwoUpSpecified => f.write_str("two_up_specified"),
            Scenario::HalfUp => f.write_str("half_up"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(m) = s.strip_prefix("dicke:") {
            let m: f64 = m
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("dicke projection `{m}` is not a number")))?;
            return HalfInt::from_f64(m).map(Scenario::Dicke).map_err(|e| Error::Config(e.to_string()));
        }
        match s {
            "all_up" => Ok(Scenario::AllUp),
            "all_down" => Ok(Scenario::AllDown),
            "one_up_specified" => Ok(Scenario::OneUpSpecified),
            "one_up_dicke" => Ok(Scenario::OneUpDicke),
            "two_up_specified" => Ok(Scenario::TwoUpSpecified),
            "half_up" => Ok(Scenario::HalfUp),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Builds the molecular state of a named scenario for `N` molecules.
pub fn make_tlm_state(scenario: Scenario, n_tlm: u32) -> Result<TlmInitialState> {
    if n_tlm == 0 {
        return Err(Error::param("N must be at least 1"));
    }
    let top = HalfInt::half_of(n_tlm);
    let one = HalfInt::from_int(1);
    let two = HalfInt::from_int(2);
    let nf = n_tlm as f64;
    let comp = |r: HalfInt, m: HalfInt, weight: f64| TlmComponent { r, m, weight };
    let entries = match scenario {
        Scenario::AllUp => vec![comp(top, top, 1.0)],
        Scenario::AllDown => vec![comp(top, -top, 1.0)],
        Scenario::Dicke(m) => vec![comp(top, m, 1.0)],
        Scenario::HalfUp => vec![comp(top, HalfInt::from_twice((n_tlm % 2) as i64), 1.0)],
        Scenario::OneUpDicke => vec![comp(top, one - top, 1.0)],
        Scenario::OneUpSpecified => {
            let mut v = vec![comp(top, one - top, 1.0 / nf)];
            if n_tlm >= 2 {
                // Dynamically inert: m = −r is the bottom of its multiplet.
                v.push(comp(top - one, one - top, (nf - 1.0) / nf));
            }
            v
        }
        Scenario::TwoUpSpecified => {
            if n_tlm < 3 {
                return Err(Error::param("two_up_specified needs N ≥ 3"));
            }
            let w_top = 2.0 / (nf * (nf - 1.0));
            let mut v = vec![comp(top, two - top, w_top)];
            // The r = N/2 − 1 weight 2/N is entered as N − 1 identical components.
            for _ in 0..n_tlm - 1 {
                v.push(comp(top - one, two - top, 2.0 / (nf * (nf - 1.0))));
            }
            let rest = 1.0 - w_top - 2.0 / nf;
            if n_tlm >= 4 && rest > 0.0 {
                v.push(comp(top - two, two - top, rest));
            }
            v
        }
    };
    TlmInitialState::new(n_tlm, entries)
}

/// How eigenvector factors are paired with phases in the coherent amplitude S₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum S2Pairing {
    /// Each `(block, j)` enters once with its amplitude and once with its phase
    /// from the same propagator factor. Physically exact and sign-invariant.
    #[default]
    Consistent,
    /// Superscripts attached as in the historical printed expression:
    /// `A^{c+1}_{0j} A^{c}_{kj} A^{c}_{kj'} A^{c+1}_{0j'}` with phase
    /// `q^c_j − q^{c+1}_{j'} − β`. Depends on the eigenvector sign convention;
    /// kept to reproduce published resonant closed forms.
    Printed,
}

impl fmt::Display for S2Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            S2Pairing::Consistent => "consistent",
            S2Pairing::Printed => "printed",
        })
    }
}

impl FromStr for S2Pairing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "consistent" => Ok(S2Pairing::Consistent),
            "printed" => Ok(S2Pairing::Printed),
            other => Err(Error::Config(format!("unknown S2 pairing `{other}`"))),
        }
    }
}

/// `weight · (base + Σ coef · sin²(freq · τ))` for one block contribution.
#[derive(Debug, Clone)]
struct Sin2Terms {
    weight: f64,
    base: f64,
    terms: Vec<(f64, f64)>,
}

impl Sin2Terms {
    #[inline]
    fn eval(&self, tau: f64) -> f64 {
        let mut acc = self.base;
        for &(freq, coef) in &self.terms {
            acc += coef * sin2(freq * tau);
        }
        self.weight * acc
    }

    fn mean(&self) -> f64 {
        self.weight * (self.base + 0.5 * self.terms.iter().map(|t| t.1).sum::<f64>())
    }
}

/// `weight · Σ coef · e^{i freq τ}` for one block pair.
#[derive(Debug, Clone)]
struct PhaseTerms {
    weight: f64,
    terms: Vec<(f64, f64)>,
}

/// Transfer terms for initial basis index `p0` and offsets `o_p`.
fn transfer_terms(es: &BlockEigensystem, p0: usize, offset: impl Fn(usize) -> f64) -> Vec<(f64, f64)> {
    let d = es.dim();
    let mut out = Vec::with_capacity(d * d.saturating_sub(1) / 2);
    let offs: Vec<f64> = (0..d).map(&offset).collect();
    for j in 0..d {
        for jp in j + 1..d {
            let mut m = 0.0;
            for (p, &o) in offs.iter().enumerate() {
                if o != 0.0 {
                    m += o * es.a(p, j) * es.a(p, jp);
                }
            }
            let coef = -4.0 * es.a(p0, j) * es.a(p0, jp) * m;
            out.push((0.5 * (es.q[j] - es.q[jp]), coef));
        }
    }
    out
}

/// The exact engine: a spectral cache plus the S₂ pairing choice.
#[derive(Debug, Clone, Default)]
pub struct Engine {
    cache: Arc<SpectralCache>,
    pairing: S2Pairing,
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Shares an existing spectral cache.
    pub fn with_cache(cache: Arc<SpectralCache>) -> Self {
        Self { cache, pairing: S2Pairing::default() }
    }

    pub fn with_pairing(mut self, pairing: S2Pairing) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn pairing(&self) -> S2Pairing {
        self.pairing
    }

    pub fn cache(&self) -> &SpectralCache {
        &self.cache
    }

    fn all_up_terms(&self, n_tlm: u32, beta: f64, density: &PhotonDensity) -> Result<Vec<Sin2Terms>> {
        check_density(density)?;
        let top = HalfInt::half_of(n_tlm);
        let photons: Vec<usize> = (0..density.diag.len()).filter(|&n| density.diag[n] > 0.0).collect();
        photons
            .par_iter()
            .map(|&n| {
                let es = self.cache.get(top, top + HalfInt::from_int(n as i64), beta)?;
                Ok(Sin2Terms { weight: density.diag[n], base: 0.0, terms: transfer_terms(&es, 0, |p| p as f64) })
            })
            .collect()
    }

    fn all_down_terms(&self, n_tlm: u32, beta: f64, density: &PhotonDensity) -> Result<Vec<Sin2Terms>> {
        check_density(density)?;
        let top = HalfInt::half_of(n_tlm);
        let photons: Vec<usize> = (1..density.diag.len()).filter(|&n| density.diag[n] > 0.0).collect();
        photons
            .par_iter()
            .map(|&n| {
                let es = self.cache.get(top, HalfInt::from_int(n as i64) - top, beta)?;
                let p0 = es.dim() - 1;
                Ok(Sin2Terms {
                    weight: density.diag[n],
                    base: 0.0,
                    terms: transfer_terms(&es, p0, |p| (p0 - p) as f64),
                })
            })
            .collect()
    }

    fn general_terms(
        &self,
        beta: f64,
        density: &PhotonDensity,
        state: &TlmInitialState,
    ) -> Result<Vec<Sin2Terms>> {
        check_density(density)?;
        let mut jobs = Vec::new();
        for e in state.entries().iter().filter(|e| e.weight > 0.0) {
            for (k, &pk) in density.diag.iter().enumerate() {
                if pk > 0.0 {
                    jobs.push((*e, k));
                }
            }
        }
        jobs.par_iter()
            .map(|&(e, k)| {
                let c = HalfInt::from_int(k as i64) + e.m;
                let block = block_for(e.r, c)?;
                let p0 = block.index_of(k as u64).ok_or_else(|| {
                    Error::Truncation(format!("photon number {k} lies outside block {block}"))
                })?;
                let weight = e.weight * density.diag[k];
                let terms = if block.dim() == 1 {
                    Vec::new()
                } else {
                    let es = self.cache.get(e.r, c, beta)?;
                    transfer_terms(&es, p0, |p| p as f64 - p0 as f64)
                };
                Ok(Sin2Terms { weight, base: k as f64, terms })
            })
            .collect()
    }

    fn s2_terms(&self, n_tlm: u32, beta: f64, density: &PhotonDensity) -> Result<Vec<PhaseTerms>> {
        check_density(density)?;
        let top = HalfInt::half_of(n_tlm);
        let pairing = self.pairing;
        let photons: Vec<usize> = (0..density.superdiag.len()).filter(|&n| density.superdiag[n] != 0.0).collect();
        photons
            .par_iter()
            .map(|&n| {
                let c = top + HalfInt::from_int(n as i64);
                let lo = self.cache.get(top, c, beta)?;
                let hi = self.cache.get(top, c + HalfInt::from_int(1), beta)?;
                let d = lo.dim();
                let root: Vec<f64> = (0..d).map(|p| ((n + p + 1) as f64).sqrt()).collect();
                let mut terms = Vec::with_capacity(d * d);
                for j in 0..d {
                    for jp in 0..d {
                        let coef = match pairing {
                            S2Pairing::Consistent => {
                                let g: f64 = (0..d).map(|p| root[p] * lo.a(p, j) * hi.a(p, jp)).sum();
                                lo.a(0, j) * hi.a(0, jp) * g
                            }
                            S2Pairing::Printed => {
                                let g: f64 = (0..d).map(|p| root[p] * lo.a(p, j) * lo.a(p, jp)).sum();
                                hi.a(0, j) * hi.a(0, jp) * g
                            }
                        };
                        terms.push((lo.q[j] - hi.q[jp] - beta, coef));
                    }
                }
                Ok(PhaseTerms { weight: density.superdiag[n], terms })
            })
            .collect()
    }

    fn eval_real(kind: ObservableKind, parts: &[Sin2Terms], taus: &[f64]) -> ObservableSeries {
        let values = taus
            .par_iter()
            .map(|&t| {
                let mut acc = Kahan::new();
                for part in parts {
                    acc.add(part.eval(t));
                }
                acc.value()
            })
            .collect();
        ObservableSeries::real(kind, taus.to_vec(), values)
    }

    fn mean_real(parts: &[Sin2Terms]) -> f64 {
        let mut acc = Kahan::new();
        parts.iter().for_each(|p| acc.add(p.mean()));
        acc.value()
    }

    /// `S₁(τ)`: photon gain when every molecule starts in the upper state.
    pub fn s1_all_up(&self, n_tlm: u32, beta: f64, density: &PhotonDensity, taus: &[f64]) -> Result<ObservableSeries> {
        check_n(n_tlm)?;
        check_taus(taus)?;
        let parts = self.all_up_terms(n_tlm, beta, density)?;
        Ok(Self::eval_real(ObservableKind::S1, &parts, taus))
    }

    /// `S₄(τ)`: photon loss when every molecule starts in the lower state.
    pub fn s4_all_down(&self, n_tlm: u32, beta: f64, density: &PhotonDensity, taus: &[f64]) -> Result<ObservableSeries> {
        check_n(n_tlm)?;
        check_taus(taus)?;
        let parts = self.all_down_terms(n_tlm, beta, density)?;
        Ok(Self::eval_real(ObservableKind::S4, &parts, taus))
    }

    /// `⟨E⁻E⁺⟩(τ)` (in units of `|γ/μ|²`) for a diagonal molecular state.
    pub fn ee_general(
        &self,
        n_tlm: u32,
        beta: f64,
        density: &PhotonDensity,
        state: &TlmInitialState,
        taus: &[f64],
    ) -> Result<ObservableSeries> {
        check_n(n_tlm)?;
        check_taus(taus)?;
        if state.n_tlm() != n_tlm {
            return Err(Error::param("molecular state was built for a different N"));
        }
        let parts = self.general_terms(beta, density, state)?;
        Ok(Self::eval_real(ObservableKind::Ee, &parts, taus))
    }

    /// `S₂(τ)`: the complex field amplitude with the carrier removed.
    pub fn s2_all_up(&self, n_tlm: u32, beta: f64, density: &PhotonDensity, taus: &[f64]) -> Result<ObservableSeries> {
        check_n(n_tlm)?;
        check_taus(taus)?;
        let parts = self.s2_terms(n_tlm, beta, density)?;
        let values = taus
            .par_iter()
            .map(|&t| {
                let mut acc = KahanComplex::new();
                for part in &parts {
                    let mut z = Complex64::new(0.0, 0.0);
                    for &(freq, coef) in &part.terms {
                        let (s, c) = (freq * t).sin_cos();
                        z += Complex64::new(coef * c, coef * s);
                    }
                    acc.add(z * part.weight);
                }
                acc.value()
            })
            .collect();
        Ok(ObservableSeries::complex(ObservableKind::S2, taus.to_vec(), values))
    }

    /// Time-independent part of `S₂` (terms whose frequency vanishes).
    pub fn s2_constant_term(&self, n_tlm: u32, beta: f64, density: &PhotonDensity) -> Result<f64> {
        check_n(n_tlm)?;
        let parts = self.s2_terms(n_tlm, beta, density)?;
        let mut acc = Kahan::new();
        for part in &parts {
            let scale = part.terms.iter().map(|t| t.0.abs()).fold(1.0, f64::max);
            let s: f64 = part.terms.iter().filter(|t| t.0.abs() <= 1e-9 * scale).map(|t| t.1).sum();
            acc.add(part.weight * s);
        }
        Ok(acc.value())
    }

    /// Infinite-time average of `S₁`.
    pub fn s1_stationary_mean(&self, n_tlm: u32, beta: f64, density: &PhotonDensity) -> Result<f64> {
        check_n(n_tlm)?;
        Ok(Self::mean_real(&self.all_up_terms(n_tlm, beta, density)?))
    }

    /// Infinite-time average of `S₄`.
    pub fn s4_stationary_mean(&self, n_tlm: u32, beta: f64, density: &PhotonDensity) -> Result<f64> {
        check_n(n_tlm)?;
        Ok(Self::mean_real(&self.all_down_terms(n_tlm, beta, density)?))
    }

    /// Infinite-time average of `⟨E⁻E⁺⟩`.
    pub fn ee_stationary_mean(
        &self,
        n_tlm: u32,
        beta: f64,
        density: &PhotonDensity,
        state: &TlmInitialState,
    ) -> Result<f64> {
        check_n(n_tlm)?;
        if state.n_tlm() != n_tlm {
            return Err(Error::param("molecular state was built for a different N"));
        }
        Ok(Self::mean_real(&self.general_terms(beta, density, state)?))
    }
}

fn check_n(n_tlm: u32) -> Result<()> {
    if n_tlm == 0 {
        return Err(Error::param("N must be at least 1"));
    }
    Ok(())
}

/// [`Engine::s1_all_up`] with a private cache.
pub fn s1_all_up(n_tlm: u32, beta: f64, density: &PhotonDensity, taus: &[f64]) -> Result<ObservableSeries> {
    Engine::new().s1_all_up(n_tlm, beta, density, taus)
}

/// [`Engine::s2_all_up`] with a private cache and the default pairing.
pub fn s2_all_up(n_tlm: u32, beta: f64, density: &PhotonDensity, taus: &[f64]) -> Result<ObservableSeries> {
    Engine::new().s2_all_up(n_tlm, beta, density, taus)
}

/// [`Engine::s4_all_down`] with a private cache.
pub fn s4_all_down(n_tlm: u32, beta: f64, density: &PhotonDensity, taus: &[f64]) -> Result<ObservableSeries> {
    Engine::new().s4_all_down(n_tlm, beta, density, taus)
}

/// [`Engine::ee_general`] with a private cache.
pub fn ee_general(
    n_tlm: u32,
    beta: f64,
    density: &PhotonDensity,
    state: &TlmInitialState,
    taus: &[f64],
) -> Result<ObservableSeries> {
    Engine::new().ee_general(n_tlm, beta, density, state, taus)
}

/// Quadratic short-time coefficient `lim S(τ)/τ²`.
///
/// Uses the first two positive samples and one Richardson step, which
/// cancels the `τ⁴` correction of an even function vanishing at zero.
pub fn short_time_rate(series: &ObservableSeries) -> Result<f64> {
    if series.is_complex() {
        return Err(Error::param("short-time rate needs a real series"));
    }
    let re = series.re();
    let positive: Vec<(f64, f64)> =
        series.tau.iter().zip(&re).filter(|(t, _)| **t > 0.0).map(|(t, v)| (*t, *v)).take(2).collect();
    if positive.len() < 2 || positive[0].0 > 1e-3 {
        return Err(Error::param("series is not sampled near τ = 0 (need two samples with 0 < τ, first ≤ 1e-3)"));
    }
    // Remove the τ = 0 offset (n̄ for ⟨E⁻E⁺⟩) if the grid starts at zero.
    let offset = if series.tau.first() == Some(&0.0) { re[0] } else { 0.0 };
    let (t1, v1) = positive[0];
    let (t2, v2) = positive[1];
    let f1 = (v1 - offset) / (t1 * t1);
    let f2 = (v2 - offset) / (t2 * t2);
    Ok((t2 * t2 * f1 - t1 * t1 * f2) / (t2 * t2 - t1 * t1))
}
