//! Closed-form special cases, transcribed term by term.
//!
//! These are deliberately *not* simplified: they serve as independent
//! oracles for the numerical engine, so each keeps the grouping in which it
//! was originally published. Where a published expression contained an
//! evident misprint the correction is noted on the function.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::distributions::PhotonDensity;
use crate::dynamics::{ObservableKind, ObservableSeries};
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, sin2, Kahan, KahanComplex};

/// Identifies a closed-form expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedFormId {
    /// Resonant one-molecule photon gain.
    S1N1,
    /// Resonant one-molecule field amplitude.
    S2N1,
    /// Detuned one-molecule photon gain.
    S1N1Nr,
    /// Detuned one-molecule field amplitude (complex).
    S2N1Nr,
    /// Resonant two-molecule photon gain.
    S1N2,
    /// Resonant two-molecule field amplitude.
    S2N2,
    /// Resonant three-molecule photon gain.
    S1N3,
    /// Resonant three-molecule field amplitude.
    S2N3,
    /// Resonant four-molecule photon gain.
    S1N4,
    /// Spontaneous emission from the vacuum, one molecule.
    SpontN1,
    /// Spontaneous emission from the vacuum, two molecules.
    SpontN2,
    /// Spontaneous emission from the vacuum, three molecules.
    SpontN3,
    /// One excitation among `n_tlm` molecules: specified molecule (`dicke = false`)
    /// or symmetric Dicke state (`dicke = true`).
    OneUp { n_tlm: u32, dicke: bool },
    /// Two specified molecules excited among `n_tlm ≥ 3`.
    TwoUp { n_tlm: u32 },
    /// Detuned one-molecule absorption.
    S4N1Nr,
    /// Resonant two-molecule absorption.
    S4N2,
}

impl ClosedFormId {
    /// Observable produced by this form.
    pub fn kind(&self) -> ObservableKind {
        use ClosedFormId::*;
        match self {
            S1N1 | S1N1Nr | S1N2 | S1N3 | S1N4 | SpontN1 | SpontN2 | SpontN3 => ObservableKind::S1,
            S2N1 | S2N1Nr | S2N2 | S2N3 => ObservableKind::S2,
            S4N1Nr | S4N2 => ObservableKind::S4,
            OneUp { .. } | TwoUp { .. } => ObservableKind::Ee,
        }
    }

    /// Number of molecules the form describes.
    pub fn tlm_count(&self) -> u32 {
        use ClosedFormId::*;
        match self {
            S1N1 | S2N1 | S1N1Nr | S2N1Nr | SpontN1 | S4N1Nr => 1,
            S1N2 | S2N2 | SpontN2 | S4N2 => 2,
            S1N3 | S2N3 | SpontN3 => 3,
            S1N4 => 4,
            OneUp { n_tlm, .. } | TwoUp { n_tlm } => *n_tlm,
        }
    }

    /// Whether the form only holds at resonance.
    pub fn resonant_only(&self) -> bool {
        !matches!(self, ClosedFormId::S1N1Nr | ClosedFormId::S2N1Nr | ClosedFormId::S4N1Nr)
    }

    /// Whether the form assumes an initially empty field.
    pub fn vacuum_only(&self) -> bool {
        matches!(
            self,
            ClosedFormId::SpontN1
                | ClosedFormId::SpontN2
                | ClosedFormId::SpontN3
                | ClosedFormId::OneUp { .. }
                | ClosedFormId::TwoUp { .. }
        )
    }

    /// Looks up a form by CLI name for the given observable and `N`.
    pub fn for_observable(kind: ObservableKind, n_tlm: u32, beta: f64) -> Option<Self> {
        use ClosedFormId::*;
        let res = beta == 0.0;
        match (kind, n_tlm) {
            (ObservableKind::S1, 1) if res => Some(S1N1),
            (ObservableKind::S1, 1) => Some(S1N1Nr),
            (ObservableKind::S1, 2) if res => Some(S1N2),
            (ObservableKind::S1, 3) if res => Some(S1N3),
            (ObservableKind::S1, 4) if res => Some(S1N4),
            (ObservableKind::S2, 1) if res => Some(S2N1),
            (ObservableKind::S2, 1) => Some(S2N1Nr),
            (ObservableKind::S2, 2) if res => Some(S2N2),
            (ObservableKind::S2, 3) if res => Some(S2N3),
            (ObservableKind::S4, 1) => Some(S4N1Nr),
            (ObservableKind::S4, 2) if res => Some(S4N2),
            _ => None,
        }
    }
}

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.windows(2).any(|w| !(w[1] > w[0])) || taus.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("time grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// Evaluates a closed form on a time grid.
pub fn eval_closed(id: ClosedFormId, density: &PhotonDensity, beta: f64, taus: &[f64]) -> Result<ObservableSeries> {
    check_taus(taus)?;
    if id.resonant_only() && beta != 0.0 {
        return Err(Error::param(format!("{id:?} holds only at resonance (β = 0), got β = {beta}")));
    }
    if id.vacuum_only() && density.diag.first() != Some(&1.0) {
        return Err(Error::param(format!("{id:?} describes an initially empty field; use fock:0")));
    }
    let delta = beta * beta / 4.0;
    use ClosedFormId::*;
    let real = |w: &[f64], f: fn(f64, f64, f64) -> f64| {
        ObservableSeries::real(id.kind(), taus.to_vec(), weighted_sum(w, taus, delta, f))
    };
    Ok(match id {
        S1N1 => real(&density.diag, |n, t, _| s1_n1(n, t)),
        S1N1Nr => real(&density.diag, s1_n1_nr),
        S1N2 => real(&density.diag, |n, t, _| s1_n2(n, t)),
        S1N3 => real(&density.diag, |n, t, _| s1_n3(n, t)),
        S1N4 => real(&density.diag, |n, t, _| s1_n4(n, t)),
        S4N1Nr => real(&density.diag, s4_n1_nr),
        S4N2 => real(&density.diag, |n, t, _| s4_n2(n, t)),
        S2N1 => as_complex(real(&density.superdiag, |n, t, _| s2_n1(n, t))),
        S2N2 => as_complex(real(&density.superdiag, |n, t, _| s2_n2(n, t))),
        S2N3 => as_complex(real(&density.superdiag, |n, t, _| s2_n3(n, t))),
        S2N1Nr => {
            let values = taus
                .par_iter()
                .map(|&t| {
                    let mut acc = KahanComplex::new();
                    for (n, &w) in density.superdiag.iter().enumerate() {
                        if w != 0.0 {
                            acc.add(s2_n1_nr(n as f64, t, delta) * w);
                        }
                    }
                    acc.value()
                })
                .collect();
            ObservableSeries::complex(ObservableKind::S2, taus.to_vec(), values)
        }
        SpontN1 => vacuum(id, taus, spont_n1),
        SpontN2 => vacuum(id, taus, spont_n2),
        SpontN3 => vacuum(id, taus, spont_n3),
        OneUp { n_tlm, dicke } => {
            if n_tlm == 0 {
                return Err(Error::param("N must be at least 1"));
            }
            let nf = n_tlm as f64;
            let scale = if dicke { 1.0 } else { 1.0 / nf };
            ObservableSeries::real(id.kind(), taus.to_vec(), taus.iter().map(|&t| scale * sin2(nf.sqrt() * t)).collect())
        }
        TwoUp { n_tlm } => {
            if n_tlm < 3 {
                return Err(Error::param("the two-up form needs N ≥ 3"));
            }
            let nf = n_tlm as f64;
            ObservableSeries::real(id.kind(), taus.to_vec(), taus.iter().map(|&t| two_up(nf, t)).collect())
        }
    })
}

fn as_complex(s: ObservableSeries) -> ObservableSeries {
    let values = s.re().into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    ObservableSeries::complex(s.kind, s.tau, values)
}

fn vacuum(id: ClosedFormId, taus: &[f64], f: fn(f64) -> f64) -> ObservableSeries {
    ObservableSeries::real(id.kind(), taus.to_vec(), taus.iter().map(|&t| f(t)).collect())
}

/// `Σ_n w_n f(n, τ, Δ)` in ascending `n` with compensated summation.
fn weighted_sum(w: &[f64], taus: &[f64], delta: f64, f: fn(f64, f64, f64) -> f64) -> Vec<f64> {
    taus.par_iter()
        .map(|&t| {
            let mut acc = Kahan::new();
            for (n, &wn) in w.iter().enumerate() {
                if wn != 0.0 {
                    acc.add(wn * f(n as f64, t, delta));
                }
            }
            acc.value()
        })
        .collect()
}

fn s1_n1(n: f64, t: f64) -> f64 {
    sin2((n + 1.0).sqrt() * t)
}

fn s2_n1(n: f64, t: f64) -> f64 {
    let (a, b) = ((n + 1.0).sqrt(), (n + 2.0).sqrt());
    a * (a * t).cos() * (b * t).cos() + b * (a * t).sin() * (b * t).sin()
}

fn s1_n1_nr(n: f64, t: f64, delta: f64) -> f64 {
    (n + 1.0) / (n + 1.0 + delta) * sin2((n + 1.0 + delta).sqrt() * t)
}

/// Detuned one-molecule amplitude, transcribed literally.
///
/// This expression does not reproduce the exact dynamics (at `Δ = 0` it does
/// not reduce to the resonant form); it is kept verbatim as a published
/// reference and the engine is not expected to match it.
fn s2_n1_nr(n: f64, t: f64, delta: f64) -> Complex64 {
    let sd = delta.sqrt();
    let a = (n + 1.0 + delta).sqrt();
    let b = (n + 2.0 + delta).sqrt();
    let (x1, x2) = ((1.0 + n).sqrt(), (2.0 + n).sqrt());
    let k1 = (-x1 + x2) * sd + ((1.0 + n) * (n + 1.0 + delta)).sqrt() + ((2.0 + n) * (n + 1.0 + delta)).sqrt();
    let k2 = (x1 - x2) * sd + ((1.0 + n) * (n + 1.0 + delta)).sqrt() + ((2.0 + n) * (n + 1.0 + delta)).sqrt();
    let re = -k1 * (sd - b) * ((a - b) * t).cos()
        + k2 * (sd + b) * ((a - b) * t).cos()
        + 8.0 * (n + 2.0).sqrt() * (1.0 + n - (2.0 + 3.0 * n + n * n).sqrt()) * ((a + b) * t).cos();
    let im = 2.0
        * sd
        * (((1.0 + n) * (n + 1.0 + delta)).sqrt() + ((2.0 + n) * (n + 1.0 + delta)).sqrt()
            + ((1.0 + n) * (n + 2.0 + delta)).sqrt()
            - ((2.0 + n) * (n + 2.0 + delta)).sqrt())
        * ((a - b) * t).sin();
    Complex64::new(re, im) / (4.0 * a * b)
}

fn s1_n2(n: f64, t: f64) -> f64 {
    let w = (n + 1.5).sqrt();
    let d = (2.0 * n + 3.0).powi(2);
    8.0 * (sin2(w * t) * (n + 1.0) * (n + 2.0) / d - 0.125 * sin2(2.0 * w * t) * (n + 1.0) / d)
}

fn s2_n2(n: f64, t: f64) -> f64 {
    let a = 2f64.sqrt() * (2.0 * n + 3.0).sqrt() * t;
    let b = 2f64.sqrt() * (2.0 * n + 5.0).sqrt() * t;
    let (r1, r2, r3) = ((n + 1.0).sqrt(), (n + 2.0).sqrt(), (n + 3.0).sqrt());
    (n + 2.0) / ((2.0 * n + 3.0) * (2.0 * n + 5.0))
        * (((n + 1.0) * r1 + (n + 2.0) * r3) * a.cos() * b.cos()
            + ((n + 1.0) * r3 - (n + 3.0) * r1) * (a.cos() + b.cos())
            + (n + 3.0) * (r1 + (n + 1.0) * r3 / (n + 2.0))
            + (2.0 * n + 3.0) * r2 * a.sin() * b.sin())
}

fn s1_n3(n: f64, t: f64) -> f64 {
    let s73 = 73.0 + 16.0 * n * (4.0 + n);
    let r = s73.sqrt();
    let a = (10.0 + 5.0 * n - r).sqrt();
    let b = (10.0 + 5.0 * n + r).sqrt();
    let root13 = ((1.0 + n) * (3.0 + n)).sqrt();
    4.0 * (3.0 * (2.0 + n) * (1.0 + n + root13) * sin2((a - b) * t / 2.0) / s73
        + 3.0 * (1.0 + n) * (2.0 + n) * (8.0 + 4.0 * n + r) * sin2(a * t) / (2.0 * s73 * (-7.0 - 2.0 * n + r))
        - 3.0 * (2.0 + n) * (-1.0 - n + root13) * sin2((a + b) * t / 2.0) / s73
        + 3.0 * (1.0 + n) * (2.0 + n) * (-8.0 - 4.0 * n + r) * sin2(b * t) / (2.0 * s73 * (7.0 + 2.0 * n + r)))
}

fn s2_n3(n: f64, t: f64) -> f64 {
    let r = (73.0 + 16.0 * n * (4.0 + n)).sqrt();
    let r2 = (153.0 + 96.0 * n + 16.0 * n * n).sqrt();
    let r2b = (153.0 + 16.0 * n * (6.0 + n)).sqrt();
    let r2c = (73.0 + 16.0 * (1.0 + n) * (5.0 + n)).sqrt();
    let a = (10.0 + 5.0 * n - r).sqrt() * t;
    let b = (10.0 + 5.0 * n + r).sqrt() * t;
    let c_first = (15.0 + 5.0 * n - r2c).sqrt() * t;
    let cm = (15.0 + 5.0 * n - r2).sqrt() * t;
    let cp = (15.0 + 5.0 * n + r2).sqrt() * t;
    let (x1, x3) = ((1.0 + n).sqrt(), (3.0 + n).sqrt());
    let (y2, y4) = ((2.0 + n).sqrt(), (4.0 + n).sqrt());
    let mix = -(1.0 + n) * x3 + x1 * (3.0 + n);
    let total = ((7.0 + 2.0 * n) * (x1 - x3) + (x1 + x3) * r) * (9.0 + 2.0 * n + r2b) * a.cos() * c_first.cos()
        - 12.0 * (2.0 + n) * mix * cp.cos() * a.cos()
        + (-12.0 * (2.0 + n) * mix * cm.cos()
            + ((7.0 + 2.0 * n) * (x1 - x3) - (x1 + x3) * r) * (9.0 + 2.0 * n - r2b) * cp.cos())
            * b.cos()
        + ((1.0 + 2.0 * n) * (-y2 + y4) + (y2 + y4) * r) * (9.0 + 2.0 * n + r2b) * cm.sin() * a.sin()
        + 12.0 * (2.0 + n) * (3.0 + n) * (y2 - y4) * cp.sin() * a.sin()
        + (12.0 * (2.0 + n) * (3.0 + n) * (y2 - y4) * cm.sin()
            + ((1.0 + 2.0 * n) * (-y2 + y4) - (y2 + y4) * r) * (9.0 + 2.0 * n - r2b) * cp.sin())
            * b.sin();
    total / (4.0 * ((73.0 + 64.0 * n + 16.0 * n * n) * (153.0 + 96.0 * n + 16.0 * n * n)).sqrt())
}

/// Resonant four-molecule photon gain.
///
/// Corrected against the published version: the third, fourth and fifth
/// terms carry a minus sign, and the third term's frequency uses `25 + 10n`
/// (the published text reads `25 + 10`). All magnitudes are as published.
fn s1_n4(n: f64, t: f64) -> f64 {
    let q = (33.0 + 4.0 * n * (5.0 + n)).sqrt();
    let p = (82.0 + 16.0 * n * (5.0 + n)).sqrt();
    let a = (25.0 + 10.0 * n - 3.0 * q).sqrt();
    let b = (25.0 + 10.0 * n + 3.0 * q).sqrt();
    let d1 = 561.0 - 87.0 * q + n * (505.0 - 45.0 * q + 2.0 * n * (84.0 + 10.0 * n - 3.0 * q));
    let d2 = 561.0 + 87.0 * q + n * (505.0 + 20.0 * n * n + 45.0 * q + 6.0 * n * (28.0 + q));
    let e33 = 33.0 + 4.0 * n * (5.0 + n);
    let e41 = 41.0 + 8.0 * n * (5.0 + n);
    let p3 = (1.0 + n) * (2.0 + n) * (3.0 + n);
    // Γ(5+n)/n! = (n+1)(n+2)(n+3)(n+4)
    let gamma_ratio = (ln_factorial(n as u64 + 4) - ln_factorial(n as u64)).exp();
    4.0 * (p3 * (10.0 + 4.0 * n + p) * sin2((a - b) * t / 2.0) / (e33 * e41)
        + 12.0 * p3 * (4.0 + n) * (1.0 + 2.0 * n + q) * sin2(a * t / 2.0) / (e41 * d1)
        - 12.0 * (-1.0 - 2.0 * n + q) * gamma_ratio * sin2(b * t / 2.0) / (e41 * d2)
        - 3.0 * p3 * (9.0 + q + n * (7.0 + 2.0 * n + q)) * sin2(a * t) / (d1 * d1)
        - p3 * (-10.0 - 4.0 * n + p) * sin2((a + b) * t / 2.0) / (e33 * e41)
        + 3.0 * p3 * (-9.0 + q + n * (-7.0 - 2.0 * n + q)) * sin2(b * t) / (d2 * d2))
}

fn s4_n1_nr(n: f64, t: f64, delta: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    n / (n + delta) * sin2((n + delta).sqrt() * t)
}

fn s4_n2(n: f64, t: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else if n == 1.0 {
        sin2(2f64.sqrt() * t)
    } else {
        let w = (n - 0.5).sqrt();
        let d = (2.0 * n - 1.0).powi(2);
        8.0 * (sin2(w * t) * n * (n - 1.0) / d + n / (8.0 * d) * sin2(2.0 * w * t))
    }
}

fn spont_n1(t: f64) -> f64 {
    sin2(t)
}

fn spont_n2(t: f64) -> f64 {
    let w = 1.5f64.sqrt();
    8.0 * (2.0 / 9.0 * sin2(w * t) - sin2(2.0 * w * t) / 72.0)
}

fn spont_n3(t: f64) -> f64 {
    let s73 = 73f64.sqrt();
    let s3 = 3f64.sqrt();
    let a = (10.0 - s73).sqrt();
    let b = (10.0 + s73).sqrt();
    12.0 / 73.0
        * (2.0 * (1.0 + s3) * sin2((a - b) * t / 2.0) - 2.0 * (-1.0 + s3) * sin2((a + b) * t / 2.0)
            + (8.0 + s73) * sin2(a * t) / (-7.0 + s73)
            + (-8.0 + s73) * sin2(b * t) / (7.0 + s73))
}

/// Two specified molecules excited, empty field, transcribed literally.
fn two_up(n: f64, t: f64) -> f64 {
    let w = (2.0 * n - 1.0).sqrt() / 2f64.sqrt();
    let s = sin2(w * t);
    8.0 / (n * (2.0 * n - 1.0)) * s * (1.0 + s / (2.0 * n - 1.0)) + 2.0 / n * sin2((n - 1.0).sqrt() * t)
}

/// The three effective eigenvalues of the two-molecule block with photons
/// `n, n+1, n+2`, in descending order, from the real trigonometric form of
/// Cardano's solution.
///
/// With `y = 6 + 4n + β²` and `z3 = −54β + i√(108y³ − 2916β²)`, `a = Arg(z3)/3`:
/// `t₁ = 2√y cos(a)/√3`, `t₂ = −(√y/3)(√3 cos a − 3 sin a)`,
/// `t₃ = −(√y/3)(√3 cos a + 3 sin a)`, and `q = t − (n+1)β`.
pub fn q_cubic_n2(n: u64, beta: f64) -> [f64; 3] {
    let nf = n as f64;
    let y = 6.0 + 4.0 * nf + beta * beta;
    let disc = (108.0 * y.powi(3) - 2916.0 * beta * beta).max(0.0);
    let z3 = Complex64::new(-54.0 * beta, disc.sqrt());
    let a = z3.arg() / 3.0;
    let (s, c) = a.sin_cos();
    let sy = y.sqrt();
    let s3 = 3f64.sqrt();
    let shift = -(nf + 1.0) * beta;
    [
        shift + 2.0 * sy * c / s3,
        shift - sy / 3.0 * (s3 * c - 3.0 * s),
        shift - sy / 3.0 * (s3 * c + 3.0 * s),
    ]
}

/// Normalised eigenvector of the two-molecule block for eigenvalue `q`.
///
/// Components (photons `n, n+1, n+2`) are proportional to
/// `(2, √2(q+nβ)/√(n+1), X/√((n+1)(n+2)))` with
/// `X = −2 + q(q+β) + n(−2 + β(2q + β(n+1)))`.
///
/// Fails if `q` is not an eigenvalue.
pub fn eigvec_n2(q: f64, n: u64, beta: f64) -> Result<[f64; 3]> {
    let nf = n as f64;
    let x = -2.0 + q * (q + beta) + nf * (-2.0 + beta * (2.0 * q + beta * (nf + 1.0)));
    let z = 4.0 + 2.0 * (q + nf * beta).powi(2) / (nf + 1.0) + x * x / ((nf + 1.0) * (nf + 2.0));
    let v = [
        2.0 / z.sqrt(),
        2f64.sqrt() * (q + nf * beta) / ((nf + 1.0) * z).sqrt(),
        x / ((nf + 1.0) * (nf + 2.0) * z).sqrt(),
    ];
    let d = [-nf * beta, -(nf + 1.0) * beta, -(nf + 2.0) * beta];
    let e = [(2.0 * (nf + 1.0)).sqrt(), (2.0 * (nf + 2.0)).sqrt()];
    let kv = [
        d[0] * v[0] + e[0] * v[1],
        e[0] * v[0] + d[1] * v[1] + e[1] * v[2],
        e[1] * v[1] + d[2] * v[2],
    ];
    let res = (0..3).map(|i| (kv[i] - q * v[i]).abs()).fold(0.0, f64::max);
    let scale = 1.0 + d.iter().chain(e.iter()).map(|x| x.abs()).fold(0.0, f64::max);
    if res > 1e-8 * scale {
        return Err(Error::param(format!("q = {q} is not an eigenvalue (residual {res:.3e})")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{coherent, fock};
    use crate::dynamics::uniform_grid;
    use crate::model::HalfInt;
    use crate::spectral::solve_block;

    #[test]
    fn vacuum_forms() {
        let taus = uniform_grid(20.0, 401).unwrap();
        let s = eval_closed(ClosedFormId::S1N1, &fock(0), 0.0, &taus).unwrap();
        let sp = eval_closed(ClosedFormId::SpontN1, &fock(0), 0.0, &taus).unwrap();
        assert!(s.max_abs_diff(&sp) < 1e-15);
        let a = eval_closed(ClosedFormId::S1N3, &fock(0), 0.0, &taus).unwrap();
        let b = eval_closed(ClosedFormId::SpontN3, &fock(0), 0.0, &taus).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        let a = eval_closed(ClosedFormId::S1N2, &fock(0), 0.0, &taus).unwrap();
        let b = eval_closed(ClosedFormId::SpontN2, &fock(0), 0.0, &taus).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn two_up_bounds() {
        let taus = uniform_grid(50.0, 20001).unwrap();
        for n in [3u32, 8, 20] {
            let s = eval_closed(ClosedFormId::TwoUp { n_tlm: n }, &fock(0), 0.0, &taus).unwrap();
            assert_eq!(s.re()[0], 0.0);
            // The last term alone peaks at 2/N.
            let peak = taus.iter().map(|&t| 2.0 / n as f64 * sin2((n as f64 - 1.0).sqrt() * t)).fold(0.0, f64::max);
            assert!((peak - 2.0 / n as f64).abs() < 1e-4);
        }
        assert!(eval_closed(ClosedFormId::TwoUp { n_tlm: 2 }, &fock(0), 0.0, &taus).is_err());
    }

    #[test]
    fn constraints_are_enforced() {
        let taus = [0.0, 1.0];
        assert!(eval_closed(ClosedFormId::S1N2, &fock(0), 0.5, &taus).is_err());
        assert!(eval_closed(ClosedFormId::S1N1Nr, &fock(0), 0.5, &taus).is_ok());
        assert!(eval_closed(ClosedFormId::SpontN2, &fock(1), 0.0, &taus).is_err());
        assert!(eval_closed(ClosedFormId::S1N1, &fock(0), 0.0, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn cubic_roots() {
        for n in [0u64, 1, 7, 100] {
            let q = q_cubic_n2(n, 0.0);
            let y = 6.0 + 4.0 * n as f64;
            assert!((q[0] - y.sqrt()).abs() < 1e-12 && q[1].abs() < 1e-12 && (q[2] + y.sqrt()).abs() < 1e-12);
            for beta in [-3.0, 0.4, 5.0] {
                let q = q_cubic_n2(n, beta);
                assert!((q.iter().sum::<f64>() + 3.0 * (n as f64 + 1.0) * beta).abs() < 1e-10);
                let es = solve_block(HalfInt::from_int(1), HalfInt::from_int(n as i64 + 1), beta).unwrap();
                for (qc, qs) in q.iter().zip(&es.q) {
                    assert!((qc - qs).abs() < 1e-10 * (1.0 + qs.abs()));
                }
            }
        }
    }

    #[test]
    fn cubic_eigenvectors() {
        for n in [0u64, 2, 30] {
            for beta in [0.0, 1.5, -4.0] {
                let q = q_cubic_n2(n, beta);
                let es = solve_block(HalfInt::from_int(1), HalfInt::from_int(n as i64 + 1), beta).unwrap();
                let vs: Vec<[f64; 3]> = q.iter().map(|&qq| eigvec_n2(qq, n, beta).unwrap()).collect();
                for i in 0..3 {
                    let norm: f64 = vs[i].iter().map(|x| x * x).sum();
                    assert!((norm - 1.0).abs() < 1e-12);
                    for j in i + 1..3 {
                        let dot: f64 = (0..3).map(|k| vs[i][k] * vs[j][k]).sum();
                        assert!(dot.abs() < 1e-10);
                    }
                    for (k, v) in vs[i].iter().enumerate() {
                        assert!((v - es.a(k, i)).abs() < 1e-9);
                    }
                }
                if beta == 0.0 {
                    assert!(vs[1][1].abs() < 1e-12, "zero mode has a vanishing middle component");
                }
            }
        }
        assert!(eigvec_n2(0.123, 3, 0.0).is_err());
    }

    #[test]
    fn resonant_constant_terms() {
        // Long-time averages: N = 2 has a constant term, N = 1 does not.
        let taus = uniform_grid(4000.0, 400_001).unwrap();
        let d = coherent(3.0).unwrap();
        let avg = |id| {
            let s = eval_closed(id, &d, 0.0, &taus).unwrap();
            s.re().iter().sum::<f64>() / s.len() as f64
        };
        assert!(avg(ClosedFormId::S2N1).abs() < 5e-3);
        assert!(avg(ClosedFormId::S2N2) > 0.1);
    }
}
