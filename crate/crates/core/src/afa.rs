//! Average Field Approximation (AFA).
//!
//! The molecules are dressed by a mean field of `n0 = n + N/2` quanta. Each
//! molecule then has two dressed states with coefficients `(a1, a2)` and
//! `(b1, b2)`, the effective eigenvalues become an equally spaced ladder and
//! the block eigenvectors take a product form expressible through a
//! terminating hypergeometric series.

use rayon::prelude::*;

use crate::distributions::PhotonDensity;
use crate::dynamics::{ObservableKind, ObservableSeries};
use crate::error::{Error, Result};
use crate::model::HalfInt;
use crate::numeric::{ln_factorial, sin2, Kahan};
use crate::spectral::SpectralCache;

/// Dressed single-molecule coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

/// AFA parameters of one photon sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfaParams {
    /// Reference excitation `n0 = n + N/2`.
    pub n0: f64,
    /// Rescaled detuning `β̄ = β/√n0`.
    pub beta_bar: f64,
    pub coeffs: DressedCoefficients,
}

impl AfaParams {
    pub fn new(n_tlm: u32, n: u64, beta: f64) -> Self {
        let n0 = n as f64 + n_tlm as f64 / 2.0;
        let beta_bar = beta / n0.sqrt();
        Self { n0, beta_bar, coeffs: afa_coefficients(beta_bar) }
    }
}

/// Dressed-state coefficients for rescaled detuning `β̄`.
///
/// `a1 = 1/√(1 + (β̄/2 − s)²)`, `a2 = (s − β̄/2)·a1`,
/// `b1 = 1/√(1 + (β̄/2 + s)²)`, `b2 = (β̄/2 + s)·b1`, with `s = √(4 + β̄²)/2`.
/// `s − β̄/2` is evaluated as `2/(β̄ + √(4+β̄²))`, which is the same number
/// without cancellation at large `β̄`.
pub fn afa_coefficients(beta_bar: f64) -> DressedCoefficients {
    let root = (4.0 + beta_bar * beta_bar).sqrt();
    let (minus, plus) = if beta_bar >= 0.0 {
        (2.0 / (beta_bar + root), 0.5 * (beta_bar + root))
    } else {
        (0.5 * (root - beta_bar), 2.0 / (root - beta_bar))
    };
    // minus = s − β̄/2, plus = s + β̄/2
    let da = (1.0 + minus * minus).sqrt();
    let db = (1.0 + plus * plus).sqrt();
    DressedCoefficients { a1: 1.0 / da, a2: minus / da, b1: 1.0 / db, b2: plus / db }
}

/// Ladder eigenvalue `q̄_j = −(N/2 + n)β̄ + (N/2 − j)√(4 + β̄²)`.
///
/// Multiply by `√n0` to compare with exact effective eigenvalues.
pub fn afa_q(n_tlm: u32, n: u64, j: u32, beta_bar: f64) -> Result<f64> {
    if j > n_tlm {
        return Err(Error::param(format!("ladder index j={j} exceeds N={n_tlm}")));
    }
    let half = n_tlm as f64 / 2.0;
    Ok(-(half + n as f64) * beta_bar + (half - j as f64) * (4.0 + beta_bar * beta_bar).sqrt())
}

/// Terminating Gauss series `₂F₁(a, b; c; x)` for a non-positive integer `a`.
fn hyp2f1_terminating(a: i64, b: i64, c: i64, x: f64) -> f64 {
    debug_assert!(a <= 0 && c > 0);
    let mut sum = Kahan::new();
    let mut term = 1.0;
    for k in 0..=(-a) {
        sum.add(term);
        let kf = k as f64;
        term *= (a as f64 + kf) * (b as f64 + kf) / ((c as f64 + kf) * (kf + 1.0)) * x;
        if term == 0.0 {
            break;
        }
    }
    sum.value()
}

fn fact(n: i64) -> f64 {
    ln_factorial(n as u64).exp()
}

/// Product-form eigenvector component `A^j_p` of the all-up block.
///
/// For `N ≥ j + p`:
/// `b1^j a1^{N−j} (a2/a1)^p √((N−j)!(N−p)!/(p! j!)) F(−j, −p; N+1−p−j; x)/(N−j−p)!`;
/// otherwise, with `k0 = j + p − N`:
/// `(−1)^{k0} b1^{N−p} a2^{N−j} b2^{k0} √(j! p!/((N−p)!(N−j)!)) F(j−N, p−N; 1+k0; x)/k0!`,
/// where `x = −b2 a1/(b1 a2)`.
pub fn afa_component(n_tlm: u32, j: u32, p: u32, beta_bar: f64) -> Result<f64> {
    if j > n_tlm || p > n_tlm {
        return Err(Error::param(format!("indices j={j}, p={p} must not exceed N={n_tlm}")));
    }
    let DressedCoefficients { a1, a2, b1, b2 } = afa_coefficients(beta_bar);
    let (n, j, p) = (n_tlm as i64, j as i64, p as i64);
    let x = -(b2 * a1) / (b1 * a2);
    if n >= j + p {
        let pre = b1.powi(j as i32) * a1.powi((n - j) as i32) * (a2 / a1).powi(p as i32);
        let ratio = (fact(n - j) * fact(n - p) / (fact(p) * fact(j))).sqrt();
        Ok(pre * ratio * hyp2f1_terminating(-j, -p, n + 1 - p - j, x) / fact(n - j - p))
    } else {
        let k0 = j + p - n;
        let sign = if k0 % 2 == 0 { 1.0 } else { -1.0 };
        let pre = sign * b1.powi((n - p) as i32) * a2.powi((n - j) as i32) * b2.powi(k0 as i32);
        let ratio = (fact(j) * fact(p) / (fact(n - p) * fact(n - j))).sqrt();
        Ok(pre * ratio * hyp2f1_terminating(j - n, p - n, 1 + k0, x) / fact(k0))
    }
}

/// Full AFA eigenvector matrix, `result[p][j] = A^j_p`.
pub fn afa_eigenvectors(n_tlm: u32, beta_bar: f64) -> Vec<Vec<f64>> {
    (0..=n_tlm)
        .map(|p| (0..=n_tlm).map(|j| afa_component(n_tlm, j, p, beta_bar).expect("indices in range")).collect())
        .collect()
}

/// `Σ_p p A^j_p A^{j+1}_p` from the product-form eigenvectors.
pub fn b5_sum(n_tlm: u32, j: u32, beta_bar: f64) -> Result<f64> {
    if j >= n_tlm {
        return Err(Error::param("need j < N"));
    }
    let mut acc = Kahan::new();
    for p in 1..=n_tlm {
        acc.add(p as f64 * afa_component(n_tlm, j, p, beta_bar)? * afa_component(n_tlm, j + 1, p, beta_bar)?);
    }
    Ok(acc.value())
}

/// Closed value `−√((j+1)(N−j)) / (2√(1 + β̄²/4))` of [`b5_sum`].
pub fn b5_expected(n_tlm: u32, j: u32, beta_bar: f64) -> f64 {
    -(((j + 1) * (n_tlm - j)) as f64).sqrt() / (2.0 * (1.0 + beta_bar * beta_bar / 4.0).sqrt())
}

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.windows(2).any(|w| !(w[1] > w[0])) || taus.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("time grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// AFA photon gain `S₁ = N Σ_n ρ_nn · n0/(n0+Δ) · sin²(√(n0+Δ) τ)`, `n0 = n + N/2`.
pub fn s1_afa(n_tlm: u32, beta: f64, density: &PhotonDensity, taus: &[f64]) -> Result<ObservableSeries> {
    check_taus(taus)?;
    let delta = beta * beta / 4.0;
    let nf = n_tlm as f64;
    let terms: Vec<(f64, f64)> = density
        .diag
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(n, &p)| {
            let n0 = n as f64 + nf / 2.0;
            (nf * p * n0 / (n0 + delta), (n0 + delta).sqrt())
        })
        .collect();
    let values = taus
        .par_iter()
        .map(|&t| {
            let mut acc = Kahan::new();
            for &(c, w) in &terms {
                acc.add(c * sin2(w * t));
            }
            acc.value()
        })
        .collect();
    Ok(ObservableSeries::real(ObservableKind::S1, taus.to_vec(), values))
}

/// Infinite-time average of [`s1_afa`]: `(N/2) Σ_n ρ_nn n0/(n0+Δ)`.
pub fn s1_afa_stationary_mean(n_tlm: u32, beta: f64, density: &PhotonDensity) -> f64 {
    let delta = beta * beta / 4.0;
    let nf = n_tlm as f64;
    let mut acc = Kahan::new();
    for (n, &p) in density.diag.iter().enumerate() {
        let n0 = n as f64 + nf / 2.0;
        acc.add(0.5 * nf * p * n0 / (n0 + delta));
    }
    acc.value()
}

/// AFA field amplitude
/// `S₂ = Σ_n ρ_{n,n+1} {√(n+1) + N/(2√(n+1)) · n0/(n0+Δ) · sin²(√(n0+Δ) τ)}`.
///
/// At resonance this is the simpler `Δ = 0` form; the imaginary part vanishes.
pub fn s2_afa(n_tlm: u32, beta: f64, density: &PhotonDensity, taus: &[f64]) -> Result<ObservableSeries> {
    check_taus(taus)?;
    let delta = beta * beta / 4.0;
    let nf = n_tlm as f64;
    let terms: Vec<(f64, f64, f64)> = density
        .superdiag
        .iter()
        .enumerate()
        .filter(|(_, &s)| s != 0.0)
        .map(|(n, &s)| {
            let n0 = n as f64 + nf / 2.0;
            let root = (n as f64 + 1.0).sqrt();
            (s * root, s * nf / (2.0 * root) * n0 / (n0 + delta), (n0 + delta).sqrt())
        })
        .collect();
    let values = taus
        .par_iter()
        .map(|&t| {
            let mut acc = Kahan::new();
            for &(c0, c1, w) in &terms {
                acc.add(c0 + c1 * sin2(w * t));
            }
            acc.value()
        })
        .collect();
    Ok(ObservableSeries::real(ObservableKind::S2, taus.to_vec(), values))
}

/// One row of [`q_difference_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct QDiffRow {
    pub n: u64,
    /// `q_j − q_{j+k}` within block `c = n + N/2`, for `j = 0..=N−k`.
    pub same_block: Vec<f64>,
    /// `q^{(c)}_j − q^{(c+1)}_{j+k} − β`, for `j = 0..=N−k`.
    pub adjacent: Vec<f64>,
    /// AFA ladder prediction `k·√(4 n0 + β²)`.
    pub afa: f64,
}

/// Exact eigenvalue gaps against the AFA ladder for `n` in `n_range`.
pub fn q_difference_table(
    cache: &SpectralCache,
    n_tlm: u32,
    beta: f64,
    n_range: std::ops::RangeInclusive<u64>,
    k: u32,
) -> Result<Vec<QDiffRow>> {
    if k == 0 || k > n_tlm {
        return Err(Error::param(format!("gap k={k} must lie in 1..=N")));
    }
    let top = HalfInt::half_of(n_tlm);
    let ns: Vec<u64> = n_range.collect();
    ns.par_iter()
        .map(|&n| {
            let c = top + HalfInt::from_int(n as i64);
            let lo = cache.get(top, c, beta)?;
            let hi = cache.get(top, c + HalfInt::from_int(1), beta)?;
            let k = k as usize;
            let span = 0..=(n_tlm as usize - k);
            let n0 = n as f64 + n_tlm as f64 / 2.0;
            Ok(QDiffRow {
                n,
                same_block: span.clone().map(|j| lo.q[j] - lo.q[j + k]).collect(),
                adjacent: span.map(|j| lo.q[j] - hi.q[j + k] - beta).collect(),
                afa: k as f64 * (4.0 * n0 + beta * beta).sqrt(),
            })
        })
        .collect()
}

/// Exact coefficient sums grouped by eigenvector gap `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSums {
    /// `Σ_j A_{0,j} A_{0,j+k} Σ_p p A_{p,j} A_{p,j+k}`, defined for `1 ≤ k ≤ N`.
    pub s1_sum: Option<f64>,
    /// `Σ_j A^{c+1}_{0,j} A^{c+1}_{0,j+k} Σ_p √(n+p+1) A^{c}_{p,j} A^{c}_{p,j+k}`.
    pub s2_sum: f64,
    /// AFA value for `s1_sum`: `−(N/4)·n0/(n0+Δ)` at `k = 1`, zero otherwise.
    pub s1_afa: f64,
    /// AFA value for `s2_sum`: `√(n+1) + (N/(4√(n+1)))·n0/(n0+Δ)` at `k = 0`,
    /// `−(N/(8√(n+1)))·n0/(n0+Δ)` at each of `k = ±1`, zero otherwise.
    ///
    /// The two signed gaps together make up the cosine coefficient
    /// `−(N/(4√(n+1)))·n0/(n0+Δ)` of the AFA amplitude.
    pub s2_afa: f64,
}

/// Coefficient sums of the exact all-up eigenvectors at photon number `n`.
pub fn coefficient_sums(cache: &SpectralCache, n_tlm: u32, beta: f64, n: u64, k: i32) -> Result<CoefficientSums> {
    if k.unsigned_abs() > n_tlm {
        return Err(Error::param(format!("gap |k|={} exceeds N={n_tlm}", k.abs())));
    }
    let top = HalfInt::half_of(n_tlm);
    let c = top + HalfInt::from_int(n as i64);
    let lo = cache.get(top, c, beta)?;
    let hi = cache.get(top, c + HalfInt::from_int(1), beta)?;
    let d = lo.dim() as i64;
    let js = (0..d).filter(|&j| (0..d).contains(&(j + k as i64)));

    let s1_sum = (k >= 1).then(|| {
        let mut acc = Kahan::new();
        for j in js.clone() {
            let (j, jk) = (j as usize, (j + k as i64) as usize);
            let m: f64 = (0..d as usize).map(|p| p as f64 * lo.a(p, j) * lo.a(p, jk)).sum();
            acc.add(lo.a(0, j) * lo.a(0, jk) * m);
        }
        acc.value()
    });
    let mut acc = Kahan::new();
    for j in js {
        let (j, jk) = (j as usize, (j + k as i64) as usize);
        let g: f64 = (0..d as usize).map(|p| ((n + p as u64 + 1) as f64).sqrt() * lo.a(p, j) * lo.a(p, jk)).sum();
        acc.add(hi.a(0, j) * hi.a(0, jk) * g);
    }
    let nf = n_tlm as f64;
    let n0 = n as f64 + nf / 2.0;
    let ratio = n0 / (n0 + beta * beta / 4.0);
    let root = (n as f64 + 1.0).sqrt();
    let s2_afa = match k.abs() {
        0 => root + nf / (4.0 * root) * ratio,
        1 => -nf / (8.0 * root) * ratio,
        _ => 0.0,
    };
    Ok(CoefficientSums {
        s1_sum,
        s2_sum: acc.value(),
        s1_afa: if k == 1 { -nf / 4.0 * ratio } else { 0.0 },
        s2_afa,
    })
}
