//! Truncated initial photon densities.
//!
//! Only the diagonal `⟨n|ρ|n⟩` and first superdiagonal `⟨n|ρ|n+1⟩` of the
//! field density matrix enter the observables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, Kahan};

/// Default bound on the probability mass discarded by truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Which law a density came from; used for reproducibility headers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    Fock { n0: u64 },
    Coherent { nbar: f64 },
    Thermal { nbar: f64 },
}

impl std::fmt::Display for DensityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityKind::Fock { n0 } => write!(f, "fock:{n0}"),
            DensityKind::Coherent { nbar } => write!(f, "coherent:{nbar}"),
            DensityKind::Thermal { nbar } => write!(f, "thermal:{nbar}"),
        }
    }
}

/// How far to truncate a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPolicy {
    /// Maximum discarded probability mass.
    pub tail_tol: f64,
    /// Explicit truncation point; must still satisfy `tail_tol`.
    pub n_trunc: Option<u64>,
}

impl Default for TailPolicy {
    fn default() -> Self {
        Self { tail_tol: DEFAULT_TAIL_TOL, n_trunc: None }
    }
}

/// Truncated diagonal and superdiagonal of the initial field state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDensity {
    /// `⟨n|ρ|n⟩` for `n = 0..=n_trunc`.
    pub diag: Vec<f64>,
    /// `⟨n|ρ|n+1⟩` for `n = 0..n_trunc`.
    pub superdiag: Vec<f64>,
    pub n_trunc: u64,
    /// Probability mass beyond `n_trunc`.
    pub tail_mass: f64,
    /// Mean photon number of the untruncated law.
    pub nbar: f64,
    pub kind: DensityKind,
}

impl PhotonDensity {
    /// Mean photon number of the truncated diagonal.
    pub fn truncated_mean(&self) -> f64 {
        let mut k = Kahan::new();
        for (n, &p) in self.diag.iter().enumerate() {
            k.add(n as f64 * p);
        }
        k.value()
    }

    pub fn total_mass(&self) -> f64 {
        let mut k = Kahan::new();
        self.diag.iter().for_each(|&p| k.add(p));
        k.value()
    }

    /// True when the superdiagonal vanishes identically.
    pub fn is_diagonal(&self) -> bool {
        self.superdiag.iter().all(|&x| x == 0.0)
    }

    /// Builds a density from the named law (`fock:n0`, `coherent:nbar`, `thermal:nbar`).
    pub fn from_spec(spec: &str, policy: TailPolicy) -> Result<Self> {
        let (name, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("distribution `{spec}` must look like kind:value")))?;
        let value: f64 = arg
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("distribution parameter `{arg}` is not a number")))?;
        match name.trim() {
            "fock" => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::Config(format!("fock needs a non-negative integer, got {arg}")));
                }
                Ok(fock(value as u64))
            }
            "coherent" => coherent_with(value, policy),
            "thermal" => thermal_with(value, policy),
            other => Err(Error::Config(format!("unknown distribution `{other}`"))),
        }
    }
}

/// Number state `|n0⟩`.
pub fn fock(n0: u64) -> PhotonDensity {
    let mut diag = vec![0.0; n0 as usize + 1];
    diag[n0 as usize] = 1.0;
    PhotonDensity {
        diag,
        superdiag: vec![0.0; n0 as usize],
        n_trunc: n0,
        tail_mass: 0.0,
        nbar: n0 as f64,
        kind: DensityKind::Fock { n0 },
    }
}

fn minimum_cutoff(nbar: f64) -> u64 {
    (nbar + 10.0 * nbar.sqrt() + 25.0).ceil() as u64
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::param(format!("mean photon number must be finite and ≥ 0, got {nbar}")));
    }
    Ok(())
}

fn check_policy(policy: &TailPolicy) -> Result<()> {
    if !(policy.tail_tol > 0.0) {
        return Err(Error::param("tail tolerance must be positive"));
    }
    Ok(())
}

/// Coherent (Glauber) state with real positive amplitude `√n̄`, default truncation.
pub fn coherent(nbar: f64) -> Result<PhotonDensity> {
    coherent_with(nbar, TailPolicy::default())
}

/// Coherent state with an explicit truncation policy.
pub fn coherent_with(nbar: f64, policy: TailPolicy) -> Result<PhotonDensity> {
    check_nbar(nbar)?;
    check_policy(&policy)?;
    let kind = DensityKind::Coherent { nbar };
    if nbar == 0.0 {
        let n_trunc = policy.n_trunc.unwrap_or(0);
        let mut diag = vec![0.0; n_trunc as usize + 1];
        diag[0] = 1.0;
        return Ok(PhotonDensity { diag, superdiag: vec![0.0; n_trunc as usize], n_trunc, tail_mass: 0.0, nbar, kind });
    }
    let ln_nbar = nbar.ln();
    let p = |n: u64| (-nbar + n as f64 * ln_nbar - ln_factorial(n)).exp();
    // Mass beyond `n`, computed by summing forward until negligible.
    let tail_after = |n: u64| {
        let mut k = Kahan::new();
        let mut m = n + 1;
        loop {
            let v = p(m);
            k.add(v);
            if m as f64 > nbar && v < 1e-300_f64.max(k.value() * 1e-17) {
                break;
            }
            m += 1;
        }
        k.value()
    };
    let n_trunc = match policy.n_trunc {
        Some(n) => n,
        None => {
            let mut n = minimum_cutoff(nbar);
            while tail_after(n) > 0.5 * policy.tail_tol {
                n += (n / 16).max(1);
            }
            n
        }
    };
    let tail_mass = tail_after(n_trunc);
    if tail_mass > policy.tail_tol {
        return Err(Error::Truncation(format!(
            "coherent({nbar}) truncated at n={n_trunc} leaves tail mass {tail_mass:.3e} > {:.3e}",
            policy.tail_tol
        )));
    }
    let diag: Vec<f64> = (0..=n_trunc).map(p).collect();
    // |⟨n|ρ|n+1⟩| = √(p_n p_{n+1}) for a pure coherent state with real amplitude.
    let superdiag = diag.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    Ok(PhotonDensity { diag, superdiag, n_trunc, tail_mass, nbar, kind })
}

/// Thermal (Bose–Einstein) state, default truncation.
pub fn thermal(nbar: f64) -> Result<PhotonDensity> {
    thermal_with(nbar, TailPolicy::default())
}

/// Thermal state with an explicit truncation policy.
pub fn thermal_with(nbar: f64, policy: TailPolicy) -> Result<PhotonDensity> {
    check_nbar(nbar)?;
    check_policy(&policy)?;
    let kind = DensityKind::Thermal { nbar };
    let x = nbar / (1.0 + nbar);
    // The mass beyond n is exactly x^(n+1).
    let tail_after = |n: u64| if x == 0.0 { 0.0 } else { ((n + 1) as f64 * x.ln()).exp() };
    let n_trunc = match policy.n_trunc {
        Some(n) => n,
        None => {
            let base = minimum_cutoff(nbar);
            // Aim at half the tolerance so rounding in the retained mass cannot
            // push it across the bound.
            let needed = if x == 0.0 { 0 } else { ((0.5 * policy.tail_tol).ln() / x.ln()).ceil() as u64 };
            base.max(needed)
        }
    };
    let tail_mass = tail_after(n_trunc);
    if tail_mass > policy.tail_tol {
        return Err(Error::Truncation(format!(
            "thermal({nbar}) truncated at n={n_trunc} leaves tail mass {tail_mass:.3e} > {:.3e}",
            policy.tail_tol
        )));
    }
    let diag: Vec<f64> = if x == 0.0 {
        let mut v = vec![0.0; n_trunc as usize + 1];
        v[0] = 1.0;
        v
    } else {
        (0..=n_trunc).map(|n| (n as f64 * x.ln()).exp() / (1.0 + nbar)).collect()
    };
    Ok(PhotonDensity { diag, superdiag: vec![0.0; n_trunc as usize], n_trunc, tail_mass, nbar, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fock_examples() {
        let d = fock(0);
        assert_eq!(d.diag, vec![1.0]);
        let d = fock(4);
        assert_eq!(d.diag[4], 1.0);
        assert_eq!(d.diag.iter().sum::<f64>(), 1.0);
        assert!(d.is_diagonal());
    }

    #[test]
    fn coherent_examples() {
        let d = coherent(0.0).unwrap();
        assert_eq!(d.diag[0], 1.0);
        let d = coherent(100.0).unwrap();
        let peak = d.diag[100];
        assert!((peak - 0.039861).abs() < 1e-5, "{peak}");
        assert!(d.diag.iter().all(|&p| p <= peak * (1.0 + 1e-12)));
        let d = coherent(1.0).unwrap();
        assert!((d.superdiag[0] - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn thermal_examples() {
        let d = thermal(30.0).unwrap();
        assert!((d.diag[0] - 1.0 / 31.0).abs() < 1e-15);
        let d = thermal(1.0).unwrap();
        assert_eq!(&d.diag[..3], &[0.5, 0.25, 0.125]);
        assert!(d.is_diagonal());
        let d = thermal(0.0).unwrap();
        assert_eq!(d.diag[0], 1.0);
        assert_eq!(d.total_mass(), 1.0);
    }

    #[test]
    fn override_too_small_is_a_truncation_error() {
        let policy = TailPolicy { n_trunc: Some(50), ..Default::default() };
        assert!(matches!(coherent_with(100.0, policy), Err(Error::Truncation(_))));
        assert!(matches!(thermal_with(30.0, policy), Err(Error::Truncation(_))));
        let loose = TailPolicy { n_trunc: Some(200), tail_tol: 1e-2 };
        assert!(thermal_with(30.0, loose).is_ok());
    }

    #[test]
    fn spec_parsing() {
        let p = TailPolicy::default();
        assert_eq!(PhotonDensity::from_spec("fock:4", p).unwrap().n_trunc, 4);
        assert!(PhotonDensity::from_spec("coherent:10", p).is_ok());
        assert!(PhotonDensity::from_spec("squeezed:1", p).is_err());
        assert!(PhotonDensity::from_spec("fock:1.5", p).is_err());
        assert!(PhotonDensity::from_spec("thermal", p).is_err());
    }

    fn check_invariants(d: &PhotonDensity) {
        assert!(d.diag.iter().all(|&p| p >= 0.0));
        assert!(d.total_mass() >= 1.0 - 1e-12);
        assert!(d.tail_mass <= 1e-12);
        assert!(d.n_trunc as f64 >= d.nbar + 10.0 * d.nbar.sqrt() + 25.0);
        for (n, &s) in d.superdiag.iter().enumerate() {
            assert!(s.abs() <= (d.diag[n] * d.diag[n + 1]).sqrt() * (1.0 + 1e-15));
        }
        assert!((d.truncated_mean() - d.nbar).abs() < 1e-8, "{} vs {}", d.truncated_mean(), d.nbar);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn coherent_invariants(nbar in 0.0f64..200.0) {
            check_invariants(&coherent(nbar).unwrap());
        }

        #[test]
        fn thermal_invariants(nbar in 0.0f64..200.0) {
            check_invariants(&thermal(nbar).unwrap());
        }
    }
}
