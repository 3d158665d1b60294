//! Quantum-number bookkeeping: half-integers, model parameters, Dicke
//! blocks and cooperation-number degeneracies.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ln_factorial;

/// An integer or half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    /// Builds the value `twice / 2`.
    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    /// Exact conversion from a float that must be a multiple of ½.
    pub fn from_f64(x: f64) -> Result<Self> {
        let t = 2.0 * x;
        if !t.is_finite() || (t - t.round()).abs() > 1e-9 || t.abs() > 1e15 {
            return Err(Error::param(format!("{x} is not an integer or half-integer")));
        }
        Ok(HalfInt(t.round() as i64))
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// `N/2` for a molecule count `N`.
    pub const fn half_of(n: u32) -> Self {
        HalfInt(n as i64)
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Global model parameters. `delta` is always derived from `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    tlm_count: u32,
    beta: f64,
}

impl ModelParams {
    pub fn new(tlm_count: u32, beta: f64) -> Result<Self> {
        if tlm_count == 0 {
            return Err(Error::param("the number of molecules N must be at least 1"));
        }
        if !beta.is_finite() {
            return Err(Error::param("beta must be finite"));
        }
        Ok(Self { tlm_count, beta })
    }

    /// Builds parameters from `Δ = β²/4`, choosing `β = 2√Δ ≥ 0`.
    pub fn from_delta(tlm_count: u32, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::param("delta must be a finite non-negative number"));
        }
        Self::new(tlm_count, 2.0 * delta.sqrt())
    }

    pub fn tlm_count(&self) -> u32 {
        self.tlm_count
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.beta * self.beta / 4.0
    }
}

/// One `(r, c)` invariant subspace.
///
/// Basis vector `p` carries photon number `n = n_min + p` and collective
/// projection `m = c − n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DickeBlock {
    pub r: HalfInt,
    pub c: HalfInt,
    pub n_min: u64,
    pub n_max: u64,
}

impl DickeBlock {
    pub fn dim(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    /// Photon number of basis index `p`.
    pub fn photon(&self, p: usize) -> u64 {
        self.n_min + p as u64
    }

    /// Collective projection `m` of basis index `p`.
    pub fn m_of(&self, p: usize) -> HalfInt {
        self.c - HalfInt::from_int(self.photon(p) as i64)
    }

    /// Basis index of photon number `n`, if it lies in the block.
    pub fn index_of(&self, n: u64) -> Option<usize> {
        (self.n_min..=self.n_max).contains(&n).then(|| (n - self.n_min) as usize)
    }
}

impl fmt::Display for DickeBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(r={}, c={}, n={}..={})", self.r, self.c, self.n_min, self.n_max)
    }
}

/// Geometry of the `(r, c)` block.
pub fn block_for(r: HalfInt, c: HalfInt) -> Result<DickeBlock> {
    if r.twice() < 0 {
        return Err(Error::param(format!("cooperation number r={r} is negative")));
    }
    if c.twice() < -r.twice() {
        return Err(Error::param(format!("excitation c={c} is below −r for r={r}")));
    }
    if (c.twice() - r.twice()) % 2 != 0 {
        return Err(Error::param(format!(
            "c={c} and r={r} differ by a half-integer; photon numbers would not be integral"
        )));
    }
    let lo = (c - r).twice() / 2;
    let hi = (c + r).twice() / 2;
    Ok(DickeBlock { r, c, n_min: lo.max(0) as u64, n_max: hi as u64 })
}

/// Checks that `r` is an admissible cooperation number for `N` molecules.
pub fn check_cooperation(n: u32, r: HalfInt) -> Result<()> {
    let half = HalfInt::half_of(n);
    if r.twice() < 0 || r > half || (half - r).twice() % 2 != 0 {
        return Err(Error::param(format!("r={r} is not a valid cooperation number for N={n}")));
    }
    Ok(())
}

/// Multiplicity `P(r) = N!(2r+1) / ((N/2+r+1)!(N/2−r)!)` of cooperation number `r`.
///
/// Exact integer arithmetic is used up to `N = 20`, log-factorials above.
pub fn degeneracy_weight(n: u32, r: HalfInt) -> Result<f64> {
    check_cooperation(n, r)?;
    let two_r_plus_one = (r.twice() + 1) as u64;
    let a = ((n as i64 + r.twice()) / 2 + 1) as u64; // N/2 + r + 1
    let b = ((n as i64 - r.twice()) / 2) as u64; // N/2 − r
    if n <= 20 {
        let fact = |k: u64| (1..=k).map(u128::from).product::<u128>();
        let num = fact(n as u64) * two_r_plus_one as u128;
        let den = fact(a) * fact(b);
        debug_assert_eq!(num % den, 0);
        Ok((num / den) as f64)
    } else {
        let ln = ln_factorial(n as u64) + (two_r_plus_one as f64).ln() - ln_factorial(a) - ln_factorial(b);
        Ok(ln.exp())
    }
}

/// All cooperation numbers `N/2, N/2 − 1, …` down to 0 or ½.
pub fn cooperation_numbers(n: u32) -> impl Iterator<Item = HalfInt> {
    (0..=n as i64 / 2).map(move |k| HalfInt::from_twice(n as i64 - 2 * k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(x: f64) -> HalfInt {
        HalfInt::from_f64(x).unwrap()
    }

    #[test]
    fn degeneracy_examples() {
        assert_eq!(degeneracy_weight(6, h(3.0)).unwrap(), 1.0);
        assert_eq!(degeneracy_weight(2, h(0.0)).unwrap(), 1.0);
        assert_eq!(degeneracy_weight(4, h(1.0)).unwrap(), 3.0);
        assert!(degeneracy_weight(4, h(0.5)).is_err());
        assert!(degeneracy_weight(4, h(3.0)).is_err());
    }

    #[test]
    fn multiplicity_identity_up_to_30() {
        for n in 1..=30u32 {
            let total: f64 = cooperation_numbers(n)
                .map(|r| (r.twice() + 1) as f64 * degeneracy_weight(n, r).unwrap())
                .sum();
            let expect = 2f64.powi(n as i32);
            assert!((total - expect).abs() <= 1e-12 * expect, "N={n}: {total} vs {expect}");
        }
    }

    #[test]
    fn log_branch_agrees_with_exact_branch_values() {
        // P(r) = C(N, N/2−r) − C(N, N/2−r−1); compare at N = 21..24.
        for n in 21..=24u32 {
            for r in cooperation_numbers(n) {
                let k = ((n as i64 - r.twice()) / 2) as u64;
                let c = |k: i64| if k < 0 { 0.0 } else { crate::numeric::binomial(n as u64, k as u64) };
                let expect = c(k as i64) - c(k as i64 - 1);
                let got = degeneracy_weight(n, r).unwrap();
                assert!((got - expect).abs() <= 1e-12 * expect.max(1.0), "N={n} r={r}");
            }
        }
    }

    #[test]
    fn block_examples() {
        let b = block_for(h(0.5), h(0.5)).unwrap();
        assert_eq!((b.n_min, b.n_max, b.dim()), (0, 1, 2));
        let b = block_for(h(25.0), h(0.0)).unwrap();
        assert_eq!((b.n_min, b.n_max, b.dim()), (0, 25, 26));
        let b = block_for(h(2.0), h(10.0)).unwrap();
        assert_eq!((b.n_min, b.n_max, b.dim()), (8, 12, 5));
        assert!(block_for(h(1.0), h(-2.0)).is_err());
        assert!(block_for(h(1.0), h(0.5)).is_err());
    }

    #[test]
    fn params_delta_is_derived() {
        let p = ModelParams::from_delta(4, 25.0).unwrap();
        assert_eq!(p.beta(), 10.0);
        assert_eq!(p.delta(), 25.0);
        assert!(ModelParams::new(0, 0.0).is_err());
    }

    #[test]
    fn halfint_display() {
        assert_eq!(h(2.5).to_string(), "5/2");
        assert_eq!(h(-3.0).to_string(), "-3");
    }

    proptest! {
        #[test]
        fn block_basis_is_valid(r2 in 0i64..40, extra in 0i64..200) {
            let r = HalfInt::from_twice(r2);
            let c = HalfInt::from_twice(-r2 + 2 * extra);
            let b = block_for(r, c).unwrap();
            prop_assert!(b.dim() >= 1);
            for p in 0..b.dim() {
                let m = b.m_of(p);
                prop_assert!(m.twice() >= -r2 && m.twice() <= r2);
            }
        }

        #[test]
        fn top_cooperation_has_unit_weight(n in 1u32..60) {
            let w = degeneracy_weight(n, HalfInt::half_of(n)).unwrap();
            prop_assert!((w - 1.0).abs() < 1e-12);
        }
    }
}
