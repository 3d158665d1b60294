//! Full tensor-product reference model for small `N`.
//!
//! The Hamiltonian `(1+β) a†a + J_z − (a J₊ + a† J₋)` is assembled on
//! `span{|n⟩} ⊗ (C²)^⊗N` and diagonalised densely with nalgebra, so nothing
//! here shares code or structure with the block engine.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub struct Brute {
    pub n_tlm: usize,
    pub nmax: usize,
    vals: DVector<f64>,
    vecs: DMatrix<f64>,
    /// `a†a` and `a†` in the full space.
    number: DMatrix<f64>,
    create: DMatrix<f64>,
}

/// Spin basis: bit `i` of the index is molecule `i`, 0 = up, 1 = down.
fn spin_ops(n_tlm: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = 1 << n_tlm;
    let mut jz = DMatrix::zeros(d, d);
    let mut jm = DMatrix::zeros(d, d);
    for s in 0..d {
        jz[(s, s)] = (0..n_tlm).map(|i| if s >> i & 1 == 0 { 0.5 } else { -0.5 }).sum();
        for i in 0..n_tlm {
            if s >> i & 1 == 0 {
                jm[(s | 1 << i, s)] += 1.0;
            }
        }
    }
    (jz, jm)
}

impl Brute {
    pub fn new(n_tlm: usize, nmax: usize, beta: f64) -> Self {
        let ds = 1 << n_tlm;
        let nf = nmax + 1;
        let dim = nf * ds;
        let (jz, jm) = spin_ops(n_tlm);
        let idx = |n: usize, s: usize| n * ds + s;
        let mut h = DMatrix::zeros(dim, dim);
        let mut number = DMatrix::zeros(dim, dim);
        let mut create = DMatrix::zeros(dim, dim);
        for n in 0..nf {
            for s in 0..ds {
                let i = idx(n, s);
                h[(i, i)] += (1.0 + beta) * n as f64 + jz[(s, s)];
                number[(i, i)] = n as f64;
                if n + 1 < nf {
                    create[(idx(n + 1, s), i)] = ((n + 1) as f64).sqrt();
                }
                for s2 in 0..ds {
                    let m = jm[(s2, s)];
                    if m != 0.0 && n + 1 < nf {
                        // −a† J₋ and its adjoint −a J₊.
                        let v = -((n + 1) as f64).sqrt() * m;
                        h[(idx(n + 1, s2), i)] += v;
                        h[(i, idx(n + 1, s2))] += v;
                    }
                }
            }
        }
        let eig = h.symmetric_eigen();
        Self { n_tlm, nmax, vals: eig.eigenvalues, vecs: eig.eigenvectors, number, create }
    }

    pub fn index(&self, n: usize, spins: usize) -> usize {
        n * (1 << self.n_tlm) + spins
    }

    pub fn evolve(&self, psi0: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let v = self.vecs.map(|x| Complex64::new(x, 0.0));
        let coeff = v.adjoint() * psi0;
        let phased = DVector::from_iterator(
            coeff.len(),
            coeff.iter().zip(self.vals.iter()).map(|(c, &l)| c * Complex64::from_polar(1.0, -l * t)),
        );
        v * phased
    }

    pub fn expect(&self, op: &DMatrix<f64>, psi: &DVector<Complex64>) -> Complex64 {
        let opc = op.map(|x| Complex64::new(x, 0.0));
        (psi.adjoint() * opc * psi)[(0, 0)]
    }

    /// `⟨a†a⟩(τ)` for a pure initial state.
    pub fn photons(&self, psi0: &DVector<Complex64>, t: f64) -> f64 {
        self.expect(&self.number, &self.evolve(psi0, t)).re
    }

    /// `e^{−i(1+β)τ}⟨a†⟩(τ)`: the field amplitude with the carrier removed.
    pub fn amplitude(&self, psi0: &DVector<Complex64>, t: f64, beta: f64) -> Complex64 {
        let raw = self.expect(&self.create, &self.evolve(psi0, t));
        raw * Complex64::from_polar(1.0, -(1.0 + beta) * t)
    }

    /// Product state `Σ_n amp_n |n⟩ ⊗ |spins⟩`.
    pub fn product(&self, amps: &[f64], spins: &[(usize, f64)]) -> DVector<Complex64> {
        let dim = (self.nmax + 1) << self.n_tlm;
        let mut psi = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        for (n, &a) in amps.iter().enumerate() {
            for &(s, w) in spins {
                psi[self.index(n, s)] += Complex64::new(a * w, 0.0);
            }
        }
        psi
    }
}

/// Symmetric Dicke state with `k` molecules down, as `(spin index, amplitude)`.
pub fn dicke_down(n_tlm: usize, k: usize) -> Vec<(usize, f64)> {
    let states: Vec<usize> = (0..1usize << n_tlm).filter(|s| s.count_ones() as usize == k).collect();
    let w = 1.0 / (states.len() as f64).sqrt();
    states.into_iter().map(|s| (s, w)).collect()
}
