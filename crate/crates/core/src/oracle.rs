//! Exact references for small systems.
//!
//! Dense exact diagonalization provides thermal states, purification
//! vectors, reduced spectra, and gaps for chains small enough to
//! diagonalize; the free-fermion module provides quasi-exact entropies for
//! the XX chain at sizes far beyond dense reach. Everything here is the
//! ground truth the tensor-network path is tested against, so the
//! implementations favor directness over speed.

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{self, BondTerm, ModelSpec};
use crate::mps::BondSpectrum;

/// Default cap on the undoubled Hilbert-space dimension `d^L`.
pub const DENSE_DIM_CAP: usize = 4096;

/// A dense vector on the doubled Hilbert space.
///
/// Basis ordering is identical to the purification MPS: site 1 is most
/// significant, and each site carries the fused index `q = s * d + a`
/// (physical major, ancilla minor).
#[derive(Debug, Clone)]
pub struct DenseState {
    pub d: usize,
    pub sites: usize,
    pub amplitudes: Vec<f64>,
}

impl DenseState {
    pub fn norm(&self) -> f64 {
        linalg::norm2(&self.amplitudes)
    }
}

/// Dense Hamiltonian assembled from the model's bond terms.
///
/// Returns `(dim, H)` with `H` row-major `dim×dim`, `dim = d^L`.
pub fn dense_hamiltonian(spec: &ModelSpec) -> Result<(usize, Vec<f64>)> {
    let d = spec.local_dim();
    let len = spec.length;
    let dim = checked_pow(d, len)?;
    let terms = models::build_bond_terms(spec)?;
    let mut h = vec![0.0; dim * dim];
    for term in &terms {
        add_bond_term(&mut h, &term.matrix, term.site, d, len);
    }
    Ok((dim, h))
}

fn add_bond_term(h: &mut [f64], bond: &[f64], site: usize, d: usize, len: usize) {
    // H += 1_{left} ⊗ bond ⊗ 1_{right}
    let dim_left: usize = d.pow(site as u32);
    let dim_right: usize = d.pow((len - site - 2) as u32);
    let d2 = d * d;
    let dim = dim_left * d2 * dim_right;
    for l in 0..dim_left {
        for p in 0..d2 {
            for pp in 0..d2 {
                let v = bond[p * d2 + pp];
                if v == 0.0 {
                    continue;
                }
                let row_base = (l * d2 + p) * dim_right;
                let col_base = (l * d2 + pp) * dim_right;
                for r in 0..dim_right {
                    h[(row_base + r) * dim + (col_base + r)] += v;
                }
            }
        }
    }
}

fn checked_pow(d: usize, len: usize) -> Result<usize> {
    let mut dim = 1usize;
    for _ in 0..len {
        dim = dim.checked_mul(d).ok_or_else(|| Error::Size("Hilbert dimension overflow".into()))?;
        if dim > DENSE_DIM_CAP {
            return Err(Error::Size(format!(
                "dense dimension {d}^{len} exceeds cap {DENSE_DIM_CAP}"
            )));
        }
    }
    Ok(dim)
}

/// Eigendecomposition of the dense Hamiltonian, energies ascending.
pub fn dense_spectrum(spec: &ModelSpec) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let (dim, h) = dense_hamiltonian(spec)?;
    let (vals_desc, vecs) = linalg::eigh_descending(dim, &h)?;
    // ascending is the natural order for energies
    let vals: Vec<f64> = vals_desc.iter().rev().copied().collect();
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            v[i * dim + k] = vecs[i * dim + (dim - 1 - k)];
        }
    }
    Ok((vals, v, dim))
}

/// The exact thermofield-double vector at inverse temperature `beta`.
///
/// Forms `vec(exp(-beta H / 2)) / sqrt(Z)` in the documented site-major
/// fused basis. Energies are shifted by the ground-state energy internally
/// so that arbitrarily large `beta` stays finite.
pub fn exact_tds(spec: &ModelSpec, beta: f64) -> Result<DenseState> {
    if beta < 0.0 {
        return Err(Error::Parameter("beta must be nonnegative".into()));
    }
    let (vals, vecs, dim) = dense_spectrum(spec)?;
    let e0 = vals[0];
    let z: f64 = vals.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    // rho_half = V diag(e^{-beta (E - E0)/2}) V^T
    let mut scaled = vec![0.0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            scaled[i * dim + k] = vecs[i * dim + k] * (-0.5 * beta * (vals[k] - e0)).exp();
        }
    }
    let mut rho_half = vec![0.0; dim * dim];
    linalg::gemm_nt(dim, dim, dim, &scaled, &vecs, &mut rho_half);

    let d = spec.local_dim();
    let len = spec.length;
    let q = d * d;
    let full = checked_doubled(q, len)?;
    let mut amp = vec![0.0; full];
    let inv_sqrt_z = 1.0 / z.sqrt();
    let mut row_digits = vec![0usize; len];
    let mut col_digits = vec![0usize; len];
    for r in 0..dim {
        digits(r, d, &mut row_digits);
        for c in 0..dim {
            digits(c, d, &mut col_digits);
            // fused index: per site (sigma_i * d + sbar_i), site-major
            let mut idx = 0usize;
            for i in 0..len {
                idx = idx * q + row_digits[i] * d + col_digits[i];
            }
            amp[idx] = rho_half[r * dim + c] * inv_sqrt_z;
        }
    }
    Ok(DenseState { d, sites: len, amplitudes: amp })
}

fn checked_doubled(q: usize, len: usize) -> Result<usize> {
    let mut dim = 1usize;
    for _ in 0..len {
        dim = dim
            .checked_mul(q)
            .ok_or_else(|| Error::Size("doubled Hilbert dimension overflow".into()))?;
    }
    Ok(dim)
}

fn digits(mut x: usize, base: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = x % base;
        x /= base;
    }
}

/// The Gibbs density matrix `exp(-beta H) / Z`, row-major `d^L × d^L`.
pub fn exact_thermal_density(spec: &ModelSpec, beta: f64) -> Result<(usize, Vec<f64>)> {
    if beta < 0.0 {
        return Err(Error::Parameter("beta must be nonnegative".into()));
    }
    let (vals, vecs, dim) = dense_spectrum(spec)?;
    let e0 = vals[0];
    let z: f64 = vals.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    let mut scaled = vec![0.0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            scaled[i * dim + k] = vecs[i * dim + k] * (-beta * (vals[k] - e0)).exp() / z;
        }
    }
    let mut rho = vec![0.0; dim * dim];
    linalg::gemm_nt(dim, dim, dim, &scaled, &vecs, &mut rho);
    Ok((dim, rho))
}

/// Thermal expectation `Tr(rho_beta O)` of a dense observable.
pub fn thermal_expectation(spec: &ModelSpec, beta: f64, observable: &[f64]) -> Result<f64> {
    let (dim, rho) = exact_thermal_density(spec, beta)?;
    if observable.len() != dim * dim {
        return Err(Error::Dimension("observable dimension mismatch".into()));
    }
    let mut tr = 0.0;
    for i in 0..dim {
        for k in 0..dim {
            tr += rho[i * dim + k] * observable[k * dim + i];
        }
    }
    Ok(tr)
}

/// Thermal energy `Tr(rho_beta H)`.
pub fn thermal_energy(spec: &ModelSpec, beta: f64) -> Result<f64> {
    let (dim, h) = dense_hamiltonian(spec)?;
    let _ = dim;
    thermal_expectation(spec, beta, &h)
}

/// Schmidt spectrum of a dense doubled state across the cut after site
/// `ell` (both copies), descending.
pub fn reduced_spectrum(state: &DenseState, ell: usize) -> Result<BondSpectrum> {
    if ell == 0 || ell >= state.sites {
        return Err(Error::Range(format!(
            "cut {} outside 1..{}",
            ell,
            state.sites - 1
        )));
    }
    let q = state.d * state.d;
    let rows = q.pow(ell as u32);
    let cols = state.amplitudes.len() / rows;
    let weights = matrix_spectrum(&state.amplitudes, rows, cols)?;
    Ok(BondSpectrum { bond: ell, weights })
}

/// Schmidt spectrum of a dense pure state on the *undoubled* chain.
pub fn pure_state_spectrum(vec: &[f64], d: usize, sites: usize, ell: usize) -> Result<Vec<f64>> {
    if ell == 0 || ell >= sites {
        return Err(Error::Range(format!("cut {ell} outside 1..{}", sites - 1)));
    }
    let rows = d.pow(ell as u32);
    let cols = vec.len() / rows;
    matrix_spectrum(vec, rows, cols)
}

fn matrix_spectrum(data: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    if rows * cols != data.len() {
        return Err(Error::Dimension("vector does not factor at this cut".into()));
    }
    // eigenvalues of the Gram matrix on the smaller side
    let (w, _) = if rows <= cols {
        // M M^T: treat data^T as the input to the right-Gram helper
        let mut t = vec![0.0; data.len()];
        for i in 0..rows {
            for j in 0..cols {
                t[j * rows + i] = data[i * cols + j];
            }
        }
        linalg::gram_right_vectors(cols, rows, &t)?
    } else {
        linalg::gram_right_vectors(rows, cols, data)?
    };
    Ok(w)
}

/// Gap `E1 - E0` of the dense Hamiltonian.
pub fn energy_gap(spec: &ModelSpec) -> Result<f64> {
    let (vals, _, _) = dense_spectrum(spec)?;
    Ok(vals[1] - vals[0])
}

/// Ground-state energy and vector of the dense Hamiltonian.
pub fn ground_state(spec: &ModelSpec) -> Result<(f64, Vec<f64>)> {
    let (vals, vecs, dim) = dense_spectrum(spec)?;
    let gs: Vec<f64> = (0..dim).map(|i| vecs[i * dim]).collect();
    Ok((vals[0], gs))
}

/// Embeds a bond operator on sites `(site, site+1)` into the dense space.
pub fn embed_bond_observable(term: &BondTerm, len: usize) -> Result<Vec<f64>> {
    let d = term.local_dim;
    let dim = checked_pow(d, len)?;
    let mut h = vec![0.0; dim * dim];
    add_bond_term(&mut h, &term.matrix, term.site, d, len);
    Ok(h)
}

pub mod free_fermion {
    //! Quasi-exact XX-chain reference from single-particle data.
    //!
    //! The XX chain maps to free fermions with open-boundary orbitals
    //! `phi_m(i) = sqrt(2/(L+1)) sin(pi m i / (L+1))` and energies
    //! `eps_m = cos(pi m / (L+1))`. The thermofield double of a quadratic
    //! Hamiltonian is Gaussian on the doubled chain, so the Schmidt
    //! spectrum across a cut is a free product over modes; the mode
    //! occupations come from the singular values of the restricted
    //! one-body matrix `K = 1 - 2N - 2P`.

    use crate::linalg;

    /// Single-particle energies of the open XX chain (coupling 1).
    pub fn single_particle_energies(len: usize) -> Vec<f64> {
        let lp = (len + 1) as f64;
        (1..=len)
            .map(|m| (std::f64::consts::PI * m as f64 / lp).cos())
            .collect()
    }

    /// Many-body gap of the open XX chain from single-particle energies.
    pub fn energy_gap(len: usize) -> f64 {
        single_particle_energies(len)
            .iter()
            .map(|e| e.abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Mode occupations of the doubled block (sites `1..=ell` of both
    /// copies) in the XX-chain thermofield double at inverse temperature
    /// `beta`.
    pub fn tds_mode_occupations(len: usize, beta: f64, ell: usize) -> Vec<f64> {
        assert!(ell >= 1 && ell < len, "cut outside chain");
        let lp = (len + 1) as f64;
        let eps = single_particle_energies(len);
        // F_ij = sum_m phi_m(i) phi_m(j) f(eps_m), G_ij = sum_m phi phi g_m
        let mut f = vec![0.0; ell * ell];
        let mut g = vec![0.0; ell * ell];
        for (m, &e) in eps.iter().enumerate() {
            let fm = 1.0 / (1.0 + (beta * e).exp());
            let gm = 1.0 / (2.0 * (0.5 * beta * e).cosh());
            let mm = (m + 1) as f64;
            for i in 0..ell {
                let pi = (std::f64::consts::PI * mm * (i + 1) as f64 / lp).sin();
                for j in 0..=i {
                    let pj = (std::f64::consts::PI * mm * (j + 1) as f64 / lp).sin();
                    let w = 2.0 / lp * pi * pj;
                    f[i * ell + j] += w * fm;
                    g[i * ell + j] += w * gm;
                }
            }
        }
        for i in 0..ell {
            for j in i + 1..ell {
                f[i * ell + j] = f[j * ell + i];
                g[i * ell + j] = g[j * ell + i];
            }
        }
        // K = [[1 - 2F, -2G], [2G^T, 1 - 2F]] on the 2*ell block modes
        let n = 2 * ell;
        let mut k = vec![0.0; n * n];
        for i in 0..ell {
            for j in 0..ell {
                let fij = f[i * ell + j];
                let gij = g[i * ell + j];
                k[i * n + j] = delta(i, j) - 2.0 * fij;
                k[(ell + i) * n + (ell + j)] = delta(i, j) - 2.0 * fij;
                k[i * n + (ell + j)] = -2.0 * gij;
                k[(ell + i) * n + j] = 2.0 * g[j * ell + i];
            }
        }
        // occupations p = (1 + nu)/2 with nu the singular values of K
        let (_, s, _) = linalg::thin_svd(n, n, &k).expect("free-fermion SVD");
        s.iter().map(|nu| (1.0 + nu.min(1.0)) / 2.0).collect()
    }

    fn delta(i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            0.0
        }
    }

    /// Rényi entropy of the block from its mode occupations.
    pub fn renyi_from_occupations(occ: &[f64], alpha: f64) -> f64 {
        assert!(alpha > 0.0);
        let mut total = 0.0;
        for &p in occ {
            let p = p.clamp(0.0, 1.0);
            let q = 1.0 - p;
            if alpha == 1.0 {
                let mut h = 0.0;
                if p > 0.0 {
                    h -= p * p.ln();
                }
                if q > 0.0 {
                    h -= q * q.ln();
                }
                total += h;
            } else {
                total += (p.powf(alpha) + q.powf(alpha)).ln() / (1.0 - alpha);
            }
        }
        total
    }

    /// Rényi entropy of the XX-chain TDS across the cut after site `ell`.
    pub fn tds_renyi(len: usize, beta: f64, ell: usize, alpha: f64) -> f64 {
        renyi_from_occupations(&tds_mode_occupations(len, beta, ell), alpha)
    }
}
