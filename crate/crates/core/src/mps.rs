//! The thermofield double as a matrix product state over the doubled
//! local space.
//!
//! Every site carries the fused physical index `q = s * d + a` combining
//! the physical state `s` and its ancilla partner `a` (physical major).
//! Site tensors are 3-index `(left bond, q, right bond)` arrays, row-major,
//! with boundary bonds of extent 1. The state is kept at unit norm; scale
//! factors divided out along the way accumulate in `log_norm`, so the free
//! energy `-(2 log_norm + L ln d) / beta` stays recoverable after an
//! evolution run.
//!
//! The working gauge stores right-canonical tensors `B_i` (each playing
//! the role of the canonical-form tensor with its right Schmidt weights
//! absorbed) together with the bond spectra. Gate sweeps preserve this
//! form approximately; [`PurificationMPS::canonicalize`] rebuilds it
//! exactly by a full SVD cascade and refreshes every bond spectrum, and
//! all measurement paths do so first.

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::kept_rank;

/// Cap on dense conversions, in stored scalars.
pub const DENSE_SCALAR_CAP: usize = 1 << 24;

/// Schmidt weights at one spatial cut.
///
/// `weights` are the eigenvalues of the reduced density matrix of sites
/// `1..=bond` of both copies: descending, nonnegative, unit sum.
#[derive(Debug, Clone)]
pub struct BondSpectrum {
    pub bond: usize,
    pub weights: Vec<f64>,
}

impl BondSpectrum {
    /// Rényi entanglement entropy of this cut.
    pub fn renyi_entropy(&self, alpha: f64) -> Result<f64> {
        renyi_entropy(&self.weights, alpha)
    }

    /// Truncation error `sum_{k > rank} w_k`.
    pub fn tail_weight(&self, rank: usize) -> f64 {
        if rank >= self.weights.len() {
            0.0
        } else {
            self.weights[rank..].iter().sum()
        }
    }
}

/// Rényi entropy of a normalized weight distribution, natural logarithm.
///
/// `alpha = 1` is the von Neumann branch with `0 ln 0 := 0`; weights below
/// `1e-16` are clamped to zero before any logarithm so round-off negatives
/// cannot produce spurious infinities.
pub fn renyi_entropy(weights: &[f64], alpha: f64) -> Result<f64> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::Domain(format!("Renyi index {alpha} must be positive")));
    }
    if alpha == 1.0 {
        let mut s = 0.0;
        for &w in weights {
            if w >= 1e-16 {
                s -= w * w.ln();
            }
        }
        Ok(s.max(0.0))
    } else {
        let mut z = 0.0;
        for &w in weights {
            if w >= 1e-16 {
                z += w.powf(alpha);
            }
        }
        if z <= 0.0 {
            return Err(Error::Numerical("empty spectrum".into()));
        }
        Ok(z.ln() / (1.0 - alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    /// All tensors right-canonical, every bond spectrum fresh.
    Canonical,
    /// Mixed-canonical about a bond: left-canonical through `center`,
    /// right-canonical beyond it.
    Mixed { center: usize },
    /// Gate sweeps have run since the last cascade; tensors are
    /// approximately canonical and spectra approximately fresh.
    Loose,
}

#[derive(Debug, Clone)]
pub(crate) struct SiteTensor {
    pub left: usize,
    pub right: usize,
    pub data: Vec<f64>, // (left, q, right) row-major
}

impl SiteTensor {
    fn new(left: usize, q: usize, right: usize) -> Self {
        Self { left, right, data: vec![0.0; left * q * right] }
    }
}

/// Matrix product purification of a thermal state.
#[derive(Debug, Clone)]
pub struct PurificationMPS {
    d: usize,
    q: usize,
    pub(crate) tensors: Vec<SiteTensor>,
    /// Normalized squared Schmidt values per internal bond, descending.
    pub(crate) spectra: Vec<Vec<f64>>,
    log_norm: f64,
    gauge: Gauge,
}

impl PurificationMPS {
    /// The infinite-temperature thermofield double: a product of
    /// maximally entangled site-ancilla pairs with no spatial
    /// entanglement.
    pub fn infinite_temperature(d: usize, sites: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Parameter(format!("local dimension {d} < 2")));
        }
        if sites < 2 {
            return Err(Error::Parameter(format!("site count {sites} < 2")));
        }
        let q = d * d;
        let amp = 1.0 / (d as f64).sqrt();
        let tensors = (0..sites)
            .map(|_| {
                let mut t = SiteTensor::new(1, q, 1);
                for s in 0..d {
                    t.data[s * d + s] = amp;
                }
                t
            })
            .collect();
        Ok(Self {
            d,
            q,
            tensors,
            spectra: vec![vec![1.0]; sites - 1],
            log_norm: 0.0,
            gauge: Gauge::Canonical,
        })
    }

    /// Exact MPS factorization of a dense doubled-space vector by a
    /// cascade of SVDs from the right end, optionally truncating.
    pub fn from_dense(
        d: usize,
        sites: usize,
        amplitudes: &[f64],
        max_rank: Option<usize>,
        rel_weight_cutoff: f64,
    ) -> Result<Self> {
        if d < 2 || sites < 2 {
            return Err(Error::Parameter("need d >= 2 and at least 2 sites".into()));
        }
        let q = d * d;
        let expect: usize = q
            .checked_pow(sites as u32)
            .ok_or_else(|| Error::Size("doubled dimension overflow".into()))?;
        if amplitudes.len() != expect {
            return Err(Error::Dimension(format!(
                "vector length {} is not {q}^{sites}",
                amplitudes.len()
            )));
        }
        if !amplitudes.iter().all(|x| x.is_finite()) {
            return Err(Error::Numerical("non-finite amplitudes".into()));
        }
        let mut state = Self {
            d,
            q,
            tensors: (0..sites).map(|_| SiteTensor::new(1, q, 1)).collect(),
            spectra: vec![vec![1.0]; sites - 1],
            log_norm: 0.0,
            gauge: Gauge::Canonical,
        };
        // Split the rightmost site off at each step: rows index the first
        // i sites, columns the fused (site, right-bond) pair.
        let mut work = amplitudes.to_vec();
        let mut rows = expect / q;
        let mut right = 1usize;
        for site in (0..sites).rev() {
            let cols = q * right;
            let (u, s, vt) = linalg::thin_svd(rows, cols, &work)?;
            let weights: Vec<f64> = s.iter().map(|x| x * x).collect();
            let mut r = kept_rank(&weights, max_rank, rel_weight_cutoff).max(1);
            r = r.min(s.len());
            if site == 0 {
                // rows == 1: the single remaining factor is the site tensor
                let norm = s[0];
                if norm <= 0.0 {
                    return Err(Error::Numerical("zero-norm input vector".into()));
                }
                let mut data = vec![0.0; cols];
                // u is 1x1 = ±1
                for (k, slot) in data.iter_mut().enumerate() {
                    *slot = u[0].signum() * vt[k];
                }
                state.tensors[0] = SiteTensor { left: 1, right, data };
                state.log_norm += norm.ln();
                break;
            }
            let total: f64 = weights.iter().sum();
            let kept: f64 = weights[..r].iter().sum();
            let nrm = kept.sqrt();
            state.spectra[site - 1] = weights[..r].iter().map(|w| w / kept).collect();
            state.tensors[site] = SiteTensor { left: r, right, data: vt[..r * cols].to_vec() };
            let _ = total;
            // carry u * diag(s) leftward, renormalized
            rows /= q;
            let mut carry = vec![0.0; rows * q * r];
            let full = s.len();
            for i in 0..rows * q {
                for k in 0..r {
                    carry[i * r + k] = u[i * full + k] * s[k] / nrm;
                }
            }
            state.log_norm += nrm.ln();
            work = carry;
            right = r;
        }
        Ok(state)
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn fused_dim(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub(crate) fn add_log_norm(&mut self, delta: f64) {
        self.log_norm += delta;
    }

    pub(crate) fn set_log_norm(&mut self, value: f64) {
        self.log_norm = value;
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub(crate) fn set_loose(&mut self) {
        self.gauge = Gauge::Loose;
    }

    /// Bond dimensions at the `L - 1` internal bonds.
    pub fn bond_dimensions(&self) -> Vec<usize> {
        self.tensors[1..].iter().map(|t| t.left).collect()
    }

    /// Total stored scalars across all site tensors.
    pub fn scalar_count(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    /// Free energy implied by the accumulated normalization,
    /// `-(2 log_norm + L ln d) / beta`.
    pub fn free_energy(&self, beta: f64) -> f64 {
        -(2.0 * self.log_norm + self.len() as f64 * (self.d as f64).ln()) / beta
    }

    /// Rebuilds the canonical form exactly and refreshes all bond spectra.
    ///
    /// Two SVD cascades run over the chain: left-to-right producing
    /// left-canonical factors, then right-to-left rebuilding right-canonical
    /// tensors while reading off every Schmidt spectrum. With `center > 0` a
    /// partial third pass moves the orthogonality center to that bond. The
    /// represented state is unchanged up to the scalar absorbed into
    /// `log_norm`.
    pub fn canonicalize(&mut self, center: usize) -> Result<()> {
        let sites = self.len();
        if center >= sites {
            return Err(Error::Range(format!("center bond {center} outside 0..{}", sites - 1)));
        }
        if self.tensors.iter().any(|t| !t.data.iter().all(|x| x.is_finite())) {
            return Err(Error::Numerical("non-finite site tensor".into()));
        }
        self.sweep_left_canonical()?;
        self.sweep_right_canonical(None, 0.0, None)?;
        for i in 0..center {
            self.push_center_right(i)?;
        }
        self.gauge = if center == 0 { Gauge::Canonical } else { Gauge::Mixed { center } };
        Ok(())
    }

    /// Left-to-right cascade: leaves every tensor left-canonical and the
    /// state normalized, absorbing the norm into `log_norm`.
    fn sweep_left_canonical(&mut self) -> Result<()> {
        let sites = self.len();
        let q = self.q;
        let mut carry: Vec<f64> = vec![1.0];
        let mut carry_rows = 1usize;
        for i in 0..sites {
            let t = &self.tensors[i];
            let (l, r) = (t.left, t.right);
            // carry (carry_rows x l) · t (l x (q r)) -> m (carry_rows q x r)
            let mut m = vec![0.0; carry_rows * q * r];
            linalg::gemm(carry_rows, l, q * r, &carry, &t.data, &mut m);
            let rows = carry_rows * q;
            let (u, s, vt) = linalg::thin_svd(rows, r, &m)?;
            let rank = s.iter().take_while(|&&x| x > 0.0).count().max(1);
            let nrm = linalg::norm2(&s[..rank]);
            if nrm <= 0.0 {
                return Err(Error::Numerical("state collapsed to zero".into()));
            }
            let full = s.len();
            let mut a = vec![0.0; rows * rank];
            for row in 0..rows {
                a[row * rank..(row + 1) * rank].copy_from_slice(&u[row * full..row * full + rank]);
            }
            self.tensors[i] = SiteTensor { left: carry_rows, right: rank, data: a };
            if i + 1 == sites {
                // terminal scalar: rank == 1; absorb sign, log the norm
                let sign = vt[0].signum();
                if sign < 0.0 {
                    for x in self.tensors[i].data.iter_mut() {
                        *x = -*x;
                    }
                }
                self.log_norm += s[0].ln();
            } else {
                let mut c = vec![0.0; rank * r];
                for k in 0..rank {
                    for j in 0..r {
                        c[k * r + j] = s[k] / nrm * vt[k * r + j];
                    }
                }
                self.log_norm += nrm.ln();
                carry = c;
                carry_rows = rank;
            }
        }
        Ok(())
    }

    /// Right-to-left cascade over a left-canonical chain: rebuilds
    /// right-canonical tensors, refreshes all spectra, optionally truncates,
    /// and returns the per-bond discarded weights when truncating.
    pub(crate) fn sweep_right_canonical(
        &mut self,
        max_rank: Option<usize>,
        rel_weight_cutoff: f64,
        mut discarded: Option<&mut Vec<f64>>,
    ) -> Result<()> {
        let sites = self.len();
        let q = self.q;
        let mut carry: Vec<f64> = vec![1.0];
        let mut carry_cols = 1usize;
        for i in (0..sites).rev() {
            let t = &self.tensors[i];
            let (l, r) = (t.left, t.right);
            // t (l q x r) · carry (r x carry_cols) -> m (l x q carry_cols)
            let mut m = vec![0.0; l * q * carry_cols];
            linalg::gemm(l * q, r, carry_cols, &t.data, &carry, &mut m);
            let cols = q * carry_cols;
            let (u, s, vt) = linalg::thin_svd(l, cols, &m)?;
            if i == 0 {
                // l == 1: terminal scalar
                let norm = s[0];
                if norm <= 0.0 {
                    return Err(Error::Numerical("state collapsed to zero".into()));
                }
                let sign = u[0].signum();
                let mut data = vec![0.0; cols];
                for (k, slot) in data.iter_mut().enumerate() {
                    *slot = sign * vt[k];
                }
                self.tensors[0] = SiteTensor { left: 1, right: carry_cols, data };
                self.log_norm += norm.ln();
                break;
            }
            let weights: Vec<f64> = s.iter().map(|x| x * x).collect();
            let total: f64 = weights.iter().sum();
            let mut rank = kept_rank(&weights, max_rank, rel_weight_cutoff).max(1);
            rank = rank.min(s.len().max(1));
            let kept: f64 = weights[..rank].iter().sum();
            if let Some(out) = discarded.as_deref_mut() {
                out[i - 1] = ((total - kept) / total).max(0.0);
            }
            let nrm = kept.sqrt();
            self.spectra[i - 1] = weights[..rank].iter().map(|w| w / kept).collect();
            self.tensors[i] = SiteTensor { left: rank, right: carry_cols, data: vt[..rank * cols].to_vec() };
            let full = s.len();
            let mut c = vec![0.0; l * rank];
            for row in 0..l {
                for k in 0..rank {
                    c[row * rank + k] = u[row * full + k] * s[k] / nrm;
                }
            }
            self.log_norm += nrm.ln();
            carry = c;
            carry_cols = rank;
        }
        Ok(())
    }

    /// Moves the orthogonality center one bond to the right by splitting
    /// site `i` off to the left (no truncation; spectra unchanged).
    fn push_center_right(&mut self, i: usize) -> Result<()> {
        let q = self.q;
        let (l, r) = (self.tensors[i].left, self.tensors[i].right);
        let (u, s, vt) = linalg::thin_svd(l * q, r, &self.tensors[i].data)?;
        let rank = s.iter().take_while(|&&x| x > 0.0).count().max(1);
        let nrm = linalg::norm2(&s[..rank]);
        let full = s.len();
        let mut a = vec![0.0; l * q * rank];
        for row in 0..l * q {
            a[row * rank..(row + 1) * rank].copy_from_slice(&u[row * full..row * full + rank]);
        }
        self.tensors[i] = SiteTensor { left: l, right: rank, data: a };
        self.log_norm += nrm.ln();
        // absorb diag(s/nrm) vt into the next tensor
        let next = &self.tensors[i + 1];
        let (nl, nr) = (next.left, next.right);
        debug_assert_eq!(nl, r);
        let mut svt = vec![0.0; rank * r];
        for k in 0..rank {
            for j in 0..r {
                svt[k * r + j] = s[k] / nrm * vt[k * r + j];
            }
        }
        let mut merged = vec![0.0; rank * q * nr];
        linalg::gemm(rank, r, q * nr, &svt, &next.data, &mut merged);
        self.tensors[i + 1] = SiteTensor { left: rank, right: nr, data: merged };
        Ok(())
    }

    /// Schmidt spectrum at the cut after site `ell` (1-based).
    ///
    /// Reads the stored spectrum when the state is in canonical form;
    /// otherwise canonicalizes a working copy first, leaving `self`
    /// untouched.
    pub fn schmidt_spectrum(&self, ell: usize) -> Result<BondSpectrum> {
        if ell == 0 || ell >= self.len() {
            return Err(Error::Range(format!("bond {ell} outside 1..{}", self.len() - 1)));
        }
        match self.gauge {
            Gauge::Canonical | Gauge::Mixed { .. } => Ok(BondSpectrum {
                bond: ell,
                weights: self.spectra[ell - 1].clone(),
            }),
            Gauge::Loose => {
                let mut copy = self.clone();
                copy.canonicalize(0)?;
                Ok(BondSpectrum { bond: ell, weights: copy.spectra[ell - 1].clone() })
            }
        }
    }

    /// All bond spectra (canonicalizing a copy if needed).
    pub fn all_spectra(&self) -> Result<Vec<BondSpectrum>> {
        match self.gauge {
            Gauge::Canonical | Gauge::Mixed { .. } => Ok(self
                .spectra
                .iter()
                .enumerate()
                .map(|(i, w)| BondSpectrum { bond: i + 1, weights: w.clone() })
                .collect()),
            Gauge::Loose => {
                let mut copy = self.clone();
                copy.canonicalize(0)?;
                copy.all_spectra()
            }
        }
    }

    /// One full truncation sweep under the given policy.
    ///
    /// Returns the discarded weight per bond (relative to the normalized
    /// spectrum, reported before renormalization of the kept part).
    pub fn truncate_to(&mut self, max_rank: Option<usize>, rel_weight_cutoff: f64) -> Result<Vec<f64>> {
        let mut eps = vec![0.0; self.len() - 1];
        self.sweep_left_canonical()?;
        self.sweep_right_canonical(max_rank, rel_weight_cutoff, Some(&mut eps))?;
        self.gauge = Gauge::Canonical;
        Ok(eps)
    }

    /// Dense coefficient vector in the documented basis order.
    ///
    /// With `include_norm` the factor `exp(log_norm)` is multiplied back
    /// in, producing the unnormalized vector.
    pub fn to_dense(&self, include_norm: bool) -> Result<Vec<f64>> {
        let q = self.q;
        let mut size = 1usize;
        for _ in 0..self.len() {
            size = size
                .checked_mul(q)
                .filter(|&s| s <= DENSE_SCALAR_CAP)
                .ok_or_else(|| Error::Size(format!("dense size exceeds cap {DENSE_SCALAR_CAP}")))?;
        }
        let mut acc: Vec<f64> = vec![1.0];
        let mut rows = 1usize;
        let mut bond = 1usize;
        for t in &self.tensors {
            let mut next = vec![0.0; rows * q * t.right];
            linalg::gemm(rows, bond, q * t.right, &acc, &t.data, &mut next);
            rows *= q;
            bond = t.right;
            acc = next;
        }
        debug_assert_eq!(bond, 1);
        if include_norm {
            let f = self.log_norm.exp();
            for x in acc.iter_mut() {
                *x *= f;
            }
        }
        Ok(acc)
    }

    /// Expectation value of a one-site physical observable (a `d×d`
    /// matrix acting on the `s` leg only, identity on the ancilla), for
    /// the normalized state.
    pub fn expect_site(&self, op: &[f64], site: usize) -> Result<f64> {
        if site >= self.len() {
            return Err(Error::Range(format!("site {site} outside 0..{}", self.len() - 1)));
        }
        if op.len() != self.d * self.d {
            return Err(Error::Dimension("operator is not d x d".into()));
        }
        let embedded = embed_site_op(op, self.d);
        self.expect_embedded(&[(site, embedded)])
    }

    /// Expectation value of a two-site physical observable (`d²×d²` on the
    /// `s` legs of `site, site+1`), for the normalized state.
    pub fn expect_bond(&self, op: &[f64], site: usize) -> Result<f64> {
        if site + 1 >= self.len() {
            return Err(Error::Range(format!("bond at {site} outside chain")));
        }
        let d2 = self.d * self.d;
        if op.len() != d2 * d2 {
            return Err(Error::Dimension("operator is not d^2 x d^2".into()));
        }
        // split into per-site factors via an SVD of the reshuffled operator
        // is overkill here; contract the two-site block directly instead.
        self.expect_two_site(op, site)
    }

    /// Generic transfer-matrix expectation of single-site embedded
    /// operators; robust to any gauge.
    fn expect_embedded(&self, ops: &[(usize, Vec<f64>)]) -> Result<f64> {
        let q = self.q;
        // env_n: <psi|psi>, env_o: <psi|O|psi>, both as left environments
        let mut env_n: Vec<f64> = vec![1.0];
        let mut env_o: Vec<f64> = vec![1.0];
        let mut dim = 1usize;
        for (i, t) in self.tensors.iter().enumerate() {
            let (l, r) = (t.left, t.right);
            debug_assert_eq!(l, dim);
            let op = ops.iter().find(|(s, _)| *s == i).map(|(_, m)| m);
            env_n = transfer(&env_n, t, q, None);
            env_o = transfer(&env_o, t, q, op.map(|m| m.as_slice()));
            dim = r;
        }
        let norm = env_n[0];
        if norm <= 0.0 {
            return Err(Error::Numerical("state has zero norm".into()));
        }
        Ok(env_o[0] / norm)
    }

    fn expect_two_site(&self, op: &[f64], site: usize) -> Result<f64> {
        let q = self.q;
        let d = self.d;
        let mut env_n: Vec<f64> = vec![1.0];
        let mut env_o: Vec<f64> = vec![1.0];
        let mut i = 0usize;
        while i < self.len() {
            if i == site {
                // two-site block: theta = T_i · T_{i+1}
                let a = &self.tensors[i];
                let b = &self.tensors[i + 1];
                let (l, m, r) = (a.left, a.right, b.right);
                let mut theta = vec![0.0; l * q * q * r];
                linalg::gemm(l * q, m, q * r, &a.data, &b.data, &mut theta);
                let themed = apply_pair_physical_op(&theta, op, l, d, r);
                env_n = transfer_block(&env_n, &theta, &theta, l, q * q, r);
                env_o = transfer_block(&env_o, &theta, &themed, l, q * q, r);
                i += 2;
            } else {
                let t = &self.tensors[i];
                env_n = transfer(&env_n, t, q, None);
                env_o = transfer(&env_o, t, q, None);
                i += 1;
            }
        }
        let norm = env_n[0];
        if norm <= 0.0 {
            return Err(Error::Numerical("state has zero norm".into()));
        }
        Ok(env_o[0] / norm)
    }

    /// Residual of the right-orthonormality contraction at `site`:
    /// `max |sum_q B B^T - 1|`.
    pub fn right_orthonormality_residual(&self, site: usize) -> f64 {
        let t = &self.tensors[site];
        let (l, r) = (t.left, t.right);
        let q = self.q;
        // sum over (q, right): rows of the (l x q r) matrix
        let mut g = vec![0.0; l * l];
        linalg::gemm_nt(l, q * r, l, &t.data, &t.data, &mut g);
        let mut res = 0.0f64;
        for i in 0..l {
            for j in 0..l {
                let e = if i == j { 1.0 } else { 0.0 };
                res = res.max((g[i * l + j] - e).abs());
            }
        }
        res
    }
}

/// Builds a site tensor from raw parts (evolution-internal).
pub(crate) fn replace_site(left: usize, right: usize, data: Vec<f64>) -> SiteTensor {
    SiteTensor { left, right, data }
}

/// Left-environment transfer through one site, optionally with an embedded
/// one-site operator on the fused index.
fn transfer(env: &[f64], t: &SiteTensor, q: usize, op: Option<&[f64]>) -> Vec<f64> {
    let (l, r) = (t.left, t.right);
    // m = env (l x l) · t (l x q r)
    let mut m = vec![0.0; l * q * r];
    linalg::gemm(l, l, q * r, env, &t.data, &mut m);
    let bra: &[f64] = &t.data;
    let ket: Vec<f64>;
    let ket_ref: &[f64] = if let Some(o) = op {
        // apply op to the fused index of m: view m as (l, q, r)
        ket = apply_fused_op(&m, o, l, q, r);
        &ket
    } else {
        m.as_slice()
    };
    // env'_{r r'} = sum_{l q} bra[l,q,r] ket[l,q,r']
    let mut out = vec![0.0; r * r];
    linalg::gemm_tn(r, l * q, r, bra, ket_ref, &mut out);
    out
}

fn transfer_block(env: &[f64], bra: &[f64], ket: &[f64], l: usize, mid: usize, r: usize) -> Vec<f64> {
    // env (l x l) · ket (l x mid r), then contract with bra over (l, mid)
    let mut m = vec![0.0; l * mid * r];
    linalg::gemm(l, l, mid * r, env, ket, &mut m);
    let mut out = vec![0.0; r * r];
    linalg::gemm_tn(r, l * mid, r, bra, &m, &mut out);
    out
}

/// Applies a `q×q` operator to the fused index of a `(l, q, r)` tensor.
fn apply_fused_op(m: &[f64], op: &[f64], l: usize, q: usize, r: usize) -> Vec<f64> {
    // out[a, p, b] = sum_{p'} op[p, p'] m[a, p', b]
    let mut out = vec![0.0; l * q * r];
    for a in 0..l {
        let base = a * q * r;
        // op (q x q) · m_a (q x r)
        linalg::gemm(q, q, r, op, &m[base..base + q * r], &mut out[base..base + q * r]);
    }
    out
}

/// Embeds a physical one-site operator into the fused index:
/// `E[(s a), (s' a')] = op[s, s'] δ_{a a'}`.
pub fn embed_site_op(op: &[f64], d: usize) -> Vec<f64> {
    let q = d * d;
    let mut e = vec![0.0; q * q];
    for s in 0..d {
        for sp in 0..d {
            let v = op[s * d + sp];
            if v == 0.0 {
                continue;
            }
            for a in 0..d {
                e[(s * d + a) * q + (sp * d + a)] = v;
            }
        }
    }
    e
}

/// Applies a physical two-site operator (`d²×d²` on the `s` legs) to a
/// `(l, q, q, r)` two-site block, leaving ancilla legs untouched.
pub(crate) fn apply_pair_physical_op(theta: &[f64], op: &[f64], l: usize, d: usize, r: usize) -> Vec<f64> {
    let q = d * d;
    // theta layout: (l, s, a, t, b, r). Permute to (s, t, (l, a, b, r)),
    // multiply by op on (s t), permute back.
    let dims = [l, d, d, d, d, r];
    let perm = [1usize, 3, 0, 2, 4, 5];
    let fwd = permute6(theta, &dims, &perm);
    let rest = l * d * d * r;
    let mut mixed = vec![0.0; q * rest];
    linalg::gemm(q, q, rest, op, &fwd, &mut mixed);
    // inverse permutation of (s, t, l, a, b, r) back to (l, s, a, t, b, r)
    let dims2 = [d, d, l, d, d, r];
    let inv = [2usize, 0, 3, 1, 4, 5];
    permute6(&mixed, &dims2, &inv)
}

/// Strided 6-axis permutation: `out[idx[perm]] = in[idx]` reading the
/// output linearly.
pub(crate) fn permute6(data: &[f64], dims: &[usize; 6], perm: &[usize; 6]) -> Vec<f64> {
    let mut in_strides = [0usize; 6];
    let mut s = 1usize;
    for ax in (0..6).rev() {
        in_strides[ax] = s;
        s *= dims[ax];
    }
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let src_stride: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
    let n = data.len();
    let mut out = vec![0.0; n];
    let mut idx = [0usize; 6];
    let mut src = 0usize;
    for slot in out.iter_mut() {
        *slot = data[src];
        for ax in (0..6).rev() {
            idx[ax] += 1;
            src += src_stride[ax];
            if idx[ax] < out_dims[ax] {
                break;
            }
            idx[ax] = 0;
            src -= out_dims[ax] * src_stride[ax];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_temperature_structure() {
        let st = PurificationMPS::infinite_temperature(2, 4).unwrap();
        let amp = 1.0 / 2.0f64.sqrt();
        for t in &st.tensors {
            assert_eq!((t.left, t.right), (1, 1));
            assert_eq!(t.data.len(), 4);
            assert!((t.data[0] - amp).abs() < 1e-15);
            assert!(t.data[1].abs() < 1e-15 && t.data[2].abs() < 1e-15);
            assert!((t.data[3] - amp).abs() < 1e-15);
        }
        for ell in 1..4 {
            let s = st.schmidt_spectrum(ell).unwrap();
            assert_eq!(s.weights, vec![1.0]);
            for alpha in [0.5, 1.0, 2.0] {
                assert_eq!(s.renyi_entropy(alpha).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn beta_zero_dense_vector() {
        let st = PurificationMPS::infinite_temperature(2, 2).unwrap();
        let v = st.to_dense(false).unwrap();
        assert_eq!(v.len(), 16);
        // (|00>+|11>) ⊗ (|00>+|11>) / 2 in the fused site-major basis
        for (i, &x) in v.iter().enumerate() {
            let q0 = i / 4;
            let q1 = i % 4;
            let expect = if (q0 == 0 || q0 == 3) && (q1 == 0 || q1 == 3) { 0.5 } else { 0.0 };
            assert!((x - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn renyi_entropy_values() {
        assert_eq!(renyi_entropy(&[1.0], 0.7).unwrap(), 0.0);
        let u = vec![0.25; 4];
        assert!((renyi_entropy(&u, 2.0).unwrap() - 4.0f64.ln()).abs() < 1e-12);
        assert!((renyi_entropy(&u, 1.0).unwrap() - 4.0f64.ln()).abs() < 1e-12);
        let w = [0.5, 0.25, 0.25];
        let expect = -(0.375f64).ln();
        assert!((renyi_entropy(&w, 2.0).unwrap() - expect).abs() < 1e-12);
        assert!(renyi_entropy(&w, 0.0).is_err());
        assert!(renyi_entropy(&w, -1.0).is_err());
    }

    #[test]
    fn renyi_alpha_limit_matches_von_neumann() {
        let w = [0.4, 0.3, 0.2, 0.1];
        let s1 = renyi_entropy(&w, 1.0).unwrap();
        for da in [1e-4, -1e-4] {
            let s = renyi_entropy(&w, 1.0 + da).unwrap();
            assert!((s - s1).abs() < 1e-3);
        }
    }

    #[test]
    fn canonicalize_is_idempotent_on_product_state() {
        let mut st = PurificationMPS::infinite_temperature(2, 4).unwrap();
        st.canonicalize(0).unwrap();
        let first: Vec<Vec<f64>> = st.spectra.clone();
        st.canonicalize(0).unwrap();
        for (a, b) in first.iter().zip(&st.spectra) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        for i in 0..4 {
            assert!(st.right_orthonormality_residual(i) < 1e-12);
        }
    }

    #[test]
    fn dense_roundtrip_random_vector() {
        // deterministic pseudo-random normalized vector, L=4, d=2
        let n = 4usize.pow(4);
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let x = ((i * 2654435761) % 1000003) as f64 / 1000003.0;
                x - 0.5
            })
            .collect();
        let nrm = linalg::norm2(&v);
        for x in v.iter_mut() {
            *x /= nrm;
        }
        let st = PurificationMPS::from_dense(2, 4, &v, None, 0.0).unwrap();
        let w = st.to_dense(true).unwrap();
        let mut max = 0.0f64;
        for (a, b) in v.iter().zip(&w) {
            max = max.max((a - b).abs());
        }
        assert!(max < 1e-10, "roundtrip deviation {max}");
    }

    #[test]
    fn from_dense_spectra_match_gram_eigenvalues() {
        let n = 4usize.pow(4);
        let mut v: Vec<f64> = (0..n).map(|i| (((i * 48271) % 65537) as f64 / 65537.0) - 0.5).collect();
        let nrm = linalg::norm2(&v);
        for x in v.iter_mut() {
            *x /= nrm;
        }
        let st = PurificationMPS::from_dense(2, 4, &v, None, 0.0).unwrap();
        for ell in 1..4 {
            let spec = st.schmidt_spectrum(ell).unwrap();
            let rows = 4usize.pow(ell as u32);
            let w = crate::oracle::pure_state_spectrum(&v, 4, 4, ell).unwrap();
            let _ = rows;
            for (k, &x) in spec.weights.iter().enumerate() {
                assert!((x - w[k]).abs() < 1e-10, "bond {ell} weight {k}");
            }
        }
    }

    #[test]
    fn canonicalize_preserves_state_and_center() {
        let n = 4usize.pow(5);
        let mut v: Vec<f64> = (0..n).map(|i| (((i * 69621) % 233280) as f64 / 233280.0) - 0.5).collect();
        let nrm = linalg::norm2(&v);
        for x in v.iter_mut() {
            *x /= nrm;
        }
        let mut st = PurificationMPS::from_dense(2, 5, &v, None, 0.0).unwrap();
        let before = st.to_dense(true).unwrap();
        st.canonicalize(2).unwrap();
        let after = st.to_dense(true).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-10);
        }
        // sites right of the center are right-orthonormal
        for i in 3..5 {
            assert!(st.right_orthonormality_residual(i) < 1e-10);
        }
    }

    #[test]
    fn truncate_reports_discarded_weight() {
        // build a two-site state with a known spectrum {0.7, 0.2, 0.1}
        let lams = [0.7f64, 0.2, 0.1];
        // |psi> = sum_k sqrt(w_k) |k>|k> on a d=2 doubled pair (q=4)
        let mut v = vec![0.0; 16];
        for (k, w) in lams.iter().enumerate() {
            v[k * 4 + k] = w.sqrt();
        }
        let mut st = PurificationMPS::from_dense(2, 2, &v, None, 0.0).unwrap();
        let eps = st.truncate_to(Some(2), 0.0).unwrap();
        assert_eq!(eps.len(), 1);
        assert!((eps[0] - 0.1).abs() < 1e-12);
        let spec = st.schmidt_spectrum(1).unwrap();
        assert_eq!(spec.weights.len(), 2);
        assert!((spec.weights[0] - 0.7 / 0.9).abs() < 1e-12);
        // no-op truncation reports zeros
        let eps2 = st.truncate_to(Some(4), 1e-15).unwrap();
        assert!(eps2[0].abs() < 1e-12);
    }

    #[test]
    fn expectation_identity_is_one() {
        let st = PurificationMPS::infinite_temperature(3, 4).unwrap();
        let id = crate::models::identity(3);
        for site in 0..4 {
            assert!((st.expect_site(&id, site).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sz_vanishes_at_infinite_temperature() {
        let st = PurificationMPS::infinite_temperature(2, 4).unwrap();
        let sz = vec![0.5, 0.0, 0.0, -0.5];
        for site in 0..4 {
            assert!(st.expect_site(&sz, site).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn two_site_maximally_entangled_cut() {
        // maximally entangled pair across the cut, doubled d=2: uniform 1/4
        let mut v = vec![0.0; 16];
        // |phi> = (1/2) sum_{q} |q>|q> over the fused index q = 0..3
        for qq in 0..4 {
            v[qq * 4 + qq] = 0.5;
        }
        let st = PurificationMPS::from_dense(2, 2, &v, None, 0.0).unwrap();
        let s = st.schmidt_spectrum(1).unwrap();
        assert_eq!(s.weights.len(), 4);
        for &w in &s.weights {
            assert!((w - 0.25).abs() < 1e-12);
        }
        assert!((s.renyi_entropy(2.0).unwrap() - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn dense_cap_enforced() {
        let st = PurificationMPS::infinite_temperature(6, 12).unwrap();
        assert!(matches!(st.to_dense(false), Err(Error::Size(_))));
    }

    #[test]
    fn out_of_range_errors() {
        let st = PurificationMPS::infinite_temperature(2, 3).unwrap();
        assert!(st.schmidt_spectrum(0).is_err());
        assert!(st.schmidt_spectrum(3).is_err());
        let sz = vec![0.5, 0.0, 0.0, -0.5];
        assert!(st.expect_site(&sz, 3).is_err());
    }
}
