//! Imaginary-time evolution of the purification by truncated gate sweeps.
//!
//! Advancing the inverse temperature by `dtau` applies `exp(-dtau H / 2)`
//! to the physical legs: the ancilla legs are spectators, so a two-site
//! gate is the `d²×d²` bond exponential acting on the `s` components of
//! the fused indices. Layers alternate between even and odd bonds with
//! Trotter coefficients summing to one per parity over a full step.
//!
//! Truncation runs after every gate. The kept rank is the number of
//! normalized squared singular values at or above the cutoff, plus a
//! configurable pad of sub-cutoff states. The pad matters: weights are
//! born below the cutoff and grow through it, and a hard per-gate cutoff
//! repeatedly kills them at birth, which thins the spectrum by an amount
//! that accumulates linearly in gate count. A pad of a dozen states keeps
//! that bias orders of magnitude below the spectrum it protects, at a few
//! percent in rank.

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::BondTerm;
use crate::mps::{apply_pair_physical_op, BondSpectrum, PurificationMPS};
use crate::tensor::kept_rank;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// One gate layer of a Trotter step: all bonds of one parity, each gate
/// `exp(-coeff * dtau / 2 * h)`.
#[derive(Debug, Clone, Copy)]
pub struct TrotterLayer {
    pub parity: Parity,
    pub coeff: f64,
}

/// An ordered list of gate layers realizing one full step of size `dtau`.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    order: u8,
    dtau: f64,
    layers: Vec<TrotterLayer>,
}

impl TrotterPlan {
    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn layers(&self) -> &[TrotterLayer] {
        &self.layers
    }

    pub fn steps_per_unit_beta(&self) -> f64 {
        1.0 / self.dtau
    }

    /// Sum of layer coefficients for one parity (1 for a consistent plan).
    pub fn parity_sum(&self, parity: Parity) -> f64 {
        self.layers
            .iter()
            .filter(|l| l.parity == parity)
            .map(|l| l.coeff)
            .sum()
    }

    /// Stable 64-bit fingerprint of order, step size, and coefficients.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x100000001b3);
        };
        eat(self.order as u64);
        eat(self.dtau.to_bits());
        for l in &self.layers {
            eat(match l.parity {
                Parity::Even => 2,
                Parity::Odd => 3,
            });
            eat(l.coeff.to_bits());
        }
        h
    }
}

/// Builds a 2nd- or 4th-order Trotter plan at step size `dtau`.
///
/// Order 2 is the symmetric even/2–odd–even/2 split. Order 4 is the
/// five-fold fractal composition of the symmetric splitter with
/// coefficients `(p, p, 1-4p, p, p)`, `p = 1/(4 - 4^(1/3))`; the middle
/// coefficient is negative. Adjacent same-parity layers are merged.
pub fn build_trotter_plan(order: u8, dtau: f64) -> Result<TrotterPlan> {
    if !(dtau > 0.0) {
        return Err(Error::Parameter(format!("dtau {dtau} must be positive")));
    }
    let subs: Vec<f64> = match order {
        2 => vec![1.0],
        4 => {
            let p = 1.0 / (4.0 - 4.0f64.powf(1.0 / 3.0));
            vec![p, p, 1.0 - 4.0 * p, p, p]
        }
        _ => return Err(Error::Parameter(format!("unsupported Trotter order {order}"))),
    };
    let mut layers: Vec<TrotterLayer> = Vec::new();
    for c in subs {
        for (parity, coeff) in [
            (Parity::Even, 0.5 * c),
            (Parity::Odd, c),
            (Parity::Even, 0.5 * c),
        ] {
            match layers.last_mut() {
                Some(last) if last.parity == parity => last.coeff += coeff,
                _ => layers.push(TrotterLayer { parity, coeff }),
            }
        }
    }
    let plan = TrotterPlan { order, dtau, layers };
    debug_assert!((plan.parity_sum(Parity::Even) - 1.0).abs() < 1e-12);
    debug_assert!((plan.parity_sum(Parity::Odd) - 1.0).abs() < 1e-12);
    Ok(plan)
}

/// Dense bond-gate exponential `exp(-tau h)` on the physical pair.
///
/// `h` must be symmetric; the result is symmetric positive definite and is
/// applied to the `s` legs only.
pub fn gate_exponential(term: &BondTerm, tau: f64) -> Result<Vec<f64>> {
    let d2 = term.pair_dim();
    let m = &term.matrix;
    for i in 0..d2 {
        for j in 0..i {
            if (m[i * d2 + j] - m[j * d2 + i]).abs() > 1e-12 {
                return Err(Error::Parameter("bond term is not symmetric".into()));
            }
        }
    }
    linalg::sym_matrix_function(d2, m, |e| (-tau * e).exp())
}

/// Which factorization backs the per-gate truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationBackend {
    /// Gram eigendecomposition for wide bonds at loose cutoffs, thin SVD
    /// otherwise.
    #[default]
    Auto,
    Svd,
    GramEigh,
}

/// Per-gate truncation policy.
#[derive(Debug, Clone, Copy)]
pub struct TruncationPolicy {
    pub max_rank: Option<usize>,
    pub rel_weight_cutoff: f64,
    pub rank_pad: usize,
    pub backend: TruncationBackend,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            max_rank: None,
            rel_weight_cutoff: 1e-12,
            rank_pad: 16,
            backend: TruncationBackend::Auto,
        }
    }
}

/// Relative squared-weight below which kept states are pure round-off.
const NOISE_FLOOR: f64 = 1e-30;

/// Gram path pays off only for wide bonds, and its eigenvalues carry
/// O(n·eps) absolute noise, so tight cutoffs stay on the SVD path.
const GRAM_MIN_DIM: usize = 512;
const GRAM_MIN_CUTOFF: f64 = 1e-10;

/// Evolution run configuration.
#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub target_beta: f64,
    pub dtau: f64,
    pub order: u8,
    pub policy: TruncationPolicy,
    /// Inverse temperatures at which the observer fires (strictly
    /// increasing; every point must be an integer number of steps).
    pub measure_betas: Vec<f64>,
    /// Cap on total stored scalars across the chain.
    pub budget_scalars: Option<usize>,
}

impl EvolutionConfig {
    pub fn new(target_beta: f64, dtau: f64, order: u8) -> Self {
        Self {
            target_beta,
            dtau,
            order,
            policy: TruncationPolicy::default(),
            measure_betas: Vec::new(),
            budget_scalars: None,
        }
    }

    /// Number of whole steps for a beta value, if it is on the step grid.
    fn steps_for(&self, beta: f64) -> Result<u64> {
        let ratio = beta / self.dtau;
        let k = ratio.round();
        if (ratio - k).abs() > 1e-9 * ratio.abs().max(1.0) {
            return Err(Error::Parameter(format!(
                "beta {beta} is not an integer multiple of dtau {}",
                self.dtau
            )));
        }
        Ok(k as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_beta < 0.0 {
            return Err(Error::Parameter("target beta must be nonnegative".into()));
        }
        if !(self.dtau > 0.0) {
            return Err(Error::Parameter("dtau must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.policy.rel_weight_cutoff) {
            return Err(Error::Parameter("rel_weight_cutoff outside [0, 1)".into()));
        }
        let mut prev = -1.0;
        for &b in &self.measure_betas {
            if b < 0.0 || b > self.target_beta + 1e-12 {
                return Err(Error::Parameter(format!(
                    "measurement beta {b} outside [0, {}]",
                    self.target_beta
                )));
            }
            if b <= prev {
                return Err(Error::Parameter("measurement grid must be strictly increasing".into()));
            }
            prev = b;
            self.steps_for(b)?;
        }
        if self.target_beta > 0.0 {
            self.steps_for(self.target_beta)?;
        }
        Ok(())
    }
}

/// Read-only measurement snapshot passed to the observer.
#[derive(Debug, Clone)]
pub struct EvolutionSnapshot {
    pub beta: f64,
    pub spectra: Vec<BondSpectrum>,
    pub bond_dimensions: Vec<usize>,
    /// Total energy `⟨H⟩ = Tr(rho_beta H)`.
    pub energy: f64,
    pub log_norm: f64,
    /// Discarded weight per bond accumulated since the previous snapshot.
    pub eps_step: Vec<f64>,
}

/// Statistics from one two-site gate application.
#[derive(Debug, Clone, Copy)]
pub struct GateStats {
    pub discarded: f64,
    pub rank: usize,
}

/// Applies one two-site gate (physical legs only) at `bond` and truncates.
///
/// The working tensors follow the canonical-form update that avoids
/// dividing by small Schmidt values: with `theta = Λ_{l-1} B_i B_{i+1}` and
/// `theta = U S Vᵀ`, the new tensors are `B_{i+1} = Vᵀ` and
/// `B_i = (gate-applied B_i B_{i+1}) · V`, which equals `Λ⁻¹ U S` exactly
/// but stays finite when Schmidt values underflow.
pub fn apply_bond_gate(
    state: &mut PurificationMPS,
    bond: usize,
    gate: &[f64],
    policy: &TruncationPolicy,
) -> Result<GateStats> {
    let q = state.fused_dim();
    let d = state.local_dim();
    let (al, am) = {
        let a = &state.tensors[bond];
        (a.left, a.right)
    };
    let (bm, br) = {
        let b = &state.tensors[bond + 1];
        (b.left, b.right)
    };
    debug_assert_eq!(am, bm);

    // theta_tilde = B_i · B_{i+1}, gate applied, no left weights
    let mut theta = vec![0.0; al * q * q * br];
    linalg::gemm(
        al * q,
        am,
        q * br,
        &state.tensors[bond].data,
        &state.tensors[bond + 1].data,
        &mut theta,
    );
    let theta = apply_pair_physical_op(&theta, gate, al, d, br);

    // theta = Λ_{l-1} · theta_tilde (scale row blocks)
    let mut weighted = theta.clone();
    if bond > 0 {
        let lam: Vec<f64> = state.spectra[bond - 1].iter().map(|w| w.sqrt()).collect();
        let block = q * q * br;
        for (l, lam_l) in lam.iter().enumerate() {
            for x in weighted[l * block..(l + 1) * block].iter_mut() {
                *x *= lam_l;
            }
        }
    }

    let m = al * q;
    let n = q * br;
    let use_gram = match policy.backend {
        TruncationBackend::Svd => false,
        TruncationBackend::GramEigh => true,
        TruncationBackend::Auto => {
            n <= m && n >= GRAM_MIN_DIM && policy.rel_weight_cutoff >= GRAM_MIN_CUTOFF
        }
    };

    let (weights, vt_rows): (Vec<f64>, Vec<f64>) = if use_gram {
        let (w, v) = linalg::gram_right_vectors(m, n, &weighted)?;
        // columns of v to rows (transpose) lazily after rank selection
        (w, v)
    } else {
        let (_, s, vt) = linalg::thin_svd(m, n, &weighted)?;
        (s.iter().map(|x| x * x).collect(), vt)
    };

    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Numerical("gate produced a zero or non-finite state".into()));
    }
    let base = kept_rank(&weights, None, policy.rel_weight_cutoff).max(1);
    let noise_rank = kept_rank(&weights, None, NOISE_FLOOR).max(1);
    let mut rank = (base + policy.rank_pad).min(noise_rank).min(weights.len());
    if let Some(cap) = policy.max_rank {
        rank = rank.min(cap).max(1);
    }

    let kept: f64 = weights[..rank].iter().sum();
    let discarded = ((total - kept) / total).max(0.0);
    let nrm = kept.sqrt();

    // new right tensor: rows of Vᵀ
    let vt_kept: Vec<f64> = if use_gram {
        let mut out = vec![0.0; rank * n];
        for k in 0..rank {
            for j in 0..n {
                out[k * n + j] = vt_rows[j * n + k];
            }
        }
        out
    } else {
        vt_rows[..rank * n].to_vec()
    };

    // new left tensor: theta_tilde · V / nrm
    let mut left = vec![0.0; al * q * rank];
    linalg::gemm_nt(al * q, n, rank, &theta, &vt_kept, &mut left);
    let inv = 1.0 / nrm;
    for x in left.iter_mut() {
        *x *= inv;
    }

    state.spectra[bond] = weights[..rank].iter().map(|w| (w / kept).max(0.0)).collect();
    state.tensors[bond] = crate::mps::replace_site(al, rank, left);
    state.tensors[bond + 1] = crate::mps::replace_site(rank, br, vt_kept);
    state.add_log_norm(nrm.ln());
    state.set_loose();
    Ok(GateStats { discarded, rank })
}

/// Bond energies `⟨h_i⟩` of a canonical-form state, one per bond term.
pub fn bond_energies(state: &PurificationMPS, terms: &[BondTerm]) -> Result<Vec<f64>> {
    let q = state.fused_dim();
    let d = state.local_dim();
    let mut out = Vec::with_capacity(terms.len());
    for term in terms {
        let i = term.site;
        let a = &state.tensors[i];
        let b = &state.tensors[i + 1];
        let (l, m, r) = (a.left, a.right, b.right);
        let mut theta = vec![0.0; l * q * q * r];
        linalg::gemm(l * q, m, q * r, &a.data, &b.data, &mut theta);
        if i > 0 {
            let block = q * q * r;
            for (li, w) in state.spectra[i - 1].iter().enumerate() {
                let lam = w.sqrt();
                for x in theta[li * block..(li + 1) * block].iter_mut() {
                    *x *= lam;
                }
            }
        }
        let applied = apply_pair_physical_op(&theta, &term.matrix, l, d, r);
        let num = linalg::dot(&theta, &applied);
        let den = linalg::dot(&theta, &theta);
        if den <= 0.0 {
            return Err(Error::Numerical("zero-norm block in energy evaluation".into()));
        }
        out.push(num / den);
    }
    Ok(out)
}

/// Runs imaginary-time evolution to `config.target_beta`, invoking the
/// observer with a fresh canonical-form snapshot at every measurement
/// point. Gates act within even/odd layers in ascending bond order;
/// truncation follows every gate; the state stays normalized with the
/// divided-out norms accumulated in `log_norm`.
pub fn evolve(
    state: &mut PurificationMPS,
    terms: &[BondTerm],
    config: &EvolutionConfig,
    observer: &mut dyn FnMut(&EvolutionSnapshot),
) -> Result<()> {
    config.validate()?;
    let sites = state.len();
    if terms.len() != sites - 1 {
        return Err(Error::Dimension(format!(
            "{} bond terms for {} sites",
            terms.len(),
            sites
        )));
    }
    if terms.iter().any(|t| t.local_dim != state.local_dim()) {
        return Err(Error::Dimension("bond term local dimension mismatch".into()));
    }
    for (i, t) in terms.iter().enumerate() {
        if t.site != i {
            return Err(Error::Parameter("bond terms must be ordered by site".into()));
        }
    }

    let plan = build_trotter_plan(config.order, config.dtau)?;
    // Gates per (layer, bond-class): identical bond matrices share a gate.
    let mut classes: Vec<Vec<f64>> = Vec::new();
    let mut class_of = Vec::with_capacity(terms.len());
    for t in terms {
        let idx = classes.iter().position(|c| c == &t.matrix).unwrap_or_else(|| {
            classes.push(t.matrix.clone());
            classes.len() - 1
        });
        class_of.push(idx);
    }
    let mut gates: Vec<Vec<Vec<f64>>> = Vec::with_capacity(plan.layers().len());
    for layer in plan.layers() {
        let tau = layer.coeff * config.dtau * 0.5;
        let mut per_class = Vec::with_capacity(classes.len());
        for c in &classes {
            let term = BondTerm { site: 0, matrix: c.clone(), local_dim: state.local_dim() };
            per_class.push(gate_exponential(&term, tau)?);
        }
        gates.push(per_class);
    }

    let mut eps_accum = vec![0.0; sites - 1];
    let mut grid = config.measure_betas.iter().copied().peekable();

    // beta = 0 measurement before any step
    if let Some(&b0) = grid.peek() {
        if config.steps_for(b0)? == 0 {
            grid.next();
            emit(state, terms, 0.0, &mut eps_accum, observer)?;
        }
    }

    let total_steps = config.steps_for(config.target_beta)?;
    for step in 1..=total_steps {
        for (layer_idx, layer) in plan.layers().iter().enumerate() {
            let start = match layer.parity {
                Parity::Even => 0,
                Parity::Odd => 1,
            };
            for bond in (start..sites - 1).step_by(2) {
                let g = &gates[layer_idx][class_of[bond]];
                let stats = apply_bond_gate(state, bond, g, &config.policy)?;
                eps_accum[bond] += stats.discarded;
            }
            if let Some(budget) = config.budget_scalars {
                if state.scalar_count() > budget {
                    return Err(Error::Resource {
                        context: format!(
                            "state size {} exceeds budget {budget} scalars",
                            state.scalar_count()
                        ),
                        beta_reached: step as f64 * config.dtau,
                    });
                }
            }
        }
        let beta_now = step as f64 * config.dtau;
        if let Some(&next) = grid.peek() {
            if config.steps_for(next)? == step {
                grid.next();
                emit(state, terms, beta_now, &mut eps_accum, observer)?;
            }
        }
    }
    Ok(())
}

fn emit(
    state: &mut PurificationMPS,
    terms: &[BondTerm],
    beta: f64,
    eps_accum: &mut [f64],
    observer: &mut dyn FnMut(&EvolutionSnapshot),
) -> Result<()> {
    state.canonicalize(0)?;
    let energies = bond_energies(state, terms)?;
    let snapshot = EvolutionSnapshot {
        beta,
        spectra: state.all_spectra()?,
        bond_dimensions: state.bond_dimensions(),
        energy: energies.iter().sum(),
        log_norm: state.log_norm(),
        eps_step: eps_accum.to_vec(),
    };
    for e in eps_accum.iter_mut() {
        *e = 0.0;
    }
    observer(&snapshot);
    Ok(())
}
