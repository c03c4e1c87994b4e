//! The four lattice Hamiltonians as sums of two-site bond terms.
//!
//! Every chain is open: a length-`L` model has exactly `L - 1` bond terms,
//! and on-site pieces (Bose-Hubbard interaction and chemical potential) are
//! split onto the adjacent bonds with half weight each, full weight at the
//! chain ends, so that the bond terms sum to the full Hamiltonian exactly.
//! Couplings are dimensionless (natural units).
//!
//! Spin operators are kept real: instead of `S^y` (purely imaginary in the
//! standard basis) the builders use `i S^y = (S^+ - S^-)/2`, so that
//! `S^x S^x + S^y S^y = S^x ⊗ S^x - (iS^y) ⊗ (iS^y)` stays real symmetric.

use crate::error::{Error, Result};

/// Which Hamiltonian to build.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Spin-1/2 XXZ chain with anisotropy `delta`.
    XxzHalf { delta: f64 },
    /// Isotropic Heisenberg chain of spin `two_s / 2`.
    HeisenbergSpinS { two_s: usize },
    /// Spin-1 chain with `cos(theta)` bilinear and `sin(theta)` biquadratic
    /// exchange.
    BilinearBiquadraticSpin1 { theta: f64 },
    /// Bose-Hubbard chain: hopping `j`, on-site repulsion `u`, chemical
    /// potential `mu`, at most `n_max` bosons per site.
    BoseHubbard { j: f64, u: f64, mu: f64, n_max: usize },
}

/// A model instance: Hamiltonian family plus chain length (open boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub length: usize,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, length: usize) -> Result<Self> {
        if length < 2 {
            return Err(Error::Parameter(format!("chain length {length} < 2")));
        }
        match kind {
            ModelKind::HeisenbergSpinS { two_s } if two_s == 0 => {
                return Err(Error::Parameter("spin must be positive".into()))
            }
            ModelKind::BoseHubbard { n_max, .. } if n_max == 0 => {
                return Err(Error::Parameter("n_max must be at least 1".into()))
            }
            _ => {}
        }
        Ok(Self { kind, length })
    }

    /// Local Hilbert-space dimension of one (undoubled) site.
    pub fn local_dim(&self) -> usize {
        match self.kind {
            ModelKind::XxzHalf { .. } => 2,
            ModelKind::HeisenbergSpinS { two_s } => two_s + 1,
            ModelKind::BilinearBiquadraticSpin1 { .. } => 3,
            ModelKind::BoseHubbard { n_max, .. } => n_max + 1,
        }
    }

    /// Stable identifier used in result files and checkpoints.
    pub fn model_id(&self) -> String {
        match &self.kind {
            ModelKind::XxzHalf { delta } => format!("xxz_half_D{}_L{}", fmt_param(*delta), self.length),
            ModelKind::HeisenbergSpinS { two_s } => {
                format!("heisenberg_2S{}_L{}", two_s, self.length)
            }
            ModelKind::BilinearBiquadraticSpin1 { theta } => {
                format!("blbq_spin1_th{}_L{}", fmt_param(*theta), self.length)
            }
            ModelKind::BoseHubbard { j, u, mu, n_max } => format!(
                "bose_hubbard_J{}_U{}_mu{}_n{}_L{}",
                fmt_param(*j),
                fmt_param(*u),
                fmt_param(*mu),
                n_max,
                self.length
            ),
        }
    }
}

fn fmt_param(x: f64) -> String {
    let s = format!("{x}");
    s.replace('-', "m").replace('.', "p")
}

/// One two-site term of the Hamiltonian, acting on sites `(site, site+1)`.
///
/// The matrix is the dense `d²×d²` operator on the physical pair, row-major
/// with the left site index major, and is symmetric to machine precision.
#[derive(Debug, Clone)]
pub struct BondTerm {
    pub site: usize,
    pub matrix: Vec<f64>,
    pub local_dim: usize,
}

impl BondTerm {
    pub fn pair_dim(&self) -> usize {
        self.local_dim * self.local_dim
    }
}

/// Real representations of the SU(2) generators for spin `two_s / 2`.
///
/// `isy` stores `i S^y`, which is real; the standard commutator
/// `[S^x, S^y] = i S^z` reads `[sx, isy] = -sz` in this representation.
#[derive(Debug, Clone)]
pub struct SpinOps {
    pub dim: usize,
    pub sx: Vec<f64>,
    pub isy: Vec<f64>,
    pub sz: Vec<f64>,
    pub splus: Vec<f64>,
    pub sminus: Vec<f64>,
}

/// Ladder-operator construction of spin matrices for spin `two_s / 2`.
pub fn spin_matrices(two_s: usize) -> Result<SpinOps> {
    if two_s == 0 {
        return Err(Error::Parameter("spin must be positive".into()));
    }
    let dim = two_s + 1;
    let s = two_s as f64 / 2.0;
    let m = |k: usize| s - k as f64; // basis ordered m = S, S-1, ..., -S
    let mut sz = vec![0.0; dim * dim];
    let mut splus = vec![0.0; dim * dim];
    for k in 0..dim {
        sz[k * dim + k] = m(k);
    }
    for k in 1..dim {
        // <m+1| S^+ |m> with m = m(k)
        let mk = m(k);
        splus[(k - 1) * dim + k] = (s * (s + 1.0) - mk * (mk + 1.0)).sqrt();
    }
    let sminus = transpose(&splus, dim);
    let mut sx = vec![0.0; dim * dim];
    let mut isy = vec![0.0; dim * dim];
    for i in 0..dim * dim {
        sx[i] = 0.5 * (splus[i] + sminus[i]);
        isy[i] = 0.5 * (splus[i] - sminus[i]);
    }
    Ok(SpinOps { dim, sx, isy, sz, splus, sminus })
}

/// Truncated bosonic ladder operators with at most `n_max` bosons.
///
/// On the truncated space the commutator picks up a boundary correction:
/// `[b, b†] = 1 - (n_max + 1) |n_max⟩⟨n_max|`.
#[derive(Debug, Clone)]
pub struct BosonOps {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub raise: Vec<f64>,
    pub number: Vec<f64>,
}

pub fn boson_matrices(n_max: usize) -> Result<BosonOps> {
    if n_max == 0 {
        return Err(Error::Parameter("n_max must be at least 1".into()));
    }
    let dim = n_max + 1;
    let mut lower = vec![0.0; dim * dim];
    let mut number = vec![0.0; dim * dim];
    for n in 1..dim {
        lower[(n - 1) * dim + n] = (n as f64).sqrt(); // b |n> = sqrt(n) |n-1>
    }
    for n in 0..dim {
        number[n * dim + n] = n as f64;
    }
    let raise = transpose(&lower, dim);
    Ok(BosonOps { dim, lower, raise, number })
}

/// Builds the list of `L - 1` bond terms whose sum is the Hamiltonian.
pub fn build_bond_terms(spec: &ModelSpec) -> Result<Vec<BondTerm>> {
    let d = spec.local_dim();
    let len = spec.length;
    match &spec.kind {
        ModelKind::XxzHalf { delta } => {
            let ops = spin_matrices(1)?;
            let mut h = kron(&ops.sx, &ops.sx, d, d);
            sub_assign(&mut h, &kron(&ops.isy, &ops.isy, d, d));
            add_scaled(&mut h, &kron(&ops.sz, &ops.sz, d, d), *delta);
            Ok(uniform_bonds(h, d, len))
        }
        ModelKind::HeisenbergSpinS { two_s } => {
            let ops = spin_matrices(*two_s)?;
            let h = heisenberg_exchange(&ops, d);
            Ok(uniform_bonds(h, d, len))
        }
        ModelKind::BilinearBiquadraticSpin1 { theta } => {
            let ops = spin_matrices(2)?;
            let ss = heisenberg_exchange(&ops, d);
            let mut ss2 = vec![0.0; ss.len()];
            crate::linalg::gemm(d * d, d * d, d * d, &ss, &ss, &mut ss2);
            let mut h = vec![0.0; ss.len()];
            add_scaled(&mut h, &ss, theta.cos());
            add_scaled(&mut h, &ss2, theta.sin());
            Ok(uniform_bonds(h, d, len))
        }
        ModelKind::BoseHubbard { j, u, mu, n_max } => {
            let ops = boson_matrices(*n_max)?;
            let mut hop = kron(&ops.raise, &ops.lower, d, d);
            add_assign(&mut hop, &kron(&ops.lower, &ops.raise, d, d));
            // on-site term U n(n-1)/2 - mu n
            let mut onsite = vec![0.0; d * d];
            for n in 0..d {
                let nf = n as f64;
                onsite[n * d + n] = u * nf * (nf - 1.0) / 2.0 - mu * nf;
            }
            let id = identity(d);
            let left = kron(&onsite, &id, d, d);
            let right = kron(&id, &onsite, d, d);
            let mut terms = Vec::with_capacity(len - 1);
            for i in 0..len - 1 {
                // interior sites share their on-site term between both
                // adjacent bonds; boundary sites put it all on their only bond
                let wl = if i == 0 { 1.0 } else { 0.5 };
                let wr = if i + 1 == len - 1 { 1.0 } else { 0.5 };
                let mut h = vec![0.0; d * d * d * d];
                add_scaled(&mut h, &hop, -j);
                add_scaled(&mut h, &left, wl);
                add_scaled(&mut h, &right, wr);
                terms.push(BondTerm { site: i, matrix: h, local_dim: d });
            }
            Ok(terms)
        }
    }
}

fn heisenberg_exchange(ops: &SpinOps, d: usize) -> Vec<f64> {
    let mut h = kron(&ops.sx, &ops.sx, d, d);
    sub_assign(&mut h, &kron(&ops.isy, &ops.isy, d, d));
    add_assign(&mut h, &kron(&ops.sz, &ops.sz, d, d));
    h
}

fn uniform_bonds(h: Vec<f64>, d: usize, len: usize) -> Vec<BondTerm> {
    (0..len - 1)
        .map(|i| BondTerm { site: i, matrix: h.clone(), local_dim: d })
        .collect()
}

/// Kronecker product of row-major square matrices (`da×da` and `db×db`).
pub fn kron(a: &[f64], b: &[f64], da: usize, db: usize) -> Vec<f64> {
    let n = da * db;
    let mut out = vec![0.0; n * n];
    for ia in 0..da {
        for ja in 0..da {
            let av = a[ia * da + ja];
            if av == 0.0 {
                continue;
            }
            for ib in 0..db {
                for jb in 0..db {
                    out[(ia * db + ib) * n + (ja * db + jb)] = av * b[ib * db + jb];
                }
            }
        }
    }
    out
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}

fn add_assign(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn sub_assign(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= y;
    }
}

fn add_scaled(a: &mut [f64], b: &[f64], c: f64) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += c * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn commutator(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
        let mut ab = vec![0.0; n * n];
        let mut ba = vec![0.0; n * n];
        linalg::gemm(n, n, n, a, b, &mut ab);
        linalg::gemm(n, n, n, b, a, &mut ba);
        for (x, y) in ab.iter_mut().zip(ba) {
            *x -= y;
        }
        ab
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let ops = spin_matrices(1).unwrap();
        assert_eq!(ops.sx, vec![0.0, 0.5, 0.5, 0.0]);
        assert_eq!(ops.sz, vec![0.5, 0.0, 0.0, -0.5]);
        assert_eq!(ops.isy, vec![0.0, 0.5, -0.5, 0.0]);
    }

    #[test]
    fn spin_commutators_and_casimir() {
        for two_s in [1usize, 2, 3] {
            let ops = spin_matrices(two_s).unwrap();
            let n = ops.dim;
            // [sx, i sy] = -sz in the real representation
            let c = commutator(&ops.sx, &ops.isy, n);
            let neg_sz: Vec<f64> = ops.sz.iter().map(|x| -x).collect();
            assert!(max_abs_diff(&c, &neg_sz) < 1e-12);
            // Casimir: sx^2 - (isy)^2 + sz^2 = S(S+1) 1
            let s = two_s as f64 / 2.0;
            let mut cas = vec![0.0; n * n];
            let mut tmp = vec![0.0; n * n];
            linalg::gemm(n, n, n, &ops.sx, &ops.sx, &mut tmp);
            add_assign(&mut cas, &tmp);
            linalg::gemm(n, n, n, &ops.isy, &ops.isy, &mut tmp);
            sub_assign(&mut cas, &tmp);
            linalg::gemm(n, n, n, &ops.sz, &ops.sz, &mut tmp);
            add_assign(&mut cas, &tmp);
            let mut expect = identity(n);
            for x in expect.iter_mut() {
                *x *= s * (s + 1.0);
            }
            assert!(max_abs_diff(&cas, &expect) < 1e-12, "Casimir failed for 2S={two_s}");
        }
    }

    #[test]
    fn boson_truncated_commutator() {
        for n_max in [1usize, 3, 5] {
            let ops = boson_matrices(n_max).unwrap();
            let n = ops.dim;
            let c = commutator(&ops.lower, &ops.raise, n);
            let mut expect = identity(n);
            expect[(n - 1) * n + (n - 1)] -= (n_max + 1) as f64;
            assert!(max_abs_diff(&c, &expect) < 1e-12);
            // b† b = n
            let mut num = vec![0.0; n * n];
            linalg::gemm(n, n, n, &ops.raise, &ops.lower, &mut num);
            assert!(max_abs_diff(&num, &ops.number) < 1e-12);
        }
    }

    #[test]
    fn hardcore_limit() {
        let ops = boson_matrices(1).unwrap();
        // b |1> = |0>
        assert_eq!(ops.lower, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn xxz_isotropic_bond_spectrum() {
        // Heisenberg bond: singlet -3/4, triplet 1/4
        let spec = ModelSpec::new(ModelKind::XxzHalf { delta: 1.0 }, 4).unwrap();
        let terms = build_bond_terms(&spec).unwrap();
        assert_eq!(terms.len(), 3);
        let (mut vals, _) = linalg::eigh_descending(4, &terms[0].matrix).unwrap();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-0.75, 0.25, 0.25, 0.25];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn xy_bond_spectrum() {
        let spec = ModelSpec::new(ModelKind::XxzHalf { delta: 0.0 }, 2).unwrap();
        let terms = build_bond_terms(&spec).unwrap();
        let (vals, _) = linalg::eigh_descending(4, &terms[0].matrix).unwrap();
        assert!((vals[0] - 0.5).abs() < 1e-12);
        assert!((vals[3] + 0.5).abs() < 1e-12);
        assert!(vals[1].abs() < 1e-12 && vals[2].abs() < 1e-12);
    }

    #[test]
    fn bond_terms_are_symmetric() {
        let specs = [
            ModelSpec::new(ModelKind::XxzHalf { delta: 3.0 }, 5).unwrap(),
            ModelSpec::new(ModelKind::HeisenbergSpinS { two_s: 3 }, 4).unwrap(),
            ModelSpec::new(ModelKind::BilinearBiquadraticSpin1 { theta: 0.3 }, 4).unwrap(),
            ModelSpec::new(ModelKind::BoseHubbard { j: 0.25, u: 1.0, mu: 0.5, n_max: 3 }, 4).unwrap(),
        ];
        for spec in &specs {
            let d2 = spec.local_dim() * spec.local_dim();
            for term in build_bond_terms(spec).unwrap() {
                for i in 0..d2 {
                    for j in 0..d2 {
                        let diff = (term.matrix[i * d2 + j] - term.matrix[j * d2 + i]).abs();
                        assert!(diff < 1e-12, "asymmetric bond term in {}", spec.model_id());
                    }
                }
            }
        }
    }

    #[test]
    fn bose_hubbard_number_operator_diagonal() {
        let ops = boson_matrices(5).unwrap();
        for n in 0..6 {
            assert_eq!(ops.number[n * 6 + n], n as f64);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(spin_matrices(0).is_err());
        assert!(boson_matrices(0).is_err());
        assert!(ModelSpec::new(ModelKind::XxzHalf { delta: 1.0 }, 1).is_err());
    }
}
