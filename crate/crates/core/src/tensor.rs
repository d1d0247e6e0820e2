//! Dense complex linear algebra over multiparty Hilbert spaces.
//!
//! Amplitudes are stored row-major over party indices with party 0 the most
//! significant digit, so `|i_0 i_1 … i_{n-1}⟩` lives at
//! `Σ_k i_k · Π_{j>k} d_j`. Parties are 0-based throughout the API.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_capacity, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues above this (negative) value are treated as rounding noise.
pub const PSD_TOL: f64 = 1e-10;
/// Relative floor below which eigenvalues are zeroed before taking powers.
pub const SPECTRAL_FLOOR: f64 = 1e-13;
/// Schmidt coefficients below this are dropped.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartyLayout {
    dims: Vec<usize>,
}

impl PartyLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::layout("a layout needs at least one party"));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::layout(format!("local dimension {d} is below 2")));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total.checked_mul(d).unwrap_or(usize::MAX);
            check_capacity(total)?;
        }
        Ok(Self { dims })
    }

    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::uniform(n, 2)
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, party: usize) -> usize {
        self.dims[party]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_all_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    pub fn is_uniform(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.n()];
        for k in (0..self.n().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.n()];
        for k in (0..self.n()).rev() {
            digits[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        digits
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    /// Layout of the given parties, in the order given.
    pub fn sub_layout(&self, parties: &[usize]) -> Result<Self> {
        Self::new(parties.iter().map(|&p| self.dims[p]).collect())
    }

    pub(crate) fn check_parties(&self, parties: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.n()];
        for &p in parties {
            if p >= self.n() {
                return Err(Error::layout(format!(
                    "party {p} out of range for {} parties",
                    self.n()
                )));
            }
            if seen[p] {
                return Err(Error::layout(format!("party {p} listed twice")));
            }
            seen[p] = true;
        }
        Ok(())
    }

    /// For every full basis index, its position inside the `parties` subsystem
    /// and inside the complement (both in increasing party order within each).
    pub fn split_indices(&self, parties: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut inside = vec![false; self.n()];
        for &p in parties {
            inside[p] = true;
        }
        let total = self.total_dim();
        let mut a_idx = vec![0; total];
        let mut b_idx = vec![0; total];
        for (idx, (a, b)) in a_idx.iter_mut().zip(b_idx.iter_mut()).enumerate() {
            let digits = self.digits(idx);
            for &p in parties {
                *a = *a * self.dims[p] + digits[p];
            }
            for (p, &d) in digits.iter().enumerate() {
                if !inside[p] {
                    *b = *b * self.dims[p] + d;
                }
            }
        }
        (a_idx, b_idx)
    }

    /// Maps each basis index to its image when party `k` is moved to slot `perm[k]`.
    pub fn permutation_indices(&self, perm: &[usize]) -> Result<Vec<usize>> {
        if perm.len() != self.n() {
            return Err(Error::layout("permutation length differs from party count"));
        }
        self.check_parties(perm)?;
        for (k, &target) in perm.iter().enumerate() {
            if self.dims[k] != self.dims[target] {
                return Err(Error::layout(format!(
                    "cannot move party {k} (d={}) onto slot {target} (d={})",
                    self.dims[k], self.dims[target]
                )));
            }
        }
        Ok((0..self.total_dim())
            .map(|idx| {
                let digits = self.digits(idx);
                let mut moved = vec![0; self.n()];
                for (k, &target) in perm.iter().enumerate() {
                    moved[target] = digits[k];
                }
                self.index(&moved)
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: PartyLayout,
    amps: CVector,
}

impl PureState {
    /// Wraps an amplitude vector that must already have unit norm.
    pub fn new(layout: PartyLayout, amps: CVector) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::layout(format!(
                "amplitude vector has length {}, layout needs {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        let norm_sq = amps.norm_squared();
        if (norm_sq.sqrt() - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!(
                "state norm {} differs from 1",
                norm_sq.sqrt()
            )));
        }
        Ok(Self { layout, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(layout: PartyLayout, mut amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::arg("cannot normalize a zero or non-finite vector"));
        }
        amps.unscale_mut(norm);
        Self::new(layout, amps)
    }

    /// Builds a normalized state from `(digits, amplitude)` terms; repeated
    /// digit strings accumulate.
    pub fn from_terms(layout: PartyLayout, terms: &[(Vec<usize>, C64)]) -> Result<Self> {
        let mut amps = CVector::zeros(layout.total_dim());
        for (digits, a) in terms {
            if digits.len() != layout.n() || digits.iter().zip(layout.dims()).any(|(i, d)| i >= d) {
                return Err(Error::layout(format!("digit string {digits:?} does not fit layout")));
            }
            amps[layout.index(digits)] += *a;
        }
        Self::normalized(layout, amps)
    }

    pub fn basis(layout: PartyLayout, digits: &[usize]) -> Result<Self> {
        Self::from_terms(layout, &[(digits.to_vec(), c(1.0))])
    }

    pub fn layout(&self) -> &PartyLayout {
        &self.layout
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn amp(&self, digits: &[usize]) -> C64 {
        self.amps[self.layout.index(digits)]
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    pub fn to_density(&self) -> DensityOp {
        DensityOp {
            layout: self.layout.clone(),
            mat: self.projector(),
        }
    }

    /// ⟨ψ|op|ψ⟩ for a full-space operator.
    pub fn expect(&self, op: &CMatrix) -> Result<f64> {
        if op.nrows() != self.amps.len() || op.ncols() != self.amps.len() {
            return Err(Error::layout("operator dimension does not match state"));
        }
        Ok(self.amps.dotc(&(op * &self.amps)).re)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp {
    layout: PartyLayout,
    mat: CMatrix,
}

impl DensityOp {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(layout: PartyLayout, mat: CMatrix) -> Result<Self> {
        let dim = layout.total_dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::layout(format!(
                "density matrix is {}x{}, layout needs {dim}x{dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm = hermiticity_defect(&mat);
        if herm > HERMITIAN_TOL {
            return Err(Error::Invariant(format!("density matrix not Hermitian (defect {herm:e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Invariant(format!("trace {tr} differs from 1")));
        }
        let eig = herm_eig(&mat)?;
        if let Some(&min) = eig.values.last() {
            if min < -PSD_TOL {
                return Err(Error::Invariant(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(Self { layout, mat })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_parts_unchecked(layout: PartyLayout, mat: CMatrix) -> Self {
        Self { layout, mat }
    }

    pub fn maximally_mixed(layout: PartyLayout) -> Self {
        let dim = layout.total_dim();
        let mat = CMatrix::identity(dim, dim).unscale(dim as f64);
        Self { layout, mat }
    }

    /// Convex combination. Weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityOp)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::arg("empty mixture"))?
            .1;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::arg("mixture weights must be non-negative and sum to 1"));
        }
        let dim = first.dim();
        let mut mat = CMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.layout != first.layout {
                return Err(Error::layout("mixture components have different layouts"));
            }
            mat += rho.mat.scale(*w);
        }
        Ok(Self::from_parts_unchecked(first.layout.clone(), mat))
    }

    pub fn layout(&self) -> &PartyLayout {
        &self.layout
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn purity(&self) -> f64 {
        // tr ρ² = Σ|ρ_ij|² for Hermitian ρ
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }
}

/// A cut of the parties into two non-empty, complementary sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    pub fn new(left: &[usize], n: usize) -> Result<Self> {
        let mut left = left.to_vec();
        left.sort_unstable();
        left.dedup();
        if left.is_empty() || left.len() >= n || left.iter().any(|&p| p >= n) {
            return Err(Error::arg(format!(
                "{left:?} is not a proper non-empty subset of {n} parties"
            )));
        }
        let right = (0..n).filter(|p| left.binary_search(p).is_err()).collect();
        Ok(Self { left, right })
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    /// All 2^{n-1} - 1 cuts, each listed once with party 0 on the left.
    pub fn all(n: usize) -> Vec<Bipartition> {
        if n < 2 {
            return Vec::new();
        }
        (0..(1usize << (n - 1)) - 1)
            .map(|mask| {
                // party 0 always on the left; bits of mask pick the rest
                let left: Vec<usize> = std::iter::once(0)
                    .chain((1..n).filter(|p| mask >> (p - 1) & 1 == 1))
                    .collect();
                Bipartition::new(&left, n).expect("enumerated cut is valid")
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SchmidtResult {
    pub cut: Bipartition,
    /// Descending, all above the drop cutoff.
    pub coeffs: Vec<f64>,
    pub left_basis: Vec<CVector>,
    pub right_basis: Vec<CVector>,
}

impl SchmidtResult {
    pub fn squared(&self) -> Vec<f64> {
        self.coeffs.iter().map(|l| l * l).collect()
    }

    pub fn leading_weight(&self) -> f64 {
        self.coeffs.first().map_or(0.0, |l| l * l)
    }

    /// Reassembles Σ λ_i |φ_i⟩|ψ_i⟩ in the original party order.
    pub fn reconstruct(&self, layout: &PartyLayout) -> CVector {
        let (l_idx, r_idx) = layout.split_indices(&self.cut.left);
        let mut out = CVector::zeros(layout.total_dim());
        for (full, (l, r)) in l_idx.iter().zip(&r_idx).enumerate() {
            out[full] = self
                .coeffs
                .iter()
                .zip(self.left_basis.iter().zip(&self.right_basis))
                .map(|(&lam, (u, v))| u[*l] * v[*r] * lam)
                .sum();
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct HermEig {
    /// Descending.
    pub values: Vec<f64>,
    /// Column k is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl HermEig {
    /// V f(w) V† with f applied to the (floored) spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &w) in self.values.iter().enumerate() {
            let fw = f(w);
            scaled.column_mut(k).scale_mut(fw);
        }
        scaled * self.vectors.adjoint()
    }

    /// Spectrum after clamping rounding noise to zero; errors on genuinely
    /// negative eigenvalues.
    pub fn psd_spectrum(&self) -> Result<Vec<f64>> {
        let top = self.values.first().copied().unwrap_or(0.0).max(1.0);
        self.values
            .iter()
            .map(|&w| {
                if w < -PSD_TOL {
                    Err(Error::Invariant(format!("negative eigenvalue {w:e} in PSD power")))
                } else if w <= SPECTRAL_FLOOR * top {
                    Ok(0.0)
                } else {
                    Ok(w)
                }
            })
            .collect()
    }

    /// ρ^p for a PSD operator, reusing this decomposition.
    pub fn psd_power(&self, p: f64) -> Result<CMatrix> {
        let spectrum = self.psd_spectrum()?;
        let mut scaled = self.vectors.clone();
        for (k, &w) in spectrum.iter().enumerate() {
            let fw = if w == 0.0 { 0.0 } else { w.powf(p) };
            scaled.column_mut(k).scale_mut(fw);
        }
        Ok(scaled * self.vectors.adjoint())
    }
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Tensor product `a ⊗ b`; the result dimension is capped.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_capacity(a.nrows().saturating_mul(b.nrows()))?;
    check_capacity(a.ncols().saturating_mul(b.ncols()))?;
    Ok(a.kronecker(b))
}

pub fn kron_vec(a: &CVector, b: &CVector) -> Result<CVector> {
    check_capacity(a.len().saturating_mul(b.len()))?;
    Ok(a.kronecker(b))
}

/// 𝟙 ⊗ … ⊗ op ⊗ … ⊗ 𝟙 with `op` on `site`.
pub fn embed_site_op(op: &CMatrix, site: usize, layout: &PartyLayout) -> Result<CMatrix> {
    if site >= layout.n() {
        return Err(Error::layout(format!("site {site} out of range")));
    }
    let d = layout.dim(site);
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::layout(format!(
            "site {site} has dimension {d}, operator is {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    let before: usize = layout.dims()[..site].iter().product();
    let after: usize = layout.dims()[site + 1..].iter().product();
    let left = CMatrix::identity(before, before);
    let right = CMatrix::identity(after, after);
    Ok(left.kronecker(op).kronecker(&right))
}

/// m · (𝟙 ⊗ … ⊗ op ⊗ … ⊗ 𝟙) without materializing the embedded operator.
pub fn mul_site_op_right(m: &CMatrix, op: &CMatrix, site: usize, layout: &PartyLayout) -> Result<CMatrix> {
    if site >= layout.n() {
        return Err(Error::layout(format!("site {site} out of range")));
    }
    let d = layout.dim(site);
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::layout(format!(
            "site {site} has dimension {d}, operator is {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    let dim = layout.total_dim();
    if m.ncols() != dim {
        return Err(Error::layout("matrix width does not match the layout"));
    }
    let stride: usize = layout.dims()[site + 1..].iter().product();
    let mut out = CMatrix::zeros(m.nrows(), dim);
    for col in 0..dim {
        let b = (col / stride) % d;
        let base = col - b * stride;
        for a in 0..d {
            let w = op[(a, b)];
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            out.column_mut(col).axpy(w, &m.column(base + a * stride), C64::new(1.0, 0.0));
        }
    }
    Ok(out)
}

fn sorted_keep(layout: &PartyLayout, keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::arg("partial trace needs at least one kept party"));
    }
    layout.check_parties(keep)?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    Ok(keep)
}

/// Reduced density operator on `keep` (returned in increasing party order).
pub fn partial_trace(rho: &DensityOp, keep: &[usize]) -> Result<DensityOp> {
    let layout = rho.layout();
    let keep = sorted_keep(layout, keep)?;
    let sub = layout.sub_layout(&keep)?;
    let (k_idx, t_idx) = layout.split_indices(&keep);
    let dk = sub.total_dim();
    let dt = layout.total_dim() / dk;
    // full index for every (trace, keep) pair
    let mut table = vec![0usize; dk * dt];
    for full in 0..layout.total_dim() {
        table[t_idx[full] * dk + k_idx[full]] = full;
    }
    let m = rho.mat();
    let mut out = CMatrix::zeros(dk, dk);
    for t in 0..dt {
        let row = &table[t * dk..(t + 1) * dk];
        for (a, &ia) in row.iter().enumerate() {
            for (b, &ib) in row.iter().enumerate() {
                out[(a, b)] += m[(ia, ib)];
            }
        }
    }
    Ok(DensityOp::from_parts_unchecked(sub, out))
}

/// Amplitudes reshaped into a (left × right) matrix for the given party split.
pub fn cut_matrix(psi: &PureState, left: &[usize]) -> Result<CMatrix> {
    let layout = psi.layout();
    let left = sorted_keep(layout, left)?;
    let dl: usize = left.iter().map(|&p| layout.dim(p)).product();
    let dr = layout.total_dim() / dl;
    let (l_idx, r_idx) = layout.split_indices(&left);
    let mut m = CMatrix::zeros(dl, dr);
    for (full, amp) in psi.amps().iter().enumerate() {
        m[(l_idx[full], r_idx[full])] = *amp;
    }
    Ok(m)
}

/// ρ_keep of a pure state, computed as M M† without forming |ψ⟩⟨ψ|.
pub fn reduced_from_pure(psi: &PureState, keep: &[usize]) -> Result<DensityOp> {
    let keep = sorted_keep(psi.layout(), keep)?;
    let sub = psi.layout().sub_layout(&keep)?;
    let m = cut_matrix(psi, &keep)?;
    let red = &m * m.adjoint();
    Ok(DensityOp::from_parts_unchecked(sub, red))
}

pub fn herm_eig(h: &CMatrix) -> Result<HermEig> {
    let defect = hermiticity_defect(h);
    if defect > 1e-8 {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (h + h.adjoint()).unscale(2.0);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(HermEig { values, vectors })
}

pub fn frac_power(rho: &DensityOp, p: f64) -> Result<CMatrix> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::arg(format!("power {p} is outside (0, 1)")));
    }
    herm_eig(rho.mat())?.psd_power(p)
}

pub fn schmidt(psi: &PureState, cut: &Bipartition) -> Result<SchmidtResult> {
    let layout = psi.layout();
    if cut.left().len() + cut.right().len() != layout.n() {
        return Err(Error::arg("cut does not match the state's party count"));
    }
    let m = cut_matrix(psi, cut.left())?;
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut coeffs = Vec::new();
    let mut left_basis = Vec::new();
    let mut right_basis = Vec::new();
    for k in order {
        let s = svd.singular_values[k];
        if s < SCHMIDT_CUTOFF {
            continue;
        }
        coeffs.push(s);
        left_basis.push(u.column(k).into_owned());
        right_basis.push(v_t.row(k).transpose());
    }
    Ok(SchmidtResult {
        cut: cut.clone(),
        coeffs,
        left_basis,
        right_basis,
    })
}

fn check_same_layout(rho: &DensityOp, phi: &PureState) -> Result<()> {
    if rho.layout() != phi.layout() {
        return Err(Error::arg("state and density operator have different layouts"));
    }
    Ok(())
}

/// ⟨Φ|ρ|Φ⟩.
pub fn fidelity_pure(rho: &DensityOp, phi: &PureState) -> Result<f64> {
    check_same_layout(rho, phi)?;
    Ok(phi.amps().dotc(&(rho.mat() * phi.amps())).re)
}

/// (⟨Φ|√ρ|Φ⟩)², an alternative overlap metric. Not used for certification.
pub fn fidelity_sqrt_variant(rho: &DensityOp, phi: &PureState) -> Result<f64> {
    check_same_layout(rho, phi)?;
    let root = frac_power(rho, 0.5)?;
    let amp = phi.amps().dotc(&(root * phi.amps())).re;
    Ok(amp * amp)
}

/// tr[op ρ] for a Hermitian full-space operator.
pub fn expect(rho: &DensityOp, op: &CMatrix) -> Result<f64> {
    if op.nrows() != rho.dim() || op.ncols() != rho.dim() {
        return Err(Error::layout("operator dimension does not match density operator"));
    }
    if hermiticity_defect(op) > 1e-8 {
        return Err(Error::Contract("observable is not Hermitian".into()));
    }
    Ok(trace_product(op, rho.mat()).re)
}

/// tr[a b] without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)],
    )
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}
