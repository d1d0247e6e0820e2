//! Constructors for the pure-state families and noise models used by the
//! bounds, witnesses and Bell functionals.
//!
//! Dicke excitation numbers run over `1 ≤ k ≤ n(d−1)−1`; `k = 0` and
//! `k = n(d−1)` are product states and are rejected by [`make_dicke`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{c, CMatrix, CVector, DensityOp, PartyLayout, PureState, C64};

const UNIT_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DickeMode {
    /// Normalized by the true number of digit strings.
    #[default]
    Exact,
    /// Normalized by C(k+n−1, n−1), which undercounts once k > d−1.
    BinomialNormalized,
}

#[derive(Debug, Clone)]
pub enum NoiseSpec {
    White { v: f64 },
    /// v|Φ⟩⟨Φ| + (1−v)ϱ.
    CustomDensity { v: f64, varrho: DensityOp },
    /// Weights `v_0..v_N`; `v_0` multiplies 𝟙/dⁿ, `v_k` the Dicke projector.
    DiagonalDicke { weights: Vec<f64> },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::White { v } | NoiseSpec::CustomDensity { v, .. } => check_unit_interval(*v),
            NoiseSpec::DiagonalDicke { weights } => check_weights(weights),
        }
    }

    /// Applies the noise to `phi`. Diagonal-Dicke noise ignores `phi` beyond
    /// its layout, which must be uniform.
    pub fn apply(&self, phi: &PureState) -> Result<DensityOp> {
        match self {
            NoiseSpec::White { v } => mix_white_noise(phi, *v),
            NoiseSpec::CustomDensity { v, varrho } => mix_general(phi, varrho, *v),
            NoiseSpec::DiagonalDicke { weights } => {
                let layout = phi.layout();
                if !layout.is_uniform() {
                    return Err(Error::arg("diagonal Dicke noise needs equal local dimensions"));
                }
                mix_dicke_diag(layout.n(), layout.dim(0), weights)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMismatch {
    pub binomial_count: u64,
    pub exact_count: u64,
}

#[derive(Debug, Clone)]
pub struct DickeBuild {
    /// Always unit norm.
    pub state: PureState,
    pub term_count: u64,
    /// Set in binomial-normalized mode when the assumed count is wrong.
    pub warning: Option<NormalizationMismatch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WVariant {
    /// Unit weight on the first n−1 excitations, weight r on the last.
    TailWeighted,
    /// Weight r on the first n−1 excitations, unit weight on the last.
    BulkWeighted,
}

fn check_unit_interval(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::arg(format!("mixing parameter {v} is outside [0, 1]")))
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::arg("noise weights must be non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > UNIT_TOL {
        return Err(Error::arg(format!("noise weights sum to {total}, not 1")));
    }
    Ok(())
}

fn check_unit_vector(name: &str, xs: &[f64]) -> Result<()> {
    let norm_sq: f64 = xs.iter().map(|x| x * x).sum();
    if (norm_sq - 1.0).abs() > UNIT_TOL || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg(format!("{name} has squared norm {norm_sq}, not 1")));
    }
    Ok(())
}

/// Largest non-trivial excitation number N = n(d−1)−1.
pub fn dicke_max_k(n: usize, d: usize) -> usize {
    (n * (d - 1)).saturating_sub(1)
}

/// All digit strings of length n over {0..d−1} with digit sum k, in
/// increasing basis-index order.
pub fn dicke_terms(n: usize, d: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(pos: usize, left: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == n {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest_cap = (n - pos - 1) * (d - 1);
        for digit in 0..d.min(left + 1) {
            if left - digit <= rest_cap {
                cur.push(digit);
                go(pos + 1, left - digit, n, d, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, k, n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

/// C(m, r) for small arguments.
pub fn binomial(m: u64, r: u64) -> u64 {
    if r > m {
        return 0;
    }
    let r = r.min(m - r);
    (0..r).fold(1u64, |acc, i| acc * (m - i) / (i + 1))
}

/// Number of digit strings of length n over {0..d−1} summing to k.
pub fn bounded_composition_count(n: usize, d: usize, k: usize) -> u64 {
    let mut ways = vec![0u64; k + 1];
    ways[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u64; k + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for digit in 0..d {
                if s + digit > k {
                    break;
                }
                next[s + digit] += w;
            }
        }
        ways = next;
    }
    ways[k]
}

fn dicke_vector(layout: &PartyLayout, k: usize) -> CVector {
    let n = layout.n();
    let d = layout.dim(0);
    let terms = dicke_terms(n, d, k);
    let amp = 1.0 / (terms.len() as f64).sqrt();
    let mut v = CVector::zeros(layout.total_dim());
    for t in &terms {
        v[layout.index(t)] = c(amp);
    }
    v
}

pub fn make_ghz(n: usize, d: usize, a: &[f64]) -> Result<PureState> {
    if n < 2 {
        return Err(Error::arg("GHZ states need at least two parties"));
    }
    if a.len() != d {
        return Err(Error::arg(format!("expected {d} GHZ amplitudes, got {}", a.len())));
    }
    check_unit_vector("GHZ amplitude vector", a)?;
    let layout = PartyLayout::uniform(n, d)?;
    let mut amps = CVector::zeros(layout.total_dim());
    for (i, &ai) in a.iter().enumerate() {
        amps[layout.index(&vec![i; n])] = c(ai);
    }
    PureState::normalized(layout, amps)
}

pub fn make_balanced_ghz(n: usize, d: usize) -> Result<PureState> {
    make_ghz(n, d, &vec![1.0 / (d as f64).sqrt(); d])
}

pub fn make_dicke(n: usize, d: usize, k: usize, mode: DickeMode) -> Result<DickeBuild> {
    if n < 2 {
        return Err(Error::arg("Dicke states need at least two parties"));
    }
    let max_k = dicke_max_k(n, d);
    if k < 1 || k > max_k {
        return Err(Error::arg(format!("excitation {k} outside 1..={max_k}")));
    }
    let layout = PartyLayout::uniform(n, d)?;
    let state = PureState::new(layout.clone(), dicke_vector(&layout, k))?;
    let exact_count = bounded_composition_count(n, d, k);
    let warning = match mode {
        DickeMode::Exact => None,
        DickeMode::BinomialNormalized => {
            let binomial_count = binomial((k + n - 1) as u64, (n - 1) as u64);
            (binomial_count != exact_count).then_some(NormalizationMismatch {
                binomial_count,
                exact_count,
            })
        }
    };
    Ok(DickeBuild {
        state,
        term_count: exact_count,
        warning,
    })
}

/// Single-excitation qubit state with one distinguished (last) site.
pub fn make_w_family(n: usize, variant: WVariant, r: f64) -> Result<PureState> {
    if n < 2 {
        return Err(Error::arg("W states need at least two parties"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::arg(format!("weight {r} must be finite and non-negative")));
    }
    let (bulk, tail) = match variant {
        WVariant::TailWeighted => (1.0, r),
        WVariant::BulkWeighted => (r, 1.0),
    };
    let layout = PartyLayout::qubits(n)?;
    let alphas: Vec<f64> = (0..n).map(|i| if i + 1 == n { tail } else { bulk }).collect();
    make_single_excitation(layout, &alphas)
}

/// Σ_i α_i |0…1_i…0⟩, normalized.
pub fn make_w_amplitudes(alphas: &[f64]) -> Result<PureState> {
    make_single_excitation(PartyLayout::qubits(alphas.len())?, alphas)
}

fn make_single_excitation(layout: PartyLayout, alphas: &[f64]) -> Result<PureState> {
    let n = layout.n();
    let terms: Vec<(Vec<usize>, C64)> = alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut digits = vec![0; n];
            digits[i] = 1;
            (digits, c(a))
        })
        .collect();
    PureState::from_terms(layout, &terms)
}

/// α_0(β_0|0⟩ⁿ + β_1|d−1⟩ⁿ) + Σ_{i≥1} α_i|D_{i,n}⟩. Missing trailing α are zero.
pub fn make_sym_superposition(
    n: usize,
    d: usize,
    alphas: &[f64],
    beta0: f64,
    beta1: f64,
) -> Result<PureState> {
    let max_k = dicke_max_k(n, d);
    if n < 2 || alphas.is_empty() || alphas.len() > max_k + 1 {
        return Err(Error::arg(format!(
            "expected 1..={} coefficients for n = {n}, d = {d}",
            max_k + 1
        )));
    }
    check_unit_vector("alpha vector", alphas)?;
    check_unit_vector("beta pair", &[beta0, beta1])?;
    let layout = PartyLayout::uniform(n, d)?;
    let mut amps = CVector::zeros(layout.total_dim());
    amps[0] += c(alphas[0] * beta0);
    amps[layout.total_dim() - 1] += c(alphas[0] * beta1);
    for (k, &a) in alphas.iter().enumerate().skip(1) {
        if a != 0.0 {
            amps += dicke_vector(&layout, k).scale(a);
        }
    }
    PureState::normalized(layout, amps)
}

/// λ₀|000⟩ + λ₁e^{iφ}|100⟩ + λ₂|101⟩ + λ₃|110⟩ + λ₄|111⟩.
pub fn make_three_qubit_canonical(l: [f64; 5], phi: f64) -> Result<PureState> {
    if l.iter().any(|x| *x < 0.0) {
        return Err(Error::arg("canonical coefficients must be non-negative"));
    }
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return Err(Error::arg(format!("phase {phi} outside [0, π]")));
    }
    check_unit_vector("canonical coefficients", &l)?;
    let layout = PartyLayout::qubits(3)?;
    let mut amps = CVector::zeros(8);
    amps[0] = c(l[0]);
    amps[4] = C64::from_polar(l[1], phi);
    amps[5] = c(l[2]);
    amps[6] = c(l[3]);
    amps[7] = c(l[4]);
    PureState::normalized(layout, amps)
}

/// (|0⟩ⁿ + |1⟩^{n−1}(cosθ|0⟩ + sinθ|1⟩))/√2.
pub fn make_maximal_slice(n: usize, theta: f64) -> Result<PureState> {
    if n < 2 {
        return Err(Error::arg("maximal slice states need at least two parties"));
    }
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::arg(format!("angle {theta} outside (0, π/2]")));
    }
    let layout = PartyLayout::qubits(n)?;
    let mut ones_then_zero = vec![1; n];
    ones_then_zero[n - 1] = 0;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_terms(
        layout,
        &[
            (vec![0; n], c(h)),
            (ones_then_zero, c(h * theta.cos())),
            (vec![1; n], c(h * theta.sin())),
        ],
    )
}

/// (a|00000⟩ + b|11100⟩ + a|00111⟩ + b|11011⟩)/√2.
pub fn make_cluster5(a: f64, b: f64) -> Result<PureState> {
    check_unit_vector("cluster amplitudes", &[a, b])?;
    let layout = PartyLayout::qubits(5)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_terms(
        layout,
        &[
            (vec![0, 0, 0, 0, 0], c(a * h)),
            (vec![1, 1, 1, 0, 0], c(b * h)),
            (vec![0, 0, 1, 1, 1], c(a * h)),
            (vec![1, 1, 0, 1, 1], c(b * h)),
        ],
    )
}

/// Two-source chain state (|000⟩+|011⟩+|120⟩+|131⟩)/2 on dimensions (2, 4, 2).
pub fn make_chain_network_state() -> Result<PureState> {
    let layout = PartyLayout::new(vec![2, 4, 2])?;
    PureState::from_terms(
        layout,
        &[
            (vec![0, 0, 0], c(1.0)),
            (vec![0, 1, 1], c(1.0)),
            (vec![1, 2, 0], c(1.0)),
            (vec![1, 3, 1], c(1.0)),
        ],
    )
}

pub fn mix_white_noise(phi: &PureState, v: f64) -> Result<DensityOp> {
    check_unit_interval(v)?;
    let dim = phi.layout().total_dim();
    let mut mat = phi.projector().scale(v);
    let floor = (1.0 - v) / dim as f64;
    for i in 0..dim {
        mat[(i, i)] += c(floor);
    }
    Ok(DensityOp::from_parts_unchecked(phi.layout().clone(), mat))
}

pub fn mix_general(phi: &PureState, varrho: &DensityOp, v: f64) -> Result<DensityOp> {
    check_unit_interval(v)?;
    if phi.layout() != varrho.layout() {
        return Err(Error::arg("noise operator layout differs from the state's"));
    }
    let mat = phi.projector().scale(v) + varrho.mat().scale(1.0 - v);
    Ok(DensityOp::from_parts_unchecked(phi.layout().clone(), mat))
}

/// Σ_{k≥1} v_k|D_{k,n}⟩⟨D_{k,n}| + v_0 𝟙/dⁿ with weights `v_0..v_N`.
pub fn mix_dicke_diag(n: usize, d: usize, weights: &[f64]) -> Result<DensityOp> {
    let max_k = dicke_max_k(n, d);
    if n < 2 || weights.len() != max_k + 1 {
        return Err(Error::arg(format!(
            "expected {} weights for n = {n}, d = {d}",
            max_k + 1
        )));
    }
    check_weights(weights)?;
    let layout = PartyLayout::uniform(n, d)?;
    let dim = layout.total_dim();
    let mut mat = CMatrix::identity(dim, dim).scale(weights[0] / dim as f64);
    for (k, &w) in weights.iter().enumerate().skip(1) {
        if w > 0.0 {
            let dk = dicke_vector(&layout, k);
            mat += (&dk * dk.adjoint()).scale(w);
        }
    }
    Ok(DensityOp::from_parts_unchecked(layout, mat))
}

fn swap_perm(n: usize, i: usize, j: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(i, j);
    perm
}

fn pure_invariant_under(psi: &PureState, map: &[usize]) -> bool {
    let amps = psi.amps();
    let mut moved = CVector::zeros(amps.len());
    for (idx, &target) in map.iter().enumerate() {
        moved[target] = amps[idx];
    }
    let overlap = amps.dotc(&moved);
    if overlap.norm() < 0.5 {
        return false;
    }
    let phase = overlap / overlap.norm();
    moved
        .iter()
        .zip(amps.iter())
        .all(|(m, a)| (m - phase * a).norm() <= SYMMETRY_TOL)
}

fn density_invariant_under(rho: &DensityOp, map: &[usize]) -> bool {
    let m = rho.mat();
    let dim = m.nrows();
    (0..dim).all(|i| (0..dim).all(|j| (m[(map[i], map[j])] - m[(i, j)]).norm() <= SYMMETRY_TOL))
}

fn check_uniform(layout: &PartyLayout) -> Result<()> {
    if layout.is_uniform() {
        Ok(())
    } else {
        Err(Error::arg("permutation symmetry needs equal local dimensions"))
    }
}

/// Invariance of |ψ⟩⟨ψ| under every adjacent transposition.
pub fn is_perm_symmetric(psi: &PureState) -> Result<bool> {
    let layout = psi.layout();
    check_uniform(layout)?;
    for i in 0..layout.n().saturating_sub(1) {
        let map = layout.permutation_indices(&swap_perm(layout.n(), i, i + 1))?;
        if !pure_invariant_under(psi, &map) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_perm_symmetric_density(rho: &DensityOp) -> Result<bool> {
    let layout = rho.layout();
    check_uniform(layout)?;
    for i in 0..layout.n().saturating_sub(1) {
        let map = layout.permutation_indices(&swap_perm(layout.n(), i, i + 1))?;
        if !density_invariant_under(rho, &map) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Invariance under exchanging parties `i` and `j`, which must share a dimension.
pub fn swap_invariant(psi: &PureState, i: usize, j: usize) -> Result<bool> {
    let layout = psi.layout();
    let map = layout.permutation_indices(&swap_perm(layout.n(), i, j))?;
    Ok(pure_invariant_under(psi, &map))
}

/// Applies a basis relabelling `perm` (old digit → new digit) on one party.
pub fn relabel_local_basis(psi: &PureState, party: usize, perm: &[usize]) -> Result<PureState> {
    let layout = psi.layout();
    if party >= layout.n() || perm.len() != layout.dim(party) {
        return Err(Error::arg("relabelling does not match the party's dimension"));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::arg("relabelling is not a permutation"));
        }
    }
    let mut amps = CVector::zeros(layout.total_dim());
    for (idx, a) in psi.amps().iter().enumerate() {
        let mut digits = layout.digits(idx);
        digits[party] = perm[digits[party]];
        amps[layout.index(&digits)] = *a;
    }
    PureState::new(layout.clone(), amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{fidelity_pure, herm_eig, schmidt, Bipartition};

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn ghz_examples() {
        let ghz = make_ghz(3, 2, &[H, H]).unwrap();
        assert!((ghz.amp(&[0, 0, 0]).re - H).abs() < 1e-15);
        assert!((ghz.amp(&[1, 1, 1]).re - H).abs() < 1e-15);
        let prod = make_ghz(4, 2, &[1.0, 0.0]).unwrap();
        assert_eq!(prod.amp(&[0, 0, 0, 0]).re, 1.0);
        let g4 = make_ghz(3, 4, &[0.5; 4]).unwrap();
        for i in 0..4 {
            assert_eq!(g4.amp(&[i, i, i]).re, 0.5);
        }
        assert!(matches!(make_ghz(3, 2, &[0.7, 0.7]), Err(Error::Argument(_))));
    }

    #[test]
    fn dicke_examples() {
        let w = make_dicke(3, 2, 1, DickeMode::Exact).unwrap().state;
        let s = 1.0 / 3f64.sqrt();
        for t in [[0, 0, 1], [0, 1, 0], [1, 0, 0]] {
            assert!((w.amp(&t).re - s).abs() < 1e-15);
        }
        let d24 = make_dicke(4, 2, 2, DickeMode::Exact).unwrap();
        assert_eq!(d24.term_count, 6);
        assert!(d24.state.amps().iter().all(|a| a.re == 0.0 || (a.re - 1.0 / 6f64.sqrt()).abs() < 1e-15));
        let d34 = make_dicke(4, 3, 2, DickeMode::BinomialNormalized).unwrap();
        assert_eq!(d34.term_count, 10);
        assert!(d34.warning.is_none());
        assert!(make_dicke(3, 2, 0, DickeMode::Exact).is_err());
        assert!(make_dicke(3, 2, 3, DickeMode::Exact).is_err());
    }

    #[test]
    fn binomial_normalization_mismatch_is_flagged() {
        let b = make_dicke(4, 2, 2, DickeMode::BinomialNormalized).unwrap();
        assert_eq!(
            b.warning,
            Some(NormalizationMismatch { binomial_count: 10, exact_count: 6 })
        );
        assert!((b.state.amps().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn composition_count_matches_enumeration() {
        for n in 2..=6 {
            for d in 2..=4 {
                for k in 0..=n * (d - 1) {
                    assert_eq!(
                        bounded_composition_count(n, d, k),
                        dicke_terms(n, d, k).len() as u64,
                        "n={n} d={d} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn w_family_examples() {
        let bal = make_w_family(4, WVariant::TailWeighted, 1.0).unwrap();
        let w4 = make_dicke(4, 2, 1, DickeMode::Exact).unwrap().state;
        assert!((bal.amps() - w4.amps()).norm() < 1e-15);
        let prod = make_w_family(3, WVariant::BulkWeighted, 0.0).unwrap();
        assert_eq!(prod.amp(&[0, 0, 1]).re, 1.0);
        let r2 = make_w_family(3, WVariant::TailWeighted, 2.0).unwrap();
        let s6 = 6f64.sqrt();
        assert!((r2.amp(&[1, 0, 0]).re - 1.0 / s6).abs() < 1e-15);
        assert!((r2.amp(&[0, 1, 0]).re - 1.0 / s6).abs() < 1e-15);
        assert!((r2.amp(&[0, 0, 1]).re - 2.0 / s6).abs() < 1e-15);
        assert!(make_w_family(3, WVariant::TailWeighted, -1.0).is_err());
    }

    #[test]
    fn sym_superposition_examples() {
        let ghz = make_sym_superposition(3, 2, &[1.0, 0.0, 0.0], H, H).unwrap();
        assert!((ghz.amps() - make_balanced_ghz(3, 2).unwrap().amps()).norm() < 1e-15);
        let w = make_sym_superposition(4, 2, &[0.0, 1.0], 1.0, 0.0).unwrap();
        assert!((w.amps() - make_dicke(4, 2, 1, DickeMode::Exact).unwrap().state.amps()).norm() < 1e-15);
        let mixed = make_sym_superposition(3, 2, &[H, H, 0.0], 1.0, 0.0).unwrap();
        assert!((mixed.amp(&[0, 0, 0]).re - H).abs() < 1e-15);
        for t in [[0, 0, 1], [0, 1, 0], [1, 0, 0]] {
            assert!((mixed.amp(&t).re - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        }
        assert!(make_sym_superposition(3, 2, &[0.5, 0.5], 1.0, 0.0).is_err());
        assert!(make_sym_superposition(3, 2, &[1.0], 0.5, 0.5).is_err());
    }

    #[test]
    fn three_qubit_canonical_examples() {
        let ghz = make_three_qubit_canonical([H, 0.0, 0.0, 0.0, H], 0.0).unwrap();
        assert!((ghz.amps() - make_balanced_ghz(3, 2).unwrap().amps()).norm() < 1e-15);
        // λ0 = λ2 = λ3 = 1/√3 has the same single-cut spectra as W₃
        let s = 1.0 / 3f64.sqrt();
        let lu_w = make_three_qubit_canonical([s, 0.0, s, s, 0.0], 0.0).unwrap();
        let w = make_dicke(3, 2, 1, DickeMode::Exact).unwrap().state;
        for cut in Bipartition::all(3) {
            let a = schmidt(&lu_w, &cut).unwrap().squared();
            let b = schmidt(&w, &cut).unwrap().squared();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert!(make_three_qubit_canonical([0.5; 5], 0.0).is_err());
    }

    #[test]
    fn maximal_slice_examples() {
        let ms = make_maximal_slice(4, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((ms.amps() - make_balanced_ghz(4, 2).unwrap().amps()).norm() < 1e-15);
        let q = make_maximal_slice(3, std::f64::consts::FRAC_PI_4).unwrap();
        assert!((q.amp(&[0, 0, 0]).re - H).abs() < 1e-15);
        assert!((q.amp(&[1, 1, 0]).re - 0.5).abs() < 1e-15);
        assert!((q.amp(&[1, 1, 1]).re - 0.5).abs() < 1e-15);
        for i in 1..=50 {
            let t = i as f64 / 50.0 * std::f64::consts::FRAC_PI_2;
            assert!((make_maximal_slice(5, t).unwrap().amps().norm() - 1.0).abs() < 1e-14);
        }
        assert!(make_maximal_slice(3, 0.0).is_err());
    }

    #[test]
    fn cluster5_examples() {
        let u = make_cluster5(H, H).unwrap();
        for t in [[0, 0, 0, 0, 0], [1, 1, 1, 0, 0], [0, 0, 1, 1, 1], [1, 1, 0, 1, 1]] {
            assert!((u.amp(&t).re - 0.5).abs() < 1e-15);
        }
        // a = 1 factorizes as |00⟩ ⊗ GHZ₃
        let two = make_cluster5(1.0, 0.0).unwrap();
        let cut = Bipartition::new(&[0, 1], 5).unwrap();
        let res = schmidt(&two, &cut).unwrap();
        assert_eq!(res.coeffs.len(), 1);
        let inner = Bipartition::new(&[0, 1, 2], 5).unwrap();
        assert_eq!(schmidt(&two, &inner).unwrap().coeffs.len(), 2);
        assert!(make_cluster5(0.8, 0.8).is_err());
    }

    #[test]
    fn white_noise_examples() {
        let ghz = make_balanced_ghz(3, 2).unwrap();
        let pure = mix_white_noise(&ghz, 1.0).unwrap();
        assert!((pure.mat() - ghz.projector()).norm() < 1e-15);
        let mixed = mix_white_noise(&ghz, 0.0).unwrap();
        assert!((mixed.mat() - DensityOp::maximally_mixed(ghz.layout().clone()).mat()).norm() < 1e-15);
        let half = mix_white_noise(&ghz, 0.5).unwrap();
        assert!((fidelity_pure(&half, &ghz).unwrap() - (0.5 + 1.0 / 16.0)).abs() < 1e-15);
        assert!(mix_white_noise(&ghz, 1.5).is_err());
    }

    #[test]
    fn general_noise_examples() {
        let ghz = make_balanced_ghz(3, 2).unwrap();
        let white = DensityOp::maximally_mixed(ghz.layout().clone());
        let a = mix_general(&ghz, &white, 0.3).unwrap();
        let b = mix_white_noise(&ghz, 0.3).unwrap();
        assert!((a.mat() - b.mat()).norm() < 1e-15);
        let zero = PureState::basis(ghz.layout().clone(), &[0, 0, 0]).unwrap().to_density();
        assert!((mix_general(&ghz, &zero, 0.0).unwrap().mat() - zero.mat()).norm() < 1e-15);
        let half = mix_general(&ghz, &zero, 0.5).unwrap();
        assert!((fidelity_pure(&half, &ghz).unwrap() - 0.75).abs() < 1e-15);
        let other = DensityOp::maximally_mixed(PartyLayout::qubits(2).unwrap());
        assert!(mix_general(&ghz, &other, 0.5).is_err());
    }

    #[test]
    fn dicke_diagonal_noise_examples() {
        let mixed = mix_dicke_diag(3, 2, &[1.0, 0.0, 0.0]).unwrap();
        assert!((mixed.mat() - DensityOp::maximally_mixed(PartyLayout::qubits(3).unwrap()).mat()).norm() < 1e-15);
        let proj = mix_dicke_diag(3, 2, &[0.0, 1.0, 0.0]).unwrap();
        let w = make_dicke(3, 2, 1, DickeMode::Exact).unwrap().state;
        assert!((proj.mat() - w.projector()).norm() < 1e-15);
        let rho = mix_dicke_diag(3, 2, &[0.2, 0.4, 0.4]).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-14);
        let eig = herm_eig(rho.mat()).unwrap();
        assert!(eig.values.iter().all(|&x| x > 1e-3));
        assert!(mix_dicke_diag(3, 2, &[0.5, 0.6, -0.1]).is_err());
        assert!(mix_dicke_diag(3, 2, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn symmetry_checks() {
        assert!(is_perm_symmetric(&make_balanced_ghz(4, 3).unwrap()).unwrap());
        assert!(is_perm_symmetric(&make_dicke(4, 3, 2, DickeMode::Exact).unwrap().state).unwrap());
        assert!(!is_perm_symmetric(&make_cluster5(H, H).unwrap()).unwrap());
        let rho = mix_dicke_diag(3, 2, &[0.2, 0.4, 0.4]).unwrap();
        assert!(is_perm_symmetric_density(&rho).unwrap());
    }

    #[test]
    fn chain_state_symmetry() {
        let chain = make_chain_network_state().unwrap();
        assert!(matches!(is_perm_symmetric(&chain), Err(Error::Argument(_))));
        // the outer swap is a symmetry once the middle party's labels 1 and 2 are exchanged
        assert!(!swap_invariant(&chain, 0, 2).unwrap());
        let relabelled = relabel_local_basis(&chain, 1, &[0, 2, 1, 3]).unwrap();
        let swapped = {
            let map = chain.layout().permutation_indices(&[2, 1, 0]).unwrap();
            let mut amps = CVector::zeros(16);
            for (i, &t) in map.iter().enumerate() {
                amps[t] = chain.amps()[i];
            }
            amps
        };
        assert!((swapped - relabelled.amps()).norm() < 1e-15);
        assert!(swap_invariant(&chain, 0, 1).is_err());
    }
}
