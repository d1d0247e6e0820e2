//! Fidelity witnesses 𝒲 = D·𝟙 − |Φ⟩⟨Φ|, their evaluation, and noise thresholds.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_dicke_closed, bound_ghz, bound_schmidt_exact, Applicability, BoundMethod, BoundResult,
};
use crate::error::{Error, Result};
use crate::states::{
    dicke_max_k, make_dicke, make_ghz, mix_general, mix_white_noise, DickeMode,
};
use crate::tensor::{fidelity_pure, trace_product, CMatrix, DensityOp, PartyLayout, PureState};

/// Values at or below this are treated as a strict violation.
pub const CERTIFY_TOL: f64 = 1e-12;
/// Largest dimension for which the witness operator is materialized.
pub const MATERIALIZE_MAX_DIM: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyDescriptor {
    Ghz { n: usize, d: usize, a: Vec<f64> },
    Dicke { n: usize, d: usize, k: usize },
    /// Σ_k v_k|D_k⟩⟨D_k| + v_0𝟙/dⁿ against the summed Dicke witness.
    DickeDiagonal { n: usize, d: usize },
}

impl FamilyDescriptor {
    pub fn balanced_ghz(n: usize, d: usize) -> Self {
        FamilyDescriptor::Ghz {
            n,
            d,
            a: vec![1.0 / (d as f64).sqrt(); d],
        }
    }

    pub fn target(&self) -> Result<PureState> {
        match self {
            FamilyDescriptor::Ghz { n, d, a } => make_ghz(*n, *d, a),
            FamilyDescriptor::Dicke { n, d, k } => Ok(make_dicke(*n, *d, *k, DickeMode::Exact)?.state),
            FamilyDescriptor::DickeDiagonal { .. } => {
                Err(Error::arg("the diagonal Dicke family has no single pure target"))
            }
        }
    }

    /// Certifying bound for the family's target.
    pub fn bound(&self) -> Result<BoundResult> {
        match self {
            FamilyDescriptor::Ghz { a, .. } => bound_ghz(a),
            FamilyDescriptor::Dicke { n, d, k } => {
                let closed = bound_dicke_closed(*n, *k, *d)?;
                if closed.applicability == Applicability::Exact {
                    Ok(closed)
                } else {
                    bound_schmidt_exact(&self.target()?)
                }
            }
            FamilyDescriptor::DickeDiagonal { .. } => {
                Err(Error::arg("the diagonal Dicke family uses a summed witness"))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum WitnessTarget {
    Pure(PureState),
    /// Σ_k (L_k 𝟙 − |D_k⟩⟨D_k|).
    DickeFamily { n: usize, d: usize, terms: Vec<(f64, PureState)> },
}

#[derive(Debug, Clone)]
pub struct Witness {
    /// D for single targets; Σ_k L_k for the Dicke family.
    pub bound: f64,
    pub method: Option<BoundMethod>,
    pub applicability: Applicability,
    pub target: WitnessTarget,
    /// True when tr[𝒲ρ] ≥ 0 for every state, so nothing can be certified.
    pub vacuous: bool,
}

impl Witness {
    pub fn layout(&self) -> &PartyLayout {
        match &self.target {
            WitnessTarget::Pure(phi) => phi.layout(),
            WitnessTarget::DickeFamily { terms, .. } => terms[0].1.layout(),
        }
    }

    pub fn operator(&self) -> Result<CMatrix> {
        let dim = self.layout().total_dim();
        if dim > MATERIALIZE_MAX_DIM {
            return Err(Error::Capacity {
                requested: dim,
                cap: MATERIALIZE_MAX_DIM,
            });
        }
        let mut op = CMatrix::identity(dim, dim).scale(self.bound);
        match &self.target {
            WitnessTarget::Pure(phi) => op -= phi.projector(),
            WitnessTarget::DickeFamily { terms, .. } => {
                for (_, dk) in terms {
                    op -= dk.projector();
                }
            }
        }
        Ok(op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessVerdict {
    CertifiedNgme,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub value: f64,
    pub verdict: WitnessVerdict,
    /// F(ρ, ρ_Φ); for the Dicke family, Σ_k ⟨D_k|ρ|D_k⟩.
    pub fidelity: f64,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<BoundMethod>,
    pub applicability: Applicability,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub discrepancies: Vec<String>,
}

fn verdict_of(value: f64) -> WitnessVerdict {
    if value < -CERTIFY_TOL {
        WitnessVerdict::CertifiedNgme
    } else {
        WitnessVerdict::Inconclusive
    }
}

pub fn build_witness(phi: &PureState, bound: &BoundResult) -> Result<Witness> {
    if !(bound.value > 0.0) {
        return Err(Error::arg(format!("bound {} must be positive", bound.value)));
    }
    if bound.value >= 1.0 {
        return Err(Error::VacuousWitness(bound.value));
    }
    Ok(Witness {
        bound: bound.value,
        method: Some(bound.method),
        applicability: bound.applicability,
        target: WitnessTarget::Pure(phi.clone()),
        vacuous: false,
    })
}

/// Per-excitation bound used in the summed Dicke witness: the closed form
/// where it applies, otherwise the Schmidt scan of |D_k⟩.
pub fn dicke_family_level(n: usize, d: usize, k: usize) -> Result<(f64, PureState)> {
    let dk = make_dicke(n, d, k, DickeMode::Exact)?.state;
    let closed = bound_dicke_closed(n, k, d)?;
    let value = if closed.applicability == Applicability::Exact {
        closed.value
    } else {
        bound_schmidt_exact(&dk)?.value
    };
    Ok((value, dk))
}

/// Σ_{k=1}^{N} (L_k 𝟙 − |D_{k,n}⟩⟨D_{k,n}|) with N = n(d−1)−1.
pub fn build_dicke_family_witness(n: usize, d: usize) -> Result<Witness> {
    let max_k = dicke_max_k(n, d);
    if n < 2 || max_k < 1 {
        return Err(Error::arg(format!("no non-trivial Dicke states for n = {n}, d = {d}")));
    }
    let terms: Vec<(f64, PureState)> = (1..=max_k)
        .map(|k| dicke_family_level(n, d, k))
        .collect::<Result<_>>()?;
    let bound: f64 = terms.iter().map(|(l, _)| l).sum();
    // Σ_k |D_k⟩⟨D_k| ≤ 𝟙, so tr[𝒲ρ] ≥ Σ L_k − 1 for every ρ
    let vacuous = bound >= 1.0;
    let applicability = if PartyLayout::uniform(n, d)?.is_all_qubits() || max_k < d {
        Applicability::Exact
    } else {
        Applicability::Evidence
    };
    Ok(Witness {
        bound,
        method: None,
        applicability,
        target: WitnessTarget::DickeFamily { n, d, terms },
        vacuous,
    })
}

fn check_layout(w: &Witness, rho: &DensityOp) -> Result<()> {
    if w.layout() != rho.layout() {
        return Err(Error::arg("witness and state have different layouts"));
    }
    Ok(())
}

/// tr[𝒲ρ] from fidelities, without forming the operator.
pub fn eval_witness(w: &Witness, rho: &DensityOp) -> Result<WitnessReport> {
    check_layout(w, rho)?;
    let fidelity = match &w.target {
        WitnessTarget::Pure(phi) => fidelity_pure(rho, phi)?,
        WitnessTarget::DickeFamily { terms, .. } => terms
            .iter()
            .map(|(_, dk)| fidelity_pure(rho, dk))
            .sum::<Result<f64>>()?,
    };
    let value = w.bound - fidelity;
    Ok(WitnessReport {
        value,
        verdict: verdict_of(value),
        fidelity,
        bound: w.bound,
        method: w.method,
        applicability: w.applicability,
        threshold: None,
        discrepancies: Vec::new(),
    })
}

/// tr[𝒲ρ] through the materialized operator.
pub fn eval_witness_operator(w: &Witness, rho: &DensityOp) -> Result<f64> {
    check_layout(w, rho)?;
    Ok(trace_product(&w.operator()?, rho.mat()).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdDirection {
    /// Certified for v strictly above v*.
    Above,
    /// Certified for v₀ strictly below v*.
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub v_star: f64,
    pub direction: ThresholdDirection,
    pub bound: f64,
    pub method: Option<BoundMethod>,
    pub applicability: Applicability,
    /// Root of v ↦ tr[𝒲ρ(v)] found by bisection on the operator route.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bisection_root: Option<f64>,
    /// The family's printed closed-form threshold, when it has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    /// True when no admissible parameter certifies.
    pub vacuous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Root of a continuous function on [lo, hi] with a sign change, to `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}"
        )));
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// v* = (D dⁿ − 1)/(dⁿ − 1) for white noise on any pure target.
pub fn white_noise_threshold_value(bound: f64, total_dim: usize) -> f64 {
    let dn = total_dim as f64;
    ((bound * dn - 1.0) / (dn - 1.0)).clamp(0.0, 1.0)
}

/// Printed closed form for white-noise thresholds of qubit Dicke targets.
pub fn dicke_printed_threshold(n: usize, k: usize) -> f64 {
    let two_n = 2f64.powi(n as i32);
    ((n - 1) as f64 * two_n - n as f64 - k as f64 + 1.0) / ((two_n - 1.0) * (n + k - 1) as f64)
}

/// Closed-form L_k of the summed Dicke witness, mirrored as L_k = L_{N−k}.
pub fn dicke_level_printed(n: usize, d: usize, k: usize) -> f64 {
    let max_k = dicke_max_k(n, d);
    let j = if k <= max_k / 2 { k } else { max_k - k };
    if j == 0 {
        // the mirror of the top level lands on k = 0, where the formula reads 1
        1.0
    } else {
        (n - 1) as f64 / (n + j - 1) as f64
    }
}

/// Upper limit on v₀ below which the summed Dicke witness certifies.
pub fn dicke_v0_limit(n: usize, d: usize, levels: &[f64]) -> f64 {
    let dn = (d as f64).powi(n as i32);
    let max_k = dicke_max_k(n, d) as f64;
    dn / (dn - max_k) * (1.0 - levels.iter().sum::<f64>())
}

fn white_bisection(w: &Witness, phi: &PureState) -> Result<Option<f64>> {
    if phi.layout().total_dim() > MATERIALIZE_MAX_DIM {
        return Ok(None);
    }
    let op = w.operator()?;
    let f = |v: f64| -> Result<f64> {
        let rho = mix_white_noise(phi, v)?;
        Ok(trace_product(&op, rho.mat()).re)
    };
    match bisect(f, 0.0, 1.0, 1e-15) {
        Ok(root) => Ok(Some(root)),
        Err(Error::Bracket(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn threshold_white_noise(target: &FamilyDescriptor) -> Result<ThresholdReport> {
    match target {
        FamilyDescriptor::DickeDiagonal { n, d } => {
            let w = build_dicke_family_witness(*n, *d)?;
            let levels: Vec<f64> = match &w.target {
                WitnessTarget::DickeFamily { terms, .. } => terms.iter().map(|(l, _)| *l).collect(),
                WitnessTarget::Pure(_) => unreachable!(),
            };
            let v_star = dicke_v0_limit(*n, *d, &levels);
            let printed: Vec<f64> = (1..=dicke_max_k(*n, *d)).map(|k| dicke_level_printed(*n, *d, k)).collect();
            Ok(ThresholdReport {
                v_star,
                direction: ThresholdDirection::Below,
                bound: w.bound,
                method: None,
                applicability: w.applicability,
                bisection_root: None,
                closed_form: Some(dicke_v0_limit(*n, *d, &printed)),
                vacuous: v_star <= 0.0,
                note: Some("the levels sum past 1, so the summed witness is non-negative on every state".into()),
            })
        }
        _ => {
            let phi = target.target()?;
            let bound = target.bound()?;
            let dim = phi.layout().total_dim();
            let v_star = white_noise_threshold_value(bound.value, dim);
            let closed_form = match target {
                FamilyDescriptor::Ghz { a, .. } => {
                    let amax = a.iter().map(|x| x * x).fold(0.0, f64::max);
                    Some(white_noise_threshold_value(amax, dim))
                }
                FamilyDescriptor::Dicke { n, d: 2, k } => Some(dicke_printed_threshold(*n, *k)),
                FamilyDescriptor::Dicke { n, d, k } => Some(white_noise_threshold_value(
                    (n - 1) as f64 / (n + k - 1) as f64,
                    PartyLayout::uniform(*n, *d)?.total_dim(),
                )),
                FamilyDescriptor::DickeDiagonal { .. } => None,
            };
            let (bisection_root, vacuous) = if bound.value >= 1.0 {
                (None, true)
            } else {
                (white_bisection(&build_witness(&phi, &bound)?, &phi)?, false)
            };
            let note = (bound.method != BoundMethod::ClosedGhz && bound.method != BoundMethod::ClosedDicke)
                .then(|| "closed form not applicable; threshold uses the Schmidt scan".to_string());
            Ok(ThresholdReport {
                v_star: if vacuous { 1.0 } else { v_star },
                direction: ThresholdDirection::Above,
                bound: bound.value,
                method: Some(bound.method),
                applicability: bound.applicability,
                bisection_root,
                closed_form,
                vacuous,
                note,
            })
        }
    }
}

/// v* = (D − t)/(1 − t) with t = ⟨Φ|ϱ|Φ⟩, clamped to 0 when D ≤ t.
pub fn threshold_general(phi: &PureState, varrho: &DensityOp, bound: &BoundResult) -> Result<ThresholdReport> {
    if phi.layout() != varrho.layout() {
        return Err(Error::arg("noise operator layout differs from the state's"));
    }
    let t = fidelity_pure(varrho, phi)?;
    let vacuous = bound.value >= 1.0;
    let v_star = if vacuous {
        1.0
    } else if bound.value <= t {
        0.0
    } else {
        (bound.value - t) / (1.0 - t)
    };
    let bisection_root = if vacuous || phi.layout().total_dim() > MATERIALIZE_MAX_DIM || bound.value <= t {
        None
    } else {
        let op = build_witness(phi, bound)?.operator()?;
        let f = |v: f64| -> Result<f64> { Ok(trace_product(&op, mix_general(phi, varrho, v)?.mat()).re) };
        match bisect(f, 0.0, 1.0, 1e-15) {
            Ok(r) => Some(r),
            Err(Error::Bracket(_)) => None,
            Err(e) => return Err(e),
        }
    };
    Ok(ThresholdReport {
        v_star,
        direction: ThresholdDirection::Above,
        bound: bound.value,
        method: Some(bound.method),
        applicability: bound.applicability,
        bisection_root,
        closed_form: None,
        vacuous,
        note: None,
    })
}

/// Printed white-noise threshold for the five-qubit cluster target.
pub fn cluster5_printed_threshold(a: f64) -> f64 {
    (16.0 * a * a - 1.0) / 31.0
}

/// Threshold ΣL_k / Σ_k |⟨D_k|Φ⟩|² for ρ_v = v|Φ⟩⟨Φ| + (1−v)ϱ under the summed
/// Dicke witness, as printed (the ϱ contribution is dropped).
pub fn threshold_dicke_family_ratio(phi: &PureState) -> Result<f64> {
    let layout = phi.layout();
    if !layout.is_uniform() {
        return Err(Error::arg("Dicke projections need equal local dimensions"));
    }
    let (n, d) = (layout.n(), layout.dim(0));
    let max_k = dicke_max_k(n, d);
    let mut overlap = 0.0;
    let mut levels = 0.0;
    for k in 1..=max_k {
        let dk = make_dicke(n, d, k, DickeMode::Exact)?.state;
        overlap += dk.inner(phi).norm_sqr();
        levels += dicke_level_printed(n, d, k);
    }
    if overlap <= 0.0 {
        return Err(Error::arg("target has no weight on the Dicke levels"));
    }
    Ok(levels / overlap)
}

/// Threshold from the symmetric-superposition formula, as printed.
pub fn threshold_sym_alpha(alphas: &[f64], beta0: f64, beta1: f64, n: usize, d: usize) -> Result<f64> {
    Ok(crate::bounds::bound_sym_upper(alphas, beta0, beta1, n, d)?.value)
}

/// Matches a pure state against the GHZ and Dicke families.
pub fn recognize_family(phi: &PureState) -> Option<FamilyDescriptor> {
    let layout = phi.layout();
    if !layout.is_uniform() || layout.n() < 2 {
        return None;
    }
    let (n, d) = (layout.n(), layout.dim(0));
    let amps = phi.amps();
    // GHZ: real non-negative weight only on |i…i⟩, up to a global phase
    let diag: Vec<usize> = (0..d).map(|i| layout.index(&vec![i; n])).collect();
    let off_weight: f64 = amps
        .iter()
        .enumerate()
        .filter(|(i, _)| !diag.contains(i))
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if off_weight < 1e-20 {
        let a: Vec<f64> = diag.iter().map(|&i| amps[i].norm()).collect();
        if diag.iter().filter(|&&i| amps[i].norm() > 1e-12).count() >= 2 {
            return Some(FamilyDescriptor::Ghz { n, d, a });
        }
        return None;
    }
    for k in 1..=dicke_max_k(n, d) {
        let dk = make_dicke(n, d, k, DickeMode::Exact).ok()?.state;
        if (dk.inner(phi).norm() - 1.0).abs() < 1e-12 {
            return Some(FamilyDescriptor::Dicke { n, d, k });
        }
    }
    None
}

/// Best available certifying bound for `phi`.
pub fn best_bound(phi: &PureState, hint: Option<&FamilyDescriptor>) -> Result<BoundResult> {
    let recognized = hint.cloned().or_else(|| recognize_family(phi));
    if let Some(fam) = recognized {
        if !matches!(fam, FamilyDescriptor::DickeDiagonal { .. }) {
            let b = fam.bound()?;
            if b.applicability == Applicability::Exact {
                return Ok(b);
            }
        }
    }
    bound_schmidt_exact(phi)
}

/// Compares F(ρ, ρ_Φ) with the best available bound for Φ.
pub fn certify_state(rho: &DensityOp, phi: &PureState, hint: Option<&FamilyDescriptor>) -> Result<WitnessReport> {
    if rho.layout() != phi.layout() {
        return Err(Error::arg("state and target have different layouts"));
    }
    let bound = best_bound(phi, hint)?;
    let fidelity = fidelity_pure(rho, phi)?;
    let value = bound.value - fidelity;
    let mut discrepancies = Vec::new();
    if !bound.certifies() {
        discrepancies.push(format!(
            "bound is {:?}, so a negative value is evidence rather than proof",
            bound.applicability
        ));
    }
    Ok(WitnessReport {
        value,
        verdict: verdict_of(value),
        fidelity,
        bound: bound.value,
        method: Some(bound.method),
        applicability: bound.applicability,
        threshold: Some(white_noise_threshold_value(bound.value, phi.layout().total_dim())),
        discrepancies,
    })
}

/// Balanced qubit GHZ threshold (2^{n−1} − 1)/(2^n − 1).
pub fn ghz_qubit_threshold(n: usize) -> f64 {
    let two_n = 2f64.powi(n as i32);
    (two_n / 2.0 - 1.0) / (two_n - 1.0)
}
