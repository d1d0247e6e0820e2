//! The network bound D(|Φ⟩): the largest fidelity any network state can reach
//! with a pure target. Closed forms for GHZ and Dicke families, the symmetric
//! superposition formula, the Schmidt scan over all cuts, the column-norm
//! bound and the three-qubit canonical-form expressions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{binomial, bounded_composition_count, dicke_max_k};
use crate::tensor::{reduced_from_pure, schmidt, Bipartition, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    ClosedGhz,
    ClosedDicke,
    SymUpper,
    SchmidtExact,
    ColnormUpper,
    Gamma3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Applicability {
    Exact,
    UpperBound,
    /// Proven to be attained by some network state, so D is at least this.
    LowerBound,
    /// Agrees with every numerical check but carries no proof.
    Evidence,
    /// The formula's derivation does not cover these parameters.
    InapplicableWarning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut: Option<Vec<usize>>,
    /// Squared Schmidt coefficients or marginal eigenvalues, descending.
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub method: BoundMethod,
    pub applicability: Applicability,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundResult {
    fn new(value: f64, method: BoundMethod, applicability: Applicability) -> Self {
        Self {
            value,
            method,
            applicability,
            certificate: None,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// True if exceeding `value` certifies the state.
    pub fn certifies(&self) -> bool {
        matches!(self.applicability, Applicability::Exact | Applicability::UpperBound)
    }
}

fn check_unit(name: &str, xs: &[f64]) -> Result<()> {
    let s: f64 = xs.iter().map(|x| x * x).sum();
    if (s - 1.0).abs() > 1e-12 || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg(format!("{name} has squared norm {s}, not 1")));
    }
    Ok(())
}

pub fn bound_ghz(a: &[f64]) -> Result<BoundResult> {
    if a.len() < 2 {
        return Err(Error::arg("GHZ needs at least two amplitudes"));
    }
    check_unit("GHZ amplitude vector", a)?;
    let mut spectrum: Vec<f64> = a.iter().map(|x| x * x).collect();
    spectrum.sort_by(|x, y| y.total_cmp(x));
    // balanced amplitudes give exactly 1/d, which keeps rational thresholds exact
    let balanced = spectrum[0] - spectrum[spectrum.len() - 1] < 1e-15;
    let value = if balanced { 1.0 / a.len() as f64 } else { spectrum[0] };
    let mut out = BoundResult::new(value, BoundMethod::ClosedGhz, Applicability::Exact);
    out.certificate = Some(Certificate { cut: None, spectrum });
    if value >= 1.0 - 1e-12 {
        out = out.with_note("product state: no fidelity can exceed the bound");
    }
    Ok(out)
}

fn check_dicke(n: usize, k: usize, d: usize) -> Result<()> {
    if n < 2 || d < 2 {
        return Err(Error::arg("Dicke bounds need n ≥ 2 and d ≥ 2"));
    }
    let max_k = dicke_max_k(n, d);
    if k < 1 || k > max_k {
        return Err(Error::arg(format!("excitation {k} outside 1..={max_k}")));
    }
    Ok(())
}

/// (n−1)/(n+k−1). Exact when every excitation fits on one site (k ≤ d−1).
pub fn bound_dicke_closed(n: usize, k: usize, d: usize) -> Result<BoundResult> {
    check_dicke(n, k, d)?;
    let value = (n - 1) as f64 / (n + k - 1) as f64;
    if k < d {
        Ok(BoundResult::new(value, BoundMethod::ClosedDicke, Applicability::Exact))
    } else {
        Ok(
            BoundResult::new(value, BoundMethod::ClosedDicke, Applicability::InapplicableWarning)
                .with_note(format!(
                    "k = {k} exceeds d - 1 = {}; the unbounded composition count is wrong here, use schmidt-exact",
                    d - 1
                )),
        )
    }
}

/// Squared Schmidt coefficients of |D_{k,n}⟩ across an s | n−s cut, indexed
/// by the excitation i on the small side, computed with unbounded counts
/// C(i+s−1, s−1).
pub fn dicke_schmidt_spectrum(n: usize, k: usize, s: usize) -> Result<Vec<f64>> {
    if n < 2 || s < 1 || s > n / 2 {
        return Err(Error::arg(format!("split size {s} outside 1..={}", n / 2)));
    }
    let count = |i: usize, m: usize| binomial((i + m - 1) as u64, (m - 1) as u64) as f64;
    let total = count(k, n);
    Ok((0..=k).map(|i| count(i, s) * count(k - i, n - s) / total).collect())
}

/// Same spectrum with digits capped at d−1; this is the true Schmidt spectrum.
pub fn dicke_schmidt_spectrum_bounded(n: usize, d: usize, k: usize, s: usize) -> Result<Vec<f64>> {
    if n < 2 || s < 1 || s > n / 2 {
        return Err(Error::arg(format!("split size {s} outside 1..={}", n / 2)));
    }
    let total = bounded_composition_count(n, d, k) as f64;
    Ok((0..=k)
        .map(|i| {
            bounded_composition_count(s, d, i) as f64 * bounded_composition_count(n - s, d, k - i) as f64
                / total
        })
        .collect())
}

/// Closed-form value for Σα_i|D_{i,n}⟩ with a β-weighted zeroth component.
///
/// The α for the top excitation N = nd−n−1 does not enter the formula, and
/// the value is not an upper bound on D for every input, so it is never
/// tagged as certifying.
pub fn bound_sym_upper(alphas: &[f64], beta0: f64, beta1: f64, n: usize, d: usize) -> Result<BoundResult> {
    let big_n = dicke_max_k(n, d);
    if n < 2 || d < 2 || alphas.is_empty() || alphas.len() > big_n + 1 {
        return Err(Error::arg(format!("expected 1..={} coefficients", big_n + 1)));
    }
    check_unit("alpha vector", alphas)?;
    check_unit("beta pair", &[beta0, beta1])?;
    let alpha = |i: usize| alphas.get(i).copied().unwrap_or(0.0);
    let beta = beta0.abs().max(beta1.abs());
    let mut value = alpha(0).powi(2) * beta * beta;
    for i in 1..=big_n / 2 {
        value += (n - 1) as f64 / (n + i - 1) as f64 * (alpha(i).powi(2) + alpha(big_n - i).powi(2));
    }
    if big_n % 2 == 0 {
        value -= (2 * n - 2) as f64 / (n * d + n - 3) as f64 * alpha(big_n / 2).powi(2);
    }
    // a network state reaching the Schmidt value refutes the formula as a bound
    let reached = crate::states::make_sym_superposition(n, d, alphas, beta0, beta1)
        .and_then(|phi| bound_schmidt_exact(&phi))
        .map(|b| b.value)
        .ok();
    let mut out = match reached {
        Some(s) if s > value + 1e-12 => BoundResult::new(value, BoundMethod::SymUpper, Applicability::InapplicableWarning)
            .with_note(format!("a product across some cut reaches fidelity {s:.6}, above this value")),
        _ => BoundResult::new(value, BoundMethod::SymUpper, Applicability::Evidence),
    };
    if alpha(big_n) != 0.0 {
        let extra = format!("coefficient of excitation {big_n} is ignored by this formula");
        out.note = Some(match out.note.take() {
            Some(prev) => format!("{prev}; {extra}"),
            None => extra,
        });
    }
    Ok(out)
}

/// Max over all cuts of the top squared Schmidt coefficient.
pub fn bound_schmidt_exact(phi: &PureState) -> Result<BoundResult> {
    let layout = phi.layout();
    let n = layout.n();
    if n < 2 {
        return Err(Error::arg("a single party has no cuts"));
    }
    let cuts = Bipartition::all(n);
    let results: Vec<(f64, Vec<f64>)> = cuts
        .par_iter()
        .map(|cut| schmidt(phi, cut).map(|r| (r.leading_weight(), r.squared())))
        .collect::<Result<_>>()?;
    // first maximum in enumeration order, independent of scheduling
    let mut best = 0;
    for (i, (w, _)) in results.iter().enumerate() {
        if *w > results[best].0 {
            best = i;
        }
    }
    let (value, spectrum) = results[best].clone();
    let applicability = if layout.is_all_qubits() {
        Applicability::Exact
    } else if layout.dims().iter().all(|&d| d <= 3) {
        Applicability::Evidence
    } else {
        Applicability::LowerBound
    };
    let mut out = BoundResult::new(value.min(1.0), BoundMethod::SchmidtExact, applicability);
    out.certificate = Some(Certificate {
        cut: Some(cuts[best].left().to_vec()),
        spectrum,
    });
    Ok(out)
}

/// max_j Σ_i |ρ_ij| over every proper marginal, capped at 1.
pub fn bound_colnorm(phi: &PureState) -> Result<BoundResult> {
    let n = phi.layout().n();
    if n < 2 {
        return Err(Error::arg("a single party has no proper marginals"));
    }
    let subsets: Vec<Vec<usize>> = (1..(1usize << n) - 1)
        .map(|mask| (0..n).filter(|p| mask >> p & 1 == 1).collect())
        .collect();
    let norms: Vec<f64> = subsets
        .par_iter()
        .map(|keep| {
            reduced_from_pure(phi, keep).map(|rho| {
                let m = rho.mat();
                (0..m.ncols())
                    .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
                    .fold(0.0, f64::max)
            })
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, v) in norms.iter().enumerate() {
        if *v > norms[best] {
            best = i;
        }
    }
    let mut out = BoundResult::new(norms[best].min(1.0), BoundMethod::ColnormUpper, Applicability::UpperBound);
    out.certificate = Some(Certificate {
        cut: Some(subsets[best].clone()),
        spectrum: Vec::new(),
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gamma3 {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma: f64,
}

fn top_of(disc: f64) -> f64 {
    0.5 + 0.5 * disc.max(0.0).sqrt()
}

/// Top eigenvalues of the three single-party marginals of
/// λ₀|000⟩ + λ₁e^{iφ}|100⟩ + λ₂|101⟩ + λ₃|110⟩ + λ₄|111⟩.
pub fn gamma_three_qubit(l: [f64; 5], phi: f64) -> Result<Gamma3> {
    if l.iter().any(|x| *x < 0.0) {
        return Err(Error::arg("canonical coefficients must be non-negative"));
    }
    check_unit("canonical coefficients", &l)?;
    let [l0, l1, l2, l3, l4] = l.map(|x| x * x);
    let cross = 8.0 * phi.cos() * l[1] * l[2] * l[3] * l[4];
    let gamma1 = top_of(1.0 - 4.0 * l0 * (l2 + l3 + l4));
    let gamma2 = top_of(1.0 + cross - 4.0 * l1 * l4 - 4.0 * l2 * l3 - 4.0 * l0 * l4 - 4.0 * l0 * l3);
    let gamma3 = top_of(1.0 + cross - 4.0 * l0 * l4 - 4.0 * l0 * l2 - 4.0 * l1 * l4 - 4.0 * l2 * l3);
    Ok(Gamma3 {
        gamma1,
        gamma2,
        gamma3,
        gamma: gamma1.max(gamma2).max(gamma3),
    })
}

/// The φ-free variant of [`gamma_three_qubit`]; agrees with it only at φ = 0.
pub fn gamma_three_qubit_phase_free(l: [f64; 5]) -> Result<Gamma3> {
    gamma_three_qubit(l, 0.0)
}

pub fn bound_gamma3(l: [f64; 5], phi: f64) -> Result<BoundResult> {
    let g = gamma_three_qubit(l, phi)?;
    let mut out = BoundResult::new(g.gamma, BoundMethod::Gamma3, Applicability::Exact);
    out.certificate = Some(Certificate {
        cut: None,
        spectrum: vec![g.gamma1, g.gamma2, g.gamma3],
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::*;
    use crate::tensor::{herm_eig, partial_trace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn ghz_examples() {
        assert!((bound_ghz(&[H, H]).unwrap().value - 0.5).abs() < 1e-15);
        assert!((bound_ghz(&[0.8, 0.6]).unwrap().value - 0.64).abs() < 1e-15);
        let prod = bound_ghz(&[1.0, 0.0]).unwrap();
        assert_eq!(prod.value, 1.0);
        assert!(prod.note.is_some());
        assert!(bound_ghz(&[0.8, 0.8]).is_err());
    }

    #[test]
    fn dicke_closed_examples() {
        assert!((bound_dicke_closed(3, 1, 2).unwrap().value - 2.0 / 3.0).abs() < 1e-15);
        let d3 = bound_dicke_closed(4, 2, 3).unwrap();
        assert_eq!(d3.applicability, Applicability::Exact);
        let phi = make_dicke(4, 3, 2, DickeMode::Exact).unwrap().state;
        assert!((bound_schmidt_exact(&phi).unwrap().value - d3.value).abs() < 1e-12);

        let d2 = bound_dicke_closed(4, 2, 2).unwrap();
        assert!((d2.value - 0.6).abs() < 1e-15);
        assert_eq!(d2.applicability, Applicability::InapplicableWarning);
        let phi = make_dicke(4, 2, 2, DickeMode::Exact).unwrap().state;
        assert!((bound_schmidt_exact(&phi).unwrap().value - 2.0 / 3.0).abs() < 1e-12);
        assert!(bound_dicke_closed(3, 3, 2).is_err());
    }

    #[test]
    fn dicke_spectrum_examples() {
        let s = dicke_schmidt_spectrum(3, 1, 1).unwrap();
        assert!((s[0] - 2.0 / 3.0).abs() < 1e-15 && (s[1] - 1.0 / 3.0).abs() < 1e-15);
        let s = dicke_schmidt_spectrum(4, 2, 2).unwrap();
        for (x, y) in s.iter().zip([0.3, 0.4, 0.3]) {
            assert!((x - y).abs() < 1e-15);
        }
        let s = dicke_schmidt_spectrum(4, 2, 1).unwrap();
        for (x, y) in s.iter().zip([0.6, 0.3, 0.1]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(dicke_schmidt_spectrum(4, 2, 3).is_err());
        let b = dicke_schmidt_spectrum_bounded(4, 2, 2, 2).unwrap();
        assert!((b[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sym_upper_examples() {
        assert!((bound_sym_upper(&[1.0, 0.0, 0.0], H, H, 3, 2).unwrap().value - 0.5).abs() < 1e-15);
        // n = 4, d = 2: N = 3, α_1 alone pairs with α_2
        let w = bound_sym_upper(&[0.0, 1.0, 0.0, 0.0], 1.0, 0.0, 4, 2).unwrap();
        assert!((w.value - 0.75).abs() < 1e-15);
        // n = 3, d = 2: N = 2 is even
        let v = bound_sym_upper(&[H, H, 0.0], 1.0, 0.0, 3, 2).unwrap();
        assert!((v.value - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(v.applicability, Applicability::InapplicableWarning);
        assert!(!v.certifies());
        assert_eq!(w.applicability, Applicability::Evidence);
        // that value falls below the Schmidt scan, so it is not an upper bound
        let phi = make_sym_superposition(3, 2, &[H, H, 0.0], 1.0, 0.0).unwrap();
        assert!(bound_schmidt_exact(&phi).unwrap().value > v.value + 0.1);
    }

    #[test]
    fn schmidt_exact_examples() {
        for n in 3..=6 {
            let r = bound_schmidt_exact(&make_balanced_ghz(n, 2).unwrap()).unwrap();
            assert!((r.value - 0.5).abs() < 1e-12);
            assert_eq!(r.applicability, Applicability::Exact);
        }
        let r = bound_schmidt_exact(&make_dicke(4, 2, 2, DickeMode::Exact).unwrap().state).unwrap();
        assert_eq!(r.certificate.unwrap().cut.unwrap().len(), 2);
        let a = 0.9f64;
        let r = bound_schmidt_exact(&make_cluster5(a, (1.0 - a * a).sqrt()).unwrap()).unwrap();
        assert!((r.value - a * a).abs() < 1e-12);
        let cert = r.certificate.unwrap();
        assert!((cert.spectrum.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let qutrit = bound_schmidt_exact(&make_balanced_ghz(3, 3).unwrap()).unwrap();
        assert_eq!(qutrit.applicability, Applicability::Evidence);
        let ququart = bound_schmidt_exact(&make_balanced_ghz(3, 4).unwrap()).unwrap();
        assert_eq!(ququart.applicability, Applicability::LowerBound);
    }

    #[test]
    fn colnorm_examples() {
        let ghz = make_balanced_ghz(3, 2).unwrap();
        assert!((bound_colnorm(&ghz).unwrap().value - 0.5).abs() < 1e-12);
        let prod = PureState::basis(crate::tensor::PartyLayout::qubits(3).unwrap(), &[0, 1, 0]).unwrap();
        assert!((bound_colnorm(&prod).unwrap().value - 1.0).abs() < 1e-12);
        let w = make_dicke(3, 2, 1, DickeMode::Exact).unwrap().state;
        assert!((bound_colnorm(&w).unwrap().value - 2.0 / 3.0).abs() < 1e-12);
    }

    fn random_canonical(rng: &mut ChaCha8Rng) -> ([f64; 5], f64) {
        let mut l = [0.0; 5];
        for x in &mut l {
            *x = rng.random::<f64>();
        }
        let norm = l.iter().map(|x| x * x).sum::<f64>().sqrt();
        (l.map(|x| x / norm), rng.random::<f64>() * std::f64::consts::PI)
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_three_qubit([H, 0.0, 0.0, 0.0, H], 0.0).unwrap();
        assert!((g.gamma - 0.5).abs() < 1e-12);
        assert!((g.gamma1 - 0.5).abs() < 1e-12 && (g.gamma2 - 0.5).abs() < 1e-12 && (g.gamma3 - 0.5).abs() < 1e-12);
        let edge = gamma_three_qubit([0.0, 0.6, 0.0, 0.8, 0.0], 1.0).unwrap();
        assert!((edge.gamma1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_matches_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (l, phi) = random_canonical(&mut rng);
            let g = gamma_three_qubit(l, phi).unwrap();
            let rho = make_three_qubit_canonical(l, phi).unwrap().to_density();
            for (party, want) in [g.gamma1, g.gamma2, g.gamma3].into_iter().enumerate() {
                let top = herm_eig(partial_trace(&rho, &[party]).unwrap().mat()).unwrap().values[0];
                assert!((top - want).abs() < 1e-10, "party {party}: {top} vs {want}");
            }
        }
    }

    #[test]
    fn phase_free_formula_is_wrong_for_nonzero_phase() {
        let l = [0.3f64, 0.5, 0.4, 0.5, (1.0f64 - 0.09 - 0.25 - 0.16 - 0.25).sqrt()];
        let with_phase = gamma_three_qubit(l, 2.5).unwrap();
        let free = gamma_three_qubit_phase_free(l).unwrap();
        assert!((with_phase.gamma2 - free.gamma2).abs() > 1e-3);
        assert_eq!(with_phase.gamma1, free.gamma1);
    }
}
