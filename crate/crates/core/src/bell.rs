//! Two-body Bell-type functionals built from tr[ρ^p M̃_i ρ^{1−p} M̃_j].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{LedgerRecord, Verdict};
use crate::states::{
    make_balanced_ghz, make_ghz, make_maximal_slice, make_three_qubit_canonical, make_w_amplitudes,
    make_w_family, mix_white_noise, WVariant,
};
use crate::tensor::{
    embed_site_op, herm_eig, mul_site_op_right, pauli_x, pauli_y, pauli_z, trace_product, CMatrix, DensityOp,
    PartyLayout, PureState, C64,
};

/// Slack on every classical-bound comparison.
pub const VIOLATION_TOL: f64 = 1e-9;
/// Pipeline and printed expression are reported as equal within this.
pub const PRINTED_TOL: f64 = 1e-9;
const INVOLUTION_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-10;
const WERNER_TOL: f64 = 1e-9;
const ROOT_TOL: f64 = 1e-13;
const MONOTONE_SAMPLES: usize = 32;

/// Local Hermitian observable with spectrum in [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SiteObservable {
    mat: CMatrix,
}

impl SiteObservable {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() < 2 {
            return Err(Error::arg("observable must be a square matrix of size at least 2"));
        }
        let eig = herm_eig(&mat)?;
        if eig.values.iter().any(|w| w.abs() > 1.0 + SPECTRUM_TOL) {
            return Err(Error::Contract(format!(
                "observable spectrum {:?} leaves [-1, 1]",
                eig.values
            )));
        }
        Ok(Self { mat })
    }

    pub fn sigma_x() -> Self {
        Self { mat: pauli_x() }
    }

    pub fn sigma_y() -> Self {
        Self { mat: pauli_y() }
    }

    pub fn sigma_z() -> Self {
        Self { mat: pauli_z() }
    }

    /// Pauli named by axis ("x", "y" or "z").
    pub fn pauli(axis: &str) -> Result<Self> {
        match axis {
            "x" => Ok(Self::sigma_x()),
            "y" => Ok(Self::sigma_y()),
            "z" => Ok(Self::sigma_z()),
            other => Err(Error::arg(format!("unknown Pauli axis {other:?}"))),
        }
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// M² = 𝟙.
    pub fn is_involutory(&self) -> bool {
        let sq = &self.mat * &self.mat;
        let id = CMatrix::identity(self.dim(), self.dim());
        (sq - id).iter().all(|z| z.norm() <= INVOLUTION_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "form")]
pub enum BellForm {
    /// Two parties; bound 0, quantum maximum 2.
    Bipartite,
    /// Unnormalized n-party form against biseparable states.
    Biseparable,
    /// Unnormalized n-party form against fully separable states; bound 0.
    FullySeparable,
    /// Normalized by 1/n; bound k−1.
    KProducible { k: usize },
    /// k-producible form evaluated from the white-noise closed forms (p = 1/2).
    Werner { k: usize },
}

impl BellForm {
    pub fn slug(&self) -> &'static str {
        match self {
            BellForm::Bipartite => "bipartite",
            BellForm::Biseparable => "biseparable",
            BellForm::FullySeparable => "fully-separable",
            BellForm::KProducible { .. } => "k-producible",
            BellForm::Werner { .. } => "werner",
        }
    }

    /// Parses a form slug; `k` is required for the k-producible and Werner forms.
    pub fn from_slug(slug: &str, k: Option<usize>) -> Result<Self> {
        let need_k = || k.ok_or_else(|| Error::arg(format!("form {slug} needs k")));
        match slug {
            "bipartite" => Ok(BellForm::Bipartite),
            "biseparable" => Ok(BellForm::Biseparable),
            "fully-separable" => Ok(BellForm::FullySeparable),
            "k-producible" => Ok(BellForm::KProducible { k: need_k()? }),
            "werner" => Ok(BellForm::Werner { k: need_k()? }),
            other => Err(Error::arg(format!("unknown Bell form {other:?}"))),
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            BellForm::KProducible { k } | BellForm::Werner { k } => Some(*k),
            _ => None,
        }
    }

    fn is_normalized(&self) -> bool {
        self.k().is_some()
    }
}

#[derive(Debug, Clone)]
pub struct BellConfig {
    pub observables: Vec<SiteObservable>,
    pub p: f64,
    pub form: BellForm,
}

impl BellConfig {
    pub fn new(observables: Vec<SiteObservable>, form: BellForm) -> Self {
        Self {
            observables,
            p: 0.5,
            form,
        }
    }

    /// Same observable on every one of `n` sites.
    pub fn uniform(obs: SiteObservable, n: usize, form: BellForm) -> Self {
        Self::new(vec![obs; n], form)
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    fn validate(&self, layout: &PartyLayout) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::arg(format!("power {} is outside (0, 1)", self.p)));
        }
        let n = layout.n();
        if self.observables.len() != n {
            return Err(Error::arg(format!(
                "{} observables given for {n} parties",
                self.observables.len()
            )));
        }
        for (i, m) in self.observables.iter().enumerate() {
            if m.dim() != layout.dim(i) {
                return Err(Error::layout(format!(
                    "observable on party {i} has dimension {}, party has {}",
                    m.dim(),
                    layout.dim(i)
                )));
            }
        }
        match self.form {
            BellForm::Bipartite if n != 2 => Err(Error::arg("bipartite form needs exactly two parties")),
            BellForm::KProducible { k } | BellForm::Werner { k } if k < 1 || k > n => {
                Err(Error::arg(format!("depth {k} outside 1..={n}")))
            }
            _ if n < 2 => Err(Error::arg("Bell forms need at least two parties")),
            _ => Ok(()),
        }
    }
}

/// Per-term breakdown shared by every form. Diagonals of the matrices are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellTerms {
    /// ⟨M_i⟩.
    pub expectations: Vec<f64>,
    /// ⟨M_i M_j⟩ for i ≠ j.
    pub correlations: Vec<Vec<f64>>,
    pub f1: Vec<f64>,
    /// Re f₂(i, j) for i ≠ j.
    pub f2: Vec<Vec<f64>>,
}

impl BellTerms {
    fn n(&self) -> usize {
        self.f1.len()
    }

    /// Σ_{i≠j}⟨M_iM_j⟩ − (n−1)/n Σ_i (f₁(i) + Σ_{j≠i} f₂(i, j)).
    pub fn raw_lhs(&self) -> f64 {
        let n = self.n();
        let mut corr = 0.0;
        let mut skew = 0.0;
        for i in 0..n {
            skew += self.f1[i];
            for j in 0..n {
                if i != j {
                    corr += self.correlations[i][j];
                    skew += self.f2[i][j];
                }
            }
        }
        corr - (n as f64 - 1.0) / n as f64 * skew
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    pub form: BellForm,
    pub p: f64,
    pub lhs: f64,
    pub classical_bound: f64,
    pub quantum_max: f64,
    pub violated: bool,
    /// Smallest depth not excluded; only for normalized forms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_depth: Option<usize>,
    pub terms: BellTerms,
}

fn embedded(cfg: &BellConfig, layout: &PartyLayout) -> Result<Vec<CMatrix>> {
    cfg.observables
        .iter()
        .enumerate()
        .map(|(i, m)| embed_site_op(m.mat(), i, layout))
        .collect()
}

fn powers(rho: &DensityOp, p: f64) -> Result<(CMatrix, CMatrix)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::arg(format!("power {p} is outside (0, 1)")));
    }
    let eig = herm_eig(rho.mat())?;
    Ok((eig.psd_power(p)?, eig.psd_power(1.0 - p)?))
}

fn check_site(rho: &DensityOp, site: usize, m: &SiteObservable) -> Result<()> {
    let layout = rho.layout();
    if site >= layout.n() {
        return Err(Error::layout(format!("site {site} out of range for {} parties", layout.n())));
    }
    if m.dim() != layout.dim(site) {
        return Err(Error::layout(format!(
            "observable dimension {} does not match party {site} dimension {}",
            m.dim(),
            layout.dim(site)
        )));
    }
    Ok(())
}

/// tr[ρ^p M̃ ρ^{1−p} M̃].
pub fn f1(rho: &DensityOp, site: usize, m: &SiteObservable, p: f64) -> Result<f64> {
    check_site(rho, site, m)?;
    let (rp, rq) = powers(rho, p)?;
    let mt = embed_site_op(m.mat(), site, rho.layout())?;
    Ok(trace_product(&(&rp * &mt), &(&rq * &mt)).re)
}

/// tr[ρ^p M̃_i ρ^{1−p} M̃_j]; complex unless p = 1/2 or ρ is pure.
pub fn f2_complex(
    rho: &DensityOp,
    site_i: usize,
    m_i: &SiteObservable,
    site_j: usize,
    m_j: &SiteObservable,
    p: f64,
) -> Result<C64> {
    if site_i == site_j {
        return Err(Error::arg("f2 needs two distinct sites"));
    }
    check_site(rho, site_i, m_i)?;
    check_site(rho, site_j, m_j)?;
    let (rp, rq) = powers(rho, p)?;
    let a = embed_site_op(m_i.mat(), site_i, rho.layout())?;
    let b = embed_site_op(m_j.mat(), site_j, rho.layout())?;
    Ok(trace_product(&(&rp * &a), &(&rq * &b)))
}

/// Re tr[ρ^p M̃_i ρ^{1−p} M̃_j].
pub fn f2(
    rho: &DensityOp,
    site_i: usize,
    m_i: &SiteObservable,
    site_j: usize,
    m_j: &SiteObservable,
    p: f64,
) -> Result<f64> {
    Ok(f2_complex(rho, site_i, m_i, site_j, m_j, p)?.re)
}

/// tr[ρ^p S ρ^{1−p} S] with S = Σ_i M̃_i, the full skew part of the raw lhs.
pub fn combined_functional(rho: &DensityOp, observables: &[SiteObservable], p: f64) -> Result<f64> {
    let layout = rho.layout();
    if observables.len() != layout.n() {
        return Err(Error::arg("one observable per party is required"));
    }
    let (rp, rq) = powers(rho, p)?;
    let mut s = CMatrix::zeros(rho.dim(), rho.dim());
    for (i, m) in observables.iter().enumerate() {
        check_site(rho, i, m)?;
        s += embed_site_op(m.mat(), i, layout)?;
    }
    Ok(trace_product(&(&rp * &s), &(&rq * &s)).re)
}

/// Breakdown through the generic ρ^p pipeline.
pub fn bell_terms(rho: &DensityOp, cfg: &BellConfig) -> Result<BellTerms> {
    let layout = rho.layout();
    cfg.validate(layout)?;
    let n = layout.n();
    let ops = embedded(cfg, layout)?;
    let (rp, rq) = powers(rho, cfg.p)?;
    let site_mul = |m: &CMatrix| -> Result<Vec<CMatrix>> {
        cfg.observables
            .iter()
            .enumerate()
            .map(|(i, o)| mul_site_op_right(m, o.mat(), i, layout))
            .collect()
    };
    let left = site_mul(&rp)?;
    let right = site_mul(&rq)?;
    let rho_ops = site_mul(rho.mat())?;
    let mut terms = BellTerms {
        expectations: vec![0.0; n],
        correlations: vec![vec![0.0; n]; n],
        f1: vec![0.0; n],
        f2: vec![vec![0.0; n]; n],
    };
    for i in 0..n {
        terms.expectations[i] = trace_product(rho.mat(), &ops[i]).re;
        terms.f1[i] = trace_product(&left[i], &right[i]).re;
        for j in 0..n {
            if i != j {
                terms.correlations[i][j] = trace_product(&rho_ops[i], &ops[j]).re;
                terms.f2[i][j] = trace_product(&left[i], &right[j]).re;
            }
        }
    }
    Ok(terms)
}

fn assemble(form: BellForm, p: f64, n: usize, terms: BellTerms) -> BellReport {
    let nf = n as f64;
    let raw = terms.raw_lhs();
    let (lhs, classical_bound, quantum_max) = match form {
        BellForm::Bipartite => (raw, 0.0, 2.0),
        BellForm::FullySeparable => (raw, 0.0, nf * nf - nf),
        BellForm::Biseparable => (raw, (nf - 1.0) * (nf - 2.0), nf * nf - nf),
        BellForm::KProducible { k } | BellForm::Werner { k } => (raw / nf, k as f64 - 1.0, nf - 1.0),
    };
    let min_depth = form
        .is_normalized()
        .then(|| (1..=n).find(|&k| lhs <= k as f64 - 1.0 + VIOLATION_TOL).unwrap_or(n));
    BellReport {
        form,
        p,
        lhs,
        classical_bound,
        quantum_max,
        violated: lhs > classical_bound + VIOLATION_TOL,
        min_depth,
        terms,
    }
}

/// Evaluates the configured form. The Werner form requires ρ to be white-noise
/// mixed and p = 1/2, and uses the closed expressions instead of ρ^p.
pub fn bell_lhs(rho: &DensityOp, cfg: &BellConfig) -> Result<BellReport> {
    let terms = match cfg.form {
        BellForm::Werner { .. } => {
            cfg.validate(rho.layout())?;
            let (phi, v) = werner_decompose(rho)?;
            werner_terms(&phi, v, cfg)?
        }
        _ => bell_terms(rho, cfg)?,
    };
    Ok(assemble(cfg.form, cfg.p, rho.layout().n(), terms))
}

/// Normalized form with bound k−1; `min_depth` is the certified depth.
pub fn bell_kproducible(rho: &DensityOp, cfg: &BellConfig, k: usize) -> Result<BellReport> {
    let cfg = BellConfig {
        form: BellForm::KProducible { k },
        ..cfg.clone()
    };
    bell_lhs(rho, &cfg)
}

/// Square roots of the white-noise mixture: √ρ = g|Φ⟩⟨Φ| + c𝟙.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerRoot {
    pub v: f64,
    pub dim: usize,
    pub g: f64,
    pub c: f64,
}

impl WernerRoot {
    pub fn new(v: f64, dim: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::arg(format!("noise parameter {v} is outside [0, 1]")));
        }
        let c = ((1.0 - v) / dim as f64).sqrt();
        let g = (v + c * c).sqrt() - c;
        Ok(Self { v, dim, g, c })
    }
}

fn involutory(m: &SiteObservable) -> Result<()> {
    if m.is_involutory() {
        Ok(())
    } else {
        Err(Error::arg("closed white-noise forms need M² = 𝟙"))
    }
}

/// Recovers (Φ, v) from ρ = v|Φ⟩⟨Φ| + (1−v)𝟙/D.
pub fn werner_decompose(rho: &DensityOp) -> Result<(PureState, f64)> {
    let dim = rho.dim();
    let eig = herm_eig(rho.mat())?;
    let top = eig.values[0];
    let rest = &eig.values[1..];
    let mu = rest.iter().sum::<f64>() / rest.len() as f64;
    if rest.iter().any(|w| (w - mu).abs() > WERNER_TOL) {
        return Err(Error::arg("state is not a white-noise mixture of a pure state"));
    }
    let v = top - mu;
    if (mu - (1.0 - v) / dim as f64).abs() > WERNER_TOL {
        return Err(Error::arg("state is not a white-noise mixture of a pure state"));
    }
    let phi = PureState::normalized(rho.layout().clone(), eig.vectors.column(0).into_owned())?;
    Ok((phi, v.clamp(0.0, 1.0)))
}

fn site_expect(phi: &PureState, site: usize, m: &SiteObservable) -> Result<(f64, CMatrix)> {
    if site >= phi.layout().n() || m.dim() != phi.layout().dim(site) {
        return Err(Error::layout(format!("observable does not fit party {site}")));
    }
    let mt = embed_site_op(m.mat(), site, phi.layout())?;
    Ok((phi.expect(&mt)?, mt))
}

/// f₁ at p = 1/2 for ρ = vΦ + (1−v)𝟙/D: g²⟨M⟩² + 2gc + (1−v).
pub fn werner_closed_f1(phi: &PureState, v: f64, site: usize, m: &SiteObservable) -> Result<f64> {
    involutory(m)?;
    let w = WernerRoot::new(v, phi.layout().total_dim())?;
    let (a, _) = site_expect(phi, site, m)?;
    Ok(w.g * w.g * a * a + 2.0 * w.g * w.c + (1.0 - v))
}

/// As printed, with ⟨M⟩ in place of ⟨M²⟩ = 1 in the middle term.
pub fn werner_printed_f1(phi: &PureState, v: f64, site: usize, m: &SiteObservable) -> Result<f64> {
    involutory(m)?;
    let w = WernerRoot::new(v, phi.layout().total_dim())?;
    let (a, _) = site_expect(phi, site, m)?;
    Ok(w.g * w.g * a * a + 2.0 * w.g * w.c * a + (1.0 - v))
}

/// f₂ at p = 1/2: g²⟨M_i⟩⟨M_j⟩ + 2gc⟨M_iM_j⟩ + c² tr[M̃_iM̃_j].
pub fn werner_closed_f2(
    phi: &PureState,
    v: f64,
    site_i: usize,
    m_i: &SiteObservable,
    site_j: usize,
    m_j: &SiteObservable,
) -> Result<f64> {
    if site_i == site_j {
        return Err(Error::arg("f2 needs two distinct sites"));
    }
    involutory(m_i)?;
    involutory(m_j)?;
    let w = WernerRoot::new(v, phi.layout().total_dim())?;
    let (a, at) = site_expect(phi, site_i, m_i)?;
    let (b, bt) = site_expect(phi, site_j, m_j)?;
    let ab = &at * &bt;
    let corr = phi.amps().dotc(&(&ab * phi.amps())).re;
    Ok(w.g * w.g * a * b + 2.0 * w.g * w.c * corr + w.c * w.c * ab.trace().re)
}

/// As printed: the c² tr[M̃_iM̃_j] term is absent.
pub fn werner_printed_f2(
    phi: &PureState,
    v: f64,
    site_i: usize,
    m_i: &SiteObservable,
    site_j: usize,
    m_j: &SiteObservable,
) -> Result<f64> {
    if site_i == site_j {
        return Err(Error::arg("f2 needs two distinct sites"));
    }
    let w = WernerRoot::new(v, phi.layout().total_dim())?;
    let (a, at) = site_expect(phi, site_i, m_i)?;
    let (b, bt) = site_expect(phi, site_j, m_j)?;
    let corr = phi.amps().dotc(&(&at * &bt * phi.amps())).re;
    Ok(w.g * w.g * a * b + 2.0 * w.g * w.c * corr)
}

/// Breakdown from the closed white-noise expressions (p = 1/2).
pub fn werner_terms(phi: &PureState, v: f64, cfg: &BellConfig) -> Result<BellTerms> {
    if (cfg.p - 0.5).abs() > 0.0 {
        return Err(Error::arg("closed white-noise forms are only available at p = 1/2"));
    }
    let layout = phi.layout();
    cfg.validate(layout)?;
    let n = layout.n();
    let dim = layout.total_dim() as f64;
    let mut terms = BellTerms {
        expectations: vec![0.0; n],
        correlations: vec![vec![0.0; n]; n],
        f1: vec![0.0; n],
        f2: vec![vec![0.0; n]; n],
    };
    let ops = embedded(cfg, layout)?;
    for i in 0..n {
        let m_i = &cfg.observables[i];
        let a = phi.expect(&ops[i])?;
        terms.expectations[i] = v * a + (1.0 - v) * ops[i].trace().re / dim;
        terms.f1[i] = werner_closed_f1(phi, v, i, m_i)?;
        for j in 0..n {
            if i == j {
                continue;
            }
            let ab = &ops[i] * &ops[j];
            let corr = phi.amps().dotc(&(&ab * phi.amps())).re;
            terms.correlations[i][j] = v * corr + (1.0 - v) * ab.trace().re / dim;
            terms.f2[i][j] = werner_closed_f2(phi, v, i, m_i, j, &cfg.observables[j])?;
        }
    }
    Ok(terms)
}

/// Normalized lhs for vΦ + (1−v)𝟙/D from the closed expressions.
pub fn werner_lhs(phi: &PureState, v: f64, observables: &[SiteObservable]) -> Result<f64> {
    let n = phi.layout().n();
    let cfg = BellConfig::new(observables.to_vec(), BellForm::Werner { k: n });
    Ok(werner_terms(phi, v, &cfg)?.raw_lhs() / n as f64)
}

/// The printed white-noise lhs, written in ρ-expectations with the lone
/// ⟨A_i⟩ term read as a sum over i. Needs v > 0.
pub fn werner_printed_lhs(phi: &PureState, v: f64, observables: &[SiteObservable]) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::arg("printed white-noise form divides by v; v must be positive"));
    }
    let layout = phi.layout();
    let n = layout.n();
    let nf = n as f64;
    let dim = layout.total_dim() as f64;
    let w = WernerRoot::new(v, layout.total_dim())?;
    let cfg = BellConfig::new(observables.to_vec(), BellForm::Werner { k: n });
    cfg.validate(layout)?;
    let ops = embedded(&cfg, layout)?;
    let mean: Vec<f64> = ops
        .iter()
        .map(|m| Ok(v * phi.expect(m)? + (1.0 - v) * m.trace().re / dim))
        .collect::<Result<_>>()?;
    let weight = 1.0 / nf - 2.0 * (nf - 1.0) * w.g * w.c / (nf * nf * v);
    let mut corr = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let ab = &ops[i] * &ops[j];
                corr += v * phi.amps().dotc(&(&ab * phi.amps())).re + (1.0 - v) * ab.trace().re / dim;
            }
        }
    }
    let sum: f64 = mean.iter().sum();
    Ok(weight * corr
        - (nf - 1.0) / (nf * nf) * w.g * w.g / (v * v) * sum * sum
        - 2.0 * (nf - 1.0) * w.g * w.c / (nf * nf * v) * sum
        - (nf - 1.0) * (1.0 - v) / nf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalNoise {
    pub v_star: f64,
    pub k: usize,
    pub bracket: (f64, f64),
    /// lhs − (k−1) at evenly spaced points across the bracket.
    pub samples: Vec<f64>,
    /// Samples are non-decreasing in v.
    pub monotone: bool,
}

/// Smallest white-noise visibility v at which the normalized lhs exceeds k−1.
/// A Werner form in `cfg` selects the closed expressions, any other form the
/// generic ρ^p pipeline.
pub fn critical_noise(phi: &PureState, cfg: &BellConfig, k: usize, bracket: (f64, f64)) -> Result<CriticalNoise> {
    let (lo, hi) = bracket;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(Error::arg(format!("bracket ({lo}, {hi}) is not inside [0, 1]")));
    }
    let closed = matches!(cfg.form, BellForm::Werner { .. });
    let cfg = BellConfig {
        form: BellForm::KProducible { k },
        ..cfg.clone()
    };
    cfg.validate(phi.layout())?;
    let excess = |v: f64| -> Result<f64> {
        let lhs = if closed {
            werner_lhs(phi, v, &cfg.observables)?
        } else {
            bell_lhs(&mix_white_noise(phi, v)?, &cfg)?.lhs
        };
        Ok(lhs - (k as f64 - 1.0))
    };
    let samples = (0..MONOTONE_SAMPLES)
        .map(|i| excess(lo + (hi - lo) * i as f64 / (MONOTONE_SAMPLES - 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    let monotone = samples.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let v_star = crate::witness::bisect(excess, lo, hi, ROOT_TOL)?;
    Ok(CriticalNoise {
        v_star,
        k,
        bracket,
        samples,
        monotone,
    })
}

/// Named evaluation settings with a printed closed expression to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Bipartite,
    Ghz,
    W,
    Dicke24,
    GhzDepth,
    WDepth,
    Dicke24Sphere,
    MaxSlice,
    ThreeQubit,
    WernerGhz,
    WernerW,
}

impl Scenario {
    pub const ALL: [Scenario; 11] = [
        Scenario::Bipartite,
        Scenario::Ghz,
        Scenario::W,
        Scenario::Dicke24,
        Scenario::GhzDepth,
        Scenario::WDepth,
        Scenario::Dicke24Sphere,
        Scenario::MaxSlice,
        Scenario::ThreeQubit,
        Scenario::WernerGhz,
        Scenario::WernerW,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            Scenario::Bipartite => "bipartite",
            Scenario::Ghz => "ghz",
            Scenario::W => "w",
            Scenario::Dicke24 => "dicke24",
            Scenario::GhzDepth => "ghz-depth",
            Scenario::WDepth => "w-depth",
            Scenario::Dicke24Sphere => "dicke24-sphere",
            Scenario::MaxSlice => "max-slice",
            Scenario::ThreeQubit => "three-qubit",
            Scenario::WernerGhz => "werner-ghz",
            Scenario::WernerW => "werner-w",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|sc| sc.slug() == s)
            .ok_or_else(|| Error::arg(format!("unknown scenario {s:?}")))
    }
}

/// Scenario inputs; unset fields take per-scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// W-depth only; balanced when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<WVariant>,
    /// Bipartite only: "x" or "z".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    /// Inputs with defaults filled in.
    pub params: ScenarioParams,
    pub report: BellReport,
    pub pipeline: f64,
    pub printed: f64,
    pub difference: f64,
    /// Closed white-noise route, for the Werner scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed: Option<f64>,
}

impl ScenarioReport {
    pub fn claim_ref(&self) -> String {
        match (self.scenario, &self.params.axis) {
            (Scenario::Bipartite, Some(axis)) => format!("scenario/bipartite/{axis}"),
            (sc, _) => format!("scenario/{sc}"),
        }
    }

    pub fn matches_printed(&self) -> bool {
        self.difference <= PRINTED_TOL
    }

    /// Printed value against the pipeline; a mismatch is a PrintedMismatch.
    pub fn ledger_record(&self) -> LedgerRecord {
        LedgerRecord::adjudicate(
            self.claim_ref(),
            self.printed,
            self.pipeline,
            PRINTED_TOL,
            Verdict::PrintedMismatch,
        )
        .with_detail(serde_json::to_value(&self.params).unwrap_or(serde_json::Value::Null))
    }
}

fn need_none(name: &str, present: bool, sc: Scenario) -> Result<()> {
    if present {
        Err(Error::arg(format!("scenario {sc} does not take parameter {name}")))
    } else {
        Ok(())
    }
}

fn unit_amplitudes(xs: &[f64]) -> Result<Vec<f64>> {
    let norm: f64 = xs.iter().map(|x| x * x).sum::<f64>().sqrt();
    if xs.iter().any(|x| !x.is_finite() || *x < 0.0) || !(norm > 0.0) {
        return Err(Error::arg("amplitudes must be finite, non-negative and not all zero"));
    }
    Ok(xs.iter().map(|x| x / norm).collect())
}

/// γ₁|0011⟩ + γ₂|1100⟩ + γ₃|0101⟩ + γ₄|1010⟩ + γ₅|1001⟩ + γ₆|0110⟩.
pub fn make_dicke24_weighted(gammas: &[f64]) -> Result<PureState> {
    const STRINGS: [[usize; 4]; 6] = [
        [0, 0, 1, 1],
        [1, 1, 0, 0],
        [0, 1, 0, 1],
        [1, 0, 1, 0],
        [1, 0, 0, 1],
        [0, 1, 1, 0],
    ];
    if gammas.len() != 6 {
        return Err(Error::arg("the weighted four-party Dicke state takes six amplitudes"));
    }
    let terms: Vec<(Vec<usize>, C64)> = STRINGS
        .iter()
        .zip(gammas)
        .map(|(s, &g)| (s.to_vec(), C64::new(g, 0.0)))
        .collect();
    PureState::from_terms(PartyLayout::qubits(4)?, &terms)
}

fn dicke24_sphere_gammas(phi: f64, theta: f64) -> [f64; 6] {
    let a = FRAC_1_SQRT_2 * phi.sin() * theta.cos();
    let b = FRAC_1_SQRT_2 * phi.sin() * theta.sin();
    let c = FRAC_1_SQRT_2 * phi.cos();
    [a, a, b, b, c, c]
}

struct Resolved {
    rho: DensityOp,
    cfg: BellConfig,
    printed: f64,
    closed: Option<f64>,
}

/// Evaluates a scenario through the generic pipeline and through its printed
/// closed expression.
pub fn scenario_eval(sc: Scenario, params: &ScenarioParams) -> Result<ScenarioReport> {
    let mut p = params.clone();
    if sc != Scenario::Bipartite {
        need_none("axis", p.axis.is_some(), sc)?;
    }
    let fixed_n = |p: &mut ScenarioParams, n: usize| -> Result<usize> {
        match p.n {
            Some(m) if m != n => Err(Error::arg(format!("scenario {sc} is fixed at n = {n}"))),
            _ => {
                p.n = Some(n);
                Ok(n)
            }
        }
    };
    let sz = SiteObservable::sigma_z();
    let sx = SiteObservable::sigma_x();
    let sq = |x: f64| x * x;
    let res = match sc {
        Scenario::Bipartite => {
            let n = fixed_n(&mut p, 2)?;
            let theta = *p.theta.get_or_insert(FRAC_PI_4);
            let axis = p.axis.get_or_insert_with(|| "x".into()).clone();
            let obs = match axis.as_str() {
                "x" | "z" => SiteObservable::pauli(&axis)?,
                _ => return Err(Error::arg(format!("bipartite axis must be x or z, got {axis:?}"))),
            };
            let psi = make_ghz(n, 2, &[theta.cos(), theta.sin()])?;
            let printed = if axis == "x" {
                4.0 * (2.0 * theta).sin()
            } else {
                2.0 - 2.0 * sq((2.0 * theta).cos())
            };
            Resolved {
                rho: psi.to_density(),
                cfg: BellConfig::uniform(obs, n, BellForm::Bipartite),
                printed,
                closed: None,
            }
        }
        Scenario::Ghz | Scenario::GhzDepth => {
            let n = *p.n.get_or_insert(3);
            let theta = *p.theta.get_or_insert(FRAC_PI_4);
            let nf = n as f64;
            let (form, printed) = if sc == Scenario::Ghz {
                need_none("k", p.k.is_some(), sc)?;
                (BellForm::FullySeparable, nf * nf - nf - nf * (nf - 1.0) * sq((2.0 * theta).cos()))
            } else {
                let k = *p.k.get_or_insert(n.saturating_sub(1).max(1));
                (BellForm::KProducible { k }, nf - 1.0 - (nf - 1.0) * sq((2.0 * theta).cos()))
            };
            let psi = make_ghz(n, 2, &[theta.cos(), theta.sin()])?;
            Resolved {
                rho: psi.to_density(),
                cfg: BellConfig::uniform(sz, n, form),
                printed,
                closed: None,
            }
        }
        Scenario::W => {
            let n = *p.n.get_or_insert_with(|| params.amplitudes.as_ref().map_or(3, Vec::len));
            let amps = p.amplitudes.get_or_insert_with(|| vec![1.0; n]).clone();
            if amps.len() != n {
                return Err(Error::arg(format!("W scenario needs {n} amplitudes")));
            }
            let alphas = unit_amplitudes(&amps)?;
            let mut printed = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        printed += 4.0 * alphas[i] * alphas[j];
                    }
                }
            }
            Resolved {
                rho: make_w_amplitudes(&alphas)?.to_density(),
                cfg: BellConfig::uniform(sx, n, BellForm::FullySeparable),
                printed,
                closed: None,
            }
        }
        Scenario::Dicke24 => {
            let n = fixed_n(&mut p, 4)?;
            let amps = p.amplitudes.get_or_insert_with(|| vec![1.0; 6]).clone();
            if amps.len() != 6 {
                return Err(Error::arg("dicke24 scenario needs 6 amplitudes"));
            }
            let gammas = unit_amplitudes(&amps)?;
            let mut printed = 0.0;
            for i in 0..6 {
                for j in i + 1..6 {
                    printed += 8.0 * gammas[i] * gammas[j];
                }
            }
            Resolved {
                rho: make_dicke24_weighted(&gammas)?.to_density(),
                cfg: BellConfig::uniform(sx, n, BellForm::FullySeparable),
                printed,
                closed: None,
            }
        }
        Scenario::WDepth => {
            let n = *p.n.get_or_insert(3);
            let k = *p.k.get_or_insert(2);
            let nf = n as f64;
            let (psi, printed) = match p.variant {
                None => {
                    need_none("r", p.r.is_some(), sc)?;
                    (make_w_family(n, WVariant::TailWeighted, 1.0)?, 4.0 * (nf - 1.0) / nf)
                }
                Some(variant) => {
                    let r = *p.r.get_or_insert(1.0);
                    let printed = match variant {
                        WVariant::TailWeighted => {
                            (2.0 * sq(nf - 1.0) + r * (nf - 1.0)) / (nf * (nf - 1.0 + r * r))
                        }
                        WVariant::BulkWeighted => (8.0 * r + 4.0 * r * r) / (1.0 + 2.0 * r * r),
                    };
                    (make_w_family(n, variant, r)?, printed)
                }
            };
            Resolved {
                rho: psi.to_density(),
                cfg: BellConfig::uniform(sx, n, BellForm::KProducible { k }),
                printed,
                closed: None,
            }
        }
        Scenario::Dicke24Sphere => {
            let n = fixed_n(&mut p, 4)?;
            let k = *p.k.get_or_insert(2);
            let phi = *p.phi.get_or_insert(FRAC_PI_2);
            let theta = *p.theta.get_or_insert(FRAC_PI_4);
            let gammas = dicke24_sphere_gammas(phi, theta);
            let printed = 4.0 / 3.0 * sq(phi.sin()) * (2.0 * theta).sin()
                + 4.0 / 3.0 * (2.0 * phi).sin() * (theta.cos() + theta.sin())
                + 2.0 / 3.0;
            Resolved {
                rho: make_dicke24_weighted(&gammas)?.to_density(),
                cfg: BellConfig::uniform(sx, n, BellForm::KProducible { k }),
                printed,
                closed: None,
            }
        }
        Scenario::MaxSlice => {
            let n = *p.n.get_or_insert(3);
            let k = *p.k.get_or_insert(n.saturating_sub(1).max(1));
            let theta = *p.theta.get_or_insert(FRAC_PI_4);
            let nf = n as f64;
            let c2 = (2.0 * theta).cos();
            let printed = (nf - 1.0) * (nf - 2.0) / nf + (nf - 1.0) / nf * (1.0 + c2)
                - (nf - 1.0) / (4.0 * nf * nf) * sq(1.0 + c2);
            Resolved {
                rho: make_maximal_slice(n, theta)?.to_density(),
                cfg: BellConfig::uniform(sz, n, BellForm::KProducible { k }),
                printed,
                closed: None,
            }
        }
        Scenario::ThreeQubit => {
            let n = fixed_n(&mut p, 3)?;
            let k = *p.k.get_or_insert(2);
            let phi = *p.phi.get_or_insert(0.0);
            let amps = p
                .amplitudes
                .get_or_insert_with(|| vec![FRAC_1_SQRT_2, 0.0, 0.0, 0.0, FRAC_1_SQRT_2])
                .clone();
            if amps.len() != 5 {
                return Err(Error::arg("three-qubit scenario needs 5 amplitudes"));
            }
            let g = unit_amplitudes(&amps)?;
            let w: Vec<f64> = g.iter().map(|x| x * x).collect();
            let printed = 2.0 * w[0] + 2.0 * w[4] - 2.0 / 3.0 * (w[1] + w[2] + w[3])
                - 4.0 / 9.0 * sq(3.0 * w[0] + w[1] - w[2] - w[3] - w[4]);
            Resolved {
                rho: make_three_qubit_canonical([g[0], g[1], g[2], g[3], g[4]], phi)?.to_density(),
                cfg: BellConfig::uniform(sz, n, BellForm::KProducible { k }),
                printed,
                closed: None,
            }
        }
        Scenario::WernerGhz | Scenario::WernerW => {
            let n = if sc == Scenario::WernerW {
                fixed_n(&mut p, 3)?
            } else {
                *p.n.get_or_insert(3)
            };
            let k = *p.k.get_or_insert(n.saturating_sub(1).max(1));
            let v = *p.v.get_or_insert(0.9);
            let nf = n as f64;
            let root = WernerRoot::new(v, 1 << n)?;
            let gc = root.g * root.c;
            let (psi, obs, printed) = if sc == Scenario::WernerGhz {
                let printed =
                    v * (nf - 1.0) - 2.0 * sq(nf - 1.0) * gc / nf - (nf - 1.0) * (1.0 - v) / nf;
                (make_balanced_ghz(n, 2)?, sz, printed)
            } else {
                let printed = 4.0 * v / 3.0 - 16.0 * gc / 9.0 - 2.0 * (1.0 - v) / 3.0;
                (make_w_family(3, WVariant::TailWeighted, 1.0)?, sx, printed)
            };
            let closed = werner_lhs(&psi, v, &vec![obs.clone(); n])?;
            Resolved {
                rho: mix_white_noise(&psi, v)?,
                cfg: BellConfig::uniform(obs, n, BellForm::KProducible { k }),
                printed,
                closed: Some(closed),
            }
        }
    };
    let report = bell_lhs(&res.rho, &res.cfg)?;
    let pipeline = report.lhs;
    Ok(ScenarioReport {
        scenario: sc,
        params: p,
        difference: (pipeline - res.printed).abs(),
        pipeline,
        printed: res.printed,
        report,
        closed: res.closed,
    })
}

/// Printed white-noise GHZ lhs as a function of v, for root finding.
pub fn werner_ghz_printed_lhs(n: usize, v: f64) -> Result<f64> {
    let nf = n as f64;
    let root = WernerRoot::new(v, 1 << n)?;
    Ok(v * (nf - 1.0) - 2.0 * (nf - 1.0) * (nf - 1.0) * root.g * root.c / nf - (nf - 1.0) * (1.0 - v) / nf)
}

/// Printed white-noise W₃ lhs as a function of v.
pub fn werner_w3_printed_lhs(v: f64) -> Result<f64> {
    let root = WernerRoot::new(v, 8)?;
    Ok(4.0 * v / 3.0 - 16.0 * root.g * root.c / 9.0 - 2.0 * (1.0 - v) / 3.0)
}
