//! Batch adjudication of closed forms and printed expressions against
//! independent computations.

use std::f64::consts::FRAC_1_SQRT_2 as H;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bell::{
    bell_lhs, critical_noise, scenario_eval, werner_closed_f1, werner_ghz_printed_lhs, werner_printed_f1,
    werner_w3_printed_lhs, BellConfig, BellForm, Scenario, ScenarioParams, SiteObservable,
};
use crate::bounds::{bound_dicke_closed, bound_ghz, bound_gamma3, bound_schmidt_exact, bound_sym_upper, gamma_three_qubit_phase_free};
use crate::error::Result;
use crate::ledger::{Ledger, LedgerRecord, Verdict, DEFAULT_TOL};
use crate::oracle::{verify_bound, OracleConfig};
use crate::states::{
    make_balanced_ghz, make_cluster5, make_dicke, make_ghz, make_sym_superposition, make_three_qubit_canonical,
    make_w_family, DickeMode, WVariant,
};
use crate::tensor::{kron_vec, DensityOp, PartyLayout, PureState, C64, CVector};
use crate::witness::{bisect, cluster5_printed_threshold, threshold_general, threshold_white_noise, FamilyDescriptor};

/// Dicke instances checked against the oracle, as (n, k, d).
pub const DICKE_CASES: [(usize, usize, usize); 5] = [(3, 1, 2), (4, 1, 2), (4, 2, 3), (5, 1, 2), (4, 2, 2)];
const GAMMA3_SAMPLES: usize = 100;
const THRESHOLD_TOL: f64 = 1e-9;
const ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Agree,
    Discrepancy,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub record: LedgerRecord,
    pub expected: Expectation,
    /// Acceptance criterion this check belongs to, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
}

impl SuiteEntry {
    pub fn is_surprise(&self) -> bool {
        self.record.is_discrepancy() != (self.expected == Expectation::Discrepancy)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn discrepancies(&self) -> impl Iterator<Item = &SuiteEntry> {
        self.entries.iter().filter(|e| e.record.is_discrepancy())
    }

    pub fn surprises(&self) -> impl Iterator<Item = &SuiteEntry> {
        self.entries.iter().filter(|e| e.is_surprise())
    }

    pub fn has_discrepancy(&self, claim_ref: &str) -> bool {
        self.discrepancies().any(|e| e.record.claim_ref == claim_ref)
    }

    /// Records whose agreement status differs from what was expected.
    pub fn surprises_for(&self, criterion: u8) -> usize {
        self.surprises().filter(|e| e.criterion == Some(criterion)).count()
    }
}

struct Collector<'a> {
    ledger: &'a mut Ledger,
    report: SuiteReport,
}

impl Collector<'_> {
    fn push(&mut self, record: LedgerRecord, expected: Expectation, criterion: Option<u8>) -> Result<()> {
        self.ledger.submit(record.clone())?;
        self.report.entries.push(SuiteEntry {
            record,
            expected,
            criterion,
        });
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub oracle: OracleConfig,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            oracle: OracleConfig::default(),
            seed: crate::oracle::DEFAULT_SEED,
        }
    }
}

/// Runs every check, submitting each record to `ledger` (which keeps only
/// discrepancies) and returning all of them.
pub fn run_verification_suite(ledger: &mut Ledger, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut c = Collector {
        ledger,
        report: SuiteReport::default(),
    };
    ghz_thresholds(&mut c)?;
    oracle_bounds(&mut c, cfg)?;
    gamma3_checks(&mut c, cfg)?;
    printed_thresholds(&mut c)?;
    scenarios(&mut c)?;
    werner_checks(&mut c)?;
    biseparable_bound(&mut c)?;
    Ok(c.report)
}

fn ghz_thresholds(c: &mut Collector) -> Result<()> {
    for n in 3..=6 {
        let rep = threshold_white_noise(&FamilyDescriptor::balanced_ghz(n, 2))?;
        let root = rep.bisection_root.unwrap_or(f64::NAN);
        let rec = LedgerRecord::adjudicate(format!("threshold/ghz/n={n}"), rep.v_star, root, THRESHOLD_TOL, Verdict::Fail);
        c.push(rec, Expectation::Agree, Some(1))?;
    }
    Ok(())
}

fn oracle_bounds(c: &mut Collector, cfg: &SuiteConfig) -> Result<()> {
    for (n, k, d) in DICKE_CASES {
        let phi = make_dicke(n, d, k, DickeMode::Exact)?.state;
        let closed = bound_dicke_closed(n, k, d)?;
        let (rec, _) = verify_bound(&phi, &closed, &format!("bound/dicke/n={n},k={k},d={d}"), &cfg.oracle, c.ledger)?;
        let expected = if k < d { Expectation::Agree } else { Expectation::Discrepancy };
        c.report.entries.push(SuiteEntry {
            record: rec,
            expected,
            criterion: Some(2),
        });
    }
    let ghz_cases: [(usize, Vec<f64>); 2] = [(3, vec![H, H]), (4, vec![0.8, 0.6])];
    for (n, a) in ghz_cases {
        let phi = make_ghz(n, 2, &a)?;
        let (rec, _) = verify_bound(&phi, &bound_ghz(&a)?, &format!("bound/ghz/n={n}"), &cfg.oracle, c.ledger)?;
        c.report.entries.push(SuiteEntry {
            record: rec,
            expected: Expectation::Agree,
            criterion: None,
        });
    }
    // the symmetric-superposition value falls below what a bipartite product reaches
    let alphas = [H, H, 0.0];
    let phi = make_sym_superposition(3, 2, &alphas, 1.0, 0.0)?;
    let (rec, _) = verify_bound(&phi, &bound_sym_upper(&alphas, 1.0, 0.0, 3, 2)?, "bound/sym-upper", &cfg.oracle, c.ledger)?;
    c.report.entries.push(SuiteEntry {
        record: rec,
        expected: Expectation::Discrepancy,
        criterion: None,
    });
    Ok(())
}

/// Random canonical coefficients: non-negative, unit norm, phase in [0, π].
pub fn random_canonical(rng: &mut impl Rng) -> ([f64; 5], f64) {
    let mut l = [0.0; 5];
    for x in &mut l {
        *x = rng.random::<f64>();
    }
    let norm = l.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut l {
        *x /= norm;
    }
    (l, rng.random_range(0.0..=std::f64::consts::PI))
}

fn gamma3_checks(c: &mut Collector, cfg: &SuiteConfig) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = (0.0, 0.0, 0.0);
    for _ in 0..GAMMA3_SAMPLES {
        let (l, phi) = random_canonical(&mut rng);
        let closed = bound_gamma3(l, phi)?.value;
        let exact = bound_schmidt_exact(&make_three_qubit_canonical(l, phi)?)?.value;
        if (closed - exact).abs() >= worst.2 {
            worst = (closed, exact, (closed - exact).abs());
        }
    }
    let rec = LedgerRecord::adjudicate("bound/gamma3", worst.0, worst.1, 1e-9, Verdict::Fail)
        .with_detail(serde_json::json!({ "samples": GAMMA3_SAMPLES, "seed": cfg.seed }));
    c.push(rec, Expectation::Agree, Some(3))?;

    // without the cos φ factor the marginal eigenvalues move off the exact value
    let l = [0.5, 0.5, 0.3, 0.4, (1.0f64 - 0.25 - 0.25 - 0.09 - 0.16).sqrt()];
    let phi = 2.0;
    let exact = bound_schmidt_exact(&make_three_qubit_canonical(l, phi)?)?.value;
    let rec = LedgerRecord::adjudicate("bound/gamma3/phase-free", gamma_three_qubit_phase_free(l)?.gamma, exact, DEFAULT_TOL, Verdict::PrintedMismatch)
        .with_detail(serde_json::json!({ "lambda": l, "phi": phi }));
    c.push(rec, Expectation::Discrepancy, None)
}

fn printed_thresholds(c: &mut Collector) -> Result<()> {
    let cl = make_cluster5(H, H)?;
    let white = DensityOp::maximally_mixed(cl.layout().clone());
    let derived = threshold_general(&cl, &white, &bound_schmidt_exact(&cl)?)?.v_star;
    let rec = LedgerRecord::adjudicate("threshold/cluster5", cluster5_printed_threshold(H), derived, DEFAULT_TOL, Verdict::PrintedMismatch)
        .with_detail(serde_json::json!({ "a": H }));
    c.push(rec, Expectation::Discrepancy, None)?;

    // printed mirrored level for the top excitation of three qubits
    let (n, d, k) = (3, 2, 2);
    let dk = make_dicke(n, d, k, DickeMode::Exact)?.state;
    let exact = bound_schmidt_exact(&dk)?.value;
    let printed = crate::witness::dicke_level_printed(n, d, k);
    let rec = LedgerRecord::adjudicate("bound/dicke-level/n=3,k=2,d=2", printed, exact, DEFAULT_TOL, Verdict::PrintedMismatch);
    c.push(rec, Expectation::Discrepancy, None)
}

fn scenario_cases() -> Vec<(Scenario, ScenarioParams, Option<u8>, Expectation)> {
    use Expectation::*;
    let p = ScenarioParams::default;
    let mut out = vec![
        (Scenario::Bipartite, ScenarioParams { axis: Some("x".into()), theta: Some(0.3), ..p() }, None, Discrepancy),
        (Scenario::Bipartite, ScenarioParams { axis: Some("z".into()), theta: Some(0.3), ..p() }, None, Agree),
        (Scenario::W, p(), None, Discrepancy),
        (Scenario::Dicke24, p(), None, Discrepancy),
        (Scenario::WDepth, ScenarioParams { n: Some(4), ..p() }, None, Discrepancy),
        (Scenario::WDepth, ScenarioParams { n: Some(4), variant: Some(WVariant::TailWeighted), r: Some(0.5), ..p() }, None, Discrepancy),
        (Scenario::WDepth, ScenarioParams { n: Some(4), variant: Some(WVariant::BulkWeighted), r: Some(0.5), ..p() }, None, Discrepancy),
        (Scenario::Dicke24Sphere, p(), None, Discrepancy),
        (Scenario::MaxSlice, ScenarioParams { n: Some(4), theta: Some(0.6), ..p() }, None, Discrepancy),
        (Scenario::ThreeQubit, p(), None, Discrepancy),
        (Scenario::WernerGhz, ScenarioParams { n: Some(4), v: Some(0.9), ..p() }, None, Discrepancy),
        (Scenario::WernerW, ScenarioParams { v: Some(0.95), ..p() }, None, Discrepancy),
    ];
    for n in 3..=5 {
        out.push((Scenario::Ghz, ScenarioParams { n: Some(n), theta: Some(0.4), ..p() }, Some(4), Agree));
    }
    for n in 3..=6 {
        out.push((Scenario::GhzDepth, ScenarioParams { n: Some(n), theta: Some(0.3), k: Some(2), ..p() }, Some(5), Agree));
    }
    out
}

fn scenarios(c: &mut Collector) -> Result<()> {
    for (sc, params, criterion, expected) in scenario_cases() {
        let rep = scenario_eval(sc, &params)?;
        c.push(rep.ledger_record(), expected, criterion)?;
    }
    Ok(())
}

fn werner_checks(c: &mut Collector) -> Result<()> {
    let z = SiteObservable::sigma_z();
    let ghz = make_balanced_ghz(3, 2)?;
    let v = 0.5;
    let rec = LedgerRecord::adjudicate(
        "werner/f1-middle-term",
        werner_printed_f1(&ghz, v, 0, &z)?,
        werner_closed_f1(&ghz, v, 0, &z)?,
        1e-10,
        Verdict::PrintedMismatch,
    )
    .with_detail(serde_json::json!({ "n": 3, "v": v }));
    c.push(rec, Expectation::Discrepancy, Some(7))?;

    for n in 3..=6 {
        let phi = make_balanced_ghz(n, 2)?;
        let cfg = BellConfig::uniform(z.clone(), n, BellForm::FullySeparable);
        let k = n - 1;
        let pipeline = critical_noise(&phi, &cfg, k, (0.3, 1.0))?.v_star;
        let printed = bisect(|v| Ok(werner_ghz_printed_lhs(n, v)? - (k as f64 - 1.0)), 0.3, 1.0, ROOT_TOL)?;
        let rec = LedgerRecord::adjudicate(format!("critical-noise/werner-ghz/n={n}"), printed, pipeline, DEFAULT_TOL, Verdict::PrintedMismatch);
        c.push(rec, Expectation::Discrepancy, None)?;
    }
    let w = make_w_family(3, WVariant::TailWeighted, 1.0)?;
    let cfg = BellConfig::uniform(SiteObservable::sigma_x(), 3, BellForm::FullySeparable);
    let pipeline = critical_noise(&w, &cfg, 2, (0.3, 1.0))?.v_star;
    let printed = bisect(|v| Ok(werner_w3_printed_lhs(v)? - 1.0), 0.3, 1.0, ROOT_TOL)?;
    let rec = LedgerRecord::adjudicate("critical-noise/werner-w", printed, pipeline, DEFAULT_TOL, Verdict::PrintedMismatch);
    c.push(rec, Expectation::Discrepancy, None)
}

/// GHZ₃ ⊗ |+⟩ is biseparable but exceeds n − 1 under σ_z.
pub fn ghz_block_product(n: usize) -> Result<PureState> {
    let mut amps = make_balanced_ghz(n - 1, 2)?.amps().clone();
    amps = kron_vec(&amps, &CVector::from_vec(vec![C64::new(H, 0.0); 2]))?;
    PureState::new(PartyLayout::qubits(n)?, amps)
}

fn biseparable_bound(c: &mut Collector) -> Result<()> {
    let n = 4;
    let psi = ghz_block_product(n)?;
    let cfg = BellConfig::uniform(SiteObservable::sigma_z(), n, BellForm::Biseparable);
    let reached = bell_lhs(&psi.to_density(), &cfg)?.lhs;
    let printed = (n - 1) as f64;
    let verdict = if reached > printed + 1e-9 { Verdict::PrintedMismatch } else { Verdict::Pass };
    let rec = LedgerRecord::new("bell/biseparable-bound", printed, reached, verdict)
        .with_detail(serde_json::json!({ "n": n, "state": "ghz(n-1) x plus" }));
    c.push(rec, Expectation::Discrepancy, None)
}
