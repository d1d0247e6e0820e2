use std::path::Path;

use serde::Serialize;
use serde_json::json;

use ngme::bell::{bell_lhs, scenario_eval, BellConfig, BellForm, Scenario, ScenarioParams, ScenarioReport, SiteObservable};
use ngme::ledger::{read_ledger, summarize, Ledger, LedgerLoad};
use ngme::oracle::{verify_bound, OracleConfig};
use ngme::state_spec::StateSpec;
use ngme::suite::{run_verification_suite, SuiteConfig};
use ngme::tensor::DensityOp;
use ngme::witness::{
    build_dicke_family_witness, build_witness, eval_witness, threshold_general, threshold_white_noise, FamilyDescriptor,
};

use crate::error::CliResult;
use crate::render;

pub fn bound(spec: &StateSpec, best: bool) -> CliResult<String> {
    let b = if best { spec.best_bound()? } else { spec.closed_bound()? };
    render::json(&b)
}

pub fn witness(spec: &StateSpec) -> CliResult<String> {
    let w = match spec.descriptor()? {
        Some(FamilyDescriptor::DickeDiagonal { n, d }) => build_dicke_family_witness(n, d)?,
        _ => build_witness(&spec.target()?, &spec.best_bound()?)?,
    };
    render::json(&eval_witness(&w, &spec.density()?)?)
}

pub fn threshold(spec: &StateSpec) -> CliResult<String> {
    let rep = match spec.descriptor()? {
        Some(desc) => threshold_white_noise(&desc)?,
        None => {
            let phi = spec.target()?;
            let noise = DensityOp::maximally_mixed(phi.layout().clone());
            threshold_general(&phi, &noise, &spec.best_bound()?)?
        }
    };
    render::json(&rep)
}

#[derive(Serialize)]
struct Recorded<'a> {
    #[serde(flatten)]
    report: &'a ScenarioReport,
    claim_ref: String,
    recorded: bool,
}

pub fn bell_scenario(sc: Scenario, params: &ScenarioParams, ledger_path: &Path) -> CliResult<String> {
    let report = scenario_eval(sc, params)?;
    let recorded = Ledger::file_backed(ledger_path).submit(report.ledger_record())?;
    render::json(&Recorded {
        report: &report,
        claim_ref: report.claim_ref(),
        recorded,
    })
}

pub fn bell_state(spec: &StateSpec, axis: &str, form: &str, k: Option<usize>, p: f64) -> CliResult<String> {
    let rho = spec.density()?;
    let n = rho.layout().n();
    let cfg = BellConfig::uniform(SiteObservable::pauli(axis)?, n, BellForm::from_slug(form, k)?).with_p(p);
    render::json(&bell_lhs(&rho, &cfg)?)
}

pub fn verify(spec: &StateSpec, cfg: OracleConfig, ledger_path: &Path) -> CliResult<String> {
    let mut ledger = Ledger::file_backed(ledger_path);
    let (record, cert) = verify_bound(&spec.target()?, &spec.closed_bound()?, &spec.claim_ref(), &cfg, &mut ledger)?;
    render::json(&json!({
        "recorded": record.is_discrepancy(),
        "record": record,
        "oracle": {
            "best_overlap": cert.best_overlap,
            "grouping": cert.grouping,
            "restarts": cert.restarts,
            "converged": cert.converged,
            "groupings_scanned": cert.groupings_scanned,
        },
    }))
}

pub fn verify_suite(cfg: OracleConfig, ledger_path: &Path) -> CliResult<String> {
    let mut ledger = Ledger::file_backed(ledger_path);
    let suite = SuiteConfig { oracle: cfg, seed: cfg.seed };
    let report = run_verification_suite(&mut ledger, &suite)?;
    let list = |it: &mut dyn Iterator<Item = &ngme::suite::SuiteEntry>| -> Vec<serde_json::Value> {
        it.map(|e| json!({"claim_ref": e.record.claim_ref, "verdict": e.record.verdict, "delta": e.record.delta}))
            .collect()
    };
    render::json(&json!({
        "checks": report.entries.len(),
        "discrepancies": list(&mut report.discrepancies()),
        "surprises": list(&mut report.surprises()),
    }))
}

pub fn ledger(path: &Path, as_json: bool) -> CliResult<String> {
    let load = if path.exists() { read_ledger(path)? } else { LedgerLoad::default() };
    for (line, err) in &load.skipped {
        eprintln!("ngme: warning: {}:{line}: skipped corrupt record ({err})", path.display());
    }
    let summary = summarize(&load);
    if as_json {
        render::json(&summary)
    } else {
        Ok(summary.render())
    }
}
