//! Parameter sweeps over scenarios, written as CSV in grid order.

use clap::ValueEnum;
use rayon::prelude::*;

use ngme::bell::{
    critical_noise, scenario_eval, werner_ghz_printed_lhs, werner_w3_printed_lhs, BellConfig, BellForm, Scenario,
    ScenarioParams, SiteObservable,
};
use ngme::states::{make_balanced_ghz, make_w_family, WVariant};
use ngme::witness::bisect;

use crate::error::{CliError, CliResult};
use crate::render::float;

pub const MAX_POINTS: usize = 100_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Quantity {
    /// Bell lhs of the scenario: pipeline against the printed expression.
    Lhs,
    /// Critical white-noise visibility v* (werner-ghz, werner-w).
    CriticalNoise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

const INT_PARAMS: [&str; 2] = ["n", "k"];
const REAL_PARAMS: [&str; 4] = ["theta", "phi", "v", "r"];

pub fn parse_axis(text: &str) -> CliResult<Axis> {
    let (name, range) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("grid {text:?} is not name=range")))?;
    if !INT_PARAMS.contains(&name) && !REAL_PARAMS.contains(&name) {
        return Err(CliError::Usage(format!("cannot sweep {name:?}")));
    }
    let num = |s: &str| -> CliResult<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad number {s:?} in grid {text:?}")))
    };
    let values = match range.split(':').collect::<Vec<_>>()[..] {
        [start, stop, count] => {
            let (start, stop) = (num(start)?, num(stop)?);
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad point count in grid {text:?}")))?;
            if count > MAX_POINTS {
                return Err(CliError::Capacity(format!("{count} points on axis {name}, cap is {MAX_POINTS}")));
            }
            match count {
                0 => vec![],
                1 => vec![start],
                _ => (0..count)
                    .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                    .collect(),
            }
        }
        [list] if list.trim().is_empty() => vec![],
        [list] => list.split(',').map(num).collect::<CliResult<_>>()?,
        _ => return Err(CliError::Usage(format!("grid {text:?} is not start:stop:count or a list"))),
    };
    if INT_PARAMS.contains(&name) && values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
        return Err(CliError::Usage(format!("axis {name} takes non-negative integers")));
    }
    Ok(Axis {
        name: name.to_string(),
        values,
    })
}

fn set(params: &mut ScenarioParams, name: &str, x: f64) {
    match name {
        "n" => params.n = Some(x as usize),
        "k" => params.k = Some(x as usize),
        "theta" => params.theta = Some(x),
        "phi" => params.phi = Some(x),
        "v" => params.v = Some(x),
        "r" => params.r = Some(x),
        _ => unreachable!("axis names are checked at parse time"),
    }
}

struct Row {
    values: Vec<String>,
    status: String,
}

fn lhs_row(sc: Scenario, p: &ScenarioParams) -> ngme::Result<Vec<String>> {
    let rep = scenario_eval(sc, p)?;
    Ok(vec![
        float(rep.pipeline),
        float(rep.printed),
        float(rep.difference),
        float(rep.closed.unwrap_or(f64::NAN)),
        float(rep.report.classical_bound),
        u8::from(rep.report.violated).to_string(),
        rep.report.min_depth.map(|d| d.to_string()).unwrap_or_default(),
    ])
}

fn critical_row(sc: Scenario, p: &ScenarioParams) -> ngme::Result<Vec<String>> {
    let (phi, obs, printed): (_, _, Box<dyn Fn(f64) -> ngme::Result<f64>>) = match sc {
        Scenario::WernerGhz => {
            let n = p.n.unwrap_or(3);
            (make_balanced_ghz(n, 2)?, SiteObservable::sigma_z(), Box::new(move |v| werner_ghz_printed_lhs(n, v)))
        }
        Scenario::WernerW => {
            if p.n.is_some_and(|n| n != 3) {
                return Err(ngme::Error::Argument("werner-w has n = 3".into()));
            }
            (
                make_w_family(3, WVariant::TailWeighted, 1.0)?,
                SiteObservable::sigma_x(),
                Box::new(werner_w3_printed_lhs),
            )
        }
        other => return Err(ngme::Error::Argument(format!("critical-noise sweeps need werner-ghz or werner-w, got {other}"))),
    };
    let n = phi.layout().n();
    let k = p.k.unwrap_or(if sc == Scenario::WernerW { 2 } else { n - 1 });
    let pipeline = critical_noise(&phi, &BellConfig::uniform(obs.clone(), n, BellForm::KProducible { k }), k, (0.0, 1.0))?;
    let closed = critical_noise(&phi, &BellConfig::uniform(obs, n, BellForm::Werner { k }), k, (0.0, 1.0))?;
    let bound = k as f64 - 1.0;
    let printed_root = match bisect(|v| Ok(printed(v)? - bound), 0.0, 1.0, 1e-13) {
        Ok(v) => v,
        Err(ngme::Error::Bracket(_)) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(vec![
        float(pipeline.v_star),
        float(printed_root),
        float((pipeline.v_star - printed_root).abs()),
        float(closed.v_star),
        u8::from(pipeline.monotone).to_string(),
    ])
}

fn header(axes: &[Axis], quantity: Quantity) -> Vec<String> {
    let tail: &[&str] = match quantity {
        Quantity::Lhs => &["pipeline", "printed", "difference", "closed", "classical_bound", "violated", "min_depth"],
        Quantity::CriticalNoise => &["pipeline", "printed", "difference", "closed", "monotone"],
    };
    axes.iter()
        .map(|a| a.name.clone())
        .chain(tail.iter().map(|s| s.to_string()))
        .chain(["status".to_string()])
        .collect()
}

fn tail_width(quantity: Quantity) -> usize {
    match quantity {
        Quantity::Lhs => 7,
        Quantity::CriticalNoise => 5,
    }
}

pub fn run(sc: Scenario, grid: &[String], quantity: Quantity, base: &ScenarioParams) -> CliResult<String> {
    if grid.is_empty() || grid.len() > 2 {
        return Err(CliError::Usage("a sweep takes one or two --grid axes".into()));
    }
    let axes: Vec<Axis> = grid.iter().map(|g| parse_axis(g)).collect::<CliResult<_>>()?;
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(CliError::Usage(format!("axis {} given twice", axes[0].name)));
    }
    let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()));
    let total = match total {
        Some(t) if t <= MAX_POINTS => t,
        _ => return Err(CliError::Capacity(format!("grid has more than {MAX_POINTS} points"))),
    };
    let inner = axes.get(1).map_or(1, |a| a.values.len());
    let rows: Vec<Row> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let point: Vec<(&Axis, f64)> = match axes.len() {
                1 => vec![(&axes[0], axes[0].values[idx])],
                _ => vec![(&axes[0], axes[0].values[idx / inner]), (&axes[1], axes[1].values[idx % inner])],
            };
            let mut p = base.clone();
            for (axis, x) in &point {
                set(&mut p, &axis.name, *x);
            }
            let mut values: Vec<String> = point
                .iter()
                .map(|(axis, x)| if INT_PARAMS.contains(&axis.name.as_str()) { (*x as usize).to_string() } else { float(*x) })
                .collect();
            let result = match quantity {
                Quantity::Lhs => lhs_row(sc, &p),
                Quantity::CriticalNoise => critical_row(sc, &p),
            };
            let status = match result {
                Ok(cols) => {
                    values.extend(cols);
                    "ok".to_string()
                }
                Err(e) => {
                    values.extend(std::iter::repeat_n(String::new(), tail_width(quantity)));
                    e.to_string()
                }
            };
            Row { values, status }
        })
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(&axes, quantity))?;
    for row in rows {
        w.write_record(row.values.iter().chain([&row.status]))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}
