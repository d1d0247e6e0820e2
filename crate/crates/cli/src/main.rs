use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod render;
mod sweep;

use error::{CliError, CliResult};
use ngme::bell::{Scenario, ScenarioParams};
use ngme::state_spec::{Family, NoiseJson, StateParams, StateSpec};

#[derive(Parser)]
#[command(name = "ngme", version, about = "Network-GME bounds, witnesses and Bell functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form or best available bound D for a target state.
    Bound {
        #[command(flatten)]
        state: StateArgs,
        /// Use the best certifying bound instead of the family's closed form.
        #[arg(long)]
        best: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluates the fidelity witness on the (noisy) state.
    Witness {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// White-noise threshold for the target.
    Threshold {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bell functional on a named scenario or a state spec.
    Bell {
        #[arg(long, conflicts_with = "spec")]
        scenario: Option<Scenario>,
        /// State spec (path or inline JSON), evaluated with uniform Pauli observables.
        #[arg(long)]
        spec: Option<String>,
        #[command(flatten)]
        params: ScenarioArgs,
        /// Pauli axis for --spec mode.
        #[arg(long, default_value = "z")]
        obs: String,
        /// Form slug for --spec mode: bipartite, biseparable, fully-separable, k-producible, werner.
        #[arg(long, default_value = "biseparable")]
        form: String,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Adjudicates a closed-form bound against the product-overlap oracle.
    Verify {
        #[command(flatten)]
        state: StateArgs,
        /// Run the full verification suite instead of a single target.
        #[arg(long)]
        suite: bool,
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// CSV over a 1-D or 2-D grid of scenario parameters.
    Sweep {
        #[arg(long)]
        scenario: Scenario,
        /// `name=start:stop:count` or `name=v1,v2,...`; repeat for a 2-D grid.
        #[arg(long, required = true)]
        grid: Vec<String>,
        #[arg(long, value_enum, default_value_t = sweep::Quantity::Lhs)]
        quantity: sweep::Quantity,
        #[command(flatten)]
        params: ScenarioArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Summary of the discrepancy ledger.
    Ledger {
        /// Emit the summary as JSON instead of text.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Clone, Default)]
struct StateArgs {
    /// State spec JSON, inline or as a file path.
    #[arg(long, conflicts_with = "family")]
    spec: Option<String>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Option<Vec<f64>>,
    #[arg(long)]
    k: Option<usize>,
    /// Dicke normalization: exact or binomial-normalized.
    #[arg(long)]
    mode: Option<String>,
    /// W variant: tail-weighted or bulk-weighted.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// White-noise visibility.
    #[arg(long, conflicts_with = "weights")]
    v: Option<f64>,
    /// Diagonal Dicke noise weights v_0..v_N.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
}

#[derive(Args, Clone, Default)]
struct ScenarioArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    axis: Option<String>,
    #[arg(long, value_delimiter = ',')]
    amplitudes: Option<Vec<f64>>,
}

#[derive(Args, Clone)]
struct OracleArgs {
    #[arg(long, value_parser = parse_seed, default_value = "0xC0FFEE")]
    seed: u64,
    #[arg(long, default_value_t = ngme::oracle::DEFAULT_RESTARTS)]
    restarts: usize,
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("bad seed {s:?}: {e}"))
}

fn kebab<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> CliResult<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::Usage(format!("unknown {what} {s:?}")))
}

fn read_inline_or_file(text: &str) -> CliResult<String> {
    if text.trim_start().starts_with('{') {
        Ok(text.to_string())
    } else {
        std::fs::read_to_string(text).map_err(|e| CliError::Io(format!("{text}: {e}")))
    }
}

impl StateArgs {
    fn resolve(&self) -> CliResult<StateSpec> {
        let spec = match (&self.spec, self.family) {
            (Some(text), _) => {
                let json = read_inline_or_file(text)?;
                let spec: StateSpec = serde_json::from_str(&json).map_err(|e| CliError::Usage(format!("state spec: {e}")))?;
                if self.has_inline_params() {
                    return Err(CliError::Usage("--spec cannot be combined with state flags".into()));
                }
                spec
            }
            (None, Some(family)) => self.flag_spec(family)?,
            (None, None) => return Err(CliError::Usage("give --spec or --family".into())),
        };
        spec.check()?;
        Ok(spec)
    }

    fn has_inline_params(&self) -> bool {
        let Self { spec: _, family, n, d, a, k, mode, variant, r, alphas, beta, lambdas, phi, theta, v, weights } = self;
        family.is_some()
            || n.is_some()
            || d.is_some()
            || a.is_some()
            || k.is_some()
            || mode.is_some()
            || variant.is_some()
            || r.is_some()
            || alphas.is_some()
            || beta.is_some()
            || lambdas.is_some()
            || phi.is_some()
            || theta.is_some()
            || v.is_some()
            || weights.is_some()
    }

    fn flag_spec(&self, family: Family) -> CliResult<StateSpec> {
        let pair = |name: &str, xs: &Option<Vec<f64>>, len: usize| -> CliResult<Option<Vec<f64>>> {
            match xs {
                Some(x) if x.len() != len => Err(CliError::Usage(format!("--{name} takes {len} values"))),
                other => Ok(other.clone()),
            }
        };
        let beta = pair("beta", &self.beta, 2)?.map(|b| [b[0], b[1]]);
        let lambdas = pair("lambdas", &self.lambdas, 5)?.map(|l| [l[0], l[1], l[2], l[3], l[4]]);
        let params = StateParams {
            a: self.a.clone(),
            k: self.k,
            mode: self.mode.as_deref().map(|m| kebab("Dicke mode", m)).transpose()?,
            variant: self.variant.as_deref().map(|m| kebab("W variant", m)).transpose()?,
            r: self.r,
            alphas: self.alphas.clone(),
            beta,
            lambdas,
            phi: self.phi,
            theta: self.theta,
        };
        let noise = match (self.v, &self.weights) {
            (Some(v), _) => Some(NoiseJson::White { v }),
            (None, Some(w)) => Some(NoiseJson::DickeDiagonal { weights: w.clone() }),
            (None, None) => None,
        };
        Ok(StateSpec {
            family,
            n: self.n,
            d: self.d,
            params,
            noise,
        })
    }
}

impl ScenarioArgs {
    fn to_params(&self) -> CliResult<ScenarioParams> {
        Ok(ScenarioParams {
            n: self.n,
            k: self.k,
            theta: self.theta,
            phi: self.phi,
            v: self.v,
            r: self.r,
            variant: self.variant.as_deref().map(|m| kebab("W variant", m)).transpose()?,
            axis: self.axis.clone(),
            amplitudes: self.amplitudes.clone(),
        })
    }
}

fn ledger_path() -> PathBuf {
    std::env::var_os("NGME_LEDGER")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("ngme-ledger.jsonl"))
}

fn emit(out: &OutputArgs, text: &str) -> CliResult<()> {
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let ledger = ledger_path();
    match cli.command {
        Command::Bound { state, best, out } => {
            let spec = state.resolve()?;
            emit(&out, &commands::bound(&spec, best)?)
        }
        Command::Witness { state, out } => emit(&out, &commands::witness(&state.resolve()?)?),
        Command::Threshold { state, out } => emit(&out, &commands::threshold(&state.resolve()?)?),
        Command::Bell {
            scenario,
            spec,
            params,
            obs,
            form,
            p,
            out,
        } => {
            let text = match (scenario, spec) {
                (Some(sc), _) => commands::bell_scenario(sc, &params.to_params()?, &ledger)?,
                (None, Some(text)) => {
                    let spec = StateSpec::from_json(&read_inline_or_file(&text)?)?;
                    commands::bell_state(&spec, &obs, &form, params.k, p)?
                }
                (None, None) => return Err(CliError::Usage("give --scenario or --spec".into())),
            };
            emit(&out, &text)
        }
        Command::Verify { state, suite, oracle, out } => {
            let cfg = ngme::oracle::OracleConfig::with_restarts(oracle.restarts, oracle.seed);
            let text = if suite {
                if state.spec.is_some() || state.has_inline_params() {
                    return Err(CliError::Usage("--suite takes no state".into()));
                }
                commands::verify_suite(cfg, &ledger)?
            } else {
                commands::verify(&state.resolve()?, cfg, &ledger)?
            };
            emit(&out, &text)
        }
        Command::Sweep {
            scenario,
            grid,
            quantity,
            params,
            output,
        } => {
            let csv = sweep::run(scenario, &grid, quantity, &params.to_params()?)?;
            emit(&OutputArgs { output }, &csv)
        }
        Command::Ledger { json, out } => {
            let text = commands::ledger(&ledger, json)?;
            emit(&out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ngme: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
