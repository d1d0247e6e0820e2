//! JSON state descriptions: `{family, n, d, params, noise}`.
//!
//! | family | n, d | params |
//! |---|---|---|
//! | `ghz` | any, any | `a` (d amplitudes, balanced when absent) |
//! | `dicke` | any, any | `k`, optional `mode` |
//! | `w` | any, 2 | optional `variant`, `r` (default 1) |
//! | `w-amplitudes` | len(`alphas`), 2 | `alphas` |
//! | `sym-superposition` | any, any | `alphas`, `beta` (pair, default [1, 0]) |
//! | `three-qubit` | 3, 2 | `lambdas` (5), optional `phi` |
//! | `max-slice` | any, 2 | `theta` |
//! | `cluster5` | 5, 2 | `a` (pair) |
//! | `chain` | 3, (2,4,2) | none |
//!
//! Amplitude vectors are rescaled to unit norm before use. `noise` is either
//! `{kind: "white", v}` or `{kind: "dicke-diagonal", weights}`; without it the
//! state is pure.

use serde::{Deserialize, Serialize};

use crate::bounds::{bound_dicke_closed, bound_gamma3, bound_ghz, bound_schmidt_exact, bound_sym_upper, BoundResult};
use crate::error::{Error, Result};
use crate::states::{
    make_chain_network_state, make_cluster5, make_dicke, make_ghz, make_maximal_slice, make_sym_superposition,
    make_three_qubit_canonical, make_w_amplitudes, make_w_family, DickeMode, NoiseSpec, WVariant,
};
use crate::tensor::{DensityOp, PureState};
use crate::witness::{best_bound, FamilyDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Ghz,
    Dicke,
    W,
    WAmplitudes,
    SymSuperposition,
    ThreeQubit,
    MaxSlice,
    Cluster5,
    Chain,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Ghz,
        Family::Dicke,
        Family::W,
        Family::WAmplitudes,
        Family::SymSuperposition,
        Family::ThreeQubit,
        Family::MaxSlice,
        Family::Cluster5,
        Family::Chain,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            Family::Ghz => "ghz",
            Family::Dicke => "dicke",
            Family::W => "w",
            Family::WAmplitudes => "w-amplitudes",
            Family::SymSuperposition => "sym-superposition",
            Family::ThreeQubit => "three-qubit",
            Family::MaxSlice => "max-slice",
            Family::Cluster5 => "cluster5",
            Family::Chain => "chain",
        }
    }

    fn allowed_params(&self) -> &'static [&'static str] {
        match self {
            Family::Ghz => &["a"],
            Family::Dicke => &["k", "mode"],
            Family::W => &["variant", "r"],
            Family::WAmplitudes => &["alphas"],
            Family::SymSuperposition => &["alphas", "beta"],
            Family::ThreeQubit => &["lambdas", "phi"],
            Family::MaxSlice => &["theta"],
            Family::Cluster5 => &["a"],
            Family::Chain => &[],
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.slug() == s)
            .ok_or_else(|| Error::Argument(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<DickeMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<WVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<[f64; 5]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl StateParams {
    fn present(&self) -> Vec<&'static str> {
        let flags = [
            ("a", self.a.is_some()),
            ("k", self.k.is_some()),
            ("mode", self.mode.is_some()),
            ("variant", self.variant.is_some()),
            ("r", self.r.is_some()),
            ("alphas", self.alphas.is_some()),
            ("beta", self.beta.is_some()),
            ("lambdas", self.lambdas.is_some()),
            ("phi", self.phi.is_some()),
            ("theta", self.theta.is_some()),
        ];
        flags.into_iter().filter(|(_, on)| *on).map(|(name, _)| name).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseJson {
    White { v: f64 },
    DickeDiagonal { weights: Vec<f64> },
}

impl NoiseJson {
    pub fn to_noise(&self) -> NoiseSpec {
        match self {
            NoiseJson::White { v } => NoiseSpec::White { v: *v },
            NoiseJson::DickeDiagonal { weights } => NoiseSpec::DiagonalDicke { weights: weights.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default)]
    pub params: StateParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseJson>,
}

fn unit(name: &str, xs: &[f64]) -> Result<Vec<f64>> {
    let norm = xs.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Argument(format!("{name} must be finite and not all zero")));
    }
    Ok(xs.iter().map(|x| x / norm).collect())
}

fn need<T: Clone>(name: &str, family: Family, v: &Option<T>) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::Argument(format!("family {family} needs params.{name}")))
}

impl StateSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: StateSpec = serde_json::from_str(text)?;
        spec.check()?;
        Ok(spec)
    }

    /// Rejects params that the family does not use and mismatched n or d.
    pub fn check(&self) -> Result<()> {
        let allowed = self.family.allowed_params();
        if let Some(bad) = self.params.present().into_iter().find(|p| !allowed.contains(p)) {
            return Err(Error::Argument(format!("family {} does not take params.{bad}", self.family)));
        }
        let fixed_n = match self.family {
            Family::ThreeQubit | Family::Chain => Some(3),
            Family::Cluster5 => Some(5),
            Family::WAmplitudes => self.params.alphas.as_ref().map(Vec::len),
            _ => None,
        };
        if let (Some(want), Some(got)) = (fixed_n, self.n) {
            if want != got {
                return Err(Error::Argument(format!("family {} has n = {want}, got {got}", self.family)));
            }
        }
        let qubit_only = matches!(
            self.family,
            Family::W | Family::WAmplitudes | Family::ThreeQubit | Family::MaxSlice | Family::Cluster5
        );
        match self.d {
            Some(d) if qubit_only && d != 2 => {
                Err(Error::Argument(format!("family {} is qubit-only, got d = {d}", self.family)))
            }
            Some(_) if self.family == Family::Chain => Err(Error::Argument("family chain has fixed dimensions".into())),
            _ => Ok(()),
        }
    }

    fn n(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::Argument(format!("family {} needs n", self.family)))
    }

    fn d(&self) -> usize {
        self.d.unwrap_or(2)
    }

    fn ghz_amplitudes(&self) -> Result<Vec<f64>> {
        let d = self.d();
        match &self.params.a {
            Some(a) => unit("params.a", a),
            None => Ok(vec![1.0 / (d as f64).sqrt(); d]),
        }
    }

    pub fn target(&self) -> Result<PureState> {
        self.check()?;
        let p = &self.params;
        let f = self.family;
        match f {
            Family::Ghz => make_ghz(self.n()?, self.d(), &self.ghz_amplitudes()?),
            Family::Dicke => Ok(make_dicke(self.n()?, self.d(), need("k", f, &p.k)?, p.mode.unwrap_or_default())?.state),
            Family::W => make_w_family(self.n()?, p.variant.unwrap_or(WVariant::TailWeighted), p.r.unwrap_or(1.0)),
            Family::WAmplitudes => make_w_amplitudes(&need("alphas", f, &p.alphas)?),
            Family::SymSuperposition => {
                let alphas = unit("params.alphas", &need("alphas", f, &p.alphas)?)?;
                let beta = unit("params.beta", &p.beta.unwrap_or([1.0, 0.0]))?;
                make_sym_superposition(self.n()?, self.d(), &alphas, beta[0], beta[1])
            }
            Family::ThreeQubit => {
                let l = unit("params.lambdas", &need("lambdas", f, &p.lambdas)?)?;
                make_three_qubit_canonical([l[0], l[1], l[2], l[3], l[4]], p.phi.unwrap_or(0.0))
            }
            Family::MaxSlice => make_maximal_slice(self.n()?, need("theta", f, &p.theta)?),
            Family::Cluster5 => {
                let ab = unit("params.a", &need("a", f, &p.a)?)?;
                if ab.len() != 2 {
                    return Err(Error::Argument("cluster5 takes an amplitude pair".into()));
                }
                make_cluster5(ab[0], ab[1])
            }
            Family::Chain => make_chain_network_state(),
        }
    }

    /// The noisy state, or the pure target when no noise is given.
    pub fn density(&self) -> Result<DensityOp> {
        let phi = self.target()?;
        match &self.noise {
            None => Ok(phi.to_density()),
            Some(noise) => {
                let noise = noise.to_noise();
                noise.validate()?;
                noise.apply(&phi)
            }
        }
    }

    pub fn descriptor(&self) -> Result<Option<FamilyDescriptor>> {
        Ok(match self.family {
            Family::Ghz => Some(FamilyDescriptor::Ghz {
                n: self.n()?,
                d: self.d(),
                a: self.ghz_amplitudes()?,
            }),
            Family::Dicke => match (&self.noise, self.params.k) {
                (Some(NoiseJson::DickeDiagonal { .. }), _) => Some(FamilyDescriptor::DickeDiagonal {
                    n: self.n()?,
                    d: self.d(),
                }),
                (_, Some(k)) => Some(FamilyDescriptor::Dicke {
                    n: self.n()?,
                    d: self.d(),
                    k,
                }),
                (_, None) => None,
            },
            _ => None,
        })
    }

    /// The family's own closed form where one exists, else the best available bound.
    pub fn closed_bound(&self) -> Result<BoundResult> {
        let phi = self.target()?;
        let p = &self.params;
        match self.family {
            Family::Ghz => bound_ghz(&self.ghz_amplitudes()?),
            Family::Dicke => bound_dicke_closed(self.n()?, need("k", self.family, &p.k)?, self.d()),
            Family::SymSuperposition => {
                let alphas = unit("params.alphas", &need("alphas", self.family, &p.alphas)?)?;
                let beta = unit("params.beta", &p.beta.unwrap_or([1.0, 0.0]))?;
                bound_sym_upper(&alphas, beta[0], beta[1], self.n()?, self.d())
            }
            Family::ThreeQubit => {
                let l = unit("params.lambdas", &need("lambdas", self.family, &p.lambdas)?)?;
                bound_gamma3([l[0], l[1], l[2], l[3], l[4]], p.phi.unwrap_or(0.0))
            }
            _ => best_bound(&phi, None),
        }
    }

    /// Certifying bound: exact where available, Schmidt-based otherwise.
    pub fn best_bound(&self) -> Result<BoundResult> {
        let phi = self.target()?;
        match self.descriptor()? {
            Some(desc @ (FamilyDescriptor::Ghz { .. } | FamilyDescriptor::Dicke { .. })) => best_bound(&phi, Some(&desc)),
            _ if phi.layout().is_all_qubits() => bound_schmidt_exact(&phi),
            _ => best_bound(&phi, None),
        }
    }

    /// Ledger key for bound adjudication of this target.
    pub fn claim_ref(&self) -> String {
        let n = self.n.map(|n| format!("n={n}")).unwrap_or_default();
        match self.family {
            Family::Dicke => format!(
                "bound/dicke/{n},k={},d={}",
                self.params.k.unwrap_or(0),
                self.d()
            ),
            Family::Ghz => format!("bound/ghz/{n}"),
            Family::SymSuperposition => "bound/sym-upper".to_string(),
            Family::ThreeQubit => "bound/gamma3".to_string(),
            f if n.is_empty() => format!("bound/{f}"),
            f => format!("bound/{f}/{n}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_amplitudes_are_rescaled() {
        let s = StateSpec::from_json(r#"{"family":"ghz","n":3,"d":2,"params":{"a":[0.707,0.707]}}"#).unwrap();
        assert_eq!(s.closed_bound().unwrap().value, 0.5);
        assert!((s.target().unwrap().amps().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(StateSpec::from_json(r#"{"family":"ghz","n":3,"extra":1}"#).is_err());
        assert!(StateSpec::from_json(r#"{"family":"ghz","n":3,"params":{"q":1}}"#).is_err());
        assert!(StateSpec::from_json(r#"{"family":"ghz","n":3,"params":{"k":1}}"#).is_err());
        assert!(StateSpec::from_json(r#"{"family":"ghz","n":3,"noise":{"kind":"white","v":0.5,"x":1}}"#).is_err());
        assert!(StateSpec::from_json(r#"{"family":"cluster5","n":4,"params":{"a":[1,1]}}"#).is_err());
        assert!(StateSpec::from_json(r#"{"family":"w","n":3,"d":3}"#).is_err());
    }

    #[test]
    fn every_family_builds() {
        let specs = [
            r#"{"family":"ghz","n":3,"d":3}"#,
            r#"{"family":"dicke","n":4,"d":2,"params":{"k":2}}"#,
            r#"{"family":"w","n":4,"params":{"variant":"bulk-weighted","r":0.5}}"#,
            r#"{"family":"w-amplitudes","params":{"alphas":[1,2,3]}}"#,
            r#"{"family":"sym-superposition","n":3,"d":2,"params":{"alphas":[1,1,0]}}"#,
            r#"{"family":"three-qubit","params":{"lambdas":[1,0,0,0,1],"phi":0.3}}"#,
            r#"{"family":"max-slice","n":3,"params":{"theta":0.5}}"#,
            r#"{"family":"cluster5","params":{"a":[0.6,0.8]}}"#,
            r#"{"family":"chain"}"#,
        ];
        for text in specs {
            let s = StateSpec::from_json(text).unwrap();
            let b = s.best_bound().unwrap();
            assert!(b.value > 0.0 && b.value < 1.0, "{text}: {}", b.value);
            assert!(s.closed_bound().is_ok(), "{text}");
        }
    }

    #[test]
    fn noisy_density_and_descriptor() {
        let s = StateSpec::from_json(r#"{"family":"dicke","n":3,"d":2,"params":{"k":1},"noise":{"kind":"white","v":0.5}}"#)
            .unwrap();
        assert!((s.density().unwrap().purity() - 1.0).abs() > 0.1);
        assert_eq!(s.descriptor().unwrap(), Some(FamilyDescriptor::Dicke { n: 3, d: 2, k: 1 }));
        assert_eq!(s.claim_ref(), "bound/dicke/n=3,k=1,d=2");
        let round: StateSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(round, s);
    }
}
