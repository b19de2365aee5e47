//! JSON experiment configuration: declarations, pipeline, queries, checks.
//!
//! Spaces appear inline as lists of labels or `{"factors": [...]}`; a
//! state is `{"space": [...], "weights": [...]}` (weights are normalized
//! on load); an observable is `{"outcome_space": [...], "info_space":
//! [...], "kernel": [[row per outcome]...]}` with columns indexed by
//! information point. Complex matrices are row-major `[[ [re, im], ...],
//! ...]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::harness::report::Declaration;
use crate::instrument::ExtendedObservable;
use crate::mean_state::EmbeddedSpace;
use crate::observable::GeneralizedObservable;
use crate::quantum::{CMatrix, DensityMatrix, KrausInstrument, Povm};
use crate::space::FiniteSpace;
use crate::{Error, FiniteMeasure, InformationState, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceDef {
    Labels(Vec<String>),
    Product { factors: Vec<SpaceDef> },
}

impl SpaceDef {
    pub fn build(&self) -> Result<FiniteSpace> {
        match self {
            SpaceDef::Labels(labels) => FiniteSpace::new(labels.clone()),
            SpaceDef::Product { factors } => {
                if factors.len() < 2 {
                    return Err(Error::Validation(
                        "a product space needs at least two factors".into(),
                    ));
                }
                let built: Vec<FiniteSpace> =
                    factors.iter().map(SpaceDef::build).collect::<Result<_>>()?;
                let mut product = built[0].clone();
                for factor in &built[1..] {
                    product = FiniteSpace::product(&product, factor)?;
                }
                Ok(product)
            }
        }
    }
}

pub type ComplexMatrixDef = Vec<Vec<[f64; 2]>>;

pub fn build_matrix(def: &ComplexMatrixDef) -> Result<CMatrix> {
    let rows = def
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    CMatrix::from_rows(rows)
}

pub fn matrix_def(m: &CMatrix) -> ComplexMatrixDef {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| {
                    let z = m.get(r, c);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedSpaceDef {
    pub name: String,
    pub space: SpaceDef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDef {
    pub name: String,
    pub space: SpaceDef,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableDef {
    pub name: String,
    pub outcome_space: SpaceDef,
    pub info_space: SpaceDef,
    pub kernel: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtendedDef {
    pub name: String,
    pub outcome_space: SpaceDef,
    pub out_info_space: SpaceDef,
    pub in_info_space: SpaceDef,
    pub kernel: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddedDef {
    pub name: String,
    pub space: SpaceDef,
    pub payloads: Vec<Vec<f64>>,
    pub functional: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmDef {
    pub name: String,
    pub outcomes: Vec<String>,
    pub effects: Vec<ComplexMatrixDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausDef {
    pub name: String,
    pub outcomes: Vec<String>,
    pub kraus: Vec<Vec<ComplexMatrixDef>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityDef {
    pub name: String,
    pub matrix: ComplexMatrixDef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum StepDef {
    SetState {
        state: String,
    },
    ApplyObservable {
        observable: String,
    },
    ApplyInstrument {
        extended: String,
    },
    Condition {
        event: Vec<String>,
    },
    Compose {
        first: String,
        second: String,
        #[serde(rename = "as")]
        name: String,
    },
    Sample {
        #[serde(default)]
        trials: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        sigma_bound: Option<f64>,
    },
    SampleConsecutive {
        first: String,
        second: String,
        #[serde(default)]
        trials: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        sigma_bound: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "query", rename_all = "snake_case")]
pub enum QueryDef {
    Distribution {
        observable: String,
        state: String,
    },
    Value {
        observable: String,
        event: Vec<String>,
    },
    Posterior {
        extended: String,
        state: String,
        event: Vec<String>,
    },
    Mean {
        embedded: String,
        state: String,
    },
    PosteriorMean {
        extended: String,
        embedded_out: String,
        state: String,
        event: Vec<String>,
    },
    Born {
        povm: String,
        state: String,
        #[serde(default)]
        event: Option<Vec<String>>,
    },
    StateUpdate {
        instrument: String,
        state: String,
        event: Vec<String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckDef {
    Affinity {
        observable: String,
        #[serde(default)]
        samples: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
    },
    IsTrivial {
        observable: String,
        expect: bool,
    },
    IsImage {
        observable: String,
        expect: bool,
    },
    NonPerturbing {
        extended: String,
        expect: bool,
    },
    InstrumentNormalization {
        extended: String,
        #[serde(default)]
        samples: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
    },
    ChoiPsd {
        instrument: String,
    },
}

/// Top-level config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub sigma_bound: Option<f64>,
    pub spaces: Vec<NamedSpaceDef>,
    pub states: Vec<StateDef>,
    pub observables: Vec<ObservableDef>,
    pub extended_observables: Vec<ExtendedDef>,
    pub embedded_spaces: Vec<EmbeddedDef>,
    pub povms: Vec<PovmDef>,
    pub kraus_instruments: Vec<KrausDef>,
    pub density_matrices: Vec<DensityDef>,
    pub pipeline: Vec<StepDef>,
    pub queries: Vec<QueryDef>,
    pub checks: Vec<CheckDef>,
}

impl ConfigFile {
    pub fn parse(source: &str) -> Result<Self> {
        serde_json::from_str(source).map_err(|e| Error::ConfigParse(e.to_string()))
    }
}

/// All declared objects, validated, in declaration order.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub states: Vec<(String, InformationState)>,
    pub observables: Vec<(String, GeneralizedObservable)>,
    pub extended: Vec<(String, ExtendedObservable)>,
    pub embedded: Vec<(String, EmbeddedSpace)>,
    pub povms: Vec<(String, Povm)>,
    pub instruments: Vec<(String, KrausInstrument)>,
    pub densities: Vec<(String, DensityMatrix)>,
    pub declarations: Vec<Declaration>,
}

fn named<'a, T>(items: &'a [(String, T)], name: &str, kind: &str) -> Result<&'a T> {
    items
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::Validation(format!("unknown {kind} `{name}`")))
}

fn check_fresh(taken: &mut Vec<String>, name: &str, kind: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::Validation(format!("{kind} with an empty name")));
    }
    if taken.iter().any(|t| t == name) {
        return Err(Error::Validation(format!(
            "duplicate declaration name `{name}`"
        )));
    }
    taken.push(name.to_string());
    Ok(())
}

impl Model {
    pub fn build(config: &ConfigFile) -> Result<Self> {
        let mut model = Model::default();
        let mut taken = Vec::new();
        let fail = |kind: &str, name: &str, e: Error| match e {
            Error::Validation(_) | Error::ConfigParse(_) => e,
            other => Error::Validation(format!("{kind} `{name}`: {other}")),
        };

        for def in &config.spaces {
            check_fresh(&mut taken, &def.name, "space")?;
            let space = def.space.build().map_err(|e| fail("space", &def.name, e))?;
            model.declarations.push(Declaration {
                kind: "space".into(),
                name: def.name.clone(),
                summary: format!("{} points", space.size()),
            });
        }
        for def in &config.states {
            check_fresh(&mut taken, &def.name, "state")?;
            let space = def.space.build().map_err(|e| fail("state", &def.name, e))?;
            let state = FiniteMeasure::new(space, def.weights.clone())
                .and_then(|m| m.normalize())
                .map_err(|e| fail("state", &def.name, e))?;
            model.declarations.push(Declaration {
                kind: "state".into(),
                name: def.name.clone(),
                summary: format!("{} points on {}", state.space().size(), state.space()),
            });
            model.states.push((def.name.clone(), state));
        }
        for def in &config.observables {
            check_fresh(&mut taken, &def.name, "observable")?;
            let outcome = def
                .outcome_space
                .build()
                .map_err(|e| fail("observable", &def.name, e))?;
            let info = def
                .info_space
                .build()
                .map_err(|e| fail("observable", &def.name, e))?;
            let obs = GeneralizedObservable::new(outcome, info, def.kernel.clone())
                .map_err(|e| fail("observable", &def.name, e))?;
            model.declarations.push(Declaration {
                kind: "observable".into(),
                name: def.name.clone(),
                summary: format!(
                    "{} outcomes x {} points",
                    obs.outcome_space().size(),
                    obs.info_space().size()
                ),
            });
            model.observables.push((def.name.clone(), obs));
        }
        for def in &config.extended_observables {
            check_fresh(&mut taken, &def.name, "extended observable")?;
            let outcome = def
                .outcome_space
                .build()
                .map_err(|e| fail("extended observable", &def.name, e))?;
            let out_info = def
                .out_info_space
                .build()
                .map_err(|e| fail("extended observable", &def.name, e))?;
            let in_info = def
                .in_info_space
                .build()
                .map_err(|e| fail("extended observable", &def.name, e))?;
            let y = ExtendedObservable::new(outcome, out_info, in_info, def.kernel.clone())
                .map_err(|e| fail("extended observable", &def.name, e))?;
            model.declarations.push(Declaration {
                kind: "extended".into(),
                name: def.name.clone(),
                summary: format!(
                    "{} x {} x {}",
                    y.outcome_space().size(),
                    y.out_info_space().size(),
                    y.in_info_space().size()
                ),
            });
            model.extended.push((def.name.clone(), y));
        }
        for def in &config.embedded_spaces {
            check_fresh(&mut taken, &def.name, "embedded space")?;
            let space = def
                .space
                .build()
                .map_err(|e| fail("embedded space", &def.name, e))?;
            let embedded = EmbeddedSpace::new(
                space,
                def.payloads.clone(),
                def.functional.clone(),
                def.bound,
            )
            .map_err(|e| fail("embedded space", &def.name, e))?;
            model.declarations.push(Declaration {
                kind: "embedded".into(),
                name: def.name.clone(),
                summary: format!(
                    "{} points, payload dimension {}",
                    embedded.base().size(),
                    embedded.dim()
                ),
            });
            model.embedded.push((def.name.clone(), embedded));
        }
        for def in &config.povms {
            check_fresh(&mut taken, &def.name, "povm")?;
            let space =
                FiniteSpace::new(def.outcomes.clone()).map_err(|e| fail("povm", &def.name, e))?;
            let effects = def
                .effects
                .iter()
                .map(build_matrix)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| fail("povm", &def.name, e))?;
            let povm = Povm::new(space, effects).map_err(|e| fail("povm", &def.name, e))?;
            model.declarations.push(Declaration {
                kind: "povm".into(),
                name: def.name.clone(),
                summary: format!(
                    "{} effects, dimension {}",
                    povm.outcome_space().size(),
                    povm.dim()
                ),
            });
            model.povms.push((def.name.clone(), povm));
        }
        for def in &config.kraus_instruments {
            check_fresh(&mut taken, &def.name, "instrument")?;
            let space = FiniteSpace::new(def.outcomes.clone())
                .map_err(|e| fail("instrument", &def.name, e))?;
            let kraus = def
                .kraus
                .iter()
                .map(|ops| ops.iter().map(build_matrix).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
                .map_err(|e| fail("instrument", &def.name, e))?;
            let instrument =
                KrausInstrument::new(space, kraus).map_err(|e| fail("instrument", &def.name, e))?;
            model.declarations.push(Declaration {
                kind: "instrument".into(),
                name: def.name.clone(),
                summary: format!(
                    "{} outcomes, {} -> {}",
                    instrument.outcome_space().size(),
                    instrument.d_in(),
                    instrument.d_out()
                ),
            });
            model.instruments.push((def.name.clone(), instrument));
        }
        for def in &config.density_matrices {
            check_fresh(&mut taken, &def.name, "density matrix")?;
            let matrix =
                build_matrix(&def.matrix).map_err(|e| fail("density matrix", &def.name, e))?;
            let rho =
                DensityMatrix::new(matrix).map_err(|e| fail("density matrix", &def.name, e))?;
            model.declarations.push(Declaration {
                kind: "density".into(),
                name: def.name.clone(),
                summary: format!("dimension {}", rho.dim()),
            });
            model.densities.push((def.name.clone(), rho));
        }
        Ok(model)
    }

    pub fn state(&self, name: &str) -> Result<&InformationState> {
        named(&self.states, name, "state")
    }

    pub fn observable(&self, name: &str) -> Result<&GeneralizedObservable> {
        named(&self.observables, name, "observable")
    }

    pub fn extended(&self, name: &str) -> Result<&ExtendedObservable> {
        named(&self.extended, name, "extended observable")
    }

    pub fn embedded(&self, name: &str) -> Result<&EmbeddedSpace> {
        named(&self.embedded, name, "embedded space")
    }

    pub fn povm(&self, name: &str) -> Result<&Povm> {
        named(&self.povms, name, "povm")
    }

    pub fn instrument(&self, name: &str) -> Result<&KrausInstrument> {
        named(&self.instruments, name, "instrument")
    }

    pub fn density(&self, name: &str) -> Result<&DensityMatrix> {
        named(&self.densities, name, "density matrix")
    }

    pub fn add_extended(&mut self, name: &str, y: ExtendedObservable) -> Result<()> {
        if self.extended.iter().any(|(n, _)| n == name) {
            return Err(Error::Validation(format!(
                "composed name `{name}` is already declared"
            )));
        }
        self.extended.push((name.to_string(), y));
        Ok(())
    }
}
