use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use fwexact::models::{ModelKind, ModelSpec};
use fwexact::Tolerances;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            name: ModelKind::FreeDirac.name().to_string(),
            params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub tol_struct: f64,
    pub tol_identity: f64,
    pub tol_generator: f64,
    pub gap_tol: f64,
    pub eps_clamp: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            tol_struct: t.tol_struct,
            tol_identity: t.tol_identity,
            tol_generator: t.tol_generator,
            gap_tol: t.gap_tol,
            eps_clamp: t.eps_clamp,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<String>,
    pub dump: bool,
    pub dump_dir: Option<String>,
    /// Sweep CSV destination; stdout when unset.
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    #[serde(default)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetConfig {
    /// Truncation orders for the convergence table.
    pub nf: Vec<usize>,
    pub window: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub tolerances: ToleranceConfig,
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floquet: Option<FloquetConfig>,
}

pub const DEFAULT_DUMP_DIR: &str = "dumps";

fn parse_value(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str(raw) {
        return v;
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(|s| parse_value(s.trim())).collect());
    }
    Value::String(raw.to_string())
}

/// Apply `key=value` to a config document. Dotted keys address nested
/// fields; a bare key is a model parameter, except `model` which names the
/// model.
pub fn apply_set(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got '{assignment}'")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Usage(format!("empty key in --set '{assignment}'")));
    }
    let path: Vec<&str> = match key {
        "model" => vec!["model", "name"],
        k if !k.contains('.') => vec!["model", "params", k],
        k => k.split('.').collect(),
    };
    let value = parse_value(raw.trim());
    let mut node = doc;
    for (i, part) in path.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Usage(format!("--set {key}: '{}' is not a section", path[..i].join("."))))?;
        if i + 1 == path.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!()
}

impl RunConfig {
    pub fn from_value(doc: Value) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read the optional config file and layer the `--set` assignments on top.
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self, CliError> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", p.display())))?
            }
            None => Value::Object(Map::new()),
        };
        if !doc.is_object() {
            return Err(CliError::Usage("config must be a JSON object".into()));
        }
        for s in sets {
            apply_set(&mut doc, s)?;
        }
        Self::from_value(doc)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.tolerances().validate().map_err(CliError::Usage)?;
        self.model_spec()?.resolved().map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(sweep) = &self.sweep {
            if let Some(v) = sweep.values.iter().find(|v| !v.is_finite()) {
                return Err(CliError::Usage(format!("sweep value {v} is not finite")));
            }
            let kind = self.kind()?;
            if !kind.params().iter().any(|p| p.name == sweep.parameter) {
                return Err(CliError::Usage(format!(
                    "sweep parameter '{}' is not a parameter of {}",
                    sweep.parameter,
                    kind.name()
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> Result<ModelKind, CliError> {
        ModelKind::parse(&self.model.name).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        Ok(ModelSpec {
            kind: self.kind()?,
            params: self.model.params.clone(),
        })
    }

    pub fn tolerances(&self) -> Tolerances {
        let t = &self.tolerances;
        Tolerances {
            tol_struct: t.tol_struct,
            tol_identity: t.tol_identity,
            tol_generator: t.tol_generator,
            gap_tol: t.gap_tol,
            eps_clamp: t.eps_clamp,
        }
    }

    pub fn dump_dir(&self) -> &str {
        self.output.dump_dir.as_deref().unwrap_or(DEFAULT_DUMP_DIR)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(sets: &[&str]) -> Result<RunConfig, CliError> {
        let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        RunConfig::load(None, &sets)
    }

    #[test]
    fn defaults() {
        let cfg = load(&[]).unwrap();
        assert_eq!(cfg.model.name, "free-dirac");
        assert_eq!(cfg.tolerances(), Tolerances::default());
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn set_paths() {
        let cfg = load(&[
            "model=feshbach-villars",
            "p=0.5",
            "tolerances.gap_tol=1e-9",
            "output.dump=true",
        ])
        .unwrap();
        assert_eq!(cfg.model.name, "feshbach-villars");
        assert_eq!(cfg.model.params["p"], 0.5);
        assert_eq!(cfg.tolerances.gap_tol, 1e-9);
        assert!(cfg.output.dump);
    }

    #[test]
    fn sweep_values_from_list() {
        let cfg = load(&["sweep.parameter=pz", "sweep.values=0.25,0.5,0.75"]).unwrap();
        assert_eq!(cfg.sweep.unwrap().values, vec![0.25, 0.5, 0.75]);
        let cfg = load(&["sweep.parameter=pz", "sweep.values=[1,2]"]).unwrap();
        assert_eq!(cfg.sweep.unwrap().values, vec![1.0, 2.0]);
    }

    #[test]
    fn usage_errors() {
        for bad in [
            &["sweep.parameter=pz", "sweep.values=a,b"][..],
            &["pz=abc"],
            &["model=nonsense"],
            &["qq=1"],
            &["tolerances.gap_tol=2"],
            &["tolerances.bogus=1"],
            &["noequals"],
            &["sweep.parameter=zz", "sweep.values=1"],
        ] {
            assert!(matches!(load(bad), Err(CliError::Usage(_))), "{bad:?}");
        }
    }

    #[test]
    fn echo_round_trips() {
        let cfg = load(&["model=floquet-dirac-vector", "floquet.nf=4,6", "floquet.window=2"]).unwrap();
        let back = RunConfig::from_value(serde_json::to_value(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
