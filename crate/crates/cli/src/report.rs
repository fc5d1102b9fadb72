use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelEcho {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub internal_dim: usize,
    pub floquet_copies: usize,
    pub metric: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEcho {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelEcho>,
    pub diagnostics: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub thresholds: BTreeMap<String, f64>,
    pub info: BTreeMap<String, f64>,
    pub results: BTreeMap<String, Value>,
    pub timings: BTreeMap<String, f64>,
    pub matrix_dumps: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEcho>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            config: config.clone(),
            model: None,
            diagnostics: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            info: BTreeMap::new(),
            results: BTreeMap::new(),
            timings: BTreeMap::new(),
            matrix_dumps: Vec::new(),
            warnings: Vec::new(),
            error: None,
        }
    }

    pub fn failed(command: &str, config: &RunConfig, err: &CliError) -> Self {
        let mut r = Self::new(command, config);
        r.error = Some(ErrorEcho {
            kind: err.kind().into(),
            message: err.to_string(),
            exit_code: err.exit_code(),
        });
        r
    }

    /// Record a diagnostic judged as `value <= threshold`.
    pub fn check(&mut self, name: &str, value: f64, threshold: f64) {
        self.judge(name, value, threshold, value <= threshold);
    }

    /// Record a diagnostic with an externally decided verdict.
    pub fn judge(&mut self, name: &str, value: f64, threshold: f64, pass: bool) {
        self.diagnostics.insert(name.into(), value);
        self.thresholds.insert(name.into(), threshold);
        self.verdicts
            .insert(name.into(), if pass { Verdict::Pass } else { Verdict::Fail });
    }

    pub fn failures(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| **v == Verdict::Fail)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| CliError::Io(format!("cannot write report {}: {e}", path.display())))
    }
}

/// The invariant a diagnostic measures, as a formula.
pub fn describe(name: &str) -> &'static str {
    let base = name.rsplit('.').next().unwrap_or(name);
    match base {
        "lambda_sq_defect" => "λ² = I",
        "lambda_commutator_defect" => "[βλ, λβ] = 0",
        "beta_even_defect" => "[β, βλ+λβ] = 0",
        "eriksen_defect" => "βU = U‡β",
        "unitarity_defect" => "U·U‡ = I",
        "inverse_defect" => "U·U⁻¹ = I",
        "projector_defect" => "(1+βλ)P± = (1±β)P± with P± = (1±λ)/2",
        "odd_norm" => "UℋU⁻¹ is even",
        "odd_norm_window" => "central Floquet window of UKU⁻¹ is even",
        "alt_form_defect" => "both closed forms of the Eriksen operator agree",
        "lambda_h_commutator" => "[λ, ℋ] = 0",
        "numerator_denominator_commutator" => "[1+βλ, 2+βλ+λβ] = 0",
        "spectrum_defect" => "spectrum preserved by the transformation",
        "sin2s_defect" => "sin 2S = −i(βλ−λβ)/2",
        "cos2s_defect" => "cos 2S = (βλ+λβ)/2",
        "oddness_defect" => "βS = −Sβ",
        "hermiticity_defect" => "S = S‡",
        "form_agreement_defect" => "the two arcsin forms of S agree",
        "series_agreement_defect" => "the power series for S agrees with its arcsin form",
        "series_form_a_defect" => "the power series for S agrees with the square-root arcsin form",
        "form_a_commutator" => "[βλ−λβ, 2+βλ+λβ] = 0",
        "exp_equivalence_defect" => "exp(iS) = U",
        "odd_norm_lambda_naive" => "odd norm with the adiabatic λ exceeds 10× the odd norm with Λ",
        "odd_norm_lambda_capital" => "U(Λ)·K·U(Λ)‡ is even on the central window",
        "spectrum_defect_capital" => "U(Λ) preserves the spectrum of K",
        "max_identity_defect" => "all operator identities hold",
        "dispersion_error" => "ℋ_FW = β√(m²+p²)",
        "decay" => "Λ odd norm nonincreasing in N_f",
        _ if base.starts_with("nf_") => "Λ odd norm nonincreasing in N_f",
        _ => "invariant",
    }
}
