use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};

use fwexact::dump::dump_matrix;
use fwexact::floquet::{
    build_extended, default_window, demonstrate_nonevenness, lambda_capital, lambda_naive, DECAY_NOISE_FLOOR,
    SEPARATION_FACTOR,
};
use fwexact::models::{ModelKind, ModelSpec};
use fwexact::pipeline::{classify, run, Check, PipelineRun};
use fwexact::{BetaMatrix, BlockOperator, Model, Tolerances};

use crate::config::RunConfig;
use crate::report::{ModelEcho, Report};
use crate::CliError;

pub const WINDOW_EDGE_WARNING: &str = "window equals truncation; edge effects dominate";

/// Writes matrices when dumping is enabled and remembers the file names.
struct Dumper {
    dir: Option<PathBuf>,
    prefix: String,
    names: Vec<String>,
}

impl Dumper {
    fn new(cfg: &RunConfig, command: &str) -> Result<Self, CliError> {
        let dir = if cfg.output.dump {
            let dir = PathBuf::from(cfg.dump_dir());
            std::fs::create_dir_all(&dir)
                .map_err(|e| CliError::Io(format!("cannot create dump directory {}: {e}", dir.display())))?;
            Some(dir)
        } else {
            None
        };
        Ok(Self {
            dir,
            prefix: format!("{command}_{}", cfg.model.name),
            names: Vec::new(),
        })
    }

    fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    fn dump(&mut self, label: &str, a: &BlockOperator) -> Result<(), CliError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let name = format!("{}_{label}.csv", self.prefix);
        dump_matrix(a, &dir.join(&name))?;
        self.names.push(name);
        Ok(())
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn echo(spec: &ModelSpec, model: &Model) -> Result<ModelEcho, CliError> {
    let (layout, metric) = match model {
        Model::Stationary(s) => (s.layout(), s.metric),
        Model::Periodic { hamiltonian, nf } => (
            fwexact::Layout::new(hamiltonian.layout().internal_dim, 2 * nf + 1)?,
            hamiltonian.metric(),
        ),
    };
    Ok(ModelEcho {
        name: spec.kind.name().into(),
        params: spec.resolved()?,
        internal_dim: layout.internal_dim,
        floquet_copies: layout.floquet_copies,
        metric: metric.as_str().into(),
    })
}

pub fn models_list(json: bool) -> String {
    if json {
        let catalog: Vec<Value> = ModelKind::ALL
            .iter()
            .map(|k| {
                json!({
                    "name": k.name(),
                    "description": k.description(),
                    "periodic": k.is_periodic(),
                    "params": k.params().iter().map(|p| json!({
                        "name": p.name,
                        "default": p.default,
                        "description": p.description,
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "models": catalog })).expect("catalog serializes");
        s.push('\n');
        return s;
    }
    let mut out = String::new();
    for k in ModelKind::ALL {
        out.push_str(&format!("{}\n    {}\n", k.name(), k.description()));
        for p in k.params() {
            out.push_str(&format!("    {:<6} {:<10} {}\n", p.name, p.default, p.description));
        }
    }
    out
}

fn record_run(report: &mut Report, run: &PipelineRun, tol: &Tolerances, prefix: &str) {
    for (name, (value, threshold, pass)) in run.verdicts(tol) {
        report.judge(&format!("{prefix}{name}"), value, threshold, pass);
    }
    for (name, &v) in &run.info {
        report.info.insert(format!("{prefix}{name}"), v);
    }
}

fn diagonal(a: &BlockOperator) -> Vec<f64> {
    (0..a.dim()).map(|i| a.get(i, i).re).collect()
}

fn dump_run(d: &mut Dumper, run: &PipelineRun, tag: &str) -> Result<(), CliError> {
    if !d.enabled() {
        return Ok(());
    }
    let h = run
        .extended
        .as_ref()
        .map(|k| k.op.clone())
        .unwrap_or_else(|| run.hamiltonian());
    d.dump(&format!("{tag}h"), &h)?;
    d.dump(&format!("{tag}lambda"), &run.fw.lambda)?;
    d.dump(&format!("{tag}u"), &run.fw.u)?;
    d.dump(&format!("{tag}h_fw"), &run.fw.h_fw)?;
    d.dump(&format!("{tag}s"), &run.generator.s)
}

pub fn transform(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new("transform", cfg);
    let tol = cfg.tolerances();
    let spec = cfg.model_spec()?;

    let t = Instant::now();
    let model = spec.build()?;
    report.timings.insert("build".into(), ms(t));
    report.model = Some(echo(&spec, &model)?);

    let t = Instant::now();
    let run = run(&model, &tol)?;
    report.timings.insert("transform".into(), ms(t));

    record_run(&mut report, &run, &tol, "");
    report.results.insert("h_fw_diagonal".into(), json!(diagonal(&run.fw.h_fw)));
    report
        .results
        .insert("s_norm_2".into(), json!(run.generator.s.norm_spectral()));

    let mut dumper = Dumper::new(cfg, "transform")?;
    dump_run(&mut dumper, &run, "")?;
    report.matrix_dumps = dumper.names;
    Ok(report)
}

/// √(m²+p²) for the models whose FW Hamiltonian is β times it.
pub fn dispersion(spec: &ModelSpec) -> Result<Option<f64>, CliError> {
    let p = spec.resolved()?;
    Ok(match spec.kind {
        ModelKind::FreeDirac => Some((p["m"].powi(2) + p["px"].powi(2) + p["py"].powi(2) + p["pz"].powi(2)).sqrt()),
        ModelKind::FeshbachVillars => Some((p["m"].powi(2) + p["p"].powi(2)).sqrt()),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: Option<f64>,
    pub max_identity_defect: f64,
    pub odd_norm: f64,
    pub s_norm_2: f64,
    pub dispersion: Option<f64>,
    pub dispersion_error: Option<f64>,
}

pub const SWEEP_HEADER: &str = "value,max_identity_defect,odd_norm,s_norm_2,dispersion,dispersion_error";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            opt(self.value),
            self.max_identity_defect,
            self.odd_norm,
            self.s_norm_2,
            opt(self.dispersion),
            opt(self.dispersion_error)
        )
    }
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

pub fn sweep(cfg: &RunConfig) -> Result<(Report, String), CliError> {
    let mut report = Report::new("sweep", cfg);
    let tol = cfg.tolerances();
    let base = cfg.model_spec()?;
    let points: Vec<(Option<f64>, ModelSpec)> = match &cfg.sweep {
        Some(s) if !s.values.is_empty() => s
            .values
            .iter()
            .map(|&v| (Some(v), base.clone().with(&s.parameter, v)))
            .collect(),
        _ => vec![(None, base.clone())],
    };

    let mut dumper = Dumper::new(cfg, "sweep")?;
    let mut rows = Vec::with_capacity(points.len());
    let t = Instant::now();
    for (i, (value, spec)) in points.iter().enumerate() {
        let model = spec.build()?;
        if i == 0 {
            report.model = Some(echo(spec, &model)?);
        }
        let run = run(&model, &tol)?;
        let prefix = format!("sweep.{i}.");
        record_run(&mut report, &run, &tol, &prefix);

        let max_identity_defect = run
            .diagnostics
            .iter()
            .filter(|(k, _)| classify(k) == Some(Check::Identity))
            .map(|(_, &v)| v)
            .fold(0.0, f64::max);
        let odd_norm = run
            .diagnostics
            .get("odd_norm_window")
            .or(run.diagnostics.get("odd_norm"))
            .copied()
            .unwrap_or(f64::NAN);
        let disp = dispersion(spec)?;
        let dispersion_error = match (disp, &model) {
            (Some(e), Model::Stationary(split)) => {
                let target = split.beta.to_operator().scale_re(e);
                let err = (&run.fw.h_fw - &target).norm_fro() / e;
                report.check(&format!("{prefix}dispersion_error"), err, tol.tol_identity);
                Some(err)
            }
            _ => None,
        };
        rows.push(SweepRow {
            value: *value,
            max_identity_defect,
            odd_norm,
            s_norm_2: run.generator.s.norm_spectral(),
            dispersion: disp,
            dispersion_error,
        });
        dump_run(&mut dumper, &run, &format!("{i}_"))?;
    }
    report.timings.insert("sweep".into(), ms(t));
    report.results.insert(
        "rows".into(),
        json!(rows
            .iter()
            .map(|r| json!({
                "value": r.value,
                "max_identity_defect": r.max_identity_defect,
                "odd_norm": r.odd_norm,
                "s_norm_2": r.s_norm_2,
                "dispersion": r.dispersion,
                "dispersion_error": r.dispersion_error,
            }))
            .collect::<Vec<_>>()),
    );
    report.matrix_dumps = dumper.names;
    Ok((report, sweep_table(&rows)))
}

pub fn floquet(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new("floquet", cfg);
    let tol = cfg.tolerances();
    let spec = cfg.model_spec()?;
    let model = spec.build()?;
    let Model::Periodic { hamiltonian, nf } = &model else {
        return Err(CliError::Usage(format!(
            "floquet needs a time-periodic model, got {}",
            spec.kind.name()
        )));
    };
    let nf = *nf;
    report.model = Some(echo(&spec, &model)?);

    let fc = cfg.floquet.clone().unwrap_or_default();
    let window = fc.window.unwrap_or_else(|| default_window(nf));
    if window > nf {
        return Err(CliError::Usage(format!("window {window} exceeds nf = {nf}")));
    }
    if window == nf {
        report.warnings.push(WINDOW_EDGE_WARNING.into());
    }
    let decay_nfs = if fc.nf.is_empty() { vec![nf] } else { fc.nf.clone() };
    if let Some(bad) = decay_nfs.iter().find(|&&n| n < window.max(1)) {
        return Err(CliError::Usage(format!("decay table nf = {bad} is smaller than window {window}")));
    }

    let t = Instant::now();
    let r = demonstrate_nonevenness(hamiltonian, nf, window, &decay_nfs, tol.gap_tol)?;
    report.timings.insert("floquet".into(), ms(t));

    // a drive that leaves the adiabatic sign static cannot separate the two
    let naive_static = r.naive_is_static(tol.tol_identity) && r.odd_norm_lambda_naive <= tol.tol_identity;
    report.judge(
        "odd_norm_lambda_naive",
        r.odd_norm_lambda_naive,
        SEPARATION_FACTOR * r.odd_norm_lambda_capital,
        r.separation_holds() || naive_static,
    );
    report.check("odd_norm_lambda_capital", r.odd_norm_lambda_capital, tol.tol_identity);
    report.check("spectrum_defect_capital", r.spectrum_defect_capital, tol.tol_identity);
    let monotone = r.decay_monotone();
    for (n, v) in &r.decay_table {
        report.judge(&format!("decay.nf_{n}"), *v, DECAY_NOISE_FLOOR, monotone);
    }
    report.info.insert("spectrum_defect_naive".into(), r.spectrum_defect_naive);
    report.info.insert("naive_offdiag_max".into(), r.naive_offdiag_max);
    report.info.insert("naive_sq_defect".into(), r.naive_sq_defect);
    report.results.insert("nf".into(), json!(nf));
    report.results.insert("window".into(), json!(window));
    report.results.insert("separation_factor".into(), json!(SEPARATION_FACTOR));
    report.results.insert(
        "decay_table".into(),
        json!(r
            .decay_table
            .iter()
            .map(|(n, v)| json!({ "nf": n, "odd_norm_lambda_capital": v }))
            .collect::<Vec<_>>()),
    );

    let mut dumper = Dumper::new(cfg, "floquet")?;
    if dumper.enabled() {
        let k = build_extended(hamiltonian, nf)?;
        dumper.dump("k", &k.op)?;
        dumper.dump("lambda_naive", &lambda_naive(hamiltonian, nf, tol.gap_tol)?)?;
        dumper.dump("lambda_capital", &lambda_capital(&k, tol.gap_tol)?)?;
        dumper.dump("beta", &BetaMatrix::for_layout(k.op.layout()).to_operator())?;
    }
    report.matrix_dumps = dumper.names;
    Ok(report)
}

/// Convert verdict failures into messages naming the broken invariant.
pub fn failure_messages(report: &Report) -> Vec<String> {
    report
        .failures()
        .into_iter()
        .map(|name| {
            format!(
                "invariant failed: {name} = {:.3e} (threshold {:.1e}): {}",
                report.diagnostics[name],
                report.thresholds[name],
                crate::report::describe(name)
            )
        })
        .collect()
}

pub fn timings_stripped(report_json: &str) -> Result<Value, serde_json::Error> {
    let mut v: Value = serde_json::from_str(report_json)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timings");
    }
    Ok(v)
}
