//! Config-driven front end: parse a run, compute, write results.json,
//! results.csv and (for partitions) partition.csv.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    parse_config, AlphaText, Command, FixedPointSpec, ModelKind, RawConfig, RunConfig,
    SingularSpec, DEFAULT_CROSSCHECK_S, DEFAULT_PER_INDEX, DEFAULT_TOLERANCE,
};

use crate::char_algebra::TorusElement;
use crate::gelfand_robbin::{xi_with_predomain, TraceMethod};
use crate::lefschetz::{assemble, eta12_limits, eta12_series};
use crate::model_cones::{
    dirichlet_character, neumann_character, series_crosscheck, xi_tilde_closed, xi_tilde_zeta,
    ConeModel, ConeVariant,
};
use crate::quadrature::{DEFAULT_NODES, DEFAULT_REL_TOL};
use crate::regularize::{extrapolate_samples, LimitEstimate};
use crate::spectral_partition::xi_spectral_circle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error::*;
        match e {
            Divergent { .. } | NoConvergence(_) | HurwitzPole | DegeneratePairing => {
                CliError::Numeric(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "conic-xi",
    version,
    about = "Equivariant eta and xi invariants on model cones"
)]
pub struct Cli {
    /// TOML or JSON run config; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub raw: RawConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    /// [re, im]
    pub value: [f64; 2],
    pub error_bound: Option<f64>,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub quantity: String,
    pub s: f64,
    pub value: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defaults {
    pub s_grid: Vec<f64>,
    pub cutoff: usize,
    pub levels: usize,
    pub per_index: usize,
    pub crosscheck_s: f64,
    pub tolerance: f64,
    pub quadrature_nodes: usize,
    pub quadrature_rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub command: Command,
    pub config: RunConfig,
    pub defaults: Defaults,
    pub quantities: Vec<Quantity>,
    /// Sampled values at s > 0, plot-ready.
    pub series: Vec<SeriesPoint>,
    /// Sector rows; empty unless the command is `partition`.
    pub partition: Vec<SeriesPoint>,
}

impl Results {
    fn new(config: &RunConfig) -> Self {
        Self {
            command: config.command,
            config: config.clone(),
            defaults: Defaults {
                s_grid: config.s_grid.clone(),
                cutoff: config.cutoff,
                levels: config.levels,
                per_index: config.per_index,
                crosscheck_s: config.crosscheck_s,
                tolerance: config.tolerance,
                quadrature_nodes: DEFAULT_NODES,
                quadrature_rel_tol: DEFAULT_REL_TOL,
            },
            quantities: vec![],
            series: vec![],
            partition: vec![],
        }
    }

    fn push(
        &mut self,
        name: impl Into<String>,
        v: Complex64,
        error_bound: Option<f64>,
        method: &str,
    ) {
        self.quantities.push(Quantity {
            name: name.into(),
            value: [v.re, v.im],
            error_bound,
            method: method.into(),
        });
    }

    fn push_limit(&mut self, name: &str, est: &LimitEstimate) {
        let method = format!("extrapolated_{:?}", est.method).to_lowercase();
        self.push(name, est.value, Some(est.error_bound), &method);
    }

    fn push_series(&mut self, name: &str, grid: &[f64], values: &[Complex64]) {
        for (s, v) in grid.iter().zip(values) {
            self.series.push(SeriesPoint {
                quantity: name.into(),
                s: *s,
                value: [v.re, v.im],
            });
        }
    }

    pub fn quantity(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name == name)
    }

    /// Extrapolated quantities whose bound exceeds the tolerance.
    pub fn unconverged(&self) -> Vec<&Quantity> {
        let tol = self.config.tolerance;
        self.quantities
            .iter()
            .filter(|q| {
                q.method.starts_with("extrapolated") && q.error_bound.is_some_and(|e| !(e <= tol))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results serialize");
        s.push('\n');
        s
    }

    /// quantity,s,re,im; s = 0 rows hold limits and closed forms.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,s,re,im\n");
        for p in &self.series {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e}",
                p.quantity, p.s, p.value[0], p.value[1]
            );
        }
        for q in &self.quantities {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e}",
                q.name, 0.0, q.value[0], q.value[1]
            );
        }
        out
    }

    pub fn partition_csv(&self) -> String {
        let mut out = String::from("sector,s,re,im\n");
        for p in &self.partition {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e}",
                p.quantity, p.s, p.value[0], p.value[1]
            );
        }
        out
    }

    fn summary(&self) -> String {
        let mut out = String::new();
        for q in &self.quantities {
            let bound = q
                .error_bound
                .map(|e| format!("  ± {e:.2e}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{:<24} {:>22.15e} {:>+22.15e}i{bound}",
                q.name, q.value[0], q.value[1]
            );
        }
        out
    }
}

fn xi_samples(model: &ConeModel, g: &TorusElement, grid: &[f64]) -> crate::Result<Vec<Complex64>> {
    let n = neumann_character(model, g)?;
    let d = dirichlet_character(model, g)?;
    grid.iter()
        .map(|&s| Ok(0.5 * (n.eval(s)? + d.eval(s)?)))
        .collect()
}

fn run_xi(config: &RunConfig, out: &mut Results) -> Result<(), CliError> {
    let model = config.cone_model()?;
    let g = config.element()?;
    out.push(
        "xi_tilde_closed",
        xi_tilde_closed(&model, &g)?,
        None,
        "closed_form",
    );
    let samples = xi_samples(&model, &g, &config.s_grid)?;
    let est = extrapolate_samples(&config.s_grid, &samples)?;
    out.push_limit("xi_tilde", &est);
    out.push_series("xi_tilde", &config.s_grid, &samples);
    if model.variant == ConeVariant::QuadricConeVertex {
        run_lefschetz(config, out)?;
    }
    Ok(())
}

fn run_eta(config: &RunConfig, out: &mut Results) -> Result<(), CliError> {
    let g = TorusElement::new(config.angles.clone())?;
    let lim = eta12_limits(&g, config.cutoff, &config.s_grid)?;
    out.push_limit("eta1", &lim.eta1);
    out.push_limit("eta2", &lim.eta2);
    out.push("eta1_closed", lim.closed1, None, "closed_form");
    out.push("eta2_closed", lim.closed2, None, "closed_form");
    let sum = lim.eta1.value + lim.eta2.value;
    out.push(
        "eta1_plus_eta2",
        sum,
        Some(lim.eta1.error_bound + lim.eta2.error_bound),
        "series_sum",
    );
    let sign = if g.dim() % 2 == 0 { 1.0 } else { -1.0 };
    out.push(
        "sphere_formula",
        sign * g.sqrt_det() * 2.0 / g.det_one_minus(),
        None,
        "closed_form",
    );
    let samples = config
        .s_grid
        .par_iter()
        .map(|&s| eta12_series(&g, s, config.cutoff).map(|(a, b)| (a.value, b.value)))
        .collect::<crate::Result<Vec<_>>>()?;
    let (e1, e2): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
    out.push_series("eta1", &config.s_grid, &e1);
    out.push_series("eta2", &config.s_grid, &e2);
    Ok(())
}

fn run_partition(config: &RunConfig, out: &mut Results) -> Result<(), CliError> {
    let alpha = config.alpha()?;
    let phi = config.rotation()?;
    let report = xi_spectral_circle(alpha, phi, config.cutoff, config.convention, &config.s_grid)?;
    for sec in &report.sectors {
        let name = format!("xi_{:?}", sec.sector).to_lowercase();
        out.push_limit(&name, &sec.limit);
        out.push_series(&name, &config.s_grid, &sec.xi);
    }
    out.push_limit("xi_total", &report.total_limit);
    out.push_series("xi_total", &config.s_grid, &report.total);
    if let Ok(model) = ConeModel::circle(alpha) {
        if let Ok(v) = xi_tilde_closed(&model, &TorusElement::new(vec![phi])?) {
            out.push("xi_tilde_closed", v, None, "closed_form");
        }
    }
    out.partition = report
        .csv_rows()
        .into_iter()
        .map(|(quantity, s, re, im)| SeriesPoint {
            quantity,
            s,
            value: [re, im],
        })
        .collect();
    Ok(())
}

fn run_gr(config: &RunConfig, out: &mut Results) -> Result<(), CliError> {
    let w = config.predomain()?;
    let phi = config.rotation()?;
    let closed = xi_with_predomain(&w, phi, TraceMethod::Closed)?;
    let quad = xi_with_predomain(&w, phi, TraceMethod::Quadrature)?;
    out.push("xi", closed.xi, None, "closed_form");
    out.push("xi_min", closed.xi_min, None, "closed_form");
    out.push(
        "xi_minus_xi_min",
        closed.xi - closed.xi_min,
        None,
        "closed_form",
    );
    out.push("trace_w", closed.trace_w, None, "closed_form");
    out.push("trace_w_star", closed.trace_w_star, None, "closed_form");
    out.push("neumann", closed.neumann, None, "closed_form");
    out.push("dirichlet", closed.dirichlet, None, "closed_form");
    out.push(
        "correction_form",
        closed.correction_form,
        None,
        "closed_form",
    );
    out.push(
        "xi_quadrature",
        quad.xi,
        Some((quad.xi - closed.xi).norm()),
        "quadrature",
    );
    out.push(
        "trace_w_quadrature",
        quad.trace_w,
        Some((quad.trace_w - closed.trace_w).norm()),
        "quadrature",
    );
    Ok(())
}

fn run_lefschetz(config: &RunConfig, out: &mut Results) -> Result<(), CliError> {
    let global = config.global_model()?;
    let g = config.element()?;
    let a = assemble(&global, &g)?;
    for (label, v) in &a.breakdown {
        out.push(format!("local_{label}"), *v, None, "closed_form");
    }
    out.push("lefschetz_sum", a.total, None, "closed_form");
    if let Some(e) = global.expected_total {
        out.push(
            "lefschetz_expected",
            e,
            Some((a.total - e).norm()),
            "closed_form",
        );
    }
    Ok(())
}

fn run_report(config: &RunConfig, out: &mut Results) -> Result<(), CliError> {
    run_xi(config, out)?;
    let model = config.cone_model()?;
    let g = config.element()?;
    let cc = series_crosscheck(&model, &g, config.crosscheck_s, config.per_index)?;
    for (name, e) in [("neumann", cc.neumann), ("dirichlet", cc.dirichlet)] {
        out.push(
            format!("{name}_series"),
            e.series,
            Some(e.tail_bound),
            "basis_sum",
        );
        out.push(
            format!("{name}_closed_at_s"),
            e.closed_form,
            Some(e.abs_diff),
            "closed_form",
        );
    }
    let zeta = xi_tilde_zeta(&model, &g, &config.s_grid, config.levels)?;
    out.push_limit("xi_tilde_zeta_weights", &zeta);
    Ok(())
}

/// Computes every quantity of the run; does not touch the filesystem.
pub fn run(config: &RunConfig) -> Result<Results, CliError> {
    let mut out = Results::new(config);
    match config.command {
        Command::Xi => run_xi(config, &mut out)?,
        Command::Eta => run_eta(config, &mut out)?,
        Command::Partition => run_partition(config, &mut out)?,
        Command::Gr => run_gr(config, &mut out)?,
        Command::Lefschetz => run_lefschetz(config, &mut out)?,
        Command::Report => run_report(config, &mut out)?,
    }
    Ok(out)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_artifacts(results: &Results, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    write(&dir.join("results.json"), &results.to_json())?;
    write(&dir.join("results.csv"), &results.to_csv())?;
    if results.command == Command::Partition {
        write(&dir.join("partition.csv"), &results.partition_csv())?;
    }
    Ok(())
}

pub fn error_json(e: &CliError) -> String {
    let body = serde_json::json!({
        "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() }
    });
    format!(
        "{}\n",
        serde_json::to_string_pretty(&body).expect("error serializes")
    )
}

fn configure_threads() {
    if let Some(n) = std::env::var("CONIC_XI_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::warn!("could not cap threads at {n}: {e}");
            }
        }
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let base = match &cli.config {
        Some(path) => RawConfig::from_path(path)?,
        None => RawConfig::default(),
    };
    base.overlay(cli.raw).validate()
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let fallback_dir = cli
        .raw
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    let config = match resolve(cli) {
        Ok(c) => c,
        Err(e) => return fail(&e, &fallback_dir),
    };
    let results = match run(&config) {
        Ok(r) => r,
        Err(e) => return fail(&e, &config.output_dir),
    };
    print!("{}", results.summary());
    if let Err(e) = write_artifacts(&results, &config.output_dir) {
        return fail(&e, &config.output_dir);
    }
    let bad = results.unconverged();
    if !bad.is_empty() {
        let names: Vec<&str> = bad.iter().map(|q| q.name.as_str()).collect();
        let e = CliError::Numeric(format!(
            "error bound above tolerance {:e} for {}",
            config.tolerance,
            names.join(", ")
        ));
        return fail(&e, &config.output_dir);
    }
    EXIT_OK
}

fn fail(e: &CliError, dir: &Path) -> i32 {
    let body = error_json(e);
    eprint!("{body}");
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = std::fs::write(dir.join("error.json"), &body);
    }
    e.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> RunConfig {
        serde_json::from_str::<RawConfig>(json)
            .unwrap()
            .validate()
            .unwrap()
    }

    #[test]
    fn quadric_xi_prints_local_values() {
        let r = run(&config(
            r#"{"command":"xi","model":"quadric","angles":[0.7,1.3]}"#,
        ))
        .unwrap();
        for n in ["local_a1", "local_a2", "local_v"] {
            assert!(r.quantity(n).is_some(), "{n}");
        }
        let sum = r.quantity("lefschetz_sum").unwrap().value;
        assert!((sum[0] - 1.0).abs() < 1e-10 && sum[1].abs() < 1e-10);
    }

    #[test]
    fn gr_example() {
        let r = run(&config(
            r#"{"command":"gr","alpha":3,"predomain":[0.6,0.8],"phi":1.2}"#,
        ))
        .unwrap();
        let lam = Complex64::from_polar(1.0, 0.4);
        let expect = (1.0 - lam).inv() + 0.36 * lam.inv() + 0.64 * lam.powi(-2);
        let xi = r.quantity("xi").unwrap().value;
        assert!((Complex64::new(xi[0], xi[1]) - expect).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = run(&config(
            r#"{"command":"eta","angles":[1.0,2.0],"cutoff":500}"#,
        ))
        .unwrap();
        let back: Results = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn numeric_errors_map_to_exit_3() {
        let e: CliError = crate::Error::Divergent { s: 0.1, tail: 1.0 }.into();
        assert_eq!(e.exit_code(), EXIT_NUMERIC);
        let e: CliError = crate::Error::Invalid("x".into()).into();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
    }
}
