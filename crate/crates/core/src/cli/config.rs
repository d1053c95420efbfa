use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use crate::char_algebra::{HalfIntMonomial, TorusElement};
use crate::gelfand_robbin::Predomain;
use crate::lefschetz::{disc_as_cone, quadric_global, FixedPointDatum, GlobalModel, SingularPoint};
use crate::model_cones::{parse_alpha, ConeModel, Twist, DEFAULT_LEVELS, HEAT_S_GRID};
use crate::regularize::{validate_grid, DEFAULT_CUTOFF, DEFAULT_S_GRID};
use crate::spectral_partition::L2Convention;
use crate::Rational;

use super::CliError;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_PER_INDEX: usize = 300;
pub const DEFAULT_CROSSCHECK_S: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Xi,
    Eta,
    Partition,
    Gr,
    Lefschetz,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelKind {
    FlatCn,
    Circle,
    Quadric,
    Cyclic,
}

/// alpha as written: "3", 3, 0.5 or "1/3".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AlphaText(pub String);

impl<'de> Deserialize<'de> for AlphaText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        Ok(AlphaText(match Raw::deserialize(d)? {
            Raw::Int(i) => i.to_string(),
            Raw::Float(x) => x.to_string(),
            Raw::Text(t) => t,
        }))
    }
}

impl std::str::FromStr for AlphaText {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(AlphaText(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointSpec {
    pub label: String,
    /// Integer exponent vectors of the tangent characters.
    pub weights: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularSpec {
    pub label: String,
    pub model: ModelKind,
    pub n: Option<usize>,
    pub alpha: Option<AlphaText>,
    pub k: Option<u32>,
    pub weights: Option<Vec<i64>>,
    pub predomain: Option<Vec<f64>>,
    pub predomain_im: Option<Vec<f64>>,
}

/// Keys accepted in a config file; every flag of the same name overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub alpha: Option<AlphaText>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub weights: Option<Vec<i64>>,
    #[arg(long, value_enum)]
    pub twist: Option<Twist>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub angles: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Real parts of the predomain spanning vector.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub predomain: Option<Vec<f64>>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub predomain_im: Option<Vec<f64>>,
    #[arg(long, num_args = 1..)]
    pub s_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub per_index: Option<usize>,
    #[arg(long)]
    pub crosscheck_s: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum)]
    pub convention: Option<L2Convention>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(skip)]
    pub fixed_points: Option<Vec<FixedPointSpec>>,
    #[arg(skip)]
    pub singular_points: Option<Vec<SingularSpec>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RawConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
            Some("json") => serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
            other => Err(CliError::Config(format!(
                "unrecognised config extension {other:?}; use .toml or .json"
            ))),
        }
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RawConfig) -> Self {
        overlay!(
            self,
            top,
            command,
            model,
            n,
            alpha,
            k,
            weights,
            twist,
            angles,
            phi,
            predomain,
            predomain_im,
            s_grid,
            cutoff,
            levels,
            per_index,
            crosscheck_s,
            tolerance,
            convention,
            output_dir,
            fixed_points,
            singular_points
        );
        self
    }

    pub fn validate(self) -> Result<RunConfig, CliError> {
        let bad = |key: &str, msg: String| CliError::Config(format!("{key}: {msg}"));
        let command = self.command.ok_or_else(|| {
            bad(
                "command",
                "missing; valid commands are xi, eta, partition, gr, lefschetz, report".into(),
            )
        })?;
        let s_grid = self.s_grid.unwrap_or_else(|| match command {
            Command::Xi | Command::Report => HEAT_S_GRID.to_vec(),
            _ => DEFAULT_S_GRID.to_vec(),
        });
        validate_grid(&s_grid).map_err(|e| bad("s_grid", e.to_string()))?;
        let positive_usize = |key: &str, v: Option<usize>, default: usize| match v {
            Some(0) => Err(bad(key, "must be positive".into())),
            Some(x) => Ok(x),
            None => Ok(default),
        };
        let positive_f64 = |key: &str, v: Option<f64>, default: f64| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(bad(key, "must be positive".into())),
            Some(x) => Ok(x),
            None => Ok(default),
        };
        if let Some(a) = &self.alpha {
            parse_alpha(&a.0).map_err(|e| bad("alpha", strip_invalid(e)))?;
        }
        if let Some(0) = self.n {
            return Err(bad("n", "must be positive".into()));
        }
        if let Some(0) = self.k {
            return Err(bad("k", "must be positive".into()));
        }
        let config = RunConfig {
            command,
            model: self.model,
            n: self.n,
            alpha: self.alpha.map(|a| a.0),
            k: self.k,
            weights: self.weights,
            twist: self.twist.unwrap_or(Twist::Dolbeault),
            angles: self.angles.unwrap_or_default(),
            phi: self.phi,
            predomain: self.predomain,
            predomain_im: self.predomain_im,
            s_grid,
            cutoff: positive_usize("cutoff", self.cutoff, DEFAULT_CUTOFF)?,
            levels: positive_usize("levels", self.levels, DEFAULT_LEVELS)?,
            per_index: positive_usize("per_index", self.per_index, DEFAULT_PER_INDEX)?,
            crosscheck_s: positive_f64("crosscheck_s", self.crosscheck_s, DEFAULT_CROSSCHECK_S)?,
            tolerance: positive_f64("tolerance", self.tolerance, DEFAULT_TOLERANCE)?,
            convention: self.convention.unwrap_or(L2Convention::TheoremA),
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from(".")),
            fixed_points: self.fixed_points.unwrap_or_default(),
            singular_points: self.singular_points.unwrap_or_default(),
        };
        config.check_command_keys()?;
        Ok(config)
    }
}

fn strip_invalid(e: crate::Error) -> String {
    match e {
        crate::Error::Invalid(m) => m,
        other => other.to_string(),
    }
}

/// A validated run, with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<ModelKind>,
    pub n: Option<usize>,
    pub alpha: Option<String>,
    pub k: Option<u32>,
    pub weights: Option<Vec<i64>>,
    pub twist: Twist,
    pub angles: Vec<f64>,
    pub phi: Option<f64>,
    pub predomain: Option<Vec<f64>>,
    pub predomain_im: Option<Vec<f64>>,
    pub s_grid: Vec<f64>,
    pub cutoff: usize,
    pub levels: usize,
    pub per_index: usize,
    pub crosscheck_s: f64,
    pub tolerance: f64,
    pub convention: L2Convention,
    pub output_dir: PathBuf,
    pub fixed_points: Vec<FixedPointSpec>,
    pub singular_points: Vec<SingularSpec>,
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    RawConfig::from_path(path)?.validate()
}

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn build_model(
    kind: ModelKind,
    n: Option<usize>,
    alpha: Option<&str>,
    k: Option<u32>,
    weights: Option<&[i64]>,
    twist: Twist,
) -> Result<ConeModel, CliError> {
    let model = match kind {
        ModelKind::FlatCn => ConeModel::flat(
            n.ok_or_else(|| cfg_err("n", "required for flat_cn"))?,
            twist,
        ),
        ModelKind::Circle => {
            let a = alpha.ok_or_else(|| cfg_err("alpha", "required for circle"))?;
            if twist == Twist::Spin {
                return Err(cfg_err(
                    "twist",
                    "spin is only declared for flat_cn and quadric",
                ));
            }
            ConeModel::circle(parse_alpha(a).map_err(|e| cfg_err("alpha", strip_invalid(e)))?)
        }
        ModelKind::Quadric => ConeModel::quadric(twist),
        ModelKind::Cyclic => {
            if twist == Twist::Spin {
                return Err(cfg_err(
                    "twist",
                    "spin is only declared for flat_cn and quadric",
                ));
            }
            ConeModel::cyclic(
                k.ok_or_else(|| cfg_err("k", "required for cyclic"))?,
                weights
                    .ok_or_else(|| cfg_err("weights", "required for cyclic"))?
                    .to_vec(),
            )
        }
    };
    model.map_err(|e| cfg_err("model", strip_invalid(e)))
}

fn predomain_span(re: &[f64], im: Option<&[f64]>) -> Result<Vec<Vec<Complex64>>, CliError> {
    let im = im.unwrap_or(&[]);
    if im.len() > re.len() {
        return Err(cfg_err("predomain_im", "longer than predomain"));
    }
    let v = re
        .iter()
        .enumerate()
        .map(|(i, r)| Complex64::new(*r, im.get(i).copied().unwrap_or(0.0)))
        .collect();
    Ok(vec![v])
}

impl RunConfig {
    fn check_command_keys(&self) -> Result<(), CliError> {
        match self.command {
            Command::Xi | Command::Report => {
                self.cone_model()?;
                self.element()?;
            }
            Command::Eta => {
                if self.angles.is_empty() {
                    return Err(cfg_err("angles", "required for eta"));
                }
            }
            Command::Partition => {
                self.alpha()?;
                self.rotation()?;
            }
            Command::Gr => {
                self.alpha()?;
                self.rotation()?;
                self.predomain()?;
            }
            Command::Lefschetz => {
                self.global_model()?;
                if self.angles.is_empty() && self.phi.is_none() {
                    return Err(cfg_err("angles", "required for lefschetz"));
                }
            }
        }
        Ok(())
    }

    pub fn cone_model(&self) -> Result<ConeModel, CliError> {
        let kind = self
            .model
            .ok_or_else(|| cfg_err("model", "required; one of flat_cn, circle, quadric, cyclic"))?;
        build_model(
            kind,
            self.n,
            self.alpha.as_deref(),
            self.k,
            self.weights.as_deref(),
            self.twist,
        )
    }

    pub fn alpha(&self) -> Result<Rational, CliError> {
        let a = self
            .alpha
            .as_deref()
            .ok_or_else(|| cfg_err("alpha", "required"))?;
        parse_alpha(a).map_err(|e| cfg_err("alpha", strip_invalid(e)))
    }

    /// The group element; `phi` stands in for a single angle.
    pub fn element(&self) -> Result<TorusElement, CliError> {
        let angles = match (self.angles.is_empty(), self.phi) {
            (true, Some(phi)) => vec![phi],
            _ => self.angles.clone(),
        };
        if angles.is_empty() {
            return Err(cfg_err("angles", "required"));
        }
        TorusElement::new(angles).map_err(|e| cfg_err("angles", e))
    }

    pub fn rotation(&self) -> Result<f64, CliError> {
        match (self.phi, self.angles.as_slice()) {
            (Some(phi), _) => Ok(phi),
            (None, [phi]) => Ok(*phi),
            _ => Err(cfg_err("phi", "required (a single rotation angle)")),
        }
    }

    pub fn predomain(&self) -> Result<Predomain, CliError> {
        let alpha = self.alpha()?;
        match &self.predomain {
            None => Predomain::minimal(alpha).map_err(|e| cfg_err("predomain", e)),
            Some(re) => Predomain::new(alpha, predomain_span(re, self.predomain_im.as_deref())?)
                .map_err(|e| cfg_err("predomain", e)),
        }
    }

    /// Explicit fixed/singular points if given, otherwise the built-in
    /// global model for `model` (quadric, or the disc for circle α = 1).
    pub fn global_model(&self) -> Result<GlobalModel, CliError> {
        if !self.fixed_points.is_empty() || !self.singular_points.is_empty() {
            let fixed_points = self
                .fixed_points
                .iter()
                .map(|f| FixedPointDatum {
                    weights: f
                        .weights
                        .iter()
                        .map(|w| HalfIntMonomial::integer(Complex64::new(1.0, 0.0), w))
                        .collect(),
                    twist: self.twist,
                    label: f.label.clone(),
                })
                .collect();
            let singular_points = self
                .singular_points
                .iter()
                .map(|p| {
                    let model = build_model(
                        p.model,
                        p.n,
                        p.alpha.as_ref().map(|a| a.0.as_str()),
                        p.k,
                        p.weights.as_deref(),
                        self.twist,
                    )?;
                    let predomain = match (&p.predomain, &p.alpha) {
                        (None, _) => None,
                        (Some(re), Some(a)) => {
                            let alpha = parse_alpha(&a.0)
                                .map_err(|e| cfg_err("alpha", strip_invalid(e)))?;
                            Some(
                                Predomain::new(
                                    alpha,
                                    predomain_span(re, p.predomain_im.as_deref())?,
                                )
                                .map_err(|e| cfg_err("predomain", e))?,
                            )
                        }
                        (Some(_), None) => {
                            return Err(cfg_err("predomain", "needs the circle alpha"))
                        }
                    };
                    Ok(SingularPoint {
                        label: p.label.clone(),
                        model,
                        predomain,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            return Ok(GlobalModel {
                fixed_points,
                singular_points,
                expected_total: None,
            });
        }
        match self.model {
            Some(ModelKind::Quadric) => quadric_global(self.twist).map_err(|e| cfg_err("model", e)),
            Some(ModelKind::Circle) if self.alpha()? == Rational::from_integer(1) => {
                disc_as_cone().map_err(|e| cfg_err("model", e))
            }
            _ => Err(cfg_err(
                "model",
                "lefschetz needs model = quadric, circle with alpha = 1, or explicit fixed_points/singular_points",
            )),
        }
    }
}
