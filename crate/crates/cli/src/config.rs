//! Run configuration: a TOML file with `problem`, `weight`, `measure`,
//! `solver` and `output` tables. Flags override file values, the file
//! overrides `QUASILIN_OUT`, and built-in defaults fill the rest.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use quasilin::mesh::MeshConfig;
use quasilin::solver::SolverConfig;
use quasilin::{Gamma, RadonMeasure, Weight};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemTable,
    pub weight: WeightTable,
    pub measure: MeasureTable,
    pub solver: SolverTable,
    pub output: OutputTable,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemTable {
    pub p: f64,
    pub q: f64,
    pub gamma: GammaValue,
}

impl Default for ProblemTable {
    fn default() -> Self {
        ProblemTable {
            p: 2.0,
            q: 0.5,
            gamma: GammaValue::Number(1.0),
        }
    }
}

/// A positive number, or `"inf"`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GammaValue {
    Number(f64),
    Word(String),
}

impl GammaValue {
    pub fn parse(s: &str) -> Result<GammaValue, CliError> {
        match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(GammaValue::Number(v)),
            _ => Ok(GammaValue::Word(s.trim().to_string())),
        }
    }

    pub fn to_gamma(&self) -> Result<Gamma, CliError> {
        match self {
            GammaValue::Number(v) if *v > 0.0 && v.is_finite() => Ok(Gamma::Finite(*v)),
            GammaValue::Word(w) if matches!(w.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") => Ok(Gamma::Infinite),
            other => Err(CliError::validation(format!("config: gamma must be a positive number or \"inf\", got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct WeightTable {
    /// `constant` or `power` (`(1 − |x|)^β`).
    pub family: String,
    pub beta: f64,
}

impl Default for WeightTable {
    fn default() -> Self {
        WeightTable {
            family: "constant".into(),
            beta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureTable {
    /// `[x, mass]` pairs.
    pub atoms: Vec<[f64; 2]>,
    pub density: Option<DensityTable>,
    /// CSV with columns `x, density`, relative to the config file.
    pub tabulated: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityTable {
    /// `constant`, `power`, `exact` or `manufactured`.
    pub family: String,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default)]
    pub alpha: f64,
    /// Exponent of the exact solution `(1 − |x|)^A` for `family = "exact"`.
    #[serde(default)]
    pub a: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverTable {
    pub nodes: usize,
    pub ratio: f64,
    pub tol: f64,
    pub iteration_tol: f64,
    pub max_steps: usize,
    pub max_level: u32,
    pub cap: f64,
}

impl Default for SolverTable {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverTable {
            nodes: s.mesh.nodes,
            ratio: s.mesh.ratio,
            tol: s.tol,
            iteration_tol: 1e-8,
            max_steps: 200,
            max_level: s.max_level,
            cap: s.cap,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputTable {
    pub dir: Option<PathBuf>,
    /// Any of `csv`, `txt`.
    pub formats: Vec<String>,
}

impl Default for OutputTable {
    fn default() -> Self {
        OutputTable {
            dir: None,
            formats: vec!["csv".into(), "txt".into()],
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub gamma: Option<String>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
}

pub const OUT_ENV: &str = "QUASILIN_OUT";

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))
    }

    /// Reads `path` (if any) and applies the overrides. Relative tabulated
    /// paths are resolved against the config file's directory.
    pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<RunConfig, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::validation(format!("config: cannot read {}: {e}", p.display())))?;
                let mut c = RunConfig::from_toml(&text)?;
                if let (Some(t), Some(dir)) = (&c.measure.tabulated, p.parent()) {
                    if t.is_relative() {
                        c.measure.tabulated = Some(dir.join(t));
                    }
                }
                c
            }
            None => RunConfig::default(),
        };
        cfg.apply(ov)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, ov: &Overrides) -> Result<(), CliError> {
        if let Some(d) = &ov.out {
            self.output.dir = Some(d.clone());
        }
        if let Some(t) = ov.tol {
            self.solver.tol = t;
        }
        if let Some(p) = ov.p {
            self.problem.p = p;
        }
        if let Some(q) = ov.q {
            self.problem.q = q;
        }
        if let Some(g) = &ov.gamma {
            self.problem.gamma = GammaValue::parse(g)?;
        }
        if let Some(b) = ov.beta {
            self.weight.beta = b;
            if self.weight.family == "constant" {
                self.weight.family = "power".into();
            }
        }
        if let Some(a) = ov.alpha {
            let c = self.measure.density.as_ref().map_or(1.0, |d| d.c);
            self.measure.density = Some(DensityTable {
                family: "power".into(),
                c,
                alpha: a,
                a: 0.0,
            });
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("quasilin-out"))
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f.eq_ignore_ascii_case(format))
    }

    pub fn gamma(&self) -> Result<Gamma, CliError> {
        self.problem.gamma.to_gamma()
    }

    pub fn build_weight(&self) -> Result<Weight, CliError> {
        let w = match self.weight.family.as_str() {
            "constant" => Weight::constant(),
            "power" => Weight::power(self.weight.beta)?,
            other => return Err(CliError::validation(format!("config: unknown weight family {other:?}"))),
        };
        w.validate_for(self.problem.p)?;
        Ok(w)
    }

    pub fn build_measure(&self) -> Result<RadonMeasure, CliError> {
        let pairs: Vec<(f64, f64)> = self.measure.atoms.iter().map(|a| (a[0], a[1])).collect();
        let mut m = if pairs.is_empty() {
            RadonMeasure::zero()
        } else {
            RadonMeasure::atoms_at(&pairs)?
        };
        if let Some(d) = &self.measure.density {
            let (p, q, beta) = (self.problem.p, self.problem.q, self.weight.beta);
            let part = match d.family.as_str() {
                "constant" => RadonMeasure::constant(d.c)?,
                "power" => RadonMeasure::power(d.alpha, d.c)?,
                "exact" => RadonMeasure::exact_family(p, beta, d.a)?.scale(d.c),
                "manufactured" => RadonMeasure::manufactured(p, q)?.scale(d.c),
                other => return Err(CliError::validation(format!("config: unknown density family {other:?}"))),
            };
            m = m.add(&part);
        }
        if let Some(path) = &self.measure.tabulated {
            m = m.add(&RadonMeasure::tabulated(read_table(path)?)?);
        }
        Ok(m)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let s = &self.solver;
        let cfg = SolverConfig {
            mesh: MeshConfig {
                nodes: s.nodes,
                ratio: s.ratio,
                ..MeshConfig::default()
            },
            tol: s.tol,
            cap: s.cap,
            max_level: s.max_level,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn iteration_config(&self) -> Result<quasilin::sublinear::IterationConfig, CliError> {
        Ok(quasilin::sublinear::IterationConfig {
            solver: self.solver_config()?,
            tol: self.solver.iteration_tol,
            max_steps: self.solver.max_steps,
            keep_iterates: false,
        })
    }
}

/// Two numeric columns, optional header row.
fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::validation(format!("config: cannot read table {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| CliError::validation(format!("config: table {}: {e}", path.display())))?;
        let x = rec.get(0).and_then(|s| s.parse::<f64>().ok());
        let v = rec.get(1).and_then(|s| s.parse::<f64>().ok());
        match (x, v) {
            (Some(x), Some(v)) => rows.push((x, v)),
            _ if i == 0 => continue,
            _ => return Err(CliError::validation(format!("config: table {} row {}: expected two numbers", path.display(), i + 1))),
        }
    }
    Ok(rows)
}
