//! The TOML run-configuration and controller documents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use kmlqg::bench::{BenchmarkSystem, Method};
use kmlqg::geometry::MetricWeights;
use kmlqg::lqg::{Controller, Plant, PlantParts};
use kmlqg::optimizer::{Algorithm, OptimizerConfig};
use kmlqg::Matrix;

use crate::CliError;

/// Row-major nested array.
pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantDoc {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "W")]
    pub w: Rows,
    #[serde(rename = "V")]
    pub v: Rows,
    #[serde(rename = "Q")]
    pub q: Rows,
    #[serde(rename = "R")]
    pub r: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerDoc {
    /// Controller order; checked against `A_K` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(rename = "A_K")]
    pub a_k: Rows,
    #[serde(rename = "B_K")]
    pub b_k: Rows,
    #[serde(rename = "C_K")]
    pub c_k: Rows,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerDoc {
    pub algorithm: Option<String>,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub w3: Option<f64>,
    #[serde(rename = "T")]
    pub max_iters: Option<usize>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub sbar: Option<f64>,
    /// A negative value disables the halting rule.
    pub halt_gap: Option<f64>,
    pub seed: Option<u64>,
    pub perturb_scale: Option<f64>,
    pub certificate: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    pub trace_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
    pub controller_path: Option<PathBuf>,
    /// Record elapsed time in traces; off makes every `wall_ms` zero.
    pub wall_clock: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub name: String,
    #[serde(default)]
    pub provenance: String,
    pub optimal_cost: Option<f64>,
    pub plant: PlantDoc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFamilyDoc {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(default = "default_density")]
    pub density: f64,
    pub seeds: Vec<u64>,
}

fn default_density() -> f64 {
    0.8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareDoc {
    /// Subset of `GD`, `RGD(1,1,1)`, `RGD(1,0,0)`; all three when absent.
    pub methods: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HessianDoc {
    pub step: Option<f64>,
}

/// A whole configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigDocument {
    pub plant: Option<PlantDoc>,
    pub controller: Option<ControllerDoc>,
    pub optimizer: Option<OptimizerDoc>,
    #[serde(default)]
    pub output: OutputDoc,
    #[serde(default)]
    pub systems: Vec<SystemDoc>,
    pub random: Option<RandomFamilyDoc>,
    pub compare: Option<CompareDoc>,
    pub hessian: Option<HessianDoc>,
}

pub fn matrix_from_rows(name: &str, rows: &Rows) -> Result<Matrix, CliError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(CliError::Parse(format!(
            "{name} must be a non-empty array of rows"
        )));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(CliError::Parse(format!(
            "{name} is not rectangular: row {bad} has {} entries, row 0 has {ncols}",
            rows[bad].len()
        )));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Parse(format!("{name} has non-finite entries")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(nrows, ncols, &flat))
}

pub fn rows_from_matrix(m: &Matrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl PlantDoc {
    /// Rectangular, dimensionally consistent parts; the standing assumptions
    /// are not checked here.
    pub fn parts(&self) -> Result<PlantParts, CliError> {
        let parts = PlantParts {
            a: matrix_from_rows("A", &self.a)?,
            b: matrix_from_rows("B", &self.b)?,
            c: matrix_from_rows("C", &self.c)?,
            w: matrix_from_rows("W", &self.w)?,
            v: matrix_from_rows("V", &self.v)?,
            q: matrix_from_rows("Q", &self.q)?,
            r: matrix_from_rows("R", &self.r)?,
        };
        // shape errors surface here, before any assumption is judged
        parts
            .assumptions()
            .map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(parts)
    }

    pub fn plant(&self) -> Result<Plant, CliError> {
        Plant::new(self.parts()?).map_err(CliError::domain)
    }

    pub fn from_plant(plant: &Plant) -> Self {
        let parts = plant.to_parts();
        PlantDoc {
            a: rows_from_matrix(&parts.a),
            b: rows_from_matrix(&parts.b),
            c: rows_from_matrix(&parts.c),
            w: rows_from_matrix(&parts.w),
            v: rows_from_matrix(&parts.v),
            q: rows_from_matrix(&parts.q),
            r: rows_from_matrix(&parts.r),
        }
    }
}

impl ControllerDoc {
    pub fn controller(&self) -> Result<Controller, CliError> {
        let k = Controller::new(
            matrix_from_rows("A_K", &self.a_k)?,
            matrix_from_rows("B_K", &self.b_k)?,
            matrix_from_rows("C_K", &self.c_k)?,
        )
        .map_err(|e| CliError::Parse(e.to_string()))?;
        if let Some(q) = self.q {
            if q != k.order() {
                return Err(CliError::Parse(format!(
                    "q = {q} but A_K is {0}x{0}",
                    k.order()
                )));
            }
        }
        Ok(k)
    }

    pub fn from_controller(k: &Controller) -> Self {
        ControllerDoc {
            q: Some(k.order()),
            a_k: rows_from_matrix(k.a_k()),
            b_k: rows_from_matrix(k.b_k()),
            c_k: rows_from_matrix(k.c_k()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("controller documents always serialize")
    }
}

impl OptimizerDoc {
    pub fn config(&self, wall_clock: bool) -> Result<OptimizerConfig, CliError> {
        let d = OptimizerConfig::default();
        let algorithm = match &self.algorithm {
            Some(s) => s
                .parse::<Algorithm>()
                .map_err(|e| CliError::Parse(e.to_string()))?,
            None => d.algorithm,
        };
        let weights = MetricWeights::new(
            self.w1.unwrap_or(d.weights.w1()),
            self.w2.unwrap_or(d.weights.w2()),
            self.w3.unwrap_or(d.weights.w3()),
        )
        .map_err(|e| CliError::Parse(e.to_string()))?;
        let halt_gap = match self.halt_gap {
            Some(g) if g < 0.0 => None,
            Some(g) => Some(g),
            None => d.halt_gap,
        };
        let config = OptimizerConfig {
            algorithm,
            weights,
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            grad_tol: self.eps.unwrap_or(d.grad_tol),
            armijo: self.gamma.unwrap_or(d.armijo),
            backtrack: self.beta.unwrap_or(d.backtrack),
            initial_step: self.sbar.unwrap_or(d.initial_step),
            halt_gap,
            seed: self.seed.unwrap_or(d.seed),
            perturb_scale: self.perturb_scale.unwrap_or(d.perturb_scale),
            use_certificate: self.certificate.unwrap_or(d.use_certificate),
            record_wall_time: wall_clock,
        };
        config
            .validate()
            .map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(config)
    }
}

impl SystemDoc {
    pub fn system(&self) -> Result<BenchmarkSystem, CliError> {
        let plant = self.plant.plant()?;
        let mut sys = BenchmarkSystem::new(self.name.clone(), plant, self.provenance.clone());
        sys.optimal_cost = self.optimal_cost;
        Ok(sys)
    }
}

pub fn parse_method(label: &str) -> Result<Method, CliError> {
    let compact: String = label.chars().filter(|c| !c.is_whitespace()).collect();
    [Method::GD, Method::RGD_UNIFORM, Method::RGD_DYNAMICS]
        .into_iter()
        .find(|m| m.label().eq_ignore_ascii_case(&compact))
        .ok_or_else(|| CliError::Parse(format!("unknown method '{label}'")))
}

impl RunConfigDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn plant_doc(&self) -> Result<&PlantDoc, CliError> {
        self.plant
            .as_ref()
            .ok_or_else(|| CliError::Parse("missing [plant] section".into()))
    }

    pub fn optimizer_config(
        &self,
        seed_override: Option<u64>,
    ) -> Result<OptimizerConfig, CliError> {
        let wall_clock = self.output.wall_clock.unwrap_or(true);
        let mut config = match &self.optimizer {
            Some(doc) => doc.config(wall_clock)?,
            None => OptimizerConfig {
                record_wall_time: wall_clock,
                ..Default::default()
            },
        };
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCALAR: &str = r#"
[plant]
A = [[-1.0]]
B = [[1.0]]
C = [[1.0]]
W = [[1.0]]
V = [[1.0]]
Q = [[1.0]]
R = [[1.0]]
"#;

    #[test]
    fn scalar_plant_parses() {
        let doc = RunConfigDocument::parse(SCALAR).unwrap();
        let plant = doc.plant_doc().unwrap().plant().unwrap();
        assert_eq!((plant.n(), plant.m(), plant.p()), (1, 1, 1));
        assert_eq!(
            doc.optimizer_config(None).unwrap(),
            OptimizerConfig::default()
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{SCALAR}\n[optimizer]\nalpha = 1.0\n");
        assert!(matches!(
            RunConfigDocument::parse(&text),
            Err(CliError::Parse(_))
        ));
        assert!(matches!(
            RunConfigDocument::parse("[plot]\n"),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn ragged_rows_are_a_parse_error() {
        let text = SCALAR.replace("A = [[-1.0]]", "A = [[-1.0, 0.0], [1.0]]");
        let doc = RunConfigDocument::parse(&text).unwrap();
        assert!(matches!(
            doc.plant_doc().unwrap().parts(),
            Err(CliError::Parse(_))
        ));
        let text = SCALAR.replace("A = [[-1.0]]", "A = [[-1.0, \"x\"]]");
        assert!(matches!(
            RunConfigDocument::parse(&text),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn assumption_violation_is_a_domain_error() {
        let text = SCALAR.replace("W = [[1.0]]", "W = [[-1.0]]");
        let doc = RunConfigDocument::parse(&text).unwrap();
        assert!(matches!(
            doc.plant_doc().unwrap().plant(),
            Err(CliError::Domain(_))
        ));
    }

    #[test]
    fn optimizer_fields_map_onto_config() {
        let text = format!(
            "{SCALAR}\n[optimizer]\nalgorithm = \"GD\"\nT = 5\ngamma = 0.1\nbeta = 0.25\neps = 1e-8\nsbar = 2.0\nhalt_gap = -1\nseed = 9\nw1 = 1.0\nw2 = 0.0\nw3 = 0.0\n"
        );
        let config = RunConfigDocument::parse(&text)
            .unwrap()
            .optimizer_config(Some(4))
            .unwrap();
        assert_eq!(config.algorithm, Algorithm::Gd);
        assert_eq!(config.max_iters, 5);
        assert_eq!(config.armijo, 0.1);
        assert_eq!(config.backtrack, 0.25);
        assert_eq!(config.grad_tol, 1e-8);
        assert_eq!(config.initial_step, 2.0);
        assert_eq!(config.halt_gap, None);
        assert_eq!(config.seed, 4);
        assert_eq!(config.weights, MetricWeights::DYNAMICS_ONLY);
    }

    #[test]
    fn out_of_range_optimizer_values_are_rejected() {
        let text = format!("{SCALAR}\n[optimizer]\nbeta = 1.5\n");
        let doc = RunConfigDocument::parse(&text).unwrap();
        assert!(matches!(
            doc.optimizer_config(None),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn controller_document_round_trips() {
        let k = Controller::new(
            Matrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -2.0]),
            Matrix::from_row_slice(2, 1, &[1.0, 0.25]),
            Matrix::from_row_slice(1, 2, &[0.125, -3.0]),
        )
        .unwrap();
        let text = ControllerDoc::from_controller(&k).to_toml();
        let back: ControllerDoc = toml::from_str(&text).unwrap();
        assert_eq!(back.controller().unwrap(), k);
        let wrong = ControllerDoc { q: Some(3), ..back };
        assert!(wrong.controller().is_err());
    }

    #[test]
    fn method_labels_parse() {
        assert_eq!(parse_method("gd").unwrap(), Method::GD);
        assert_eq!(parse_method("RGD(1, 0, 0)").unwrap(), Method::RGD_DYNAMICS);
        assert!(parse_method("RGD(2,0,0)").is_err());
    }
}
