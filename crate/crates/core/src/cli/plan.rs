//! Experiment plans: a JSON document naming the set, exponents, degree range
//! and solver settings. Parsing collects every problem before giving up.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fekete::{Solver, SolverOptions, DEFAULT_BRUTE_BUDGET, DEFAULT_REFINE_ROUNDS};
use crate::geometry::{CompactSetModel, SampleGrid, UpcDescriptor};
use crate::measures::DEFAULT_DICTIONARY_SIZE;
use crate::point::Point;
use crate::polyspace::Weight;

/// Inclusive degree range. Written as `"2..12"`, `[2, 12]` or
/// `{"from": 2, "to": 12}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeRange {
    pub from: usize,
    pub to: usize,
}

impl DegreeRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.from..=self.to
    }

    pub fn len(&self) -> usize {
        (self.to + 1).saturating_sub(self.from)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<'de> Deserialize<'de> for DegreeRange {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Doc {
            Text(String),
            Pair([usize; 2]),
            Fields { from: usize, to: usize },
        }
        match Doc::deserialize(de)? {
            Doc::Pair([from, to]) | Doc::Fields { from, to } => Ok(DegreeRange { from, to }),
            Doc::Text(s) => {
                let parse = |t: &str| t.trim().parse::<usize>().map_err(serde::de::Error::custom);
                let (a, b) = s
                    .split_once("..=")
                    .or_else(|| s.split_once(".."))
                    .ok_or_else(|| serde::de::Error::custom(format!("expected `from..to`, got {s:?}")))?;
                Ok(DegreeRange {
                    from: parse(a)?,
                    to: parse(b)?,
                })
            }
        }
    }
}

/// Reference measure the Fekete measures are compared against.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// The equilibrium measure in closed form (interval, disk, circle).
    #[default]
    ClosedForm,
    /// A degree-`degree` Fekete measure computed on the fly.
    Surrogate { degree: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `φ(x) = Σ c_k Re x_k`.
    Linear {
        coefficients: Vec<f64>,
    },
}

impl WeightSpec {
    pub fn to_weight(&self) -> Weight {
        match self {
            WeightSpec::Zero => Weight::Zero,
            WeightSpec::Constant { value } => Weight::Constant(*value),
            WeightSpec::Linear { coefficients } => Weight::Linear(coefficients.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            WeightSpec::Zero => true,
            WeightSpec::Constant { value } => *value == 0.0,
            WeightSpec::Linear { coefficients } => coefficients.iter().all(|&c| c == 0.0),
        }
    }
}

/// Inputs of the `extremal`, `hcp` and `validate-upc` commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// Evaluation points for extremal brackets, each a list of `[re, im]`.
    #[serde(default)]
    pub points: Vec<Point>,
    /// HCP anchor; defaults to the lower corner of the bounding box.
    #[serde(default)]
    pub anchor: Option<Point>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Degree for `extremal`/`hcp`; defaults to the top of the range.
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub grid: SampleGrid,
}

fn default_radii() -> Vec<f64> {
    vec![0.5, 1.0]
}

/// Eight log-spaced values from 1e-3 to 1e-1.
fn default_deltas() -> Vec<f64> {
    (0..8).map(|k| 10f64.powf(-3.0 + 2.0 * k as f64 / 7.0)).collect()
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            points: Vec::new(),
            anchor: None,
            radii: default_radii(),
            deltas: default_deltas(),
            degree: None,
            grid: SampleGrid::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentPlan {
    pub set: CompactSetModel,
    pub upc: Option<UpcDescriptor>,
    pub gamma: f64,
    pub alpha: f64,
    pub degrees: DegreeRange,
    pub solver: Solver,
    pub mesh_density: f64,
    /// Fixed mesh size (intervals: uniform grid, circles: roots of unity)
    /// used for every degree instead of the density rule.
    pub mesh_points: Option<usize>,
    pub reference: ReferenceSpec,
    pub output_dir: String,
    pub dictionary_size: usize,
    pub weight: WeightSpec,
    /// Weight scale `s`; `None` means `s = d` at degree `d`.
    pub weight_scale: Option<f64>,
    pub refine_rounds: usize,
    pub brute_budget: u64,
    pub probe: ProbeSpec,
}

const KEYS: &[&str] = &[
    "set",
    "upc",
    "gamma",
    "alpha",
    "degrees",
    "solver",
    "mesh_density",
    "mesh_points",
    "reference",
    "output_dir",
    "dictionary_size",
    "weight",
    "weight_scale",
    "refine_rounds",
    "brute_budget",
    "probe",
];

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    errors: Vec<String>,
}

impl Fields<'_> {
    fn get<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        let v = self.obj.get(key)?;
        match serde_json::from_value::<T>(v.clone()) {
            Ok(t) => Some(t),
            Err(e) => {
                self.errors.push(format!("`{key}`: {e}"));
                None
            }
        }
    }

    fn or<T: DeserializeOwned>(&mut self, key: &str, default: T) -> Option<T> {
        if self.obj.contains_key(key) {
            self.get(key)
        } else {
            Some(default)
        }
    }

    fn required<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        if !self.obj.contains_key(key) {
            self.errors.push(format!("missing required key `{key}`"));
            return None;
        }
        self.get(key)
    }
}

/// Parses and validates a plan document. Every problem found is reported.
pub fn parse_plan(doc: &str) -> Result<ExperimentPlan> {
    let value: Value = serde_json::from_str(doc).map_err(|e| Error::Plan(vec![format!("not valid JSON: {e}")]))?;
    plan_from_value(&value)
}

pub fn plan_from_value(value: &Value) -> Result<ExperimentPlan> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Plan(vec!["plan must be a JSON object".into()]))?;
    let mut f = Fields {
        obj,
        errors: obj
            .keys()
            .filter(|k| !KEYS.contains(&k.as_str()))
            .map(|k| format!("unknown key `{k}`"))
            .collect(),
    };
    let set = f.required::<CompactSetModel>("set");
    let upc = f.or::<Option<UpcDescriptor>>("upc", None);
    let gamma = f.or("gamma", 1.0);
    let alpha = f.or("alpha", 1.0);
    let degrees = f.required::<DegreeRange>("degrees");
    let solver = f.or("solver", Solver::default());
    let mesh_density = f.or("mesh_density", 1.0);
    let mesh_points = f.or::<Option<usize>>("mesh_points", None);
    let reference = f.or("reference", ReferenceSpec::default());
    let output_dir = f.or("output_dir", "out".to_string());
    let dictionary_size = f.or("dictionary_size", DEFAULT_DICTIONARY_SIZE);
    let weight = f.or("weight", WeightSpec::default());
    let weight_scale = f.or::<Option<f64>>("weight_scale", None);
    let refine_rounds = f.or("refine_rounds", DEFAULT_REFINE_ROUNDS);
    let brute_budget = f.or("brute_budget", DEFAULT_BRUTE_BUDGET);
    let probe = f.or("probe", ProbeSpec::default());
    let mut errors = f.errors;

    // stop before range checks if any field failed to parse
    let (
        Some(set),
        Some(upc),
        Some(gamma),
        Some(alpha),
        Some(degrees),
        Some(solver),
        Some(mesh_density),
        Some(mesh_points),
        Some(reference),
        Some(output_dir),
        Some(dictionary_size),
        Some(weight),
        Some(weight_scale),
        Some(refine_rounds),
        Some(brute_budget),
        Some(probe),
    ) = (
        set,
        upc,
        gamma,
        alpha,
        degrees,
        solver,
        mesh_density,
        mesh_points,
        reference,
        output_dir,
        dictionary_size,
        weight,
        weight_scale,
        refine_rounds,
        brute_budget,
        probe,
    )
    else {
        return Err(Error::Plan(errors));
    };
    let plan = ExperimentPlan {
        set,
        upc,
        gamma,
        alpha,
        degrees,
        solver,
        mesh_density,
        mesh_points,
        reference,
        output_dir,
        dictionary_size,
        weight,
        weight_scale,
        refine_rounds,
        brute_budget,
        probe,
    };
    errors.extend(plan.range_errors());
    if errors.is_empty() {
        Ok(plan)
    } else {
        Err(Error::Plan(errors))
    }
}

impl ExperimentPlan {
    /// Minimal plan with every optional field at its default.
    pub fn new(set: CompactSetModel, degrees: DegreeRange) -> Self {
        ExperimentPlan {
            set,
            upc: None,
            gamma: 1.0,
            alpha: 1.0,
            degrees,
            solver: Solver::default(),
            mesh_density: 1.0,
            mesh_points: None,
            reference: ReferenceSpec::default(),
            output_dir: "out".into(),
            dictionary_size: DEFAULT_DICTIONARY_SIZE,
            weight: WeightSpec::default(),
            weight_scale: None,
            refine_rounds: DEFAULT_REFINE_ROUNDS,
            brute_budget: DEFAULT_BRUTE_BUDGET,
            probe: ProbeSpec::default(),
        }
    }

    fn range_errors(&self) -> Vec<String> {
        let mut e = Vec::new();
        e.extend(self.set.validate().into_iter().map(|m| format!("`set`: {m}")));
        if let Some(u) = &self.upc {
            e.extend(u.validate_shape().into_iter().map(|m| format!("`upc`: {m}")));
            if u.dim() != self.set.dim() {
                e.push(format!("`upc`: dimension {} does not match the set ({})", u.dim(), self.set.dim()));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 2.0) {
            e.push(format!("γ must lie in (0,2], got {}", self.gamma));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            e.push(format!("α must lie in (0,1], got {}", self.alpha));
        }
        if self.degrees.is_empty() {
            e.push(format!("empty degree range {}..{}", self.degrees.from, self.degrees.to));
        }
        if self.degrees.from < 1 {
            e.push("degrees must be >= 1".into());
        }
        if !(self.mesh_density >= 1.0 && self.mesh_density.is_finite()) {
            e.push(format!("mesh_density must lie in [1, ∞), got {}", self.mesh_density));
        }
        if let Some(k) = self.mesh_points {
            if !matches!(self.set, CompactSetModel::Interval { .. } | CompactSetModel::Circle { .. }) {
                e.push(format!("mesh_points is only supported for interval and circle sets, not {}", self.set.name()));
            }
            if k < 2 {
                e.push(format!("mesh_points must be >= 2, got {k}"));
            }
        }
        if let ReferenceSpec::Surrogate { degree } = self.reference {
            if degree < 4 * self.degrees.to {
                e.push(format!(
                    "surrogate reference degree must be >= 4 × the largest degree ({}), got {degree}",
                    4 * self.degrees.to
                ));
            }
        }
        if self.dictionary_size < 1 {
            e.push("dictionary_size must be >= 1".into());
        }
        if let WeightSpec::Linear { coefficients } = &self.weight {
            if coefficients.len() != self.set.dim() {
                e.push(format!(
                    "`weight`: {} coefficients for a set of dimension {}",
                    coefficients.len(),
                    self.set.dim()
                ));
            }
        }
        let finite = match &self.weight {
            WeightSpec::Zero => true,
            WeightSpec::Constant { value } => value.is_finite(),
            WeightSpec::Linear { coefficients } => coefficients.iter().all(|c| c.is_finite()),
        };
        if !finite {
            e.push("`weight`: coefficients must be finite".into());
        }
        if let Some(s) = self.weight_scale {
            if !(s >= 0.0 && s.is_finite()) {
                e.push(format!("weight_scale must lie in [0, ∞), got {s}"));
            }
        }
        let p = &self.probe;
        if p.radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            e.push("probe radii must be positive".into());
        }
        if p.deltas.is_empty() || p.deltas.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
            e.push("probe deltas must be non-empty and lie in (0, 1]".into());
        }
        if p.degree == Some(0) {
            e.push("probe degree must be >= 1".into());
        }
        let n = self.set.dim();
        for z in p.points.iter().chain(&p.anchor) {
            if z.dim() != n {
                e.push(format!("probe point {z} has dimension {}, set has {n}", z.dim()));
            }
        }
        if p.grid.t_count < 2 || p.grid.u_count < 1 {
            e.push("probe grid needs t_count >= 2 and u_count >= 1".into());
        }
        e
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            refine_rounds: self.refine_rounds,
            brute_budget: self.brute_budget,
        }
    }

    /// The plan with every default spelled out, keys sorted.
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("plan serializes");
        serde_json::to_string(&sorted(v)).expect("value serializes")
    }

    /// First 16 hex digits of the SHA-256 of [`canonical_json`](Self::canonical_json).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().map(|(k, v)| (k, sorted(v))).collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}
