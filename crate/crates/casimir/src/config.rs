//! Run configuration: a flat, sectioned key=value text format.
//!
//! Sections: `[geometry]`, `[thermal]`, `[quadrature]`, `[sweep]`,
//! `[output]`, and one `[material.<name>]` per custom material. Every field
//! has a default, so an empty file describes the reference apparatus; a
//! minimal config typically sets only the substrates. `#` starts a comment.
//!
//! Materials are referenced by name. The registry starts with built-ins
//! `vacuum`, `au`, `si` and `si_c`, any of which a `[material.*]` section may
//! shadow. Table CSV paths are resolved relative to the config file.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::lifshitz::{QuadratureSpec, ThermalSpec};
use crate::materials::{
    conductive_silicon, gold, silicon, DispersionModel, LowFreqTail, MaterialError, OpticalTable,
    Prescription,
};
use crate::pfa::{ApparatusGeometry, StepSide};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{message}")]
    Invalid { message: String },
    #[error("material '{name}': {source}")]
    Material {
        name: String,
        #[source]
        source: MaterialError,
    },
}

fn at_line(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line { line, message: message.into() }
}

/// Separation grid of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub a_min: f64,
    pub a_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl SweepGrid {
    /// The separations, endpoints exact, identical on every call.
    pub fn separations(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.a_min;
                }
                if i == n - 1 {
                    return self.a_max;
                }
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.a_min * (1.0 - t) + self.a_max * t,
                    Spacing::Log => {
                        (self.a_min.ln() * (1.0 - t) + self.a_max.ln() * t).exp()
                    }
                }
            })
            .collect()
    }
}

/// Everything a run needs: apparatus, numerics, grid, output, materials.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: ApparatusGeometry,
    pub temperature: f64,
    pub matsubara_rel_tol: f64,
    pub matsubara_min_terms: usize,
    pub matsubara_max_terms: usize,
    pub quadrature: QuadratureSpec,
    pub sweep: SweepGrid,
    pub output_path: PathBuf,
    /// Sorted by name so derived outputs have a stable column order.
    pub materials: BTreeMap<String, Arc<DispersionModel>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base_dir)
    }

    /// Builds the per-prescription thermal spec for this run.
    pub fn thermal_spec(&self, prescription: Prescription) -> ThermalSpec {
        let mut spec = ThermalSpec::new(self.temperature, prescription);
        spec.matsubara_rel_tol = self.matsubara_rel_tol;
        spec.matsubara_min_terms = self.matsubara_min_terms;
        spec.matsubara_max_terms = self.matsubara_max_terms;
        spec
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut sections = split_sections(text)?;

        let materials = resolve_materials(&mut sections, base_dir)?;

        let mut geometry = ApparatusGeometry::default();
        if let Some(mut fields) = sections.remove("geometry") {
            geometry = ApparatusGeometry {
                sphere_radius: fields.take_f64("sphere_radius", geometry.sphere_radius)?,
                sphere_coating: fields.take_material("sphere_coating", &materials, geometry.sphere_coating)?,
                substrate_si: fields.take_material("substrate_si", &materials, geometry.substrate_si)?,
                substrate_au: fields.take_material("substrate_au", &materials, geometry.substrate_au)?,
                overlayer_material: fields.take_material("overlayer_material", &materials, geometry.overlayer_material)?,
                overlayer_thickness_si_side: fields
                    .take_f64("overlayer_thickness_si_side", geometry.overlayer_thickness_si_side)?,
                overlayer_thickness_au_side: fields
                    .take_f64("overlayer_thickness_au_side", geometry.overlayer_thickness_au_side)?,
                step_height: fields.take_f64("step_height", geometry.step_height)?,
                step_side: fields.take_step_side("step_side", geometry.step_side)?,
            };
            fields.finish()?;
        }

        let mut temperature = 300.0;
        let mut matsubara_rel_tol = 1e-10;
        let mut matsubara_min_terms = 10;
        let mut matsubara_max_terms = 100_000;
        if let Some(mut fields) = sections.remove("thermal") {
            temperature = fields.take_f64("temperature", temperature)?;
            matsubara_rel_tol = fields.take_f64("matsubara_rel_tol", matsubara_rel_tol)?;
            matsubara_min_terms = fields.take_usize("matsubara_min_terms", matsubara_min_terms)?;
            matsubara_max_terms = fields.take_usize("matsubara_max_terms", matsubara_max_terms)?;
            fields.finish()?;
        }

        let mut quadrature = QuadratureSpec::default();
        if let Some(mut fields) = sections.remove("quadrature") {
            quadrature.rel_tol = fields.take_f64("rel_tol", quadrature.rel_tol)?;
            quadrature.abs_tol = fields.take_f64("abs_tol", quadrature.abs_tol)?;
            quadrature.max_subdivisions =
                fields.take_usize("max_subdivisions", quadrature.max_subdivisions as usize)? as u32;
            fields.finish()?;
        }

        let mut sweep =
            SweepGrid { a_min: 1.0e-6, a_max: 6.0e-6, points: 26, spacing: Spacing::Linear };
        if let Some(mut fields) = sections.remove("sweep") {
            sweep.a_min = fields.take_f64("a_min", sweep.a_min)?;
            sweep.a_max = fields.take_f64("a_max", sweep.a_max)?;
            sweep.points = fields.take_usize("points", sweep.points)?;
            sweep.spacing = fields.take_spacing("spacing", sweep.spacing)?;
            fields.finish()?;
        }

        let mut output_path = PathBuf::from("sweep.csv");
        if let Some(mut fields) = sections.remove("output") {
            if let Some(entry) = fields.take("path") {
                output_path = PathBuf::from(entry.value);
            }
            fields.finish()?;
        }

        if let Some(stray) = sections.into_keys().next() {
            return Err(ConfigError::Invalid { message: format!("unknown section [{stray}]") });
        }

        if !(sweep.a_min > 0.0) {
            return Err(ConfigError::Invalid {
                message: format!("sweep a_min must be positive, got {:e}", sweep.a_min),
            });
        }
        if !(sweep.a_max > sweep.a_min) {
            return Err(ConfigError::Invalid {
                message: format!(
                    "sweep needs a_max > a_min, got {:e} and {:e}",
                    sweep.a_min, sweep.a_max
                ),
            });
        }
        if sweep.points < 2 {
            return Err(ConfigError::Invalid {
                message: format!("sweep needs at least 2 points, got {}", sweep.points),
            });
        }

        Ok(Self {
            geometry,
            temperature,
            matsubara_rel_tol,
            matsubara_min_terms,
            matsubara_max_terms,
            quadrature,
            sweep,
            output_path,
            materials,
        })
    }
}

#[derive(Debug, Clone)]
struct RawEntry {
    line: usize,
    value: String,
}

#[derive(Debug, Default)]
struct Fields {
    section: String,
    entries: HashMap<String, RawEntry>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<RawEntry> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(entry) => entry.value.trim().parse().map_err(|_| {
                at_line(entry.line, format!("field '{key}' in [{}]: not a number: '{}'", self.section, entry.value))
            }),
        }
    }

    fn take_usize(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(entry) => entry.value.trim().parse().map_err(|_| {
                at_line(entry.line, format!("field '{key}' in [{}]: not a count: '{}'", self.section, entry.value))
            }),
        }
    }

    fn take_spacing(&mut self, key: &str, default: Spacing) -> Result<Spacing, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(entry) => match entry.value.trim() {
                "linear" => Ok(Spacing::Linear),
                "log" => Ok(Spacing::Log),
                other => Err(at_line(
                    entry.line,
                    format!("field '{key}': expected 'linear' or 'log', got '{other}'"),
                )),
            },
        }
    }

    fn take_step_side(&mut self, key: &str, default: StepSide) -> Result<StepSide, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(entry) => match entry.value.trim() {
                "si" => Ok(StepSide::Si),
                "au" => Ok(StepSide::Au),
                other => Err(at_line(
                    entry.line,
                    format!("field '{key}': expected 'si' or 'au', got '{other}'"),
                )),
            },
        }
    }

    fn take_material(
        &mut self,
        key: &str,
        materials: &BTreeMap<String, Arc<DispersionModel>>,
        default: Arc<DispersionModel>,
    ) -> Result<Arc<DispersionModel>, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(entry) => {
                let name = entry.value.trim();
                materials.get(name).cloned().ok_or_else(|| {
                    at_line(entry.line, format!("field '{key}': unknown material '{name}'"))
                })
            }
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some((key, entry)) = self.entries.into_iter().next() {
            return Err(at_line(
                entry.line,
                format!("unknown field '{key}' in [{}]", self.section),
            ));
        }
        Ok(())
    }
}

fn split_sections(text: &str) -> Result<HashMap<String, Fields>, ConfigError> {
    let mut sections: HashMap<String, Fields> = HashMap::new();
    let mut current: Option<String> = None;

    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| at_line(line_no, format!("unterminated section header '{line}'")))?
                .trim()
                .to_string();
            if name.is_empty() {
                return Err(at_line(line_no, "empty section name"));
            }
            let known = matches!(
                name.as_str(),
                "geometry" | "thermal" | "quadrature" | "sweep" | "output"
            ) || name.starts_with("material.");
            if !known {
                return Err(at_line(line_no, format!("unknown section [{name}]")));
            }
            sections
                .entry(name.clone())
                .or_insert_with(|| Fields { section: name.clone(), ..Fields::default() });
            current = Some(name);
            continue;
        }

        let (key, value) = line.split_once('=').ok_or_else(|| {
            at_line(line_no, format!("expected 'key = value' or '[section]', got '{line}'"))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(at_line(line_no, "missing key before '='"));
        }
        let section = current
            .as_ref()
            .ok_or_else(|| at_line(line_no, format!("field '{key}' appears before any [section]")))?;
        let fields = sections.get_mut(section).expect("section created on header");
        if let Some(previous) = fields.entries.insert(key.clone(), RawEntry { line: line_no, value })
        {
            return Err(at_line(
                line_no,
                format!(
                    "duplicate field '{key}' in [{section}] (first set on line {})",
                    previous.line
                ),
            ));
        }
    }

    Ok(sections)
}

enum MaterialRecipe {
    Ready(Arc<DispersionModel>),
    Composite { base: String, addition: String, line: usize },
}

fn resolve_materials(
    sections: &mut HashMap<String, Fields>,
    base_dir: &Path,
) -> Result<BTreeMap<String, Arc<DispersionModel>>, ConfigError> {
    let mut recipes: BTreeMap<String, MaterialRecipe> = BTreeMap::new();
    recipes.insert("vacuum".into(), MaterialRecipe::Ready(Arc::new(DispersionModel::vacuum())));
    recipes.insert("au".into(), MaterialRecipe::Ready(Arc::new(gold())));
    recipes.insert("si".into(), MaterialRecipe::Ready(Arc::new(silicon())));
    recipes.insert("si_c".into(), MaterialRecipe::Ready(Arc::new(conductive_silicon())));

    let section_names: Vec<String> = sections
        .keys()
        .filter(|name| name.starts_with("material."))
        .cloned()
        .collect();
    for section_name in section_names {
        let mut fields = sections.remove(&section_name).expect("listed above");
        let name = section_name.trim_start_matches("material.").to_string();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::Invalid {
                message: format!(
                    "material name '{name}' must be non-empty and use only letters, digits and '_'"
                ),
            });
        }
        let recipe = parse_material(&name, &mut fields, base_dir)?;
        recipes.insert(name, recipe);
    }

    let mut resolved = BTreeMap::new();
    let names: Vec<String> = recipes.keys().cloned().collect();
    for name in names {
        let mut visiting = HashSet::new();
        resolve_one(&name, &recipes, &mut resolved, &mut visiting)?;
    }
    Ok(resolved)
}

fn resolve_one(
    name: &str,
    recipes: &BTreeMap<String, MaterialRecipe>,
    resolved: &mut BTreeMap<String, Arc<DispersionModel>>,
    visiting: &mut HashSet<String>,
) -> Result<Arc<DispersionModel>, ConfigError> {
    if let Some(model) = resolved.get(name) {
        return Ok(model.clone());
    }
    if !visiting.insert(name.to_string()) {
        return Err(ConfigError::Invalid {
            message: format!("material '{name}' is defined in terms of itself"),
        });
    }
    let recipe = recipes.get(name).ok_or_else(|| ConfigError::Invalid {
        message: format!("unknown material '{name}'"),
    })?;
    let model = match recipe {
        MaterialRecipe::Ready(model) => model.clone(),
        MaterialRecipe::Composite { base, addition, line } => {
            let base_model = resolve_one(base, recipes, resolved, visiting)
                .map_err(|err| reframe_reference(err, *line))?;
            let addition_model = resolve_one(addition, recipes, resolved, visiting)
                .map_err(|err| reframe_reference(err, *line))?;
            Arc::new(DispersionModel::composite(base_model, addition_model))
        }
    };
    visiting.remove(name);
    resolved.insert(name.to_string(), model.clone());
    Ok(model)
}

/// Composite references report the referencing line, not just the bare name.
fn reframe_reference(err: ConfigError, line: usize) -> ConfigError {
    match err {
        ConfigError::Invalid { message } => at_line(line, message),
        other => other,
    }
}

fn parse_material(
    name: &str,
    fields: &mut Fields,
    base_dir: &Path,
) -> Result<MaterialRecipe, ConfigError> {
    let model_entry = fields.take("model").ok_or_else(|| ConfigError::Invalid {
        message: format!("material '{name}' is missing the 'model' field"),
    })?;
    let wrap = |source: MaterialError| ConfigError::Material { name: name.to_string(), source };

    let recipe = match model_entry.value.trim() {
        "vacuum" => MaterialRecipe::Ready(Arc::new(DispersionModel::vacuum())),
        "drude" => {
            let wp = fields.require_f64(name, "plasma_frequency")?;
            let gamma = fields.require_f64(name, "relaxation_frequency")?;
            MaterialRecipe::Ready(Arc::new(DispersionModel::drude(wp, gamma).map_err(wrap)?))
        }
        "plasma" => {
            let wp = fields.require_f64(name, "plasma_frequency")?;
            MaterialRecipe::Ready(Arc::new(DispersionModel::plasma(wp).map_err(wrap)?))
        }
        "oscillator" => {
            let eps_static = fields.require_f64(name, "eps_static")?;
            let eps_high = fields.require_f64(name, "eps_high")?;
            let resonance = fields.require_f64(name, "resonance")?;
            MaterialRecipe::Ready(Arc::new(
                DispersionModel::oscillator(eps_static, eps_high, resonance).map_err(wrap)?,
            ))
        }
        "table" => {
            let csv_entry = fields.take("csv").ok_or_else(|| ConfigError::Invalid {
                message: format!("table material '{name}' is missing the 'csv' field"),
            })?;
            let path = base_dir.join(csv_entry.value.trim());
            let text = std::fs::read_to_string(&path)
                .map_err(|source| ConfigError::Io { path, source })?;

            let low_tail = match fields.take("low_tail") {
                None => LowFreqTail::Zero,
                Some(entry) => match entry.value.trim() {
                    "zero" => LowFreqTail::Zero,
                    "drude" => LowFreqTail::Drude {
                        plasma_frequency: fields.require_f64(name, "tail_plasma_frequency")?,
                        relaxation_frequency: fields.require_f64(name, "tail_relaxation_frequency")?,
                    },
                    other => {
                        return Err(at_line(
                            entry.line,
                            format!("field 'low_tail': expected 'zero' or 'drude', got '{other}'"),
                        ))
                    }
                },
            };
            let high_exponent = fields.take_usize("high_exponent", 3)? as u32;
            let table = OpticalTable::parse_csv(&text, low_tail, high_exponent).map_err(wrap)?;
            MaterialRecipe::Ready(Arc::new(DispersionModel::tabulated(table)))
        }
        "composite" => {
            let base = fields.require_string(name, "base")?;
            let addition = fields.require_string(name, "addition")?;
            MaterialRecipe::Composite { base, addition, line: model_entry.line }
        }
        other => {
            return Err(at_line(
                model_entry.line,
                format!(
                    "material '{name}': unknown model '{other}' \
                     (expected vacuum, drude, plasma, oscillator, table or composite)"
                ),
            ))
        }
    };

    let fields = std::mem::take(fields);
    fields.finish()?;
    Ok(recipe)
}

impl Fields {
    fn require_f64(&mut self, material: &str, key: &str) -> Result<f64, ConfigError> {
        let entry = self.take(key).ok_or_else(|| ConfigError::Invalid {
            message: format!("material '{material}' is missing the '{key}' field"),
        })?;
        entry.value.trim().parse().map_err(|_| {
            at_line(entry.line, format!("field '{key}': not a number: '{}'", entry.value))
        })
    }

    fn require_string(&mut self, material: &str, key: &str) -> Result<String, ConfigError> {
        let entry = self.take(key).ok_or_else(|| ConfigError::Invalid {
            message: format!("material '{material}' is missing the '{key}' field"),
        })?;
        Ok(entry.value.trim().to_string())
    }
}
