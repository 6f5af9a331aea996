//! Versioned JSON scenario schema and its validation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::profiles::Profile;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub grid: GridSpec,
    /// Default wavelength (m) for elements that do not set their own.
    pub wavelength: f64,
    pub sources: Vec<LabeledSource>,
    /// Elements of system 1 in propagation order; empty means identity.
    #[serde(default)]
    pub arm1: Vec<ElementConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm2: Option<Vec<ElementConfig>>,
    /// Alternative systems for arm 2, selectable per measurement.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub arm2_variants: BTreeMap<String, Vec<ElementConfig>>,
    /// Weak scatterers embedded in arm 1, added on top of `arm1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatterers: Option<ScattererConfig>,
    pub measurements: Vec<Measurement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub dx: f64,
    #[serde(default)]
    pub center: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledSource {
    pub label: String,
    pub source: SourceSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    SinglePure {
        amplitude: Profile,
    },
    /// Gaussian Schell-model photon: `phi(x) phi*(x') exp(-(x - x')^2 / (2 l^2))`.
    SingleMixed {
        amplitude: Profile,
        coherence_length: f64,
    },
    Factorizable {
        amplitude1: Profile,
        amplitude2: Profile,
    },
    EntangledDelta {
        amplitude: Profile,
    },
    Spdc {
        pump: Profile,
        pm_width: f64,
    },
    /// Correlated pairs with `gamma = |amplitude|^2`, or `gamma = |intensity|`.
    Correlated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude: Option<Profile>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intensity: Option<Profile>,
    },
    Mixture {
        components: Vec<MixtureComponent>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub source: SourceSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementConfig {
    Identity {},
    FreeSpace {
        distance: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        wavelength: Option<f64>,
    },
    ThinLens {
        focal_length: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        wavelength: Option<f64>,
    },
    FourierSystem {
        focal_length: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        wavelength: Option<f64>,
    },
    Mask {
        profile: Profile,
    },
    /// Periodic (circulant) system whose response is `profile` sampled on the
    /// lattice, with the sample nearest the grid center as zero offset.
    ShiftInvariant {
        response: Profile,
    },
    /// Raw impulse response, rows indexing the output (units 1/length).
    Custom {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererConfig {
    pub planes: Vec<ScatteringPlane>,
}

/// One plane of scatterers: `before` maps the source plane to the scattering
/// plane, `after` maps it to the arm 1 detector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringPlane {
    #[serde(default)]
    pub before: Vec<ElementConfig>,
    #[serde(default)]
    pub after: Vec<ElementConfig>,
    pub points: Vec<ScatterPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterPoint {
    pub x: f64,
    /// Complex strength as `[re, im]`.
    pub strength: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    Joint,
    #[serde(rename = "singles_1")]
    Singles1,
    #[serde(rename = "singles_2")]
    Singles2,
    #[serde(rename = "marginal_1")]
    Marginal1,
    #[serde(rename = "marginal_2")]
    Marginal2,
    Schmidt,
    Sample,
    Metrics,
    Distance,
}

impl MeasurementKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementKind::Joint => "joint",
            MeasurementKind::Singles1 => "singles_1",
            MeasurementKind::Singles2 => "singles_2",
            MeasurementKind::Marginal1 => "marginal_1",
            MeasurementKind::Marginal2 => "marginal_2",
            MeasurementKind::Schmidt => "schmidt",
            MeasurementKind::Sample => "sample",
            MeasurementKind::Metrics => "metrics",
            MeasurementKind::Distance => "distance",
        }
    }

    /// One-dimensional densities that metrics and distances can target.
    pub fn is_density(self) -> bool {
        matches!(
            self,
            MeasurementKind::Singles1 | MeasurementKind::Singles2 | MeasurementKind::Marginal1 | MeasurementKind::Marginal2
        )
    }

    fn needs_arm2(self) -> bool {
        !matches!(self, MeasurementKind::Singles1 | MeasurementKind::Schmidt)
    }
}

/// A requested measurement. `source` restricts it to one labeled source
/// (default: every source that supports it); `arm2` selects a variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measurement {
    pub kind: MeasurementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm2: Option<String>,
    /// `sample`: number of draws.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// `sample`: generator seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `metrics` / `distance`: which density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<MeasurementKind>,
    /// `metrics`: half-open index range `[start, end)`; whole grid by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<[usize; 2]>,
    /// `metrics`: key suffix in the summary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// `distance`: label of the reference source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Pgm,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "pgm" => Ok(Format::Pgm),
            "json" => Ok(Format::Json),
            other => Err(Error::validation("format", format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

pub fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Pgm, Format::Json]
}

/// What a source can be asked for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SourceClass {
    Single,
    PureBiphoton,
    Correlated,
    Mixture,
}

impl SourceSpec {
    pub(crate) fn class(&self) -> SourceClass {
        match self {
            SourceSpec::SinglePure { .. } | SourceSpec::SingleMixed { .. } => SourceClass::Single,
            SourceSpec::Factorizable { .. } | SourceSpec::EntangledDelta { .. } | SourceSpec::Spdc { .. } => {
                SourceClass::PureBiphoton
            }
            SourceSpec::Correlated { .. } => SourceClass::Correlated,
            SourceSpec::Mixture { .. } => SourceClass::Mixture,
        }
    }

    fn validate(&self, field: &str, grid: &Grid) -> Result<()> {
        match self {
            SourceSpec::SinglePure { amplitude } | SourceSpec::EntangledDelta { amplitude } => {
                amplitude.validate(&format!("{field}.amplitude"), grid)
            }
            SourceSpec::SingleMixed { amplitude, coherence_length } => {
                amplitude.validate(&format!("{field}.amplitude"), grid)?;
                positive(&format!("{field}.coherence_length"), *coherence_length)
            }
            SourceSpec::Factorizable { amplitude1, amplitude2 } => {
                amplitude1.validate(&format!("{field}.amplitude1"), grid)?;
                amplitude2.validate(&format!("{field}.amplitude2"), grid)
            }
            SourceSpec::Spdc { pump, pm_width } => {
                pump.validate(&format!("{field}.pump"), grid)?;
                positive(&format!("{field}.pm_width"), *pm_width)
            }
            SourceSpec::Correlated { amplitude, intensity } => match (amplitude, intensity) {
                (Some(p), None) => p.validate(&format!("{field}.amplitude"), grid),
                (None, Some(p)) => p.validate(&format!("{field}.intensity"), grid),
                _ => Err(Error::validation(field, "give exactly one of `amplitude` or `intensity`")),
            },
            SourceSpec::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::validation(format!("{field}.components"), "mixture is empty"));
                }
                for (i, c) in components.iter().enumerate() {
                    let f = format!("{field}.components[{i}]");
                    if !(c.weight >= 0.0) || !c.weight.is_finite() {
                        return Err(Error::validation(format!("{f}.weight"), "must be non-negative"));
                    }
                    match c.source.class() {
                        SourceClass::PureBiphoton | SourceClass::Correlated => c.source.validate(&format!("{f}.source"), grid)?,
                        _ => {
                            return Err(Error::validation(
                                format!("{f}.source"),
                                "mixture components must be two-photon pure or correlated sources",
                            ))
                        }
                    }
                }
                if components.iter().all(|c| c.weight == 0.0) {
                    return Err(Error::validation(format!("{field}.components"), "weights sum to zero"));
                }
                Ok(())
            }
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive, got {v}")))
    }
}

fn nonzero(field: &str, v: f64) -> Result<()> {
    if v != 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be non-zero, got {v}")))
    }
}

impl ElementConfig {
    fn validate(&self, field: &str, grid: &Grid) -> Result<()> {
        let wl = |w: &Option<f64>| w.map_or(Ok(()), |v| positive(&format!("{field}.wavelength"), v));
        match self {
            ElementConfig::Identity {} => Ok(()),
            ElementConfig::FreeSpace { distance, wavelength } => {
                positive(&format!("{field}.distance"), *distance)?;
                wl(wavelength)
            }
            ElementConfig::ThinLens { focal_length, wavelength }
            | ElementConfig::FourierSystem { focal_length, wavelength } => {
                nonzero(&format!("{field}.focal_length"), *focal_length)?;
                wl(wavelength)
            }
            ElementConfig::Mask { profile } => {
                profile.validate(&format!("{field}.profile"), grid)?;
                let t = profile.sample(grid)?;
                if t.iter().any(|z| z.norm() > 1.0 + 1e-12) {
                    return Err(Error::validation(format!("{field}.profile"), "transmittance magnitude exceeds 1"));
                }
                Ok(())
            }
            ElementConfig::ShiftInvariant { response } => response.validate(&format!("{field}.response"), grid),
            ElementConfig::Custom { re, im } => {
                let n = grid.n();
                let shape_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
                if !shape_ok(re) || im.as_ref().is_some_and(|m| !shape_ok(m)) {
                    return Err(Error::validation(format!("{field}.re"), format!("custom matrix must be {n}x{n}")));
                }
                if re.iter().chain(im.iter().flatten()).flatten().any(|v| !v.is_finite()) {
                    return Err(Error::validation(field, "non-finite entry"));
                }
                Ok(())
            }
        }
    }
}

fn validate_arm(field: &str, arm: &[ElementConfig], grid: &Grid) -> Result<()> {
    arm.iter()
        .enumerate()
        .try_for_each(|(i, e)| e.validate(&format!("{field}[{i}]"), grid))
}

impl Scenario {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.dx, self.grid.center)
    }

    pub fn source(&self, label: &str) -> Option<&SourceSpec> {
        self.sources.iter().find(|s| s.label == label).map(|s| &s.source)
    }

    /// Range-check every physical parameter and cross-reference.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.name.trim().is_empty() {
            return Err(Error::validation("name", "must not be empty"));
        }
        let grid = self.grid()?;
        positive("wavelength", self.wavelength)?;
        if self.sources.is_empty() {
            return Err(Error::validation("sources", "at least one source is required"));
        }
        for (i, s) in self.sources.iter().enumerate() {
            let field = format!("sources[{i}]");
            if s.label.is_empty() || !s.label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::validation(
                    format!("{field}.label"),
                    "labels must be non-empty and use only [A-Za-z0-9_-]",
                ));
            }
            if self.sources[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::validation(format!("{field}.label"), format!("duplicate label `{}`", s.label)));
            }
            s.source.validate(&format!("{field}.source"), &grid)?;
        }
        validate_arm("arm1", &self.arm1, &grid)?;
        if let Some(a) = &self.arm2 {
            validate_arm("arm2", a, &grid)?;
        }
        for (name, a) in &self.arm2_variants {
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::validation("arm2_variants", format!("bad variant name `{name}`")));
            }
            validate_arm(&format!("arm2_variants.{name}"), a, &grid)?;
        }
        if let Some(sc) = &self.scatterers {
            if sc.planes.is_empty() {
                return Err(Error::validation("scatterers.planes", "no scattering planes given"));
            }
            for (i, p) in sc.planes.iter().enumerate() {
                let f = format!("scatterers.planes[{i}]");
                validate_arm(&format!("{f}.before"), &p.before, &grid)?;
                validate_arm(&format!("{f}.after"), &p.after, &grid)?;
                for (j, pt) in p.points.iter().enumerate() {
                    grid.nearest_index(pt.x)
                        .map_err(|e| Error::validation(format!("{f}.points[{j}].x"), e.to_string()))?;
                    if pt.strength.iter().any(|v| !v.is_finite()) {
                        return Err(Error::validation(format!("{f}.points[{j}].strength"), "must be finite"));
                    }
                }
            }
        }
        if self.measurements.is_empty() {
            return Err(Error::validation("measurements", "nothing to measure"));
        }
        for (i, m) in self.measurements.iter().enumerate() {
            self.validate_measurement(&format!("measurements[{i}]"), m, &grid)?;
        }
        if let Some(o) = &self.outputs {
            if o.formats.is_empty() {
                return Err(Error::validation("outputs.formats", "no output format selected"));
            }
        }
        Ok(())
    }

    fn validate_measurement(&self, field: &str, m: &Measurement, grid: &Grid) -> Result<()> {
        let kind = m.kind;
        let needs_arm2 = match kind {
            MeasurementKind::Metrics | MeasurementKind::Distance => {
                let t = m
                    .target
                    .ok_or_else(|| Error::validation(format!("{field}.target"), "required for this kind"))?;
                if !t.is_density() {
                    return Err(Error::validation(
                        format!("{field}.target"),
                        "must be one of singles_1, singles_2, marginal_1, marginal_2",
                    ));
                }
                t.needs_arm2()
            }
            k => k.needs_arm2(),
        };
        if needs_arm2 && self.arm2.is_none() && m.arm2.is_none() {
            return Err(Error::validation(
                format!("{field}.kind"),
                format!("measurement `{}` needs arm2, which is absent", kind.name()),
            ));
        }
        if let Some(v) = &m.arm2 {
            if !self.arm2_variants.contains_key(v) {
                return Err(Error::validation(format!("{field}.arm2"), format!("unknown arm2 variant `{v}`")));
            }
        }
        let target = m.target.unwrap_or(kind);
        let supports = |class: SourceClass| supports(class, kind, target);
        match &m.source {
            Some(label) => {
                let s = self
                    .source(label)
                    .ok_or_else(|| Error::validation(format!("{field}.source"), format!("unknown source `{label}`")))?;
                if !supports(s.class()) {
                    return Err(Error::validation(
                        format!("{field}.source"),
                        format!("source `{label}` does not support `{}`", kind.name()),
                    ));
                }
            }
            None => {
                if !self.sources.iter().any(|s| supports(s.source.class())) {
                    return Err(Error::validation(
                        format!("{field}.kind"),
                        format!("no source supports `{}`", kind.name()),
                    ));
                }
            }
        }
        match kind {
            MeasurementKind::Sample => {
                if m.n.unwrap_or(0) == 0 {
                    return Err(Error::validation(format!("{field}.n"), "sample needs n >= 1"));
                }
                if m.seed.is_none() {
                    return Err(Error::validation(format!("{field}.seed"), "sample needs a seed"));
                }
            }
            MeasurementKind::Metrics => {
                if let Some([a, b]) = m.region {
                    if a >= b || b > grid.n() {
                        return Err(Error::validation(
                            format!("{field}.region"),
                            format!("[{a}, {b}) is empty or exceeds {} points", grid.n()),
                        ));
                    }
                }
                if let Some(l) = &m.label {
                    if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                        return Err(Error::validation(format!("{field}.label"), "use only [A-Za-z0-9_-]"));
                    }
                }
            }
            MeasurementKind::Distance => {
                let r = m
                    .reference
                    .as_ref()
                    .ok_or_else(|| Error::validation(format!("{field}.reference"), "required for distance"))?;
                let s = self
                    .source(r)
                    .ok_or_else(|| Error::validation(format!("{field}.reference"), format!("unknown source `{r}`")))?;
                if !supports(s.class()) {
                    return Err(Error::validation(format!("{field}.reference"), "reference cannot produce the target"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

pub(crate) fn supports(class: SourceClass, kind: MeasurementKind, target: MeasurementKind) -> bool {
    let density_ok = |t: MeasurementKind| match class {
        SourceClass::Single => t == MeasurementKind::Singles1,
        _ => t.is_density() || t == MeasurementKind::Joint,
    };
    match kind {
        MeasurementKind::Schmidt => class == SourceClass::PureBiphoton,
        MeasurementKind::Sample => class != SourceClass::Single,
        MeasurementKind::Metrics | MeasurementKind::Distance => density_ok(target),
        k => density_ok(k),
    }
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    s.validate()?;
    Ok(s)
}

/// Canonical pretty-printed JSON form of a scenario.
pub fn to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(s).expect("scenario serializes")
}
