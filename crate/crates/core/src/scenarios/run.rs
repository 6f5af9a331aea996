//! Scenario execution: builds kernels and sources, evaluates the requested
//! densities (concurrently when allowed) and derives summary metrics.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{
    all_formats, supports, ElementConfig, Format, Measurement, MeasurementKind, Scenario, SourceClass, SourceSpec,
};
use super::output::write_outputs;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::measure::{self, Density, JointDensity};
use crate::optics::{cascade, kernel_of, with_scatterers, CMatrix, ElementSpec, Kernel, Scatterer};
use crate::sampling::{self, CoincidenceCounts};
use crate::sources::{self, Arm, BiphotonMixture, BiphotonPure, CorrelatedPairSource, SinglePhotonMixed, SinglePhotonPure};

/// Command-line style overrides applied on top of the scenario document.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub formats: Option<Vec<Format>>,
    /// Replaces the seed of every `sample` measurement.
    pub seed: Option<u64>,
    /// Worker threads; `None` uses the global default.
    pub jobs: Option<usize>,
}

/// Everything a run computed, keyed by item name such as `marginal_2_entangled`.
#[derive(Clone, Debug, Default)]
pub struct RunResults {
    pub densities: BTreeMap<String, Density>,
    pub joints: BTreeMap<String, JointDensity>,
    pub counts: BTreeMap<String, CoincidenceCounts>,
    pub metrics: BTreeMap<String, f64>,
}

/// What `summary.json` holds, plus the wall-clock time of the run.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub schema_version: u32,
    /// Files written per item, relative to the output directory.
    pub files: BTreeMap<String, Vec<String>>,
    pub metrics: BTreeMap<String, f64>,
    /// Not serialized so that reruns stay byte-identical.
    #[serde(skip)]
    pub duration: Duration,
}

enum Built {
    SinglePure(SinglePhotonPure),
    SingleMixed(SinglePhotonMixed),
    Pure {
        state: BiphotonPure,
        /// Set for `phi(x) delta(x - x')`, which has a closed-form marginal.
        delta_phi: Option<SinglePhotonPure>,
    },
    Correlated(CorrelatedPairSource),
    Mixture(BiphotonMixture),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Task {
    kind: MeasurementKind,
    source: String,
    variant: Option<String>,
}

impl Task {
    fn new(kind: MeasurementKind, source: &str, variant: Option<&String>) -> Self {
        let variant = if kind == MeasurementKind::Singles1 { None } else { variant.cloned() };
        Task {
            kind,
            source: source.to_string(),
            variant,
        }
    }

    fn key(&self) -> String {
        item_key(self.kind.name(), &self.source, self.variant.as_deref())
    }
}

fn item_key(prefix: &str, source: &str, variant: Option<&str>) -> String {
    match variant {
        Some(v) => format!("{prefix}_{source}_{v}"),
        None => format!("{prefix}_{source}"),
    }
}

enum Computed {
    Density(Density),
    Joint(JointDensity),
}

struct Systems {
    arm1: Kernel,
    arm2: Option<Kernel>,
    variants: BTreeMap<String, Kernel>,
}

impl Systems {
    fn arm2(&self, variant: Option<&str>) -> Result<&Kernel> {
        match variant {
            Some(v) => self
                .variants
                .get(v)
                .ok_or_else(|| Error::validation("arm2", format!("unknown variant `{v}`"))),
            None => self.arm2.as_ref().ok_or_else(|| Error::validation("arm2", "arm2 is absent")),
        }
    }
}

fn element_spec(e: &ElementConfig, grid: &Grid, wavelength: f64) -> Result<ElementSpec> {
    Ok(match e {
        ElementConfig::Identity {} => ElementSpec::Identity,
        ElementConfig::FreeSpace { distance, wavelength: w } => ElementSpec::FreeSpace {
            distance: *distance,
            wavelength: w.unwrap_or(wavelength),
        },
        ElementConfig::ThinLens { focal_length, wavelength: w } => ElementSpec::ThinLens {
            focal_length: *focal_length,
            wavelength: w.unwrap_or(wavelength),
        },
        ElementConfig::FourierSystem { focal_length, wavelength: w } => ElementSpec::FourierSystem {
            focal_length: *focal_length,
            wavelength: w.unwrap_or(wavelength),
        },
        ElementConfig::Mask { profile } => ElementSpec::Mask(profile.sample(grid)?),
        ElementConfig::ShiftInvariant { response } => ElementSpec::Custom(circulant(&response.sample(grid)?, grid)?),
        ElementConfig::Custom { re, im } => {
            let n = grid.n();
            ElementSpec::Custom(CMatrix::from_fn(n, n, |r, c| {
                Complex64::new(re[r][c], im.as_ref().map_or(0.0, |m| m[r][c]))
            }))
        }
    })
}

/// Periodic shift-invariant kernel `H[i, j] = r[(i - j + c) mod n] / dx`,
/// with `c` the lattice index nearest the grid center.
pub fn circulant(response: &[Complex64], grid: &Grid) -> Result<CMatrix> {
    let n = grid.n();
    if response.len() != n {
        return Err(Error::GridMismatch(format!("response has {} samples, grid has {n}", response.len())));
    }
    let c = grid.nearest_index(grid.center())?;
    let inv = 1.0 / grid.dx();
    Ok(CMatrix::from_fn(n, n, |i, j| response[(i + n + c - j) % n] * inv))
}

fn build_arm(elements: &[ElementConfig], grid: &Grid, wavelength: f64) -> Result<Kernel> {
    let kernels = elements
        .iter()
        .map(|e| kernel_of(&element_spec(e, grid, wavelength)?, grid, grid))
        .collect::<Result<Vec<_>>>()?;
    cascade(*grid, &kernels)
}

fn build_systems(s: &Scenario, grid: &Grid) -> Result<Systems> {
    let mut arm1 = build_arm(&s.arm1, grid, s.wavelength)?;
    if let Some(sc) = &s.scatterers {
        for plane in &sc.planes {
            let before = build_arm(&plane.before, grid, s.wavelength)?;
            let after = build_arm(&plane.after, grid, s.wavelength)?;
            let points: Vec<Scatterer> = plane
                .points
                .iter()
                .map(|p| Scatterer {
                    position: p.x,
                    strength: Complex64::new(p.strength[0], p.strength[1]),
                })
                .collect();
            arm1 = with_scatterers(&before, &after, &points, &arm1)?;
        }
    }
    let arm2 = s.arm2.as_ref().map(|a| build_arm(a, grid, s.wavelength)).transpose()?;
    let variants = s
        .arm2_variants
        .iter()
        .map(|(k, a)| Ok((k.clone(), build_arm(a, grid, s.wavelength)?)))
        .collect::<Result<_>>()?;
    Ok(Systems { arm1, arm2, variants })
}

fn pure_single(p: &crate::profiles::Profile, grid: &Grid) -> Result<SinglePhotonPure> {
    SinglePhotonPure::from_amplitude(*grid, p.sample(grid)?)
}

fn pure_biphoton(spec: &SourceSpec, grid: &Grid) -> Result<(BiphotonPure, Option<SinglePhotonPure>)> {
    Ok(match spec {
        SourceSpec::Factorizable { amplitude1, amplitude2 } => (
            sources::factorizable(&pure_single(amplitude1, grid)?, &pure_single(amplitude2, grid)?),
            None,
        ),
        SourceSpec::EntangledDelta { amplitude } => {
            let phi = pure_single(amplitude, grid)?;
            (sources::entangled_delta(&phi), Some(phi))
        }
        SourceSpec::Spdc { pump, pm_width } => (
            sources::spdc_amplitude(
                &sources::SpdcParams {
                    pump: pump.sample(grid)?,
                    pm_width: *pm_width,
                },
                grid,
            )?,
            None,
        ),
        _ => return Err(Error::validation("source", "not a pure two-photon source")),
    })
}

fn correlated(spec: &SourceSpec, grid: &Grid) -> Result<CorrelatedPairSource> {
    let SourceSpec::Correlated { amplitude, intensity } = spec else {
        return Err(Error::validation("source", "not a correlated source"));
    };
    let gamma: Vec<f64> = match (amplitude, intensity) {
        (Some(a), None) => a.sample(grid)?.iter().map(|z| z.norm_sqr()).collect(),
        (None, Some(i)) => i.sample(grid)?.iter().map(|z| z.norm()).collect(),
        _ => return Err(Error::validation("source", "give exactly one of `amplitude` or `intensity`")),
    };
    sources::correlated_from_intensity(&gamma, grid)
}

fn build_source(spec: &SourceSpec, grid: &Grid) -> Result<Built> {
    Ok(match spec {
        SourceSpec::SinglePure { amplitude } => Built::SinglePure(pure_single(amplitude, grid)?),
        SourceSpec::SingleMixed {
            amplitude,
            coherence_length,
        } => {
            let a = amplitude.sample(grid)?;
            let l2 = 2.0 * coherence_length * coherence_length;
            let pts = grid.points();
            let coherence = CMatrix::from_fn(a.len(), a.len(), |i, j| {
                let d = pts[i] - pts[j];
                a[i] * a[j].conj() * (-d * d / l2).exp()
            });
            Built::SingleMixed(SinglePhotonMixed::from_coherence(*grid, coherence)?)
        }
        SourceSpec::Factorizable { .. } | SourceSpec::EntangledDelta { .. } | SourceSpec::Spdc { .. } => {
            let (state, delta_phi) = pure_biphoton(spec, grid)?;
            Built::Pure { state, delta_phi }
        }
        SourceSpec::Correlated { .. } => Built::Correlated(correlated(spec, grid)?),
        SourceSpec::Mixture { components } => {
            let mut parts = Vec::new();
            for c in components {
                let sub = match &c.source {
                    SourceSpec::Correlated { .. } => sources::localized_pair_mixture(&correlated(&c.source, grid)?),
                    other => BiphotonMixture::from(pure_biphoton(other, grid)?.0),
                };
                parts.extend(sub.components().iter().map(|(w, s)| (c.weight * w, s.clone())));
            }
            Built::Mixture(BiphotonMixture::new(parts)?)
        }
    })
}

fn compute_task(t: &Task, src: &Built, sys: &Systems) -> Result<Computed> {
    use MeasurementKind as K;
    let k1 = &sys.arm1;
    let k2 = || sys.arm2(t.variant.as_deref());
    let d = Computed::Density;
    Ok(match (src, t.kind) {
        (Built::SinglePure(s), K::Singles1) => d(measure::single_coherent(s, k1)?),
        (Built::SingleMixed(s), K::Singles1) => d(measure::single_partially_coherent(s, k1)?),
        (Built::Pure { state, .. }, K::Joint) => Computed::Joint(measure::biphoton_joint(state, k1, k2()?)?),
        (Built::Pure { state, .. }, K::Singles1) => d(measure::biphoton_singles(state, k1, Arm::One)?),
        (Built::Pure { state, .. }, K::Singles2) => d(measure::biphoton_singles(state, k2()?, Arm::Two)?),
        (Built::Pure { delta_phi: Some(phi), .. }, K::Marginal1) => d(measure::entangled_marginal_closed(phi, k1, k2()?)?),
        (Built::Pure { delta_phi: Some(phi), .. }, K::Marginal2) => d(measure::entangled_marginal_closed(phi, k2()?, k1)?),
        (Built::Pure { state, .. }, K::Marginal1) => d(measure::biphoton_marginal(state, k1, k2()?, Arm::One)?),
        (Built::Pure { state, .. }, K::Marginal2) => d(measure::biphoton_marginal(state, k1, k2()?, Arm::Two)?),
        (Built::Correlated(c), K::Joint) => Computed::Joint(measure::correlated_joint(c, k1, k2()?)?),
        (Built::Correlated(c), K::Singles1) => d(measure::correlated_singles(c, k1, Arm::One)?),
        (Built::Correlated(c), K::Singles2) => d(measure::correlated_singles(c, k2()?, Arm::Two)?),
        (Built::Correlated(c), K::Marginal1) => d(measure::correlated_marginal(c, k1, k2()?)?),
        (Built::Correlated(c), K::Marginal2) => d(measure::correlated_marginal(c, k2()?, k1)?),
        (Built::Mixture(m), K::Joint) => Computed::Joint(measure::mixture_joint(m, k1, k2()?)?),
        (Built::Mixture(m), K::Singles1) => d(measure::mixture_singles(m, k1, Arm::One)?),
        (Built::Mixture(m), K::Singles2) => d(measure::mixture_singles(m, k2()?, Arm::Two)?),
        (Built::Mixture(m), K::Marginal1) => d(measure::mixture_marginal(m, k1, k2()?, Arm::One)?),
        (Built::Mixture(m), K::Marginal2) => d(measure::mixture_marginal(m, k1, k2()?, Arm::Two)?),
        _ => {
            return Err(Error::validation(
                "measurements",
                format!("source `{}` cannot produce `{}`", t.source, t.kind.name()),
            ))
        }
    })
}

fn class_of(s: &Scenario, label: &str) -> SourceClass {
    s.source(label).map_or(SourceClass::Single, SourceSpec::class)
}

/// Sources a measurement applies to, in document order.
fn targets<'a>(s: &'a Scenario, m: &Measurement) -> Vec<&'a str> {
    let target = m.target.unwrap_or(m.kind);
    match &m.source {
        Some(l) => s.sources.iter().filter(|x| &x.label == l).map(|x| x.label.as_str()).collect(),
        None => s
            .sources
            .iter()
            .filter(|x| supports(x.source.class(), m.kind, target))
            .filter(|x| m.reference.as_deref() != Some(x.label.as_str()))
            .map(|x| x.label.as_str())
            .collect(),
    }
}

fn density_tasks(s: &Scenario) -> BTreeSet<Task> {
    use MeasurementKind as K;
    let mut tasks = BTreeSet::new();
    for m in &s.measurements {
        let v = m.arm2.as_ref();
        for src in targets(s, m) {
            match m.kind {
                K::Schmidt => {}
                K::Sample => {
                    tasks.insert(Task::new(K::Joint, src, v));
                }
                K::Metrics => {
                    tasks.insert(Task::new(m.target.unwrap_or(K::Marginal2), src, v));
                }
                K::Distance => {
                    let t = m.target.unwrap_or(K::Marginal2);
                    tasks.insert(Task::new(t, src, v));
                    if let Some(r) = &m.reference {
                        tasks.insert(Task::new(t, r, v));
                    }
                }
                k => {
                    tasks.insert(Task::new(k, src, v));
                }
            }
        }
    }
    tasks
}

fn metric_key(metric: &str, source: &str, variant: Option<&str>, label: Option<&str>) -> String {
    let base = item_key(metric, source, variant);
    match label {
        Some(l) => format!("{base}_{l}"),
        None => base,
    }
}

/// Evaluate every measurement of a validated scenario without writing files.
pub fn compute(s: &Scenario, opts: &RunOptions) -> Result<RunResults> {
    s.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        if j == 0 {
            return Err(Error::validation("jobs", "must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::validation("jobs", format!("cannot start worker pool: {e}")))?;
    pool.install(|| compute_in_pool(s, opts))
}

fn compute_in_pool(s: &Scenario, opts: &RunOptions) -> Result<RunResults> {
    use MeasurementKind as K;
    let grid = s.grid()?;
    let sys = build_systems(s, &grid)?;
    let built: BTreeMap<&str, Built> = s
        .sources
        .par_iter()
        .map(|x| {
            build_source(&x.source, &grid)
                .map(|b| (x.label.as_str(), b))
                .map_err(|e| e.context(&format!("source `{}`", x.label)))
        })
        .collect::<Result<_>>()?;

    let tasks: Vec<Task> = density_tasks(s).into_iter().collect();
    let computed: Vec<(String, Computed)> = tasks
        .par_iter()
        .map(|t| {
            compute_task(t, &built[t.source.as_str()], &sys)
                .map(|c| (t.key(), c))
                .map_err(|e| e.context(&format!("measurement `{}`", t.key())))
        })
        .collect::<Result<_>>()?;

    let mut res = RunResults::default();
    for (key, c) in computed {
        match c {
            Computed::Density(d) => {
                res.densities.insert(key, d);
            }
            Computed::Joint(j) => {
                res.joints.insert(key, j);
            }
        }
    }

    for m in &s.measurements {
        let v = m.arm2.as_deref();
        for src in targets(s, m) {
            match m.kind {
                K::Schmidt => {
                    if let Built::Pure { state, .. } = &built[src] {
                        let sp = sources::schmidt_spectrum(state);
                        res.metrics.insert(format!("schmidt_entropy_{src}"), sp.entropy);
                        res.metrics.insert(format!("schmidt_k_{src}"), sp.participation);
                    }
                }
                K::Sample => {
                    let joint = &res.joints[&item_key("joint", src, v)];
                    let n = m.n.unwrap_or(0);
                    let seed = opts.seed.or(m.seed).unwrap_or(0);
                    let counts = sampling::sample_joint(joint, n, seed)
                        .map_err(|e| e.context(&format!("sample `{src}`")))?;
                    let chi = sampling::chi_square(&counts, joint)?;
                    let (_, e1, e2) = sampling::empirical_densities(&counts)?;
                    let tv1 = measure::total_variation(&e1, &measure::marginal_from_joint(joint, Arm::One)?);
                    let tv2 = measure::total_variation(&e2, &measure::marginal_from_joint(joint, Arm::Two)?);
                    res.metrics.insert(item_key("chi2_statistic", src, v), chi.statistic);
                    res.metrics.insert(item_key("chi2_dof", src, v), chi.dof as f64);
                    res.metrics.insert(item_key("chi2_critical_999", src, v), chi.critical_999);
                    res.metrics.insert(item_key("tv_marginal_1", src, v), tv1);
                    res.metrics.insert(item_key("tv_marginal_2", src, v), tv2);
                    res.counts.insert(item_key("counts", src, v), counts);
                }
                K::Metrics => {
                    let t = Task::new(m.target.unwrap_or(K::Marginal2), src, m.arm2.as_ref());
                    let d = &res.densities[&t.key()];
                    let region = m.region.map_or(0..grid.n(), |[a, b]| a..b);
                    let im = measure::image_metrics(d, region)?;
                    let vv = t.variant.as_deref();
                    let l = m.label.as_deref();
                    res.metrics.insert(metric_key("visibility", src, vv, l), im.visibility);
                    res.metrics.insert(metric_key("fwhm", src, vv, l), im.fwhm);
                    res.metrics.insert(metric_key("peak_position", src, vv, l), im.peak_position);
                }
                K::Distance => {
                    let kind = m.target.unwrap_or(K::Marginal2);
                    let r = m.reference.as_deref().unwrap_or_default();
                    let a = Task::new(kind, src, m.arm2.as_ref());
                    let b = Task::new(kind, r, m.arm2.as_ref());
                    let dist = measure::relative_linf(res.densities[&a.key()].values(), res.densities[&b.key()].values());
                    let key = item_key(&format!("linf_{}", kind.name()), &format!("{src}_vs_{r}"), a.variant.as_deref());
                    res.metrics.insert(key, dist);
                }
                _ => {}
            }
        }
    }

    // Gated marginal versus singles rate, whenever both were computed.
    for src in built.keys() {
        if class_of(s, src) == SourceClass::Single {
            continue;
        }
        let variants: BTreeSet<Option<String>> = tasks
            .iter()
            .filter(|t| t.source == *src)
            .map(|t| t.variant.clone())
            .collect();
        for v in variants {
            for (j, singles, marginal) in [(1, K::Singles1, K::Marginal1), (2, K::Singles2, K::Marginal2)] {
                let p = res.densities.get(&Task::new(singles, src, v.as_ref()).key());
                let q = res.densities.get(&Task::new(marginal, src, v.as_ref()).key());
                if let (Some(p), Some(q)) = (p, q) {
                    let abs = p.values().iter().zip(q.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    res.metrics.insert(item_key(&format!("max_abs_diff_{j}"), src, v.as_deref()), abs);
                    res.metrics.insert(
                        item_key(&format!("max_rel_diff_{j}"), src, v.as_deref()),
                        measure::relative_linf(q.values(), p.values()),
                    );
                }
            }
        }
    }

    let defect = res
        .densities
        .values()
        .map(|d| (d.integral() - 1.0).abs())
        .chain(res.joints.values().map(|j| (j.integral() - 1.0).abs()))
        .fold(0.0, f64::max);
    res.metrics.insert("normalization_defect".into(), defect);
    Ok(res)
}

/// Run a scenario and write its outputs into `out_dir`.
pub fn run_scenario(s: &Scenario, out_dir: &Path, opts: &RunOptions) -> Result<RunSummary> {
    let start = Instant::now();
    let res = compute(s, opts)?;
    let formats = opts
        .formats
        .clone()
        .or_else(|| s.outputs.as_ref().map(|o| o.formats.clone()))
        .unwrap_or_else(all_formats);
    let mut summary = RunSummary {
        scenario: s.name.clone(),
        schema_version: s.schema_version,
        files: BTreeMap::new(),
        metrics: res.metrics.clone(),
        duration: Duration::ZERO,
    };
    summary.files = write_outputs(&res, out_dir, &formats)?;
    if formats.contains(&Format::Json) {
        let path = out_dir.join("summary.json");
        summary.files.insert("summary".into(), vec!["summary.json".into()]);
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    summary.duration = start.elapsed();
    Ok(summary)
}
