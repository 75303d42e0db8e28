//! Experiment drivers: desk-scale statistical checks of how HL(0)
//! behaves as the particle size shrinks. Every pass/fail threshold comes from the config.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cbf::{pair_collision_cdf, CbfDomain};
use crate::cluster::ClusterState;
use crate::error::{Hl0Error, Result};
use crate::fingers::proof_scale_parameters;
use crate::flow::{rotated_step, FlowTracker, Scaling};
use crate::geometry::PointIndex;
use crate::particle::{Family, MapDirection, ParticleSpec, Version};
use crate::rng::{sample_thetas, stream_rng, uniform_angle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[serde(alias = "RadiusProfile")]
    RadiusProfile,
    #[serde(alias = "Coverage")]
    Coverage,
    #[serde(alias = "StepVariance")]
    StepVariance,
    #[serde(alias = "CoalescenceKS", alias = "coalescence_k_s")]
    CoalescenceKs,
    #[serde(alias = "CapacityCheck")]
    CapacityCheck,
    #[serde(alias = "FlowVariance")]
    FlowVariance,
}

impl ExperimentKind {
    /// Criteria reported by the driver; each needs a threshold in the config.
    pub fn criteria(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::RadiusProfile => &["median_deviation"],
            ExperimentKind::Coverage => &["coverage_fraction"],
            ExperimentKind::StepVariance => &["mean_z", "mean_square_z"],
            ExperimentKind::CoalescenceKs => &["ks_distance"],
            ExperimentKind::CapacityCheck => &["abs_error"],
            ExperimentKind::FlowVariance => &["variance_z", "autocorrelation_z"],
        }
    }
}

fn default_family() -> Family {
    Family::Slit
}

/// Driver input. Fields a driver does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_family")]
    pub family: Family,
    pub delta: f64,
    pub seeds: Vec<u64>,
    pub thresholds: BTreeMap<String, f64>,
    /// Particles (growth drivers) or steps (flow variance).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Time horizon for coalescence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Monte Carlo replicas per seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    /// Evaluation radius for the capacity estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Initial angular distances for coalescence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_hat: Option<f64>,
    /// Coverage grid: angular and radial counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
    /// Samples per particle curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    /// Comparison particle size for the radius profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_n: Option<usize>,
    /// `g` (default) or `f` for the step variance driver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapChoice>,
    /// Optional CSV of raw per-sample values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapChoice {
    G,
    F,
}

impl ExperimentConfig {
    /// A config of the given kind with everything optional left unset.
    pub fn new(kind: ExperimentKind, family: Family, delta: f64, seeds: Vec<u64>) -> Self {
        ExperimentConfig {
            kind,
            family,
            delta,
            seeds,
            thresholds: BTreeMap::new(),
            n: None,
            horizon: None,
            runs: None,
            radius: None,
            distances: None,
            scaling: None,
            epsilon_hat: None,
            grid: None,
            resolution: None,
            compare_delta: None,
            compare_n: None,
            map: None,
            samples_csv: None,
        }
    }

    pub fn threshold(mut self, name: &str, value: f64) -> Self {
        self.thresholds.insert(name.to_string(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Hl0Error::Config("seeds must be nonempty".into()));
        }
        for (k, v) in &self.thresholds {
            if !(*v > 0.0) {
                return Err(Hl0Error::Config(format!("threshold {k} = {v} must be > 0")));
            }
        }
        for name in self.kind.criteria() {
            if !self.thresholds.contains_key(*name) {
                return Err(Hl0Error::Config(format!("missing threshold `{name}`")));
            }
        }
        Ok(())
    }

    fn need<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Hl0Error::Config(format!("{:?} needs `{name}`", self.kind)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub inputs: ExperimentConfig,
    pub statistics: BTreeMap<String, f64>,
    pub pass: BTreeMap<String, bool>,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.pass.values().all(|&p| p)
    }
}

struct Outcome {
    statistics: BTreeMap<String, f64>,
    pass: BTreeMap<String, bool>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            statistics: BTreeMap::new(),
            pass: BTreeMap::new(),
        }
    }

    fn stat(&mut self, name: &str, v: f64) {
        self.statistics.insert(name.to_string(), v);
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.pass.insert(name.to_string(), ok);
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let spec = ParticleSpec::new(config.family, config.delta)?;
    let start = Instant::now();
    let out = match config.kind {
        ExperimentKind::CapacityCheck => capacity_check(config, &spec)?,
        ExperimentKind::StepVariance => step_variance(config, &spec)?,
        ExperimentKind::FlowVariance => flow_variance(config, &spec)?,
        ExperimentKind::CoalescenceKs => coalescence_ks(config, &spec)?,
        ExperimentKind::RadiusProfile => radius_profile(config, &spec)?,
        ExperimentKind::Coverage => coverage(config, &spec)?,
    };
    Ok(ExperimentReport {
        kind: config.kind,
        inputs: config.clone(),
        statistics: out.statistics,
        pass: out.pass,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

fn write_samples(path: &Option<PathBuf>, header: &str, rows: &[String]) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let io = |e| Hl0Error::io(path.clone(), e);
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(f, "{header}").map_err(io)?;
    for r in rows {
        writeln!(f, "{r}").map_err(io)?;
    }
    f.flush().map_err(io)
}

/// `log|Phi_n(R)| - log R`, the capacity estimate from the behaviour at infinity.
pub fn capacity_estimate(cluster: &ClusterState, radius: f64) -> Result<f64> {
    let z = Complex64::new(radius, 0.0);
    Ok(cluster.eval_phi(cluster.n(), z)?.norm().ln() - radius.ln())
}

fn capacity_check(cfg: &ExperimentConfig, spec: &ParticleSpec) -> Result<Outcome> {
    let n = cfg.need(cfg.n, "n")?;
    let radius = cfg.radius.unwrap_or(1e8);
    let errs: Vec<f64> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let c = ClusterState::from_thetas(spec, seed, sample_thetas(n, seed), usize::MAX);
            capacity_estimate(&c, radius).map(|e| (e - c.capacity()).abs())
        })
        .collect::<Result<_>>()?;
    let mut o = Outcome::new();
    let worst = errs.iter().copied().fold(0.0, f64::max);
    o.stat("exact_capacity", spec.c * n as f64);
    o.stat("max_abs_error", worst);
    o.check("abs_error", worst <= cfg.thresholds["abs_error"]);
    Ok(o)
}

/// Sample mean, its standard error, and the same for the squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub mean_square: f64,
    pub mean_square_se: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let msq = sq.iter().sum::<f64>() / m;
    let var_sq = sq.iter().map(|s| (s - msq).powi(2)).sum::<f64>() / (m - 1.0);
    Moments {
        count: xs.len(),
        mean,
        mean_se: (var / m).sqrt(),
        mean_square: msq,
        mean_square_se: (var_sq / m).sqrt(),
    }
}

const CHUNK: usize = 4096;

/// `M` single displacements `h(x - Theta) + Theta - x` with `x`, `Theta`
/// independent uniform, drawn in parallel chunks from ChaCha streams.
pub fn single_step_displacements(spec: &ParticleSpec, dir: MapDirection, m: usize, seed: u64) -> Vec<f64> {
    let chunks = m.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = CHUNK.min(m - c * CHUNK);
            (0..len)
                .map(|_| {
                    let x = uniform_angle(&mut rng);
                    let th = uniform_angle(&mut rng);
                    rotated_step(spec, dir, Version::Plus, th, x) - x
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn step_variance(cfg: &ExperimentConfig, spec: &ParticleSpec) -> Result<Outcome> {
    let m = cfg.need(cfg.runs, "runs")?;
    let dir = match cfg.map.unwrap_or(MapChoice::G) {
        MapChoice::G => MapDirection::G,
        MapChoice::F => MapDirection::F,
    };
    let xs: Vec<f64> = cfg
        .seeds
        .iter()
        .flat_map(|&s| single_step_displacements(spec, dir, m, s))
        .collect();
    let mo = moments(&xs);
    let target = spec.step_variance();
    let mean_z = mo.mean.abs() / mo.mean_se;
    let sq_z = (mo.mean_square - target).abs() / mo.mean_square_se;
    let mut o = Outcome::new();
    o.stat("samples", xs.len() as f64);
    o.stat("mean", mo.mean);
    o.stat("mean_se", mo.mean_se);
    o.stat("mean_square", mo.mean_square);
    o.stat("mean_square_se", mo.mean_square_se);
    o.stat("inverse_rho", target);
    o.stat("mean_z", mean_z);
    o.stat("mean_square_z", sq_z);
    o.check("mean_z", mean_z <= cfg.thresholds["mean_z"]);
    o.check("mean_square_z", sq_z <= cfg.thresholds["mean_square_z"]);
    Ok(o)
}

/// Net displacement after `n` forward steps and the two increments at steps
/// `n/2` and `n/2 + 1`, for `runs` independent runs.
pub fn tracked_point_runs(spec: &ParticleSpec, n: usize, runs: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let x0 = uniform_angle(&mut rng);
            let mut x = x0;
            let (mut a, mut b) = (0.0, 0.0);
            let mid = n / 2;
            for k in 0..n {
                let th = uniform_angle(&mut rng);
                let y = rotated_step(spec, MapDirection::G, Version::Plus, th, x);
                if k == mid.saturating_sub(1) {
                    a = y - x;
                } else if k == mid {
                    b = y - x;
                }
                x = y;
            }
            (x - x0, a, b)
        })
        .collect()
}

/// Sample variance and its standard error.
pub fn variance_with_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let v = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
    (v, ((m4 - v * v) / m).sqrt())
}

fn flow_variance(cfg: &ExperimentConfig, spec: &ParticleSpec) -> Result<Outcome> {
    let n = cfg.need(cfg.n, "n")?;
    let runs = cfg.need(cfg.runs, "runs")?;
    if n < 2 {
        return Err(Hl0Error::Config("flow variance needs n >= 2".into()));
    }
    let data: Vec<(f64, f64, f64)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| tracked_point_runs(spec, n, runs, s))
        .collect();
    let d: Vec<f64> = data.iter().map(|t| t.0).collect();
    let (v, se) = variance_with_se(&d);
    let target = n as f64 / spec.rho;
    let vz = (v - target).abs() / se;
    // Lag-one correlation of increments across runs.
    let a: Vec<f64> = data.iter().map(|t| t.1).collect();
    let b: Vec<f64> = data.iter().map(|t| t.2).collect();
    let corr = correlation(&a, &b);
    let cz = corr.abs() * (data.len() as f64).sqrt();
    let mut o = Outcome::new();
    o.stat("variance", v);
    o.stat("variance_se", se);
    o.stat("target_n_over_rho", target);
    o.stat("variance_z", vz);
    o.stat("lag_one_correlation", corr);
    o.stat("autocorrelation_z", cz);
    o.check("variance_z", vz <= cfg.thresholds["variance_z"]);
    o.check("autocorrelation_z", cz <= cfg.thresholds["autocorrelation_z"]);
    Ok(o)
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / m, b.iter().sum::<f64>() / m);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Steps until a point at `u` and points at `u + d_i` coalesce under the
/// backward (f-map) flow with i.i.d. uniform angles, censored at `max_steps`.
/// One shared angle stream per run; `result[run][i]` is for distance `i`.
pub fn coalescence_steps(
    spec: &ParticleSpec,
    distances: &[f64],
    max_steps: usize,
    runs: usize,
    seed: u64,
) -> Vec<Vec<Option<usize>>> {
    (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let u = uniform_angle(&mut rng);
            let mut starts = vec![u];
            starts.extend(distances.iter().map(|d| u + d));
            let mut t = FlowTracker::new(spec, MapDirection::F, Version::Plus, &starts);
            while t.steps_done() < max_steps && t.groups() > 1 {
                t.step(uniform_angle(&mut rng));
            }
            (1..starts.len()).map(|i| t.pair_coalescence(0, i)).collect()
        })
        .collect()
}

/// Kolmogorov-Smirnov distance on `[0, horizon]` between the empirical law
/// of possibly censored samples (`None` = beyond the horizon) and a
/// continuous reference CDF.
pub fn censored_ks<F: FnMut(f64) -> f64>(samples: &[Option<f64>], horizon: f64, mut cdf: F) -> f64 {
    let m = samples.len() as f64;
    let mut times: Vec<f64> = samples.iter().flatten().copied().filter(|&t| t <= horizon).collect();
    times.sort_by(|a, b| a.total_cmp(b));
    let mut ks: f64 = 0.0;
    let mut i = 0;
    while i < times.len() {
        let t = times[i];
        let mut j = i;
        while j < times.len() && times[j] == t {
            j += 1;
        }
        let f = cdf(t);
        ks = ks.max((i as f64 / m - f).abs()).max((j as f64 / m - f).abs());
        i = j;
    }
    ks.max((times.len() as f64 / m - cdf(horizon)).abs())
}

fn coalescence_ks(cfg: &ExperimentConfig, spec: &ParticleSpec) -> Result<Outcome> {
    let runs = cfg.need(cfg.runs, "runs")?;
    let horizon = cfg.need(cfg.horizon, "horizon")?;
    let distances = cfg
        .distances
        .clone()
        .ok_or_else(|| Hl0Error::Config("coalescence_ks needs `distances`".into()))?;
    let scaling = cfg.scaling.unwrap_or(Scaling::Long);
    // Raw angular separations and the steps that span the horizon.
    let (raw, max_steps, domain) = match scaling {
        Scaling::Long => (distances.clone(), (horizon * spec.rho).ceil() as usize, CbfDomain::Circle),
        Scaling::Local => (
            distances.iter().map(|d| d * spec.delta_star.sqrt()).collect(),
            (horizon / spec.c).ceil() as usize,
            CbfDomain::Line,
        ),
        Scaling::None => return Err(Hl0Error::Config("coalescence_ks needs long or local scaling".into())),
    };
    let mut per_run = Vec::new();
    for &s in &cfg.seeds {
        per_run.extend(coalescence_steps(spec, &raw, max_steps, runs, s));
    }
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for (i, &d) in distances.iter().enumerate() {
        let times: Vec<Option<f64>> = per_run
            .iter()
            .map(|r| r[i].map(|k| scaling.time(spec, k)))
            .collect();
        for (run, t) in times.iter().enumerate() {
            rows.push(format!("{run},{d},{}", t.map_or("".to_string(), |v| v.to_string())));
        }
        let mut err = None;
        let ks = censored_ks(&times, horizon, |t| match pair_collision_cdf(domain, d, t) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let frac = times.iter().filter(|t| t.is_some()).count() as f64 / times.len() as f64;
        o.stat(&format!("ks_d{i}"), ks);
        o.stat(&format!("coalesced_fraction_d{i}"), frac);
        o.stat(&format!("reference_at_horizon_d{i}"), pair_collision_cdf(domain, d, horizon)?);
        worst = worst.max(ks);
    }
    write_samples(&cfg.samples_csv, "run,distance,time", &rows)?;
    o.stat("ks_max", worst);
    o.stat("steps_per_run", max_steps as f64);
    o.check("ks_distance", worst <= cfg.thresholds["ks_distance"]);
    Ok(o)
}

/// `| |attach_k| e^{-c k} - 1 |` for every particle of every seed.
pub fn radial_deviations(spec: &ParticleSpec, n: usize, seeds: &[u64]) -> Vec<f64> {
    let mut out = Vec::new();
    for &s in seeds {
        let c = ClusterState::grow(spec, n, s);
        out.extend(
            c.records()
                .iter()
                .map(|r| (r.attach_point.norm() * (-spec.c * (r.index - 1) as f64).exp() - 1.0).abs()),
        );
    }
    out
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let m = xs.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        xs[m / 2]
    } else {
        0.5 * (xs[m / 2 - 1] + xs[m / 2])
    }
}

fn radius_profile(cfg: &ExperimentConfig, spec: &ParticleSpec) -> Result<Outcome> {
    let n = cfg.need(cfg.n, "n")?;
    let mut dev = radial_deviations(spec, n, &cfg.seeds);
    let rows: Vec<String> = if cfg.samples_csv.is_some() {
        dev.iter().enumerate().map(|(i, d)| format!("{},{},{d}", cfg.seeds[i / n], i % n + 1)).collect()
    } else {
        Vec::new()
    };
    write_samples(&cfg.samples_csv, "seed,index,deviation", &rows)?;
    let med = median(&mut dev);
    let mut o = Outcome::new();
    o.stat("median_deviation", med);
    o.stat("max_deviation", dev.last().copied().unwrap_or(f64::NAN));
    o.stat("proof_epsilon", proof_scale_parameters(spec.delta).0);
    o.check("median_deviation", med <= cfg.thresholds["median_deviation"]);
    if let Some(cd) = cfg.compare_delta {
        let cspec = ParticleSpec::new(cfg.family, cd)?;
        // Same total capacity unless given.
        let cn = cfg
            .compare_n
            .unwrap_or(((n as f64) * spec.c / cspec.c).round() as usize);
        let mut cdev = radial_deviations(&cspec, cn, &cfg.seeds);
        let cmed = median(&mut cdev);
        o.stat("comparison_n", cn as f64);
        o.stat("comparison_median_deviation", cmed);
        o.check("below_comparison", med < cmed);
    }
    Ok(o)
}

/// Fraction of a polar grid over `|w| <= e^{cn}` lying within
/// `eps_hat e^{cn}` of the sampled cluster (unit disc plus particle curves).
pub fn coverage_fraction(cluster: &ClusterState, eps_hat: f64, grid: [usize; 2], resolution: usize) -> Result<f64> {
    let big_r = cluster.capacity().exp();
    let tol = eps_hat * big_r;
    let curves = cluster.all_particle_curves(resolution);
    let pts: Vec<Complex64> = curves.into_iter().flat_map(|c| c.points).collect();
    let index = if pts.is_empty() { None } else { Some(PointIndex::new(pts)?) };
    let [na, nr] = grid;
    let mut hit = 0usize;
    for j in 0..nr {
        let rad = big_r * (j as f64 + 0.5) / nr as f64;
        for i in 0..na {
            let w = Complex64::from_polar(rad, TAU * i as f64 / na as f64);
            let near_disc = (rad - 1.0).max(0.0) <= tol;
            if near_disc || index.as_ref().is_some_and(|ix| ix.any_within(w, tol)) {
                hit += 1;
            }
        }
    }
    Ok(hit as f64 / (na * nr) as f64)
}

fn coverage(cfg: &ExperimentConfig, spec: &ParticleSpec) -> Result<Outcome> {
    let n = cfg.need(cfg.n, "n")?;
    let eps = cfg.epsilon_hat.unwrap_or(0.2);
    let grid = cfg.grid.unwrap_or([256, 64]);
    let res = cfg.resolution.unwrap_or(32);
    let fr: Vec<f64> = cfg
        .seeds
        .iter()
        .map(|&s| coverage_fraction(&ClusterState::grow(spec, n, s), eps, grid, res))
        .collect::<Result<_>>()?;
    let worst = fr.iter().copied().fold(1.0, f64::min);
    let mut o = Outcome::new();
    o.stat("min_coverage_fraction", worst);
    o.stat("mean_coverage_fraction", fr.iter().sum::<f64>() / fr.len() as f64);
    o.stat("proof_epsilon", proof_scale_parameters(spec.delta).0);
    o.check("coverage_fraction", worst >= cfg.thresholds["coverage_fraction"]);
    Ok(o)
}
