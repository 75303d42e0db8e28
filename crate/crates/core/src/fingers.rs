//! Fingers (ancestral chains of particles) and gap proxies (forward
//! escape-point flows) in logarithmic coordinates, and the scalings
//! `sigma(r + i theta) = (delta* r, theta)` and
//! `sigma_bar(r + i theta) = (r, theta / sqrt(delta*))`.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterState;
use crate::error::{Hl0Error, Result};
use crate::flow::rotated_step;
use crate::geometry::{PlanarSet, PointIndex};
use crate::monotone::reduce_angle;
use crate::particle::{MapDirection, ParticleSpec, Version};

/// Boundary samples per particle for nearest-particle search:
/// `max(16, ceil(64 delta / 0.1))`.
pub fn search_resolution(delta: f64) -> usize {
    ((64.0 * delta / 0.1).ceil() as usize).max(16)
}

/// Logarithm of a curve, continuous along the curve, with the first point's
/// imaginary part within `pi` of `near`.
fn log_curve(points: &[Complex64], near: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(points.len());
    for &z in points {
        let l = z.ln();
        let target = out.last().map_or(near, |p| p.im);
        let k = ((target - l.im) / TAU).round();
        out.push(Complex64::new(l.re, l.im + TAU * k));
    }
    out
}

/// Fine and coarse particle curves of a cluster in log coordinates, for
/// nearest-particle queries.
///
/// A coarse pass over three samples per particle (base, middle, tip) finds
/// candidates; fine curves at [`search_resolution`] are computed lazily for
/// those candidates only.
pub struct ParticleAtlas<'a> {
    cluster: &'a ClusterState,
    resolution: usize,
    coarse: PointIndex,
    owner: Vec<usize>,
    slack: f64,
    /// Coarse polyline length of each particle in log coordinates.
    lengths: Vec<f64>,
    fine: Mutex<HashMap<usize, PlanarSet>>,
}

const COARSE_RESOLUTION: usize = 3;

impl<'a> ParticleAtlas<'a> {
    pub fn new(cluster: &'a ClusterState) -> Result<Self> {
        Self::with_resolution(cluster, search_resolution(cluster.spec().delta))
    }

    pub fn with_resolution(cluster: &'a ClusterState, resolution: usize) -> Result<Self> {
        if cluster.n() == 0 {
            return Err(Hl0Error::Empty("cluster"));
        }
        let curves = cluster.all_particle_curves(COARSE_RESOLUTION);
        let mut pts = Vec::new();
        let mut owner = Vec::new();
        let mut slack: f64 = 0.0;
        let mut lengths = Vec::with_capacity(curves.len());
        for (k, c) in curves.iter().enumerate() {
            let logs: Vec<Complex64> = c.points.iter().map(|z| z.ln()).collect();
            let mut len = 0.0;
            for w in logs.windows(2) {
                let d = w[1] - w[0];
                // Branch cut crossings are not real length.
                let d = Complex64::new(d.re, reduce_angle(d.im).1);
                len += d.norm();
            }
            slack = slack.max(len);
            lengths.push(len);
            for l in logs {
                // Each sample with its two neighbouring periods.
                for shift in [-TAU, 0.0, TAU] {
                    pts.push(Complex64::new(l.re, l.im + shift));
                    owner.push(k + 1);
                }
            }
        }
        Ok(ParticleAtlas {
            cluster,
            resolution,
            coarse: PointIndex::new(pts)?,
            owner,
            slack,
            lengths,
            fine: Mutex::new(HashMap::new()),
        })
    }

    fn fine_curve(&self, k: usize) -> PlanarSet {
        if let Some(c) = self.fine.lock().unwrap().get(&k) {
            return c.clone();
        }
        let c = self
            .cluster
            .particle_curve(k, self.resolution)
            .expect("particle index in range");
        self.fine.lock().unwrap().insert(k, c.clone());
        c
    }

    /// Distance from the log-coordinate point `z` to particle `k`'s curve,
    /// over the translates `z + 2 pi i m`, `m in {-1, 0, 1}`.
    pub fn distance_to(&self, k: usize, z: Complex64) -> f64 {
        let curve = PlanarSet::new(log_curve(&self.fine_curve(k).points, z.im));
        [-TAU, 0.0, TAU]
            .iter()
            .map(|&s| curve.polyline_distance(Complex64::new(z.re, z.im + s)))
            .fold(f64::INFINITY, f64::min)
    }

    /// The particle closest to `z` (ties to the smaller index) and its distance.
    ///
    /// Candidates are visited in order of the lower bound
    /// `coarse distance - 2 * coarse length`, stopping once the bound exceeds
    /// the best fine distance found.
    pub fn nearest_particle(&self, z: Complex64) -> (usize, f64) {
        let z = Complex64::new(z.re, reduce_angle(z.im).1);
        let (i0, _) = self.coarse.nearest(z);
        let k0 = self.owner[i0];
        let mut best = (k0, self.distance_to(k0, z));
        let mut hits = Vec::new();
        self.coarse.within(z, best.1 + 2.0 * self.slack, &mut hits);
        let mut bounds: HashMap<usize, f64> = HashMap::new();
        for i in hits {
            let k = self.owner[i];
            let lb = (self.coarse.points()[i] - z).norm() - 2.0 * self.lengths[k - 1];
            let e = bounds.entry(k).or_insert(f64::INFINITY);
            *e = e.min(lb);
        }
        let mut cands: Vec<(f64, usize)> = bounds.into_iter().map(|(k, lb)| (lb, k)).collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (lb, k) in cands {
            if lb > best.1 {
                break;
            }
            if k == k0 {
                continue;
            }
            let d = self.distance_to(k, z);
            if d < best.1 || (d == best.1 && k < best.0) {
                best = (k, d);
            }
        }
        best
    }
}

/// A finger: the chain from a particle down to the disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerSet {
    pub seed: Complex64,
    /// Particle indices, child to ancestor, strictly decreasing.
    pub chain: Vec<usize>,
    /// `a(z)`: `i` times the lifted disc angle below the root particle.
    pub base_point: Complex64,
    /// Chain particle curves in log coordinates, plus the base point.
    pub points: PlanarSet,
    /// Lift of the first chain particle's attachment angle.
    pub start_lift: f64,
}

/// Backward walk from the attachment angle of particle `n0`, recording the
/// lift at every level `n0 - 1, ..., 0` and the absorption levels.
///
/// Returns `(track, chain)` where `track[k]` is the lift at level `k`.
pub fn finger_track(cluster: &ClusterState, n0: usize, lift: f64) -> Result<(Vec<f64>, Vec<usize>)> {
    let rec = cluster.record(n0)?;
    let spec = cluster.spec();
    let q = spec.q;
    let thetas = cluster.thetas();
    let mut track = vec![0.0; n0];
    let mut chain = vec![rec.index];
    let mut x = lift;
    for k in (1..n0).rev() {
        track[k] = x;
        let theta = thetas[k - 1];
        if reduce_angle(x - theta).1.abs() < q {
            chain.push(k);
        }
        x = rotated_step(spec, MapDirection::F, Version::Plus, theta, x);
    }
    track[0] = x;
    Ok((track, chain))
}

/// The finger through the particle nearest to the log-coordinate point `z`.
pub fn finger_of(atlas: &ParticleAtlas<'_>, z: Complex64) -> Result<FingerSet> {
    if z.re < 0.0 {
        return Err(Hl0Error::domain(format!("seed {z} has negative real part")));
    }
    let (n0, _) = atlas.nearest_particle(z);
    finger_from_particle(atlas.cluster, n0, z)
}

/// The finger starting at particle `n0`, with lifts chosen near `im(seed)`.
pub fn finger_from_particle(cluster: &ClusterState, n0: usize, seed: Complex64) -> Result<FingerSet> {
    let rec = cluster.record(n0)?;
    let start = rec.theta + TAU * ((seed.im - rec.theta) / TAU).round();
    let (track, _) = finger_track(cluster, n0, start)?;
    // Chain from the stored genealogy.
    let mut chain = vec![n0];
    let mut k = n0;
    while cluster.records()[k - 1].parent != 0 {
        k = cluster.records()[k - 1].parent;
        chain.push(k);
    }
    let base_point = Complex64::new(0.0, track[0]);
    let res = search_resolution(cluster.spec().delta);
    let mut points = Vec::new();
    for &m in &chain {
        let near = if m == n0 { start } else { track[m] };
        let curve = cluster.particle_curve(m, res)?;
        points.extend(log_curve(&curve.points, near));
    }
    points.push(base_point);
    Ok(FingerSet {
        seed,
        chain,
        base_point,
        points: PlanarSet::new(points),
        start_lift: start,
    })
}

/// A gap proxy: the forward flow orbit of a boundary angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTrajectory {
    pub seed: Complex64,
    pub levels: Vec<usize>,
    pub angles: Vec<f64>,
    /// `c k + i angle_k`.
    pub points: PlanarSet,
}

/// Starting level `ceil(re(z) / c)`, starting angle `im(z)` taken as a
/// boundary angle at that level, evolved forward up to level `upto`.
pub fn gap_proxy_of(cluster: &ClusterState, z: Complex64, upto: usize) -> Result<GapTrajectory> {
    if z.re < 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Hl0Error::domain(format!("seed {z} must be finite with re >= 0")));
    }
    if upto > cluster.n() {
        return Err(Hl0Error::OutOfRange {
            index: upto,
            max: cluster.n(),
        });
    }
    let spec = cluster.spec();
    let m = ((z.re / spec.c) - 1e-9).ceil().max(0.0) as usize;
    let mut levels = Vec::new();
    let mut angles = Vec::new();
    let mut x = z.im;
    if m <= upto {
        levels.push(m);
        angles.push(x);
        for k in m..upto {
            x = rotated_step(spec, MapDirection::G, Version::Plus, cluster.thetas()[k], x);
            levels.push(k + 1);
            angles.push(x);
        }
    }
    let points = levels
        .iter()
        .zip(&angles)
        .map(|(&k, &a)| Complex64::new(spec.c * k as f64, a))
        .collect();
    Ok(GapTrajectory {
        seed: z,
        levels,
        angles,
        points: PlanarSet::new(points),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingKind {
    /// `(delta* r, theta)`.
    Sigma,
    /// `(r, theta / sqrt(delta*))`.
    SigmaBar,
}

impl std::str::FromStr for ScalingKind {
    type Err = Hl0Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigma" => Ok(ScalingKind::Sigma),
            "sigmabar" | "sigma_bar" => Ok(ScalingKind::SigmaBar),
            other => Err(Hl0Error::domain(format!("unknown scaling `{other}`"))),
        }
    }
}

/// Points after `sigma` or `sigma_bar`.
///
/// Scaling by `delta* < 1` is not injective on doubles, so each scaled
/// coordinate carries its exact rounding residual; [`ScaledSet::inverse`]
/// uses it to recover the original points bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledSet {
    pub points: Vec<[f64; 2]>,
    pub scaling: ScalingKind,
    pub delta_star: f64,
    residuals: Vec<f64>,
}

pub fn rescale(points: &PlanarSet, spec: &ParticleSpec, which: ScalingKind) -> ScaledSet {
    rescale_with(points, spec.delta_star, which)
}

pub fn rescale_with(points: &PlanarSet, delta_star: f64, which: ScalingKind) -> ScaledSet {
    let mut out = Vec::with_capacity(points.len());
    let mut residuals = Vec::with_capacity(points.len());
    for w in &points.points {
        match which {
            ScalingKind::Sigma => {
                let s = delta_star * w.re;
                // Exact: delta* r = s + e.
                residuals.push(delta_star.mul_add(w.re, -s));
                out.push([s, w.im]);
            }
            ScalingKind::SigmaBar => {
                let k = delta_star.sqrt();
                let x = w.im / k;
                // Exact: theta = x k + e.
                residuals.push((-x).mul_add(k, w.im));
                out.push([w.re, x]);
            }
        }
    }
    ScaledSet {
        points: out,
        scaling: which,
        delta_star,
        residuals,
    }
}

impl ScaledSet {
    /// The original log-coordinate points.
    pub fn inverse(&self) -> PlanarSet {
        let pts = self
            .points
            .iter()
            .zip(&self.residuals)
            .map(|(&[s, x], &e)| match self.scaling {
                ScalingKind::Sigma => {
                    // r = (s + e) / delta*, with one correction step.
                    let a = self.delta_star;
                    let q = s / a;
                    let rem = (-q).mul_add(a, s) + e;
                    Complex64::new(q + rem / a, x)
                }
                ScalingKind::SigmaBar => Complex64::new(s, x.mul_add(self.delta_star.sqrt(), e)),
            })
            .collect();
        PlanarSet::new(pts)
    }

    /// The points as a planar set `s + i x`.
    pub fn as_planar(&self) -> PlanarSet {
        PlanarSet::new(self.points.iter().map(|&[s, x]| Complex64::new(s, x)).collect())
    }
}

/// Proof-scale parameters of the shrinking-particle arguments, surfaced for
/// reports only: `eps = delta^{2/3} (log 1/delta)^8`, `nu = (log 1/delta)^2`,
/// `eta = delta^{2/3} (log 1/delta)^6`.
pub fn proof_scale_parameters(delta: f64) -> (f64, f64, f64) {
    let l = (1.0 / delta).ln();
    let d23 = delta.powf(2.0 / 3.0);
    (d23 * l.powi(8), l * l, d23 * l.powi(6))
}
