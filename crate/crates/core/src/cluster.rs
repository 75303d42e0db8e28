//! HL(0) clusters: growth by composition of rotated particle maps,
//! evaluation of the forward and backward cluster maps, and genealogy.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Hl0Error, Result};
use crate::geometry::PlanarSet;
use crate::monotone::reduce_angle;
use crate::particle::{Family, MapDirection, ParticleSpec, Version, BOUNDARY_EPS};
use crate::rng::sample_thetas;

/// One particle of a grown cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleRecord {
    /// 1-based arrival index.
    pub index: usize,
    pub theta: f64,
    /// `Phi_{index-1}(e^{i theta})`; NaN when skipped by thinning.
    pub attach_point: Complex64,
    /// Index of the particle the new one attaches to, 0 for the unit disc.
    pub parent: usize,
    /// Angle offset relative to the parent's attachment angle, in `(-q, q)`
    /// when `parent > 0`; the pulled-back disc angle (a lift) otherwise.
    pub local_coord: f64,
}

/// Result of pulling a point back through `Gamma_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pullback {
    Point(Complex64),
    /// The point belongs to `K_j \ K_{j-1}` (`j = 0`: the closed unit disc).
    Swallowed(usize),
}

/// A grown cluster. Immutable once built.
#[derive(Debug, Clone)]
pub struct ClusterState {
    spec: ParticleSpec,
    seed: u64,
    thetas: Vec<f64>,
    rotations: Vec<Complex64>,
    records: Vec<ParticleRecord>,
}

impl PartialEq for ClusterState {
    fn eq(&self, other: &Self) -> bool {
        // Bitwise on floats so NaN placeholders of thinned records compare equal.
        let same_f = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.spec.family == other.spec.family
            && same_f(self.spec.delta, other.spec.delta)
            && self.seed == other.seed
            && self.thetas.len() == other.thetas.len()
            && self.thetas.iter().zip(&other.thetas).all(|(a, b)| same_f(*a, *b))
            && self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.index == b.index
                    && a.parent == b.parent
                    && same_f(a.theta, b.theta)
                    && same_f(a.attach_point.re, b.attach_point.re)
                    && same_f(a.attach_point.im, b.attach_point.im)
                    && same_f(a.local_coord, b.local_coord)
            })
    }
}

#[inline]
fn rotation(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

impl ClusterState {
    /// Grows `n` particles with angles drawn from `seed` (see [`crate::rng`]).
    pub fn grow(spec: &ParticleSpec, n: usize, seed: u64) -> Self {
        Self::from_thetas(spec, seed, sample_thetas(n, seed), 1)
    }

    /// Like [`grow`](Self::grow) but computes attachment points only for
    /// every `thin`-th particle (and the last one); the rest hold NaN.
    /// Genealogy is always complete.
    pub fn grow_thinned(spec: &ParticleSpec, n: usize, seed: u64, thin: usize) -> Self {
        Self::from_thetas(spec, seed, sample_thetas(n, seed), thin)
    }

    /// Builds the cluster for a prescribed angle sequence.
    pub fn from_thetas(spec: &ParticleSpec, seed: u64, thetas: Vec<f64>, thin: usize) -> Self {
        let thin = thin.max(1);
        let rotations: Vec<Complex64> = thetas.iter().map(|&t| rotation(t)).collect();
        let mut state = ClusterState {
            spec: spec.clone(),
            seed,
            thetas,
            rotations,
            records: Vec::new(),
        };
        let n = state.thetas.len();
        let records: Vec<ParticleRecord> = (1..=n)
            .into_par_iter()
            .map(|k| {
                let theta = state.thetas[k - 1];
                let attach_point = if k % thin == 0 || k == n || thin == 1 {
                    state.phi_unchecked(k - 1, state.rotations[k - 1])
                } else {
                    Complex64::new(f64::NAN, f64::NAN)
                };
                let (parent, local_coord) = state.genealogy(k);
                ParticleRecord {
                    index: k,
                    theta,
                    attach_point,
                    parent,
                    local_coord,
                }
            })
            .collect();
        state.records = records;
        state
    }

    /// Reassembles a cluster from stored parts, checking consistency.
    pub fn from_parts(
        spec: ParticleSpec,
        seed: u64,
        thetas: Vec<f64>,
        records: Vec<ParticleRecord>,
    ) -> Result<Self> {
        if records.len() != thetas.len() {
            return Err(Hl0Error::Config(format!(
                "{} records for {} angles",
                records.len(),
                thetas.len()
            )));
        }
        for (i, r) in records.iter().enumerate() {
            if r.index != i + 1 || r.parent >= r.index || r.theta.to_bits() != thetas[i].to_bits() {
                return Err(Hl0Error::Config(format!("inconsistent record {}", i + 1)));
            }
        }
        let rotations = thetas.iter().map(|&t| rotation(t)).collect();
        Ok(ClusterState {
            spec,
            seed,
            thetas,
            rotations,
            records,
        })
    }

    pub fn spec(&self) -> &ParticleSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn records(&self) -> &[ParticleRecord] {
        &self.records
    }

    pub fn record(&self, n: usize) -> Result<&ParticleRecord> {
        self.check_index(n)?;
        Ok(&self.records[n - 1])
    }

    /// Logarithmic capacity of `K_n`, which is `c n` by construction.
    pub fn capacity(&self) -> f64 {
        self.spec.c * self.n() as f64
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n() {
            Err(Hl0Error::OutOfRange {
                index: n,
                max: self.n(),
            })
        } else {
            Ok(())
        }
    }

    fn check_level(&self, k: usize) -> Result<()> {
        if k > self.n() {
            Err(Hl0Error::OutOfRange {
                index: k,
                max: self.n(),
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn phi_unchecked(&self, k: usize, z: Complex64) -> Complex64 {
        let mut w = z;
        for j in (0..k).rev() {
            let rot = self.rotations[j];
            w = rot * self.spec.map_f_exterior(w * rot.conj());
        }
        w
    }

    /// `Phi_k(z) = F_1(...F_k(z))`. Points on the unit circle are evaluated
    /// as limits from outside.
    pub fn eval_phi(&self, k: usize, z: Complex64) -> Result<Complex64> {
        self.check_level(k)?;
        let m = z.norm();
        if !m.is_finite() || m < 1.0 - 1e-9 {
            return Err(Hl0Error::domain(format!(
                "|z| = {m} is not in the closed exterior of the unit disc"
            )));
        }
        Ok(self.phi_unchecked(k, z))
    }

    /// `Gamma_k(z) = G_k(...G_1(z))`, or the step at which `z` is swallowed.
    pub fn eval_gamma(&self, k: usize, z: Complex64) -> Result<Pullback> {
        self.check_level(k)?;
        let outside = |w: Complex64| w.norm_sqr() > (1.0 + BOUNDARY_EPS) * (1.0 + BOUNDARY_EPS);
        if !outside(z) {
            return Ok(Pullback::Swallowed(0));
        }
        let mut w = z;
        for j in 0..k {
            let rot = self.rotations[j];
            match self.spec.try_map_g(w * rot.conj()) {
                Some(v) if outside(v) => w = rot * v,
                _ => return Ok(Pullback::Swallowed(j + 1)),
            }
        }
        Ok(Pullback::Point(w))
    }

    fn genealogy(&self, n: usize) -> (usize, f64) {
        let q = self.spec.q;
        let mut x = self.thetas[n - 1];
        for k in (1..n).rev() {
            let theta = self.thetas[k - 1];
            let rel = x - theta;
            let (_, r) = reduce_angle(rel);
            if r.abs() < q {
                return (k, r);
            }
            x = theta + self.spec.circle_lift(MapDirection::F, Version::Plus, rel);
        }
        (0, x)
    }

    /// The particle that particle `n` attaches to and the local coordinate
    /// of the attachment on it.
    pub fn parent_of(&self, n: usize) -> Result<(usize, f64)> {
        self.check_index(n)?;
        Ok(self.genealogy(n))
    }

    /// `resolution` points along the rotated basic particle `e^{i Theta_n} P`
    /// in boundary order. Slit: base to tip and back (both sides); arc: from
    /// one foot to the other.
    fn basic_boundary(&self, n: usize, resolution: usize, both_sides: bool) -> Vec<Complex64> {
        let rot = self.rotations[n - 1];
        let m = resolution.max(2);
        (0..m)
            .map(|i| {
                let u = i as f64 / (m - 1) as f64;
                let z = match self.spec.family {
                    Family::Slit => {
                        let s = if both_sides {
                            self.spec.delta * (1.0 - (2.0 * u - 1.0).abs())
                        } else {
                            self.spec.delta * u
                        };
                        Complex64::new(1.0 + s, 0.0)
                    }
                    Family::Arc => {
                        // |w| = r maps onto the bounding circle of the cap.
                        let r = self.spec.r.unwrap_or(0.0);
                        let w = Complex64::from_polar(r, -FRAC_PI_2 + PI * u);
                        (1.0 + w) / (1.0 - w)
                    }
                };
                rot * z
            })
            .collect()
    }

    /// The image `Phi_{n-1}(e^{i Theta_n} dP)` sampled at `resolution`
    /// points, in order.
    pub fn particle_boundary(&self, n: usize, resolution: usize) -> Result<PlanarSet> {
        self.check_index(n)?;
        if resolution < 2 {
            return Err(Hl0Error::domain("resolution must be at least 2"));
        }
        let pts = self
            .basic_boundary(n, resolution, true)
            .into_iter()
            .map(|z| self.phi_unchecked(n - 1, z))
            .collect();
        Ok(PlanarSet::new(pts))
    }

    /// A single polyline tracing particle `n` (the slit is drawn once rather
    /// than there and back). Used for rendering and nearest-particle search.
    pub fn particle_curve(&self, n: usize, resolution: usize) -> Result<PlanarSet> {
        self.check_index(n)?;
        let pts = self
            .basic_boundary(n, resolution, false)
            .into_iter()
            .map(|z| self.phi_unchecked(n - 1, z))
            .collect();
        Ok(PlanarSet::new(pts))
    }

    /// Curves for every particle, computed in parallel.
    pub fn all_particle_curves(&self, resolution: usize) -> Vec<PlanarSet> {
        (1..=self.n())
            .into_par_iter()
            .map(|k| {
                let pts = self
                    .basic_boundary(k, resolution, false)
                    .into_iter()
                    .map(|z| self.phi_unchecked(k - 1, z))
                    .collect();
                PlanarSet::new(pts)
            })
            .collect()
    }

    /// Serializable form of the cluster.
    pub fn to_doc(&self) -> ClusterDoc {
        let nan_to_none = |v: f64| if v.is_nan() { None } else { Some(v) };
        ClusterDoc {
            family: self.spec.family,
            delta: self.spec.delta,
            seed: self.seed,
            n: self.n(),
            thetas: self.thetas.clone(),
            records: self
                .records
                .iter()
                .map(|r| RecordDoc {
                    index: r.index,
                    theta: r.theta,
                    attach_re: nan_to_none(r.attach_point.re),
                    attach_im: nan_to_none(r.attach_point.im),
                    parent: r.parent,
                    local_coord: r.local_coord,
                })
                .collect(),
        }
    }

    /// Rebuilds a cluster from its serialized form. Derived particle
    /// constants are recomputed from `family` and `delta`.
    pub fn from_doc(doc: ClusterDoc) -> Result<Self> {
        if doc.n != doc.thetas.len() {
            return Err(Hl0Error::Config(format!(
                "n = {} but {} angles stored",
                doc.n,
                doc.thetas.len()
            )));
        }
        let spec = ParticleSpec::new(doc.family, doc.delta)?;
        let records = doc
            .records
            .into_iter()
            .map(|r| ParticleRecord {
                index: r.index,
                theta: r.theta,
                attach_point: Complex64::new(
                    r.attach_re.unwrap_or(f64::NAN),
                    r.attach_im.unwrap_or(f64::NAN),
                ),
                parent: r.parent,
                local_coord: r.local_coord,
            })
            .collect();
        Self::from_parts(spec, doc.seed, doc.thetas, records)
    }
}

/// JSON layout of a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDoc {
    pub family: Family,
    pub delta: f64,
    pub seed: u64,
    pub n: usize,
    pub thetas: Vec<f64>,
    pub records: Vec<RecordDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordDoc {
    pub index: usize,
    pub theta: f64,
    /// `null` for thinned records.
    pub attach_re: Option<f64>,
    pub attach_im: Option<f64>,
    pub parent: usize,
    pub local_coord: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slit(delta: f64) -> ParticleSpec {
        ParticleSpec::new(Family::Slit, delta).unwrap()
    }

    #[test]
    fn empty_cluster() {
        let c = ClusterState::grow(&slit(0.1), 0, 3);
        assert_eq!(c.n(), 0);
        assert_eq!(c.capacity(), 0.0);
        let z = Complex64::new(2.0, 1.0);
        assert_eq!(c.eval_phi(0, z).unwrap(), z);
    }

    #[test]
    fn first_particle_is_rotated_basic_particle() {
        let spec = slit(0.1);
        let c = ClusterState::grow(&spec, 3, 11);
        let r = &c.records()[0];
        assert_eq!(r.parent, 0);
        assert_eq!(r.local_coord, c.thetas()[0]);
        let b = c.particle_boundary(1, 5).unwrap();
        let rot = rotation(c.thetas()[0]);
        for (z, s) in b.points.iter().zip([0.0, 0.05, 0.1, 0.05, 0.0]) {
            assert!((z - rot * (1.0 + s)).norm() < 1e-15);
        }
    }

    #[test]
    fn resolution_two_gives_base_twice() {
        let c = ClusterState::grow(&slit(0.1), 20, 5);
        let b = c.particle_boundary(20, 2).unwrap();
        let a = c.records()[19].attach_point;
        assert_eq!(b.points[0], a);
        assert_eq!(b.points[1], a);
        assert!(c.particle_boundary(20, 1).is_err());
        assert!(c.particle_boundary(21, 4).is_err());
    }

    #[test]
    fn swallowed_conventions() {
        let c = ClusterState::grow(&slit(0.2), 10, 1);
        assert_eq!(c.eval_gamma(10, Complex64::new(0.5, 0.0)).unwrap(), Pullback::Swallowed(0));
        // A point on the middle of particle 1.
        let on_first = rotation(c.thetas()[0]) * 1.1;
        assert_eq!(c.eval_gamma(10, on_first).unwrap(), Pullback::Swallowed(1));
        // Unaffected at level 0.
        assert_eq!(c.eval_gamma(0, on_first).unwrap(), Pullback::Point(on_first));
    }

    #[test]
    fn out_of_range_errors() {
        let c = ClusterState::grow(&slit(0.1), 4, 1);
        assert!(matches!(c.parent_of(0), Err(Hl0Error::OutOfRange { .. })));
        assert!(matches!(c.parent_of(5), Err(Hl0Error::OutOfRange { .. })));
        assert!(c.eval_phi(5, Complex64::new(2.0, 0.0)).is_err());
        assert!(c.eval_phi(2, Complex64::new(0.2, 0.0)).is_err());
    }

    #[test]
    fn thinning_keeps_genealogy() {
        let spec = slit(0.1);
        let full = ClusterState::grow(&spec, 40, 9);
        let thin = ClusterState::grow_thinned(&spec, 40, 9, 7);
        for (a, b) in full.records().iter().zip(thin.records()) {
            assert_eq!(a.parent, b.parent);
            assert_eq!(a.local_coord, b.local_coord);
            if a.index % 7 == 0 || a.index == 40 {
                assert_eq!(a.attach_point, b.attach_point);
            } else {
                assert!(b.attach_point.re.is_nan());
            }
        }
    }

    #[test]
    fn doc_round_trip() {
        let spec = slit(0.1);
        let c = ClusterState::grow_thinned(&spec, 30, 4, 3);
        let json = serde_json::to_string(&c.to_doc()).unwrap();
        let back = ClusterState::from_doc(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
