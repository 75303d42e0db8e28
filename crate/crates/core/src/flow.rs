//! The discrete harmonic-measure flow on boundary angles.
//!
//! Forward flow (escape points): `Phi_{nm} = g_{Theta_n} o ... o g_{Theta_{m+1}}`.
//! Backward flow (ancestors): `Phi_{mn} = f_{Theta_{m+1}} o ... o f_{Theta_n}`.
//! Here `g_Theta(x) = Theta + g(x - Theta)` and likewise for `f`. All maps act
//! on lifts in R, never on reduced angles.

use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterState;
use crate::error::{Hl0Error, Result};
use crate::monotone::{reduce_angle, MonotonePair};
use crate::particle::{MapDirection, ParticleSpec, Version};

/// Reduced lift differences below this count as exact coalescence.
pub const COALESCENCE_TOL: f64 = 1e-12;

const SMALL_FAMILY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowDirection {
    /// g-maps, from level `m` up to level `n`.
    Forward,
    /// f-maps, from level `n` down to level `m`.
    Backward,
}

impl FlowDirection {
    fn map(self) -> MapDirection {
        match self {
            FlowDirection::Forward => MapDirection::G,
            FlowDirection::Backward => MapDirection::F,
        }
    }
}

impl std::str::FromStr for FlowDirection {
    type Err = Hl0Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(FlowDirection::Forward),
            "backward" => Ok(FlowDirection::Backward),
            other => Err(Hl0Error::domain(format!("unknown flow direction `{other}`"))),
        }
    }
}

/// Time axis of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// Raw level `k`, raw angles.
    #[default]
    None,
    /// Time `k / rho`, raw angles.
    Long,
    /// Time `c k`, angles divided by `sqrt(delta*)`.
    Local,
}

impl std::str::FromStr for Scaling {
    type Err = Hl0Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Scaling::None),
            "long" => Ok(Scaling::Long),
            "local" => Ok(Scaling::Local),
            other => Err(Hl0Error::domain(format!("unknown scaling `{other}`"))),
        }
    }
}

impl Scaling {
    pub fn time(self, spec: &ParticleSpec, level: usize) -> f64 {
        match self {
            Scaling::None => level as f64,
            Scaling::Long => level as f64 / spec.rho,
            Scaling::Local => spec.c * level as f64,
        }
    }

    pub fn angle(self, spec: &ParticleSpec, lift: f64) -> f64 {
        match self {
            Scaling::Local => lift / spec.delta_star.sqrt(),
            _ => lift,
        }
    }
}

/// Levels `m <= n` and the direction and version of a flow composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowQuery {
    pub m: usize,
    pub n: usize,
    pub direction: FlowDirection,
    pub version: Version,
}

impl FlowQuery {
    pub fn forward(m: usize, n: usize) -> Self {
        FlowQuery {
            m,
            n,
            direction: FlowDirection::Forward,
            version: Version::Plus,
        }
    }

    pub fn backward(m: usize, n: usize) -> Self {
        FlowQuery {
            m,
            n,
            direction: FlowDirection::Backward,
            version: Version::Plus,
        }
    }

    pub fn with_version(mut self, version: Version) -> Self {
        self.version = version;
        self
    }

    fn validate(&self, levels: usize) -> Result<()> {
        if self.m > self.n {
            return Err(Hl0Error::domain(format!("m = {} exceeds n = {}", self.m, self.n)));
        }
        if self.n > levels {
            return Err(Hl0Error::OutOfRange {
                index: self.n,
                max: levels,
            });
        }
        Ok(())
    }
}

/// One rotated circle map step `Theta + h(x - Theta)`.
#[inline]
pub fn rotated_step(
    spec: &ParticleSpec,
    direction: MapDirection,
    version: Version,
    theta: f64,
    x: f64,
) -> f64 {
    theta + spec.circle_lift(direction, version, x - theta)
}

/// Applies the flow of `query` for the angle sequence `thetas` to the lift `x`.
pub fn flow_map_thetas(spec: &ParticleSpec, thetas: &[f64], query: FlowQuery, x: f64) -> Result<f64> {
    query.validate(thetas.len())?;
    let dir = query.direction.map();
    let window = &thetas[query.m..query.n];
    let mut y = x;
    match query.direction {
        FlowDirection::Forward => {
            for &th in window {
                y = rotated_step(spec, dir, query.version, th, y);
            }
        }
        FlowDirection::Backward => {
            for &th in window.iter().rev() {
                y = rotated_step(spec, dir, query.version, th, y);
            }
        }
    }
    Ok(y)
}

/// [`flow_map_thetas`] on the angles of a grown cluster.
pub fn flow_map(cluster: &ClusterState, query: FlowQuery, x: f64) -> Result<f64> {
    flow_map_thetas(cluster.spec(), cluster.thetas(), query, x)
}

/// The flow of `query` as a monotone pair (both versions).
pub fn flow_pair(cluster: &ClusterState, m: usize, n: usize, direction: FlowDirection) -> Result<MonotonePair> {
    FlowQuery {
        m,
        n,
        direction,
        version: Version::Plus,
    }
    .validate(cluster.n())?;
    let spec = cluster.spec().clone();
    let thetas: Vec<f64> = cluster.thetas()[m..n].to_vec();
    let (s2, t2) = (spec.clone(), thetas.clone());
    let apply = move |spec: &ParticleSpec, thetas: &[f64], version: Version, x: f64| {
        let q = FlowQuery {
            m: 0,
            n: thetas.len(),
            direction,
            version,
        };
        flow_map_thetas(spec, thetas, q, x).unwrap_or(f64::NAN)
    };
    Ok(MonotonePair::new(
        move |x| apply(&spec, &thetas, Version::Plus, x),
        move |x| apply(&s2, &t2, Version::Minus, x),
        Vec::new(),
        true,
    ))
}

/// A real interval with open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    /// `(lo, hi]`, the convention used for flow time windows.
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, true)
    }
}

/// The integers of `rate * I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    /// Smallest and largest integer in `rate * I`.
    Levels { first: i64, last: i64 },
    /// `rate * I` holds no integer; the flow over `I` is the identity.
    Identity,
}

impl Embedding {
    /// The flow levels `(m, n)` with `m + 1 = first`, `n = last`.
    pub fn flow_levels(&self) -> Option<(i64, i64)> {
        match *self {
            Embedding::Levels { first, last } => Some((first - 1, last)),
            Embedding::Identity => None,
        }
    }
}

pub fn embed_interval(interval: Interval, rate: f64) -> Result<Embedding> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Hl0Error::domain(format!("rate = {rate} must be positive")));
    }
    if !(interval.lo <= interval.hi) || !interval.lo.is_finite() || !interval.hi.is_finite() {
        return Err(Hl0Error::domain("interval must be bounded with lo <= hi"));
    }
    let (a, b) = (rate * interval.lo, rate * interval.hi);
    let first = if interval.lo_closed { a.ceil() } else { a.floor() + 1.0 };
    let last = if interval.hi_closed { b.floor() } else { b.ceil() - 1.0 };
    if first > last {
        Ok(Embedding::Identity)
    } else {
        Ok(Embedding::Levels {
            first: first as i64,
            last: last as i64,
        })
    }
}

/// Streaming evolution of finitely many lifts under a shared sequence of
/// rotated circle maps, with exact coalescence bookkeeping.
///
/// Points that meet (difference in `2 pi Z` up to [`COALESCENCE_TOL`]) are
/// merged for good: the follower is carried as `leader + 2 pi k`.
#[derive(Debug, Clone)]
pub struct FlowTracker {
    spec: ParticleSpec,
    direction: MapDirection,
    version: Version,
    lifts: Vec<f64>,
    active: Vec<bool>,
    /// Group leader and winding offset relative to it.
    leader: Vec<(usize, f64)>,
    members: Vec<Vec<usize>>,
    pair_merge: Vec<Option<usize>>,
    step: usize,
}

impl FlowTracker {
    /// All points active from step 0.
    pub fn new(spec: &ParticleSpec, direction: MapDirection, version: Version, starts: &[f64]) -> Self {
        let mut t = Self::with_capacity(spec, direction, version, starts.len());
        for (i, &x) in starts.iter().enumerate() {
            t.lifts[i] = x;
            t.active[i] = true;
        }
        t.merge_pass();
        t
    }

    /// `count` inactive slots; see [`activate`](Self::activate).
    pub fn with_capacity(spec: &ParticleSpec, direction: MapDirection, version: Version, count: usize) -> Self {
        FlowTracker {
            spec: spec.clone(),
            direction,
            version,
            lifts: vec![f64::NAN; count],
            active: vec![false; count],
            leader: (0..count).map(|i| (i, 0.0)).collect(),
            members: (0..count).map(|i| vec![i]).collect(),
            pair_merge: vec![None; count * count],
            step: 0,
        }
    }

    /// Starts point `id` at `lift` before the next step.
    pub fn activate(&mut self, id: usize, lift: f64) {
        self.lifts[id] = lift;
        self.active[id] = true;
        self.merge_pass();
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    pub fn lift(&self, id: usize) -> f64 {
        self.lifts[id]
    }

    pub fn lifts(&self) -> &[f64] {
        &self.lifts
    }

    pub fn is_active(&self, id: usize) -> bool {
        self.active[id]
    }

    /// Leader of the group containing `id` if `id` has merged into another point.
    pub fn coalesced_with(&self, id: usize) -> Option<usize> {
        let l = self.leader[id].0;
        (l != id).then_some(l)
    }

    /// Step count at which `i` and `j` coalesced.
    pub fn pair_coalescence(&self, i: usize, j: usize) -> Option<usize> {
        self.pair_merge[i * self.lifts.len() + j]
    }

    /// Number of distinct active groups.
    pub fn groups(&self) -> usize {
        (0..self.lifts.len())
            .filter(|&i| self.active[i] && self.leader[i].0 == i)
            .count()
    }

    /// Applies the rotated map with angle `theta` to every active point.
    pub fn step(&mut self, theta: f64) {
        let n = self.lifts.len();
        for i in 0..n {
            if self.active[i] && self.leader[i].0 == i {
                self.lifts[i] = rotated_step(&self.spec, self.direction, self.version, theta, self.lifts[i]);
            }
        }
        for i in 0..n {
            let (l, k) = self.leader[i];
            if self.active[i] && l != i {
                self.lifts[i] = self.lifts[l] + TAU * k;
            }
        }
        self.step += 1;
        self.merge_pass();
    }

    fn merge_pass(&mut self) {
        let n = self.lifts.len();
        if n <= SMALL_FAMILY {
            // Pairwise, allocation free: the common Monte Carlo case.
            for i in 0..n {
                if !(self.active[i] && self.leader[i].0 == i) {
                    continue;
                }
                for j in i + 1..n {
                    if self.active[j]
                        && self.leader[j].0 == j
                        && reduce_angle(self.lifts[j] - self.lifts[i]).1.abs() < COALESCENCE_TOL
                    {
                        self.union(i, j);
                    }
                }
            }
            return;
        }
        let mut heads: Vec<(f64, usize)> = (0..n)
            .filter(|&i| self.active[i] && self.leader[i].0 == i)
            .map(|i| (reduce_angle(self.lifts[i]).1, i))
            .collect();
        if heads.len() < 2 {
            return;
        }
        heads.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut pairs = Vec::new();
        for w in heads.windows(2) {
            if w[1].0 - w[0].0 < COALESCENCE_TOL {
                pairs.push((w[0].1, w[1].1));
            }
        }
        let (first, last) = (heads[0], heads[heads.len() - 1]);
        if first.0 + TAU - last.0 < COALESCENCE_TOL {
            pairs.push((first.1, last.1));
        }
        for (a, b) in pairs {
            self.union(a, b);
        }
    }

    fn union(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.leader[a].0, self.leader[b].0);
        if la == lb {
            return;
        }
        let (keep, drop) = if la < lb { (la, lb) } else { (lb, la) };
        let winding = ((self.lifts[drop] - self.lifts[keep]) / TAU).round();
        let n = self.lifts.len();
        let moved = std::mem::take(&mut self.members[drop]);
        for &i in &self.members[keep] {
            for &j in &moved {
                self.pair_merge[i * n + j] = Some(self.step);
                self.pair_merge[j * n + i] = Some(self.step);
            }
        }
        for &j in &moved {
            let k = self.leader[j].1 + winding;
            self.leader[j] = (keep, k);
            self.lifts[j] = self.lifts[keep] + TAU * k;
        }
        self.members[keep].extend(moved);
    }
}

/// A tracked path: levels (or time-grid indices), times and lifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub point_id: usize,
    pub scaling: Scaling,
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    pub angles: Vec<f64>,
    /// Per row: id of the point this one has merged into, or -1.
    pub coalesced_with: Vec<i64>,
}

impl FlowTrajectory {
    /// First row at which the trajectory is merged into another one.
    pub fn coalescence_row(&self) -> Option<usize> {
        self.coalesced_with.iter().position(|&c| c >= 0)
    }
}

/// A start for [`track_points`]: level and lift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowStart {
    pub level: usize,
    pub lift: f64,
}

/// Tracks every start through the cluster's flow.
///
/// Forward: a point starting at level `l <= upto` is pushed through
/// `g_{Theta_{l+1}}, ..., g_{Theta_upto}`. Backward: a point starting at level
/// `l >= upto` is pulled through `f_{Theta_l}, ..., f_{Theta_{upto+1}}`;
/// its rows are stored in increasing level order so times increase.
pub fn track_points(
    cluster: &ClusterState,
    starts: &[FlowStart],
    direction: FlowDirection,
    upto: usize,
    scaling: Scaling,
) -> Result<Vec<FlowTrajectory>> {
    if starts.is_empty() {
        return Err(Hl0Error::Empty("flow starts"));
    }
    if upto > cluster.n() {
        return Err(Hl0Error::OutOfRange {
            index: upto,
            max: cluster.n(),
        });
    }
    for s in starts {
        let ok = match direction {
            FlowDirection::Forward => s.level <= upto,
            FlowDirection::Backward => s.level >= upto && s.level <= cluster.n(),
        };
        if !ok {
            return Err(Hl0Error::domain(format!(
                "start level {} incompatible with upto = {upto} ({direction:?})",
                s.level
            )));
        }
    }
    let spec = cluster.spec();
    let thetas = cluster.thetas();
    let count = starts.len();
    let mut tracker = FlowTracker::with_capacity(spec, direction.map(), Version::Plus, count);
    let mut rows: Vec<Vec<(usize, f64, i64)>> = vec![Vec::new(); count];

    let levels: Vec<usize> = match direction {
        FlowDirection::Forward => {
            let lo = starts.iter().map(|s| s.level).min().unwrap_or(0);
            (lo..=upto).collect()
        }
        FlowDirection::Backward => {
            let hi = starts.iter().map(|s| s.level).max().unwrap_or(upto);
            (upto..=hi).rev().collect()
        }
    };
    for (pos, &level) in levels.iter().enumerate() {
        for (i, s) in starts.iter().enumerate() {
            if s.level == level {
                tracker.activate(i, s.lift);
            }
        }
        for (i, row) in rows.iter_mut().enumerate() {
            if tracker.is_active(i) {
                let with = tracker.coalesced_with(i).map_or(-1, |l| l as i64);
                row.push((level, tracker.lift(i), with));
            }
        }
        if pos + 1 < levels.len() {
            let theta = match direction {
                FlowDirection::Forward => thetas[level],
                FlowDirection::Backward => thetas[level - 1],
            };
            tracker.step(theta);
        }
    }

    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(id, mut row)| {
            if direction == FlowDirection::Backward {
                row.reverse();
            }
            FlowTrajectory {
                point_id: id,
                scaling,
                steps: row.iter().map(|r| r.0).collect(),
                times: row.iter().map(|r| scaling.time(spec, r.0)).collect(),
                angles: row.iter().map(|r| scaling.angle(spec, r.1)).collect(),
                coalesced_with: row.iter().map(|r| r.2).collect(),
            }
        })
        .collect())
}

pub const TRAJECTORY_CSV_HEADER: &str = "step,time,point_id,lift,coalesced_with";

/// Writes trajectories in the shared CSV schema.
pub fn write_trajectories_csv<W: Write>(out: &mut W, trajectories: &[FlowTrajectory]) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for tr in trajectories {
        for i in 0..tr.steps.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                tr.steps[i], tr.times[i], tr.point_id, tr.angles[i], tr.coalesced_with[i]
            )?;
        }
    }
    Ok(())
}

/// Parses the CSV written by [`write_trajectories_csv`]. The scaling is not
/// part of the schema and must be supplied.
pub fn read_trajectories_csv(text: &str, scaling: Scaling) -> Result<Vec<FlowTrajectory>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRAJECTORY_CSV_HEADER => {}
        _ => return Err(Hl0Error::Config("missing trajectory CSV header".into())),
    }
    let mut out: Vec<FlowTrajectory> = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Hl0Error::Config(format!("malformed CSV row {}", ln + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad());
        }
        let step: usize = f[0].parse().map_err(|_| bad())?;
        let time: f64 = f[1].parse().map_err(|_| bad())?;
        let id: usize = f[2].parse().map_err(|_| bad())?;
        let lift: f64 = f[3].parse().map_err(|_| bad())?;
        let with: i64 = f[4].parse().map_err(|_| bad())?;
        let tr = match out.iter_mut().position(|t| t.point_id == id) {
            Some(p) => &mut out[p],
            None => {
                out.push(FlowTrajectory {
                    point_id: id,
                    scaling,
                    steps: Vec::new(),
                    times: Vec::new(),
                    angles: Vec::new(),
                    coalesced_with: Vec::new(),
                });
                out.last_mut().unwrap()
            }
        };
        tr.steps.push(step);
        tr.times.push(time);
        tr.angles.push(lift);
        tr.coalesced_with.push(with);
    }
    Ok(out)
}
