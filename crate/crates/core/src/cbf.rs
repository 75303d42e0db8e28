//! Finite families of coalescing Brownian motions on the line and on the
//! circle `R / 2pi Z`, and the analytic collision law of a pair.

use std::f64::consts::{PI, SQRT_2, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Hl0Error, Result};
use crate::flow::{FlowTrajectory, Scaling};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CbfDomain {
    Line,
    Circle,
}

impl std::str::FromStr for CbfDomain {
    type Err = Hl0Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "line" => Ok(CbfDomain::Line),
            "circle" => Ok(CbfDomain::Circle),
            other => Err(Hl0Error::domain(format!("unknown domain `{other}`"))),
        }
    }
}

/// A starting time and position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbfStart {
    pub s: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbfConfig {
    pub domain: CbfDomain,
    pub starts: Vec<CbfStart>,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub bridge_correction: bool,
}

fn default_true() -> bool {
    true
}

impl CbfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Hl0Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        if self.starts.is_empty() {
            return Err(Hl0Error::Config("no starting points".into()));
        }
        for st in &self.starts {
            if !st.s.is_finite() || !st.x.is_finite() || st.s > self.horizon {
                return Err(Hl0Error::Config(format!(
                    "start ({}, {}) must be finite with s <= horizon {}",
                    st.s, st.x, self.horizon
                )));
            }
        }
        Ok(())
    }

    fn t0(&self) -> f64 {
        self.starts.iter().map(|s| s.s).fold(f64::INFINITY, f64::min)
    }

    fn steps(&self) -> usize {
        ((self.horizon - self.t0()) / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// Grid index at which a start becomes active: the first grid time at or
    /// after its starting time.
    fn activation_step(&self, s: f64) -> usize {
        ((s - self.t0()) / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Output of one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct CbfRun {
    /// Per start, in input order (empty unless recording was requested).
    pub trajectories: Vec<FlowTrajectory>,
    /// `collision[i][j]`: time at which `i` and `j` coalesced.
    pub collision: Vec<Vec<Option<f64>>>,
}

struct Engine<'a> {
    cfg: &'a CbfConfig,
    order: Vec<usize>,
    lift: Vec<f64>,
    active: Vec<bool>,
    leader: Vec<(usize, f64)>,
    members: Vec<Vec<usize>>,
    // Winding offset so that x_j - x_i + offset starts in [0, 2pi) (circle)
    // or orientation sign (line), for active leader pairs.
    offset: Vec<f64>,
    collision: Vec<Vec<Option<f64>>>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a CbfConfig) -> Self {
        let n = cfg.starts.len();
        // Canonical processing order by (s, x) makes the output
        // independent of the labelling.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (p, q) = (cfg.starts[a], cfg.starts[b]);
            p.s.total_cmp(&q.s).then(p.x.total_cmp(&q.x)).then(a.cmp(&b))
        });
        Engine {
            cfg,
            order,
            lift: vec![f64::NAN; n],
            active: vec![false; n],
            leader: (0..n).map(|i| (i, 0.0)).collect(),
            members: (0..n).map(|i| vec![i]).collect(),
            offset: vec![0.0; n * n],
            collision: vec![vec![None; n]; n],
        }
    }

    fn rank(&self, i: usize) -> usize {
        self.order.iter().position(|&k| k == i).unwrap_or(i)
    }

    fn is_head(&self, i: usize) -> bool {
        self.active[i] && self.leader[i].0 == i
    }

    fn diff(&self, i: usize, j: usize) -> f64 {
        let n = self.lift.len();
        let d = self.lift[j] - self.lift[i];
        match self.cfg.domain {
            CbfDomain::Line => d * self.offset[i * n + j],
            CbfDomain::Circle => d + self.offset[i * n + j],
        }
    }

    /// Sets the pair reference frame for two heads; returns true if they
    /// already coincide.
    fn init_pair(&mut self, i: usize, j: usize) -> bool {
        let n = self.lift.len();
        let d = self.lift[j] - self.lift[i];
        match self.cfg.domain {
            CbfDomain::Line => {
                let s = if d >= 0.0 { 1.0 } else { -1.0 };
                self.offset[i * n + j] = s;
                self.offset[j * n + i] = -s;
                d == 0.0
            }
            CbfDomain::Circle => {
                let r = d.rem_euclid(TAU);
                self.offset[i * n + j] = r - d;
                self.offset[j * n + i] = (-d).rem_euclid(TAU) + d;
                r == 0.0 || r >= TAU
            }
        }
    }

    fn merge(&mut self, a: usize, b: usize, time: f64) {
        let (la, lb) = (self.leader[a].0, self.leader[b].0);
        if la == lb {
            return;
        }
        let (keep, drop) = if self.rank(la) < self.rank(lb) { (la, lb) } else { (lb, la) };
        let winding = match self.cfg.domain {
            CbfDomain::Line => 0.0,
            CbfDomain::Circle => ((self.lift[drop] - self.lift[keep]) / TAU).round(),
        };
        let moved = std::mem::take(&mut self.members[drop]);
        for &i in &self.members[keep] {
            for &j in &moved {
                self.collision[i][j] = Some(time);
                self.collision[j][i] = Some(time);
            }
        }
        for &j in &moved {
            let k = self.leader[j].1 + winding;
            self.leader[j] = (keep, k);
            self.lift[j] = self.lift[keep] + TAU * k;
        }
        self.members[keep].extend(moved);
    }

    fn activate(&mut self, i: usize, time: f64) {
        self.active[i] = true;
        self.lift[i] = self.cfg.starts[i].x;
        let heads: Vec<usize> = self.order.iter().copied().filter(|&h| h != i && self.is_head(h)).collect();
        for h in heads {
            if !self.is_head(i) {
                break;
            }
            if self.init_pair(h, i) {
                self.merge(h, i, time);
            }
        }
    }

    fn heads(&self) -> Vec<usize> {
        self.order.iter().copied().filter(|&i| self.is_head(i)).collect()
    }

    fn all_merged(&self) -> bool {
        self.active.iter().all(|&a| a) && self.heads().len() <= 1
    }

    fn run(mut self, rng: &mut ChaCha8Rng, record: bool) -> CbfRun {
        let cfg = self.cfg;
        let n = cfg.starts.len();
        let t0 = cfg.t0();
        let steps = cfg.steps();
        let sd = cfg.dt.sqrt();
        let activation: Vec<usize> = cfg.starts.iter().map(|s| cfg.activation_step(s.s)).collect();
        let mut rows: Vec<Vec<(usize, f64, f64, i64)>> = vec![Vec::new(); if record { n } else { 0 }];

        for k in 0..=steps {
            let time = (t0 + k as f64 * cfg.dt).min(cfg.horizon.max(t0));
            for idx in 0..n {
                let i = self.order[idx];
                if activation[i] == k {
                    self.activate(i, time);
                }
            }
            if record {
                for (i, row) in rows.iter_mut().enumerate() {
                    if self.active[i] {
                        let l = self.leader[i].0;
                        row.push((k, time, self.lift[i], if l == i { -1 } else { l as i64 }));
                    }
                }
            }
            if k == steps {
                break;
            }
            if !record && self.all_merged() {
                break;
            }
            let h = (cfg.horizon - time).min(cfg.dt);
            let step_sd = if h < cfg.dt { h.sqrt() } else { sd };
            let heads = self.heads();
            let before: Vec<(usize, usize, f64)> = pairs(&heads).map(|(a, b)| (a, b, self.diff(a, b))).collect();
            for &i in &heads {
                let z: f64 = rng.sample(StandardNormal);
                self.lift[i] += step_sd * z;
            }
            for &i in &heads {
                for &j in &self.members[i].clone() {
                    if j != i {
                        self.lift[j] = self.lift[i] + TAU * self.leader[j].1;
                    }
                }
            }
            let end = time + h;
            for (a, b, d0) in before {
                if self.leader[a].0 == self.leader[b].0 {
                    continue;
                }
                let d1 = self.diff(a, b);
                let crossed = match cfg.domain {
                    CbfDomain::Line => d1 <= 0.0,
                    CbfDomain::Circle => {
                        debug_assert!(d1 > -TAU && d1 < 2.0 * TAU, "pair wound more than once in a step");
                        d1 <= 0.0 || d1 >= TAU
                    }
                };
                let hit = crossed || {
                    cfg.bridge_correction && {
                        // Difference has variance 2 h per step.
                        let var = 2.0 * h;
                        let p0 = (-2.0 * d0 * d1 / var).exp();
                        let p = match cfg.domain {
                            CbfDomain::Line => p0,
                            CbfDomain::Circle => {
                                let p1 = (-2.0 * (TAU - d0) * (TAU - d1) / var).exp();
                                1.0 - (1.0 - p0) * (1.0 - p1)
                            }
                        };
                        rng.random::<f64>() < p
                    }
                };
                if hit {
                    self.merge(a, b, end);
                }
            }
        }

        let trajectories = rows
            .into_iter()
            .enumerate()
            .map(|(id, row)| FlowTrajectory {
                point_id: id,
                scaling: Scaling::None,
                steps: row.iter().map(|r| r.0).collect(),
                times: row.iter().map(|r| r.1).collect(),
                angles: row.iter().map(|r| r.2).collect(),
                coalesced_with: row.iter().map(|r| r.3).collect(),
            })
            .collect();
        CbfRun {
            trajectories,
            collision: self.collision,
        }
    }
}

fn pairs(heads: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    heads
        .iter()
        .enumerate()
        .flat_map(move |(a, &i)| heads[a + 1..].iter().map(move |&j| (i, j)))
}

/// One replica with recorded trajectories (ChaCha stream 0 of `seed`).
pub fn simulate_cbf(config: &CbfConfig) -> Result<Vec<FlowTrajectory>> {
    Ok(simulate_replica(config, 0, true)?.trajectories)
}

/// Replica `stream` of `config`; records trajectories on request.
pub fn simulate_replica(config: &CbfConfig, stream: u64, record: bool) -> Result<CbfRun> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, stream);
    Ok(Engine::new(config).run(&mut rng, record))
}

/// Pairwise collision times over `runs` replicas (streams `0..runs`), in
/// parallel. Each run stops once every point has merged.
pub fn collision_times(config: &CbfConfig, runs: usize) -> Result<Vec<Vec<Vec<Option<f64>>>>> {
    config.validate()?;
    Ok((0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(config.seed, r);
            Engine::new(config).run(&mut rng, false).collision
        })
        .collect())
}

#[inline]
fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

const SERIES_TOL: f64 = 1e-10;

/// `P(T <= t)` where `T` is the first time a Brownian motion of variance
/// `2 t` started at `d` hits 0 (line) or `{0, 2pi}` (circle).
pub fn pair_collision_cdf(domain: CbfDomain, d: f64, t: f64) -> Result<f64> {
    if !(d >= 0.0) || !(t >= 0.0) {
        return Err(Hl0Error::domain(format!("need d >= 0 and t >= 0, got d = {d}, t = {t}")));
    }
    if domain == CbfDomain::Circle && d > TAU {
        return Err(Hl0Error::domain(format!("circle distance d = {d} exceeds 2pi")));
    }
    if d == 0.0 || (domain == CbfDomain::Circle && d == TAU) {
        return Ok(1.0);
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(match domain {
        CbfDomain::Line => libm::erfc(d / (2.0 * t.sqrt())),
        CbfDomain::Circle => {
            if (2.0 * t).sqrt() < TAU {
                1.0 - circle_survival_images(d, t)
            } else {
                1.0 - circle_survival_eigen(d, t)
            }
        }
    })
}

/// Survival in `(0, 2pi)` by the method of images.
pub fn circle_survival_images(d: f64, t: f64) -> f64 {
    let l = TAU;
    let s = (2.0 * t).sqrt();
    let term = |k: f64| {
        let sh = 2.0 * k * l;
        normal_cdf((l - d + sh) / s) - normal_cdf((-d + sh) / s) - normal_cdf((l + d + sh) / s)
            + normal_cdf((d + sh) / s)
    };
    let mut total = term(0.0);
    let mut k = 1.0;
    loop {
        let (a, b) = (term(k), term(-k));
        total += a + b;
        if a.abs() + b.abs() < SERIES_TOL * 1e-2 && 2.0 * k * l > 8.0 * s + l {
            break;
        }
        k += 1.0;
    }
    total.clamp(0.0, 1.0)
}

/// Survival in `(0, 2pi)` by the sine series.
pub fn circle_survival_eigen(d: f64, t: f64) -> f64 {
    let mut total = 0.0;
    let mut n = 1.0;
    loop {
        let w = 4.0 / (n * PI) * (-n * n * t / 4.0).exp();
        total += w * (n * d / 2.0).sin();
        if w < SERIES_TOL * 1e-2 {
            break;
        }
        n += 2.0;
    }
    total.clamp(0.0, 1.0)
}
