//! Basic particles: closed-form exterior maps, boundary circle maps and the
//! scalar constants derived from them.
//!
//! Two families are supported:
//!
//! * `Slit`: the segment `(1, 1 + delta]`. With `t = delta^2 / (2 + delta)^2`
//!   the normalized map onto the slit domain is
//!   `F(z) = (z + 1 + S)^2 / (4 (1 - t) z)` where
//!   `S^2 = z^2 - 2 (1 - 2t) z + 1` and `S ~ z` at infinity; its inverse is
//!   `G(z) = (sqrt(1 - t) (z + 1) + S')^2 / (4 z)` with
//!   `S'^2 = (1 - t) z^2 - 2 (1 + t) z + (1 - t)`.
//! * `Arc`: the cap `{|z - 1| <= r |z + 1|, |z| > 1}` with `r = delta / (2 - delta)`,
//!   bounded by a circular arc. Here `G(z) = z (gamma z - 1) / (z - gamma)` with
//!   `gamma = (1 - r^2) / (1 + r^2)` and `F` is the exterior root of the
//!   quadratic `gamma w^2 - (1 + z) w + gamma z = 0`.
//!
//! Square roots are taken in the form `z * sqrt(1 - 2a/z + 1/z^2)` with the
//! principal branch: for `|z| >= 1` the radicand never crosses the negative
//! axis except on the particle itself, which fixes the branch that is
//! asymptotic to `z` and equals the limit from the open upper half-plane in
//! the Cayley picture.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Hl0Error, Result};
use crate::monotone::{reduce_angle, MonotonePair};
use crate::quadrature::integrate;

/// Principal complex square root, computed algebraically (the polar route
/// costs a trig round trip per call). Respects the sign of a zero imaginary
/// part on the negative real axis.
#[inline]
pub(crate) fn csqrt(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    if a == 0.0 && b == 0.0 {
        return Complex64::new(0.0, b);
    }
    let m = (a * a + b * b).sqrt();
    if a >= 0.0 {
        let t = (0.5 * (m + a)).sqrt();
        Complex64::new(t, b / (2.0 * t))
    } else {
        let t = (0.5 * (m - a)).sqrt();
        Complex64::new(b.abs() / (2.0 * t), t.copysign(b))
    }
}

/// Points with `|z| <= 1 + BOUNDARY_EPS` count as on or inside the unit circle.
pub const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Slit,
    Arc,
}

impl std::str::FromStr for Family {
    type Err = Hl0Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "slit" => Ok(Family::Slit),
            "arc" => Ok(Family::Arc),
            other => Err(Hl0Error::domain(format!("unknown particle family `{other}`"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Slit => f.write_str("slit"),
            Family::Arc => f.write_str("arc"),
        }
    }
}

/// Which of the two boundary circle maps to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapDirection {
    /// `g`: boundary angle before attachment to boundary angle after (via `G`).
    G,
    /// `f`: the generalized inverse of `g` (via `F`).
    F,
}

/// Right- or left-continuous version of a monotone map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Version {
    #[default]
    Plus,
    Minus,
}

/// A basic particle together with every constant derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSpec {
    pub family: Family,
    /// Particle diameter parameter.
    pub delta: f64,
    /// `delta^2 / (2 + delta)^2` (slit only).
    pub t: Option<f64>,
    /// `delta / (2 - delta)` (arc only).
    pub r: Option<f64>,
    /// `(1 - r^2) / (1 + r^2)` (arc only).
    pub gamma: Option<f64>,
    /// Logarithmic capacity of the unit disc plus particle.
    pub c: f64,
    /// Half-width of the arc of the unit circle the particle touches.
    pub p: f64,
    /// Half-width of the arc mapped onto the particle by `F`.
    pub q: f64,
    /// Normalization with `(rho / 2pi) * int g0^2 = 1`.
    pub rho: f64,
    /// `1 / (rho c)`.
    pub delta_star: f64,
    /// Localization constant `lambda(g, 1)`.
    pub lambda1: f64,
}

impl ParticleSpec {
    /// Builds a particle and computes all derived constants.
    ///
    /// `delta` must lie in `(0, 1/3]` for arcs and `(0, 1]` for slits.
    pub fn new(family: Family, delta: f64) -> Result<Self> {
        let mut spec = Self::geometry(family, delta)?;
        let g = spec.g_pair();
        spec.rho = spec.compute_rho();
        spec.delta_star = 1.0 / (spec.rho * spec.c);
        spec.lambda1 = lambda_of(&g, spec.rho, 1.0);
        Ok(spec)
    }

    /// Closed-form geometry only; `rho`, `delta_star` and `lambda1` are NaN.
    pub fn geometry(family: Family, delta: f64) -> Result<Self> {
        let max = match family {
            Family::Slit => 1.0,
            Family::Arc => 1.0 / 3.0,
        };
        if !(delta > 0.0) {
            return Err(Hl0Error::domain(format!("delta = {delta} must be > 0")));
        }
        if delta > max {
            return Err(Hl0Error::domain(format!(
                "delta = {delta} exceeds the {family} maximum {max}"
            )));
        }
        let spec = match family {
            Family::Slit => {
                let t = delta * delta / ((2.0 + delta) * (2.0 + delta));
                ParticleSpec {
                    family,
                    delta,
                    t: Some(t),
                    r: None,
                    gamma: None,
                    c: -(-t).ln_1p(),
                    p: 0.0,
                    q: 2.0 * (t / (1.0 - t)).sqrt().atan(),
                    rho: f64::NAN,
                    delta_star: f64::NAN,
                    lambda1: f64::NAN,
                }
            }
            Family::Arc => {
                let r = delta / (2.0 - delta);
                let r2 = r * r;
                let p = 2.0 * r.atan();
                ParticleSpec {
                    family,
                    delta,
                    t: None,
                    r: Some(r),
                    gamma: Some((1.0 - r2) / (1.0 + r2)),
                    c: r2.ln_1p() - (-r2).ln_1p(),
                    p,
                    // The arc maps onto |theta| < 2 arccos(gamma) = 2p.
                    q: 2.0 * p,
                    rho: f64::NAN,
                    delta_star: f64::NAN,
                    lambda1: f64::NAN,
                }
            }
        };
        Ok(spec)
    }

    #[inline]
    fn slit_t(&self) -> f64 {
        self.t.unwrap_or(0.0)
    }

    #[inline]
    fn arc_r(&self) -> f64 {
        self.r.unwrap_or(0.0)
    }

    #[inline]
    fn arc_gamma(&self) -> f64 {
        self.gamma.unwrap_or(1.0)
    }

    /// The tip of the particle on the positive real axis.
    pub fn tip(&self) -> f64 {
        match self.family {
            Family::Slit => 1.0 + self.delta,
            Family::Arc => {
                let r = self.arc_r();
                (1.0 + r) / (1.0 - r)
            }
        }
    }

    /// The normalized map `F` from the exterior of the unit disc onto the
    /// exterior of disc plus particle.
    ///
    /// Points with `|z| = 1` are evaluated at `(1 + 1e-12) z` (limit from
    /// outside). For the slit the base `z = 1` maps to the tip's foot and the
    /// two sides of the slit are the images of the two halves of the arc
    /// `|arg z| < q`.
    pub fn map_f(&self, z: Complex64) -> Result<Complex64> {
        let m = z.norm();
        if !(m.is_finite()) {
            return Err(Hl0Error::domain(format!("non-finite argument {z}")));
        }
        if m < 1.0 - 1e-9 {
            return Err(Hl0Error::domain(format!("|z| = {m} < 1 is outside the exterior domain")));
        }
        Ok(self.map_f_exterior(z))
    }

    /// `F` without domain checks. Points with `|z| <= 1 + 1e-12` are pushed
    /// out radially to `1 + 1e-12` first, so rounding drift inside a long
    /// composition never leaves the domain.
    #[inline]
    pub fn map_f_exterior(&self, z: Complex64) -> Complex64 {
        let n2 = z.norm_sqr();
        let z = if n2 <= (1.0 + BOUNDARY_EPS) * (1.0 + BOUNDARY_EPS) {
            z * ((1.0 + BOUNDARY_EPS) / n2.sqrt())
        } else {
            z
        };
        match self.family {
            Family::Slit => {
                let t = self.slit_t();
                let u = z.inv();
                let a = 1.0 - 2.0 * t;
                let s = z * csqrt(Complex64::new(1.0, 0.0) - 2.0 * a * u + u * u);
                let w = z + 1.0 + s;
                w * w * u / (4.0 * (1.0 - t))
            }
            Family::Arc => {
                let gamma = self.arc_gamma();
                let r = self.arc_r();
                let b = z + 1.0;
                let disc = csqrt(b * b - 4.0 * gamma * gamma * z);
                // Stable pair of roots; their product is z.
                let big = if (b + disc).norm_sqr() >= (b - disc).norm_sqr() {
                    b + disc
                } else {
                    b - disc
                };
                let w1 = big / (2.0 * gamma);
                let w2 = z / w1;
                let score = |w: Complex64| (w - 1.0).norm() - r * (w + 1.0).norm();
                let (s1, s2) = (score(w1), score(w2));
                if (s1 - s2).abs() <= 1e-12 * (1.0 + s1.abs()) {
                    if w1.norm_sqr() >= w2.norm_sqr() {
                        w1
                    } else {
                        w2
                    }
                } else if s1 > s2 {
                    w1
                } else {
                    w2
                }
            }
        }
    }

    /// Whether `z` lies in the closed unit disc or on the particle (with the
    /// numerical tolerances used throughout).
    pub fn is_inside(&self, z: Complex64) -> bool {
        if z.norm_sqr() <= (1.0 + BOUNDARY_EPS) * (1.0 + BOUNDARY_EPS) {
            return true;
        }
        match self.family {
            Family::Slit => z.im.abs() <= BOUNDARY_EPS && z.re > 1.0 && z.re <= self.tip() + BOUNDARY_EPS,
            Family::Arc => (z - 1.0).norm() <= self.arc_r() * (z + 1.0).norm(),
        }
    }

    /// The inverse map `G = F^{-1}` on the exterior of disc plus particle.
    pub fn map_g(&self, z: Complex64) -> Result<Complex64> {
        if !z.norm().is_finite() {
            return Err(Hl0Error::domain(format!("non-finite argument {z}")));
        }
        if self.is_inside(z) {
            return Err(Hl0Error::InsideCluster(z));
        }
        Ok(self.map_g_unchecked(z))
    }

    /// `G` if `z` is outside disc plus particle.
    #[inline]
    pub fn try_map_g(&self, z: Complex64) -> Option<Complex64> {
        if self.is_inside(z) {
            None
        } else {
            Some(self.map_g_unchecked(z))
        }
    }

    #[inline]
    fn map_g_unchecked(&self, z: Complex64) -> Complex64 {
        match self.family {
            Family::Slit => {
                let t = self.slit_t();
                let k = (1.0 - t).sqrt();
                let u = z.inv();
                let b = (1.0 + t) / (1.0 - t);
                let s = k * z * csqrt(Complex64::new(1.0, 0.0) - 2.0 * b * u + u * u);
                let w = k * (z + 1.0) + s;
                w * w * u * 0.25
            }
            Family::Arc => {
                let gamma = self.arc_gamma();
                z * (gamma * z - 1.0) / (z - gamma)
            }
        }
    }

    /// `g` on `(0, pi]`.
    #[inline]
    fn g_positive(&self, theta: f64) -> f64 {
        match self.family {
            Family::Slit => {
                let t = self.slit_t();
                let v = (0.5 * theta).tan();
                2.0 * ((v * v + t) / (1.0 - t)).sqrt().atan()
            }
            Family::Arc => {
                if theta <= self.p {
                    self.q
                } else {
                    let r2 = self.arc_r() * self.arc_r();
                    let u = (0.5 * theta).tan();
                    2.0 * ((u + r2 / u) / (1.0 - r2)).atan()
                }
            }
        }
    }

    /// `f` on `[0, pi]`, right-continuous at `q`.
    #[inline]
    fn f_positive(&self, theta: f64) -> f64 {
        if theta < self.q {
            return 0.0;
        }
        let v = (0.5 * theta).tan();
        match self.family {
            Family::Slit => {
                let t = self.slit_t();
                2.0 * ((1.0 - t) * v * v - t).max(0.0).sqrt().atan()
            }
            Family::Arc => {
                let r = self.arc_r();
                let k = 1.0 - r * r;
                let disc = (k * k * v * v - 4.0 * r * r).max(0.0);
                2.0 * (0.5 * (k * v + disc.sqrt())).atan()
            }
        }
    }

    /// `g` on a reduced angle in `[-pi, pi]`.
    #[inline]
    fn g_reduced(&self, r: f64, version: Version) -> f64 {
        if r > 0.0 {
            self.g_positive(r)
        } else if r < 0.0 {
            -self.g_positive(-r)
        } else {
            match version {
                Version::Plus => self.q,
                Version::Minus => -self.q,
            }
        }
    }

    /// `f` on a reduced angle in `[-pi, pi]`.
    #[inline]
    fn f_reduced(&self, r: f64, version: Version) -> f64 {
        let a = r.abs();
        if a < self.q {
            return 0.0;
        }
        if a == self.q {
            // Jump of height p at +-q (zero for the slit).
            return match (version, r > 0.0) {
                (Version::Plus, true) => self.p,
                (Version::Plus, false) => 0.0,
                (Version::Minus, true) => 0.0,
                (Version::Minus, false) => -self.p,
            };
        }
        let v = self.f_positive(a);
        if r > 0.0 {
            v
        } else {
            -v
        }
    }

    /// Lift of the boundary circle map `g` (direction `G`) or `f`
    /// (direction `F`): `x -> x + (2pi-periodic displacement)`.
    #[inline]
    pub fn circle_lift(&self, direction: MapDirection, version: Version, x: f64) -> f64 {
        let (k, r) = reduce_angle(x);
        let image = match direction {
            MapDirection::G => self.g_reduced(r, version),
            MapDirection::F => self.f_reduced(r, version),
        };
        TAU * k + image
    }

    /// `g+(theta)` or `f+(theta)`.
    pub fn circle_map(&self, direction: MapDirection, theta: f64) -> f64 {
        self.circle_lift(direction, Version::Plus, theta)
    }

    /// `g0(theta) = g+(theta) - theta`.
    #[inline]
    pub fn g0(&self, theta: f64) -> f64 {
        let (_, r) = reduce_angle(theta);
        self.g_reduced(r, Version::Plus) - r
    }

    /// Whether the reduced angle `x` lies in the open interval `(-q, q)`
    /// that `F` maps onto the particle.
    #[inline]
    pub fn hits_particle(&self, x: f64) -> bool {
        reduce_angle(x).1.abs() < self.q
    }

    /// The pair `{g-, g+}`.
    pub fn g_pair(&self) -> MonotonePair {
        let (a, b) = (self.clone(), self.clone());
        MonotonePair::new(
            move |x| a.circle_lift(MapDirection::G, Version::Plus, x),
            move |x| b.circle_lift(MapDirection::G, Version::Minus, x),
            self.breakpoints(),
            true,
        )
    }

    /// The pair `{f-, f+}`, the generalized inverse of `g`.
    pub fn f_pair(&self) -> MonotonePair {
        let (a, b) = (self.clone(), self.clone());
        MonotonePair::new(
            move |x| a.circle_lift(MapDirection::F, Version::Plus, x),
            move |x| b.circle_lift(MapDirection::F, Version::Minus, x),
            self.breakpoints(),
            true,
        )
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.q, -self.q];
        if self.p > 0.0 {
            pts.extend([self.p, -self.p]);
        }
        pts
    }

    fn compute_rho(&self) -> f64 {
        // g0 is odd, so integrate over (0, pi] and double. The displacement
        // decays on the scale of q away from 0; the extra cuts help the
        // first refinement rounds find the peak.
        let mut cuts = vec![self.p, self.q];
        let mut s = self.q;
        while s < PI {
            cuts.push(s);
            s *= 4.0;
        }
        let half = integrate(
            |th| {
                let d = self.g_positive(th) - th;
                d * d
            },
            0.0,
            PI,
            &cuts,
            1e-11,
            0.0,
        );
        TAU / (2.0 * half)
    }

    /// `(1/2pi) int_0^{2pi} g0^2`, i.e. `1/rho`; the one-step variance of the
    /// harmonic-measure flow.
    pub fn step_variance(&self) -> f64 {
        1.0 / self.rho
    }
}

/// `rho = 2pi / int_0^{2pi} g0(x)^2 dx` for a periodic monotone pair.
///
/// Adaptive Gauss-Kronrod with relative tolerance `1e-10`, forced splits at
/// the pair's breakpoints.
pub fn rho_of(g: &MonotonePair) -> Result<f64> {
    if !g.is_periodic() {
        return Err(Hl0Error::domain("rho is defined for periodic maps only"));
    }
    let mut cuts: Vec<f64> = g
        .breakpoints()
        .iter()
        .map(|&b| reduce_angle(b).1)
        .collect();
    cuts.push(0.0);
    let integral = integrate(
        |x| {
            let d = g.displacement(x);
            d * d
        },
        -PI,
        PI,
        &cuts,
        1e-11,
        0.0,
    );
    if !(integral > 0.0) {
        return Err(Hl0Error::DegenerateDisturbance);
    }
    Ok(TAU / integral)
}

/// Grid resolution at which the localization search starts; it doubles until
/// the located value moves by less than [`LAMBDA_TOL`].
pub const LAMBDA_BASE_GRID: usize = 4096;
pub const LAMBDA_TOL: f64 = 1e-4;
const LAMBDA_MAX_GRID: usize = 1 << 20;

/// The smallest `lambda` in `(0, 1]` with
/// `(rho/2pi) int |g0(x + a) g0(x)| dx <= lambda` for all
/// `a in [eps lambda, 2pi - eps lambda]`.
pub fn lambda_of(g: &MonotonePair, rho: f64, eps: f64) -> f64 {
    let mut n = LAMBDA_BASE_GRID;
    let mut prev = lambda_on_grid(g, rho, eps, n);
    while n < LAMBDA_MAX_GRID {
        n *= 2;
        let next = lambda_on_grid(g, rho, eps, n);
        if (next - prev).abs() < LAMBDA_TOL {
            return next;
        }
        prev = next;
    }
    prev
}

fn lambda_on_grid(g: &MonotonePair, rho: f64, eps: f64, n: usize) -> f64 {
    use rustfft::num_complex::Complex;
    use rustfft::FftPlanner;

    let h = TAU / n as f64;
    let xs: Vec<f64> = (0..n).map(|j| -PI + h * (j as f64 + 0.5)).collect();
    let amp: Vec<f64> = xs.iter().map(|&x| g.displacement(x).abs()).collect();

    // Circular autocorrelation: corr_k = sum_j amp_j amp_{j+k}.
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = amp.iter().map(|&a| Complex::new(a, 0.0)).collect();
    fwd.process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex::new(v.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    let scale = rho / n as f64 / n as f64;
    let half = n / 2;
    let corr: Vec<f64> = (0..=half).map(|k| buf[k].re * scale).collect();

    // suffix_max[k] = max_{k <= j <= n/2} corr[j]; the correlation is
    // symmetric in a <-> 2pi - a so [0, pi] suffices.
    let mut suffix_max = corr.clone();
    for k in (0..half).rev() {
        suffix_max[k] = suffix_max[k].max(suffix_max[k + 1]);
    }

    let direct = |a: f64| -> f64 {
        let s: f64 = xs
            .iter()
            .zip(&amp)
            .map(|(&x, &ax)| ax * g.displacement(x + a).abs())
            .sum();
        rho / TAU * s * h
    };
    let feasible = |lambda: f64| -> bool {
        let a0 = eps * lambda;
        if a0 >= PI {
            return true;
        }
        let k0 = (a0 / h).ceil() as usize;
        let grid_sup = if k0 <= half { suffix_max[k0] } else { 0.0 };
        grid_sup.max(direct(a0)) <= lambda
    };

    let (mut lo, mut hi) = (0.0, 1.0);
    if feasible(LAMBDA_TOL * 1e-3) {
        return LAMBDA_TOL * 1e-3;
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
