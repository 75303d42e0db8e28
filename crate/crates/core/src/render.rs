//! SVG rendering of clusters with optional finger and gap overlays.

use std::f64::consts::TAU;
use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterState;
use crate::geometry::PlanarSet;

/// Epoch colours, cycled when more buckets are requested.
const PALETTE: [&str; 8] = [
    "#1b4f72", "#1e8449", "#b9770e", "#922b21", "#6c3483", "#117a65", "#7b7d7d", "#2e4053",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Number of arrival-epoch colour buckets.
    pub epochs: usize,
    /// Draw in `log z` coordinates instead of the plane.
    pub log_coords: bool,
    /// Samples per particle curve.
    pub resolution: usize,
    /// Canvas width in pixels.
    pub size: f64,
    pub stroke_width: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            epochs: 5,
            log_coords: false,
            resolution: 3,
            size: 1000.0,
            stroke_width: 1.0,
        }
    }
}

/// Curves already sampled, plus overlays, ready to be written out.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub particles: Vec<PlanarSet>,
    /// Overlays in the same coordinates as the particles.
    pub fingers: Vec<PlanarSet>,
    pub gaps: Vec<PlanarSet>,
}

impl Scene {
    /// Samples every particle of `cluster` in the coordinates of `opts`.
    pub fn from_cluster(cluster: &ClusterState, opts: &RenderOptions) -> Self {
        let mut particles = cluster.all_particle_curves(opts.resolution.max(2));
        if opts.log_coords {
            for c in particles.iter_mut() {
                *c = to_log(c);
            }
        }
        Scene {
            particles,
            fingers: Vec::new(),
            gaps: Vec::new(),
        }
    }

    /// Largest modulus over the particle curves (plane coordinates).
    pub fn bounding_radius(&self) -> f64 {
        self.particles.iter().map(|c| c.max_radius()).fold(1.0, f64::max)
    }
}

/// `log z` with a continuous imaginary part along the curve.
pub fn to_log(curve: &PlanarSet) -> PlanarSet {
    let mut out: Vec<Complex64> = Vec::with_capacity(curve.len());
    for z in &curve.points {
        let l = z.ln();
        let im = match out.last() {
            Some(p) => l.im + TAU * ((p.im - l.im) / TAU).round(),
            None => l.im,
        };
        out.push(Complex64::new(l.re, im));
    }
    PlanarSet::new(out)
}

/// Maps log-coordinate overlay points back to the plane.
pub fn from_log(curve: &PlanarSet) -> PlanarSet {
    PlanarSet::new(curve.points.iter().map(|w| w.exp()).collect())
}

fn fmt_num(x: f64) -> String {
    // Fixed precision keeps output byte-stable and compact.
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

fn polyline(out: &mut String, pts: &[Complex64], stroke: &str, width: f64, flip: bool) {
    if pts.is_empty() {
        return;
    }
    out.push_str("<polyline fill=\"none\" stroke=\"");
    out.push_str(stroke);
    let _ = write!(out, "\" stroke-width=\"{}\" points=\"", fmt_num(width));
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let y = if flip { -p.im } else { p.im };
        let _ = write!(out, "{},{}", fmt_num(p.re), fmt_num(y));
    }
    out.push_str("\"/>\n");
}

/// Writes the scene as an SVG document. Output is a pure function of the
/// inputs.
pub fn render_scene(scene: &Scene, opts: &RenderOptions) -> String {
    let mut out = String::new();
    let n = scene.particles.len();
    let epochs = opts.epochs.max(1);
    let (vx, vy, vw, vh, unit) = if opts.log_coords {
        let mut hi_re: f64 = 0.0;
        let (mut lo_im, mut hi_im) = (-std::f64::consts::PI, std::f64::consts::PI);
        for c in scene.particles.iter().chain(&scene.fingers).chain(&scene.gaps) {
            for p in &c.points {
                hi_re = hi_re.max(p.re);
                lo_im = lo_im.min(p.im);
                hi_im = hi_im.max(p.im);
            }
        }
        let w = hi_re.max(1e-3);
        let pad = 0.02 * w.max(hi_im - lo_im);
        (-pad, -hi_im - pad, w + 2.0 * pad, hi_im - lo_im + 2.0 * pad, w.max(hi_im - lo_im) / opts.size)
    } else {
        let r = scene.bounding_radius();
        (-r, -r, 2.0 * r, 2.0 * r, 2.0 * r / opts.size)
    };
    let width = opts.stroke_width * unit;
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\">",
        fmt_num(opts.size),
        fmt_num(opts.size * vh / vw),
        fmt_num(vx),
        fmt_num(vy),
        fmt_num(vw),
        fmt_num(vh)
    );
    if opts.log_coords {
        // The unit circle is the line re = 0.
        let _ = writeln!(
            out,
            "<line x1=\"0\" y1=\"{}\" x2=\"0\" y2=\"{}\" stroke=\"#000000\" stroke-width=\"{}\"/>",
            fmt_num(vy),
            fmt_num(vy + vh),
            fmt_num(width)
        );
    } else {
        let _ = writeln!(
            out,
            "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"#d5d8dc\" stroke=\"#000000\" stroke-width=\"{}\"/>",
            fmt_num(width)
        );
    }
    for b in 0..epochs {
        let lo = b * n / epochs;
        let hi = (b + 1) * n / epochs;
        if lo == hi {
            continue;
        }
        let _ = writeln!(out, "<g class=\"epoch{}\">", b);
        for c in &scene.particles[lo..hi] {
            polyline(&mut out, &c.points, PALETTE[b % PALETTE.len()], width, true);
        }
        out.push_str("</g>\n");
    }
    if !scene.gaps.is_empty() {
        out.push_str("<g class=\"gaps\">\n");
        for g in &scene.gaps {
            polyline(&mut out, &g.points, "#85c1e9", 2.0 * width, true);
        }
        out.push_str("</g>\n");
    }
    if !scene.fingers.is_empty() {
        out.push_str("<g class=\"fingers\">\n");
        for f in &scene.fingers {
            polyline(&mut out, &f.points, "#17202a", 2.0 * width, true);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Samples and renders a cluster without overlays.
pub fn render_svg(cluster: &ClusterState, opts: &RenderOptions) -> String {
    render_scene(&Scene::from_cluster(cluster, opts), opts)
}

/// Parses the `viewBox` of a document written by [`render_scene`].
pub fn view_box(svg: &str) -> Option<[f64; 4]> {
    let start = svg.find("viewBox=\"")? + 9;
    let end = start + svg[start..].find('"')?;
    let v: Vec<f64> = svg[start..end].split_whitespace().filter_map(|t| t.parse().ok()).collect();
    (v.len() == 4).then(|| [v[0], v[1], v[2], v[3]])
}
