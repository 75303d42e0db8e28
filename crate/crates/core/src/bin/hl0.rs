use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use hl0::cbf::{collision_times, simulate_cbf, CbfConfig, CbfDomain, CbfStart};
use hl0::experiments::{run_experiment, ExperimentConfig};
use hl0::export::{export_data, load_cluster, load_json, ExportObject, Format};
use hl0::fingers::{finger_of, gap_proxy_of, ParticleAtlas};
use hl0::flow::{track_points, FlowDirection, FlowStart, Scaling};
use hl0::render::{from_log, render_scene, RenderOptions, Scene};
use hl0::{ClusterState, Family, Hl0Error, ParticleSpec};

#[derive(Parser)]
#[command(name = "hl0", version, about = "HL(0) cluster growth, flows and experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Grow a cluster and write it as JSON.
    Grow {
        #[arg(long, default_value = "slit")]
        family: Family,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Store attachment points only every `thin` particles.
        #[arg(long)]
        thin: Option<usize>,
    },
    /// Render a cluster to SVG.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long)]
        log_coords: bool,
        /// JSON list of `[re, im]` log-coordinate seeds.
        #[arg(long)]
        fingers: Option<PathBuf>,
        #[arg(long)]
        gaps: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        resolution: usize,
    },
    /// Track points through a cluster's flow and write CSV.
    Flow {
        #[arg(long = "in")]
        input: PathBuf,
        /// JSON list of `{"level": .., "lift": ..}`.
        #[arg(long)]
        track: PathBuf,
        #[arg(long, default_value = "backward")]
        direction: FlowDirection,
        #[arg(long, default_value = "none")]
        scaling: Scaling,
        /// Final level; defaults to 0 backward and n forward.
        #[arg(long)]
        upto: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate coalescing Brownian motions.
    Cbf {
        #[arg(long)]
        domain: CbfDomain,
        /// JSON list of `{"s": .., "x": ..}`.
        #[arg(long)]
        starts: PathBuf,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// One run writes trajectories; more write pairwise collision times.
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_bridge: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment driver from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
}

fn seeds_from(path: &Path) -> hl0::Result<Vec<Complex64>> {
    let raw: Vec<[f64; 2]> = load_json(path)?;
    Ok(raw.into_iter().map(|[a, b]| Complex64::new(a, b)).collect())
}

fn render(
    input: &Path,
    svg: &Path,
    opts: RenderOptions,
    fingers: Option<PathBuf>,
    gaps: Option<PathBuf>,
) -> hl0::Result<()> {
    let cluster = load_cluster(input)?;
    let mut scene = Scene::from_cluster(&cluster, &opts);
    // Overlays come out in log coordinates.
    let place = |p: hl0::PlanarSet| if opts.log_coords { p } else { from_log(&p) };
    if let Some(f) = fingers {
        let atlas = ParticleAtlas::new(&cluster)?;
        for z in seeds_from(&f)? {
            scene.fingers.push(place(finger_of(&atlas, z)?.points));
        }
    }
    if let Some(g) = gaps {
        for z in seeds_from(&g)? {
            scene.gaps.push(place(gap_proxy_of(&cluster, z, cluster.n())?.points));
        }
    }
    let doc = render_scene(&scene, &opts);
    std::fs::write(svg, doc).map_err(|e| Hl0Error::Io {
        path: svg.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> hl0::Result<()> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| Hl0Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

fn run(cmd: Cmd) -> hl0::Result<bool> {
    match cmd {
        Cmd::Grow {
            family,
            delta,
            n,
            seed,
            out,
            thin,
        } => {
            let spec = ParticleSpec::new(family, delta)?;
            let c = ClusterState::grow_thinned(&spec, n, seed, thin.unwrap_or(1));
            export_data(ExportObject::Cluster(&c), &out, Format::Json)?;
        }
        Cmd::Render {
            input,
            svg,
            epochs,
            log_coords,
            fingers,
            gaps,
            resolution,
        } => {
            let opts = RenderOptions {
                epochs,
                log_coords,
                resolution,
                ..RenderOptions::default()
            };
            render(&input, &svg, opts, fingers, gaps)?;
        }
        Cmd::Flow {
            input,
            track,
            direction,
            scaling,
            upto,
            out,
        } => {
            let cluster = load_cluster(&input)?;
            let starts: Vec<FlowStart> = load_json(&track)?;
            let upto = upto.unwrap_or(match direction {
                FlowDirection::Forward => cluster.n(),
                FlowDirection::Backward => 0,
            });
            let t = track_points(&cluster, &starts, direction, upto, scaling)?;
            export_data(ExportObject::Trajectories(&t), &out, Format::from_path(&out))?;
        }
        Cmd::Cbf {
            domain,
            starts,
            horizon,
            dt,
            runs,
            seed,
            no_bridge,
            out,
        } => {
            let cfg = CbfConfig {
                domain,
                starts: load_json::<Vec<CbfStart>>(&starts)?,
                horizon,
                dt,
                seed,
                bridge_correction: !no_bridge,
            };
            if runs <= 1 {
                let t = simulate_cbf(&cfg)?;
                export_data(ExportObject::Trajectories(&t), &out, Format::from_path(&out))?;
            } else {
                let mut text = String::from("run,i,j,time\n");
                for (r, m) in collision_times(&cfg, runs)?.iter().enumerate() {
                    for (i, row) in m.iter().enumerate() {
                        for (j, t) in row.iter().enumerate().skip(i + 1) {
                            let v = t.map_or(String::new(), |x| x.to_string());
                            text.push_str(&format!("{r},{i},{j},{v}\n"));
                        }
                    }
                }
                write_text(&out, &text)?;
            }
        }
        Cmd::Experiment { config, report } => {
            let cfg: ExperimentConfig = load_json(&config)?;
            let rep = run_experiment(&cfg)?;
            export_data(ExportObject::Report(&rep), &report, Format::Json)?;
            for (name, ok) in &rep.pass {
                println!("{name}: {}", if *ok { "pass" } else { "FAIL" });
            }
            return Ok(rep.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("HL0_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("hl0: {e}");
            ExitCode::from(2)
        }
    }
}
