//! Python bindings for `hl0`.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;

use hl0::cbf::{pair_collision_cdf as cdf, CbfDomain};
use hl0::experiments::{run_experiment as run, ExperimentConfig};
use hl0::fingers::{finger_of, gap_proxy_of, ParticleAtlas};
use hl0::flow::{flow_map as flow, FlowDirection, FlowQuery};
use hl0::render::{render_svg as render, RenderOptions};
use hl0::{ClusterState, Family, Hl0Error, MapDirection, Pullback, Version};

fn to_py(e: Hl0Error) -> PyErr {
    match e {
        Hl0Error::OutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        Hl0Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Hl0Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn version(v: &str) -> PyResult<Version> {
    match v {
        "plus" | "+" => Ok(Version::Plus),
        "minus" | "-" => Ok(Version::Minus),
        _ => Err(PyValueError::new_err(format!("unknown version `{v}`"))),
    }
}

#[pyclass(name = "ParticleSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpec(hl0::ParticleSpec);

#[pymethods]
impl PySpec {
    #[new]
    #[pyo3(signature = (family, delta))]
    fn new(family: &str, delta: f64) -> PyResult<Self> {
        Ok(PySpec(hl0::ParticleSpec::new(parse::<Family>(family)?, delta).map_err(to_py)?))
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.p
    }

    #[getter]
    fn q(&self) -> f64 {
        self.0.q
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho
    }

    #[getter]
    fn delta_star(&self) -> f64 {
        self.0.delta_star
    }

    fn map_f(&self, z: Complex64) -> PyResult<Complex64> {
        self.0.map_f(z).map_err(to_py)
    }

    fn map_g(&self, z: Complex64) -> PyResult<Complex64> {
        self.0.map_g(z).map_err(to_py)
    }

    /// `g+` (direction "g") or `f+` (direction "f") on a lift.
    fn circle_map(&self, direction: &str, theta: f64) -> PyResult<f64> {
        let d = match direction {
            "g" | "G" => MapDirection::G,
            "f" | "F" => MapDirection::F,
            _ => return Err(PyValueError::new_err(format!("unknown direction `{direction}`"))),
        };
        Ok(self.0.circle_map(d, theta))
    }

    fn g0(&self, theta: f64) -> f64 {
        self.0.g0(theta)
    }
}

#[derive(IntoPyObject)]
enum GammaOut {
    Point(Complex64),
    Swallowed(usize),
}

#[pyclass(name = "Cluster", frozen)]
struct PyCluster(ClusterState);

#[pymethods]
impl PyCluster {
    #[staticmethod]
    #[pyo3(signature = (spec, n, seed = 0))]
    fn grow(py: Python<'_>, spec: &PySpec, n: usize, seed: u64) -> Self {
        let s = spec.0.clone();
        PyCluster(py.detach(|| ClusterState::grow(&s, n, seed)))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyCluster(ClusterState::from_doc(doc).map_err(to_py)?))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0.to_doc()).expect("cluster documents always serialize")
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed()
    }

    #[getter]
    fn spec(&self) -> PySpec {
        PySpec(self.0.spec().clone())
    }

    fn capacity(&self) -> f64 {
        self.0.capacity()
    }

    fn thetas(&self) -> Vec<f64> {
        self.0.thetas().to_vec()
    }

    fn attach_points(&self) -> Vec<Complex64> {
        self.0.records().iter().map(|r| r.attach_point).collect()
    }

    fn parents(&self) -> Vec<usize> {
        self.0.records().iter().map(|r| r.parent).collect()
    }

    fn eval_phi(&self, k: usize, z: Complex64) -> PyResult<Complex64> {
        self.0.eval_phi(k, z).map_err(to_py)
    }

    /// `Gamma_k(z)`, or the step index at which `z` is swallowed.
    fn eval_gamma(&self, k: usize, z: Complex64) -> PyResult<GammaOut> {
        Ok(match self.0.eval_gamma(k, z).map_err(to_py)? {
            Pullback::Point(w) => GammaOut::Point(w),
            Pullback::Swallowed(j) => GammaOut::Swallowed(j),
        })
    }

    #[pyo3(signature = (m, n, x, direction = "backward", version = "plus"))]
    fn flow_map(&self, m: usize, n: usize, x: f64, direction: &str, version: &str) -> PyResult<f64> {
        let q = match parse::<FlowDirection>(direction)? {
            FlowDirection::Forward => FlowQuery::forward(m, n),
            FlowDirection::Backward => FlowQuery::backward(m, n),
        };
        flow(&self.0, q.with_version(self::version(version)?), x).map_err(to_py)
    }

    /// Chain of particle indices and log-coordinate points of the finger
    /// nearest to the log-coordinate seed `z`.
    fn finger(&self, z: Complex64) -> PyResult<(Vec<usize>, Vec<Complex64>)> {
        let atlas = ParticleAtlas::new(&self.0).map_err(to_py)?;
        let f = finger_of(&atlas, z).map_err(to_py)?;
        Ok((f.chain, f.points.points))
    }

    /// Levels and lifted angles of the gap proxy seeded at `z`.
    #[pyo3(signature = (z, upto = None))]
    fn gap(&self, z: Complex64, upto: Option<usize>) -> PyResult<(Vec<usize>, Vec<f64>)> {
        let g = gap_proxy_of(&self.0, z, upto.unwrap_or(self.0.n())).map_err(to_py)?;
        Ok((g.levels, g.angles))
    }

    #[pyo3(signature = (epochs = 5, log_coords = false, resolution = 3))]
    fn render_svg(&self, py: Python<'_>, epochs: usize, log_coords: bool, resolution: usize) -> String {
        let opts = RenderOptions {
            epochs,
            log_coords,
            resolution,
            ..RenderOptions::default()
        };
        py.detach(|| render(&self.0, &opts))
    }
}

/// Probability that a pair of coalescing Brownian motions at distance `d`
/// has met by time `t`.
#[pyfunction]
fn pair_collision_cdf(domain: &str, d: f64, t: f64) -> PyResult<f64> {
    cdf(parse::<CbfDomain>(domain)?, d, t).map_err(to_py)
}

/// Runs an experiment from a JSON config and returns the JSON report.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg: ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let rep = py.detach(|| run(&cfg)).map_err(to_py)?;
    serde_json::to_string(&rep).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "hl0")]
fn hl0_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PyCluster>()?;
    m.add_function(wrap_pyfunction!(pair_collision_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
