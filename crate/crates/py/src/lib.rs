//! Python bindings for `resnet-core`.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use resnet_core::lattice::{self, TorusQuadrature, Verdict};
use resnet_core::network::{self, Exhaustion};
use resnet_core::verify::{self, VerifyOptions};
use resnet_core::walk::{self, McConfig};
use resnet_core::{spectral, GroundedSystem, VertexFunction};

create_exception!(resnet, ResnetError, PyException);

fn err(e: resnet_core::Error) -> PyErr {
    ResnetError::new_err(e.to_string())
}

fn family(spec: &str) -> PyResult<Exhaustion> {
    Exhaustion::parse(spec).map_err(err)
}

/// A finite weighted network.
#[pyclass(name = "Network", module = "resnet")]
pub struct PyNetwork {
    inner: network::Network,
}

#[pymethods]
impl PyNetwork {
    /// Builds a network from `(u, v, conductance)` triples.
    #[new]
    #[pyo3(signature = (n, edges, origin = 0))]
    fn new(n: usize, edges: Vec<(usize, usize, f64)>, origin: usize) -> PyResult<Self> {
        let edges = edges
            .into_iter()
            .map(|(u, v, c)| network::Edge::new(u, v, c))
            .collect();
        Ok(PyNetwork {
            inner: network::Network::new(n, edges, origin).map_err(err)?,
        })
    }

    #[staticmethod]
    fn path(n: usize) -> PyResult<Self> {
        Ok(PyNetwork { inner: network::path_graph(n).map_err(err)? })
    }

    #[staticmethod]
    fn complete(n: usize) -> PyResult<Self> {
        Ok(PyNetwork { inner: network::complete_graph(n).map_err(err)? })
    }

    #[staticmethod]
    fn binary_tree(depth: usize) -> PyResult<Self> {
        Ok(PyNetwork { inner: network::binary_tree(depth).map_err(err)? })
    }

    #[staticmethod]
    fn lattice_ball(dim: usize, radius: usize) -> PyResult<Self> {
        Ok(PyNetwork { inner: network::lattice_ball(dim, radius).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n, extra, seed, c_min = 0.1, c_max = 10.0))]
    fn random(n: usize, extra: usize, seed: u64, c_min: f64, c_max: f64) -> PyResult<Self> {
        Ok(PyNetwork {
            inner: network::random_connected(n, extra, c_min, c_max, seed).map_err(err)?,
        })
    }

    /// Truncation `depth` of a family such as `"lattice:2"` or `"tree"`,
    /// optionally wired into a ground vertex.
    #[staticmethod]
    #[pyo3(signature = (spec, depth, wired = false))]
    fn truncation(spec: &str, depth: usize, wired: bool) -> PyResult<Self> {
        let fam = family(spec)?;
        let inner = if wired {
            fam.wired_truncation(depth).map_err(err)?.network
        } else {
            fam.truncation(depth).map_err(err)?
        };
        Ok(PyNetwork { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyNetwork { inner: network::Network::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn origin(&self) -> usize {
        self.inner.origin()
    }

    #[getter]
    fn ground(&self) -> Option<usize> {
        self.inner.ground()
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().iter().map(|e| (e.u, e.v, e.conductance)).collect()
    }

    fn label(&self, x: usize) -> PyResult<String> {
        self.inner.check_vertex(x).map_err(err)?;
        Ok(self.inner.label(x))
    }

    fn vertex(&self, label: &str) -> PyResult<usize> {
        self.inner.vertex_by_label(label).map_err(err)
    }

    fn net_conductance(&self, x: usize) -> PyResult<f64> {
        self.inner.net_conductance(x).map_err(err)
    }

    fn apply_laplacian(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(resnet_core::apply_laplacian(&self.inner, &VertexFunction::new(u))
            .map_err(err)?
            .into_inner())
    }

    fn energy(&self, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        resnet_core::energy(&self.inner, &VertexFunction::new(u), &VertexFunction::new(v)).map_err(err)
    }

    /// Effective resistance between `x` and `y`.
    fn resistance(&self, x: usize, y: usize) -> PyResult<f64> {
        resnet_core::free_resistance(&self.inner, x, y).map_err(err)
    }

    /// Monopole at `x` for the system grounded at `ground`.
    fn monopole(&self, x: usize, ground: usize) -> PyResult<Vec<f64>> {
        let gs = GroundedSystem::at(&self.inner, ground).map_err(err)?;
        Ok(gs.monopole(x).map_err(err)?.into_inner())
    }

    /// Resistance from the eigendecomposition of the system grounded at `ground`.
    fn spectral_resistance(&self, x: usize, y: usize, ground: usize) -> PyResult<f64> {
        let gs = GroundedSystem::at(&self.inner, ground).map_err(err)?;
        spectral::spectral_resistance(&gs, x, y).map_err(err)
    }

    /// Atoms `(λ, mass)` of the spectral measure of `xi` for the system
    /// grounded at `ground`.
    fn spectral_measure(&self, xi: Vec<f64>, ground: usize) -> PyResult<Vec<(f64, f64)>> {
        let gs = GroundedSystem::at(&self.inner, ground).map_err(err)?;
        Ok(spectral::spectral_measure(&gs, &VertexFunction::new(xi)).map_err(err)?.atoms)
    }

    /// Probability that the walk from `o` reaches `x` before returning to `o`.
    #[pyo3(signature = (o, x, absorb_at_ground = false))]
    fn hitting_probability(&self, o: usize, x: usize, absorb_at_ground: bool) -> PyResult<f64> {
        walk::hitting_probability_potential(&self.inner, o, x, absorb_at_ground).map_err(err)
    }

    /// Monte Carlo estimate of `hitting_probability`.
    #[pyo3(signature = (o, x, episodes = 100_000, seed = 0, absorb_at_ground = false))]
    fn hitting_probability_mc<'py>(
        &self,
        py: Python<'py>,
        o: usize,
        x: usize,
        episodes: usize,
        seed: u64,
        absorb_at_ground: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mut cfg = McConfig::new(episodes, seed);
        cfg.absorb_at_ground = absorb_at_ground;
        let est = walk::hitting_probability_mc(&self.inner, o, x, &cfg).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("p_hat", est.p_hat)?;
        d.set_item("ci95", est.ci95)?;
        d.set_item("episodes", est.episodes)?;
        d.set_item("truncated", est.truncated)?;
        d.set_item("seed", est.seed)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(vertices={}, edges={}, origin={})",
            self.inner.vertex_count(),
            self.inner.edges().len(),
            self.inner.origin()
        )
    }
}

/// Free and wired resistance across a depth schedule.
#[pyfunction]
fn resistance_bracket<'py>(
    py: Python<'py>,
    spec: &str,
    x: &str,
    y: &str,
    depths: Vec<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let b = resnet_core::resistance_bracket(&family(spec)?, x, y, &depths).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("depths", b.depths.clone())?;
    d.set_item("wired", b.wired_values.clone())?;
    d.set_item("free", b.free_values.clone())?;
    d.set_item("width", b.width())?;
    d.set_item("converged", b.converged)?;
    Ok(d)
}

/// Lanczos estimates of the Dirichlet gap at each depth.
#[pyfunction]
#[pyo3(signature = (spec, depths, seed = 0))]
fn dirichlet_gap(spec: &str, depths: Vec<usize>, seed: u64) -> PyResult<Vec<f64>> {
    Ok(spectral::dirichlet_gap(&family(spec)?, &depths, seed).map_err(err)?.lambda_min)
}

/// Effective resistance on `Z^d` by torus quadrature.
#[pyfunction]
fn lattice_resistance(x: Vec<i64>, y: Vec<i64>) -> PyResult<f64> {
    let q = TorusQuadrature::new(x.len()).map_err(err)?;
    Ok(lattice::lattice_resistance(&q, &x, &y).map_err(err)?.value)
}

/// Value at `x` of the monopole at the origin of `Z^d`, `d ≥ 3`.
#[pyfunction]
fn lattice_monopole(x: Vec<i64>) -> PyResult<f64> {
    let q = TorusQuadrature::new(x.len()).map_err(err)?;
    Ok(lattice::lattice_monopole_value(&q, &x).map_err(err)?.value)
}

/// `True` when the quadrature probe finds `Z^d` transient.
#[pyfunction]
fn is_transient(d: usize) -> PyResult<bool> {
    Ok(lattice::transience_probe(d).map_err(err)?.verdict == Verdict::Transient)
}

/// Runs the invariant suite; returns `(passed, total, failed)`.
#[pyfunction]
#[pyo3(signature = (module = None))]
fn verify_suite(module: Option<String>) -> (bool, usize, usize) {
    let r = verify::run_suite(VerifyOptions {
        module,
        inject_fault: false,
    });
    (r.passed, r.total, r.failed)
}

#[pymodule]
fn resnet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ResnetError", m.py().get_type::<ResnetError>())?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(resistance_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_gap, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_resistance, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_monopole, m)?)?;
    m.add_function(wrap_pyfunction!(is_transient, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    Ok(())
}
