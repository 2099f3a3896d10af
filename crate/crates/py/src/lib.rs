//! Python bindings: value laws, arrival rates, estimators, critical curves,
//! replay and simulation.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use npsa_core::arrival::{Event, IntensityFunction, Realization};
use npsa_core::estimators::{pooled_shortage, IntensityEstimate, MeanShortageCache};
use npsa_core::experiments::simulate_batch;
use npsa_core::policy::{self, CriticalCurveSet};
use npsa_core::value_dist::{ValueDistribution, ValueModel};
use npsa_core::{Error, SolverConfig};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for npsa_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

#[pyclass(name = "ValueDistribution", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyValueDistribution(ValueDistribution);

#[pymethods]
impl PyValueDistribution {
    #[staticmethod]
    fn exponential(mean: f64) -> PyResult<Self> {
        ValueDistribution::exponential(mean).py().map(Self)
    }

    #[staticmethod]
    fn lomax(shape: f64, scale: f64) -> PyResult<Self> {
        ValueDistribution::lomax(shape, scale).py().map(Self)
    }

    #[staticmethod]
    fn empirical(samples: Vec<f64>) -> PyResult<Self> {
        ValueDistribution::empirical(samples).py().map(Self)
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn cdf(&self, z: f64) -> PyResult<f64> {
        self.0.cdf(z).py()
    }

    /// Mean shortage `E[(X - y)+]`.
    fn phi(&self, y: f64) -> PyResult<f64> {
        if y < 0.0 {
            return Err(PyValueError::new_err("y must be nonnegative"));
        }
        Ok(self.0.shortage(y))
    }

    fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = npsa_core::rng::stream(seed, 0);
        (0..count).map(|_| self.0.sample(&mut rng)).collect()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "Intensity", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyIntensity(IntensityFunction);

#[pymethods]
impl PyIntensity {
    #[staticmethod]
    fn constant(rate: f64) -> PyResult<Self> {
        IntensityFunction::constant(rate).py().map(Self)
    }

    #[staticmethod]
    fn piecewise(bin_width: f64, rates: Vec<f64>) -> PyResult<Self> {
        IntensityFunction::piecewise(bin_width, rates).py().map(Self)
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        self.0.clone().scaled(factor).py().map(Self)
    }

    fn rate(&self, t: f64) -> f64 {
        self.0.rate(t)
    }

    /// Expected number of arrivals in `[a, b]`.
    fn integrate(&self, a: f64, b: f64, horizon: f64) -> PyResult<f64> {
        self.0.integrate(a, b, horizon).py()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Empirical mean shortage function over a fixed sample.
#[pyclass(name = "MeanShortage", frozen)]
struct PyMeanShortage(MeanShortageCache);

#[pymethods]
impl PyMeanShortage {
    #[new]
    fn new(samples: Vec<f64>) -> PyResult<Self> {
        MeanShortageCache::build(samples).py().map(Self)
    }

    fn eval(&self, y: f64) -> PyResult<f64> {
        self.0.eval(y).py()
    }

    fn eval_many(&self, ys: Vec<f64>) -> PyResult<Vec<f64>> {
        ys.into_iter().map(|y| self.0.eval(y).py()).collect()
    }

    #[getter]
    fn sample_mean(&self) -> f64 {
        self.0.sample_mean()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "Realization", frozen, from_py_object)]
#[derive(Clone)]
struct PyRealization(Realization);

#[pymethods]
impl PyRealization {
    #[new]
    #[pyo3(signature = (times, values, horizon, scores=None, labels=None))]
    fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        horizon: f64,
        scores: Option<Vec<f64>>,
        labels: Option<Vec<u8>>,
    ) -> PyResult<Self> {
        if times.len() != values.len() {
            return Err(PyValueError::new_err("times and values differ in length"));
        }
        let events = match (scores, labels) {
            (None, None) => times.into_iter().zip(values).map(|(t, v)| Event::new(t, v)).collect(),
            (Some(s), Some(l)) if s.len() == times.len() && l.len() == times.len() => times
                .into_iter()
                .zip(values)
                .zip(s.into_iter().zip(l))
                .map(|((t, v), (s, l))| Event::scored(t, v, s, l))
                .collect(),
            _ => return Err(PyValueError::new_err("scores and labels must both be given, one per event")),
        };
        Realization::new(events, horizon).py().map(Self)
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.events().iter().map(|e| e.t).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.events().iter().map(|e| e.value).collect()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Either an analytic law or an empirical mean shortage cache.
#[derive(FromPyObject)]
enum Values<'py> {
    Analytic(PyRef<'py, PyValueDistribution>),
    Empirical(PyRef<'py, PyMeanShortage>),
}

impl Values<'_> {
    fn model(&self) -> &dyn ValueModel {
        match self {
            Values::Analytic(d) => &d.0,
            Values::Empirical(c) => &c.0,
        }
    }
}

#[pyclass(name = "CriticalCurves", frozen)]
struct PyCurves(CriticalCurveSet);

#[pymethods]
impl PyCurves {
    /// Solve the threshold system for `n` workers.
    #[staticmethod]
    #[pyo3(signature = (intensity, values, n, horizon, rtol=1e-6, atol=1e-8))]
    fn derive(
        intensity: &PyIntensity,
        values: Values<'_>,
        n: usize,
        horizon: f64,
        rtol: f64,
        atol: f64,
    ) -> PyResult<Self> {
        let solver = SolverConfig::with_tolerances(rtol, atol);
        policy::derive_critical_curves(&intensity.0, values.model(), n, horizon, &solver).py().map(Self)
    }

    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        let file = std::fs::File::open(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        CriticalCurveSet::read_csv(file).py().map(Self)
    }

    #[pyo3(signature = (path, points=1024))]
    fn to_csv(&self, path: &str, points: usize) -> PyResult<()> {
        let file = std::fs::File::create(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        self.0.write_csv(file, points).py()
    }

    #[getter]
    fn workers(&self) -> usize {
        self.0.workers()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }

    /// Threshold of worker `k` (1-based) at time `t`.
    fn threshold(&self, k: usize, t: f64) -> PyResult<f64> {
        if k == 0 || k > self.0.workers() {
            return Err(PyValueError::new_err(format!("k must lie in 1..={}", self.0.workers())));
        }
        Ok(self.0.threshold(k, t))
    }

    fn optimal_reward(&self) -> f64 {
        policy::optimal_reward(&self.0)
    }

    /// Expected reward of these thresholds when arrivals and values follow
    /// the given laws.
    #[pyo3(signature = (intensity, values, rtol=1e-6, atol=1e-8))]
    fn expected_reward(&self, intensity: &PyIntensity, values: Values<'_>, rtol: f64, atol: f64) -> PyResult<f64> {
        let solver = SolverConfig::with_tolerances(rtol, atol);
        policy::expected_reward(&self.0, &intensity.0, values.model(), &solver).py()
    }

    /// Accepted event indices and total reward.
    fn replay(&self, realization: &PyRealization) -> PyResult<(Vec<usize>, f64)> {
        let res = policy::replay_policy(&self.0, &realization.0, |e| e.value).py()?;
        Ok((res.indices().collect(), res.total_reward))
    }

    fn truncated(&self, n: usize) -> PyResult<Self> {
        self.0.truncated(n).py().map(Self)
    }
}

/// `count` independent realizations from stream `seed`.
#[pyfunction]
#[pyo3(signature = (intensity, values, horizon, seed, count=1))]
fn simulate(
    intensity: &PyIntensity,
    values: &PyValueDistribution,
    horizon: f64,
    seed: u64,
    count: usize,
) -> PyResult<Vec<PyRealization>> {
    let batch = simulate_batch(&intensity.0, &values.0, horizon, seed, count).py()?;
    Ok(batch.into_iter().map(PyRealization).collect())
}

/// Histogram rate estimate; returns `(intensity, bin_width, rates)`.
#[pyfunction]
fn estimate_intensity(realizations: Vec<PyRealization>, horizon: f64) -> PyResult<(PyIntensity, f64, Vec<f64>)> {
    let rs: Vec<Realization> = realizations.into_iter().map(|r| r.0).collect();
    let est = IntensityEstimate::fit(&rs, horizon).py()?;
    Ok((PyIntensity(est.to_intensity()), est.delta(), est.rates().to_vec()))
}

/// Mean shortage cache over every value in the realizations.
#[pyfunction]
fn estimate_mean_shortage(realizations: Vec<PyRealization>) -> PyResult<PyMeanShortage> {
    let rs: Vec<Realization> = realizations.into_iter().map(|r| r.0).collect();
    pooled_shortage(&rs, |e| e.value).py().map(PyMeanShortage)
}

#[pymodule]
fn npsa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyValueDistribution>()?;
    m.add_class::<PyIntensity>()?;
    m.add_class::<PyMeanShortage>()?;
    m.add_class::<PyRealization>()?;
    m.add_class::<PyCurves>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_intensity, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mean_shortage, m)?)?;
    Ok(())
}
