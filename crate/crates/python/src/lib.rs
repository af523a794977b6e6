//! Python bindings. Sequences cross the boundary as lists of floats or
//! complex numbers; networks and quantized kernels are opaque classes with
//! JSON round trips.

use ltv_rnn::codec::CodeLayout;
use ltv_rnn::oracles;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

fn err(e: ltv_rnn::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn seq(x: Vec<f64>) -> PyResult<ltv_rnn::Sequence<f64>> {
    ltv_rnn::Sequence::new(x).map_err(err)
}

fn kernel(taps: Vec<f64>) -> PyResult<ltv_rnn::FirKernel> {
    ltv_rnn::FirKernel::new(taps).map_err(err)
}

fn class(c: f64, a: f64) -> PyResult<ltv_rnn::ImpulseClass> {
    ltv_rnn::ImpulseClass::new(c, a).map_err(err)
}

fn spreading(rows: Vec<Vec<Complex64>>) -> PyResult<ltv_rnn::SpreadingFunction> {
    ltv_rnn::SpreadingFunction::from_rows(&rows).map_err(err)
}

fn bound(c_in: f64) -> PyResult<ltv_rnn::InputBound> {
    ltv_rnn::InputBound::new(c_in).map_err(err)
}

/// ReLU recurrent network with one hidden layer per step.
#[pyclass(name = "RnnSpec", module = "pyltvrnn")]
struct PyRnnSpec(ltv_rnn::RnnSpec);

#[pymethods]
impl PyRnnSpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(json_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    #[getter]
    fn state_dim(&self) -> usize {
        self.0.state_dim()
    }

    #[getter]
    fn hidden_width(&self) -> usize {
        self.0.hidden_width()
    }

    #[getter]
    fn input_bound(&self) -> Option<f64> {
        self.0.input_bound()
    }

    fn has_real_output(&self) -> bool {
        self.0.has_real_output()
    }

    fn nonzero_weights(&self) -> usize {
        self.0.nonzero_weights()
    }

    /// Runs from rest and returns `(outputs, states)`.
    fn run(&self, x: Vec<f64>, horizon: usize) -> PyResult<(Vec<Complex64>, Vec<Vec<f64>>)> {
        let tr = ltv_rnn::run(&self.0, &seq(x)?, horizon).map_err(err)?;
        let states = tr
            .states
            .iter()
            .map(|h| h.iter().copied().collect())
            .collect();
        Ok((tr.output.into_samples(), states))
    }

    fn to_elman(&self) -> PyResult<PyElmanSpec> {
        ltv_rnn::to_elman(&self.0).map(PyElmanSpec).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "RnnSpec(state_dim={}, hidden_width={})",
            self.0.state_dim(),
            self.0.hidden_width()
        )
    }
}

/// Standard Elman network equivalent to a real-output `RnnSpec`.
#[pyclass(name = "ElmanSpec", module = "pyltvrnn")]
struct PyElmanSpec(ltv_rnn::ElmanSpec);

#[pymethods]
impl PyElmanSpec {
    #[getter]
    fn state_dim(&self) -> usize {
        self.0.state_dim()
    }

    fn run(&self, x: Vec<f64>, horizon: usize) -> PyResult<Vec<f64>> {
        ltv_rnn::run_elman(&self.0, &seq(x)?, horizon)
            .map(|y| y.into_samples())
            .map_err(err)
    }
}

/// Grid-quantized, truncated impulse response of the class `C e^{-a t}`.
#[pyclass(name = "QuantizedFir", module = "pyltvrnn")]
struct PyQuantizedFir(ltv_rnn::QuantizedFir);

#[pymethods]
impl PyQuantizedFir {
    #[new]
    #[pyo3(signature = (c, a, eps, taps))]
    fn new(c: f64, a: f64, eps: f64, taps: Vec<f64>) -> PyResult<Self> {
        ltv_rnn::QuantizedFir::new(class(c, a)?, eps, taps)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(json_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    #[getter]
    fn taps(&self) -> Vec<f64> {
        self.0.taps().to_vec()
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps()
    }

    #[getter(M)]
    fn len_m(&self) -> usize {
        self.0.len()
    }

    fn indices(&self) -> Vec<i64> {
        self.0.indices()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: PyRef<'_, Self>) -> bool {
        self.0 == other.0
    }
}

#[pyfunction]
fn build_convolution(taps: Vec<f64>) -> PyResult<PyRnnSpec> {
    Ok(PyRnnSpec(ltv_rnn::build_convolution(&kernel(taps)?)))
}

#[pyfunction]
#[pyo3(signature = (period, f, c_in = 1.0))]
fn build_frequency_shift(period: usize, f: usize, c_in: f64) -> PyResult<PyRnnSpec> {
    ltv_rnn::build_frequency_shift(period, f, bound(c_in)?)
        .map(PyRnnSpec)
        .map_err(err)
}

/// `s[tau][f]` is the weight of delay `tau` and Doppler index `f`.
#[pyfunction]
#[pyo3(signature = (s, c_in = 1.0))]
fn build_ltv(s: Vec<Vec<Complex64>>, c_in: f64) -> PyResult<PyRnnSpec> {
    Ok(PyRnnSpec(ltv_rnn::build_ltv(&spreading(s)?, bound(c_in)?)))
}

#[pyfunction]
fn build_rational(num: Vec<f64>, den: Vec<f64>) -> PyResult<PyRnnSpec> {
    let tf = ltv_rnn::RationalTf::new(num, den).map_err(err)?;
    Ok(PyRnnSpec(ltv_rnn::build_rational(&tf)))
}

/// Quantizes `impulse` (default: the envelope itself) and builds the FIR
/// network. Taps past the end of `impulse` are zero.
#[pyfunction]
#[pyo3(signature = (c, a, eps, impulse = None))]
fn build_quantized_fir(
    c: f64,
    a: f64,
    eps: f64,
    impulse: Option<Vec<f64>>,
) -> PyResult<(PyQuantizedFir, PyRnnSpec)> {
    let cls = class(c, a)?;
    let (q, spec) = match impulse {
        Some(v) => ltv_rnn::build_quantized_fir(&cls, |t| v.get(t).copied().unwrap_or(0.0), eps),
        None => ltv_rnn::build_quantized_fir(&cls, |t| cls.envelope(t), eps),
    }
    .map_err(err)?;
    Ok((PyQuantizedFir(q), PyRnnSpec(spec)))
}

/// Container bytes: 8-byte little-endian bit count, then the MSB-first payload.
#[pyfunction]
fn encode<'py>(py: Python<'py>, q: PyRef<'_, PyQuantizedFir>) -> PyResult<Bound<'py, PyBytes>> {
    let bits = ltv_rnn::encode(&q.0).map_err(err)?;
    Ok(PyBytes::new(py, &bits.to_container()))
}

#[pyfunction]
fn decode(container: &[u8], c: f64, a: f64, eps: f64) -> PyResult<PyQuantizedFir> {
    let bits = ltv_rnn::Bitstring::from_container(container).map_err(err)?;
    ltv_rnn::decode(&bits, &class(c, a)?, eps)
        .map(PyQuantizedFir)
        .map_err(err)
}

#[pyfunction]
fn code_length(c: f64, a: f64, eps: f64) -> PyResult<usize> {
    CodeLayout::new(&class(c, a)?, eps)
        .map(|l| l.total_bits())
        .map_err(err)
}

#[pyfunction]
fn bit_budget_report<'py>(
    py: Python<'py>,
    c: f64,
    a: f64,
    eps: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let b = ltv_rnn::bit_budget_report(&class(c, a)?, eps).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("M", b.len)?;
    d.set_item("delta", b.delta)?;
    d.set_item("total_bits", b.total_bits)?;
    d.set_item("chain_bound", b.chain_bound)?;
    d.set_item("main_term", b.main_term)?;
    d.set_item("ratio", b.ratio())?;
    Ok(d)
}

#[pyfunction]
fn quantize(w: f64, delta: f64) -> f64 {
    ltv_rnn::quantize(w, delta)
}

#[pyfunction]
fn z_eval(x: Vec<f64>, z: Complex64) -> PyResult<Complex64> {
    ltv_rnn::z_eval(&x, z).map_err(err)
}

#[pyfunction]
fn h2_norm(x: Vec<f64>) -> PyResult<f64> {
    Ok(ltv_rnn::h2_norm(&seq(x)?))
}

/// `(lower, upper)` bracket on the H-infinity norm of the kernel.
#[pyfunction]
#[pyo3(signature = (taps, grid = 4096))]
fn hinf_bracket(taps: Vec<f64>, grid: usize) -> PyResult<(f64, f64)> {
    let b = ltv_rnn::hinf_bracket(&kernel(taps)?, grid).map_err(err)?;
    Ok((b.lower, b.upper))
}

#[pyfunction]
#[pyo3(signature = (k1, k2, grid = 4096))]
fn system_distance(k1: Vec<f64>, k2: Vec<f64>, grid: usize) -> PyResult<(f64, f64)> {
    let b = ltv_rnn::system_distance(&kernel(k1)?, &kernel(k2)?, grid).map_err(err)?;
    Ok((b.lower, b.upper))
}

#[pyfunction]
fn entropy_main_term(c: f64, a: f64, eps: f64) -> PyResult<f64> {
    ltv_rnn::entropy_main_term(&class(c, a)?, eps).map_err(err)
}

#[pyfunction]
fn conv_oracle(taps: Vec<f64>, x: Vec<f64>, horizon: usize) -> PyResult<Vec<f64>> {
    Ok(oracles::conv_oracle(&kernel(taps)?, &seq(x)?, horizon).into_samples())
}

#[pyfunction]
fn ltv_oracle(s: Vec<Vec<Complex64>>, x: Vec<f64>, horizon: usize) -> PyResult<Vec<Complex64>> {
    Ok(oracles::ltv_oracle(&spreading(s)?, &seq(x)?, horizon).into_samples())
}

#[pyfunction]
fn recursion_oracle(
    num: Vec<f64>,
    den: Vec<f64>,
    x: Vec<f64>,
    horizon: usize,
) -> PyResult<Vec<f64>> {
    let tf = ltv_rnn::RationalTf::new(num, den).map_err(err)?;
    Ok(oracles::recursion_oracle(&tf, &seq(x)?, horizon).into_samples())
}

#[pymodule]
fn pyltvrnn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRnnSpec>()?;
    m.add_class::<PyElmanSpec>()?;
    m.add_class::<PyQuantizedFir>()?;
    m.add_function(wrap_pyfunction!(build_convolution, m)?)?;
    m.add_function(wrap_pyfunction!(build_frequency_shift, m)?)?;
    m.add_function(wrap_pyfunction!(build_ltv, m)?)?;
    m.add_function(wrap_pyfunction!(build_rational, m)?)?;
    m.add_function(wrap_pyfunction!(build_quantized_fir, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(code_length, m)?)?;
    m.add_function(wrap_pyfunction!(bit_budget_report, m)?)?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(z_eval, m)?)?;
    m.add_function(wrap_pyfunction!(h2_norm, m)?)?;
    m.add_function(wrap_pyfunction!(hinf_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(system_distance, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_main_term, m)?)?;
    m.add_function(wrap_pyfunction!(conv_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(ltv_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(recursion_oracle, m)?)?;
    Ok(())
}
