//! Execution of ReLU recurrent networks.
//!
//! A network maps `(x[t], h[t-1])` through one hidden ReLU layer
//! `g[t] = relu(A1 (x[t]; h[t-1]) + b1)` and reads out both the next state
//! `h[t] = A_h g[t] + b2_state` and the output `y[t] = W_out g[t] + b2_out`.
//! The state path is real; only `W_out` may carry complex weights, so the
//! ReLU never sees a complex argument.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json::{complex_vec, matrix_from_rows, rows_of};
use crate::signals::{ComplexSequence, Sequence};

#[derive(Debug, Clone, PartialEq)]
pub struct RnnSpec {
    a1: DMatrix<f64>,
    b1: DVector<f64>,
    a_h: DMatrix<f64>,
    w_out: DVector<Complex64>,
    b2_state: DVector<f64>,
    b2_out: f64,
    input_bound: Option<f64>,
}

/// Output and state trajectory of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub output: ComplexSequence,
    /// `states[t]` is `h[t]`; the implicit `h[-1]` is the zero vector.
    pub states: Vec<DVector<f64>>,
}

fn all_finite<'a>(mut it: impl Iterator<Item = &'a f64>) -> bool {
    it.all(|v| v.is_finite())
}

impl RnnSpec {
    /// Assembles a spec, checking `A1: n x (m+1)`, `b1: n`, `A_h: m x n`,
    /// `W_out: n`, `b2_state: m`.
    pub fn new(
        a1: DMatrix<f64>,
        b1: DVector<f64>,
        a_h: DMatrix<f64>,
        w_out: DVector<Complex64>,
        b2_state: DVector<f64>,
        b2_out: f64,
    ) -> Result<Self> {
        let n = a1.nrows();
        let m = a_h.nrows();
        if n == 0 {
            return Err(Error::Empty("hidden layer"));
        }
        let checks = [
            ("A1 columns", m + 1, a1.ncols()),
            ("b1 length", n, b1.len()),
            ("A_h columns", n, a_h.ncols()),
            ("W_out length", n, w_out.len()),
            ("b2_state length", m, b2_state.len()),
        ];
        for (what, expected, got) in checks {
            if expected != got {
                return Err(Error::Dimension {
                    what,
                    expected,
                    got,
                });
            }
        }
        let finite = all_finite(a1.iter())
            && all_finite(b1.iter())
            && all_finite(a_h.iter())
            && all_finite(b2_state.iter())
            && b2_out.is_finite()
            && w_out.iter().all(|w| w.is_finite());
        if !finite {
            return Err(Error::NonFinite("network weights"));
        }
        Ok(Self {
            a1,
            b1,
            a_h,
            w_out,
            b2_state,
            b2_out,
            input_bound: None,
        })
    }

    /// All-zero network with the given state dimension and hidden width.
    pub fn zeros(state_dim: usize, hidden_width: usize) -> Result<Self> {
        Self::new(
            DMatrix::zeros(hidden_width, state_dim + 1),
            DVector::zeros(hidden_width),
            DMatrix::zeros(state_dim, hidden_width),
            DVector::from_element(hidden_width, Complex64::new(0.0, 0.0)),
            DVector::zeros(state_dim),
            0.0,
        )
    }

    /// Records the input amplitude the weights were built for.
    pub fn with_input_bound(mut self, bound: f64) -> Self {
        self.input_bound = Some(bound);
        self
    }

    pub fn input_bound(&self) -> Option<f64> {
        self.input_bound
    }

    pub fn state_dim(&self) -> usize {
        self.a_h.nrows()
    }

    pub fn hidden_width(&self) -> usize {
        self.a1.nrows()
    }

    pub fn a1(&self) -> &DMatrix<f64> {
        &self.a1
    }

    pub fn b1(&self) -> &DVector<f64> {
        &self.b1
    }

    pub fn a_h(&self) -> &DMatrix<f64> {
        &self.a_h
    }

    pub fn w_out(&self) -> &DVector<Complex64> {
        &self.w_out
    }

    pub fn b2_state(&self) -> &DVector<f64> {
        &self.b2_state
    }

    pub fn b2_out(&self) -> f64 {
        self.b2_out
    }

    pub fn has_real_output(&self) -> bool {
        self.w_out.iter().all(|w| w.im == 0.0)
    }

    /// Number of nonzero entries across all weight matrices and biases.
    pub fn nonzero_weights(&self) -> usize {
        let nz = |it: &mut dyn Iterator<Item = &f64>| it.filter(|v| **v != 0.0).count();
        nz(&mut self.a1.iter())
            + nz(&mut self.b1.iter())
            + nz(&mut self.a_h.iter())
            + nz(&mut self.b2_state.iter())
            + self
                .w_out
                .iter()
                .filter(|w| **w != Complex64::new(0.0, 0.0))
                .count()
            + usize::from(self.b2_out != 0.0)
    }

    /// Mutable access to the output row, for tests that corrupt a spec.
    pub fn w_out_mut(&mut self) -> &mut DVector<Complex64> {
        &mut self.w_out
    }
}

fn relu_in_place(v: &mut DVector<f64>) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}

/// Runs `spec` on `x` for `horizon` steps from the zero state. Input samples
/// past the stored horizon of `x` are read as zero.
pub fn run(spec: &RnnSpec, x: &Sequence<f64>, horizon: usize) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if x.samples().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("input"));
    }
    let m = spec.state_dim();
    let n = spec.hidden_width();
    let mut state = DVector::<f64>::zeros(m);
    let mut input = DVector::<f64>::zeros(m + 1);
    let mut output = Vec::with_capacity(horizon);
    let mut states = Vec::with_capacity(horizon);
    let mut g = DVector::<f64>::zeros(n);

    for t in 0..horizon {
        input[0] = x.at(t as isize);
        input.rows_mut(1, m).copy_from(&state);
        g.copy_from(&spec.b1);
        g.gemv(1.0, &spec.a1, &input, 1.0);
        relu_in_place(&mut g);

        state.copy_from(&spec.b2_state);
        state.gemv(1.0, &spec.a_h, &g, 1.0);

        let y = spec
            .w_out
            .iter()
            .zip(g.iter())
            .fold(Complex64::new(spec.b2_out, 0.0), |acc, (w, gi)| {
                acc + w * gi
            });

        if !y.is_finite() || state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network state"));
        }
        output.push(y);
        states.push(state.clone());
    }
    Ok(Trajectory {
        output: Sequence::from_vec(output),
        states,
    })
}

/// Classic Elman network `h[t] = relu(U x[t] + W1 h[t-1] + bias1)`,
/// `y[t] = W2 h[t] + bias2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmanSpec {
    pub u: DVector<f64>,
    pub w1: DMatrix<f64>,
    pub w2: DVector<f64>,
    pub bias1: DVector<f64>,
    pub bias2: f64,
    pub h_init: DVector<f64>,
}

impl ElmanSpec {
    pub fn state_dim(&self) -> usize {
        self.u.len()
    }

    fn check(&self) -> Result<()> {
        let m = self.state_dim();
        let checks = [
            ("W1 rows", m, self.w1.nrows()),
            ("W1 columns", m, self.w1.ncols()),
            ("W2 length", m, self.w2.len()),
            ("bias1 length", m, self.bias1.len()),
            ("h_init length", m, self.h_init.len()),
        ];
        for (what, expected, got) in checks {
            if expected != got {
                return Err(Error::Dimension {
                    what,
                    expected,
                    got,
                });
            }
        }
        Ok(())
    }
}

/// Converts a network with real output weights and zero state bias into an
/// input-output equivalent Elman network whose state is the hidden layer.
pub fn to_elman(spec: &RnnSpec) -> Result<ElmanSpec> {
    if !spec.has_real_output() {
        return Err(Error::ComplexOutput);
    }
    if spec.b2_state.iter().any(|b| *b != 0.0) {
        return Err(Error::NonzeroStateBias);
    }
    let n = spec.hidden_width();
    let m = spec.state_dim();
    let a_x = spec.a1.column(0).into_owned();
    let a_g = spec.a1.columns(1, m).into_owned();
    Ok(ElmanSpec {
        u: a_x,
        w1: &a_g * &spec.a_h,
        w2: spec.w_out.map(|w| w.re),
        bias1: &a_g * &spec.b2_state + &spec.b1,
        bias2: spec.b2_out,
        h_init: DVector::zeros(n),
    })
}

pub fn run_elman(spec: &ElmanSpec, x: &Sequence<f64>, horizon: usize) -> Result<Sequence<f64>> {
    spec.check()?;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let mut h = spec.h_init.clone();
    let mut next = DVector::<f64>::zeros(spec.state_dim());
    let mut out = Vec::with_capacity(horizon);
    for t in 0..horizon {
        next.copy_from(&spec.bias1);
        next.axpy(x.at(t as isize), &spec.u, 1.0);
        next.gemv(1.0, &spec.w1, &h, 1.0);
        relu_in_place(&mut next);
        std::mem::swap(&mut h, &mut next);
        let y = spec.w2.dot(&h) + spec.bias2;
        if !y.is_finite() {
            return Err(Error::NonFinite("network state"));
        }
        out.push(y);
    }
    Ok(Sequence::from_vec(out))
}

#[derive(Serialize, Deserialize)]
struct RnnSpecJson {
    state_dim: usize,
    hidden_width: usize,
    a1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    a_h: Vec<Vec<f64>>,
    #[serde(with = "complex_vec")]
    w_out: Vec<Complex64>,
    b2_state: Vec<f64>,
    b2_out: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_bound: Option<f64>,
}

impl Serialize for RnnSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RnnSpecJson {
            state_dim: self.state_dim(),
            hidden_width: self.hidden_width(),
            a1: rows_of(&self.a1),
            b1: self.b1.iter().copied().collect(),
            a_h: rows_of(&self.a_h),
            w_out: self.w_out.iter().copied().collect(),
            b2_state: self.b2_state.iter().copied().collect(),
            b2_out: self.b2_out,
            input_bound: self.input_bound,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RnnSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RnnSpecJson::deserialize(d)?;
        let (m, n) = (raw.state_dim, raw.hidden_width);
        if raw.a1.len() != n {
            return Err(D::Error::custom(Error::Dimension {
                what: "A1 rows",
                expected: n,
                got: raw.a1.len(),
            }));
        }
        if raw.a_h.len() != m {
            return Err(D::Error::custom(Error::Dimension {
                what: "A_h rows",
                expected: m,
                got: raw.a_h.len(),
            }));
        }
        let a1 =
            matrix_from_rows(&raw.a1, m + 1).ok_or_else(|| D::Error::custom("ragged A1 rows"))?;
        let a_h =
            matrix_from_rows(&raw.a_h, n).ok_or_else(|| D::Error::custom("ragged A_h rows"))?;
        let mut spec = RnnSpec::new(
            a1,
            DVector::from_vec(raw.b1),
            a_h,
            DVector::from_vec(raw.w_out),
            DVector::from_vec(raw.b2_state),
            raw.b2_out,
        )
        .map_err(D::Error::custom)?;
        spec.input_bound = raw.input_bound;
        Ok(spec)
    }
}
