//! Closed-form weight constructions for networks that realize linear systems
//! exactly: convolutions, frequency shifts, superpositions of
//! time-frequency shifts, and rational transfer functions.
//!
//! Every construction keeps `b2_state = 0` and `b2_out = 0`. Values pass
//! through the ReLU unchanged via `x = relu(x) - relu(-x)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::codec::{quantize, truncation_length, QuantizedFir};
use crate::error::{Error, Result};
use crate::json::{complex_rows, matrix_from_rows, rows_of};
use crate::rnn::RnnSpec;
use crate::signals::{FirKernel, ImpulseClass};

/// Relative slack when checking an impulse response against its envelope.
const DECAY_CHECK_SLACK: f64 = 1e-12;

/// Complex delay-Doppler weights `S(tau, f)`, `tau < D`, `f < F`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingFunction {
    weights: DMatrix<Complex64>,
}

impl SpreadingFunction {
    /// `weights` is `D x F`; row `tau` holds the Doppler weights for delay `tau`.
    pub fn new(weights: DMatrix<Complex64>) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::Empty("spreading grid"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("spreading function"));
        }
        Ok(Self { weights })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        let weights = matrix_from_rows(rows, ncols).ok_or(Error::Dimension {
            what: "spreading row length",
            expected: ncols,
            got: rows.iter().map(Vec::len).find(|l| *l != ncols).unwrap_or(0),
        })?;
        Self::new(weights)
    }

    /// Delay support `D`.
    pub fn delays(&self) -> usize {
        self.weights.nrows()
    }

    /// Doppler support `F`.
    pub fn dopplers(&self) -> usize {
        self.weights.ncols()
    }

    /// Number of time-frequency shifts, `D * F`.
    pub fn spread(&self) -> usize {
        self.delays() * self.dopplers()
    }

    pub fn get(&self, tau: usize, f: usize) -> Complex64 {
        self.weights[(tau, f)]
    }

    pub fn weights(&self) -> &DMatrix<Complex64> {
        &self.weights
    }
}

#[derive(Serialize, Deserialize)]
struct SpreadingJson {
    #[serde(rename = "D")]
    d: usize,
    #[serde(rename = "F")]
    f: usize,
    #[serde(rename = "S", with = "complex_rows")]
    s: Vec<Vec<Complex64>>,
}

impl Serialize for SpreadingFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpreadingJson {
            d: self.delays(),
            f: self.dopplers(),
            s: rows_of(&self.weights),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpreadingFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SpreadingJson::deserialize(d)?;
        if raw.s.len() != raw.d {
            return Err(D::Error::custom(format!(
                "S has {} rows, D = {}",
                raw.s.len(),
                raw.d
            )));
        }
        let weights = matrix_from_rows(&raw.s, raw.f)
            .ok_or_else(|| D::Error::custom(format!("S rows must have F = {} entries", raw.f)))?;
        SpreadingFunction::new(weights).map_err(D::Error::custom)
    }
}

/// `K(z) = (sum_i a_i z^i) / (sum_j b_j z^j)` with `b_0 != 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalTf {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl RationalTf {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.is_empty() {
            return Err(Error::Empty("numerator"));
        }
        if den.is_empty() {
            return Err(Error::Empty("denominator"));
        }
        if num.iter().chain(&den).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("transfer function"));
        }
        if den[0] == 0.0 {
            return Err(Error::ZeroLeadingDenominator);
        }
        Ok(Self { num, den })
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    /// Numerator degree `Q`.
    pub fn q(&self) -> usize {
        self.num.len() - 1
    }

    /// Denominator degree `P`.
    pub fn p(&self) -> usize {
        self.den.len() - 1
    }

    /// Difference-equation coefficients `(c, d)` with `c_i = a_i / b_0` and
    /// `d_j = -b_j / b_0`, `j >= 1`.
    pub fn difference_coefficients(&self) -> (Vec<f64>, Vec<f64>) {
        let b0 = self.den[0];
        let c = self.num.iter().map(|a| a / b0).collect();
        let d = self.den[1..].iter().map(|b| -b / b0).collect();
        (c, d)
    }
}

impl<'de> Deserialize<'de> for RationalTf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            num: Vec<f64>,
            den: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        RationalTf::new(raw.num, raw.den).map_err(serde::de::Error::custom)
    }
}

/// Amplitude bound `C_in` on admissible inputs, `|x[t]| <= C_in`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InputBound(f64);

impl InputBound {
    pub fn new(c_in: f64) -> Result<Self> {
        if !c_in.is_finite() || c_in <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "input bound must be positive and finite, got {c_in}"
            )));
        }
        Ok(Self(c_in))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn unit_root(num: usize, den: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (num % den) as f64 / den as f64)
}

/// `F x (F-1)` matrix mapping the period state `h[t-1]` to the one-hot
/// position vector `e[t] = A_e h[t-1] + b_e` (together with the bias
/// `b_e = (1, 0, ..., 0)`).
fn period_matrix(period: usize) -> DMatrix<f64> {
    let mut a_e = DMatrix::zeros(period, period - 1);
    for col in 0..period - 1 {
        a_e[(0, col)] = -1.0;
        a_e[(col + 1, col)] = 1.0;
    }
    a_e
}

/// Network realizing `y[t] = sum_l k_l x[t - (l-1)]`. State `h_l[t]` holds
/// `x[t - (l-1)]` for `l = 1..L-1`.
pub fn build_convolution(k: &FirKernel) -> RnnSpec {
    let l = k.len();
    let mut a1 = DMatrix::zeros(2 * l, l);
    let mut a_h = DMatrix::zeros(l - 1, 2 * l);
    let mut w_out = DVector::from_element(2 * l, Complex64::new(0.0, 0.0));
    for i in 0..l {
        a1[(i, i)] = 1.0;
        a1[(l + i, i)] = -1.0;
        w_out[i] = Complex64::new(k.taps()[i], 0.0);
        w_out[l + i] = Complex64::new(-k.taps()[i], 0.0);
    }
    for i in 0..l - 1 {
        a_h[(i, i)] = 1.0;
        a_h[(i, l + i)] = -1.0;
    }
    RnnSpec::new(
        a1,
        DVector::zeros(2 * l),
        a_h,
        w_out,
        DVector::zeros(l - 1),
        0.0,
    )
    .expect("convolution weights are consistent by construction")
}

/// Network realizing `y[t] = x[t] exp(2 pi i f t / F)` for `|x[t]| <= C_in`.
///
/// The state is one-hot, `h_l[t] = 1{(t+1) mod F = l}` for `l = 1..F-1`,
/// and all zeros at the last step of each period.
pub fn build_frequency_shift(period: usize, f: usize, bound: InputBound) -> Result<RnnSpec> {
    if period == 0 {
        return Err(Error::InvalidParameter(
            "period F must be at least 1".into(),
        ));
    }
    if f >= period {
        return Err(Error::FrequencyOutOfRange { f, period });
    }
    let c = bound.value();
    let a_e = period_matrix(period);
    let n = 2 * period;
    let mut a1 = DMatrix::zeros(n, period);
    let mut b1 = DVector::zeros(n);
    for r in 0..period {
        a1[(r, 0)] = 1.0;
        for col in 0..period - 1 {
            a1[(r, col + 1)] = 2.0 * c * a_e[(r, col)];
            a1[(period + r, col + 1)] = a_e[(r, col)];
        }
        b1[r] = if r == 0 { c } else { -c };
    }
    b1[period] = 1.0;

    let mut a_h = DMatrix::zeros(period - 1, n);
    for i in 0..period - 1 {
        a_h[(i, period + i)] = 1.0;
    }

    let mut w_out = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for pos in 0..period {
        let phase = unit_root(pos * f, period);
        w_out[pos] = phase;
        w_out[period + pos] = -c * phase;
    }
    Ok(RnnSpec::new(a1, b1, a_h, w_out, DVector::zeros(period - 1), 0.0)?.with_input_bound(c))
}

/// Network realizing the superposition
/// `y[t] = sum_{tau, f} S(tau, f) x[t - tau] exp(2 pi i f t / F)` for
/// `|x[t]| <= C_in`.
///
/// The state concatenates the `D-1` delay window with the `F-1` one-hot
/// period state. The hidden layer has three blocks: `D` gated copies of the
/// delayed inputs (each of length `F`), the `2D` pass-through units of the
/// delay line, and the `F` position indicators.
pub fn build_ltv(s: &SpreadingFunction, bound: InputBound) -> RnnSpec {
    let (d, period) = (s.delays(), s.dopplers());
    let c = bound.value();
    let a_e = period_matrix(period);

    let m = (d - 1) + (period - 1);
    let gated = d * period;
    let window = gated;
    let position = gated + 2 * d;
    let n = position + period;
    // Input columns: 0..D hold x[t], x[t-1], ..., x[t-(D-1)]; the period
    // state follows.
    let pcol = d;

    let mut a1 = DMatrix::zeros(n, m + 1);
    let mut b1 = DVector::zeros(n);
    for tau in 0..d {
        for r in 0..period {
            let row = tau * period + r;
            a1[(row, tau)] = 1.0;
            for col in 0..period - 1 {
                a1[(row, pcol + col)] = 2.0 * c * a_e[(r, col)];
            }
            b1[row] = if r == 0 { c } else { -c };
        }
        a1[(window + tau, tau)] = 1.0;
        a1[(window + d + tau, tau)] = -1.0;
    }
    for r in 0..period {
        for col in 0..period - 1 {
            a1[(position + r, pcol + col)] = a_e[(r, col)];
        }
    }
    b1[position] = 1.0;

    let mut a_h = DMatrix::zeros(m, n);
    for i in 0..d - 1 {
        a_h[(i, window + i)] = 1.0;
        a_h[(i, window + d + i)] = -1.0;
    }
    for j in 0..period - 1 {
        a_h[(d - 1 + j, position + j)] = 1.0;
    }

    // W_out = A_o A_r: block tau carries S(tau, .)^T A_F, and the position
    // block removes the C offset of every gated copy.
    let mut w_out = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for tau in 0..d {
        for pos in 0..period {
            let w: Complex64 = (0..period)
                .map(|f| s.get(tau, f) * unit_root(f * pos, period))
                .sum();
            w_out[tau * period + pos] = w;
            w_out[position + pos] -= c * w;
        }
    }

    RnnSpec::new(a1, b1, a_h, w_out, DVector::zeros(m), 0.0)
        .expect("LTV weights are consistent by construction")
        .with_input_bound(c)
}

/// Network realizing the difference equation
/// `y[t] = sum_i c_i x[t-i] + sum_j d_j y[t-j]` of a rational transfer
/// function. The state stacks the last `Q` inputs and the last `P` outputs.
pub fn build_rational(tf: &RationalTf) -> RnnSpec {
    let (q, p) = (tf.q(), tf.p());
    let (c, d) = tf.difference_coefficients();
    let size = q + p + 1;

    // Linear map (x[t]; h[t-1]) -> (y[t]; h[t]).
    let mut w = DMatrix::<f64>::zeros(size, size);
    let mut output_row = vec![0.0; size];
    output_row[..=q].copy_from_slice(&c);
    output_row[q + 1..].copy_from_slice(&d);
    for (col, v) in output_row.iter().enumerate() {
        w[(0, col)] = *v;
    }
    for s in 0..q {
        w[(1 + s, s)] = 1.0;
    }
    if p > 0 {
        for (col, v) in output_row.iter().enumerate() {
            w[(1 + q, col)] = *v;
        }
        for j in 0..p - 1 {
            w[(2 + q + j, q + 1 + j)] = 1.0;
        }
    }

    let mut a1 = DMatrix::zeros(2 * size, size);
    let mut split = DMatrix::zeros(size, 2 * size);
    for i in 0..size {
        a1[(i, i)] = 1.0;
        a1[(size + i, i)] = -1.0;
        split[(i, i)] = 1.0;
        split[(i, size + i)] = -1.0;
    }
    let a2 = &w * &split;
    let w_out = a2.row(0).transpose().map(|v| Complex64::new(v, 0.0));
    let a_h = a2.rows(1, size - 1).into_owned();
    RnnSpec::new(
        a1,
        DVector::zeros(2 * size),
        a_h,
        w_out,
        DVector::zeros(size - 1),
        0.0,
    )
    .expect("rational weights are consistent by construction")
}

/// Truncates and quantizes an impulse response from the class `cls` so the
/// resulting FIR filter lies within `eps` in H-infinity distance, and builds
/// the convolution network realizing it.
///
/// `impulse` is queried for `t < M` only.
pub fn build_quantized_fir(
    cls: &ImpulseClass,
    impulse: impl Fn(usize) -> f64,
    eps: f64,
) -> Result<(QuantizedFir, RnnSpec)> {
    let m = truncation_length(cls, eps)?;
    let delta = eps / (2.0 * m as f64);
    let mut taps = Vec::with_capacity(m);
    for t in 0..m {
        let value = impulse(t);
        if !value.is_finite() {
            return Err(Error::NonFinite("impulse response"));
        }
        let bound = cls.envelope(t);
        if value.abs() > bound * (1.0 + DECAY_CHECK_SLACK) {
            return Err(Error::DecayViolated { t, value, bound });
        }
        taps.push(quantize(value, delta));
    }
    let q = QuantizedFir::new(*cls, eps, taps)?;
    let spec = build_convolution(&FirKernel::new(q.taps().to_vec())?);
    Ok((q, spec))
}
