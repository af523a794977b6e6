//! Uniform weight quantization and the fixed-allocation bitstring code for
//! truncated, quantized impulse responses of the class `|k[t]| <= C e^{-a t}`.
//!
//! Encoder and decoder share `(C, a, eps)`. From those both sides derive the
//! truncation length `M`, the step `delta = eps / (2M)` and the per-tap bit
//! allocation, so the bitstring carries only tap labels.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::signals::{entropy_main_term, ImpulseClass};

/// Relative slack of [`grid_floor`] and [`grid_ceil`]: values within this
/// many ulps of an integer snap to it.
const GRID_ULPS: f64 = 64.0;

fn snap(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= GRID_ULPS * f64::EPSILON * r.abs().max(1.0)).then_some(r)
}

/// `floor(x)` that treats `2.9999999999999996` as `3`.
pub(crate) fn grid_floor(x: f64) -> f64 {
    snap(x).unwrap_or_else(|| x.floor())
}

pub(crate) fn grid_ceil(x: f64) -> f64 {
    snap(x).unwrap_or_else(|| x.ceil())
}

/// Signed grid index `sign(w) * floor(|w| / delta)`.
pub fn quantization_index(w: f64, delta: f64) -> i64 {
    let magnitude = grid_floor(w.abs() / delta) as i64;
    if w < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

fn grid_value(index: i64, delta: f64) -> f64 {
    if index == 0 {
        0.0
    } else {
        index as f64 * delta
    }
}

/// `sign(w) * floor(|w| / delta) * delta`. Zero is returned as `+0.0`.
pub fn quantize(w: f64, delta: f64) -> f64 {
    grid_value(quantization_index(w, delta), delta)
}

fn check_eps(eps: f64) -> Result<()> {
    if !eps.is_finite() {
        return Err(Error::NonFinite("eps"));
    }
    if eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    Ok(())
}

/// `M = ceil((1/a) ln(C/eps) + (1/a) ln(2 / (1 - e^{-a})))`, at least 1.
pub fn truncation_length(cls: &ImpulseClass, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    let a = cls.decay();
    let x = ((cls.amplitude() / eps).ln() + (2.0 / (1.0 - (-a).exp())).ln()) / a;
    Ok(grid_ceil(x).max(1.0) as usize)
}

/// Largest magnitude index representable at tap `t`: `floor(C e^{-a t} / delta)`.
pub fn envelope_index(cls: &ImpulseClass, t: usize, delta: f64) -> u64 {
    grid_floor(cls.envelope(t) / delta) as u64
}

fn bit_length(v: u64) -> usize {
    (u64::BITS - v.leading_zeros()) as usize
}

/// Shared parameters of a code: truncation length, step and per-tap
/// magnitude-index limits.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeLayout {
    pub len: usize,
    pub delta: f64,
    pub max_index: Vec<u64>,
}

impl CodeLayout {
    pub fn new(cls: &ImpulseClass, eps: f64) -> Result<Self> {
        let len = truncation_length(cls, eps)?;
        let delta = eps / (2.0 * len as f64);
        let max_index = (0..len).map(|t| envelope_index(cls, t, delta)).collect();
        Ok(Self {
            len,
            delta,
            max_index,
        })
    }

    /// Magnitude bits at each tap, `ceil(log2(N_t + 1))`.
    pub fn magnitude_bits(&self) -> Vec<usize> {
        self.max_index.iter().map(|n| bit_length(*n)).collect()
    }

    /// Sign bit plus magnitude bits at each tap.
    pub fn tap_bits(&self) -> Vec<usize> {
        self.magnitude_bits().into_iter().map(|b| b + 1).collect()
    }

    pub fn total_bits(&self) -> usize {
        self.tap_bits().iter().sum()
    }
}

/// A truncated impulse response of length `M` with taps on the grid
/// `delta * Z`, `delta = eps / (2M)`, each inside its envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedFir {
    class: ImpulseClass,
    eps: f64,
    #[serde(rename = "M")]
    len: usize,
    delta: f64,
    taps: Vec<f64>,
}

impl QuantizedFir {
    pub fn new(class: ImpulseClass, eps: f64, taps: Vec<f64>) -> Result<Self> {
        let layout = CodeLayout::new(&class, eps)?;
        if taps.len() != layout.len {
            return Err(Error::Dimension {
                what: "quantized taps",
                expected: layout.len,
                got: taps.len(),
            });
        }
        let mut canonical = Vec::with_capacity(taps.len());
        for (t, &value) in taps.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("quantized taps"));
            }
            let index = quantization_index(value, layout.delta);
            let on_grid = grid_value(index, layout.delta);
            if on_grid != value {
                return Err(Error::TapOffGrid {
                    t,
                    value,
                    delta: layout.delta,
                });
            }
            if index.unsigned_abs() > layout.max_index[t] {
                return Err(Error::TapOutsideEnvelope {
                    t,
                    value,
                    bound: class.envelope(t),
                });
            }
            canonical.push(on_grid);
        }
        Ok(Self {
            class,
            eps,
            len: layout.len,
            delta: layout.delta,
            taps: canonical,
        })
    }

    pub fn class(&self) -> &ImpulseClass {
        &self.class
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Signed grid indices `taps[t] / delta`.
    pub fn indices(&self) -> Vec<i64> {
        self.taps
            .iter()
            .map(|v| quantization_index(*v, self.delta))
            .collect()
    }
}

impl<'de> Deserialize<'de> for QuantizedFir {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Raw {
            class: ImpulseClass,
            eps: f64,
            #[serde(rename = "M")]
            len: usize,
            delta: f64,
            taps: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        let q = QuantizedFir::new(raw.class, raw.eps, raw.taps).map_err(D::Error::custom)?;
        if q.len != raw.len || q.delta != raw.delta {
            return Err(D::Error::custom(format!(
                "stored (M, delta) = ({}, {}) disagree with derived ({}, {})",
                raw.len, raw.delta, q.len, q.delta
            )));
        }
        Ok(q)
    }
}

/// A finite bit sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bitstring {
    bits: Vec<bool>,
}

impl Bitstring {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn truncated(&self, len: usize) -> Self {
        Self {
            bits: self.bits[..len.min(self.bits.len())].to_vec(),
        }
    }

    fn push_uint(&mut self, value: u64, width: usize) {
        for i in (0..width).rev() {
            self.bits.push((value >> i) & 1 == 1);
        }
    }

    /// MSB-first payload padded with zeros to whole bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, bit) in self.bits.iter().enumerate() {
            if *bit {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Container(format!(
                "{} payload bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        let bits = (0..len)
            .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
            .collect();
        Ok(Self { bits })
    }

    /// Container: 8-byte little-endian bit count followed by the payload.
    pub fn to_container(&self) -> Vec<u8> {
        let mut out = (self.bits.len() as u64).to_le_bytes().to_vec();
        out.extend(self.to_bytes());
        out
    }

    pub fn from_container(bytes: &[u8]) -> Result<Self> {
        let (head, payload) = bytes
            .split_first_chunk::<8>()
            .ok_or_else(|| Error::Container("missing 8-byte length header".into()))?;
        let len = usize::try_from(u64::from_le_bytes(*head))
            .map_err(|_| Error::Container("bit length does not fit in memory".into()))?;
        Self::from_bytes(payload, len)
    }
}

/// Writes each tap as a sign bit followed by its magnitude index in the
/// fixed width of [`CodeLayout::magnitude_bits`], MSB first.
pub fn encode(q: &QuantizedFir) -> Result<Bitstring> {
    let layout = CodeLayout::new(q.class(), q.eps())?;
    let widths = layout.magnitude_bits();
    let mut out = Bitstring::default();
    for (t, index) in q.indices().into_iter().enumerate() {
        let magnitude = index.unsigned_abs();
        if magnitude > layout.max_index[t] {
            return Err(Error::TapOutsideEnvelope {
                t,
                value: q.taps()[t],
                bound: q.class().envelope(t),
            });
        }
        out.bits.push(index < 0);
        out.push_uint(magnitude, widths[t]);
    }
    Ok(out)
}

pub fn decode(bits: &Bitstring, cls: &ImpulseClass, eps: f64) -> Result<QuantizedFir> {
    let layout = CodeLayout::new(cls, eps)?;
    let expected = layout.total_bits();
    if bits.len() != expected {
        return Err(Error::BitLength {
            expected,
            got: bits.len(),
        });
    }
    let widths = layout.magnitude_bits();
    let mut pos = 0;
    let mut taps = Vec::with_capacity(layout.len);
    for (t, width) in widths.into_iter().enumerate() {
        let negative = bits.bits[pos];
        pos += 1;
        let magnitude = bits.bits[pos..pos + width]
            .iter()
            .fold(0u64, |acc, b| (acc << 1) | u64::from(*b));
        pos += width;
        if magnitude > layout.max_index[t] {
            return Err(Error::MagnitudeIndex {
                t,
                index: magnitude,
                max: layout.max_index[t],
            });
        }
        let index = magnitude as i64;
        taps.push(grid_value(
            if negative { -index } else { index },
            layout.delta,
        ));
    }
    QuantizedFir::new(*cls, eps, taps)
}

/// Bit accounting for the class at accuracy `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitBudget {
    #[serde(rename = "M")]
    pub len: usize,
    pub delta: f64,
    pub total_bits: usize,
    /// `M (lambda ln(C/eps) - M a lambda / 2 + lambda ln M + a lambda / 2 + 3) + M`
    /// with `lambda = log2(e)`; the trailing `+ M` pays for the exact grid
    /// count used per tap.
    pub chain_bound: f64,
    /// `(1/a) ln(C/eps)^2`.
    pub main_term: f64,
}

impl BitBudget {
    pub fn ratio(&self) -> f64 {
        self.total_bits as f64 / self.main_term
    }
}

pub fn bit_budget_report(cls: &ImpulseClass, eps: f64) -> Result<BitBudget> {
    let main_term = entropy_main_term(cls, eps)?;
    let layout = CodeLayout::new(cls, eps)?;
    let m = layout.len as f64;
    let a = cls.decay();
    let lambda = std::f64::consts::LOG2_E;
    let per_tap = lambda * (cls.amplitude() / eps).ln() - m * a * lambda / 2.0
        + lambda * m.ln()
        + a * lambda / 2.0
        + 3.0;
    Ok(BitBudget {
        len: layout.len,
        delta: layout.delta,
        total_bits: layout.total_bits(),
        chain_bound: m * per_tap + m,
        main_term,
    })
}
