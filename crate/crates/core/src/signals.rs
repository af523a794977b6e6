//! One-sided sequences, Z-transform evaluation and Hardy-norm estimates.
//!
//! The Z-transform uses positive powers of `z`, `X(z) = sum_t x[t] z^t`,
//! evaluated on the closed unit disk.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json::ComplexRepr;

/// Smallest boundary grid accepted by [`hinf_bracket`].
pub const MIN_GRID_POINTS: usize = 8;
/// Boundary grid used by [`hinf_bracket_default`].
pub const DEFAULT_GRID_POINTS: usize = 4096;
/// Change in the grid maximum that triggers one more dyadic refinement.
pub const REFINE_THRESHOLD: f64 = 1e-6;

const DISK_TOLERANCE: f64 = 1e-12;

/// Scalar type a [`Sequence`] can hold.
pub trait Sample: Copy + PartialEq + fmt::Debug + Send + Sync + 'static {
    type Repr: Serialize + DeserializeOwned;

    fn zero() -> Self;
    fn to_complex(self) -> Complex64;
    fn is_finite(self) -> bool;
    fn norm_sqr(self) -> f64;
    fn to_repr(self) -> Self::Repr;
    fn from_repr(r: Self::Repr) -> Self;
}

impl Sample for f64 {
    type Repr = f64;

    fn zero() -> Self {
        0.0
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn to_repr(self) -> f64 {
        self
    }
    fn from_repr(r: f64) -> Self {
        r
    }
}

impl Sample for Complex64 {
    type Repr = ComplexRepr;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn to_repr(self) -> ComplexRepr {
        self.into()
    }
    fn from_repr(r: ComplexRepr) -> Self {
        r.into()
    }
}

/// A one-sided sequence `x[0], x[1], ...` stored up to a finite horizon.
///
/// Reads before `t = 0` or past the stored horizon return zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence<T: Sample = f64> {
    samples: Vec<T>,
}

pub type ComplexSequence = Sequence<Complex64>;

impl<T: Sample> Sequence<T> {
    pub fn new(samples: Vec<T>) -> Result<Self> {
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("sequence"));
        }
        Ok(Self { samples })
    }

    /// Wraps samples without validation. Used for outputs of arithmetic on
    /// already-validated data.
    pub(crate) fn from_vec(samples: Vec<T>) -> Self {
        Self { samples }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            samples: vec![T::zero(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    /// Sample at time `t`, zero outside the stored horizon.
    pub fn at(&self, t: isize) -> T {
        if t < 0 {
            return T::zero();
        }
        self.samples.get(t as usize).copied().unwrap_or(T::zero())
    }

    /// Delays the sequence by `k` steps: `y[t] = x[t - k]`.
    pub fn shifted(&self, k: usize) -> Self {
        let mut samples = vec![T::zero(); k];
        samples.extend_from_slice(&self.samples);
        Self { samples }
    }

    pub fn z_transform(&self, z: Complex64) -> Result<Complex64> {
        z_eval(&self.samples, z)
    }
}

impl Sequence<f64> {
    /// Unit impulse of the given length (`len >= 1`).
    pub fn impulse(len: usize) -> Self {
        let mut samples = vec![0.0; len];
        if let Some(first) = samples.first_mut() {
            *first = 1.0;
        }
        Self { samples }
    }
}

impl<T: Sample> Serialize for Sequence<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Taps<R> {
            taps: Vec<R>,
        }
        Taps {
            taps: self.samples.iter().map(|x| x.to_repr()).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Sample> Deserialize<'de> for Sequence<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "R: DeserializeOwned")]
        struct Taps<R> {
            taps: Vec<R>,
        }
        let raw = Taps::<T::Repr>::deserialize(d)?;
        Sequence::new(raw.taps.into_iter().map(T::from_repr).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Real FIR kernel `k_1..k_L`; tap `l` multiplies `x[t - (l - 1)]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirKernel {
    taps: Vec<f64>,
}

impl FirKernel {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Empty("kernel"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("kernel"));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn l1_norm(&self) -> f64 {
        self.taps.iter().map(|t| t.abs()).sum()
    }

    /// Transfer function `K(z) = sum_t k[t] z^t`.
    pub fn transfer(&self, z: Complex64) -> Result<Complex64> {
        z_eval(&self.taps, z)
    }

    /// Tap-wise difference, zero-padded to the longer kernel.
    pub fn difference(&self, other: &FirKernel) -> FirKernel {
        let len = self.len().max(other.len());
        let taps = (0..len)
            .map(|i| {
                self.taps.get(i).copied().unwrap_or(0.0) - other.taps.get(i).copied().unwrap_or(0.0)
            })
            .collect();
        FirKernel { taps }
    }
}

impl<'de> Deserialize<'de> for FirKernel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            taps: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        FirKernel::new(raw.taps).map_err(serde::de::Error::custom)
    }
}

/// The class of impulse responses with `|k[t]| <= C * exp(-a t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpulseClass {
    #[serde(rename = "C")]
    c: f64,
    a: f64,
}

impl ImpulseClass {
    pub fn new(c: f64, a: f64) -> Result<Self> {
        if !c.is_finite() || !a.is_finite() {
            return Err(Error::NonFinite("impulse class"));
        }
        if c <= 0.0 || a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "impulse class needs C > 0 and a > 0, got C = {c}, a = {a}"
            )));
        }
        Ok(Self { c, a })
    }

    pub fn amplitude(&self) -> f64 {
        self.c
    }

    pub fn decay(&self) -> f64 {
        self.a
    }

    /// Envelope `C * exp(-a t)`.
    pub fn envelope(&self, t: usize) -> f64 {
        self.c * (-self.a * t as f64).exp()
    }
}

impl<'de> Deserialize<'de> for ImpulseClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "C")]
            c: f64,
            a: f64,
        }
        let raw = Raw::deserialize(d)?;
        ImpulseClass::new(raw.c, raw.a).map_err(serde::de::Error::custom)
    }
}

/// Two-sided estimate of an H-infinity norm: `lower <= ||K|| <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyBracket {
    pub lower: f64,
    pub upper: f64,
}

fn horner<T: Sample>(taps: &[T], z: Complex64) -> Complex64 {
    taps.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k.to_complex())
}

/// Evaluates `sum_t k[t] z^t` for `|z| <= 1`.
pub fn z_eval<T: Sample>(taps: &[T], z: Complex64) -> Result<Complex64> {
    if !z.is_finite() || taps.iter().any(|k| !k.is_finite()) {
        return Err(Error::NonFinite("z-transform input"));
    }
    let r = z.norm();
    if r > 1.0 + DISK_TOLERANCE {
        return Err(Error::OutsideDisk(r));
    }
    Ok(horner(taps, z))
}

/// H2 norm of a finite sequence, equal to its l2 norm.
pub fn h2_norm<T: Sample>(x: &Sequence<T>) -> f64 {
    x.samples().iter().map(|s| s.norm_sqr()).sum::<f64>().sqrt()
}

/// Direct numerical H2 estimate: root mean square of `|X(r e^{i theta})|`
/// over `grid_points` equispaced angles.
pub fn h2_norm_on_circle<T: Sample>(
    x: &Sequence<T>,
    grid_points: usize,
    radius: f64,
) -> Result<f64> {
    if grid_points == 0 {
        return Err(Error::GridTooSmall {
            min: 1,
            got: grid_points,
        });
    }
    if !(0.0..=1.0).contains(&radius) {
        return Err(Error::InvalidParameter(format!(
            "radius must lie in [0, 1], got {radius}"
        )));
    }
    let mut acc = 0.0;
    for j in 0..grid_points {
        let theta = 2.0 * PI * j as f64 / grid_points as f64;
        acc += horner(x.samples(), Complex64::from_polar(radius, theta)).norm_sqr();
    }
    Ok((acc / grid_points as f64).sqrt())
}

fn boundary_max(taps: &[f64], grid_points: usize) -> f64 {
    (0..grid_points)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / grid_points as f64;
            horner(taps, Complex64::from_polar(1.0, theta)).norm()
        })
        .fold(0.0, f64::max)
}

/// Brackets `||K||_{H^inf}` by the maximum of `|K|` on a boundary grid of
/// `grid_points` angles (lower) and the l1 tap sum (upper).
pub fn hinf_bracket(k: &FirKernel, grid_points: usize) -> Result<HardyBracket> {
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::GridTooSmall {
            min: MIN_GRID_POINTS,
            got: grid_points,
        });
    }
    Ok(HardyBracket {
        lower: boundary_max(k.taps(), grid_points),
        upper: k.l1_norm(),
    })
}

/// [`hinf_bracket`] on the default grid, doubled once, and doubled a second
/// time if the first doubling moved the lower estimate by more than
/// [`REFINE_THRESHOLD`].
pub fn hinf_bracket_default(k: &FirKernel) -> HardyBracket {
    let coarse = boundary_max(k.taps(), DEFAULT_GRID_POINTS);
    let mut lower = boundary_max(k.taps(), 2 * DEFAULT_GRID_POINTS).max(coarse);
    if lower - coarse > REFINE_THRESHOLD {
        lower = lower.max(boundary_max(k.taps(), 4 * DEFAULT_GRID_POINTS));
    }
    HardyBracket {
        lower,
        upper: k.l1_norm(),
    }
}

/// Brackets the system distance `||K - K'||_{H^inf}`.
pub fn system_distance(
    k: &FirKernel,
    other: &FirKernel,
    grid_points: usize,
) -> Result<HardyBracket> {
    hinf_bracket(&k.difference(other), grid_points)
}

/// Leading term `(1/a) * ln(C/eps)^2` of the metric entropy of the class.
pub fn entropy_main_term(cls: &ImpulseClass, eps: f64) -> Result<f64> {
    if !eps.is_finite() {
        return Err(Error::NonFinite("eps"));
    }
    if eps <= 0.0 || eps >= cls.amplitude() {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, C) = (0, {}), got {eps}",
            cls.amplitude()
        )));
    }
    let l = (cls.amplitude() / eps).ln();
    Ok(l * l / cls.decay())
}
