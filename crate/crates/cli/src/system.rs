//! Parameter files for each system kind, and the mapping from a kind to its
//! network construction and its direct-evaluation oracle.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use ltv_rnn::codec::{quantize, truncation_length};
use ltv_rnn::oracles::{conv_oracle, ltv_oracle, recursion_oracle};
use ltv_rnn::{
    build_convolution, build_frequency_shift, build_ltv, build_quantized_fir, build_rational,
    ComplexSequence, FirKernel, ImpulseClass, InputBound, QuantizedFir, RationalTf, RnnSpec,
    Sequence, SpreadingFunction,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Conv,
    Freqshift,
    Ltv,
    Rational,
    Quantfir,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Conv => "conv",
            Kind::Freqshift => "freqshift",
            Kind::Ltv => "ltv",
            Kind::Rational => "rational",
            Kind::Quantfir => "quantfir",
        }
    }

    /// Whether the oracle for this kind produces complex samples.
    pub fn is_complex(self) -> bool {
        matches!(self, Kind::Freqshift | Kind::Ltv)
    }
}

/// A parsed parameter file.
pub enum System {
    Conv(FirKernel, Option<f64>),
    Freqshift {
        period: usize,
        f: usize,
        c_in: f64,
    },
    Ltv(SpreadingFunction, f64),
    Rational(RationalTf, Option<f64>),
    Quantfir {
        class: ImpulseClass,
        eps: f64,
        impulse: Option<Vec<f64>>,
    },
}

#[derive(Deserialize)]
struct FreqshiftParams {
    #[serde(rename = "F")]
    period: usize,
    f: usize,
    #[serde(default = "unit")]
    c_in: f64,
}

#[derive(Deserialize)]
struct QuantfirParams {
    #[serde(rename = "C")]
    c: f64,
    a: f64,
    eps: f64,
    #[serde(default)]
    impulse: Option<Vec<f64>>,
}

fn unit() -> f64 {
    1.0
}

fn take_c_in(v: &mut Value) -> Result<Option<f64>> {
    match v.as_object_mut().and_then(|m| m.remove("c_in")) {
        None => Ok(None),
        Some(c) => Ok(Some(c.as_f64().context("c_in must be a number")?)),
    }
}

impl System {
    pub fn parse(kind: Kind, text: &str) -> Result<Self> {
        let mut v: Value = serde_json::from_str(text).context("params file is not valid JSON")?;
        let sys = match kind {
            Kind::Conv => {
                let c_in = take_c_in(&mut v)?;
                System::Conv(serde_json::from_value(v).context("conv params")?, c_in)
            }
            Kind::Freqshift => {
                let p: FreqshiftParams = serde_json::from_value(v).context("freqshift params")?;
                System::Freqshift {
                    period: p.period,
                    f: p.f,
                    c_in: p.c_in,
                }
            }
            Kind::Ltv => {
                let c_in = take_c_in(&mut v)?.unwrap_or(1.0);
                System::Ltv(serde_json::from_value(v).context("ltv params")?, c_in)
            }
            Kind::Rational => {
                let c_in = take_c_in(&mut v)?;
                System::Rational(serde_json::from_value(v).context("rational params")?, c_in)
            }
            Kind::Quantfir => {
                let p: QuantfirParams = serde_json::from_value(v).context("quantfir params")?;
                System::Quantfir {
                    class: ImpulseClass::new(p.c, p.a)?,
                    eps: p.eps,
                    impulse: p.impulse,
                }
            }
        };
        Ok(sys)
    }

    /// Amplitude bound declared by the parameters, if any.
    pub fn input_bound(&self) -> Option<f64> {
        match self {
            System::Conv(_, c) | System::Rational(_, c) => *c,
            System::Freqshift { c_in, .. } | System::Ltv(_, c_in) => Some(*c_in),
            System::Quantfir { .. } => None,
        }
    }

    /// Builds the network. Quantized FIR systems also return their taps.
    pub fn synthesize(&self) -> Result<(RnnSpec, Option<QuantizedFir>)> {
        let with_bound = |spec: RnnSpec, c: &Option<f64>| match c {
            Some(c) => spec.with_input_bound(*c),
            None => spec,
        };
        Ok(match self {
            System::Conv(k, c) => (with_bound(build_convolution(k), c), None),
            System::Freqshift { period, f, c_in } => (
                build_frequency_shift(*period, *f, InputBound::new(*c_in)?)?,
                None,
            ),
            System::Ltv(s, c_in) => (build_ltv(s, InputBound::new(*c_in)?), None),
            System::Rational(tf, c) => (with_bound(build_rational(tf), c), None),
            System::Quantfir {
                class,
                eps,
                impulse,
            } => {
                let (q, spec) = match impulse {
                    Some(taps) => {
                        let taps = taps.clone();
                        build_quantized_fir(class, |t| taps.get(t).copied().unwrap_or(0.0), *eps)?
                    }
                    None => build_quantized_fir(class, |t| class.envelope(t), *eps)?,
                };
                (spec, Some(q))
            }
        })
    }

    /// Direct evaluation of the system on `x`, as complex samples.
    pub fn oracle(&self, x: &Sequence<f64>, horizon: usize) -> Result<Vec<Complex64>> {
        let real = |y: Sequence<f64>| {
            y.samples()
                .iter()
                .map(|v| Complex64::new(*v, 0.0))
                .collect()
        };
        let complex = |y: ComplexSequence| y.into_samples();
        Ok(match self {
            System::Conv(k, _) => real(conv_oracle(k, x, horizon)),
            System::Freqshift { period, f, .. } => {
                if *f >= *period {
                    bail!("frequency index f = {f} must be below the period F = {period}");
                }
                complex(ltv_oracle(&one_hot(*period, *f)?, x, horizon))
            }
            System::Ltv(s, _) => complex(ltv_oracle(s, x, horizon)),
            System::Rational(tf, _) => real(recursion_oracle(tf, x, horizon)),
            System::Quantfir {
                class,
                eps,
                impulse,
            } => {
                // Quantize the impulse response tap by tap, independently of
                // the constructor, and convolve.
                let len = truncation_length(class, *eps)?;
                let delta = eps / (2.0 * len as f64);
                let taps = (0..len)
                    .map(|t| {
                        let w = match impulse {
                            Some(v) => v.get(t).copied().unwrap_or(0.0),
                            None => class.envelope(t),
                        };
                        quantize(w, delta)
                    })
                    .collect();
                real(conv_oracle(&FirKernel::new(taps)?, x, horizon))
            }
        })
    }
}

/// Spreading function with a single unit weight at delay 0, Doppler `f`.
fn one_hot(period: usize, f: usize) -> Result<SpreadingFunction> {
    let mut row = vec![Complex64::new(0.0, 0.0); period];
    row[f] = Complex64::new(1.0, 0.0);
    Ok(SpreadingFunction::from_rows(&[row])?)
}
