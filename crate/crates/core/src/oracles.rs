//! Direct-evaluation references for the systems the constructors realize.
//!
//! These are plain nested loops over the defining sums. They share no code
//! with the network constructions or the runtime.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constructors::{RationalTf, SpreadingFunction};
use crate::signals::{ComplexSequence, FirKernel, Sequence};

fn input(x: &Sequence<f64>, t: isize) -> f64 {
    if t < 0 || t as usize >= x.len() {
        0.0
    } else {
        x.samples()[t as usize]
    }
}

/// `y[t] = sum_tau k[tau + 1] x[t - tau]` for `t < horizon`.
pub fn conv_oracle(k: &FirKernel, x: &Sequence<f64>, horizon: usize) -> Sequence<f64> {
    let mut y = vec![0.0; horizon];
    for (t, out) in y.iter_mut().enumerate() {
        for (tau, kv) in k.taps().iter().enumerate() {
            *out += kv * input(x, t as isize - tau as isize);
        }
    }
    Sequence::from_vec(y)
}

/// `y[t] = sum_tau sum_f S(tau, f) x[t - tau] exp(2 pi i f t / F)`.
pub fn ltv_oracle(s: &SpreadingFunction, x: &Sequence<f64>, horizon: usize) -> ComplexSequence {
    let period = s.dopplers() as f64;
    let mut y = vec![Complex64::new(0.0, 0.0); horizon];
    for (t, out) in y.iter_mut().enumerate() {
        for tau in 0..s.delays() {
            let xv = input(x, t as isize - tau as isize);
            for f in 0..s.dopplers() {
                let angle = 2.0 * PI * f as f64 * t as f64 / period;
                let phase = Complex64::new(angle.cos(), angle.sin());
                *out += s.get(tau, f) * xv * phase;
            }
        }
    }
    Sequence::from_vec(y)
}

/// Same sum as [`ltv_oracle`] with the loops in the opposite order: first
/// the time-varying kernel `k[t, tau] = sum_f S(tau, f) e^{2 pi i f t / F}`,
/// then the sum over delays.
pub fn ltv_oracle_by_kernel(
    s: &SpreadingFunction,
    x: &Sequence<f64>,
    horizon: usize,
) -> ComplexSequence {
    let period = s.dopplers() as f64;
    let mut y = vec![Complex64::new(0.0, 0.0); horizon];
    for f in 0..s.dopplers() {
        for (t, out) in y.iter_mut().enumerate() {
            let angle = 2.0 * PI * ((f * t) % s.dopplers()) as f64 / period;
            let phase = Complex64::from_polar(1.0, angle);
            let mut acc = Complex64::new(0.0, 0.0);
            for tau in (0..s.delays()).rev() {
                acc += s.get(tau, f) * input(x, t as isize - tau as isize);
            }
            *out += acc * phase;
        }
    }
    Sequence::from_vec(y)
}

/// `y[t] = sum_i (a_i / b_0) x[t-i] - sum_{j>=1} (b_j / b_0) y[t-j]` from
/// rest.
pub fn recursion_oracle(tf: &RationalTf, x: &Sequence<f64>, horizon: usize) -> Sequence<f64> {
    let b0 = tf.den()[0];
    let mut y: Vec<f64> = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let mut acc = 0.0;
        for (i, a) in tf.num().iter().enumerate() {
            acc += a / b0 * input(x, t as isize - i as isize);
        }
        for (j, b) in tf.den().iter().enumerate().skip(1) {
            if j <= t {
                acc -= b / b0 * y[t - j];
            }
        }
        y.push(acc);
    }
    Sequence::from_vec(y)
}
