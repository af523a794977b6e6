#![allow(dead_code)]

use ltv_rnn::{FirKernel, RationalTf, Sequence, SpreadingFunction};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_kernel(rng: &mut impl Rng, max_len: usize) -> FirKernel {
    let len = rng.random_range(1..=max_len);
    FirKernel::new((0..len).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

pub fn random_input(rng: &mut impl Rng, len: usize, amplitude: f64) -> Sequence<f64> {
    Sequence::new(
        (0..len)
            .map(|_| rng.random_range(-amplitude..=amplitude))
            .collect(),
    )
    .unwrap()
}

pub fn random_spreading(rng: &mut impl Rng, delays: usize, dopplers: usize) -> SpreadingFunction {
    SpreadingFunction::new(DMatrix::from_fn(delays, dopplers, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }))
    .unwrap()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Random rational transfer function of degrees `(q, p)` whose denominator
/// is a product of factors `1 - r z` / `1 - 2 r cos(th) z + r^2 z^2` with
/// `|r| <= 0.9`, so all poles lie outside the closed unit disk.
pub fn random_stable_tf(rng: &mut impl Rng, q: usize, p: usize) -> RationalTf {
    let num: Vec<f64> = (0..=q).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut den = vec![1.0];
    let mut remaining = p;
    while remaining > 0 {
        let r: f64 = rng.random_range(0.0..0.9);
        if remaining >= 2 && rng.random_bool(0.5) {
            let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
            den = poly_mul(&den, &[1.0, -2.0 * r * th.cos(), r * r]);
            remaining -= 2;
        } else {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            den = poly_mul(&den, &[1.0, -sign * r]);
            remaining -= 1;
        }
    }
    let scale = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    den.iter_mut().for_each(|b| *b *= scale);
    RationalTf::new(num, den).unwrap()
}

pub fn max_dev_real(a: &[Complex64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - Complex64::new(*y, 0.0)).norm())
        .fold(0.0, f64::max)
}

pub fn max_dev_complex(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Bounded impulse response of the class: `C e^{-a t} u_t` with a
/// deterministic pseudo-random `u_t` in `[-1, 1]`.
pub fn admissible_impulse(c: f64, a: f64, seed: u64) -> impl Fn(usize) -> f64 {
    let scale: f64 = rng(seed).random_range(0.1..1.0);
    move |t| {
        let u: f64 =
            rng(seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)).random_range(-1.0..=1.0);
        c * (-a * t as f64).exp() * u * scale
    }
}
