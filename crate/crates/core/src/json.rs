//! JSON representations shared across the crate.
//!
//! Complex numbers are written as `{"re": .., "im": ..}` objects and matrices
//! as row-major lists of lists.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRepr {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexRepr {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexRepr> for Complex64 {
    fn from(z: ComplexRepr) -> Self {
        Complex64::new(z.re, z.im)
    }
}

pub(crate) fn rows_of<T: Clone + nalgebra::Scalar>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().cloned().collect())
        .collect()
}

pub(crate) fn matrix_from_rows<T: Clone + nalgebra::Scalar>(
    rows: &[Vec<T>],
    ncols: usize,
) -> Option<DMatrix<T>> {
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flat_map(|r| r.iter().cloned()),
    ))
}

pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<ComplexRepr> = v.iter().copied().map(Into::into).collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let reprs = Vec::<ComplexRepr>::deserialize(d)?;
        Ok(reprs.into_iter().map(Into::into).collect())
    }
}

pub mod complex_rows {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<Vec<ComplexRepr>> = v
            .iter()
            .map(|row| row.iter().copied().map(Into::into).collect())
            .collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
        let reprs = Vec::<Vec<ComplexRepr>>::deserialize(d)?;
        Ok(reprs
            .into_iter()
            .map(|row| row.into_iter().map(Into::into).collect())
            .collect())
    }
}
