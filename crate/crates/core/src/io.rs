//! JSON encoding for matrices and state vectors:
//! `{"dims": [d1, ...], "data": [[re, im], ...]}` with row-major flattening.
//! A payload with `Π dims` entries is a state vector, one with `(Π dims)²`
//! entries is a square matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, DensityOperator, Matrix, PureState, UnitaryOperator, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayJson {
    pub dims: Vec<usize>,
    pub data: Vec<[f64; 2]>,
}

/// Decoded payload.
#[derive(Debug, Clone, PartialEq)]
pub enum Array {
    Vector(Vector, Vec<usize>),
    Matrix(Matrix, Vec<usize>),
}

impl ArrayJson {
    pub fn from_matrix(m: &Matrix, dims: &[usize]) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self { dims: dims.to_vec(), data }
    }

    pub fn from_vector(v: &Vector, dims: &[usize]) -> Self {
        Self { dims: dims.to_vec(), data: v.iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn from_state(psi: &PureState) -> Self {
        Self::from_vector(psi.amplitudes(), psi.dims())
    }

    pub fn from_unitary(u: &UnitaryOperator) -> Self {
        Self::from_matrix(u.matrix(), u.dims())
    }

    pub fn decode(&self) -> Result<Array> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d == 0) {
            return Err(Error::Parse(format!("invalid dims {:?}", self.dims)));
        }
        if let Some(bad) = self.data.iter().flatten().find(|x| !x.is_finite()) {
            return Err(Error::Parse(format!("non-finite entry {bad}")));
        }
        let n: usize = self.dims.iter().product();
        let entries = self.data.iter().map(|&[re, im]| c(re, im));
        if self.data.len() == n {
            Ok(Array::Vector(Vector::from_iterator(n, entries), self.dims.clone()))
        } else if self.data.len() == n * n {
            Ok(Array::Matrix(Matrix::from_row_iterator(n, n, entries), self.dims.clone()))
        } else {
            Err(Error::Parse(format!(
                "{} entries do not fit dims {:?} (expected {n} or {})",
                self.data.len(),
                self.dims,
                n * n
            )))
        }
    }

    pub fn to_matrix(&self) -> Result<(Matrix, Vec<usize>)> {
        match self.decode()? {
            Array::Matrix(m, dims) => Ok((m, dims)),
            Array::Vector(..) => Err(Error::Parse("expected a matrix, found a vector".into())),
        }
    }

    pub fn to_unitary(&self) -> Result<UnitaryOperator> {
        let (m, dims) = self.to_matrix()?;
        UnitaryOperator::new(m, dims)
    }

    pub fn to_state(&self) -> Result<PureState> {
        match self.decode()? {
            Array::Vector(v, dims) => PureState::new(v, dims),
            Array::Matrix(..) => Err(Error::Parse("expected a state vector, found a matrix".into())),
        }
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        let (m, dims) = self.to_matrix()?;
        DensityOperator::new(m, dims)
    }
}

pub fn parse_array(text: &str) -> Result<ArrayJson> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;

    #[test]
    fn rejects_bad_payloads() {
        assert!(matches!(parse_array("{\"dims\":[2],\"data\":[[1,0]]}").unwrap().decode(), Err(Error::Parse(_))));
        assert!(parse_array("{\"dims\":[2],\"data\":[[1e999,0],[0,0]]}").is_err()
            || matches!(
                parse_array("{\"dims\":[2],\"data\":[[1e999,0],[0,0]]}").unwrap().decode(),
                Err(Error::Parse(_))
            ));
        assert!(matches!(parse_array("{\"dims\":[2]}"), Err(Error::Parse(_))));
    }

    #[test]
    fn vector_vs_matrix() {
        let s = ArrayJson::from_state(&PureState::plus());
        assert!(matches!(s.decode().unwrap(), Array::Vector(..)));
        assert!(s.to_unitary().is_err());
        let u = ArrayJson::from_unitary(&gates::cnot());
        assert_eq!(u.to_unitary().unwrap(), gates::cnot());
        assert!(u.to_state().is_err());
    }
}
