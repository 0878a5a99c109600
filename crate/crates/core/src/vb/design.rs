use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rng::{stream, substream};

/// Dense `n × p` design matrix stored column by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub n: usize,
    pub p: usize,
    data: Vec<f64>,
}

impl Design {
    pub fn from_columns(n: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        let p = columns.len();
        if n == 0 || p == 0 {
            return domain("design needs n, p >= 1");
        }
        let mut data = Vec::with_capacity(n * p);
        for c in &columns {
            if c.len() != n {
                return domain(format!("column of length {} in a design with n={n}", c.len()));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return domain("design entries must be finite");
            }
            data.extend_from_slice(c);
        }
        Ok(Self { n, p, data })
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column_sq_norms(&self) -> Vec<f64> {
        (0..self.p).map(|i| self.column(i).iter().map(|v| v * v).sum()).collect()
    }

    /// `X v`.
    pub fn mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                for (o, x) in out.iter_mut().zip(self.column(i)) {
                    *o += x * vi;
                }
            }
        }
        out
    }

    /// `Xᵀ u`.
    pub fn tmul(&self, u: &[f64]) -> Vec<f64> {
        (0..self.p).map(|i| dot(self.column(i), u)).collect()
    }

    /// Columns reordered so that new column `j` is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let cols = perm.iter().map(|&j| self.column(j).to_vec()).collect();
        Self::from_columns(self.n, cols).expect("same shape")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// I.i.d. standard normal design from the stream `(seed, 0)`.
pub fn generate_design(n: usize, p: usize, seed: u64) -> Result<Design> {
    if n == 0 || p == 0 {
        return domain("design needs n, p >= 1");
    }
    let mut rng = stream(seed, 0);
    let data = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    Ok(Design { n, p, data })
}

/// Design, truth and response `Y = Xθ₀ + ε` with unit noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionInstance {
    pub design: Design,
    pub response: Vec<f64>,
}

impl RegressionInstance {
    pub fn new(design: Design, response: Vec<f64>) -> Result<Self> {
        if response.len() != design.n {
            return domain(format!(
                "response has length {} but design has n={}",
                response.len(),
                design.n
            ));
        }
        if response.iter().any(|v| !v.is_finite()) {
            return domain("response entries must be finite");
        }
        Ok(Self { design, response })
    }

    /// Draw `Y = Xθ₀ + ε` using the stream `(seed, 1)`.
    pub fn simulate(design: Design, theta0: &[f64], seed: u64) -> Result<Self> {
        if theta0.len() != design.p {
            return domain("truth length does not match the number of columns");
        }
        let mut rng = substream(seed, 1, 0);
        let mean = design.mul(theta0);
        let response = mean.iter().map(|m| m + rng.sample::<f64, _>(StandardNormal)).collect();
        Self::new(design, response)
    }

    pub fn n(&self) -> usize {
        self.design.n
    }

    pub fn p(&self) -> usize {
        self.design.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_centered() {
        let a = generate_design(40, 30, 11).unwrap();
        assert_eq!(a, generate_design(40, 30, 11).unwrap());
        let mean: f64 = (0..30).flat_map(|i| a.column(i).to_vec()).sum::<f64>() / 1200.0;
        assert!(mean.abs() < 4.0 / 1200f64.sqrt());
    }

    #[test]
    fn products_agree() {
        let d = Design::from_columns(2, vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(d.mul(&[1.0, 0.0, -1.0]), vec![-4.0, -4.0]);
        assert_eq!(d.tmul(&[1.0, 1.0]), vec![3.0, 7.0, 11.0]);
        assert!(Design::from_columns(2, vec![vec![1.0]]).is_err());
    }
}
