use nalgebra::DMatrix;

/// Symmetric sparse matrix assembled from edge weights: `L_ij = −w_ij`,
/// `L_ii = Σ_j w_ij`. Rows are stored in full (both triangles) with sorted
/// column indices.
#[derive(Debug, Clone)]
pub struct SparseSymmetric {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    edges: Vec<[usize; 2]>,
    weights: Vec<f64>,
}

impl SparseSymmetric {
    pub fn from_edge_weights(n: usize, edges: &[[usize; 2]], weights: &[f64]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut diag = vec![0.0; n];
        for (&[a, b], &w) in edges.iter().zip(weights) {
            rows[a].push((b, -w));
            rows[b].push((a, -w));
            diag[a] += w;
            diag[b] += w;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.push((i, diag[i]));
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        Self {
            n,
            offsets,
            cols,
            vals,
            edges: edges.to_vec(),
            weights: weights.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).find(|&(c, _)| c == i).map_or(0.0, |(_, v)| v))
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            *o = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.mul_vec(x, &mut out);
        out
    }

    /// `xᵀ L x` written as `Σ_e w_e (x_a − x_b)²`, exact for constants.
    pub fn energy(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .zip(&self.weights)
            .map(|(&[a, b], &w)| {
                let d = x[a] - x[b];
                w * d * d
            })
            .sum()
    }

    pub fn edge_weights(&self) -> impl Iterator<Item = ([usize; 2], f64)> + '_ {
        self.edges.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                m[(i, c)] = v;
            }
        }
        m
    }
}

/// Stiffness operator and diagonal (lumped) mass of a discrete Laplacian.
#[derive(Debug, Clone)]
pub struct Laplacian {
    pub stiffness: SparseSymmetric,
    pub mass: Vec<f64>,
}

impl Laplacian {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// Mass-weighted mean `∫f / Vol`.
    pub fn mean(&self, f: &[f64]) -> f64 {
        let total: f64 = self.mass.iter().sum();
        f.iter().zip(&self.mass).map(|(x, m)| x * m).sum::<f64>() / total
    }

    pub fn mass_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_matches_quadratic_form() {
        let s = SparseSymmetric::from_edge_weights(3, &[[0, 1], [1, 2], [0, 2]], &[1.0, 2.0, 0.5]);
        let x = [0.3, -1.2, 2.0];
        let lx = s.apply(&x);
        let q: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
        assert!((q - s.energy(&x)).abs() < 1e-13);
        assert_eq!(s.diagonal(), vec![1.5, 3.0, 2.5]);
        let ones = s.apply(&[1.0; 3]);
        assert!(ones.iter().all(|v| v.abs() < 1e-15));
    }
}
